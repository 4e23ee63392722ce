use crate::linalg::sq_dist;

/// Indices of the k nearest points to `points[i]`, excluding `i`, in
/// increasing distance; equal distances are ordered by index.
pub fn knn(points: &[Vec<f64>], i: usize, k: usize) -> Vec<usize> {
    let mut d: Vec<(f64, usize)> = points
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != i)
        .map(|(j, p)| (sq_dist(&points[i], p), j))
        .collect();
    let k = k.min(d.len());
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < d.len() {
        d.select_nth_unstable_by(k, cmp);
        d.truncate(k);
    }
    d.sort_by(cmp);
    d.into_iter().map(|(_, j)| j).collect()
}

pub fn knn_table(points: &[Vec<f64>], k: usize) -> Vec<Vec<usize>> {
    (0..points.len()).map(|i| knn(points, i, k)).collect()
}
