mod common;

use common::{gradient_descent, objective, random_instance, seeded, Instance};
use elmap::elastic_graph::{build_grid, energy, ElasticGraph, Embedding, Moduli};
use elmap::optimizer::solver::assemble;
use elmap::optimizer::{
    fit, init_grid_on_plane, init_on_pc_segment, msd, nearest_vertex, partition, project_on_segment,
    project_piecewise_linear, solve_embedding, solve_embedding_with, som_fit, CuttingFunction, FitConfig, LinearSolver,
    SomConfig, StepSchedule,
};
use elmap::{Dataset, Error};
use proptest::prelude::*;
use rand::Rng;

#[test]
fn partition_matches_brute_force() {
    let mut rng = seeded(1);
    let pts: Vec<Vec<f64>> = (0..100).map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let verts: Vec<Vec<f64>> = (0..7).map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let data = Dataset::new(pts).unwrap();
    let emb = Embedding::new(verts.clone()).unwrap();
    let p = partition(&data, &emb);
    for (i, x) in data.points().iter().enumerate() {
        let mut best = 0;
        for v in 1..7 {
            let d = |j: usize| -> f64 { x.iter().zip(&verts[j]).map(|(a, b)| (a - b) * (a - b)).sum() };
            if d(v) < d(best) {
                best = v;
            }
        }
        assert_eq!(p.owner[i], best);
    }
    let total: f64 = p.cell_weight.iter().sum();
    assert!((total - 100.0).abs() < 1e-9);
}

#[test]
fn partition_ties_and_singletons() {
    let emb = Embedding::new(vec![vec![9.0], vec![9.0], vec![0.0], vec![5.0], vec![-3.0], vec![2.0]]).unwrap();
    // equidistant from vertices 2 (at 0) and 5 (at 2)
    assert_eq!(nearest_vertex(&[1.0], &emb).0, 2);
    let one = Embedding::new(vec![vec![0.0, 0.0]]).unwrap();
    let data = Dataset::new(vec![vec![1.0, 2.0], vec![-4.0, 0.5]]).unwrap();
    assert_eq!(partition(&data, &one).owner, vec![0, 0]);
}

#[test]
fn msd_matches_summation() {
    let mut rng = seeded(2);
    let inst = random_instance(&mut rng, 5, 30, 3);
    let emb = Embedding::new((0..inst.graph.vertex_count()).map(|_| (0..inst.data.dim()).map(|_| rng.random_range(-1.0..1.0)).collect()).collect()).unwrap();
    let p = partition(&inst.data, &emb);
    let w: f64 = inst.data.weights().iter().sum();
    let direct: f64 = (0..inst.data.len())
        .map(|i| {
            let y = emb.position(p.owner[i]);
            inst.data.weights()[i] * inst.data.point(i).iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
        })
        .sum::<f64>()
        / w;
    assert!((msd(&inst.data, &emb, &p) - direct).abs() < 1e-12);
    let mean = Embedding::new(vec![inst.data.weighted_mean()]).unwrap();
    let pm = partition(&inst.data, &mean);
    assert!((msd(&inst.data, &mean, &pm) - inst.data.total_variance()).abs() < 1e-12);
}

#[test]
fn solve_single_vertex_is_mean() {
    let data = Dataset::new(vec![vec![1.0, 0.0], vec![3.0, 4.0], vec![2.0, 2.0]]).unwrap().with_weights(vec![1.0, 2.0, 1.0]).unwrap();
    let g = ElasticGraph::chain(1, &Moduli::default()).unwrap();
    let emb = Embedding::new(vec![vec![0.0, 0.0]]).unwrap();
    let s = solve_embedding(&data, &g, &partition(&data, &emb)).unwrap();
    let mean = data.weighted_mean();
    assert!(s.position(0).iter().zip(&mean).all(|(a, b)| (a - b).abs() < 1e-14));
}

#[test]
fn two_vertex_closed_form_and_limits() {
    let data = Dataset::new(vec![vec![0.0], vec![1.0]]).unwrap();
    let emb = Embedding::new(vec![vec![0.0], vec![1.0]]).unwrap();
    let part = partition(&data, &emb);
    for lambda in [1e-8, 0.1, 1.0, 1e8] {
        let g = ElasticGraph::chain(2, &Moduli::new(lambda, 0.1).unwrap()).unwrap();
        let s = solve_embedding(&data, &g, &part).unwrap();
        // (1/2 + λ) a − λ b = 0, −λ a + (1/2 + λ) b = 1/2
        let det = (0.5 + lambda) * (0.5 + lambda) - lambda * lambda;
        let a = lambda * 0.5 / det;
        let b = (0.5 + lambda) * 0.5 / det;
        // the system's condition number grows like λ
        let tol = 1e-12 * (1.0 + lambda);
        assert!((s.position(0)[0] - a).abs() < tol && (s.position(1)[0] - b).abs() < tol);
    }
    let g = ElasticGraph::chain(2, &Moduli::new(1e-9, 0.1).unwrap()).unwrap();
    let s = solve_embedding(&data, &g, &part).unwrap();
    assert!(s.position(0)[0].abs() < 1e-6 && (s.position(1)[0] - 1.0).abs() < 1e-6);
    let g = ElasticGraph::chain(2, &Moduli::new(1e9, 0.1).unwrap()).unwrap();
    let s = solve_embedding(&data, &g, &part).unwrap();
    assert!((s.position(0)[0] - 0.5).abs() < 1e-6 && (s.position(1)[0] - 0.5).abs() < 1e-6);
}

#[test]
fn isolated_empty_vertex_is_degenerate() {
    let data = Dataset::new(vec![vec![0.0], vec![1.0]]).unwrap();
    let g = ElasticGraph::new(2, vec![], vec![], false).unwrap();
    let emb = Embedding::new(vec![vec![0.5], vec![100.0]]).unwrap();
    let r = solve_embedding(&data, &g, &partition(&data, &emb));
    assert!(matches!(r, Err(Error::Degenerate(_))), "{r:?}");
}

#[test]
fn solver_matches_gradient_descent_on_chain() {
    let mut rng = seeded(3);
    let pts: Vec<Vec<f64>> = (0..30).map(|_| vec![rng.random_range(0.0..4.0), rng.random_range(-1.0..1.0)]).collect();
    let data = Dataset::new(pts).unwrap();
    let graph = ElasticGraph::chain(5, &Moduli::new(0.05, 0.2).unwrap()).unwrap();
    let owner = (0..30).map(|i| (data.point(i)[0] as usize).min(4)).collect();
    let inst = Instance { data, graph, owner };
    let s = solve_embedding(&inst.data, &inst.graph, &inst.partition()).unwrap();
    let gd = gradient_descent(&inst, &vec![vec![0.0; 2]; 5]);
    for (a, b) in s.positions.iter().zip(&gd) {
        assert!(a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-6));
    }
}

#[test]
fn residual_bound_and_solver_agreement() {
    for seed in 0..20 {
        let mut rng = seeded(100 + seed);
        let inst = random_instance(&mut rng, 8, 40, 4);
        let part = inst.partition();
        let (a, b) = assemble(&inst.data, &inst.graph, &part);
        let direct = solve_embedding_with(&inst.data, &inst.graph, &part, LinearSolver::Direct, None).unwrap();
        let cg = solve_embedding_with(&inst.data, &inst.graph, &part, LinearSolver::ConjugateGradient, None).unwrap();
        let m = inst.data.dim();
        let bmax = b.iter().flatten().fold(0.0f64, |acc, v| acc.max(v.abs()));
        for c in 0..m {
            let col: Vec<f64> = direct.positions.iter().map(|p| p[c]).collect();
            let r = a.mul_vec(&col);
            for (j, rv) in r.iter().enumerate() {
                assert!((rv - b[j][c]).abs() <= 1e-8 * (1.0 + bmax));
            }
        }
        for (x, y) in direct.positions.iter().zip(&cg.positions) {
            assert!(x.iter().zip(y).all(|(p, q)| (p - q).abs() < 1e-7));
        }
        let here = objective(&inst, &direct.positions);
        let mut nudged = direct.positions.clone();
        nudged[0][0] += 1e-3;
        assert!(objective(&inst, &nudged) > here);
    }
}

fn random_fit_problem(seed: u64) -> (Dataset, ElasticGraph, Embedding) {
    let mut rng = seeded(seed);
    let inst = random_instance(&mut rng, 6, 30, 3);
    let k = inst.graph.vertex_count();
    // distinct starting points, so no two vertices tie
    let picks = rand::seq::index::sample(&mut rng, inst.data.len(), k);
    let emb = Embedding::new(picks.iter().map(|i| inst.data.point(i).to_vec()).collect()).unwrap();
    (inst.data, inst.graph, emb)
}

/// Smallest difference between the nearest and second-nearest squared
/// vertex distance over all points.
fn min_assignment_gap(data: &Dataset, emb: &Embedding) -> f64 {
    data.points()
        .iter()
        .map(|x| {
            let mut d: Vec<f64> = emb.positions.iter().map(|y| x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()).collect();
            d.sort_by(f64::total_cmp);
            if d.len() > 1 { d[1] - d[0] } else { f64::INFINITY }
        })
        .fold(f64::INFINITY, f64::min)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fit_history_never_increases(seed in 0u64..1_000_000) {
        let (data, graph, emb) = random_fit_problem(seed);
        if let Ok(r) = fit(&data, &graph, &emb, &FitConfig::default()) {
            for w in r.history.windows(2) {
                prop_assert!(w[1].total <= w[0].total + 1e-10);
            }
        }
    }

    #[test]
    fn em_step_translation_equivariant(seed in 0u64..1_000_000, t in prop::collection::vec(-10.0f64..10.0, 3)) {
        let (data, graph, emb) = random_fit_problem(seed);
        let t = &t[..data.dim()];
        prop_assume!(min_assignment_gap(&data, &emb) > 1e-6);
        let part = partition(&data, &emb);
        let moved = partition(&data.translated(t), &emb.translated(t));
        prop_assert_eq!(&part.owner, &moved.owner);
        let a = solve_embedding(&data, &graph, &part).unwrap();
        let b = solve_embedding(&data.translated(t), &graph, &moved).unwrap();
        for (p, q) in a.positions.iter().zip(&b.positions) {
            for c in 0..t.len() {
                prop_assert!((p[c] + t[c] - q[c]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn segment_projection_beats_vertices(seed in 0u64..1_000_000) {
        let mut rng = seeded(seed);
        let g = common::random_graph(&mut rng, 6);
        prop_assume!(!g.edges().is_empty());
        let k = g.vertex_count();
        let emb = Embedding::new((0..k).map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]).collect()).unwrap();
        let data = Dataset::new((0..20).map(|_| vec![rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)]).collect()).unwrap();
        let proj = project_piecewise_linear(&data, &g, &emb).unwrap();
        for (x, p) in data.points().iter().zip(&proj) {
            prop_assert!(p.sq_dist <= nearest_vertex(x, &emb).1 + 1e-12);
        }
    }
}

#[test]
fn fit_at_fixed_point_stops_immediately() {
    let data = Dataset::new(vec![vec![0.0], vec![1.0]]).unwrap();
    let g = ElasticGraph::chain(2, &Moduli::new(1e-6, 0.1).unwrap()).unwrap();
    let e0 = Embedding::new(vec![vec![0.0], vec![1.0]]).unwrap();
    let opt = solve_embedding(&data, &g, &partition(&data, &e0)).unwrap();
    let r = fit(&data, &g, &opt, &FitConfig::default()).unwrap();
    assert!(r.history.len() <= 2);
    assert!(r.converged);
}

#[test]
fn parabola_chain_fit_is_deterministic_and_improves() {
    let data = elmap::synthetic::parabola(200, 0.05, 7).unwrap();
    let g = ElasticGraph::chain(20, &Moduli::default()).unwrap();
    let e0 = elmap::optimizer::init_chain_on_pc_segment(&data, &g).unwrap();
    let a = fit(&data, &g, &e0, &FitConfig::default()).unwrap();
    let b = fit(&data, &g, &e0, &FitConfig::default()).unwrap();
    assert!(a.final_value() < a.history[0].total);
    let bits = |r: &elmap::optimizer::FitResult| r.history.iter().map(|h| h.total.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a), bits(&b));
}

#[test]
fn trace_dsv_layout() {
    let data = elmap::synthetic::parabola(50, 0.05, 1).unwrap();
    let g = ElasticGraph::chain(2, &Moduli::default()).unwrap();
    let r = fit(&data, &g, &init_on_pc_segment(&data, &g).unwrap(), &FitConfig::default()).unwrap();
    let mut out = Vec::new();
    r.write_trace(&mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "iteration,msd,u_edges,u_stars,total");
    assert_eq!(lines.len(), r.history.len() + 1);
}

#[test]
fn segment_initialisation() {
    let data = Dataset::new((0..11).map(|i| vec![i as f64, 0.0]).collect()).unwrap();
    let g = ElasticGraph::chain(2, &Moduli::default()).unwrap();
    let e = init_on_pc_segment(&data, &g).unwrap();
    let mut xs = [e.position(0)[0], e.position(1)[0]];
    xs.sort_by(f64::total_cmp);
    assert!((xs[0] - 0.0).abs() < 1e-12 && (xs[1] - 10.0).abs() < 1e-12);
    assert!(init_on_pc_segment(&data, &ElasticGraph::chain(3, &Moduli::default()).unwrap()).is_err());
    let mut rng = seeded(4);
    let cloud = Dataset::new((0..40).map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-3.0..3.0), rng.random_range(-1.0..1.0)]).collect()).unwrap();
    let e = init_on_pc_segment(&cloud, &g).unwrap();
    let model = elmap::dataset::pca(&cloud, 1).unwrap();
    let (t0, t1) = (model.project_point(e.position(0), 1)[0], model.project_point(e.position(1), 1)[0]);
    let (lo, hi) = (t0.min(t1), t0.max(t1));
    for p in cloud.points() {
        let t = model.project_point(p, 1)[0];
        assert!(t >= lo - 1e-12 && t <= hi + 1e-12);
    }
    let zero = Dataset::new(vec![vec![1.0, 1.0]; 3]).unwrap();
    assert!(matches!(init_on_pc_segment(&zero, &g), Err(Error::ZeroVariance)));
}

#[test]
fn plane_initialisation() {
    let mut rng = seeded(5);
    let planar = Dataset::new(
        (0..50)
            .map(|_| {
                let (a, b): (f64, f64) = (rng.random_range(-1.0..1.0), rng.random_range(-2.0..2.0));
                vec![a + b, a - b, 2.0 * a]
            })
            .collect(),
    )
    .unwrap();
    let grid = build_grid(4, 6, &Moduli::default()).unwrap();
    let e = init_grid_on_plane(&planar, &grid).unwrap();
    let model = elmap::dataset::pca(&planar, 3).unwrap();
    for p in &e.positions {
        assert!(model.project_point(p, 3)[2].abs() < 1e-10);
    }
    assert!(energy(&grid.graph, &e).unwrap().u_stars < 1e-20);
    let line = Dataset::new((0..5).map(|i| vec![i as f64, 2.0 * i as f64]).collect()).unwrap();
    assert!(matches!(init_grid_on_plane(&line, &grid), Err(Error::RankDeficient(_))));
}

#[test]
fn segment_projection_formula() {
    let (t, p, d) = project_on_segment(&[1.0, 1.0], &[0.0, 0.0], &[2.0, 0.0]);
    assert_eq!((t, p, d), (0.5, vec![1.0, 0.0], 1.0));
    let (t, _, d) = project_on_segment(&[-1.0, 1.0], &[0.0, 0.0], &[2.0, 0.0]);
    assert_eq!((t, d), (0.0, 2.0));
}

fn som_config(grid: ElasticGraph, steps: StepSchedule, cutting: CuttingFunction, epochs: usize) -> SomConfig {
    SomConfig {
        grid,
        steps,
        cutting,
        epochs,
        seed: 9,
    }
}

#[test]
fn som_rules() {
    let grid = ElasticGraph::chain(4, &Moduli::default()).unwrap();
    let emb = Embedding::new((0..4).map(|i| vec![i as f64, 0.0]).collect()).unwrap();
    let x = Dataset::new(vec![vec![2.2, 1.5]]).unwrap();
    let full = som_fit(&x, &som_config(grid.clone(), StepSchedule::Constant(1.0), CuttingFunction::Delta, 1), &emb).unwrap();
    assert_eq!(full.position(2), &[2.2, 1.5]);
    assert_eq!(full.position(1), emb.position(1));
    let cloud = Dataset::new(vec![vec![5.0, 5.0], vec![-1.0, 3.0], vec![0.3, 0.3]]).unwrap();
    let still = som_fit(
        &cloud,
        &som_config(grid, StepSchedule::Constant(0.0), CuttingFunction::Gaussian { sigma_start: 2.0, sigma_end: 0.5 }, 5),
        &emb,
    )
    .unwrap();
    assert_eq!(still, emb);
    let single = ElasticGraph::chain(1, &Moduli::default()).unwrap();
    let p = Dataset::new(vec![vec![1.0]]).unwrap();
    let r = som_fit(&p, &som_config(single, StepSchedule::Constant(0.25), CuttingFunction::Delta, 10), &Embedding::new(vec![vec![0.0]]).unwrap()).unwrap();
    assert!((r.position(0)[0] - (1.0 - 0.75f64.powi(10))).abs() < 1e-14);
}
