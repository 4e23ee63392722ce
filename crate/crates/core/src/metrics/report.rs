use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{mse_fraction, qdm, qgc, qnp, random_qgc_baseline, random_qnp_baseline, PairSelection, ProjectionPair};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub mean: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RandomBaselines {
    pub qnp: BTreeMap<usize, Baseline>,
    pub qgc: BTreeMap<String, BTreeMap<usize, Baseline>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    /// Absent when the pair carries no manifold distances.
    pub mse_fraction: Option<f64>,
    pub qdm_pearson: f64,
    pub qdm_spearman: f64,
    pub qnp: BTreeMap<usize, f64>,
    /// label -> k -> value, computed in the projected space.
    pub qgc: BTreeMap<String, BTreeMap<usize, f64>>,
    pub random_baselines: RandomBaselines,
}

impl QualityReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreConfig {
    pub ks: Vec<usize>,
    /// Pairs used for QDM; `None` means Natural PCA with min(N-1, 100) pairs.
    pub selection: Option<PairSelection>,
    /// Monte-Carlo trials per random baseline; 0 skips them.
    pub trials: usize,
    pub seed: u64,
}

impl Default for ScoreConfig {
    fn default() -> Self {
        ScoreConfig {
            ks: vec![5, 10],
            selection: None,
            trials: 100,
            seed: 0,
        }
    }
}

pub fn score_projection(pair: &ProjectionPair, labels: Option<&[String]>, cfg: &ScoreConfig) -> Result<QualityReport> {
    let n = pair.len();
    if n < 2 {
        return Err(Error::InvalidInput("at least two points are required".into()));
    }
    if cfg.ks.is_empty() {
        return Err(Error::InvalidInput("no neighbourhood sizes requested".into()));
    }
    let mse = pair
        .sq_distances
        .as_ref()
        .map(|d| mse_fraction(&pair.original, d))
        .transpose()?;
    let selection = cfg.selection.unwrap_or(PairSelection::Npca((n - 1).min(100)));
    let (p, s) = qdm(pair, selection)?;
    let mut report = QualityReport {
        mse_fraction: mse,
        qdm_pearson: p,
        qdm_spearman: s,
        qnp: BTreeMap::new(),
        qgc: BTreeMap::new(),
        random_baselines: RandomBaselines::default(),
    };
    for (t, &k) in cfg.ks.iter().enumerate() {
        report.qnp.insert(k, qnp(pair, k)?);
        let seed = cfg.seed.wrapping_add(t as u64);
        if cfg.trials > 0 {
            let b = random_qnp_baseline(pair.original.points(), k, cfg.trials, seed)?;
            report.random_baselines.qnp.insert(k, b);
        }
        if let Some(l) = labels {
            for (label, v) in qgc(&pair.projected, l, k)? {
                report.qgc.entry(label).or_default().insert(k, v);
            }
            if cfg.trials > 0 {
                for (label, b) in random_qgc_baseline(l, k, cfg.trials, seed)? {
                    report.random_baselines.qgc.entry(label).or_default().insert(k, b);
                }
            }
        }
    }
    Ok(report)
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x}"))
}

/// One row per criterion, one column per named projection, plus the
/// random baseline of the first report.
pub fn write_comparison_table<W: Write>(reports: &[(String, QualityReport)], delimiter: char, mut out: W) -> std::io::Result<()> {
    let Some((_, first)) = reports.first() else {
        return Ok(());
    };
    let mut header = vec!["criterion".to_string()];
    header.extend(reports.iter().map(|(n, _)| n.clone()));
    header.push("RANDOM".into());
    let d = delimiter.to_string();
    writeln!(out, "{}", header.join(&d))?;
    let mut row = |name: String, get: &dyn Fn(&QualityReport) -> Option<f64>, random: Option<f64>| {
        let mut cells = vec![name];
        cells.extend(reports.iter().map(|(_, r)| cell(get(r))));
        cells.push(cell(random));
        writeln!(out, "{}", cells.join(&d))
    };
    row("mse_fraction".into(), &|r| r.mse_fraction, None)?;
    row("qdm_pearson".into(), &|r| Some(r.qdm_pearson), None)?;
    row("qdm_spearman".into(), &|r| Some(r.qdm_spearman), None)?;
    for &k in first.qnp.keys() {
        let random = first.random_baselines.qnp.get(&k).map(|b| b.mean);
        row(format!("qnp_{k}"), &|r| r.qnp.get(&k).copied(), random)?;
    }
    for (label, per_k) in &first.qgc {
        for &k in per_k.keys() {
            let random = first.random_baselines.qgc.get(label).and_then(|m| m.get(&k)).map(|b| b.mean);
            row(
                format!("qgc_{label}_{k}"),
                &|r| r.qgc.get(label).and_then(|m| m.get(&k)).copied(),
                random,
            )?;
        }
    }
    Ok(())
}
