use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::CliError;

/// Flat key/value run configuration. Keys mirror the long flag names with
/// dashes replaced by underscores; flags win over the file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub run_name: Option<String>,
    pub delimiter: Option<char>,
    pub label_column: Option<String>,
    pub format: Option<Vec<String>>,
    pub seed: Option<u64>,

    pub lambda: Option<f64>,
    pub mu: Option<f64>,
    pub max_iterations: Option<usize>,
    pub rel_tolerance: Option<f64>,

    pub nodes: Option<usize>,
    pub grid: Option<String>,
    pub sc_max: Option<u64>,
    pub b_max: Option<u64>,
    pub cc_max: Option<usize>,
    pub candidate_iterations: Option<usize>,

    pub projection: Option<Vec<PathBuf>>,
    pub k_list: Option<Vec<usize>>,
    pub npca_n: Option<usize>,
    pub trials: Option<usize>,

    pub system: Option<String>,
    pub x0: Option<Vec<f64>>,
    pub settle_time: Option<f64>,
    pub cycle_tol: Option<f64>,
    pub t_m: Option<f64>,
    pub alpha: Option<f64>,
    pub delta_max: Option<f64>,
    pub n_samples: Option<usize>,
    pub dt: Option<f64>,
    pub dt_record: Option<f64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Input(format!("config {}: {e}", path.display())))
    }
}

/// First of flag, config value, default.
pub fn pick<T: Clone>(flag: &Option<T>, file: &Option<T>, default: T) -> T {
    flag.clone().or_else(|| file.clone()).unwrap_or(default)
}

pub fn pick_opt<T: Clone>(flag: &Option<T>, file: &Option<T>) -> Option<T> {
    flag.clone().or_else(|| file.clone())
}

/// Parses `RxC` (also `R×C` or `R,C`).
pub fn parse_grid(s: &str) -> Result<(usize, usize), CliError> {
    let parts: Vec<&str> = s.split(['x', 'X', '×', ',']).map(str::trim).collect();
    let bad = || CliError::Input(format!("grid must look like 10x12, got {s:?}"));
    if parts.len() != 2 {
        return Err(bad());
    }
    let r = parts[0].parse().map_err(|_| bad())?;
    let c = parts[1].parse().map_err(|_| bad())?;
    if r < 2 || c < 2 {
        return Err(CliError::Input(format!("grid needs at least 2x2 nodes, got {r}x{c}")));
    }
    Ok((r, c))
}
