use std::path::{Path, PathBuf};

use log::info;
use serde::Serialize;
use sha2::{Digest, Sha256};

use elmap::dataset::{parse_dsv, pca, write_dsv, DsvOptions, LabelColumn};
use elmap::dynsys::{
    find_limit_cycle, fit_invariant_manifold, sample_invariant, system_by_name, system_names, trajectory_distance_profile,
    CycleSearch, SamplerConfig,
};
use elmap::elastic_graph::{build_grid, ComplexityBudget, GraphDocument, ScForm};
use elmap::grammars::{grow_tree, Grammar, GrammarSequence, TreeConfig};
use elmap::layout::{emit_svg, layout_tree, LayoutConfig, SvgStyle};
use elmap::metrics::{mse_fraction, score_projection, write_comparison_table, ProjectionKind, ProjectionPair, ScoreConfig};
use elmap::optimizer::{fit, init_chain_on_pc_segment, init_grid_on_plane, FitConfig, FitResult};
use elmap::{synthetic, Dataset, ElasticGraph, Moduli};

use crate::config::{parse_grid, pick, pick_opt, RunConfig};
use crate::{
    CliError, Common, DynsysArgs, Elastic, FitCurveArgs, FitMapArgs, FitTreeArgs, Format, GenArgs, MetricsArgs, SyntheticKind,
};

type CliResult<T> = Result<T, CliError>;

fn io_err(what: &str, path: &Path, e: std::io::Error) -> CliError {
    CliError::Input(format!("{what} {}: {e}", path.display()))
}

fn load_config(common: &Common) -> CliResult<RunConfig> {
    match &common.config {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

/// Settings shared by every command after merging flags over the config file.
#[derive(Debug, Clone, Serialize)]
struct Resolved {
    delimiter: Option<char>,
    label_column: Option<String>,
    formats: Vec<Format>,
    seed: u64,
}

fn resolve_common(common: &Common, file: &RunConfig) -> CliResult<Resolved> {
    let formats = match (&common.format, &file.format) {
        (Some(f), _) => f.clone(),
        (None, Some(names)) => names.iter().map(|n| parse_format(n)).collect::<CliResult<_>>()?,
        (None, None) => vec![Format::Json, Format::Dsv, Format::Svg],
    };
    Ok(Resolved {
        delimiter: pick_opt(&common.delimiter, &file.delimiter),
        label_column: pick_opt(&common.label_column, &file.label_column),
        formats,
        seed: pick(&common.seed, &file.seed, 0),
    })
}

fn parse_format(s: &str) -> CliResult<Format> {
    match s {
        "json" => Ok(Format::Json),
        "dsv" => Ok(Format::Dsv),
        "svg" => Ok(Format::Svg),
        _ => Err(CliError::Input(format!("unknown format {s:?} (expected json, dsv or svg)"))),
    }
}

fn resolve_fit(e: &Elastic, file: &RunConfig) -> CliResult<(Moduli, FitConfig)> {
    let d = Moduli::default();
    let moduli = Moduli::new(pick(&e.lambda, &file.lambda, d.lambda), pick(&e.mu, &file.mu, d.mu))?;
    let fd = FitConfig::default();
    let cfg = FitConfig {
        max_iterations: pick(&e.max_iterations, &file.max_iterations, fd.max_iterations),
        rel_tolerance: pick(&e.rel_tolerance, &file.rel_tolerance, fd.rel_tolerance),
        ..fd
    };
    cfg.validate()?;
    Ok((moduli, cfg))
}

fn as_f64(s: &str) -> bool {
    s.trim().parse::<f64>().is_ok()
}

fn split_row(line: &str, delim: char) -> Vec<&str> {
    line.split(delim).map(|c| c.trim().trim_matches('"')).collect()
}

/// Header and label column detection from the first two non-blank rows.
/// A first row is a header when it has a non-numeric cell over a numeric
/// one (or any non-numeric cell when it is the only row).
fn sniff(text: &str, delim: char, label: Option<&str>) -> CliResult<DsvOptions> {
    let mut rows = text.lines().filter(|l| !l.trim().is_empty()).map(|l| split_row(l, delim));
    let mut opts = DsvOptions {
        delimiter: delim as u8,
        ..DsvOptions::default()
    };
    let Some(first) = rows.next() else {
        return Ok(opts);
    };
    let second = rows.next();
    opts.header = match &second {
        Some(s) => first.iter().zip(s).any(|(a, b)| !as_f64(a) && as_f64(b)),
        None => first.iter().any(|c| !as_f64(c)),
    };
    opts.label_column = if opts.header {
        match label {
            Some(name) => Some(LabelColumn::Name(name.to_string())),
            None if first.contains(&"label") => Some(LabelColumn::Name("label".into())),
            None => second.as_ref().and_then(|s| single_text_column(s)).map(LabelColumn::Index),
        }
    } else {
        match label {
            Some(idx) => Some(LabelColumn::Index(idx.parse().map_err(|_| {
                CliError::Input(format!("input has no header, so the label column must be an index, got {idx:?}"))
            })?)),
            None => single_text_column(&first).map(LabelColumn::Index),
        }
    };
    Ok(opts)
}

fn single_text_column(row: &[&str]) -> Option<usize> {
    let text: Vec<usize> = (0..row.len()).filter(|&i| !as_f64(row[i])).collect();
    (text.len() == 1).then(|| text[0])
}

fn default_delimiter(path: &Path) -> char {
    match path.extension().and_then(|e| e.to_str()) {
        Some("tsv") | Some("tab") => '\t',
        _ => ',',
    }
}

struct Input {
    bytes: Vec<u8>,
    data: Dataset,
}

fn read_data(path: &Path, settings: &Resolved) -> CliResult<Input> {
    let bytes = std::fs::read(path).map_err(|e| io_err("cannot read", path, e))?;
    let text = std::str::from_utf8(&bytes).map_err(|_| CliError::Input(format!("{} is not UTF-8 text", path.display())))?;
    let opts = sniff(text, settings.delimiter.unwrap_or_else(|| default_delimiter(path)), settings.label_column.as_deref())?;
    let data = parse_dsv(text, &opts).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok(Input { bytes, data })
}

fn input_path(common: &Common, file: &RunConfig) -> CliResult<PathBuf> {
    pick_opt(&common.input, &file.input).ok_or_else(|| CliError::Input("no input file given (use --input)".into()))
}

/// Output directory for one run; artifacts outside the selected formats are skipped.
struct RunDir {
    path: PathBuf,
    formats: Vec<Format>,
}

impl RunDir {
    fn create<S: Serialize>(
        command: &str,
        common: &Common,
        file: &RunConfig,
        formats: &[Format],
        settings: &S,
        inputs: &[&[u8]],
    ) -> CliResult<Self> {
        let base = pick(&common.out_dir, &file.out_dir, PathBuf::from("runs"));
        let name = match pick_opt(&common.run_name, &file.run_name) {
            Some(n) => n,
            None => {
                let mut h = Sha256::new();
                h.update(command.as_bytes());
                h.update([0]);
                h.update(serde_json::to_vec(settings).expect("settings serialise"));
                for bytes in inputs {
                    h.update([0]);
                    h.update((bytes.len() as u64).to_le_bytes());
                    h.update(bytes);
                }
                let digest = h.finalize();
                let hex: String = digest.iter().take(8).map(|b| format!("{b:02x}")).collect();
                format!("{command}-{hex}")
            }
        };
        let path = base.join(name);
        std::fs::create_dir_all(&path).map_err(|e| io_err("cannot create", &path, e))?;
        Ok(RunDir {
            path,
            formats: formats.to_vec(),
        })
    }

    fn wants(&self, name: &str) -> bool {
        let f = match Path::new(name).extension().and_then(|e| e.to_str()) {
            Some("json") => Format::Json,
            Some("svg") => Format::Svg,
            _ => Format::Dsv,
        };
        self.formats.contains(&f)
    }

    fn put(&self, name: &str, bytes: impl AsRef<[u8]>) -> CliResult<()> {
        if !self.wants(name) {
            return Ok(());
        }
        let p = self.path.join(name);
        std::fs::write(&p, bytes).map_err(|e| io_err("cannot write", &p, e))
    }

    fn put_json<T: Serialize>(&self, name: &str, value: &T) -> CliResult<()> {
        let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Numeric(e.to_string()))?;
        s.push('\n');
        self.put(name, s)
    }

    fn finish(&self) {
        println!("{}", self.path.display());
    }
}

fn trace_bytes(r: &FitResult) -> Vec<u8> {
    let mut out = Vec::new();
    r.write_trace(&mut out).expect("write to memory");
    out
}

fn fitted_curve_fraction(data: &Dataset, graph: &ElasticGraph, r: &FitResult) -> CliResult<f64> {
    let pair = ProjectionPair::piecewise_linear(data, graph, &r.embedding)?;
    Ok(1.0 - mse_fraction(data, pair.sq_distances.as_ref().expect("segment distances"))?)
}

#[derive(Serialize)]
struct CurveSettings {
    common: Resolved,
    lambda: f64,
    mu: f64,
    fit: FitConfig,
    nodes: Option<usize>,
    cc_max: usize,
}

#[derive(Serialize)]
struct CurveSummary {
    points: usize,
    nodes: usize,
    mode: &'static str,
    converged: bool,
    functional: f64,
    pc1_explained_variance: f64,
    curve_explained_variance: f64,
}

pub fn fit_curve(a: &FitCurveArgs) -> CliResult<()> {
    let file = load_config(&a.common)?;
    let common = resolve_common(&a.common, &file)?;
    let (moduli, fit_cfg) = resolve_fit(&a.elastic, &file)?;
    let nodes = pick_opt(&a.nodes, &file.nodes);
    if nodes.is_some_and(|n| n < 2) {
        return Err(CliError::Input("a curve needs at least 2 nodes".into()));
    }
    let settings = CurveSettings {
        common,
        lambda: moduli.lambda,
        mu: moduli.mu,
        fit: fit_cfg,
        nodes,
        cc_max: pick(&a.cc_max, &file.cc_max, 20),
    };
    let input = read_data(&input_path(&a.common, &file)?, &settings.common)?;
    let data = &input.data;
    let run = RunDir::create("fit-curve", &a.common, &file, &settings.common.formats, &settings, &[&input.bytes])?;

    let (graph, result, log) = match nodes {
        Some(n) => {
            let graph = ElasticGraph::chain(n, &moduli)?;
            let r = fit(data, &graph, &init_chain_on_pc_segment(data, &graph)?, &fit_cfg)?;
            (graph, r, None)
        }
        None => {
            let tree = grow_tree(
                data,
                &ComplexityBudget::branches(0, settings.cc_max),
                &GrammarSequence::new(vec![Grammar::Grow])?,
                &moduli,
                &TreeConfig {
                    fit: fit_cfg,
                    ..TreeConfig::default()
                },
            )?;
            // refit from the grown embedding so the trace covers the final graph
            let r = fit(data, &tree.graph, &tree.embedding, &fit_cfg)?;
            (tree.graph, r, Some(tree.log))
        }
    };
    let line = {
        let model = pca(data, 1)?;
        1.0 - model.residual_variance(1) / model.total_variance
    };
    let summary = CurveSummary {
        points: data.len(),
        nodes: graph.vertex_count(),
        mode: if nodes.is_some() { "fixed" } else { "grown" },
        converged: result.converged,
        functional: result.final_value(),
        pc1_explained_variance: line,
        curve_explained_variance: fitted_curve_fraction(data, &graph, &result)?,
    };
    info!(
        "curve explains {:.4} of the variance, PC1 {:.4}",
        summary.curve_explained_variance, summary.pc1_explained_variance
    );
    run.put("curve.json", with_newline(GraphDocument::from_parts(&graph, &result.embedding).to_json()?))?;
    run.put("trace.dsv", trace_bytes(&result))?;
    if let Some(log) = log {
        let mut out = Vec::new();
        log.write_dsv(&mut out).expect("write to memory");
        run.put("log.dsv", out)?;
    }
    run.put_json("summary.json", &summary)?;
    run.finish();
    Ok(())
}

fn with_newline(mut s: String) -> String {
    s.push('\n');
    s
}

#[derive(Serialize)]
struct MapSettings {
    common: Resolved,
    lambda: f64,
    mu: f64,
    fit: FitConfig,
    rows: usize,
    cols: usize,
}

#[derive(Serialize)]
struct MapSummary {
    points: usize,
    rows: usize,
    cols: usize,
    converged: bool,
    functional: f64,
    mse_fraction: f64,
    mse_fraction_piecewise: f64,
    pc2_mse_fraction: f64,
}

pub fn fit_map(a: &FitMapArgs) -> CliResult<()> {
    let file = load_config(&a.common)?;
    let common = resolve_common(&a.common, &file)?;
    let (moduli, fit_cfg) = resolve_fit(&a.elastic, &file)?;
    let (rows, cols) = parse_grid(&pick(&a.grid, &file.grid, "10x10".into()))?;
    let settings = MapSettings {
        common,
        lambda: moduli.lambda,
        mu: moduli.mu,
        fit: fit_cfg,
        rows,
        cols,
    };
    let input = read_data(&input_path(&a.common, &file)?, &settings.common)?;
    let data = &input.data;
    let run = RunDir::create("fit-map", &a.common, &file, &settings.common.formats, &settings, &[&input.bytes])?;

    let grid = build_grid(rows, cols, &moduli)?;
    let result = fit(data, &grid.graph, &init_grid_on_plane(data, &grid)?, &fit_cfg)?;
    let coords = grid.internal_coordinates(&result.embedding)?;
    let nearest = ProjectionPair::nearest_vertex(data, &result.embedding, &result.partition, &coords)?;
    let segments = ProjectionPair::piecewise_linear(data, &grid.graph, &result.embedding)?;
    let plane = ProjectionPair::linear(data, &pca(data, 2)?, 2)?;
    let fraction = |p: &ProjectionPair| mse_fraction(data, p.sq_distances.as_ref().expect("manifold distances"));
    let summary = MapSummary {
        points: data.len(),
        rows,
        cols,
        converged: result.converged,
        functional: result.final_value(),
        mse_fraction: fraction(&nearest)?,
        mse_fraction_piecewise: fraction(&segments)?,
        pc2_mse_fraction: fraction(&plane)?,
    };
    info!("map MSE fraction {:.4}, PC-2 {:.4}", summary.mse_fraction, summary.pc2_mse_fraction);

    let mut scatter = String::from(if data.labels().is_some() { "u,v,label\n" } else { "u,v\n" });
    for (i, &v) in result.partition.owner.iter().enumerate() {
        scatter.push_str(&format!("{},{}", coords[v][0], coords[v][1]));
        if let Some(l) = data.labels() {
            scatter.push(',');
            scatter.push_str(&l[i]);
        }
        scatter.push('\n');
    }
    run.put("map.json", with_newline(GraphDocument::from_parts(&grid.graph, &result.embedding).to_json()?))?;
    run.put("trace.dsv", trace_bytes(&result))?;
    run.put("coords.dsv", scatter)?;
    run.put_json("summary.json", &summary)?;
    run.finish();
    Ok(())
}

#[derive(Serialize)]
struct TreeSettings {
    common: Resolved,
    lambda: f64,
    mu: f64,
    tree: TreeConfig,
    budget: ComplexityBudget,
}

#[derive(Serialize)]
struct TreeSummary {
    points: usize,
    vertices: usize,
    branch_points: usize,
    construction_complexity: usize,
    functional: f64,
    explained_variance: f64,
}

pub fn fit_tree(a: &FitTreeArgs) -> CliResult<()> {
    let file = load_config(&a.common)?;
    let common = resolve_common(&a.common, &file)?;
    let (moduli, fit_cfg) = resolve_fit(&a.elastic, &file)?;
    let cc_max = pick(&a.cc_max, &file.cc_max, 30);
    let form = match (a.b_max, a.sc_max, file.b_max, file.sc_max) {
        (Some(b), _, _, _) => ScForm::BranchCount { b_max: b },
        (None, Some(_), _, _) => ScForm::VertexCount,
        (None, None, Some(_), Some(_)) => {
            return Err(CliError::Input("config sets both b_max and sc_max; choose one".into()));
        }
        (None, None, Some(b), None) => ScForm::BranchCount { b_max: b },
        (None, None, None, Some(_)) => ScForm::VertexCount,
        (None, None, None, None) => ScForm::BranchCount { b_max: 1 },
    };
    let budget = match form {
        ScForm::VertexCount => ComplexityBudget {
            form,
            sc_max: pick(&a.sc_max, &file.sc_max, 0),
            cc_max,
        },
        ScForm::BranchCount { b_max } => ComplexityBudget::branches(b_max, cc_max),
    };
    let tree_cfg = TreeConfig {
        fit: fit_cfg,
        candidate_iterations: pick(&a.candidate_iterations, &file.candidate_iterations, TreeConfig::default().candidate_iterations),
    };
    let settings = TreeSettings {
        common,
        lambda: moduli.lambda,
        mu: moduli.mu,
        tree: tree_cfg,
        budget,
    };
    let input = read_data(&input_path(&a.common, &file)?, &settings.common)?;
    let data = &input.data;
    let run = RunDir::create("fit-tree", &a.common, &file, &settings.common.formats, &settings, &[&input.bytes])?;

    let tree = grow_tree(data, &budget, &GrammarSequence::default(), &moduli, &tree_cfg)?;
    let layout = layout_tree(&tree.graph, &tree.embedding, &tree.partition, data.labels(), &LayoutConfig::default())?;
    let pair = ProjectionPair::piecewise_linear(data, &tree.graph, &tree.embedding)?;
    let summary = TreeSummary {
        points: data.len(),
        vertices: tree.graph.vertex_count(),
        branch_points: (3..=tree.graph.vertex_count()).map(|k| tree.graph.star_count(k)).sum(),
        construction_complexity: tree.log.cc(),
        functional: tree.value,
        explained_variance: 1.0 - mse_fraction(data, pair.sq_distances.as_ref().expect("segment distances"))?,
    };
    info!("tree with {} vertices and {} branch points", summary.vertices, summary.branch_points);

    let mut log = Vec::new();
    tree.log.write_dsv(&mut log).expect("write to memory");
    run.put("tree.json", with_newline(GraphDocument::from_parts(&tree.graph, &tree.embedding).to_json()?))?;
    run.put("log.dsv", log)?;
    run.put("metro.svg", emit_svg(&layout, &SvgStyle::default()))?;
    run.put("layout.json", with_newline(layout.to_json()?))?;
    run.put_json("summary.json", &summary)?;
    run.finish();
    Ok(())
}

#[derive(Serialize)]
struct MetricsSettings {
    common: Resolved,
    names: Vec<String>,
    score: ScoreConfig,
}

pub fn metrics(a: &MetricsArgs) -> CliResult<()> {
    let file = load_config(&a.common)?;
    let common = resolve_common(&a.common, &file)?;
    let projections = if a.projection.is_empty() {
        file.projection.clone().unwrap_or_default()
    } else {
        a.projection.clone()
    };
    if projections.is_empty() {
        return Err(CliError::Input("no projection files given (use --projection)".into()));
    }
    let mut names: Vec<String> = Vec::new();
    for p in &projections {
        let stem = p.file_stem().and_then(|s| s.to_str()).unwrap_or("projection").to_string();
        let mut name = stem.clone();
        let mut n = 2;
        while names.contains(&name) {
            name = format!("{stem}_{n}");
            n += 1;
        }
        names.push(name);
    }
    let d = ScoreConfig::default();
    let score = ScoreConfig {
        ks: pick(&a.k_list, &file.k_list, d.ks),
        selection: pick_opt(&a.npca_n, &file.npca_n).map(elmap::metrics::PairSelection::Npca),
        trials: pick(&a.trials, &file.trials, d.trials),
        seed: common.seed,
    };
    let settings = MetricsSettings { common, names, score };
    let original = read_data(&input_path(&a.common, &file)?, &settings.common)?;
    let projected: Vec<Input> = projections
        .iter()
        .map(|p| read_data(p, &settings.common))
        .collect::<CliResult<_>>()?;
    let mut inputs: Vec<&[u8]> = vec![&original.bytes];
    inputs.extend(projected.iter().map(|p| p.bytes.as_slice()));
    for (name, p) in settings.names.iter().zip(&projected) {
        if p.data.len() != original.data.len() {
            return Err(CliError::Input(format!(
                "projection {name} has {} rows but the input has {}",
                p.data.len(),
                original.data.len()
            )));
        }
    }
    let run = RunDir::create("metrics", &a.common, &file, &settings.common.formats, &settings, &inputs)?;

    let labels = original.data.labels();
    let mut reports = Vec::new();
    for (name, p) in settings.names.iter().zip(&projected) {
        let pair = ProjectionPair::new(original.data.clone(), p.data.points().to_vec(), ProjectionKind::Linear, None)?;
        let report = score_projection(&pair, labels, &settings.score)?;
        run.put(&format!("{name}.report.json"), with_newline(report.to_json()?))?;
        reports.push((name.clone(), report));
    }
    let mut table = Vec::new();
    write_comparison_table(&reports, ',', &mut table).map_err(|e| CliError::Input(e.to_string()))?;
    run.put("comparison.dsv", table)?;
    run.finish();
    Ok(())
}

#[derive(Serialize)]
struct DynsysSettings {
    common: Resolved,
    system: String,
    x0: Vec<f64>,
    search: CycleSearch,
    sampler: SamplerConfig,
    lambda: f64,
    mu: f64,
    fit: FitConfig,
    rows: usize,
    cols: usize,
}

#[derive(Serialize)]
struct DynsysSummary {
    system: String,
    period: f64,
    samples: usize,
    rows: usize,
    cols: usize,
    mse_fraction: f64,
    mse_fraction_piecewise: f64,
    pca2_mse_fraction: f64,
    test_start: Vec<f64>,
    distance_at_start: f64,
    distance_at_end: f64,
}

pub fn dynsys(a: &DynsysArgs) -> CliResult<()> {
    let file = load_config(&a.common)?;
    let common = resolve_common(&a.common, &file)?;
    let name = pick_opt(&a.system, &file.system).ok_or_else(|| {
        CliError::Input(format!("no system named; available: {}", system_names().join(", ")))
    })?;
    let sys = system_by_name(&name).ok_or_else(|| {
        CliError::Input(format!("unknown system {name:?}; available: {}", system_names().join(", ")))
    })?;
    let (d_lambda, d_mu) = (0.001, 0.01);
    let e = &a.elastic;
    let moduli = Moduli::new(pick(&e.lambda, &file.lambda, d_lambda), pick(&e.mu, &file.mu, d_mu))?;
    let (_, fit_cfg) = resolve_fit(e, &file)?;
    let x0 = pick(&a.x0, &file.x0, vec![0.5; sys.dim()]);
    if x0.len() != sys.dim() {
        return Err(CliError::Input(format!("{name} has {} state variables but x0 has {}", sys.dim(), x0.len())));
    }
    let cs = CycleSearch::default();
    let search = CycleSearch {
        settle_time: pick(&a.settle_time, &file.settle_time, cs.settle_time),
        tol: pick(&a.cycle_tol, &file.cycle_tol, cs.tol),
        ..cs
    };
    let sd = SamplerConfig::default();
    let sampler = SamplerConfig {
        t_m: pick(&a.t_m, &file.t_m, sd.t_m),
        alpha: pick(&a.alpha, &file.alpha, sd.alpha),
        delta_max: pick(&a.delta_max, &file.delta_max, sd.delta_max),
        n_samples: pick(&a.n_samples, &file.n_samples, sd.n_samples),
        dt: pick(&a.dt, &file.dt, sd.dt),
        dt_record: pick(&a.dt_record, &file.dt_record, sd.dt_record),
        manifold_dim: None,
        seed: common.seed,
    };
    sampler.validate()?;
    let (rows, cols) = parse_grid(&pick(&a.grid, &file.grid, "20x20".into()))?;
    let settings = DynsysSettings {
        common,
        system: name.clone(),
        x0,
        search,
        sampler,
        lambda: moduli.lambda,
        mu: moduli.mu,
        fit: fit_cfg,
        rows,
        cols,
    };
    let run = RunDir::create("dynsys", &a.common, &file, &settings.common.formats, &settings, &[])?;

    let cycle = find_limit_cycle(sys.as_ref(), &settings.x0, &search)?;
    info!("{name}: limit cycle with period {:.5}", cycle.period);
    let samples = sample_invariant(sys.as_ref(), &cycle, &sampler)?;
    let manifold = fit_invariant_manifold(&samples, rows, cols, &moduli, &fit_cfg)?;
    let plane = ProjectionPair::linear(&samples, &pca(&samples, 2)?, 2)?;
    // test trajectory: the cycle anchor shifted by delta_max along the diagonal
    let shift = sampler.delta_max / (sys.dim() as f64).sqrt();
    let start: Vec<f64> = cycle.points[0].iter().map(|x| x + shift).collect();
    let profile = trajectory_distance_profile(sys.as_ref(), &manifold, &start, (0.0, sampler.t_m), sampler.dt, Some(sampler.dt_record))?;
    let summary = DynsysSummary {
        system: name,
        period: cycle.period,
        samples: samples.len(),
        rows,
        cols,
        mse_fraction: manifold.mse_fraction,
        mse_fraction_piecewise: manifold.mse_fraction_piecewise,
        pca2_mse_fraction: mse_fraction(&samples, plane.sq_distances.as_ref().expect("plane distances"))?,
        test_start: start,
        distance_at_start: profile.first().map_or(0.0, |p| p.1),
        distance_at_end: profile.last().map_or(0.0, |p| p.1),
    };
    info!("manifold MSE fraction {:.4}, PCA-2 {:.4}", summary.mse_fraction, summary.pca2_mse_fraction);

    let mut samples_dsv = Vec::new();
    write_dsv(&samples, b',', &mut samples_dsv)?;
    let mut profile_dsv = String::from("t,distance\n");
    for (t, d) in &profile {
        profile_dsv.push_str(&format!("{t},{d}\n"));
    }
    run.put_json("cycle.json", &cycle)?;
    run.put("samples.dsv", samples_dsv)?;
    run.put("samples.json", with_newline(samples.to_json()?))?;
    run.put("manifold.json", with_newline(GraphDocument::from_parts(&manifold.grid.graph, &manifold.embedding).to_json()?))?;
    run.put("profile.dsv", profile_dsv)?;
    run.put_json("summary.json", &summary)?;
    run.finish();
    Ok(())
}

pub fn gen_synthetic(a: &GenArgs) -> CliResult<()> {
    let data = match a.kind {
        SyntheticKind::Parabola => synthetic::parabola(a.n, a.noise, a.seed)?,
        SyntheticKind::SCurve => synthetic::s_curve(a.n, a.dim, a.noise, a.seed)?,
        SyntheticKind::YBranches => synthetic::y_branches(a.n, a.noise, a.seed)?,
        SyntheticKind::CountryLike => synthetic::country_like(a.n, a.noise, a.seed)?,
    };
    let mut out = Vec::new();
    write_dsv(&data, b',', &mut out)?;
    match &a.output {
        Some(p) => std::fs::write(p, out).map_err(|e| io_err("cannot write", p, e)),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(&out).map_err(|e| CliError::Input(e.to_string()))
        }
    }
}
