use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use elmap::elastic_graph::GraphDocument;
use serde_json::Value;

fn elmap(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_elmap"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], cwd: &Path) -> PathBuf {
    let out = elmap(args, cwd);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let dir = String::from_utf8(out.stdout).unwrap();
    cwd.join(dir.trim())
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn gen(kind: &str, n: usize, seed: u64, dir: &Path) -> PathBuf {
    let file = format!("{kind}-{n}-{seed}.csv");
    ok(
        &["gen-synthetic", "--kind", kind, "--n", &n.to_string(), "--seed", &seed.to_string(), "--output", &file],
        dir,
    );
    dir.join(file)
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect()
}

#[test]
fn help_lists_every_flag() {
    let tmp = tempfile::tempdir().unwrap();
    let cases: &[(&str, &[&str])] = &[
        ("fit-curve", &["--input", "--config", "--out-dir", "--seed", "--lambda", "--mu", "--nodes", "--cc-max", "--format"]),
        ("fit-map", &["--input", "--config", "--out-dir", "--seed", "--grid", "--lambda", "--mu", "--format"]),
        ("fit-tree", &["--input", "--config", "--sc-max", "--b-max", "--cc-max", "--lambda", "--mu", "--format"]),
        ("metrics", &["--input", "--projection", "--k-list", "--npca-n", "--trials", "--seed", "--format"]),
        ("dynsys", &["--grid", "--seed", "--n-samples", "--t-m", "--alpha", "--delta-max", "--x0", "--format"]),
    ];
    for (cmd, flags) in cases {
        let out = elmap(&[cmd, "--help"], tmp.path());
        assert!(out.status.success());
        let text = String::from_utf8(out.stdout).unwrap();
        for f in *flags {
            assert!(text.contains(f), "{cmd} --help lacks {f}");
        }
    }
    let top = String::from_utf8(elmap(&["--help"], tmp.path()).stdout).unwrap();
    assert!(!top.contains("gen-synthetic"));
}

#[test]
fn empty_input_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("empty.csv"), "").unwrap();
    for cmd in ["fit-curve", "fit-map", "fit-tree"] {
        let out = elmap(&[cmd, "--input", "empty.csv"], tmp.path());
        assert_eq!(code(&out), 2, "{cmd}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("empty"));
    }
    let out = elmap(&["fit-curve", "--input", "missing.csv"], tmp.path());
    assert_eq!(code(&out), 2);
}

#[test]
fn malformed_input_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("bad.csv"), "1,2\n3,oops\n5,6\n").unwrap();
    assert_eq!(code(&elmap(&["fit-curve", "--input", "bad.csv"], tmp.path())), 2);
    fs::write(tmp.path().join("ragged.csv"), "1,2\n3\n").unwrap();
    assert_eq!(code(&elmap(&["fit-curve", "--input", "ragged.csv"], tmp.path())), 2);
}

#[test]
fn constant_data_is_a_numerical_failure() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("flat.csv"), "1,1\n1,1\n1,1\n").unwrap();
    assert_eq!(code(&elmap(&["fit-curve", "--input", "flat.csv", "--nodes", "3"], tmp.path())), 3);
}

#[test]
fn fit_curve_beats_the_first_component_on_a_parabola() {
    let tmp = tempfile::tempdir().unwrap();
    let data = gen("parabola", 200, 1, tmp.path());
    let input = data.to_str().unwrap();
    let grown = ok(&["fit-curve", "--input", input], tmp.path());
    let s = json(&grown.join("summary.json"));
    assert_eq!(s["mode"], "grown");
    assert_eq!(s["nodes"], 22);
    assert!(s["curve_explained_variance"].as_f64().unwrap() > s["pc1_explained_variance"].as_f64().unwrap() + 0.1);
    for f in ["curve.json", "trace.dsv", "log.dsv", "summary.json"] {
        assert!(grown.join(f).exists(), "{f}");
    }
    let log = fs::read_to_string(grown.join("log.dsv")).unwrap();
    assert_eq!(log.lines().count(), 21);

    let fixed = ok(&["fit-curve", "--input", input, "--nodes", "8"], tmp.path());
    assert_ne!(fixed, grown);
    let doc = GraphDocument::from_json(&fs::read_to_string(fixed.join("curve.json")).unwrap()).unwrap();
    assert_eq!(doc.vertices, 8);
    assert!(!fixed.join("log.dsv").exists());
    let trace = fs::read_to_string(fixed.join("trace.dsv")).unwrap();
    assert!(trace.lines().next().unwrap().contains("msd"));
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let data = gen("y-branches", 150, 2, tmp.path());
    let input = data.to_str().unwrap();
    for cmd in [&["fit-curve"][..], &["fit-map", "--grid", "6x7"], &["fit-tree", "--cc-max", "8"]] {
        let mut a: Vec<&str> = cmd.to_vec();
        a.extend(["--input", input, "--out-dir", "one"]);
        let first = ok(&a, tmp.path());
        let mut b: Vec<&str> = cmd.to_vec();
        b.extend(["--input", input, "--out-dir", "two"]);
        let second = ok(&b, tmp.path());
        assert_eq!(first.file_name(), second.file_name(), "{cmd:?} run directory is content-addressed");
        assert_eq!(files(&first), files(&second), "{cmd:?}");
    }
}

#[test]
fn generator_is_seeded() {
    let tmp = tempfile::tempdir().unwrap();
    let a = fs::read(gen("s-curve", 50, 3, tmp.path())).unwrap();
    fs::remove_file(tmp.path().join("s-curve-50-3.csv")).unwrap();
    let b = fs::read(gen("s-curve", 50, 3, tmp.path())).unwrap();
    let c = fs::read(gen("s-curve", 50, 4, tmp.path())).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
    let header = String::from_utf8(a).unwrap().lines().next().unwrap().to_string();
    assert_eq!(header.split(',').count(), 10);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let data = gen("parabola", 100, 5, tmp.path());
    fs::write(
        tmp.path().join("run.toml"),
        format!("input = {:?}\nnodes = 5\nlambda = 0.02\nrun_name = \"cfg\"\n", data.to_str().unwrap()),
    )
    .unwrap();
    let from_file = ok(&["fit-curve", "--config", "run.toml"], tmp.path());
    assert!(from_file.ends_with("cfg"));
    let doc = GraphDocument::from_json(&fs::read_to_string(from_file.join("curve.json")).unwrap()).unwrap();
    assert_eq!(doc.vertices, 5);
    assert_eq!(doc.edges[0].2, 0.02);

    let flagged = ok(&["fit-curve", "--config", "run.toml", "--nodes", "7", "--run-name", "flag"], tmp.path());
    let doc = GraphDocument::from_json(&fs::read_to_string(flagged.join("curve.json")).unwrap()).unwrap();
    assert_eq!(doc.vertices, 7);
    assert_eq!(doc.edges[0].2, 0.02);

    fs::write(tmp.path().join("typo.toml"), "lamda = 0.5\n").unwrap();
    let out = elmap(&["fit-curve", "--config", "typo.toml"], tmp.path());
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("lamda"));
}

#[test]
fn invalid_settings_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let data = gen("parabola", 60, 0, tmp.path());
    let input = data.to_str().unwrap();
    for args in [
        &["fit-curve", "--input", input, "--lambda", "-1"][..],
        &["fit-curve", "--input", input, "--nodes", "1"],
        &["fit-map", "--input", input, "--grid", "1x5"],
        &["fit-map", "--input", input, "--grid", "ten"],
        &["fit-tree", "--input", input, "--b-max", "1", "--sc-max", "5"],
        &["metrics", "--input", input],
    ] {
        let out = elmap(args, tmp.path());
        assert_eq!(code(&out), 2, "{args:?}");
    }
}

#[test]
fn fit_map_writes_one_coordinate_row_per_point() {
    let tmp = tempfile::tempdir().unwrap();
    let data = gen("s-curve", 300, 4, tmp.path());
    let run = ok(&["fit-map", "--input", data.to_str().unwrap(), "--grid", "12x12", "--lambda", "0.001", "--mu", "0.01"], tmp.path());
    let coords = fs::read_to_string(run.join("coords.dsv")).unwrap();
    let mut lines = coords.lines();
    assert_eq!(lines.next(), Some("u,v"));
    assert_eq!(lines.clone().count(), 300);
    assert!(lines.all(|l| l.split(',').all(|c| c.parse::<f64>().is_ok())));
    let s = json(&run.join("summary.json"));
    assert!(s["mse_fraction"].as_f64().unwrap() < s["pc2_mse_fraction"].as_f64().unwrap());
    let doc = GraphDocument::from_json(&fs::read_to_string(run.join("map.json")).unwrap()).unwrap();
    assert_eq!(doc.vertices, 144);
}

fn svg_junctions(svg: &str) -> BTreeMap<String, usize> {
    let mut degree: BTreeMap<String, usize> = BTreeMap::new();
    for line in svg.lines().filter(|l| l.starts_with("<line ")) {
        let attr = |name: &str| {
            let key = format!("{name}=\"");
            let start = line.find(&key).unwrap() + key.len();
            line[start..].split('"').next().unwrap().to_string()
        };
        *degree.entry(format!("{},{}", attr("x1"), attr("y1"))).or_default() += 1;
        *degree.entry(format!("{},{}", attr("x2"), attr("y2"))).or_default() += 1;
    }
    degree
}

#[test]
fn fit_tree_on_y_data_draws_one_three_way_junction() {
    let tmp = tempfile::tempdir().unwrap();
    let data = gen("y-branches", 300, 0, tmp.path());
    let run = ok(&["fit-tree", "--input", data.to_str().unwrap()], tmp.path());
    let svg = fs::read_to_string(run.join("metro.svg")).unwrap();
    let degree = svg_junctions(&svg);
    assert_eq!(degree.values().filter(|&&d| d == 3).count(), 1);
    assert!(degree.values().all(|&d| d <= 3));
    for arm in ["arm0", "arm1", "arm2"] {
        assert!(svg.contains(arm), "legend lists {arm}");
    }
    let s = json(&run.join("summary.json"));
    assert_eq!(s["branch_points"], 1);
    assert!(s["construction_complexity"].as_u64().unwrap() <= 30);
    let layout = json(&run.join("layout.json"));
    assert_eq!(layout["coords"].as_array().unwrap().len(), s["vertices"].as_u64().unwrap() as usize);
    let log = fs::read_to_string(run.join("log.dsv")).unwrap();
    assert_eq!(log.lines().next(), Some("phase,op,site,value"));
}

#[test]
fn zero_construction_budget_gives_a_segment() {
    let tmp = tempfile::tempdir().unwrap();
    let data = gen("y-branches", 120, 1, tmp.path());
    let run = ok(&["fit-tree", "--input", data.to_str().unwrap(), "--cc-max", "0"], tmp.path());
    let doc = GraphDocument::from_json(&fs::read_to_string(run.join("tree.json")).unwrap()).unwrap();
    assert_eq!(doc.vertices, 2);
    assert_eq!(doc.edges.len(), 1);
    let svg = fs::read_to_string(run.join("metro.svg")).unwrap();
    assert_eq!(svg.matches("<line ").count(), 1);
    assert_eq!(fs::read_to_string(run.join("log.dsv")).unwrap().lines().count(), 1);
}

#[test]
fn vertex_count_budget_caps_the_tree() {
    let tmp = tempfile::tempdir().unwrap();
    let data = gen("y-branches", 120, 1, tmp.path());
    let run = ok(&["fit-tree", "--input", data.to_str().unwrap(), "--sc-max", "6", "--cc-max", "12"], tmp.path());
    let s = json(&run.join("summary.json"));
    assert!(s["vertices"].as_u64().unwrap() <= 6);
}

#[test]
fn format_selects_artifact_types() {
    let tmp = tempfile::tempdir().unwrap();
    let data = gen("y-branches", 100, 1, tmp.path());
    let run = ok(&["fit-tree", "--input", data.to_str().unwrap(), "--cc-max", "4", "--format", "svg"], tmp.path());
    assert_eq!(files(&run).keys().collect::<Vec<_>>(), ["metro.svg"]);
    let run = ok(&["fit-tree", "--input", data.to_str().unwrap(), "--cc-max", "4", "--format", "json,dsv"], tmp.path());
    assert_eq!(files(&run).keys().collect::<Vec<_>>(), ["layout.json", "log.dsv", "summary.json", "tree.json"]);
}

#[test]
fn tab_separated_and_headerless_input() {
    let tmp = tempfile::tempdir().unwrap();
    let headed = gen("parabola", 80, 2, tmp.path());
    let csv = fs::read_to_string(&headed).unwrap();
    let body: Vec<&str> = csv.lines().skip(1).collect();
    fs::write(tmp.path().join("p.tsv"), body.iter().map(|l| l.replace(',', "\t") + "\n").collect::<String>()).unwrap();
    fs::write(tmp.path().join("p.csv"), body.iter().map(|l| format!("{l}\n")).collect::<String>()).unwrap();
    let a = ok(&["fit-curve", "--input", "p.tsv", "--nodes", "6", "--run-name", "tsv"], tmp.path());
    let b = ok(&["fit-curve", "--input", "p.csv", "--nodes", "6", "--run-name", "csv"], tmp.path());
    let c = ok(&["fit-curve", "--input", headed.to_str().unwrap(), "--nodes", "6", "--run-name", "head"], tmp.path());
    assert_eq!(fs::read(a.join("curve.json")).unwrap(), fs::read(b.join("curve.json")).unwrap());
    assert_eq!(fs::read(a.join("curve.json")).unwrap(), fs::read(c.join("curve.json")).unwrap());
    assert_eq!(json(&c.join("summary.json"))["points"], 80);
}

fn write_rows(path: &Path, header: &str, rows: &[Vec<f64>]) {
    let mut s = format!("{header}\n");
    for r in rows {
        s.push_str(&r.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","));
        s.push('\n');
    }
    fs::write(path, s).unwrap();
}

#[test]
fn identity_projection_scores_perfectly() {
    let tmp = tempfile::tempdir().unwrap();
    let rows: Vec<Vec<f64>> = (0..40).map(|i| {
        let t = i as f64 * 0.37;
        vec![t.sin() * 2.0, t.cos() + 0.1 * t, 0.05 * t * t]
    }).collect();
    write_rows(&tmp.path().join("orig.csv"), "a,b,c", &rows);
    write_rows(&tmp.path().join("same.csv"), "a,b,c", &rows);
    let run = ok(
        &["metrics", "--input", "orig.csv", "--projection", "same.csv", "--k-list", "1,5,39", "--trials", "0"],
        tmp.path(),
    );
    let r = json(&run.join("same.report.json"));
    assert_eq!(r["qdm_pearson"], 1.0);
    assert_eq!(r["qdm_spearman"], 1.0);
    for k in ["1", "5", "39"] {
        assert_eq!(r["qnp"][k], 1.0, "k = {k}");
    }
}

#[test]
fn comparison_table_follows_input_order() {
    let tmp = tempfile::tempdir().unwrap();
    let data = gen("y-branches", 90, 3, tmp.path());
    let text = fs::read_to_string(&data).unwrap();
    let cols: Vec<Vec<&str>> = text.lines().map(|l| l.split(',').collect()).collect();
    for (name, keep) in [("zeta", vec![0usize, 1]), ("alpha", vec![2]), ("mid", vec![0, 1, 2])] {
        let s: String = cols.iter().map(|r| keep.iter().map(|&j| r[j]).collect::<Vec<_>>().join(",") + "\n").collect();
        fs::write(tmp.path().join(format!("{name}.csv")), s).unwrap();
    }
    let run = ok(
        &[
            "metrics", "--input", data.to_str().unwrap(), "--projection", "zeta.csv", "--projection", "alpha.csv", "--projection",
            "mid.csv", "--trials", "5",
        ],
        tmp.path(),
    );
    let table = fs::read_to_string(run.join("comparison.dsv")).unwrap();
    assert_eq!(table.lines().next(), Some("criterion,zeta,alpha,mid,RANDOM"));
    assert!(table.lines().any(|l| l.starts_with("qgc_arm0_5,")));
    for name in ["zeta", "alpha", "mid"] {
        assert!(run.join(format!("{name}.report.json")).exists());
    }
}

#[test]
fn mismatched_projection_rows_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    write_rows(&tmp.path().join("orig.csv"), "a,b", &[vec![0.0, 1.0], vec![1.0, 0.0], vec![2.0, 2.0]]);
    write_rows(&tmp.path().join("short.csv"), "u", &[vec![0.0], vec![1.0]]);
    let out = elmap(&["metrics", "--input", "orig.csv", "--projection", "short.csv"], tmp.path());
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("rows"));
}

#[test]
fn unknown_system_lists_the_registry() {
    let tmp = tempfile::tempdir().unwrap();
    let out = elmap(&["dynsys", "lorenz"], tmp.path());
    assert_eq!(code(&out), 2);
    let msg = String::from_utf8_lossy(&out.stderr);
    for name in ["brusselator", "vdp", "vdp3"] {
        assert!(msg.contains(name), "{msg}");
    }
    assert_eq!(code(&elmap(&["dynsys", "vdp", "--x0", "1,2,3"], tmp.path())), 2);
    assert_eq!(code(&elmap(&["dynsys", "vdp", "--alpha", "1.5"], tmp.path())), 2);
}

#[test]
fn dynsys_pipeline_is_seeded_and_converges_to_the_manifold() {
    let tmp = tempfile::tempdir().unwrap();
    let args = |dir: &'static str, seed: &'static str| {
        vec!["dynsys", "vdp3", "--n-samples", "600", "--grid", "10x10", "--seed", seed, "--out-dir", dir]
    };
    let a = ok(&args("a", "3"), tmp.path());
    let b = ok(&args("b", "3"), tmp.path());
    let c = ok(&args("c", "4"), tmp.path());
    assert_eq!(files(&a), files(&b));
    assert_ne!(fs::read(a.join("samples.dsv")).unwrap(), fs::read(c.join("samples.dsv")).unwrap());
    let s = json(&a.join("summary.json"));
    assert_eq!(s["samples"], 600);
    assert!((s["period"].as_f64().unwrap() - 6.663).abs() < 0.01);
    assert!(s["mse_fraction"].as_f64().unwrap() < s["pca2_mse_fraction"].as_f64().unwrap());
    assert!(s["distance_at_end"].as_f64().unwrap() < s["distance_at_start"].as_f64().unwrap());
    let samples = fs::read_to_string(a.join("samples.dsv")).unwrap();
    assert_eq!(samples.lines().count(), 601);
    let profile = fs::read_to_string(a.join("profile.dsv")).unwrap();
    assert_eq!(profile.lines().next(), Some("t,distance"));
    assert!(json(&a.join("cycle.json"))["points"].as_array().unwrap().len() > 100);
}
