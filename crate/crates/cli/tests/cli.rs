use std::path::Path;
use std::process::{Command, Output};

use mur_cli::{fmt_g12, region_csv, ProblemFile};
use mur_core::region::{offset, trace_boundary, Sampling, SamplingScheme};
use mur_core::{ErrorMeasure, Execution, ProblemInstance, RegionSample, SolveStatus, WeightVector};
use tempfile::TempDir;

fn mur(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mur")).args(args).output().expect("run mur")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "exit {:?}: {}", o.status.code(), String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn field(report: &str, key: &str) -> f64 {
    report.lines().find_map(|l| l.strip_prefix(key).map(|v| v.trim().parse().unwrap())).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_string_lossy().into_owned()
}

/// Rows of a result CSV as (measure, numeric columns, status).
fn parse_csv(text: &str, n: usize) -> Vec<(String, Vec<f64>, String)> {
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), mur_cli::csv_header(n));
    lines
        .map(|l| {
            let cols: Vec<&str> = l.split(',').collect();
            assert_eq!(cols.len(), 2 * n + 5, "{l}");
            let nums = cols[2..cols.len() - 1].iter().map(|c| c.parse::<f64>().unwrap()).collect();
            (cols[1].to_string(), nums, cols[cols.len() - 1].to_string())
        })
        .collect()
}

const SPIN1_UNIFORM: &str = r#"{
  "dim": 3,
  "observables": [
    {"name": "L1", "builtin": "spin1_L1"},
    {"name": "L2", "builtin": "spin1_L2"},
    {"name": "L3", "builtin": "spin1_L3"}
  ],
  "costs": [{"type": "quadratic"}, {"type": "quadratic"}, {"type": "quadratic"}],
  "measure": "C",
  "weights": [0.3333333333333333, 0.3333333333333333, 0.3333333333333333]
}"#;

#[test]
fn transport_prints_matching_primal_and_dual() {
    let out = stdout(&mur(&["transport", "--cost", "discrete", "--p", "0.7,0.3", "--q", "0.3,0.7"]));
    assert_eq!(field(&out, "primal"), 0.4);
    assert_eq!(field(&out, "dual"), 0.4);

    let out = stdout(&mur(&["transport", "--cost", "discrete", "--p", "0.25,0.75", "--q", "0.25,0.75"]));
    assert_eq!(field(&out, "primal"), 0.0);

    let out = stdout(&mur(&["transport", "--cost", "quadratic:-1,0,1", "--p", "0.17,0.41,0.42", "--q", "0.52,0.09,0.39"]));
    assert!(field(&out, "gap") < 1e-9);
}

#[test]
fn mccm_lists_schemes_and_bounds() {
    let out = stdout(&mur(&["mccm", "--cost", "quadratic:-1,0,1"]));
    let count = field(&out, "count");
    assert!(count <= field(&out, "bound") && field(&out, "bound") == 6.0);
    assert_eq!(out.lines().filter(|l| l.starts_with("scheme")).count(), count as usize);

    let out = stdout(&mur(&["mccm", "--cost", "discrete:2"]));
    for line in out.lines().filter(|l| l.starts_with("scheme")) {
        let phi = line.split("phi [").nth(1).unwrap().split(']').next().unwrap();
        let psi = line.split("psi [").nth(1).unwrap().split(']').next().unwrap();
        assert_eq!(phi, psi);
    }

    assert_eq!(field(&stdout(&mur(&["mccm", "--cost", "discrete:1"])), "count"), 1.0);
}

#[test]
fn error_command_orders_the_measures() {
    let dir = TempDir::new().unwrap();
    let s = 0.5f64.sqrt();
    let problem = format!(
        r#"{{"dim": 2,
            "observables": [{{"basis": [[[{s},0],[{s},0]], [[{s},0],[-{s},0]]]}}, {{"builtin": "fourier_position"}}],
            "costs": [{{"type": "discrete"}}]}}"#
    );
    let out = stdout(&mur(&["error", &write(&dir, "p.json", &problem)]));
    let (m, c, e) = (field(&out, "M"), field(&out, "C"), field(&out, "E"));
    assert!((m - s).abs() < 1e-9 && (c - 0.5).abs() < 1e-9 && (e - 0.5).abs() < 1e-9, "{out}");
}

#[test]
fn fourier_region_has_the_expected_endpoints() {
    let out = stdout(&mur(&["demo", "fourier", "--d", "2", "--measure", "E", "--samples", "41"]));
    let rows = parse_csv(&out, 2);
    assert_eq!(rows.len(), 41);
    assert!(rows.iter().all(|(m, _, s)| m == "E" && s == "optimal"));
    // columns: w_1, w_2, b, eps_1, eps_2, gap
    let (first, last) = (&rows[0].1, &rows[40].1);
    assert!(first[3].abs() < 2e-3 && (first[4] - 0.5).abs() < 2e-3);
    assert!((last[3] - 0.5).abs() < 2e-3 && last[4].abs() < 2e-3);
}

#[test]
fn offset_equals_the_library_call_bit_for_bit() {
    let dir = TempDir::new().unwrap();
    let problem = write(&dir, "spin.json", SPIN1_UNIFORM);
    let json = path(&dir, "spin.out.json");
    let csv = stdout(&mur(&["offset", &problem, "--json", &json]));

    let w = WeightVector::new(vec![1.0 / 3.0; 3]).unwrap();
    let lib = offset(&ProblemInstance::spin1().unwrap(), ErrorMeasure::Calibration, &w).unwrap();
    let cli: RegionSample = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(cli.points.len(), 1);
    let p = &cli.points[0];
    assert_eq!(p.b.to_bits(), lib.b.to_bits());
    assert_eq!(p.gap.to_bits(), lib.gap.to_bits());
    assert!(p.epsilon.iter().zip(&lib.epsilon).all(|(a, b)| a.to_bits() == b.to_bits()));

    let rows = parse_csv(&csv, 3);
    assert_eq!(rows.len(), 1);
    assert_eq!(fmt_g12(rows[0].1[3]), fmt_g12(lib.b));
}

#[test]
fn region_csv_equals_the_library_trace() {
    let out = stdout(&mur(&["--threads", "1", "demo", "fourier", "--d", "3", "--measure", "M", "--samples", "7"]));
    let lib = trace_boundary(
        &ProblemInstance::fourier(3).unwrap(),
        ErrorMeasure::Max,
        Sampling { count: 7, scheme: SamplingScheme::Auto },
        Execution::Sequential,
    )
    .unwrap();
    assert_eq!(out, region_csv(&[lib]));
}

#[test]
fn unit_weight_has_zero_offset() {
    let dir = TempDir::new().unwrap();
    let problem = SPIN1_UNIFORM.replace("[0.3333333333333333, 0.3333333333333333, 0.3333333333333333]", "[1, 0, 0]");
    for m in ["M", "C", "E"] {
        let rows = parse_csv(&stdout(&mur(&["offset", &write(&dir, "e1.json", &problem), "--measure", m])), 3);
        assert!(rows[0].1[3].abs() < 1e-7, "{m}: b = {}", rows[0].1[3]);
    }
}

#[test]
fn reruns_are_bit_identical_and_outputs_parse() {
    let dir = TempDir::new().unwrap();
    let run = |tag: &str, threads: &str| {
        let (csv, svg, json) = (path(&dir, &format!("{tag}.csv")), path(&dir, &format!("{tag}.svg")), path(&dir, &format!("{tag}.json")));
        stdout(&mur(&["--threads", threads, "demo", "spin1", "--samples", "6", "--out", &csv, "--svg", &svg, "--json", &json]));
        [csv, svg, json].map(|p| std::fs::read(p).unwrap())
    };
    let a = run("a", "0");
    let b = run("b", "0");
    let c = run("c", "1");
    assert_eq!(a, b);
    assert_eq!(a, c);

    let rows = parse_csv(std::str::from_utf8(&a[0]).unwrap(), 3);
    assert_eq!(rows.len(), 18);
    let doc = std::str::from_utf8(&a[1]).unwrap();
    let svg = roxmltree::Document::parse(doc).unwrap();
    assert_eq!(svg.root_element().tag_name().name(), "svg");
    // three pairwise panels, one dot per point and panel
    assert_eq!(svg.descendants().filter(|n| n.has_tag_name("circle")).count(), 3 * 18);
    let samples: Vec<RegionSample> = serde_json::from_slice(&a[2]).unwrap();
    assert_eq!(samples.len(), 3);
    for (s, chunk) in samples.iter().zip(rows.chunks(6)) {
        for (p, (m, nums, status)) in s.points.iter().zip(chunk) {
            assert_eq!(m, p.measure.tag());
            assert_eq!(status, &p.status.to_string());
            assert_eq!(fmt_g12(nums[3]), fmt_g12(p.b));
            assert_eq!(p.status, SolveStatus::Optimal);
        }
    }
}

#[test]
fn two_observable_plot_draws_one_curve_per_measure() {
    let dir = TempDir::new().unwrap();
    let svg = path(&dir, "f.svg");
    stdout(&mur(&["demo", "fourier", "--d", "2", "--samples", "9", "--svg", &svg]));
    let text = std::fs::read_to_string(&svg).unwrap();
    let doc = roxmltree::Document::parse(&text).unwrap();
    let curves = doc.descendants().filter(|n| n.has_tag_name("path") && n.attribute("stroke-width") == Some("1.5")).count();
    assert_eq!(curves, 3);
}

#[test]
fn problem_files_round_trip() {
    let p = ProblemFile::parse(SPIN1_UNIFORM).unwrap();
    let again = ProblemFile::parse(&serde_json::to_string(&p).unwrap()).unwrap();
    assert_eq!(p, again);
    assert_eq!(ProblemFile::spin1(Some(ErrorMeasure::Calibration)).instance(false).unwrap().n(), 3);
}

#[test]
fn exit_codes_follow_the_error_class() {
    let dir = TempDir::new().unwrap();
    let broken = write(&dir, "broken.json", "{\n  \"dim\": 2,\n  \"observables\": [}\n");
    let o = mur(&["region", &broken]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));

    let err = ProblemFile::parse("{\"dim\": 2,\n \"costs\": [{\"type\": \"nope\"}]}").unwrap_err();
    assert!(matches!(err, mur_cli::CliError::Parse { line: 2, .. }), "{err}");

    let unknown = write(&dir, "u.json", r#"{"dim": 3, "observables": [{"builtin": "spin1_L4"}], "costs": [{"type": "discrete"}]}"#);
    assert_eq!(mur(&["region", &unknown]).status.code(), Some(2));
    assert_eq!(mur(&["transport", "--cost", "discrete", "--p", "0.5,0.6", "--q", "0.5,0.5"]).status.code(), Some(2));
    assert_eq!(mur(&["region", &path(&dir, "missing.json")]).status.code(), Some(4));
    let blocked = Path::new(&path(&dir, "missing")).join("out.csv");
    let o = mur(&["demo", "fourier", "--d", "2", "--samples", "2", "--out", blocked.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));

    // an unreachable tolerance fails every point but still writes the rows
    let o = mur(&["demo", "fourier", "--d", "2", "--samples", "1", "--measure", "C", "--tol", "1e-300"]);
    assert_eq!(o.status.code(), Some(3));
    let rows = parse_csv(&String::from_utf8(o.stdout).unwrap(), 2);
    assert_eq!(rows[0].2, "numerical_failure");
}
