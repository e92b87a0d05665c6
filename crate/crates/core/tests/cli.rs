use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use onebit_cs::experiments::{run_trial, trial_seeds};
use onebit_cs::operators::{partial_fourier_operator, SensingOperator};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_onebit-cs"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const CONFIG: &str = r#"
dim_n = 16
sparsities = [2]
log2_ratios = [0, 1, 2]
trials = 10
schemes = ["pbpq", "qpbpq"]
matrix = ["fourier", "butterfly"]
base_seed = 3
threads = "auto"
"#;

#[test]
fn run_writes_reproducible_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.toml");
    fs::write(&cfg, CONFIG).unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let o = bin(&["run", "--config", p(&cfg), "--out", p(&a)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("wrote 12 rows"));
    let o = bin(&["run", "--config", p(&cfg), "--out", p(&b), "--threads", "3"]);
    assert!(o.status.success());
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    assert!(text.starts_with("scheme,matrix,n,s,log2_ratio,m,trials,mean_db,std_db\n"));
    assert_eq!(text.lines().count(), 13);

    let c = dir.path().join("c.csv");
    assert!(bin(&["run", "--config", p(&cfg), "--out", p(&c), "--seed", "4"]).status.success());
    assert_ne!(text, fs::read_to_string(&c).unwrap());
}

#[test]
fn run_reports_bad_config_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.toml");
    fs::write(&cfg, CONFIG.replace("sparsities = [2]", "sparsities = [17]")).unwrap();
    let o = bin(&["run", "--config", p(&cfg), "--out", p(&dir.path().join("x.csv"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("sparsities"), "{}", stderr(&o));

    fs::write(&cfg, CONFIG.replace("trials", "trails")).unwrap();
    let o = bin(&["run", "--config", p(&cfg), "--out", p(&dir.path().join("x.csv"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("trails"), "{}", stderr(&o));
}

#[test]
fn run_io_failures_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&["run", "--config", p(&dir.path().join("missing.toml")), "--out", p(&dir.path().join("x.csv"))]);
    assert_eq!(o.status.code(), Some(1));
    let cfg = dir.path().join("cfg.toml");
    fs::write(&cfg, CONFIG).unwrap();
    let o = bin(&["run", "--config", p(&cfg), "--out", p(&dir.path().join("no/such/dir.csv"))]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(bin(&[]).status.code(), Some(2));
    assert_eq!(bin(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(bin(&["demo", "--bogus"]).status.code(), Some(2));
    assert_eq!(bin(&["demo", "--scheme", "qpbp"]).status.code(), Some(2));
    assert_eq!(bin(&["demo", "--matrix", "butterfly", "--n", "12"]).status.code(), Some(2));
    assert_eq!(bin(&["demo", "--n", "4", "--s", "5"]).status.code(), Some(2));
    assert!(bin(&["--help"]).status.success());
}

fn parse_demo(line: &str) -> (f64, String) {
    let mut error = None;
    let mut support = None;
    for field in line.split_whitespace() {
        if let Some(v) = field.strip_prefix("error_db=") {
            error = Some(v.parse().unwrap());
        }
        if let Some(v) = field.strip_prefix("support=") {
            support = Some(v.to_string());
        }
    }
    (error.unwrap(), support.unwrap())
}

#[test]
fn demo_full_rank_fourier_pbp() {
    let cell = onebit_cs::cli::demo_cell("fourier", 4, 1, 0.0, "pbp").unwrap();
    let seed = (0..1000u64)
        .find(|&s| {
            let SensingOperator::PartialFourier(f) =
                partial_fourier_operator::<f64>(4, 4, trial_seeds(&cell, s, 0).operator).unwrap()
            else {
                unreachable!()
            };
            (0..4).all(|r| f.rows().contains(&r))
        })
        .unwrap();
    let o = bin(&["demo", "--matrix", "fourier", "--n", "4", "--s", "1", "--ratio", "0", "--scheme", "pbp", "--seed", &seed.to_string()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (err, support) = parse_demo(&stdout(&o));
    assert!(err <= -100.0, "{}", stdout(&o));
    assert_eq!(support.split(',').count(), 1);
}

#[test]
fn demo_matches_run_trial() {
    for (matrix, scheme, ratio) in [("fourier", "qpbpq", "2"), ("gaussian", "pbpq", "-1"), ("butterfly", "qpbpq_no_matrix_dither", "1.5")] {
        let o = bin(&["demo", "--matrix", matrix, "--n", "32", "--s", "3", "--ratio", ratio, "--scheme", scheme, "--seed", "9"]);
        assert!(o.status.success(), "{}", stderr(&o));
        let out = stdout(&o);
        assert_eq!(out.lines().count(), 1);
        let (err, _) = parse_demo(&out);
        let cell = onebit_cs::cli::demo_cell(matrix, 32, 3, ratio.parse().unwrap(), scheme).unwrap();
        assert_eq!(err, run_trial::<f64>(&cell, 9, 0).unwrap());
    }
}

fn slope_file(dir: &Path, name: &str, points: &[(f64, f64)]) -> String {
    let mut text = String::from("scheme,matrix,n,s,log2_ratio,m,trials,mean_db,std_db\n");
    for &(r, db) in points {
        text.push_str(&format!("qpbpq,fourier,64,4,{r},{},100,{db},0.5\n", (64.0 * r.exp2()).round()));
    }
    // Rows for another scheme and sparsity must be ignored.
    text.push_str("pbpq,fourier,64,4,3,512,100,40,0.5\nqpbpq,fourier,64,2,3,512,100,-40,0.5\n");
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn slope_of(path: &str, min_ratio: &str) -> Output {
    bin(&["slope", "--in", path, "--scheme", "qpbpq", "--s", "4", "--min-ratio", min_ratio])
}

fn parse_slope(o: &Output) -> f64 {
    let out = stdout(o);
    out.split_whitespace()
        .find_map(|f| f.strip_prefix("slope_db_per_octave="))
        .unwrap()
        .parse()
        .unwrap()
}

#[test]
fn slope_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let exact: Vec<(f64, f64)> = (0..6).map(|r| (r as f64, -5.0 * (64.0 * f64::from(r).exp2()).log10())).collect();
    let o = slope_of(&slope_file(dir.path(), "exact.csv", &exact), "0");
    assert!(o.status.success(), "{}", stderr(&o));
    assert!((parse_slope(&o) + 1.505150).abs() <= 1e-6);

    let guide = [(0.0, 5.95880017344075), (1.0, 4.45365019512085), (2.0, 2.94850021680094)];
    let o = slope_of(&slope_file(dir.path(), "guide.csv", &guide), "0");
    assert!((parse_slope(&o) + 1.5051).abs() <= 1e-4);

    let flat = [(2.0, -3.0), (3.0, -3.0), (4.0, -3.0)];
    let o = slope_of(&slope_file(dir.path(), "flat.csv", &flat), "0");
    assert_eq!(parse_slope(&o), 0.0);

    let o = slope_of(&slope_file(dir.path(), "one.csv", &flat), "4");
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bench_reports_exactness() {
    let o = bin(&["bench", "--m", "4096", "--n", "1024", "--reps", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("exact=true"), "{}", stdout(&o));
    let o = bin(&["bench", "--m", "65", "--n", "3", "--reps", "5"]);
    assert!(stdout(&o).contains("exact=true"));
    assert_eq!(bin(&["bench", "--m", "0", "--n", "3"]).status.code(), Some(2));
}
