use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_evopoisson"));
    c.env_remove("EVOPOISSON_SAFESET_CAP");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn field(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
        .parse()
        .unwrap()
}

/// Data rows of a CSV written by the tool (units line and header skipped).
fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().skip(2).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let header: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    let j = header.iter().position(|h| *h == name).unwrap();
    rows(csv).iter().map(|r| r[j].parse().unwrap()).collect()
}

#[test]
fn eq_reference_protection_rate() {
    let o = run(&["eq"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rate = field(&text, "protection_rate");
    assert!((rate - 0.13).abs() <= 0.03, "{rate}");
    assert!(text.contains("kind = INTERIOR_MIXED"));
    assert!(text.contains("convention = LITERAL_EQ2"));
}

#[test]
fn eq_dominant_price() {
    let o = run(&["eq", "--price", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(field(&stdout(&o), "p_star"), 1.0);
}

#[test]
fn eq_writes_csv_row() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("eq.csv");
    let o = run(&["--out", path.to_str().unwrap(), "eq", "--lambda", "20"]);
    assert!(o.status.success());
    let csv = fs::read_to_string(&path).unwrap();
    assert!(csv.starts_with("# units: lambda=players"));
    let p = column(&csv, "p_star")[0];
    assert!((p - 0.44).abs() <= 0.03);
}

#[test]
fn malformed_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, "{\"lambda\": 10, \"types\": [").unwrap();
    let o = run(&["--config", path.to_str().unwrap(), "eq"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("line"), "{err}");
}

#[test]
fn unknown_config_field_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    fs::write(&path, r#"{"lambda": 10, "types": [{"r": 1, "tau": 2}], "K": 5, "C": 4, "mu": 1}"#).unwrap();
    let o = run(&["--config", path.to_str().unwrap(), "eq"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn json_config_with_exact_rates() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    fs::write(
        &path,
        r#"{"lambda": 10, "beta": 1, "types": [{"r": 1.0, "delta": {"num": 1, "den": 2}}], "K": 5, "C": 4, "convention": "exclusive"}"#,
    )
    .unwrap();
    let o = run(&["--config", path.to_str().unwrap(), "eq"]);
    assert!(o.status.success());
    let p = field(&stdout(&o), "p_star");
    assert!((p - 5f64.ln() / 10.0).abs() < 1e-8, "{p}");
}

#[test]
fn missing_config_exits_3() {
    let o = run(&["--config", "/definitely/not/here.json", "eq"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn unwritable_output_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let target = blocker.join("out.csv");
    let o = run(&["--out", target.to_str().unwrap(), "eq"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn enumeration_cap_exits_4() {
    let o = bin().env("EVOPOISSON_SAFESET_CAP", "10").arg("eq").output().unwrap();
    assert_eq!(o.status.code(), Some(4));
    let o = bin().env("EVOPOISSON_SAFESET_CAP", "lots").arg("eq").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn empty_sweep_exits_2() {
    assert_eq!(run(&["sweep", "--grid", "r=0:1:0"]).status.code(), Some(2));
    assert_eq!(run(&["sweep", "--grid", "r="]).status.code(), Some(2));
}

#[test]
fn sweep_rows_are_lexicographic() {
    let o = run(&["sweep", "--grid", "lambda=20,10", "--grid", "r=0.1,0.9"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["sweep", "--grid", "lambda=10,20", "--grid", "r=0.1,0.5,0.9"]);
    let csv = stdout(&o);
    let keys: Vec<(String, String)> = rows(&csv).into_iter().map(|r| (r[0].clone(), r[1].clone())).collect();
    let expect: Vec<(String, String)> = ["10", "20"]
        .iter()
        .flat_map(|l| ["0.1", "0.5", "0.9"].iter().map(move |r| (l.to_string(), r.to_string())))
        .collect();
    assert_eq!(keys, expect);
}

#[test]
fn sweep_r_at_large_lambda() {
    // Both curves fall with the share of the less contagious type; no rise appears.
    let mut drops = Vec::new();
    for tau in ["0.05", "0.1"] {
        let o = run(&["sweep", "--lambda", "30", "--grid", &format!("tau1={tau}"), "--grid", "r=0:1:51"]);
        assert!(o.status.success());
        let rate = column(&stdout(&o), "protection_rate");
        assert!(rate.windows(2).all(|w| w[1] <= w[0]), "tau1={tau}");
        drops.push(rate[0] - rate[rate.len() - 1]);
    }
    assert!(drops[0] > drops[1]);
}

#[test]
fn figure_2_columns() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["--out", dir.path().to_str().unwrap(), "figure", "2", "--points", "11"]);
    assert!(o.status.success());
    for l in ["2", "10", "20", "30"] {
        let csv = fs::read_to_string(dir.path().join(format!("fig2_lambda_{l}.csv"))).unwrap();
        assert_eq!(csv.lines().nth(1).unwrap(), "lambda,r,protection_rate");
        assert_eq!(rows(&csv).len(), 11);
    }
    let at10 = fs::read_to_string(dir.path().join("fig2_lambda_10.csv")).unwrap();
    let rate = column(&at10, "protection_rate");
    // r = 0.1 is the second grid point
    assert!((rate[1] - 0.13).abs() <= 0.03);
}

#[test]
fn figure_4_trajectories_meet() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["--out", dir.path().to_str().unwrap(), "figure", "4"]);
    assert!(o.status.success());
    let ends: Vec<f64> = ["0.3", "0.7"]
        .iter()
        .map(|p0| {
            let csv = fs::read_to_string(dir.path().join(format!("fig4_lambda_10_p0_{p0}.csv"))).unwrap();
            *column(&csv, "p").last().unwrap()
        })
        .collect();
    assert!((ends[0] - ends[1]).abs() < 1e-4);
}

#[test]
fn figure_6_writes_three_traces() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["--out", dir.path().to_str().unwrap(), "--seed", "3", "figure", "6", "--n-outer", "20"]);
    assert!(o.status.success());
    for slug in ["inv_n", "inv_n_log_n", "inv_n_sq"] {
        let csv = fs::read_to_string(dir.path().join(format!("fig6_{slug}.csv"))).unwrap();
        assert_eq!(csv.lines().nth(1).unwrap(), "n,C_n,R_hat,Delta_n,p_population");
        assert_eq!(rows(&csv).len(), 20);
    }
}

#[test]
fn svg_output() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["--out", dir.path().to_str().unwrap(), "--format", "svg", "figure", "5", "--points", "21"]);
    assert!(o.status.success());
    let svg = fs::read_to_string(dir.path().join("fig5.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("<polyline"));
    assert!(!Path::new(&dir.path().join("fig5.csv")).exists());
}

#[test]
fn revenue_summary() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    let o = run(&["--out", path.to_str().unwrap(), "revenue", "--points", "101"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let c = field(&text, "C_star");
    let csv = fs::read_to_string(&path).unwrap();
    let prices = column(&csv, "C");
    let revenue = column(&csv, "revenue");
    let best = revenue.iter().enumerate().fold(0, |b, (i, &v)| if v > revenue[b] { i } else { b });
    assert!((prices[best] - c).abs() <= 0.1 + 1e-9);
}

#[test]
fn spsa_trace_and_schedule_warning() {
    let o = run(&["spsa", "--schedule", "1/n", "--n-outer", "5"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("do not meet"));
    assert_eq!(rows(&stdout(&o)).len(), 5);
    let o = run(&["spsa", "--schedule", "1/sqrt(n)"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn coupled_trace_has_population_column() {
    let o = run(&["spsa", "--mode", "coupled", "--n-outer", "10"]);
    assert!(o.status.success());
    let p = column(&stdout(&o), "p_population");
    assert!(p.iter().all(|&x| (0.0..=1.0).contains(&x)));
}

#[test]
fn reruns_are_byte_identical() {
    let a = run(&["--seed", "11", "spsa", "--n-outer", "15"]);
    let b = run(&["--seed", "11", "spsa", "--n-outer", "15"]);
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["--seed", "12", "spsa", "--n-outer", "15"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn discrete_replicator_command() {
    let o = run(&["replicator", "--discrete", "--lambda", "20", "--p0", "0.3,0.7", "--stride", "1000"]);
    assert!(o.status.success());
    let csv = stdout(&o);
    let p = column(&csv, "p");
    assert!(p.iter().all(|&x| (0.0..=1.0).contains(&x)));
    assert!((p.last().unwrap() - 0.4385).abs() < 1e-3);
}

#[test]
fn figure_number_out_of_range() {
    assert_eq!(run(&["figure", "7"]).status.code(), Some(2));
}
