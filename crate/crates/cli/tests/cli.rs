use std::process::{Command, Output};

fn warpcurv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_warpcurv"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const N3: [&str; 6] = ["--n", "3", "--fiber-curv", "2", "--target-curv", "2"];
const N5: [&str; 6] = ["--n", "5", "--fiber-curv", "2", "--target-curv", "2"];

fn with<'a>(head: &[&'a str], params: &[&'a str], tail: &[&'a str]) -> Vec<&'a str> {
    head.iter().chain(params).chain(tail).copied().collect()
}

fn csv_field(text: &str, name: &str) -> f64 {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i = header.iter().position(|h| *h == name).unwrap();
    row[i].parse().unwrap()
}

#[test]
fn threshold_is_two_pi_for_unit_ratio() {
    let o = warpcurv(&with(&["threshold"], &N3, &[]));
    assert!(o.status.success());
    let t0 = csv_field(&stdout(&o), "T0");
    assert!((t0 - 2.0 * std::f64::consts::PI).abs() < 1e-15);
}

#[test]
fn threshold_scales_with_target_curvature() {
    let o = warpcurv(&[
        "threshold",
        "--n",
        "3",
        "--fiber-curv",
        "2",
        "--target-curv",
        "0.5",
        "--format",
        "json",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let t0 = v["T0"].as_f64().unwrap();
    assert!((t0 - 4.0 * std::f64::consts::PI).abs() < 1e-14);
    assert_eq!(v["c_crit"].as_f64(), Some(0.0));
}

#[test]
fn low_dimension_is_a_usage_error() {
    let o = warpcurv(&[
        "threshold",
        "--n",
        "2",
        "--fiber-curv",
        "2",
        "--target-curv",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("n >= 3"));
}

#[test]
fn missing_flag_is_a_usage_error() {
    let o = warpcurv(&["solve", "--n", "5", "--period", "9"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn period_below_threshold_exits_3() {
    let o = warpcurv(&with(&["solve"], &N3, &["--period", "5.0"]));
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn unattainable_period_exits_4() {
    let o = warpcurv(&[
        "solve",
        "--n",
        "4",
        "--fiber-curv",
        "3",
        "--target-curv",
        "3",
        "--period",
        "10",
    ]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("T(c) ≡ T0"));
}

#[test]
fn period_scan_has_header_and_rows() {
    let o = warpcurv(&with(&["period"], &N5, &["--scan", "12"]));
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "c,a,b,T,amplitude");
    assert_eq!(lines.len(), 13);
    let ts: Vec<f64> = lines[1..]
        .iter()
        .map(|l| l.split(',').nth(3).unwrap().parse().unwrap())
        .collect();
    assert!(ts.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn energy_outside_band_exits_2() {
    let o = warpcurv(&with(&["period"], &N5, &["--energy", "0.5"]));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn solve_then_verify_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("profile.json");
    let path = path.to_str().unwrap();
    let o = warpcurv(&with(
        &["solve"],
        &N5,
        &["--period", "9.2", "--samples", "256", "--out", path],
    ));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let text = std::fs::read_to_string(path).unwrap();
    let prof: warpcurv::SolutionProfile = serde_json::from_str(&text).unwrap();
    assert_eq!(prof.samples.len(), 256);
    assert_eq!(prof.period, 9.2);

    let o = warpcurv(&["verify", "--in", path]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["curvature"]["Rt_profile"].as_array().unwrap().len(), 256);

    let o = warpcurv(&["verify", "--in", path, "--tol", "1e-14"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn verify_flags_a_corrupted_profile() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("profile.json");
    let path = path.to_str().unwrap();
    let o = warpcurv(&with(&["solve"], &N5, &["--period", "9.2", "--out", path]));
    assert!(o.status.success());
    let mut prof: warpcurv::SolutionProfile =
        serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    prof.samples[40].f *= 1.001;
    std::fs::write(path, serde_json::to_string(&prof).unwrap()).unwrap();
    let o = warpcurv(&["verify", "--in", path]);
    assert_eq!(o.status.code(), Some(4));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["audit"]["flagged"]
        .as_array()
        .unwrap()
        .contains(&serde_json::json!(40)));
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for (i, threads) in ["1", "4"].iter().enumerate() {
        let path = dir.path().join(format!("run{i}.csv"));
        let path = path.to_str().unwrap().to_string();
        let o = warpcurv(&with(
            &["bifurcate"],
            &N5,
            &[
                "--tmax",
                "20",
                "--grid",
                "32",
                "--threads",
                threads,
                "--out",
                &path,
            ],
        ));
        assert!(o.status.success());
        files.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(files[0], files[1]);
    assert!(!files[0].contains(&b'\r'));
    let o = warpcurv(&with(
        &["solve"],
        &N5,
        &["--period", "9.2", "--samples", "64"],
    ));
    let p = warpcurv(&with(
        &["solve"],
        &N5,
        &["--period", "9.2", "--samples", "64"],
    ));
    assert_eq!(o.stdout, p.stdout);
}

#[test]
fn bifurcation_json_lists_branch_points() {
    let o = warpcurv(&with(
        &["bifurcate"],
        &N5,
        &["--tmax", "20", "--grid", "64", "--format", "json"],
    ));
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let ks: Vec<u64> = v["branch_points"]
        .as_array()
        .unwrap()
        .iter()
        .map(|b| b["k"].as_u64().unwrap())
        .collect();
    assert_eq!(ks, vec![1, 2]);
}
