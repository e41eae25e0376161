use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const SCENARIO: &str = r#"
[scenario]
d_sr = 500.0
d_rd = 500.0
f_c = 2.4e9
gamma = 3.0
bandwidth = 2e5
noise_psd_dbm_hz = -170.0
p_s_dbm = 25.0
p_r_dbm = 25.0
si_suppression_db = 130.0

[solver]
grid_points = 81
"#;

fn fdrelay(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fdrelay"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn stdout(o: &Output) -> String {
    assert!(
        o.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn missing_field_exits_with_code_two_and_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "broken.toml",
        &SCENARIO.replace("d_rd = 500.0\n", ""),
    );
    let o = fdrelay(&["capacity", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("d_rd"), "{err}");
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let o = fdrelay(&["capacity", "--no-such-flag"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unreadable_config_is_a_config_error() {
    let o = fdrelay(&["capacity", "--config", "/nonexistent/scenario.toml"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_output_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.toml", SCENARIO);
    let args = [
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--variable",
        "p_s_dbm",
        "--start",
        "15",
        "--stop",
        "35",
        "--steps",
        "5",
        "--linked",
    ];
    let a = stdout(&fdrelay(&args));
    let b = stdout(&fdrelay(&args));
    assert_eq!(a, b);
    let mut lines = a.lines();
    assert_eq!(
        lines.next().unwrap(),
        "sweep_value,c_fd,r_fd_b,c_fd_ideal,r_fd_conv,c_hd,r_hd_conv,regime,x_th,p0,p_T"
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[0][0], "15");
    assert_eq!(rows[4][0], "35");
    for r in &rows {
        let c_fd: f64 = r[1].parse().unwrap();
        let c_hd: f64 = r[5].parse().unwrap();
        let ideal: f64 = r[3].parse().unwrap();
        assert!(c_hd <= c_fd + 1e-6 && c_fd <= ideal + 1e-6, "{r:?}");
    }
}

#[test]
fn sweep_table_in_config_is_used_and_mbps_scales() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{SCENARIO}\n[sweep]\nvariable = \"si_suppression_db\"\nstart = 120.0\nstop = 130.0\nsteps = 2\n");
    let cfg = write(dir.path(), "s.toml", &text);
    let bits = stdout(&fdrelay(&["sweep", "--config", cfg.to_str().unwrap()]));
    let mbps = stdout(&fdrelay(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--units",
        "mbps",
    ]));
    let col = |s: &str| -> Vec<f64> {
        s.lines()
            .skip(1)
            .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
            .collect()
    };
    for (b, m) in col(&bits).iter().zip(col(&mbps)) {
        assert!((m - b * 0.4).abs() < 1e-12, "{b} {m}");
    }
}

#[test]
fn ideal_suppression_reports_ideal_regime() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "ideal.toml",
        &SCENARIO.replace("130.0", "\"inf\""),
    );
    let out = stdout(&fdrelay(&["capacity", "--config", cfg.to_str().unwrap()]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["regime"], "ideal");
    assert!(v["x_th"].is_null());
    assert!(v["lower_bound"].is_null());
    let c = v["capacity"]["bits"].as_f64().unwrap();
    let ideal = v["benchmarks"]["c_fd_ideal"]["bits"].as_f64().unwrap();
    assert!((c - ideal).abs() < 1e-9);
}

#[test]
fn distribution_probabilities_sum_to_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.toml", SCENARIO);
    let out = stdout(&fdrelay(&[
        "distribution",
        "--config",
        cfg.to_str().unwrap(),
    ]));
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("kind,x,p"));
    let mut total = 0.0;
    let mut thresholds = 0;
    for l in lines {
        let f: Vec<&str> = l.split(',').collect();
        match f[0] {
            "mass" => total += f[2].parse::<f64>().unwrap(),
            "threshold" => thresholds += 1,
            other => panic!("unexpected row kind {other}"),
        }
    }
    assert_eq!(thresholds, 1);
    assert!((total - 1.0).abs() < 1e-9, "{total}");
}

#[test]
fn capacity_json_and_file_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.json", &{
        let t: toml::Value = toml::from_str(SCENARIO).unwrap();
        serde_json::to_string(&t).unwrap()
    });
    let out = dir.path().join("report.json");
    let o = fdrelay(&[
        "capacity",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success() && o.stdout.is_empty());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(v["regime"], "discrete");
    let rate = v["capacity"]["bits"].as_f64().unwrap();
    let lb = v["lower_bound"]["rate"]["bits"].as_f64().unwrap();
    assert!(lb <= rate + 1e-6 && lb > 0.9 * rate);
    assert!(v["kkt"]["stationarity_residual"].as_f64().unwrap() < 1e-4);
}

#[test]
fn benchmarks_csv_lists_four_schemes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.toml", SCENARIO);
    let out = stdout(&fdrelay(&[
        "benchmarks",
        "--config",
        cfg.to_str().unwrap(),
        "--format",
        "csv",
    ]));
    let names: Vec<&str> = out
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(names, ["c_fd_ideal", "r_fd_conv", "c_hd", "r_hd_conv"]);
}

#[test]
fn validate_passes_with_small_sample() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.toml", SCENARIO);
    let out = stdout(&fdrelay(&[
        "validate",
        "--config",
        cfg.to_str().unwrap(),
        "--samples",
        "20000",
        "--seed",
        "7",
    ]));
    assert!(out.lines().skip(1).all(|l| l.ends_with(",pass")), "{out}");
}
