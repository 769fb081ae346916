use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qfirstlaw"))
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

#[test]
fn simulate_phase_damping_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("pd.csv");
    let o = run(&["simulate", "--channel", "phase-damping", "--theta", "pi/6", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", text(&o.stderr));
    assert!(text(&o.stdout).contains("residual="));

    let csv = std::fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("tau,delta_u,work,heat,coherence"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 4001);
    assert!(rows.windows(2).all(|w| w[0][0] < w[1][0]));
    let last = rows.last().unwrap();
    assert!((last[3] - 0.173_161_059_913_120_4).abs() <= 1e-5);
    assert!(!csv.contains('\r'));
}

#[test]
fn simulate_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for p in [&a, &b] {
        let o = run(&["simulate", "--channel", "phase-flip", "--emit-oracle", "--steps", "500", "--out", p.to_str().unwrap()]);
        assert_eq!(code(&o), 0);
    }
    let (a, b) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    assert_eq!(a, b);
    assert!(a.starts_with(b"tau,delta_u,work,heat,coherence,heat_oracle,coherence_oracle\n"));
}

#[test]
fn too_few_steps_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let o = run(&["simulate", "--channel", "phase-damping", "--steps", "5", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(!out.exists());
}

#[test]
fn bad_arguments_are_usage_errors() {
    assert_eq!(code(&run(&["simulate", "--out", "x.csv"])), 2);
    assert_eq!(code(&run(&["simulate", "--channel", "amplitude-damping", "--out", "x.csv"])), 2);
    assert_eq!(code(&run(&["simulate", "--channel", "phase-flip", "--theta", "tau", "--out", "x.csv"])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
    assert_eq!(code(&run(&["verify", "--tol", "-1"])), 2);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn oracle_for_unsupported_setup_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let o = run(&["simulate", "--channel", "bit-flip", "--emit-oracle", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(text(&o.stderr).contains("oracle"));
}

#[test]
fn custom_channel_failing_cptp_names_the_time() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let channel = format!("custom:{}", data("leaky_after_t3.json").display());
    let o = run(&["simulate", "--channel", &channel, "--tau-max", "10", "--steps", "10", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    assert!(text(&o.stderr).contains("tau=3"), "{}", text(&o.stderr));
}

#[test]
fn expression_domain_error_is_numeric() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"kind":"custom","dim":1,"kraus":[[[["sqrt(1-t)","0"]]]]}"#).unwrap();
    let channel = format!("custom:{}", path.display());
    let o = run(&["channel-info", "--channel", &channel, "--t", "2"]);
    assert_eq!(code(&o), 3);
    assert!(text(&o.stderr).contains("sqrt"));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let cfg = data("phase_flip.json");
    let o = run(&["simulate", "--config", cfg.to_str().unwrap(), "--steps", "100", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", text(&o.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 102);
    assert!(csv.starts_with("tau,delta_u,work,heat,coherence,heat_oracle,coherence_oracle\n"));
}

#[test]
fn custom_channel_from_config_matches_builtin() {
    let dir = tempfile::tempdir().unwrap();
    let (custom, builtin) = (dir.path().join("c.csv"), dir.path().join("b.csv"));
    let cfg = data("custom_config.json");
    assert_eq!(code(&run(&["simulate", "--config", cfg.to_str().unwrap(), "--out", custom.to_str().unwrap()])), 0);
    assert_eq!(
        code(&run(&["simulate", "--channel", "phase-damping", "--steps", "2000", "--out", builtin.to_str().unwrap()])),
        0
    );
    let parse = |p: &Path| -> Vec<f64> {
        std::fs::read_to_string(p)
            .unwrap()
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(3).unwrap().parse().unwrap())
            .collect()
    };
    let (c, b) = (parse(&custom), parse(&builtin));
    assert_eq!(c.len(), b.len());
    assert!(c.iter().zip(&b).all(|(x, y)| (x - y).abs() <= 1e-10));
}

#[test]
fn reproduce_fig2_and_fig3() {
    let dir = tempfile::tempdir().unwrap();
    for fig in ["fig2", "fig3"] {
        let o = run(&["reproduce", fig, "--out-dir", dir.path().to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", text(&o.stderr));
    }
    let report = std::fs::read_to_string(dir.path().join("fig2_report.txt")).unwrap();
    let value = |report: &str, key: &str| -> f64 {
        let line = report.lines().find(|l| l.starts_with(key)).unwrap();
        line.rsplit(": ").next().unwrap().parse().unwrap()
    };
    assert!(value(&report, "max |heat - heat_oracle|") <= 1e-5);
    assert!(value(&report, "max |heat + coherence|") <= 5e-6);

    let fig3 = std::fs::read_to_string(dir.path().join("fig3.csv")).unwrap();
    let rows: Vec<Vec<f64>> = fig3
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    let peak = rows.iter().max_by(|a, b| a[3].total_cmp(&b[3])).unwrap();
    assert!((peak[0] - std::f64::consts::LN_2).abs() <= 0.002);
    assert!((peak[3] - 0.173_286_795_139_986_3).abs() <= 1e-4);
    assert!(rows.iter().all(|r| r[1].abs() <= 1e-9));
}

#[test]
fn reproduce_twice_is_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        assert_eq!(code(&run(&["reproduce", "fig2", "--out-dir", d.path().to_str().unwrap()])), 0);
    }
    let read = |d: &tempfile::TempDir| std::fs::read(d.path().join("fig2.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn verify_default_and_tight() {
    let o = run(&["verify"]);
    assert_eq!(code(&o), 0, "{}", text(&o.stdout));
    let out = text(&o.stdout);
    assert!(out.contains("bit-flip vs phase flip"));
    assert!(!out.contains("FAIL"));

    let o = run(&["verify", "--tol", "1e-12"]);
    assert_eq!(code(&o), 1);
    let out = text(&o.stdout);
    let fail = out.lines().find(|l| l.contains("FAIL") && l.contains("phase damping: max |Q")).unwrap();
    assert!(fail.contains("measured 7."), "{fail}");
}

#[test]
fn channel_info_outputs() {
    let o = run(&["channel-info", "--channel", "phase-damping", "--t", &4f64.ln().to_string()]);
    assert_eq!(code(&o), 0);
    let out = text(&o.stdout);
    assert!(out.contains("0.5000000") && out.contains("0.8660254"));

    let o = run(&["channel-info", "--channel", "phase-flip", "--t", "0"]);
    assert_eq!(code(&o), 0);
    assert!(text(&o.stdout).contains("cptp deviation: 0.000e0 (ok)"));

    let channel = format!("custom:{}", data("leaky_after_t3.json").display());
    let o = run(&["channel-info", "--channel", &channel, "--t", "4"]);
    assert_eq!(code(&o), 1);
    assert!(text(&o.stdout).contains("FAILED"));
}
