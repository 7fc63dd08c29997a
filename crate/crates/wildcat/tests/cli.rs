//! End-to-end tests of the command-line binary.

use std::path::Path;
use std::process::Command;

fn wildcat() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wildcat"))
}

fn quick_config(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("quick.cfg");
    std::fs::write(
        &path,
        r#"
[model]
alpha = 0.5
r = 0.02
a = 0.5
lambda = 10.0
k = 1.0

[grid]
x_max = 0.1
x_step = 0.005

[simulation]
x0 = 0.1
n_paths = 16
horizon = 40.0
base_seed = 7
time_points = 21
"#,
    )
    .unwrap();
    path
}

#[test]
fn all_subcommands_run_and_write_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick_config(dir.path());
    for (sub, expect) in [
        ("solve", vec!["surface.csv", "frontier.csv", "metadata.json"]),
        ("frontier", vec!["frontier.csv", "metadata.json"]),
        ("simulate", vec!["events.csv", "series.csv", "metadata.json"]),
        ("ensemble", vec!["stats.csv", "metadata.json"]),
        ("validate", vec!["validation.json"]),
    ] {
        let out = dir.path().join(sub);
        let status = wildcat()
            .args([sub, "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .arg("--quiet")
            .status()
            .unwrap();
        assert!(status.success(), "{sub} failed");
        for file in expect {
            assert!(out.join(file).exists(), "{sub} did not write {file}");
        }
    }
}

#[test]
fn frontier_first_row_is_the_analytic_anchor() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick_config(dir.path());
    let out = dir.path().join("frontier");
    assert!(wildcat()
        .args(["frontier", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .arg("--quiet")
        .status()
        .unwrap()
        .success());
    let table = std::fs::read_to_string(out.join("frontier.csv")).unwrap();
    let first: Vec<&str> = table.lines().nth(1).unwrap().split(',').collect();
    let x: f64 = first[0].parse().unwrap();
    let r_star: f64 = first[1].parse().unwrap();
    let p_star: f64 = first[2].parse().unwrap();
    assert_eq!(x, 0.0);

    // independent bisection on the anchor equation, written directly in R
    let (alpha, a, eps) = (0.5f64, 0.5f64, 0.014_142_135_623_730_95_f64);
    let f = |r: f64| {
        let y = a / r;
        alpha * (1.0 + y).powf(alpha - 1.0) + (1.0 - alpha) * (1.0 + y).powf(alpha)
            - (1.0 - alpha) * y.powf(alpha) * eps
            - 1.0
    };
    let (mut lo, mut hi) = (1e-6f64, 1e6f64);
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let oracle = 0.5 * (lo + hi);
    assert!(
        (r_star - oracle).abs() / oracle <= 1e-4,
        "anchor {r_star} vs oracle {oracle}"
    );
    // critical price at the anchor is the Hotelling price there
    let hotelling_price = 5.0 / r_star.sqrt();
    assert!((p_star - hotelling_price).abs() / hotelling_price <= 1e-9);
}

#[test]
fn missing_config_fails_with_machine_readable_error() {
    let output = wildcat()
        .args(["solve", "--config", "/nonexistent/x.cfg"])
        .output()
        .unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8(output.stderr).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(stderr.lines().last().unwrap()).unwrap();
    assert!(parsed["error"].is_string());
}

#[test]
fn ensemble_with_zero_paths_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick_config(dir.path());
    let text = std::fs::read_to_string(&cfg)
        .unwrap()
        .replace("n_paths = 16", "n_paths = 0");
    std::fs::write(&cfg, text).unwrap();
    let output = wildcat()
        .args(["ensemble", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("e"))
        .output()
        .unwrap();
    assert!(!output.status.success());
}

#[test]
fn seed_override_changes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick_config(dir.path());
    let run = |seed: &str, out: &str| {
        let out = dir.path().join(out);
        assert!(wildcat()
            .args(["simulate", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .args(["--seed", seed, "--quiet"])
            .status()
            .unwrap()
            .success());
        std::fs::read(out.join("events.csv")).unwrap()
    };
    let a = run("7", "s1");
    let b = run("7", "s2");
    let c = run("8", "s3");
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn bundled_configs_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for name in ["set_a.cfg", "set_b.cfg", "sample_path.cfg"] {
        let text = std::fs::read_to_string(root.join(name)).unwrap();
        let cfg = wildcat::config::parse_config(&text).unwrap();
        assert!(cfg.model.validate().is_ok(), "{name}");
    }
}

#[test]
fn validate_passes_on_bundled_configs_at_default_grids() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let dir = tempfile::tempdir().unwrap();
    for name in ["set_a.cfg", "set_b.cfg"] {
        let out = dir.path().join(name);
        let output = wildcat()
            .args(["validate", "--config"])
            .arg(root.join(name))
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap();
        let stdout = String::from_utf8(output.stdout).unwrap();
        assert!(output.status.success(), "{name} failed:\n{stdout}");
        assert!(!stdout.contains("FAIL"), "{name}:\n{stdout}");
        assert!(stdout.lines().filter(|l| l.starts_with("PASS")).count() >= 9);
    }
}
