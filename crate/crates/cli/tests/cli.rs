use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_twinfock"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn twinfock")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn golden(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    std::fs::read_to_string(path).unwrap()
}

fn json(args: &[&str]) -> serde_json::Value {
    serde_json::from_str(&stdout(args)).unwrap()
}

#[test]
fn expect_goldens() {
    let args = ["expect", "--m", "6", "--mprime", "0", "--loss-a", "0.05", "--loss-b", "0.05", "--phi", "0"];
    assert_eq!(stdout(&args), golden("expect_6_0.json"));
    let args = ["expect", "--m", "1", "--mprime", "0", "--loss-a", "0", "--loss-b", "0", "--phi", "1.5707963"];
    assert_eq!(stdout(&args), golden("expect_1_0.json"));
}

#[test]
fn table1_golden() {
    assert_eq!(stdout(&["table1"]), golden("table1.csv"));
}

#[test]
fn visibility_sweep_goldens() {
    let args = ["visibility", "--m", "1", "--mprime", "0", "--loss-start", "0", "--loss-stop", "1", "--loss-steps", "11"];
    assert_eq!(stdout(&args), golden("visibility_1_0.csv"));
    let args = [
        "sweep", "--quantity", "visibility", "--states", "3:2,4:0", "--loss-start", "0", "--loss-stop", "1",
        "--loss-steps", "11",
    ];
    assert_eq!(stdout(&args), golden("sweep_visibility.csv"));
}

#[test]
fn expect_fields() {
    let v = json(&["expect", "--m", "6", "--mprime", "0", "--loss", "0.05", "--phi", "0"]);
    let keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
    assert_eq!(keys, ["m", "mprime", "loss_a", "loss_b", "phi", "k1", "k2", "expectation"]);
    assert!((v["expectation"].as_f64().unwrap() + 0.735092).abs() < 1e-6);
}

#[test]
fn degenerate_state_is_rejected() {
    let out = run(&["expect", "--m", "2", "--mprime", "2", "--loss-a", "0", "--loss-b", "0", "--phi", "0"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("m must exceed mprime"));
}

#[test]
fn domain_errors_name_the_flag() {
    for (args, flag) in [
        (vec!["expect", "--m", "3", "--mprime", "1", "--loss-a", "1.2", "--loss-b", "0", "--phi", "0"], "--loss-a"),
        (vec!["expect", "--m", "3", "--mprime", "1", "--loss-a", "0", "--loss-b", "-0.1", "--phi", "0"], "--loss-b"),
        (vec!["expect", "--m", "3", "--mprime", "1", "--loss", "0", "--phi", "inf"], "--phi"),
        (vec!["visibility", "--m", "1", "--mprime", "0", "--loss-start", "0", "--loss-stop", "1", "--loss-steps", "0"], "--loss-steps"),
        (vec!["sweep", "--quantity", "fidelity", "--m", "1", "--mprime", "0", "--loss-start", "0", "--loss-stop", "1", "--loss-steps", "2"], "--quantity"),
        (vec!["recommend", "--loss", "0.1", "--objective", "speed"], "--objective"),
        (vec!["expect", "--m", "3", "--mprime", "1", "--loss", "0", "--phi", "0", "--bogus", "1"], "--bogus"),
    ] {
        let out = run(&args);
        assert!(!out.status.success(), "{args:?}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(flag), "{args:?}: {err}");
    }
}

#[test]
fn table1_variants() {
    let text = stdout(&["table1", "--loss", "0"]);
    for line in text.lines().skip(1) {
        assert_eq!(line.split(',').nth(2).unwrap(), "0.166666667");
    }
    let text = stdout(&["table1", "--delta-m", "1", "--max-total", "3", "--mprime-step", "1"]);
    let rows: Vec<_> = text.lines().skip(1).map(|l| l.split(',').take(2).collect::<Vec<_>>().join(":")).collect();
    assert_eq!(rows, ["1:0", "2:1"]);
}

#[test]
fn visibility_at_half_loss() {
    for (m, mp) in [("1", "0"), ("5", "2"), ("9", "4")] {
        let v = json(&["visibility", "--m", m, "--mprime", mp, "--loss", "0.5"]);
        assert_eq!(v["visibility"].as_f64().unwrap(), 0.5);
    }
}

#[test]
fn recommend_puts_noon_first_at_low_loss() {
    let v = json(&["recommend", "--loss", "0.05", "--delta-m", "6", "--max-total", "22", "--objective", "optimal_sensitivity"]);
    let entries = v.as_array().unwrap();
    assert_eq!(entries[0]["state"]["m"], 6);
    assert_eq!(entries[0]["state"]["mprime"], 0);
    assert_eq!(entries[0]["rank"], 1);
    assert_eq!(entries.len(), 9);
}

#[test]
fn sensitivity_divergence_is_inf() {
    let v = json(&["sensitivity", "--m", "6", "--mprime", "0", "--loss", "0.1", "--phi", "0.5235987755982988"]);
    assert_eq!(v["delta_phi"], "inf");
    let text = stdout(&[
        "sweep", "--quantity", "sensitivity", "--m", "6", "--mprime", "0", "--loss-start", "0", "--loss-stop", "0.5",
        "--loss-steps", "3", "--phi", "0.5235987755982988",
    ]);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",inf")));
}

#[test]
fn expectation_sweep_over_phase() {
    let text = stdout(&[
        "sweep", "--quantity", "expectation", "--m", "2", "--mprime", "1", "--loss-start", "1", "--loss-stop", "1",
        "--loss-steps", "1", "--phi-start", "0", "--phi-stop", "3", "--phi-steps", "4",
    ]);
    assert_eq!(text.lines().count(), 5);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",1.0")));
}

#[test]
fn output_is_deterministic_and_can_go_to_a_file() {
    let dir = tempdir();
    let path = dir.join("table.csv");
    let first = stdout(&["table1"]);
    assert_eq!(first, stdout(&["table1"]));
    stdout(&["table1", "--output", path.to_str().unwrap()]);
    assert_eq!(std::fs::read_to_string(&path).unwrap(), first);
}

#[test]
fn config_file_mirrors_flags() {
    let dir = tempdir();
    let path = dir.join("point.toml");
    std::fs::write(&path, "m = 6\nmprime = 0\nloss_a = 0.05\nloss-b = 0.05\nphi = 1.0\n").unwrap();
    let from_config = json(&["expect", "--config", path.to_str().unwrap(), "--phi", "0"]);
    let from_flags = json(&["expect", "--m", "6", "--mprime", "0", "--loss", "0.05", "--phi", "0"]);
    assert_eq!(from_config, from_flags);

    std::fs::write(&path, "m = 6\nunknown_flag = 3\n").unwrap();
    let out = run(&["expect", "--config", path.to_str().unwrap()]);
    assert!(!out.status.success());
}

fn tempdir() -> PathBuf {
    use std::sync::atomic::{AtomicUsize, Ordering};
    static COUNTER: AtomicUsize = AtomicUsize::new(0);
    let dir = std::env::temp_dir().join(format!(
        "twinfock-cli-{}-{}",
        std::process::id(),
        COUNTER.fetch_add(1, Ordering::Relaxed)
    ));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
