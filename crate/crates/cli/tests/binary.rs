use std::path::Path;
use std::process::{Command, Output};

fn translocal(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_translocal")).args(args).current_dir(cwd).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    std::fs::write(dir.join(name), text).unwrap();
    name.to_string()
}

#[test]
fn list_and_describe() {
    let dir = tempfile::tempdir().unwrap();
    let out = translocal(&["list"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["clique_rg", "sync_sweep", "vdp_averaging", "fluct_scaling", "madelung_residuals", "two_level_demo", "commutator_demo"] {
        assert!(text.contains(name), "{name} missing from list");
    }
    let out = translocal(&["describe", "two_level_demo"], dir.path());
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().contains("steps"));
    assert_eq!(translocal(&["describe", "nope"], dir.path()).status.code(), Some(2));
}

#[test]
fn run_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "experiment = \"commutator_demo\"\nseed = 1\n");
    let out = translocal(&["run", &cfg, "--out", "result"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let result = dir.path().join("result");
    for f in ["commutator_gaps.csv", "config.toml", "record.json"] {
        assert!(result.join(f).is_file(), "{f} missing");
    }
    let record: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(result.join("record.json")).unwrap()).unwrap();
    assert_eq!(record["passed"], true);
    assert_eq!(record["config"]["seed"], 1);
}

#[test]
fn alias_runs_the_same_experiment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "experiment = \"connectivity_demo\"\n");
    let out = translocal(&["run", &cfg, "--out", "r"], dir.path());
    assert!(out.status.success());
    let echo = std::fs::read_to_string(dir.path().join("r/config.toml")).unwrap();
    assert!(echo.contains("experiment = \"clique_rg\""), "{echo}");
}

#[test]
fn bad_configs_exit_2_without_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("syntax.toml", "experiment = \n"),
        ("unknown_key.toml", "experiment = \"clique_rg\"\ncolour = 1\n"),
        ("unknown_param.toml", "experiment = \"clique_rg\"\n[params]\nbogus = 1\n"),
        ("bad_value.toml", "experiment = \"sync_sweep\"\n[params]\nn_seeds = 0\n"),
        ("unknown_experiment.toml", "experiment = \"nope\"\n"),
    ];
    for (name, text) in cases {
        let cfg = write(dir.path(), name, text);
        let out = translocal(&["run", &cfg, "--out", "never"], dir.path());
        assert_eq!(out.status.code(), Some(2), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
        assert!(!dir.path().join("never").exists(), "{name} left artifacts");
    }
    assert_eq!(translocal(&["run", "missing.toml"], dir.path()).status.code(), Some(2));
}

#[test]
fn failed_check_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "experiment = \"clique_rg\"\n");
    let out = translocal(&["run", &cfg, "--set", "params.expected_log10=-70", "--out", "r"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stdout).unwrap().contains("FAIL"));
}
