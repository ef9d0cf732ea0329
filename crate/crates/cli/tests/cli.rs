use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn lpweak(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lpweak"))
        .args(args)
        .current_dir(dir)
        .env_remove("LPWEAK_OUT")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("config.toml");
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn empty_scenario_list_writes_only_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[run]\nscenarios = []\n");
    let out = dir.path().join("out");
    let o = lpweak(&["--config", &cfg, "--out", out.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let files: Vec<_> = fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(files, vec!["manifest.json"]);
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["passed"], true);
    assert!(manifest["wall_seconds"].as_f64().is_some());
}

#[test]
fn maximal_chain_passes_with_zero_violations() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[run]\nscenarios = [\"maximal_chain\"]\n\n[maximal_chain]\ncount = 4\n",
    );
    let out = dir.path().join("out");
    let o = lpweak(&["--config", &cfg, "--out", out.to_str().unwrap(), "--workers", "2"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("maximal_chain.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("instance,input,a,violations"));
    for line in lines {
        assert!(line.ends_with(",0"), "{line}");
    }
    assert!(!csv.contains('\r'));
}

#[test]
fn non_power_of_two_grid_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[run]\nscenarios = [\"reconstruction\"]\n\n[reconstruction]\ngrid = { dim = 1, length = 16.0, samples = 100 }\n",
    );
    let o = lpweak(&["--config", &cfg, "--out", "out"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn unknown_keys_and_missing_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[reconstruction]\nsamples_typo = 3\n");
    assert_eq!(lpweak(&["--config", &cfg], dir.path()).status.code(), Some(2));
    assert_eq!(lpweak(&["--config", "missing.toml"], dir.path()).status.code(), Some(3));
}

#[test]
fn csv_bodies_are_identical_across_runs_and_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[run]\nscenarios = [\"reconstruction\", \"sq_equivalence\", \"decay_trend\"]\n\n\
         [sq_equivalence]\ncount = 4\ngrid = { dim = 1, length = 16.0, samples = 256 }\n\n\
         [decay_trend]\ngrid = { dim = 1, length = 64.0, samples = 4096 }\n",
    );
    let a = lpweak(&["--config", &cfg, "--out", "a", "--workers", "1", "--seed", "11"], dir.path());
    let b = lpweak(&["--config", &cfg, "--out", "b", "--workers", "3", "--seed", "11"], dir.path());
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(b.status.code(), Some(0));
    for name in ["reconstruction", "sq_equivalence", "decay_trend"] {
        let x = fs::read(dir.path().join("a").join(format!("{name}.csv"))).unwrap();
        let y = fs::read(dir.path().join("b").join(format!("{name}.csv"))).unwrap();
        assert_eq!(x, y, "{name}");
    }
    let m: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("a/manifest.json")).unwrap()).unwrap();
    assert_eq!(m["seed"], 11);
}

#[test]
fn out_dir_falls_back_to_env() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[run]\nscenarios = []\n");
    let o = Command::new(env!("CARGO_BIN_EXE_lpweak"))
        .args(["--config", &cfg])
        .current_dir(dir.path())
        .env("LPWEAK_OUT", "from_env")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("from_env/manifest.json").exists());
}

#[test]
fn failing_threshold_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[run]\nscenarios = [\"sq_equivalence\"]\n\n[sq_equivalence]\ncount = 3\nthreshold = 1.0\n\
         grid = { dim = 1, length = 16.0, samples = 256 }\n",
    );
    let o = lpweak(&["--config", &cfg, "--out", "out"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn lists_scenarios() {
    let dir = tempfile::tempdir().unwrap();
    let o = lpweak(&["--list-scenarios"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().any(|l| l == "maximal_chain"));
    assert_eq!(text.lines().count(), 13);
}
