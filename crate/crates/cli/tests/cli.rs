use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use foil::harness::{read_data_file, strip_timestamp};

fn foil(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_foil")).args(args).output().expect("spawn foil")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn bundled(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(format!("{name}.toml"))
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

const SMALL: &str = r#"
scenario = "hom_mz"
[sweep]
variable = "tau"
start = -1.0
stop = 1.0
steps = 3
[ensemble]
realizations = 20
duration = 100.0
seed = 9
"#;

#[test]
fn list_scenarios_names_all_eight() {
    let o = foil(&["list-scenarios"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 8);
    for name in ["uncorrelated_sources", "astronomy", "scenario_i", "scenario_iv", "hom_mz", "pulsed"] {
        assert!(out.lines().any(|l| l.starts_with(name)), "{name} missing from\n{out}");
    }
}

#[test]
fn validate_accepts_bundled_configs() {
    for name in ["scenario_i_fringe", "pulsed_overlap", "astronomy_full_coherence"] {
        let o = foil(&["validate", bundled(name).to_str().unwrap()]);
        assert!(o.status.success(), "{name}: {}", stderr(&o));
        assert!(stdout(&o).contains("valid"));
        assert!(!stdout(&o).contains("regime warning"));
    }
}

#[test]
fn validate_reports_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_config(dir.path(), "min.toml", "scenario = \"hom_mz\"\n");
    let o = foil(&["validate", &p]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("default: ensemble.realizations = 200"), "{}", stdout(&o));
}

#[test]
fn bad_configs_exit_one_with_a_located_message() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write_config(dir.path(), "unknown.toml", "scenario = \"hom_mz\"\nrealisations = 3\n");
    let o = foil(&["validate", &unknown]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("realisations"), "{}", stderr(&o));

    let syntax = write_config(dir.path(), "syntax.toml", "scenario = \"hom_mz\"\n[sweep\n");
    let o = foil(&["run", &syntax]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));

    let o = foil(&["run", dir.path().join("missing.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn run_applies_overrides_and_writes_three_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "small.toml", SMALL);
    let out = dir.path().join("out");
    let o = foil(&["run", &cfg, "--realizations", "8", "--seed", "3", "--workers", "1", "--output-dir", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("summary: 3 points"));
    let data = read_data_file(&out.join("small.dat")).unwrap();
    assert_eq!(data.get("seed"), Some("3"));
    assert_eq!(data.get("realizations"), Some("8"));
    assert_eq!(data.rows.len(), 3);
    assert!(out.join("small.singles.dat").exists());
    assert!(out.join("small.summary.json").exists());
}

#[test]
fn runs_are_reproducible_across_execution_modes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "small.toml", SMALL);
    let mut texts = Vec::new();
    for (k, extra) in [&[][..], &["--sequential"][..], &["--workers", "2"][..]].iter().enumerate() {
        let out = dir.path().join(format!("out{k}"));
        let mut args = vec!["run", cfg.as_str(), "--output-dir", out.to_str().unwrap()];
        args.extend_from_slice(extra);
        let o = foil(&args);
        assert!(o.status.success(), "{}", stderr(&o));
        texts.push(strip_timestamp(&std::fs::read_to_string(out.join("small.dat")).unwrap()));
    }
    assert_eq!(texts[0], texts[1]);
    assert_eq!(texts[0], texts[2]);
}

#[test]
fn validate_run_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "small.toml", SMALL);
    let o = foil(&["validate", &cfg, "--run"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));

    // one slow-detector realization has no error estimate, so it cannot pass
    let slow = write_config(
        dir.path(),
        "slow.toml",
        "scenario = \"scenario_iv\"\n[detector]\nresolve_time = 20.0\n[sweep]\nsteps = 2\n[ensemble]\nrealizations = 1\nduration = 100.0\n",
    );
    let o = foil(&["validate", &slow, "--run"]);
    assert_eq!(o.status.code(), Some(2), "{}{}", stdout(&o), stderr(&o));
}

#[test]
fn invalid_flag_values_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "small.toml", SMALL);
    assert_eq!(foil(&["run", &cfg, "--realizations", "0"]).status.code(), Some(1));
    assert_eq!(foil(&["run", &cfg, "--workers", "0"]).status.code(), Some(1));
    assert_ne!(foil(&["run", &cfg, "--seed", "abc"]).status.code(), Some(0));
}
