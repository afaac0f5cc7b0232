use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use isac_runner::config::{load, Experiment, Overrides};

fn isac(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isac"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("cfg.json");
    fs::write(&p, text).unwrap();
    p
}

fn run_to(experiment: &str, config: &Path, out: &Path, workers: &str) {
    let o = isac(&[
        experiment,
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--workers",
        workers,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    v.sort();
    v
}

const SMALL: &[(&str, &str)] = &[
    (
        "rmse_range",
        r#"{"waveform": {"n_subcarriers": 256}, "schemes": ["aac", "ofdm_pilot"], "placements": ["symbol", "slot"],
            "snr_grid_db": [-25, -10], "trials": 12}"#,
    ),
    (
        "rmse_velocity",
        r#"{"waveform": {"n_subcarriers": 256}, "schemes": ["chirp", "cm"], "snr_grid_db": [0], "trials": 10}"#,
    ),
    (
        "ber",
        r#"{"waveform": {"n_subcarriers": 256}, "schemes": ["ofdm", "aac"], "alphas": [0.3], "ebn0_grid_db": [4], "trials": 6}"#,
    ),
    (
        "papr_ccdf",
        r#"{"schemes": ["ofdm", "aac"], "alphas": [0.5], "trials": 700}"#,
    ),
];

#[test]
fn outputs_do_not_depend_on_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    for (i, (experiment, text)) in SMALL.iter().enumerate() {
        let sub = dir.path().join(i.to_string());
        fs::create_dir(&sub).unwrap();
        let cfg = write_config(&sub, text);
        let (one, four, again) = (sub.join("w1"), sub.join("w4"), sub.join("w4b"));
        run_to(experiment, &cfg, &one, "1");
        run_to(experiment, &cfg, &four, "4");
        run_to(experiment, &cfg, &again, "4");
        let a = csv_files(&one);
        assert!(!a.is_empty());
        assert_eq!(a, csv_files(&four), "{experiment}: 1 vs 4 workers");
        assert_eq!(a, csv_files(&again), "{experiment}: repeated run");
    }
}

#[test]
fn seed_changes_the_draws() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"schemes": ["ofdm"], "trials": 300}"#);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run_to("papr_ccdf", &cfg, &a, "2");
    let o = isac(&[
        "papr_ccdf",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        b.to_str().unwrap(),
        "--seed",
        "99",
    ]);
    assert!(o.status.success());
    assert_ne!(csv_files(&a), csv_files(&b));
}

#[test]
fn manifest_records_the_resolved_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"seed": 5, "schemes": ["ofdm"]}"#);
    let out = dir.path().join("out");
    let o = isac(&[
        "papr_ccdf",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--trials",
        "30",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("run.json")).unwrap()).unwrap();
    assert_eq!(m["experiment"], "papr_ccdf");
    assert_eq!(m["seed"], 5);
    assert_eq!(m["config"]["trials"], 30);
    assert_eq!(m["config"]["waveform"]["n_subcarriers"], 256);
    let outputs: Vec<&str> = m["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert_eq!(outputs, ["papr_ccdf.csv", "papr_levels.csv"]);
}

#[test]
fn complexity_table_has_the_documented_schema() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "{}");
    let out = dir.path().join("out");
    run_to("complexity", &cfg, &out, "1");
    let table = fs::read_to_string(out.join("complexity.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(
        lines,
        [
            "scheme,n,m,complex_multiplications",
            "aac,1024,14,162816",
            "cm,1024,14,229376",
            "ofdm_prs,1024,14,162816"
        ]
    );
}

fn expect_diagnostic(experiment: &str, text: &str, line: usize, needle: &str) {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), text);
    let o = isac(&[
        experiment,
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    let anchor = format!("cfg.json:{line}:");
    assert!(err.lines().any(|l| l.contains(&anchor)), "{err}");
    assert!(err.contains(needle), "{err}");
    assert!(!dir.path().join("o").join("run.json").exists());
}

#[test]
fn invalid_configs_exit_with_anchored_diagnostics() {
    expect_diagnostic("ber", "{\n  \"seed\": 1,\n  \"trials\": 0\n}", 3, "trials");
    expect_diagnostic("ber", "{\n  \"seed\": 1,\n  \"trails\": 4\n}", 3, "trails");
    expect_diagnostic(
        "rmse_range",
        "{\n  \"seed\": 1,\n\n  \"alphas\": [0.5, 1.7]\n}",
        4,
        "alpha",
    );
    expect_diagnostic("papr_ccdf", "{\n  \"seed\": 1,\n  \"trials\": ,\n}", 3, "");
    expect_diagnostic("limits", "{\n  \"experiment\": \"ber\"\n}", 2, "limits");
    expect_diagnostic("ber", "{\n  \"schemes\": [\"chirp\"]\n}", 2, "chirp");
    expect_diagnostic(
        "rmse_range",
        "{\n  \"placements\": [\"hybrid\"]\n}",
        2,
        "hybrid",
    );
}

#[test]
fn unknown_experiment_lists_the_alternatives() {
    let o = isac(&["bogus", "--config", "x.json", "--out", "o"]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    for e in Experiment::ALL {
        assert!(err.contains(e.name()), "{err}");
    }
}

#[test]
fn missing_config_file_is_reported() {
    let o = isac(&["limits", "--config", "/nonexistent/cfg.json", "--out", "o"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent/cfg.json"));
}

#[test]
fn shipped_configs_resolve() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(&root).unwrap() {
        let path = entry.unwrap().path();
        let v: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
        let name = v["experiment"]
            .as_str()
            .unwrap_or_else(|| panic!("{} names no experiment", path.display()));
        let e = Experiment::ALL
            .into_iter()
            .find(|e| e.name() == name)
            .unwrap();
        load(&path, e, Overrides::default()).unwrap_or_else(|err| panic!("{err}"));
        seen += 1;
    }
    assert!(seen >= Experiment::ALL.len());
}
