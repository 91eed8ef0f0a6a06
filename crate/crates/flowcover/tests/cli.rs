//! End-to-end checks of the command-line interface and its exit-code
//! contract.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_flowcover"));
    c.env_remove("FLOWCOVER_OUT");
    c
}

#[test]
fn no_arguments_is_usage_error() {
    let out = bin().output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
}

#[test]
fn unknown_system_is_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["omega", "--system", "foo", "--out"])
        .arg(tmp.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("foo"), "stderr: {err}");
}

#[test]
fn single_stage_schedule_is_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["verify", "--stages", "1", "--out"])
        .arg(tmp.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn systems_lists_builtins() {
    let out = bin().arg("systems").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for name in [
        "linear_sink_1d",
        "linear_sink_2d",
        "saddle_2d",
        "vanderpol",
        "double_well_gradient",
        "pendulum_damped",
    ] {
        assert!(text.contains(name), "manifest missing {name}");
    }
}

#[test]
fn omega_run_writes_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "omega",
            "--system",
            "linear_sink_2d",
            "--grid",
            "-2,2,-2,2:32,32",
            "--tau",
            "0.5",
            "--seed-set",
            "box:0.5,0.5,0.2",
            "--out",
        ])
        .arg(tmp.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("report.json")).unwrap())
            .unwrap();
    assert_eq!(report["connected"], serde_json::Value::Bool(true));
    assert_eq!(report["pass"], serde_json::Value::Bool(true));
    for f in ["omega.txt", "omega.json", "omega.ppm", "seed.txt", "config.txt"] {
        assert!(tmp.path().join(f).exists(), "missing {f}");
    }
    let omega =
        flowcover::report::boxset_from_text(&std::fs::read_to_string(tmp.path().join("omega.txt")).unwrap())
            .unwrap();
    assert!(!omega.is_empty());
}

#[test]
fn chains_run_writes_monotone_stage_files() {
    let tmp = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "chains",
            "--system",
            "linear_sink_1d",
            "--grid",
            "-2,2:128",
            "--tau",
            "0.25",
            "--seed-set",
            "point:1.0",
            "--out",
        ])
        .arg(tmp.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let read = |name: &str| {
        flowcover::report::boxset_from_text(
            &std::fs::read_to_string(tmp.path().join(name)).unwrap(),
        )
        .unwrap()
    };
    for k in 0..5 {
        assert!(tmp.path().join(format!("P{k}.txt")).exists());
        assert!(tmp.path().join(format!("A{k}.txt")).exists());
    }
    for k in 1..5usize {
        assert!(read(&format!("P{k}.txt")).is_subset(&read(&format!("P{}.txt", k - 1))));
        assert!(read(&format!("A{k}.txt")).is_subset(&read(&format!("A{}.txt", k - 1))));
    }
}

#[test]
fn config_file_drives_a_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = format!(
        "[run]\nsystem = linear_sink_2d\ngrid = -2,2,-2,2:32,32\ntau = 0.5\n\
         seed_set = box:0,0,0.9\nout_dir = {}\nstages = 5\n",
        tmp.path().display()
    );
    let cfg_path = tmp.path().join("run.cfg");
    std::fs::write(&cfg_path, cfg).unwrap();
    let out = bin().args(["verify", "--config"]).arg(&cfg_path).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(tmp.path().join("report.json").exists());
    assert!(tmp.path().join("p_intersection.ppm").exists());
}

#[test]
fn out_dir_env_override(){
    let tmp = tempfile::tempdir().unwrap();
    let ignored = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_flowcover"))
        .args([
            "omega",
            "--system",
            "linear_sink_2d",
            "--grid",
            "-2,2,-2,2:16,16",
            "--tau",
            "0.5",
            "--seed-set",
            "box:0,0,0.9",
            "--out",
        ])
        .arg(ignored.path().join("unused"))
        .env("FLOWCOVER_OUT", tmp.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(tmp.path().join("report.json").exists());
    assert!(!ignored.path().join("unused").exists());
}

#[test]
fn verdict_failure_exits_one() {
    // disconnected seed set violates the connectedness hypothesis
    let tmp = tempfile::tempdir().unwrap();
    let grid = flowcover::config::parse_grid_spec(
        "-2,2,-2,2:32,32",
        flowcover::grid::EscapePolicy::Clip,
    )
    .unwrap();
    let seed = flowcover::grid::BoxSet::from_members(grid, vec![0, 1000]).unwrap();
    let seed_path = tmp.path().join("seed.txt");
    std::fs::write(&seed_path, flowcover::report::boxset_to_text(&seed)).unwrap();
    let out = bin()
        .args([
            "omega",
            "--system",
            "double_well_gradient",
            "--grid",
            "-2,2,-2,2:32,32",
            "--tau",
            "0.5",
            "--seed-set",
        ])
        .arg(&seed_path)
        .arg("--out")
        .arg(tmp.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn reports_are_deterministic_artifacts() {
    let run = |dir: &Path| {
        let out = bin()
            .args([
                "verify",
                "--system",
                "linear_sink_2d",
                "--grid",
                "-2,2,-2,2:32,32",
                "--tau",
                "0.5",
                "--seed-set",
                "box:0,0,0.9",
                "--out",
            ])
            .arg(dir)
            .output()
            .unwrap();
        assert!(out.status.success());
        // the report carries no run-local paths, so cross-directory
        // comparison is fair
        std::fs::read(dir.join("report.json")).unwrap()
    };
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(run(a.path()), run(b.path()));
}
