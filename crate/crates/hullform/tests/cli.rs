use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn hullform(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hullform"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

const SMALL: &str = r#"
out_dir = "run"
[oracle]
volume_grid = [8, 8, 8]
[oracle.hull]
stations = 16
ring = 12
[sampling]
volume_grid = [8, 8, 8]
[dataset]
cases = 10
split = [6.0, 2.0, 2.0]
[train]
epochs = 2
points_per_case = 64
validation_points_per_case = 64
hidden = [8]
[explore]
samples = 12
[tsearch]
budget = 30
"#;

#[test]
fn default_config_is_printed_and_loadable() {
    let dir = tempfile::tempdir().unwrap();
    let out = hullform(&["--print-default-config"], dir.path());
    assert_eq!(code(&out), 0);
    fs::write(dir.path().join("d.toml"), &out.stdout).unwrap();
    let again = hullform(&["--config", "d.toml", "--print-default-config"], dir.path());
    assert_eq!(again.stdout, out.stdout);
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&hullform(&["--nonsense"], dir.path())), 1);
    assert_eq!(code(&hullform(&["explore", "--evaluator", "cfd"], dir.path())), 1);
    assert_eq!(code(&hullform(&[], dir.path())), 1);
    assert_eq!(code(&hullform(&["--help"], dir.path())), 0);
    fs::write(dir.path().join("bad.toml"), "seed = \"x\"\n").unwrap();
    assert_eq!(code(&hullform(&["--config", "bad.toml", "gen-data"], dir.path())), 1);
}

#[test]
fn missing_data_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&hullform(&["report"], dir.path())), 2);
    assert_eq!(code(&hullform(&["train"], dir.path())), 2);
    assert_eq!(code(&hullform(&["pareto"], dir.path())), 2);
}

#[test]
fn infeasible_start_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!(
        "{SMALL}\n[[optimize.constraints]]\nname = \"short_entrance\"\ncoefficients = [0.0, 0.0, 0.0, 1.0, 0.0]\nrhs = 0.1\n"
    );
    fs::write(dir.path().join("c.toml"), cfg).unwrap();
    let o = hullform(&["--config", "c.toml", "optimize", "--evaluator", "oracle"], dir.path());
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn full_workflow() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.toml"), SMALL).unwrap();
    let run = |args: &[&str]| {
        let mut all = vec!["--config", "c.toml"];
        all.extend_from_slice(args);
        let o = hullform(&all, dir.path());
        assert_eq!(code(&o), 0, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        String::from_utf8(o.stdout).unwrap()
    };
    assert!(run(&["gen-data"]).contains("10 cases"));
    assert_eq!(code(&hullform(&["--config", "c.toml", "gen-data"], dir.path())), 1);
    run(&["gen-data", "--force"]);
    run(&["train"]);
    let m = fs::read_to_string(dir.path().join("run/model/metrics.csv")).unwrap();
    assert_eq!(m.lines().count(), 4);
    let out = run(&["explore"]);
    assert!(out.contains("12 designs") && out.contains("mean time per evaluation"), "{out}");
    run(&["optimize"]);
    let out = run(&["optimize", "--evaluator", "oracle", "--archive", "run/oracle.jsonl"]);
    assert!(out.contains("Pareto front"));
    // the surrogate archive refuses oracle evaluations
    assert_eq!(code(&hullform(&["--config", "c.toml", "optimize", "--evaluator", "oracle"], dir.path())), 2);
    run(&["pareto", "--archive", "run/oracle.jsonl"]);
    let out = run(&["sensitivity"]);
    assert!(out.contains("v_inf"));
    let out = run(&["report"]);
    assert_eq!(out.lines().count(), 5);
    let svg = fs::read_to_string(dir.path().join("run/figures/scatter_matrix.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    let out = run(&["--seed", "4", "--out", "other", "gen-data"]);
    assert!(out.contains("other"));
}
