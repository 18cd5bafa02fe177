use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_implicitize"))
        .args(args)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

const SMALL: &str = "experiment = fhn_convergence\ndt = [0.1, 0.05]\nt_end = 1.0\n";

#[test]
fn successful_run_writes_csv_and_prints_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "a.cfg", SMALL);
    let out = dir.path().join("nested/a.csv");
    let res = run(&["run", &cfg, "--output", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let stdout = String::from_utf8(res.stdout).unwrap();
    assert!(stdout.contains("wrote"));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 3);
    // timing is on by default, so the wall-time column is filled
    assert!(csv.lines().nth(1).unwrap().rsplit(',').next().unwrap().parse::<f64>().is_ok());
}

#[test]
fn output_flag_overrides_config_key() {
    let dir = tempfile::tempdir().unwrap();
    let from_key = dir.path().join("from_key.csv");
    let body = format!("{SMALL}output = {}\n", from_key.display());
    let cfg = write_config(dir.path(), "b.cfg", &body);

    assert_eq!(run(&["run", &cfg, "--no-timing"]).status.code(), Some(0));
    assert!(from_key.exists());

    let flag = dir.path().join("flag.csv");
    assert_eq!(run(&["run", &cfg, "--no-timing", "--output", flag.to_str().unwrap()]).status.code(), Some(0));
    assert_eq!(std::fs::read(&flag).unwrap(), std::fs::read(&from_key).unwrap());
}

#[test]
fn config_errors_exit_one_and_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.cfg", "experiment = fhn_convergence\ndepth = [2, -1]\n");
    let res = run(&["run", &cfg]);
    assert_eq!(res.status.code(), Some(1));
    let err = String::from_utf8(res.stderr).unwrap();
    assert!(err.contains("depth"), "{err}");

    let cfg = write_config(dir.path(), "unknown.cfg", "experiment = heat_cfl\n");
    assert_eq!(run(&["run", &cfg]).status.code(), Some(1));

    let missing = dir.path().join("missing.cfg");
    assert_eq!(run(&["run", missing.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["run"]).status.code(), Some(1));
    assert_eq!(run(&["run", "x.cfg", "--threads", "many"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn zero_threads_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.cfg", SMALL);
    let res = run(&["run", &cfg, "--threads", "0"]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8(res.stderr).unwrap().contains("threads"));
}

#[test]
fn unwritable_output_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "d.cfg", SMALL);
    // the destination is an existing directory
    let res = run(&["run", &cfg, "--output", dir.path().to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn no_timing_output_is_byte_identical_across_threads() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "e.cfg",
        "experiment = heat_depth_dt_table\ncells = [8]\ndepth = [0, 2, 5]\ndt_factor = [0.5, 2.0]\n",
    );
    let mut csvs = Vec::new();
    for threads in ["1", "3", "3"] {
        let out = dir.path().join(format!("e{}.csv", csvs.len()));
        let res = run(&["run", &cfg, "--no-timing", "--threads", threads, "--output", out.to_str().unwrap()]);
        assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
        csvs.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
    assert_eq!(csvs[1], csvs[2]);
    let text = String::from_utf8(csvs.remove(0)).unwrap();
    assert!(text.lines().skip(1).all(|l| l.ends_with(',')));
}
