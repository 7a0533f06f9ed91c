use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BLOCK: &str = r#"
[integrator]
dt = 1e-5
steps = 6
output_every = 3

[output]
dir = "results"

[[material]]
name = "m"
model = "elastic"
E = 1e7
nu = 0.3
rho0 = 1000.0

[[subdomain]]
name = "block"
rank = 0
spacing = 0.1
chart = { kind = "identity" }
region = { kind = "all" }

[[lattice]]
subdomain = "block"
material = "m"
min = [0.0, 0.0, 0.0]
max = [0.4, 0.4, 0.4]

[[bc]]
kind = "initial_velocity"
region = { kind = "box", min = [0.0, 0.0, 0.0], max = [0.2, 1.0, 1.0] }
velocity = [1.0, 0.0, 0.0]
"#;

fn gsph(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gsph")).args(args).output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("run.toml");
    fs::write(&path, text).unwrap();
    path
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn validate_accepts_a_good_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BLOCK);
    let o = gsph(&["validate", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).ends_with(": ok (1 subdomain(s), 1 material(s))\n"));
}

#[test]
fn validate_lists_every_problem_with_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let text = BLOCK.replace("E = 1e7", "E = -1e7").replace("nu = 0.3", "nu = 0.6");
    let cfg = write_config(dir.path(), &text);
    let o = gsph(&["validate", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("material[0].E"), "{err}");
    assert!(err.contains("material[0].nu"), "{err}");
}

#[test]
fn parse_error_exits_1_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &BLOCK.replace("steps = 6", "steps = six"));
    let o = gsph(&["validate", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 4, column"), "{}", stderr(&o));
}

#[test]
fn missing_config_exits_3() {
    let o = gsph(&["validate", "/nonexistent/run.toml"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).starts_with("error: "));
}

#[test]
fn info_prints_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BLOCK);
    let o = gsph(&["info", cfg.to_str().unwrap(), "--threads", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("particles: 64\n"), "{out}");
    assert!(out.contains("subdomain block (rank 0): members 64, transients 0"), "{out}");
    assert!(out.contains("initial dt: "), "{out}");
}

#[test]
fn info_reports_transients_of_the_overset_example() {
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/quarter_cylinder.toml");
    let o = gsph(&["info", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let core = stdout(&o).lines().find(|l| l.starts_with("subdomain core")).unwrap().to_string();
    let transients: usize = core.split("transients ").nth(1).unwrap().split(',').next().unwrap().parse().unwrap();
    assert!(transients > 0, "{core}");
}

#[test]
fn run_writes_snapshots_relative_to_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BLOCK);
    let o = gsph(&["run", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = dir.path().join("results");
    for step in [0, 3, 6] {
        assert!(out.join(format!("snapshot_{step:08}.csv")).is_file());
    }
    let index = fs::read_to_string(out.join("index.csv")).unwrap();
    assert_eq!(index.lines().count(), 4);
    assert!(stderr(&o).contains("finished 6 step(s)"));
}

#[test]
fn run_flags_override_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BLOCK);
    let out = dir.path().join("elsewhere");
    let o = gsph(&[
        "run",
        cfg.to_str().unwrap(),
        "--output-dir",
        out.to_str().unwrap(),
        "--max-steps",
        "2",
        "--threads",
        "1",
        "--seed",
        "7",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(out.join("snapshot_00000002.csv").is_file());
    assert!(!out.join("snapshot_00000003.csv").exists());
    assert!(!dir.path().join("results").exists());
}

#[test]
fn thread_count_gives_identical_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BLOCK);
    let mut files = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(threads);
        let o = gsph(&["run", cfg.to_str().unwrap(), "--output-dir", out.to_str().unwrap(), "--threads", threads]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        files.push(fs::read(out.join("snapshot_00000006.csv")).unwrap());
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn inverted_particles_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let text = BLOCK
        .replace("dt = 1e-5", "dt = 1e-3")
        .replace("steps = 6", "steps = 200")
        .replace("velocity = [1.0, 0.0, 0.0]", "velocity = [200.0, 0.0, 0.0]");
    let cfg = write_config(dir.path(), &text);
    let o = gsph(&["run", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let err = stderr(&o);
    assert!(err.contains("inverted configuration") || err.contains("non-finite"), "{err}");
}

#[test]
fn unwritable_output_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BLOCK);
    let blocker = dir.path().join("blocker");
    fs::write(&blocker, "").unwrap();
    let o = gsph(&["run", cfg.to_str().unwrap(), "--output-dir", blocker.join("out").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}
