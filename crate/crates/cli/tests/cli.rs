use std::path::Path;
use std::process::{Command, Output};

fn esgdf(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_esgdf"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    std::fs::write(dir.join(name), text).unwrap();
    name.to_string()
}

fn assert_error_kind(o: &Output, kind: &str) {
    assert!(!o.status.success());
    let err = stderr(o);
    let line = err.lines().find(|l| l.starts_with("error: ")).unwrap_or_else(|| panic!("no error line in {err}"));
    assert!(line.starts_with(&format!("error: kind={kind} message=")), "{line}");
}

#[test]
fn verify_passes_every_check() {
    let dir = tempfile::tempdir().unwrap();
    let o = esgdf(&["verify", "--seed", "3"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines.iter().all(|l| l.starts_with("PASS ")), "{out}");
}

#[test]
fn run_to_time_zero_writes_only_the_initial_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "t0.cfg", "problem = vortex\nnx = 4\nny = 4\nt_end = 0\noutput.dir = out\n");
    let o = esgdf(&["run", "--config", &cfg], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let mut names: Vec<String> = std::fs::read_dir(dir.path().join("out"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["diagnostics.csv", "snapshot_000000.csv", "snapshot_000000.vtk"]);
    let diag = std::fs::read_to_string(dir.path().join("out/diagnostics.csv")).unwrap();
    assert_eq!(diag.lines().count(), 2);
    assert!(diag.lines().nth(1).unwrap().starts_with("0,0.0000000000000000e0,"));
    // k = 2 uses 4 nodes per cell direction
    let csv = std::fs::read_to_string(dir.path().join("out/snapshot_000000.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 16 * 16);
    assert!(!csv.contains('\r'));
}

#[test]
fn run_output_is_deterministic_and_follows_cadence() {
    let dir = tempfile::tempdir().unwrap();
    let text = |out: &str| {
        format!("problem = field_loop\nnx = 12\nny = 6\nk = 1\nmax_steps = 5\noutput.every_n_steps = 2\noutput.dir = {out}\n")
    };
    for out in ["a", "b"] {
        let cfg = write_config(dir.path(), &format!("{out}.cfg"), &text(out));
        let o = esgdf(&["run", "--config", &cfg], dir.path());
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let diag = std::fs::read_to_string(dir.path().join("a/diagnostics.csv")).unwrap();
    let steps: Vec<&str> = diag.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(steps, ["0", "2", "4", "5"]);
    for name in ["diagnostics.csv", "snapshot_000004.vtk", "snapshot_000005.csv"] {
        let a = std::fs::read(dir.path().join("a").join(name)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
}

#[test]
fn run_reports_machine_readable_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad_key = write_config(dir.path(), "bad.cfg", "problem = vortex\nresolution = 3\n");
    assert_error_kind(&esgdf(&["run", "--config", &bad_key], dir.path()), "config");
    let unknown = write_config(dir.path(), "unknown.cfg", "problem = tornado\n");
    assert_error_kind(&esgdf(&["run", "--config", &unknown], dir.path()), "unknown_problem");
    assert_error_kind(&esgdf(&["run", "--config", "missing.cfg"], dir.path()), "io");
    let degree = write_config(dir.path(), "k.cfg", "problem = vortex\nk = 9\nnx = 4\nny = 4\n");
    assert_error_kind(&esgdf(&["run", "--config", &degree], dir.path()), "unsupported_degree");
}

#[test]
fn converge_reports_third_order_for_quadratics() {
    let dir = tempfile::tempdir().unwrap();
    let o = esgdf(&["converge", "--problem", "vortex", "--k", "2", "--meshes", "32,64", "--output", "conv.csv"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(out, std::fs::read_to_string(dir.path().join("conv.csv")).unwrap());
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "N,err_rho,ord_rho,err_mx,ord_mx,err_Bx,ord_Bx,err_E,ord_E");
    assert!(lines[1].starts_with("32,") && lines[1].matches(",-").count() == 4);
    let row: Vec<f64> = lines[2].split(',').map(|v| v.parse().unwrap()).collect();
    let orders = [row[2], row[4], row[6], row[8]];
    let mean = orders.iter().sum::<f64>() / 4.0;
    assert!((2.7..=3.5).contains(&mean), "orders {orders:?}");
    assert!(orders.iter().all(|o| (2.4..=3.8).contains(o)), "orders {orders:?}");
}

#[test]
fn converge_rejects_problems_without_exact_solution() {
    let dir = tempfile::tempdir().unwrap();
    assert_error_kind(&esgdf(&["converge", "--problem", "rotor", "--meshes", "4"], dir.path()), "config");
}

#[test]
fn reference_is_built_then_reused() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["reference", "--problem", "rotated_brio_wu", "--cells", "300", "--output", "ref/bw.csv"];
    let o = esgdf(&args, dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let path = dir.path().join("ref/bw.csv");
    let first = std::fs::read_to_string(&path).unwrap();
    assert!(first.starts_with("# cells=300 time="));
    assert_eq!(first.lines().count(), 302);
    let modified = std::fs::metadata(&path).unwrap().modified().unwrap();
    assert!(esgdf(&args, dir.path()).status.success());
    assert_eq!(std::fs::metadata(&path).unwrap().modified().unwrap(), modified);
    assert_error_kind(&esgdf(&["reference", "--problem", "rotor"], dir.path()), "config");
}

#[test]
fn missing_subcommand_fails() {
    let dir = tempfile::tempdir().unwrap();
    assert!(!esgdf(&[], dir.path()).status.success());
}
