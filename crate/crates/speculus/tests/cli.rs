use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_speculus"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn speculus")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn value<'a>(out: &'a str, key: &str) -> Option<&'a str> {
    out.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
}

fn write_problem(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn passing_check_exits_zero() {
    let o = run(&["check", fixture("transport.prob").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(value(&stdout(&o), "status"), Some("pass"));
}

#[test]
fn failing_check_exits_one() {
    let o = run(&["check", fixture("counterexample.prob").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert_eq!(value(&out, "s2"), Some("fail"));
    assert_eq!(value(&out, "residual"), Some("pass"));
}

#[test]
fn malformed_problem_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_problem(&dir, "bad.prob", "[problem]\nkind = bogus\n");
    let o = run(&["check", &p]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn evaluation_error_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_problem(&dir, "s.prob", "[problem]\nkind = function\nvars = x\nu = sqrt(x)\n");
    let o = run(&["deriv", &p, "--point", "-1", "--axis", "x"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn class_violation_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_problem(&dir, "w.prob", "[problem]\nkind = wave\nphi = abs(x)\npsi = 0\n");
    let out = dir.path().join("w.csv");
    let o = run(&["solve", &p, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    assert!(!out.exists());
}

#[test]
fn deriv_at_a_crossing_of_two_kinks() {
    let o = run(&[
        "deriv",
        fixture("kink2d.prob").to_str().unwrap(),
        "--point",
        "3,6",
        "--axis",
        "x",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(value(&out, "alpha"), Some("3"));
    assert_eq!(value(&out, "beta"), Some("-3"));
    assert_eq!(value(&out, "specular"), Some("0"));
    assert_eq!(value(&out, "on_line"), Some("true"));
}

#[test]
fn deriv_lists_four_weak_planes() {
    let o = run(&[
        "deriv",
        fixture("planes.prob").to_str().unwrap(),
        "--point",
        "0,0",
        "--axis",
        "y",
    ]);
    let out = stdout(&o);
    assert_eq!(value(&out, "strong"), Some("false"));
    assert_eq!(value(&out, "planes"), Some("4"));
    assert_eq!(out.lines().filter(|l| l.starts_with("plane.")).count(), 4);
}

#[test]
fn smooth_point_reports_a_normal() {
    let o = run(&[
        "deriv",
        fixture("q.prob").to_str().unwrap(),
        "--point",
        "1,2",
        "--axis",
        "y",
    ]);
    let out = stdout(&o);
    assert_eq!(value(&out, "specular"), Some("2"));
    assert_eq!(value(&out, "strong"), Some("true"));
    assert_eq!(value(&out, "normal"), Some("1,2,-1"));
}

#[test]
fn halfline_csv_contains_known_value() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("h.csv");
    let o = run(&[
        "solve",
        fixture("halfline.prob").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(!csv.contains('\r'));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x,t,u,ux,ut,residual"));
    let row: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect::<Vec<f64>>())
        .find(|r| r[0] == 2.0 && r[1] == 1.0)
        .expect("grid row at (2, 1)");
    assert_eq!(row[2], 4.0);
}

#[test]
fn non_s2_solution_prints_a_warning() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.csv");
    let o = run(&[
        "solve",
        fixture("counterexample.prob").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("warning: the solution is not in S2"), "{err}");
    assert!(err.contains("x + t") && err.contains("x - t"));
}

#[test]
fn zero_data_give_a_zero_field() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("z.csv");
    let o = run(&[
        "solve",
        fixture("zero.prob").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 15);
    for r in rows {
        assert!(r.split(',').skip(2).all(|v| v == "0"), "{r}");
    }
    let c = run(&["check", fixture("zero.prob").to_str().unwrap()]);
    assert_eq!(c.status.code(), Some(0));
}

#[test]
fn rows_are_time_major() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    run(&[
        "solve",
        fixture("transport.prob").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    let csv = std::fs::read_to_string(&out).unwrap();
    let keys: Vec<(f64, f64)> = csv
        .lines()
        .skip(1)
        .map(|l| {
            let v: Vec<f64> = l.split(',').take(2).map(|s| s.parse().unwrap()).collect();
            (v[1], v[0])
        })
        .collect();
    let grid = &keys[..11 * 5];
    assert!(grid.windows(2).all(|w| w[0] < w[1]));
}
