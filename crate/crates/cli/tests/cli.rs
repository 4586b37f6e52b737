use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use expcert::interval::Interval;
use expcert::profiles::builtin_profile;
use expcert::verifier::q_scalar;

fn expcert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_expcert"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("expcert-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn verify_writes_log() {
    let log = scratch("d6.log");
    let o = expcert(&["verify", "--d", "6", "--log", log.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("Claim is true for d==6."));
    let text = fs::read_to_string(&log).unwrap();
    assert!(!text.is_empty());
    let again = scratch("d6-jobs1.log");
    let o = expcert(&["--jobs", "1", "verify", "--d", "6", "--log", again.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(fs::read_to_string(&again).unwrap(), text);
}

#[test]
fn verify_tiny_bound_fails_with_subinterval() {
    let o = expcert(&["verify", "--d", "6", "--bound", "[0.0001]"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("failing subinterval ["));
    assert!(q_scalar(6, 1e-5, 2e-5) > 1e-4);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["verify", "--d", "4"][..],
        &["verify", "--d", "6", "--bound", "[0.5,0.4]"],
        &["verify", "--d", "6", "--bound", "[1.5]"],
        &["convexity", "--d", "6", "--margin", "abc"],
        &["expansion", "--v", "30", "--d", "5"],
        &["nonsense"],
    ] {
        let o = expcert(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn fd_props_and_profile_file() {
    assert_eq!(expcert(&["fd-props", "--d", "8"]).status.code(), Some(0));
    let path = scratch("f7.txt");
    let o = expcert(&["fd-props", "--d", "7", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let o = expcert(&["fd-props", "--d", "7", "--profile", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    // A discontinuous profile must fail.
    let broken = fs::read_to_string(&path).unwrap().replacen("7/5 19/100", "7/5 1/5", 1);
    let bad = scratch("f7-bad.txt");
    fs::write(&bad, broken).unwrap();
    let o = expcert(&["fd-props", "--d", "7", "--profile", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn exact_lemma() {
    let table = scratch("lemma.txt");
    let o = expcert(&["exact", "--v", "100000", "--d", "5", "--out", table.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(fs::read_to_string(&table).unwrap().starts_with("# case (k=2, d=5)"));
    let o = expcert(&["exact", "--v", "50", "--d", "8"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("exhaustive union bound at v=50"));
}

#[test]
fn level_curve_csv() {
    let out = scratch("lc.csv");
    let o = expcert(&[
        "level-curve",
        "--d",
        "8",
        "--samples",
        "50",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("alpha_lo,alpha_hi,beta_lo,beta_hi"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 50);
    let f8 = builtin_profile(8).unwrap();
    for r in rows.iter().step_by(7) {
        let f = f8.eval_interval(&Interval::new(r[0], r[1]).unwrap()).unwrap();
        assert!(f.hi() < r[2]);
        assert!(q_scalar(8, r[0], r[2]) <= 1.0 + 1e-9 && q_scalar(8, r[0], r[3]) >= 1.0 - 1e-9);
    }
}

#[test]
fn sample_and_expansion() {
    let out = scratch("g.txt");
    let o = expcert(&[
        "sample",
        "--v",
        "10",
        "--d",
        "5",
        "--seed",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().next(), Some("10 5"));
    assert_eq!(text.lines().count(), 51);
    let csv = scratch("e.csv");
    let o = expcert(&[
        "expansion",
        "--v",
        "10",
        "--d",
        "5",
        "--trials",
        "50",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("violation rate"));
    assert!(fs::read_to_string(&csv)
        .unwrap()
        .starts_with("u,min_left,min_right,required\n"));
}
