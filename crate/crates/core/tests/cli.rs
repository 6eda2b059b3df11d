mod common;

use common::*;

fn dir() -> tempfile::TempDir {
    tempfile::tempdir().unwrap()
}

#[test]
fn check_linreg_exists_exits_zero() {
    let d = dir();
    let p = write(d.path(), "ds.csv", LINREG_EXISTS);
    let r = run(&["check", "--model", "linreg", p.to_str().unwrap(), "--label", "y"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = r.json();
    assert_eq!(v["verdict"]["value"], "exists");
    let w: Vec<f64> = serde_json::from_value(v["model"]["coefficients"].clone()).unwrap();
    assert!((w[0] - 2.0).abs() < 1e-9 && w[1] == 0.0, "{w:?}");
    assert!(v["timings"]["train_ms"].as_f64().unwrap() >= 0.0);
}

#[test]
fn check_linreg_not_exists_exits_three() {
    let d = dir();
    let p = write(d.path(), "ds.csv", LINREG_NOT_EXISTS);
    let r = run(&["check", "--model", "linreg", p.to_str().unwrap()]);
    assert_eq!(r.code, 3, "{}", r.stderr);
    assert_eq!(r.json()["verdict"]["value"], "not_exists");
    assert!(r.json()["verdict"]["details"]["witness"].is_object());
}

#[test]
fn check_linsvm_fixtures() {
    let d = dir();
    let yes = write(d.path(), "yes.csv", LINSVM_EXISTS);
    let no = write(d.path(), "no.csv", LINSVM_NOT_EXISTS);
    assert_eq!(run(&["check", "--model", "linsvm", "--C", "1", yes.to_str().unwrap()]).code, 0);
    assert_eq!(run(&["check", "--model", "linsvm", "--C", "1", no.to_str().unwrap()]).code, 3);
}

#[test]
fn rbf_close_to_boundary_is_unknown() {
    let d = dir();
    let p = write(d.path(), "ds.csv", RBF_UNKNOWN);
    let r = run(&["check", "--model", "rbf-svm", "--gamma", "1", p.to_str().unwrap()]);
    assert_eq!(r.code, 4, "{}", r.stderr);
    assert_eq!(r.json()["verdict"]["value"], "unknown");
}

#[test]
fn arccos_two_missing_in_a_row_is_rejected() {
    let d = dir();
    let p = write(d.path(), "ds.csv", ARCCOS_TWO_MISSING);
    let b = write(d.path(), "b.json", r#"{"a": [-1, 1], "b": [-1, 1]}"#);
    let r = run(&["check", "--model", "arccos-svm", p.to_str().unwrap(), "--bounds", b.to_str().unwrap()]);
    assert_eq!(r.code, 2);
    assert!(r.stdout.is_empty());
    assert!(r.stderr.contains("one missing value"), "{}", r.stderr);
}

#[test]
fn usage_and_data_errors_exit_two() {
    let d = dir();
    let p = write(d.path(), "ds.csv", LINREG_EXISTS);
    let path = p.to_str().unwrap();
    assert_eq!(run(&["check", "--model", "linreg", path, "--no-such-flag"]).code, 2);
    assert_eq!(run(&["check", "--model", "nonsense", path]).code, 2);
    assert_eq!(run(&["check", "--model", "linreg", "/does/not/exist.csv"]).code, 2);
    assert_eq!(run(&["check", "--model", "linreg", path, "--label", "nope"]).code, 2);
    let bad = write(d.path(), "bad.csv", "a,y\nfoo,1\n");
    let r = run(&["check", "--model", "linreg", bad.to_str().unwrap()]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("row 2"), "{}", r.stderr);
    // regression labels are not -1/+1
    assert_eq!(run(&["check", "--model", "linsvm", path]).code, 2);
    assert_eq!(run(&["acm", "--model", "linsvm", "--exact", path]).code, 2);
}

#[test]
fn acm_tiny_fixture() {
    let d = dir();
    let p = write(d.path(), "ds.csv", LINREG_NOT_EXISTS);
    let b = write(d.path(), "b.json", r#"{"b": [0, 1]}"#);
    let (p, b) = (p.to_str().unwrap(), b.to_str().unwrap());
    let r = run(&["acm", "--model", "linreg", "--epsilon", "10", "--samples", "64", "--seed", "7", "--bounds", b, p]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = r.json();
    assert_eq!(v["verdict"]["value"], "acm_exists");
    assert_eq!(v["verdict"]["details"]["g_kind"], "exact-over-edges");
    let exact = run(&["acm", "--model", "linreg", "--exact", "--epsilon", "10", "--bounds", b, p]);
    assert_eq!(exact.code, 0, "{}", exact.stderr);
    let tight = run(&["acm", "--model", "linreg", "--epsilon", "0", "--bounds", b, p]);
    assert_eq!(tight.code, 3);
    assert_eq!(tight.json()["verdict"]["value"], "not_found");
}

#[test]
fn oracle_reports_witness() {
    let d = dir();
    let p = write(d.path(), "ds.csv", LINREG_NOT_EXISTS);
    let b = write(d.path(), "b.json", r#"{"b": [-2, 2]}"#);
    let r = run(&["oracle", "--model", "linreg", "--grid-points", "21", "--bounds", b.to_str().unwrap(), p.to_str().unwrap()]);
    assert_eq!(r.code, 3, "{}", r.stderr);
    let v = r.json();
    assert_eq!(v["verdict"]["details"]["exists"], false);
    assert_eq!(v["verdict"]["details"]["repairs"], 21);
    assert!(v["verdict"]["details"]["witness"]["first"].is_array());

    let ok = write(d.path(), "ok.csv", LINREG_EXISTS);
    let r = run(&["oracle", "--model", "linreg", "--bounds", b.to_str().unwrap(), ok.to_str().unwrap()]);
    assert_eq!(r.code, 0, "{}", r.stderr);
}

#[test]
fn impute_round_trips_complete_csv() {
    let d = dir();
    let p = write(d.path(), "ds.csv", COMPLETE);
    for strategy in ["mean", "drop"] {
        let r = run(&["impute", "--strategy", strategy, p.to_str().unwrap()]);
        assert_eq!(r.code, 0, "{}", r.stderr);
        assert_eq!(r.stdout, COMPLETE);
    }
}

#[test]
fn impute_fills_means_and_drops_rows() {
    let d = dir();
    let p = write(d.path(), "ds.csv", "a,b,y\n1,NA,1\n3,4,2\n5,8,3\n");
    let out = d.path().join("out.csv");
    let r = run(&["impute", "--strategy", "mean", "-o", out.to_str().unwrap(), p.to_str().unwrap()]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(std::fs::read_to_string(&out).unwrap(), "a,b,y\n1,6,1\n3,4,2\n5,8,3\n");
    let r = run(&["impute", "--strategy", "drop", p.to_str().unwrap()]);
    assert_eq!(r.stdout, "a,b,y\n3,4,2\n5,8,3\n");
}

#[test]
fn quiet_and_compact_output() {
    let d = dir();
    let p = write(d.path(), "ds.csv", LINREG_EXISTS);
    let q = run(&["check", "--model", "linreg", "--quiet", p.to_str().unwrap()]);
    assert_eq!((q.code, q.stdout.as_str()), (0, ""));
    let c = run(&["check", "--model", "linreg", "--json", p.to_str().unwrap()]);
    assert_eq!(c.stdout.lines().count(), 1);
}

#[test]
fn threads_flag_is_accepted() {
    let d = dir();
    let p = write(d.path(), "ds.csv", LINREG_NOT_EXISTS);
    let b = write(d.path(), "b.json", r#"{"b": [0, 1]}"#);
    let one = run(&["acm", "--model", "linreg", "--threads", "1", "--no-timings", "--bounds", b.to_str().unwrap(), p.to_str().unwrap()]);
    let many = run(&["acm", "--model", "linreg", "--threads", "4", "--no-timings", "--bounds", b.to_str().unwrap(), p.to_str().unwrap()]);
    assert_eq!(one.stdout.replace("\"1\"", "\"4\""), many.stdout);
    assert_eq!(run(&["acm", "--model", "linreg", "--threads", "0", p.to_str().unwrap()]).code, 2);
}

#[test]
fn every_report_matches_the_schema() {
    let d = dir();
    let v = schema_validator();
    let b = write(d.path(), "b.json", r#"{"b": [-1, 1]}"#);
    let b = b.to_str().unwrap();
    let cases: Vec<(&str, Vec<&str>)> = vec![
        (LINREG_EXISTS, vec!["check", "--model", "linreg"]),
        (LINREG_NOT_EXISTS, vec!["check", "--model", "linreg"]),
        (LINSVM_EXISTS, vec!["check", "--model", "linsvm"]),
        (LINSVM_NOT_EXISTS, vec!["check", "--model", "linsvm"]),
        (LINSVM_EXISTS, vec!["check", "--model", "poly-svm", "--bounds", b]),
        (RBF_UNKNOWN, vec!["check", "--model", "rbf-svm"]),
        (ARCCOS_EXISTS, vec!["check", "--model", "arccos-svm"]),
        (LINREG_NOT_EXISTS, vec!["acm", "--model", "linreg", "--bounds", b]),
        (LINREG_NOT_EXISTS, vec!["acm", "--model", "linreg", "--exact", "--bounds", b]),
        (LINSVM_EXISTS, vec!["acm", "--model", "linsvm", "--bounds", b]),
        (LINREG_NOT_EXISTS, vec!["oracle", "--model", "linreg", "--bounds", b]),
        (LINSVM_EXISTS, vec!["oracle", "--model", "poly-svm", "--bounds", b, "--grid-points", "5"]),
        (COMPLETE, vec!["check", "--model", "linreg", "--no-timings"]),
    ];
    for (k, (csv, args)) in cases.iter().enumerate() {
        let p = write(d.path(), &format!("c{k}.csv"), csv);
        let mut all = args.clone();
        all.push(p.to_str().unwrap());
        let r = run(&all);
        assert!([0, 3, 4].contains(&r.code), "{all:?}: {}", r.stderr);
        let errs = schema_errors(&v, &r.json());
        assert!(errs.is_empty(), "{all:?}: {errs:?}");
    }
}

#[test]
fn seed_makes_runs_byte_identical() {
    let d = dir();
    let p = write(d.path(), "ds.csv", "a,b,y\n1,NA,1\n2,1,3\nNA,0.5,2\n0.3,NA,0\n");
    let b = write(d.path(), "b.json", r#"{"a": [-1, 1], "b": [-1, 1]}"#);
    let args = ["acm", "--model", "linreg", "--samples", "3", "--seed", "11", "--no-timings", "--bounds", b.to_str().unwrap(), p.to_str().unwrap()];
    let first = run(&args);
    assert_eq!(first.stdout, run(&args).stdout);
    let mut other = args;
    other[6] = "12";
    let second = run(&other);
    assert_eq!(second.code, first.code);
    assert_eq!(second.stdout, run(&other).stdout);
}
