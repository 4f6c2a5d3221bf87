use std::fs;
use std::process::{Command, Output};

fn mrhrc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mrhrc")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn eval_zero_and_one() {
    let o = mrhrc(&["eval", "0.0"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mantissa: i64 = text
        .lines()
        .find(|l| l.starts_with("output"))
        .and_then(|l| l.split("mantissa ").nth(1))
        .and_then(|r| r.split(' ').next())
        .unwrap()
        .parse()
        .unwrap();
    assert!((mantissa - 8192).abs() <= 2, "{text}");

    let o = mrhrc(&["eval", "1.0"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("reference 0.7310585786"));
}

#[test]
fn eval_range_and_parse_errors() {
    let o = mrhrc(&["eval", "3.0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("outside the normalized range"));
    assert_eq!(mrhrc(&["eval", "abc"]).status.code(), Some(2));
    assert!(mrhrc(&["eval", "3.0", "--clamp"]).status.success());
}

#[test]
fn sweep_rejects_empty_range() {
    assert_eq!(mrhrc(&["sweep", "0", "0", "10"]).status.code(), Some(2));
    assert_eq!(mrhrc(&["sweep", "-1", "1", "1"]).status.code(), Some(2));
}

#[test]
fn sweep_endpoints_only() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("two.csv");
    let o = mrhrc(&["sweep", "-1", "1", "2", "--csv", csv.to_str().unwrap()]);
    assert!(o.status.success());
    let text = fs::read_to_string(&csv).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("-1.000000000e0,"));
    assert!(rows[1].starts_with("1.000000000e0,"));
}

#[test]
fn sweep_csv_and_json_agree() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    let json = dir.path().join("s.json");
    let o = mrhrc(&[
        "sweep", "-1", "1", "4001",
        "--csv", csv.to_str().unwrap(),
        "--json", json.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,fx_out,ref_out,abs_err"));
    let errs: Vec<f64> = lines
        .map(|l| l.split(',').nth(3).unwrap().parse().unwrap())
        .collect();
    assert_eq!(errs.len(), 4001);

    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(summary["n_samples"], 4001);
    assert_eq!(summary["format"], "Q2.14");
    let mae = summary["mae"].as_f64().unwrap();
    assert!(mae <= 8e-4);
    assert!(mae <= summary["max_abs_err"].as_f64().unwrap());
    // CSV cells carry 10 significant digits, which bounds the agreement.
    let csv_mean = errs.iter().sum::<f64>() / errs.len() as f64;
    assert!(((csv_mean - mae) / mae).abs() < 1e-9, "{csv_mean} vs {mae}");
}

#[test]
fn sweep_unwritable_path_is_io_error() {
    let o = mrhrc(&["sweep", "-1", "1", "11", "--csv", "/nonexistent-dir/out.csv"]);
    assert_eq!(o.status.code(), Some(3));
    let o = mrhrc(&["sweep", "-1", "1", "11", "--json", "/nonexistent-dir/out.json"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn verify_default_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("checks.json");
    let o = mrhrc(&["verify", "--json", json.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("r4_range               0.010376"), "{text}");
    assert!(text.contains("r2_range               0.504210"));
    assert!(text.contains("0.5688"));
    assert!(text.contains("srt_overlap_1_2        j=4 1.5 in (1.33337, 1.66668) PASS"));

    let checks: serde_json::Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    let checks = checks.as_array().unwrap();
    assert_eq!(checks.len(), 16);
    for key in ["check", "j", "lower", "upper", "threshold", "pass"] {
        assert!(checks[0].get(key).is_some());
    }
}

#[test]
fn tables_export_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    assert!(mrhrc(&["tables", "--out", a.to_str().unwrap()]).status.success());
    assert!(mrhrc(&["tables", "--out", b.to_str().unwrap()]).status.success());
    let (ta, tb) = (fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    assert_eq!(stdout(&mrhrc(&["tables"])).as_bytes(), ta.as_slice());

    let text = String::from_utf8(ta).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 21);
    assert!(!text.contains('\r'));
    let inv_kh: Vec<&str> = lines.iter().find(|l| l.starts_with("inv_kh")).unwrap().split(' ').collect();
    assert_eq!(inv_kh.len(), 4);
    let value: f64 = inv_kh[3].parse().unwrap();
    assert!((value - 1.043678).abs() < 2e-5);
    assert_eq!(i64::from_str_radix(inv_kh[2], 16).unwrap() as f64 / 65536.0, value);
    assert_eq!(mrhrc(&["tables", "--out", "/nonexistent-dir/t.txt"]).status.code(), Some(3));
}

#[test]
fn datapath_flags_change_format() {
    let o = mrhrc(&["--bits", "20", "--frac", "18", "eval", "0.5"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("Q2.18"));
    let o = mrhrc(&["eval", "0.5", "--rounding", "trunc", "--guard", "3", "--lvc-stages", "12"]);
    assert!(o.status.success());
    assert_eq!(mrhrc(&["eval", "0.5", "--lvc-stages", "40"]).status.code(), Some(2));
}

#[test]
fn latency_subcommand() {
    let o = mrhrc(&["latency"]);
    assert!(o.status.success());
    let r: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["total_cycles"], 29);
    let o = mrhrc(&["latency", "--lvc-stages", "0"]);
    let r: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["total_cycles"], 14);
}
