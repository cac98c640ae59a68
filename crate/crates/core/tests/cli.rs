use std::fs;
use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn toral(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_toral"))
        .args(args)
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn report(dir: &Path, command: &str) -> (String, Value) {
    let csv = fs::read_to_string(dir.join(format!("{command}.csv"))).unwrap();
    let json =
        serde_json::from_str(&fs::read_to_string(dir.join(format!("{command}.json"))).unwrap()).unwrap();
    (csv, json)
}

#[test]
fn sweep_writes_csv_and_config_echo() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("leb.json");
    fs::write(&m, r#"{"type":"lebesgue","d":2}"#).unwrap();
    let out = dir.path().join("out");
    let (code, _) = toral(&[
        "sweep",
        "--dim",
        "2",
        "--n",
        "1..30",
        "--measure",
        m.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let (csv, json) = report(&out, "sweep");
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,N,lambda_min,lambda_max,status"));
    assert!(csv.contains("\n25,12,"));
    assert!(!csv.contains('\r'));
    assert_eq!(json["config"]["measure_echo"], r#"{"type":"lebesgue","d":2}"#);
    assert_eq!(json["tool"], "toral");
}

#[test]
fn gram_dirac_reports_shell_size() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("dirac.json");
    fs::write(&m, r#"{"type":"dirac","d":3,"x0":[0.1,0.2,0.3]}"#).unwrap();
    let (code, _) = toral(&[
        "gram",
        "--dim",
        "3",
        "--n",
        "9",
        "--measure",
        m.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let (_, json) = report(dir.path(), "gram");
    let hi = json["result"]["lambda_max"].as_f64().unwrap();
    assert!((hi - 30.0).abs() < 1e-8);
}

#[test]
fn bad_measure_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("bad.json");
    fs::write(&m, r#"{"type":"circle","x0":[0.0,0.0],"radius":0.7}"#).unwrap();
    let (code, err) = toral(&[
        "gram",
        "--dim",
        "2",
        "--n",
        "5",
        "--measure",
        m.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 2);
    assert!(err.contains("error"));
    let (code, _) = toral(&["gram", "--dim", "2", "--n", "5", "--measure", "/nonexistent.json"]);
    assert_eq!(code, 2);
}

#[test]
fn help_exits_zero_and_unknown_flag_two() {
    assert_eq!(toral(&["--help"]).0, 0);
    assert_eq!(toral(&["cantor", "--help"]).0, 0);
    assert_eq!(toral(&["cantor", "--alpha", "x"]).0, 2);
}

#[test]
fn cantor_divergent_regime_fails_audit() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().to_str().unwrap();
    assert_eq!(
        toral(&["cantor", "--alpha", "0.25", "--eps", "0.3", "--depth", "10", "--out", o]).0,
        0
    );
    assert_eq!(
        toral(&["cantor", "--alpha", "0.25", "--eps", "0.6", "--depth", "6", "--out", o]).0,
        1
    );
    let (_, json) = report(dir.path(), "cantor");
    assert_eq!(json["result"]["divergent_regime"], true);
}

#[test]
fn vanish_and_nullspace_on_tilted_line() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("patch.json");
    fs::write(
        &p,
        r#"{"beta":1,"kind":"line","base":[0.0,0.0,0.0],"slopes":[0.41,0.15]}"#,
    )
    .unwrap();
    let (o, ps) = (dir.path().to_str().unwrap(), p.to_str().unwrap());
    let (code, err) = toral(&[
        "nullspace",
        "--patch",
        ps,
        "--eps",
        "0.05",
        "--eta",
        "0.2",
        "--radius",
        "20",
        "--out",
        o,
    ]);
    assert_eq!(code, 0, "{err}");
    let (_, json) = report(dir.path(), "nullspace");
    assert!(json["result"]["solution"]["residual"].as_f64().unwrap() <= 1e-8);
    let (code, err) = toral(&[
        "vanish", "--patch", ps, "--eps", "0.05", "--eta", "0.2", "--radii", "20,30", "--out", o,
    ]);
    assert_eq!(code, 0, "{err}");
    let (csv, _) = report(dir.path(), "vanish");
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn every_command_writes_both_files() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("circle.json");
    fs::write(&m, r#"{"type":"circle","x0":[0.5,0.5],"R":0.2}"#).unwrap();
    let ms = m.to_str().unwrap();
    let o = dir.path().join("o");
    let os = o.to_str().unwrap();
    let runs: Vec<(&str, Vec<&str>)> = vec![
        ("shell", vec!["--dim", "3", "--n", "9"]),
        ("counts", vec!["--dim", "3", "--max", "50"]),
        ("clusters", vec!["--dim", "2", "--n", "1105"]),
        ("jarnik", vec!["--max", "2000"]),
        ("blocks", vec!["--dim", "2", "--n", "20..30", "--measure", ms]),
        ("bourgain", vec!["--dim", "2", "--n", "1..50", "--samples", "200"]),
        ("frostman", vec!["--dim", "2", "--n", "25..65", "--measure", ms]),
        ("cylinder", vec!["--n", "25"]),
        ("irregular", vec!["--n", "1000", "--eps", "0.5"]),
        (
            "measure-probe",
            vec!["--measure", ms, "--k-max", "4", "--decay-k", "16"],
        ),
    ];
    for (cmd, args) in runs {
        let mut full = vec![cmd];
        full.extend(args);
        full.extend(["--out", os]);
        let (code, err) = toral(&full);
        assert!(code == 0 || code == 1, "{cmd}: exit {code}: {err}");
        assert!(o.join(format!("{cmd}.csv")).exists(), "{cmd}");
        let (_, json) = report(&o, cmd);
        assert_eq!(json["config"]["command"], cmd);
    }
}
