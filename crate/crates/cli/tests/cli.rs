use std::process::{Command, Output};

fn nckdv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nckdv"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn flows_two_contains_closed_form_terms() {
    let o = nckdv(&["flows", "--n", "2", "--format", "tsv"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    for line in [
        "1\t0\t0\tu_0,0^2\t1/2\t0",
        "2\t0\t0\tu_0,0^3\t1/6\t0",
        "2\t2\t0\tu_0,0^1*u_2,0^1\t1/12\t0",
        "2\t2\t0\tu_1,0^2\t1/24\t0",
        "2\t4\t0\tu_4,0^1\t1/240\t0",
    ] {
        assert!(s.lines().any(|l| l == line), "missing {line:?}");
    }
}

#[test]
fn flows_json_is_deterministic() {
    let a = nckdv(&["flows", "--n", "2"]);
    let b = nckdv(&["flows", "--n", "2"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert!(v.is_object() || v.is_array());
}

#[test]
fn flows_with_modes() {
    let o = nckdv(&["flows", "--n", "1", "--modes", "1,-1,2"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["dx_P_by_mode"].is_object());
}

#[test]
fn predict_small_contains_bssz_value() {
    let args = ["predict", "--gmax", "1", "--nmax", "2", "--mode-bound", "2", "--flows", "1"];
    let o = nckdv(&args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let hit = v["table"].as_array().unwrap().iter().any(|e| {
        e["g"] == 1 && e["j"] == 1 && e["A"] == serde_json::json!([-2, 2]) && e["value"] == "1/8"
    });
    assert!(hit, "no (1,1) entry with value 1/8 at a=2");
    assert_eq!(o.stdout, nckdv(&args).stdout);
}

#[test]
fn predict_writes_table_file() {
    let dir = std::env::temp_dir().join(format!("nckdv-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("table.json");
    let o = nckdv(&[
        "predict", "--gmax", "1", "--nmax", "2", "--mode-bound", "1", "--flows", "1", "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let table: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(!table.as_array().unwrap().is_empty());
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(report.is_object());
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn verify_quick_suites_pass() {
    for suite in ["flows", "series", "onepsi", "bssz", "dvv", "rjg", "graphs", "classical"] {
        let o = nckdv(&["verify", "--suite", suite]);
        assert_eq!(o.status.code(), Some(0), "suite {suite}");
        let s = stdout(&o);
        assert!(s.lines().all(|l| l.starts_with("PASS ")), "{s}");
    }
}

#[test]
fn graphs_counts() {
    let o = nckdv(&["graphs", "--genus", "1", "--legs", "1", "--weightings", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let arr = v.as_array().unwrap();
    assert_eq!(arr.len(), 2);
    let mut counts: Vec<u64> = arr.iter().map(|g| g["weightings"]["count"].as_u64().unwrap()).collect();
    counts.sort();
    assert_eq!(counts, vec![1, 3]);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(nckdv(&["bogus"]).status.code(), Some(2));
    assert_eq!(nckdv(&["flows"]).status.code(), Some(2));
    assert_eq!(nckdv(&["flows", "--n", "0"]).status.code(), Some(2));
    assert_eq!(nckdv(&["flows", "--n", "1", "--eps-max", "-1"]).status.code(), Some(2));
    assert_eq!(nckdv(&["graphs", "--genus", "0", "--legs", "3", "--a", "1,-1"]).status.code(), Some(2));
    assert_eq!(nckdv(&["predict", "--nmax", "0"]).status.code(), Some(2));
}
