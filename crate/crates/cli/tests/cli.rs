use std::path::Path;
use std::process::Command;

fn mpbnb(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_mpbnb")).args(args).output().expect("binary runs")
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

#[test]
fn generate_certify_validate_map() {
    let dir = tempfile::tempdir().unwrap();
    let (prob, cert, csv) = (path(dir.path(), "p.json"), path(dir.path(), "c.json"), path(dir.path(), "m.csv"));
    let o = mpbnb(&["generate", "--kind", "milp", "--nb", "3", "--nc", "3", "--m", "6", "--ntheta", "2", "--seed", "2", "--out", &prob]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = mpbnb(&["certify", "--problem", &prob, "--node-rule", "bf", "--branch-rule", "mib", "--out", &cert]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = mpbnb(&["validate", "--problem", &prob, "--certificate", &cert, "--grid", "30x30", "--config-echo"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(String::from_utf8_lossy(&o.stdout).contains("violations           0"));
    let o = mpbnb(&["map", "--certificate", &cert, "--problem", &prob, "--axes", "0,1", "--res", "20", "--out", &csv]);
    assert!(o.status.success());
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 401);
    let o = mpbnb(&["solve", "--problem", &prob, "--theta", "-0.1,0.2"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["kappa"]["nodes"].as_u64().unwrap() >= 1);
    assert!(v.get("J").is_some() && v.get("x").is_some());
}

#[test]
fn validation_failure_sets_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let (prob, cert) = (path(dir.path(), "p.json"), path(dir.path(), "c.json"));
    mpbnb(&["generate", "--kind", "milp", "--nb", "3", "--nc", "2", "--m", "6", "--ntheta", "2", "--seed", "2", "--out", &prob]);
    assert!(mpbnb(&["certify", "--problem", &prob, "--out", &cert]).status.success());
    let mut c: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    for r in c["regions"].as_array_mut().unwrap() {
        let n = r["kappa"]["iterations"].as_u64().unwrap();
        r["kappa"]["iterations"] = serde_json::json!(n + 1);
    }
    std::fs::write(&cert, serde_json::to_string(&c).unwrap()).unwrap();
    let o = mpbnb(&["validate", "--problem", &prob, "--certificate", &cert, "--grid", "10x10"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn bad_input_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let prob = path(dir.path(), "bad.json");
    std::fs::write(&prob, r#"{"kind": "milp", "n_c": 1}"#).unwrap();
    let o = mpbnb(&["solve", "--problem", &prob, "--theta", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
}
