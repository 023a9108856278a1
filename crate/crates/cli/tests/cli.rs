use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn arboreal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_arboreal"))
        .args(args)
        .env_remove("ARBOREAL_SEED")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn classify_outputs() {
    let out = arboreal(&["classify", "--q", "2", "--c", "-6", "--beta", "-3/1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        json(&out),
        serde_json::json!({"status": "strictly_preperiodic", "tail": 1, "period": 1})
    );
    let out = arboreal(&["classify", "--q", "2", "--c", "-6", "--beta", "3"]);
    assert_eq!(json(&out), serde_json::json!({"status": "periodic", "period": 1}));
    let out = arboreal(&["classify", "--q", "2", "--c", "-6", "--beta", "0"]);
    assert_eq!(
        json(&out),
        serde_json::json!({"status": "wandering",
            "witness": {"kind": "archimedean", "at_iterate": 2, "value": "30"}})
    );
}

#[test]
fn malformed_input_exits_2() {
    for args in [
        vec!["classify", "--q", "2", "--c", "-6", "--beta", "1/0"],
        vec!["classify", "--q", "6", "--c", "-6", "--beta", "1"],
        vec!["certify", "--q", "2", "--c", "-6", "--beta", "-3", "--levels", "3..1"],
        vec!["oracle-compare", "--q", "3", "--c", "-6", "--beta", "-3"],
    ] {
        let out = arboreal(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn hypothesis_violations_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let cases: [(&[&str], &str); 4] = [
        (&["certify", "--q", "2", "--c", "-6", "--beta", "3", "--out", d], "beta = 3 is periodic"),
        (&["certify", "--q", "2", "--c", "-2", "--beta", "1", "--out", d], "map is PCF"),
        (
            &["multitree", "--q", "2", "--c", "-6", "--roots", "-3,3", "--levels", "2..4", "--out", d],
            "orbit collision f^1(-3) = 3",
        ),
        (&["oracle-compare", "--c", "-6", "--beta", "-6"], "degenerate"),
    ];
    for (args, message) in cases {
        let out = arboreal(args);
        assert_eq!(out.status.code(), Some(3), "{args:?}");
        assert!(stderr(&out).contains(message), "{}", stderr(&out));
    }
}

fn certificate_files(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    files.sort();
    files
}

#[test]
fn certify_then_verify_in_fresh_processes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = arboreal(&["certify", "--q", "2", "--c", "-6", "--beta", "-3", "--levels", "1..6", "--out", d]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report = json(&out);
    assert_eq!(report["summary"], "maximal for 1 ≤ n ≤ 6");
    let level1 = &report["levels"][0]["roots"][0]["search"];
    assert_eq!(level1["outcome"], "not_found");
    assert_eq!(level1["reason"], "exhausted_complete");
    let files = certificate_files(dir.path());
    let names: Vec<_> = files.iter().map(|p| p.file_name().unwrap().to_str().unwrap().to_string()).collect();
    assert_eq!(names, ["level-2.json", "level-3.json", "level-4.json", "level-5.json", "level-6.json"]);
    for f in &files {
        let out = arboreal(&["verify", f.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        assert_eq!(json(&out)["ok"], true);
    }
}

#[test]
fn tampered_certificate_names_clause() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    arboreal(&["certify", "--q", "2", "--c", "-6", "--beta", "-3", "--levels", "2", "--out", d]);
    let path = dir.path().join("level-2.json");
    let text = fs::read_to_string(&path).unwrap().replace("\"11\"", "\"13\"");
    let bad = dir.path().join("bad.json");
    fs::write(&bad, text).unwrap();
    let out = arboreal(&["verify", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("clause (c)"), "{}", stderr(&out));

    let junk = dir.path().join("junk.json");
    fs::write(&junk, "{ not json").unwrap();
    assert_eq!(arboreal(&["verify", junk.to_str().unwrap()]).status.code(), Some(2));
    let missing = dir.path().join("missing.json");
    assert_eq!(arboreal(&["verify", missing.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn multitree_joint_certificates_verify() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = arboreal(&["multitree", "--q", "2", "--c", "-6", "--roots", "-3,2", "--levels", "2..4", "--out", d]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report = json(&out);
    assert_eq!(report["index"]["disjointness"]["supported_up_to"], 4);
    assert_eq!(report["levels"][0]["joint"]["primes"], serde_json::json!(["11", "7"]));
    let files = certificate_files(dir.path());
    assert_eq!(files.len(), 3);
    for f in &files {
        let out = arboreal(&["verify", f.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    }
}

#[test]
fn single_root_multitree_matches_certify() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let shared = a.path().to_str().unwrap();
    let one = arboreal(&["certify", "--q", "2", "--c", "-6", "--beta", "-3", "--levels", "1..4", "--out", shared]);
    let two = arboreal(&["multitree", "--q", "2", "--c", "-6", "--roots", "-3", "--levels", "1..4", "--out", shared]);
    assert_eq!(one.stdout, two.stdout);
    arboreal(&["certify", "--q", "2", "--c", "-6", "--beta", "-3", "--levels", "2..4", "--out", a.path().to_str().unwrap()]);
    arboreal(&["multitree", "--q", "2", "--c", "-6", "--roots", "-3", "--levels", "2..4", "--out", b.path().to_str().unwrap()]);
    for n in 2..=4 {
        let name = format!("level-{n}.json");
        assert_eq!(
            fs::read(a.path().join(&name)).unwrap(),
            fs::read(b.path().join(&name)).unwrap()
        );
    }
}

#[test]
fn deterministic_output() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["multitree", "--q", "2", "--c", "-6", "--roots", "-3,2", "--levels", "1..5", "--out", dir.path().to_str().unwrap()];
    let first = arboreal(&args);
    let second = arboreal(&args);
    assert_eq!(first.stdout, second.stdout);
    let seeded = Command::new(env!("CARGO_BIN_EXE_arboreal"))
        .args(args)
        .env("ARBOREAL_SEED", "17")
        .output()
        .unwrap();
    assert_eq!(seeded.status.code(), Some(0));
    let bad_seed = Command::new(env!("CARGO_BIN_EXE_arboreal"))
        .args(args)
        .env("ARBOREAL_SEED", "seventeen")
        .output()
        .unwrap();
    assert_eq!(bad_seed.status.code(), Some(2));
}

#[test]
fn oracle_compare_reports() {
    let out = arboreal(&["oracle-compare", "--c", "-6", "--beta", "-3"]);
    let v = json(&out);
    assert_eq!((v["predicted_g2"].clone(), v["oracle_g2"].clone(), v["agree"].clone()), (8.into(), 8.into(), true.into()));
    let v = json(&arboreal(&["oracle-compare", "--c", "-6", "--beta", "-2"]));
    assert_eq!(v["oracle_g2"], 2);
    assert_eq!(v["predicted"], "no certificate (level-1 reducible)");
    assert_eq!(v["agree"], "n/a");
    let v = json(&arboreal(&["oracle-compare", "--c", "-6", "--beta", "10"]));
    assert_eq!(v["oracle_g2"], 4);
    assert_eq!(v["consistency"], "no-claim");
}

#[test]
fn config_file_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("config.json");
    fs::write(&cfg, r#"{"max_level": 3}"#).unwrap();
    let c = cfg.to_str().unwrap();
    let out = dir.path().join("certs");
    let base = ["certify", "--q", "2", "--c", "-6", "--beta", "-3", "--levels", "1..5", "--out", out.to_str().unwrap()];
    let mut args = base.to_vec();
    args.extend(["--config", c]);
    assert_eq!(arboreal(&args).status.code(), Some(2));
    args.extend(["--max-level", "5"]);
    assert_eq!(arboreal(&args).status.code(), Some(0));
    fs::write(&cfg, r#"{"no_such_field": 1}"#).unwrap();
    let mut args = base.to_vec();
    args.extend(["--config", c]);
    assert_eq!(arboreal(&args).status.code(), Some(2));
}
