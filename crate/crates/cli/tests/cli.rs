use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str], cache: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_supercanon"));
    cmd.args(args).env_remove("SUPERCANON_CACHE_DIR");
    if let Some(dir) = cache {
        cmd.arg("--cache-dir").arg(dir);
    }
    cmd.output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn matrix_of(v: &Value) -> Vec<Vec<u64>> {
    v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| {
            r.as_array()
                .unwrap()
                .iter()
                .map(|x| x.as_u64().unwrap())
                .collect()
        })
        .collect()
}

#[test]
fn canonical_e13_in_gl21() {
    let v = json(&run(
        &["canonical", "--m", "2", "--n", "1", "--matrix", "E[1,3]"],
        None,
    ));
    assert_eq!(
        matrix_of(&v["target"]),
        vec![vec![0, 0, 1], vec![0, 0, 0], vec![0, 0, 0]]
    );
    let terms = v["expansion"].as_array().unwrap();
    assert_eq!(terms.len(), 2);
    let mut seen = Vec::new();
    for t in terms {
        seen.push((matrix_of(&t["matrix"]), t["coefficient"].clone()));
    }
    seen.sort_by(|a, b| a.0.cmp(&b.0));
    assert_eq!(seen[0].0, vec![vec![0, 0, 1], vec![0, 0, 0], vec![0, 0, 0]]);
    assert_eq!(seen[0].1, serde_json::json!({"0": 1}));
    assert_eq!(seen[1].0, vec![vec![0, 1, 0], vec![0, 0, 1], vec![0, 0, 0]]);
    assert_eq!(seen[1].1, serde_json::json!({"-1": 1}));
}

#[test]
fn text_and_latex_output() {
    let out = run(
        &["canonical", "--matrix", "E[1,3]", "--format", "text"],
        None,
    );
    assert!(out.status.success());
    assert_eq!(
        String::from_utf8_lossy(&out.stdout).trim(),
        "C[E[1,3]] = (1)*[E[1,3]] + (v^-1)*[E[1,2]+E[2,3]]"
    );
    let out = run(
        &["canonical", "--matrix", "E[1,3]", "--format", "latex"],
        None,
    );
    let s = String::from_utf8_lossy(&out.stdout);
    assert!(s.contains("v^{-1}"), "{s}");
    assert!(s.contains("smallmatrix"));
}

#[test]
fn records_round_trip_through_json() {
    let out = run(
        &["canonical", "--m", "2", "--n", "2", "--all-upto-norm", "4"],
        None,
    );
    let v = json(&out);
    let records: Vec<supercanon::uplus::CanonicalRecord> =
        serde_json::from_value(v.clone()).expect("records parse");
    assert!(records.len() > 10);
    assert_eq!(serde_json::to_value(&records).unwrap(), v);
}

#[test]
fn negative_part() {
    let out = run(
        &[
            "canonical",
            "--matrix",
            "E[3,1]",
            "--minus",
            "--format",
            "text",
        ],
        None,
    );
    assert!(out.status.success());
    assert_eq!(
        String::from_utf8_lossy(&out.stdout).trim(),
        "C[E[3,1]] = (1)*[E[3,1]] + (v^-1)*[E[2,1]+E[3,2]]"
    );
    let out = run(&["canonical", "--matrix", "E[1,3]", "--minus"], None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn parse_errors_exit_nonzero() {
    let out = run(&["canonical", "--matrix", "E[1,"], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot parse matrix"));
    let out = run(&["canonical", "--matrix", "2E[1,3]"], None);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["canonical"], None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verification_commands_pass() {
    for args in [
        vec!["verify", "golden-gl21"],
        vec!["verify", "golden-gl22", "--a-max", "2", "--f-max", "2"],
        vec!["verify", "pbw", "--m", "2", "--n", "2", "--entry-max", "1"],
        vec!["verify", "serre", "--norm-max", "5"],
        vec!["verify", "thm54", "--m", "2", "--n", "1", "--r", "3"],
        vec![
            "verify", "stab", "--matrix", "E[2,1]", "--h", "1", "--r-list", "2,3,4",
        ],
        vec!["schur", "verify-qs3", "--r", "2"],
        vec!["schur", "verify-thm54", "--r", "2", "--matrix", "E[2,1]"],
    ] {
        let v = json(&run(&args, None));
        assert_eq!(v["passed"], Value::Bool(true), "{args:?}");
        assert!(v["checked"].as_u64().unwrap() > 0, "{args:?}");
    }
}

#[test]
fn schur_products() {
    let v = json(&run(
        &[
            "schur",
            "mult",
            "--left",
            "E[1,1]+E[2,1]",
            "--right",
            "E[1,2]+E[1,1]",
        ],
        None,
    ));
    assert_eq!(v["r"], 2);
    assert_eq!(v["terms"].as_array().unwrap().len(), 2);
    let out = run(
        &[
            "schur",
            "mult",
            "--left",
            "E[1,1]",
            "--right",
            "E[1,1]+E[2,2]",
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(2));
    let v = json(&run(&["schur", "xi", "--matrix", "E[2,1]+E[1,1]"], None));
    assert_eq!(v["r"], 2);
}

#[test]
fn tableaux_counts() {
    let v = json(&run(
        &[
            "tableaux", "count", "--m", "2", "--n", "1", "--shape", "2,1",
        ],
        None,
    ));
    assert_eq!(v["total"], 8);
    assert_eq!(v["in_hook"], true);
    assert_eq!(v["highest_weight"], serde_json::json!([2, 1, 0]));
    let v = json(&run(
        &[
            "tableaux", "count", "--m", "1", "--n", "1", "--shape", "2,2",
        ],
        None,
    ));
    assert_eq!(v["total"], 0);
    assert_eq!(v["in_hook"], false);
    assert_eq!(
        run(&["tableaux", "count", "--shape", "1,2"], None)
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn cache_hits_clear_and_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["canonical", "--m", "2", "--n", "2", "--all-upto-norm", "4"];
    let first = run(&args, Some(dir.path()));
    let second = run(&args, Some(dir.path()));
    assert_eq!(json(&first), json(&second));
    let log = String::from_utf8_lossy(&second.stderr);
    let n = json(&first).as_array().unwrap().len();
    assert!(
        log.contains(&format!("{n} records ({n} from cache)")),
        "{log}"
    );

    let stats = json(&run(&["cache", "stats"], Some(dir.path())));
    assert_eq!(stats["files"], n);

    let victim = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.extension().is_some_and(|e| e == "json"))
        .unwrap();
    fs::write(&victim, "{ not json").unwrap();
    let out = run(&args, Some(dir.path()));
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains(&victim.display().to_string()), "{err}");
    let out = run(&["cache", "verify"], Some(dir.path()));
    assert_eq!(out.status.code(), Some(2));

    let cleared = json(&run(&["cache", "clear"], Some(dir.path())));
    assert_eq!(cleared["removed"], n);
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
    let fresh = run(&args, Some(dir.path()));
    assert!(String::from_utf8_lossy(&fresh.stderr).contains("(0 from cache)"));
}

#[test]
fn cache_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_supercanon"))
        .args(["canonical", "--matrix", "E[1,2]"])
        .env("SUPERCANON_CACHE_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    assert_eq!(run(&["cache", "stats"], None).status.code(), Some(2));
}
