//! End-to-end runs of the `plaq` binary.

use std::process::{Command, Output};

use serde_json::Value;

use plaq::cli::{write_results, ExperimentSpec, Format, Table};

fn plaq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plaq"))
        .args(args)
        .env_remove("PLAQ_SEED")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn without_timestamp(text: &str) -> String {
    text.lines()
        .filter(|l| !l.starts_with("# timestamp="))
        .map(|l| {
            if l.starts_with("{\"meta\"") {
                let mut v: Value = serde_json::from_str(l).unwrap();
                v["meta"].as_object_mut().unwrap().remove("timestamp");
                v.to_string()
            } else {
                l.to_string()
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn reruns_are_identical_apart_from_timestamp() {
    let args = ["--seed", "9", "--format", "csv", "tail", "--dim", "2", "--p", "0.1", "--rlist", "1,2,3"];
    let a = plaq(&args);
    let b = plaq(&[&["--threads", "3"], &args[..]].concat());
    assert!(a.status.success() && b.status.success());
    assert_eq!(without_timestamp(&stdout(&a)), without_timestamp(&stdout(&b)));
    let c = plaq(&["--seed", "10", "--format", "csv", "tail", "--dim", "2", "--p", "0.1", "--rlist", "1,2,3"]);
    assert_ne!(without_timestamp(&stdout(&a)), without_timestamp(&stdout(&c)));
}

#[test]
fn csv_and_jsonl_carry_the_same_values() {
    let csv = stdout(&plaq(&["--seed", "4", "--format", "csv", "saw", "--dim", "3", "--kmax", "5"]));
    let jsonl = stdout(&plaq(&["--seed", "4", "--format", "jsonl", "saw", "--dim", "3", "--kmax", "5"]));
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    let header: Vec<&str> = rows[0].split(',').collect();
    assert_eq!(header, ["k", "sigma", "sigma_bound", "mu_upper"]);
    let objs: Vec<Value> = jsonl.lines().skip(1).map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(objs.len(), rows.len() - 1);
    for (line, obj) in rows[1..].iter().zip(&objs) {
        for (col, field) in header.iter().zip(line.split(',')) {
            let v = &obj[*col];
            let text = match v {
                Value::String(s) => s.clone(),
                Value::Null => String::new(),
                other => other.to_string(),
            };
            assert_eq!(text, field, "column {col}");
        }
    }
    let meta: Value = serde_json::from_str(jsonl.lines().next().unwrap()).unwrap();
    assert_eq!(meta["meta"]["spec"]["subcommand"], "saw");
    assert_eq!(meta["meta"]["spec"]["seed"], 4);
}

#[test]
fn empty_table_writes_header_only() {
    let spec = ExperimentSpec {
        subcommand: "tail".into(),
        params: vec![("dim".into(), "2".into())],
        master_seed: 1,
        output: None,
        format: Format::Csv,
    };
    let mut buf = Vec::new();
    write_results(&spec, &Table::new(&["r", "hits"]), &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body, ["r,hits"]);
    assert!(text.contains("# dim=2"));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# tail run\nsubcommand=tail\ndim=3\np=0.03\nrlist=1,2\ntrials=500\nseed=5\n").unwrap();
    let from_file = plaq(&["--config", cfg.to_str().unwrap(), "--format", "csv"]);
    assert!(from_file.status.success(), "{}", String::from_utf8_lossy(&from_file.stderr));
    let text = stdout(&from_file);
    assert!(text.contains("# trials=500"));
    let explicit = plaq(&["--seed", "5", "--format", "csv", "tail", "--dim", "3", "--p", "0.03", "--rlist", "1,2", "--trials", "500"]);
    assert_eq!(without_timestamp(&text), without_timestamp(&stdout(&explicit)));

    let over = plaq(&["--config", cfg.to_str().unwrap(), "--format", "csv", "tail", "--trials", "700"]);
    assert!(stdout(&over).contains("# trials=700"));
}

#[test]
fn seed_falls_back_to_environment() {
    let run = |env: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_plaq"));
        c.args(["--format", "csv", "tail", "--dim", "2", "--p", "0.1", "--rlist", "1"]);
        match env {
            Some(v) => c.env("PLAQ_SEED", v),
            None => c.env_remove("PLAQ_SEED"),
        };
        without_timestamp(&String::from_utf8(c.output().unwrap().stdout).unwrap())
    };
    let env7 = run(Some("7"));
    assert!(env7.contains("# seed=7"));
    assert!(run(None).contains("# seed=0"));
    let flag = plaq(&["--seed", "7", "--format", "csv", "tail", "--dim", "2", "--p", "0.1", "--rlist", "1"]);
    assert_eq!(env7, without_timestamp(&stdout(&flag)));
}

#[test]
fn output_file_and_off_mesh() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rows.jsonl");
    let mesh = dir.path().join("cube.off");
    let o = plaq(&[
        "--seed", "1", "--output", out.to_str().unwrap(), "sphere", "--dim", "3", "--p", "0.03", "--rays", "50",
        "--emit-off", mesh.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = std::fs::read_to_string(&out).unwrap();
    let row: Value = serde_json::from_str(rows.lines().nth(1).unwrap()).unwrap();
    assert_eq!(row["verdict_sphere"], "verified");
    assert!(std::fs::read_to_string(&mesh).unwrap().starts_with("OFF\n"));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(plaq(&["tail", "--dim", "2", "--p", "0.1"]).status.code(), Some(2));
    assert_eq!(plaq(&["saw", "--dim", "9", "--kmax", "3"]).status.code(), Some(2));
    assert_eq!(plaq(&["tail", "--dim", "2", "--p", "0.3", "--rlist", "1", "--bound"]).status.code(), Some(2));
    assert_eq!(plaq(&["critical", "--variant", "good", "--dim", "2", "--tol", "1e-4"]).status.code(), Some(2));
    assert_eq!(plaq(&["bogus"]).status.code(), Some(2));
}

#[test]
fn duality_and_skeleton_commands() {
    let o = plaq(&["dual2d", "--levels", "2", "--width", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let row: Value = serde_json::from_str(stdout(&o).lines().nth(1).unwrap()).unwrap();
    assert_eq!(row["exceptions"], 0);

    let o = plaq(&["--format", "jsonl", "skeleton"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let row: Value = serde_json::from_str(stdout(&o).lines().nth(1).unwrap()).unwrap();
    assert_eq!(row["disjoint"], true);
    assert_eq!(row["pairs_checked"], 4950);
}
