use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::Command;

struct Run {
    code: i32,
    json: Value,
}

fn workdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("openjac-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(dir: &Path, args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_openjac")).args(args).current_dir(dir).output().unwrap();
    let json = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    Run { code: out.status.code().unwrap(), json }
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

fn boundary_count(payload: &Value) -> usize {
    payload["components"].as_array().unwrap().iter().map(|c| c["boundaries"].as_array().unwrap().len()).sum()
}

#[test]
fn torelli_of_annulus_and_disk() {
    let dir = workdir("torelli");
    write(&dir, "ann.json", r#"{"disks":[{"center":[0,0],"radius":0.5}]}"#);
    write(&dir, "disk.json", r#"{"disks":[]}"#);
    let r = run(&dir, &["torelli", "ann.json"]);
    assert_eq!(r.code, 0);
    assert_eq!(r.json["version"], "openjac/1");
    assert_eq!(r.json["kind"], "oav");
    assert_eq!(boundary_count(&r.json["payload"]), 2);
    assert_eq!(r.json["payload"]["lattice"]["shape"][1], 0);
    let r = run(&dir, &["torelli", "disk.json"]);
    assert_eq!(r.code, 0);
    assert_eq!(boundary_count(&r.json["payload"]), 1);
}

#[test]
fn overlapping_domain_is_input_error() {
    let dir = workdir("overlap");
    write(&dir, "bad.json", r#"{"disks":[{"center":[0.5,0],"radius":0.6},{"center":[-0.5,0],"radius":0.6}]}"#);
    assert_eq!(run(&dir, &["torelli", "bad.json"]).code, 1);
    assert_eq!(run(&dir, &["torelli", "missing.json"]).code, 1);
    assert_eq!(run(&dir, &["no-such-command"]).code, 1);
}

#[test]
fn glue_period_and_equiv() {
    let dir = workdir("glue");
    write(&dir, "ann.json", r#"{"disks":[{"center":[0,0],"radius":0.5}]}"#);
    assert_eq!(run(&dir, &["torelli", "ann.json", "--output", "a.json"]).code, 0);
    assert_eq!(run(&dir, &["glue", "a.json", "--pair", "1:0", "--output", "t.json"]).code, 0);
    let p = run(&dir, &["period", "t.json"]);
    assert_eq!(p.code, 0);
    assert_eq!(p.json["payload"]["genus"], 1);
    let tau = &p.json["payload"]["tau"]["data"][0];
    let expected = 2f64.ln() / (2.0 * std::f64::consts::PI);
    assert!(tau[0].as_f64().unwrap().abs() < 1e-10);
    assert!((tau[1].as_f64().unwrap() - expected).abs() < 1e-10);
    assert_eq!(run(&dir, &["validate", "t.json"]).code, 0);
    assert_eq!(run(&dir, &["equiv", "a.json", "a.json"]).code, 0);
    assert_eq!(run(&dir, &["equiv", "a.json", "t.json"]).code, 3);
    assert_eq!(run(&dir, &["glue", "a.json", "--pair", "1-0"]).code, 1);
    assert_eq!(run(&dir, &["glue", "a.json", "--pair", "0:1"]).code, 1);
    assert_eq!(run(&dir, &["period", "a.json"]).code, 1);
}

#[test]
fn lattice_commands() {
    let dir = workdir("lattice");
    let r = run(&dir, &["lattice", "theta-rank", "--name", "a1", "--tau", "0,1"]);
    assert_eq!(r.code, 0);
    assert_eq!(r.json["payload"]["theta_rank"]["rank"], 2);
    let r = run(&dir, &["lattice", "discriminant", "--name", "a2"]);
    assert_eq!(r.code, 0);
    assert_eq!(r.json["payload"]["discriminant"], 3);
    write(&dir, "odd.json", r#"{"gram":[[1]]}"#);
    assert_eq!(run(&dir, &["lattice", "discriminant", "--lattice", "odd.json"]).code, 1);
    assert_eq!(run(&dir, &["lattice", "theta-rank", "--name", "a1", "--tau", "0,-1"]).code, 1);
    let r = run(&dir, &["lattice", "cft-dim", "--name", "a1", "--genus", "0", "--label", "1/2:1"]);
    assert_eq!(r.json["payload"]["dimension"], 0);
}

#[test]
fn output_is_deterministic() {
    let dir = workdir("determinism");
    let go = || {
        Command::new(env!("CARGO_BIN_EXE_openjac"))
            .args(["lattice", "cocycle-check", "--name", "a1", "--triples", "5"])
            .current_dir(&dir)
            .env("OPENJAC_SEED", "99")
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(go(), go());
}
