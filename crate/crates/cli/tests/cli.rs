use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn recur(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_recur")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn model(dir: &Path, body: &str) -> String {
    let p = dir.join("model.toml");
    fs::write(&p, format!("schema = \"recur-model/1\"\n{body}")).unwrap();
    p.display().to_string()
}

fn manifest(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(recur(&["--help"]).status.code(), Some(0));
    let v = recur(&["--version"]);
    assert_eq!(v.status.code(), Some(0));
    assert!(stdout(&v).starts_with("recur "));
}

#[test]
fn usage_errors_are_one_line() {
    let o = recur(&["schedule", "make", "--bogus"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr(&o).trim_end().lines().count(), 1);

    let o = recur(&["schedule", "make", "--a", "2", "--b", "1", "--P", "5"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr(&o).trim_end(), "error: a must not exceed b");
}

#[test]
fn budget_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let m = model(dir.path(), "kind = \"full\"\nm = 2\n");
    let o = recur(&["lang", "enum", "--model", &m, "--n", "40"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error: "));
}

#[test]
fn tables_carry_schema_and_units() {
    let o = recur(&["schedule", "make", "--a", "0.6", "--b", "1", "--P", "10"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# recur-schedule/1"));
    assert!(lines.next().unwrap().starts_with("# units: "));
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert!(header.starts_with("p,ell,gamma"));

    let o = recur(&["--json", "schedule", "make", "--a", "0.6", "--b", "1", "--P", "10"]);
    let v: Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["schema"], "recur-schedule/1");
    assert_eq!(v["records"].as_array().unwrap().len(), 10);
}

#[test]
fn records_for_maps_and_diagrams() {
    let o = recur(&["map", "transitive", "--alpha", "0.5", "--beta", "2.5"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("# recur-transitive/1\n"));

    let dir = tempfile::tempdir().unwrap();
    let m = model(dir.path(), "kind = \"sft\"\nm = 2\nforbidden = [\"11\"]\n");
    let o = recur(&["--json", "diagram", "gap", "--model", &m, "--N", "4"]);
    let v: Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["schema"], "recur-diagram-gap/1");

    let o = recur(&["map", "cylinder", "--alpha", "0", "--beta", "2", "--word", "01"]);
    assert!(stdout(&o).contains("1/4"), "{}", stdout(&o));
}

#[test]
fn outputs_are_reproducible_from_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ow.csv");
    let args = ["recur", "ow", "--dist", "0.5,0.5", "--n", "8", "--samples", "20", "--horizon", "5000", "--seed", "9"];
    let mut full: Vec<&str> = args.to_vec();
    let out_s = out.display().to_string();
    full.extend(["--out", &out_s]);
    assert!(recur(&full).status.success());
    let first = fs::read(&out).unwrap();
    let m1 = manifest(&dir.path().join("ow.csv.manifest.json"));
    assert_eq!(m1["schema"], "recur-manifest/1");
    assert_eq!(m1["seed"], 9);
    assert!(recur(&full).status.success());
    let m2 = manifest(&dir.path().join("ow.csv.manifest.json"));
    assert_eq!(first, fs::read(&out).unwrap());
    assert_eq!(m1["digest"], m2["digest"]);
    assert_eq!(m1["outputs"], m2["outputs"]);
}

#[test]
fn moran_build_verify_dim() {
    let dir = tempfile::tempdir().unwrap();
    let m = model(dir.path(), "kind = \"full\"\nm = 2\n");
    let build = |name: &str| {
        let out = dir.path().join(name);
        let out_s = out.display().to_string();
        let o = recur(&[
            "moran", "build", "--model", &m, "--a", "0.6", "--b", "1", "--k", "6", "--target", "5000", "--seed", "4",
            "--out", &out_s,
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        out
    };
    let a = build("a");
    let b = build("b");
    for f in ["prefix.txt", "ledger.txt", "verify.csv", "model.toml"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f} differs");
    }
    assert_eq!(manifest(&a.join("manifest.json"))["digest"], manifest(&b.join("manifest.json"))["digest"]);
    assert!(fs::read_to_string(a.join("ledger.txt")).unwrap().starts_with("recur-ledger/1\n"));

    let a_s = a.display().to_string();
    let o = recur(&["moran", "verify", "--dir", &a_s]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("# recur-moran-verify/1"));

    let o = recur(&["--json", "moran", "dim", "--dir", &a_s]);
    let v: Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["schema"], "recur-moran-dim/1");

    // a corrupted ledger is rejected
    let ledger = fs::read_to_string(a.join("ledger.txt")).unwrap();
    fs::write(a.join("ledger.txt"), ledger.replace("piece 1 ", "piece 2 ")).unwrap();
    assert_eq!(recur(&["moran", "verify", "--dir", &a_s]).status.code(), Some(1));
}
