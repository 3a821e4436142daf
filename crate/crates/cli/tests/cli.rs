use std::fs;
use std::path::Path;
use std::process::Command;

fn cutwalk(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_cutwalk")).args(args).output().unwrap()
}

fn ok(args: &[&str]) {
    let o = cutwalk(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn simulate_then_detect() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "sim.json",
        r#"{"generator":{"family":"bd_lamperti","a":2.0},"steps":3000,"replicas":2}"#,
    );
    let out = tmp.path().join("sim");
    ok(&["simulate", "--config", &cfg, "--seed", "5", "--out", out.to_str().unwrap()]);
    let m = manifest(&out);
    assert_eq!(m["config"]["seed"], 5);
    assert_eq!(m["outputs"].as_array().unwrap().len(), 2);
    assert!(m["wall_clock_seconds"].as_f64().unwrap() >= 0.0);
    let traj = fs::read_to_string(out.join("trajectory_0.csv")).unwrap();
    assert!(traj.starts_with("n,x\n0,0\n"));
    assert_eq!(traj.lines().count(), 3002);

    let det = tmp.path().join("det");
    let input = out.join("trajectory_0.csv");
    ok(&["detect", "--input", input.to_str().unwrap(), "--window", "10", "--out", det.to_str().unwrap()]);
    let cps = fs::read_to_string(det.join("cutpoints.csv")).unwrap();
    assert!(cps.starts_with("x,n0,strong,status\n"));
    assert!(cps.lines().count() > 1);
    let m = manifest(&det);
    assert_eq!(m["config"]["lemma_checks"]["count_inequality"], true);
    assert!(det.join("report.json").exists() && det.join("cut_intervals.csv").exists());
}

#[test]
fn detect_reads_vector_paths() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write(tmp.path(), "v.csv", "n,x1,x2\n0,0,0\n1,1,0\n2,2,0\n3,3,0\n4,4,0\n");
    let det = tmp.path().join("det");
    ok(&["detect", "--input", &input, "--window", "0", "--h", "1", "--k", "0", "--out", det.to_str().unwrap()]);
    let an = fs::read_to_string(det.join("cut_annuli.csv")).unwrap();
    assert!(an.starts_with("inner,outer,visits,status\n"));
}

#[test]
fn hit_writes_the_race_table() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "hit.json",
        r#"{"generator":{"family":"bd_homogeneous","p":0.5},"xs":[10],"ys":[20],"delta":5,"replicas":4000}"#,
    );
    let out = tmp.path().join("hit");
    ok(&["hit", "--config", &cfg, "--out", out.to_str().unwrap()]);
    let t = fs::read_to_string(out.join("hitting.csv")).unwrap();
    let mut lines = t.lines();
    assert_eq!(lines.next(), Some("x,y,estimate,ci,escapes,returns,truncations"));
    let row: Vec<f64> = lines.next().unwrap().split(',').map(|f| f.parse().unwrap()).collect();
    // symmetric walk from 15 to 30 before 10: 1/4
    assert!((row[2] - 0.25).abs() < 4.0 * (0.25f64 * 0.75 / 4000.0).sqrt());
}

#[test]
fn experiment_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "exp.json",
        r#"{"generator":{"family":"bd_lamperti","a":2.0},"replicas":20,"steps":20000,"checkpoints":[4,8,16,32],"detector":{"window":10}}"#,
    );
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for d in [&a, &b] {
        ok(&["experiment", "growth", "--config", &cfg, "--seed", "3", "--out", d.to_str().unwrap()]);
    }
    for f in ["cutpoint_growth.csv", "cutpoint_growth_summary.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    assert_eq!(manifest(&a)["config"]["resolved"]["replicas"], 20);
}

#[test]
fn classify_and_refusals() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "g.json", r#"{"family":"bd_lamperti","a":1.0,"c":2.0}"#);
    let out = tmp.path().join("cls");
    ok(&["classify", "--config", &cfg, "--out", out.to_str().unwrap()]);
    let c: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("classification.json")).unwrap()).unwrap();
    assert_eq!(c["classification"]["tag"], "critical-window");
    assert!(out.join("drift.csv").exists());

    let rec = write(
        tmp.path(),
        "rec.json",
        r#"{"generator":{"family":"ssrw_norm","d":2},"replicas":2,"steps":100,"checkpoints":[2,4]}"#,
    );
    let o = cutwalk(&["experiment", "growth", "--config", &rec]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("exploratory"));
    let bad = write(tmp.path(), "bad.json", r#"{"family":"nope"}"#);
    assert!(!cutwalk(&["classify", "--config", &bad]).status.success());
}
