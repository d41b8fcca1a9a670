use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qirw_lab::Instance;

fn qirw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qirw")).args(args).output().expect("runs")
}

fn fixture(name: &str, file: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .join(file)
        .display()
        .to_string()
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli");
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn inputs(name: &str) -> Vec<String> {
    ["g", "h", "bags", "phi"]
        .iter()
        .flat_map(|k| [format!("--{k}"), fixture(name, &format!("{k}.json"))])
        .collect()
}

fn run(args: Vec<String>) -> Output {
    qirw(&args.iter().map(String::as_str).collect::<Vec<_>>())
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn synthesize_matches_golden_report() {
    let out = scratch("p4_p2_report.json");
    let mut args = vec!["synthesize".to_string()];
    args.extend(inputs("p4_p2"));
    args.extend(["--out".into(), out.display().to_string()]);
    let r = run(args);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let got = fs::read_to_string(&out).unwrap();
    let want = fs::read_to_string(fixture("p4_p2", "report.json")).unwrap();
    assert_eq!(got, want);
}

#[test]
fn missing_bag_file_is_an_input_error() {
    let mut args = vec!["synthesize".to_string()];
    args.extend(inputs("p4_p2"));
    let at = args.iter().position(|a| a == "--bags").unwrap();
    args[at + 1] = fixture("p4_p2", "no_such_bags.json");
    let r = run(args);
    assert_eq!(r.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&r.stderr).contains("cannot read"));
}

#[test]
fn malformed_json_reports_line_and_column() {
    let bad = scratch("bad_graph.json");
    fs::write(&bad, "{\"vertices\": [0, 1],\n \"edges\": [[0 1]]}").unwrap();
    let mut args = vec!["measure".to_string()];
    args.extend(inputs("p4_p2"));
    let at = args.iter().position(|a| a == "--g").unwrap();
    args[at + 1] = bad.display().to_string();
    let r = run(args);
    assert_eq!(r.status.code(), Some(1));
    let err = String::from_utf8_lossy(&r.stderr);
    assert!(err.contains("line 2 column"), "{err}");
}

#[test]
fn certify_accepts_the_golden_report() {
    let mut args = vec!["certify".to_string()];
    args.extend(inputs("p4_p2"));
    args.extend(["--report".into(), fixture("p4_p2", "report.json")]);
    let r = run(args);
    assert_eq!(r.status.code(), Some(0));
    let v = json(&r);
    assert_eq!(v["verdict"], "PASS");
    assert_eq!(v["oracle_additive"], 1);
}

#[test]
fn tampered_weighting_fails_certification() {
    let mut report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(fixture("p4_p2", "report.json")).unwrap()).unwrap();
    let w = report["weights"]["weights"][0][2].as_u64().unwrap();
    report["weights"]["weights"][0][2] = (w + 1).into();
    let path = scratch("tampered.json");
    fs::write(&path, report.to_string()).unwrap();
    let mut args = vec!["certify".to_string()];
    args.extend(inputs("p4_p2"));
    args.extend(["--report".into(), path.display().to_string()]);
    let r = run(args);
    assert_eq!(r.status.code(), Some(2));
    assert_eq!(json(&r)["verdict"], "FAIL");
}

#[test]
fn understated_claim_fails_certification() {
    let mut report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(fixture("p4_p2", "report.json")).unwrap()).unwrap();
    report["claimed_additive"] = "0".into();
    let path = scratch("understated.json");
    fs::write(&path, report.to_string()).unwrap();
    let mut args = vec!["certify".to_string()];
    args.extend(inputs("p4_p2"));
    args.extend(["--report".into(), path.display().to_string()]);
    assert_eq!(run(args).status.code(), Some(2));
}

#[test]
fn certify_csv_writes_distortion_table() {
    let csv = scratch("distortion.csv");
    let mut args = vec!["certify".to_string()];
    args.extend(inputs("p4_p2"));
    args.extend([
        "--report".into(),
        fixture("p4_p2", "report.json"),
        "--format".into(),
        "csv".into(),
        "--out".into(),
        csv.display().to_string(),
    ]);
    assert_eq!(run(args).status.code(), Some(0));
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("u,v,dist_g,dist_h,difference\n"));
    assert_eq!(text.lines().count(), 1 + 6);
}

#[test]
fn certify_missing_report_is_an_input_error() {
    let mut args = vec!["certify".to_string()];
    args.extend(inputs("p4_p2"));
    args.extend(["--report".into(), fixture("p4_p2", "absent.json")]);
    assert_eq!(run(args).status.code(), Some(1));
}

#[test]
fn measure_fixtures() {
    let mut args = vec!["measure".to_string()];
    args.extend(inputs("identity"));
    let v = json(&run(args));
    assert_eq!(v["c"], 1);
    assert_eq!(v["minimal_additive"], 0);

    let mut args = vec!["measure".to_string()];
    args.extend(inputs("p4_p2"));
    let v = json(&run(args));
    assert_eq!(v["c"], 2);
    assert_eq!(v["params"], "(1, 2)");
}

#[test]
fn measure_weighted_target() {
    let w = scratch("weights.json");
    fs::write(&w, r#"{"weights":[[0,1,2]]}"#).unwrap();
    let mut args = vec!["measure".to_string()];
    args.extend(inputs("p4_p2"));
    args.extend(["--weights".into(), w.display().to_string()]);
    assert_eq!(json(&run(args))["minimal_additive"], 1);
}

#[test]
fn generate_comb_is_deterministic() {
    let a = scratch("comb_a.json");
    let b = scratch("comb_b.json");
    for p in [&a, &b] {
        let r = qirw(&["generate", "comb", "--m", "3", "--out", p.to_str().unwrap()]);
        assert_eq!(r.status.code(), Some(0));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    // the comb is (1, 2) at depth 1, never (1, 1)
    let one = scratch("comb_1.json");
    qirw(&["generate", "comb", "--m", "1", "--out", one.to_str().unwrap()]);
    let v = json(&qirw(&["measure", "--instance", one.to_str().unwrap(), "--params", "1,1"]));
    assert_eq!(v["c"], 2);
    assert_eq!(v["check"]["ok"], false);
}

#[test]
fn generate_bounded_pw_validates() {
    let p = scratch("bpw.json");
    let r = qirw(&["generate", "bounded_pw", "--seed", "4", "--n", "30", "--k", "2", "--out", p.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(0));
    let inst = Instance::load(&p).unwrap();
    inst.validate().unwrap();
    assert!(inst.d.width() <= 2);
}

#[test]
fn generate_pathlike_measures_within_two_two() {
    let p = scratch("pathlike.json");
    qirw(&["generate", "pathlike", "--seed", "1", "--n", "12", "--p", "2", "--q", "0.3", "--out", p.to_str().unwrap()]);
    let v = json(&qirw(&["measure", "--instance", p.to_str().unwrap(), "--params", "2,2"]));
    assert_eq!(v["check"]["ok"], true, "{v}");
}

#[test]
fn unknown_generator_is_an_input_error() {
    let r = qirw(&["generate", "ladder"]);
    assert_eq!(r.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&r.stderr).contains("unknown generator"));
}

#[test]
fn bad_flags_are_input_errors() {
    assert_eq!(qirw(&["synthesize", "--profile", "slow"]).status.code(), Some(1));
    assert_eq!(qirw(&["--help"]).status.code(), Some(0));
}

#[test]
fn thread_cap_is_honoured() {
    let mut args = vec!["measure".to_string()];
    args.extend(inputs("p4_p2"));
    let r = Command::new(env!("CARGO_BIN_EXE_qirw")).args(&args).env("QIRW_THREADS", "1").output().unwrap();
    assert_eq!(r.status.code(), Some(0));
    let r = Command::new(env!("CARGO_BIN_EXE_qirw")).args(&args).env("QIRW_THREADS", "many").output().unwrap();
    assert_eq!(r.status.code(), Some(1));
}

#[test]
fn synthesize_instance_file_and_dot_output() {
    let inst = scratch("comb2.json");
    qirw(&["generate", "comb", "--m", "2", "--out", inst.to_str().unwrap()]);
    let r = qirw(&["synthesize", "--instance", inst.to_str().unwrap(), "--format", "dot", "--profile", "fast"]);
    assert_eq!(r.status.code(), Some(0));
    let dot = String::from_utf8_lossy(&r.stdout);
    assert!(dot.starts_with("graph G {") && dot.contains("label="));
}
