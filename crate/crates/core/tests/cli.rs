use std::path::Path;
use std::process::{Command, Output};

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name).display().to_string()
}

fn pcmas(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pcmas"))
        .args(args)
        .env("PCMAS_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn punish_plan_and_deter() {
    let plan = stdout(&pcmas(&["--json", "punish", "plan", "--game", &data("prisoners_dilemma.json")]));
    let v: serde_json::Value = serde_json::from_str(&plan).unwrap();
    assert_eq!(v["v"], 5.0);
    assert_eq!(v["punish_as_p1"], serde_json::json!([0.0, 1.0]));

    let deter = stdout(&pcmas(&["punish", "deter", "--game", &data("prisoners_dilemma.json"), "--law", "1,1", "--n", "16"]));
    assert!(deter.contains("minimum punishers: 9"));
}

#[test]
fn popsim_writes_a_trace() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let out = stdout(&pcmas(&[
        "--json",
        "--seed",
        "3",
        "popsim",
        "run",
        "--config",
        &data("population.json"),
        "--trace",
        trace.to_str().unwrap(),
    ]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["verdict"], "Conforms");
    let text = std::fs::read_to_string(&trace).unwrap();
    assert!(text.starts_with("iter,agent1,agent2,action1,action2,pay1,pay2\n"));
    assert_eq!(text.lines().count(), 100_001);
}

#[test]
fn solved_policy_drives_a_session() {
    let dir = tempfile::tempdir().unwrap();
    let policy = dir.path().join("policy.bin");
    let p = policy.to_str().unwrap();
    stdout(&pcmas(&["--out", p, "tmdp", "solve", "--game", &data("teaching_pd.json"), "--temp", "1.0", "--cells", "30"]));
    let out = stdout(&pcmas(&[
        "--json", "teach", "run", "--teacher", "optimal", "--temp", "1.0", "--policy", p, "--iterations", "500",
    ]));
    let rows: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(rows[0]["experiment"], "custom/optimal");
}

#[test]
fn figure_without_policies_explains_what_to_run() {
    let dir = tempfile::tempdir().unwrap();
    let o = pcmas(&["fig", "fig2-opt", "--policy-dir", dir.path().to_str().unwrap()]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("pcmas tmdp solve"), "{err}");
}

#[test]
fn figure_csv_has_the_fixed_header() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("fig.csv");
    let o = pcmas(&["--out", csv.to_str().unwrap(), "fig", "fig3-tft", "--trials", "2"]);
    stdout(&o);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("experiment,x,iterations,mean,sd,trials,seed\n"));
    // 20 temperatures x 3 iteration counts
    assert_eq!(text.lines().count(), 61);
}

#[test]
fn blockpush_and_dif_sweep_run() {
    let bp = stdout(&pcmas(&["teach", "blockpush", "--k", "0,5000", "--trials", "2"]));
    assert!(bp.contains("fig8-blockpush/baseline"));
    let dif = stdout(&pcmas(&["teach", "dif-sweep", "--trials", "2", "--iterations", "200", "--gammas", "0.9"]));
    assert_eq!(dif.lines().count(), 1 + 104);
}

#[test]
fn bad_input_fails_cleanly() {
    let o = pcmas(&["punish", "deter", "--game", &data("prisoners_dilemma.json"), "--law", "3,1", "--n", "4"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("outside"));
}
