use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qidlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qidlab")).args(args).env_remove("QIDLAB_THREADS").output().expect("spawn qidlab")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

#[test]
fn capacity_of_identity_is_two() {
    let o = qidlab(&["capacity", "--channel", "identity:2", "--out", "-"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["command"], "capacity");
    assert_eq!(v["pass"], true);
    let row = &v["report"][0];
    assert!((f(&row["c_e"]["value"]) - 2.0).abs() < 1e-4);
    assert!((f(&row["q_id1"]["value"]) - 2.0).abs() < 1e-4);
    // The resolved config carries the defaults that were used.
    assert_eq!(v["config"]["seed"], 17);
    assert_eq!(v["config"]["channel"][0], "identity:2");
}

#[test]
fn capacity_csv_has_fixed_header() {
    let o = qidlab(&["capacity", "--channel", "dephasing:1.0", "--channel", "identity", "--format", "csv"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("channel_spec,param,C_E,Q_ID1,coh_info,ad_gap"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "dephasing:1.0");
    assert_eq!(row[1].parse::<f64>().unwrap(), 1.0);
    assert!((row[2].parse::<f64>().unwrap() - 1.0).abs() < 1e-3);
    assert_eq!(row[3].parse::<f64>().unwrap(), 0.0);
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[1], "");
    assert!(lines.next().is_none());
}

#[test]
fn capacity_with_one_iteration_fails_restart_agreement() {
    let o = qidlab(&["capacity", "--channel", "amplitude-damping:0.3", "--iters", "1"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("witness: amplitude-damping:0.3"), "{}", stderr(&o));
    assert_eq!(json(&o)["report"][0]["restarts_agree"], false);
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        &["capacity", "--channel", "nosuch:1"][..],
        &["capacity", "--channel", "depolarizing:p=x"],
        &["capacity"],
        &["capacity", "--channel", "identity", "--trials", "3"],
        &["capacity", "--channel", "identity", "--format", "xml"],
        &["capacity", "--bogus"],
        &["frobnicate"],
        &[],
        &["verify-lemmas", "--trials", "5"],
        &["fidelity-alternative", "--channel", "identity"],
        &["info-disturbance", "--channel", "identity"],
        &["build-qid-code", "--b-dim", "2"],
        &["build-qid-code", "--seed", "1", "--b-dim", "2", "--e-dim", "2", "--s-dim", "5"],
        &["evaluate-qid-code", "--seed", "1"],
        &["evaluate-qid-code", "--seed", "1", "--code", "/nonexistent/code.json"],
        &["typicality"],
        &["typicality", "--channel", "identity", "--channel", "identity"],
        &["typicality", "--channel", "identity", "--input", "1"],
        &["typicality", "--channel", "identity", "--epsilon", "0.5"],
        &["typicality", "--channel", "identity", "--seed", "1"],
        &["concentration", "--b-dim", "4"],
        &["concentration", "--seed", "1", "--b-dim", "2", "--e-dim", "2", "--s-dim", "9"],
        &["typicality", "--channel", "identity", "--format", "csv"],
    ] {
        let o = qidlab(args);
        assert_eq!(code(&o), 1, "{args:?}: {}", stderr(&o));
        assert!(o.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&qidlab(&["--help"])), 0);
    assert_eq!(code(&qidlab(&["--version"])), 0);
    assert_eq!(code(&qidlab(&["capacity", "--help"])), 0);
}

#[test]
fn verify_lemmas_pass_and_fail() {
    let o = qidlab(&["verify-lemmas", "--seed", "7", "--trials", "60"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["report"]["lemmas"].as_array().unwrap().len(), 6);
    assert_eq!(v["config"]["trials"], 60);
    // A negative allowance turns slack inequalities into failures.
    let o = qidlab(&["verify-lemmas", "--seed", "7", "--trials", "20", "--slack", "-0.5"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("witness: {\"name\""), "{}", stderr(&o));
}

#[test]
fn fidelity_alternative_on_complete_dephasing() {
    let o = qidlab(&["fidelity-alternative", "--channel", "dephasing:1.0", "--seed", "1"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = &json(&o)["report"][0];
    assert!((f(&r["delta_hat"]) - 2.0).abs() < 1e-6);
    assert!((f(&r["f_hat"]) - 2.0).abs() < 1e-6);
    assert_eq!(r["pass"], true);
    assert_eq!(r["witnesses"].as_array().unwrap().len(), 2);

    let o = qidlab(&["fidelity-alternative", "--channel", "dephasing:1.0", "--seed", "1", "--slack", "-10"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("witness:"));

    let o = qidlab(&["fidelity-alternative", "--channel", "identity", "--seed", "1", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8(o.stdout).unwrap().starts_with("channel_spec,delta_hat,f_hat,bound_forward,bound_converse,pass\n"));
}

#[test]
fn info_disturbance_pass_and_fail() {
    let o = qidlab(&["info-disturbance", "--channel", "identity:2", "--channel", "constant:2", "--seed", "3"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    assert!(f(&v["report"][0]["found"]) < 1e-6);
    assert!(f(&v["report"][0]["disturbance"]) < 1e-6);
    let o = qidlab(&["info-disturbance", "--channel", "constant:2", "--seed", "3", "--slack", "-10"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn build_then_evaluate_code() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("code.json");
    let p = path.to_str().unwrap();
    let base = ["build-qid-code", "--seed", "4", "--b-dim", "4", "--e-dim", "1", "--s-dim", "4", "--targets", "3", "--iters", "40"];
    let o = qidlab(&[&base[..], &["--out", p, "--epsilon", "1e-6"]].concat());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let o = qidlab(&["evaluate-qid-code", "--seed", "5", "--code", p, "--samples", "300", "--epsilon", "1e-6"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    assert!(f(&v["report"]["epsilon_hat"]) < 1e-6);
    assert_eq!(v["report"]["targets"], 3);

    // With a nontrivial environment the decoders cannot be perfect.
    let noisy = ["build-qid-code", "--seed", "4", "--b-dim", "4", "--e-dim", "2", "--s-dim", "4", "--targets", "2", "--iters", "40"];
    let o = qidlab(&[&noisy[..], &["--out", p]].concat());
    assert_eq!(code(&o), 0);
    let o = qidlab(&[&noisy[..], &["--epsilon", "1e-3"]].concat());
    assert_eq!(code(&o), 2);
    let o = qidlab(&["evaluate-qid-code", "--seed", "5", "--code", p, "--samples", "100", "--epsilon", "1e-3"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("witness: {\"target_index\""), "{}", stderr(&o));

    std::fs::write(&path, "{\"report\": {\"code\": 3}}").unwrap();
    let o = qidlab(&["evaluate-qid-code", "--seed", "5", "--code", p]);
    assert_eq!(code(&o), 1);
}

#[test]
fn typicality_pass_and_fail() {
    let o = qidlab(&["typicality", "--channel", "dephasing:1.0", "--input", "0.7,0.3"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["report"]["n"], 8);
    assert_eq!(v["report"]["all_pass"], true);
    let o = qidlab(&["typicality", "--channel", "stinespring:seed=3,a=2,b=2,e=2", "--n", "4"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("witness: {\"name\""));
}

#[test]
fn concentration_pass_and_fail() {
    let o = qidlab(&["concentration", "--seed", "3", "--samples", "400"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    assert!(f(&v["report"]["check"]["predictions"][0]["fraction_within"]) >= 0.95);
    assert!(v["report"]["monotonicity"].is_null());
    // Medians over |S| grow instead of shrinking at fixed (|B|, |E|).
    let o = qidlab(&["concentration", "--seed", "3", "--samples", "100", "--sizes", "4,16,64", "--draws", "5"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("witness: medians"));
}

fn run_to(dir: &Path, name: &str, args: &[&str]) -> Vec<u8> {
    let path = dir.join(name);
    let o = qidlab(&[args, &["--out", path.to_str().unwrap()]].concat());
    assert!(code(&o) != 1, "{}", stderr(&o));
    std::fs::read(path).unwrap()
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["fidelity-alternative", "--channel", "stinespring:seed=101,a=2,b=2,e=2", "--seed", "9"][..],
        &["info-disturbance", "--channel", "amplitude-damping:0.3", "--seed", "9"],
        &["verify-lemmas", "--seed", "9", "--trials", "20"],
        &["concentration", "--seed", "9", "--samples", "100", "--b-dim", "8", "--s-dim", "4"],
        &["build-qid-code", "--seed", "9", "--b-dim", "3", "--s-dim", "3", "--targets", "2", "--iters", "20"],
        &["capacity", "--channel", "depolarizing:0.2", "--format", "csv"],
    ] {
        let a = run_to(dir.path(), "a", args);
        let b = run_to(dir.path(), "b", args);
        assert!(!a.is_empty());
        assert_eq!(a, b, "{args:?}");
    }
    // Thread count does not change the report.
    let args = ["concentration", "--seed", "9", "--samples", "100", "--b-dim", "8", "--s-dim", "4"];
    let one = run_to(dir.path(), "c", &[&args[..], &["--threads", "1"]].concat());
    let two = run_to(dir.path(), "d", &[&args[..], &["--threads", "2"]].concat());
    assert_eq!(one, two);
}

#[test]
fn config_file_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    std::fs::write(&cfg, "command = \"fidelity-alternative\"\nchannel = [\"dephasing:1.0\"]\nseed = 5\nslack = 0.1\n").unwrap();
    let c = cfg.to_str().unwrap();
    let o = qidlab(&["fidelity-alternative", "--config", c]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["config"]["seed"], 5);
    assert_eq!(f(&v["config"]["slack"]), 0.1);
    assert_eq!(v["config"]["restarts"], 32);
    let o = qidlab(&["fidelity-alternative", "--config", c, "--seed", "6", "--channel", "identity"]);
    let v = json(&o);
    assert_eq!(v["config"]["seed"], 6);
    assert_eq!(v["config"]["channel"], serde_json::json!(["identity"]));
    assert_eq!(f(&v["report"][0]["slack"]), 0.1);

    // Wrong command, unknown keys and keys the command does not use.
    let o = qidlab(&["info-disturbance", "--config", c]);
    assert_eq!(code(&o), 1);
    for body in ["seed = 5\ncolour = 3\n", "seed = 5\ntrials = 3\n", "seed = \"five\"\n"] {
        std::fs::write(&cfg, body).unwrap();
        let o = qidlab(&["fidelity-alternative", "--config", c, "--channel", "identity"]);
        assert_eq!(code(&o), 1, "{body}");
    }
}

#[test]
fn thread_count_from_environment() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_qidlab"))
            .args(["verify-lemmas", "--seed", "1", "--trials", "5"])
            .env("QIDLAB_THREADS", threads)
            .output()
            .unwrap()
    };
    assert_eq!(code(&run("1")), 0);
    assert_eq!(code(&run("many")), 1);
}

#[test]
fn outputs_match_shipped_schemas() {
    let dir = tempfile::tempdir().unwrap();
    let code_path = dir.path().join("code.json");
    let c = code_path.to_str().unwrap();
    for args in [
        &["verify-lemmas", "--seed", "1", "--trials", "3"][..],
        &["fidelity-alternative", "--channel", "identity", "--seed", "1", "--restarts", "2", "--samples", "4", "--iters", "5"],
        &["info-disturbance", "--channel", "identity", "--seed", "1", "--restarts", "2", "--iters", "5"],
        &["build-qid-code", "--seed", "1", "--b-dim", "2", "--e-dim", "1", "--s-dim", "2", "--targets", "1", "--iters", "5", "--out", c],
        &["evaluate-qid-code", "--seed", "1", "--code", c, "--samples", "5", "--epsilon", "0.9"],
        &["capacity", "--channel", "dephasing:0.5", "--restarts", "2", "--iters", "20"],
        &["typicality", "--channel", "dephasing:1.0", "--input", "0.7,0.3", "--n", "2"],
        &["concentration", "--seed", "1", "--b-dim", "4", "--s-dim", "2", "--samples", "5", "--sizes", "2,4", "--draws", "2"],
    ] {
        let o = qidlab(args);
        assert_ne!(code(&o), 1, "{args:?}: {}", stderr(&o));
        let doc = if args.contains(&"--out") { serde_json::from_slice(&std::fs::read(&code_path).unwrap()).unwrap() } else { json(&o) };
        let schema_path = Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("../../docs/{}.schema.json", args[0]));
        let schema: Value = serde_json::from_str(&std::fs::read_to_string(schema_path).unwrap()).unwrap();
        let validator = jsonschema::validator_for(&schema).unwrap();
        let errors: Vec<String> = validator.iter_errors(&doc).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{args:?}: {errors:?}");
    }
}
