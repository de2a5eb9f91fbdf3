use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn metafib(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_metafib"))
        .args(args)
        .env_remove("METAFIB_SEED")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

#[test]
fn ratios_are_exact_and_deterministic() {
    let out = metafib(&["ratios", "--seq", "ptm", "--horizon", "10"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("n,h,decimal\n0,1,1\n1,2,2\n2,3/2,1.5\n"));
    assert!(text.contains("7,5/3,1.66666666666667\n"));
    let again = metafib(&["ratios", "--seq", "ptm", "--horizon", "10"]);
    assert_eq!(again.stdout, text.as_bytes());
}

#[test]
fn symbolic_output_does_not_depend_on_the_seed() {
    let run = |seed: &str| metafib(&["--seed", seed, "ratios", "--seq", "rs", "--symbolic", "--horizon", "512"]).stdout;
    assert_eq!(run("0"), run("12345"));
}

#[test]
fn compute_tilde_and_symbolic() {
    let out = metafib(&["compute", "--seq", "ptm", "--horizon", "6", "--a", "2", "--b", "-1"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("n,f\n0,1\n1,1\n2,1\n"));
    let out = metafib(&["compute", "--seq", "ptm", "--v", "ptm", "--horizon", "40", "--format", "json"]);
    let plain = metafib(&["compute", "--seq", "ptm", "--horizon", "40", "--format", "json"]);
    assert_eq!(out.stdout, plain.stdout);
    let out = metafib(&["compute", "--seq", "ptm", "--horizon", "3", "--symbolic"]);
    assert!(String::from_utf8(out.stdout).unwrap().contains("2,a + b\n"));
}

#[test]
fn values_and_resets() {
    let out = metafib(&["values", "--seq", "ptm", "--symbolic", "--horizon", "1024"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["distinct"], 7);
    let out = metafib(&["resets", "--seq", "ptm", "--horizon", "4096"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let gaps: Vec<&String> = v["gaps"].as_object().unwrap().keys().collect();
    assert_eq!(gaps, ["3", "5", "7", "9"]);
}

#[test]
fn guess_verify_compare_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (k, labels, t, tl) = (
        path(dir.path(), "K.txt"),
        path(dir.path(), "K.json"),
        path(dir.path(), "T.txt"),
        path(dir.path(), "T.json"),
    );
    let out = metafib(&["guess-dfao", "--seq", "ptm", "--output", &k, "--labels", &labels]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(fs::read_to_string(&k).unwrap().contains("lsd_2"));
    let out = metafib(&["verify-dfao", "--seq", "ptm", "--dfao", &k, "--labels", &labels]);
    assert_eq!(code(&out), 0);
    let cert: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(cert["proved"], true);
    assert_eq!(cert["states"], 23);

    let out = metafib(&["transduce", "--seq", "ptm", "--c", "9", "--output", &t, "--labels", &tl]);
    assert_eq!(code(&out), 0);
    assert_eq!(code(&metafib(&["compare", "--left", &k, "--right", &t])), 0);

    // A wrong label is a counterexample.
    let mut l: serde_json::Value = serde_json::from_str(&fs::read_to_string(&labels).unwrap()).unwrap();
    l["labels"]["4"] = "a - b".into();
    let bad = path(dir.path(), "bad.json");
    fs::write(&bad, l.to_string()).unwrap();
    let out = metafib(&["verify-dfao", "--seq", "ptm", "--dfao", &k, "--labels", &bad]);
    assert_eq!(code(&out), 4);
    assert!(String::from_utf8_lossy(&out.stderr).contains("counterexample"));

    // Different sequences do not compare equal.
    let rs = path(dir.path(), "RS.txt");
    assert_eq!(code(&metafib(&["guess-dfao", "--seq", "rs", "--output", &rs])), 0);
    assert_eq!(code(&metafib(&["compare", "--left", &k, "--right", &rs])), 4);
}

#[test]
fn msd_guess_reads_back() {
    let dir = tempfile::tempdir().unwrap();
    let k = path(dir.path(), "K.txt");
    let out = metafib(&["guess-dfao", "--seq", "ptm", "--direction", "msd", "--output", &k]);
    assert_eq!(code(&out), 0);
    assert!(fs::read_to_string(&k).unwrap().contains("msd_2"));
}

#[test]
fn transducer_listing() {
    let dir = tempfile::tempdir().unwrap();
    let (t, l) = (path(dir.path(), "T.txt"), path(dir.path(), "T.json"));
    assert_eq!(code(&metafib(&["transducer", "--c", "5", "--output", &t, "--labels", &l])), 0);
    assert!(fs::read_to_string(&t).unwrap().starts_with("// ratio-pair transducer, depth 5"));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&l).unwrap()).unwrap();
    assert_eq!(v["c"], 5);
    assert_eq!(code(&metafib(&["transducer", "--c", "17"])), 2);
    assert_eq!(code(&metafib(&["transducer", "--c", "2"])), 2);
}

#[test]
fn gaps_exit_codes() {
    let out = metafib(&["gaps", "--seq", "ptm", "--scan", "4096"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let gaps: Vec<u64> = v["gaps"].as_array().unwrap().iter().map(|g| g["gap"].as_u64().unwrap()).collect();
    assert_eq!(gaps, [3, 5, 7, 9]);
    assert_eq!(v["scan"]["gaps"], serde_json::json!([3, 5, 7, 9]));

    let out = metafib(&["gaps", "--seq", "pow2", "--pattern", "1"]);
    assert_eq!(code(&out), 5);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let gaps: Vec<u64> = v["gaps"].as_array().unwrap().iter().map(|g| g["gap"].as_u64().unwrap()).collect();
    assert_eq!(gaps, [1, 2, 4, 8, 16]);

    // The block occurs once only.
    assert_eq!(code(&metafib(&["gaps", "--seq", "literal:010;periodic:;1"])), 5);
    assert_eq!(code(&metafib(&["gaps", "--seq", "ptm", "--pattern", "012"])), 2);
}

#[test]
fn transduce_without_bounded_gaps_exits_5() {
    let out = metafib(&["transduce", "--seq", "pow2", "--c", "9"]);
    assert_eq!(code(&out), 5);
    assert!(String::from_utf8_lossy(&out.stderr).contains("no reset"));
}

#[test]
fn classify_reports_and_orbit_csv() {
    let dir = tempfile::tempdir().unwrap();
    let orbit = path(dir.path(), "orbit.csv");
    let out = metafib(&["classify", "--per", "011", "--a", "4", "--b", "-8", "--orbit-output", &orbit]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["result"]["kind"]["tag"], "FiniteOrbit");
    assert_eq!(v["result"]["kind"]["order"], 2);
    assert_eq!(v["result"]["kappa"], "0");
    let csv = fs::read_to_string(&orbit).unwrap();
    assert_eq!(csv.lines().count(), 201);

    let out = metafib(&["classify", "--per", "0", "--a", "1", "--b", "1"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["result"]["kind"]["tag"], "Accumulation");
    assert_eq!(v["result"]["kind"]["limits"][0]["poly"], "x^2 - x - 1");
    assert_eq!(v["result"]["kind"]["limits"][0]["approx"], "1.61803398874989");

    assert_eq!(code(&metafib(&["classify", "--per", "0", "--a", "0", "--b", "0"])), 2);
    assert_eq!(code(&metafib(&["classify", "--per", "0x1"])), 2);
}

#[test]
fn figure3_rows() {
    let out = metafib(&["figure3"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 4097);
    assert!(text.starts_with("n,h,decimal\n1,2,2\n2,1,1\n3,3/2,1.5\n"));
}

#[test]
fn input_errors_exit_2() {
    assert_eq!(code(&metafib(&["ratios", "--seq", "nonsense"])), 2);
    assert_eq!(code(&metafib(&["ratios", "--seq", "dfao:/nonexistent/K.txt"])), 2);
    assert_eq!(code(&metafib(&["ratios", "--seq", "ptm", "--horizon", "99999999"])), 2);
    assert_eq!(code(&metafib(&["no-such-command"])), 2);
    assert_eq!(code(&metafib(&["compare", "--left", "/nonexistent", "--right", "/nonexistent"])), 2);
    let dir = tempfile::tempdir().unwrap();
    let k = path(dir.path(), "K.txt");
    fs::write(&k, "lsd_2\n0 0\n0 -> 7\n").unwrap();
    assert_eq!(code(&metafib(&["compare", "--left", &k, "--right", &k])), 2);
}

#[test]
fn computation_failure_exits_3() {
    // Squares are not automatic, so no small automaton fits.
    let out = metafib(&["guess-dfao", "--seq", "squares", "--max-states", "8", "--horizon", "4096"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn seed_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_metafib"))
        .args(["values", "--seq", "ptm", "--symbolic", "--horizon", "256"])
        .env("METAFIB_SEED", "77")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert_eq!(out.stdout, metafib(&["values", "--seq", "ptm", "--symbolic", "--horizon", "256"]).stdout);
    let bad = Command::new(env!("CARGO_BIN_EXE_metafib"))
        .args(["values", "--seq", "ptm"])
        .env("METAFIB_SEED", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(code(&bad), 2);
}
