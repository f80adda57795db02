use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_valley-codes")).args(args).output().unwrap()
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(cli(&["transmit", "--channel", "bdc:0.1"]).status.code(), Some(64));
    assert_eq!(cli(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(cli(&["--help"]).status.code(), Some(0));
}

#[test]
fn bad_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.txt");
    std::fs::write(&input, "01x1").unwrap();
    let out = dir.path().join("out.txt");
    let o = cli(&["transmit", "--channel", "bdc:0.1", "--input", s(&input), "--output", s(&out)]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    let missing = dir.path().join("missing.txt");
    let o = cli(&["transmit", "--channel", "bdc:0.1", "--input", s(&missing), "--output", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn transmit_depends_only_on_seed() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.txt");
    std::fs::write(&input, "0110".repeat(50)).unwrap();
    let run = |seed: &str, name: &str| {
        let out = dir.path().join(name);
        let o = cli(&["--seed", seed, "transmit", "--channel", "prc:1", "--input", s(&input), "--output", s(&out)]);
        assert!(o.status.success());
        std::fs::read(out).unwrap()
    };
    assert_eq!(run("4", "a.txt"), run("4", "b.txt"));
    assert_ne!(run("4", "a.txt"), run("5", "c.txt"));
}

#[test]
fn encode_transmit_decode() {
    let dir = tempfile::tempdir().unwrap();
    let code = fixture("recursive_k8.json");
    let message = dir.path().join("m.txt");
    let bits: String = (0..64).map(|i| if i % 5 < 2 { '1' } else { '0' }).collect();
    std::fs::write(&message, &bits).unwrap();
    let (x, y, m) = (dir.path().join("x.txt"), dir.path().join("y.txt"), dir.path().join("out.txt"));
    let trace = dir.path().join("trace.json");
    assert!(cli(&["encode", "--code", s(&code), "--input", s(&message), "--output", s(&x)]).status.success());
    let o = cli(&["--seed", "3", "transmit", "--channel", "bdc:0.000001", "--input", s(&x), "--output", s(&y)]);
    assert!(o.status.success());
    let o = cli(&["decode", "--code", s(&code), "--input", s(&y), "--output", s(&m), "--trace", s(&trace)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read_to_string(&m).unwrap().trim(), bits);
    let trace: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(trace).unwrap()).unwrap();
    assert_eq!(trace["rs"], "ok");
}

#[test]
fn decode_failure_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let y = dir.path().join("y.txt");
    // longer than any codeword: no message explains it
    std::fs::write(&y, "00").unwrap();
    let m = dir.path().join("m.txt");
    let o = cli(&["decode", "--code", s(&fixture("regression_k1_n1_bdc.json")), "--input", s(&y), "--output", s(&m)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn plan_json_lists_levels() {
    let o = cli(&["plan", "--k-base", "64", "--delta-base", "0.01", "--channel", "bdc:0.1", "--levels", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let levels = v.as_array().unwrap();
    assert_eq!(levels.len(), 3);
    assert_eq!(levels[0]["config"]["t"], 16);
    assert_eq!(levels[0]["config"]["d"], 16);
    assert_eq!(levels[1]["config"]["inner"]["k"], 64 * 64);
}

#[test]
fn search_writes_a_loadable_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("code.json");
    let o = cli(&[
        "--seed", "1", "search", "--k", "1", "--n", "3", "--channel", "bdc:0.1", "--target", "0.05", "--output", s(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = cli(&["--seed", "2", "dfp", "--fixture", s(&out), "--trials", "2000"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["estimate"]["estimate"].as_f64().unwrap() < 0.06, "{v}");
}

#[test]
fn bounds_csv_has_header() {
    let o = cli(&["--format", "csv", "bounds"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("bound,parameters,value"));
    assert!(text.lines().count() > 10);
}
