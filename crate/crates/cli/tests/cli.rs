//! End-to-end checks of the command-line interface, including the worked
//! examples from the published tables and output determinism.

use std::process::Command;

fn run(args: &[&str]) -> (String, String, Option<i32>) {
    let out = Command::new(env!("CARGO_BIN_EXE_newform-trace"))
        .args(args)
        .env("NEWFORM_TRACE_OFFLINE", "1")
        .output()
        .expect("binary runs");
    (
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
        out.status.code(),
    )
}

#[test]
fn trace_level_27_example() {
    let (stdout, _, code) = run(&[
        "trace", "--S", "1", "--T", "3", "--k", "5", "--neb", "q3", "--t", "-1", "--zeta", "i",
        "--n", "4",
    ]);
    assert_eq!(code, Some(0));
    assert!(stdout.contains("total (exact): -76"), "{stdout}");
}

#[test]
fn dim_level_8_example() {
    let (stdout, _, code) = run(&["dim", "--S", "1", "--T", "2", "--k", "8", "--zeta", "+1"]);
    assert_eq!(code, Some(0));
    assert!(stdout.contains("dim 1"), "{stdout}");
}

#[test]
fn bias_level_49_example() {
    let (stdout, _, code) = run(&["bias", "--S", "7", "--k", "4"]);
    assert_eq!(code, Some(0));
    assert!(stdout.contains("bias (+1 minus -1): 3"), "{stdout}");
}

#[test]
fn output_is_deterministic() {
    let args = [
        "trace", "--S", "11", "--T", "2", "--k", "6", "--n", "7", "--all", "--format", "csv",
    ];
    let (first, _, code) = run(&args);
    assert_eq!(code, Some(0));
    for _ in 0..2 {
        let (again, _, _) = run(&args);
        assert_eq!(first, again, "output must be byte-identical across runs");
    }
    // Rational traces print as integers, irrational ones as exact
    // cyclotomic sums with a float mirror.
    assert!(first.contains(",\"124\","), "{first}");
    assert!(first.contains("-156.693575"), "{first}");
}

#[test]
fn usage_and_error_exit_codes() {
    // Unknown flag: usage error from the parser.
    let (_, _, code) = run(&["dim", "--bogus"]);
    assert_eq!(code, Some(2));
    // Coprimality violation: input error.
    let (_, stderr, code) = run(&[
        "trace", "--S", "1", "--T", "3", "--k", "5", "--neb", "q3", "--t", "-1", "--zeta", "i",
        "--n", "3",
    ]);
    assert_eq!(code, Some(1));
    assert!(stderr.contains("coprime"), "{stderr}");
    // Inadmissible weight (parity): input error with the violation listed.
    let (_, stderr, code) = run(&[
        "dim", "--S", "1", "--T", "3", "--k", "4", "--neb", "q3", "--t", "-1", "--zeta", "i",
    ]);
    assert_eq!(code, Some(1));
    assert!(stderr.contains("omega'(-1)"), "{stderr}");
}

#[test]
fn enumerate_and_json() {
    let (stdout, _, code) = run(&["enumerate", "--S", "11", "--T", "2", "--k", "6"]);
    assert_eq!(code, Some(0));
    assert!(stdout.contains("10 tuples"), "{stdout}");
    let (stdout, _, code) = run(&[
        "trace", "--S", "1", "--T", "3", "--k", "5", "--neb", "q3", "--t", "-1", "--zeta", "-i",
        "--n", "4", "--format", "json",
    ]);
    assert_eq!(code, Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout).expect("valid JSON");
    assert_eq!(v["rationalized"], serde_json::json!("16"));
    assert_eq!(v["tuple"]["level"], serde_json::json!(27));
}

#[test]
fn lmfdb_check_offline() {
    let (stdout, _, code) = run(&[
        "lmfdb-check", "--S", "11", "--T", "2", "--k", "6", "--offline",
    ]);
    assert_eq!(code, Some(0), "{stdout}");
    assert!(stdout.contains("consistent partition found"), "{stdout}");
    let (stdout, _, code) = run(&[
        "lmfdb-check", "--S", "1", "--T", "3", "--k", "5", "--neb", "q3", "--offline",
    ]);
    assert_eq!(code, Some(0), "{stdout}");
    assert!(stdout.contains("consistent partition found"), "{stdout}");
}
