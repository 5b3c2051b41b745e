use std::process::Command;

fn pvtau(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_pvtau")).args(args).env_remove("PVTAU_PRECISION").output().unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

#[test]
fn eval_tau_writes_csv() {
    let (code, out, err) = pvtau(&["eval-tau", "--method", "series", "--points", "3"]);
    assert_eq!(code, 0, "{err}");
    let mut lines = out.lines();
    assert!(lines.next().unwrap().starts_with("method,t_re,t_im,log_tau_re"));
    assert_eq!(lines.count(), 3);
}

#[test]
fn verify_connection_reports_json() {
    let (code, out, err) = pvtau(&["verify-connection", "--ray", "imag", "--format", "json"]);
    assert_eq!(code, 0, "{err}");
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["status"], "pass");
}

#[test]
fn usage_errors_exit_two_with_one_line() {
    let (code, out, err) = pvtau(&["eval-tau", "--sigma", "0.2", "--xplus", "1.0"]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("E_USAGE: "), "{err}");
}

#[test]
fn compute_errors_exit_one() {
    let (code, _, err) = pvtau(&["eval-tau", "--sigma", "1/2", "--eta", "0.1", "--method", "series"]);
    assert_eq!(code, 1);
    assert!(err.starts_with("E_RESONANCE: "), "{err}");
}
