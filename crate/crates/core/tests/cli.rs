use std::io::Write;
use std::process::{Command, Output, Stdio};

use ipcopula::combine::natural_extension;
use ipcopula::grid::{Grid, Table1D};
use ipcopula::io::BiPBoxJson;
use ipcopula::numerics::{int, rat};
use ipcopula::pbox::PBox;
use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_ipcopula");

fn fixture(name: &str) -> String {
    format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn run_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(BIN)
        .args(args)
        .args(["--input", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

fn finding<'a>(report: &'a Value, id: &str) -> &'a Value {
    report["findings"]
        .as_array()
        .unwrap()
        .iter()
        .find(|f| f["id"] == id)
        .unwrap_or_else(|| panic!("no finding {id} in {report}"))
}

#[test]
fn strong_product_reports_both_corner_values() {
    let out = run(&["strong-product", "--input", &fixture("strong_product.json"), "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    assert!(text.contains("1/4"), "{text}");
    assert!(text.contains("3/8"), "{text}");
    let r = json(&out);
    assert_eq!(r["command"], "strong-product");
    assert!(r["inputs_digest"].as_str().unwrap().starts_with("sha256:"));
}

#[test]
fn clayton_family_validates() {
    let out = run(&["validate-copula", "--family", "clayton", "--theta", "2", "--resolution", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(finding(&r, "copula.axioms")["status"], "pass");
}

#[test]
fn negative_theta_is_accepted() {
    let out = run(&["validate-copula", "--family", "frank", "--theta", "-3", "--resolution", "8"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn counterexample_envelope_is_not_factorable() {
    let out = run(&["factorability", "--input", &fixture("counterexample.json")]);
    let r = json(&out);
    assert_eq!(out.status.code(), Some(r["exit"].as_i64().unwrap() as i32));
    assert_eq!(finding(&r, "factorability.envelope")["status"], "pass");
}

#[test]
fn dominance_prefers_y() {
    let out = run(&["dominance", "--input", &fixture("preference.json")]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("7/10") && text.contains("4/5"), "{text}");
}

#[test]
fn natural_extension_from_stdin() {
    let pbox = r#"{"grid": {"points": ["-inf", "0", "1", "+inf"]}, "lower": ["0", "1/4", "1", "1"], "upper": ["0", "1/2", "1", "1"]}"#;
    let input = format!(r#"{{"x": {pbox}, "y": {pbox}}}"#);
    let out = run_stdin(&["natural-extension"], &input);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn malformed_input_points_at_the_field() {
    let bad = r#"{"grid": {"points": ["-inf", "0", "+inf"]}, "lower": ["0", "x", "1"], "upper": ["0", "1", "1"]}"#;
    let out = run_stdin(&["validate-pbox"], bad);
    assert_eq!(out.status.code(), Some(2));
    let r = json(&out);
    assert_eq!(r["exit"], 2);
    assert_eq!(r["error"]["pointer"], "/lower/1");
    assert!(String::from_utf8_lossy(&out.stderr).contains("/lower/1"));
}

#[test]
fn unknown_fields_are_rejected() {
    let out = run_stdin(&["dominance"], r#"{"joint": {"xlabels": ["0"], "ylabels": ["0"], "masses": [["1"]]}, "extra": 1}"#);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_input_and_bad_flags_exit_two() {
    assert_eq!(run(&["coherence"]).status.code(), Some(2));
    assert_eq!(run(&["coherence", "--input", "/nonexistent/file.json"]).status.code(), Some(2));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(run(&["reproduce-paper", "--resolution", "0"]).status.code(), Some(2));
    assert_eq!(run(&["validate-copula", "--family", "gumbel"]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn incoherent_pbox_fails_with_exit_one() {
    let g = Grid::with_interior([int(1), int(2), int(3)]).unwrap();
    let third = Table1D::new(g, vec![int(0), rat(1, 3), rat(2, 3), int(1), int(1)]).unwrap();
    let u = PBox::precise(third);
    let mut j = BiPBoxJson::of(&natural_extension(&u, &u));
    j.lower[2][2] = "2/3".into();
    let out = run_stdin(&["coherence"], &serde_json::to_string(&j).unwrap());
    let r = json(&out);
    assert_eq!(out.status.code(), Some(1), "{r}");
    assert_eq!(r["exit"], 1);
    assert_eq!(finding(&r, "coherence")["status"], "fail");
}

#[test]
fn text_format_summarizes_findings() {
    let out = run(&["reproduce-paper", "--format", "text", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("reproduce-paper (sha256:"));
    assert!(text.trim_end().ends_with("exit 0"));
}

#[test]
fn seeds_change_the_digest() {
    let a = json(&run(&["reproduce-paper", "--seed", "1"]));
    let b = json(&run(&["reproduce-paper", "--seed", "2"]));
    assert_ne!(a["inputs_digest"], b["inputs_digest"]);
}
