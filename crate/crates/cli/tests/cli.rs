use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use shiftlab_core::formats::WeightFile;
use shiftlab_core::{MatrixPolynomial, Profile, WeightFamily};
use tempfile::TempDir;

fn shiftlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shiftlab"))
        .args(args)
        .env("SHIFTLAB_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn write_family(dir: &TempDir, name: &str, w: &WeightFamily) -> PathBuf {
    write(dir, name, &serde_json::to_string(&WeightFile::from(w)).unwrap())
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_accepts_commuting_family() {
    let dir = TempDir::new().unwrap();
    let w = WeightFamily::random_contractive(2, 2, 5, Profile::ComplexNonzero).unwrap();
    let path = write_family(&dir, "w.json", &w);
    let out = shiftlab(&["validate", s(&path)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = stdout_json(&out);
    assert_eq!(v["tool"], "shiftlab");
    assert_eq!(v["settings"]["commutation_tol"], 1e-10);
    assert_eq!(v["settings"]["grid_per_axis"], 64);
    assert_eq!(v["result"]["passed"], true);
}

#[test]
fn missing_entry_exits_two_and_names_the_pair() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "w.json", r#"{"d":2,"N":0,"weights":[{"I":[0,0],"j":1,"re":1.0}]}"#);
    let out = shiftlab(&["validate", s(&path)]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("I=[0, 0]") && err.contains("j=2"), "{err}");
}

#[test]
fn malformed_json_reports_location() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "w.json", "{\"d\":2,\n\"N\": }");
    let out = shiftlab(&["validate", s(&path)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));
}

#[test]
fn nonzero_delta_fails_validation_with_triple() {
    use shiftlab_core::Complex64;
    use shiftlab_core::parrott::ParrottConfig;
    let cfg = ParrottConfig::counterexample().with_delta([Complex64::new(0.5, 0.0); 3]);
    // Build the family without the relation check by writing entries directly.
    let ok = ParrottConfig::counterexample().build_family().unwrap();
    let mut file = WeightFile::from(&ok);
    for e in &mut file.weights {
        if e.index.is_zero() {
            e.re = cfg.delta[e.j - 1].re;
        }
    }
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "w.json", &serde_json::to_string(&file).unwrap());
    let out = shiftlab(&["validate", s(&path)]);
    assert_eq!(out.status.code(), Some(1));
    let v = stdout_json(&out);
    assert_eq!(v["result"]["passed"], false);
    let first = &v["result"]["report"]["violations"][0];
    assert!(first["I"].is_array() && first["j"].is_number() && first["k"].is_number());
    assert!(stderr(&out).contains("violation: I="));
}

#[test]
fn parrott_inputs_violate_vn() {
    let dir = TempDir::new().unwrap();
    let w = dir.path().join("w.json");
    let p = dir.path().join("p.json");
    let out = shiftlab(&["parrott", "--write-weights", s(&w), "--write-poly", s(&p)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = stdout_json(&out);
    assert!((v["result"]["norm_compressed"].as_f64().unwrap() - 2.0).abs() < 1e-9);
    assert_eq!(v["result"]["verdict"], "violated");
    assert!(stderr(&out).contains("witness rows [1, 6, 8]"));

    let out = shiftlab(&["vn-check", s(&w), s(&p), "--grid", "32"]);
    assert_eq!(out.status.code(), Some(1));
    let v = stdout_json(&out);
    assert_eq!(v["result"]["verdict"], "violated");
    assert!((v["result"]["ratio"].as_f64().unwrap() - 2.0 / 3f64.sqrt()).abs() < 5e-3);
}

#[test]
fn random_contractive_vn_holds() {
    let dir = TempDir::new().unwrap();
    let w = write_family(&dir, "w.json", &WeightFamily::random_contractive(2, 2, 17, Profile::Positive).unwrap());
    let poly = MatrixPolynomial::random(2, 2, 3, 18).unwrap();
    let p = write(&dir, "p.json", &serde_json::to_string(&poly.to_json()).unwrap());
    let out = shiftlab(&["vn-check", s(&w), s(&p), "--pretty"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(stdout_json(&out)["result"]["verdict"], "holds");
}

#[test]
fn zero_polynomial_is_a_domain_error() {
    let dir = TempDir::new().unwrap();
    let w = write_family(&dir, "w.json", &WeightFamily::ones(1, 1).unwrap());
    let p = write(&dir, "p.json", r#"{"d":1,"n":1,"terms":[]}"#);
    let out = shiftlab(&["vn-check", s(&w), s(&p)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("domain error"), "{}", stderr(&out));
}

#[test]
fn pipeline_on_ones_has_no_scalable_pairs() {
    let dir = TempDir::new().unwrap();
    let w = write_family(&dir, "w.json", &WeightFamily::ones(2, 1).unwrap());
    let out = shiftlab(&["pipeline", s(&w), "--polys", "1", "--grid", "32"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = &stdout_json(&out)["result"];
    assert_eq!(r["classify"]["scalable"], 0);
    assert_eq!(r["vn"]["violated"], 0);
    assert_eq!(r["push"]["steps"].as_array().unwrap().len(), 0);
}

#[test]
fn pipeline_on_half_example_reports_brehmer() {
    let dir = TempDir::new().unwrap();
    let half = WeightFamily::from_fn(2, 2, |i, _| {
        shiftlab_core::Complex64::new(if i.is_zero() { 0.5 } else { 1.0 }, 0.0)
    })
    .unwrap();
    let w = write_family(&dir, "w.json", &half);
    let out = shiftlab(&["pipeline", s(&w), "--polys", "1", "--grid", "32"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = &stdout_json(&out)["result"];
    let pair = r["brehmer"]
        .as_array()
        .unwrap()
        .iter()
        .find(|b| b["subset"] == serde_json::json!([1, 2]))
        .unwrap();
    assert!((pair["min_eigenvalue"].as_f64().unwrap() + 0.75).abs() < 1e-12);
}

#[test]
fn pipeline_on_counterexample_skips_normalize() {
    let dir = TempDir::new().unwrap();
    let w = dir.path().join("w.json");
    shiftlab(&["parrott", "--grid", "8", "--write-weights", s(&w)]);
    let out = shiftlab(&["pipeline", s(&w), "--polys", "1", "--grid", "24", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = &stdout_json(&out)["result"];
    assert_eq!(r["normalize"]["skipped"], true);
    assert!(r["normalize"]["reason"].as_str().unwrap().contains("zero weights"));
    assert!(r["vn"]["violated"].as_u64().unwrap() >= 1);

    let again = shiftlab(&["pipeline", s(&w), "--polys", "1", "--grid", "24", "--seed", "3"]);
    assert_eq!(out.stdout, again.stdout);
}

#[test]
fn dilate_check_certifies() {
    let out = shiftlab(&["dilate-check", "--d", "2", "--N", "2", "--degree", "3", "--battery", "10"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = &stdout_json(&out)["result"];
    assert_eq!(r["M"], 7);
    assert_eq!(r["residual"], 0.0);
}

#[test]
fn build_normalize_classify_push_brehmer_run() {
    let dir = TempDir::new().unwrap();
    let w = WeightFamily::random_contractive(2, 2, 23, Profile::ComplexNonzero).unwrap();
    let path = write_family(&dir, "w.json", &w);
    for cmd in ["build", "normalize", "classify"] {
        let out = shiftlab(&[cmd, s(&path)]);
        assert_eq!(out.status.code(), Some(0), "{cmd}: {}", stderr(&out));
    }
    let final_path = dir.path().join("final.json");
    let out = shiftlab(&["push", s(&path), "--samples", "64", "--output", s(&final_path)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let pushed = WeightFile::parse(&std::fs::read_to_string(&final_path).unwrap())
        .unwrap()
        .to_family()
        .unwrap();
    assert!(pushed.is_unimodular());

    let out = shiftlab(&["brehmer", s(&path), "--subset", "1,2"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout_json(&out)["result"]["obstruction"]["verdict"].is_string());
}

#[test]
fn oversized_family_is_rejected() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "w.json", r#"{"d":6,"N":40,"weights":[]}"#);
    let out = shiftlab(&["validate", s(&path)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("50000"), "{}", stderr(&out));
}
