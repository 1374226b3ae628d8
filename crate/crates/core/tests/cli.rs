use std::path::{Path, PathBuf};
use std::process::Command;

use qubit3_invariants::cli::{run, StateFile};
use qubit3_invariants::tensor_core::{apply_local_unitary, StateTensor};
use qubit3_invariants::verify::{haar_local_unitary, stream};
use serde_json::Value;
use tempfile::TempDir;

const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn q3inv(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(std::iter::once("q3inv").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write_state(dir: &TempDir, name: &str, amps: &[[f64; 2]]) -> PathBuf {
    let path = dir.path().join(format!("{name}.json"));
    let file = StateFile { name: Some(name.into()), amplitudes: amps.to_vec() };
    std::fs::write(&path, serde_json::to_string(&file).unwrap()).unwrap();
    path
}

fn real(amps: [f64; 8]) -> Vec<[f64; 2]> {
    amps.iter().map(|&x| [x, 0.0]).collect()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Value of `key` in a table report.
fn table_value(out: &str, key: &str) -> f64 {
    out.lines()
        .find_map(|l| {
            let mut it = l.split_whitespace();
            (it.next() == Some(key)).then(|| it.next().unwrap().parse().unwrap())
        })
        .unwrap_or_else(|| panic!("{key} missing from\n{out}"))
}

fn json_report(out: &str) -> serde_json::Map<String, Value> {
    match serde_json::from_str(out.trim()).unwrap() {
        Value::Object(m) => m,
        v => panic!("not an object: {v}"),
    }
}

fn close(a: f64, b: f64, tol: f64) {
    assert!((a - b).abs() <= tol, "{a} vs {b}");
}

#[test]
fn invariants_of_ghz_and_product() {
    let dir = TempDir::new().unwrap();
    let ghz = write_state(&dir, "ghz", &real([H, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, H]));
    let (code, out, _) = q3inv(&["invariants", s(&ghz)]);
    assert_eq!(code, 0);
    close(table_value(&out, "I2"), 0.5, 1e-15);
    close(table_value(&out, "tau_ABC"), 1.0, 1e-15);

    let zero = write_state(&dir, "zero", &real([1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]));
    let (code, out, _) = q3inv(&["invariants", s(&zero), "--format", "json"]);
    assert_eq!(code, 0);
    let rep = json_report(&out);
    assert_eq!(rep["I6"].as_f64(), Some(0.0));
    for key in ["tau_AB", "tau_AC", "tau_BC", "tau_ABC", "tau_A(BC)", "tau_B(AC)", "tau_C(AB)"] {
        assert_eq!(rep[key].as_f64(), Some(0.0), "{key}");
    }
}

#[test]
fn malformed_files_exit_2() {
    let dir = TempDir::new().unwrap();
    let short = write_state(&dir, "short", &[[1.0, 0.0]; 7]);
    let (code, _, err) = q3inv(&["invariants", s(&short)]);
    assert_eq!(code, 2);
    assert!(err.contains("found 7"), "{err}");

    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{\"amplitudes\": [[1, 0],\n [0, 0], oops]}").unwrap();
    let (code, _, err) = q3inv(&["invariants", s(&broken)]);
    assert_eq!(code, 2);
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn normalization_flags() {
    let dir = TempDir::new().unwrap();
    let big = write_state(&dir, "big", &real([2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2.0]));
    let (code, _, err) = q3inv(&["invariants", s(&big)]);
    assert_eq!(code, 3);
    assert!(err.contains("--normalize"), "{err}");
    let (code, out, _) = q3inv(&["invariants", s(&big), "--normalize"]);
    assert_eq!(code, 0);
    close(table_value(&out, "scale"), 1.0 / 8f64.sqrt(), 1e-16);
    close(table_value(&out, "tau_ABC"), 1.0, 1e-15);
    let (code, out, _) = q3inv(&["invariants", s(&big), "--no-tangles"]);
    assert_eq!(code, 0);
    close(table_value(&out, "I1"), 8.0, 0.0);
    assert!(!out.contains("tau_AB"));
}

#[test]
fn batch_directory_in_sorted_order_csv() {
    let dir = TempDir::new().unwrap();
    write_state(&dir, "b", &real([H, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, H]));
    write_state(&dir, "a", &real([1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]));
    let (code, out, _) = q3inv(&["invariants", s(dir.path()), "--format", "csv"]);
    assert_eq!(code, 0);
    assert_eq!(out.matches("key,value").count(), 1);
    let a = out.find("a.json").unwrap();
    let b = out.find("b.json").unwrap();
    assert!(a < b);
    let (_, again, _) = q3inv(&["invariants", s(dir.path()), "--format", "csv"]);
    assert_eq!(out, again);
}

#[test]
fn pstau_words() {
    let dir = TempDir::new().unwrap();
    let ghz = write_state(&dir, "ghz", &real([H, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, H]));
    let (code, out, _) = q3inv(&["pstau", s(&ghz), "--sigma", "21", "--tau", "21"]);
    assert_eq!(code, 0);
    close(table_value(&out, "P_re"), 0.5, 1e-15);
    close(table_value(&out, "power_trace_product"), 0.5, 1e-15);
    let (code, out, _) = q3inv(&["pstau", s(&ghz), "--sigma", "231", "--tau", "312"]);
    assert_eq!(code, 0);
    close(table_value(&out, "P_re"), 0.25, 1e-15);
    let (code, _, _) = q3inv(&["pstau", s(&ghz), "--sigma", "221", "--tau", "123"]);
    assert_eq!(code, 2);
    let (code, _, _) = q3inv(&["pstau", s(&ghz), "--sigma", "21", "--tau", "123"]);
    assert_eq!(code, 2);
}

#[test]
fn canonical_reports_and_degeneracy() {
    let dir = TempDir::new().unwrap();
    let ghz = write_state(&dir, "g", &real([0.8, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.6]));
    let (code, out, _) = q3inv(&["canonical", s(&ghz)]);
    assert_eq!(code, 0);
    close(table_value(&out, "c000_re"), 0.8, 1e-15);
    close(table_value(&out, "c111_re"), 0.6, 1e-15);
    close(table_value(&out, "det_R"), 0.05308416, 1e-15);

    let equal = write_state(&dir, "e", &real([H, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, H]));
    let (code, _, err) = q3inv(&["canonical", s(&equal)]);
    assert_eq!(code, 4);
    assert!(err.contains("rho_A") && err.contains("degenerate"), "{err}");

    // rho_A of W with p^2 = 1/2 is maximally mixed
    let w_half = dir.path().join("w_half.json");
    let (code, _, _) = q3inv(&["sample", "--family", "w", "--params", "0.5", "0.3", "0.2", "--out", s(&w_half)]);
    assert_eq!(code, 0);
    assert_eq!(q3inv(&["canonical", s(&w_half)]).0, 4);

    let w = dir.path().join("w.json");
    q3inv(&["sample", "--family", "w", "--params", "0.6", "0.25", "0.15", "--out", s(&w)]);
    let (code, out, _) = q3inv(&["canonical", s(&w)]);
    assert_eq!(code, 0);
    for p in ["A", "B", "C"] {
        assert!(table_value(&out, &format!("gram_residual_{p}")) < 1e-10);
    }
    assert!(table_value(&out, "I5_residual") < 1e-12);
}

#[test]
fn verify_family_and_full_file() {
    let (code, out, _) = q3inv(&[
        "verify", "--family", "ghz", "--params", &H.to_string(), &H.to_string(),
        "--trials", "1000", "--seed", "1", "--tol", "1e-10",
    ]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("verdict") && out.contains("pass"));

    let dir = TempDir::new().unwrap();
    let t = qubit3_invariants::verify::random_state(&mut stream(8, 0));
    let path = dir.path().join("r.json");
    std::fs::write(&path, serde_json::to_string(&StateFile::from_state(None, &t)).unwrap()).unwrap();
    let (code, out, _) = q3inv(&["verify", s(&path), "--trials", "50", "--full"]);
    assert_eq!(code, 0, "{out}");
    assert_eq!(table_value(&out, "rank6"), 6.0);
    assert_eq!(table_value(&out, "rank_deg6"), 5.0);

    assert_eq!(q3inv(&["verify", s(&path), "--trials", "0"]).0, 2);
}

#[test]
fn verify_failure_exits_1_and_names_worst() {
    let dir = TempDir::new().unwrap();
    let t = qubit3_invariants::verify::random_state(&mut stream(8, 1));
    let path = dir.path().join("r.json");
    std::fs::write(&path, serde_json::to_string(&StateFile::from_state(None, &t)).unwrap()).unwrap();
    // rounding alone exceeds a zero tolerance
    let (code, _, err) = q3inv(&["verify", s(&path), "--trials", "20", "--tol", "0"]);
    assert_eq!(code, 1);
    assert!(err.contains("worst offender"), "{err}");
}

#[test]
fn sample_round_trips_family_tables() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("s.json");
    let cases: [(&str, &[&str]); 4] = [
        ("factorised", &["0.6", "0.8"]),
        ("ghz", &["0.8", "0.6"]),
        ("w", &["0.5", "0.3", "0.2"]),
        ("w", &["0.2", "0.45", "0.35"]),
    ];
    for (family, params) in cases {
        let mut args = vec!["sample", "--family", family, "--params"];
        args.extend_from_slice(params);
        args.extend_from_slice(&["--out", s(&path)]);
        assert_eq!(q3inv(&args).0, 0);
        let (code, out, _) = q3inv(&["invariants", s(&path), "--format", "json"]);
        assert_eq!(code, 0);
        let rep = json_report(&out);
        let get = |k: &str| rep[k].as_f64().unwrap();
        let x: Vec<f64> = params.iter().map(|p| p.parse().unwrap()).collect();
        // squared amplitudes
        let w: Vec<f64> = if family == "w" { x.clone() } else { x.iter().map(|a| a * a).collect() };
        let (pa, pb, pc, i5, tau3) = match family {
            "factorised" => {
                let q = w[0] * w[0] + w[1] * w[1];
                (1.0, q, q, w[0].powi(3) + w[1].powi(3), 0.0)
            }
            "ghz" => {
                let q = w[0] * w[0] + w[1] * w[1];
                (q, q, q, w[0].powi(3) + w[1].powi(3), 4.0 * w[0] * w[1])
            }
            _ => (
                w[0] * w[0] + (w[1] + w[2]).powi(2),
                w[1] * w[1] + (w[2] + w[0]).powi(2),
                w[2] * w[2] + (w[0] + w[1]).powi(2),
                w[0].powi(3) + w[1].powi(3) + w[2].powi(3) + 3.0 * w[0] * w[1] * w[2],
                0.0,
            ),
        };
        // purities of A, B, C are I4, I3, I2
        close(get("I4"), pa, 1e-11);
        close(get("I3"), pb, 1e-11);
        close(get("I2"), pc, 1e-11);
        close(get("I5"), i5, 1e-11);
        close(get("tau_ABC"), tau3, 1e-11);
        if family == "w" {
            close(get("tau_AB"), 4.0 * w[0] * w[1], 1e-11);
        }
    }
}

#[test]
fn sample_files() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("f.json");
    assert_eq!(q3inv(&["sample", "--family", "factorised", "--params", "1", "0", "--out", s(&path)]).0, 0);
    let file: StateFile = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(file.to_state().unwrap(), StateTensor::basis(1, 1, 1));

    let (code, _, err) = q3inv(&["sample", "--family", "ghz", "--params", "0.8", "0.7", "--out", s(&path)]);
    assert_eq!(code, 2);
    assert!(err.contains("sum to"), "{err}");

    let rr = dir.path().join("rr.json");
    q3inv(&["sample", "--family", "random-real", "--seed", "5", "--out", s(&rr)]);
    let first = std::fs::read_to_string(&rr).unwrap();
    q3inv(&["sample", "--family", "random-real", "--seed", "5", "--out", s(&rr)]);
    assert_eq!(first, std::fs::read_to_string(&rr).unwrap());
}

#[test]
fn compare_verdicts() {
    let dir = TempDir::new().unwrap();
    let ghz_amps = real([H, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, H]);
    let ghz = write_state(&dir, "ghz", &ghz_amps);
    let s3 = 1.0 / 3f64.sqrt();
    let w = write_state(&dir, "w", &real([0.0, s3, s3, 0.0, s3, 0.0, 0.0, 0.0]));
    let (code, out, _) = q3inv(&["compare", s(&ghz), s(&w)]);
    assert_eq!(code, 0);
    assert!(out.contains("verdict") && out.contains("inequivalent"), "{out}");
    assert!(out.contains("I6"));

    let t = StateFile { name: None, amplitudes: ghz_amps }.to_state().unwrap();
    let moved = apply_local_unitary(&t, &haar_local_unitary(&mut stream(12, 0))).unwrap();
    let rotated = dir.path().join("rot.json");
    std::fs::write(&rotated, serde_json::to_string(&StateFile::from_state(None, &moved)).unwrap()).unwrap();
    let (code, out, _) = q3inv(&["compare", s(&ghz), s(&rotated)]);
    assert_eq!(code, 0);
    assert!(out.contains("not distinguished by these invariants"), "{out}");

    let big = write_state(&dir, "big", &real([1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]));
    assert_eq!(q3inv(&["compare", s(&ghz), s(&big)]).0, 3);
}

#[test]
fn binary_exit_codes() {
    let exe = env!("CARGO_BIN_EXE_q3inv");
    let dir = TempDir::new().unwrap();
    let ghz = write_state(&dir, "ghz", &real([H, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, H]));
    let out = Command::new(exe).args(["invariants", s(&ghz)]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    close(table_value(&text, "tau_ABC"), 1.0, 1e-15);
    let out = Command::new(exe).args(["canonical", s(&ghz)]).output().unwrap();
    assert_eq!(out.status.code(), Some(4));
    let out = Command::new(exe).arg("bogus").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
