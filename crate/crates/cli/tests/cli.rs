//! End-to-end tests of the `mopkit` binary: spawn the real executable and
//! hold it to the output-format and exit-code contract.

use std::process::{Command, Output};

use serde_json::Value;

fn mopkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mopkit"))
        .args(args)
        .output()
        .expect("binary spawns")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout parses as JSON")
}

fn entry(matrix: &Value, row: usize, col: usize) -> (f64, f64) {
    let e = &matrix[row * 2 + col];
    (
        e["re"].as_f64().expect("re is a number"),
        e["im"].as_f64().expect("im is a number"),
    )
}

#[test]
fn generate_q0_is_the_identity() {
    let out = mopkit(&["generate", "cp2", "--n", "1", "--wmax", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = stdout_json(&out);
    assert_eq!(doc["schema_version"], "1");
    assert_eq!(doc["model"], "cp2");
    assert_eq!(doc["params"]["n"], 1);
    assert_eq!(doc["params"]["w_max"], 0);
    let polys = doc["payload"]["polynomials"]
        .as_array()
        .expect("polynomials array");
    assert_eq!(polys.len(), 1);
    assert_eq!(polys[0]["degree"], 0);
    let id = &polys[0]["coefficients"][0];
    for (i, j, want) in [(0, 0, 1.0), (0, 1, 0.0), (1, 0, 0.0), (1, 1, 1.0)] {
        let (re, im) = entry(id, i, j);
        assert!((re - want).abs() < 1e-15, "({i},{j}) re = {re}");
        assert_eq!(im, 0.0, "({i},{j}) im = {im}");
    }
}

#[test]
fn generate_degree_law_and_byte_identical_reruns() {
    let args = ["generate", "cp2", "--n", "2", "--wmax", "3"];
    let first = mopkit(&args);
    assert_eq!(first.status.code(), Some(0));
    let doc = stdout_json(&first);
    let polys = doc["payload"]["polynomials"]
        .as_array()
        .expect("polynomials array");
    assert_eq!(polys.len(), 4);
    for (w, p) in polys.iter().enumerate() {
        assert_eq!(p["w"], w as u64);
        assert_eq!(p["degree"], w as u64);
        assert_eq!(
            p["coefficients"].as_array().expect("coefficients").len(),
            w + 1
        );
    }
    let second = mopkit(&args);
    assert_eq!(first.stdout, second.stdout, "reruns must be byte-identical");
    assert!(
        !first.stdout.contains(&b'\r'),
        "output uses LF line endings only"
    );
}

#[test]
fn verify_full_suite_exits_zero() {
    let out = mopkit(&[
        "verify", "cp2", "--n", "1", "--wmax", "8", "--checks", "all",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc = stdout_json(&out);
    assert_eq!(doc["payload"]["all_passed"], true);
    let checks = doc["payload"]["checks"].as_array().expect("checks array");
    assert_eq!(checks.len(), 8);
    for check in checks {
        assert_eq!(check["status"], "pass", "{check}");
        assert!(check["residual"].is_f64(), "{check}");
        assert!(check["threshold"].is_f64(), "{check}");
    }
    let discrepancies = doc["payload"]["discrepancies"]
        .as_array()
        .expect("discrepancy notes");
    assert!(!discrepancies.is_empty());
    assert!(discrepancies
        .iter()
        .any(|d| d.as_str().unwrap_or_default().contains("initial vectors")));
}

#[test]
fn verify_unreachable_tolerance_exits_one_with_residuals() {
    let out = mopkit(&["verify", "cp2", "--n", "1", "--wmax", "4", "--tol", "1e-30"]);
    assert_eq!(out.status.code(), Some(1));
    let doc = stdout_json(&out);
    assert_eq!(doc["payload"]["all_passed"], false);
    for check in doc["payload"]["checks"].as_array().expect("checks array") {
        assert_eq!(check["status"], "fail", "{check}");
        assert!(
            check["residual"].is_f64(),
            "failing checks still report their residual: {check}"
        );
    }
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("failed"), "diagnostics on stderr: {stderr}");
}

#[test]
fn verify_single_check_skips_the_rest() {
    let out = mopkit(&[
        "verify",
        "cp2",
        "--n",
        "2",
        "--wmax",
        "4",
        "--checks",
        "commutant",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc = stdout_json(&out);
    let checks = doc["payload"]["checks"].as_array().expect("checks array");
    for check in checks {
        let name = check["name"].as_str().expect("name");
        if name == "commutant" {
            assert_eq!(check["status"], "pass");
            let notes = check["notes"].as_array().expect("notes").iter();
            let joined: Vec<&str> = notes.map(|n| n.as_str().unwrap_or_default()).collect();
            assert!(
                joined.iter().any(|n| n.contains("dimension 1")),
                "{joined:?}"
            );
            assert!(joined.iter().any(|n| n.contains("identity")), "{joined:?}");
        } else {
            assert_eq!(check["status"], "skipped", "{check}");
        }
    }
}

#[test]
fn verify_csv_lists_every_check() {
    let out = mopkit(&[
        "verify", "cp2", "--n", "1", "--wmax", "4", "--format", "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).expect("UTF-8");
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("check,status,residual,threshold"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 8);
    for row in rows {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 4, "{row}");
        assert_eq!(fields[1], "pass", "{row}");
        fields[2].parse::<f64>().expect("residual parses");
    }
}

#[test]
fn moments_match_the_beta_integrals() {
    let out = mopkit(&["moments", "cp2", "--n", "1", "--wmax", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = stdout_json(&out);
    let tables = doc["payload"]["tables"].as_array().expect("tables");
    assert_eq!(tables.len(), 2);

    // Zeroth moments: diag(1/12, 1/6) for W and diag(1/4, 1/5) for W'.
    let expected = [("W", [1.0 / 12.0, 1.0 / 6.0]), ("Wprime", [0.25, 0.2])];
    for ((label, diag), table) in expected.iter().zip(tables) {
        assert_eq!(table["weight"], *label);
        let m = &table["moments"][0]["matrix"];
        for (i, want) in diag.iter().enumerate() {
            let (re, im) = entry(m, i, i);
            assert!((re - want).abs() < 1e-12, "{label} ({i},{i}) re = {re}");
            assert_eq!(im, 0.0);
        }
        // Hermitian: the off-diagonal entries agree up to conjugation.
        let (re01, im01) = entry(m, 0, 1);
        let (re10, im10) = entry(m, 1, 0);
        assert!((re01 - re10).abs() < 1e-12 && (im01 + im10).abs() < 1e-12);
    }
}

#[test]
fn moments_csv_and_json_encode_identical_values() {
    let args_base = ["moments", "cp2", "--n", "2", "--wmax", "3"];
    let json_out = mopkit(&args_base);
    let mut csv_args = args_base.to_vec();
    csv_args.extend(["--format", "csv"]);
    let csv_out = mopkit(&csv_args);
    assert_eq!(json_out.status.code(), Some(0));
    assert_eq!(csv_out.status.code(), Some(0));

    let doc = stdout_json(&json_out);
    let tables = doc["payload"]["tables"].as_array().expect("tables");
    let csv_text = String::from_utf8(csv_out.stdout).expect("UTF-8");
    let mut rows = csv_text.lines();
    assert_eq!(rows.next(), Some("model,n,weight,order,row,col,re,im"));

    let mut row_count = 0;
    for row in rows {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 8, "{row}");
        let weight = fields[2];
        let order: usize = fields[3].parse().expect("order");
        let i: usize = fields[4].parse().expect("row");
        let j: usize = fields[5].parse().expect("col");
        let re: f64 = fields[6].parse().expect("re");
        let im: f64 = fields[7].parse().expect("im");
        let table = tables
            .iter()
            .find(|t| t["weight"] == weight)
            .expect("weight table present");
        let (jre, jim) = entry(&table["moments"][order]["matrix"], i, j);
        assert_eq!(re.to_bits(), jre.to_bits(), "{row}");
        assert_eq!(im.to_bits(), jim.to_bits(), "{row}");
        row_count += 1;
    }
    // Two weights, orders 0..=3, four entries each.
    assert_eq!(row_count, 2 * 4 * 4);
}

#[test]
fn generate_csv_and_json_encode_identical_values() {
    let json_out = mopkit(&["generate", "cp2", "--n", "1", "--wmax", "2"]);
    let csv_out = mopkit(&[
        "generate", "cp2", "--n", "1", "--wmax", "2", "--format", "csv",
    ]);
    let doc = stdout_json(&json_out);
    let polys = doc["payload"]["polynomials"].as_array().expect("polys");
    let csv_text = String::from_utf8(csv_out.stdout).expect("UTF-8");
    let mut rows = csv_text.lines();
    assert_eq!(
        rows.next(),
        Some("model,n,w,degree,coeff_index,row,col,re,im")
    );
    for row in rows {
        let fields: Vec<&str> = row.split(',').collect();
        let w: usize = fields[2].parse().expect("w");
        let k: usize = fields[4].parse().expect("coeff index");
        let i: usize = fields[5].parse().expect("row");
        let j: usize = fields[6].parse().expect("col");
        let re: f64 = fields[7].parse().expect("re");
        let (jre, _) = entry(&polys[w]["coefficients"][k], i, j);
        assert_eq!(re.to_bits(), jre.to_bits(), "{row}");
    }
}

#[test]
fn unknown_model_is_a_usage_error() {
    let out = mopkit(&["generate", "nope", "--n", "1", "--wmax", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty(), "stdout carries payload only");
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("unknown model"), "{stderr}");
}

#[test]
fn unknown_check_is_a_usage_error() {
    let out = mopkit(&[
        "verify",
        "cp2",
        "--n",
        "1",
        "--wmax",
        "2",
        "--checks",
        "gram,bogus",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("unknown check"), "{stderr}");
}

#[test]
fn out_flag_redirects_the_payload() {
    let path = std::env::temp_dir().join(format!("mopkit-out-{}.json", std::process::id()));
    let path_str = path.to_str().expect("temp path is UTF-8");
    let direct = mopkit(&["moments", "cp2", "--n", "1", "--wmax", "1"]);
    let redirected = mopkit(&[
        "moments", "cp2", "--n", "1", "--wmax", "1", "--out", path_str,
    ]);
    assert_eq!(redirected.status.code(), Some(0));
    assert!(redirected.stdout.is_empty(), "payload went to the file");
    let written = std::fs::read(&path).expect("output file written");
    std::fs::remove_file(&path).ok();
    assert_eq!(written, direct.stdout, "file and stdout payloads agree");
}

#[test]
fn moments_accepts_order_alias() {
    let via_wmax = mopkit(&["moments", "cp2", "--n", "0", "--wmax", "2"]);
    let via_order = mopkit(&["moments", "cp2", "--n", "0", "--order", "2"]);
    assert_eq!(via_wmax.status.code(), Some(0));
    assert_eq!(via_order.status.code(), Some(0));
    assert_eq!(via_wmax.stdout, via_order.stdout);
}
