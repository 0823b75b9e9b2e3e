use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn gsfem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gsfem"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

fn only_csv(dir: &Path) -> std::path::PathBuf {
    let mut csvs: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    assert_eq!(csvs.len(), 1, "{csvs:?}");
    csvs.pop().unwrap()
}

#[test]
fn spectrum_writes_seventeen_digit_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let run = gsfem(&["spectrum", "--out", out, "--p", "1", "--n", "16", "--method", "GSFEM", "--eta-k", "1/12", "--eta-m", "1/360"]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));

    let text = fs::read_to_string(only_csv(dir.path())).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "j,lambda_h,lambda_ref,rel_err,l2_err,h1_err");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 15);
    let first: Vec<&str> = rows[0].split(',').collect();
    let mantissa = first[1].split('e').next().unwrap();
    assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17);
    let lambda: f64 = first[1].parse().unwrap();
    assert!((lambda - std::f64::consts::PI.powi(2)).abs() < 1e-4);

    let summary: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["n_dof"], 15);
    let m = &summary["methods"][0];
    assert_eq!(m["method"], "GSFEM");
    let sigma = m["sigma"].as_f64().unwrap();
    let ratio = summary["baseline"]["sigma"].as_f64().unwrap() / sigma;
    assert!((m["rho"].as_f64().unwrap() - ratio).abs() < 1e-12);
}

#[test]
fn rerun_is_bitwise_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let run = gsfem(&["spectrum", "--out", dir.path().to_str().unwrap(), "--p", "2", "--n", "12", "--method", "GSFEMBQ", "--eta-k", "1/24", "--eta-m", "1/2880", "--alpha", "0.95", "--format", "csv"]);
        assert_eq!(code(&run), 0);
    }
    assert_eq!(fs::read(only_csv(a.path())).unwrap(), fs::read(only_csv(b.path())).unwrap());
    assert_eq!(
        fs::read(a.path().join("summary.json")).unwrap(),
        fs::read(b.path().join("summary.json")).unwrap()
    );
}

#[test]
fn table_two_gsfembq_condition_number() {
    let dir = tempfile::tempdir().unwrap();
    let run = gsfem(&["spectrum", "--out", dir.path().to_str().unwrap(), "--p", "1", "--n", "200", "--method", "GSFEMBQ", "--eta-k", "1/12", "--eta-m", "1/360", "--alpha", "0.95"]);
    assert_eq!(code(&run), 0);
    let summary: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    let sigma = summary["methods"][0]["sigma"].as_f64().unwrap();
    assert!(((sigma - 2.63e4) / 2.63e4).abs() < 0.01, "{sigma}");
}

#[test]
fn empty_method_list_is_a_no_op() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(dir.path(), &format!(r#"{{"problem": "laplace1d", "methods": [], "outputs": {{"dir": {:?}}}}}"#, out));
    let run = gsfem(&["spectrum", "--config", &cfg]);
    assert_eq!(code(&run), 0);
    assert!(String::from_utf8_lossy(&run.stderr).contains("no methods"));
    assert!(!out.exists());
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write_config(dir.path(), r#"{"problem": "laplace1d", "colour": "red"}"#);
    assert_eq!(code(&gsfem(&["spectrum", "--config", &unknown])), 2);

    let bad_json = write_config(dir.path(), "{ not json");
    assert_eq!(code(&gsfem(&["spectrum", "--config", &bad_json])), 2);

    let missing = dir.path().join("absent.json");
    assert_eq!(code(&gsfem(&["spectrum", "--config", missing.to_str().unwrap()])), 2);

    assert_eq!(code(&gsfem(&["spectrum", "--method", "XFEM"])), 2);
    assert_eq!(code(&gsfem(&["table", "condnum_t9"])), 2);
    assert_eq!(code(&gsfem(&["spectrum", "--p", "0", "--out", dir.path().to_str().unwrap()])), 2);
}

#[test]
fn indefinite_mass_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let run = gsfem(&["spectrum", "--out", dir.path().to_str().unwrap(), "--p", "1", "--n", "10", "--method", "GSFEM", "--eta-m", "-5"]);
    assert_eq!(code(&run), 3);
    assert!(String::from_utf8_lossy(&run.stderr).contains("not positive definite"));
}

#[test]
fn converge_writes_orders() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(
        dir.path(),
        &format!(
            r#"{{
                "problem": "laplace1d",
                "p": 1,
                "n_list": [4, 8, 16, 32],
                "methods": [
                    {{"method": "FEM"}},
                    {{"method": "GSFEM", "eta_k": "1/12", "eta_m": "1/360", "label": "GSFEM"}}
                ],
                "outputs": {{"dir": {:?}, "formats": ["csv", "json"]}}
            }}"#,
            out
        ),
    );
    let run = gsfem(&["converge", "--config", &cfg]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let text = fs::read_to_string(out.join("convergence.csv")).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows[0][0], "N");
    assert_eq!(rows.len(), 6);
    let order_row = &rows[5];
    assert_eq!(order_row[0], "order");
    let fem: f64 = order_row[1].parse().unwrap();
    let gsfem: f64 = order_row[2].parse().unwrap();
    assert!((fem - 2.0).abs() < 0.05, "{fem}");
    assert!((gsfem - 6.03).abs() < 0.1, "{gsfem}");
    assert!(out.join("convergence.json").exists());
}

#[test]
fn converge_needs_three_meshes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"problem": "laplace1d", "n_list": [4, 8], "methods": [{"method": "FEM"}]}"#);
    assert_eq!(code(&gsfem(&["converge", "--config", &cfg])), 2);
}

#[test]
fn reference_command_and_missing_reference() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let run = gsfem(&["reference", "--out", out, "--p", "2", "--n", "20", "--kappa", "exp_x_plus_x2"]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let path = dir.path().join("reference_exp_x_plus_x2_p2_n20.json");
    let reference: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(reference["provenance"]["degree"], 2);
    assert_eq!(reference["eigenvalues"].as_array().unwrap().len(), 39);

    let again = tempfile::tempdir().unwrap();
    gsfem(&["reference", "--out", again.path().to_str().unwrap(), "--p", "2", "--n", "20", "--kappa", "exp_x_plus_x2"]);
    assert_eq!(fs::read(&path).unwrap(), fs::read(again.path().join("reference_exp_x_plus_x2_p2_n20.json")).unwrap());

    let cfg = write_config(
        dir.path(),
        &format!(r#"{{"problem": "variable_kappa", "kappa": "exp_x_plus_x2", "reference": {{"path": {:?}, "generate": false}}, "outputs": {{"dir": {:?}}}}}"#, dir.path().join("none"), out),
    );
    let run = gsfem(&["table", "variable_kappa", "--config", &cfg]);
    assert_eq!(code(&run), 2);
    assert!(String::from_utf8_lossy(&run.stderr).contains("reference"));
}

#[test]
fn table_cells_are_reported_and_written() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let run = gsfem(&["table", "ratios_t4", "--out", out, "--format", "json"]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stdout));
    let report: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("table_ratios_t4.json")).unwrap()).unwrap();
    let cells = report["cells"].as_array().unwrap();
    assert!(!cells.is_empty());
    for cell in cells {
        assert_eq!(cell["pass"], true, "{cell}");
        for key in ["computed", "expected", "tolerance", "deviation"] {
            assert!(cell.get(key).is_some(), "{key}");
        }
    }
}

#[test]
fn failing_cells_exit_with_one() {
    // printed ratios carry three digits, so a 1e-9 band cannot hold
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"problem": "laplace1d", "tolerances": {"ratio_rel": 1e-9}}"#);
    let run = gsfem(&["table", "ratios_t4", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&run), 1);
    assert!(dir.path().join("table_ratios_t4.csv").exists());
}

#[test]
fn problem_is_required() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"methods": [{"method": "FEM"}]}"#);
    let run = gsfem(&["spectrum", "--config", &cfg]);
    assert_eq!(code(&run), 2);
    assert!(String::from_utf8_lossy(&run.stderr).contains("problem"));
}
