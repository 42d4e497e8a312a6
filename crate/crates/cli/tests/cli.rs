use std::process::{Command, Output};

fn apost(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_apost")).args(args).output().expect("spawn apost")
}

fn stdout(args: &[&str]) -> String {
    let out = apost(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn field(csv: &str, row: usize, column: &str) -> String {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == column).unwrap_or_else(|| panic!("no column {column}"));
    lines.nth(row).unwrap().split(',').nth(idx).unwrap().to_string()
}

#[test]
fn table_first_row_matches_reference_values() {
    let csv = stdout(&["table", "--method", "euler", "--M", "256"]);
    assert_eq!(csv.lines().count(), 2);
    assert_eq!(field(&csv, 0, "M"), "256");
    assert_eq!(field(&csv, 0, "err"), "1.045e-04");
    assert_eq!(field(&csv, 0, "KL1"), "3.970e-02");
    let eff: f64 = field(&csv, 0, "DLMKL_eff").parse().unwrap();
    assert!((eff - 1.045e-4 / 3.871e-2).abs() < 1e-5);
}

#[test]
fn dg1_row() {
    let csv = stdout(&["table", "--method", "dg1", "--M", "256"]);
    let err: f64 = field(&csv, 0, "err").parse().unwrap();
    let est: f64 = field(&csv, 0, "DG1").parse().unwrap();
    assert!(err > 6.4e-8 && err < 7.2e-8, "{err}");
    assert!(est > err);
}

#[test]
fn empty_step_list_gives_header_only() {
    let csv = stdout(&["table", "--method", "cn"]);
    assert_eq!(csv.lines().count(), 1);
    assert!(csv.starts_with("M,err,CN1,"));
}

#[test]
fn components_have_four_rows_per_step() {
    let csv = stdout(&["components", "--M", "256"]);
    assert_eq!(csv.lines().next().unwrap(), "t,component,value");
    assert_eq!(csv.lines().count(), 1 + 4 * 256);
    let with = stdout(&["components", "--M", "16", "--with-fhat"]);
    assert_eq!(with.lines().count(), 1 + 5 * 16);
    assert!(with.contains("eta_f_hat"));
}

#[test]
fn convergence_orders() {
    let csv = stdout(&["convergence", "--method", "euler", "--estimator", "DLMKL", "--M", "256", "--M", "512"]);
    assert_eq!(field(&csv, 0, "err_order"), "");
    let order: f64 = field(&csv, 1, "err_order").parse().unwrap();
    assert!((order - 1.0).abs() < 0.05, "{order}");
    let dg = stdout(&["convergence", "--method", "dg1", "--M", "512", "--M", "1024", "--M", "2048"]);
    let order: f64 = field(&dg, 2, "err_order").parse().unwrap();
    assert!((order - 3.0).abs() < 0.25, "{order}");
}

#[test]
fn steady_state_has_no_orders() {
    let csv = stdout(&["convergence", "--problem", "steady", "--M", "16", "--M", "32"]);
    assert_eq!(field(&csv, 1, "err_order"), "");
    for tag in ["DLM", "KL1", "DLMKL"] {
        let est: f64 = field(&csv, 1, tag).parse().unwrap();
        assert!(est < 1e-9, "{tag} {est}");
    }
}

#[test]
fn invalid_configurations_exit_nonzero() {
    for args in [
        &["table", "--M", "255"][..],
        &["table", "--method", "cn", "--estimator", "DLM", "--M", "16"],
        &["table", "--method", "bdf2", "--mesh", "uniform", "--M", "2"],
        &["convergence", "--M", "16", "--M", "48"],
        &["components", "--M", "16", "--M", "32"],
    ] {
        let out = apost(args);
        assert!(!out.status.success(), "{args:?} succeeded");
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    }
}

#[test]
fn output_is_deterministic_and_can_go_to_a_file() {
    let args = ["table", "--method", "extrap", "--M", "64", "--M", "128"];
    let a = stdout(&args);
    assert_eq!(a, stdout(&args));
    let path = std::env::temp_dir().join(format!("apost-{}.csv", std::process::id()));
    let mut with_out = args.to_vec();
    let p = path.to_str().unwrap();
    with_out.extend(["--out", p]);
    assert_eq!(stdout(&with_out), "");
    assert_eq!(std::fs::read_to_string(&path).unwrap(), a);
    std::fs::remove_file(path).unwrap();
}
