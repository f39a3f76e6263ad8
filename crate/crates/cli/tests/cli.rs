use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_coarma"));
    c.env_remove("COARMA_EPS").env_remove("COARMA_NODES").env_remove("COARMA_BURN_IN");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn coarma")
}

fn ok(args: &[&str]) -> String {
    let o = run(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().filter(|l| !l.starts_with('#')).map(|l| l.split(',').map(String::from).collect()).collect()
}

fn sample(dir: &Path, model: &str, n: &str, seed: &str) -> PathBuf {
    let p = dir.join(format!("sim-{seed}.csv"));
    std::fs::write(&p, ok(&["simulate", "--model", model, "--n", n, "--seed", seed])).unwrap();
    p
}

#[test]
fn simulate_is_reproducible_and_tagged() {
    let m = "n-CoARMA(1,1)-(n:0.5)-(n:0.25)";
    let a = ok(&["simulate", "--model", m, "--n", "1000", "--seed", "1"]);
    let b = ok(&["simulate", "--model", m, "--n", "1000", "--seed", "1"]);
    assert_eq!(a, b);
    assert_ne!(a, ok(&["simulate", "--model", m, "--n", "1000", "--seed", "2"]));
    let first = a.lines().next().unwrap();
    assert_eq!(first, format!("# coarma {} seed=1", env!("CARGO_PKG_VERSION")));
    let r = rows(&a);
    assert_eq!(r[0], ["t", "u", "eps", "w", "y"]);
    assert_eq!(r.len(), 1001);
    for row in &r[1..] {
        let u: f64 = row[1].parse().unwrap();
        assert!(u > 0.0 && u < 1.0);
    }
}

#[test]
fn out_flag_matches_stdout() {
    let dir = TempDir::new().unwrap();
    let f = dir.path().join("x.csv");
    let args = ["simulate", "--model", "u-MAG(1)-(c:2)", "--n", "50", "--seed", "4"];
    let stdout = ok(&args);
    let mut with_out = args.to_vec();
    with_out.extend(["--out", f.to_str().unwrap()]);
    assert!(ok(&with_out).is_empty());
    assert_eq!(std::fs::read_to_string(f).unwrap(), stdout);
}

#[test]
fn every_subcommand_reruns_identically() {
    let dir = TempDir::new().unwrap();
    let data = sample(dir.path(), "n-CoARMA(1,1)-(n:0.5)-(n:0.25)", "400", "3");
    let d = data.to_str().unwrap();
    let models = dir.path().join("models.toml");
    std::fs::write(&models, "[[model]]\nname = \"ar1\"\nspec = \"n-AR(1)-(n)\"\n\n[[model]]\nname = \"arma\"\narma = { max_p = 1, max_q = 1 }\n")
        .unwrap();
    let m = models.to_str().unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["simulate", "--model", "n-AR(2)-(g:1.5,n:0.2)", "--n", "200", "--seed", "5"],
        vec!["fit", "--model", "n-CoARMA(1,1)-(n)-(n)", "--data", d, "--seed", "5", "--restarts", "2"],
        vec!["forecast", "--model", "n-CoARMA(1,1)-(n:?)-(n:0.25)", "--data", d, "--split", "0.8", "--seed", "5"],
        vec!["evaluate", "--models", m, "--synthetic", "regime", "--n", "300", "--seed", "5"],
        vec!["evaluate", "--models", m, "--data", d, "--seed", "5"],
        vec!["depmeasure", "--model", "u-MAG(1)-(c:1)", "--side", "mag", "--grid", "0.5:2:3", "--nsim", "2000", "--seed", "5", "--nodes", "24"],
        vec!["equiv", "--alphas", "0.5,0.3", "--betas", "0.25", "--n", "2000", "--seed", "5"],
        vec!["garch-copula", "--alpha0", "0.1", "--alpha1", "0.1", "--beta1", "0.8", "--nsim", "50000", "--seed", "5", "--grid", "4"],
        vec!["nll-scan", "--model", "n-CoARMA(1,1)-(n:0.5)-(n:0.25)", "--data", d, "--side", "ar", "--grid", "0.1:0.9:5"],
        vec!["residuals", "--model", "n-CoARMA(1,1)-(n:0.5)-(n:0.25)", "--data", d],
    ];
    for args in cases {
        let a = ok(&args);
        assert!(a.len() > 40, "{args:?}");
        assert_eq!(a, ok(&args), "{args:?}");
    }
}

#[test]
fn equiv_prints_closed_form_coefficients() {
    let (a, b) = (0.5f64, 0.25f64);
    let out = ok(&["equiv", "--alphas", "0.5", "--betas", "0.25"]);
    let r = rows(&out);
    assert_eq!(r[0], ["name", "index", "value"]);
    let get = |name: &str, i: &str| -> f64 { r.iter().find(|x| x[0] == name && x[1] == i).unwrap()[2].parse().unwrap() };
    let psi1 = b * (1.0 - a * a).sqrt() / (1.0 - b * b).sqrt() - a;
    assert!((get("psi", "1") - psi1).abs() < 1e-12);
    assert!((get("phi", "1") - a).abs() < 1e-12);
    let sigma = get("sigma", "0");
    let var = (1.0 + 2.0 * a * psi1 + psi1 * psi1) / (1.0 - a * a) * sigma * sigma;
    assert!((var - 1.0).abs() < 1e-10);

    let out = ok(&["equiv", "--alphas", "0.5,0.3", "--betas", "0.25"]);
    let r = rows(&out);
    let psi2: f64 = r.iter().find(|x| x[0] == "psi" && x[1] == "2").unwrap()[2].parse().unwrap();
    assert!((psi2 + 0.3).abs() < 1e-12);
}

#[test]
fn depmeasure_schema() {
    let out = ok(&["depmeasure", "--model", "u-MAG(1)-(n:0.3)", "--side", "mag", "--grid", "-0.6:0.6:5", "--nsim", "5000", "--seed", "1"]);
    let r = rows(&out);
    assert_eq!(r[0], ["parameter", "rho_quad", "rho_sim", "rho_sim_se", "tdc_l", "tdc_u", "order_l", "order_u"]);
    assert_eq!(r.len(), 6);
    for row in &r[1..] {
        let v: Vec<f64> = row.iter().map(|x| x.parse().unwrap()).collect();
        assert!(v[1].abs() <= 0.5 + 1e-6);
        assert!((v[1] - v[2]).abs() < 4.0 * v[3] + 0.01, "{row:?}");
    }
}

#[test]
fn fit_report_is_machine_readable() {
    let dir = TempDir::new().unwrap();
    let data = sample(dir.path(), "u-MAG(1)-(n:0.5)", "3000", "11");
    let out = ok(&["fit", "--model", "u-MAG(1)-(n:?)", "--data", data.to_str().unwrap(), "--seed", "7"]);
    assert!(out.lines().any(|l| l.starts_with("# model=u-")));
    assert!(out.lines().any(|l| l == "# converged=true"));
    let r = rows(&out);
    assert_eq!(r[0], ["slot", "side", "pair", "param", "family", "value", "lower", "upper"]);
    let v: f64 = r[1][5].parse().unwrap();
    assert!((v - 0.5).abs() < 0.06, "{v}");
    let hi: f64 = r[1][7].parse().unwrap();
    assert!(hi < std::f64::consts::FRAC_1_SQRT_2);

    let bounded = ok(&["fit", "--model", "u-MAG(1)-(n:?)", "--data", data.to_str().unwrap(), "--seed", "7", "--bound", "0:0:0.3"]);
    let v: f64 = rows(&bounded)[1][5].parse().unwrap();
    assert!(v <= 0.3);
}

#[test]
fn forecast_columns_and_ordering() {
    let dir = TempDir::new().unwrap();
    let data = sample(dir.path(), "n-AR(1)-(c:2)", "300", "12");
    let out = ok(&["forecast", "--model", "kde-AR(1)-(c:2)", "--data", data.to_str().unwrap(), "--split", "250"]);
    let r = rows(&out);
    assert_eq!(&r[0][..6], ["t", "y", "pit", "mean", "median", "q01"]);
    assert_eq!(r[0].len(), 104);
    assert_eq!(r[0][103], "q99");
    assert_eq!(r.len(), 51);
    assert_eq!(r[1][0], "250");
    for row in &r[1..] {
        let q: Vec<f64> = row[5..].iter().map(|x| x.parse().unwrap()).collect();
        assert!(q.windows(2).all(|w| w[0] <= w[1]));
        let median: f64 = row[4].parse().unwrap();
        assert_eq!(median, q[49]);
    }
}

#[test]
fn residuals_flag_the_non_ergodic_parameter() {
    let dir = TempDir::new().unwrap();
    let data = sample(dir.path(), "u-MAG(1)-(n:0.875)", "5000", "13");
    let d = data.to_str().unwrap();
    let above = ok(&["residuals", "--model", "u-MAG(1)-(n:0.875)", "--data", d]);
    assert!(above.contains("# oscillation=true"));
    let below = ok(&["residuals", "--model", "u-MAG(1)-(n:0.4841)", "--data", d]);
    assert!(below.contains("# oscillation=false drift=false"));
}

#[test]
fn reads_comments_headers_and_columns() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("d.csv");
    let mut s = String::from("# a comment\ndate,value\n");
    let u = rows(&ok(&["simulate", "--model", "u-MAG(1)-(n:0.4)", "--n", "200", "--seed", "2"]));
    for (i, row) in u[1..].iter().enumerate() {
        s.push_str(&format!("d{i},{}\n", row[1]));
    }
    std::fs::write(&p, s).unwrap();
    let pstr = p.to_str().unwrap();
    let by_name = ok(&["nll-scan", "--model", "u-MAG(1)-(n:0.4)", "--data", pstr, "--column", "value", "--side", "mag", "--grid", "0:0.6:7"]);
    let by_index = ok(&["nll-scan", "--model", "u-MAG(1)-(n:0.4)", "--data", pstr, "--column", "1", "--side", "mag", "--grid", "0:0.6:7"]);
    assert_eq!(by_name, by_index);
    assert_eq!(run(&["nll-scan", "--model", "u-MAG(1)-(n:0.4)", "--data", pstr, "--side", "mag", "--grid", "0:0.6:7"]).status.code(), Some(2));
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let code = |args: &[&str]| run(args).status.code();
    assert_eq!(code(&["simulate", "--model", "n-AR(2)-(n:0.5)", "--n", "10", "--seed", "1"]), Some(2));
    assert_eq!(code(&["simulate", "--model", "n-AR(1)-(n:?)", "--n", "10", "--seed", "1"]), Some(2));
    assert_eq!(code(&["simulate", "--model", "kde-AR(1)-(n:0.5)", "--n", "10", "--seed", "1"]), Some(2));
    assert_eq!(code(&["simulate", "--model", "n-AR(1)-(n:0.5)", "--n", "10"]), Some(2));
    assert_eq!(code(&["fit", "--model", "n-AR(1)-(n)", "--data", "/nonexistent/x.csv", "--seed", "1"]), Some(4));
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "y\n1\n2\nabc\n").unwrap();
    assert_eq!(code(&["fit", "--model", "n-AR(1)-(n)", "--data", bad.to_str().unwrap(), "--seed", "1"]), Some(2));
    let o = bin().args(["equiv", "--alphas", "0.5"]).env("COARMA_EPS", "0.5").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let unwritable = dir.path().join("missing").join("out.csv");
    assert_eq!(code(&["equiv", "--alphas", "0.5", "--out", unwritable.to_str().unwrap()]), Some(4));
    assert_eq!(code(&["garch-copula", "--alpha0", "0.1", "--alpha1", "3", "--beta1", "0.9", "--seed", "1"]), Some(2));
}

#[test]
fn environment_overrides_take_effect() {
    let base = ["simulate", "--model", "u-CoARMA(1,1)-(n:0.5)-(c:1)", "--n", "20", "--seed", "9"];
    let a = ok(&base);
    let b = String::from_utf8(bin().args(base).env("COARMA_BURN_IN", "10").output().unwrap().stdout).unwrap();
    assert!(b.contains("burn_in=10"));
    assert_ne!(a, b);
    let dm = ["depmeasure", "--model", "u-MAG(1)-(c:1)", "--side", "mag", "--grid", "1:1:1", "--nsim", "100", "--seed", "1"];
    let x = String::from_utf8(bin().args(dm).env("COARMA_NODES", "8").output().unwrap().stdout).unwrap();
    let y = String::from_utf8(bin().args(dm).env("COARMA_NODES", "64").output().unwrap().stdout).unwrap();
    assert_ne!(x, y);
}
