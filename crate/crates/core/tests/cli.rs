use std::path::Path;
use std::process::{Command, Output};

use cshock::lrt::run_test;
use cshock::model::sample_dataset;
use cshock::{CriticalValueScheme, ModelParams};
use serde_json::Value;

fn cshock(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cshock"))
        .args(args)
        .output()
        .unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn test_on_boundary_data() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("d.csv");
    std::fs::write(&file, "y1,y2\n0,1\n1,0\n").unwrap();
    let out = cshock(&["test", "--input", path(&file), "--alpha", "0.05", "--json"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["q_n"], 0.0);
    assert_eq!(v["p_value"], 1.0);
    assert_eq!(v["reject"], false);
    assert_eq!(v["lambda_hat"], 0.0);

    let text = cshock(&["test", "--input", path(&file)]);
    let text = String::from_utf8(text.stdout).unwrap();
    for key in ["lambda_hat", "q_n", "critical", "p_value", "do not reject"] {
        assert!(text.contains(key), "{text}");
    }
}

#[test]
fn malformed_file_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("d.csv");
    std::fs::write(&file, "a,b\n1,2\n3,oops\n").unwrap();
    let out = cshock(&["test", "--input", path(&file)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));

    let out = cshock(&["test", "--input", path(&dir.path().join("missing.csv"))]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn zero_column_mean_falls_back_with_a_warning() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("d.csv");
    std::fs::write(&file, "0,3\n0,1\n0,2\n").unwrap();
    let out = cshock(&["test", "--input", path(&file), "--scheme", "bartlett", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stderr(&out).contains("warning"));
    let v = json(&out);
    assert_eq!(v["applied_scheme"], "asymptotic");
    assert!((v["critical"].as_f64().unwrap() - 2.705543).abs() < 1e-6);
}

#[test]
fn three_columns_use_the_general_correction() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("d.csv");
    let block = "2,1,3\n0,1,3\n4,2,2\n1,1,1\n3,0,2\n";
    // R_corr is negative at these means, so five rows leave a nonpositive factor.
    std::fs::write(&file, block).unwrap();
    let out = cshock(&["test", "--input", path(&file), "--json"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(json(&out)["applied_scheme"], "asymptotic");

    std::fs::write(&file, block.repeat(10)).unwrap();
    let out = cshock(&["test", "--input", path(&file), "--json"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["m"], 3);
    assert_eq!(v["n"], 50);
    assert_eq!(v["applied_scheme"], "bartlett");
    assert!(v["critical"].as_f64().unwrap() < 2.705543);
}

#[test]
fn true_rate_schemes_need_rates() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("d.csv");
    std::fs::write(&file, "1,2\n2,1\n").unwrap();
    let out = cshock(&["test", "--input", path(&file), "--scheme", "bartlett-true"]);
    assert_eq!(out.status.code(), Some(2));
    let out = cshock(&[
        "test", "--input", path(&file), "--scheme", "bartlett-true-pi", "--mu", "1,1", "--pi", "0.4",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let out = cshock(&["test", "--input", path(&file), "--scheme", "chi"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn strong_shock_is_detected() {
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..20 {
        let file = dir.path().join(format!("s{seed}.csv"));
        let sim = cshock(&[
            "simulate", "--mu", "1,1", "--lambda", "2", "--n", "200", "--seed", &seed.to_string(),
            "--out", path(&file),
        ]);
        assert_eq!(sim.status.code(), Some(0));
        let v = json(&cshock(&["test", "--input", path(&file), "--json"]));
        assert_eq!(v["reject"], true, "seed {seed}: {v}");
    }
}

#[test]
fn simulate_is_deterministic_and_round_trips() {
    let a = cshock(&["simulate", "--mu", "2,3", "--lambda", "0.5", "--n", "50", "--seed", "9"]);
    let b = cshock(&["simulate", "--mu", "2,3", "--lambda", "0.5", "--n", "50", "--seed", "9"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(String::from_utf8_lossy(&a.stdout).lines().count(), 51);

    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("sim.csv");
    std::fs::write(&file, &a.stdout).unwrap();
    let out = cshock(&["test", "--input", path(&file), "--json"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["n"], 50);

    let bad = cshock(&["simulate", "--mu", "1,-1", "--n", "5"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn size_is_near_nominal_across_seeds() {
    let params = ModelParams::null(vec![2.0, 2.0]).unwrap();
    let scheme = CriticalValueScheme::asymptotic(0.05).unwrap();
    let seeds = 600;
    let rejections = (0..seeds)
        .filter(|&s| run_test(&sample_dataset(&params, 500, s).unwrap(), &scheme).unwrap().reject)
        .count();
    let rate = rejections as f64 / seeds as f64;
    let se = (0.05 * 0.95 / seeds as f64).sqrt();
    assert!((rate - 0.05).abs() <= 3.0 * se, "{rate}");
}

#[test]
fn rfactor_reports() {
    let v = json(&cshock(&["rfactor", "--mu", "1,1", "--json"]));
    let methods = v["methods"].as_array().unwrap();
    assert_eq!(methods.len(), 3);
    for m in methods {
        assert!((m["r"].as_f64().unwrap() - 2.833333).abs() < 1e-6);
        assert!((m["r_corr"].as_f64().unwrap() - 5.666667).abs() < 1e-6);
    }
    assert!(v["max_rel_discrepancy"].as_f64().unwrap() <= 1e-9);

    let v = json(&cshock(&["rfactor", "--mu", "1,1,1", "--json"]));
    assert_eq!(v["methods"].as_array().unwrap().len(), 2);
    assert!(v["max_rel_discrepancy"].as_f64().unwrap() <= 1e-8);

    let text = String::from_utf8(cshock(&["rfactor", "--mu", "1,1"]).stdout).unwrap();
    assert!(text.contains("closed-form-m2") && text.contains("rho-chain"), "{text}");

    assert_eq!(cshock(&["rfactor", "--mu", "1"]).status.code(), Some(2));
    assert_eq!(cshock(&["rfactor", "--mu", "0,1"]).status.code(), Some(2));
}

#[test]
fn experiment_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("case.toml");
    std::fs::write(
        &config,
        "case_id = \"m2-unit\"\nmu = [1.0, 1.0]\nn_grid = [20, 40, 60, 80, 100, 120, 140]\nseed = 5\n",
    )
    .unwrap();
    let out_file = dir.path().join("out.csv");
    let out = cshock(&[
        "experiment", "--config", path(&config), "--out", path(&out_file), "--replications", "300",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = std::fs::read_to_string(&out_file).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "case_id,m,mu_list,lambda,n,scheme,replications,two_e_q,var_q,pi_hat,erp,erp_stderr,failures"
    );
    assert_eq!(lines.count(), 7 * 4);
    assert!(text.contains("m2-unit,2,1;1,0,140,bartlett-true-pi,300,"));

    let again = cshock(&["experiment", "--config", path(&config), "--replications", "300"]);
    assert_eq!(again.stdout, text.as_bytes());
}

#[test]
fn experiment_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    std::fs::write(&config, "mu = [1.0, 1.0]\nn_grid = [20]\nreps = 10\nworkers = 2\n").unwrap();
    let out = cshock(&["experiment", "--config", path(&config)]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("reps") && err.contains("workers"), "{err}");

    std::fs::write(&config, "mu = [1.0, 1.0]\nn_grid = [20]\nreplications = 10\n").unwrap();
    assert_eq!(cshock(&["experiment", "--config", path(&config)]).status.code(), Some(2));
}

#[test]
fn help_lists_every_flag() {
    let top = String::from_utf8(cshock(&["--help"]).stdout).unwrap();
    for verb in ["test", "rfactor", "simulate", "experiment"] {
        assert!(top.contains(verb));
    }
    let cases: [(&str, &[&str]); 4] = [
        ("test", &["--input", "--alpha", "--scheme", "--mu", "--pi", "--json"]),
        ("rfactor", &["--mu", "--json"]),
        ("simulate", &["--mu", "--lambda", "--n", "--seed", "--out"]),
        ("experiment", &["--config", "--out", "--replications", "--seed", "--threads"]),
    ];
    for (verb, flags) in cases {
        let out = cshock(&[verb, "--help"]);
        assert_eq!(out.status.code(), Some(0));
        let text = String::from_utf8(out.stdout).unwrap();
        for flag in flags {
            assert!(text.contains(flag), "{verb} help lacks {flag}");
        }
    }
    assert_eq!(cshock(&["frobnicate"]).status.code(), Some(2));
}
