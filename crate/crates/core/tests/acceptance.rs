//! Acceptance criteria. Runs as a plain binary so every verdict line is
//! printed; exits non-zero if any criterion fails.

mod common;

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use cshock::bartlett::{k_formula_in, r_general, r_m2, r_via_rho_chain};
use cshock::likelihood::LikelihoodContext;
use cshock::lrt::SchemeKind;
use cshock::mle::{fit_lambda, positivity_screen};
use cshock::montecarlo::{simulate_replications, summarize, Replicate, SizeSummary};
use cshock::numeric::{chi2_1_upper_quantile, chi2_1_upper_tail, RngContract};
use cshock::{ExperimentConfig, SufficientStats};
use rand::Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn within_budget(elapsed: Duration, budget: Duration) -> (bool, String) {
    (
        elapsed <= budget,
        format!("{:.2?} of {:.0?}", elapsed, budget),
    )
}

fn random_rates(rng: &mut impl Rng, m: usize) -> Vec<f64> {
    (0..m).map(|_| rng.random_range(0.5..=20.0)).collect()
}

fn pair_formula_agreement() -> Verdict {
    let start = Instant::now();
    let mut rng = RngContract::new(1, 0).rng();
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let mu = random_rates(&mut rng, 2);
        let a = r_m2(mu[0], mu[1]).unwrap().r;
        let b = r_general(&mu).unwrap().r;
        worst = worst.max(((a - b) / a).abs());
    }
    let (k, _, ctx) = k_formula_in(&[1.0, 1.0]).unwrap();
    let at_one = [r_m2(1.0, 1.0).unwrap().r, r_general(&[1.0, 1.0]).unwrap().r];
    let exact = at_one.iter().all(|r| (r - 17.0 / 6.0).abs() <= 1e-12 * 17.0 / 6.0);
    let (fast, time) = within_budget(start.elapsed(), Duration::from_secs(1));
    verdict(
        worst <= 1e-9 && exact && k == -68.0 && ctx.d10 == 1.0 && fast,
        format!(
            "max rel gap {worst:.2e} over 100 rates; at (1,1) R = {:.15} / {:.15}, K = {k}, d10 = {}; {time}",
            at_one[0], at_one[1], ctx.d10
        ),
    )
}

fn rho_chain_oracle() -> Verdict {
    let start = Instant::now();
    let mut rng = RngContract::new(2, 0).rng();
    let mut worst = [0.0_f64; 3];
    for (slot, m) in [2usize, 3, 4].into_iter().enumerate() {
        for _ in 0..200 {
            let mu = random_rates(&mut rng, m);
            let k = r_general(&mu).unwrap().r;
            let rho = r_via_rho_chain(&mu).unwrap().r;
            worst[slot] = worst[slot].max((k - rho).abs() / k.abs().max(1.0));
        }
    }
    let (fast, time) = within_budget(start.elapsed(), Duration::from_secs(5));
    verdict(
        worst.iter().all(|&w| w <= 1e-8) && fast,
        format!(
            "max scaled gap m=2 {:.2e}, m=3 {:.2e}, m=4 {:.2e} over 200 rates each; {time}",
            worst[0], worst[1], worst[2]
        ),
    )
}

fn null_config(mu: Vec<f64>, n: usize, schemes: Vec<SchemeKind>) -> ExperimentConfig {
    ExperimentConfig {
        schemes,
        ..ExperimentConfig::null("acceptance", mu, vec![n])
    }
}

fn run(config: &ExperimentConfig) -> (Vec<Replicate>, SizeSummary, Duration) {
    let start = Instant::now();
    let n = config.n_grid[0];
    let reps = simulate_replications(config, n).unwrap();
    let summary = summarize(config, n, &reps).unwrap();
    (reps, summary, start.elapsed())
}

fn null_asymptotics() -> Verdict {
    let config = null_config(vec![20.0, 20.0], 140, vec![]);
    let (reps, s, elapsed) = run(&config);
    let positive: Vec<f64> = reps
        .iter()
        .filter_map(|r| match r {
            Replicate::Done { q_n, .. } if *q_n > 0.0 => Some(*q_n),
            _ => None,
        })
        .take(10_000)
        .collect();
    let (d, p) = common::ks_test(&positive, common::chi2_1_cdf);
    let (fast, time) = within_budget(elapsed, Duration::from_secs(600));
    let pass = (0.49..=0.51).contains(&s.pi_hat)
        && (0.95..=1.05).contains(&s.two_e_q)
        && (1.15..=1.35).contains(&s.var_q)
        && positive.len() == 10_000
        && p > 0.001
        && fast;
    verdict(
        pass,
        format!(
            "pi_hat {:.4} (se {:.4}), 2E(Q) {:.4} (se {:.4}), Var(Q) {:.4} (se {:.4}), KS D {d:.4} p {p:.3} on {} positive draws, {} failures; {time}",
            s.pi_hat,
            s.pi_hat_stderr,
            s.two_e_q,
            s.two_e_q_stderr,
            s.var_q,
            s.var_q_stderr,
            positive.len(),
            s.failures
        ),
    )
}

fn small_sample_sizes() -> Verdict {
    let config = null_config(
        vec![1.0, 1.0],
        20,
        vec![
            SchemeKind::Asymptotic,
            SchemeKind::BartlettPlugin,
            SchemeKind::BartlettTrue,
        ],
    );
    let (_, s, elapsed) = run(&config);
    let rate = |k| *s.rate(k).unwrap();
    let (asym, plug, truth) = (
        rate(SchemeKind::Asymptotic),
        rate(SchemeKind::BartlettPlugin),
        rate(SchemeKind::BartlettTrue),
    );
    let alpha = config.alpha;
    let ordered =
        (truth.erp - alpha).abs() <= (asym.erp - alpha).abs() + 3.0 * truth.stderr.max(asym.stderr);
    let (fast, time) = within_budget(elapsed, Duration::from_secs(300));
    verdict(
        asym.erp > alpha && plug.erp < alpha && ordered && fast,
        format!(
            "erp asymptotic {:.4}, plug-in {:.4}, true-rate {:.4} (se {:.4}); {time}",
            asym.erp, plug.erp, truth.erp, truth.stderr
        ),
    )
}

fn dimension_three() -> Verdict {
    let config = null_config(vec![1.0, 1.0, 1.0], 60, vec![]);
    let (_, s, elapsed) = run(&config);
    let (fast, time) = within_budget(elapsed, Duration::from_secs(600));
    verdict(
        s.pi_hat < 0.49 && fast,
        format!("pi_hat {:.4} (se {:.4}); {time}", s.pi_hat, s.pi_hat_stderr),
    )
}

fn boundary_law() -> Verdict {
    let start = Instant::now();
    let mut screen_mismatch = Vec::new();
    let mut grid_mismatch = Vec::new();
    let mut ties = 0;
    let mut worst_fd = 0.0_f64;
    for seed in 0..1000u64 {
        let (data, _) = common::random_dataset(seed);
        let stats = SufficientStats::from_counts(&data);
        let screen = positivity_screen(&stats);
        let fit = fit_lambda(&data, 1e-10).unwrap();
        if (fit.lambda_hat > 0.0) != screen {
            screen_mismatch.push(seed);
        }

        let ctx = LikelihoodContext::<f64>::new(&data);
        let upper = ctx.lambda_upper();
        let null = ctx.loglik_null();
        let mut best = f64::NEG_INFINITY;
        if upper > 0.0 {
            for k in 1..1024 {
                best = best.max(ctx.loglik(upper * k as f64 / 1024.0).unwrap());
            }
        }
        if (best - null).abs() <= 1e-9 {
            ties += 1;
        } else if (best > null) != screen {
            grid_mismatch.push(seed);
        }

        if upper > 0.0 {
            let h = 1e-6 * upper;
            for k in 1..=5 {
                let lambda = upper * k as f64 / 6.0;
                let d = ctx.dloglik(lambda).unwrap();
                let fd = (ctx.loglik(lambda + h).unwrap() - ctx.loglik(lambda - h).unwrap())
                    / (2.0 * h);
                worst_fd = worst_fd.max((d - fd).abs() / (1.0 + d.abs()));
            }
        }
    }
    let (fast, time) = within_budget(start.elapsed(), Duration::from_secs(30));
    let describe = |seeds: &[u64]| -> String {
        let shown: Vec<String> = seeds.iter().take(8).map(u64::to_string).collect();
        format!("{} (seeds {})", seeds.len(), shown.join(","))
    };
    verdict(
        screen_mismatch.is_empty() && grid_mismatch.is_empty() && worst_fd <= 1e-6 && fast,
        format!(
            "fit vs screen mismatches {}, grid vs screen mismatches {}, grid ties {ties}, max derivative gap {worst_fd:.2e}; {time}",
            describe(&screen_mismatch),
            describe(&grid_mismatch)
        ),
    )
}

fn numeric_kernels() -> Verdict {
    let start = Instant::now();
    let q10 = chi2_1_upper_quantile(0.10).unwrap();
    let q05 = chi2_1_upper_quantile(0.05).unwrap();
    let quantiles = (q10 - 2.705543).abs() <= 1e-6 && (q05 - 3.841459).abs() <= 1e-6;
    let mut worst_trip = 0.0_f64;
    for k in 1..1000 {
        let p = k as f64 / 1000.0;
        let back = chi2_1_upper_tail(chi2_1_upper_quantile(p).unwrap());
        worst_trip = worst_trip.max(((back - p) / p).abs());
    }
    let mut gof = Vec::new();
    for (i, mean) in [0.5, 1.0, 5.0, 20.0].into_iter().enumerate() {
        let draws = common::poisson_sample(mean, 1_000_000, 700 + i as u64);
        let (_, df, p) = common::poisson_gof(&draws, mean);
        gof.push((mean, df, p));
    }
    let fits = gof.iter().all(|&(_, _, p)| p > 0.001);
    let (fast, time) = within_budget(start.elapsed(), Duration::from_secs(60));
    let gof_text: Vec<String> = gof
        .iter()
        .map(|(m, df, p)| format!("mean {m}: p {p:.3} ({df} df)"))
        .collect();
    verdict(
        quantiles && worst_trip <= 1e-9 && fits && fast,
        format!(
            "q(0.10) {q10:.9}, q(0.05) {q05:.9}, round trip {worst_trip:.2e}, {}; {time}",
            gof_text.join(", ")
        ),
    )
}

fn reproducible_experiment() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("case.toml");
    std::fs::write(
        &config,
        "case_id = \"repro\"\nmu = [1.0, 1.0]\nn_grid = [20, 40]\nreplications = 2000\nseed = 77\n",
    )
    .unwrap();
    let run = |threads: Option<usize>, name: &str| -> Vec<u8> {
        let out = dir.path().join(name);
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_cshock"));
        cmd.args(["experiment", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out);
        if let Some(t) = threads {
            cmd.args(["--threads", &t.to_string()]);
        }
        let status = cmd.status().unwrap();
        assert!(status.success(), "experiment exited with {status}");
        std::fs::read(Path::new(&out)).unwrap()
    };
    let runs = [
        run(Some(1), "a.csv"),
        run(Some(1), "b.csv"),
        run(Some(4), "c.csv"),
        run(None, "d.csv"),
    ];
    let identical = runs.windows(2).all(|w| w[0] == w[1]);
    let rows = String::from_utf8_lossy(&runs[0]).lines().count();
    verdict(
        identical && rows == 1 + 2 * 4,
        format!(
            "4 runs (1, 1, 4 and default workers): {} bytes each, identical = {identical}, {rows} lines",
            runs[0].len()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 8] = [
        ("pair formula agreement", pair_formula_agreement),
        ("rho-chain oracle", rho_chain_oracle),
        ("null asymptotics at mu=(20,20), n=140", null_asymptotics),
        ("small-sample size ordering at mu=(1,1), n=20", small_sample_sizes),
        ("dimension-3 positive fraction at n=60", dimension_three),
        ("MLE boundary law", boundary_law),
        ("numeric kernels", numeric_kernels),
        ("reproducible experiment output", reproducible_experiment),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.into_iter().enumerate() {
        let v = check();
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("{tag} criterion {} {name}: {}", i + 1, v.detail);
        failed += usize::from(!v.pass);
    }
    println!("acceptance: {} passed, {failed} failed", 8 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
