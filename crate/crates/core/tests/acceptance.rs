//! Acceptance suite: one check per criterion, each printing a PASS/FAIL line.
//! All criteria run even when an earlier one fails; the test fails at the end
//! if any did.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stcluster::cluster::{self, z_transition_probs, ClusterState, LabelPrior};
use stcluster::dataset::StDataset;
use stcluster::diagnostics::{compute_dic, compute_lmpl, rand_index, rmse};
use stcluster::engine::{deviance, run_chain, McmcConfig, ModelKind};
use stcluster::graph::{build_graph, leroux_precision};
use stcluster::simulation::{default_lattice, generate, run_study, Scenario, StudyConfig, StudyResults};
use stcluster::smoothing::{gamma_conditional, sample_gamma, sample_tau2, tau2_posterior, SmoothState, SmoothVariant};
use stcluster::stats::{poisson_log_pmf, std_normal_cdf, std_normal_log_pdf};

// Pinned thresholds.
const NULL_RAND_MIN: f64 = 0.95;
const RECOVERY_RAND_MIN: f64 = 0.95;
const POSTHOC_MARGIN: f64 = 0.1;
const STUDY_BUDGET_S: f64 = 30.0 * 60.0;
const MC_SE_TOLERANCE: f64 = 3.0;
const ORACLE_SWEEPS: usize = 100_000;
const CONJUGATE_DRAWS: usize = 100_000;
const TOY_TOLERANCE: f64 = 1e-12;
const RAND_PAIRS: usize = 200;
const RAND_MAX_N: usize = 50;
const TRANSITION_SUM_TOLERANCE: f64 = 1e-12;
const PHI_MEAN_TOLERANCE: f64 = 1e-12;
const STUDY_REPLICATES: usize = 10;
const E_HIGH: [f64; 2] = [190.0, 210.0];

struct Outcome {
    id: usize,
    title: &'static str,
    pass: bool,
    detail: String,
}

fn report(outcomes: &[Outcome]) {
    // Written to the raw stderr handle rather than through `println!`, which
    // the test harness captures for passing tests.
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "\n==== acceptance criteria ====");
    for o in outcomes {
        let _ = writeln!(
            err,
            "criterion {:>2} [{}] {}: {}",
            o.id,
            if o.pass { "PASS" } else { "FAIL" },
            o.title,
            o.detail
        );
    }
}

fn m(name: &str) -> ModelKind {
    name.parse().unwrap()
}

fn study(scenario: u8, models: &[&str], seed: u64) -> (StudyResults, f64) {
    let config = StudyConfig {
        models: models.iter().map(|n| m(n)).collect(),
        scenarios: vec![scenario],
        e_ranges: vec![E_HIGH],
        n_replicates: STUDY_REPLICATES,
        seed,
        ..StudyConfig::default()
    };
    let start = Instant::now();
    let results = run_study(&config).expect("study runs");
    (results, start.elapsed().as_secs_f64())
}

fn mean_of(results: &StudyResults, scenario: u8, model: &str, f: fn(&stcluster::simulation::StudyRow) -> f64) -> f64 {
    let rows = results.select(scenario, E_HIGH, m(model));
    assert!(rows.iter().all(|r| r.error.is_none()), "failed replicate in {model}");
    rows.iter().map(|r| f(r)).sum::<f64>() / rows.len() as f64
}

/// Mean and standard error of a paired difference.
fn paired(results: &StudyResults, scenario: u8, a: &str, b: &str) -> (f64, f64, usize) {
    let ra = results.select(scenario, E_HIGH, m(a));
    let rb = results.select(scenario, E_HIGH, m(b));
    let diffs: Vec<f64> = ra.iter().zip(&rb).map(|(x, y)| x.rmse - y.rmse).collect();
    let n = diffs.len() as f64;
    let mean = diffs.iter().sum::<f64>() / n;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let wins = diffs.iter().filter(|&&d| d < 0.0).count();
    (mean, (var / n).sqrt(), wins)
}

// ---------------------------------------------------------------------------
// Criterion 6 helpers: exhaustive posterior over Z on N=2, T=2, G=2.

fn tiny_state() -> (ClusterState, StDataset, Vec<f64>) {
    let data = StDataset::from_grid(2, 2, vec![4, 9, 6, 3], vec![5.0, 5.0, 6.0, 4.0]).unwrap();
    let lambda = vec![(0.7f64).ln(), (1.4f64).ln(), (0.8f64).ln(), (1.3f64).ln()];
    let mut state = ClusterState::new(2, 10.0, 2, 2, lambda, vec![1, 1, 1, 1]).unwrap();
    state.alpha = 1.2;
    state.delta = 0.4;
    let phi = vec![0.1, -0.05, -0.1, 0.05];
    (state, data, phi)
}

fn enumerate_posterior(state: &ClusterState, data: &StDataset, phi: &[f64]) -> Vec<f64> {
    let prior = LabelPrior::new(2, state.alpha, state.delta);
    let mut logp = Vec::with_capacity(16);
    for code in 0..16usize {
        let z: Vec<usize> = (0..4).map(|k| ((code >> k) & 1) + 1).collect();
        let mut lp = 0.0;
        for area in 0..2 {
            let (z1, z2) = (z[area * 2], z[area * 2 + 1]);
            lp += prior.log_initial(z1) + prior.log_transition(z1, z2);
            for t in 0..2 {
                let cell = area * 2 + t;
                let mu = data.e()[cell] * (state.lambda_row(t)[z[cell] - 1] + phi[cell]).exp();
                lp += poisson_log_pmf(data.y()[cell], mu);
            }
        }
        logp.push(lp);
    }
    let max = logp.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let total: f64 = logp.iter().map(|v| (v - max).exp()).sum();
    logp.iter().map(|v| (v - max).exp() / total).collect()
}

fn code_of(z: &[usize]) -> usize {
    z.iter().enumerate().map(|(k, &v)| (v - 1) << k).sum()
}

/// Empirical frequencies of the 16 configurations and batch-means standard
/// errors (100 batches).
fn run_z_chain(paths: bool, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let (mut state, data, phi) = tiny_state();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..1000 {
        cluster::sample_z(&mut state, &data, &phi, &mut rng);
        if paths {
            cluster::sample_z_paths(&mut state, &data, &phi, &mut rng);
        }
    }
    let batches = 100;
    let per = ORACLE_SWEEPS / batches;
    let mut batch_freq = vec![vec![0.0; 16]; batches];
    for b in 0..batches {
        for _ in 0..per {
            cluster::sample_z(&mut state, &data, &phi, &mut rng);
            if paths {
                cluster::sample_z_paths(&mut state, &data, &phi, &mut rng);
            }
            batch_freq[b][code_of(state.z())] += 1.0 / per as f64;
        }
    }
    let freq: Vec<f64> = (0..16).map(|c| batch_freq.iter().map(|f| f[c]).sum::<f64>() / batches as f64).collect();
    let se: Vec<f64> = (0..16)
        .map(|c| {
            let var = batch_freq.iter().map(|f| (f[c] - freq[c]).powi(2)).sum::<f64>() / (batches as f64 - 1.0);
            (var / batches as f64).sqrt()
        })
        .collect();
    (freq, se)
}

fn criterion_6() -> Outcome {
    let (state, data, phi) = tiny_state();
    let exact = enumerate_posterior(&state, &data, &phi);
    let mut worst: f64 = 0.0;
    let mut details = Vec::new();
    for (label, paths, seed) in [("single-site", false, 61u64), ("single-site+path", true, 62)] {
        let (freq, se) = run_z_chain(paths, seed);
        let z_max = (0..16)
            .map(|c| (freq[c] - exact[c]).abs() / se[c].max(1e-12))
            .fold(0.0, f64::max);
        worst = worst.max(z_max);
        details.push(format!("{label}: max |emp-exact|/SE = {z_max:.2}"));
    }
    Outcome {
        id: 6,
        title: "Z sampler matches exhaustive enumeration (N=2,T=2,G=2)",
        pass: worst <= MC_SE_TOLERANCE,
        detail: details.join("; "),
    }
}

// ---------------------------------------------------------------------------
// Criterion 7: conjugate draws.

/// Returns max deviation of sample mean and variance from analytic values in
/// units of their Monte Carlo standard errors.
fn moment_z(draws: &[f64], mean: f64, var: f64) -> (f64, f64) {
    let n = draws.len() as f64;
    let m = draws.iter().sum::<f64>() / n;
    let sq: Vec<f64> = draws.iter().map(|x| (x - mean).powi(2)).collect();
    let v = sq.iter().sum::<f64>() / n;
    let v_se = (sq.iter().map(|s| (s - v).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt();
    ((m - mean).abs() / (var / n).sqrt(), (v - var).abs() / v_se)
}

fn ig_moments(shape: f64, rate: f64) -> (f64, f64) {
    let mean = rate / (shape - 1.0);
    (mean, mean * mean / (shape - 2.0))
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut details = Vec::new();
    let mut worst: f64 = 0.0;

    // sigma2: G=2, T=6 class means
    let lambda: Vec<f64> = (0..6).flat_map(|t| [-0.3 + 0.05 * t as f64, 0.4 - 0.03 * t as f64]).collect();
    let (shape, rate) = cluster::sigma2_posterior(&lambda, 6, 2, 0.001, 0.001).unwrap();
    let draws: Vec<f64> = (0..CONJUGATE_DRAWS)
        .map(|_| cluster::sample_sigma2(&lambda, 6, 2, 0.001, 0.001, &mut rng).unwrap())
        .collect();
    let (mean, var) = ig_moments(shape, rate);
    let (zm, zv) = moment_z(&draws, mean, var);
    worst = worst.max(zm).max(zv);
    details.push(format!("sigma2 z=({zm:.2},{zv:.2})"));

    // tau2 for the autoregressive Leroux effect on a 4-cycle, T=3
    let graph = build_graph(4, &[(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
    let mut smooth = SmoothState::new(SmoothVariant::Ar1Leroux, &graph, 3, None).unwrap();
    smooth.set_rho(&graph, 0.6).unwrap();
    smooth.gamma = 0.4;
    smooth
        .set_phi(vec![0.2, 0.1, -0.3, -0.2, 0.3, 0.1, 0.0, 0.1, 0.2, -0.1, -0.2, -0.3])
        .unwrap();
    let (shape, rate) = tau2_posterior(&smooth, &graph, 0.001, 0.001).unwrap();
    let draws: Vec<f64> = (0..CONJUGATE_DRAWS)
        .map(|_| sample_tau2(&mut smooth, &graph, 0.001, 0.001, &mut rng).unwrap())
        .collect();
    let (mean, var) = ig_moments(shape, rate);
    let (zm, zv) = moment_z(&draws, mean, var);
    worst = worst.max(zm).max(zv);
    details.push(format!("tau2 z=({zm:.2},{zv:.2})"));

    // gamma: truncated Gaussian on [0, 1]
    smooth.tau2 = 0.05;
    let (mu, s2) = gamma_conditional(&smooth).unwrap();
    let s = s2.sqrt();
    let (a, b) = (-mu / s, (1.0 - mu) / s);
    let pdf = |x: f64| std_normal_log_pdf(x).exp();
    let mass = std_normal_cdf(b) - std_normal_cdf(a);
    let ratio = (pdf(a) - pdf(b)) / mass;
    let mean = mu + s * ratio;
    let var = s2 * (1.0 + (a * pdf(a) - b * pdf(b)) / mass - ratio * ratio);
    let draws: Vec<f64> = (0..CONJUGATE_DRAWS).map(|_| sample_gamma(&mut smooth, &mut rng)).collect();
    let (zm, zv) = moment_z(&draws, mean, var);
    worst = worst.max(zm).max(zv);
    details.push(format!("gamma TN({mu:.3},{s:.3}) z=({zm:.2},{zv:.2})"));

    Outcome {
        id: 7,
        title: "conjugate draws match analytic moments",
        pass: worst <= MC_SE_TOLERANCE,
        detail: details.join("; "),
    }
}

// ---------------------------------------------------------------------------
// Criterion 8: metric oracles.

fn brute_rand(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len();
    let mut agree = 0u64;
    let mut total = 0u64;
    for i in 0..n {
        for j in i + 1..n {
            total += 1;
            if (a[i] == a[j]) == (b[i] == b[j]) {
                agree += 1;
            }
        }
    }
    if total == 0 {
        1.0
    } else {
        agree as f64 / total as f64
    }
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut rand_ok = true;
    for _ in 0..RAND_PAIRS {
        let n = rng.random_range(2..=RAND_MAX_N);
        let ka = rng.random_range(1..=6);
        let kb = rng.random_range(1..=6);
        let a: Vec<usize> = (0..n).map(|_| rng.random_range(0..ka)).collect();
        let b: Vec<usize> = (0..n).map(|_| rng.random_range(0..kb)).collect();
        rand_ok &= rand_index(&a, &b).unwrap() == brute_rand(&a, &b);
    }

    let r = rmse(&[1.0, 1.1, 1.2, 1.3], &[1.0; 4]).unwrap();
    let rmse_ok = (r - (0.14f64 / 4.0).sqrt()).abs() < TOY_TOLERANCE;

    // DIC on a two-sample toy, by hand: 1 area x 2 periods.
    let data = StDataset::from_grid(1, 2, vec![3, 5], vec![2.0, 4.0]).unwrap();
    let theta = [1.2, 0.9, 1.6, 1.1];
    let ll = |y: f64, mu: f64, lf: f64| y * mu.ln() - mu - lf;
    let (lf3, lf5) = ((6.0f64).ln(), (120.0f64).ln());
    let d = |t1: f64, t2: f64| -2.0 * (ll(3.0, 2.0 * t1, lf3) + ll(5.0, 4.0 * t2, lf5));
    let d1 = d(1.2, 0.9);
    let d2 = d(1.6, 1.1);
    let dbar = 0.5 * (d1 + d2);
    let pd = dbar - d(1.4, 1.0);
    let dic = compute_dic(&[deviance(&data, &theta[..2]), deviance(&data, &theta[2..])], &theta, &data).unwrap();
    let dic_ok = (dic.pd - pd).abs() < TOY_TOLERANCE && (dic.dic - (dbar + pd)).abs() < TOY_TOLERANCE;

    // LMPL on a three-sample toy, by hand.
    let theta3 = [1.2, 0.9, 1.6, 1.1, 0.8, 1.3];
    let cpo = |y: f64, e: f64, lf: f64, col: usize| {
        let inv: f64 = (0..3).map(|s| 1.0 / ll(y, e * theta3[s * 2 + col], lf).exp()).sum::<f64>() / 3.0;
        (1.0 / inv).ln()
    };
    let lmpl_hand = cpo(3.0, 2.0, lf3, 0) + cpo(5.0, 4.0, lf5, 1);
    let lmpl = compute_lmpl(&theta3, &data).unwrap().lmpl;
    let lmpl_ok = (lmpl - lmpl_hand).abs() < TOY_TOLERANCE;

    Outcome {
        id: 8,
        title: "metric oracles (rand brute force, rmse, DIC, LMPL toys)",
        pass: rand_ok && rmse_ok && dic_ok && lmpl_ok,
        detail: format!(
            "rand exact on {RAND_PAIRS} pairs: {rand_ok}; rmse: {rmse_ok}; DIC/pd: {dic_ok} (pd={:.6}); LMPL: {lmpl_ok} (|diff|={:.1e})",
            dic.pd,
            (lmpl - lmpl_hand).abs()
        ),
    }
}

// ---------------------------------------------------------------------------
// Criterion 9: structural invariants on every retained sample.

fn criterion_9(studies: &[&StudyResults]) -> Outcome {
    let lattice = default_lattice(12, 13).unwrap();
    let scenario = Scenario::standard(5, [90.0, 110.0], 10).unwrap();
    let truth = generate(&scenario, &lattice, 99).unwrap();
    let config = McmcConfig {
        n_burnin: 300,
        n_keep: 300,
        seed: 9,
        ..McmcConfig::default()
    };
    let mut ordering = 0;
    let mut labels = 0;
    let mut phi_mean: f64 = 0.0;
    let mut transition_err: f64 = 0.0;
    let mut non_pd = 0;
    let mut rho_checked = 0;
    let mut fits = 0;
    for name in ["cluster1", "cluster2", "cluster3", "cluster4", "kh", "rlm"] {
        let fit = run_chain(m(name), &truth.dataset, &lattice.graph, &config, 0).unwrap();
        fits += 1;
        ordering += fit.invariants.ordering_violations;
        labels += fit.invariants.label_range_violations;
        phi_mean = phi_mean.max(fit.invariants.max_phi_period_mean);
        if let (Some(a), Some(d)) = (fit.trace("alpha"), fit.trace("delta")) {
            for (&alpha, &delta) in a.iter().zip(d) {
                for prev in [None, Some(1), Some(3), Some(5)] {
                    let s: f64 = z_transition_probs(prev, alpha, delta, config.g).iter().sum();
                    transition_err = transition_err.max((s - 1.0).abs());
                }
            }
        }
        if matches!(name, "cluster2" | "cluster3" | "rlm") {
            for &rho in fit.trace("rho").unwrap() {
                if rho < 1.0 {
                    rho_checked += 1;
                    if !leroux_precision(&lattice.graph, rho).unwrap().is_positive_definite() {
                        non_pd += 1;
                    }
                }
            }
        }
    }
    for results in studies {
        for row in &results.rows {
            if let Some(inv) = &row.invariants {
                fits += 1;
                ordering += inv.ordering_violations;
                labels += inv.label_range_violations;
                phi_mean = phi_mean.max(inv.max_phi_period_mean);
            }
        }
    }
    Outcome {
        id: 9,
        title: "structural invariants on every retained sample",
        pass: ordering == 0
            && labels == 0
            && phi_mean <= PHI_MEAN_TOLERANCE
            && transition_err <= TRANSITION_SUM_TOLERANCE
            && non_pd == 0,
        detail: format!(
            "{fits} fits: ordering violations {ordering}, label range violations {labels}, max |phi period mean| {phi_mean:.1e}, max |sum p - 1| {transition_err:.1e}, non-PD precisions {non_pd}/{rho_checked}"
        ),
    }
}

// ---------------------------------------------------------------------------
// Criterion 10: byte-identical reruns through the CLI.

fn files_identical(a: &Path, b: &Path) -> Result<usize, String> {
    let mut names: Vec<_> = fs::read_dir(a)
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    for name in &names {
        let x = fs::read(a.join(name)).map_err(|e| e.to_string())?;
        let y = fs::read(b.join(name)).map_err(|e| format!("{name:?}: {e}"))?;
        if x != y {
            return Err(format!("{name:?} differs"));
        }
    }
    Ok(names.len())
}

fn criterion_10() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_stcluster");
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let run = |args: &[&str]| {
        let status = Command::new(bin).env("RUST_LOG", "error").args(args).status().expect("binary runs");
        assert!(status.success(), "stcluster {args:?} failed");
    };
    let p = |s: &str| d.join(s).to_string_lossy().into_owned();
    run(&["generate", "--scenario", "4", "--e-range", "90:110", "--seed", "10", "--out", &p("data")]);
    let mut checks = Vec::new();
    let mut pass = true;
    for model in ["cluster2", "cluster4", "kh"] {
        for out in ["a", "b"] {
            run(&[
                "fit", "--model", model, "--counts", &p("data/counts.csv"), "--adjacency", &p("data/adjacency.csv"),
                "--centroids", &p("data/centroids.csv"), "--burnin", "200", "--keep", "200", "--chains", "2",
                "--seed", "5", "--out", &p(&format!("{model}_{out}")),
            ]);
        }
        match files_identical(&d.join(format!("{model}_a")), &d.join(format!("{model}_b"))) {
            Ok(n) => checks.push(format!("fit {model}: {n} files identical")),
            Err(e) => {
                pass = false;
                checks.push(format!("fit {model}: {e}"));
            }
        }
    }
    for out in ["sa", "sb"] {
        run(&[
            "simulate", "--scenarios", "1,5", "--e-ranges", "10:30", "--models", "cluster1,rlm", "--replicates", "2",
            "--burnin", "100", "--keep", "100", "--seed", "3", "--omit-runtime", "--out", &p(out),
        ]);
    }
    match files_identical(&d.join("sa"), &d.join("sb")) {
        Ok(n) => checks.push(format!("simulate: {n} files identical")),
        Err(e) => {
            pass = false;
            checks.push(format!("simulate: {e}"));
        }
    }
    Outcome {
        id: 10,
        title: "reruns with identical flags and seed are byte-identical",
        pass,
        detail: checks.join("; "),
    }
}

#[test]
fn acceptance() {
    let mut outcomes = Vec::new();

    let (null_study, t1) = study(1, &["cluster1", "cluster2", "kh", "rlm"], 101);
    let (rec_study, t2) = study(3, &["cluster1", "cluster2"], 103);
    let (strong_study, t3) = study(5, &["cluster2", "rlm"], 105);
    let rand = |r: &stcluster::simulation::StudyRow| r.rand;

    let r1 = mean_of(&null_study, 1, "cluster1", rand);
    let r2 = mean_of(&null_study, 1, "cluster2", rand);
    outcomes.push(Outcome {
        id: 1,
        title: "null-scenario specificity, Rand(Model-1, Model-2) >= 0.95",
        pass: r1 >= NULL_RAND_MIN && r2 >= NULL_RAND_MIN && t1 <= STUDY_BUDGET_S,
        detail: format!(
            "Model-1 {r1:.4}, Model-2 {r2:.4} over {STUDY_REPLICATES} replicates; study wall time {t1:.0}s (budget {STUDY_BUDGET_S:.0}s)"
        ),
    });

    let c1 = mean_of(&rec_study, 3, "cluster1", rand);
    let c2 = mean_of(&rec_study, 3, "cluster2", rand);
    outcomes.push(Outcome {
        id: 2,
        title: "cluster recovery in scenario 3, Rand >= 0.95",
        pass: c1 >= RECOVERY_RAND_MIN && c2 >= RECOVERY_RAND_MIN,
        detail: format!("Model-1 {c1:.4}, Model-2 {c2:.4}; wall time {t2:.0}s"),
    });

    let kh = mean_of(&null_study, 1, "kh", rand);
    let rlm = mean_of(&null_study, 1, "rlm", rand);
    outcomes.push(Outcome {
        id: 3,
        title: "post-hoc classification inferior under the null (margin >= 0.1)",
        pass: r1 - kh >= POSTHOC_MARGIN && r1 - rlm >= POSTHOC_MARGIN,
        detail: format!("Model-1 {r1:.4} vs KH {kh:.4}, RLM {rlm:.4}"),
    });

    let (diff, se, wins) = paired(&null_study, 1, "cluster2", "cluster1");
    let e1 = mean_of(&null_study, 1, "cluster1", |r| r.rmse);
    let e2 = mean_of(&null_study, 1, "cluster2", |r| r.rmse);
    outcomes.push(Outcome {
        id: 4,
        title: "smoothing lowers null RMSE, Model-2 < Model-1",
        pass: e2 < e1,
        detail: format!(
            "RMSE Model-2 {e2:.4} vs Model-1 {e1:.4}; paired diff {diff:.4} (SE {se:.4}), Model-2 better in {wins}/{STUDY_REPLICATES}"
        ),
    });

    let (diff, se, wins) = paired(&strong_study, 5, "cluster2", "rlm");
    let s2 = mean_of(&strong_study, 5, "cluster2", |r| r.rmse);
    let sr = mean_of(&strong_study, 5, "rlm", |r| r.rmse);
    outcomes.push(Outcome {
        id: 5,
        title: "clustering lowers RMSE in scenario 5, Model-2 < RLM",
        pass: s2 < sr,
        detail: format!(
            "RMSE Model-2 {s2:.4} vs RLM {sr:.4}; paired diff {diff:.4} (SE {se:.4}), Model-2 better in {wins}/{STUDY_REPLICATES}; wall time {t3:.0}s"
        ),
    });

    outcomes.push(criterion_6());
    outcomes.push(criterion_7());
    outcomes.push(criterion_8());
    outcomes.push(criterion_9(&[&null_study, &rec_study, &strong_study]));
    outcomes.push(criterion_10());

    report(&outcomes);
    let failed: Vec<usize> = outcomes.iter().filter(|o| !o.pass).map(|o| o.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
