//! Model-fit and evaluation metrics.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::StDataset;
use crate::engine::{deviance, FitResult};
use crate::error::{Error, Result};
use crate::stats::{log_sum_exp, poisson_log_pmf};

/// Floor applied to a cell's conditional predictive ordinate.
pub const CPO_FLOOR: f64 = 1e-300;

const EM_TOLERANCE: f64 = 1e-8;
const EM_MAX_ITER: usize = 500;
const EM_RESTARTS: usize = 5;
const EM_SEED: u64 = 0x5eed;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelFitStats {
    pub dic: f64,
    pub pd: f64,
    pub mean_deviance: f64,
    pub lmpl: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dic {
    pub dic: f64,
    pub pd: f64,
    pub mean_deviance: f64,
}

/// DIC with `pd = mean(D) - D(mean theta)`, where the plug-in uses the
/// posterior mean risk of every cell. `theta_samples` is draw-major.
pub fn compute_dic(deviance_samples: &[f64], theta_samples: &[f64], data: &StDataset) -> Result<Dic> {
    let n_cells = data.n_cells();
    let n = deviance_samples.len();
    if n == 0 || theta_samples.len() != n * n_cells {
        return Err(Error::ShapeMismatch(theta_samples.len(), n * n_cells));
    }
    let mut theta_bar = vec![0.0; n_cells];
    for draw in theta_samples.chunks_exact(n_cells) {
        for (acc, &v) in theta_bar.iter_mut().zip(draw) {
            *acc += v;
        }
    }
    theta_bar.iter_mut().for_each(|v| *v /= n as f64);
    let mean_deviance = deviance_samples.iter().sum::<f64>() / n as f64;
    let pd = mean_deviance - deviance(data, &theta_bar);
    Ok(Dic {
        dic: mean_deviance + pd,
        pd,
        mean_deviance,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lmpl {
    pub lmpl: f64,
    /// Cells whose CPO had to be floored at [`CPO_FLOOR`].
    pub zero_likelihood_cells: Vec<usize>,
}

/// Sum of log CPOs with the harmonic-mean estimator
/// `CPO = [mean_s 1 / p(y | theta_s)]^-1`, evaluated in log space.
pub fn compute_lmpl(theta_samples: &[f64], data: &StDataset) -> Result<Lmpl> {
    let n_cells = data.n_cells();
    if theta_samples.is_empty() || theta_samples.len() % n_cells != 0 {
        return Err(Error::ShapeMismatch(theta_samples.len(), n_cells));
    }
    let n = theta_samples.len() / n_cells;
    let floor = CPO_FLOOR.ln();
    let mut neg_loglik = vec![0.0; n];
    let mut lmpl = 0.0;
    let mut zero_likelihood_cells = Vec::new();
    for cell in 0..n_cells {
        let (y, e) = (data.y()[cell], data.e()[cell]);
        for (s, slot) in neg_loglik.iter_mut().enumerate() {
            *slot = -poisson_log_pmf(y, e * theta_samples[s * n_cells + cell]);
        }
        let log_cpo = -(log_sum_exp(&neg_loglik) - (n as f64).ln());
        if log_cpo.is_nan() || log_cpo < floor {
            zero_likelihood_cells.push(cell);
            lmpl += floor;
        } else {
            lmpl += log_cpo;
        }
    }
    if !zero_likelihood_cells.is_empty() {
        log::warn!(
            "{} cell(s) had vanishing predictive likelihood; CPO floored at {CPO_FLOOR:e}",
            zero_likelihood_cells.len()
        );
    }
    Ok(Lmpl {
        lmpl,
        zero_likelihood_cells,
    })
}

pub fn model_fit_stats(fit: &FitResult, data: &StDataset) -> Result<ModelFitStats> {
    let dic = compute_dic(&fit.deviance, &fit.theta, data)?;
    let lmpl = compute_lmpl(&fit.theta, data)?;
    Ok(ModelFitStats {
        dic: dic.dic,
        pd: dic.pd,
        mean_deviance: dic.mean_deviance,
        lmpl: lmpl.lmpl,
    })
}

pub fn rmse(theta_hat: &[f64], theta_true: &[f64]) -> Result<f64> {
    if theta_hat.len() != theta_true.len() || theta_hat.is_empty() {
        return Err(Error::ShapeMismatch(theta_hat.len(), theta_true.len()));
    }
    let ss: f64 = theta_hat.iter().zip(theta_true).map(|(a, b)| (a - b).powi(2)).sum();
    Ok((ss / theta_hat.len() as f64).sqrt())
}

fn pairs(n: u64) -> f64 {
    (n * n.saturating_sub(1) / 2) as f64
}

/// Proportion of cell pairs on which two partitions agree (both together or
/// both apart), from the label contingency table.
pub fn rand_index(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::ShapeMismatch(a.len(), b.len()));
    }
    let n = a.len() as u64;
    if n < 2 {
        return Ok(1.0);
    }
    let mut joint: HashMap<(usize, usize), u64> = HashMap::new();
    let mut rows: HashMap<usize, u64> = HashMap::new();
    let mut cols: HashMap<usize, u64> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *joint.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    let together_both: f64 = joint.values().map(|&c| pairs(c)).sum();
    let together_a: f64 = rows.values().map(|&c| pairs(c)).sum();
    let together_b: f64 = cols.values().map(|&c| pairs(c)).sum();
    let total = pairs(n);
    let apart_both = total - together_a - together_b + together_both;
    Ok((together_both + apart_both) / total)
}

/// One-dimensional Gaussian mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct Mixture {
    pub weights: Vec<f64>,
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
    pub log_likelihood: f64,
    pub converged: bool,
}

impl Mixture {
    pub fn k(&self) -> usize {
        self.weights.len()
    }

    pub fn bic(&self, n: usize) -> f64 {
        let params = (3 * self.k() - 1) as f64;
        -2.0 * self.log_likelihood + params * (n as f64).ln()
    }

    fn log_joint(&self, x: f64, out: &mut [f64]) {
        for (j, slot) in out.iter_mut().enumerate() {
            let v = self.variances[j];
            *slot = self.weights[j].ln() - 0.5 * (2.0 * std::f64::consts::PI * v).ln() - (x - self.means[j]).powi(2) / (2.0 * v);
        }
    }

    /// Index of the maximum-responsibility component of `x`.
    pub fn assign(&self, x: f64) -> usize {
        let mut lj = vec![0.0; self.k()];
        self.log_joint(x, &mut lj);
        lj.iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(j, _)| j)
            .unwrap_or(0)
    }
}

/// k-means++ style seeding: first centre uniform, later centres drawn with
/// probability proportional to squared distance to the nearest centre.
fn seed_means<R: Rng>(x: &[f64], k: usize, rng: &mut R) -> Vec<f64> {
    let mut means = vec![x[rng.random_range(0..x.len())]];
    let mut d2 = vec![0.0; x.len()];
    while means.len() < k {
        for (slot, &v) in d2.iter_mut().zip(x) {
            *slot = means.iter().map(|m| (v - m).powi(2)).fold(f64::INFINITY, f64::min);
        }
        let total: f64 = d2.iter().sum();
        if total <= 0.0 {
            means.push(x[rng.random_range(0..x.len())]);
            continue;
        }
        let mut u = rng.random::<f64>() * total;
        let mut pick = x.len() - 1;
        for (i, &w) in d2.iter().enumerate() {
            if u < w {
                pick = i;
                break;
            }
            u -= w;
        }
        means.push(x[pick]);
    }
    means
}

/// Expectation-maximisation from the given initial means.
pub fn fit_mixture(x: &[f64], initial_means: &[f64], variance_floor: f64) -> Mixture {
    let n = x.len();
    let k = initial_means.len();
    let mean_all = x.iter().sum::<f64>() / n as f64;
    let var_all = (x.iter().map(|v| (v - mean_all).powi(2)).sum::<f64>() / n as f64).max(variance_floor);
    let mut mix = Mixture {
        weights: vec![1.0 / k as f64; k],
        means: initial_means.to_vec(),
        variances: vec![var_all; k],
        log_likelihood: f64::NEG_INFINITY,
        converged: false,
    };
    let mut resp = vec![0.0; n * k];
    let mut lj = vec![0.0; k];
    for _ in 0..EM_MAX_ITER {
        // E step
        let mut ll = 0.0;
        for (i, &v) in x.iter().enumerate() {
            mix.log_joint(v, &mut lj);
            let lse = log_sum_exp(&lj);
            ll += lse;
            for j in 0..k {
                resp[i * k + j] = (lj[j] - lse).exp();
            }
        }
        let delta = (ll - mix.log_likelihood).abs();
        mix.log_likelihood = ll;
        if delta < EM_TOLERANCE {
            mix.converged = true;
            break;
        }
        // M step
        for j in 0..k {
            let nj: f64 = (0..n).map(|i| resp[i * k + j]).sum();
            if nj <= 1e-12 {
                mix.weights[j] = 1e-12;
                continue;
            }
            let mean = (0..n).map(|i| resp[i * k + j] * x[i]).sum::<f64>() / nj;
            let var = (0..n).map(|i| resp[i * k + j] * (x[i] - mean).powi(2)).sum::<f64>() / nj;
            mix.weights[j] = nj / n as f64;
            mix.means[j] = mean;
            mix.variances[j] = var.max(variance_floor);
        }
    }
    mix
}

/// Outcome of [`posthoc_classify`].
#[derive(Debug, Clone, PartialEq)]
pub struct PosthocClassification {
    /// Labels `1..=k`, ordered by component mean.
    pub labels: Vec<usize>,
    pub k: usize,
    /// BIC for `k = 1..=max_components`.
    pub bic: Vec<f64>,
    /// False when some mixture size never met the EM tolerance.
    pub converged: bool,
}

/// Classifies cells by a BIC-selected 1-D Gaussian mixture on `log theta_hat`.
pub fn posthoc_classify(theta_hat: &[f64], max_components: usize) -> Result<PosthocClassification> {
    if theta_hat.is_empty() {
        return Err(Error::ShapeMismatch(0, 1));
    }
    if let Some(&bad) = theta_hat.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidConfig(format!("risk estimates must be positive and finite, got {bad}")));
    }
    let x: Vec<f64> = theta_hat.iter().map(|v| v.ln()).collect();
    let n = x.len();
    let (lo, hi) = x
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    let span = hi - lo;
    let max_k = max_components.max(1).min(n);
    let variance_floor = (1e-6 * span * span).max(1e-12);

    let mut rng = ChaCha8Rng::seed_from_u64(EM_SEED);
    let mut bic = Vec::with_capacity(max_k);
    let mut best: Option<(f64, Mixture)> = None;
    let mut converged = true;
    for k in 1..=max_k {
        let mut candidate: Option<Mixture> = None;
        for attempt in 0..=EM_RESTARTS {
            let mut means = seed_means(&x, k, &mut rng);
            if attempt > 0 {
                let jitter = 0.05 * span.max(1e-6);
                means.iter_mut().for_each(|m| *m += jitter * (rng.random::<f64>() - 0.5));
            }
            let mix = fit_mixture(&x, &means, variance_floor);
            let done = mix.converged;
            if candidate
                .as_ref()
                .is_none_or(|c| mix.log_likelihood > c.log_likelihood)
            {
                candidate = Some(mix);
            }
            if done {
                break;
            }
        }
        let mix = candidate.expect("at least one EM attempt");
        if !mix.converged {
            converged = false;
            log::warn!("EM did not converge for k = {k}; using best of {} attempts", EM_RESTARTS + 1);
        }
        let b = if span == 0.0 && k > 1 { f64::INFINITY } else { mix.bic(n) };
        bic.push(b);
        if best.as_ref().is_none_or(|(bb, _)| b < *bb) {
            best = Some((b, mix));
        }
    }
    let (_, mix) = best.expect("k = 1 always fitted");
    let mut order: Vec<usize> = (0..mix.k()).collect();
    order.sort_by(|&a, &b| mix.means[a].total_cmp(&mix.means[b]));
    let mut rank = vec![0; mix.k()];
    for (r, &j) in order.iter().enumerate() {
        rank[j] = r + 1;
    }
    let raw: Vec<usize> = x.iter().map(|&v| rank[mix.assign(v)]).collect();
    // Relabel so that labels are contiguous among the components actually used.
    let mut used: Vec<usize> = raw.clone();
    used.sort_unstable();
    used.dedup();
    let labels = raw
        .iter()
        .map(|l| used.binary_search(l).expect("label present") + 1)
        .collect();
    Ok(PosthocClassification {
        labels,
        k: used.len(),
        bic,
        converged,
    })
}
