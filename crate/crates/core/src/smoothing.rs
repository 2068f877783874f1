//! Smooth space-time random effects `phi_it` added to the log-risk.
//!
//! Four variants: none, a spatio-temporal autoregressive Leroux CAR,
//! independent Leroux CARs per period, and a Gaussian-kernel convolution of
//! independent latent amplitudes.

use std::f64::consts::PI;

use rand::Rng;

use crate::dataset::StDataset;
use crate::error::{Error, Result};
use crate::graph::{kernel_weights, leroux_log_det, leroux_precision, ArealGraph, KernelMatrix, SparsePrecision};
use crate::stats::{poisson_kernel, sample_inverse_gamma, sample_truncated_normal, std_normal};
use crate::tuning::ProposalScales;

/// Inverse-gamma hyperparameters of `tau2`.
pub const TAU2_PRIOR: (f64, f64) = (0.001, 0.001);

const INITIAL_TAU2: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SmoothVariant {
    /// `phi` fixed at zero.
    None,
    /// `phi_t | phi_{t-1} ~ N(gamma phi_{t-1}, tau2 Q(W, rho)^-1)`.
    Ar1Leroux,
    /// The autoregressive model with `gamma = 0`.
    CarPerPeriod,
    /// `phi_t = K(rho) X_t`, `X_jt ~ N(0, tau2)`.
    Convolution,
}

impl SmoothVariant {
    pub fn name(self) -> &'static str {
        match self {
            SmoothVariant::None => "none",
            SmoothVariant::Ar1Leroux => "ar1_leroux",
            SmoothVariant::CarPerPeriod => "car_per_period",
            SmoothVariant::Convolution => "convolution",
        }
    }

    fn is_leroux(self) -> bool {
        matches!(self, SmoothVariant::Ar1Leroux | SmoothVariant::CarPerPeriod)
    }
}

/// Tuned proposal scales used by the smoothing updates.
#[derive(Debug, Clone)]
pub struct SmoothScales {
    /// Single-site `phi_it` (Leroux) or `X_jt` (convolution) updates.
    pub site: ProposalScales,
    pub rho: ProposalScales,
}

impl SmoothScales {
    pub fn new(variant: SmoothVariant) -> Self {
        let rho_sd = if variant == SmoothVariant::Convolution { 0.5 } else { 0.05 };
        SmoothScales {
            site: ProposalScales::block("phi", 0.1),
            rho: ProposalScales::scalar("rho", rho_sd),
        }
    }

    pub fn all_mut(&mut self) -> [&mut ProposalScales; 2] {
        [&mut self.site, &mut self.rho]
    }
}

#[derive(Debug, Clone)]
pub struct SmoothState {
    variant: SmoothVariant,
    n_areas: usize,
    n_periods: usize,
    /// Area-major, `cell = area * n_periods + period`.
    phi: Vec<f64>,
    pub tau2: f64,
    rho: f64,
    pub gamma: f64,
    /// Latent amplitudes, convolution only (same layout as `phi`).
    x: Vec<f64>,
    /// Upper bound of the bandwidth prior, convolution only.
    p: f64,
    precision: Option<SparsePrecision>,
    laplacian_eigenvalues: Vec<f64>,
    kernel: Option<KernelMatrix>,
}

impl SmoothState {
    /// Starting state: `phi = 0`, `tau2 = 0.1`, `rho = 0.5` (Leroux) or the
    /// squared mean nearest-centroid distance (convolution), `gamma = 0.5` for
    /// the autoregressive variant.
    ///
    /// `p_override` replaces the convolution default `P = (max distance)^2`.
    pub fn new(variant: SmoothVariant, graph: &ArealGraph, n_periods: usize, p_override: Option<f64>) -> Result<Self> {
        let n = graph.n_areas();
        let mut state = SmoothState {
            variant,
            n_areas: n,
            n_periods,
            phi: vec![0.0; n * n_periods],
            tau2: INITIAL_TAU2,
            rho: 0.0,
            gamma: 0.0,
            x: Vec::new(),
            p: 0.0,
            precision: None,
            laplacian_eigenvalues: Vec::new(),
            kernel: None,
        };
        match variant {
            SmoothVariant::None => {}
            SmoothVariant::Ar1Leroux | SmoothVariant::CarPerPeriod => {
                state.rho = 0.5;
                if variant == SmoothVariant::Ar1Leroux {
                    state.gamma = 0.5;
                }
                state.laplacian_eigenvalues = graph.laplacian_eigenvalues();
                state.precision = Some(leroux_precision(graph, state.rho)?);
            }
            SmoothVariant::Convolution => {
                let centroids = graph.centroids().ok_or(Error::MissingCentroids)?;
                let max_d = graph.max_distance()?;
                state.p = match p_override {
                    Some(p) if p > 0.0 => p,
                    Some(p) => return Err(Error::InvalidConfig(format!("bandwidth bound P = {p} must be positive"))),
                    None => (max_d * max_d).max(f64::MIN_POSITIVE),
                };
                let nearest: f64 = (0..n)
                    .map(|i| {
                        (0..n)
                            .filter(|&j| j != i)
                            .map(|j| crate::graph::euclidean(centroids[i], centroids[j]))
                            .fold(f64::INFINITY, f64::min)
                    })
                    .filter(|d| d.is_finite())
                    .sum::<f64>()
                    / n as f64;
                state.rho = (nearest * nearest).clamp(f64::MIN_POSITIVE, state.p);
                if !(state.rho > 0.0) {
                    state.rho = state.p / 2.0;
                }
                state.x = vec![0.0; n * n_periods];
                state.kernel = Some(kernel_weights(centroids, state.rho)?);
            }
        }
        Ok(state)
    }

    pub fn variant(&self) -> SmoothVariant {
        self.variant
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn kernel(&self) -> Option<&KernelMatrix> {
        self.kernel.as_ref()
    }

    pub fn precision(&self) -> Option<&SparsePrecision> {
        self.precision.as_ref()
    }

    pub fn laplacian_eigenvalues(&self) -> &[f64] {
        &self.laplacian_eigenvalues
    }

    /// Sets `rho`, rebuilding the cached precision or kernel matrix.
    pub fn set_rho(&mut self, graph: &ArealGraph, rho: f64) -> Result<()> {
        match self.variant {
            SmoothVariant::None => return Err(self.mismatch("set_rho")),
            SmoothVariant::Ar1Leroux | SmoothVariant::CarPerPeriod => {
                self.precision = Some(leroux_precision(graph, rho)?);
            }
            SmoothVariant::Convolution => {
                if !(rho > 0.0 && rho <= self.p) {
                    return Err(Error::RhoOutOfRange(rho, "(0, P]"));
                }
                let centroids = graph.centroids().ok_or(Error::MissingCentroids)?;
                self.kernel = Some(kernel_weights(centroids, rho)?);
                self.recompute_phi_from_x();
            }
        }
        self.rho = rho;
        Ok(())
    }

    /// Replaces `phi` directly (Leroux variants).
    pub fn set_phi(&mut self, phi: Vec<f64>) -> Result<()> {
        if phi.len() != self.phi.len() {
            return Err(Error::ShapeMismatch(phi.len(), self.phi.len()));
        }
        if !self.variant.is_leroux() {
            return Err(self.mismatch("set_phi"));
        }
        self.phi = phi;
        Ok(())
    }

    /// Replaces the latent amplitudes (convolution) and recomputes `phi`.
    pub fn set_x(&mut self, x: Vec<f64>) -> Result<()> {
        if self.variant != SmoothVariant::Convolution {
            return Err(self.mismatch("set_x"));
        }
        if x.len() != self.phi.len() {
            return Err(Error::ShapeMismatch(x.len(), self.phi.len()));
        }
        self.x = x;
        self.recompute_phi_from_x();
        Ok(())
    }

    fn mismatch(&self, op: &'static str) -> Error {
        Error::VariantMismatch {
            op,
            variant: self.variant.name(),
        }
    }

    #[inline]
    fn cell(&self, area: usize, period: usize) -> usize {
        area * self.n_periods + period
    }

    /// `phi` for period `t` as a dense area vector.
    pub fn phi_period(&self, t: usize) -> Vec<f64> {
        (0..self.n_areas).map(|i| self.phi[self.cell(i, t)]).collect()
    }

    /// Autoregressive innovation `phi_t - gamma phi_{t-1}` for period `t`.
    fn innovation(&self, t: usize) -> Vec<f64> {
        (0..self.n_areas)
            .map(|i| {
                let c = self.cell(i, t);
                if t == 0 {
                    self.phi[c]
                } else {
                    self.phi[c] - self.gamma * self.phi[c - 1]
                }
            })
            .collect()
    }

    /// `sum_t r_t' L r_t` and `sum_t r_t' r_t` for the innovations `r_t`,
    /// where `L` is the graph Laplacian. `Q(rho) = rho L + (1 - rho) I`, so
    /// the quadratic form at any `rho` is a linear combination of the two.
    fn innovation_quadratics(&self, graph: &ArealGraph) -> (f64, f64) {
        let mut lap = 0.0;
        let mut sq = 0.0;
        for t in 0..self.n_periods {
            let r = self.innovation(t);
            for &(i, j) in graph.edges() {
                lap += (r[i] - r[j]).powi(2);
            }
            sq += r.iter().map(|v| v * v).sum::<f64>();
        }
        (lap, sq)
    }

    fn leroux_quadratic(&self, graph: &ArealGraph, rho: f64) -> f64 {
        let (lap, sq) = self.innovation_quadratics(graph);
        rho * lap + (1.0 - rho) * sq
    }

    /// Rebuild `phi = K X` for every period.
    pub fn recompute_phi_from_x(&mut self) {
        let Some(kernel) = &self.kernel else { return };
        let n = self.n_areas;
        let t_len = self.n_periods;
        let mut xt = vec![0.0; n];
        let mut out = vec![0.0; n];
        for t in 0..t_len {
            for (j, slot) in xt.iter_mut().enumerate() {
                *slot = self.x[j * t_len + t];
            }
            kernel.apply(&xt, &mut out);
            for (i, v) in out.iter().enumerate() {
                self.phi[i * t_len + t] = *v;
            }
        }
    }

    /// Subtract each period's mean from `phi` (and from `X` for the
    /// convolution, whose rows of `K` sum to one).
    pub fn center_per_period(&mut self) {
        if self.variant == SmoothVariant::None {
            return;
        }
        let n = self.n_areas as f64;
        for t in 0..self.n_periods {
            let mean = (0..self.n_areas).map(|i| self.phi[self.cell(i, t)]).sum::<f64>() / n;
            for i in 0..self.n_areas {
                let c = self.cell(i, t);
                self.phi[c] -= mean;
                if self.variant == SmoothVariant::Convolution {
                    self.x[c] -= mean;
                }
            }
        }
        if self.variant == SmoothVariant::Convolution {
            self.recompute_phi_from_x();
        }
    }

    /// Subtract the overall mean from `phi`, returning it.
    pub fn center_overall(&mut self) -> f64 {
        let mean = self.phi.iter().sum::<f64>() / self.phi.len() as f64;
        self.phi.iter_mut().for_each(|v| *v -= mean);
        if self.variant == SmoothVariant::Convolution {
            self.x.iter_mut().for_each(|v| *v -= mean);
            self.recompute_phi_from_x();
        }
        mean
    }

    /// Prior precision and linear coefficient of `phi_it` given everything
    /// else, so that the log prior is `-(p x^2 - 2 b x) / (2 tau2)` + const.
    fn site_prior_coefficients(&self, graph: &ArealGraph, area: usize, period: usize) -> (f64, f64) {
        let q = self.precision.as_ref().expect("Leroux precision cached");
        let qii = q.diagonal(area);
        let gamma = self.gamma;
        let t_len = self.n_periods;
        let rho = self.rho;
        let innov = |j: usize, t: usize| {
            let c = j * t_len + t;
            if t == 0 {
                self.phi[c]
            } else {
                self.phi[c] - gamma * self.phi[c - 1]
            }
        };
        // sum over neighbours j of Q_ij r_jt, with Q_ij = -rho
        let s = |t: usize| -rho * graph.neighbors(area).iter().map(|&j| innov(j, t)).sum::<f64>();
        let c = area * t_len + period;
        let mut precision = qii;
        let mut linear = -s(period);
        if period > 0 {
            linear += qii * gamma * self.phi[c - 1];
        }
        if period + 1 < t_len && gamma != 0.0 {
            precision += qii * gamma * gamma;
            linear += gamma * (qii * self.phi[c + 1] + s(period + 1));
        }
        (precision, linear)
    }

    /// Conditional prior mean and variance of `phi_it` (Leroux variants).
    pub fn site_conditional(&self, graph: &ArealGraph, area: usize, period: usize) -> Result<(f64, f64)> {
        if !self.variant.is_leroux() {
            return Err(self.mismatch("site_conditional"));
        }
        let (p, b) = self.site_prior_coefficients(graph, area, period);
        Ok((b / p, self.tau2 / p))
    }
}

/// Joint log prior density of the smoothing component, including all
/// normalizing terms that depend on `(tau2, rho, gamma)`.
pub fn phi_log_prior(state: &SmoothState, graph: &ArealGraph) -> f64 {
    let nt = (state.n_areas * state.n_periods) as f64;
    match state.variant {
        SmoothVariant::None => 0.0,
        SmoothVariant::Ar1Leroux | SmoothVariant::CarPerPeriod => {
            let log_det = leroux_log_det(&state.laplacian_eigenvalues, state.rho);
            let quad = state.leroux_quadratic(graph, state.rho);
            -0.5 * nt * (2.0 * PI * state.tau2).ln() + 0.5 * state.n_periods as f64 * log_det
                - quad / (2.0 * state.tau2)
        }
        SmoothVariant::Convolution => {
            let ss: f64 = state.x.iter().map(|v| v * v).sum();
            -0.5 * nt * (2.0 * PI * state.tau2).ln() - ss / (2.0 * state.tau2)
        }
    }
}

/// One single-site random-walk Metropolis sweep over `phi` (or over `X` for
/// the convolution) without centering. `offset[cell]` is the rest of the
/// linear predictor.
pub fn sweep_phi<R: Rng + ?Sized>(
    state: &mut SmoothState,
    data: &StDataset,
    graph: &ArealGraph,
    offset: &[f64],
    scale: &mut ProposalScales,
    rng: &mut R,
) {
    match state.variant {
        SmoothVariant::None => {}
        SmoothVariant::Ar1Leroux | SmoothVariant::CarPerPeriod => sweep_leroux(state, data, graph, offset, scale, rng),
        SmoothVariant::Convolution => sweep_convolution(state, data, offset, scale, rng),
    }
}

/// [`sweep_phi`] followed by per-period centering.
pub fn sample_phi<R: Rng + ?Sized>(
    state: &mut SmoothState,
    data: &StDataset,
    graph: &ArealGraph,
    offset: &[f64],
    scale: &mut ProposalScales,
    rng: &mut R,
) {
    sweep_phi(state, data, graph, offset, scale, rng);
    state.center_per_period();
}

fn sweep_leroux<R: Rng + ?Sized>(
    state: &mut SmoothState,
    data: &StDataset,
    graph: &ArealGraph,
    offset: &[f64],
    scale: &mut ProposalScales,
    rng: &mut R,
) {
    let sd = scale.sd(0);
    let inv_2tau2 = 1.0 / (2.0 * state.tau2);
    for area in 0..state.n_areas {
        for period in 0..state.n_periods {
            let c = state.cell(area, period);
            let (p, b) = state.site_prior_coefficients(graph, area, period);
            let y = data.y()[c] as f64;
            let e = data.e()[c];
            let current = state.phi[c];
            let proposal = current + sd * std_normal(rng);
            let target = |x: f64| poisson_kernel(y, e, offset[c] + x) - (p * x * x - 2.0 * b * x) * inv_2tau2;
            let accept = rng.random::<f64>().ln() < target(proposal) - target(current);
            if accept {
                state.phi[c] = proposal;
            }
            scale.record(0, accept);
        }
    }
}

fn sweep_convolution<R: Rng + ?Sized>(
    state: &mut SmoothState,
    data: &StDataset,
    offset: &[f64],
    scale: &mut ProposalScales,
    rng: &mut R,
) {
    let sd = scale.sd(0);
    let t_len = state.n_periods;
    let inv_2tau2 = 1.0 / (2.0 * state.tau2);
    let kernel = state.kernel.take().expect("kernel cached");
    for j in 0..state.n_areas {
        for t in 0..t_len {
            let cj = j * t_len + t;
            let current = state.x[cj];
            let step = sd * std_normal(rng);
            let proposal = current + step;
            let mut log_ratio = -(proposal * proposal - current * current) * inv_2tau2;
            for &(i, w) in kernel.col(j) {
                let c = i * t_len + t;
                let eta = offset[c] + state.phi[c];
                log_ratio += poisson_kernel(data.y()[c] as f64, data.e()[c], eta + w * step)
                    - poisson_kernel(data.y()[c] as f64, data.e()[c], eta);
            }
            let accept = rng.random::<f64>().ln() < log_ratio;
            if accept {
                state.x[cj] = proposal;
                for &(i, w) in kernel.col(j) {
                    state.phi[i * t_len + t] += w * step;
                }
            }
            scale.record(0, accept);
        }
    }
    state.kernel = Some(kernel);
    state.recompute_phi_from_x();
}

/// Shape and rate of the inverse-gamma full conditional of `tau2`.
pub fn tau2_posterior(state: &SmoothState, graph: &ArealGraph, a: f64, b: f64) -> Result<(f64, f64)> {
    let shape = a + (state.n_areas * state.n_periods) as f64 / 2.0;
    let ss = match state.variant {
        SmoothVariant::None => return Err(state.mismatch("sample_tau2")),
        SmoothVariant::Ar1Leroux | SmoothVariant::CarPerPeriod => state.leroux_quadratic(graph, state.rho),
        SmoothVariant::Convolution => state.x.iter().map(|v| v * v).sum(),
    };
    Ok((shape, b + 0.5 * ss))
}

pub fn sample_tau2<R: Rng + ?Sized>(
    state: &mut SmoothState,
    graph: &ArealGraph,
    a: f64,
    b: f64,
    rng: &mut R,
) -> Result<f64> {
    let (shape, rate) = tau2_posterior(state, graph, a, b)?;
    state.tau2 = sample_inverse_gamma(shape, rate, rng);
    Ok(state.tau2)
}

/// Mean and variance of the untruncated Gaussian full conditional of
/// `gamma`; `None` when `phi` carries no information about it.
pub fn gamma_conditional(state: &SmoothState) -> Option<(f64, f64)> {
    let q = state.precision.as_ref()?;
    let mut lagged = 0.0;
    let mut cross = 0.0;
    for t in 1..state.n_periods {
        let prev = state.phi_period(t - 1);
        let cur = state.phi_period(t);
        lagged += q.bilinear(&prev, &prev);
        cross += q.bilinear(&prev, &cur);
    }
    (lagged > 0.0).then(|| (cross / lagged, state.tau2 / lagged))
}

/// Exact draw of the autoregressive coefficient from its Gaussian full
/// conditional truncated to `[0, 1]` (uniform when `phi` is uninformative).
pub fn sample_gamma<R: Rng + ?Sized>(state: &mut SmoothState, rng: &mut R) -> f64 {
    state.gamma = match gamma_conditional(state) {
        Some((mean, var)) => sample_truncated_normal(mean, var.sqrt(), 0.0, 1.0, rng),
        None => rng.random(),
    };
    state.gamma
}

/// Updates `rho` by random-walk Metropolis and, for the autoregressive
/// variant, draws `gamma` exactly from its truncated Gaussian conditional.
///
/// Leroux `rho` targets the `phi` prior with the determinant from the cached
/// Laplacian eigenvalues; the convolution bandwidth targets the Poisson
/// likelihood with the kernel rebuilt at the proposal.
pub fn sample_rho_gamma<R: Rng + ?Sized>(
    state: &mut SmoothState,
    data: &StDataset,
    graph: &ArealGraph,
    offset: &[f64],
    scale: &mut ProposalScales,
    rng: &mut R,
) -> Result<()> {
    match state.variant {
        SmoothVariant::None => return Err(state.mismatch("sample_rho_gamma")),
        SmoothVariant::Ar1Leroux | SmoothVariant::CarPerPeriod => {
            let proposal = state.rho + scale.sd(0) * std_normal(rng);
            let accept = proposal > 0.0 && proposal < 1.0 && {
                let (lap, sq) = state.innovation_quadratics(graph);
                let t = state.n_periods as f64;
                let target = |rho: f64| {
                    0.5 * t * leroux_log_det(&state.laplacian_eigenvalues, rho)
                        - (rho * lap + (1.0 - rho) * sq) / (2.0 * state.tau2)
                };
                rng.random::<f64>().ln() < target(proposal) - target(state.rho)
            };
            if accept {
                state.set_rho(graph, proposal)?;
            }
            scale.record(0, accept);
            if state.variant == SmoothVariant::Ar1Leroux {
                sample_gamma(state, rng);
            }
        }
        SmoothVariant::Convolution => {
            let proposal = state.rho + scale.sd(0) * std_normal(rng);
            let accept = proposal > 0.0 && proposal <= state.p && {
                let centroids = graph.centroids().ok_or(Error::MissingCentroids)?;
                let mut candidate = state.clone();
                candidate.kernel = Some(kernel_weights(centroids, proposal)?);
                candidate.rho = proposal;
                candidate.recompute_phi_from_x();
                let loglik = |phi: &[f64]| -> f64 {
                    (0..phi.len())
                        .map(|c| poisson_kernel(data.y()[c] as f64, data.e()[c], offset[c] + phi[c]))
                        .sum()
                };
                let ok = rng.random::<f64>().ln() < loglik(&candidate.phi) - loglik(&state.phi);
                if ok {
                    *state = candidate;
                }
                ok
            };
            scale.record(0, accept);
        }
    }
    Ok(())
}

/// Full smoothing update in a fixed order that leaves `phi` centred per
/// period: Leroux `phi`, `tau2`, `rho`/`gamma`; convolution `rho`, `X`, `tau2`.
pub fn update_smoothing<R: Rng + ?Sized>(
    state: &mut SmoothState,
    data: &StDataset,
    graph: &ArealGraph,
    offset: &[f64],
    scales: &mut SmoothScales,
    rng: &mut R,
) -> Result<()> {
    let (a, b) = TAU2_PRIOR;
    match state.variant {
        SmoothVariant::None => {}
        SmoothVariant::Ar1Leroux | SmoothVariant::CarPerPeriod => {
            sample_phi(state, data, graph, offset, &mut scales.site, rng);
            sample_tau2(state, graph, a, b, rng)?;
            sample_rho_gamma(state, data, graph, offset, &mut scales.rho, rng)?;
        }
        SmoothVariant::Convolution => {
            sample_rho_gamma(state, data, graph, offset, &mut scales.rho, rng)?;
            sample_phi(state, data, graph, offset, &mut scales.site, rng);
            sample_tau2(state, graph, a, b, rng)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;
    use nalgebra::{DMatrix, DVector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_node() -> ArealGraph {
        build_graph(2, &[(0, 1)]).unwrap()
    }

    #[test]
    fn none_variant_is_inert() {
        let g = two_node();
        let mut s = SmoothState::new(SmoothVariant::None, &g, 2, None).unwrap();
        assert_eq!(phi_log_prior(&s, &g), 0.0);
        let data = StDataset::from_grid(2, 2, vec![1; 4], vec![1.0; 4]).unwrap();
        let mut scale = ProposalScales::block("phi", 0.1);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        sample_phi(&mut s, &data, &g, &[0.0; 4], &mut scale, &mut rng);
        assert_eq!(s.phi(), &[0.0; 4]);
        assert!(matches!(tau2_posterior(&s, &g, 0.001, 0.001), Err(Error::VariantMismatch { .. })));
    }

    #[test]
    fn iid_limit_log_prior() {
        let g = two_node();
        let mut s = SmoothState::new(SmoothVariant::Ar1Leroux, &g, 2, None).unwrap();
        s.set_rho(&g, 0.0).unwrap();
        s.gamma = 0.0;
        s.tau2 = 0.7;
        let phi = vec![0.1, -0.4, 0.3, 0.2];
        s.set_phi(phi.clone()).unwrap();
        let iid: f64 = phi
            .iter()
            .map(|x| -0.5 * (2.0 * PI * 0.7f64).ln() - x * x / (2.0 * 0.7))
            .sum();
        assert!((phi_log_prior(&s, &g) - iid).abs() < 1e-12);
    }

    #[test]
    fn ar1_log_prior_matches_dense_mvn() {
        let g = two_node();
        let mut s = SmoothState::new(SmoothVariant::Ar1Leroux, &g, 2, None).unwrap();
        s.set_rho(&g, 0.5).unwrap();
        s.gamma = 0.5;
        s.tau2 = 1.0;
        s.set_phi(vec![1.0; 4]).unwrap();
        // dense: phi_1 ~ N(0, Q^-1), phi_2 - 0.5 phi_1 ~ N(0, Q^-1)
        let q = DMatrix::<f64>::from_row_slice(2, 2, &[1.0, -0.5, -0.5, 1.0]);
        let mvn = |r: &DVector<f64>| {
            -(2.0 * PI).ln() + 0.5 * q.determinant().ln() - 0.5 * (r.transpose() * &q * r)[(0, 0)]
        };
        let r1 = DVector::from_vec(vec![1.0, 1.0]);
        let r2 = DVector::from_vec(vec![0.5, 0.5]);
        let dense = mvn(&r1) + mvn(&r2);
        assert!((phi_log_prior(&s, &g) - dense).abs() < 1e-12);
    }

    #[test]
    fn convolution_tau2_plug_in() {
        let g = two_node().with_centroids(vec![[0.0, 0.0], [1.0, 0.0]]).unwrap();
        let mut s = SmoothState::new(SmoothVariant::Convolution, &g, 2, None).unwrap();
        s.set_x(vec![1.0, -1.0, -1.0, 1.0]).unwrap();
        let (shape, rate) = tau2_posterior(&s, &g, 0.001, 0.001).unwrap();
        assert!((shape - 2.001).abs() < 1e-12 && (rate - 2.001).abs() < 1e-12);
    }

    #[test]
    fn zero_phi_tau2_posterior() {
        let g = two_node();
        let s = SmoothState::new(SmoothVariant::CarPerPeriod, &g, 3, None).unwrap();
        assert_eq!(tau2_posterior(&s, &g, 0.001, 0.001).unwrap(), (0.001 + 3.0, 0.001));
    }

    #[test]
    fn convolution_requires_centroids() {
        assert!(matches!(
            SmoothState::new(SmoothVariant::Convolution, &two_node(), 2, None),
            Err(Error::MissingCentroids)
        ));
    }

    #[test]
    fn site_conditional_matches_gmrf_identity_for_gamma_zero() {
        let g = build_graph(3, &[(0, 1), (1, 2)]).unwrap();
        let mut s = SmoothState::new(SmoothVariant::CarPerPeriod, &g, 1, None).unwrap();
        s.set_rho(&g, 0.6).unwrap();
        s.tau2 = 0.3;
        s.set_phi(vec![0.2, -0.1, 0.5]).unwrap();
        let (m, v) = s.site_conditional(&g, 1, 0).unwrap();
        let (m2, v2) = crate::graph::full_conditional_params(&g, 0.6, 0.3, &[0.2, -0.1, 0.5], 1).unwrap();
        assert!((m - m2).abs() < 1e-14 && (v - v2).abs() < 1e-14);
    }

    #[test]
    fn rho_proposals_outside_support_rejected() {
        let g = two_node();
        let mut s = SmoothState::new(SmoothVariant::CarPerPeriod, &g, 2, None).unwrap();
        let data = StDataset::from_grid(2, 2, vec![1; 4], vec![1.0; 4]).unwrap();
        let mut scale = ProposalScales::scalar("rho", 10.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            sample_rho_gamma(&mut s, &data, &g, &[0.0; 4], &mut scale, &mut rng).unwrap();
            assert!(s.rho() > 0.0 && s.rho() < 1.0);
        }
        assert!(scale.acceptance_rate().unwrap() < 0.2);
    }
}
