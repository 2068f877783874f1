//! Comparison models without a clustering component: the main-effects plus
//! independent-interaction decomposition, and an intercept plus
//! autoregressive Leroux random effects.

use rand::Rng;

use crate::dataset::StDataset;
use crate::engine::{run_multichain, ChainRng, FitResult, McmcConfig, ModelKind, Sampler};
use crate::error::Result;
use crate::graph::ArealGraph;
use crate::smoothing::{sample_rho_gamma, sample_tau2, sweep_phi, SmoothState, SmoothVariant, TAU2_PRIOR};
use crate::stats::{poisson_kernel, sample_inverse_gamma, std_normal};
use crate::tuning::ProposalScales;

/// Prior variance of the intercept.
pub const BETA_PRIOR_VARIANCE: f64 = 1e5;

const INITIAL_VARIANCE: f64 = 0.1;

/// Fits the main-effects plus independent-interaction model.
pub fn fit_kh(data: &StDataset, graph: &ArealGraph, config: &McmcConfig) -> Result<(Vec<FitResult>, FitResult)> {
    run_multichain(ModelKind::Kh, data, graph, config)
}

/// Fits the intercept plus autoregressive Leroux model.
pub fn fit_rlm(data: &StDataset, graph: &ArealGraph, config: &McmcConfig) -> Result<(Vec<FitResult>, FitResult)> {
    run_multichain(ModelKind::Rlm, data, graph, config)
}

/// `ln(sum y / sum e)`, the maximum-likelihood intercept.
pub fn saturated_intercept(data: &StDataset) -> f64 {
    ((data.total_observed() + 0.5) / data.total_expected()).ln()
}

/// State of the decomposition
/// `ln theta_it = beta + phi_i + theta_i + alpha_t + delta_t + gamma_it`.
#[derive(Debug, Clone, PartialEq)]
pub struct KhState {
    pub beta: f64,
    /// Intrinsic CAR spatial effect.
    pub phi: Vec<f64>,
    /// Independent spatial effect.
    pub theta: Vec<f64>,
    /// First-order random-walk temporal effect.
    pub alpha: Vec<f64>,
    /// Independent temporal effect.
    pub delta: Vec<f64>,
    /// Independent interactions, area-major.
    pub gamma: Vec<f64>,
    pub tau2_phi: f64,
    pub tau2_theta: f64,
    pub tau2_alpha: f64,
    pub tau2_delta: f64,
    pub tau2_gamma: f64,
}

impl KhState {
    pub fn new(data: &StDataset) -> Self {
        let (n, t) = (data.n_areas(), data.n_periods());
        KhState {
            beta: saturated_intercept(data),
            phi: vec![0.0; n],
            theta: vec![0.0; n],
            alpha: vec![0.0; t],
            delta: vec![0.0; t],
            gamma: vec![0.0; n * t],
            tau2_phi: INITIAL_VARIANCE,
            tau2_theta: INITIAL_VARIANCE,
            tau2_alpha: INITIAL_VARIANCE,
            tau2_delta: INITIAL_VARIANCE,
            tau2_gamma: INITIAL_VARIANCE,
        }
    }

    pub fn linear_predictor(&self, out: &mut [f64]) {
        let t_len = self.alpha.len();
        for (cell, slot) in out.iter_mut().enumerate() {
            let (i, t) = (cell / t_len, cell % t_len);
            *slot = self.beta + self.phi[i] + self.theta[i] + self.alpha[t] + self.delta[t] + self.gamma[cell];
        }
    }

    /// Subtract the means of the four main effects, moving them into `beta`.
    pub fn center(&mut self) {
        let mut shift = 0.0;
        for v in [&mut self.phi, &mut self.theta, &mut self.alpha, &mut self.delta] {
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            v.iter_mut().for_each(|x| *x -= mean);
            shift += mean;
        }
        self.beta += shift;
    }
}

/// Intrinsic CAR conditional of `phi[i]`: mean of the neighbours with
/// variance `tau2 / n_i`; an island is N(0, tau2).
pub fn icar_conditional(graph: &ArealGraph, phi: &[f64], tau2: f64, i: usize) -> (f64, f64) {
    let nb = graph.neighbors(i);
    if nb.is_empty() {
        return (0.0, tau2);
    }
    let k = nb.len() as f64;
    (nb.iter().map(|&j| phi[j]).sum::<f64>() / k, tau2 / k)
}

/// First-order random-walk conditional of `alpha[t]`.
pub fn rw1_conditional(alpha: &[f64], tau2: f64, t: usize) -> (f64, f64) {
    let n = alpha.len();
    match (t > 0, t + 1 < n) {
        (true, true) => (0.5 * (alpha[t - 1] + alpha[t + 1]), tau2 / 2.0),
        (true, false) => (alpha[t - 1], tau2),
        (false, true) => (alpha[t + 1], tau2),
        (false, false) => (0.0, tau2),
    }
}

/// Inverse-gamma `(shape, rate)` for the intrinsic CAR variance: rank
/// `N - (non-singleton components)`, islands counted as proper N(0, tau2).
pub fn icar_variance_posterior(graph: &ArealGraph, phi: &[f64], a: f64, b: f64) -> (f64, f64) {
    let components = graph.connected_components();
    let improper = components.iter().filter(|c| c.len() > 1).count();
    let mut ss: f64 = graph.edges().iter().map(|&(i, j)| (phi[i] - phi[j]).powi(2)).sum();
    ss += components
        .iter()
        .filter(|c| c.len() == 1)
        .map(|c| phi[c[0]].powi(2))
        .sum::<f64>();
    (a + (graph.n_areas() - improper) as f64 / 2.0, b + 0.5 * ss)
}

pub fn rw1_variance_posterior(alpha: &[f64], a: f64, b: f64) -> (f64, f64) {
    let ss: f64 = alpha.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
    (a + (alpha.len().saturating_sub(1)) as f64 / 2.0, b + 0.5 * ss)
}

pub fn iid_variance_posterior(values: &[f64], a: f64, b: f64) -> (f64, f64) {
    (a + values.len() as f64 / 2.0, b + 0.5 * values.iter().map(|v| v * v).sum::<f64>())
}

pub struct KhSampler<'a> {
    data: &'a StDataset,
    graph: &'a ArealGraph,
    pub state: KhState,
    eta: Vec<f64>,
    beta_scale: ProposalScales,
    phi_scale: ProposalScales,
    theta_scale: ProposalScales,
    alpha_scale: ProposalScales,
    delta_scale: ProposalScales,
    gamma_scale: ProposalScales,
}

impl<'a> KhSampler<'a> {
    pub fn new(data: &'a StDataset, graph: &'a ArealGraph, config: &McmcConfig) -> Self {
        let state = KhState::new(data);
        let mut eta = vec![0.0; data.n_cells()];
        state.linear_predictor(&mut eta);
        let v = config.vector_target;
        KhSampler {
            data,
            graph,
            state,
            eta,
            beta_scale: ProposalScales::new("beta", 1, 0.01, config.scalar_target),
            phi_scale: ProposalScales::new("phi", 1, 0.05, v),
            theta_scale: ProposalScales::new("theta", 1, 0.05, v),
            alpha_scale: ProposalScales::new("alpha", 1, 0.02, v),
            delta_scale: ProposalScales::new("delta", 1, 0.02, v),
            gamma_scale: ProposalScales::new("gamma", 1, 0.1, v),
        }
    }

    /// Metropolis step for an additive effect shared by `cells`, with a
    /// Gaussian prior `N(mean, var)`. Returns the accepted increment.
    #[allow(clippy::too_many_arguments)]
    fn shared_step(
        data: &StDataset,
        eta: &mut [f64],
        cells: impl Iterator<Item = usize> + Clone,
        current: f64,
        prior: (f64, f64),
        scale: &mut ProposalScales,
        rng: &mut ChainRng,
    ) -> f64 {
        let step = scale.sd(0) * std_normal(rng);
        let proposal = current + step;
        let (mean, var) = prior;
        let mut log_ratio = -((proposal - mean).powi(2) - (current - mean).powi(2)) / (2.0 * var);
        for c in cells.clone() {
            let y = data.y()[c] as f64;
            let e = data.e()[c];
            log_ratio += poisson_kernel(y, e, eta[c] + step) - poisson_kernel(y, e, eta[c]);
        }
        let accept = rng.random::<f64>().ln() < log_ratio;
        scale.record(0, accept);
        if accept {
            for c in cells {
                eta[c] += step;
            }
            step
        } else {
            0.0
        }
    }
}

impl Sampler for KhSampler<'_> {
    fn sweep(&mut self, rng: &mut ChainRng) -> Result<()> {
        let (a, b) = TAU2_PRIOR;
        let n = self.data.n_areas();
        let t_len = self.data.n_periods();
        let data = self.data;
        let st = &mut self.state;

        st.beta += Self::shared_step(
            data,
            &mut self.eta,
            0..n * t_len,
            st.beta,
            (0.0, BETA_PRIOR_VARIANCE),
            &mut self.beta_scale,
            rng,
        );
        for i in 0..n {
            let prior = icar_conditional(self.graph, &st.phi, st.tau2_phi, i);
            let cells = (0..t_len).map(move |t| i * t_len + t);
            st.phi[i] += Self::shared_step(data, &mut self.eta, cells, st.phi[i], prior, &mut self.phi_scale, rng);
        }
        for i in 0..n {
            let cells = (0..t_len).map(move |t| i * t_len + t);
            st.theta[i] += Self::shared_step(
                data,
                &mut self.eta,
                cells,
                st.theta[i],
                (0.0, st.tau2_theta),
                &mut self.theta_scale,
                rng,
            );
        }
        for t in 0..t_len {
            let prior = rw1_conditional(&st.alpha, st.tau2_alpha, t);
            let cells = (0..n).map(move |i| i * t_len + t);
            st.alpha[t] += Self::shared_step(data, &mut self.eta, cells, st.alpha[t], prior, &mut self.alpha_scale, rng);
        }
        for t in 0..t_len {
            let cells = (0..n).map(move |i| i * t_len + t);
            st.delta[t] += Self::shared_step(
                data,
                &mut self.eta,
                cells,
                st.delta[t],
                (0.0, st.tau2_delta),
                &mut self.delta_scale,
                rng,
            );
        }
        for c in 0..n * t_len {
            st.gamma[c] += Self::shared_step(
                data,
                &mut self.eta,
                std::iter::once(c),
                st.gamma[c],
                (0.0, st.tau2_gamma),
                &mut self.gamma_scale,
                rng,
            );
        }

        let draw = |(shape, rate): (f64, f64), rng: &mut ChainRng| sample_inverse_gamma(shape, rate, rng);
        st.tau2_phi = draw(icar_variance_posterior(self.graph, &st.phi, a, b), rng);
        st.tau2_theta = draw(iid_variance_posterior(&st.theta, a, b), rng);
        if t_len > 1 {
            st.tau2_alpha = draw(rw1_variance_posterior(&st.alpha, a, b), rng);
        }
        st.tau2_delta = draw(iid_variance_posterior(&st.delta, a, b), rng);
        st.tau2_gamma = draw(iid_variance_posterior(&st.gamma, a, b), rng);

        st.center();
        st.linear_predictor(&mut self.eta);
        Ok(())
    }

    fn log_risk(&self, out: &mut [f64]) {
        out.copy_from_slice(&self.eta);
    }

    fn scales_mut(&mut self) -> Vec<&mut ProposalScales> {
        vec![
            &mut self.beta_scale,
            &mut self.phi_scale,
            &mut self.theta_scale,
            &mut self.alpha_scale,
            &mut self.delta_scale,
            &mut self.gamma_scale,
        ]
    }

    fn scales(&self) -> Vec<&ProposalScales> {
        vec![
            &self.beta_scale,
            &self.phi_scale,
            &self.theta_scale,
            &self.alpha_scale,
            &self.delta_scale,
            &self.gamma_scale,
        ]
    }

    fn scalars(&self) -> Vec<(&'static str, f64)> {
        let s = &self.state;
        vec![
            ("beta", s.beta),
            ("tau2_phi", s.tau2_phi),
            ("tau2_theta", s.tau2_theta),
            ("tau2_alpha", s.tau2_alpha),
            ("tau2_delta", s.tau2_delta),
            ("tau2_gamma", s.tau2_gamma),
        ]
    }

    fn describe(&self) -> String {
        format!("{:?}", self.scalars())
    }
}

/// Intercept plus autoregressive Leroux random effects; `phi` is centred to
/// overall mean zero with the shift moved into `beta`.
pub struct RlmSampler<'a> {
    data: &'a StDataset,
    graph: &'a ArealGraph,
    pub beta: f64,
    pub smooth: SmoothState,
    offset: Vec<f64>,
    beta_scale: ProposalScales,
    phi_scale: ProposalScales,
    rho_scale: ProposalScales,
}

impl<'a> RlmSampler<'a> {
    pub fn new(data: &'a StDataset, graph: &'a ArealGraph, config: &McmcConfig) -> Result<Self> {
        let smooth = SmoothState::new(SmoothVariant::Ar1Leroux, graph, data.n_periods(), None)?;
        let beta = saturated_intercept(data);
        Ok(RlmSampler {
            data,
            graph,
            beta,
            smooth,
            offset: vec![beta; data.n_cells()],
            beta_scale: ProposalScales::new("beta", 1, 0.01, config.scalar_target),
            phi_scale: ProposalScales::new("phi", 1, 0.1, config.vector_target),
            rho_scale: ProposalScales::new("rho", 1, 0.05, config.scalar_target),
        })
    }
}

impl Sampler for RlmSampler<'_> {
    fn sweep(&mut self, rng: &mut ChainRng) -> Result<()> {
        let (a, b) = TAU2_PRIOR;
        let phi = self.smooth.phi();
        let step = self.beta_scale.sd(0) * std_normal(rng);
        let proposal = self.beta + step;
        let mut log_ratio = -(proposal * proposal - self.beta * self.beta) / (2.0 * BETA_PRIOR_VARIANCE);
        for c in 0..self.data.n_cells() {
            let y = self.data.y()[c] as f64;
            let e = self.data.e()[c];
            log_ratio += poisson_kernel(y, e, proposal + phi[c]) - poisson_kernel(y, e, self.beta + phi[c]);
        }
        let accept = rng.random::<f64>().ln() < log_ratio;
        if accept {
            self.beta = proposal;
        }
        self.beta_scale.record(0, accept);

        self.offset.iter_mut().for_each(|o| *o = self.beta);
        sweep_phi(&mut self.smooth, self.data, self.graph, &self.offset, &mut self.phi_scale, rng);
        self.beta += self.smooth.center_overall();
        self.offset.iter_mut().for_each(|o| *o = self.beta);
        sample_tau2(&mut self.smooth, self.graph, a, b, rng)?;
        sample_rho_gamma(&mut self.smooth, self.data, self.graph, &self.offset, &mut self.rho_scale, rng)?;
        Ok(())
    }

    fn log_risk(&self, out: &mut [f64]) {
        for (slot, phi) in out.iter_mut().zip(self.smooth.phi()) {
            *slot = self.beta + phi;
        }
    }

    fn scales_mut(&mut self) -> Vec<&mut ProposalScales> {
        vec![&mut self.beta_scale, &mut self.phi_scale, &mut self.rho_scale]
    }

    fn scales(&self) -> Vec<&ProposalScales> {
        vec![&self.beta_scale, &self.phi_scale, &self.rho_scale]
    }

    fn scalars(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("beta", self.beta),
            ("tau2", self.smooth.tau2),
            ("rho", self.smooth.rho()),
            ("gamma", self.smooth.gamma),
        ]
    }

    fn describe(&self) -> String {
        format!("{:?}", self.scalars())
    }
}
