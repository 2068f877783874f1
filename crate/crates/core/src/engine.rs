//! MCMC orchestration: sweep scheduling, burn-in adaptation, retention,
//! seeding and multi-chain execution.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::baseline::{KhSampler, RlmSampler};
use crate::cluster::{self, ClusterState, SIGMA2_PRIOR};
use crate::dataset::StDataset;
use crate::error::{Error, Result};
use crate::graph::ArealGraph;
use crate::smoothing::{update_smoothing, SmoothScales, SmoothState, SmoothVariant};
use crate::stats::{median, poisson_log_pmf, quantile_sorted};
use crate::tuning::{ProposalScales, SCALAR_TARGET, VECTOR_TARGET};

/// Per-chain RNG. Chains share the seed and differ in stream.
pub type ChainRng = ChaCha8Rng;

pub fn chain_rng(seed: u64, stream: u64) -> ChainRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    /// Clustering model with the given smoothing component.
    Cluster(SmoothVariant),
    /// Main effects plus independent interactions.
    Kh,
    /// Intercept plus autoregressive Leroux random effects.
    Rlm,
}

impl ModelKind {
    pub const ALL: [ModelKind; 6] = [
        ModelKind::Kh,
        ModelKind::Rlm,
        ModelKind::Cluster(SmoothVariant::None),
        ModelKind::Cluster(SmoothVariant::Ar1Leroux),
        ModelKind::Cluster(SmoothVariant::CarPerPeriod),
        ModelKind::Cluster(SmoothVariant::Convolution),
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Cluster(SmoothVariant::None) => "cluster1",
            ModelKind::Cluster(SmoothVariant::Ar1Leroux) => "cluster2",
            ModelKind::Cluster(SmoothVariant::CarPerPeriod) => "cluster3",
            ModelKind::Cluster(SmoothVariant::Convolution) => "cluster4",
            ModelKind::Kh => "kh",
            ModelKind::Rlm => "rlm",
        }
    }

    pub fn is_cluster(self) -> bool {
        matches!(self, ModelKind::Cluster(_))
    }

    pub fn needs_centroids(self) -> bool {
        self == ModelKind::Cluster(SmoothVariant::Convolution)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|m| m.name() == s.trim())
            .ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "unknown model `{s}` (expected one of cluster1, cluster2, cluster3, cluster4, kh, rlm)"
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McmcConfig {
    pub n_burnin: usize,
    /// Post-burn-in sweeps; every `thin`-th is retained.
    pub n_keep: usize,
    pub thin: usize,
    pub n_chains: usize,
    pub seed: u64,
    /// Maximum number of risk classes.
    pub g: usize,
    /// Upper bound of the Uniform(0, M) priors on the label smoothing parameters.
    pub m: f64,
    /// Bandwidth prior bound for the convolution model; `None` uses the
    /// squared maximum centroid distance.
    pub p: Option<f64>,
    /// Sweeps between proposal adaptations during burn-in.
    pub adapt_interval: usize,
    /// Follow each single-site label sweep with a joint draw of every area's
    /// label path.
    pub z_path_updates: bool,
    pub scalar_target: f64,
    pub vector_target: f64,
}

impl Default for McmcConfig {
    fn default() -> Self {
        McmcConfig {
            n_burnin: 2000,
            n_keep: 2000,
            thin: 1,
            n_chains: 1,
            seed: 1,
            g: cluster::DEFAULT_G,
            m: cluster::DEFAULT_M,
            p: None,
            adapt_interval: 50,
            z_path_updates: true,
            scalar_target: SCALAR_TARGET,
            vector_target: VECTOR_TARGET,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if self.n_keep == 0 {
            return bad("n_keep must be positive");
        }
        if self.thin == 0 {
            return bad("thin must be at least 1");
        }
        if self.n_keep % self.thin != 0 {
            return bad("thin must divide n_keep");
        }
        if self.n_chains == 0 {
            return bad("n_chains must be at least 1");
        }
        if self.adapt_interval == 0 {
            return bad("adapt_interval must be positive");
        }
        if self.g == 0 || self.g > u8::MAX as usize {
            return bad("G must be between 1 and 255");
        }
        if !(self.m > 0.0) {
            return bad("M must be positive");
        }
        for t in [self.scalar_target, self.vector_target] {
            if !(t > 0.0 && t < 1.0) {
                return bad("target acceptance must lie in (0, 1)");
            }
        }
        Ok(())
    }

    pub fn n_samples(&self) -> usize {
        self.n_keep / self.thin
    }
}

/// One chain's sampler over a fixed dataset and graph.
pub trait Sampler {
    fn sweep(&mut self, rng: &mut ChainRng) -> Result<()>;

    /// Writes `ln theta_it` for every cell.
    fn log_risk(&self, out: &mut [f64]);

    fn scales_mut(&mut self) -> Vec<&mut ProposalScales>;

    fn scales(&self) -> Vec<&ProposalScales>;

    /// Named scalar parameters recorded as traces.
    fn scalars(&self) -> Vec<(&'static str, f64)>;

    fn labels(&self) -> Option<&[usize]> {
        None
    }

    fn lambda(&self) -> Option<&[f64]> {
        None
    }

    /// Largest absolute per-period mean of the smoothing component, for
    /// models that centre it per period.
    fn phi_period_mean_error(&self) -> Option<f64> {
        None
    }

    fn describe(&self) -> String;
}

/// Clustering model: class means and labels plus a smoothing component.
pub struct ClusterSampler<'a> {
    data: &'a StDataset,
    graph: &'a ArealGraph,
    pub state: ClusterState,
    pub smooth: SmoothState,
    lambda_scales: ProposalScales,
    alpha_scale: ProposalScales,
    delta_scale: ProposalScales,
    smooth_scales: SmoothScales,
    levels: Vec<f64>,
    z_path_updates: bool,
}

impl<'a> ClusterSampler<'a> {
    pub fn new(variant: SmoothVariant, data: &'a StDataset, graph: &'a ArealGraph, config: &McmcConfig) -> Result<Self> {
        let state = ClusterState::initialize(data, config.g, config.m)?;
        let smooth = SmoothState::new(variant, graph, data.n_periods(), config.p)?;
        let mut smooth_scales = SmoothScales::new(variant);
        smooth_scales.site = ProposalScales::new("phi", 1, 0.1, config.vector_target);
        smooth_scales.rho = ProposalScales::new("rho", 1, smooth_scales.rho.sd(0), config.scalar_target);
        Ok(ClusterSampler {
            data,
            graph,
            lambda_scales: ProposalScales::new("lambda", data.n_periods() * config.g, 0.02, config.scalar_target),
            alpha_scale: ProposalScales::new("alpha", 1, 1.0, config.scalar_target),
            delta_scale: ProposalScales::new("delta", 1, 1.0, config.scalar_target),
            smooth_scales,
            levels: vec![0.0; data.n_cells()],
            z_path_updates: config.z_path_updates,
            state,
            smooth,
        })
    }

    pub fn variant(&self) -> SmoothVariant {
        self.smooth.variant()
    }
}

impl Sampler for ClusterSampler<'_> {
    fn sweep(&mut self, rng: &mut ChainRng) -> Result<()> {
        let (a, b) = SIGMA2_PRIOR;
        cluster::sample_z(&mut self.state, self.data, self.smooth.phi(), rng);
        if self.z_path_updates {
            cluster::sample_z_paths(&mut self.state, self.data, self.smooth.phi(), rng);
        }
        cluster::sample_lambda(&mut self.state, self.data, self.smooth.phi(), &mut self.lambda_scales, rng)?;
        if self.state.n_periods() > 1 {
            self.state.sigma2 =
                cluster::sample_sigma2(self.state.lambda(), self.state.n_periods(), self.state.g(), a, b, rng)?;
        }
        cluster::sample_alpha_delta(&mut self.state, &mut self.alpha_scale, &mut self.delta_scale, rng);
        if self.smooth.variant() != SmoothVariant::None {
            self.state.cell_levels_into(&mut self.levels);
            update_smoothing(&mut self.smooth, self.data, self.graph, &self.levels, &mut self.smooth_scales, rng)?;
        }
        Ok(())
    }

    fn log_risk(&self, out: &mut [f64]) {
        let phi = self.smooth.phi();
        for (cell, slot) in out.iter_mut().enumerate() {
            *slot = self.state.cell_level(cell) + phi[cell];
        }
    }

    fn scales_mut(&mut self) -> Vec<&mut ProposalScales> {
        let mut v = vec![&mut self.lambda_scales, &mut self.alpha_scale, &mut self.delta_scale];
        if self.smooth.variant() != SmoothVariant::None {
            v.extend(self.smooth_scales.all_mut());
        }
        v
    }

    fn scales(&self) -> Vec<&ProposalScales> {
        let mut v = vec![&self.lambda_scales, &self.alpha_scale, &self.delta_scale];
        if self.smooth.variant() != SmoothVariant::None {
            v.push(&self.smooth_scales.site);
            v.push(&self.smooth_scales.rho);
        }
        v
    }

    fn scalars(&self) -> Vec<(&'static str, f64)> {
        let mut v = vec![
            ("sigma2", self.state.sigma2),
            ("alpha", self.state.alpha),
            ("delta", self.state.delta),
        ];
        match self.smooth.variant() {
            SmoothVariant::None => {}
            SmoothVariant::Ar1Leroux => {
                v.extend([("tau2", self.smooth.tau2), ("rho", self.smooth.rho()), ("gamma", self.smooth.gamma)])
            }
            SmoothVariant::CarPerPeriod | SmoothVariant::Convolution => {
                v.extend([("tau2", self.smooth.tau2), ("rho", self.smooth.rho())])
            }
        }
        v
    }

    fn labels(&self) -> Option<&[usize]> {
        Some(self.state.z())
    }

    fn lambda(&self) -> Option<&[f64]> {
        Some(self.state.lambda())
    }

    fn phi_period_mean_error(&self) -> Option<f64> {
        let t_len = self.data.n_periods();
        let n = self.data.n_areas() as f64;
        let phi = self.smooth.phi();
        Some(
            (0..t_len)
                .map(|t| ((0..self.data.n_areas()).map(|i| phi[i * t_len + t]).sum::<f64>() / n).abs())
                .fold(0.0, f64::max),
        )
    }

    fn describe(&self) -> String {
        format!(
            "lambda={:?} sigma2={} alpha={} delta={} tau2={} rho={} gamma={}",
            self.state.lambda(),
            self.state.sigma2,
            self.state.alpha,
            self.state.delta,
            self.smooth.tau2,
            self.smooth.rho(),
            self.smooth.gamma
        )
    }
}

/// Structural checks accumulated over retained sweeps.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct InvariantReport {
    pub ordering_violations: usize,
    pub label_range_violations: usize,
    pub max_phi_period_mean: f64,
}

impl InvariantReport {
    fn merge(&mut self, other: &InvariantReport) {
        self.ordering_violations += other.ordering_violations;
        self.label_range_violations += other.label_range_violations;
        self.max_phi_period_mean = self.max_phi_period_mean.max(other.max_phi_period_mean);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AcceptanceRate {
    pub block: String,
    pub rate: f64,
}

/// Retained samples and summaries of one chain, or of several pooled chains.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub model: ModelKind,
    pub n_areas: usize,
    pub n_periods: usize,
    /// Number of risk classes for clustering models.
    pub g: Option<usize>,
    pub n_samples: usize,
    /// `n_samples × n_cells` risks, draw-major.
    pub theta: Vec<f64>,
    /// `n_samples × n_cells` class labels (clustering models).
    pub labels: Option<Vec<u8>>,
    /// `n_samples × (n_periods · G)` class log-risks (clustering models).
    pub lambda: Option<Vec<f64>>,
    pub traces: Vec<Trace>,
    pub deviance: Vec<f64>,
    /// Post-burn-in acceptance rate per tuned block.
    pub acceptance: Vec<AcceptanceRate>,
    pub theta_median: Vec<f64>,
    pub z_median: Option<Vec<usize>>,
    pub invariants: InvariantReport,
}

impl FitResult {
    pub fn n_cells(&self) -> usize {
        self.n_areas * self.n_periods
    }

    pub fn theta_sample(&self, s: usize) -> &[f64] {
        let n = self.n_cells();
        &self.theta[s * n..(s + 1) * n]
    }

    /// Posterior quantile of `theta` for every cell.
    pub fn theta_quantile(&self, p: f64) -> Vec<f64> {
        cellwise(&self.theta, self.n_cells(), |v| {
            v.sort_by(f64::total_cmp);
            quantile_sorted(v, p)
        })
    }

    pub fn trace(&self, name: &str) -> Option<&[f64]> {
        self.traces.iter().find(|t| t.name == name).map(|t| t.values.as_slice())
    }

    /// Concatenate the retained samples of several chains (same model and
    /// data) and recompute the summaries over the pooled draws.
    pub fn pool(chains: &[FitResult]) -> Result<FitResult> {
        let first = chains
            .first()
            .ok_or_else(|| Error::InvalidConfig("no chains to pool".into()))?;
        if chains.len() == 1 {
            return Ok(first.clone());
        }
        let mut pooled = first.clone();
        for chain in &chains[1..] {
            if chain.model != first.model || chain.n_cells() != first.n_cells() {
                return Err(Error::ShapeMismatch(chain.n_cells(), first.n_cells()));
            }
            pooled.n_samples += chain.n_samples;
            pooled.theta.extend_from_slice(&chain.theta);
            if let (Some(l), Some(o)) = (pooled.labels.as_mut(), chain.labels.as_ref()) {
                l.extend_from_slice(o);
            }
            if let (Some(l), Some(o)) = (pooled.lambda.as_mut(), chain.lambda.as_ref()) {
                l.extend_from_slice(o);
            }
            for (trace, other) in pooled.traces.iter_mut().zip(&chain.traces) {
                trace.values.extend_from_slice(&other.values);
            }
            pooled.deviance.extend_from_slice(&chain.deviance);
            pooled.invariants.merge(&chain.invariants);
        }
        for (k, acc) in pooled.acceptance.iter_mut().enumerate() {
            acc.rate = chains.iter().map(|c| c.acceptance[k].rate).sum::<f64>() / chains.len() as f64;
        }
        pooled.summarize();
        Ok(pooled)
    }

    fn summarize(&mut self) {
        self.theta_median = cellwise(&self.theta, self.n_cells(), median);
        self.z_median = self
            .labels
            .as_ref()
            .map(|labels| cluster::extract_partition(labels, self.n_areas * self.n_periods));
    }
}

/// Applies `f` to the samples of each cell of a draw-major matrix.
fn cellwise(samples: &[f64], n_cells: usize, mut f: impl FnMut(&mut [f64]) -> f64) -> Vec<f64> {
    let n = samples.len() / n_cells;
    let mut column = vec![0.0; n];
    (0..n_cells)
        .map(|cell| {
            for (s, slot) in column.iter_mut().enumerate() {
                *slot = samples[s * n_cells + cell];
            }
            f(&mut column)
        })
        .collect()
}

/// Poisson deviance `-2 sum log p(y | e theta)`.
pub fn deviance(data: &StDataset, theta: &[f64]) -> f64 {
    -2.0 * data
        .y()
        .iter()
        .zip(data.e())
        .zip(theta)
        .map(|((&y, &e), &th)| poisson_log_pmf(y, e * th))
        .sum::<f64>()
}

pub fn build_sampler<'a>(
    model: ModelKind,
    data: &'a StDataset,
    graph: &'a ArealGraph,
    config: &McmcConfig,
) -> Result<Box<dyn Sampler + 'a>> {
    if graph.n_areas() != data.n_areas() {
        return Err(Error::ShapeMismatch(graph.n_areas(), data.n_areas()));
    }
    Ok(match model {
        ModelKind::Cluster(variant) => Box::new(ClusterSampler::new(variant, data, graph, config)?),
        ModelKind::Kh => Box::new(KhSampler::new(data, graph, config)),
        ModelKind::Rlm => Box::new(RlmSampler::new(data, graph, config)?),
    })
}

/// Runs one chain: adaptive burn-in, then frozen proposals with every
/// `thin`-th sweep retained. Deterministic in `(config.seed, chain_index)`.
pub fn run_chain(
    model: ModelKind,
    data: &StDataset,
    graph: &ArealGraph,
    config: &McmcConfig,
    chain_index: usize,
) -> Result<FitResult> {
    config.validate()?;
    let mut sampler = build_sampler(model, data, graph, config)?;
    let mut rng = chain_rng(config.seed, chain_index as u64);
    let n_cells = data.n_cells();
    let mut log_risk = vec![0.0; n_cells];

    for sweep in 0..config.n_burnin {
        sampler.sweep(&mut rng)?;
        if (sweep + 1) % config.adapt_interval == 0 {
            sampler.log_risk(&mut log_risk);
            if log_risk.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteLogPosterior {
                    block: "burn-in",
                    sweep,
                    state: sampler.describe(),
                });
            }
            sampler.scales_mut().into_iter().for_each(ProposalScales::adapt);
        }
    }
    sampler.scales_mut().into_iter().for_each(ProposalScales::reset_counts);

    let n_samples = config.n_samples();
    let mut theta = Vec::with_capacity(n_samples * n_cells);
    let mut labels = sampler.labels().map(|_| Vec::with_capacity(n_samples * n_cells));
    let mut lambda = sampler.lambda().map(|l| Vec::with_capacity(n_samples * l.len()));
    let mut traces: Vec<Trace> = sampler
        .scalars()
        .into_iter()
        .map(|(name, _)| Trace {
            name: name.to_string(),
            values: Vec::with_capacity(n_samples),
        })
        .collect();
    let mut deviances = Vec::with_capacity(n_samples);
    let mut invariants = InvariantReport::default();
    let g = model.is_cluster().then_some(config.g);
    let mut risk = vec![0.0; n_cells];

    for step in 0..config.n_keep {
        sampler.sweep(&mut rng)?;
        if (step + 1) % config.thin != 0 {
            continue;
        }
        sampler.log_risk(&mut log_risk);
        for (r, lr) in risk.iter_mut().zip(&log_risk) {
            *r = lr.exp();
        }
        let d = deviance(data, &risk);
        if !d.is_finite() {
            return Err(Error::NonFiniteLogPosterior {
                block: "retained sweep",
                sweep: config.n_burnin + step,
                state: sampler.describe(),
            });
        }
        deviances.push(d);
        theta.extend_from_slice(&risk);
        if let (Some(store), Some(z)) = (labels.as_mut(), sampler.labels()) {
            let g = config.g;
            invariants.label_range_violations += z.iter().filter(|&&c| c == 0 || c > g).count();
            store.extend(z.iter().map(|&c| c as u8));
        }
        if let (Some(store), Some(l)) = (lambda.as_mut(), sampler.lambda()) {
            invariants.ordering_violations += l
                .chunks(config.g)
                .filter(|row| row.windows(2).any(|w| !(w[0] < w[1])))
                .count();
            store.extend_from_slice(l);
        }
        for (trace, (_, value)) in traces.iter_mut().zip(sampler.scalars()) {
            trace.values.push(value);
        }
        if let Some(err) = sampler.phi_period_mean_error() {
            invariants.max_phi_period_mean = invariants.max_phi_period_mean.max(err);
        }
    }

    let acceptance = sampler
        .scales()
        .into_iter()
        .filter_map(|s| {
            s.acceptance_rate().map(|rate| AcceptanceRate {
                block: s.name().to_string(),
                rate,
            })
        })
        .collect();

    let mut fit = FitResult {
        model,
        n_areas: data.n_areas(),
        n_periods: data.n_periods(),
        g,
        n_samples,
        theta,
        labels,
        lambda,
        traces,
        deviance: deviances,
        acceptance,
        theta_median: Vec::new(),
        z_median: None,
        invariants,
    };
    fit.summarize();
    Ok(fit)
}

/// Runs `config.n_chains` chains (concurrently when built with the
/// `parallel` feature) and returns them with their pooled summary.
pub fn run_multichain(
    model: ModelKind,
    data: &StDataset,
    graph: &ArealGraph,
    config: &McmcConfig,
) -> Result<(Vec<FitResult>, FitResult)> {
    config.validate()?;
    let run = |k: usize| run_chain(model, data, graph, config, k);
    #[cfg(feature = "parallel")]
    let chains: Vec<Result<FitResult>> = {
        use rayon::prelude::*;
        (0..config.n_chains).into_par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let chains: Vec<Result<FitResult>> = (0..config.n_chains).map(run).collect();
    let chains = chains.into_iter().collect::<Result<Vec<_>>>()?;
    let pooled = FitResult::pool(&chains)?;
    Ok((chains, pooled))
}

/// Worker-thread cap from `STCLUSTER_THREADS`, if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var("STCLUSTER_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// Runs `f` inside a thread pool honouring [`thread_cap`].
#[cfg(feature = "parallel")]
pub fn with_thread_cap<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    match thread_cap() {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        None => f(),
    }
}

#[cfg(not(feature = "parallel"))]
pub fn with_thread_cap<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    f()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;

    fn tiny() -> (StDataset, ArealGraph) {
        let graph = build_graph(3, &[(0, 1), (1, 2)]).unwrap();
        let data = StDataset::from_grid(3, 2, vec![5, 7, 9, 12, 30, 28], vec![8.0, 8.0, 10.0, 10.0, 10.0, 10.0]).unwrap();
        (data, graph)
    }

    fn quick() -> McmcConfig {
        McmcConfig {
            n_burnin: 100,
            n_keep: 100,
            thin: 2,
            g: 3,
            ..McmcConfig::default()
        }
    }

    #[test]
    fn model_names_round_trip() {
        for m in ModelKind::ALL {
            assert_eq!(m.name().parse::<ModelKind>().unwrap(), m);
        }
        assert!("cluster5".parse::<ModelKind>().is_err());
    }

    #[test]
    fn config_validation() {
        let mut c = quick();
        c.n_keep = 0;
        assert!(c.validate().is_err());
        let mut c = quick();
        c.thin = 3;
        assert!(c.validate().is_err());
        assert!(quick().validate().is_ok());
    }

    #[test]
    fn zero_keep_rejected_by_run_chain() {
        let (data, graph) = tiny();
        let c = McmcConfig { n_keep: 0, ..quick() };
        assert!(matches!(
            run_chain(ModelKind::Cluster(SmoothVariant::None), &data, &graph, &c, 0),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn same_seed_same_samples() {
        let (data, graph) = tiny();
        for model in [ModelKind::Cluster(SmoothVariant::Ar1Leroux), ModelKind::Kh, ModelKind::Rlm] {
            let a = run_chain(model, &data, &graph, &quick(), 0).unwrap();
            let b = run_chain(model, &data, &graph, &quick(), 0).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.n_samples, 50);
            assert_eq!(a.theta.len(), 50 * 6);
            let c = run_chain(model, &data, &graph, &quick(), 1).unwrap();
            assert_ne!(a.theta, c.theta);
        }
    }

    #[test]
    fn single_chain_multichain_matches_run_chain() {
        let (data, graph) = tiny();
        let model = ModelKind::Cluster(SmoothVariant::None);
        let single = run_chain(model, &data, &graph, &quick(), 0).unwrap();
        let (chains, pooled) = run_multichain(model, &data, &graph, &quick()).unwrap();
        assert_eq!(chains.len(), 1);
        assert_eq!(pooled, single);
    }

    #[test]
    fn pooled_median_is_median_of_concatenation() {
        let (data, graph) = tiny();
        let config = McmcConfig { n_chains: 2, ..quick() };
        let (chains, pooled) = run_multichain(ModelKind::Rlm, &data, &graph, &config).unwrap();
        let (_, again) = run_multichain(ModelKind::Rlm, &data, &graph, &config).unwrap();
        assert_eq!(pooled, again);
        assert_eq!(pooled.n_samples, 100);
        for cell in 0..6 {
            let mut all: Vec<f64> = chains
                .iter()
                .flat_map(|c| (0..c.n_samples).map(move |s| c.theta_sample(s)[cell]))
                .collect();
            assert_eq!(pooled.theta_median[cell], median(&mut all));
        }
    }

    #[test]
    fn deviance_of_perfect_fit() {
        let data = StDataset::from_grid(1, 1, vec![0], vec![2.0]).unwrap();
        assert!((deviance(&data, &[1.0]) - 4.0).abs() < 1e-12);
    }
}
