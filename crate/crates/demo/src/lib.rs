//! Browser bindings for the interactive demo page in `www/`.
//!
//! Three operations are exposed: the label transition table, a simulated
//! lattice dataset, and a short MCMC fit of the clustering model on it.

use wasm_bindgen::prelude::*;

use stcluster::cluster::z_transition_probs;
use stcluster::engine::{run_chain, McmcConfig, ModelKind};
use stcluster::simulation::{
    default_lattice, generate, Lattice, Scenario, SimTruth, DEFAULT_COLS, DEFAULT_PERIODS, DEFAULT_ROWS,
};
use stcluster::smoothing::SmoothVariant;

fn js_err(err: stcluster::Error) -> JsError {
    JsError::new(&err.to_string())
}

/// Prior probabilities of the next class label given the previous one
/// (`prev = 0` for the first period).
#[wasm_bindgen(js_name = transitionProbs)]
pub fn transition_probs(prev: usize, alpha: f64, delta: f64, g: usize) -> Result<Vec<f64>, JsError> {
    if g == 0 || prev > g {
        return Err(JsError::new("need 1 <= G and 0 <= prev <= G"));
    }
    Ok(z_transition_probs((prev > 0).then_some(prev), alpha, delta, g))
}

/// A simulated lattice dataset held on the Rust side.
#[wasm_bindgen]
pub struct Simulation {
    lattice: Lattice,
    truth: SimTruth,
}

#[wasm_bindgen]
impl Simulation {
    /// Simulates one replicate of `scenario` (1-5) on the default lattice.
    #[wasm_bindgen(constructor)]
    pub fn new(scenario: u8, e_low: f64, e_high: f64, seed: u64) -> Result<Simulation, JsError> {
        let lattice = default_lattice(DEFAULT_ROWS, DEFAULT_COLS).map_err(js_err)?;
        let scenario = Scenario::standard(scenario, [e_low, e_high], DEFAULT_PERIODS)
            .map_err(js_err)?;
        let truth = generate(&scenario, &lattice, seed).map_err(js_err)?;
        Ok(Simulation { lattice, truth })
    }

    #[wasm_bindgen(getter)]
    pub fn rows(&self) -> usize {
        self.lattice.rows
    }

    #[wasm_bindgen(getter)]
    pub fn cols(&self) -> usize {
        self.lattice.cols
    }

    #[wasm_bindgen(getter)]
    pub fn periods(&self) -> usize {
        self.truth.dataset.n_periods()
    }

    /// Observed/expected ratio per area for `period`, row-major over the grid.
    pub fn sir(&self, period: usize) -> Vec<f64> {
        self.period_slice(&self.truth.dataset.sir(), period)
    }

    /// True relative risk per area for `period`.
    #[wasm_bindgen(js_name = trueRisk)]
    pub fn true_risk(&self, period: usize) -> Vec<f64> {
        self.period_slice(&self.truth.theta_true, period)
    }

    /// Fits the clustering model (`smoothing = true` adds the spatio-temporal
    /// random effect) and returns the posterior median risk for every cell,
    /// area-major.
    pub fn fit(&self, smoothing: bool, burnin: usize, keep: usize, seed: u64) -> Result<Vec<f64>, JsError> {
        let variant = if smoothing { SmoothVariant::Ar1Leroux } else { SmoothVariant::None };
        let config = McmcConfig {
            n_burnin: burnin,
            n_keep: keep,
            n_chains: 1,
            seed,
            ..McmcConfig::default()
        };
        let fit = run_chain(ModelKind::Cluster(variant), &self.truth.dataset, &self.lattice.graph, &config, 0).map_err(js_err)?;
        Ok(fit.theta_median)
    }
}

impl Simulation {
    fn period_slice(&self, values: &[f64], period: usize) -> Vec<f64> {
        let t = self.truth.dataset.n_periods();
        (0..self.truth.dataset.n_areas()).map(|i| values[i * t + period.min(t - 1)]).collect()
    }
}
