//! Synthetic study: lattice geography with a fixed cluster template, scenario
//! data generation, and a replicated fit-and-score harness.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::dataset::StDataset;
use crate::diagnostics::{posthoc_classify, rand_index, rmse};
use crate::engine::{run_multichain, InvariantReport, McmcConfig, ModelKind};
use crate::error::{Error, Result};
use crate::graph::{build_graph, euclidean, ArealGraph, Centroid};
use crate::output::fmt_f64;
use crate::stats::std_normal;

pub const DEFAULT_ROWS: usize = 12;
pub const DEFAULT_COLS: usize = 13;
pub const DEFAULT_PERIODS: usize = 10;
/// Standard deviation of the smooth log-risk field (calibration constant).
pub const DEFAULT_GAUSSIAN_SD: f64 = 0.1;
/// Exponential correlation length of the log-risk field, in lattice units.
pub const DEFAULT_CORRELATION_RANGE: f64 = 50.0;
pub const DEFAULT_E_RANGES: [[f64; 2]; 3] = [[10.0, 30.0], [90.0, 110.0], [190.0, 210.0]];
pub const DEFAULT_REPLICATES: usize = 10;

/// `(row, col)` cells of the cluster template on the default lattice: a
/// singleton, a horizontal line of nine, a 3×3 block and a 3×3 ring whose
/// centre is background. The shapes are pairwise non-adjacent.
pub const TEMPLATE_CELLS: [(usize, usize); 27] = [
    // singleton
    (1, 1),
    // long thin cluster
    (10, 1),
    (10, 2),
    (10, 3),
    (10, 4),
    (10, 5),
    (10, 6),
    (10, 7),
    (10, 8),
    (10, 9),
    // block
    (2, 4),
    (2, 5),
    (2, 6),
    (3, 4),
    (3, 5),
    (3, 6),
    (4, 4),
    (4, 5),
    (4, 6),
    // ring with a hole at (6, 9)
    (5, 8),
    (5, 9),
    (5, 10),
    (6, 8),
    (6, 10),
    (7, 8),
    (7, 9),
    (7, 10),
];

/// Rook-adjacency lattice; area `r * cols + c` sits at centroid `(c, r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    pub rows: usize,
    pub cols: usize,
    pub graph: ArealGraph,
    /// Template membership per area.
    pub template: Vec<bool>,
}

impl Lattice {
    pub fn centroids(&self) -> &[Centroid] {
        self.graph.centroids().expect("lattice graphs always carry centroids")
    }
}

/// Builds a `rows × cols` rook lattice with unit spacing and the fixed
/// cluster template. Needs at least 11 rows and 11 columns to hold it.
pub fn default_lattice(rows: usize, cols: usize) -> Result<Lattice> {
    if rows < 11 || cols < 11 {
        return Err(Error::InvalidConfig(format!(
            "lattice {rows}x{cols} is too small for the cluster template (need at least 11x11)"
        )));
    }
    let id = |r: usize, c: usize| r * cols + c;
    let mut edges = Vec::with_capacity(rows * (cols - 1) + cols * (rows - 1));
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                edges.push((id(r, c), id(r, c + 1)));
            }
            if r + 1 < rows {
                edges.push((id(r, c), id(r + 1, c)));
            }
        }
    }
    let centroids = (0..rows * cols).map(|k| [(k % cols) as f64, (k / cols) as f64]).collect();
    let graph = build_graph(rows * cols, &edges)?.with_centroids(centroids)?;
    let mut template = vec![false; rows * cols];
    for &(r, c) in &TEMPLATE_CELLS {
        template[id(r, c)] = true;
    }
    Ok(Lattice {
        rows,
        cols,
        graph,
        template,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub id: u8,
    /// Relative risk inside active clusters.
    pub risk_level: f64,
    /// Active flag per period.
    pub active_periods: Vec<bool>,
    pub e_range: [f64; 2],
    pub correlation_range: f64,
    pub gaussian_sd: f64,
}

impl Scenario {
    /// The five standard scenarios: 1 null; 2 and 3 clusters at risk 2 and 3
    /// in every period; 4 and 5 the same during periods 4 to 7 only.
    pub fn standard(id: u8, e_range: [f64; 2], n_periods: usize) -> Result<Self> {
        let (risk_level, window) = match id {
            1 => (1.0, None),
            2 => (2.0, Some(1..=n_periods)),
            3 => (3.0, Some(1..=n_periods)),
            4 => (2.0, Some(4..=7)),
            5 => (3.0, Some(4..=7)),
            _ => return Err(Error::InvalidConfig(format!("unknown scenario {id}; expected 1..5"))),
        };
        if !(e_range[0] > 0.0 && e_range[0] <= e_range[1]) {
            return Err(Error::InvalidConfig(format!("invalid expected-count range {e_range:?}")));
        }
        let active_periods = (1..=n_periods)
            .map(|t| window.as_ref().is_some_and(|w| w.contains(&t)))
            .collect();
        Ok(Scenario {
            id,
            risk_level,
            active_periods,
            e_range,
            correlation_range: DEFAULT_CORRELATION_RANGE,
            gaussian_sd: DEFAULT_GAUSSIAN_SD,
        })
    }

    pub fn n_periods(&self) -> usize {
        self.active_periods.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimTruth {
    /// Area-major true risks.
    pub theta_true: Vec<f64>,
    /// 1 = background, 2 = active cluster.
    pub partition_true: Vec<usize>,
    pub dataset: StDataset,
}

/// Lower Cholesky factor of the exponential correlation matrix
/// `exp(-d_ij / range)`.
pub fn correlation_factor(centroids: &[Centroid], range: f64) -> Result<DMatrix<f64>> {
    if !(range > 0.0) {
        return Err(Error::InvalidConfig(format!("correlation range must be positive, got {range}")));
    }
    let n = centroids.len();
    let corr = DMatrix::from_fn(n, n, |i, j| (-euclidean(centroids[i], centroids[j]) / range).exp());
    corr.cholesky()
        .map(|c| c.l())
        .ok_or_else(|| Error::InvalidConfig("correlation matrix is not positive definite".into()))
}

/// Draws one dataset. Random numbers are consumed in a fixed order (field,
/// then expected counts, then observed counts), so scenarios sharing a seed
/// share the field and the expected counts.
pub fn generate(scenario: &Scenario, lattice: &Lattice, seed: u64) -> Result<SimTruth> {
    let factor = correlation_factor(lattice.centroids(), scenario.correlation_range)?;
    generate_with_factor(scenario, lattice, &factor, seed)
}

/// [`generate`] with a precomputed [`correlation_factor`].
pub fn generate_with_factor(scenario: &Scenario, lattice: &Lattice, factor: &DMatrix<f64>, seed: u64) -> Result<SimTruth> {
    let n = lattice.graph.n_areas();
    let t_len = scenario.n_periods();
    if factor.nrows() != n {
        return Err(Error::ShapeMismatch(factor.nrows(), n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut epsilon = vec![0.0; n * t_len];
    for t in 0..t_len {
        let z: Vec<f64> = (0..n).map(|_| std_normal(&mut rng)).collect();
        for i in 0..n {
            let v: f64 = (0..=i).map(|k| factor[(i, k)] * z[k]).sum();
            epsilon[i * t_len + t] = scenario.gaussian_sd * v;
        }
    }
    let [lo, hi] = scenario.e_range;
    let e: Vec<f64> = (0..n * t_len)
        .map(|_| if hi > lo { rng.random_range(lo..hi) } else { lo })
        .collect();

    let log_r = scenario.risk_level.ln();
    let mut theta_true = vec![0.0; n * t_len];
    let mut partition_true = vec![1; n * t_len];
    for i in 0..n {
        for t in 0..t_len {
            let cell = i * t_len + t;
            let in_cluster = lattice.template[i] && scenario.active_periods[t];
            let mu = if in_cluster { log_r } else { 0.0 };
            if in_cluster && scenario.risk_level != 1.0 {
                partition_true[cell] = 2;
            }
            theta_true[cell] = (mu + epsilon[cell]).exp();
        }
    }
    let y = theta_true
        .iter()
        .zip(&e)
        .map(|(&th, &ei)| {
            Poisson::new(th * ei)
                .map(|d| d.sample(&mut rng) as u64)
                .map_err(|err| Error::InvalidConfig(format!("Poisson mean {}: {err}", th * ei)))
        })
        .collect::<Result<Vec<u64>>>()?;
    let dataset = StDataset::from_grid(n, t_len, y, e)?;
    Ok(SimTruth {
        theta_true,
        partition_true,
        dataset,
    })
}

/// SplitMix64 finaliser, used to derive independent seeds.
pub fn mix_seed(a: u64, b: u64) -> u64 {
    let mut z = a ^ b.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of the data for one `(e-range, replicate)`; shared across scenarios.
pub fn data_seed(seed: u64, e_range_index: usize, replicate: usize) -> u64 {
    mix_seed(mix_seed(seed, e_range_index as u64), replicate as u64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub models: Vec<ModelKind>,
    pub scenarios: Vec<u8>,
    pub e_ranges: Vec<[f64; 2]>,
    pub n_replicates: usize,
    pub mcmc: McmcConfig,
    pub seed: u64,
    pub rows: usize,
    pub cols: usize,
    pub n_periods: usize,
    pub gaussian_sd: f64,
    pub correlation_range: f64,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            models: ModelKind::ALL.to_vec(),
            scenarios: vec![1, 2, 3, 4, 5],
            e_ranges: DEFAULT_E_RANGES.to_vec(),
            n_replicates: DEFAULT_REPLICATES,
            mcmc: McmcConfig::default(),
            seed: 1,
            rows: DEFAULT_ROWS,
            cols: DEFAULT_COLS,
            n_periods: DEFAULT_PERIODS,
            gaussian_sd: DEFAULT_GAUSSIAN_SD,
            correlation_range: DEFAULT_CORRELATION_RANGE,
        }
    }
}

/// One fitted replicate. `rmse` and `rand` are NaN when the fit failed.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub scenario: u8,
    pub e_range: [f64; 2],
    pub model: ModelKind,
    pub replicate: usize,
    pub rmse: f64,
    pub rand: f64,
    pub runtime_s: f64,
    /// Structural checks over the retained samples of the fit.
    pub invariants: Option<InvariantReport>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeanRow {
    pub scenario: u8,
    pub e_range: [f64; 2],
    pub model: ModelKind,
    pub n_ok: usize,
    pub mean_rmse: f64,
    pub mean_rand: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyResults {
    pub rows: Vec<StudyRow>,
}

/// Fits `model` to one simulated dataset and scores it against the truth:
/// returns `(rmse, rand, invariants)`.
pub fn score_replicate(
    model: ModelKind,
    truth: &SimTruth,
    graph: &ArealGraph,
    config: &McmcConfig,
) -> Result<(f64, f64, InvariantReport)> {
    let (_, fit) = run_multichain(model, &truth.dataset, graph, config)?;
    let err = rmse(&fit.theta_median, &truth.theta_true)?;
    let partition = match &fit.z_median {
        Some(z) => z.clone(),
        None => posthoc_classify(&fit.theta_median, config.g)?.labels,
    };
    Ok((err, rand_index(&partition, &truth.partition_true)?, fit.invariants))
}

/// Runs every `(scenario, e-range, replicate, model)` combination. Jobs run
/// in parallel; a failing fit is logged and reported with NaN scores.
pub fn run_study(config: &StudyConfig) -> Result<StudyResults> {
    config.mcmc.validate()?;
    if config.models.is_empty() || config.scenarios.is_empty() || config.e_ranges.is_empty() {
        return Err(Error::InvalidConfig("study needs at least one model, scenario and e-range".into()));
    }
    let lattice = default_lattice(config.rows, config.cols)?;
    let factor = correlation_factor(lattice.centroids(), config.correlation_range)?;
    let mut scenarios = Vec::new();
    for &id in &config.scenarios {
        for (ei, &range) in config.e_ranges.iter().enumerate() {
            let mut s = Scenario::standard(id, range, config.n_periods)?;
            s.gaussian_sd = config.gaussian_sd;
            s.correlation_range = config.correlation_range;
            scenarios.push((s, ei));
        }
    }
    let jobs: Vec<(usize, usize)> = (0..scenarios.len())
        .flat_map(|s| (0..config.n_replicates).map(move |r| (s, r)))
        .collect();

    let run_job = |&(s, replicate): &(usize, usize)| -> Vec<StudyRow> {
        let (scenario, ei) = &scenarios[s];
        let seed = data_seed(config.seed, *ei, replicate);
        let truth = generate_with_factor(scenario, &lattice, &factor, seed);
        config
            .models
            .iter()
            .map(|&model| {
                let mut mcmc = config.mcmc.clone();
                mcmc.seed = mix_seed(seed, scenario.id as u64);
                let start = Instant::now();
                let outcome = truth
                    .as_ref()
                    .map_err(|e| e.to_string())
                    .and_then(|t| score_replicate(model, t, &lattice.graph, &mcmc).map_err(|e| e.to_string()));
                let runtime_s = start.elapsed().as_secs_f64();
                let (rmse, rand, invariants, error) = match outcome {
                    Ok((a, b, inv)) => (a, b, Some(inv), None),
                    Err(msg) => {
                        log::warn!(
                            "scenario {} e={:?} replicate {replicate} model {model}: {msg}",
                            scenario.id,
                            scenario.e_range
                        );
                        (f64::NAN, f64::NAN, None, Some(msg))
                    }
                };
                StudyRow {
                    scenario: scenario.id,
                    e_range: scenario.e_range,
                    model,
                    replicate,
                    rmse,
                    rand,
                    runtime_s,
                    invariants,
                    error,
                }
            })
            .collect()
    };

    #[cfg(feature = "parallel")]
    let nested: Vec<Vec<StudyRow>> = {
        use rayon::prelude::*;
        crate::engine::with_thread_cap(|| jobs.par_iter().map(run_job).collect())
    };
    #[cfg(not(feature = "parallel"))]
    let nested: Vec<Vec<StudyRow>> = jobs.iter().map(run_job).collect();
    Ok(StudyResults {
        rows: nested.into_iter().flatten().collect(),
    })
}

impl StudyResults {
    /// Rows for one `(scenario, e-range, model)` cell, in replicate order.
    pub fn select(&self, scenario: u8, e_range: [f64; 2], model: ModelKind) -> Vec<&StudyRow> {
        self.rows
            .iter()
            .filter(|r| r.scenario == scenario && r.e_range == e_range && r.model == model)
            .collect()
    }

    /// Means over successful replicates, in first-appearance order.
    pub fn mean_table(&self) -> Vec<MeanRow> {
        let mut keys: Vec<(u8, [f64; 2], ModelKind)> = Vec::new();
        for r in &self.rows {
            let key = (r.scenario, r.e_range, r.model);
            if !keys.contains(&key) {
                keys.push(key);
            }
        }
        keys.into_iter()
            .map(|(scenario, e_range, model)| {
                let ok: Vec<&StudyRow> = self
                    .select(scenario, e_range, model)
                    .into_iter()
                    .filter(|r| r.error.is_none())
                    .collect();
                let mean = |f: fn(&StudyRow) -> f64| {
                    if ok.is_empty() {
                        f64::NAN
                    } else {
                        ok.iter().map(|r| f(r)).sum::<f64>() / ok.len() as f64
                    }
                };
                MeanRow {
                    scenario,
                    e_range,
                    model,
                    n_ok: ok.len(),
                    mean_rmse: mean(|r| r.rmse),
                    mean_rand: mean(|r| r.rand),
                }
            })
            .collect()
    }

    /// Writes the per-replicate results. With `with_runtime = false` the
    /// runtime column holds `NA`, making the file reproducible byte for byte.
    pub fn write_results(&self, path: &Path, with_runtime: bool) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "scenario,e_low,e_high,model,replicate,rmse,rand,runtime_s")?;
        for r in &self.rows {
            let runtime = if with_runtime { fmt_f64(r.runtime_s) } else { "NA".into() };
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.scenario,
                fmt_f64(r.e_range[0]),
                fmt_f64(r.e_range[1]),
                r.model,
                r.replicate + 1,
                fmt_f64(r.rmse),
                fmt_f64(r.rand),
                runtime
            )?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_mean_table(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "scenario,e_low,e_high,model,n_ok,mean_rmse,mean_rand")?;
        for r in self.mean_table() {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.scenario,
                fmt_f64(r.e_range[0]),
                fmt_f64(r.e_range[1]),
                r.model,
                r.n_ok,
                fmt_f64(r.mean_rmse),
                fmt_f64(r.mean_rand)
            )?;
        }
        out.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_lattice_shape() {
        let lat = default_lattice(12, 13).unwrap();
        assert_eq!(lat.graph.n_areas(), 156);
        assert_eq!(lat.graph.edges().len(), 12 * 12 + 11 * 13);
        assert_eq!(lat.graph.neighbor_count(0), 2);
        assert_eq!(lat.template.iter().filter(|&&b| b).count(), 27);
    }

    #[test]
    fn template_has_four_shapes_one_singleton() {
        let lat = default_lattice(12, 13).unwrap();
        let members: Vec<usize> = (0..156).filter(|&i| lat.template[i]).collect();
        let edges: Vec<(usize, usize)> = lat
            .graph
            .edges()
            .iter()
            .filter(|(a, b)| lat.template[*a] && lat.template[*b])
            .map(|&(a, b)| {
                let ia = members.binary_search(&a).unwrap();
                let ib = members.binary_search(&b).unwrap();
                (ia, ib)
            })
            .collect();
        let sub = build_graph(members.len(), &edges).unwrap();
        let mut sizes: Vec<usize> = sub.connected_components().iter().map(Vec::len).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![1, 8, 9, 9]);
    }

    #[test]
    fn noiseless_scenarios_are_piecewise_constant() {
        let lat = default_lattice(12, 13).unwrap();
        let mut s1 = Scenario::standard(1, [190.0, 210.0], 10).unwrap();
        s1.gaussian_sd = 0.0;
        let t1 = generate(&s1, &lat, 3).unwrap();
        assert!(t1.theta_true.iter().all(|&v| v == 1.0));
        let mut s3 = Scenario::standard(3, [190.0, 210.0], 10).unwrap();
        s3.gaussian_sd = 0.0;
        let t3 = generate(&s3, &lat, 3).unwrap();
        for i in 0..156 {
            for t in 0..10 {
                let expect = if lat.template[i] { 3.0 } else { 1.0 };
                assert!((t3.theta_true[i * 10 + t] - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn paired_scenarios_share_field_and_expected() {
        let lat = default_lattice(12, 13).unwrap();
        let s4 = Scenario::standard(4, [90.0, 110.0], 10).unwrap();
        let s5 = Scenario::standard(5, [90.0, 110.0], 10).unwrap();
        let a = generate(&s4, &lat, 9).unwrap();
        let b = generate(&s5, &lat, 9).unwrap();
        assert_eq!(a.dataset.e(), b.dataset.e());
        for (i, (x, y)) in a.theta_true.iter().zip(&b.theta_true).enumerate() {
            if a.partition_true[i] == 1 {
                assert_eq!(x, y);
            } else {
                assert!((y / x - 1.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let lat = default_lattice(12, 13).unwrap();
        let s = Scenario::standard(2, [10.0, 30.0], 10).unwrap();
        assert_eq!(generate(&s, &lat, 5).unwrap(), generate(&s, &lat, 5).unwrap());
        assert_ne!(
            generate(&s, &lat, 5).unwrap().dataset.y(),
            generate(&s, &lat, 6).unwrap().dataset.y()
        );
    }

    #[test]
    fn inactive_periods_use_single_cluster_truth() {
        let lat = default_lattice(12, 13).unwrap();
        let s = Scenario::standard(5, [10.0, 30.0], 10).unwrap();
        let truth = generate(&s, &lat, 1).unwrap();
        for i in 0..156 {
            for t in 0..10 {
                let active = lat.template[i] && (3..7).contains(&t);
                assert_eq!(truth.partition_true[i * 10 + t], if active { 2 } else { 1 });
            }
        }
    }
}
