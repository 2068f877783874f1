//! Command-line driver: `fit`, `simulate`, `summarize` and `generate`.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::dataset::{load_dataset, write_dataset, StDataset};
use crate::diagnostics::{compute_dic, compute_lmpl};
use crate::engine::{run_multichain, with_thread_cap, FitResult, McmcConfig, ModelKind};
use crate::error::{Error, Result};
use crate::graph::{read_adjacency_csv, read_centroids_csv, ArealGraph};
use crate::output::fmt_f64;
use crate::simulation::{
    default_lattice, generate, run_study, Scenario, StudyConfig, DEFAULT_COLS, DEFAULT_PERIODS, DEFAULT_ROWS,
};
use crate::stats::quantile_sorted;

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "stcluster", version, about = "Spatio-temporal cluster detection and disease mapping")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a model to user data and write posterior summaries.
    Fit(FitArgs),
    /// Run the simulation study and write results tables.
    Simulate(SimulateArgs),
    /// Print fit statistics from a previous `fit` output directory.
    Summarize(SummarizeArgs),
    /// Write one simulated dataset (counts, adjacency, centroids, truth) in
    /// the formats `fit` reads.
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
struct McmcArgs {
    /// Burn-in sweeps.
    #[arg(long, default_value_t = 2000)]
    burnin: usize,
    /// Post-burn-in sweeps.
    #[arg(long, default_value_t = 2000)]
    keep: usize,
    #[arg(long, default_value_t = 1)]
    thin: usize,
    #[arg(long, default_value_t = 1)]
    chains: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Maximum number of risk classes.
    #[arg(long = "G", default_value_t = crate::cluster::DEFAULT_G)]
    g: usize,
    /// Upper bound of the label smoothing priors.
    #[arg(long = "M", default_value_t = crate::cluster::DEFAULT_M)]
    m: f64,
    /// Bandwidth prior bound for cluster4 (default: squared maximum centroid distance).
    #[arg(long = "P")]
    p: Option<f64>,
}

impl McmcArgs {
    fn config(&self) -> McmcConfig {
        McmcConfig {
            n_burnin: self.burnin,
            n_keep: self.keep,
            thin: self.thin,
            n_chains: self.chains,
            seed: self.seed,
            g: self.g,
            m: self.m,
            p: self.p,
            ..McmcConfig::default()
        }
    }
}

#[derive(Debug, Args)]
struct FitArgs {
    /// cluster1, cluster2, cluster3, cluster4, kh or rlm.
    #[arg(long)]
    model: ModelKind,
    /// CSV with header `area_id,period,y,e`.
    #[arg(long)]
    counts: PathBuf,
    /// CSV with header `area_i,area_j` (0-based area indices).
    #[arg(long)]
    adjacency: PathBuf,
    /// CSV with header `area_id,x,y`; required for cluster4.
    #[arg(long)]
    centroids: Option<PathBuf>,
    #[command(flatten)]
    mcmc: McmcArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Comma-separated scenario ids (1-5).
    #[arg(long, value_delimiter = ',', default_values_t = [1u8, 2, 3, 4, 5])]
    scenarios: Vec<u8>,
    /// Comma-separated expected-count ranges, each `low:high`.
    #[arg(long = "e-ranges", value_delimiter = ',', default_value = "10:30,90:110,190:210")]
    e_ranges: Vec<String>,
    /// Comma-separated model names.
    #[arg(long, value_delimiter = ',', default_value = "cluster1,cluster2,cluster3,cluster4,kh,rlm")]
    models: Vec<ModelKind>,
    #[arg(long, default_value_t = crate::simulation::DEFAULT_REPLICATES)]
    replicates: usize,
    /// Standard deviation of the simulated log-risk field.
    #[arg(long = "gaussian-sd", default_value_t = crate::simulation::DEFAULT_GAUSSIAN_SD)]
    gaussian_sd: f64,
    /// Correlation length of the simulated log-risk field, in lattice units.
    #[arg(long = "correlation-range", default_value_t = crate::simulation::DEFAULT_CORRELATION_RANGE)]
    correlation_range: f64,
    /// Write `NA` in the runtime column so reruns are byte-identical.
    #[arg(long = "omit-runtime")]
    omit_runtime: bool,
    #[command(flatten)]
    mcmc: McmcArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SummarizeArgs {
    /// Output directory of a previous `fit`.
    #[arg(long = "in")]
    input: PathBuf,
    /// Print per-period class risks exp(lambda) with 95% intervals as CSV.
    #[arg(long = "class-trend")]
    class_trend: bool,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    /// Scenario id (1-5).
    #[arg(long, default_value_t = 3)]
    scenario: u8,
    /// Expected-count range `low:high`.
    #[arg(long = "e-range", default_value = "190:210")]
    e_range: String,
    #[arg(long = "gaussian-sd", default_value_t = crate::simulation::DEFAULT_GAUSSIAN_SD)]
    gaussian_sd: f64,
    #[arg(long = "correlation-range", default_value_t = crate::simulation::DEFAULT_CORRELATION_RANGE)]
    correlation_range: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return err.exit_code();
        }
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let mut stdout = std::io::stdout().lock();
    let outcome = match cli.command {
        Command::Fit(args) => cmd_fit(&args),
        Command::Simulate(args) => cmd_simulate(&args),
        Command::Summarize(args) => cmd_summarize(&args, &mut stdout),
        Command::Generate(args) => cmd_generate(&args),
    };
    match outcome {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            exit_code(&err)
        }
    }
}

pub fn exit_code(err: &Error) -> i32 {
    if err.is_numerical_error() {
        EXIT_NUMERICAL
    } else if matches!(err, Error::InvalidConfig(_)) {
        EXIT_USAGE
    } else {
        EXIT_DATA
    }
}

fn load_inputs(args: &FitArgs) -> Result<(StDataset, ArealGraph)> {
    if args.model.needs_centroids() && args.centroids.is_none() {
        return Err(Error::InvalidConfig(format!(
            "model {} requires --centroids (a CSV with header area_id,x,y)",
            args.model
        )));
    }
    let data = load_dataset(&args.counts)?;
    let mut graph = read_adjacency_csv(&args.adjacency, data.n_areas())?;
    if let Some(path) = &args.centroids {
        graph = graph.with_centroids(read_centroids_csv(path, data.area_ids())?)?;
    }
    Ok((data, graph))
}

fn cmd_fit(args: &FitArgs) -> Result<()> {
    let config = args.mcmc.config();
    config.validate()?;
    let (data, graph) = load_inputs(args)?;
    let (_, fit) = with_thread_cap(|| run_multichain(args.model, &data, &graph, &config))?;
    fs::create_dir_all(&args.out)?;
    write_fit_outputs(&fit, &data, &graph, &config, &args.out)
}

/// Writes every artifact of a fit into `dir`.
pub fn write_fit_outputs(fit: &FitResult, data: &StDataset, graph: &ArealGraph, config: &McmcConfig, dir: &Path) -> Result<()> {
    let summary = CellSummary::new(fit);
    summary.write_csv(data, &dir.join("summary.csv"))?;
    write_fit_stats(fit, data, &dir.join("fit.csv"))?;
    write_traces(fit, config, dir)?;
    write_acceptance(fit, &dir.join("acceptance.csv"))?;
    if let (Some(lambda), Some(g)) = (&fit.lambda, fit.g) {
        write_lambda_samples(lambda, data.n_periods(), g, &dir.join("lambda_samples.csv"))?;
    }
    if let Some(centroids) = graph.centroids() {
        summary.write_geojson(data, centroids, &dir.join("risk.geojson"))?;
    }
    Ok(())
}

/// Posterior summaries per cell.
struct CellSummary {
    theta_median: Vec<f64>,
    theta_lo: Vec<f64>,
    theta_hi: Vec<f64>,
    z: Option<Vec<[usize; 3]>>,
}

impl CellSummary {
    fn new(fit: &FitResult) -> Self {
        let n_cells = fit.n_cells();
        let z = fit.labels.as_ref().zip(fit.z_median.as_ref()).map(|(labels, median)| {
            let mut column = vec![0.0; fit.n_samples];
            (0..n_cells)
                .map(|cell| {
                    for (s, slot) in column.iter_mut().enumerate() {
                        *slot = labels[s * n_cells + cell] as f64;
                    }
                    column.sort_by(f64::total_cmp);
                    [
                        quantile_sorted(&column, 0.025).floor() as usize,
                        median[cell],
                        quantile_sorted(&column, 0.975).ceil() as usize,
                    ]
                })
                .collect()
        });
        CellSummary {
            theta_median: fit.theta_median.clone(),
            theta_lo: fit.theta_quantile(0.025),
            theta_hi: fit.theta_quantile(0.975),
            z,
        }
    }

    fn write_csv(&self, data: &StDataset, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(fs::File::create(path)?);
        writeln!(out, "area_id,period,y,e,theta_median,theta_lo,theta_hi,z_median,z_lo,z_hi")?;
        for (i, area) in data.area_ids().iter().enumerate() {
            for (t, period) in data.period_labels().iter().enumerate() {
                let k = data.cell(i, t);
                let z = match &self.z {
                    Some(z) => format!("{},{},{}", z[k][1], z[k][0], z[k][2]),
                    None => "NA,NA,NA".into(),
                };
                writeln!(
                    out,
                    "{area},{period},{},{},{},{},{},{z}",
                    data.y()[k],
                    fmt_f64(data.e()[k]),
                    fmt_f64(self.theta_median[k]),
                    fmt_f64(self.theta_lo[k]),
                    fmt_f64(self.theta_hi[k]),
                )?;
            }
        }
        out.flush()?;
        Ok(())
    }

    fn write_geojson(&self, data: &StDataset, centroids: &[[f64; 2]], path: &Path) -> Result<()> {
        let rounded = |x: f64| -> serde_json::Value {
            fmt_f64(x)
                .parse::<f64>()
                .ok()
                .and_then(serde_json::Number::from_f64)
                .map_or(serde_json::Value::Null, serde_json::Value::Number)
        };
        let mut features = Vec::with_capacity(data.n_cells());
        for (i, area) in data.area_ids().iter().enumerate() {
            for (t, period) in data.period_labels().iter().enumerate() {
                let k = data.cell(i, t);
                features.push(serde_json::json!({
                    "type": "Feature",
                    "geometry": {
                        "type": "Point",
                        "coordinates": [rounded(centroids[i][0]), rounded(centroids[i][1])],
                    },
                    "properties": {
                        "area_id": area,
                        "period": period,
                        "theta_median": rounded(self.theta_median[k]),
                        "theta_lo": rounded(self.theta_lo[k]),
                        "theta_hi": rounded(self.theta_hi[k]),
                        "z_median": self.z.as_ref().map(|z| z[k][1]),
                    },
                }));
            }
        }
        let doc = serde_json::json!({ "type": "FeatureCollection", "features": features });
        let mut out = std::io::BufWriter::new(fs::File::create(path)?);
        serde_json::to_writer(&mut out, &doc).map_err(|e| Error::Io(e.into()))?;
        writeln!(out)?;
        out.flush()?;
        Ok(())
    }
}

const FIT_HEADER: &str = "model,n_samples,dic,pd,lmpl,mean_deviance,zero_likelihood_cells";

fn write_fit_stats(fit: &FitResult, data: &StDataset, path: &Path) -> Result<()> {
    let dic = compute_dic(&fit.deviance, &fit.theta, data)?;
    let lmpl = compute_lmpl(&fit.theta, data)?;
    let mut out = fs::File::create(path)?;
    writeln!(out, "{FIT_HEADER}")?;
    writeln!(
        out,
        "{},{},{},{},{},{},{}",
        fit.model,
        fit.n_samples,
        fmt_f64(dic.dic),
        fmt_f64(dic.pd),
        fmt_f64(lmpl.lmpl),
        fmt_f64(dic.mean_deviance),
        lmpl.zero_likelihood_cells.len()
    )?;
    Ok(())
}

fn write_traces(fit: &FitResult, config: &McmcConfig, dir: &Path) -> Result<()> {
    let per_chain = fit.n_samples / config.n_chains.max(1);
    for trace in &fit.traces {
        let mut out = std::io::BufWriter::new(fs::File::create(dir.join(format!("trace_{}.csv", trace.name)))?);
        writeln!(out, "chain,iteration,value")?;
        for (s, v) in trace.values.iter().enumerate() {
            let (chain, draw) = (s / per_chain.max(1), s % per_chain.max(1));
            writeln!(out, "{},{},{}", chain + 1, config.n_burnin + (draw + 1) * config.thin, fmt_f64(*v))?;
        }
        out.flush()?;
    }
    let mut out = std::io::BufWriter::new(fs::File::create(dir.join("trace_deviance.csv"))?);
    writeln!(out, "chain,iteration,value")?;
    for (s, v) in fit.deviance.iter().enumerate() {
        let (chain, draw) = (s / per_chain.max(1), s % per_chain.max(1));
        writeln!(out, "{},{},{}", chain + 1, config.n_burnin + (draw + 1) * config.thin, fmt_f64(*v))?;
    }
    out.flush()?;
    Ok(())
}

fn write_acceptance(fit: &FitResult, path: &Path) -> Result<()> {
    let mut out = fs::File::create(path)?;
    writeln!(out, "block,rate")?;
    for acc in &fit.acceptance {
        writeln!(out, "{},{}", acc.block, fmt_f64(acc.rate))?;
    }
    Ok(())
}

fn write_lambda_samples(lambda: &[f64], n_periods: usize, g: usize, path: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    let header: Vec<String> = (1..=n_periods)
        .flat_map(|t| (1..=g).map(move |j| format!("lambda_{t}_{j}")))
        .collect();
    writeln!(out, "{}", header.join(","))?;
    for row in lambda.chunks(n_periods * g) {
        let line: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    out.flush()?;
    Ok(())
}

/// Per-period, per-class posterior summary of `exp(lambda)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassTrendRow {
    pub period: usize,
    pub class: usize,
    pub median: f64,
    pub lo: f64,
    pub hi: f64,
}

/// Reads `lambda_samples.csv` and summarises `exp(lambda_tj)`.
pub fn class_trend(path: &Path) -> Result<Vec<ClassTrendRow>> {
    if !path.exists() {
        return Err(Error::MissingArtifacts(path.to_path_buf()));
    }
    let mut reader = csv::Reader::from_path(path)?;
    let columns: Vec<(usize, usize)> = reader
        .headers()?
        .iter()
        .map(|h| {
            let mut parts = h.trim().strip_prefix("lambda_").unwrap_or("").split('_');
            match (parts.next().and_then(|v| v.parse().ok()), parts.next().and_then(|v| v.parse().ok())) {
                (Some(t), Some(j)) => Ok((t, j)),
                _ => Err(Error::parse(path, format!("unexpected column `{h}`"))),
            }
        })
        .collect::<Result<_>>()?;
    let mut samples: Vec<Vec<f64>> = vec![Vec::new(); columns.len()];
    for record in reader.records() {
        let record = record?;
        for (k, field) in record.iter().enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::parse(path, format!("`{field}` is not a number")))?;
            samples[k].push(v.exp());
        }
    }
    Ok(columns
        .into_iter()
        .zip(samples)
        .map(|((period, class), mut v)| {
            v.sort_by(f64::total_cmp);
            ClassTrendRow {
                period,
                class,
                median: quantile_sorted(&v, 0.5),
                lo: quantile_sorted(&v, 0.025),
                hi: quantile_sorted(&v, 0.975),
            }
        })
        .collect())
}

fn cmd_summarize(args: &SummarizeArgs, out: &mut impl Write) -> Result<()> {
    let fit_path = args.input.join("fit.csv");
    if !fit_path.exists() {
        return Err(Error::MissingArtifacts(fit_path));
    }
    let mut reader = csv::Reader::from_path(&fit_path)?;
    let header = reader.headers()?.clone();
    let record = reader
        .records()
        .next()
        .ok_or_else(|| Error::parse(&fit_path, "no statistics row"))??;
    for (key, value) in header.iter().zip(record.iter()) {
        writeln!(out, "{key}: {value}")?;
    }
    if args.class_trend {
        let rows = class_trend(&args.input.join("lambda_samples.csv"))?;
        writeln!(out, "period,class,risk_median,risk_lo,risk_hi")?;
        for r in rows {
            writeln!(
                out,
                "{},{},{},{},{}",
                r.period,
                r.class,
                fmt_f64(r.median),
                fmt_f64(r.lo),
                fmt_f64(r.hi)
            )?;
        }
    }
    Ok(())
}

fn parse_e_range(s: &str) -> Result<[f64; 2]> {
    let bad = || Error::InvalidConfig(format!("e-range `{s}` must look like low:high"));
    let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    Ok([lo, hi])
}

fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let config = StudyConfig {
        models: args.models.clone(),
        scenarios: args.scenarios.clone(),
        e_ranges: args.e_ranges.iter().map(|s| parse_e_range(s)).collect::<Result<_>>()?,
        n_replicates: args.replicates,
        mcmc: args.mcmc.config(),
        seed: args.mcmc.seed,
        gaussian_sd: args.gaussian_sd,
        correlation_range: args.correlation_range,
        ..StudyConfig::default()
    };
    if config.n_replicates == 0 {
        return Err(Error::InvalidConfig("--replicates must be positive".into()));
    }
    let results = run_study(&config)?;
    fs::create_dir_all(&args.out)?;
    results.write_results(&args.out.join("results.csv"), !args.omit_runtime)?;
    results.write_mean_table(&args.out.join("mean_table.csv"))?;
    let failed = results.rows.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        log::warn!("{failed} replicate fit(s) failed; see NaN rows in results.csv");
    }
    Ok(())
}

fn cmd_generate(args: &GenerateArgs) -> Result<()> {
    let lattice = default_lattice(DEFAULT_ROWS, DEFAULT_COLS)?;
    let mut scenario = Scenario::standard(args.scenario, parse_e_range(&args.e_range)?, DEFAULT_PERIODS)?;
    scenario.gaussian_sd = args.gaussian_sd;
    scenario.correlation_range = args.correlation_range;
    let truth = generate(&scenario, &lattice, args.seed)?;
    fs::create_dir_all(&args.out)?;
    write_dataset(&truth.dataset, &args.out.join("counts.csv"))?;

    let mut adjacency = std::io::BufWriter::new(fs::File::create(args.out.join("adjacency.csv"))?);
    writeln!(adjacency, "area_i,area_j")?;
    for (i, j) in lattice.graph.edges() {
        writeln!(adjacency, "{i},{j}")?;
    }
    adjacency.flush()?;

    let mut centroids = std::io::BufWriter::new(fs::File::create(args.out.join("centroids.csv"))?);
    writeln!(centroids, "area_id,x,y")?;
    for (id, c) in truth.dataset.area_ids().iter().zip(lattice.centroids()) {
        writeln!(centroids, "{id},{},{}", fmt_f64(c[0]), fmt_f64(c[1]))?;
    }
    centroids.flush()?;

    let mut out = std::io::BufWriter::new(fs::File::create(args.out.join("truth.csv"))?);
    writeln!(out, "area_id,period,theta,cluster")?;
    let data = &truth.dataset;
    for (i, area) in data.area_ids().iter().enumerate() {
        for (t, period) in data.period_labels().iter().enumerate() {
            let k = data.cell(i, t);
            writeln!(out, "{area},{period},{},{}", fmt_f64(truth.theta_true[k]), truth.partition_true[k])?;
        }
    }
    out.flush()?;
    Ok(())
}
