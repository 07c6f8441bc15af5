//! `npfisher` command-line front end.
//!
//! Every command writes a CSV and a `key = value` manifest into `--out`;
//! `npfisher replay <manifest>` reruns any of them from the manifest alone.

mod jobs;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use npfisher::density::{DeftOptions, Estimator, GridOptions};
use npfisher::experiments::{
    g_tt_peak, heatmap_column_minima, median_ratio_between, minimizing_eps, parse_bandwidth,
    parse_box, write_outputs, DeltaPolicy, EpsSweepConfig, Experiment, ExperimentOutput,
    HeatmapConfig, IsingSweepConfig, NormalComparisonConfig, RunManifest,
};
use npfisher::fim::{CalibrationOptions, FimOptions, Scheme};
use npfisher::models::critical_temperature;
use npfisher::{Error, Result};

pub use jobs::{CalibrateJob, DensityJob, FisherJob, Model, ParamFiles};

/// Nonparametric Fisher information estimation from samples.
#[derive(Debug, Parser)]
#[command(name = "npfisher", version, about, long_about = None)]
pub struct Cli {
    /// Worker threads for sweeps and repetitions [default: all cores]
    #[arg(long, global = true, value_parser = count)]
    threads: Option<usize>,
    /// Directory receiving CSV, manifest and SVG outputs (created if missing)
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a DEFT or KDE density to a sample file and write it as x,q CSV
    Density {
        /// Sample file: one real per line, '#' starts a comment
        input: PathBuf,
        #[command(flatten)]
        estimator: EstimatorArgs,
    },
    /// Fisher information matrix from stencil sample files
    Fisher(FisherArgs),
    /// Grow a parameter step until the epsilon radius meets a target
    Calibrate(CalibrateArgs),
    /// Normal benchmark: DEFT vs Gaussian KDE estimates of g_sigma_sigma
    BenchNormal(BenchNormalArgs),
    /// Relative error of g_sigma_sigma against the epsilon radius
    SweepEps(SweepEpsArgs),
    /// Median |relative error| over sample counts N and steps delta_sigma
    Heatmap(HeatmapArgs),
    /// 2-D Ising temperature sweep: g_TT, heat capacity and their ratio
    Ising(IsingArgs),
    /// Rerun any command from the manifest it wrote
    Replay {
        /// Manifest file written by an earlier run
        manifest: PathBuf,
    },
}

/// Nonnegative integer, also written in scientific notation (`1e4`).
fn count(s: &str) -> std::result::Result<usize, String> {
    if let Ok(v) = s.parse::<usize>() {
        return Ok(v);
    }
    match s.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 => Ok(v as usize),
        _ => Err(format!("expected a nonnegative integer, got {s:?}")),
    }
}

fn seed(s: &str) -> std::result::Result<u64, String> {
    s.parse::<u64>().or_else(|_| count(s).map(|v| v as u64))
}

fn scheme(s: &str) -> std::result::Result<Scheme, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// `NAME=VALUE`.
fn keyed<T: std::str::FromStr>(s: &str) -> std::result::Result<(String, T), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected NAME=VALUE, got {s:?}"))?;
    let v = v
        .parse()
        .map_err(|_| format!("cannot parse value in {s:?}"))?;
    if k.is_empty() {
        return Err(format!("empty parameter name in {s:?}"));
    }
    Ok((k.to_string(), v))
}

#[derive(Debug, Args)]
struct EstimatorArgs {
    /// Density estimator: deft or kde
    #[arg(long, default_value = "deft", value_parser = ["deft", "kde"])]
    method: String,
    /// Number of grid cells G
    #[arg(long, default_value = "100", value_parser = count)]
    grid_points: usize,
    /// Grid box in sample units: auto (midrange-centered, twice the sample range) or LOWER:UPPER
    #[arg(long = "box", default_value = "auto", allow_hyphen_values = true)]
    box_policy: String,
    /// DEFT: order of the penalized derivative
    #[arg(long, default_value = "3", value_parser = count)]
    alpha: usize,
    /// DEFT: number of log-spaced length scales scanned
    #[arg(long, default_value = "100", value_parser = count)]
    homotopy_steps: usize,
    /// DEFT: Newton stopping tolerance on the field update (dimensionless)
    #[arg(long, default_value = "1e-8")]
    newton_tol: f64,
    /// KDE: bandwidth in sample units, or scott for sd * N^(-1/5)
    #[arg(long, default_value = "scott")]
    bandwidth: String,
}

impl EstimatorArgs {
    fn resolve(&self) -> Result<Estimator> {
        let box_policy = parse_box(&self.box_policy)?;
        Ok(match self.method.as_str() {
            "kde" => Estimator::Kde {
                options: parse_bandwidth(&self.bandwidth)?,
                grid: GridOptions {
                    num_points: self.grid_points,
                    box_policy,
                },
            },
            _ => {
                let d = DeftOptions {
                    alpha: self.alpha,
                    num_points: self.grid_points,
                    box_policy,
                    homotopy_steps: self.homotopy_steps,
                    newton_tolerance: self.newton_tol,
                };
                d.validate()?;
                Estimator::Deft(d)
            }
        })
    }
}

#[derive(Debug, Args)]
struct FimArgs {
    /// Finite-difference scheme: 2a|density_diff or 2b|log_diff
    #[arg(long, default_value = "log_diff", value_parser = scheme)]
    scheme: Scheme,
    /// Density floor p_min (density units); cells where any stencil density is below it are dropped
    #[arg(long, default_value = "1e-10")]
    cutoff: f64,
    /// Target epsilon radius (units of the parameter step)
    #[arg(long, default_value = "0.05")]
    eps_target: f64,
}

impl FimArgs {
    fn resolve(&self) -> Result<FimOptions> {
        let f = FimOptions {
            scheme: self.scheme,
            cutoff: self.cutoff,
            eps_target: self.eps_target,
        };
        f.validate()?;
        Ok(f)
    }
}

#[derive(Debug, Args)]
struct FisherArgs {
    /// Samples drawn at the center parameter point
    #[arg(long)]
    center: PathBuf,
    /// NAME=FILE with samples at theta + delta along NAME (repeat per parameter)
    #[arg(long, value_parser = keyed::<PathBuf>, required = true)]
    plus: Vec<(String, PathBuf)>,
    /// NAME=FILE with samples at theta - delta along NAME (repeat per parameter)
    #[arg(long, value_parser = keyed::<PathBuf>, required = true)]
    minus: Vec<(String, PathBuf)>,
    /// NAME=STEP, the parameter step in parameter units (repeat per parameter)
    #[arg(long, value_parser = keyed::<f64>, required = true)]
    delta: Vec<(String, f64)>,
    /// NAME=VALUE, the center parameter value (recorded only) [default: 0]
    #[arg(long, value_parser = keyed::<f64>)]
    at: Vec<(String, f64)>,
    #[command(flatten)]
    estimator: EstimatorArgs,
    #[command(flatten)]
    fim: FimArgs,
}

impl FisherArgs {
    fn resolve(&self) -> Result<FisherJob> {
        let lookup = |list: &[(String, PathBuf)], name: &str, flag: &str| {
            let hits: Vec<&PathBuf> = list.iter().filter(|(k, _)| k == name).map(|(_, v)| v).collect();
            match hits.as_slice() {
                [one] => Ok((*one).clone()),
                [] => Err(Error::MissingStencilMember(format!("--{flag} {name}=FILE"))),
                _ => Err(Error::invalid(format!("--{flag} given twice for {name}"))),
            }
        };
        let mut params = Vec::new();
        for (name, delta) in &self.delta {
            if params.iter().any(|p: &ParamFiles| &p.name == name) {
                return Err(Error::invalid(format!("--delta given twice for {name}")));
            }
            params.push(ParamFiles {
                name: name.clone(),
                value: self.at.iter().find(|(k, _)| k == name).map(|(_, v)| *v).unwrap_or(0.0),
                delta: *delta,
                plus: lookup(&self.plus, name, "plus")?,
                minus: lookup(&self.minus, name, "minus")?,
            });
        }
        for (name, _) in self.plus.iter().chain(&self.minus).map(|(k, v)| (k, v)) {
            if !params.iter().any(|p| &p.name == name) {
                return Err(Error::invalid(format!("no --delta given for {name}")));
            }
        }
        Ok(FisherJob {
            center: self.center.clone(),
            params,
            estimator: self.estimator.resolve()?,
            fim: self.fim.resolve()?,
            fingerprints: Vec::new(),
        })
    }
}

#[derive(Debug, Args)]
struct CalibrateArgs {
    /// Built-in sampler: normal (parameters mu, sigma) or ising (parameter T, per-spin energies)
    #[arg(long, default_value = "normal", value_parser = ["normal", "ising"])]
    model: String,
    /// Parameter whose step is calibrated (mu or sigma for normal, T for ising)
    #[arg(long, default_value = "sigma")]
    param: String,
    /// Normal mean (sample units)
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    mu: f64,
    /// Normal standard deviation (sample units)
    #[arg(long, default_value = "1")]
    sigma: f64,
    /// Ising temperature in units of J / k_B
    #[arg(long, default_value = "2.5")]
    temperature: f64,
    /// Ising lattice side L (spins per row)
    #[arg(long = "L", default_value = "16", value_parser = count)]
    l: usize,
    /// Ising sweeps (L^2 proposals each) discarded before sampling
    #[arg(long, default_value = "2000", value_parser = count)]
    warmup: usize,
    /// Ising sweeps between recorded samples
    #[arg(long, default_value = "5", value_parser = count)]
    thin: usize,
    /// Samples per density estimate
    #[arg(long, default_value = "10000", value_parser = count)]
    n: usize,
    /// Target epsilon radius
    #[arg(long, default_value = "0.05")]
    target_eps: f64,
    /// First step tried (parameter units)
    #[arg(long, default_value = "0.01")]
    initial_delta: f64,
    /// Maximum number of step updates
    #[arg(long, default_value = "12", value_parser = count)]
    max_iters: usize,
    /// Master seed
    #[arg(long, default_value = "1", value_parser = seed)]
    seed: u64,
    #[command(flatten)]
    estimator: EstimatorArgs,
    #[command(flatten)]
    fim: FimArgs,
}

impl CalibrateArgs {
    fn resolve(&self) -> Result<CalibrateJob> {
        let model = match self.model.as_str() {
            "ising" => Model::Ising {
                temperature: self.temperature,
                l: self.l,
                warmup_sweeps: self.warmup,
                thin_sweeps: self.thin,
            },
            _ => Model::Normal {
                mu: self.mu,
                sigma: self.sigma,
            },
        };
        Ok(CalibrateJob {
            model,
            param: self.param.clone(),
            estimator: self.estimator.resolve()?,
            fim: self.fim.resolve()?,
            calibration: CalibrationOptions {
                n: self.n,
                target_eps: self.target_eps,
                initial_delta: self.initial_delta,
                max_iters: self.max_iters,
                seed: self.seed,
            },
        })
    }
}

/// DEFT overrides shared by the experiments.
#[derive(Debug, Args)]
struct DeftArgs {
    /// DEFT grid cells G [default: 100; 200 for ising]
    #[arg(long, value_parser = count)]
    grid_points: Option<usize>,
    /// DEFT box: auto or LOWER:UPPER in sample units [default: auto; -4:1 for ising]
    #[arg(long = "box", allow_hyphen_values = true)]
    box_policy: Option<String>,
    /// DEFT derivative order alpha [default: 3]
    #[arg(long, value_parser = count)]
    alpha: Option<usize>,
}

impl DeftArgs {
    fn apply(&self, d: &mut DeftOptions) -> Result<()> {
        if let Some(g) = self.grid_points {
            d.num_points = g;
        }
        if let Some(b) = &self.box_policy {
            d.box_policy = parse_box(b)?;
        }
        if let Some(a) = self.alpha {
            d.alpha = a;
        }
        d.validate()
    }
}

fn set<T: Clone>(slot: &mut T, v: &Option<T>) {
    if let Some(v) = v {
        *slot = v.clone();
    }
}

#[derive(Debug, Args)]
struct BenchNormalArgs {
    /// Use the published settings (100 repetitions, sigma in 0.5,1,2,5,10) as the base
    #[arg(long)]
    paper_scale: bool,
    /// Standard deviations, comma separated [default: 0.5,1,2]
    #[arg(long, value_delimiter = ',')]
    sigmas: Option<Vec<f64>>,
    /// Samples per density estimate [default: 10000]
    #[arg(long, value_parser = count)]
    n: Option<usize>,
    /// Epsilon radius that sets delta_sigma = sigma / (eps sqrt N) [default: 0.05]
    #[arg(long)]
    eps: Option<f64>,
    /// Repetitions per sigma [default: 20; 100 with --paper-scale]
    #[arg(long, value_parser = count)]
    reps: Option<usize>,
    /// Master seed [default: 1]
    #[arg(long, value_parser = seed)]
    seed: Option<u64>,
    /// Density floor p_min (density units) [default: 1e-10]
    #[arg(long)]
    cutoff: Option<f64>,
    /// KDE bandwidth: scott or a value in sample units [default: scott]
    #[arg(long)]
    bandwidth: Option<String>,
    /// KDE grid cells [default: 100]
    #[arg(long, value_parser = count)]
    kde_grid_points: Option<usize>,
    #[command(flatten)]
    deft: DeftArgs,
}

impl BenchNormalArgs {
    fn resolve(&self) -> Result<NormalComparisonConfig> {
        let mut c = if self.paper_scale {
            NormalComparisonConfig::paper_scale()
        } else {
            NormalComparisonConfig::default()
        };
        set(&mut c.sigmas, &self.sigmas);
        set(&mut c.n, &self.n);
        set(&mut c.eps, &self.eps);
        set(&mut c.reps, &self.reps);
        set(&mut c.seed, &self.seed);
        set(&mut c.cutoff, &self.cutoff);
        set(&mut c.kde_grid.num_points, &self.kde_grid_points);
        if let Some(b) = &self.bandwidth {
            c.kde = parse_bandwidth(b)?;
        }
        self.deft.apply(&mut c.deft)?;
        Ok(c)
    }
}

#[derive(Debug, Args)]
struct SweepEpsArgs {
    /// Use the published settings (100 repetitions, sigma in 0.5,1,2,5,10) as the base
    #[arg(long)]
    paper_scale: bool,
    /// Standard deviations, comma separated [default: 0.5,1,2]
    #[arg(long, value_delimiter = ',')]
    sigmas: Option<Vec<f64>>,
    /// Samples per density estimate [default: 20000]
    #[arg(long, value_parser = count)]
    n: Option<usize>,
    /// Epsilon radii, comma separated, all > 0 [default: 0.01,0.02,0.03,0.04,0.05,0.07,0.1,0.14,0.2]
    #[arg(long, value_delimiter = ',')]
    eps_grid: Option<Vec<f64>>,
    /// Repetitions per cell [default: 20; 100 with --paper-scale]
    #[arg(long, value_parser = count)]
    reps: Option<usize>,
    /// Master seed [default: 2]
    #[arg(long, value_parser = seed)]
    seed: Option<u64>,
    /// Finite-difference scheme [default: density_diff]
    #[arg(long, value_parser = scheme)]
    scheme: Option<Scheme>,
    /// Density floor p_min (density units) [default: 1e-10]
    #[arg(long)]
    cutoff: Option<f64>,
    #[command(flatten)]
    deft: DeftArgs,
}

impl SweepEpsArgs {
    fn resolve(&self) -> Result<EpsSweepConfig> {
        let mut c = if self.paper_scale {
            EpsSweepConfig::paper_scale()
        } else {
            EpsSweepConfig::default()
        };
        set(&mut c.sigmas, &self.sigmas);
        set(&mut c.n, &self.n);
        set(&mut c.eps_grid, &self.eps_grid);
        set(&mut c.reps, &self.reps);
        set(&mut c.seed, &self.seed);
        set(&mut c.scheme, &self.scheme);
        set(&mut c.cutoff, &self.cutoff);
        self.deft.apply(&mut c.deft)?;
        Ok(c)
    }
}

#[derive(Debug, Args)]
struct HeatmapArgs {
    /// Use the published settings (100 repetitions) as the base
    #[arg(long)]
    paper_scale: bool,
    /// Sample counts, comma separated [default: 2e3,5e3,1e4,2e4,5e4,1e5]
    #[arg(long, value_delimiter = ',', value_parser = count)]
    n_grid: Option<Vec<usize>>,
    /// Steps delta_sigma in units of sigma's scale, comma separated [default: 0.03,0.05,0.07,0.1,0.14,0.2,0.25,0.3,0.35,0.4,0.5]
    #[arg(long, value_delimiter = ',')]
    delta_grid: Option<Vec<f64>>,
    /// Standard deviation at the stencil center [default: 1]
    #[arg(long)]
    sigma: Option<f64>,
    /// Repetitions per cell [default: 20; 100 with --paper-scale]
    #[arg(long, value_parser = count)]
    reps: Option<usize>,
    /// Master seed [default: 3]
    #[arg(long, value_parser = seed)]
    seed: Option<u64>,
    /// Finite-difference scheme [default: density_diff]
    #[arg(long, value_parser = scheme)]
    scheme: Option<Scheme>,
    /// Density floor p_min (density units) [default: 1e-10]
    #[arg(long)]
    cutoff: Option<f64>,
    #[command(flatten)]
    deft: DeftArgs,
}

impl HeatmapArgs {
    fn resolve(&self) -> Result<HeatmapConfig> {
        let mut c = if self.paper_scale {
            HeatmapConfig::paper_scale()
        } else {
            HeatmapConfig::default()
        };
        set(&mut c.n_grid, &self.n_grid);
        set(&mut c.delta_grid, &self.delta_grid);
        set(&mut c.sigma, &self.sigma);
        set(&mut c.reps, &self.reps);
        set(&mut c.seed, &self.seed);
        set(&mut c.scheme, &self.scheme);
        set(&mut c.cutoff, &self.cutoff);
        self.deft.apply(&mut c.deft)?;
        Ok(c)
    }
}

#[derive(Debug, Args)]
struct IsingArgs {
    /// Use the published settings (L=25, 201 temperatures, N=15000, 5 repetitions) as the base
    #[arg(long)]
    paper_scale: bool,
    /// Lowest temperature, units of J / k_B [default: 0.5]
    #[arg(long)]
    t_min: Option<f64>,
    /// Highest temperature, units of J / k_B [default: 4.0]
    #[arg(long)]
    t_max: Option<f64>,
    /// Temperature segments; the grid has segments + 1 points [default: 39]
    #[arg(long, value_parser = count)]
    segments: Option<usize>,
    /// Lattice side L [default: 16]
    #[arg(long = "L", value_parser = count)]
    l: Option<usize>,
    /// Sweeps (L^2 proposals each) discarded before sampling [default: 2000]
    #[arg(long, value_parser = count)]
    warmup: Option<usize>,
    /// Sweeps between recorded energies [default: 5]
    #[arg(long, value_parser = count)]
    thin: Option<usize>,
    /// Energy samples per chain N [default: 5000]
    #[arg(long, value_parser = count)]
    samples: Option<usize>,
    /// Fixed temperature step Delta T (units of J / k_B); replaces the suggested step [default: none]
    #[arg(long)]
    delta_t: Option<f64>,
    /// Target epsilon for the suggested step from the pilot C_h L^2 / T^2 [default: 0.1]
    #[arg(long)]
    dt_eps_target: Option<f64>,
    /// Largest suggested step, also capped at T/2 (units of J / k_B) [default: 0.25]
    #[arg(long)]
    dt_max: Option<f64>,
    /// Repetitions per temperature [default: 3; 5 with --paper-scale]
    #[arg(long, value_parser = count)]
    reps: Option<usize>,
    /// Master seed [default: 4]
    #[arg(long, value_parser = seed)]
    seed: Option<u64>,
    /// Finite-difference scheme [default: log_diff]
    #[arg(long, value_parser = scheme)]
    scheme: Option<Scheme>,
    /// Density floor p_min (per-spin energy density units) [default: 1e-10]
    #[arg(long)]
    cutoff: Option<f64>,
    #[command(flatten)]
    deft: DeftArgs,
}

impl IsingArgs {
    fn resolve(&self) -> Result<IsingSweepConfig> {
        let mut c = if self.paper_scale {
            IsingSweepConfig::paper_scale()
        } else {
            IsingSweepConfig::default()
        };
        set(&mut c.t_min, &self.t_min);
        set(&mut c.t_max, &self.t_max);
        set(&mut c.segments, &self.segments);
        set(&mut c.template.l, &self.l);
        set(&mut c.template.warmup_sweeps, &self.warmup);
        set(&mut c.template.thin_sweeps, &self.thin);
        set(&mut c.template.n_samples, &self.samples);
        set(&mut c.reps, &self.reps);
        set(&mut c.seed, &self.seed);
        set(&mut c.scheme, &self.scheme);
        set(&mut c.cutoff, &self.cutoff);
        if let Some(d) = self.delta_t {
            c.delta = DeltaPolicy::Fixed(d);
        } else if let DeltaPolicy::Suggest { target_eps, max_delta } = &mut c.delta {
            set(target_eps, &self.dt_eps_target);
            set(max_delta, &self.dt_max);
        }
        self.deft.apply(&mut c.deft)?;
        c.validate()?;
        Ok(c)
    }
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code. Usage errors exit with 2, runtime errors with 1.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(text) => {
            print!("{text}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

/// Runs a parsed command and returns the text it reports on stdout.
pub fn execute(cli: &Cli) -> Result<String> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        pool = pool.num_threads(t);
    }
    let pool = pool
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker threads: {e}")))?;
    pool.install(|| dispatch(&cli.command, &cli.out))
}

fn dispatch(cmd: &Command, out: &Path) -> Result<String> {
    match cmd {
        Command::Density { input, estimator } => DensityJob {
            input: input.clone(),
            estimator: estimator.resolve()?,
            fingerprint: None,
        }
        .run(out),
        Command::Fisher(a) => a.resolve()?.run(out),
        Command::Calibrate(a) => a.resolve()?.run(out),
        Command::BenchNormal(a) => experiment(Experiment::NormalComparison(a.resolve()?), out),
        Command::SweepEps(a) => experiment(Experiment::EpsSweep(a.resolve()?), out),
        Command::Heatmap(a) => experiment(Experiment::Heatmap(a.resolve()?), out),
        Command::Ising(a) => experiment(Experiment::IsingSweep(a.resolve()?), out),
        Command::Replay { manifest } => {
            let m = RunManifest::read(manifest)?;
            match m.require("experiment")? {
                DensityJob::NAME => DensityJob::from_manifest(&m)?.run(out),
                FisherJob::NAME => FisherJob::from_manifest(&m)?.run(out),
                CalibrateJob::NAME => CalibrateJob::from_manifest(&m)?.run(out),
                _ => experiment(Experiment::from_manifest(&m)?, out),
            }
        }
    }
}

fn experiment(e: Experiment, out: &Path) -> Result<String> {
    let ExperimentOutput { table, manifest } = e.run()?;
    let files = write_outputs(&table, &manifest, out)?;
    let mut text = summary(&e, &table);
    let _ = writeln!(
        text,
        "wrote {}, {} and {}",
        files.csv.display(),
        files.manifest.display(),
        files.svg.display()
    );
    Ok(text)
}

fn summary(e: &Experiment, table: &npfisher::experiments::SweepResult) -> String {
    let mut s = String::new();
    let stat = |row: &npfisher::experiments::SweepRow, q: &str| {
        let st = row.stats[table.quantity_index(q).expect("known column")];
        format!("{:+.3} [{:+.3}, {:+.3}]", st.median, st.p5, st.p95)
    };
    match e {
        Experiment::NormalComparison(_) => {
            let _ = writeln!(s, "relative error (2/sigma^2 - FI) / (2/sigma^2): median [p5, p95]");
            for r in &table.rows {
                let _ = writeln!(
                    s,
                    "sigma = {:<5} DEFT {}  KDE {}",
                    r.coords[0],
                    stat(r, "deft_rel_err"),
                    stat(r, "kde_rel_err")
                );
            }
        }
        Experiment::EpsSweep(c) => {
            for sigma in &c.sigmas {
                let _ = writeln!(
                    s,
                    "sigma = {sigma}: smallest median |relative error| at eps = {}",
                    minimizing_eps(table, *sigma).map_or("-".into(), |v| v.to_string())
                );
            }
        }
        Experiment::Heatmap(_) => {
            for c in heatmap_column_minima(table) {
                let _ = writeln!(
                    s,
                    "N = {:<7} best delta_sigma = {:<5} band [{:.3}, {}] {}",
                    c.n,
                    c.best_delta,
                    c.contour_delta,
                    c.line_delta,
                    if c.in_band() { "inside" } else { "outside" }
                );
            }
        }
        Experiment::IsingSweep(_) => {
            let _ = writeln!(
                s,
                "g_TT peak at T = {} (T_c = {:.4}); median ratio g_TT T^2 / (C_h L^2) over T in [2, 3]: {}",
                g_tt_peak(table).map_or("-".into(), |v| v.to_string()),
                critical_temperature(),
                median_ratio_between(table, 2.0, 3.0).map_or("-".into(), |v| format!("{v:.3}"))
            );
        }
    }
    s
}
