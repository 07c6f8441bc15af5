//! Normal-family benchmarks: estimated `g_sigma_sigma` against `2 / sigma^2`.

use rayon::prelude::*;

use super::manifest::RunManifest;
use super::percentiles::{summarize_finite, PercentileSummary};
use super::table::{SweepResult, SweepRow};
use super::{get_deft, put_deft, ExperimentOutput};
use crate::density::{DeftOptions, Estimator, GridOptions, KdeOptions};
use crate::error::{Error, Result};
use crate::fim::{
    epsilon_radius, fim_entry, suggest_delta, FimOptions, ParameterPoint, Scheme, Stencil,
    DEFAULT_CUTOFF,
};
use crate::models::{normal_sample, NormalParams};
use crate::samples::SampleSet;
use crate::seed::derive_seed;

/// Step that puts the radius at `eps` for the `sigma` parameter: `sigma / (eps sqrt N)`.
pub fn sigma_step(sigma: f64, n: usize, eps: f64) -> Result<f64> {
    suggest_delta(2.0 / (sigma * sigma), n, eps)
}

/// Center, plus and minus sample sets for a `sigma` stencil.
pub fn sigma_stencil_samples(
    sigma: f64,
    delta: f64,
    n: usize,
    seed: u64,
) -> Result<[SampleSet; 3]> {
    if n == 0 {
        return Err(Error::invalid("sample count must be >= 1"));
    }
    if !(delta > 0.0 && delta < sigma) {
        return Err(Error::invalid(format!(
            "step {delta} must lie in (0, sigma = {sigma})"
        )));
    }
    let draw = |s: f64, k: u64| normal_sample(NormalParams::new(0.0, s)?, n, derive_seed(seed, &[k]));
    Ok([draw(sigma, 0)?, draw(sigma + delta, 1)?, draw(sigma - delta, 2)?])
}

/// `g_sigma_sigma` from one set of stencil samples.
pub fn estimate_sigma_fi(
    sigma: f64,
    delta: f64,
    samples: &[SampleSet; 3],
    estimator: &Estimator,
    options: &FimOptions,
) -> Result<f64> {
    let [s0, sp, sm] = samples;
    let stencil = Stencil::estimate(
        ParameterPoint::new([("sigma", sigma)])?,
        s0,
        &[("sigma".to_string(), delta, sp.clone(), sm.clone())],
        estimator,
    )?;
    fim_entry(&stencil, "sigma", "sigma", options)
}

/// `(g_analytic - estimate) / g_analytic`.
pub fn relative_error(sigma: f64, estimate: f64) -> f64 {
    let g = 2.0 / (sigma * sigma);
    (g - estimate) / g
}

fn check_common(n: usize, reps: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("sample count N must be >= 1"));
    }
    if reps == 0 {
        return Err(Error::invalid("need at least one repetition"));
    }
    Ok(())
}

fn check_sigmas(sigmas: &[f64]) -> Result<()> {
    if sigmas.is_empty() || sigmas.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
        return Err(Error::invalid("sigma list must be nonempty and positive"));
    }
    Ok(())
}

fn fingerprints(samples: &[SampleSet; 3]) -> String {
    samples
        .iter()
        .map(|s| format!("{:016x}", s.fingerprint()))
        .collect::<Vec<_>>()
        .join(" ")
}

// ---------------------------------------------------------------------------

/// DEFT against Gaussian KDE on identical samples.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalComparisonConfig {
    pub sigmas: Vec<f64>,
    pub n: usize,
    pub eps: f64,
    pub reps: usize,
    pub seed: u64,
    pub deft: DeftOptions,
    pub kde: KdeOptions,
    pub kde_grid: GridOptions,
    pub deft_scheme: Scheme,
    pub kde_scheme: Scheme,
    pub cutoff: f64,
}

impl Default for NormalComparisonConfig {
    fn default() -> Self {
        NormalComparisonConfig {
            sigmas: vec![0.5, 1.0, 2.0],
            n: 10_000,
            eps: 0.05,
            reps: 20,
            seed: 1,
            deft: DeftOptions::default(),
            kde: KdeOptions::default(),
            kde_grid: GridOptions::default(),
            deft_scheme: Scheme::DensityDiff,
            kde_scheme: Scheme::LogDiff,
            cutoff: DEFAULT_CUTOFF,
        }
    }
}

impl NormalComparisonConfig {
    pub const NAME: &'static str = "normal_comparison";

    pub fn paper_scale() -> Self {
        NormalComparisonConfig {
            sigmas: vec![0.5, 1.0, 2.0, 5.0, 10.0],
            reps: 100,
            ..Default::default()
        }
    }

    pub fn to_manifest(&self) -> RunManifest {
        let mut m = RunManifest::new(Self::NAME);
        m.set("seed", self.seed);
        m.set_list("sigmas", &self.sigmas);
        m.set("n", self.n);
        m.set("eps", self.eps);
        m.set("reps", self.reps);
        put_deft(&mut m, &self.deft);
        m.set("kde.bandwidth", super::bandwidth_text(&self.kde));
        m.set("kde.num_points", self.kde_grid.num_points);
        m.set("kde.box", super::box_text(&self.kde_grid.box_policy));
        m.set("deft.scheme", self.deft_scheme);
        m.set("kde.scheme", self.kde_scheme);
        m.set("cutoff", format!("{:e}", self.cutoff));
        m
    }

    pub fn from_manifest(m: &RunManifest) -> Result<Self> {
        Ok(NormalComparisonConfig {
            sigmas: m.parse_list("sigmas")?,
            n: m.parse_value("n")?,
            eps: m.parse_value("eps")?,
            reps: m.parse_value("reps")?,
            seed: m.parse_value("seed")?,
            deft: get_deft(m)?,
            kde: super::parse_bandwidth(m.require("kde.bandwidth")?)?,
            kde_grid: GridOptions {
                num_points: m.parse_value("kde.num_points")?,
                box_policy: super::parse_box(m.require("kde.box")?)?,
            },
            deft_scheme: m.parse_value("deft.scheme")?,
            kde_scheme: m.parse_value("kde.scheme")?,
            cutoff: m.parse_value("cutoff")?,
        })
    }
}

pub fn run_normal_comparison(cfg: &NormalComparisonConfig) -> Result<ExperimentOutput> {
    check_sigmas(&cfg.sigmas)?;
    check_common(cfg.n, cfg.reps)?;
    let deft = Estimator::Deft(cfg.deft);
    let kde = Estimator::Kde {
        options: cfg.kde,
        grid: cfg.kde_grid,
    };
    let deft_opts = FimOptions {
        scheme: cfg.deft_scheme,
        cutoff: cfg.cutoff,
        ..Default::default()
    };
    let kde_opts = FimOptions {
        scheme: cfg.kde_scheme,
        ..deft_opts
    };
    deft_opts.validate()?;
    let tasks: Vec<(usize, usize)> = (0..cfg.sigmas.len())
        .flat_map(|i| (0..cfg.reps).map(move |r| (i, r)))
        .collect();
    let results: Vec<(f64, f64, u64, String)> = tasks
        .par_iter()
        .map(|&(i, r)| {
            let sigma = cfg.sigmas[i];
            let seed = derive_seed(cfg.seed, &[i as u64, r as u64]);
            let delta = sigma_step(sigma, cfg.n, cfg.eps)?;
            let samples = sigma_stencil_samples(sigma, delta, cfg.n, seed)?;
            let gd = estimate_sigma_fi(sigma, delta, &samples, &deft, &deft_opts)?;
            let gk = estimate_sigma_fi(sigma, delta, &samples, &kde, &kde_opts)?;
            Ok((gd, gk, seed, fingerprints(&samples)))
        })
        .collect::<Result<_>>()?;

    let mut manifest = cfg.to_manifest();
    let mut table = SweepResult::new(
        NormalComparisonConfig::NAME,
        &["sigma"],
        &["deft_fi", "kde_fi", "deft_rel_err", "kde_rel_err"],
        &["analytic_fi", "delta_sigma", "epsilon"],
    );
    for (i, &sigma) in cfg.sigmas.iter().enumerate() {
        let chunk = &results[i * cfg.reps..(i + 1) * cfg.reps];
        let col = |f: &dyn Fn(&(f64, f64, u64, String)) -> f64| -> PercentileSummary {
            summarize_finite(&chunk.iter().map(f).collect::<Vec<_>>())
        };
        let delta = sigma_step(sigma, cfg.n, cfg.eps)?;
        let g = 2.0 / (sigma * sigma);
        table.rows.push(SweepRow {
            coords: vec![sigma],
            stats: vec![
                col(&|t| t.0),
                col(&|t| t.1),
                col(&|t| relative_error(sigma, t.0)),
                col(&|t| relative_error(sigma, t.1)),
            ],
            extras: vec![g, delta, epsilon_radius(&[vec![g]], &[delta], cfg.n)],
        });
        for (r, (_, _, seed, fp)) in chunk.iter().enumerate() {
            manifest.set(&format!("rep.{i}.{r}.seed"), seed);
            manifest.set(&format!("rep.{i}.{r}.samples"), fp);
        }
    }
    Ok(ExperimentOutput { table, manifest })
}

// ---------------------------------------------------------------------------

/// Relative error of DEFT estimates as a function of the radius epsilon.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsSweepConfig {
    pub sigmas: Vec<f64>,
    pub n: usize,
    pub eps_grid: Vec<f64>,
    pub reps: usize,
    pub seed: u64,
    pub deft: DeftOptions,
    pub scheme: Scheme,
    pub cutoff: f64,
}

impl Default for EpsSweepConfig {
    fn default() -> Self {
        EpsSweepConfig {
            sigmas: vec![0.5, 1.0, 2.0],
            n: 20_000,
            eps_grid: vec![0.01, 0.02, 0.03, 0.04, 0.05, 0.07, 0.1, 0.14, 0.2],
            reps: 20,
            seed: 2,
            deft: DeftOptions::default(),
            scheme: Scheme::DensityDiff,
            cutoff: DEFAULT_CUTOFF,
        }
    }
}

impl EpsSweepConfig {
    pub const NAME: &'static str = "eps_sweep";

    pub fn paper_scale() -> Self {
        EpsSweepConfig {
            sigmas: vec![0.5, 1.0, 2.0, 5.0, 10.0],
            reps: 100,
            ..Default::default()
        }
    }

    pub fn to_manifest(&self) -> RunManifest {
        let mut m = RunManifest::new(Self::NAME);
        m.set("seed", self.seed);
        m.set_list("sigmas", &self.sigmas);
        m.set("n", self.n);
        m.set_list("eps_grid", &self.eps_grid);
        m.set("reps", self.reps);
        put_deft(&mut m, &self.deft);
        m.set("scheme", self.scheme);
        m.set("cutoff", format!("{:e}", self.cutoff));
        m
    }

    pub fn from_manifest(m: &RunManifest) -> Result<Self> {
        Ok(EpsSweepConfig {
            sigmas: m.parse_list("sigmas")?,
            n: m.parse_value("n")?,
            eps_grid: m.parse_list("eps_grid")?,
            reps: m.parse_value("reps")?,
            seed: m.parse_value("seed")?,
            deft: get_deft(m)?,
            scheme: m.parse_value("scheme")?,
            cutoff: m.parse_value("cutoff")?,
        })
    }
}

pub fn run_epsilon_sweep(cfg: &EpsSweepConfig) -> Result<ExperimentOutput> {
    check_sigmas(&cfg.sigmas)?;
    check_common(cfg.n, cfg.reps)?;
    if cfg.eps_grid.is_empty() || cfg.eps_grid.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
        return Err(Error::invalid("epsilon grid must be nonempty and strictly positive"));
    }
    let est = Estimator::Deft(cfg.deft);
    let opts = FimOptions {
        scheme: cfg.scheme,
        cutoff: cfg.cutoff,
        ..Default::default()
    };
    opts.validate()?;
    let (ns, ne, nr) = (cfg.sigmas.len(), cfg.eps_grid.len(), cfg.reps);
    let tasks: Vec<(usize, usize, usize)> = (0..ns)
        .flat_map(|i| (0..ne).flat_map(move |j| (0..nr).map(move |r| (i, j, r))))
        .collect();
    let results: Vec<f64> = tasks
        .par_iter()
        .map(|&(i, j, r)| {
            let sigma = cfg.sigmas[i];
            let delta = sigma_step(sigma, cfg.n, cfg.eps_grid[j])?;
            let seed = derive_seed(cfg.seed, &[i as u64, j as u64, r as u64]);
            let samples = sigma_stencil_samples(sigma, delta, cfg.n, seed)?;
            estimate_sigma_fi(sigma, delta, &samples, &est, &opts)
        })
        .collect::<Result<_>>()?;
    let mut table = SweepResult::new(
        EpsSweepConfig::NAME,
        &["sigma", "eps"],
        &["rel_err", "abs_rel_err", "fi"],
        &["delta_sigma"],
    );
    for (i, &sigma) in cfg.sigmas.iter().enumerate() {
        for (j, &eps) in cfg.eps_grid.iter().enumerate() {
            let start = (i * ne + j) * nr;
            let g = &results[start..start + nr];
            let rel: Vec<f64> = g.iter().map(|v| relative_error(sigma, *v)).collect();
            let abs: Vec<f64> = rel.iter().map(|v| v.abs()).collect();
            table.rows.push(SweepRow {
                coords: vec![sigma, eps],
                stats: vec![summarize_finite(&rel), summarize_finite(&abs), summarize_finite(g)],
                extras: vec![sigma_step(sigma, cfg.n, eps)?],
            });
        }
    }
    Ok(ExperimentOutput {
        table,
        manifest: cfg.to_manifest(),
    })
}

/// The grid epsilon with the smallest median absolute relative error for `sigma`.
pub fn minimizing_eps(table: &SweepResult, sigma: f64) -> Option<f64> {
    let q = table.quantity_index("abs_rel_err")?;
    table
        .rows
        .iter()
        .filter(|r| r.coords[0] == sigma && !r.stats[q].is_missing())
        .min_by(|a, b| a.stats[q].median.total_cmp(&b.stats[q].median))
        .map(|r| r.coords[1])
}

// ---------------------------------------------------------------------------

/// Median absolute relative error over a grid of sample counts and steps.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapConfig {
    pub n_grid: Vec<usize>,
    pub delta_grid: Vec<f64>,
    pub sigma: f64,
    pub reps: usize,
    pub seed: u64,
    pub deft: DeftOptions,
    pub scheme: Scheme,
    pub cutoff: f64,
}

/// Radius of the reference contour drawn on the heat map.
pub const HEATMAP_CONTOUR_EPS: f64 = 0.1;
/// Step above which the truncation error dominates.
pub const HEATMAP_MAX_DELTA: f64 = 0.35;

impl Default for HeatmapConfig {
    fn default() -> Self {
        HeatmapConfig {
            n_grid: vec![2_000, 5_000, 10_000, 20_000, 50_000, 100_000],
            delta_grid: vec![0.03, 0.05, 0.07, 0.1, 0.14, 0.2, 0.25, 0.3, 0.35, 0.4, 0.5],
            sigma: 1.0,
            reps: 20,
            seed: 3,
            deft: DeftOptions::default(),
            scheme: Scheme::DensityDiff,
            cutoff: DEFAULT_CUTOFF,
        }
    }
}

impl HeatmapConfig {
    pub const NAME: &'static str = "n_delta_heatmap";

    pub fn paper_scale() -> Self {
        HeatmapConfig {
            reps: 100,
            ..Default::default()
        }
    }

    pub fn to_manifest(&self) -> RunManifest {
        let mut m = RunManifest::new(Self::NAME);
        m.set("seed", self.seed);
        let ns: Vec<f64> = self.n_grid.iter().map(|n| *n as f64).collect();
        m.set_list("n_grid", &ns);
        m.set_list("delta_grid", &self.delta_grid);
        m.set("sigma", self.sigma);
        m.set("reps", self.reps);
        put_deft(&mut m, &self.deft);
        m.set("scheme", self.scheme);
        m.set("cutoff", format!("{:e}", self.cutoff));
        m
    }

    pub fn from_manifest(m: &RunManifest) -> Result<Self> {
        let n_grid = m
            .parse_list("n_grid")?
            .into_iter()
            .map(|v| {
                if v >= 1.0 && v.fract() == 0.0 {
                    Ok(v as usize)
                } else {
                    Err(Error::invalid(format!("bad sample count {v} in n_grid")))
                }
            })
            .collect::<Result<_>>()?;
        Ok(HeatmapConfig {
            n_grid,
            delta_grid: m.parse_list("delta_grid")?,
            sigma: m.parse_value("sigma")?,
            reps: m.parse_value("reps")?,
            seed: m.parse_value("seed")?,
            deft: get_deft(m)?,
            scheme: m.parse_value("scheme")?,
            cutoff: m.parse_value("cutoff")?,
        })
    }
}

pub fn run_n_delta_heatmap(cfg: &HeatmapConfig) -> Result<ExperimentOutput> {
    check_sigmas(&[cfg.sigma])?;
    if cfg.n_grid.is_empty() || cfg.delta_grid.is_empty() {
        return Err(Error::invalid("heat map grids must be nonempty"));
    }
    if cfg.n_grid.contains(&0) {
        return Err(Error::invalid("sample counts must be >= 1"));
    }
    check_common(1, cfg.reps)?;
    let est = Estimator::Deft(cfg.deft);
    let opts = FimOptions {
        scheme: cfg.scheme,
        cutoff: cfg.cutoff,
        ..Default::default()
    };
    opts.validate()?;
    let (nn, nd, nr) = (cfg.n_grid.len(), cfg.delta_grid.len(), cfg.reps);
    let tasks: Vec<(usize, usize, usize)> = (0..nn)
        .flat_map(|i| (0..nd).flat_map(move |j| (0..nr).map(move |r| (i, j, r))))
        .collect();
    let results: Vec<f64> = tasks
        .par_iter()
        .map(|&(i, j, r)| {
            let seed = derive_seed(cfg.seed, &[i as u64, j as u64, r as u64]);
            let delta = cfg.delta_grid[j];
            let samples = sigma_stencil_samples(cfg.sigma, delta, cfg.n_grid[i], seed)?;
            let g = estimate_sigma_fi(cfg.sigma, delta, &samples, &est, &opts)?;
            Ok(relative_error(cfg.sigma, g).abs())
        })
        .collect::<Result<_>>()?;
    let mut table = SweepResult::new(
        HeatmapConfig::NAME,
        &["N", "delta_sigma"],
        &["abs_rel_err"],
        &["epsilon", "contour_delta_eps0.1", "line_delta"],
    );
    let g = 2.0 / (cfg.sigma * cfg.sigma);
    for (i, &n) in cfg.n_grid.iter().enumerate() {
        for (j, &delta) in cfg.delta_grid.iter().enumerate() {
            let start = (i * nd + j) * nr;
            table.rows.push(SweepRow {
                coords: vec![n as f64, delta],
                stats: vec![summarize_finite(&results[start..start + nr])],
                extras: vec![
                    epsilon_radius(&[vec![g]], &[delta], n),
                    cfg.sigma / (HEATMAP_CONTOUR_EPS * (n as f64).sqrt()),
                    HEATMAP_MAX_DELTA,
                ],
            });
        }
    }
    Ok(ExperimentOutput {
        table,
        manifest: cfg.to_manifest(),
    })
}

/// Per sample count: the step with the smallest median error, and the band
/// `[contour, line]` it is expected in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColumnMinimum {
    pub n: f64,
    pub best_delta: f64,
    pub contour_delta: f64,
    pub line_delta: f64,
}

impl ColumnMinimum {
    pub fn in_band(&self) -> bool {
        self.best_delta >= self.contour_delta && self.best_delta <= self.line_delta
    }
}

pub fn heatmap_column_minima(table: &SweepResult) -> Vec<ColumnMinimum> {
    let q = table.quantity_index("abs_rel_err").expect("heat map table");
    let c = table.extra_index("contour_delta_eps0.1").expect("heat map table");
    let l = table.extra_index("line_delta").expect("heat map table");
    let mut ns: Vec<f64> = table.rows.iter().map(|r| r.coords[0]).collect();
    ns.dedup();
    ns.iter()
        .filter_map(|&n| {
            let best = table
                .rows
                .iter()
                .filter(|r| r.coords[0] == n && !r.stats[q].is_missing())
                .min_by(|a, b| a.stats[q].median.total_cmp(&b.stats[q].median))?;
            Some(ColumnMinimum {
                n,
                best_delta: best.coords[1],
                contour_delta: best.extras[c],
                line_delta: best.extras[l],
            })
        })
        .collect()
}

