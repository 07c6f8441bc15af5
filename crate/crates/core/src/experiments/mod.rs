//! Seeded, replayable experiment runners with percentile aggregation and
//! CSV / manifest / SVG output.
//!
//! Every runner takes a config record, splits the master seed per sweep
//! cell and repetition with [`derive_seed`](crate::seed::derive_seed), runs
//! the tasks on the rayon pool and aggregates them in sweep-index order,
//! so the table does not depend on the number of worker threads.

mod ising;
mod manifest;
mod normal;
mod output;
mod percentiles;
pub mod svg;
mod table;

pub use ising::{
    g_tt_peak, ising_point, median_ratio_between, run_ising_sweep, DeltaPolicy, IsingPoint,
    IsingSweepConfig,
};
pub use manifest::RunManifest;
pub use normal::{
    estimate_sigma_fi, heatmap_column_minima, minimizing_eps, relative_error,
    run_epsilon_sweep, run_n_delta_heatmap, run_normal_comparison, sigma_step,
    sigma_stencil_samples, ColumnMinimum, EpsSweepConfig, HeatmapConfig,
    NormalComparisonConfig, HEATMAP_CONTOUR_EPS, HEATMAP_MAX_DELTA,
};
pub use output::{plot, write_outputs, OutputFiles};
pub use percentiles::{nearest_rank, summarize_finite, summarize_percentiles, PercentileSummary};
pub use table::{SweepResult, SweepRow};

use crate::density::{BandwidthRule, BoxPolicy, DeftOptions, Estimator, GridOptions, KdeOptions};
use crate::error::{Error, Result};

/// A result table and the manifest that reproduces it.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub table: SweepResult,
    pub manifest: RunManifest,
}

/// Any of the four experiments, with its resolved options.
#[derive(Debug, Clone, PartialEq)]
pub enum Experiment {
    NormalComparison(NormalComparisonConfig),
    EpsSweep(EpsSweepConfig),
    Heatmap(HeatmapConfig),
    IsingSweep(IsingSweepConfig),
}

impl Experiment {
    /// Rebuilds the experiment recorded in a manifest.
    pub fn from_manifest(m: &RunManifest) -> Result<Self> {
        match m.require("experiment")? {
            NormalComparisonConfig::NAME => {
                NormalComparisonConfig::from_manifest(m).map(Experiment::NormalComparison)
            }
            EpsSweepConfig::NAME => EpsSweepConfig::from_manifest(m).map(Experiment::EpsSweep),
            HeatmapConfig::NAME => HeatmapConfig::from_manifest(m).map(Experiment::Heatmap),
            IsingSweepConfig::NAME => IsingSweepConfig::from_manifest(m).map(Experiment::IsingSweep),
            other => Err(Error::invalid(format!("unknown experiment {other:?} in manifest"))),
        }
    }

    pub fn to_manifest(&self) -> RunManifest {
        match self {
            Experiment::NormalComparison(c) => c.to_manifest(),
            Experiment::EpsSweep(c) => c.to_manifest(),
            Experiment::Heatmap(c) => c.to_manifest(),
            Experiment::IsingSweep(c) => c.to_manifest(),
        }
    }

    pub fn run(&self) -> Result<ExperimentOutput> {
        match self {
            Experiment::NormalComparison(c) => run_normal_comparison(c),
            Experiment::EpsSweep(c) => run_epsilon_sweep(c),
            Experiment::Heatmap(c) => run_n_delta_heatmap(c),
            Experiment::IsingSweep(c) => run_ising_sweep(c),
        }
    }
}

/// Reruns the experiment described by a manifest.
pub fn replay(m: &RunManifest) -> Result<ExperimentOutput> {
    Experiment::from_manifest(m)?.run()
}

pub(crate) fn box_text(b: &BoxPolicy) -> String {
    match b {
        BoxPolicy::Auto => "auto".into(),
        BoxPolicy::Explicit { lower, upper } => format!("{lower}:{upper}"),
    }
}

/// `auto` or `lower:upper`.
pub fn parse_box(s: &str) -> Result<BoxPolicy> {
    let s = s.trim();
    if s.eq_ignore_ascii_case("auto") {
        return Ok(BoxPolicy::Auto);
    }
    let bad = || Error::invalid(format!("box must be 'auto' or 'lower:upper', got {s:?}"));
    let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
    let lower: f64 = lo.trim().parse().map_err(|_| bad())?;
    let upper: f64 = hi.trim().parse().map_err(|_| bad())?;
    if !(upper > lower) || !lower.is_finite() || !upper.is_finite() {
        return Err(Error::invalid(format!("box needs finite lower < upper, got {s:?}")));
    }
    Ok(BoxPolicy::Explicit { lower, upper })
}

pub(crate) fn bandwidth_text(k: &KdeOptions) -> String {
    match k.bandwidth {
        BandwidthRule::Scott => "scott".into(),
        BandwidthRule::Fixed(h) => h.to_string(),
    }
}

/// `scott` or a fixed positive bandwidth.
pub fn parse_bandwidth(s: &str) -> Result<KdeOptions> {
    let s = s.trim();
    let bandwidth = if s.eq_ignore_ascii_case("scott") {
        BandwidthRule::Scott
    } else {
        match s.parse::<f64>() {
            Ok(h) if h > 0.0 && h.is_finite() => BandwidthRule::Fixed(h),
            _ => return Err(Error::invalid(format!("bandwidth must be 'scott' or > 0, got {s:?}"))),
        }
    };
    Ok(KdeOptions { bandwidth })
}

/// Records an estimator under the `method`, `deft.*` or `kde.*` keys.
pub fn estimator_to_manifest(m: &mut RunManifest, e: &Estimator) {
    match e {
        Estimator::Deft(d) => {
            m.set("method", "deft");
            put_deft(m, d);
        }
        Estimator::Kde { options, grid } => {
            m.set("method", "kde");
            m.set("kde.bandwidth", bandwidth_text(options));
            m.set("kde.num_points", grid.num_points);
            m.set("kde.box", box_text(&grid.box_policy));
        }
    }
}

pub fn estimator_from_manifest(m: &RunManifest) -> Result<Estimator> {
    match m.require("method")? {
        "deft" => Ok(Estimator::Deft(get_deft(m)?)),
        "kde" => Ok(Estimator::Kde {
            options: parse_bandwidth(m.require("kde.bandwidth")?)?,
            grid: GridOptions {
                num_points: m.parse_value("kde.num_points")?,
                box_policy: parse_box(m.require("kde.box")?)?,
            },
        }),
        other => Err(Error::invalid(format!("unknown density method {other:?}"))),
    }
}

pub(crate) fn put_deft(m: &mut RunManifest, d: &DeftOptions) {
    m.set("deft.alpha", d.alpha);
    m.set("deft.num_points", d.num_points);
    m.set("deft.box", box_text(&d.box_policy));
    m.set("deft.homotopy_steps", d.homotopy_steps);
    m.set("deft.newton_tolerance", format!("{:e}", d.newton_tolerance));
}

pub(crate) fn get_deft(m: &RunManifest) -> Result<DeftOptions> {
    let d = DeftOptions {
        alpha: m.parse_value("deft.alpha")?,
        num_points: m.parse_value("deft.num_points")?,
        box_policy: parse_box(m.require("deft.box")?)?,
        homotopy_steps: m.parse_value("deft.homotopy_steps")?,
        newton_tolerance: m.parse_value("deft.newton_tolerance")?,
    };
    d.validate()?;
    Ok(d)
}
