//! One-dimensional densities on a uniform grid.

mod deft;
mod grid;
mod kde;
mod skyline;

use std::fmt::Write as _;
use std::path::Path;

pub use deft::{deft_fit, deft_fit_on_grid, DeftOptions, DeftTrace};
pub use grid::{integrate, make_grid, BoxPolicy, GridSpec, MIN_GRID_POINTS};
pub use kde::{kde_fit, scott_bandwidth, BandwidthRule, KdeOptions};

use crate::error::{Error, Result};
use crate::samples::SampleSet;

/// Densities below this are treated as zero by [`kl_divergence`].
pub const DEFAULT_KL_CUTOFF: f64 = 1e-10;

/// How a density estimate was produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Deft {
        /// Selected smoothness length scale, observable units.
        length_scale: f64,
        alpha: usize,
    },
    Kde {
        bandwidth: f64,
    },
    Analytic,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Deft { .. } => "deft",
            Method::Kde { .. } => "kde",
            Method::Analytic => "analytic",
        }
    }
}

/// Grid sizing shared by all densities of one stencil.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOptions {
    pub num_points: usize,
    pub box_policy: BoxPolicy,
}

impl Default for GridOptions {
    fn default() -> Self {
        GridOptions {
            num_points: 100,
            box_policy: BoxPolicy::Auto,
        }
    }
}

/// A density estimator together with its grid settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Estimator {
    Deft(DeftOptions),
    Kde { options: KdeOptions, grid: GridOptions },
}

impl Estimator {
    pub fn grid_options(&self) -> GridOptions {
        match self {
            Estimator::Deft(o) => GridOptions {
                num_points: o.num_points,
                box_policy: o.box_policy,
            },
            Estimator::Kde { grid, .. } => *grid,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Estimator::Deft(_) => "deft",
            Estimator::Kde { .. } => "kde",
        }
    }

    /// Builds the grid for `samples` from this estimator's grid settings.
    pub fn make_grid(&self, samples: &SampleSet) -> Result<GridSpec> {
        let g = self.grid_options();
        make_grid(samples, g.box_policy, g.num_points)
    }

    pub fn fit(&self, samples: &SampleSet, grid: &GridSpec) -> Result<DensityEstimate> {
        match self {
            Estimator::Deft(o) => deft_fit_on_grid(samples, grid, o).map(|(q, _)| q),
            Estimator::Kde { options, .. } => kde_fit(samples, grid, options),
        }
    }
}

/// Per-cell data density `R_i = count_i / (N_inside * h)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RawHistogram {
    pub grid: GridSpec,
    pub densities: Vec<f64>,
    pub counts: Vec<usize>,
    pub inside: usize,
    pub dropped: usize,
}

/// Bins `samples` on `grid`. Samples outside the box are dropped and counted.
pub fn histogram(samples: &SampleSet, grid: &GridSpec) -> Result<RawHistogram> {
    let mut counts = vec![0usize; grid.len()];
    let mut dropped = 0;
    for &x in samples.values() {
        match grid.cell_of(x) {
            Some(i) => counts[i] += 1,
            None => dropped += 1,
        }
    }
    let inside = samples.len() - dropped;
    if inside == 0 {
        return Err(Error::NoSamplesInBox(
            samples.len(),
            grid.lower(),
            grid.upper(),
        ));
    }
    let scale = 1.0 / (inside as f64 * grid.spacing());
    let densities = counts.iter().map(|&c| c as f64 * scale).collect();
    Ok(RawHistogram {
        grid: *grid,
        densities,
        counts,
        inside,
        dropped,
    })
}

/// A normalized, nonnegative density sampled at the cell centers of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityEstimate {
    grid: GridSpec,
    values: Vec<f64>,
    method: Method,
}

impl DensityEstimate {
    /// Wraps per-cell values, clamping tiny negatives from roundoff and
    /// renormalizing so the grid quadrature is exactly one.
    pub fn from_values(grid: GridSpec, mut values: Vec<f64>, method: Method) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite() || *v < -1e-12) {
            return Err(Error::invalid("density values must be finite and nonnegative"));
        }
        for v in values.iter_mut() {
            *v = v.max(0.0);
        }
        let mass = integrate(&values, &grid)?;
        if !(mass > 0.0) {
            return Err(Error::invalid("density has zero mass on the grid"));
        }
        for v in values.iter_mut() {
            *v /= mass;
        }
        Ok(DensityEstimate {
            grid,
            values,
            method,
        })
    }

    /// Evaluates `pdf` at the cell centers and renormalizes on the grid.
    pub fn analytic(grid: GridSpec, pdf: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.centers().map(pdf).collect();
        Self::from_values(grid, values, Method::Analytic)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.spacing()
    }

    /// CSV with header `x,q`, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,q\n");
        for (x, q) in self.grid.centers().zip(&self.values) {
            let _ = writeln!(out, "{},{}", fmt17(x), fmt17(*q));
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

/// Formats with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// `KL(q || p)` in nats using [`DEFAULT_KL_CUTOFF`].
pub fn kl_divergence(q: &DensityEstimate, p: &DensityEstimate) -> Result<f64> {
    kl_divergence_with_cutoff(q, p, DEFAULT_KL_CUTOFF)
}

/// Grid quadrature of `q ln(q/p)`. Cells with `q < cutoff` contribute
/// nothing; a cell with `q >= cutoff` and `p < cutoff` makes the result
/// infinite.
pub fn kl_divergence_with_cutoff(
    q: &DensityEstimate,
    p: &DensityEstimate,
    cutoff: f64,
) -> Result<f64> {
    if q.grid != p.grid {
        return Err(Error::GridMismatch);
    }
    let mut acc = 0.0;
    for (&qi, &pi) in q.values.iter().zip(&p.values) {
        if qi < cutoff {
            continue;
        }
        if pi < cutoff {
            return Ok(f64::INFINITY);
        }
        acc += qi * (qi / pi).ln();
    }
    Ok(acc * q.grid.spacing())
}
