use std::f64::consts::PI;

use super::{DensityEstimate, GridSpec, Method};
use crate::error::{Error, Result};
use crate::samples::SampleSet;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BandwidthRule {
    /// `h = sd * N^(-1/5)`.
    Scott,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KdeOptions {
    pub bandwidth: BandwidthRule,
}

impl Default for KdeOptions {
    fn default() -> Self {
        KdeOptions {
            bandwidth: BandwidthRule::Scott,
        }
    }
}

/// Scott's rule for a one-dimensional Gaussian kernel.
pub fn scott_bandwidth(samples: &SampleSet) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::invalid("Scott's rule needs at least 2 samples"));
    }
    let sd = samples.variance().sqrt();
    if !(sd > 0.0) {
        return Err(Error::invalid("Scott's rule needs a positive sample spread"));
    }
    Ok(sd * (samples.len() as f64).powf(-0.2))
}

/// Gaussian-kernel density evaluated at the cell centers of `grid`, then
/// renormalized on the grid.
pub fn kde_fit(samples: &SampleSet, grid: &GridSpec, options: &KdeOptions) -> Result<DensityEstimate> {
    let h = match options.bandwidth {
        BandwidthRule::Scott => scott_bandwidth(samples)?,
        BandwidthRule::Fixed(h) if h > 0.0 && h.is_finite() => h,
        BandwidthRule::Fixed(h) => {
            return Err(Error::invalid(format!("KDE bandwidth must be > 0, got {h}")))
        }
    };
    let centers: Vec<f64> = grid.centers().collect();
    let mut values = vec![0.0; centers.len()];
    let inv_h = 1.0 / h;
    // Kernels are negligible past this many bandwidths.
    let reach = 9.0 * h;
    for &x in samples.values() {
        let lo = ((x - reach - grid.lower()) / grid.spacing()).floor().max(0.0) as usize;
        let hi = (((x + reach - grid.lower()) / grid.spacing()).ceil().max(0.0) as usize).min(centers.len());
        for i in lo..hi {
            let u = (centers[i] - x) * inv_h;
            values[i] += (-0.5 * u * u).exp();
        }
    }
    let norm = inv_h / ((2.0 * PI).sqrt() * samples.len() as f64);
    for v in values.iter_mut() {
        *v *= norm;
    }
    if values.iter().all(|v| *v == 0.0) {
        return Err(Error::NoSamplesInBox(samples.len(), grid.lower(), grid.upper()));
    }
    DensityEstimate::from_values(*grid, values, Method::Kde { bandwidth: h })
}
