use crate::error::{Error, Result};
use crate::samples::SampleSet;

/// How the bounding box of a density grid is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoxPolicy {
    /// Centered on the sample midrange, twice as wide as the sample range.
    Auto,
    Explicit { lower: f64, upper: f64 },
}

impl Default for BoxPolicy {
    fn default() -> Self {
        BoxPolicy::Auto
    }
}

/// Uniform cell-centered grid on `[lower, upper]` with `num_points` cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    lower: f64,
    upper: f64,
    num_points: usize,
}

pub const MIN_GRID_POINTS: usize = 10;

impl GridSpec {
    pub fn new(lower: f64, upper: f64, num_points: usize) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite()) || upper <= lower {
            return Err(Error::invalid(format!(
                "grid bounds must satisfy upper > lower, got [{lower}, {upper}]"
            )));
        }
        if num_points < MIN_GRID_POINTS {
            return Err(Error::invalid(format!(
                "grid needs at least {MIN_GRID_POINTS} points, got {num_points}"
            )));
        }
        Ok(GridSpec {
            lower,
            upper,
            num_points,
        })
    }

    /// Builds a grid without the minimum-size check. Used for tiny test grids.
    #[cfg(test)]
    pub(crate) fn new_unchecked(lower: f64, upper: f64, num_points: usize) -> Self {
        debug_assert!(upper > lower && num_points > 0);
        GridSpec {
            lower,
            upper,
            num_points,
        }
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn len(&self) -> usize {
        self.num_points
    }

    pub fn is_empty(&self) -> bool {
        self.num_points == 0
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn spacing(&self) -> f64 {
        self.width() / self.num_points as f64
    }

    pub fn center(&self, i: usize) -> f64 {
        self.lower + (i as f64 + 0.5) * self.spacing()
    }

    pub fn centers(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.num_points).map(move |i| self.center(i))
    }

    /// Index of the cell containing `x`, or `None` outside the box.
    /// The upper edge belongs to the last cell.
    pub fn cell_of(&self, x: f64) -> Option<usize> {
        if !(x >= self.lower && x <= self.upper) {
            return None;
        }
        let i = ((x - self.lower) / self.spacing()).floor() as usize;
        Some(i.min(self.num_points - 1))
    }
}

/// Builds the grid for `samples` under `policy`.
pub fn make_grid(samples: &SampleSet, policy: BoxPolicy, num_points: usize) -> Result<GridSpec> {
    match policy {
        BoxPolicy::Explicit { lower, upper } => GridSpec::new(lower, upper, num_points),
        BoxPolicy::Auto => {
            if samples.len() < 2 {
                return Err(Error::invalid(
                    "automatic bounding box needs at least 2 samples",
                ));
            }
            let (min, max) = samples.range();
            if max <= min {
                return Err(Error::DegenerateBox(min));
            }
            let mid = 0.5 * (min + max);
            let width = 2.0 * (max - min);
            GridSpec::new(mid - 0.5 * width, mid + 0.5 * width, num_points)
        }
    }
}

/// Midpoint Riemann sum of per-cell values.
pub fn integrate(values: &[f64], grid: &GridSpec) -> Result<f64> {
    if values.len() != grid.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            got: values.len(),
        });
    }
    Ok(values.iter().sum::<f64>() * grid.spacing())
}
