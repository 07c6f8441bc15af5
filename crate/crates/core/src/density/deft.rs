//! Field-theoretic density estimation with a data-selected smoothness scale.
//!
//! The density is `Q = exp(-phi)` on a periodic grid. For a length scale
//! `l` the MAP field minimizes
//!
//! ```text
//! S_l[phi] = (l^(2a-1) / 2) int (d^a phi)^2 dx + N int R phi dx + N int exp(-phi) dx
//! ```
//!
//! where `R` is the raw histogram. The last term pins the normalization:
//! at the minimum `int exp(-phi) dx = 1`. Fields are traced from the widest
//! length scale down to the grid spacing by warm-started damped Newton
//! steps, and the returned density sits at the scale with the largest
//! Laplace log-evidence.

use super::skyline::Skyline;
use super::{histogram, make_grid, BoxPolicy, DensityEstimate, GridSpec, Method, RawHistogram};
use crate::error::{Error, Result};
use crate::samples::SampleSet;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeftOptions {
    /// Order of the derivative penalized by the smoothness prior.
    pub alpha: usize,
    pub num_points: usize,
    pub box_policy: BoxPolicy,
    /// Number of log-spaced length scales between the grid spacing and the box width.
    pub homotopy_steps: usize,
    /// Newton stops once the sup-norm of the field update falls below this,
    /// or once the predicted decrease of the action is at roundoff level.
    pub newton_tolerance: f64,
}

impl Default for DeftOptions {
    fn default() -> Self {
        DeftOptions {
            alpha: 3,
            num_points: 100,
            box_policy: BoxPolicy::Auto,
            homotopy_steps: 100,
            newton_tolerance: 1e-8,
        }
    }
}

impl DeftOptions {
    pub fn validate(&self) -> Result<()> {
        if self.alpha < 1 {
            return Err(Error::invalid("alpha must be >= 1"));
        }
        if self.homotopy_steps < 10 {
            return Err(Error::invalid("homotopy_steps must be >= 10"));
        }
        if self.num_points <= 2 * self.alpha {
            return Err(Error::invalid(format!(
                "{} grid points are too few for alpha = {}",
                self.num_points, self.alpha
            )));
        }
        if !(self.newton_tolerance > 0.0) {
            return Err(Error::invalid("newton_tolerance must be > 0"));
        }
        Ok(())
    }
}

pub const MIN_DEFT_SAMPLES: usize = 10;

/// One point of the length-scale scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalePoint {
    pub length_scale: f64,
    /// Laplace log-evidence up to an additive constant; `NaN` if Newton failed.
    pub log_evidence: f64,
    pub newton_iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DeftTrace {
    pub scan: Vec<ScalePoint>,
    pub selected: usize,
    pub dropped_samples: usize,
}

/// Fits on a grid chosen from `samples` by `options.box_policy`.
pub fn deft_fit(samples: &SampleSet, options: &DeftOptions) -> Result<DensityEstimate> {
    options.validate()?;
    let grid = make_grid(samples, options.box_policy, options.num_points)?;
    deft_fit_on_grid(samples, &grid, options).map(|(q, _)| q)
}

/// Fits on an externally supplied grid; `box_policy` and `num_points` in
/// `options` are ignored. Returns the scan trace alongside the estimate.
pub fn deft_fit_on_grid(
    samples: &SampleSet,
    grid: &GridSpec,
    options: &DeftOptions,
) -> Result<(DensityEstimate, DeftTrace)> {
    let opts = DeftOptions {
        num_points: grid.len(),
        ..*options
    };
    opts.validate()?;
    let hist = histogram(samples, grid)?;
    if hist.inside < MIN_DEFT_SAMPLES {
        return Err(Error::invalid(format!(
            "field estimate needs at least {MIN_DEFT_SAMPLES} samples inside the box, got {}",
            hist.inside
        )));
    }
    let solver = FieldProblem::new(&hist, opts.alpha);
    let h = grid.spacing();
    let l_max = grid.width();
    let l_min = h;
    let steps = opts.homotopy_steps;

    // Start at the widest scale from the uniform density on the box.
    let mut phi = vec![grid.width().ln(); grid.len()];
    let mut scan = Vec::with_capacity(steps);
    let mut best: Option<(f64, usize, Vec<f64>)> = None;
    let mut failures = Vec::new();
    for k in 0..steps {
        let t = k as f64 / (steps - 1) as f64;
        let ell = (l_max.ln() + t * (l_min.ln() - l_max.ln())).exp();
        let lambda = solver.lambda(ell);
        match solver.minimize(&phi, lambda, opts.newton_tolerance) {
            Ok((field, iters)) => {
                let ev = solver.log_evidence(&field, lambda);
                scan.push(ScalePoint {
                    length_scale: ell,
                    log_evidence: ev,
                    newton_iterations: iters,
                    converged: true,
                });
                if ev.is_finite() && best.as_ref().map_or(true, |(b, _, _)| ev > *b) {
                    best = Some((ev, k, field.clone()));
                }
                phi = field;
            }
            Err(iters) => {
                failures.push(ell);
                scan.push(ScalePoint {
                    length_scale: ell,
                    log_evidence: f64::NAN,
                    newton_iterations: iters,
                    converged: false,
                });
            }
        }
    }
    let (_, selected, field) = best.ok_or_else(|| {
        Error::NotConverged(format!(
            "Newton failed at all {} length scales in [{l_min:.3e}, {l_max:.3e}]",
            failures.len()
        ))
    })?;
    let ell = scan[selected].length_scale;
    let values = field.iter().map(|p| (-p).exp()).collect();
    let q = DensityEstimate::from_values(
        *grid,
        values,
        Method::Deft {
            length_scale: ell,
            alpha: opts.alpha,
        },
    )?;
    Ok((
        q,
        DeftTrace {
            scan,
            selected,
            dropped_samples: hist.dropped,
        },
    ))
}

/// Binomial stencil of `(-d^2)^alpha` on a unit-spaced periodic grid:
/// entry `k` is the coefficient at offset `k` for `k = 0..=alpha`.
fn smoothness_stencil(alpha: usize) -> Vec<f64> {
    let n = 2 * alpha;
    (0..=alpha)
        .map(|k| {
            let c = binomial(n, alpha + k);
            if k % 2 == 0 {
                c
            } else {
                -c
            }
        })
        .collect()
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// The action scaled by `1 / (N h)`:
/// `s(phi) = (lambda/2) phi' B phi + sum R phi + sum exp(-phi)`.
struct FieldProblem<'a> {
    hist: &'a RawHistogram,
    alpha: usize,
    stencil: Vec<f64>,
    n: f64,
    h: f64,
}

impl<'a> FieldProblem<'a> {
    fn new(hist: &'a RawHistogram, alpha: usize) -> Self {
        FieldProblem {
            hist,
            alpha,
            stencil: smoothness_stencil(alpha),
            n: hist.inside as f64,
            h: hist.grid.spacing(),
        }
    }

    fn g(&self) -> usize {
        self.hist.grid.len()
    }

    /// Coefficient of the smoothness term for length scale `ell`.
    fn lambda(&self, ell: f64) -> f64 {
        let p = (2 * self.alpha - 1) as f64;
        (ell / self.h).powf(p) / (self.n * self.h)
    }

    /// Periodic forward difference applied `alpha` times.
    fn diff_alpha(&self, phi: &[f64]) -> Vec<f64> {
        let g = self.g();
        let mut d = phi.to_vec();
        let mut next = vec![0.0; g];
        for _ in 0..self.alpha {
            for i in 0..g {
                next[i] = d[(i + 1) % g] - d[i];
            }
            std::mem::swap(&mut d, &mut next);
        }
        d
    }

    /// `B phi` as the adjoint differences of `diff_alpha`, avoiding the
    /// cancellation of the wide binomial stencil.
    fn apply_b(&self, phi: &[f64]) -> Vec<f64> {
        let g = self.g();
        let mut d = self.diff_alpha(phi);
        let mut next = vec![0.0; g];
        for _ in 0..self.alpha {
            for i in 0..g {
                next[i] = d[(i + g - 1) % g] - d[i];
            }
            std::mem::swap(&mut d, &mut next);
        }
        d
    }

    fn action(&self, phi: &[f64], lambda: f64) -> f64 {
        let smooth: f64 = self.diff_alpha(phi).iter().map(|v| v * v).sum();
        let data: f64 = phi
            .iter()
            .zip(&self.hist.densities)
            .map(|(p, r)| r * p + (-p).exp())
            .sum();
        0.5 * lambda * smooth + data
    }

    fn hessian(&self, phi: &[f64], lambda: f64) -> Skyline {
        let g = self.g();
        let mut m = Skyline::periodic_band(g, self.alpha);
        for i in 0..g {
            m.add(i, i, lambda * self.stencil[0] + (-phi[i]).exp());
            for k in 1..=self.alpha {
                let j = (i + k) % g;
                let (r, c) = if j > i { (j, i) } else { (i, j) };
                m.add(r, c, lambda * self.stencil[k]);
            }
        }
        m
    }

    /// Damped Newton from `start`. On failure returns the iteration count.
    fn minimize(&self, start: &[f64], lambda: f64, tol: f64) -> std::result::Result<(Vec<f64>, usize), usize> {
        const MAX_ITERS: usize = 200;
        let mut phi = start.to_vec();
        let mut s = self.action(&phi, lambda);
        for iter in 1..=MAX_ITERS {
            let bphi = self.apply_b(&phi);
            let grad: Vec<f64> = (0..self.g())
                .map(|i| lambda * bphi[i] + self.hist.densities[i] - (-phi[i]).exp())
                .collect();
            let chol = self.hessian(&phi, lambda).cholesky().map_err(|_| iter)?;
            let mut step = chol.solve(&grad);
            for v in step.iter_mut() {
                *v = -*v;
            }
            let slope: f64 = grad.iter().zip(&step).map(|(a, b)| a * b).sum();
            let size = step.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            // The predicted decrease -slope/2 hits roundoff before a noisy
            // step does in the stiff large-scale regime.
            if size < tol || -slope <= 1e-12 * s.abs().max(1.0) {
                for (p, d) in phi.iter_mut().zip(&step) {
                    *p += d;
                }
                return Ok((phi, iter));
            }
            // Inside the quadratic region the full step is taken unchecked:
            // the decrease it buys is below what the action resolves.
            if -slope < 1e-9 {
                for (p, d) in phi.iter_mut().zip(&step) {
                    *p += d;
                }
                s = self.action(&phi, lambda);
                continue;
            }
            // Backtracking line search on the convex action.
            let mut t = 1.0;
            let mut accepted = false;
            while t > 1e-12 {
                let trial: Vec<f64> = phi.iter().zip(&step).map(|(p, d)| p + t * d).collect();
                let st = self.action(&trial, lambda);
                if st.is_finite() && st <= s + 1e-4 * t * slope {
                    phi = trial;
                    s = st;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                // No representable decrease left: accept if the step is at
                // roundoff level relative to the field.
                let scale = phi.iter().fold(1.0f64, |m, v| m.max(v.abs()));
                if size < 1e-6 * scale {
                    return Ok((phi, iter));
                }
                return Err(iter);
            }
        }
        Err(MAX_ITERS)
    }

    /// Laplace log-evidence up to an `ell`-independent constant.
    fn log_evidence(&self, phi: &[f64], lambda: f64) -> f64 {
        let s = self.action(phi, lambda);
        let log_det = match self.hessian(phi, lambda).cholesky() {
            Ok(c) => c.log_det(),
            Err(_) => return f64::NAN,
        };
        let g = self.g() as f64;
        -self.n * self.h * s - 0.5 * log_det + 0.5 * (g - 1.0) * lambda.ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{integrate, kl_divergence};
    use crate::models::{normal_pdf, normal_sample, NormalParams};

    #[test]
    fn stencil_is_binomial() {
        assert_eq!(smoothness_stencil(1), vec![2.0, -1.0]);
        assert_eq!(smoothness_stencil(3), vec![20.0, -15.0, 6.0, -1.0]);
    }

    #[test]
    fn options_are_validated() {
        let bad = [
            DeftOptions { alpha: 0, ..Default::default() },
            DeftOptions { homotopy_steps: 9, ..Default::default() },
            DeftOptions { num_points: 6, ..Default::default() },
        ];
        for o in bad {
            assert!(o.validate().is_err(), "{o:?}");
        }
    }

    #[test]
    fn too_few_samples() {
        let s = SampleSet::new((0..5).map(|i| i as f64).collect()).unwrap();
        assert!(deft_fit(&s, &DeftOptions::default()).is_err());
        let flat = SampleSet::new(vec![1.0; 50]).unwrap();
        assert!(matches!(
            deft_fit(&flat, &DeftOptions::default()),
            Err(Error::DegenerateBox(_))
        ));
    }

    #[test]
    fn normal_fit_is_normalized_and_close() {
        let s = normal_sample(NormalParams::new(0.0, 1.0).unwrap(), 10_000, 7).unwrap();
        let grid = make_grid(&s, BoxPolicy::Auto, 100).unwrap();
        let (q, trace) = deft_fit_on_grid(&s, &grid, &DeftOptions::default()).unwrap();
        assert!((integrate(q.values(), &grid).unwrap() - 1.0).abs() < 1e-6);
        assert!(q.values().iter().all(|v| *v >= 0.0));
        let truth = DensityEstimate::analytic(grid, |x| normal_pdf(x, 0.0, 1.0)).unwrap();
        let kl = kl_divergence(&truth, &q).unwrap();
        assert!(kl < 0.01, "kl = {kl}");
        // The selected scale is interior to the scan.
        assert!(trace.selected > 0 && trace.selected + 1 < trace.scan.len(), "{}", trace.selected);
    }
}
