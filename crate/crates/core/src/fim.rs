//! Fisher information from finite differences of estimated densities.

use std::fmt::{self, Write as _};

use crate::density::{DensityEstimate, Estimator, GridSpec};
use crate::error::{Error, Result};
use crate::samples::SampleSet;
use crate::seed::derive_seed;

pub const DEFAULT_CUTOFF: f64 = 1e-10;
pub const MIN_CUTOFF: f64 = 1e-20;
pub const MAX_CUTOFF: f64 = 1e-2;
pub const DEFAULT_EPS_TARGET: f64 = 0.05;
/// An epsilon this many times the target is reported as too large.
pub const TOO_LARGE_FACTOR: f64 = 2.0;
/// Largest growth of the step in one calibration iteration.
pub const MAX_GROWTH: f64 = 4.0;

/// Named parameter values `theta`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterPoint {
    coords: Vec<(String, f64)>,
}

impl ParameterPoint {
    pub fn new<S: Into<String>>(coords: impl IntoIterator<Item = (S, f64)>) -> Result<Self> {
        let coords: Vec<(String, f64)> = coords.into_iter().map(|(n, v)| (n.into(), v)).collect();
        for (i, (name, v)) in coords.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::invalid(format!("parameter {name} is not finite")));
            }
            if coords[..i].iter().any(|(n, _)| n == name) {
                return Err(Error::invalid(format!("duplicate parameter {name}")));
            }
        }
        Ok(ParameterPoint { coords })
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.coords.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    pub fn coords(&self) -> &[(String, f64)] {
        &self.coords
    }

    /// Copy with only `name` moved by `delta`.
    pub fn shifted(&self, name: &str, delta: f64) -> Result<Self> {
        let mut out = self.clone();
        let slot = out
            .coords
            .iter_mut()
            .find(|(n, _)| n == name)
            .ok_or_else(|| Error::MissingStencilMember(name.to_string()))?;
        slot.1 += delta;
        Ok(out)
    }
}

/// Centered finite-difference discretization of the Fisher integrand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// `int (dp_mu)(dp_nu) / p`.
    DensityDiff,
    /// `int (d ln p_mu)(d ln p_nu) p`.
    LogDiff,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::DensityDiff => "density_diff",
            Scheme::LogDiff => "log_diff",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "density_diff" | "density-diff" | "2a" => Ok(Scheme::DensityDiff),
            "log_diff" | "log-diff" | "2b" => Ok(Scheme::LogDiff),
            _ => Err(Error::invalid(format!("unknown scheme {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FimOptions {
    pub scheme: Scheme,
    /// Grid cells where any involved density is below this contribute zero.
    pub cutoff: f64,
    pub eps_target: f64,
}

impl Default for FimOptions {
    fn default() -> Self {
        FimOptions {
            scheme: Scheme::LogDiff,
            cutoff: DEFAULT_CUTOFF,
            eps_target: DEFAULT_EPS_TARGET,
        }
    }
}

impl FimOptions {
    pub fn validate(&self) -> Result<()> {
        if !(MIN_CUTOFF..=MAX_CUTOFF).contains(&self.cutoff) {
            return Err(Error::invalid(format!(
                "cutoff must lie in [{MIN_CUTOFF:e}, {MAX_CUTOFF:e}], got {:e}",
                self.cutoff
            )));
        }
        if !(self.eps_target > 0.0) {
            return Err(Error::invalid("epsilon target must be > 0"));
        }
        Ok(())
    }
}

/// Densities at `theta +- delta` for one varied parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct Displacement {
    pub name: String,
    pub delta: f64,
    pub plus: DensityEstimate,
    pub minus: DensityEstimate,
}

/// Center density plus one displacement pair per varied parameter, all on
/// one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Stencil {
    center: ParameterPoint,
    density: DensityEstimate,
    displacements: Vec<Displacement>,
    n: usize,
}

impl Stencil {
    pub fn new(
        center: ParameterPoint,
        density: DensityEstimate,
        displacements: Vec<Displacement>,
        n: usize,
    ) -> Result<Self> {
        let grid = density.grid();
        for (i, d) in displacements.iter().enumerate() {
            if !(d.delta > 0.0 && d.delta.is_finite()) {
                return Err(Error::invalid(format!(
                    "step for {} must be > 0, got {}",
                    d.name, d.delta
                )));
            }
            if d.plus.grid() != grid || d.minus.grid() != grid {
                return Err(Error::GridMismatch);
            }
            if displacements[..i].iter().any(|o| o.name == d.name) {
                return Err(Error::invalid(format!("parameter {} displaced twice", d.name)));
            }
        }
        if n == 0 {
            return Err(Error::invalid("sample count must be >= 1"));
        }
        Ok(Stencil {
            center,
            density,
            displacements,
            n,
        })
    }

    /// Estimates every stencil density on one grid sized from the union of
    /// all sample sets.
    pub fn estimate(
        center: ParameterPoint,
        center_samples: &SampleSet,
        displaced: &[(String, f64, SampleSet, SampleSet)],
        estimator: &Estimator,
    ) -> Result<Self> {
        let union = SampleSet::union(
            std::iter::once(center_samples)
                .chain(displaced.iter().flat_map(|(_, _, p, m)| [p, m])),
        )?;
        let grid = estimator.make_grid(&union)?;
        let density = estimator.fit(center_samples, &grid)?;
        let displacements = displaced
            .iter()
            .map(|(name, delta, plus, minus)| {
                Ok(Displacement {
                    name: name.clone(),
                    delta: *delta,
                    plus: estimator.fit(plus, &grid)?,
                    minus: estimator.fit(minus, &grid)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Stencil::new(center, density, displacements, center_samples.len())
    }

    pub fn center(&self) -> &ParameterPoint {
        &self.center
    }

    pub fn density(&self) -> &DensityEstimate {
        &self.density
    }

    pub fn grid(&self) -> &GridSpec {
        self.density.grid()
    }

    pub fn displacements(&self) -> &[Displacement] {
        &self.displacements
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn names(&self) -> Vec<&str> {
        self.displacements.iter().map(|d| d.name.as_str()).collect()
    }

    pub fn deltas(&self) -> Vec<f64> {
        self.displacements.iter().map(|d| d.delta).collect()
    }

    fn displacement(&self, name: &str) -> Result<&Displacement> {
        self.displacements
            .iter()
            .find(|d| d.name == name)
            .ok_or_else(|| Error::MissingStencilMember(name.to_string()))
    }
}

/// One entry `g[mu][nu]` by grid quadrature of the chosen scheme.
pub fn fim_entry(stencil: &Stencil, mu: &str, nu: &str, options: &FimOptions) -> Result<f64> {
    options.validate()?;
    let a = stencil.displacement(mu)?;
    let b = stencil.displacement(nu)?;
    Ok(entry(stencil.density(), a, b, options))
}

fn entry(center: &DensityEstimate, a: &Displacement, b: &Displacement, options: &FimOptions) -> f64 {
    let p0 = center.values();
    let (ap, am) = (a.plus.values(), a.minus.values());
    let (bp, bm) = (b.plus.values(), b.minus.values());
    let (ca, cb) = (2.0 * a.delta, 2.0 * b.delta);
    let cut = options.cutoff;
    let mut acc = 0.0;
    for i in 0..p0.len() {
        let vals = [p0[i], ap[i], am[i], bp[i], bm[i]];
        if vals.iter().any(|v| *v < cut) {
            continue;
        }
        acc += match options.scheme {
            Scheme::DensityDiff => (ap[i] - am[i]) / ca * (bp[i] - bm[i]) / cb / p0[i],
            Scheme::LogDiff => {
                (ap[i].ln() - am[i].ln()) / ca * (bp[i].ln() - bm[i].ln()) / cb * p0[i]
            }
        };
    }
    acc * center.grid().spacing()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Ok,
    TooLarge,
    Undefined,
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Ok => "OK",
            Verdict::TooLarge => "TOO_LARGE",
            Verdict::Undefined => "UNDEFINED",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonReport {
    pub epsilon: f64,
    pub target: f64,
    pub verdict: Verdict,
}

impl EpsilonReport {
    pub fn new(epsilon: f64, target: f64) -> Self {
        let verdict = if !epsilon.is_finite() {
            Verdict::Undefined
        } else if epsilon > TOO_LARGE_FACTOR * target {
            Verdict::TooLarge
        } else {
            Verdict::Ok
        };
        EpsilonReport {
            epsilon,
            target,
            verdict,
        }
    }
}

/// `g_{mu nu} d^mu d^nu`.
pub fn quadratic_form(g: &[Vec<f64>], deltas: &[f64]) -> f64 {
    let mut q = 0.0;
    for (i, row) in g.iter().enumerate() {
        for (j, gij) in row.iter().enumerate() {
            q += gij * deltas[i] * deltas[j];
        }
    }
    q
}

/// Radius, in units of the step, inside which `n`-sample estimates cannot be
/// told apart: `sqrt(2 / (n g_{mu nu} d^mu d^nu))`. Infinite when the form is
/// not positive.
pub fn epsilon_radius(g: &[Vec<f64>], deltas: &[f64], n: usize) -> f64 {
    let q = quadratic_form(g, deltas);
    if !(q > 0.0) || n == 0 {
        return f64::INFINITY;
    }
    (2.0 / (n as f64 * q)).sqrt()
}

/// `exp(-n eps^2 / 2 * g_{mu nu} d^mu d^nu)`.
pub fn overlap_probability(g: &[Vec<f64>], deltas: &[f64], n: usize, eps: f64) -> f64 {
    let q = quadratic_form(g, deltas);
    (-(n as f64) * eps * eps / 2.0 * q).exp()
}

/// Step that makes the radius equal `target_eps` for a diagonal entry.
pub fn suggest_delta(g_diag: f64, n: usize, target_eps: f64) -> Result<f64> {
    if !(g_diag > 0.0 && g_diag.is_finite()) {
        return Err(Error::invalid(format!(
            "Fisher information must be > 0 to size a step, got {g_diag}"
        )));
    }
    if n == 0 || !(target_eps > 0.0) {
        return Err(Error::invalid("need n >= 1 and target epsilon > 0"));
    }
    Ok((2.0 / (target_eps * target_eps * n as f64 * g_diag)).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FimEstimate {
    pub names: Vec<String>,
    pub matrix: Vec<Vec<f64>>,
    /// `epsilon[mu][nu]` uses the displacement with components mu and nu.
    pub epsilon: Vec<Vec<EpsilonReport>>,
    /// Radius over all varied parameters at once.
    pub overall: EpsilonReport,
    pub n: usize,
    pub scheme: Scheme,
    pub cutoff: f64,
}

/// Full symmetric matrix over the stencil's varied parameters.
pub fn fim_matrix(stencil: &Stencil, options: &FimOptions) -> Result<FimEstimate> {
    options.validate()?;
    let disp = stencil.displacements();
    let d = disp.len();
    if d == 0 {
        return Err(Error::invalid("stencil varies no parameters"));
    }
    let mut g = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in i..d {
            let v = entry(stencil.density(), &disp[i], &disp[j], options);
            g[i][j] = v;
            g[j][i] = v;
        }
    }
    let deltas = stencil.deltas();
    let n = stencil.n();
    let epsilon = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| {
                    let mut dl = vec![0.0; d];
                    dl[i] = deltas[i];
                    dl[j] = deltas[j];
                    EpsilonReport::new(epsilon_radius(&g, &dl, n), options.eps_target)
                })
                .collect()
        })
        .collect();
    let overall = EpsilonReport::new(epsilon_radius(&g, &deltas, n), options.eps_target);
    Ok(FimEstimate {
        names: disp.iter().map(|x| x.name.clone()).collect(),
        matrix: g,
        epsilon,
        overall,
        n,
        scheme: options.scheme,
        cutoff: options.cutoff,
    })
}

impl FimEstimate {
    pub const CSV_HEADER: &'static str = "param_mu,param_nu,g,epsilon,verdict,N,scheme,cutoff";

    /// One row per ordered parameter pair, row-major.
    pub fn to_csv(&self) -> String {
        let mut out = format!("{}\n", Self::CSV_HEADER);
        for (i, a) in self.names.iter().enumerate() {
            for (j, b) in self.names.iter().enumerate() {
                let e = &self.epsilon[i][j];
                let _ = writeln!(
                    out,
                    "{a},{b},{:.16e},{},{},{},{},{:e}",
                    self.matrix[i][j],
                    if e.epsilon.is_finite() {
                        format!("{:.16e}", e.epsilon)
                    } else {
                        "inf".to_string()
                    },
                    e.verdict.name(),
                    self.n,
                    self.scheme,
                    self.cutoff
                );
            }
        }
        out
    }
}

/// Draws samples at arbitrary parameter values.
pub trait ParametricSampler {
    fn sample(&self, theta: &ParameterPoint, n: usize, seed: u64) -> Result<SampleSet>;
}

impl<F> ParametricSampler for F
where
    F: Fn(&ParameterPoint, usize, u64) -> Result<SampleSet>,
{
    fn sample(&self, theta: &ParameterPoint, n: usize, seed: u64) -> Result<SampleSet> {
        self(theta, n, seed)
    }
}

/// Normal family with parameters named `mu` and `sigma`.
#[derive(Debug, Clone, Copy, Default)]
pub struct NormalSampler;

impl ParametricSampler for NormalSampler {
    fn sample(&self, theta: &ParameterPoint, n: usize, seed: u64) -> Result<SampleSet> {
        let mu = theta.get("mu").unwrap_or(0.0);
        let sigma = theta
            .get("sigma")
            .ok_or_else(|| Error::MissingStencilMember("sigma".into()))?;
        crate::models::normal_sample(crate::models::NormalParams::new(mu, sigma)?, n, seed)
    }
}

/// Draws the three sample sets of a one-parameter stencil and estimates
/// the diagonal entry for `param`.
pub fn estimate_diagonal(
    sampler: &dyn ParametricSampler,
    theta: &ParameterPoint,
    param: &str,
    delta: f64,
    n: usize,
    estimator: &Estimator,
    options: &FimOptions,
    seed: u64,
) -> Result<f64> {
    let plus = theta.shifted(param, delta)?;
    let minus = theta.shifted(param, -delta)?;
    let s0 = sampler.sample(theta, n, derive_seed(seed, &[0]))?;
    let sp = sampler.sample(&plus, n, derive_seed(seed, &[1]))?;
    let sm = sampler.sample(&minus, n, derive_seed(seed, &[2]))?;
    let stencil = Stencil::estimate(
        theta.clone(),
        &s0,
        &[(param.to_string(), delta, sp, sm)],
        estimator,
    )?;
    fim_entry(&stencil, param, param, options)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationStep {
    pub delta: f64,
    pub g: f64,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub delta: f64,
    pub epsilon: f64,
    pub g: f64,
    pub history: Vec<CalibrationStep>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationOptions {
    pub n: usize,
    pub target_eps: f64,
    pub initial_delta: f64,
    pub max_iters: usize,
    pub seed: u64,
}

/// Grows the step until the radius from a fresh estimate is at most the
/// target. Each iteration draws new samples.
pub fn calibrate_delta(
    sampler: &dyn ParametricSampler,
    theta: &ParameterPoint,
    param: &str,
    estimator: &Estimator,
    fim: &FimOptions,
    cal: &CalibrationOptions,
) -> Result<Calibration> {
    fim.validate()?;
    if !(cal.initial_delta > 0.0) {
        return Err(Error::invalid("initial step must be > 0"));
    }
    if !(cal.target_eps > 0.0) || cal.n == 0 || cal.max_iters == 0 {
        return Err(Error::invalid(
            "calibration needs target epsilon > 0, n >= 1 and max_iters >= 1",
        ));
    }
    if theta.get(param).is_none() {
        return Err(Error::MissingStencilMember(param.to_string()));
    }
    let mut delta = cal.initial_delta;
    let mut history = Vec::new();
    for it in 0..cal.max_iters {
        let g = estimate_diagonal(
            sampler,
            theta,
            param,
            delta,
            cal.n,
            estimator,
            fim,
            derive_seed(cal.seed, &[it as u64]),
        )?;
        let eps = epsilon_radius(&[vec![g]], &[delta], cal.n);
        history.push(CalibrationStep {
            delta,
            g,
            epsilon: eps,
        });
        if eps <= cal.target_eps {
            return Ok(Calibration {
                delta,
                epsilon: eps,
                g,
                history,
            });
        }
        let growth = if eps.is_finite() {
            (eps / cal.target_eps).min(MAX_GROWTH)
        } else {
            MAX_GROWTH
        };
        delta *= growth;
    }
    Err(Error::CalibrationFailed {
        target: cal.target_eps,
        iterations: cal.max_iters,
        history,
    })
}
