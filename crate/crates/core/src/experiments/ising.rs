//! Temperature sweep of the 2-D Ising model: `g_TT` from energy densities
//! against the heat capacity.

use rayon::prelude::*;

use super::manifest::RunManifest;
use super::percentiles::summarize_finite;
use super::table::{SweepResult, SweepRow};
use super::{get_deft, put_deft, ExperimentOutput};
use crate::density::{BoxPolicy, DeftOptions, Estimator};
use crate::error::{Error, Result};
use crate::fim::{
    epsilon_radius, fim_entry, suggest_delta, FimOptions, ParameterPoint, Scheme, Stencil,
    DEFAULT_CUTOFF,
};
use crate::models::{heat_capacity, ising_sample_energies, IsingConfig};
use crate::samples::SampleSet;
use crate::seed::derive_seed;

/// How the temperature step of the stencil is chosen at each `T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeltaPolicy {
    /// Size the step for radius `target_eps` using the pilot
    /// `g_TT = C_h L^2 / T^2` from the center chain, capped at
    /// `min(max_delta, T / 2)`.
    Suggest { target_eps: f64, max_delta: f64 },
    Fixed(f64),
}

impl Default for DeltaPolicy {
    fn default() -> Self {
        DeltaPolicy::Suggest {
            target_eps: 0.1,
            max_delta: 0.25,
        }
    }
}

impl DeltaPolicy {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            DeltaPolicy::Suggest { target_eps, max_delta } => target_eps > 0.0 && max_delta > 0.0,
            DeltaPolicy::Fixed(d) => d > 0.0 && d.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("invalid temperature step policy {self:?}")))
        }
    }

    /// Step at temperature `t` given the pilot information (may be 0).
    pub fn step(&self, t: f64, pilot_g: f64, n: usize) -> Result<f64> {
        let d = match *self {
            DeltaPolicy::Fixed(d) => d,
            DeltaPolicy::Suggest { target_eps, max_delta } => {
                let cap = max_delta.min(t / 2.0);
                if pilot_g > 0.0 && pilot_g.is_finite() {
                    suggest_delta(pilot_g, n, target_eps)?.min(cap)
                } else {
                    cap
                }
            }
        };
        if d >= t {
            return Err(Error::invalid(format!(
                "temperature step {d} would reach T <= 0 at T = {t}"
            )));
        }
        Ok(d)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsingSweepConfig {
    pub t_min: f64,
    pub t_max: f64,
    /// The grid has `segments + 1` temperatures including both ends.
    pub segments: usize,
    /// Lattice and chain settings; temperature and seed are set per task.
    pub template: IsingConfig,
    pub delta: DeltaPolicy,
    pub reps: usize,
    pub seed: u64,
    pub deft: DeftOptions,
    pub scheme: Scheme,
    pub cutoff: f64,
}

impl Default for IsingSweepConfig {
    fn default() -> Self {
        IsingSweepConfig {
            t_min: 0.5,
            t_max: 4.0,
            segments: 39,
            template: IsingConfig::default(),
            delta: DeltaPolicy::default(),
            reps: 3,
            seed: 4,
            deft: DeftOptions {
                num_points: 200,
                box_policy: BoxPolicy::Explicit {
                    lower: -4.0,
                    upper: 1.0,
                },
                ..Default::default()
            },
            scheme: Scheme::LogDiff,
            cutoff: DEFAULT_CUTOFF,
        }
    }
}

impl IsingSweepConfig {
    pub const NAME: &'static str = "ising_sweep";

    pub fn paper_scale() -> Self {
        IsingSweepConfig {
            segments: 200,
            template: IsingConfig {
                l: 25,
                n_samples: 15_000,
                // 5e6 single-spin steps on 625 sites.
                warmup_sweeps: 8_000,
                ..IsingConfig::default()
            },
            reps: 5,
            ..Default::default()
        }
    }

    pub fn temperatures(&self) -> Vec<f64> {
        let step = (self.t_max - self.t_min) / self.segments as f64;
        (0..=self.segments)
            .map(|i| {
                if i == self.segments {
                    self.t_max
                } else {
                    self.t_min + step * i as f64
                }
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_min > 0.0 && self.t_max > self.t_min && self.t_max.is_finite()) {
            return Err(Error::invalid(format!(
                "temperature range must satisfy 0 < t_min < t_max, got [{}, {}]",
                self.t_min, self.t_max
            )));
        }
        if self.segments < 2 {
            return Err(Error::invalid("need at least 2 temperature segments"));
        }
        if self.reps == 0 {
            return Err(Error::invalid("need at least one repetition"));
        }
        if self.template.n_samples < 2 {
            return Err(Error::invalid("need at least 2 energy samples per chain"));
        }
        IsingConfig {
            temperature: self.t_min,
            ..self.template
        }
        .validate()?;
        self.delta.validate()?;
        self.deft.validate()
    }

    pub fn to_manifest(&self) -> RunManifest {
        let mut m = RunManifest::new(Self::NAME);
        m.set("seed", self.seed);
        m.set("t_min", self.t_min);
        m.set("t_max", self.t_max);
        m.set("segments", self.segments);
        m.set("ising.l", self.template.l);
        m.set("ising.field", self.template.field);
        m.set("ising.warmup_sweeps", self.template.warmup_sweeps);
        m.set("ising.thin_sweeps", self.template.thin_sweeps);
        m.set("ising.n_samples", self.template.n_samples);
        match self.delta {
            DeltaPolicy::Suggest { target_eps, max_delta } => {
                m.set("delta.policy", "suggest");
                m.set("delta.target_eps", target_eps);
                m.set("delta.max", max_delta);
            }
            DeltaPolicy::Fixed(d) => {
                m.set("delta.policy", "fixed");
                m.set("delta.value", d);
            }
        }
        m.set("reps", self.reps);
        put_deft(&mut m, &self.deft);
        m.set("scheme", self.scheme);
        m.set("cutoff", format!("{:e}", self.cutoff));
        m
    }

    pub fn from_manifest(m: &RunManifest) -> Result<Self> {
        let delta = match m.require("delta.policy")? {
            "suggest" => DeltaPolicy::Suggest {
                target_eps: m.parse_value("delta.target_eps")?,
                max_delta: m.parse_value("delta.max")?,
            },
            "fixed" => DeltaPolicy::Fixed(m.parse_value("delta.value")?),
            other => return Err(Error::invalid(format!("unknown delta.policy {other:?}"))),
        };
        Ok(IsingSweepConfig {
            t_min: m.parse_value("t_min")?,
            t_max: m.parse_value("t_max")?,
            segments: m.parse_value("segments")?,
            template: IsingConfig {
                l: m.parse_value("ising.l")?,
                field: m.parse_value("ising.field")?,
                warmup_sweeps: m.parse_value("ising.warmup_sweeps")?,
                thin_sweeps: m.parse_value("ising.thin_sweeps")?,
                n_samples: m.parse_value("ising.n_samples")?,
                ..IsingConfig::default()
            },
            delta,
            reps: m.parse_value("reps")?,
            seed: m.parse_value("seed")?,
            deft: get_deft(m)?,
            scheme: m.parse_value("scheme")?,
            cutoff: m.parse_value("cutoff")?,
        })
    }
}

/// Per-temperature outcome of one repetition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsingPoint {
    pub g_tt: f64,
    pub heat_capacity: f64,
    pub ratio: f64,
    pub epsilon: f64,
    pub delta_t: f64,
}

/// One stencil at temperature `t`: chains at `t` and `t +- dT` seeded from `seed`.
pub fn ising_point(cfg: &IsingSweepConfig, t: f64, seed: u64) -> Result<IsingPoint> {
    let chain = |temperature: f64, k: u64| {
        ising_sample_energies(&IsingConfig {
            temperature,
            seed: derive_seed(seed, &[k]),
            ..cfg.template
        })
    };
    let l = cfg.template.l;
    let sites = (l * l) as f64;
    let n = cfg.template.n_samples;
    let center = chain(t, 0)?;
    let totals = SampleSet::new(center.values().iter().map(|e| e * sites).collect())?;
    let c_h = heat_capacity(&totals, t, l)?;
    let pilot = c_h * sites / (t * t);
    let dt = cfg.delta.step(t, pilot, n)?;
    let plus = chain(t + dt, 1)?;
    let minus = chain(t - dt, 2)?;
    let stencil = Stencil::estimate(
        ParameterPoint::new([("T", t)])?,
        &center,
        &[("T".to_string(), dt, plus, minus)],
        &Estimator::Deft(cfg.deft),
    )?;
    let options = FimOptions {
        scheme: cfg.scheme,
        cutoff: cfg.cutoff,
        ..Default::default()
    };
    let g = fim_entry(&stencil, "T", "T", &options)?;
    Ok(IsingPoint {
        g_tt: g,
        heat_capacity: c_h,
        ratio: g * t * t / (c_h * sites),
        epsilon: epsilon_radius(&[vec![g]], &[dt], n),
        delta_t: dt,
    })
}

pub fn run_ising_sweep(cfg: &IsingSweepConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let temps = cfg.temperatures();
    let nr = cfg.reps;
    let tasks: Vec<(usize, usize)> = (0..temps.len())
        .flat_map(|i| (0..nr).map(move |r| (i, r)))
        .collect();
    let points: Vec<IsingPoint> = tasks
        .par_iter()
        .map(|&(i, r)| ising_point(cfg, temps[i], derive_seed(cfg.seed, &[i as u64, r as u64])))
        .collect::<Result<_>>()?;
    let mut table = SweepResult::new(
        IsingSweepConfig::NAME,
        &["T"],
        &["g_TT", "C_h", "ratio", "epsilon", "delta_T"],
        &["pilot_g_TT_median"],
    );
    let sites = (cfg.template.l * cfg.template.l) as f64;
    let mut manifest = cfg.to_manifest();
    for (i, &t) in temps.iter().enumerate() {
        let chunk = &points[i * nr..(i + 1) * nr];
        let col = |f: fn(&IsingPoint) -> f64| summarize_finite(&chunk.iter().map(f).collect::<Vec<_>>());
        let c_h = col(|p| p.heat_capacity);
        table.rows.push(SweepRow {
            coords: vec![t],
            stats: vec![
                col(|p| p.g_tt),
                c_h,
                col(|p| p.ratio),
                col(|p| p.epsilon),
                col(|p| p.delta_t),
            ],
            extras: vec![c_h.median * sites / (t * t)],
        });
        for r in 0..nr {
            manifest.set(
                &format!("rep.{i}.{r}.seed"),
                derive_seed(cfg.seed, &[i as u64, r as u64]),
            );
        }
    }
    Ok(ExperimentOutput { table, manifest })
}

/// Temperature of the largest median `g_TT`.
pub fn g_tt_peak(table: &SweepResult) -> Option<f64> {
    let q = table.quantity_index("g_TT")?;
    table
        .rows
        .iter()
        .filter(|r| !r.stats[q].is_missing())
        .max_by(|a, b| a.stats[q].median.total_cmp(&b.stats[q].median))
        .map(|r| r.coords[0])
}

/// Median of the per-temperature median ratios with `T` in `[lo, hi]`.
pub fn median_ratio_between(table: &SweepResult, lo: f64, hi: f64) -> Option<f64> {
    let q = table.quantity_index("ratio")?;
    let vals: Vec<f64> = table
        .rows
        .iter()
        .filter(|r| r.coords[0] >= lo && r.coords[0] <= hi && !r.stats[q].is_missing())
        .map(|r| r.stats[q].median)
        .collect();
    if vals.is_empty() {
        None
    } else {
        Some(summarize_finite(&vals).median)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn temperature_grid_has_both_ends() {
        let cfg = IsingSweepConfig::default();
        let t = cfg.temperatures();
        assert_eq!(t.len(), 40);
        assert_eq!(t[0], 0.5);
        assert_eq!(t[39], 4.0);
    }

    #[test]
    fn step_policy_caps() {
        let p = DeltaPolicy::default();
        assert_eq!(p.step(0.5, 0.0, 5000).unwrap(), 0.25);
        assert_eq!(p.step(3.0, 0.0, 5000).unwrap(), 0.25);
        let d = p.step(2.3, 400.0, 5000).unwrap();
        assert!((d - (2.0f64 / (0.01 * 5000.0 * 400.0)).sqrt()).abs() < 1e-15);
        assert!(DeltaPolicy::Fixed(1.0).step(0.5, 1.0, 10).is_err());
    }

    #[test]
    fn rejects_bad_ranges() {
        let bad = IsingSweepConfig { segments: 1, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = IsingSweepConfig { t_min: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn manifest_round_trip() {
        for delta in [DeltaPolicy::default(), DeltaPolicy::Fixed(0.0175)] {
            let cfg = IsingSweepConfig { delta, ..Default::default() };
            assert_eq!(IsingSweepConfig::from_manifest(&cfg.to_manifest()).unwrap(), cfg);
        }
    }
}
