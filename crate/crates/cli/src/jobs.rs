//! Sample-file commands (`density`, `fisher`, `calibrate`) as replayable
//! jobs with their own manifests.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use npfisher::density::Estimator;
use npfisher::experiments::{estimator_from_manifest, estimator_to_manifest, RunManifest};
use npfisher::fim::{
    calibrate_delta, fim_matrix, Calibration, CalibrationOptions, FimEstimate, FimOptions,
    NormalSampler, ParameterPoint, ParametricSampler, Stencil,
};
use npfisher::models::{ising_sample_energies, IsingConfig};
use npfisher::samples::SampleSet;
use npfisher::{Error, Result};

fn fingerprint_hex(s: &SampleSet) -> String {
    format!("{:016x}", s.fingerprint())
}

/// Reads a sample file and, when a recorded fingerprint is given, checks
/// that the contents have not changed.
fn load(path: &Path, expected: Option<&str>) -> Result<SampleSet> {
    let s = SampleSet::read(path)?;
    if let Some(fp) = expected {
        let got = fingerprint_hex(&s);
        if got != fp {
            return Err(Error::invalid(format!(
                "{} changed since the manifest was written (fingerprint {got}, expected {fp})",
                path.display()
            )));
        }
    }
    Ok(s)
}

fn put_fim(m: &mut RunManifest, f: &FimOptions) {
    m.set("scheme", f.scheme);
    m.set("cutoff", format!("{:e}", f.cutoff));
    m.set("eps_target", f.eps_target);
}

fn get_fim(m: &RunManifest) -> Result<FimOptions> {
    let f = FimOptions {
        scheme: m.parse_value("scheme")?,
        cutoff: m.parse_value("cutoff")?,
        eps_target: m.parse_value("eps_target")?,
    };
    f.validate()?;
    Ok(f)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn write_pair(dir: &Path, stem: &str, csv: &str, manifest: &RunManifest) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    let mut manifest = manifest.clone();
    manifest.stamp();
    let csv_path = dir.join(format!("{stem}.csv"));
    let man_path = dir.join(format!("{stem}.manifest"));
    write_file(&csv_path, csv)?;
    write_file(&man_path, &manifest.to_text())?;
    Ok((csv_path, man_path))
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct DensityJob {
    pub input: PathBuf,
    pub estimator: Estimator,
    pub fingerprint: Option<String>,
}

impl DensityJob {
    pub const NAME: &'static str = "density";

    /// Fits the density and writes `density.csv` and `density.manifest`.
    pub fn run(&self, out: &Path) -> Result<String> {
        let samples = load(&self.input, self.fingerprint.as_deref())?;
        let grid = self.estimator.make_grid(&samples)?;
        let q = self.estimator.fit(&samples, &grid)?;
        let mut m = RunManifest::new(Self::NAME);
        m.set("input", self.input.display());
        m.set("input.fingerprint", fingerprint_hex(&samples));
        estimator_to_manifest(&mut m, &self.estimator);
        let (csv, man) = write_pair(out, "density", &q.to_csv(), &m)?;
        Ok(format!(
            "{} fit on {} samples, box [{}, {}], {} cells, mass {:.12}\nwrote {} and {}\n",
            self.estimator.name(),
            samples.len(),
            grid.lower(),
            grid.upper(),
            grid.len(),
            q.mass(),
            csv.display(),
            man.display()
        ))
    }

    pub fn from_manifest(m: &RunManifest) -> Result<Self> {
        Ok(DensityJob {
            input: m.require("input")?.into(),
            estimator: estimator_from_manifest(m)?,
            fingerprint: Some(m.require("input.fingerprint")?.to_string()),
        })
    }
}

// ---------------------------------------------------------------------------

/// One varied parameter of a stencil read from files.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamFiles {
    pub name: String,
    pub value: f64,
    pub delta: f64,
    pub plus: PathBuf,
    pub minus: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FisherJob {
    pub center: PathBuf,
    pub params: Vec<ParamFiles>,
    pub estimator: Estimator,
    pub fim: FimOptions,
    /// Recorded fingerprints keyed by path, checked on replay.
    pub fingerprints: Vec<(PathBuf, String)>,
}

impl FisherJob {
    pub const NAME: &'static str = "fisher";

    fn read(&self, path: &Path) -> Result<SampleSet> {
        let fp = self
            .fingerprints
            .iter()
            .find(|(p, _)| p == path)
            .map(|(_, f)| f.as_str());
        load(path, fp)
    }

    pub fn estimate(&self) -> Result<(FimEstimate, RunManifest)> {
        if self.params.is_empty() {
            return Err(Error::invalid("fisher needs at least one --plus/--minus pair"));
        }
        self.fim.validate()?;
        let center = self.read(&self.center)?;
        let mut m = RunManifest::new(Self::NAME);
        m.set("center", self.center.display());
        m.set("center.fingerprint", fingerprint_hex(&center));
        let names: Vec<&str> = self.params.iter().map(|p| p.name.as_str()).collect();
        m.set("params", names.join(" "));
        let mut displaced = Vec::new();
        for p in &self.params {
            let plus = self.read(&p.plus)?;
            let minus = self.read(&p.minus)?;
            m.set(&format!("param.{}.value", p.name), p.value);
            m.set(&format!("param.{}.delta", p.name), p.delta);
            m.set(&format!("param.{}.plus", p.name), p.plus.display());
            m.set(&format!("param.{}.plus.fingerprint", p.name), fingerprint_hex(&plus));
            m.set(&format!("param.{}.minus", p.name), p.minus.display());
            m.set(&format!("param.{}.minus.fingerprint", p.name), fingerprint_hex(&minus));
            displaced.push((p.name.clone(), p.delta, plus, minus));
        }
        estimator_to_manifest(&mut m, &self.estimator);
        put_fim(&mut m, &self.fim);
        let theta = ParameterPoint::new(self.params.iter().map(|p| (p.name.clone(), p.value)))?;
        let stencil = Stencil::estimate(theta, &center, &displaced, &self.estimator)?;
        Ok((fim_matrix(&stencil, &self.fim)?, m))
    }

    /// Estimates the matrix and writes `fisher.csv` and `fisher.manifest`.
    pub fn run(&self, out: &Path) -> Result<String> {
        let (est, m) = self.estimate()?;
        let (csv, man) = write_pair(out, "fisher", &est.to_csv(), &m)?;
        let mut text = String::new();
        let _ = writeln!(
            text,
            "{} densities, scheme {}, N = {}, cutoff {:e}",
            self.estimator.name(),
            est.scheme,
            est.n,
            est.cutoff
        );
        for (i, a) in est.names.iter().enumerate() {
            for (j, b) in est.names.iter().enumerate() {
                let e = &est.epsilon[i][j];
                let _ = writeln!(
                    text,
                    "g[{a},{b}] = {:.6e}  epsilon = {:.4}  {}",
                    est.matrix[i][j],
                    e.epsilon,
                    e.verdict.name()
                );
            }
        }
        let _ = writeln!(
            text,
            "overall epsilon = {:.4} ({}), target {}",
            est.overall.epsilon,
            est.overall.verdict.name(),
            self.fim.eps_target
        );
        let _ = writeln!(text, "wrote {} and {}", csv.display(), man.display());
        Ok(text)
    }

    pub fn from_manifest(m: &RunManifest) -> Result<Self> {
        let mut fingerprints = vec![(
            PathBuf::from(m.require("center")?),
            m.require("center.fingerprint")?.to_string(),
        )];
        let mut params = Vec::new();
        for name in m.require("params")?.split_whitespace() {
            let key = |k: &str| format!("param.{name}.{k}");
            let p = ParamFiles {
                name: name.to_string(),
                value: m.parse_value(&key("value"))?,
                delta: m.parse_value(&key("delta"))?,
                plus: m.require(&key("plus"))?.into(),
                minus: m.require(&key("minus"))?.into(),
            };
            fingerprints.push((p.plus.clone(), m.require(&key("plus.fingerprint"))?.to_string()));
            fingerprints.push((p.minus.clone(), m.require(&key("minus.fingerprint"))?.to_string()));
            params.push(p);
        }
        Ok(FisherJob {
            center: m.require("center")?.into(),
            params,
            estimator: estimator_from_manifest(m)?,
            fim: get_fim(m)?,
            fingerprints,
        })
    }
}

// ---------------------------------------------------------------------------

/// Built-in samplers for step calibration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    /// Parameters `mu` and `sigma`.
    Normal { mu: f64, sigma: f64 },
    /// Per-spin energies; parameter `T`.
    Ising {
        temperature: f64,
        l: usize,
        warmup_sweeps: usize,
        thin_sweeps: usize,
    },
}

impl Model {
    fn theta(&self) -> Result<ParameterPoint> {
        match *self {
            Model::Normal { mu, sigma } => ParameterPoint::new([("mu", mu), ("sigma", sigma)]),
            Model::Ising { temperature, .. } => ParameterPoint::new([("T", temperature)]),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrateJob {
    pub model: Model,
    pub param: String,
    pub estimator: Estimator,
    pub fim: FimOptions,
    pub calibration: CalibrationOptions,
}

impl CalibrateJob {
    pub const NAME: &'static str = "calibration";

    pub fn to_manifest(&self) -> RunManifest {
        let mut m = RunManifest::new(Self::NAME);
        match self.model {
            Model::Normal { mu, sigma } => {
                m.set("model", "normal");
                m.set("model.mu", mu);
                m.set("model.sigma", sigma);
            }
            Model::Ising {
                temperature,
                l,
                warmup_sweeps,
                thin_sweeps,
            } => {
                m.set("model", "ising");
                m.set("model.T", temperature);
                m.set("model.l", l);
                m.set("model.warmup_sweeps", warmup_sweeps);
                m.set("model.thin_sweeps", thin_sweeps);
            }
        }
        m.set("param", &self.param);
        m.set("seed", self.calibration.seed);
        m.set("n", self.calibration.n);
        m.set("target_eps", self.calibration.target_eps);
        m.set("initial_delta", self.calibration.initial_delta);
        m.set("max_iters", self.calibration.max_iters);
        estimator_to_manifest(&mut m, &self.estimator);
        put_fim(&mut m, &self.fim);
        m
    }

    pub fn from_manifest(m: &RunManifest) -> Result<Self> {
        let model = match m.require("model")? {
            "normal" => Model::Normal {
                mu: m.parse_value("model.mu")?,
                sigma: m.parse_value("model.sigma")?,
            },
            "ising" => Model::Ising {
                temperature: m.parse_value("model.T")?,
                l: m.parse_value("model.l")?,
                warmup_sweeps: m.parse_value("model.warmup_sweeps")?,
                thin_sweeps: m.parse_value("model.thin_sweeps")?,
            },
            other => return Err(Error::invalid(format!("unknown model {other:?}"))),
        };
        Ok(CalibrateJob {
            model,
            param: m.require("param")?.to_string(),
            estimator: estimator_from_manifest(m)?,
            fim: get_fim(m)?,
            calibration: CalibrationOptions {
                n: m.parse_value("n")?,
                target_eps: m.parse_value("target_eps")?,
                initial_delta: m.parse_value("initial_delta")?,
                max_iters: m.parse_value("max_iters")?,
                seed: m.parse_value("seed")?,
            },
        })
    }

    pub fn calibrate(&self) -> Result<Calibration> {
        let theta = self.model.theta()?;
        match self.model {
            Model::Normal { .. } => calibrate_delta(
                &NormalSampler,
                &theta,
                &self.param,
                &self.estimator,
                &self.fim,
                &self.calibration,
            ),
            Model::Ising {
                l,
                warmup_sweeps,
                thin_sweeps,
                ..
            } => {
                let sampler = move |theta: &ParameterPoint, n: usize, seed: u64| {
                    let temperature = theta
                        .get("T")
                        .ok_or_else(|| Error::MissingStencilMember("T".into()))?;
                    ising_sample_energies(&IsingConfig {
                        l,
                        temperature,
                        warmup_sweeps,
                        thin_sweeps,
                        n_samples: n,
                        seed,
                        ..IsingConfig::default()
                    })
                };
                calibrate_delta(
                    &sampler as &dyn ParametricSampler,
                    &theta,
                    &self.param,
                    &self.estimator,
                    &self.fim,
                    &self.calibration,
                )
            }
        }
    }

    /// Runs the search and writes `calibration.csv` (one row per
    /// iteration) and `calibration.manifest`.
    pub fn run(&self, out: &Path) -> Result<String> {
        let cal = self.calibrate()?;
        let mut csv = String::from("iteration,delta,g,epsilon\n");
        for (i, s) in cal.history.iter().enumerate() {
            let _ = writeln!(csv, "{i},{:e},{:e},{:e}", s.delta, s.g, s.epsilon);
        }
        let (csv_path, man) = write_pair(out, "calibration", &csv, &self.to_manifest())?;
        Ok(format!(
            "delta_{} = {:.6e} after {} iteration(s): g = {:.6e}, epsilon = {:.4} (target {})\nwrote {} and {}\n",
            self.param,
            cal.delta,
            cal.history.len(),
            cal.g,
            cal.epsilon,
            self.calibration.target_eps,
            csv_path.display(),
            man.display()
        ))
    }
}
