//! Python module `npfisher`: sample sets, density fits, Fisher information
//! estimates, model samplers and manifest-driven experiments.

use std::collections::HashMap;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use npfisher::density::{
    BandwidthRule, BoxPolicy, DeftOptions, DensityEstimate, Estimator, GridOptions, KdeOptions,
};
use npfisher::experiments::{replay, write_outputs, Experiment, RunManifest};
use npfisher::fim::{self, FimOptions, ParameterPoint, Scheme, Stencil};
use npfisher::models::{self, IsingConfig, NormalParams};
use npfisher::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        e => PyValueError::new_err(e.to_string()),
    }
}

/// Immutable set of finite real samples.
#[pyclass(name = "SampleSet", frozen, from_py_object)]
#[derive(Clone)]
struct PySampleSet {
    inner: npfisher::samples::SampleSet,
}

#[pymethods]
impl PySampleSet {
    #[new]
    fn new(values: Vec<f64>) -> PyResult<Self> {
        npfisher::samples::SampleSet::new(values)
            .map(|inner| PySampleSet { inner })
            .map_err(py_err)
    }

    /// Reads one value per line; `#` starts a comment.
    #[staticmethod]
    fn read(path: &str) -> PyResult<Self> {
        npfisher::samples::SampleSet::read(path)
            .map(|inner| PySampleSet { inner })
            .map_err(py_err)
    }

    fn write(&self, path: &str) -> PyResult<()> {
        self.inner.write(path, &[]).map_err(py_err)
    }

    fn values(&self) -> Vec<f64> {
        self.inner.values().to_vec()
    }

    fn mean(&self) -> f64 {
        self.inner.mean()
    }

    fn variance(&self) -> f64 {
        self.inner.variance()
    }

    fn fingerprint(&self) -> u64 {
        self.inner.fingerprint()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("SampleSet(n={}, mean={:.6})", self.inner.len(), self.inner.mean())
    }
}

/// Density on a uniform cell-centered grid.
#[pyclass(name = "DensityEstimate", frozen)]
struct PyDensityEstimate {
    inner: DensityEstimate,
}

#[pymethods]
impl PyDensityEstimate {
    /// Cell centers.
    fn x(&self) -> Vec<f64> {
        self.inner.grid().centers().collect()
    }

    /// Density values at the cell centers.
    fn q(&self) -> Vec<f64> {
        self.inner.values().to_vec()
    }

    fn mass(&self) -> f64 {
        self.inner.mass()
    }

    #[getter]
    fn method(&self) -> &'static str {
        self.inner.method().name()
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv()
    }

    fn __repr__(&self) -> String {
        let g = self.inner.grid();
        format!(
            "DensityEstimate(method={:?}, box=[{}, {}], cells={})",
            self.inner.method().name(),
            g.lower(),
            g.upper(),
            g.len()
        )
    }
}

fn estimator(
    method: &str,
    grid_points: usize,
    bounds: Option<(f64, f64)>,
    alpha: usize,
    bandwidth: Option<f64>,
) -> PyResult<Estimator> {
    let box_policy = match bounds {
        None => BoxPolicy::Auto,
        Some((lower, upper)) => BoxPolicy::Explicit { lower, upper },
    };
    match method {
        "deft" => {
            let d = DeftOptions {
                alpha,
                num_points: grid_points,
                box_policy,
                ..DeftOptions::default()
            };
            d.validate().map_err(py_err)?;
            Ok(Estimator::Deft(d))
        }
        "kde" => Ok(Estimator::Kde {
            options: KdeOptions {
                bandwidth: bandwidth.map_or(BandwidthRule::Scott, BandwidthRule::Fixed),
            },
            grid: GridOptions {
                num_points: grid_points,
                box_policy,
            },
        }),
        other => Err(PyValueError::new_err(format!(
            "method must be 'deft' or 'kde', got {other:?}"
        ))),
    }
}

/// Fits a DEFT or Gaussian-KDE density. `bounds=None` picks a box twice
/// the sample range; `bandwidth=None` uses Scott's rule.
#[pyfunction]
#[pyo3(signature = (samples, method = "deft", grid_points = 100, bounds = None, alpha = 3, bandwidth = None))]
fn fit_density(
    samples: &PySampleSet,
    method: &str,
    grid_points: usize,
    bounds: Option<(f64, f64)>,
    alpha: usize,
    bandwidth: Option<f64>,
) -> PyResult<PyDensityEstimate> {
    let est = estimator(method, grid_points, bounds, alpha, bandwidth)?;
    let grid = est.make_grid(&samples.inner).map_err(py_err)?;
    est.fit(&samples.inner, &grid)
        .map(|inner| PyDensityEstimate { inner })
        .map_err(py_err)
}

/// Fisher information matrix from stencil samples.
///
/// `displaced` maps each parameter name to `(delta, plus, minus)`. Returns
/// a dict with `names`, `matrix`, `epsilon` (per entry), `verdict`
/// (per entry), `overall_epsilon`, `n` and `csv`.
#[pyfunction]
#[pyo3(signature = (center, displaced, method = "deft", scheme = "log_diff", cutoff = 1e-10, eps_target = 0.05, grid_points = 100, bounds = None))]
#[allow(clippy::too_many_arguments)]
fn fisher_matrix<'py>(
    py: Python<'py>,
    center: &PySampleSet,
    displaced: HashMap<String, (f64, PySampleSet, PySampleSet)>,
    method: &str,
    scheme: &str,
    cutoff: f64,
    eps_target: f64,
    grid_points: usize,
    bounds: Option<(f64, f64)>,
) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
    let est = estimator(method, grid_points, bounds, 3, None)?;
    let options = FimOptions {
        scheme: scheme.parse::<Scheme>().map_err(py_err)?,
        cutoff,
        eps_target,
    };
    let mut names: Vec<&String> = displaced.keys().collect();
    names.sort();
    let members: Vec<(String, f64, _, _)> = names
        .iter()
        .map(|n| {
            let (d, p, m) = &displaced[*n];
            ((*n).clone(), *d, p.inner.clone(), m.inner.clone())
        })
        .collect();
    let theta = ParameterPoint::new(names.iter().map(|n| ((*n).clone(), 0.0))).map_err(py_err)?;
    let stencil = Stencil::estimate(theta, &center.inner, &members, &est).map_err(py_err)?;
    let f = fim::fim_matrix(&stencil, &options).map_err(py_err)?;
    let out = pyo3::types::PyDict::new(py);
    out.set_item("names", f.names.clone())?;
    out.set_item("matrix", f.matrix.clone())?;
    let eps: Vec<Vec<f64>> = f.epsilon.iter().map(|r| r.iter().map(|e| e.epsilon).collect()).collect();
    let verdict: Vec<Vec<&str>> = f.epsilon.iter().map(|r| r.iter().map(|e| e.verdict.name()).collect()).collect();
    out.set_item("epsilon", eps)?;
    out.set_item("verdict", verdict)?;
    out.set_item("overall_epsilon", f.overall.epsilon)?;
    out.set_item("n", f.n)?;
    out.set_item("csv", f.to_csv())?;
    Ok(out)
}

/// `sqrt(2 / (N g_{mu nu} d^mu d^nu))`.
#[pyfunction]
fn epsilon_radius(g: Vec<Vec<f64>>, deltas: Vec<f64>, n: usize) -> f64 {
    fim::epsilon_radius(&g, &deltas, n)
}

/// Step that makes the radius equal `target_eps` for a diagonal entry.
#[pyfunction]
fn suggest_delta(g_diag: f64, n: usize, target_eps: f64) -> PyResult<f64> {
    fim::suggest_delta(g_diag, n, target_eps).map_err(py_err)
}

#[pyfunction]
fn overlap_probability(g: Vec<Vec<f64>>, deltas: Vec<f64>, n: usize, eps: f64) -> f64 {
    fim::overlap_probability(&g, &deltas, n, eps)
}

#[pyfunction]
fn normal_sample(mu: f64, sigma: f64, n: usize, seed: u64) -> PyResult<PySampleSet> {
    let p = NormalParams::new(mu, sigma).map_err(py_err)?;
    models::normal_sample(p, n, seed)
        .map(|inner| PySampleSet { inner })
        .map_err(py_err)
}

/// Closed-form information matrix over `(mu, sigma)`.
#[pyfunction]
fn normal_fi(mu: f64, sigma: f64) -> PyResult<[[f64; 2]; 2]> {
    models::normal_fi(NormalParams::new(mu, sigma).map_err(py_err)?).map_err(py_err)
}

/// Per-spin energies from a Metropolis chain started in the ordered state.
#[pyfunction]
#[pyo3(signature = (l, temperature, n, seed, warmup_sweeps = 2000, thin_sweeps = 5))]
fn ising_energies(
    l: usize,
    temperature: f64,
    n: usize,
    seed: u64,
    warmup_sweeps: usize,
    thin_sweeps: usize,
) -> PyResult<PySampleSet> {
    models::ising_sample_energies(&IsingConfig {
        l,
        temperature,
        n_samples: n,
        seed,
        warmup_sweeps,
        thin_sweeps,
        ..IsingConfig::default()
    })
    .map(|inner| PySampleSet { inner })
    .map_err(py_err)
}

/// `Var(E) / (L^2 T^2)` from total energies.
#[pyfunction]
fn heat_capacity(total_energies: &PySampleSet, temperature: f64, l: usize) -> PyResult<f64> {
    models::heat_capacity(&total_energies.inner, temperature, l).map_err(py_err)
}

/// `(<E>, C_h)` by full enumeration, `2 <= L <= 4`.
#[pyfunction]
fn ising_exact(l: usize, temperature: f64) -> PyResult<(f64, f64)> {
    let e = models::ising_exact_small(l, temperature).map_err(py_err)?;
    Ok((e.mean_energy, e.heat_capacity))
}

#[pyfunction]
fn critical_temperature() -> f64 {
    models::critical_temperature()
}

/// Manifest text with the default options of an experiment:
/// `normal_comparison`, `eps_sweep`, `n_delta_heatmap` or `ising_sweep`.
#[pyfunction]
#[pyo3(signature = (name, paper_scale = false))]
fn default_manifest(name: &str, paper_scale: bool) -> PyResult<String> {
    use npfisher::experiments::{EpsSweepConfig, HeatmapConfig, IsingSweepConfig, NormalComparisonConfig};
    let e = match (name, paper_scale) {
        (NormalComparisonConfig::NAME, false) => Experiment::NormalComparison(Default::default()),
        (NormalComparisonConfig::NAME, true) => Experiment::NormalComparison(NormalComparisonConfig::paper_scale()),
        (EpsSweepConfig::NAME, false) => Experiment::EpsSweep(Default::default()),
        (EpsSweepConfig::NAME, true) => Experiment::EpsSweep(EpsSweepConfig::paper_scale()),
        (HeatmapConfig::NAME, false) => Experiment::Heatmap(Default::default()),
        (HeatmapConfig::NAME, true) => Experiment::Heatmap(HeatmapConfig::paper_scale()),
        (IsingSweepConfig::NAME, false) => Experiment::IsingSweep(Default::default()),
        (IsingSweepConfig::NAME, true) => Experiment::IsingSweep(IsingSweepConfig::paper_scale()),
        _ => return Err(PyValueError::new_err(format!("unknown experiment {name:?}"))),
    };
    Ok(e.to_manifest().to_text())
}

/// Runs the experiment described by manifest text and returns
/// `(csv, manifest)`. With `out_dir`, also writes CSV, manifest and SVG
/// there.
#[pyfunction]
#[pyo3(signature = (manifest, out_dir = None))]
fn run_manifest(py: Python<'_>, manifest: &str, out_dir: Option<&str>) -> PyResult<(String, String)> {
    let m = RunManifest::parse(manifest).map_err(py_err)?;
    let out = py.detach(|| replay(&m)).map_err(py_err)?;
    if let Some(dir) = out_dir {
        write_outputs(&out.table, &out.manifest, dir).map_err(py_err)?;
    }
    Ok((out.table.to_csv(), out.manifest.to_text()))
}

#[pymodule]
#[pyo3(name = "npfisher")]
fn npfisher_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", npfisher::VERSION)?;
    m.add_class::<PySampleSet>()?;
    m.add_class::<PyDensityEstimate>()?;
    m.add_function(wrap_pyfunction!(fit_density, m)?)?;
    m.add_function(wrap_pyfunction!(fisher_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(epsilon_radius, m)?)?;
    m.add_function(wrap_pyfunction!(suggest_delta, m)?)?;
    m.add_function(wrap_pyfunction!(overlap_probability, m)?)?;
    m.add_function(wrap_pyfunction!(normal_sample, m)?)?;
    m.add_function(wrap_pyfunction!(normal_fi, m)?)?;
    m.add_function(wrap_pyfunction!(ising_energies, m)?)?;
    m.add_function(wrap_pyfunction!(heat_capacity, m)?)?;
    m.add_function(wrap_pyfunction!(ising_exact, m)?)?;
    m.add_function(wrap_pyfunction!(critical_temperature, m)?)?;
    m.add_function(wrap_pyfunction!(default_manifest, m)?)?;
    m.add_function(wrap_pyfunction!(run_manifest, m)?)?;
    Ok(())
}
