//! Two-dimensional Ising model on an `L x L` periodic lattice, `J = k_B = 1`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::samples::{Provenance, SampleSet};

/// `2 / ln(1 + sqrt 2)`, the infinite-lattice critical temperature.
pub fn critical_temperature() -> f64 {
    2.0 / (1.0 + 2f64.sqrt()).ln()
}

/// Metropolis acceptance `min(1, exp(-dE/T))`.
pub fn acceptance_probability(delta_e: f64, temperature: f64) -> f64 {
    if delta_e <= 0.0 {
        1.0
    } else {
        (-delta_e / temperature).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsingConfig {
    pub l: usize,
    pub temperature: f64,
    pub field: f64,
    pub warmup_sweeps: usize,
    pub thin_sweeps: usize,
    pub n_samples: usize,
    pub seed: u64,
}

impl Default for IsingConfig {
    fn default() -> Self {
        IsingConfig {
            l: 16,
            temperature: 2.0,
            field: 0.0,
            warmup_sweeps: 2_000,
            thin_sweeps: 5,
            n_samples: 5_000,
            seed: 0,
        }
    }
}

impl IsingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.l < 2 {
            return Err(Error::invalid(format!("lattice side must be >= 2, got {}", self.l)));
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(Error::invalid(format!(
                "temperature must be > 0, got {}",
                self.temperature
            )));
        }
        if !self.field.is_finite() {
            return Err(Error::invalid("field must be finite"));
        }
        if self.n_samples < 1 {
            return Err(Error::invalid("need at least one sample"));
        }
        if self.thin_sweeps < 1 {
            return Err(Error::invalid("thin_sweeps must be >= 1"));
        }
        Ok(())
    }
}

/// Spin configuration with its cached total energy.
#[derive(Debug, Clone)]
pub struct IsingState {
    l: usize,
    spins: Vec<i8>,
    field: f64,
    energy: f64,
    rng: ChaCha8Rng,
}

impl IsingState {
    /// All spins up.
    pub fn ordered(l: usize, field: f64, seed: u64) -> Self {
        Self::from_spins(l, vec![1; l * l], field, seed)
    }

    pub fn from_spins(l: usize, spins: Vec<i8>, field: f64, seed: u64) -> Self {
        assert_eq!(spins.len(), l * l);
        assert!(spins.iter().all(|s| *s == 1 || *s == -1));
        let energy = lattice_energy(l, &spins, field);
        IsingState {
            l,
            spins,
            field,
            energy,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn side(&self) -> usize {
        self.l
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    /// Cached total energy.
    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// Full recomputation of the Hamiltonian.
    pub fn recompute_energy(&self) -> f64 {
        lattice_energy(self.l, &self.spins, self.field)
    }

    fn neighbor_sum(&self, site: usize) -> i32 {
        let l = self.l;
        let (r, c) = (site / l, site % l);
        let s = |rr: usize, cc: usize| self.spins[rr * l + cc] as i32;
        s(r, (c + 1) % l) + s(r, (c + l - 1) % l) + s((r + 1) % l, c) + s((r + l - 1) % l, c)
    }

    /// Energy change from flipping `site`. On `L = 2` both horizontal
    /// neighbors are the same spin and count twice.
    pub fn flip_delta(&self, site: usize) -> f64 {
        let s = self.spins[site] as f64;
        2.0 * s * (self.neighbor_sum(site) as f64 + self.field)
    }

    /// One Metropolis proposal at a uniformly random site. Returns whether
    /// the flip was accepted.
    pub fn metropolis_step(&mut self, temperature: f64) -> bool {
        let site = self.rng.random_range(0..self.spins.len());
        let de = self.flip_delta(site);
        let accept = de <= 0.0 || self.rng.random::<f64>() < (-de / temperature).exp();
        if accept {
            self.spins[site] = -self.spins[site];
            self.energy += de;
        }
        accept
    }

    /// `L^2` proposals.
    pub fn sweep(&mut self, temperature: f64) {
        if self.field == 0.0 {
            self.sweep_zero_field(temperature);
        } else {
            for _ in 0..self.spins.len() {
                self.metropolis_step(temperature);
            }
        }
    }

    fn sweep_zero_field(&mut self, temperature: f64) {
        // dE = 2 s * sum in {-8, -4, 0, 4, 8}; tabulate the positive ones.
        let p4 = (-4.0 / temperature).exp();
        let p8 = (-8.0 / temperature).exp();
        let n = self.spins.len();
        for _ in 0..n {
            let site = self.rng.random_range(0..n);
            let de = 2 * self.spins[site] as i32 * self.neighbor_sum(site);
            let accept = match de {
                d if d <= 0 => true,
                4 => self.rng.random::<f64>() < p4,
                _ => self.rng.random::<f64>() < p8,
            };
            if accept {
                self.spins[site] = -self.spins[site];
                self.energy += de as f64;
            }
        }
    }
}

fn lattice_energy(l: usize, spins: &[i8], field: f64) -> f64 {
    let mut bonds = 0i64;
    let mut mag = 0i64;
    for r in 0..l {
        for c in 0..l {
            let s = spins[r * l + c] as i64;
            bonds += s * (spins[r * l + (c + 1) % l] as i64 + spins[((r + 1) % l) * l + c] as i64);
            mag += s;
        }
    }
    -(bonds as f64) - field * mag as f64
}

/// Per-spin energies `E / L^2` recorded every `thin_sweeps` sweeps after
/// `warmup_sweeps` sweeps, starting from the ordered state.
pub fn ising_sample_energies(config: &IsingConfig) -> Result<SampleSet> {
    config.validate()?;
    let mut state = IsingState::ordered(config.l, config.field, config.seed);
    let t = config.temperature;
    for _ in 0..config.warmup_sweeps {
        state.sweep(t);
    }
    let sites = (config.l * config.l) as f64;
    let mut values = Vec::with_capacity(config.n_samples);
    for _ in 0..config.n_samples {
        for _ in 0..config.thin_sweeps {
            state.sweep(t);
        }
        values.push(state.energy() / sites);
    }
    Ok(SampleSet::new(values)?.with_provenance(Provenance {
        params: vec![
            ("L".into(), config.l as f64),
            ("T".into(), t),
            ("h".into(), config.field),
            ("warmup_sweeps".into(), config.warmup_sweeps as f64),
            ("thin_sweeps".into(), config.thin_sweeps as f64),
        ],
        seed: Some(config.seed),
    }))
}

/// `(<E^2> - <E>^2) / (L^2 T^2)` from samples of the total energy.
pub fn heat_capacity(total_energies: &SampleSet, temperature: f64, l: usize) -> Result<f64> {
    if total_energies.len() < 2 {
        return Err(Error::invalid("heat capacity needs at least 2 samples"));
    }
    if !(temperature > 0.0) {
        return Err(Error::invalid("temperature must be > 0"));
    }
    let n = total_energies.len() as f64;
    let mean = total_energies.mean();
    let var = total_energies
        .values()
        .iter()
        .map(|e| (e - mean) * (e - mean))
        .sum::<f64>()
        / n;
    Ok(var / ((l * l) as f64 * temperature * temperature))
}

/// Exact Boltzmann averages from full enumeration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactIsing {
    pub mean_energy: f64,
    pub mean_energy_sq: f64,
    pub heat_capacity: f64,
}

pub const MAX_EXACT_L: usize = 4;

/// Enumerates all `2^(L^2)` configurations at zero field.
pub fn ising_exact_small(l: usize, temperature: f64) -> Result<ExactIsing> {
    if !(2..=MAX_EXACT_L).contains(&l) {
        return Err(Error::invalid(format!(
            "exact enumeration supports 2 <= L <= {MAX_EXACT_L}, got {l}"
        )));
    }
    if !(temperature > 0.0) {
        return Err(Error::invalid("temperature must be > 0"));
    }
    let n = l * l;
    // Energy histogram, keyed by (E + 2n) which is a nonnegative integer.
    let mut counts = vec![0u64; 4 * n + 1];
    let mut spins = vec![0i8; n];
    for bits in 0u32..(1u32 << n) {
        for (i, s) in spins.iter_mut().enumerate() {
            *s = if bits >> i & 1 == 1 { 1 } else { -1 };
        }
        let e = lattice_energy(l, &spins, 0.0) as i64;
        counts[(e + 2 * n as i64) as usize] += 1;
    }
    let e_min = -2.0 * n as f64;
    let (mut z, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for (k, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let e = k as f64 - 2.0 * n as f64;
        let w = c as f64 * (-(e - e_min) / temperature).exp();
        z += w;
        m1 += w * e;
        m2 += w * e * e;
    }
    let mean = m1 / z;
    let sq = m2 / z;
    Ok(ExactIsing {
        mean_energy: mean,
        mean_energy_sq: sq,
        heat_capacity: (sq - mean * mean) / (n as f64 * temperature * temperature),
    })
}
