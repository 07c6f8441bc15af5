use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::samples::{Provenance, SampleSet};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalParams {
    pub mu: f64,
    pub sigma: f64,
}

impl NormalParams {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) || !mu.is_finite() {
            return Err(Error::invalid(format!(
                "normal parameters need finite mu and sigma > 0, got ({mu}, {sigma})"
            )));
        }
        Ok(NormalParams { mu, sigma })
    }
}

pub fn normal_pdf(x: f64, mu: f64, sigma: f64) -> f64 {
    let z = (x - mu) / sigma;
    (-0.5 * z * z).exp() / (sigma * (2.0 * PI).sqrt())
}

/// `n` draws from `N(mu, sigma^2)`, reproducible from `seed`.
pub fn normal_sample(params: NormalParams, n: usize, seed: u64) -> Result<SampleSet> {
    let params = NormalParams::new(params.mu, params.sigma)?;
    if n == 0 {
        return Err(Error::invalid("need at least one sample"));
    }
    let dist = Normal::new(params.mu, params.sigma).map_err(|e| Error::invalid(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..n).map(|_| dist.sample(&mut rng)).collect();
    Ok(SampleSet::new(values)?.with_provenance(Provenance {
        params: vec![("mu".into(), params.mu), ("sigma".into(), params.sigma)],
        seed: Some(seed),
    }))
}

/// Fisher information over `(mu, sigma)`: `diag(1/sigma^2, 2/sigma^2)`.
pub fn normal_fi(params: NormalParams) -> Result<[[f64; 2]; 2]> {
    let p = NormalParams::new(params.mu, params.sigma)?;
    let s2 = p.sigma * p.sigma;
    Ok([[1.0 / s2, 0.0], [0.0, 2.0 / s2]])
}

/// `KL(p1 || p2)` in nats.
pub fn normal_kl(p1: NormalParams, p2: NormalParams) -> Result<f64> {
    let p1 = NormalParams::new(p1.mu, p1.sigma)?;
    let p2 = NormalParams::new(p2.mu, p2.sigma)?;
    let dm = p1.mu - p2.mu;
    Ok((p2.sigma / p1.sigma).ln() + (p1.sigma * p1.sigma + dm * dm) / (2.0 * p2.sigma * p2.sigma)
        - 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn np(mu: f64, sigma: f64) -> NormalParams {
        NormalParams::new(mu, sigma).unwrap()
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = normal_sample(np(0.0, 1.0), 10_000, 42).unwrap();
        let b = normal_sample(np(0.0, 1.0), 10_000, 42).unwrap();
        assert_eq!(a.values(), b.values());
        let c = normal_sample(np(0.0, 1.0), 10_000, 43).unwrap();
        assert_ne!(a.values(), c.values());
        assert_eq!(a.provenance().unwrap().seed, Some(42));
    }

    #[test]
    fn sample_mean_within_clt_bound() {
        let s = normal_sample(np(0.0, 1.0), 1_000_000, 3).unwrap();
        assert!(s.mean().abs() < 0.005);
    }

    #[test]
    fn rejects_bad_sigma() {
        assert!(NormalParams::new(0.0, -1.0).is_err());
        assert!(normal_sample(NormalParams { mu: 0.0, sigma: -1.0 }, 10, 0).is_err());
        assert!(normal_fi(NormalParams { mu: 0.0, sigma: 0.0 }).is_err());
        assert!(normal_kl(np(0.0, 1.0), NormalParams { mu: 0.0, sigma: -2.0 }).is_err());
    }

    #[test]
    fn fisher_matrix_values() {
        assert_eq!(normal_fi(np(0.0, 1.0)).unwrap(), [[1.0, 0.0], [0.0, 2.0]]);
        assert_eq!(normal_fi(np(3.0, 0.5)).unwrap(), [[4.0, 0.0], [0.0, 8.0]]);
        assert_relative_eq!(normal_fi(np(0.0, 10.0)).unwrap()[1][1], 0.02);
    }

    #[test]
    fn kl_values() {
        assert_eq!(normal_kl(np(1.0, 2.0), np(1.0, 2.0)).unwrap(), 0.0);
        assert_relative_eq!(normal_kl(np(0.0, 1.0), np(0.0, 2.0)).unwrap(), 0.318147, epsilon = 1e-6);
        // Quadratic limit: KL ~ (1/2) g_ss ds^2 with g_ss = 2.
        let kl = normal_kl(np(0.0, 1.0), np(0.0, 1.01)).unwrap();
        assert_relative_eq!(kl, 1e-4, max_relative = 0.03);
    }

    #[test]
    fn kl_quadratic_ratio_tends_to_one() {
        let mut last = f64::INFINITY;
        for ds in [0.1, 0.03, 0.01, 0.003, 0.001] {
            let kl = normal_kl(np(0.0, 1.0), np(0.0, 1.0 + ds)).unwrap();
            let err = (kl / (ds * ds) - 1.0).abs();
            assert!(err < last);
            last = err;
        }
        assert!(last < 2e-3);
    }
}
