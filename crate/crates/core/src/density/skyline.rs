//! Symmetric positive-definite matrices stored by row envelope.
//!
//! Row `i` keeps columns `first[i]..=i` of the lower triangle. Cholesky
//! fill-in never leaves the envelope, so a periodic band matrix (band
//! plus dense corner rows) factors in `O(n * band^2)`.

#[derive(Debug, Clone)]
pub(crate) struct Skyline {
    first: Vec<usize>,
    rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct NotPositiveDefinite;

impl Skyline {
    pub fn zeros(first: Vec<usize>) -> Self {
        let rows = first
            .iter()
            .enumerate()
            .map(|(i, &f)| {
                assert!(f <= i);
                vec![0.0; i - f + 1]
            })
            .collect();
        Skyline { first, rows }
    }

    /// Envelope of a symmetric periodic band matrix with half-bandwidth `band`.
    pub fn periodic_band(n: usize, band: usize) -> Self {
        let first = (0..n)
            .map(|i| {
                if i + band >= n {
                    0
                } else {
                    i.saturating_sub(band)
                }
            })
            .collect();
        Self::zeros(first)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    /// Adds `v` to entry `(i, j)` with `j <= i`.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(j <= i && j >= self.first[i]);
        let f = self.first[i];
        self.rows[i][j - f] += v;
    }

    #[cfg(test)]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if j > i { (j, i) } else { (i, j) };
        if j < self.first[i] {
            0.0
        } else {
            self.rows[i][j - self.first[i]]
        }
    }

    /// In-place Cholesky factorization `A = L L^T`.
    pub fn cholesky(mut self) -> Result<Cholesky, NotPositiveDefinite> {
        let n = self.len();
        for i in 0..n {
            let fi = self.first[i];
            for j in fi..=i {
                let fj = self.first[j];
                let start = fi.max(fj);
                let mut s = self.rows[i][j - fi];
                if j == i {
                    for k in start..j {
                        let l = self.rows[i][k - fi];
                        s -= l * l;
                    }
                    if !(s > 0.0) || !s.is_finite() {
                        return Err(NotPositiveDefinite);
                    }
                    self.rows[i][j - fi] = s.sqrt();
                } else {
                    let (ri, rj) = if i > j {
                        let (lo, hi) = self.rows.split_at_mut(i);
                        (&hi[0], &lo[j])
                    } else {
                        unreachable!()
                    };
                    for k in start..j {
                        s -= ri[k - fi] * rj[k - fj];
                    }
                    let diag = rj[j - fj];
                    self.rows[i][j - fi] = s / diag;
                }
            }
        }
        Ok(Cholesky { factor: self })
    }
}

pub(crate) struct Cholesky {
    factor: Skyline,
}

impl Cholesky {
    fn diag(&self, i: usize) -> f64 {
        *self.factor.rows[i].last().unwrap()
    }

    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.factor.len()).map(|i| self.diag(i).ln()).sum::<f64>()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.factor.len();
        assert_eq!(b.len(), n);
        let mut y = b.to_vec();
        for i in 0..n {
            let f = self.factor.first[i];
            let row = &self.factor.rows[i];
            let mut s = y[i];
            for k in f..i {
                s -= row[k - f] * y[k];
            }
            y[i] = s / row[i - f];
        }
        for i in (0..n).rev() {
            let f = self.factor.first[i];
            let row = &self.factor.rows[i];
            y[i] /= row[i - f];
            let xi = y[i];
            for k in f..i {
                y[k] -= row[k - f] * xi;
            }
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Dense reference Cholesky for comparison.
    fn dense_cholesky(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let n = a.len();
        let mut l = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..=i {
                let mut s = a[i][j];
                for k in 0..j {
                    s -= l[i][k] * l[j][k];
                }
                l[i][j] = if i == j { s.sqrt() } else { s / l[j][j] };
            }
        }
        l
    }

    fn periodic_test_matrix(n: usize, band: usize) -> (Skyline, Vec<Vec<f64>>) {
        let mut sky = Skyline::periodic_band(n, band);
        let mut dense = vec![vec![0.0; n]; n];
        for i in 0..n {
            for d in 1..=band {
                let j = (i + n - d) % n;
                let v = -1.0 / (d as f64 + 0.5);
                dense[i][j] += v;
                dense[j][i] += v;
            }
            dense[i][i] += 4.0 + 0.1 * i as f64;
        }
        for i in 0..n {
            for j in 0..=i {
                if dense[i][j] != 0.0 {
                    sky.add(i, j, dense[i][j]);
                }
            }
        }
        (sky, dense)
    }

    #[test]
    fn matches_dense_factorization() {
        let (sky, dense) = periodic_test_matrix(17, 3);
        for i in 0..17 {
            for j in 0..17 {
                assert_eq!(sky.get(i, j), dense[i][j]);
            }
        }
        let chol = sky.cholesky().unwrap();
        let l = dense_cholesky(&dense);
        let ld: f64 = 2.0 * (0..17).map(|i| l[i][i].ln()).sum::<f64>();
        assert!((chol.log_det() - ld).abs() < 1e-12);

        let b: Vec<f64> = (0..17).map(|i| (i as f64).sin()).collect();
        let x = chol.solve(&b);
        for i in 0..17 {
            let ax: f64 = (0..17).map(|j| dense[i][j] * x[j]).sum();
            assert!((ax - b[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_indefinite() {
        let mut sky = Skyline::periodic_band(4, 1);
        for i in 0..4 {
            sky.add(i, i, 1.0);
        }
        sky.add(1, 0, 2.0);
        assert!(sky.cholesky().is_err());
    }
}
