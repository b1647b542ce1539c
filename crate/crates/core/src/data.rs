//! Observation matrices, sample splitting into paired scores, and
//! covariance summaries.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// `n x d` matrix of observations, one d-vector per row, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    n: usize,
    d: usize,
    values: Vec<f64>,
}

impl DataMatrix {
    /// Builds a matrix from row-major `values` of length `n * d`.
    pub fn new(n: usize, d: usize, values: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(Error::Domain("dimension must be at least 1"));
        }
        if n < 2 {
            return Err(Error::TooFewObservations {
                needed: 2,
                found: n,
            });
        }
        if values.len() != n * d {
            return Err(Error::DimensionMismatch {
                expected: n * d,
                found: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { n, d, values })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let d = rows.first().map_or(0, |r| r.as_ref().len());
        let mut values = Vec::with_capacity(rows.len() * d);
        for row in rows {
            let row = row.as_ref();
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        Self::new(rows.len(), d, values)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.d)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    pub fn column_means(&self) -> Vec<f64> {
        let mut mean = vec![0.0; self.d];
        for row in self.rows() {
            for (m, x) in mean.iter_mut().zip(row) {
                *m += x;
            }
        }
        let inv = 1.0 / self.n as f64;
        mean.iter_mut().for_each(|m| *m *= inv);
        mean
    }

    pub(crate) fn check_vector(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: v.len(),
            });
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(())
    }
}

/// Score pairs `(u_i, v_i)` obtained by pairing observation `i` with
/// observation `i + m`, `m = floor(n / 2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedScores {
    rows: Vec<[f64; 2]>,
    mu0: Vec<f64>,
    direction: Vec<f64>,
}

impl PairedScores {
    pub fn m(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[[f64; 2]] {
        &self.rows
    }

    pub fn mu0(&self) -> &[f64] {
        &self.mu0
    }

    pub fn direction(&self) -> &[f64] {
        &self.direction
    }
}

/// Splits `data` into halves and forms the quadratic score
/// `u_i = (X_i - mu0)'(X_{i+m} - mu0)` and the linear score
/// `v_i = c'(X_i + X_{i+m} - 2 mu0)`. With odd `n` the last row is unused.
pub fn split_pairs(data: &DataMatrix, mu0: &[f64], direction: &[f64]) -> Result<PairedScores> {
    data.check_vector(mu0)?;
    data.check_vector(direction)?;
    if direction.iter().all(|&c| c == 0.0) {
        return Err(Error::ZeroDirection);
    }
    let m = data.n() / 2;
    let rows = (0..m)
        .map(|i| {
            let (a, b) = (data.row(i), data.row(i + m));
            let mut u = 0.0;
            let mut v = 0.0;
            for k in 0..mu0.len() {
                let (x, y) = (a[k] - mu0[k], b[k] - mu0[k]);
                u += x * y;
                v += direction[k] * (x + y);
            }
            [u, v]
        })
        .collect();
    Ok(PairedScores {
        rows,
        mu0: mu0.to_vec(),
        direction: direction.to_vec(),
    })
}

/// Covariance matrix together with the two sums that drive the variances
/// of the paired scores: `pi11 = sum sigma_ij^2` and `pi22 = 2 sum sigma_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovSummary {
    pub sigma: DMatrix<f64>,
    pub pi11: f64,
    pub pi22: f64,
    /// Ascending eigenvalues, filled by [`CovSummary::with_eigenvalues`].
    pub eigenvalues: Option<Vec<f64>>,
}

impl CovSummary {
    pub fn d(&self) -> usize {
        self.sigma.nrows()
    }

    pub fn with_eigenvalues(mut self) -> Self {
        let eig = SymmetricEigen::new(self.sigma.clone());
        let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        values.sort_by(f64::total_cmp);
        self.eigenvalues = Some(values);
        self
    }

    /// `c' Sigma c`.
    pub fn quadratic_form(&self, c: &[f64]) -> Result<f64> {
        let d = self.d();
        if c.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: c.len(),
            });
        }
        let mut acc = 0.0;
        for i in 0..d {
            for j in 0..d {
                acc += c[i] * self.sigma[(i, j)] * c[j];
            }
        }
        Ok(acc)
    }
}

pub fn cov_summary(sigma: &DMatrix<f64>) -> Result<CovSummary> {
    let (rows, cols) = sigma.shape();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    if sigma.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let scale = sigma.iter().fold(1.0_f64, |acc, x| acc.max(x.abs()));
    let mut worst = 0.0_f64;
    for i in 0..rows {
        for j in (i + 1)..rows {
            worst = worst.max((sigma[(i, j)] - sigma[(j, i)]).abs());
        }
    }
    if worst > 1e-12 * scale {
        return Err(Error::Asymmetric(worst));
    }
    let pi11 = sigma.iter().map(|s| s * s).sum();
    let pi22 = 2.0 * sigma.iter().sum::<f64>();
    Ok(CovSummary {
        sigma: sigma.clone(),
        pi11,
        pi22,
        eigenvalues: None,
    })
}

/// Unbiased sample covariance (divisor `n - 1`), exactly symmetric.
pub fn sample_covariance(data: &DataMatrix) -> Result<DMatrix<f64>> {
    let (n, d) = (data.n(), data.d());
    if n < 2 {
        return Err(Error::TooFewObservations {
            needed: 2,
            found: n,
        });
    }
    let mean = data.column_means();
    let mut centered = vec![0.0; d];
    let mut upper = vec![0.0; d * d];
    for row in data.rows() {
        for (c, (x, m)) in centered.iter_mut().zip(row.iter().zip(&mean)) {
            *c = x - m;
        }
        for j in 0..d {
            let cj = centered[j];
            let dst = &mut upper[j * d..(j + 1) * d];
            for k in j..d {
                dst[k] += cj * centered[k];
            }
        }
    }
    let inv = 1.0 / (n - 1) as f64;
    Ok(DMatrix::from_fn(d, d, |i, j| {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        upper[a * d + b] * inv
    }))
}
