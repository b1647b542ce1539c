//! Asymptotic power of the split-sample EL test and of the BS test under a
//! fixed alternative.

use alloc::vec::Vec;

use crate::data::CovSummary;
use crate::dist::{chi2_quantile, noncentral_chi2_sf, normal_cdf, normal_quantile};
use crate::error::{Error, Result};

/// True covariance and alternative for a power calculation.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSpec {
    pub sigma: CovSummary,
    /// `mu - mu0`.
    pub mean_shift: Vec<f64>,
    pub n: usize,
    pub direction: Vec<f64>,
    pub level: f64,
}

impl PowerSpec {
    pub fn new(
        sigma: CovSummary,
        mean_shift: Vec<f64>,
        n: usize,
        direction: Vec<f64>,
        level: f64,
    ) -> Result<Self> {
        let d = sigma.d();
        for v in [&mean_shift, &direction] {
            if v.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: v.len(),
                });
            }
        }
        if !(level > 0.0 && level < 1.0) {
            return Err(Error::Domain("level must lie in (0, 1)"));
        }
        if !(sigma.pi22 > 0.0) {
            return Err(Error::DegenerateVariance(sigma.pi22));
        }
        if n < 2 {
            return Err(Error::TooFewObservations {
                needed: 2,
                found: n,
            });
        }
        Ok(Self {
            sigma,
            mean_shift,
            n,
            direction,
            level,
        })
    }

    pub fn m(&self) -> usize {
        self.n / 2
    }
}

/// Noncentrality `m |mu0 - mu|^4 / pi11 + 2 m (c'(mu0 - mu))² / (c' Sigma c)`.
/// With `c = 1_d` the denominator of the second term is `sum sigma_ij`.
pub fn noncentrality_tau(spec: &PowerSpec) -> Result<f64> {
    let pi11 = spec.sigma.pi11;
    let c_var = spec.sigma.quadratic_form(&spec.direction)?;
    if !(pi11 > 0.0) {
        return Err(Error::DegenerateVariance(pi11));
    }
    if !(c_var > 0.0) {
        return Err(Error::DegenerateVariance(c_var));
    }
    let m = spec.m() as f64;
    let sq: f64 = spec.mean_shift.iter().map(|x| x * x).sum();
    let lin: f64 = spec
        .mean_shift
        .iter()
        .zip(&spec.direction)
        .map(|(x, c)| x * c)
        .sum();
    Ok(m * sq * sq / pi11 + 2.0 * m * lin * lin / c_var)
}

/// `P(chi2_{2, tau} > xi)` with `xi` the `1 - level` quantile of chi2_2.
pub fn power_nelm(spec: &PowerSpec) -> Result<f64> {
    let tau = noncentrality_tau(spec)?;
    power_from_tau(tau, spec.level)
}

pub fn power_from_tau(tau: f64, level: f64) -> Result<f64> {
    if tau == 0.0 {
        return Ok(level);
    }
    let crit = chi2_quantile(1.0 - level, 2)?;
    noncentral_chi2_sf(crit, 2, tau)
}

/// `Phi(-z_{1-level} + n |mu0 - mu|² / sqrt(2 pi11))`.
pub fn power_bs(spec: &PowerSpec) -> Result<f64> {
    let pi11 = spec.sigma.pi11;
    if !(pi11 > 0.0) {
        return Err(Error::DegenerateVariance(pi11));
    }
    let z = normal_quantile(1.0 - spec.level)?;
    let sq: f64 = spec.mean_shift.iter().map(|x| x * x).sum();
    Ok(normal_cdf(-z + spec.n as f64 * sq / (2.0 * pi11).sqrt()))
}

/// Closed-form noncentrality for the bidiagonal factor model with unit
/// innovation variance and drift `delta / sqrt(n)` on every coordinate.
pub fn model1_tau(n: usize, d: usize, delta: f64) -> f64 {
    let (m, nf, df) = ((n / 2) as f64, n as f64, d as f64);
    m * df * df * delta.powi(4) / ((6.0 * df - 5.0) * nf * nf)
        + 2.0 * m * df * df * delta * delta / ((4.0 * df - 3.0) * nf)
}

/// Closed-form noncentrality for the Gaussian AR(1) model with
/// correlation `0.5^|i-j|` and drift `delta / sqrt(n)`.
pub fn model2_tau(n: usize, d: usize, delta: f64) -> f64 {
    let (m, nf, df) = ((n / 2) as f64, n as f64, d as f64);
    let quad = 5.0 / 3.0 - 8.0 * (1.0 - 0.5f64.powf(2.0 * df)) / (9.0 * df);
    let lin = 3.0 - 4.0 * (1.0 - 0.5f64.powf(df)) / df;
    m * df / (nf * nf) * delta.powi(4) / quad + m * df / nf * 2.0 * delta * delta / lin
}
