//! One-sample tests of `H0: mu = mu0`: the split-sample two-equation
//! empirical likelihood test (NELM), Owen's empirical likelihood (OELM),
//! Hotelling's T², and the Bai-Saranadasa / Chen-Qin statistic (BS).
//!
//! Every test rejects iff `p_value <= level`.

use alloc::format;
use alloc::string::String;
use alloc::vec;

use core::fmt;

use crate::data::{sample_covariance, split_pairs, DataMatrix};
use crate::dist::{chi2_sf, f_sf, normal_sf};
use crate::el::{owen_log_el, solve_el};
use crate::error::{Error, Result};

/// Dimension above which `OelmCalibration::Auto` switches to the normal
/// approximation.
pub const OELM_AUTO_MAX_CHISQ_DIM: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Nelm,
    OelmChisq,
    OelmNormal,
    Hotelling,
    Bs,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Nelm => "NELM",
            Method::OelmChisq => "OELM-chisq",
            Method::OelmNormal => "OELM-normal",
            Method::Hotelling => "Hotelling",
            Method::Bs => "BS",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OelmCalibration {
    /// Wilks: chi-square with `d` degrees of freedom.
    ChiSquare,
    /// `(stat - d) / sqrt(2d)` against the standard normal upper tail.
    Normal,
    /// Chi-square for `d <= 20`, normal otherwise.
    Auto,
}

impl OelmCalibration {
    pub fn resolve(self, d: usize) -> OelmCalibration {
        match self {
            OelmCalibration::Auto if d <= OELM_AUTO_MAX_CHISQ_DIM => OelmCalibration::ChiSquare,
            OelmCalibration::Auto => OelmCalibration::Normal,
            other => other,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestOutcome {
    pub method: Method,
    /// `+inf` when the empirical likelihood hull condition fails.
    pub statistic: f64,
    pub p_value: f64,
    pub reject: bool,
    pub level: f64,
    pub calibration_note: String,
}

impl TestOutcome {
    fn new(method: Method, statistic: f64, p_value: f64, level: f64, note: String) -> Self {
        let p_value = if p_value.is_nan() {
            1.0
        } else {
            p_value.clamp(0.0, 1.0)
        };
        Self {
            method,
            statistic,
            p_value,
            reject: p_value <= level,
            level,
            calibration_note: note,
        }
    }
}

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain("level must lie in (0, 1)"))
    }
}

fn check_n(data: &DataMatrix, needed: usize) -> Result<()> {
    if data.n() < needed {
        Err(Error::TooFewObservations {
            needed,
            found: data.n(),
        })
    } else {
        Ok(())
    }
}

/// Split-sample empirical likelihood test on the two equations
/// `E u = 0`, `E v = 0`, calibrated by chi-square with 2 degrees of freedom.
pub fn nelm_test(
    data: &DataMatrix,
    mu0: &[f64],
    level: f64,
    direction: &[f64],
) -> Result<TestOutcome> {
    check_level(level)?;
    check_n(data, 6)?;
    let scores = split_pairs(data, mu0, direction)?;
    let fit = solve_el(scores.rows())?;
    let p = chi2_sf(fit.log_el, 2)?;
    Ok(TestOutcome::new(
        Method::Nelm,
        fit.log_el,
        p,
        level,
        String::from("chi-square(2)"),
    ))
}

pub fn oelm_test(
    data: &DataMatrix,
    mu0: &[f64],
    level: f64,
    calibration: OelmCalibration,
) -> Result<TestOutcome> {
    check_level(level)?;
    let fit = owen_log_el(data, mu0)?;
    oelm_calibrate(fit.log_el, data.d(), level, calibration)
}

/// Calibrates an Owen `-2 log` likelihood ratio statistic for a `d`-vector.
pub fn oelm_calibrate(
    statistic: f64,
    d: usize,
    level: f64,
    calibration: OelmCalibration,
) -> Result<TestOutcome> {
    check_level(level)?;
    let df = u32::try_from(d).map_err(|_| Error::Domain("dimension too large"))?;
    Ok(match calibration.resolve(d) {
        OelmCalibration::Normal => {
            let df = d as f64;
            let z = (statistic - df) / (2.0 * df).sqrt();
            TestOutcome::new(
                Method::OelmNormal,
                statistic,
                normal_sf(z),
                level,
                format!("normal((stat-{d})/sqrt({}))", 2 * d),
            )
        }
        _ => TestOutcome::new(
            Method::OelmChisq,
            statistic,
            chi2_sf(statistic, df)?,
            level,
            format!("chi-square({d})"),
        ),
    })
}

/// Hotelling's `T² = n (xbar - mu0)' S^{-1} (xbar - mu0)` with the exact
/// `F(d, n - d)` calibration of `(n - d) / (d (n - 1)) T²`.
pub fn hotelling_test(data: &DataMatrix, mu0: &[f64], level: f64) -> Result<TestOutcome> {
    check_level(level)?;
    data.check_vector(mu0)?;
    let (n, d) = (data.n(), data.d());
    if d >= n {
        return Err(Error::SingularCovariance);
    }
    let s = sample_covariance(data)?;
    let max_diag = (0..d).map(|i| s[(i, i)]).fold(0.0, f64::max);
    let chol = s.cholesky().ok_or(Error::SingularCovariance)?;
    let l = chol.l_dirty();
    let min_pivot = (0..d)
        .map(|i| l[(i, i)] * l[(i, i)])
        .fold(f64::INFINITY, f64::min);
    if !(max_diag > 0.0) || min_pivot <= 1e-12 * max_diag {
        return Err(Error::SingularCovariance);
    }
    let mean = data.column_means();
    let diff = nalgebra::DVector::from_iterator(d, mean.iter().zip(mu0).map(|(x, m)| x - m));
    let t2 = n as f64 * diff.dot(&chol.solve(&diff));
    let f = (n - d) as f64 / (d as f64 * (n - 1) as f64) * t2;
    let p = f_sf(f.max(0.0), d as u32, (n - d) as u32)?;
    Ok(TestOutcome::new(
        Method::Hotelling,
        t2,
        p,
        level,
        format!("F({d},{})", n - d),
    ))
}

/// Returns `(M_n, F_n)`: the mean-based form
/// `|xbar - mu0|² - tr(S) / n` and the cross-product form
/// `sum_{i != j} (X_i - mu0)'(X_j - mu0) / (n (n - 1))`. They agree exactly
/// in exact arithmetic.
pub fn bs_statistics(data: &DataMatrix, mu0: &[f64]) -> Result<(f64, f64)> {
    data.check_vector(mu0)?;
    let m_n = bs_mean_form(data, mu0);
    let n = data.n();
    let mut cross = 0.0;
    for i in 0..n {
        let a = data.row(i);
        for j in 0..n {
            if i != j {
                let b = data.row(j);
                cross += (0..a.len())
                    .map(|k| (a[k] - mu0[k]) * (b[k] - mu0[k]))
                    .sum::<f64>();
            }
        }
    }
    let f_n = cross / (n as f64 * (n - 1) as f64);
    Ok((m_n, f_n))
}

fn bs_mean_form(data: &DataMatrix, mu0: &[f64]) -> f64 {
    let n = data.n() as f64;
    let mean = data.column_means();
    let shift: f64 = mean.iter().zip(mu0).map(|(x, m)| (x - m) * (x - m)).sum();
    let mut trace = 0.0;
    for row in data.rows() {
        trace += row
            .iter()
            .zip(&mean)
            .map(|(x, m)| (x - m) * (x - m))
            .sum::<f64>();
    }
    trace /= n - 1.0;
    shift - trace / n
}

/// `tr(S²)` through whichever Gram matrix is smaller.
fn trace_cov_squared(data: &DataMatrix) -> f64 {
    let (n, d) = (data.n(), data.d());
    let mean = data.column_means();
    let inv = 1.0 / (n - 1) as f64;
    if d <= n {
        let s = sample_covariance(data).expect("n >= 2 checked by caller");
        return s.iter().map(|v| v * v).sum();
    }
    let centered: alloc::vec::Vec<f64> = data
        .rows()
        .flat_map(|r| r.iter().zip(&mean).map(|(x, m)| x - m))
        .collect();
    let mut acc = 0.0;
    for i in 0..n {
        let a = &centered[i * d..(i + 1) * d];
        for j in i..n {
            let b = &centered[j * d..(j + 1) * d];
            let g: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() * inv;
            acc += if i == j { g * g } else { 2.0 * g * g };
        }
    }
    acc
}

/// One-sided normal test on `n M_n` studentized by the ratio-consistent
/// estimator `B² = (n-1)² / ((n-2)(n+1)) [tr(S²) - tr(S)² / (n-1)]` of
/// `tr(Sigma²)`.
pub fn bs_test(data: &DataMatrix, mu0: &[f64], level: f64) -> Result<TestOutcome> {
    check_level(level)?;
    check_n(data, 4)?;
    data.check_vector(mu0)?;
    let n = data.n() as f64;
    let m_n = bs_mean_form(data, mu0);
    let mean = data.column_means();
    let mut tr_s = 0.0;
    for row in data.rows() {
        tr_s += row
            .iter()
            .zip(&mean)
            .map(|(x, m)| (x - m) * (x - m))
            .sum::<f64>();
    }
    tr_s /= n - 1.0;
    let tr_s2 = trace_cov_squared(data);
    let b2 = (n - 1.0) * (n - 1.0) / ((n - 2.0) * (n + 1.0)) * (tr_s2 - tr_s * tr_s / (n - 1.0));
    if !(b2 > 0.0) {
        return Err(Error::DegenerateVariance(b2));
    }
    let z = n * m_n / (2.0 * (n + 1.0) / n * b2).sqrt();
    Ok(TestOutcome::new(
        Method::Bs,
        z,
        normal_sf(z),
        level,
        String::from("normal(one-sided)"),
    ))
}

/// Default direction `1_d`.
pub fn ones(d: usize) -> alloc::vec::Vec<f64> {
    vec![1.0; d]
}
