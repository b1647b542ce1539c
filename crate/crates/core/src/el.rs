//! Empirical likelihood for a zero-mean constraint on `q`-dimensional
//! estimating-equation rows.
//!
//! The profile weights are `p_i = 1 / (m (1 + beta' Y_i))` where the
//! multiplier `beta` maximizes the concave dual
//! `G(beta) = sum_i log(1 + beta' Y_i)` over `{beta : 1 + beta' Y_i > 0}`.
//! The dual is maximized by damped Newton from `beta = 0`. An unbounded dual
//! means the origin is not an interior point of the convex hull of the rows;
//! the statistic is then reported as `+inf`.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::data::DataMatrix;
use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 200;
const GRAD_TOL: f64 = 1e-10;
const DIVERGENCE_SCALE: f64 = 1e8;
const ARMIJO: f64 = 1e-4;
const MIN_STEP: f64 = 1e-14;
/// Predicted increase below which the value comparison is pure roundoff and
/// the Newton step is taken whenever it stays feasible.
const ROUNDOFF: f64 = 1e-12;
/// Separation margin (cosine) above which a divergent dual is classified as
/// the origin lying strictly outside the hull.
const EXTERIOR_MARGIN: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElStatus {
    Converged,
    /// Origin on the boundary of the convex hull; the statistic is infinite.
    HullBoundary,
    /// Origin strictly outside the convex hull; the statistic is infinite.
    HullExterior,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElSolution {
    /// Lagrange multiplier, in the coordinates of the input rows.
    pub beta: Vec<f64>,
    /// `-2 log` empirical likelihood ratio, `2 sum log(1 + beta' Y_i)`.
    /// `+inf` for the two hull-failure statuses.
    pub log_el: f64,
    /// Implied weights `p_i`. Only meaningful when `status` is `Converged`.
    pub weights: Vec<f64>,
    pub status: ElStatus,
    pub iterations: usize,
}

impl ElSolution {
    pub fn is_finite(&self) -> bool {
        self.log_el.is_finite()
    }
}

/// Maximizes the empirical likelihood subject to `sum p_i Y_i = 0` for the
/// rows `Y_i` of `scores` (all of equal length `q`). Needs `m >= q + 1` rows.
pub fn solve_el<R: AsRef<[f64]>>(scores: &[R]) -> Result<ElSolution> {
    let m = scores.len();
    let q = scores.first().map_or(0, |r| r.as_ref().len());
    if q == 0 {
        return Err(Error::Domain(
            "estimating equations need at least one coordinate",
        ));
    }
    for row in scores {
        let row = row.as_ref();
        if row.len() != q {
            return Err(Error::DimensionMismatch {
                expected: q,
                found: row.len(),
            });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
    }
    if m <= q {
        return Err(Error::Underdetermined { rows: m, dims: q });
    }

    // Drop coordinates that vanish on every row and rescale the rest to unit
    // max-abs; the statistic is invariant under both.
    let mut active = Vec::with_capacity(q);
    let mut scale = Vec::with_capacity(q);
    for k in 0..q {
        let s = scores
            .iter()
            .fold(0.0_f64, |acc, r| acc.max(r.as_ref()[k].abs()));
        if s > 0.0 {
            active.push(k);
            scale.push(s);
        }
    }
    if active.is_empty() {
        return Ok(ElSolution {
            beta: vec![0.0; q],
            log_el: 0.0,
            weights: vec![1.0 / m as f64; m],
            status: ElStatus::Converged,
            iterations: 0,
        });
    }
    let qa = active.len();
    let mut z = Vec::with_capacity(m * qa);
    for row in scores {
        let row = row.as_ref();
        z.extend(active.iter().zip(&scale).map(|(&k, s)| row[k] / s));
    }

    let dual = Dual { z: &z, m, q: qa };
    let fit = dual.maximize();

    let mut beta = vec![0.0; q];
    for ((&k, s), b) in active.iter().zip(&scale).zip(&fit.beta) {
        beta[k] = b / s;
    }
    let weights = fit.margins.iter().map(|w| 1.0 / (m as f64 * w)).collect();
    let log_el = match fit.status {
        ElStatus::HullBoundary | ElStatus::HullExterior => f64::INFINITY,
        _ => (2.0 * fit.value).max(0.0),
    };
    Ok(ElSolution {
        beta,
        log_el,
        weights,
        status: fit.status,
        iterations: fit.iterations,
    })
}

/// Owen's empirical likelihood for `E X = mu0` on all `d` coordinates.
pub fn owen_log_el(data: &DataMatrix, mu0: &[f64]) -> Result<ElSolution> {
    data.check_vector(mu0)?;
    if data.n() <= data.d() {
        return Err(Error::Underdetermined {
            rows: data.n(),
            dims: data.d(),
        });
    }
    let centered: Vec<Vec<f64>> = data
        .rows()
        .map(|r| r.iter().zip(mu0).map(|(x, m)| x - m).collect())
        .collect();
    solve_el(&centered)
}

struct Dual<'a> {
    z: &'a [f64],
    m: usize,
    q: usize,
}

struct DualFit {
    beta: Vec<f64>,
    margins: Vec<f64>,
    value: f64,
    status: ElStatus,
    iterations: usize,
}

impl Dual<'_> {
    fn row(&self, i: usize) -> &[f64] {
        &self.z[i * self.q..(i + 1) * self.q]
    }

    fn margins(&self, beta: &[f64], out: &mut [f64]) {
        for (i, w) in out.iter_mut().enumerate() {
            *w = 1.0 + dot(beta, self.row(i));
        }
    }

    /// `G(beta)` given margins; `-inf` outside the admissible region.
    fn value(&self, beta: &[f64], floor: f64) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.m {
            let t = dot(beta, self.row(i));
            if 1.0 + t < floor {
                return f64::NEG_INFINITY;
            }
            acc += t.ln_1p();
        }
        acc
    }

    fn maximize(&self) -> DualFit {
        let (m, q) = (self.m, self.q);
        let mf = m as f64;
        let floor = 1.0 / (mf * mf);
        let min_norm = (0..m)
            .map(|i| norm(self.row(i)))
            .filter(|&n| n > 0.0)
            .fold(f64::INFINITY, f64::min);
        let beta_limit = DIVERGENCE_SCALE / min_norm;

        let mut beta = vec![0.0; q];
        let mut margins = vec![1.0; m];
        let mut value = 0.0;
        let mut trial = vec![0.0; q];

        for iter in 0..MAX_ITERATIONS {
            let mut grad = DVector::<f64>::zeros(q);
            let mut hess = DMatrix::<f64>::zeros(q, q);
            for (i, &w) in margins.iter().enumerate() {
                let y = self.row(i);
                let inv = 1.0 / w;
                for a in 0..q {
                    grad[a] += y[a] * inv;
                    let ya = y[a] * inv * inv;
                    for b in a..q {
                        hess[(a, b)] += ya * y[b];
                    }
                }
            }
            for a in 0..q {
                for b in 0..a {
                    hess[(a, b)] = hess[(b, a)];
                }
            }

            // sum p_i = 1 - beta'grad / m, so both conditions together pin
            // the constraint and the normalization.
            let gmax = grad.amax();
            let bg: f64 = beta.iter().zip(grad.iter()).map(|(b, g)| b * g).sum();
            if gmax <= GRAD_TOL * mf && bg.abs() <= GRAD_TOL * mf {
                return self.finish(beta, margins, value, ElStatus::Converged, iter);
            }

            let step = match newton_direction(hess, &grad) {
                Some(s) => s,
                None => return self.classify(beta, margins, value, iter),
            };
            let decrement: f64 = step.dot(&grad);

            let mut t = 1.0;
            let accepted = loop {
                for a in 0..q {
                    trial[a] = beta[a] + t * step[a];
                }
                let v = self.value(&trial, floor);
                if v.is_finite()
                    && (v >= value + ARMIJO * t * decrement
                        || decrement <= ROUNDOFF * (1.0 + value.abs()))
                {
                    break Some(v);
                }
                t *= 0.5;
                if t < MIN_STEP {
                    break None;
                }
            };
            let Some(v) = accepted else {
                return self.classify(beta, margins, value, iter);
            };
            beta.copy_from_slice(&trial);
            value = v;
            self.margins(&beta, &mut margins);

            if norm(&beta) > beta_limit {
                return self.classify(beta, margins, value, iter + 1);
            }
        }
        self.finish(
            beta,
            margins,
            value,
            ElStatus::MaxIterations,
            MAX_ITERATIONS,
        )
    }

    /// Decides between exterior and boundary once the dual has run off.
    fn classify(
        &self,
        beta: Vec<f64>,
        margins: Vec<f64>,
        value: f64,
        iterations: usize,
    ) -> DualFit {
        let bn = norm(&beta);
        let separation = if bn > 0.0 {
            (0..self.m)
                .filter_map(|i| {
                    let y = self.row(i);
                    let n = norm(y);
                    (n > 0.0).then(|| dot(&beta, y) / (bn * n))
                })
                .fold(f64::INFINITY, f64::min)
        } else {
            f64::NEG_INFINITY
        };
        let status = if separation > EXTERIOR_MARGIN {
            ElStatus::HullExterior
        } else {
            ElStatus::HullBoundary
        };
        self.finish(beta, margins, value, status, iterations)
    }

    fn finish(
        &self,
        beta: Vec<f64>,
        margins: Vec<f64>,
        value: f64,
        status: ElStatus,
        iterations: usize,
    ) -> DualFit {
        DualFit {
            beta,
            margins,
            value,
            status,
            iterations,
        }
    }
}

/// Solves `H s = g` for the ascent direction, with a small ridge when the
/// Hessian is numerically singular (collinear coordinates).
fn newton_direction(hess: DMatrix<f64>, grad: &DVector<f64>) -> Option<DVector<f64>> {
    let q = hess.nrows();
    let ridge = 1e-12 * (0..q).map(|i| hess[(i, i)]).fold(0.0, f64::max);
    if let Some(chol) = hess.clone().cholesky() {
        let s = chol.solve(grad);
        if s.iter().all(|v| v.is_finite()) {
            return Some(s);
        }
    }
    let mut h = hess;
    for i in 0..q {
        h[(i, i)] += ridge;
    }
    let s = h.cholesky()?.solve(grad);
    s.iter().all(|v| v.is_finite()).then_some(s)
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
