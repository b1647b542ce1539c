//! Reference computations that share no code with the library paths they
//! check.
#![allow(dead_code, clippy::needless_range_loop)]

/// Dual objective `sum log(1 + b'y)`, `-inf` outside the feasible set.
fn dual(beta: &[f64], rows: &[Vec<f64>]) -> f64 {
    let mut acc = 0.0;
    for y in rows {
        let w = 1.0 + beta.iter().zip(y).map(|(b, v)| b * v).sum::<f64>();
        if w <= 0.0 {
            return f64::NEG_INFINITY;
        }
        acc += w.ln();
    }
    acc
}

/// `-2 log` EL ratio by pattern search on a refining grid over the concave
/// dual, for `q <= 2`. The caller must ensure the origin is interior to the
/// hull of the rows.
pub fn grid_log_el(rows: &[Vec<f64>]) -> f64 {
    let q = rows[0].len();
    assert!(q == 1 || q == 2);
    let scale = rows
        .iter()
        .map(|y| y.iter().map(|v| v * v).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let mut center = vec![0.0; q];
    let mut best = dual(&center, rows);
    let mut h = 0.25 / scale;
    const K: i32 = 6;
    while h > 1e-14 / scale {
        let mut arg = center.clone();
        let mut on_edge = false;
        let offsets: Vec<Vec<i32>> = if q == 1 {
            (-K..=K).map(|i| vec![i]).collect()
        } else {
            (-K..=K)
                .flat_map(|i| (-K..=K).map(move |j| vec![i, j]))
                .collect()
        };
        for off in offsets {
            let b: Vec<f64> = center
                .iter()
                .zip(&off)
                .map(|(c, &o)| c + o as f64 * h)
                .collect();
            let v = dual(&b, rows);
            if v > best {
                best = v;
                arg = b;
                on_edge = off.iter().any(|o| o.abs() == K);
            }
        }
        if arg == center {
            h *= 0.5;
        } else if on_edge {
            h *= 2.0;
        }
        center = arg;
    }
    2.0 * best
}

/// Whether the origin is strictly inside the convex hull of 1- or 2-d rows,
/// from the angular gaps between the points.
pub fn origin_interior(rows: &[Vec<f64>]) -> bool {
    match rows[0].len() {
        1 => {
            let lo = rows.iter().map(|y| y[0]).fold(f64::INFINITY, f64::min);
            let hi = rows.iter().map(|y| y[0]).fold(f64::NEG_INFINITY, f64::max);
            lo < 0.0 && hi > 0.0
        }
        2 => {
            let mut angles: Vec<f64> = rows
                .iter()
                .filter(|y| y[0] != 0.0 || y[1] != 0.0)
                .map(|y| y[1].atan2(y[0]))
                .collect();
            if angles.len() < 3 {
                return false;
            }
            angles.sort_by(f64::total_cmp);
            let mut gap = angles[0] + 2.0 * std::f64::consts::PI - angles[angles.len() - 1];
            for w in angles.windows(2) {
                gap = gap.max(w[1] - w[0]);
            }
            gap < std::f64::consts::PI - 1e-6
        }
        _ => unreachable!(),
    }
}

/// Student t CDF by composite Simpson integration of the density.
pub fn t_cdf_quadrature(x: f64, nu: f64) -> f64 {
    let ln_c = ln_gamma_stirling((nu + 1.0) / 2.0)
        - ln_gamma_stirling(nu / 2.0)
        - 0.5 * (nu * std::f64::consts::PI).ln();
    let pdf = |t: f64| (ln_c - (nu + 1.0) / 2.0 * (1.0 + t * t / nu).ln()).exp();
    let (a, b) = (0.0, x.abs());
    let n = 20_000;
    let h = (b - a) / n as f64;
    let mut s = pdf(a) + pdf(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * pdf(a + i as f64 * h);
    }
    let half = s * h / 3.0;
    if x >= 0.0 {
        0.5 + half
    } else {
        0.5 - half
    }
}

/// `ln Gamma` by shifting the argument up and using Stirling's series.
pub fn ln_gamma_stirling(mut x: f64) -> f64 {
    let mut shift = 0.0;
    while x < 20.0 {
        shift -= x.ln();
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv
        * (1.0 / 12.0
            - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 / 1188.0))));
    shift + (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + series
}

/// Standard normal CDF from the Maclaurin series of erf (fine for |x| < 5).
pub fn normal_cdf_series(x: f64) -> f64 {
    let z = x / std::f64::consts::SQRT_2;
    let mut term = z;
    let mut sum = z;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= -z * z / k;
        let add = term / (2.0 * k + 1.0);
        sum += add;
        if add.abs() < 1e-18 {
            break;
        }
    }
    0.5 + sum / std::f64::consts::PI.sqrt()
}

/// Normal quantile by bisection on the series CDF.
pub fn normal_quantile_bisect(p: f64) -> f64 {
    let (mut lo, mut hi) = (-5.0, 5.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if normal_cdf_series(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Symmetric eigenvalues by cyclic Jacobi rotations, ascending.
pub fn jacobi_eigenvalues(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum();
        if off < 1e-26 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}
