//! Distribution functions and samplers: normal, chi-square (central and
//! noncentral), F, and Student t.
//!
//! The chi-square family is built on the regularized incomplete gamma
//! function, the F distribution on the regularized incomplete beta
//! function. Samplers consume a caller-owned [`RngCore`] stream and are
//! deterministic functions of it.

use rand_core::RngCore;

use crate::error::{Error, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const EPS: f64 = 1e-16;
const MAX_ITER: usize = 10_000;

/// Accuracy controls for series-based evaluations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistAccuracy {
    pub abs_tol: f64,
    pub max_series_terms: usize,
}

impl Default for DistAccuracy {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            max_series_terms: 10_000,
        }
    }
}

impl DistAccuracy {
    pub fn new(abs_tol: f64, max_series_terms: usize) -> Result<Self> {
        if !(abs_tol > 0.0 && abs_tol <= 1e-6) {
            return Err(Error::Domain("abs_tol must lie in (0, 1e-6]"));
        }
        if max_series_terms < 100 {
            return Err(Error::Domain("max_series_terms must be at least 100"));
        }
        Ok(Self {
            abs_tol,
            max_series_terms,
        })
    }
}

/// `ln Gamma(x)` for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // reflection
        let pi = core::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    let t = x + 7.5;
    for (i, c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    LN_SQRT_2PI + (x + 0.5) * t.ln() - t + acc.ln()
}

fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut sum = 1.0 / a;
    let mut term = sum;
    let mut ap = a;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            break;
        }
    }
    (sum.ln() - x + a * x.ln() - ln_gamma(a)).exp()
}

fn gamma_q_fraction(a: f64, x: f64) -> f64 {
    // modified Lentz
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma(a)).exp() * h
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x < a + 1.0 {
        gamma_p_series(a, x)
    } else {
        1.0 - gamma_q_fraction(a, x)
    }
}

/// Regularized upper incomplete gamma `Q(a, x)`.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x < a + 1.0 {
        1.0 - gamma_p_series(a, x)
    } else {
        gamma_q_fraction(a, x)
    }
}

fn beta_fraction(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn beta_inc(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    if x < (a + 1.0) / (a + b + 2.0) {
        ln_front.exp() * beta_fraction(a, b, x) / a
    } else {
        1.0 - ln_front.exp() * beta_fraction(b, a, 1.0 - x) / b
    }
}

fn check_df(k: u32) -> Result<f64> {
    if k == 0 {
        Err(Error::Domain("degrees of freedom must be positive"))
    } else {
        Ok(f64::from(k))
    }
}

fn check_x(x: f64) -> Result<()> {
    if x.is_nan() || x < 0.0 {
        Err(Error::Domain("argument must be a non-negative number"))
    } else {
        Ok(())
    }
}

fn check_prob(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain("probability must lie in (0, 1)"))
    }
}

pub fn chi2_cdf(x: f64, k: u32) -> Result<f64> {
    let k = check_df(k)?;
    check_x(x)?;
    if x == f64::INFINITY {
        return Ok(1.0);
    }
    Ok(gamma_p(0.5 * k, 0.5 * x))
}

/// Upper tail `P(chi2_k > x)`. `x = +inf` gives 0.
pub fn chi2_sf(x: f64, k: u32) -> Result<f64> {
    let k = check_df(k)?;
    check_x(x)?;
    if x == f64::INFINITY {
        return Ok(0.0);
    }
    Ok(gamma_q(0.5 * k, 0.5 * x))
}

fn chi2_pdf(x: f64, k: f64) -> f64 {
    if x <= 0.0 {
        return if k == 2.0 { 0.5 } else { 0.0 };
    }
    let a = 0.5 * k;
    ((a - 1.0) * x.ln() - 0.5 * x - a * core::f64::consts::LN_2 - ln_gamma(a)).exp()
}

/// Lower quantile: the `x` with `chi2_cdf(x, k) = p`.
pub fn chi2_quantile(p: f64, k: u32) -> Result<f64> {
    check_prob(p)?;
    let kf = check_df(k)?;
    // Work on whichever tail is smaller to keep the residual well conditioned.
    let upper = p > 0.5;
    let target = if upper { 1.0 - p } else { p };
    let resid = |x: f64| {
        let a = 0.5 * kf;
        if upper {
            gamma_q(a, 0.5 * x) - target
        } else {
            gamma_p(a, 0.5 * x) - target
        }
    };
    let sign = if upper { -1.0 } else { 1.0 };

    // resid * sign is increasing in x
    let mut lo = 0.0;
    let mut hi = kf.max(1.0);
    while sign * resid(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let r = resid(x);
        if r == 0.0 {
            return Ok(x);
        }
        if sign * r < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let pdf = chi2_pdf(x, kf);
        let mut next = x - sign * r / pdf;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-15 * x.abs().max(1e-300) || hi - lo <= 1e-15 * hi {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}

/// Upper tail of the noncentral chi-square with `k` degrees of freedom and
/// noncentrality `tau`, as a Poisson(tau / 2) mixture of central tails.
pub fn noncentral_chi2_sf(x: f64, k: u32, tau: f64) -> Result<f64> {
    noncentral_chi2_sf_with(x, k, tau, &DistAccuracy::default())
}

pub fn noncentral_chi2_sf_with(x: f64, k: u32, tau: f64, acc: &DistAccuracy) -> Result<f64> {
    let kf = check_df(k)?;
    check_x(x)?;
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(Error::Domain(
            "noncentrality must be finite and non-negative",
        ));
    }
    if tau == 0.0 {
        return chi2_sf(x, k);
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x == f64::INFINITY {
        return Ok(0.0);
    }
    let lambda = 0.5 * tau;
    let y = 0.5 * x;
    let a0 = 0.5 * kf;

    // Start at the Poisson mode; sweep down to 0 and up until the tail is small.
    let mode = lambda.floor();
    let j0 = mode as usize;
    let w0 = (-lambda + mode * lambda.ln() - ln_gamma(mode + 1.0)).exp();
    let q0 = gamma_q(a0 + mode, y);
    // g(a) = y^a e^{-y} / Gamma(a + 1), so Q(a + 1, y) = Q(a, y) + g(a)
    let g0 = (a0 + mode) * y.ln() - y - ln_gamma(a0 + mode + 1.0);
    let g0 = g0.exp();

    let mut total = w0 * q0;
    let mut mass = w0;
    let mut terms = 1usize;

    let (mut w, mut q, mut g) = (w0, q0, g0);
    for j in (0..j0).rev() {
        // step from j + 1 down to j
        let a = a0 + j as f64;
        w *= (j + 1) as f64 / lambda;
        g *= (a + 1.0) / y;
        q = (q - g).max(0.0);
        total += w * q;
        mass += w;
        terms += 1;
        if w < f64::MIN_POSITIVE {
            break;
        }
    }

    let (mut w, mut q, mut g) = (w0, q0, g0);
    let mut j = j0;
    while 1.0 - mass >= acc.abs_tol {
        let a = a0 + j as f64;
        q = (q + g).min(1.0);
        g *= y / (a + 1.0);
        j += 1;
        w *= lambda / j as f64;
        total += w * q;
        mass += w;
        terms += 1;
        if terms > acc.max_series_terms {
            return Err(Error::SeriesNonConvergence(acc.max_series_terms));
        }
        if w == 0.0 && j as f64 > lambda {
            break;
        }
    }
    // Remaining central tails lie between the last one and 1.
    total += (1.0 - mass).max(0.0) * q;
    Ok(total.clamp(0.0, 1.0))
}

/// Upper tail of the F distribution with `(d1, d2)` degrees of freedom.
pub fn f_sf(x: f64, d1: u32, d2: u32) -> Result<f64> {
    let a = check_df(d1)?;
    let b = check_df(d2)?;
    check_x(x)?;
    if x == 0.0 {
        return Ok(1.0);
    }
    if x == f64::INFINITY {
        return Ok(0.0);
    }
    Ok(beta_inc(0.5 * b, 0.5 * a, b / (b + a * x)))
}

/// Student t CDF with `nu` degrees of freedom.
pub fn t_cdf(x: f64, nu: u32) -> Result<f64> {
    let nu = check_df(nu)?;
    if x.is_nan() {
        return Err(Error::Domain("argument is NaN"));
    }
    let tail = 0.5 * beta_inc(0.5 * nu, 0.5, nu / (nu + x * x));
    Ok(if x > 0.0 { 1.0 - tail } else { tail })
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * core::f64::consts::FRAC_1_SQRT_2)
}

pub fn normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x * core::f64::consts::FRAC_1_SQRT_2)
}

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x - LN_SQRT_2PI).exp()
}

/// Standard normal quantile (Wichura's AS 241 followed by one Newton step).
pub fn normal_quantile(p: f64) -> Result<f64> {
    check_prob(p)?;
    let q = p - 0.5;
    let mut x = if q.abs() <= 0.425 {
        let r = 0.180_625 - q * q;
        q * poly(&AS241_A, r) / poly(&AS241_B, r)
    } else {
        let r = if q < 0.0 { p } else { 1.0 - p };
        let r = (-r.ln()).sqrt();
        let v = if r <= 5.0 {
            let r = r - 1.6;
            poly(&AS241_C, r) / poly(&AS241_D, r)
        } else {
            let r = r - 5.0;
            poly(&AS241_E, r) / poly(&AS241_F, r)
        };
        if q < 0.0 {
            -v
        } else {
            v
        }
    };
    let pdf = normal_pdf(x);
    if pdf > 0.0 {
        let resid = if x > 0.0 {
            (1.0 - p) - normal_sf(x)
        } else {
            normal_cdf(x) - p
        };
        x -= resid / pdf;
    }
    Ok(x)
}

fn poly(coef: &[f64; 8], x: f64) -> f64 {
    coef.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

const AS241_A: [f64; 8] = [
    3.387_132_872_796_366_5,
    1.331_416_678_917_843_8e2,
    1.971_590_950_306_551_3e3,
    1.373_169_376_550_946e4,
    4.592_195_393_154_987e4,
    6.726_577_092_700_87e4,
    3.343_057_558_358_813e4,
    2.509_080_928_730_122_7e3,
];
const AS241_B: [f64; 8] = [
    1.0,
    4.231_333_070_160_091e1,
    6.871_870_074_920_579e2,
    5.394_196_021_424_751e3,
    2.121_379_430_158_659_7e4,
    3.930_789_580_009_271e4,
    2.872_908_573_572_194_3e4,
    5.226_495_278_852_545e3,
];
const AS241_C: [f64; 8] = [
    1.423_437_110_749_683_5,
    4.630_337_846_156_546,
    5.769_497_221_460_691,
    3.647_848_324_763_204_5,
    1.270_458_252_452_368_4,
    2.417_807_251_774_506e-1,
    2.272_384_498_926_918_4e-2,
    7.745_450_142_783_414e-4,
];
const AS241_D: [f64; 8] = [
    1.0,
    2.053_191_626_637_759,
    1.676_384_830_183_803_8,
    6.897_673_349_851e-1,
    1.481_039_764_274_800_8e-1,
    1.519_866_656_361_645_7e-2,
    5.475_938_084_995_345e-4,
    1.050_750_071_644_416_9e-9,
];
const AS241_E: [f64; 8] = [
    6.657_904_643_501_103,
    5.463_784_911_164_114,
    1.784_826_539_917_291_3,
    2.965_605_718_285_048_7e-1,
    2.653_218_952_657_612_4e-2,
    1.242_660_947_388_078_4e-3,
    2.711_555_568_743_487_6e-5,
    2.010_334_399_292_288_1e-7,
];
const AS241_F: [f64; 8] = [
    1.0,
    5.998_322_065_558_88e-1,
    1.369_298_809_227_358e-1,
    1.487_536_129_085_061_5e-2,
    7.868_691_311_456_133e-4,
    1.846_318_317_510_054_8e-5,
    1.421_511_758_316_446e-7,
    2.043_631_033_761_715e-15,
];

/// Uniform draw on `[0, 1)` with 53 random bits.
#[inline]
pub fn sample_unit<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Two independent standard normals by the Marsaglia polar method.
pub fn sample_normal_pair<R: RngCore + ?Sized>(rng: &mut R) -> (f64, f64) {
    loop {
        let u = 2.0 * sample_unit(rng) - 1.0;
        let v = 2.0 * sample_unit(rng) - 1.0;
        let s = u * u + v * v;
        if s < 1.0 && s > 0.0 {
            let f = (-2.0 * s.ln() / s).sqrt();
            return (u * f, v * f);
        }
    }
}

/// One standard normal; the partner from the polar pair is discarded.
pub fn sample_normal<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    sample_normal_pair(rng).0
}

/// Fills `out` with independent standard normals, two per polar draw.
pub fn fill_normal<R: RngCore + ?Sized>(rng: &mut R, out: &mut [f64]) {
    let mut chunks = out.chunks_exact_mut(2);
    for pair in &mut chunks {
        let (a, b) = sample_normal_pair(rng);
        pair[0] = a;
        pair[1] = b;
    }
    if let [last] = chunks.into_remainder() {
        *last = sample_normal(rng);
    }
}

/// Chi-square with integer `k` degrees of freedom as a sum of squared normals.
pub fn sample_chi2<R: RngCore + ?Sized>(rng: &mut R, k: u32) -> f64 {
    let mut acc = 0.0;
    let mut left = k;
    while left >= 2 {
        let (a, b) = sample_normal_pair(rng);
        acc += a * a + b * b;
        left -= 2;
    }
    if left == 1 {
        let z = sample_normal(rng);
        acc += z * z;
    }
    acc
}

/// Student t with `nu >= 1` degrees of freedom, `Z / sqrt(V / nu)`.
pub fn sample_t<R: RngCore + ?Sized>(rng: &mut R, nu: u32) -> f64 {
    debug_assert!(nu >= 1);
    let z = sample_normal(rng);
    let v = sample_chi2(rng, nu);
    z / (v / f64::from(nu)).sqrt()
}
