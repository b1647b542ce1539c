//! Simulation models and reproducible random substreams.
//!
//! * `Model1`: `X_1 = W_1`, `X_j = W_{j-1} + W_j`, plus drift, with i.i.d.
//!   `W` from N(0, 1) or t(6) (unstandardized, variance 1.5).
//! * `Model2`: Gaussian with covariance `0.5^|i-j|`, plus drift.
//! * `ModelB`: `X = Gamma Z + mean` with unit-variance innovations.
//!
//! The drift is `delta / sqrt(n)` on every coordinate.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::data::DataMatrix;
use crate::dist::{fill_normal, sample_normal, sample_t};
use crate::error::{Error, Result};

const T6_VARIANCE: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Model1,
    Model2,
    ModelB,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Innovation {
    StdNormal,
    T6,
}

impl Innovation {
    fn variance(self) -> f64 {
        match self {
            Innovation::StdNormal => 1.0,
            Innovation::T6 => T6_VARIANCE,
        }
    }

    fn draw<R: RngCore + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            Innovation::StdNormal => sample_normal(rng),
            Innovation::T6 => sample_t(rng, 6),
        }
    }

    fn fill<R: RngCore + ?Sized>(self, rng: &mut R, out: &mut [f64]) {
        match self {
            Innovation::StdNormal => fill_normal(rng, out),
            Innovation::T6 => out.iter_mut().for_each(|w| *w = self.draw(rng)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub d: usize,
    pub delta: f64,
    /// Sample size used for the `delta / sqrt(n)` drift.
    pub n: usize,
    pub innovation: Innovation,
    /// `d x k` loading matrix, `ModelB` only.
    pub gamma: Option<DMatrix<f64>>,
    pub mu_base: Vec<f64>,
}

impl ModelSpec {
    pub fn model1(d: usize, n: usize, delta: f64, innovation: Innovation) -> Self {
        Self {
            kind: ModelKind::Model1,
            d,
            delta,
            n,
            innovation,
            gamma: None,
            mu_base: vec![0.0; d],
        }
    }

    pub fn model2(d: usize, n: usize, delta: f64) -> Self {
        Self {
            kind: ModelKind::Model2,
            d,
            delta,
            n,
            innovation: Innovation::StdNormal,
            gamma: None,
            mu_base: vec![0.0; d],
        }
    }

    pub fn model_b(gamma: DMatrix<f64>, n: usize, delta: f64, innovation: Innovation) -> Self {
        let d = gamma.nrows();
        Self {
            kind: ModelKind::ModelB,
            d,
            delta,
            n,
            innovation,
            gamma: Some(gamma),
            mu_base: vec![0.0; d],
        }
    }

    /// Same model with a different dimension. `ModelB` keeps its loading
    /// matrix only if the dimension is unchanged; otherwise it becomes the
    /// identity of the new size.
    pub fn with_dimension(&self, d: usize) -> Self {
        let mut out = self.clone();
        out.d = d;
        if out.mu_base.len() != d {
            out.mu_base = vec![0.0; d];
        }
        if self.kind == ModelKind::ModelB && self.gamma.as_ref().map(|g| g.nrows()) != Some(d) {
            out.gamma = Some(DMatrix::identity(d, d));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: &str| Err(Error::InvalidSpec(msg.into()));
        if self.d == 0 {
            return invalid("dimension must be at least 1");
        }
        if self.n < 2 {
            return invalid("sample size must be at least 2");
        }
        if !self.delta.is_finite() {
            return invalid("delta must be finite");
        }
        if self.mu_base.len() != self.d || self.mu_base.iter().any(|v| !v.is_finite()) {
            return invalid("mu_base must be a finite d-vector");
        }
        match (self.kind, &self.gamma) {
            (ModelKind::ModelB, None) => invalid("ModelB requires a loading matrix"),
            (ModelKind::ModelB, Some(g)) if g.nrows() != self.d || g.ncols() == 0 => {
                Err(Error::InvalidSpec(format!(
                    "loading matrix is {}x{}, expected {} rows",
                    g.nrows(),
                    g.ncols(),
                    self.d
                )))
            }
            (ModelKind::ModelB, Some(g)) if g.iter().any(|v| !v.is_finite()) => {
                invalid("loading matrix has non-finite entries")
            }
            (ModelKind::Model1 | ModelKind::Model2, Some(_)) => {
                invalid("only ModelB takes a loading matrix")
            }
            (ModelKind::Model2, _) if self.innovation != Innovation::StdNormal => {
                invalid("Model2 is Gaussian; t(6) innovations are not defined for it")
            }
            _ => Ok(()),
        }
    }

    pub fn drift(&self) -> f64 {
        self.delta / (self.n as f64).sqrt()
    }

    /// Population mean `mu_base + delta 1_d / sqrt(n)`.
    pub fn mean(&self) -> Vec<f64> {
        let drift = self.drift();
        self.mu_base.iter().map(|m| m + drift).collect()
    }

    /// Population covariance of one row.
    pub fn sigma(&self) -> Result<DMatrix<f64>> {
        self.validate()?;
        Ok(match self.kind {
            ModelKind::Model1 => model1_sigma(self.d) * self.innovation.variance(),
            ModelKind::Model2 => model2_sigma(self.d),
            ModelKind::ModelB => {
                let g = self.gamma.as_ref().expect("validated");
                g * g.transpose()
            }
        })
    }
}

/// Lower-bidiagonal matrix of ones.
pub fn model1_gamma(d: usize) -> DMatrix<f64> {
    DMatrix::from_fn(d, d, |i, j| if i == j || i == j + 1 { 1.0 } else { 0.0 })
}

/// `Gamma Gamma'`: diagonal `(1, 2, ..., 2)`, ones on the first off-diagonals.
pub fn model1_sigma(d: usize) -> DMatrix<f64> {
    DMatrix::from_fn(d, d, |i, j| match i.abs_diff(j) {
        0 if i == 0 => 1.0,
        0 => 2.0,
        1 => 1.0,
        _ => 0.0,
    })
}

pub fn model2_sigma(d: usize) -> DMatrix<f64> {
    DMatrix::from_fn(d, d, |i, j| 0.5f64.powi(i.abs_diff(j) as i32))
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// Random stream identified by `(seed, stream_id)`.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let derived = mix64(seed ^ GOLDEN_GAMMA.wrapping_mul(stream_id));
        Self {
            seed,
            stream_id,
            rng: ChaCha8Rng::seed_from_u64(derived),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Draws `n` i.i.d. rows from `spec`.
pub fn sample<R: RngCore + ?Sized>(spec: &ModelSpec, n: usize, rng: &mut R) -> Result<DataMatrix> {
    spec.validate()?;
    if n < 2 {
        return Err(Error::InvalidSpec("need at least 2 rows".into()));
    }
    let d = spec.d;
    let mean = spec.mean();
    let mut values = vec![0.0; n * d];
    match spec.kind {
        ModelKind::Model1 => {
            let mut w = vec![0.0; d];
            for row in values.chunks_exact_mut(d) {
                spec.innovation.fill(rng, &mut w);
                row[0] = w[0] + mean[0];
                for j in 1..d {
                    row[j] = w[j - 1] + w[j] + mean[j];
                }
            }
        }
        ModelKind::Model2 => {
            let mut eps = vec![0.0; d];
            let innov = 0.75f64.sqrt();
            for row in values.chunks_exact_mut(d) {
                fill_normal(rng, &mut eps);
                let mut prev = eps[0];
                row[0] = prev + mean[0];
                for j in 1..d {
                    prev = 0.5 * prev + innov * eps[j];
                    row[j] = prev + mean[j];
                }
            }
        }
        ModelKind::ModelB => {
            let g = spec.gamma.as_ref().expect("validated");
            let k = g.ncols();
            let scale = 1.0 / spec.innovation.variance().sqrt();
            let mut z = vec![0.0; k];
            for row in values.chunks_exact_mut(d) {
                spec.innovation.fill(rng, &mut z);
                for (i, x) in row.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for (j, zj) in z.iter().enumerate() {
                        acc += g[(i, j)] * zj;
                    }
                    *x = acc * scale + mean[i];
                }
            }
        }
    }
    DataMatrix::new(n, d, values)
}
