//! Monte Carlo size and power experiments and predicted-power tables.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use splitel_core::datagen::{sample, Innovation, ModelKind, ModelSpec, RngStream};
use splitel_core::meantest::{
    bs_test, hotelling_test, nelm_test, oelm_test, OELM_AUTO_MAX_CHISQ_DIM,
};
use splitel_core::power::{noncentrality_tau, power_bs, power_from_tau};
use splitel_core::{cov_summary, DataMatrix, OelmCalibration, PowerSpec};

use crate::error::{CliError, Result};

pub const CSV_HEADER: &str =
    "method,model,innovation,n,d,delta,level,reps,seed,reject_count,reject_rate,mc_se,skipped,wall_ms";
pub const POWER_HEADER: &str = "d,tau,power_nelm,power_bs";
pub const MIN_REPS: usize = 100;
pub const DEFAULT_D_GRID: [usize; 6] = [5, 10, 25, 50, 100, 200];
pub const DEFAULT_REPS: usize = 2000;
pub const FULL_REPS: usize = 10_000;

/// `5, 10, ..., 200`.
pub fn full_d_grid() -> Vec<usize> {
    (1..=40).map(|k| 5 * k).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SimMethod {
    Nelm,
    Oelm,
    Hotelling,
    Bs,
}

impl SimMethod {
    pub const ALL: [SimMethod; 4] = [
        SimMethod::Nelm,
        SimMethod::Oelm,
        SimMethod::Hotelling,
        SimMethod::Bs,
    ];

    pub fn label(self) -> &'static str {
        match self {
            SimMethod::Nelm => "NELM",
            SimMethod::Oelm => "OELM",
            SimMethod::Hotelling => "Hotelling",
            SimMethod::Bs => "BS",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "nelm" => Some(SimMethod::Nelm),
            "oelm" => Some(SimMethod::Oelm),
            "hotelling" => Some(SimMethod::Hotelling),
            "bs" => Some(SimMethod::Bs),
            _ => None,
        }
    }

    /// Whether the method cannot be computed at this shape.
    pub fn infeasible(self, n: usize, d: usize) -> bool {
        matches!(self, SimMethod::Oelm | SimMethod::Hotelling) && d >= n
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MethodSelection {
    /// All four methods, except OELM above dimension 20.
    Default,
    Only(Vec<SimMethod>),
}

impl MethodSelection {
    pub fn for_dimension(&self, d: usize) -> Vec<SimMethod> {
        match self {
            MethodSelection::Default => SimMethod::ALL
                .into_iter()
                .filter(|&m| m != SimMethod::Oelm || d <= OELM_AUTO_MAX_CHISQ_DIM)
                .collect(),
            MethodSelection::Only(list) => list.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    /// Template; its dimension, sample size and drift are replaced per cell.
    pub model: ModelSpec,
    pub n: usize,
    pub d_grid: Vec<usize>,
    pub delta: f64,
    pub level: f64,
    pub reps: usize,
    pub seed: u64,
    pub methods: MethodSelection,
    pub oelm_calibration: OelmCalibration,
}

impl ExperimentSpec {
    pub fn new(model: ModelSpec, n: usize, d_grid: Vec<usize>, delta: f64) -> Self {
        Self {
            model,
            n,
            d_grid,
            delta,
            level: 0.05,
            reps: DEFAULT_REPS,
            seed: 1,
            methods: MethodSelection::Default,
            oelm_calibration: OelmCalibration::Auto,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(CliError::Spec(msg));
        if self.reps < MIN_REPS {
            return bad(format!("reps must be at least {MIN_REPS}"));
        }
        if self.d_grid.is_empty() || self.d_grid.contains(&0) {
            return bad("d grid must be nonempty with positive dimensions".into());
        }
        if let MethodSelection::Only(list) = &self.methods {
            if list.is_empty() {
                return bad("method list is empty".into());
            }
        }
        if self.n < 6 {
            return bad("n must be at least 6".into());
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return bad("level must lie in (0, 1)".into());
        }
        if let (ModelKind::ModelB, Some(g)) = (self.model.kind, &self.model.gamma) {
            if self.d_grid.iter().any(|&d| d != g.nrows()) {
                return bad(format!("the loading matrix fixes d = {}", g.nrows()));
            }
        }
        for &d in &self.d_grid {
            self.model_at(d).validate()?;
        }
        Ok(())
    }

    pub fn model_at(&self, d: usize) -> ModelSpec {
        let mut m = self.model.with_dimension(d);
        m.n = self.n;
        m.delta = self.delta;
        m
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub method: SimMethod,
    pub d: usize,
    pub reject_count: u64,
    pub reps: usize,
    pub skipped: bool,
    /// Summed time spent inside the method across replications.
    pub wall_ms: u64,
}

impl CellResult {
    pub fn reject_rate(&self) -> Option<f64> {
        (!self.skipped).then(|| self.reject_count as f64 / self.reps as f64)
    }

    /// `sqrt(r (1 - r) / reps)`.
    pub fn mc_se(&self) -> Option<f64> {
        self.reject_rate()
            .map(|r| (r * (1.0 - r) / self.reps as f64).sqrt())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub spec: ExperimentSpec,
    pub cells: Vec<CellResult>,
}

impl ExperimentResult {
    pub fn cell(&self, method: SimMethod, d: usize) -> Option<&CellResult> {
        self.cells.iter().find(|c| c.method == method && c.d == d)
    }
}

/// Substream for replication `rep` of the cell at dimension `d`.
pub fn stream_id(d: usize, rep: usize) -> u64 {
    ((d as u64) << 32) | rep as u64
}

/// Applies `f` to `reps` independent draws of `n` rows from `model`, in
/// replication order, on the current rayon pool.
pub fn replicate<T, F>(model: &ModelSpec, n: usize, reps: usize, seed: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&DataMatrix) -> T + Sync,
{
    model.validate()?;
    (0..reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = RngStream::new(seed, stream_id(model.d, rep));
            let data = sample(model, n, &mut rng)?;
            Ok(f(&data))
        })
        .collect()
}

fn apply(
    method: SimMethod,
    data: &DataMatrix,
    mu0: &[f64],
    ones: &[f64],
    spec: &ExperimentSpec,
) -> bool {
    let out = match method {
        SimMethod::Nelm => nelm_test(data, mu0, spec.level, ones),
        SimMethod::Oelm => oelm_test(data, mu0, spec.level, spec.oelm_calibration),
        SimMethod::Hotelling => hotelling_test(data, mu0, spec.level),
        SimMethod::Bs => bs_test(data, mu0, spec.level),
    };
    // a replication the method cannot evaluate counts as a non-rejection
    out.map(|t| t.reject).unwrap_or(false)
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    spec.validate()?;
    let mut cells = Vec::new();
    for &d in &spec.d_grid {
        let model = spec.model_at(d);
        let mu0 = model.mu_base.clone();
        let ones = vec![1.0; d];
        let methods = spec.methods.for_dimension(d);
        let active: Vec<SimMethod> = methods
            .iter()
            .copied()
            .filter(|m| !m.infeasible(spec.n, d))
            .collect();

        let zero = || vec![(0u64, 0u128); active.len()];
        let tallies = (0..spec.reps)
            .into_par_iter()
            .map(|rep| -> Result<Vec<(u64, u128)>> {
                let mut rng = RngStream::new(spec.seed, stream_id(d, rep));
                let data = sample(&model, spec.n, &mut rng)?;
                Ok(active
                    .iter()
                    .map(|&m| {
                        let start = Instant::now();
                        let reject = apply(m, &data, &mu0, &ones, spec);
                        (reject as u64, start.elapsed().as_nanos())
                    })
                    .collect())
            })
            .try_reduce(zero, |mut acc, x| {
                for (a, b) in acc.iter_mut().zip(x) {
                    a.0 += b.0;
                    a.1 += b.1;
                }
                Ok(acc)
            })?;

        for m in methods {
            let cell = match active.iter().position(|&a| a == m) {
                Some(k) => CellResult {
                    method: m,
                    d,
                    reject_count: tallies[k].0,
                    reps: spec.reps,
                    skipped: false,
                    wall_ms: (tallies[k].1 / 1_000_000) as u64,
                },
                None => CellResult {
                    method: m,
                    d,
                    reject_count: 0,
                    reps: spec.reps,
                    skipped: true,
                    wall_ms: 0,
                },
            };
            cells.push(cell);
        }
    }
    Ok(ExperimentResult {
        spec: spec.clone(),
        cells,
    })
}

/// Runs on a dedicated pool of `threads` workers (0: rayon's default).
pub fn run_experiment_with_threads(
    spec: &ExperimentSpec,
    threads: usize,
) -> Result<ExperimentResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Spec(format!("thread pool: {e}")))?;
    pool.install(|| run_experiment(spec))
}

pub fn model_token(kind: ModelKind) -> &'static str {
    match kind {
        ModelKind::Model1 => "1",
        ModelKind::Model2 => "2",
        ModelKind::ModelB => "b",
    }
}

pub fn innovation_token(innovation: Innovation) -> &'static str {
    match innovation {
        Innovation::StdNormal => "normal",
        Innovation::T6 => "t6",
    }
}

/// One row per (method, d). Timing is written as 0 unless `timing` is set,
/// so that repeated runs produce identical files.
pub fn write_results<W: Write>(mut out: W, result: &ExperimentResult, timing: bool) -> Result<()> {
    let s = &result.spec;
    writeln!(out, "{CSV_HEADER}")?;
    let na = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |x| x.to_string());
    for c in &result.cells {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            c.method.label(),
            model_token(s.model.kind),
            innovation_token(s.model.innovation),
            s.n,
            c.d,
            s.delta,
            s.level,
            s.reps,
            s.seed,
            if c.skipped {
                "NA".to_string()
            } else {
                c.reject_count.to_string()
            },
            na(c.reject_rate()),
            na(c.mc_se()),
            c.skipped,
            if timing { c.wall_ms } else { 0 },
        )?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerRow {
    pub d: usize,
    pub tau: f64,
    pub power_nelm: f64,
    pub power_bs: f64,
}

/// Asymptotic powers on the true covariance with direction `1_d`.
pub fn predicted_power_table(
    model: &ModelSpec,
    n: usize,
    d_grid: &[usize],
    delta: f64,
    level: f64,
) -> Result<Vec<PowerRow>> {
    if model.kind == ModelKind::ModelB && model.gamma.is_none() {
        return Err(CliError::Spec(
            "ModelB needs a loading matrix for its covariance".into(),
        ));
    }
    d_grid
        .iter()
        .map(|&d| {
            if let (ModelKind::ModelB, Some(g)) = (model.kind, &model.gamma) {
                if g.nrows() != d {
                    return Err(CliError::Spec(format!(
                        "the loading matrix fixes d = {}",
                        g.nrows()
                    )));
                }
            }
            let mut m = model.with_dimension(d);
            m.n = n;
            m.delta = delta;
            let sigma = cov_summary(&m.sigma()?)?;
            let spec = PowerSpec::new(sigma, vec![m.drift(); d], n, vec![1.0; d], level)?;
            let tau = noncentrality_tau(&spec)?;
            Ok(PowerRow {
                d,
                tau,
                power_nelm: power_from_tau(tau, level)?,
                power_bs: power_bs(&spec)?,
            })
        })
        .collect()
}

pub fn write_power_table<W: Write>(mut out: W, rows: &[PowerRow]) -> Result<()> {
    writeln!(out, "{POWER_HEADER}")?;
    for r in rows {
        writeln!(out, "{},{},{},{}", r.d, r.tau, r.power_nelm, r.power_bs)?;
    }
    out.flush()?;
    Ok(())
}
