//! Running one configured experiment.

use std::time::Instant;

use amfw_core::convergence::{DtRule, ErrorReport, Study};

use crate::config::{DtConfig, EstimatorKind, ExperimentConfig};
use crate::error::{HarnessError, Result};

pub const DEFAULT_MEMORY_CAP: u64 = 16 << 30;

/// Finest 3D grid run by default (`h >= 1/64`).
pub const DESK_MAX_H_INV_3D: usize = 64;

pub const ENV_MEMORY_CAP: &str = "AMFW_MEMORY_CAP";
pub const ENV_THREADS: &str = "AMFW_THREADS";

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    /// Run 3D levels finer than the desk-scale cap.
    pub full: bool,
    pub memory_cap: u64,
    /// Overrides the thread count of the configuration.
    pub threads: Option<usize>,
    pub timing: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            full: false,
            memory_cap: DEFAULT_MEMORY_CAP,
            threads: None,
            timing: false,
        }
    }
}

/// Parses a byte count with an optional binary suffix (`k`, `m`, `g`, `t`,
/// optionally followed by `ib` or `b`).
pub fn parse_bytes(text: &str) -> Result<u64> {
    let t = text.trim().to_ascii_lowercase();
    let t = t.strip_suffix("ib").or_else(|| t.strip_suffix('b')).unwrap_or(&t);
    let (digits, shift) = match t.chars().last() {
        Some('k') => (&t[..t.len() - 1], 10),
        Some('m') => (&t[..t.len() - 1], 20),
        Some('g') => (&t[..t.len() - 1], 30),
        Some('t') => (&t[..t.len() - 1], 40),
        _ => (t, 0),
    };
    let value: u64 = digits
        .trim()
        .parse()
        .map_err(|_| HarnessError::Config(format!("cannot parse byte count `{text}`")))?;
    value
        .checked_mul(1u64 << shift)
        .ok_or_else(|| HarnessError::Config(format!("byte count `{text}` overflows")))
}

impl RunOptions {
    /// Defaults with the environment overrides applied.
    pub fn from_env() -> Result<Self> {
        let mut opts = Self::default();
        if let Ok(v) = std::env::var(ENV_MEMORY_CAP) {
            opts.memory_cap = parse_bytes(&v)?;
        }
        if let Ok(v) = std::env::var(ENV_THREADS) {
            let n: usize = v
                .trim()
                .parse()
                .map_err(|_| HarnessError::Config(format!("{ENV_THREADS}=`{v}` is not a thread count")))?;
            if n == 0 {
                return Err(HarnessError::Config(format!("{ENV_THREADS} must be at least 1")));
            }
            opts.threads = Some(n);
        }
        Ok(opts)
    }
}

/// Bytes needed by one integration on a `1/h_inv` grid in `dim` directions.
pub fn run_memory(dim: usize, h_inv: usize, stages: usize) -> u64 {
    let points = (h_inv as u64 + 1).pow(dim as u32);
    let working_sets = 3 * stages as u64 + 9 * dim as u64 + 8;
    points * 8 * working_sets
}

#[derive(Debug, Clone, PartialEq)]
pub struct Skipped {
    pub h_inv: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: ErrorReport,
    pub skipped: Vec<Skipped>,
    pub runtime: Option<f64>,
    pub threads: usize,
}

fn runs_per_level(estimator: EstimatorKind) -> usize {
    match estimator {
        EstimatorKind::TemporalFixedH => 3,
        _ => 1,
    }
}

pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Outcome> {
    cfg.validate()?;
    let problem = cfg.build_problem()?;
    let tableau = cfg.tableau()?;
    let dim = problem.dim();
    let all = cfg.grid.h_inv()?;

    let mut kept = Vec::new();
    let mut skipped = Vec::new();
    for (level, &m) in all.iter().enumerate() {
        if dim >= 3 && m > DESK_MAX_H_INV_3D && !opts.full {
            skipped.push(Skipped {
                h_inv: m,
                reason: format!("3D desk-scale cap h >= 1/{DESK_MAX_H_INV_3D}; pass --full to run"),
            });
        } else {
            kept.push((level, m));
        }
    }

    let threads = opts
        .threads
        .or(cfg.threads)
        .unwrap_or_else(rayon::current_num_threads)
        .max(1);
    let mut jobs: Vec<u64> = kept
        .iter()
        .flat_map(|&(_, m)| std::iter::repeat(run_memory(dim, m, tableau.stages())).take(runs_per_level(cfg.estimator)))
        .collect();
    jobs.sort_unstable_by(|a, b| b.cmp(a));
    let needed: u64 = jobs.iter().take(threads).sum();
    if needed > opts.memory_cap {
        return Err(HarnessError::MemoryCap {
            needed,
            cap: opts.memory_cap,
        });
    }

    let dt_rule = match &cfg.dt {
        DtConfig::Fixed { values } => DtRule::Fixed(kept.iter().map(|&(level, _)| values[level]).collect()),
        other => other.core(),
    };
    let study = Study {
        problem: problem.as_ref(),
        tableau,
        correction: cfg.correction.core(),
        h_inv: kept.iter().map(|&(_, m)| m).collect(),
        dt_rule,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;
    let start = Instant::now();
    let report = if study.h_inv.is_empty() {
        ErrorReport {
            problem: problem.name(),
            method: study.tableau.name().into(),
            correction: study.correction,
            estimator: cfg.estimator.core(),
            rows: Vec::new(),
            notes: Vec::new(),
        }
    } else {
        pool.install(|| study.run_estimator(cfg.estimator.core(), cfg.kappa()))?
    };
    let runtime = opts.timing.then(|| start.elapsed().as_secs_f64());
    Ok(Outcome {
        report,
        skipped,
        runtime,
        threads,
    })
}
