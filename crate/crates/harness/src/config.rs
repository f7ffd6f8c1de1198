//! Experiment configuration files (TOML).

use std::path::{Path, PathBuf};

use amfw_core::amfw::{BoundaryCorrection, Tableau};
use amfw_core::catalog;
use amfw_core::convergence::{DtRule, Estimator};
use amfw_core::problem::PdeProblem;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub method: String,
    pub correction: CorrectionKind,
    pub estimator: EstimatorKind,
    #[serde(default = "default_norms")]
    pub norms: Vec<NormKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    pub problem: ProblemConfig,
    pub grid: GridConfig,
    pub dt: DtConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
}

/// Grid sequence, coarse to fine, given by exactly one of the three lists.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Inverse mesh widths `1/h`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_inv: Option<Vec<usize>>,
    /// Mesh widths.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<Vec<f64>>,
    /// Interior nodes per direction, `1/h - 1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DtConfig {
    // a struct variant so that stray keys are rejected
    EqualToH {},
    KappaH { kappa: f64 },
    KappaH53 { kappa: f64 },
    Fixed { values: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorrectionKind {
    None,
    Interpolant,
    Extension,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    Simultaneous,
    Spatial,
    TemporalFixedH,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormKind {
    L2,
    Max,
}

fn default_norms() -> Vec<NormKind> {
    vec![NormKind::L2, NormKind::Max]
}

impl CorrectionKind {
    pub fn core(self) -> BoundaryCorrection {
        match self {
            CorrectionKind::None => BoundaryCorrection::None,
            CorrectionKind::Interpolant => BoundaryCorrection::Interpolant,
            CorrectionKind::Extension => BoundaryCorrection::OperatorExtension,
        }
    }
}

impl EstimatorKind {
    pub fn core(self) -> Estimator {
        match self {
            EstimatorKind::Simultaneous => Estimator::Simultaneous,
            EstimatorKind::Spatial => Estimator::Spatial,
            EstimatorKind::TemporalFixedH => Estimator::TemporalFixedH,
        }
    }
}

impl DtConfig {
    pub fn core(&self) -> DtRule {
        match self {
            DtConfig::EqualToH {} => DtRule::EqualToH,
            DtConfig::KappaH { kappa } => DtRule::KappaH(*kappa),
            DtConfig::KappaH53 { kappa } => DtRule::KappaH53(*kappa),
            DtConfig::Fixed { values } => DtRule::Fixed(values.clone()),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            DtConfig::EqualToH {} => "equal-to-h".into(),
            DtConfig::KappaH { kappa } => format!("kappa-h (kappa={kappa})"),
            DtConfig::KappaH53 { kappa } => format!("kappa-h53 (kappa={kappa})"),
            DtConfig::Fixed { values } => format!("fixed {values:?}"),
        }
    }
}

fn config_err(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

impl GridConfig {
    pub fn from_h_inv(h_inv: Vec<usize>) -> Self {
        Self {
            h_inv: Some(h_inv),
            ..Self::default()
        }
    }

    /// Inverse mesh widths, validated.
    pub fn h_inv(&self) -> Result<Vec<usize>> {
        let given = [self.h_inv.is_some(), self.h.is_some(), self.n.is_some()];
        if given.iter().filter(|g| **g).count() != 1 {
            return Err(config_err("grid needs exactly one of `h_inv`, `h` or `n`"));
        }
        let m: Vec<usize> = if let Some(v) = &self.h_inv {
            v.clone()
        } else if let Some(v) = &self.n {
            v.iter().map(|n| n + 1).collect()
        } else {
            let mut out = Vec::new();
            for &h in self.h.as_deref().unwrap_or_default() {
                if !(h > 0.0 && h < 1.0) {
                    return Err(config_err(format!("mesh width {h} is not in (0, 1)")));
                }
                let m = (1.0 / h).round();
                if ((1.0 / h) - m).abs() > 1e-9 * m {
                    return Err(config_err(format!("mesh width {h} is not 1/m for an integer m")));
                }
                out.push(m as usize);
            }
            out
        };
        if m.is_empty() {
            return Err(config_err("grid sequence is empty"));
        }
        if let Some(bad) = m.iter().find(|&&m| m < 4) {
            return Err(config_err(format!("1/h = {bad} leaves fewer than 3 interior nodes")));
        }
        if m.windows(2).any(|w| w[1] <= w[0]) {
            return Err(config_err("grid sequence must be strictly refining"));
        }
        Ok(m)
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration always serializes")
    }

    pub fn tableau(&self) -> Result<Tableau> {
        Tableau::by_name(&self.method).ok_or_else(|| {
            config_err(format!("unknown method `{}` (known: {})", self.method, Tableau::NAMES.join(", ")))
        })
    }

    pub fn build_problem(&self) -> Result<Box<dyn PdeProblem + Send>> {
        let c = self.problem.c.unwrap_or(0.0);
        catalog::by_id(&self.problem.id, c).ok_or_else(|| {
            config_err(format!(
                "unknown problem `{}` (known: {})",
                self.problem.id,
                catalog::PROBLEM_IDS.join(", ")
            ))
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.tableau()?;
        let pb = self.build_problem()?;
        if self.problem.c.is_some() && !pb.name().starts_with("problem1") {
            return Err(config_err("parameter `c` only applies to problem1"));
        }
        if let Some(c) = self.problem.c {
            if !c.is_finite() {
                return Err(config_err("parameter `c` must be finite"));
            }
        }
        let levels = self.grid.h_inv()?.len();
        match &self.dt {
            DtConfig::KappaH { kappa } | DtConfig::KappaH53 { kappa } if !(*kappa > 0.0 && kappa.is_finite()) => {
                return Err(config_err(format!("kappa must be positive, got {kappa}")));
            }
            DtConfig::Fixed { values } => {
                if values.len() != levels {
                    return Err(config_err(format!(
                        "fixed time steps: {} values for {levels} grid levels",
                        values.len()
                    )));
                }
                if values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                    return Err(config_err("fixed time steps must be positive"));
                }
            }
            _ => {}
        }
        if self.estimator == EstimatorKind::Spatial && !matches!(self.dt, DtConfig::KappaH53 { .. }) {
            return Err(config_err("the spatial estimator needs the `kappa-h53` time-step rule"));
        }
        if self.norms.is_empty() {
            return Err(config_err("at least one norm is required"));
        }
        if self.threads == Some(0) {
            return Err(config_err("threads must be at least 1"));
        }
        Ok(())
    }

    pub fn kappa(&self) -> f64 {
        match self.dt {
            DtConfig::KappaH { kappa } | DtConfig::KappaH53 { kappa } => kappa,
            _ => 1.0,
        }
    }

    pub fn wants(&self, norm: NormKind) -> bool {
        self.norms.contains(&norm)
    }
}
