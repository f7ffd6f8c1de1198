//! Global errors over grid sequences and observed convergence orders.

use rayon::prelude::*;

use crate::amfw::{integrate, BoundaryCorrection, Solution, Tableau};
use crate::error::{AmfwError, Result};
use crate::grid::{Grid, GridField};
use crate::norms::{global_error, max_norm, weighted_l2_norm};
use crate::problem::PdeProblem;
use crate::space::{SplitMode, SplitSystem};

/// `log2(coarse / fine)`.
pub fn estimate_order(coarse: f64, fine: f64) -> Result<f64> {
    if !(coarse > 0.0 && fine > 0.0 && coarse.is_finite() && fine.is_finite()) {
        return Err(AmfwError::NonPositiveError { coarse, fine });
    }
    Ok((coarse / fine).log2())
}

/// Time step as a function of the mesh width.
#[derive(Debug, Clone, PartialEq)]
pub enum DtRule {
    EqualToH,
    KappaH(f64),
    KappaH53(f64),
    /// One value per grid level.
    Fixed(Vec<f64>),
}

impl DtRule {
    /// Nominal step at level `level` with mesh width `h`.
    pub fn nominal(&self, h: f64, level: usize) -> Result<f64> {
        Ok(match self {
            DtRule::EqualToH => h,
            DtRule::KappaH(k) => k * h,
            DtRule::KappaH53(k) => k * h.powf(5.0 / 3.0),
            DtRule::Fixed(v) => *v.get(level).ok_or_else(|| {
                AmfwError::Sizing(format!("no time step given for grid level {level}"))
            })?,
        })
    }
}

/// Shrinks `dt` to `t_end / ceil(t_end / dt)` so the last step lands on `t_end`.
/// Returns the adjusted step and `adjusted / dt`.
pub fn adjust_step(t_end: f64, dt: f64) -> (f64, f64) {
    let steps = (t_end / dt - 1e-9).ceil().max(1.0);
    let adjusted = t_end / steps;
    (adjusted, adjusted / dt)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimator {
    /// `h` and `Δt` refined together against the exact solution.
    Simultaneous,
    /// `Δt = κ h^{5/3}` so the temporal error stays below the spatial one.
    Spatial,
    /// Fixed grid, `Δt ∈ {2Δt_0, Δt_0, Δt_0/2}`, differences of solutions.
    TemporalFixedH,
}

impl Estimator {
    pub fn name(&self) -> &'static str {
        match self {
            Estimator::Simultaneous => "simultaneous",
            Estimator::Spatial => "spatial",
            Estimator::TemporalFixedH => "temporal-fixed-h",
        }
    }

    pub fn by_name(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "simultaneous" => Some(Self::Simultaneous),
            "spatial" => Some(Self::Spatial),
            "temporal-fixed-h" | "temporal" | "fixed-h" => Some(Self::TemporalFixedH),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRow {
    pub h: f64,
    pub dt: f64,
    pub ge_l2: f64,
    pub ge_max: f64,
    /// `None` on the first row; `Some(NaN)` when the order is undefined.
    pub p_l2: Option<f64>,
    pub p_max: Option<f64>,
    /// Ratio of the step used to the nominal step of the rule.
    pub dt_factor: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub problem: String,
    pub method: String,
    pub correction: BoundaryCorrection,
    pub estimator: Estimator,
    pub rows: Vec<ErrorRow>,
    pub notes: Vec<String>,
}

impl ErrorReport {
    pub fn row_for(&self, h_inv: usize) -> Option<&ErrorRow> {
        self.rows
            .iter()
            .find(|r| (1.0 / r.h - h_inv as f64).abs() < 1e-6)
    }
}

/// Grid `h = 1/m` in every direction.
pub fn grid_counts(dim: usize, h_inv: usize) -> Result<Vec<usize>> {
    Grid::uniform(dim, h_inv, false)?;
    Ok(vec![h_inv - 1; dim])
}

/// A sequence of runs of one method on one problem.
pub struct Study<'a> {
    pub problem: &'a dyn PdeProblem,
    pub tableau: Tableau,
    pub correction: BoundaryCorrection,
    /// Inverse mesh widths, coarse to fine.
    pub h_inv: Vec<usize>,
    pub dt_rule: DtRule,
}

struct Run {
    h: f64,
    dt: f64,
    factor: f64,
    sol: Solution,
}

impl<'a> Study<'a> {
    fn run(&self, h_inv: usize, dt_nominal: f64) -> Result<Run> {
        let t_end = self.problem.t_end();
        let (dt, factor) = adjust_step(t_end, dt_nominal);
        let n = grid_counts(self.problem.dim(), h_inv)?;
        let sol = integrate(self.problem, &n, &self.tableau, self.correction, dt, t_end)?;
        Ok(Run {
            h: 1.0 / h_inv as f64,
            dt,
            factor,
            sol,
        })
    }

    fn report(&self, estimator: Estimator, rows: Vec<ErrorRow>, notes: Vec<String>) -> ErrorReport {
        ErrorReport {
            problem: self.problem.name(),
            method: self.tableau.name().into(),
            correction: self.correction,
            estimator,
            rows,
            notes,
        }
    }

    fn nominal_steps(&self) -> Result<Vec<(usize, f64)>> {
        self.h_inv
            .iter()
            .enumerate()
            .map(|(level, &m)| Ok((m, self.dt_rule.nominal(1.0 / m as f64, level)?)))
            .collect()
    }

    fn error_rows(&self, runs: &[Run]) -> Result<Vec<ErrorRow>> {
        let t_end = self.problem.t_end();
        let mut rows: Vec<ErrorRow> = Vec::with_capacity(runs.len());
        for r in runs {
            let (ge_l2, ge_max) = global_error(self.problem, &r.sol.field, t_end)?;
            let (p_l2, p_max) = match rows.last() {
                Some(prev) => (
                    Some(estimate_order(prev.ge_l2, ge_l2).unwrap_or(f64::NAN)),
                    Some(estimate_order(prev.ge_max, ge_max).unwrap_or(f64::NAN)),
                ),
                None => (None, None),
            };
            rows.push(ErrorRow {
                h: r.h,
                dt: r.dt,
                ge_l2,
                ge_max,
                p_l2,
                p_max,
                dt_factor: r.factor,
                steps: r.sol.steps,
            });
        }
        Ok(rows)
    }

    /// `h` and `Δt` refined together; orders from consecutive rows.
    pub fn simultaneous(&self) -> Result<ErrorReport> {
        let runs = self
            .nominal_steps()?
            .into_par_iter()
            .map(|(m, dt)| self.run(m, dt))
            .collect::<Result<Vec<_>>>()?;
        let rows = self.error_rows(&runs)?;
        Ok(self.report(Estimator::Simultaneous, rows, Vec::new()))
    }

    /// Spatial orders with `Δt = κ h^{5/3}` (the rule of the study is
    /// replaced). If the exact solution solves the semidiscrete system, the
    /// spatial error vanishes and orders are reported as `NaN`.
    pub fn spatial(&self, kappa: f64) -> Result<ErrorReport> {
        let rule = DtRule::KappaH53(kappa);
        let steps = self
            .h_inv
            .iter()
            .enumerate()
            .map(|(level, &m)| Ok((m, rule.nominal(1.0 / m as f64, level)?)))
            .collect::<Result<Vec<_>>>()?;
        let runs = steps
            .into_par_iter()
            .map(|(m, dt)| self.run(m, dt))
            .collect::<Result<Vec<_>>>()?;
        let mut rows = self.error_rows(&runs)?;
        let mut notes = Vec::new();
        let coarsest = *self.h_inv.first().ok_or_else(|| AmfwError::Sizing("empty grid sequence".into()))?;
        if semidiscrete_residual(self.problem, coarsest, self.correction)? == 0.0 {
            notes.push("exact solution solves the semidiscrete system: spatial order undefined".into());
            for r in rows.iter_mut().skip(1) {
                r.p_l2 = Some(f64::NAN);
                r.p_max = Some(f64::NAN);
            }
        }
        let adjusted: Vec<String> = rows
            .iter()
            .filter(|r| r.dt_factor != 1.0)
            .map(|r| format!("h=1/{:.0}: dt factor {:.12}", 1.0 / r.h, r.dt_factor))
            .collect();
        if !adjusted.is_empty() {
            notes.push(format!("step adjusted to hit t_end ({})", adjusted.join(", ")));
        }
        Ok(self.report(Estimator::Spatial, rows, notes))
    }

    /// Fixed-grid temporal orders from `ε(Δt) = V(2Δt) - V(Δt)`:
    /// `p = log2(‖ε(Δt_0)‖ / ‖ε(Δt_0/2)‖)`. The error columns hold the global
    /// error of the `Δt_0` run when an exact solution exists and `‖ε(Δt_0)‖`
    /// otherwise.
    pub fn temporal_fixed_h(&self) -> Result<ErrorReport> {
        let jobs: Vec<(usize, f64)> = self
            .nominal_steps()?
            .into_iter()
            .flat_map(|(m, dt)| [(m, 2.0 * dt), (m, dt), (m, 0.5 * dt)])
            .collect();
        let runs = jobs
            .into_par_iter()
            .map(|(m, dt)| self.run(m, dt))
            .collect::<Result<Vec<_>>>()?;
        let t_end = self.problem.t_end();
        let has_exact = self.problem.has_exact();
        let mut rows = Vec::new();
        for triple in runs.chunks(3) {
            let [coarse, mid, fine] = triple else {
                unreachable!("runs come in triples")
            };
            let e1 = coarse.sol.field.sub(&mid.sol.field);
            let e2 = mid.sol.field.sub(&fine.sol.field);
            let (n1, m1) = (weighted_l2_norm(&e1), max_norm(&e1));
            let (n2, m2) = (weighted_l2_norm(&e2), max_norm(&e2));
            let (ge_l2, ge_max) = if has_exact {
                global_error(self.problem, &mid.sol.field, t_end)?
            } else {
                (n1, m1)
            };
            rows.push(ErrorRow {
                h: mid.h,
                dt: mid.dt,
                ge_l2,
                ge_max,
                p_l2: Some(estimate_order(n1, n2).unwrap_or(f64::NAN)),
                p_max: Some(estimate_order(m1, m2).unwrap_or(f64::NAN)),
                dt_factor: mid.factor,
                steps: mid.sol.steps,
            });
        }
        Ok(self.report(Estimator::TemporalFixedH, rows, Vec::new()))
    }

    pub fn run_estimator(&self, estimator: Estimator, kappa: f64) -> Result<ErrorReport> {
        match estimator {
            Estimator::Simultaneous => self.simultaneous(),
            Estimator::Spatial => self.spatial(kappa),
            Estimator::TemporalFixedH => self.temporal_fixed_h(),
        }
    }
}

/// `max |u_t - F(t, u)|` over interior points at `t ∈ {0, t_end/2, t_end}`,
/// relative to `max |u_t|`, with values below `1e-11` reported as zero.
/// Needs the exact solution and its time derivative.
pub fn semidiscrete_residual(
    problem: &dyn PdeProblem,
    h_inv: usize,
    correction: BoundaryCorrection,
) -> Result<f64> {
    let n = grid_counts(problem.dim(), h_inv)?;
    let (grid, mode) = match correction {
        BoundaryCorrection::OperatorExtension => (Grid::closed(&n)?, SplitMode::Extended),
        _ => (Grid::interior(&n)?, SplitMode::Plain),
    };
    let sys = SplitSystem::new(problem, grid, mode)?;
    let d = grid.dim();
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for t in [0.0, 0.5 * problem.t_end(), problem.t_end()] {
        let mut u = Vec::with_capacity(grid.len());
        let mut ut = Vec::with_capacity(grid.len());
        for (_, _, x) in grid.points() {
            u.push(problem.exact(&x[..d], t).ok_or(AmfwError::MissingExactSolution)?);
            ut.push(problem.exact_dt(&x[..d], t).ok_or(AmfwError::MissingExactSolution)?);
        }
        let mut f = vec![0.0; grid.len()];
        sys.rhs(t, &u, &mut f)?;
        let res = GridField::from_vec(grid, f.iter().zip(&ut).map(|(a, b)| a - b).collect())?;
        worst = worst.max(max_norm(&res));
        scale = scale.max(max_norm(&GridField::from_vec(grid, ut)?));
    }
    let rel = worst / scale.max(f64::MIN_POSITIVE);
    Ok(if rel < 1e-11 { 0.0 } else { rel })
}
