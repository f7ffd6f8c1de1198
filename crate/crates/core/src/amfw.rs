//! AMF-W time stepping.
//!
//! One step of an `s`-stage method `(A, L, b, θ)` on `V' = F_0 + ... + F_d`:
//!
//! ```text
//! K_i^(-1) = Δt F(t_n + c_i Δt, V_n + sum_j a_ij K_j) + sum_j l_ij K_j
//! (I - θ Δt D_j) K_i^(j) = K_i^(j-1) + θ ρ_i Δt² Ḟ_j,   j = 0, .., d
//! K_i = K_i^(d),   V_{n+1} = V_n + sum_i b_i K_i
//! ```
//!
//! with `ρ = (I - L)^{-1} 1` and `c = A ρ`. `D_j` and `Ḟ_j` are frozen at
//! `(t_n, V_n)`.

use std::sync::{Arc, Mutex};

use nalgebra::{DMatrix, DVector};

use crate::boundary::HomogenizedProblem;
use crate::error::{AmfwError, Result};
use crate::grid::{Grid, GridField};
use crate::problem::PdeProblem;
use crate::space::{DirectionFactors, SplitMode, SplitSystem, TermJacobian};

#[derive(Debug, Clone, PartialEq)]
pub struct Tableau {
    name: String,
    a: Vec<Vec<f64>>,
    l: Vec<Vec<f64>>,
    b: Vec<f64>,
    theta: f64,
    rho: Vec<f64>,
    c: Vec<f64>,
}

/// `ρ = (I - L)^{-1} 1` by forward substitution and `c = A ρ`.
pub fn derived_coefficients(a: &[Vec<f64>], l: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let s = a.len();
    let mut rho = vec![0.0; s];
    for i in 0..s {
        rho[i] = 1.0 + (0..i).map(|j| l[i][j] * rho[j]).sum::<f64>();
    }
    let c = (0..s)
        .map(|i| (0..i).map(|j| a[i][j] * rho[j]).sum())
        .collect();
    (rho, c)
}

impl Tableau {
    pub fn new(name: &str, a: Vec<Vec<f64>>, l: Vec<Vec<f64>>, b: Vec<f64>, theta: f64) -> Result<Self> {
        let s = b.len();
        if s == 0 {
            return Err(AmfwError::InvalidTableau("no stages".into()));
        }
        for (m, label) in [(&a, "A"), (&l, "L")] {
            if m.len() != s || m.iter().any(|r| r.len() != s) {
                return Err(AmfwError::InvalidTableau(format!("{label} is not {s}x{s}")));
            }
            for (i, row) in m.iter().enumerate() {
                if row[i..].iter().any(|&v| v != 0.0) {
                    return Err(AmfwError::InvalidTableau(format!(
                        "{label} is not strictly lower triangular"
                    )));
                }
            }
        }
        if !theta.is_finite() || theta <= 0.0 {
            return Err(AmfwError::InvalidTableau(format!("theta = {theta}")));
        }
        let (rho, c) = derived_coefficients(&a, &l);
        Ok(Self {
            name: name.into(),
            a,
            l,
            b,
            theta,
            rho,
            c,
        })
    }

    /// Two-stage method with `θ = (3 + √3)/6`.
    pub fn amfw_hv() -> Self {
        Self::new(
            "AMFW-HV",
            vec![vec![0.0, 0.0], vec![2.0 / 3.0, 0.0]],
            vec![vec![0.0, 0.0], vec![-4.0 / 3.0, 0.0]],
            vec![5.0 / 4.0, 3.0 / 4.0],
            (3.0 + 3f64.sqrt()) / 6.0,
        )
        .expect("valid literal tableau")
    }

    /// Four-stage method with `θ = 1/2` that reduces to the classical 3/8
    /// Runge-Kutta rule for `W = 0`. Order 4 as a Rosenbrock method and order 3
    /// as a W-method.
    pub fn amfw_three_eighths() -> Self {
        Self::new(
            "AMFW-3/8",
            vec![
                vec![0.0, 0.0, 0.0, 0.0],
                vec![1.0 / 3.0, 0.0, 0.0, 0.0],
                vec![1.0, 1.0, 0.0, 0.0],
                vec![4.0 / 3.0, 0.0, 1.0, 0.0],
            ],
            vec![
                vec![0.0, 0.0, 0.0, 0.0],
                vec![-4.0 / 3.0, 0.0, 0.0, 0.0],
                vec![-5.0 / 3.0, -1.0, 0.0, 0.0],
                vec![-3.0, -3.0, -6.0, 0.0],
            ],
            vec![13.0 / 8.0, 9.0 / 8.0, 9.0 / 8.0, 1.0 / 8.0],
            0.5,
        )
        .expect("valid literal tableau")
    }

    /// The published 3/8 coefficient set taken literally. It is only first
    /// order in this stage formulation; kept for comparison runs.
    pub fn amfw_three_eighths_printed() -> Self {
        Self::new(
            "AMFW-3/8-printed",
            vec![
                vec![0.0, 0.0, 0.0, 0.0],
                vec![4.0 / 9.0, 0.0, 0.0, 0.0],
                vec![-1.0 / 3.0, 1.0, 0.0, 0.0],
                vec![-1.0, -3.0, 6.0, 0.0],
            ],
            vec![
                vec![0.0, 0.0, 0.0, 0.0],
                vec![-4.0 / 3.0, 0.0, 0.0, 0.0],
                vec![-1.0, -1.0, 0.0, 0.0],
                vec![1.0, -3.0, -6.0, 0.0],
            ],
            vec![7.0 / 8.0, 9.0 / 8.0, 9.0 / 8.0, 1.0 / 8.0],
            0.5,
        )
        .expect("valid literal tableau")
    }

    /// Registry lookup: `hv`, `amfw-hv`, `3/8`, `amfw-3/8`, `three-eighths`, `3/8-printed`.
    pub fn by_name(name: &str) -> Option<Self> {
        match name.trim().to_ascii_lowercase().as_str() {
            "hv" | "amfw-hv" | "amfw_hv" => Some(Self::amfw_hv()),
            "3/8" | "amfw-3/8" | "amfw-38" | "amfw_38" | "three-eighths" | "38" => {
                Some(Self::amfw_three_eighths())
            }
            "3/8-printed" | "amfw-3/8-printed" => Some(Self::amfw_three_eighths_printed()),
            _ => None,
        }
    }

    pub const NAMES: [&'static str; 3] = ["AMFW-HV", "AMFW-3/8", "AMFW-3/8-printed"];

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }

    pub fn a(&self) -> &[Vec<f64>] {
        &self.a
    }

    pub fn l(&self) -> &[Vec<f64>] {
        &self.l
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    /// Copy with the weights replaced; derived coefficients are kept.
    pub fn with_weights(&self, b: Vec<f64>) -> Result<Self> {
        Self::new(&self.name, self.a.clone(), self.l.clone(), b, self.theta)
    }
}

/// Split ODE `V' = F_0(t, V) + ... + F_{m-1}(t, V)` as seen by the stepper.
pub trait SplitOde: Sync {
    type Step: StepContext;

    fn len(&self) -> usize;

    /// Number of split terms, solved in order `0, 1, ..`.
    fn terms(&self) -> usize;

    /// Full right-hand side `F(t, v)` into `out`.
    fn rhs(&self, t: f64, v: &[f64], out: &mut [f64]) -> Result<()>;

    /// Freezes the Jacobians and time derivatives at `(t, v)` and prepares
    /// the solves with `I - theta_dt D_j`.
    fn freeze(&self, t: f64, v: &[f64], theta_dt: f64) -> Result<Self::Step>;

    /// Hook run on `V_{n+1}` at `t_{n+1}`.
    fn finish_step(&self, _t: f64, _v: &mut [f64]) {}
}

pub trait StepContext {
    /// `Ḟ_term`, or `None` when it vanishes.
    fn fdot(&self, term: usize) -> Option<&[f64]>;

    /// Overwrites `rhs` with `(I - θΔt D_term)^{-1} rhs`.
    fn solve(&self, term: usize, rhs: &mut [f64]) -> Result<()>;
}

/// One AMF-W step from `(t, v)` with step `dt`.
pub fn amfw_step<O: SplitOde>(ode: &O, tab: &Tableau, t: f64, v: &[f64], dt: f64) -> Result<Vec<f64>> {
    let n = ode.len();
    if v.len() != n {
        return Err(AmfwError::DimensionMismatch { expected: n, got: v.len() });
    }
    let s = tab.stages();
    let theta = tab.theta();
    let ctx = ode.freeze(t, v, theta * dt)?;
    let mut ks: Vec<Vec<f64>> = Vec::with_capacity(s);
    let mut arg = vec![0.0; n];
    let mut k = vec![0.0; n];
    for i in 0..s {
        arg.copy_from_slice(v);
        for (j, kj) in ks.iter().enumerate() {
            let aij = tab.a[i][j];
            if aij != 0.0 {
                arg.iter_mut().zip(kj).for_each(|(x, y)| *x += aij * y);
            }
        }
        ode.rhs(t + tab.c[i] * dt, &arg, &mut k)?;
        k.iter_mut().for_each(|x| *x *= dt);
        for (j, kj) in ks.iter().enumerate() {
            let lij = tab.l[i][j];
            if lij != 0.0 {
                k.iter_mut().zip(kj).for_each(|(x, y)| *x += lij * y);
            }
        }
        let w = theta * tab.rho[i] * dt * dt;
        for term in 0..ode.terms() {
            if let Some(fd) = ctx.fdot(term) {
                k.iter_mut().zip(fd).for_each(|(x, y)| *x += w * y);
            }
            ctx.solve(term, &mut k).map_err(|e| AmfwError::StageSolve {
                stage: i,
                term,
                source: Box::new(e),
            })?;
        }
        ks.push(k.clone());
    }
    let mut out = v.to_vec();
    for (bi, ki) in tab.b.iter().zip(&ks) {
        out.iter_mut().zip(ki).for_each(|(x, y)| *x += bi * y);
    }
    ode.finish_step(t + dt, &mut out);
    Ok(out)
}

/// Largest system accepted by [`rosenbrock_step`].
pub const ROSENBROCK_MAX_DIM: usize = 4096;

/// One step of the unfactored W-method
/// `(I - θΔt W) K_i = Δt F(t_n + c_i Δt, V_n + sum a_ij K_j) + sum l_ij K_j + θ ρ_i Δt² Ḟ`.
pub fn rosenbrock_step(
    tab: &Tableau,
    t: f64,
    v: &[f64],
    dt: f64,
    w: &DMatrix<f64>,
    fdot: &[f64],
    f: impl Fn(f64, &[f64], &mut [f64]) -> Result<()>,
) -> Result<Vec<f64>> {
    let n = v.len();
    if n > ROSENBROCK_MAX_DIM {
        return Err(AmfwError::TooLarge(n));
    }
    if w.nrows() != n || w.ncols() != n || fdot.len() != n {
        return Err(AmfwError::DimensionMismatch {
            expected: n,
            got: w.nrows(),
        });
    }
    let theta = tab.theta();
    let m = DMatrix::<f64>::identity(n, n) - w * (theta * dt);
    let lu = m.lu();
    let s = tab.stages();
    let mut ks: Vec<DVector<f64>> = Vec::with_capacity(s);
    let mut fv = vec![0.0; n];
    for i in 0..s {
        let mut arg = DVector::from_column_slice(v);
        for (j, kj) in ks.iter().enumerate() {
            arg += kj * tab.a[i][j];
        }
        f(t + tab.c[i] * dt, arg.as_slice(), &mut fv)?;
        let mut rhs = DVector::from_column_slice(&fv) * dt;
        for (j, kj) in ks.iter().enumerate() {
            rhs += kj * tab.l[i][j];
        }
        rhs += DVector::from_column_slice(fdot) * (theta * tab.rho[i] * dt * dt);
        let k = lu.solve(&rhs).ok_or(AmfwError::Singular { row: 0 })?;
        ks.push(k);
    }
    let mut out = DVector::from_column_slice(v);
    for (bi, ki) in tab.b.iter().zip(&ks) {
        out += ki * *bi;
    }
    Ok(out.as_slice().to_vec())
}

/// Frozen data of one step of a [`PdeOde`].
pub struct PdeStep {
    theta_dt: f64,
    reaction_jac: Option<Vec<f64>>,
    factors: Vec<Arc<DirectionFactors>>,
    fdot: Vec<Option<Vec<f64>>>,
}

impl StepContext for PdeStep {
    fn fdot(&self, term: usize) -> Option<&[f64]> {
        self.fdot[term].as_deref()
    }

    fn solve(&self, term: usize, rhs: &mut [f64]) -> Result<()> {
        if term == 0 {
            if let Some(jac) = &self.reaction_jac {
                for (x, j) in rhs.iter_mut().zip(jac) {
                    let den = 1.0 - self.theta_dt * j;
                    if den == 0.0 || !den.is_finite() {
                        return Err(AmfwError::Singular { row: 0 });
                    }
                    *x /= den;
                }
            }
            return Ok(());
        }
        self.factors[term - 1].solve_in_place(rhs);
        Ok(())
    }
}

type FactorCacheEntry = Option<(u64, Arc<DirectionFactors>)>;

/// A [`SplitSystem`] driven by the AMF-W stepper. Factorizations are reused
/// across steps when the coefficients do not depend on time.
pub struct PdeOde<'p> {
    sys: SplitSystem<'p>,
    factors: Mutex<Vec<FactorCacheEntry>>,
}

impl<'p> PdeOde<'p> {
    pub fn new(sys: SplitSystem<'p>) -> Self {
        let d = sys.grid().dim();
        Self {
            sys,
            factors: Mutex::new(vec![None; d]),
        }
    }

    pub fn system(&self) -> &SplitSystem<'p> {
        &self.sys
    }

    fn factor(&self, dir: usize, t: f64, theta_dt: f64) -> Result<Arc<DirectionFactors>> {
        let cache = self.sys.problem().coefficients_time_independent();
        if cache {
            if let Some((bits, f)) = &self.factors.lock().expect("factor cache")[dir] {
                if *bits == theta_dt.to_bits() {
                    return Ok(f.clone());
                }
            }
        }
        let f = Arc::new(self.sys.operator(dir, t)?.factor_shifted(theta_dt)?);
        if cache {
            self.factors.lock().expect("factor cache")[dir] = Some((theta_dt.to_bits(), f.clone()));
        }
        Ok(f)
    }
}

impl SplitOde for PdeOde<'_> {
    type Step = PdeStep;

    fn len(&self) -> usize {
        self.sys.len()
    }

    fn terms(&self) -> usize {
        self.sys.terms()
    }

    fn rhs(&self, t: f64, v: &[f64], out: &mut [f64]) -> Result<()> {
        self.sys.rhs(t, v, out)
    }

    fn freeze(&self, t: f64, v: &[f64], theta_dt: f64) -> Result<PdeStep> {
        let d = self.sys.grid().dim();
        let reaction_jac = if self.sys.problem().has_reaction() {
            match self.sys.jacobian(0, t, v)? {
                TermJacobian::Diagonal(j) => Some(j),
                TermJacobian::Banded(_) => unreachable!("reaction Jacobian is diagonal"),
            }
        } else {
            None
        };
        let factors = (0..d)
            .map(|dir| self.factor(dir, t, theta_dt))
            .collect::<Result<Vec<_>>>()?;
        let fdot = (0..=d)
            .map(|term| self.sys.time_derivative(term, t, v))
            .collect::<Result<Vec<_>>>()?;
        Ok(PdeStep {
            theta_dt,
            reaction_jac,
            factors,
            fdot,
        })
    }

    fn finish_step(&self, t: f64, v: &mut [f64]) {
        if self.sys.mode() == SplitMode::Extended {
            self.sys.project(t, v);
        }
    }
}

/// How time-dependent boundary data is handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryCorrection {
    None,
    Interpolant,
    OperatorExtension,
}

impl BoundaryCorrection {
    pub fn by_name(name: &str) -> Option<Self> {
        match name.trim().to_ascii_lowercase().as_str() {
            "none" => Some(Self::None),
            "interpolant" => Some(Self::Interpolant),
            "extension" | "operator-extension" => Some(Self::OperatorExtension),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Interpolant => "interpolant",
            Self::OperatorExtension => "extension",
        }
    }
}

/// Number of steps of size `dt` that reach `t_end`.
pub fn step_count(t_end: f64, dt: f64) -> Result<usize> {
    let steps = (t_end / dt).round();
    if !(dt > 0.0) || steps < 1.0 || (steps * dt - t_end).abs() > 1e-12 * t_end.abs().max(1.0) {
        return Err(AmfwError::NonIntegralSteps { t_end, dt });
    }
    Ok(steps as usize)
}

/// Runs `steps` AMF-W steps of size `dt` from `v0` at `t0`.
pub fn integrate_ode<O: SplitOde>(
    ode: &O,
    tab: &Tableau,
    v0: Vec<f64>,
    t0: f64,
    dt: f64,
    steps: usize,
) -> Result<Vec<f64>> {
    let mut v = v0;
    for n in 0..steps {
        let t = t0 + n as f64 * dt;
        v = amfw_step(ode, tab, t, &v, dt).map_err(|e| AmfwError::StepFailure {
            step: n,
            source: Box::new(e),
        })?;
    }
    Ok(v)
}

/// Numerical solution at the final time.
#[derive(Debug, Clone)]
pub struct Solution {
    /// Values on the integration grid (closed for the operator extension).
    pub field: GridField,
    pub steps: usize,
    pub dt: f64,
    pub t_end: f64,
}

/// Integrates `problem` on the grid with `n[l]` interior nodes per direction
/// up to `t_end` with fixed step `dt`.
pub fn integrate(
    problem: &dyn PdeProblem,
    n: &[usize],
    tab: &Tableau,
    correction: BoundaryCorrection,
    dt: f64,
    t_end: f64,
) -> Result<Solution> {
    let steps = step_count(t_end, dt)?;
    let interior = Grid::interior(n)?;
    let field = match correction {
        BoundaryCorrection::None => {
            let ode = PdeOde::new(SplitSystem::new(problem, interior, SplitMode::Plain)?);
            let v0 = ode.system().initial_state();
            GridField::from_vec(interior, integrate_ode(&ode, tab, v0, 0.0, dt, steps)?)?
        }
        BoundaryCorrection::OperatorExtension => {
            let closed = interior.with_closed(true);
            let ode = PdeOde::new(SplitSystem::new(problem, closed, SplitMode::Extended)?);
            let v0 = ode.system().initial_state();
            GridField::from_vec(closed, integrate_ode(&ode, tab, v0, 0.0, dt, steps)?)?
        }
        BoundaryCorrection::Interpolant => {
            let hom = HomogenizedProblem::new(problem)?;
            let ode = PdeOde::new(SplitSystem::new(&hom, interior, SplitMode::Plain)?);
            let v0 = ode.system().initial_state();
            let w = GridField::from_vec(interior, integrate_ode(&ode, tab, v0, 0.0, dt, steps)?)?;
            hom.untransform(&w, t_end)
        }
    };
    Ok(Solution {
        field,
        steps,
        dt,
        t_end,
    })
}
