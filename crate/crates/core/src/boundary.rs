//! Boundary corrections for time-dependent boundary data.
//!
//! Two routes are provided:
//!
//! * An interpolant `φ` with `Bφ = β` on every face, built direction by
//!   direction from one-variable edge polynomials. Subtracting it gives a
//!   problem for `w = u - φ` with homogeneous boundary conditions.
//! * The operator extension, where boundary unknowns are kept in the state
//!   and evolve by `V_t = tilde-L V + β_t - tilde-L β`, with `tilde-L` the
//!   tangential part of the operator. [`SplitMode::Extended`] implements the
//!   split terms; the helpers here expose the boundary right-hand side and
//!   the end-of-step projection.

use std::sync::{Arc, Mutex};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{AmfwError, Result};
use crate::grid::{DirSet, Grid, GridField, PointClass, MAX_DIM};
use crate::problem::{time_fd_step, PdeProblem};
use crate::space::{DirectionalOperator, SplitMode, SplitSystem};

/// `B φ = p φ + q ∂φ/∂x_j` on one face.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceBc {
    pub p: f64,
    pub q: f64,
}

impl FaceBc {
    pub const DIRICHLET: FaceBc = FaceBc { p: 1.0, q: 0.0 };
    pub const NEUMANN: FaceBc = FaceBc { p: 0.0, q: 1.0 };

    pub fn robin(p: f64, q: f64) -> Self {
        Self { p, q }
    }

    pub fn is_admissible(&self) -> bool {
        self.p.abs() + self.q.abs() > 0.0 && self.p.is_finite() && self.q.is_finite()
    }
}

/// Boundary operators for the `2d` faces; `faces[j][k]` is the face `x_j = k`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySpec {
    pub faces: Vec<[FaceBc; 2]>,
}

impl BoundarySpec {
    pub fn new(faces: Vec<[FaceBc; 2]>) -> Result<Self> {
        if faces.is_empty() || faces.len() > MAX_DIM {
            return Err(AmfwError::Sizing(format!(
                "{} directions in boundary specification",
                faces.len()
            )));
        }
        for (dir, f) in faces.iter().enumerate() {
            for (end, bc) in f.iter().enumerate() {
                if !bc.is_admissible() {
                    return Err(AmfwError::InadmissibleBoundary { dir, end });
                }
            }
        }
        Ok(Self { faces })
    }

    pub fn dirichlet(dim: usize) -> Self {
        Self {
            faces: vec![[FaceBc::DIRICHLET; 2]; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.faces.len()
    }

    pub fn is_dirichlet(&self) -> bool {
        self.faces.iter().flatten().all(|f| f.q == 0.0)
    }
}

/// Face data `β` for the boundary operators of a [`BoundarySpec`].
pub trait BoundaryData: Sync {
    fn dim(&self) -> usize;

    /// Data on face `x_dir = end` at the face point `x`, differentiated once
    /// in each transverse direction of `mask` and `dt_order` times in `t`.
    fn face_value(&self, dir: usize, end: usize, x: &[f64], t: f64, mask: DirSet, dt_order: u8) -> f64;

    /// Whether `face_value` accepts a non-empty `mask`.
    fn has_transverse_derivatives(&self) -> bool {
        true
    }
}

/// Dirichlet traces of a problem's boundary function.
pub struct DirichletData<'p> {
    problem: &'p dyn PdeProblem,
}

impl<'p> DirichletData<'p> {
    pub fn new(problem: &'p dyn PdeProblem) -> Self {
        Self { problem }
    }
}

impl BoundaryData for DirichletData<'_> {
    fn dim(&self) -> usize {
        self.problem.dim()
    }

    fn face_value(&self, _dir: usize, _end: usize, x: &[f64], t: f64, mask: DirSet, dt_order: u8) -> f64 {
        assert!(mask.is_empty(), "Dirichlet traces carry no transverse derivatives");
        match dt_order {
            0 => self.problem.boundary(x, t),
            1 => self.problem.boundary_dt_or_fd(x, t),
            2 => self.problem.boundary_dtt_or_fd(x, t),
            _ => panic!("time derivative of order {dt_order} not available"),
        }
    }

    fn has_transverse_derivatives(&self) -> bool {
        false
    }
}

/// One-variable cubic, `c[0] + c[1] ξ + c[2] ξ² + c[3] ξ³`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cubic(pub [f64; 4]);

impl Cubic {
    pub fn eval(&self, xi: f64) -> f64 {
        let c = &self.0;
        ((c[3] * xi + c[2]) * xi + c[1]) * xi + c[0]
    }

    pub fn deriv(&self, xi: f64) -> f64 {
        let c = &self.0;
        (3.0 * c[3] * xi + 2.0 * c[2]) * xi + c[1]
    }

    /// Value (`order = 0`) or first derivative (`order = 1`).
    pub fn eval_order(&self, xi: f64, order: bool) -> f64 {
        if order {
            self.deriv(xi)
        } else {
            self.eval(xi)
        }
    }

    pub fn degree(&self) -> usize {
        (0..4).rev().find(|&k| self.0[k] != 0.0).unwrap_or(0)
    }

    /// Expands `sum c_k (ξ - 1)^k` into monomials of `ξ`.
    fn from_shifted(c: [f64; 4]) -> Self {
        const BINOM: [[f64; 4]; 4] = [
            [1.0, 0.0, 0.0, 0.0],
            [1.0, 1.0, 0.0, 0.0],
            [1.0, 2.0, 1.0, 0.0],
            [1.0, 3.0, 3.0, 1.0],
        ];
        let mut out = [0.0; 4];
        for k in 0..4 {
            for m in 0..=k {
                let sign = if (k - m) % 2 == 0 { 1.0 } else { -1.0 };
                out[m] += c[k] * BINOM[k][m] * sign;
            }
        }
        Cubic(out)
    }
}

/// Edge polynomials of one direction: `B_0 P = 1`, `B_1 P = 0`, `B_0 Q = 0`, `B_1 Q = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgePolynomials {
    pub p: Cubic,
    pub q: Cubic,
}

/// Monomial pairs tried in order of increasing degree.
const MONOMIAL_PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (1, 2), (0, 3), (1, 3), (2, 3)];

fn apply_bc(bc: FaceBc, value: f64, slope: f64) -> f64 {
    bc.p * value + bc.q * slope
}

/// Value and slope of `(ξ - center)^k` at `ξ`.
fn monomial(k: usize, xi: f64, center: f64) -> (f64, f64) {
    let y = xi - center;
    let v = y.powi(k as i32);
    let s = if k == 0 { 0.0 } else { k as f64 * y.powi(k as i32 - 1) };
    (v, s)
}

/// Lowest-degree solution of two boundary constraints using the monomial
/// basis `(ξ - center)^k`; `target` holds the values of `B_0` and `B_1`.
fn solve_edge(b0: FaceBc, b1: FaceBc, center: f64, target: [f64; 2]) -> Option<[f64; 4]> {
    for &(i, j) in &MONOMIAL_PAIRS {
        let row = |bc: FaceBc, xi: f64| {
            let (vi, si) = monomial(i, xi, center);
            let (vj, sj) = monomial(j, xi, center);
            (apply_bc(bc, vi, si), apply_bc(bc, vj, sj))
        };
        let (a11, a12) = row(b0, 0.0);
        let (a21, a22) = row(b1, 1.0);
        let det = a11 * a22 - a12 * a21;
        let scale = (a11.abs() + a12.abs()) * (a21.abs() + a22.abs());
        if det.abs() <= 1e-14 * scale || scale == 0.0 {
            continue;
        }
        let ci = (target[0] * a22 - a12 * target[1]) / det;
        let cj = (a11 * target[1] - a21 * target[0]) / det;
        let mut c = [0.0; 4];
        c[i] = ci;
        c[j] = cj;
        return Some(c);
    }
    None
}

impl EdgePolynomials {
    /// `P` is expanded about `ξ = 1` and `Q` about `ξ = 0`, each on the first
    /// nonsingular monomial pair of [`MONOMIAL_PAIRS`].
    pub fn build(b0: FaceBc, b1: FaceBc) -> Result<Self> {
        let err = AmfwError::EdgePolynomial {
            p0: b0.p,
            q0: b0.q,
            p1: b1.p,
            q1: b1.q,
        };
        if !b0.is_admissible() {
            return Err(AmfwError::InadmissibleBoundary { dir: 0, end: 0 });
        }
        if !b1.is_admissible() {
            return Err(AmfwError::InadmissibleBoundary { dir: 0, end: 1 });
        }
        let p = solve_edge(b0, b1, 1.0, [1.0, 0.0]).ok_or_else(|| err.clone())?;
        let q = solve_edge(b0, b1, 0.0, [0.0, 1.0]).ok_or(err)?;
        Ok(Self {
            p: Cubic::from_shifted(p),
            q: Cubic(q),
        })
    }

    /// Residuals of the four defining constraints.
    pub fn constraint_residuals(&self, b0: FaceBc, b1: FaceBc) -> [f64; 4] {
        [
            apply_bc(b0, self.p.eval(0.0), self.p.deriv(0.0)) - 1.0,
            apply_bc(b0, self.q.eval(0.0), self.q.deriv(0.0)),
            apply_bc(b1, self.p.eval(1.0), self.p.deriv(1.0)),
            apply_bc(b1, self.q.eval(1.0), self.q.deriv(1.0)) - 1.0,
        ]
    }
}

/// `φ = sum_j φ_j` with `φ_j = P_j(x_j) B_0 u^[j-1] + Q_j(x_j) B_1 u^[j-1]` and
/// `u^[j] = u^[j-1] - φ_j`, where the traces `B_k u^[j-1]` are obtained from
/// the face data by subtracting the earlier components.
pub struct Interpolant<D: BoundaryData> {
    spec: BoundarySpec,
    polys: Vec<EdgePolynomials>,
    data: D,
}

impl<D: BoundaryData> Interpolant<D> {
    pub fn new(spec: BoundarySpec, data: D) -> Result<Self> {
        if spec.dim() != data.dim() {
            return Err(AmfwError::DimensionMismatch {
                expected: spec.dim(),
                got: data.dim(),
            });
        }
        if !spec.is_dirichlet() && !data.has_transverse_derivatives() {
            return Err(AmfwError::UnsupportedBoundary(
                "derivative boundary operators need face data with transverse derivatives".into(),
            ));
        }
        let polys = spec
            .faces
            .iter()
            .enumerate()
            .map(|(dir, f)| {
                EdgePolynomials::build(f[0], f[1]).map_err(|e| match e {
                    AmfwError::InadmissibleBoundary { end, .. } => {
                        AmfwError::InadmissibleBoundary { dir, end }
                    }
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { spec, polys, data })
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    pub fn spec(&self) -> &BoundarySpec {
        &self.spec
    }

    pub fn edge_polynomials(&self, dir: usize) -> &EdgePolynomials {
        &self.polys[dir]
    }

    pub fn data(&self) -> &D {
        &self.data
    }

    /// `∂_t^order φ_i`, differentiated once in each direction of `mask`.
    pub fn component_masked(&self, i: usize, x: &[f64], t: f64, mask: DirSet, order: u8) -> f64 {
        let m = mask.contains(i);
        let rest = mask.without(i);
        let e = &self.polys[i];
        let pv = e.p.eval_order(x[i], m);
        let qv = e.q.eval_order(x[i], m);
        let mut s = 0.0;
        if pv != 0.0 {
            s += pv * self.trace(i, 0, x, t, rest, order);
        }
        if qv != 0.0 {
            s += qv * self.trace(i, 1, x, t, rest, order);
        }
        s
    }

    /// `B^(j)_k u^[j-1]` at the projection of `x` onto the face `x_j = k`.
    fn trace(&self, j: usize, k: usize, x: &[f64], t: f64, mask: DirSet, order: u8) -> f64 {
        let mut xk = [0.0; MAX_DIM];
        xk[..x.len()].copy_from_slice(x);
        xk[j] = k as f64;
        let xk = &xk[..x.len()];
        let bc = self.spec.faces[j][k];
        let mut v = self.data.face_value(j, k, xk, t, mask, order);
        for i in 0..j {
            if bc.p != 0.0 {
                v -= bc.p * self.component_masked(i, xk, t, mask, order);
            }
            if bc.q != 0.0 {
                v -= bc.q * self.component_masked(i, xk, t, mask.with(j), order);
            }
        }
        v
    }

    pub fn component(&self, i: usize, x: &[f64], t: f64) -> f64 {
        self.component_masked(i, x, t, DirSet::EMPTY, 0)
    }

    /// `∂_t^order φ(x, t)`.
    pub fn eval_order(&self, x: &[f64], t: f64, order: u8) -> f64 {
        (0..self.dim())
            .map(|i| self.component_masked(i, x, t, DirSet::EMPTY, order))
            .sum()
    }

    pub fn eval(&self, x: &[f64], t: f64) -> f64 {
        self.eval_order(x, t, 0)
    }

    pub fn eval_dt(&self, x: &[f64], t: f64) -> f64 {
        self.eval_order(x, t, 1)
    }

    /// Derivative of `φ` along the directions in `mask` (each once).
    pub fn eval_masked(&self, x: &[f64], t: f64, mask: DirSet) -> f64 {
        (0..self.dim())
            .map(|i| self.component_masked(i, x, t, mask, 0))
            .sum()
    }

    /// `B^(j)_k φ` at a face point.
    pub fn apply_face_operator(&self, j: usize, k: usize, x: &[f64], t: f64) -> f64 {
        let bc = self.spec.faces[j][k];
        let mut s = 0.0;
        if bc.p != 0.0 {
            s += bc.p * self.eval(x, t);
        }
        if bc.q != 0.0 {
            s += bc.q * self.eval_masked(x, t, DirSet::EMPTY.with(j));
        }
        s
    }

    /// Largest edge mismatch `|B^(j) β_i - B^(i) β_j|` over random edge samples.
    /// Incompatible data is reported, not repaired.
    pub fn compatibility_defect(&self, samples: usize, seed: u64) -> f64 {
        let d = self.dim();
        if d < 2 {
            return 0.0;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let i = rng.gen_range(0..d);
            let mut j = rng.gen_range(0..d - 1);
            if j >= i {
                j += 1;
            }
            let (ki, kj) = (rng.gen_range(0..2), rng.gen_range(0..2));
            let mut x = [0.0; MAX_DIM];
            for v in x.iter_mut().take(d) {
                *v = rng.gen::<f64>();
            }
            x[i] = ki as f64;
            x[j] = kj as f64;
            let t = rng.gen::<f64>();
            let side = |a: usize, ka: usize, b: usize, kb: usize| {
                // B^(b)_kb applied to the data of face (a, ka)
                let bc = self.spec.faces[b][kb];
                let mut s = 0.0;
                if bc.p != 0.0 {
                    s += bc.p * self.data.face_value(a, ka, &x[..d], t, DirSet::EMPTY, 0);
                }
                if bc.q != 0.0 {
                    s += bc.q * self.data.face_value(a, ka, &x[..d], t, DirSet::EMPTY.with(b), 0);
                }
                s
            };
            worst = worst.max((side(i, ki, j, kj) - side(j, kj, i, ki)).abs());
        }
        worst
    }
}

/// `φ` and `∂_t φ` sampled on a grid together with `L_h φ`.
#[derive(Debug, Clone)]
pub struct PhiFields {
    /// `∂_t^order φ` at the interior points.
    pub values: Vec<f64>,
    /// `L_h ∂_t^order φ` at the interior points, using `φ` as boundary data.
    pub operator: Vec<f64>,
}

type PhiCacheEntry = (u64, u8, usize, Arc<PhiFields>);

/// Problem for `w = u - φ`: homogeneous Dirichlet data, initial value
/// `u_0 - φ(., 0)` and reaction `r* = L_h φ + r(x, t, w + φ) - φ_t`.
///
/// `L_h φ` is the discrete operator, so the semidiscrete system for
/// `w + φ` coincides with the plain one except that the time-dependent
/// boundary inflow is moved into the reaction.
pub struct HomogenizedProblem<'p> {
    inner: &'p dyn PdeProblem,
    phi: Interpolant<DirichletData<'p>>,
    cache: Mutex<Vec<PhiCacheEntry>>,
}

const PHI_CACHE: usize = 6;

impl<'p> HomogenizedProblem<'p> {
    pub fn new(inner: &'p dyn PdeProblem) -> Result<Self> {
        let phi = Interpolant::new(BoundarySpec::dirichlet(inner.dim()), DirichletData::new(inner))?;
        Ok(Self {
            inner,
            phi,
            cache: Mutex::new(Vec::new()),
        })
    }

    pub fn interpolant(&self) -> &Interpolant<DirichletData<'p>> {
        &self.phi
    }

    pub fn inner(&self) -> &dyn PdeProblem {
        self.inner
    }

    /// `u = w + φ(., t)` on the stored points of `w`'s grid.
    pub fn untransform(&self, w: &GridField, t: f64) -> GridField {
        let d = w.grid().dim();
        let mut u = w.clone();
        for ((_, _, x), v) in w.grid().points().zip(u.values_mut()) {
            *v += self.phi.eval(&x[..d], t);
        }
        u
    }

    /// Cached `∂_t^order φ` and `L_h ∂_t^order φ` at interior points of `grid`.
    pub fn phi_fields(&self, grid: &Grid, t: f64, order: u8) -> Arc<PhiFields> {
        let key = (t.to_bits(), order, grid.len());
        if let Some(hit) = self
            .cache
            .lock()
            .expect("phi cache")
            .iter()
            .find(|e| (e.0, e.1, e.2) == key)
        {
            return hit.3.clone();
        }
        let fields = Arc::new(self.compute_phi_fields(grid, t, order));
        let mut cache = self.cache.lock().expect("phi cache");
        if cache.len() >= PHI_CACHE {
            cache.remove(0);
        }
        cache.push((key.0, key.1, key.2, fields.clone()));
        fields
    }

    fn compute_phi_fields(&self, grid: &Grid, t: f64, order: u8) -> PhiFields {
        let closed = grid.with_closed(true);
        let d = grid.dim();
        let full: Vec<f64> = closed
            .points()
            .map(|(_, _, x)| self.phi.eval_order(&x[..d], t, order))
            .collect();
        let mut lphi = vec![0.0; closed.len()];
        for dir in 0..d {
            let op = DirectionalOperator::assemble(
                &closed,
                dir,
                t,
                self.inner.coefficients_space_independent(),
                |x| (self.inner.diffusion(dir, x, t), self.inner.advection(dir, x, t)),
            )
            .expect("valid direction");
            op.apply_add(1.0, &full, &mut lphi);
        }
        let interior = closed.interior_offsets();
        PhiFields {
            values: interior.iter().map(|&i| full[i]).collect(),
            operator: interior.iter().map(|&i| lphi[i]).collect(),
        }
    }

    fn shifted(&self, grid: &Grid, t: f64, w: &[f64]) -> Vec<f64> {
        let phi = self.phi_fields(grid, t, 0);
        w.iter().zip(&phi.values).map(|(a, b)| a + b).collect()
    }
}

impl PdeProblem for HomogenizedProblem<'_> {
    fn name(&self) -> String {
        format!("{} (homogenized)", self.inner.name())
    }

    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn t_end(&self) -> f64 {
        self.inner.t_end()
    }

    fn diffusion(&self, dir: usize, x: &[f64], t: f64) -> f64 {
        self.inner.diffusion(dir, x, t)
    }

    fn diffusion_dt(&self, dir: usize, x: &[f64], t: f64) -> Option<f64> {
        self.inner.diffusion_dt(dir, x, t)
    }

    fn advection(&self, dir: usize, x: &[f64], t: f64) -> f64 {
        self.inner.advection(dir, x, t)
    }

    fn advection_dt(&self, dir: usize, x: &[f64], t: f64) -> Option<f64> {
        self.inner.advection_dt(dir, x, t)
    }

    fn coefficients_time_independent(&self) -> bool {
        self.inner.coefficients_time_independent()
    }

    fn coefficients_space_independent(&self) -> bool {
        self.inner.coefficients_space_independent()
    }

    /// Pointwise part `r(x, t, w + φ) - φ_t`; the discrete `L_h φ` term is
    /// only available through [`PdeProblem::reaction_field`].
    fn reaction(&self, x: &[f64], t: f64, w: f64) -> f64 {
        let phi = self.phi.eval(x, t);
        self.inner.reaction(x, t, w + phi) - self.phi.eval_dt(x, t)
    }

    fn boundary(&self, _x: &[f64], _t: f64) -> f64 {
        0.0
    }

    fn boundary_dt(&self, _x: &[f64], _t: f64) -> Option<f64> {
        Some(0.0)
    }

    fn boundary_dtt(&self, _x: &[f64], _t: f64) -> Option<f64> {
        Some(0.0)
    }

    fn homogeneous_boundary(&self) -> bool {
        true
    }

    fn initial(&self, x: &[f64]) -> f64 {
        self.inner.initial(x) - self.phi.eval(x, 0.0)
    }

    fn exact(&self, x: &[f64], t: f64) -> Option<f64> {
        self.inner.exact(x, t).map(|u| u - self.phi.eval(x, t))
    }

    fn has_exact(&self) -> bool {
        self.inner.has_exact()
    }

    fn exact_dt(&self, x: &[f64], t: f64) -> Option<f64> {
        self.inner.exact_dt(x, t).map(|u| u - self.phi.eval_dt(x, t))
    }

    fn reaction_field(&self, grid: &Grid, t: f64, w: &[f64], out: &mut [f64]) {
        assert!(!grid.is_closed(), "homogenized problems live on interior grids");
        let phi = self.phi_fields(grid, t, 0);
        let phi_t = self.phi_fields(grid, t, 1);
        let u = self.shifted(grid, t, w);
        if self.inner.has_reaction() {
            self.inner.reaction_field(grid, t, &u, out);
        } else {
            out.iter_mut().for_each(|o| *o = 0.0);
        }
        for (i, o) in out.iter_mut().enumerate() {
            *o += phi.operator[i] - phi_t.values[i];
        }
    }

    fn reaction_du_field(&self, grid: &Grid, t: f64, w: &[f64], out: &mut [f64]) {
        if self.inner.has_reaction() {
            let u = self.shifted(grid, t, w);
            self.inner.reaction_du_field(grid, t, &u, out);
        } else {
            out.iter_mut().for_each(|o| *o = 0.0);
        }
    }

    fn reaction_dt_field(&self, grid: &Grid, t: f64, w: &[f64], out: &mut [f64]) {
        if !self.inner.coefficients_time_independent() {
            let e = time_fd_step(t);
            let mut minus = vec![0.0; out.len()];
            self.reaction_field(grid, t + e, w, out);
            self.reaction_field(grid, t - e, w, &mut minus);
            for (o, m) in out.iter_mut().zip(&minus) {
                *o = (*o - m) / (2.0 * e);
            }
            return;
        }
        let phi_t = self.phi_fields(grid, t, 1);
        let phi_tt = self.phi_fields(grid, t, 2);
        for (i, o) in out.iter_mut().enumerate() {
            *o = phi_t.operator[i] - phi_tt.values[i];
        }
        if self.inner.has_reaction() {
            let u = self.shifted(grid, t, w);
            let mut rt = vec![0.0; out.len()];
            let mut ru = vec![0.0; out.len()];
            self.inner.reaction_dt_field(grid, t, &u, &mut rt);
            self.inner.reaction_du_field(grid, t, &u, &mut ru);
            for (i, o) in out.iter_mut().enumerate() {
                *o += rt[i] + ru[i] * phi_t.values[i];
            }
        }
    }
}

/// Boundary right-hand side of the extended system at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedBoundaryRhs {
    /// Storage offsets of the boundary points on the closed grid.
    pub offsets: Vec<usize>,
    /// `β_t - tilde-L β` at those points.
    pub values: Vec<f64>,
}

/// `β_t - tilde-L_h β` at every boundary point of a closed grid. At a point
/// on the faces of the directions in `S`, `tilde-L_h` only sums the
/// directions outside `S`.
pub fn extend_operator(problem: &dyn PdeProblem, grid: &Grid, t: f64) -> Result<ExtendedBoundaryRhs> {
    let sys = SplitSystem::new(problem, *grid, SplitMode::Extended)?;
    let v = vec![0.0; grid.len()];
    let mut f0 = vec![0.0; grid.len()];
    sys.term(0, t, &v, &mut f0)?;
    let offsets = sys.boundary_offsets().to_vec();
    let values = offsets.iter().map(|&b| f0[b]).collect();
    Ok(ExtendedBoundaryRhs { offsets, values })
}

/// Overwrites the boundary entries of a closed-grid field with `beta(x, t)`.
pub fn project_boundary(v: &mut GridField, t: f64, beta: impl Fn(&[f64], f64) -> f64) -> Result<()> {
    let grid = *v.grid();
    if !grid.is_closed() {
        return Err(AmfwError::ModeMismatch("projection needs a closed grid".into()));
    }
    let d = grid.dim();
    for (f, idx, x) in grid.points() {
        if grid.classify_unchecked(&idx) != PointClass::Interior {
            v[f] = beta(&x[..d], t);
        }
    }
    Ok(())
}
