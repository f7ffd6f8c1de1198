//! Finite-difference operators and the directional splitting of the
//! semidiscrete right-hand side.
//!
//! Second and first derivatives use central rows: three points at the nodes
//! next to the boundary, five points elsewhere. Along a line with `n` interior
//! nodes the narrow rows sit at lattice positions `1` and `n`.

use std::sync::{Arc, Mutex};

use rayon::prelude::*;

use crate::banded::{BandedFactorization, BandedLineMatrix, BAND_WIDTH, HALF_BAND};
use crate::error::{AmfwError, Result};
use crate::grid::{Coords, Grid, GridField, GridLine, PointClass};
use crate::problem::{time_fd_step, PdeProblem};

/// Approximate number of points per parallel task for contiguous lines.
const LINE_GROUP: usize = 4096;

/// Lines transposed together for a contiguous-line solve.
const SOLVE_BATCH: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeKind {
    Second,
    First,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StencilOrder {
    Second,
    Fourth,
}

/// Unscaled stencil rows over offsets `-2..=2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StencilSpec {
    pub kind: DerivativeKind,
    pub order: StencilOrder,
    pub coefficients: [f64; BAND_WIDTH],
}

impl StencilSpec {
    pub const SECOND_NARROW: StencilSpec = StencilSpec {
        kind: DerivativeKind::Second,
        order: StencilOrder::Second,
        coefficients: [0.0, 1.0, -2.0, 1.0, 0.0],
    };
    pub const SECOND_WIDE: StencilSpec = StencilSpec {
        kind: DerivativeKind::Second,
        order: StencilOrder::Fourth,
        coefficients: [
            -1.0 / 12.0,
            16.0 / 12.0,
            -30.0 / 12.0,
            16.0 / 12.0,
            -1.0 / 12.0,
        ],
    };
    pub const FIRST_NARROW: StencilSpec = StencilSpec {
        kind: DerivativeKind::First,
        order: StencilOrder::Second,
        coefficients: [0.0, -0.5, 0.0, 0.5, 0.0],
    };
    pub const FIRST_WIDE: StencilSpec = StencilSpec {
        kind: DerivativeKind::First,
        order: StencilOrder::Fourth,
        coefficients: [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0],
    };

    pub fn get(kind: DerivativeKind, order: StencilOrder) -> StencilSpec {
        match (kind, order) {
            (DerivativeKind::Second, StencilOrder::Second) => Self::SECOND_NARROW,
            (DerivativeKind::Second, StencilOrder::Fourth) => Self::SECOND_WIDE,
            (DerivativeKind::First, StencilOrder::Second) => Self::FIRST_NARROW,
            (DerivativeKind::First, StencilOrder::Fourth) => Self::FIRST_WIDE,
        }
    }

    /// Row used at lattice position `p` of a line with `n` interior nodes.
    pub fn at(kind: DerivativeKind, p: usize, n: usize) -> StencilSpec {
        let order = if p == 1 || p == n {
            StencilOrder::Second
        } else {
            StencilOrder::Fourth
        };
        Self::get(kind, order)
    }

    /// Coefficients scaled by `1/dx^2` or `1/dx`.
    pub fn scaled(&self, dx: f64) -> [f64; BAND_WIDTH] {
        let s = match self.kind {
            DerivativeKind::Second => 1.0 / (dx * dx),
            DerivativeKind::First => 1.0 / dx,
        };
        self.coefficients.map(|c| c * s)
    }
}

/// Band row `a * d2 + b * d1` at lattice position `p`.
pub fn stencil_row(p: usize, n: usize, dx: f64, a: f64, b: f64) -> [f64; BAND_WIDTH] {
    let d2 = StencilSpec::at(DerivativeKind::Second, p, n).scaled(dx);
    let mut row = [0.0; BAND_WIDTH];
    for k in 0..BAND_WIDTH {
        row[k] = a * d2[k];
    }
    if b != 0.0 {
        let d1 = StencilSpec::at(DerivativeKind::First, p, n).scaled(dx);
        for k in 0..BAND_WIDTH {
            row[k] += b * d1[k];
        }
    }
    balance(&mut row);
    row
}

/// Rounds the off-centre taps onto a running sum so that the stored row sums
/// to exactly zero. Otherwise the rounded weights act on constants as a
/// source of size `eps / dx^2` with a fixed sign, which accumulates into a
/// smooth error floor on fine grids.
fn balance(row: &mut [f64; BAND_WIDTH]) {
    let mut taps = [0, 1, 3, 4];
    taps.sort_by(|&i, &j| row[j].abs().total_cmp(&row[i].abs()));
    let mut s = 0.0;
    for k in taps {
        let t = s + row[k];
        row[k] = t - s;
        s = t;
    }
    row[HALF_BAND] = -s;
}

#[derive(Debug, Clone, PartialEq)]
enum LineBands {
    /// One set of rows shared by every line.
    Uniform(Vec<[f64; BAND_WIDTH]>),
    /// Rows of line `k` at `k * len..(k + 1) * len`.
    PerLine(Vec<[f64; BAND_WIDTH]>),
}

/// Pentadiagonal operator acting along one direction.
///
/// On interior-only grids the rows act on interior unknowns; the stencil
/// entries reaching the faces are kept per line as edge coefficients
/// `[row 1 -> x_j = 0, row 2 -> x_j = 0, row n-1 -> x_j = 1, row n -> x_j = 1]`.
/// On closed grids the rows at the two face points of each line are zero and
/// the remaining rows reach the stored boundary values directly.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionalOperator {
    grid: Grid,
    dir: usize,
    t: f64,
    bands: LineBands,
    edges: Vec<[f64; 4]>,
}

impl DirectionalOperator {
    /// Assembles `a(x) * d2 + b(x) * d1` along `dir`. `coef` returns `(a, b)` at
    /// a point; with `uniform` it is sampled on the first line only.
    pub fn assemble(
        grid: &Grid,
        dir: usize,
        t: f64,
        uniform: bool,
        coef: impl Fn(&[f64]) -> (f64, f64),
    ) -> Result<Self> {
        let lines = grid.lines(dir)?;
        let d = grid.dim();
        let n = grid.n(dir);
        let dx = grid.dx(dir);
        let closed = grid.is_closed();
        let lo = grid.first_lattice();
        let count = if uniform { 1 } else { lines.count_lines() };
        let len = lines.points_per_line();
        let mut rows = Vec::with_capacity(count * len);
        let mut edges = Vec::with_capacity(count);
        for k in 0..count {
            let line = lines.line(k);
            let mut e = [0.0; 4];
            for q in 0..len {
                let p = q + lo;
                if closed && (p == 0 || p == n + 1) {
                    rows.push([0.0; BAND_WIDTH]);
                    continue;
                }
                let x = grid.point(line.offset(q));
                let (a, b) = coef(&x[..d]);
                let mut row = stencil_row(p, n, dx, a, b);
                if !closed {
                    if p == 1 {
                        e[0] = row[1];
                        row[1] = 0.0;
                    }
                    if p == 2 {
                        e[1] = row[0];
                        row[0] = 0.0;
                    }
                    if p == n - 1 {
                        e[2] = row[4];
                        row[4] = 0.0;
                    }
                    if p == n {
                        e[3] = row[3];
                        row[3] = 0.0;
                    }
                }
                rows.push(row);
            }
            edges.push(e);
        }
        let bands = if uniform {
            LineBands::Uniform(rows)
        } else {
            LineBands::PerLine(rows)
        };
        Ok(Self {
            grid: *grid,
            dir,
            t,
            bands,
            edges,
        })
    }

    /// Pure second-derivative operator.
    pub fn second_derivative(grid: &Grid, dir: usize) -> Result<Self> {
        Self::assemble(grid, dir, 0.0, true, |_| (1.0, 0.0))
    }

    /// Pure first-derivative operator.
    pub fn first_derivative(grid: &Grid, dir: usize) -> Result<Self> {
        Self::assemble(grid, dir, 0.0, true, |_| (0.0, 1.0))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn direction(&self) -> usize {
        self.dir
    }

    /// Time at which the coefficients were sampled.
    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self.bands, LineBands::Uniform(_))
    }

    fn len(&self) -> usize {
        self.grid.extent(self.dir)
    }

    fn line_rows(&self, k: usize) -> &[[f64; BAND_WIDTH]] {
        let len = self.len();
        match &self.bands {
            LineBands::Uniform(r) => r,
            LineBands::PerLine(r) => &r[k * len..(k + 1) * len],
        }
    }

    fn line_edges(&self, k: usize) -> &[f64; 4] {
        if self.is_uniform() {
            &self.edges[0]
        } else {
            &self.edges[k]
        }
    }

    /// Band matrix of line `k`.
    pub fn line_matrix(&self, k: usize) -> BandedLineMatrix {
        BandedLineMatrix::from_rows(self.line_rows(k).to_vec())
    }

    /// Edge coefficients of line `k` (zero on closed grids).
    pub fn edge_coefficients(&self, k: usize) -> [f64; 4] {
        *self.line_edges(k)
    }

    fn lines(&self) -> crate::grid::Lines {
        self.grid.lines(self.dir).expect("direction checked at assembly")
    }

    /// `out += alpha * D v`
    pub fn apply_add(&self, alpha: f64, v: &[f64], out: &mut [f64]) {
        let lines = self.lines();
        let inner = lines.lines_per_block();
        let len = lines.points_per_line();
        let block = len * inner;
        if inner == 1 {
            // contiguous lines, grouped to keep tasks coarse
            let group = LINE_GROUP.div_ceil(len).max(1);
            out.par_chunks_mut(block * group)
                .zip(v.par_chunks(block * group))
                .enumerate()
                .for_each(|(g, (og, vg))| {
                    for (q, (ob, vb)) in og.chunks_mut(len).zip(vg.chunks(len)).enumerate() {
                        let k = g * group + q;
                        let rows = self.line_rows(k);
                        let edge = |p: usize| {
                            let lo = p.saturating_sub(HALF_BAND);
                            let hi = (p + HALF_BAND).min(len - 1);
                            let own = vb[p];
                            (lo..=hi)
                                .filter(|&c| c != p)
                                .map(|c| rows[p][c + HALF_BAND - p] * (vb[c] - own))
                                .sum::<f64>()
                                + self.deficit(k, p) * own
                        };
                        for p in (0..HALF_BAND.min(len)).chain(len.saturating_sub(HALF_BAND).max(HALF_BAND)..len) {
                            ob[p] += alpha * edge(p);
                        }
                        for (p, (o, w)) in ob[HALF_BAND..]
                            .iter_mut()
                            .zip(vb.windows(BAND_WIDTH))
                            .enumerate()
                            .take(len.saturating_sub(2 * HALF_BAND))
                        {
                            let r = &rows[p + HALF_BAND];
                            let c = w[HALF_BAND];
                            *o += alpha * (r[0] * (w[0] - c) + r[1] * (w[1] - c) + r[3] * (w[3] - c) + r[4] * (w[4] - c));
                        }
                    }
                });
            return;
        }
        out.par_chunks_mut(block)
            .zip(v.par_chunks(block))
            .enumerate()
            .for_each(|(o, (ob, vb))| {
                for p in 0..len {
                    let lo = p.saturating_sub(HALF_BAND);
                    let hi = (p + HALF_BAND).min(len - 1);
                    let own = &vb[p * inner..(p + 1) * inner];
                    if self.is_uniform() {
                        let row = &self.line_rows(0)[p];
                        let dst = &mut ob[p * inner..(p + 1) * inner];
                        for c in (lo..=hi).filter(|&c| c != p) {
                            let w = alpha * row[c + HALF_BAND - p];
                            if w == 0.0 {
                                continue;
                            }
                            let src = &vb[c * inner..(c + 1) * inner];
                            for ((d, s), v) in dst.iter_mut().zip(src).zip(own) {
                                *d += w * (s - v);
                            }
                        }
                        let w = alpha * self.deficit(0, p);
                        if w != 0.0 {
                            for (d, v) in dst.iter_mut().zip(own) {
                                *d += w * v;
                            }
                        }
                    } else {
                        for q in 0..inner {
                            let k = o * inner + q;
                            let row = &self.line_rows(k)[p];
                            let mut s = self.deficit(k, p) * own[q];
                            for c in (lo..=hi).filter(|&c| c != p) {
                                s += row[c + HALF_BAND - p] * (vb[c * inner + q] - own[q]);
                            }
                            ob[p * inner + q] += alpha * s;
                        }
                    }
                }
            });
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        self.apply_add(1.0, v, &mut out);
        out
    }

    /// `(D v)` at a single stored point.
    pub fn apply_at(&self, flat: usize, v: &[f64]) -> f64 {
        let stride = self.grid.stride(self.dir);
        let len = self.len();
        let p = (flat / stride) % len;
        let k = (flat / (stride * len)) * stride + flat % stride;
        let row = &self.line_rows(k)[p];
        let own = v[flat];
        let mut s = self.deficit(k, p) * own;
        for c in (p.saturating_sub(HALF_BAND)..=(p + HALF_BAND).min(len - 1)).filter(|&c| c != p) {
            let off = flat + c * stride - p * stride;
            s += row[c + HALF_BAND - p] * (v[off] - own);
        }
        s
    }

    /// Exact sum of the stored taps of row `p` on line `k`. Rows sum to zero
    /// except where an entry was moved to the edge coefficients.
    fn deficit(&self, k: usize, p: usize) -> f64 {
        if self.grid.is_closed() {
            return 0.0;
        }
        let len = self.len();
        let e = self.line_edges(k);
        let mut d = 0.0;
        if p == 0 {
            d -= e[0];
        }
        if p == 1 {
            d -= e[1];
        }
        if p + 2 == len {
            d -= e[2];
        }
        if p + 1 == len {
            d -= e[3];
        }
        d
    }

    /// Nonzero `(offset, weight)` pairs of the row at a stored point.
    pub(crate) fn row_entries(&self, flat: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let stride = self.grid.stride(self.dir);
        let len = self.len();
        let p = (flat / stride) % len;
        let k = (flat / (stride * len)) * stride + flat % stride;
        let row = &self.line_rows(k)[p];
        (p.saturating_sub(HALF_BAND)..=(p + HALF_BAND).min(len - 1))
            .map(move |c| (flat + c * stride - p * stride, row[c + HALF_BAND - p]))
            .filter(|&(_, w)| w != 0.0)
    }

    /// Face points `(x_j = 0, x_j = 1)` of a line.
    pub fn face_points(&self, line: &GridLine) -> (Coords, Coords) {
        let mut x0 = self.grid.point(line.start);
        let mut x1 = x0;
        x0[self.dir] = 0.0;
        x1[self.dir] = 1.0;
        (x0, x1)
    }

    /// `out += alpha * inflow`, where the inflow carries the face values
    /// `beta` through the edge coefficients. No-op on closed grids.
    pub fn inflow_add(&self, alpha: f64, beta: impl Fn(&[f64]) -> f64, out: &mut [f64]) {
        if self.grid.is_closed() {
            return;
        }
        let d = self.grid.dim();
        let n = self.len();
        for (k, line) in self.lines().enumerate() {
            let e = self.line_edges(k);
            let (x0, x1) = self.face_points(&line);
            let b0 = alpha * beta(&x0[..d]);
            let b1 = alpha * beta(&x1[..d]);
            out[line.offset(0)] += e[0] * b0;
            out[line.offset(1)] += e[1] * b0;
            out[line.offset(n - 2)] += e[2] * b1;
            out[line.offset(n - 1)] += e[3] * b1;
        }
    }

    /// Factors `I - alpha * D` on every line.
    pub fn factor_shifted(&self, alpha: f64) -> Result<DirectionFactors> {
        let lines = self.lines();
        let fail = |k: usize, e: AmfwError| match e {
            AmfwError::Singular { row } => AmfwError::SingularLine {
                dir: self.dir,
                line_start: lines.line(k).start,
                row,
            },
            other => other,
        };
        let factors = match &self.bands {
            LineBands::Uniform(r) => vec![BandedLineMatrix::shifted_identity(alpha, r)
                .factorize()
                .map_err(|e| fail(0, e))?],
            LineBands::PerLine(_) => (0..lines.count_lines())
                .into_par_iter()
                .map(|k| {
                    BandedLineMatrix::shifted_identity(alpha, self.line_rows(k))
                        .factorize()
                        .map_err(|e| fail(k, e))
                })
                .collect::<Result<Vec<_>>>()?,
        };
        Ok(DirectionFactors {
            grid: self.grid,
            dir: self.dir,
            alpha,
            factors,
        })
    }
}

/// Factored `I - alpha * D_j` for all lines of one direction.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionFactors {
    grid: Grid,
    dir: usize,
    alpha: f64,
    factors: Vec<BandedFactorization>,
}

impl DirectionFactors {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn direction(&self) -> usize {
        self.dir
    }

    /// Overwrites `rhs` with the line-by-line solution.
    pub fn solve_in_place(&self, rhs: &mut [f64]) {
        let lines = self.grid.lines(self.dir).expect("valid direction");
        let inner = lines.lines_per_block();
        let block = lines.points_per_line() * inner;
        let uniform = self.factors.len() == 1;
        if inner == 1 {
            let len = lines.points_per_line();
            let group = LINE_GROUP.div_ceil(len).max(1);
            rhs.par_chunks_mut(block * group).enumerate().for_each(|(g, bg)| {
                if uniform {
                    // transpose small batches so the solve runs across lines
                    let mut tmp = vec![0.0; len * SOLVE_BATCH];
                    for batch in bg.chunks_mut(len * SOLVE_BATCH) {
                        let w = batch.len() / len;
                        let tmp = &mut tmp[..len * w];
                        for (q, line) in batch.chunks(len).enumerate() {
                            for (p, &x) in line.iter().enumerate() {
                                tmp[p * w + q] = x;
                            }
                        }
                        self.factors[0].solve_interleaved(tmp, w);
                        for (q, line) in batch.chunks_mut(len).enumerate() {
                            for (p, x) in line.iter_mut().enumerate() {
                                *x = tmp[p * w + q];
                            }
                        }
                    }
                } else {
                    for (q, b) in bg.chunks_mut(len).enumerate() {
                        self.factors[g * group + q].solve_in_place(b);
                    }
                }
            });
            return;
        }
        rhs.par_chunks_mut(block).enumerate().for_each(|(o, b)| {
            if uniform {
                self.factors[0].solve_interleaved(b, inner);
            } else {
                for q in 0..inner {
                    self.factors[o * inner + q].solve_strided(b, q, inner);
                }
            }
        });
    }
}

/// Factors `I - theta_dt * D` and solves every line in the operator's
/// direction. `theta_dt = 0` returns `rhs` unchanged.
pub fn solve_direction(op: &DirectionalOperator, theta_dt: f64, rhs: &GridField) -> Result<GridField> {
    if rhs.grid() != op.grid() {
        return Err(AmfwError::DimensionMismatch {
            expected: op.grid().len(),
            got: rhs.len(),
        });
    }
    let mut out = rhs.clone();
    if theta_dt != 0.0 {
        op.factor_shifted(theta_dt)?.solve_in_place(out.values_mut());
    }
    Ok(out)
}

fn apply_derivative(
    kind: DerivativeKind,
    grid: &Grid,
    dir: usize,
    v: &GridField,
    face: Option<&dyn Fn(&[f64]) -> f64>,
) -> Result<GridField> {
    if v.grid() != grid {
        return Err(AmfwError::DimensionMismatch {
            expected: grid.len(),
            got: v.len(),
        });
    }
    let op = match kind {
        DerivativeKind::Second => DirectionalOperator::second_derivative(grid, dir)?,
        DerivativeKind::First => DirectionalOperator::first_derivative(grid, dir)?,
    };
    let mut out = GridField::zeros(*grid);
    op.apply_add(1.0, v.values(), out.values_mut());
    if !grid.is_closed() {
        let face = face.ok_or(AmfwError::MissingFaceData)?;
        op.inflow_add(1.0, face, out.values_mut());
    }
    Ok(out)
}

/// Discrete `∂²/∂x_dir²`. Interior-only grids need the face values; closed grids
/// read them from `v` and return zero at the two face points of each line.
pub fn apply_second_derivative(
    grid: &Grid,
    dir: usize,
    v: &GridField,
    face: Option<&dyn Fn(&[f64]) -> f64>,
) -> Result<GridField> {
    apply_derivative(DerivativeKind::Second, grid, dir, v, face)
}

/// Discrete `∂/∂x_dir`; same conventions as [`apply_second_derivative`].
pub fn apply_first_derivative(
    grid: &Grid,
    dir: usize,
    v: &GridField,
    face: Option<&dyn Fn(&[f64]) -> f64>,
) -> Result<GridField> {
    apply_derivative(DerivativeKind::First, grid, dir, v, face)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitMode {
    /// Unknowns on interior points; Dirichlet data enters as inflow.
    Plain,
    /// Unknowns on the closed lattice; boundary points follow the tangential
    /// operator plus `beta_t - tilde-L beta`.
    Extended,
}

/// Jacobian of one split term, frozen at a point in time.
#[derive(Debug, Clone)]
pub enum TermJacobian {
    Diagonal(Vec<f64>),
    Banded(Arc<DirectionalOperator>),
}

/// The directional splitting `F = F_0 + F_1 + ... + F_d` of a problem on a grid.
pub struct SplitSystem<'p> {
    problem: &'p dyn PdeProblem,
    grid: Grid,
    mode: SplitMode,
    boundary: Vec<usize>,
    boundary_x: Vec<Coords>,
    ops: Mutex<Vec<Option<Arc<DirectionalOperator>>>>,
    tangential: Mutex<Option<Arc<BoundaryOperator>>>,
    analytic_coef_dt: bool,
}

/// Rows of a sparse operator on the boundary points, compact indexing.
struct BoundaryOperator {
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl BoundaryOperator {
    /// `out -= T v`; every row of `T` sums to zero.
    fn sub_from(&self, v: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let r = self.row_ptr[i]..self.row_ptr[i + 1];
            *o -= self.cols[r.clone()]
                .iter()
                .zip(&self.vals[r])
                .map(|(&c, &w)| w * (v[c as usize] - v[i]))
                .sum::<f64>();
        }
    }
}

impl<'p> SplitSystem<'p> {
    pub fn new(problem: &'p dyn PdeProblem, grid: Grid, mode: SplitMode) -> Result<Self> {
        if problem.dim() != grid.dim() {
            return Err(AmfwError::DimensionMismatch {
                expected: problem.dim(),
                got: grid.dim(),
            });
        }
        match (mode, grid.is_closed()) {
            (SplitMode::Plain, true) => {
                return Err(AmfwError::ModeMismatch(
                    "plain splitting needs an interior-only grid".into(),
                ))
            }
            (SplitMode::Extended, false) => {
                return Err(AmfwError::ModeMismatch(
                    "operator extension needs a closed grid".into(),
                ))
            }
            _ => {}
        }
        let boundary = grid.boundary_offsets();
        let boundary_x = boundary.iter().map(|&f| grid.point(f)).collect();
        let x0 = [0.5; crate::grid::MAX_DIM];
        let d = grid.dim();
        let analytic_coef_dt = (0..d).all(|j| {
            problem.diffusion_dt(j, &x0[..d], 0.0).is_some()
                && problem.advection_dt(j, &x0[..d], 0.0).is_some()
        });
        Ok(Self {
            problem,
            grid,
            mode,
            boundary,
            boundary_x,
            ops: Mutex::new(vec![None; d]),
            tangential: Mutex::new(None),
            analytic_coef_dt,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn mode(&self) -> SplitMode {
        self.mode
    }

    pub fn problem(&self) -> &dyn PdeProblem {
        self.problem
    }

    pub fn terms(&self) -> usize {
        self.grid.dim() + 1
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Storage offsets of the boundary points (extended mode only).
    pub fn boundary_offsets(&self) -> &[usize] {
        &self.boundary
    }

    fn check_term(&self, term: usize) -> Result<()> {
        if term < self.terms() {
            Ok(())
        } else {
            Err(AmfwError::InvalidTerm {
                term,
                terms: self.terms(),
            })
        }
    }

    fn check_len(&self, v: &[f64]) -> Result<()> {
        if v.len() == self.len() {
            Ok(())
        } else {
            Err(AmfwError::DimensionMismatch {
                expected: self.len(),
                got: v.len(),
            })
        }
    }

    /// `D_j` at time `t`; cached when the coefficients are time-independent.
    pub fn operator(&self, dir: usize, t: f64) -> Result<Arc<DirectionalOperator>> {
        self.grid.check_dir(dir)?;
        let pb = self.problem;
        let cache = pb.coefficients_time_independent();
        if cache {
            if let Some(op) = &self.ops.lock().expect("operator cache")[dir] {
                return Ok(op.clone());
            }
        }
        let op = Arc::new(DirectionalOperator::assemble(
            &self.grid,
            dir,
            t,
            pb.coefficients_space_independent(),
            |x| (pb.diffusion(dir, x, t), pb.advection(dir, x, t)),
        )?);
        if cache {
            self.ops.lock().expect("operator cache")[dir] = Some(op.clone());
        }
        Ok(op)
    }

    /// `∂D_j/∂t` assembled from the supplied coefficient derivatives.
    fn operator_dt(&self, dir: usize, t: f64) -> Result<DirectionalOperator> {
        let pb = self.problem;
        DirectionalOperator::assemble(
            &self.grid,
            dir,
            t,
            pb.coefficients_space_independent(),
            |x| {
                (
                    pb.diffusion_dt(dir, x, t).unwrap_or(0.0),
                    pb.advection_dt(dir, x, t).unwrap_or(0.0),
                )
            },
        )
    }

    /// `f` at every boundary point, in the order of `boundary_offsets`.
    fn boundary_values(&self, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
        let d = self.grid.dim();
        self.boundary_x.iter().map(|x| f(&x[..d])).collect()
    }

    /// Sum of the directional operators (or their time derivatives) restricted
    /// to the boundary points; cached when the coefficients are time-independent.
    fn tangential(&self, t: f64, dt_ops: bool) -> Result<Arc<BoundaryOperator>> {
        let cache = !dt_ops && self.problem.coefficients_time_independent();
        if cache {
            if let Some(op) = &*self.tangential.lock().expect("tangential cache") {
                return Ok(op.clone());
            }
        }
        let mut pos = vec![u32::MAX; self.len()];
        for (i, &b) in self.boundary.iter().enumerate() {
            pos[b] = i as u32;
        }
        let ops = (0..self.grid.dim())
            .map(|dir| {
                if dt_ops {
                    self.operator_dt(dir, t).map(Arc::new)
                } else {
                    self.operator(dir, t)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let mut row_ptr = Vec::with_capacity(self.boundary.len() + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for &b in &self.boundary {
            for op in &ops {
                for (off, w) in op.row_entries(b) {
                    debug_assert!(pos[off] != u32::MAX, "tangential stencil left the boundary");
                    cols.push(pos[off]);
                    vals.push(w);
                }
            }
            row_ptr.push(cols.len());
        }
        let op = Arc::new(BoundaryOperator { row_ptr, cols, vals });
        if cache {
            *self.tangential.lock().expect("tangential cache") = Some(op.clone());
        }
        Ok(op)
    }

    /// Evaluates `F_term(t, v)` into `out` (overwriting).
    pub fn term(&self, term: usize, t: f64, v: &[f64], out: &mut [f64]) -> Result<()> {
        self.check_term(term)?;
        self.check_len(v)?;
        out.iter_mut().for_each(|o| *o = 0.0);
        if term == 0 {
            self.reaction_term(t, v, out)
        } else {
            self.add_directional(term - 1, t, v, out)
        }
    }

    fn reaction_term(&self, t: f64, v: &[f64], out: &mut [f64]) -> Result<()> {
        let pb = self.problem;
        if pb.has_reaction() {
            pb.reaction_field(&self.grid, t, v, out);
        }
        if self.mode == SplitMode::Extended {
            let mut rt = self.boundary_values(|x| pb.boundary_dt_or_fd(x, t));
            let beta = self.boundary_values(|x| pb.boundary(x, t));
            self.tangential(t, false)?.sub_from(&beta, &mut rt);
            for (&b, r) in self.boundary.iter().zip(rt) {
                out[b] = r;
            }
        }
        Ok(())
    }

    fn add_directional(&self, dir: usize, t: f64, v: &[f64], out: &mut [f64]) -> Result<()> {
        let op = self.operator(dir, t)?;
        op.apply_add(1.0, v, out);
        if self.mode == SplitMode::Plain && !self.problem.homogeneous_boundary() {
            op.inflow_add(1.0, |x| self.problem.boundary(x, t), out);
        }
        Ok(())
    }

    /// `F(t, v) = sum_j F_j(t, v)` into `out` (overwriting).
    pub fn rhs(&self, t: f64, v: &[f64], out: &mut [f64]) -> Result<()> {
        self.check_len(v)?;
        out.iter_mut().for_each(|o| *o = 0.0);
        self.reaction_term(t, v, out)?;
        for dir in 0..self.grid.dim() {
            self.add_directional(dir, t, v, out)?;
        }
        Ok(())
    }

    pub fn rhs_field(&self, t: f64, v: &GridField) -> Result<GridField> {
        let mut out = GridField::zeros(self.grid);
        self.rhs(t, v.values(), out.values_mut())?;
        Ok(out)
    }

    /// `D_term = ∂F_term/∂V` at `(t, v)`.
    pub fn jacobian(&self, term: usize, t: f64, v: &[f64]) -> Result<TermJacobian> {
        self.check_term(term)?;
        self.check_len(v)?;
        if term > 0 {
            return Ok(TermJacobian::Banded(self.operator(term - 1, t)?));
        }
        let mut diag = vec![0.0; self.len()];
        if self.problem.has_reaction() {
            self.problem.reaction_du_field(&self.grid, t, v, &mut diag);
        }
        for &b in &self.boundary {
            diag[b] = 0.0;
        }
        Ok(TermJacobian::Diagonal(diag))
    }

    /// `∂F_term/∂t` at `(t, v)`, or `None` when it vanishes identically.
    pub fn time_derivative(&self, term: usize, t: f64, v: &[f64]) -> Result<Option<Vec<f64>>> {
        self.check_term(term)?;
        self.check_len(v)?;
        let pb = self.problem;
        let mut out = vec![0.0; self.len()];
        if term == 0 {
            let mut any = false;
            if pb.has_reaction() {
                pb.reaction_dt_field(&self.grid, t, v, &mut out);
                any = true;
            }
            if self.mode == SplitMode::Extended {
                let mut rtt = self.boundary_values(|x| pb.boundary_dtt_or_fd(x, t));
                let bt = self.boundary_values(|x| pb.boundary_dt_or_fd(x, t));
                self.tangential(t, false)?.sub_from(&bt, &mut rtt);
                if !pb.coefficients_time_independent() {
                    let beta = self.boundary_values(|x| pb.boundary(x, t));
                    if self.analytic_coef_dt {
                        self.tangential(t, true)?.sub_from(&beta, &mut rtt);
                    } else {
                        // only the coefficient part is differenced here
                        let e = time_fd_step(t);
                        let mut plus = vec![0.0; beta.len()];
                        let mut minus = vec![0.0; beta.len()];
                        self.tangential(t + e, false)?.sub_from(&beta, &mut plus);
                        self.tangential(t - e, false)?.sub_from(&beta, &mut minus);
                        for ((r, p), m) in rtt.iter_mut().zip(&plus).zip(&minus) {
                            *r += (p - m) / (2.0 * e);
                        }
                    }
                }
                for (&b, r) in self.boundary.iter().zip(rtt) {
                    out[b] = r;
                }
                any = true;
            }
            return Ok(any.then_some(out));
        }
        let dir = term - 1;
        let plain_inflow = self.mode == SplitMode::Plain && !pb.homogeneous_boundary();
        if !pb.coefficients_time_independent() && !self.analytic_coef_dt {
            let e = time_fd_step(t);
            let mut plus = vec![0.0; self.len()];
            let mut minus = vec![0.0; self.len()];
            self.term(term, t + e, v, &mut plus)?;
            self.term(term, t - e, v, &mut minus)?;
            for ((o, p), m) in out.iter_mut().zip(&plus).zip(&minus) {
                *o = (p - m) / (2.0 * e);
            }
            return Ok(Some(out));
        }
        let mut any = false;
        if !pb.coefficients_time_independent() {
            let opt = self.operator_dt(dir, t)?;
            opt.apply_add(1.0, v, &mut out);
            if plain_inflow {
                opt.inflow_add(1.0, |x| pb.boundary(x, t), &mut out);
            }
            any = true;
        }
        if plain_inflow {
            let op = self.operator(dir, t)?;
            op.inflow_add(1.0, |x| pb.boundary_dt_or_fd(x, t), &mut out);
            any = true;
        }
        Ok(any.then_some(out))
    }

    /// Initial state: `u_0` at interior points and `beta(., 0)` on the boundary.
    pub fn initial_state(&self) -> Vec<f64> {
        let d = self.grid.dim();
        let pb = self.problem;
        self.grid
            .points()
            .map(|(_, idx, x)| match self.grid.classify_unchecked(&idx) {
                PointClass::Interior => pb.initial(&x[..d]),
                PointClass::Boundary(_) => pb.boundary(&x[..d], 0.0),
            })
            .collect()
    }

    /// Overwrites the boundary entries with `beta(., t)`.
    pub fn project(&self, t: f64, v: &mut [f64]) {
        let d = self.grid.dim();
        for (&b, x) in self.boundary.iter().zip(&self.boundary_x) {
            v[b] = self.problem.boundary(&x[..d], t);
        }
    }
}
