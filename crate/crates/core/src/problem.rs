//! Semilinear parabolic problems on the unit hypercube.
//!
//! `u_t = sum_j (a_j u_{x_j x_j} + b_j u_{x_j}) + r(x, t, u)` with Dirichlet data
//! `u = beta` on the boundary and `u(x, 0) = u_0(x)`.
//!
//! Optional derivatives return `None` when not supplied; callers then fall back
//! to central differences.

use crate::grid::Grid;

/// Central-difference step in `t` for time derivatives that are not supplied.
pub fn time_fd_step(t: f64) -> f64 {
    f64::EPSILON.cbrt() * t.abs().max(1.0)
}

/// Central-difference step in `u` for reaction Jacobians that are not supplied.
pub fn reaction_fd_step(u: f64) -> f64 {
    (1e-7 * u.abs()).max(1e-7)
}

pub trait PdeProblem: Sync {
    fn name(&self) -> String;

    fn dim(&self) -> usize;

    fn t_end(&self) -> f64 {
        1.0
    }

    /// `a_j(x, t)`; must stay positive.
    fn diffusion(&self, _dir: usize, _x: &[f64], _t: f64) -> f64 {
        1.0
    }

    fn diffusion_dt(&self, _dir: usize, _x: &[f64], _t: f64) -> Option<f64> {
        None
    }

    /// `b_j(x, t)`.
    fn advection(&self, _dir: usize, _x: &[f64], _t: f64) -> f64 {
        0.0
    }

    fn advection_dt(&self, _dir: usize, _x: &[f64], _t: f64) -> Option<f64> {
        None
    }

    /// `a_j` and `b_j` do not depend on `t`.
    fn coefficients_time_independent(&self) -> bool {
        false
    }

    /// `a_j` and `b_j` do not depend on `x`.
    fn coefficients_space_independent(&self) -> bool {
        false
    }

    /// `false` lets the solver skip the reaction term entirely.
    fn has_reaction(&self) -> bool {
        true
    }

    fn reaction(&self, x: &[f64], t: f64, u: f64) -> f64;

    fn reaction_du(&self, _x: &[f64], _t: f64, _u: f64) -> Option<f64> {
        None
    }

    fn reaction_dt(&self, _x: &[f64], _t: f64, _u: f64) -> Option<f64> {
        None
    }

    /// Dirichlet data `beta(x, t)` at a boundary point.
    fn boundary(&self, x: &[f64], t: f64) -> f64;

    fn boundary_dt(&self, _x: &[f64], _t: f64) -> Option<f64> {
        None
    }

    fn boundary_dtt(&self, _x: &[f64], _t: f64) -> Option<f64> {
        None
    }

    /// `beta` vanishes identically.
    fn homogeneous_boundary(&self) -> bool {
        false
    }

    fn initial(&self, x: &[f64]) -> f64;

    fn exact(&self, _x: &[f64], _t: f64) -> Option<f64> {
        None
    }

    fn has_exact(&self) -> bool {
        false
    }

    /// `∂u/∂t` of the exact solution.
    fn exact_dt(&self, _x: &[f64], _t: f64) -> Option<f64> {
        None
    }

    /// Reaction at every stored point of `grid`. Wrappers that need whole-grid
    /// information override this; the default evaluates pointwise.
    fn reaction_field(&self, grid: &Grid, t: f64, u: &[f64], out: &mut [f64]) {
        let d = grid.dim();
        for ((_, _, x), (o, &v)) in grid.points().zip(out.iter_mut().zip(u)) {
            *o = self.reaction(&x[..d], t, v);
        }
    }

    /// `∂r/∂u` at every stored point.
    fn reaction_du_field(&self, grid: &Grid, t: f64, u: &[f64], out: &mut [f64]) {
        let d = grid.dim();
        for ((_, _, x), (o, &v)) in grid.points().zip(out.iter_mut().zip(u)) {
            let x = &x[..d];
            *o = self.reaction_du(x, t, v).unwrap_or_else(|| {
                let e = reaction_fd_step(v);
                (self.reaction(x, t, v + e) - self.reaction(x, t, v - e)) / (2.0 * e)
            });
        }
    }

    /// `∂r/∂t` at every stored point.
    fn reaction_dt_field(&self, grid: &Grid, t: f64, u: &[f64], out: &mut [f64]) {
        let d = grid.dim();
        let e = time_fd_step(t);
        for ((_, _, x), (o, &v)) in grid.points().zip(out.iter_mut().zip(u)) {
            let x = &x[..d];
            *o = self.reaction_dt(x, t, v).unwrap_or_else(|| {
                (self.reaction(x, t + e, v) - self.reaction(x, t - e, v)) / (2.0 * e)
            });
        }
    }

    fn boundary_dt_or_fd(&self, x: &[f64], t: f64) -> f64 {
        self.boundary_dt(x, t).unwrap_or_else(|| {
            let e = time_fd_step(t);
            (self.boundary(x, t + e) - self.boundary(x, t - e)) / (2.0 * e)
        })
    }

    fn boundary_dtt_or_fd(&self, x: &[f64], t: f64) -> f64 {
        self.boundary_dtt(x, t).unwrap_or_else(|| {
            if self.boundary_dt(x, t).is_some() {
                let e = time_fd_step(t);
                return (self.boundary_dt_or_fd(x, t + e) - self.boundary_dt_or_fd(x, t - e)) / (2.0 * e);
            }
            // fourth-order five-point second difference of the data itself
            let e = f64::EPSILON.powf(1.0 / 6.0) * t.abs().max(1.0);
            let b = |s: f64| self.boundary(x, t + s * e);
            (-b(2.0) + 16.0 * b(1.0) - 30.0 * b(0.0) + 16.0 * b(-1.0) - b(-2.0)) / (12.0 * e * e)
        })
    }
}
