//! Discrete norms over interior points and global errors.

use crate::error::{AmfwError, Result};
use crate::grid::GridField;
use crate::problem::PdeProblem;

/// `sqrt(prod dx_l * sum V^2)` over the interior points, summed in storage order.
pub fn weighted_l2_norm(v: &GridField) -> f64 {
    let cell: f64 = v.grid().spacings().iter().product();
    let sum: f64 = v.interior_values().iter().map(|x| x * x).sum();
    (cell * sum).sqrt()
}

/// `max |V|` over the interior points.
pub fn max_norm(v: &GridField) -> f64 {
    v.interior_values().iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Exact solution sampled at the stored points of `like`'s grid.
pub fn exact_field(problem: &dyn PdeProblem, like: &GridField, t: f64) -> Result<GridField> {
    let grid = *like.grid();
    let d = grid.dim();
    let mut values = Vec::with_capacity(grid.len());
    for (_, _, x) in grid.points() {
        values.push(problem.exact(&x[..d], t).ok_or(AmfwError::MissingExactSolution)?);
    }
    GridField::from_vec(grid, values)
}

/// `(‖u(t) - V‖_2, ‖u(t) - V‖_∞)` over the interior points.
pub fn global_error(problem: &dyn PdeProblem, v: &GridField, t: f64) -> Result<(f64, f64)> {
    let err = exact_field(problem, v, t)?.sub(v);
    Ok((weighted_l2_norm(&err), max_norm(&err)))
}
