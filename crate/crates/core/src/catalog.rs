//! Test problems with known solutions.

use crate::grid::Grid;
use crate::problem::PdeProblem;

/// Linear 3D heat equation with a source, solution
/// `u = 64 e^t prod x_j (1 - x_j) + C e^t sum (x_j + 1/(j+2))^2` (`j` from 1).
/// Each factor has degree at most 3 per variable, so the semidiscretization
/// commits no spatial error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Problem1 {
    pub c: f64,
}

const P1_SHIFTS: [f64; 3] = [1.0 / 3.0, 1.0 / 4.0, 1.0 / 5.0];

impl Problem1 {
    pub fn new(c: f64) -> Self {
        Self { c }
    }

    pub fn solution(&self, x: &[f64], t: f64) -> f64 {
        let et = t.exp();
        let bubble: f64 = x.iter().map(|&xi| xi * (1.0 - xi)).product();
        let shift: f64 = x
            .iter()
            .zip(P1_SHIFTS)
            .map(|(&xi, s)| (xi + s) * (xi + s))
            .sum();
        64.0 * et * bubble + self.c * et * shift
    }

    /// `sum_j ∂²u/∂x_j²`.
    pub fn laplacian(&self, x: &[f64], t: f64) -> f64 {
        let et = t.exp();
        (0..3)
            .map(|j| {
                let others: f64 = (0..3)
                    .filter(|&i| i != j)
                    .map(|i| x[i] * (1.0 - x[i]))
                    .product();
                -128.0 * et * others + 2.0 * self.c * et
            })
            .sum()
    }
}

impl PdeProblem for Problem1 {
    fn name(&self) -> String {
        format!("problem1(C={})", self.c)
    }

    fn dim(&self) -> usize {
        3
    }

    fn coefficients_time_independent(&self) -> bool {
        true
    }

    fn coefficients_space_independent(&self) -> bool {
        true
    }

    fn diffusion_dt(&self, _dir: usize, _x: &[f64], _t: f64) -> Option<f64> {
        Some(0.0)
    }

    fn advection_dt(&self, _dir: usize, _x: &[f64], _t: f64) -> Option<f64> {
        Some(0.0)
    }

    /// Source `u_t - Δu` evaluated from the exact solution; independent of `u`.
    fn reaction(&self, x: &[f64], t: f64, _u: f64) -> f64 {
        self.solution(x, t) - self.laplacian(x, t)
    }

    fn reaction_du(&self, _x: &[f64], _t: f64, _u: f64) -> Option<f64> {
        Some(0.0)
    }

    fn reaction_dt(&self, x: &[f64], t: f64, u: f64) -> Option<f64> {
        Some(self.reaction(x, t, u))
    }

    fn boundary(&self, x: &[f64], t: f64) -> f64 {
        self.solution(x, t)
    }

    fn boundary_dt(&self, x: &[f64], t: f64) -> Option<f64> {
        Some(self.solution(x, t))
    }

    fn boundary_dtt(&self, x: &[f64], t: f64) -> Option<f64> {
        Some(self.solution(x, t))
    }

    fn homogeneous_boundary(&self) -> bool {
        self.c == 0.0
    }

    fn initial(&self, x: &[f64]) -> f64 {
        self.solution(x, 0.0)
    }

    fn exact(&self, x: &[f64], t: f64) -> Option<f64> {
        Some(self.solution(x, t))
    }

    fn has_exact(&self) -> bool {
        true
    }

    fn exact_dt(&self, x: &[f64], t: f64) -> Option<f64> {
        Some(self.solution(x, t))
    }
}

/// Travelling front `u = 1 / (1 + exp(sum x_j - t))` and its time derivatives.
fn front(x: &[f64], t: f64) -> f64 {
    1.0 / (1.0 + (x.iter().sum::<f64>() - t).exp())
}

fn front_dt(u: f64) -> f64 {
    u * (1.0 - u)
}

fn front_dtt(u: f64) -> f64 {
    (1.0 - 2.0 * u) * u * (1.0 - u)
}

macro_rules! front_problem {
    ($ty:ident, $name:literal, $dim:literal, $r:expr, $ru:expr) => {
        #[derive(Debug, Clone, Copy, Default, PartialEq)]
        pub struct $ty;

        impl $ty {
            pub fn solution(&self, x: &[f64], t: f64) -> f64 {
                front(x, t)
            }
        }

        impl PdeProblem for $ty {
            fn name(&self) -> String {
                $name.into()
            }

            fn dim(&self) -> usize {
                $dim
            }

            fn coefficients_time_independent(&self) -> bool {
                true
            }

            fn coefficients_space_independent(&self) -> bool {
                true
            }

            fn diffusion_dt(&self, _dir: usize, _x: &[f64], _t: f64) -> Option<f64> {
                Some(0.0)
            }

            fn advection_dt(&self, _dir: usize, _x: &[f64], _t: f64) -> Option<f64> {
                Some(0.0)
            }

            fn reaction(&self, _x: &[f64], _t: f64, u: f64) -> f64 {
                let r: fn(f64) -> f64 = $r;
                r(u)
            }

            fn reaction_du(&self, _x: &[f64], _t: f64, u: f64) -> Option<f64> {
                let ru: fn(f64) -> f64 = $ru;
                Some(ru(u))
            }

            fn reaction_dt(&self, _x: &[f64], _t: f64, _u: f64) -> Option<f64> {
                Some(0.0)
            }

            fn reaction_field(&self, _grid: &Grid, _t: f64, u: &[f64], out: &mut [f64]) {
                let r: fn(f64) -> f64 = $r;
                out.iter_mut().zip(u).for_each(|(o, &v)| *o = r(v));
            }

            fn reaction_du_field(&self, _grid: &Grid, _t: f64, u: &[f64], out: &mut [f64]) {
                let ru: fn(f64) -> f64 = $ru;
                out.iter_mut().zip(u).for_each(|(o, &v)| *o = ru(v));
            }

            fn reaction_dt_field(&self, _grid: &Grid, _t: f64, _u: &[f64], out: &mut [f64]) {
                out.iter_mut().for_each(|o| *o = 0.0);
            }

            fn boundary(&self, x: &[f64], t: f64) -> f64 {
                front(x, t)
            }

            fn boundary_dt(&self, x: &[f64], t: f64) -> Option<f64> {
                Some(front_dt(front(x, t)))
            }

            fn boundary_dtt(&self, x: &[f64], t: f64) -> Option<f64> {
                Some(front_dtt(front(x, t)))
            }

            fn initial(&self, x: &[f64]) -> f64 {
                front(x, 0.0)
            }

            fn exact(&self, x: &[f64], t: f64) -> Option<f64> {
                Some(front(x, t))
            }

            fn has_exact(&self) -> bool {
                true
            }

            fn exact_dt(&self, x: &[f64], t: f64) -> Option<f64> {
                Some(front_dt(front(x, t)))
            }
        }
    };
}

front_problem!(
    Problem2,
    "problem2",
    2,
    |u| u * (1.0 - u) * (4.0 * u - 1.0),
    |u| -12.0 * u * u + 10.0 * u - 1.0
);

front_problem!(
    Problem3,
    "problem3",
    3,
    |u| 2.0 * u * (1.0 - u) * (3.0 * u - 1.0),
    |u| -18.0 * u * u + 16.0 * u - 2.0
);

/// Catalog lookup by id (`problem1`, `problem2`, `problem3`, or `1`..`3`).
/// `c` is only used by Problem 1.
pub fn by_id(id: &str, c: f64) -> Option<Box<dyn PdeProblem + Send>> {
    match id.trim().to_ascii_lowercase().as_str() {
        "problem1" | "1" | "p1" => Some(Box::new(Problem1::new(c))),
        "problem2" | "2" | "p2" => Some(Box::new(Problem2)),
        "problem3" | "3" | "p3" => Some(Box::new(Problem3)),
        _ => None,
    }
}

pub const PROBLEM_IDS: [&str; 3] = ["problem1", "problem2", "problem3"];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn problem2_reaction_jacobian_at_zero() {
        assert_eq!(Problem2.reaction_du(&[0.0, 0.0], 0.0, 0.0), Some(-1.0));
        let e = 1e-6;
        let fd = (Problem2.reaction(&[0.0; 2], 0.0, e) - Problem2.reaction(&[0.0; 2], 0.0, -e)) / (2.0 * e);
        assert!((fd + 1.0).abs() < 1e-9);
    }

    #[test]
    fn problem1_boundary_vanishes_for_c_zero() {
        let p = Problem1::new(0.0);
        assert_eq!(p.boundary(&[0.0, 0.3, 0.7], 0.5), 0.0);
        assert_eq!(p.boundary(&[0.2, 1.0, 0.7], 0.5), 0.0);
    }

    #[test]
    fn lookup() {
        assert_eq!(by_id("problem3", 0.0).unwrap().dim(), 3);
        assert_eq!(by_id("P2", 0.0).unwrap().dim(), 2);
        assert!(by_id("problem4", 0.0).is_none());
    }
}
