//! Stability function of AMF-W methods on the split scalar test equation
//! `y' = (λ_1 + ... + λ_d) y`:
//!
//! `R(z_1, .., z_d) = 1 + z bᵀ(Π I - L - z A)^{-1} 1`, `z = sum z_j`,
//! `Π = prod (1 - θ z_j)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::amfw::Tableau;
use crate::error::{AmfwError, Result};

pub fn eval_r(tab: &Tableau, z: &[Complex64]) -> Result<Complex64> {
    let s = tab.stages();
    let zsum: Complex64 = z.iter().sum();
    let pi: Complex64 = z
        .iter()
        .map(|&zj| Complex64::new(1.0, 0.0) - tab.theta() * zj)
        .product();
    let m = DMatrix::<Complex64>::from_fn(s, s, |i, j| {
        let diag = if i == j { pi } else { Complex64::new(0.0, 0.0) };
        diag - tab.l()[i][j] - zsum * tab.a()[i][j]
    });
    let ones = DVector::<Complex64>::from_element(s, Complex64::new(1.0, 0.0));
    let y = m.lu().solve(&ones).ok_or(AmfwError::Singular { row: 0 })?;
    let by: Complex64 = tab.b().iter().zip(y.iter()).map(|(b, v)| *b * v).sum();
    Ok(Complex64::new(1.0, 0.0) + zsum * by)
}

/// Real arguments.
pub fn eval_r_real(tab: &Tableau, x: &[f64]) -> Result<f64> {
    let z: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    Ok(eval_r(tab, &z)?.re)
}

/// One evaluated sample of the boundedness check.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilitySample {
    pub x: Vec<f64>,
    pub r: f64,
    /// `(x_1 + .. + x_d) / prod (1 - θ x_j)`, negative on the sampled orthant.
    pub g: f64,
    /// `1 + C g - R` for the trial constant; negative means violation.
    pub upper_gap: f64,
    /// `R + 1`; negative means violation.
    pub lower_gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub method: String,
    pub dim: usize,
    pub c_trial: f64,
    pub samples: Vec<StabilitySample>,
    /// `max (R - 1 - C g)` over the samples.
    pub max_upper_violation: f64,
    /// `min (R + 1)` over the samples.
    pub min_lower_margin: f64,
    /// Fraction of samples satisfying both inequalities with `c_trial`.
    pub satisfied_fraction: f64,
    /// Largest `C` for which the upper bound holds on every sample,
    /// `min (1 - R) / |g|`. The condition needs some `C > 0`.
    pub c_max: f64,
}

impl StabilityReport {
    pub fn lower_bound_holds(&self) -> bool {
        self.min_lower_margin >= 0.0
    }

    pub fn upper_bound_holds(&self) -> bool {
        self.max_upper_violation <= 0.0
    }

    /// Both bounds hold with some positive constant.
    pub fn condition_holds(&self) -> bool {
        self.lower_bound_holds() && self.c_max > 0.0
    }
}

/// Magnitude range of the sampled arguments, `x_j = -10^u`.
pub const SAMPLE_LOG10_RANGE: (f64, f64) = (-4.0, 8.0);

/// Samples `x_j = -10^u`, `u` uniform in [`SAMPLE_LOG10_RANGE`], and checks
/// `-1 <= R(x) <= 1 + C (x_1 + .. + x_d) / prod (1 - θ x_j)`.
pub fn check_theorem1_condition(
    tab: &Tableau,
    dim: usize,
    samples: usize,
    c_trial: f64,
    seed: u64,
) -> Result<StabilityReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = SAMPLE_LOG10_RANGE;
    let points: Vec<Vec<f64>> = (0..samples.max(1))
        .map(|_| (0..dim).map(|_| -(10f64.powf(rng.gen_range(lo..=hi)))).collect())
        .collect();
    let theta = tab.theta();
    let evaluated = points
        .into_par_iter()
        .map(|x| {
            let r = eval_r_real(tab, &x)?;
            let pi: f64 = x.iter().map(|&v| 1.0 - theta * v).product();
            let g = x.iter().sum::<f64>() / pi;
            Ok(StabilitySample {
                upper_gap: 1.0 + c_trial * g - r,
                lower_gap: r + 1.0,
                x,
                r,
                g,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_upper_violation = evaluated
        .iter()
        .map(|s| -s.upper_gap)
        .fold(f64::NEG_INFINITY, f64::max);
    let min_lower_margin = evaluated.iter().map(|s| s.lower_gap).fold(f64::INFINITY, f64::min);
    let ok = evaluated
        .iter()
        .filter(|s| s.upper_gap >= 0.0 && s.lower_gap >= 0.0)
        .count();
    let c_max = evaluated
        .iter()
        .map(|s| (1.0 - s.r) / s.g.abs())
        .fold(f64::INFINITY, f64::min);
    Ok(StabilityReport {
        method: tab.name().into(),
        dim,
        c_trial,
        satisfied_fraction: ok as f64 / evaluated.len() as f64,
        samples: evaluated,
        max_upper_violation,
        min_lower_margin,
        c_max,
    })
}
