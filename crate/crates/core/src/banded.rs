//! Pentadiagonal line systems and their pivoted LU factorizations.
//!
//! A [`BandedLineMatrix`] stores row `i` as the window `[A[i][i-2], .., A[i][i+2]]`;
//! entries that fall outside the matrix are ignored. Partial pivoting lets
//! the upper factor grow to four superdiagonals, so every factored row is a
//! window of five entries starting at the diagonal.

use crate::error::{AmfwError, Result};

/// Bandwidth on each side of the diagonal.
pub const HALF_BAND: usize = 2;
/// Width of a stored row.
pub const BAND_WIDTH: usize = 2 * HALF_BAND + 1;
/// Pivots with magnitude below this are treated as zero.
pub const PIVOT_TOL: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq)]
pub struct BandedLineMatrix {
    rows: Vec<[f64; BAND_WIDTH]>,
}

impl BandedLineMatrix {
    pub fn zeros(m: usize) -> Self {
        Self {
            rows: vec![[0.0; BAND_WIDTH]; m],
        }
    }

    pub fn identity(m: usize) -> Self {
        let mut a = Self::zeros(m);
        for r in &mut a.rows {
            r[HALF_BAND] = 1.0;
        }
        a
    }

    /// Takes ownership of row windows; out-of-matrix entries are zeroed.
    pub fn from_rows(mut rows: Vec<[f64; BAND_WIDTH]>) -> Self {
        let m = rows.len();
        for (i, r) in rows.iter_mut().enumerate() {
            for (k, v) in r.iter_mut().enumerate() {
                let col = i as isize + k as isize - HALF_BAND as isize;
                if col < 0 || col >= m as isize {
                    *v = 0.0;
                }
            }
        }
        Self { rows }
    }

    /// `I - alpha * D` for a band `D`.
    pub fn shifted_identity(alpha: f64, d: &[[f64; BAND_WIDTH]]) -> Self {
        let rows = d
            .iter()
            .map(|r| {
                let mut out = [0.0; BAND_WIDTH];
                for k in 0..BAND_WIDTH {
                    out[k] = -alpha * r[k];
                }
                out[HALF_BAND] += 1.0;
                out
            })
            .collect();
        Self::from_rows(rows)
    }

    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[[f64; BAND_WIDTH]] {
        &self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let k = j as isize - i as isize + HALF_BAND as isize;
        if (0..BAND_WIDTH as isize).contains(&k) {
            self.rows[i][k as usize]
        } else {
            0.0
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = j as isize - i as isize + HALF_BAND as isize;
        assert!(
            (0..BAND_WIDTH as isize).contains(&k) && j < self.size(),
            "entry ({i},{j}) outside the band"
        );
        self.rows[i][k as usize] = v;
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let m = self.size();
        (0..m)
            .map(|i| (0..m).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// `y = A x`
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        let m = self.size();
        for i in 0..m {
            let mut s = 0.0;
            for k in 0..BAND_WIDTH {
                let col = i as isize + k as isize - HALF_BAND as isize;
                if col >= 0 && (col as usize) < m {
                    s += self.rows[i][k] * x[col as usize];
                }
            }
            y[i] = s;
        }
    }

    pub fn norm_inf(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn factorize(&self) -> Result<BandedFactorization> {
        BandedFactorization::new(self)
    }
}

/// `P A = L U` with `L` unit lower with two subdiagonals and `U` upper with
/// four superdiagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedFactorization {
    /// `upper[k][c]` is `U[k][k + c]`.
    upper: Vec<[f64; BAND_WIDTH]>,
    /// Multipliers eliminating the two rows below pivot `k`.
    lower: Vec<[f64; HALF_BAND]>,
    /// Row `k` was swapped with row `k + pivot[k]`.
    pivot: Vec<u8>,
}

impl BandedFactorization {
    pub fn new(a: &BandedLineMatrix) -> Result<Self> {
        let m = a.size();
        if let Some(row) = a.rows.iter().position(|r| r.iter().all(|&v| v == 0.0)) {
            return Err(AmfwError::Singular { row });
        }
        // Active rows k, k+1, k+2 restricted to columns k..k+4.
        let load = |i: usize| -> [f64; BAND_WIDTH] {
            if i < m {
                a.rows[i]
            } else {
                [0.0; BAND_WIDTH]
            }
        };
        let mut active = [[0.0; BAND_WIDTH]; 3];
        for (r, row) in active.iter_mut().enumerate() {
            if r < m {
                // row r covers columns r-2..r+2; keep the part at columns 0..4
                for c in 0..BAND_WIDTH {
                    let k = c as isize - r as isize + HALF_BAND as isize;
                    if (0..BAND_WIDTH as isize).contains(&k) {
                        row[c] = a.rows[r][k as usize];
                    }
                }
            }
        }
        let mut upper = Vec::with_capacity(m);
        let mut lower = Vec::with_capacity(m);
        let mut pivot = Vec::with_capacity(m);
        for k in 0..m {
            let cand = (m - k).min(3);
            let mut p = 0;
            for r in 1..cand {
                if active[r][0].abs() > active[p][0].abs() {
                    p = r;
                }
            }
            active.swap(0, p);
            let piv = active[0][0];
            if piv.abs() < PIVOT_TOL || !piv.is_finite() {
                return Err(AmfwError::Singular { row: k });
            }
            let mut l = [0.0; HALF_BAND];
            for r in 1..cand {
                let f = active[r][0] / piv;
                l[r - 1] = f;
                if f != 0.0 {
                    for c in 1..BAND_WIDTH {
                        active[r][c] -= f * active[0][c];
                    }
                }
            }
            upper.push(active[0]);
            lower.push(l);
            pivot.push(p as u8);
            // Shift the window one column to the right and bring in row k+3,
            // whose stored band covers exactly columns k+1..k+5.
            for r in 0..2 {
                let mut w = [0.0; BAND_WIDTH];
                w[..BAND_WIDTH - 1].copy_from_slice(&active[r + 1][1..]);
                active[r] = w;
            }
            active[2] = load(k + 3);
        }
        Ok(Self {
            upper,
            lower,
            pivot,
        })
    }

    pub fn size(&self) -> usize {
        self.upper.len()
    }

    /// Overwrites `b` with `A^{-1} b`.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let m = self.size();
        debug_assert_eq!(b.len(), m);
        let full = m.saturating_sub(BAND_WIDTH - 1);
        for k in 0..m {
            let p = self.pivot[k] as usize;
            if p != 0 {
                b.swap(k, k + p);
            }
            let bk = b[k];
            let l = &self.lower[k];
            if k + 2 < m {
                b[k + 1] -= l[0] * bk;
                b[k + 2] -= l[1] * bk;
            } else if k + 1 < m {
                b[k + 1] -= l[0] * bk;
            }
        }
        for k in (full..m).rev() {
            let u = &self.upper[k];
            let mut s = b[k];
            for c in 1..BAND_WIDTH {
                if k + c < m {
                    s -= u[c] * b[k + c];
                }
            }
            b[k] = s / u[0];
        }
        for k in (0..full).rev() {
            let u = &self.upper[k];
            let w = &b[k..k + BAND_WIDTH];
            let s = w[0] - u[1] * w[1] - u[2] * w[2] - u[3] * w[3] - u[4] * w[4];
            b[k] = s / u[0];
        }
    }

    /// Solves for a strided vector `b[start + p * stride]`, `p < m`.
    pub fn solve_strided(&self, b: &mut [f64], start: usize, stride: usize) {
        let m = self.size();
        let at = |p: usize| start + p * stride;
        for k in 0..m {
            let p = self.pivot[k] as usize;
            if p != 0 {
                b.swap(at(k), at(k + p));
            }
            let bk = b[at(k)];
            let l = &self.lower[k];
            if k + 1 < m {
                b[at(k + 1)] -= l[0] * bk;
            }
            if k + 2 < m {
                b[at(k + 2)] -= l[1] * bk;
            }
        }
        for k in (0..m).rev() {
            let u = &self.upper[k];
            let mut s = b[at(k)];
            for c in 1..BAND_WIDTH {
                if k + c < m {
                    s -= u[c] * b[at(k + c)];
                }
            }
            b[at(k)] = s / u[0];
        }
    }

    /// Solves `inner` interleaved systems at once: entry `p` of system `q`
    /// sits at `b[p * inner + q]`.
    pub fn solve_interleaved(&self, b: &mut [f64], inner: usize) {
        let m = self.size();
        debug_assert_eq!(b.len(), m * inner);
        for k in 0..m {
            let p = self.pivot[k] as usize;
            if p != 0 {
                let (lo, hi) = b.split_at_mut((k + p) * inner);
                lo[k * inner..(k + 1) * inner].swap_with_slice(&mut hi[..inner]);
            }
            let l = self.lower[k];
            for (r, &f) in l.iter().enumerate() {
                let row = k + 1 + r;
                if row < m && f != 0.0 {
                    let (src, dst) = b.split_at_mut(row * inner);
                    let src = &src[k * inner..(k + 1) * inner];
                    for (d, s) in dst[..inner].iter_mut().zip(src) {
                        *d -= f * s;
                    }
                }
            }
        }
        for k in (0..m).rev() {
            let u = self.upper[k];
            let (head, tail) = b.split_at_mut((k + 1) * inner);
            let row = &mut head[k * inner..];
            for c in 1..BAND_WIDTH {
                if k + c < m && u[c] != 0.0 {
                    let src = &tail[(c - 1) * inner..c * inner];
                    for (d, s) in row.iter_mut().zip(src) {
                        *d -= u[c] * s;
                    }
                }
            }
            for d in row.iter_mut() {
                *d /= u[0];
            }
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}
