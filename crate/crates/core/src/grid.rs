//! Tensor-product grids of the unit hypercube.
//!
//! Nodes sit at `x_l = j_l * dx_l` with `dx_l = 1 / (1 + n_l)`. Lattice indices
//! `j_l` run over `1..=n_l` for interior points and reach `0` and `n_l + 1` on
//! the faces. A grid either stores the interior points only or the full closed
//! lattice (corners and edges included).
//!
//! Storage order is lexicographic with the last direction fastest, so lines in
//! the last direction are contiguous and a line in direction `l` has stride
//! `prod_{k > l} extent_k`.

use std::ops::{Index, IndexMut};

use crate::error::{AmfwError, Result};

/// Largest supported number of space dimensions.
pub const MAX_DIM: usize = 4;

/// Smallest admissible interior node count in any direction.
pub const MIN_NODES: usize = 3;

/// Fixed-capacity coordinate tuple; only the first `dim` entries are used.
pub type Coords = [f64; MAX_DIM];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    n: [usize; MAX_DIM],
    dx: [f64; MAX_DIM],
    closed: bool,
}

/// Lattice multi-index `(j_1, ..., j_d)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    dim: usize,
    idx: [usize; MAX_DIM],
}

impl MultiIndex {
    pub fn new(idx: &[usize]) -> Self {
        assert!(
            !idx.is_empty() && idx.len() <= MAX_DIM,
            "multi-index rank must be 1..={MAX_DIM}"
        );
        let mut out = [0; MAX_DIM];
        out[..idx.len()].copy_from_slice(idx);
        Self {
            dim: idx.len(),
            idx: out,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.idx[..self.dim]
    }
}

impl Index<usize> for MultiIndex {
    type Output = usize;
    fn index(&self, l: usize) -> &usize {
        &self.as_slice()[l]
    }
}

/// A set of directions, stored as a bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct DirSet(u8);

impl DirSet {
    pub const EMPTY: DirSet = DirSet(0);

    pub fn from_dirs(dirs: &[usize]) -> Self {
        dirs.iter().fold(DirSet(0), |s, &d| s.with(d))
    }

    pub fn with(self, dir: usize) -> Self {
        DirSet(self.0 | (1 << dir))
    }

    pub fn without(self, dir: usize) -> Self {
        DirSet(self.0 & !(1 << dir))
    }

    pub fn contains(self, dir: usize) -> bool {
        self.0 & (1 << dir) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..8).filter(move |&d| self.contains(d))
    }

    pub fn bits(self) -> u8 {
        self.0
    }
}

/// Position of a lattice point relative to the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointClass {
    Interior,
    /// On the boundary; the set holds every direction `l` with `j_l` in `{0, n_l + 1}`.
    Boundary(DirSet),
}

impl Grid {
    /// Builds a grid with `n[l]` interior nodes per direction. With `closed`
    /// the boundary lattice points are stored as well.
    pub fn new(n: &[usize], closed: bool) -> Result<Self> {
        if n.is_empty() || n.len() > MAX_DIM {
            return Err(AmfwError::Sizing(format!(
                "dimension {} outside 1..={MAX_DIM}",
                n.len()
            )));
        }
        if let Some((l, &nl)) = n.iter().enumerate().find(|(_, &nl)| nl < MIN_NODES) {
            return Err(AmfwError::Sizing(format!(
                "direction {l} has {nl} interior nodes, need at least {MIN_NODES}"
            )));
        }
        let mut nn = [1; MAX_DIM];
        let mut dx = [0.0; MAX_DIM];
        for (l, &nl) in n.iter().enumerate() {
            nn[l] = nl;
            dx[l] = 1.0 / (1 + nl) as f64;
        }
        Ok(Self {
            dim: n.len(),
            n: nn,
            dx,
            closed,
        })
    }

    pub fn interior(n: &[usize]) -> Result<Self> {
        Self::new(n, false)
    }

    pub fn closed(n: &[usize]) -> Result<Self> {
        Self::new(n, true)
    }

    /// Uniform grid with spacing `h = 1/m` in every direction.
    pub fn uniform(dim: usize, m: usize, closed: bool) -> Result<Self> {
        if m < 1 + MIN_NODES {
            return Err(AmfwError::Sizing(format!(
                "h = 1/{m} leaves fewer than {MIN_NODES} interior nodes"
            )));
        }
        Self::new(&vec![m - 1; dim], closed)
    }

    /// Same node counts, other storage mode.
    pub fn with_closed(&self, closed: bool) -> Grid {
        Grid { closed, ..*self }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Interior node count in direction `l`.
    pub fn n(&self, l: usize) -> usize {
        self.n[l]
    }

    pub fn counts(&self) -> &[usize] {
        &self.n[..self.dim]
    }

    pub fn dx(&self, l: usize) -> f64 {
        self.dx[l]
    }

    pub fn spacings(&self) -> &[f64] {
        &self.dx[..self.dim]
    }

    /// Largest spacing over all directions.
    pub fn h(&self) -> f64 {
        self.spacings().iter().cloned().fold(0.0, f64::max)
    }

    /// Stored points along direction `l`.
    pub fn extent(&self, l: usize) -> usize {
        if self.closed {
            self.n[l] + 2
        } else {
            self.n[l]
        }
    }

    pub fn extents(&self) -> Vec<usize> {
        (0..self.dim).map(|l| self.extent(l)).collect()
    }

    /// Lattice index of the first stored point in each direction.
    pub fn first_lattice(&self) -> usize {
        usize::from(!self.closed)
    }

    pub fn len(&self) -> usize {
        (0..self.dim).map(|l| self.extent(l)).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn interior_len(&self) -> usize {
        self.counts().iter().product()
    }

    /// Flat-index distance between neighbours in direction `l`.
    pub fn stride(&self, l: usize) -> usize {
        ((l + 1)..self.dim).map(|k| self.extent(k)).product()
    }

    pub fn check_dir(&self, dir: usize) -> Result<()> {
        if dir < self.dim {
            Ok(())
        } else {
            Err(AmfwError::InvalidDirection {
                dir,
                dim: self.dim,
            })
        }
    }

    fn out_of_range(&self, idx: &MultiIndex) -> AmfwError {
        AmfwError::IndexOutOfRange {
            index: idx.as_slice().to_vec(),
            extents: self.extents(),
        }
    }

    pub fn contains(&self, idx: &MultiIndex) -> bool {
        let lo = self.first_lattice();
        idx.dim == self.dim
            && (0..self.dim).all(|l| idx.idx[l] >= lo && idx.idx[l] < lo + self.extent(l))
    }

    /// Storage offset of a lattice multi-index.
    pub fn flatten(&self, idx: &MultiIndex) -> Result<usize> {
        if !self.contains(idx) {
            return Err(self.out_of_range(idx));
        }
        let lo = self.first_lattice();
        Ok((0..self.dim).fold(0, |acc, l| acc * self.extent(l) + (idx.idx[l] - lo)))
    }

    /// Lattice multi-index of a storage offset.
    pub fn unflatten(&self, mut flat: usize) -> MultiIndex {
        debug_assert!(flat < self.len());
        let lo = self.first_lattice();
        let mut idx = [0; MAX_DIM];
        for l in (0..self.dim).rev() {
            let e = self.extent(l);
            idx[l] = flat % e + lo;
            flat /= e;
        }
        MultiIndex { dim: self.dim, idx }
    }

    pub fn coords(&self, idx: &MultiIndex) -> Coords {
        let mut x = [0.0; MAX_DIM];
        for l in 0..self.dim {
            x[l] = idx.idx[l] as f64 * self.dx[l];
        }
        x
    }

    pub fn point(&self, flat: usize) -> Coords {
        self.coords(&self.unflatten(flat))
    }

    pub fn classify(&self, idx: &MultiIndex) -> Result<PointClass> {
        if !self.contains(idx) {
            return Err(self.out_of_range(idx));
        }
        Ok(self.classify_unchecked(idx))
    }

    pub(crate) fn classify_unchecked(&self, idx: &MultiIndex) -> PointClass {
        let sat = (0..self.dim)
            .filter(|&l| idx.idx[l] == 0 || idx.idx[l] == self.n[l] + 1)
            .fold(DirSet::EMPTY, DirSet::with);
        if sat.is_empty() {
            PointClass::Interior
        } else {
            PointClass::Boundary(sat)
        }
    }

    /// Iterates over all stored points in storage order as `(flat, lattice index, coordinates)`.
    pub fn points(&self) -> Points<'_> {
        let lo = self.first_lattice();
        let mut end = [0; MAX_DIM];
        let mut start = [0; MAX_DIM];
        for l in 0..self.dim {
            end[l] = lo + self.extent(l);
            start[l] = lo;
        }
        Points {
            grid: self,
            flat: 0,
            len: self.len(),
            lo,
            end,
            idx: MultiIndex {
                dim: self.dim,
                idx: start,
            },
        }
    }

    /// Storage offsets of the points of `Ω_h` (all points for interior grids).
    pub fn interior_offsets(&self) -> Vec<usize> {
        if !self.closed {
            return (0..self.len()).collect();
        }
        self.points()
            .filter(|(_, idx, _)| self.classify_unchecked(idx) == PointClass::Interior)
            .map(|(f, _, _)| f)
            .collect()
    }

    /// Storage offsets of the boundary points (empty for interior grids).
    pub fn boundary_offsets(&self) -> Vec<usize> {
        if !self.closed {
            return Vec::new();
        }
        self.points()
            .filter(|(_, idx, _)| self.classify_unchecked(idx) != PointClass::Interior)
            .map(|(f, _, _)| f)
            .collect()
    }

    /// All 1D lines in direction `dir`.
    pub fn lines(&self, dir: usize) -> Result<Lines> {
        self.check_dir(dir)?;
        let len = self.extent(dir);
        let stride = self.stride(dir);
        Ok(Lines {
            outer: self.len() / (len * stride),
            inner: stride,
            len,
            next: 0,
        })
    }
}

/// Iterator over grid points; see [`Grid::points`].
pub struct Points<'g> {
    grid: &'g Grid,
    flat: usize,
    len: usize,
    lo: usize,
    end: [usize; MAX_DIM],
    idx: MultiIndex,
}

impl Iterator for Points<'_> {
    type Item = (usize, MultiIndex, Coords);

    fn next(&mut self) -> Option<Self::Item> {
        if self.flat >= self.len {
            return None;
        }
        let item = (self.flat, self.idx, self.grid.coords(&self.idx));
        self.flat += 1;
        for l in (0..self.idx.dim).rev() {
            self.idx.idx[l] += 1;
            if self.idx.idx[l] < self.end[l] {
                break;
            }
            self.idx.idx[l] = self.lo;
        }
        Some(item)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let r = self.len - self.flat;
        (r, Some(r))
    }
}

impl ExactSizeIterator for Points<'_> {}

/// One line of points along a direction: offsets `start + p * stride`, `p < len`,
/// ordered by increasing coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridLine {
    pub start: usize,
    pub stride: usize,
    pub len: usize,
}

impl GridLine {
    pub fn offset(&self, p: usize) -> usize {
        self.start + p * self.stride
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).map(move |p| self.offset(p))
    }

    pub fn gather(&self, src: &[f64], dst: &mut [f64]) {
        for (p, d) in dst.iter_mut().enumerate().take(self.len) {
            *d = src[self.start + p * self.stride];
        }
    }

    pub fn scatter(&self, src: &[f64], dst: &mut [f64]) {
        for (p, s) in src.iter().enumerate().take(self.len) {
            dst[self.start + p * self.stride] = *s;
        }
    }
}

/// Iterator over the lines of a direction. Lines are numbered block by block:
/// line `k` belongs to outer block `k / inner` and starts at
/// `(k / inner) * len * inner + k % inner`.
#[derive(Debug, Clone)]
pub struct Lines {
    outer: usize,
    inner: usize,
    len: usize,
    next: usize,
}

impl Lines {
    pub fn count_lines(&self) -> usize {
        self.outer * self.inner
    }

    pub fn points_per_line(&self) -> usize {
        self.len
    }

    pub fn line(&self, k: usize) -> GridLine {
        let (o, q) = (k / self.inner, k % self.inner);
        GridLine {
            start: o * self.len * self.inner + q,
            stride: self.inner,
            len: self.len,
        }
    }

    /// Number of contiguous storage blocks; each holds `inner` interleaved lines.
    pub fn blocks(&self) -> usize {
        self.outer
    }

    pub fn lines_per_block(&self) -> usize {
        self.inner
    }
}

impl Iterator for Lines {
    type Item = GridLine;

    fn next(&mut self) -> Option<GridLine> {
        if self.next >= self.count_lines() {
            return None;
        }
        let l = self.line(self.next);
        self.next += 1;
        Some(l)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let r = self.count_lines() - self.next;
        (r, Some(r))
    }
}

impl ExactSizeIterator for Lines {}

/// Real-valued function on the stored points of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    grid: Grid,
    values: Vec<f64>,
}

impl GridField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            values: vec![0.0; grid.len()],
            grid,
        }
    }

    pub fn from_vec(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(AmfwError::DimensionMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    /// Samples `f` at every stored point.
    pub fn from_fn(grid: Grid, mut f: impl FnMut(&[f64]) -> f64) -> Self {
        let d = grid.dim();
        let values = grid.points().map(|(_, _, x)| f(&x[..d])).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, idx: &MultiIndex) -> Result<f64> {
        Ok(self.values[self.grid.flatten(idx)?])
    }

    fn check_same_grid(&self, other: &GridField) {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
    }

    /// `self += alpha * other`
    pub fn axpy(&mut self, alpha: f64, other: &GridField) {
        self.check_same_grid(other);
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += alpha * b;
        }
    }

    pub fn scale(&mut self, alpha: f64) {
        self.values.iter_mut().for_each(|v| *v *= alpha);
    }

    pub fn add(&self, other: &GridField) -> GridField {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }

    pub fn sub(&self, other: &GridField) -> GridField {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    /// Values at the points of `Ω_h`, in storage order.
    pub fn interior_values(&self) -> Vec<f64> {
        if !self.grid.is_closed() {
            return self.values.clone();
        }
        self.grid
            .interior_offsets()
            .into_iter()
            .map(|i| self.values[i])
            .collect()
    }
}

impl Index<usize> for GridField {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

impl IndexMut<usize> for GridField {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.values[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_interior_nodes() {
        let g = Grid::interior(&[3]).unwrap();
        assert_eq!(g.len(), 3);
        assert_eq!(g.dx(0), 0.25);
        let xs: Vec<f64> = g.points().map(|(_, _, x)| x[0]).collect();
        assert_eq!(xs, vec![0.25, 0.5, 0.75]);
    }

    #[test]
    fn closed_cube_counts() {
        let g = Grid::closed(&[7, 7, 7]).unwrap();
        assert_eq!(g.len(), 729);
        assert!(g.spacings().iter().all(|&h| h == 0.125));
        let lines = g.lines(2).unwrap();
        assert_eq!(lines.count_lines(), 81);
        assert_eq!(lines.points_per_line(), 9);
    }

    #[test]
    fn anisotropic_counts() {
        let g = Grid::interior(&[3, 5]).unwrap();
        assert_eq!(g.len(), 15);
        assert_eq!(g.spacings(), &[0.25, 1.0 / 6.0]);
        let lines = g.lines(0).unwrap();
        assert_eq!(lines.count_lines(), 5);
        assert_eq!(lines.points_per_line(), 3);
    }

    #[test]
    fn rejects_small_and_bad_dims() {
        assert!(matches!(Grid::interior(&[2]), Err(AmfwError::Sizing(_))));
        assert!(matches!(Grid::interior(&[5, 2]), Err(AmfwError::Sizing(_))));
        assert!(Grid::interior(&[]).is_err());
        assert!(Grid::interior(&[3; 5]).is_err());
        assert!(Grid::interior(&[3; 4]).is_ok());
    }

    #[test]
    fn classification() {
        let g2 = Grid::closed(&[3, 3]).unwrap();
        assert_eq!(
            g2.classify(&MultiIndex::new(&[0, 2])).unwrap(),
            PointClass::Boundary(DirSet::from_dirs(&[0]))
        );
        assert_eq!(
            g2.classify(&MultiIndex::new(&[2, 2])).unwrap(),
            PointClass::Interior
        );
        let g3 = Grid::closed(&[3, 3, 3]).unwrap();
        let c = g3.classify(&MultiIndex::new(&[0, 0, 2])).unwrap();
        assert_eq!(c, PointClass::Boundary(DirSet::from_dirs(&[0, 1])));
        assert!(g3.classify(&MultiIndex::new(&[5, 0, 0])).is_err());
        // interior-only grids have no lattice index 0
        let gi = Grid::interior(&[3, 3]).unwrap();
        assert!(gi.classify(&MultiIndex::new(&[0, 1])).is_err());
    }

    #[test]
    fn single_line_in_1d() {
        let g = Grid::interior(&[9]).unwrap();
        let lines: Vec<_> = g.lines(0).unwrap().collect();
        assert_eq!(lines.len(), 1);
        assert_eq!(lines[0].indices().collect::<Vec<_>>(), (0..9).collect::<Vec<_>>());
        assert!(g.lines(1).is_err());
    }

    #[test]
    fn lines_follow_increasing_coordinate() {
        let g = Grid::closed(&[3, 4, 5]).unwrap();
        for dir in 0..3 {
            for line in g.lines(dir).unwrap() {
                let xs: Vec<f64> = line.indices().map(|i| g.point(i)[dir]).collect();
                assert!(xs.windows(2).all(|w| w[0] < w[1]));
                let x0 = g.point(line.start);
                for i in line.indices() {
                    let x = g.point(i);
                    for l in (0..3).filter(|&l| l != dir) {
                        assert_eq!(x[l], x0[l]);
                    }
                }
            }
        }
    }

    #[test]
    fn boundary_and_interior_offsets_partition() {
        let g = Grid::closed(&[3, 4]).unwrap();
        let b = g.boundary_offsets();
        let i = g.interior_offsets();
        assert_eq!(b.len() + i.len(), g.len());
        assert_eq!(i.len(), 12);
        assert_eq!(b.len(), 5 * 6 - 12);
    }

    #[test]
    fn field_arithmetic_keeps_grid() {
        let g = Grid::interior(&[4, 3]).unwrap();
        let a = GridField::from_fn(g, |x| x[0] + x[1]);
        let mut b = GridField::from_fn(g, |x| x[0]);
        b.axpy(2.0, &a);
        b.scale(0.5);
        assert_eq!(b.grid(), &g);
        for (k, (_, _, x)) in g.points().enumerate() {
            assert!((b[k] - (0.5 * x[0] + x[0] + x[1])).abs() < 1e-15);
        }
    }
}
