use std::sync::Arc;

use super::PeriodicGrid;

/// Real multi-component field on a periodic grid.
///
/// Storage is component-major: component `c` occupies
/// `data[c * n .. (c + 1) * n]` with `n` grid points in row-major order.
#[derive(Debug, Clone)]
pub struct Field {
    grid: Arc<PeriodicGrid>,
    ncomp: usize,
    data: Vec<f64>,
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        super::same_grid(&self.grid, &other.grid) && self.ncomp == other.ncomp && self.data == other.data
    }
}

impl Field {
    pub fn zeros(grid: &Arc<PeriodicGrid>, ncomp: usize) -> Self {
        Self { grid: grid.clone(), ncomp, data: vec![0.0; ncomp * grid.len()] }
    }

    pub fn from_vec(grid: &Arc<PeriodicGrid>, ncomp: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), ncomp * grid.len(), "data length does not match grid");
        Self { grid: grid.clone(), ncomp, data }
    }

    /// Fills component `c` at position `x` with `f(x, c)`.
    pub fn from_fn(grid: &Arc<PeriodicGrid>, ncomp: usize, f: impl Fn([f64; 3], usize) -> f64) -> Self {
        let n = grid.len();
        let mut data = vec![0.0; ncomp * n];
        for p in 0..n {
            let x = grid.position(p);
            for c in 0..ncomp {
                data[c * n + p] = f(x, c);
            }
        }
        Self { grid: grid.clone(), ncomp, data }
    }

    /// Fills a field point by point from a closure returning all components.
    pub fn from_points<const C: usize>(grid: &Arc<PeriodicGrid>, f: impl Fn(usize) -> [f64; C]) -> Self {
        let n = grid.len();
        let mut data = vec![0.0; C * n];
        for p in 0..n {
            let v = f(p);
            for c in 0..C {
                data[c * n + p] = v[c];
            }
        }
        Self { grid: grid.clone(), ncomp: C, data }
    }

    pub fn grid(&self) -> &Arc<PeriodicGrid> {
        &self.grid
    }

    pub fn ncomp(&self) -> usize {
        self.ncomp
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn comp(&self, c: usize) -> &[f64] {
        let n = self.grid.len();
        &self.data[c * n..(c + 1) * n]
    }

    pub fn comp_mut(&mut self, c: usize) -> &mut [f64] {
        let n = self.grid.len();
        &mut self.data[c * n..(c + 1) * n]
    }

    #[inline]
    pub fn at(&self, c: usize, p: usize) -> f64 {
        self.data[c * self.grid.len() + p]
    }

    #[inline]
    pub fn set(&mut self, c: usize, p: usize, v: f64) {
        let n = self.grid.len();
        self.data[c * n + p] = v;
    }

    /// First three components at point `p`, zero-padded.
    #[inline]
    pub fn vec3(&self, p: usize) -> [f64; 3] {
        let mut v = [0.0; 3];
        for (c, x) in v.iter_mut().enumerate().take(self.ncomp.min(3)) {
            *x = self.at(c, p);
        }
        v
    }

    #[inline]
    pub fn set_vec3(&mut self, p: usize, v: [f64; 3]) {
        for (c, x) in v.iter().enumerate().take(self.ncomp.min(3)) {
            self.set(c, p, *x);
        }
    }

    /// 3x3 tensor at point `p` (requires nine components).
    #[inline]
    pub fn mat3(&self, p: usize) -> [[f64; 3]; 3] {
        debug_assert_eq!(self.ncomp, 9);
        let mut m = [[0.0; 3]; 3];
        for (a, row) in m.iter_mut().enumerate() {
            for (b, x) in row.iter_mut().enumerate() {
                *x = self.at(a * 3 + b, p);
            }
        }
        m
    }

    #[inline]
    pub fn set_mat3(&mut self, p: usize, m: &[[f64; 3]; 3]) {
        debug_assert_eq!(self.ncomp, 9);
        for (a, row) in m.iter().enumerate() {
            for (b, x) in row.iter().enumerate() {
                self.set(a * 3 + b, p, *x);
            }
        }
    }

    /// Copy with `ncomp` components: truncated or zero-padded.
    pub fn with_components(&self, ncomp: usize) -> Field {
        let mut out = Field::zeros(&self.grid, ncomp);
        for c in 0..ncomp.min(self.ncomp) {
            out.comp_mut(c).copy_from_slice(self.comp(c));
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Largest pointwise Euclidean norm over components.
    pub fn max_norm(&self) -> f64 {
        let n = self.grid.len();
        (0..n).map(|p| (0..self.ncomp).map(|c| self.at(c, p).powi(2)).sum::<f64>()).fold(0.0, f64::max).sqrt()
    }

    pub fn mean(&self, c: usize) -> f64 {
        self.comp(c).iter().sum::<f64>() / self.grid.len() as f64
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn scale(&mut self, s: f64) {
        self.data.iter_mut().for_each(|x| *x *= s);
    }

    /// `self += s * other`
    pub fn axpy(&mut self, s: f64, other: &Field) {
        assert_eq!(self.ncomp, other.ncomp);
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x += s * y;
        }
    }

    pub fn sub(&self, other: &Field) -> Field {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    /// Cyclic shift of the grid indices by `d` (periodic translation).
    pub fn shifted(&self, d: [isize; 3]) -> Field {
        let g = &self.grid;
        let mut out = Field::zeros(g, self.ncomp);
        for p in 0..g.len() {
            let q = g.shifted_index(g.coords_of(p), d);
            for c in 0..self.ncomp {
                out.set(c, q, self.at(c, p));
            }
        }
        out
    }
}
