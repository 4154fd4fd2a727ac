//! Periodic boxes, field containers and discrete vector calculus.
//!
//! Pseudo-spectral derivatives are the production path; second-order centered
//! differences are kept for refinement cross-checks. Tensors are stored as
//! 9-component fields with component index `a * 3 + b`.

mod field;
mod snapshot;
mod spectral;

use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;
use rustfft::num_complex::Complex64;
use thiserror::Error;

pub use field::Field;
pub use snapshot::{read_snapshot, write_snapshot, Snapshot, SnapshotError};
pub use spectral::{Spectral, SpectralField};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("grid dimension must be 2 or 3, got {0}")]
    BadDimension(usize),
    #[error("points per axis must be even and >= 4, got {0}")]
    BadPointCount(usize),
    #[error("box lengths must be positive and finite, got {0}")]
    BadLength(f64),
    #[error("window radius {radius} exceeds half the smallest box side {limit}")]
    WindowTooLarge { radius: f64, limit: f64 },
    #[error("field shape mismatch: {0}")]
    ShapeMismatch(String),
}

/// Derivative discretization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffMode {
    Spectral,
    /// Second-order centered differences.
    Fd2,
}

/// Uniform periodic grid in two or three dimensions. Two-dimensional grids
/// keep a trailing axis of length one so indexing is always `[x][y][z]`.
#[derive(Debug)]
pub struct PeriodicGrid {
    dim: usize,
    dims: [usize; 3],
    lengths: [f64; 3],
    spacing: [f64; 3],
    spectral: Spectral,
}

impl PeriodicGrid {
    /// `dims` and `lengths` carry one entry per active axis.
    pub fn new(dims: &[usize], lengths: &[f64]) -> Result<Arc<Self>, GridError> {
        let dim = dims.len();
        if !(2..=3).contains(&dim) {
            return Err(GridError::BadDimension(dim));
        }
        if lengths.len() != dim {
            return Err(GridError::ShapeMismatch(format!("{} lengths for {} axes", lengths.len(), dim)));
        }
        let mut d = [1usize; 3];
        let mut l = [1.0f64; 3];
        for a in 0..dim {
            if dims[a] < 4 || !dims[a].is_multiple_of(2) {
                return Err(GridError::BadPointCount(dims[a]));
            }
            if !(lengths[a] > 0.0 && lengths[a].is_finite()) {
                return Err(GridError::BadLength(lengths[a]));
            }
            d[a] = dims[a];
            l[a] = lengths[a];
        }
        let spacing = [l[0] / d[0] as f64, l[1] / d[1] as f64, l[2] / d[2] as f64];
        let spectral = Spectral::new(d, l, dim);
        Ok(Arc::new(Self { dim, dims: d, lengths: l, spacing, spectral }))
    }

    /// Square/cubic box of side `2 pi` with `n` points per axis.
    pub fn cube(dim: usize, n: usize) -> Result<Arc<Self>, GridError> {
        Self::new(&vec![n; dim], &vec![2.0 * PI; dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn lengths(&self) -> [f64; 3] {
        self.lengths
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing[..self.dim].iter().product()
    }

    pub fn volume(&self) -> f64 {
        self.lengths[..self.dim].iter().product()
    }

    pub fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dims[1] + j) * self.dims[2] + k
    }

    #[inline]
    pub fn coords_of(&self, idx: usize) -> [usize; 3] {
        let k = idx % self.dims[2];
        let j = (idx / self.dims[2]) % self.dims[1];
        let i = idx / (self.dims[1] * self.dims[2]);
        [i, j, k]
    }

    /// Physical position of a grid point.
    pub fn position(&self, idx: usize) -> [f64; 3] {
        let c = self.coords_of(idx);
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = c[a] as f64 * self.spacing[a];
        }
        x
    }

    /// Minimum-image displacement `x - c` on the torus.
    pub fn periodic_delta(&self, x: [f64; 3], c: [f64; 3]) -> [f64; 3] {
        let mut d = [0.0; 3];
        for a in 0..self.dim {
            let l = self.lengths[a];
            let mut t = (x[a] - c[a]) % l;
            if t > 0.5 * l {
                t -= l;
            } else if t < -0.5 * l {
                t += l;
            }
            d[a] = t;
        }
        d
    }

    /// Largest admissible window radius for local integrals.
    pub fn max_window_radius(&self) -> f64 {
        self.lengths[..self.dim].iter().cloned().fold(f64::INFINITY, f64::min) / 2.0
    }

    /// Offsets of the discrete periodic ball: all lattice offsets whose
    /// minimum-image distance is at most `radius`, without partial cells.
    pub fn ball_offsets(&self, radius: f64) -> Result<Vec<[isize; 3]>, GridError> {
        let limit = self.max_window_radius();
        if radius > limit * (1.0 + 1e-12) {
            return Err(GridError::WindowTooLarge { radius, limit });
        }
        let mut out = Vec::new();
        let half = |a: usize| (self.dims[a] / 2) as isize;
        let range = |a: usize| {
            if a < self.dim {
                -half(a)..half(a)
            } else {
                0..1
            }
        };
        for di in range(0) {
            for dj in range(1) {
                for dk in range(2) {
                    let d = [di, dj, dk];
                    let r2: f64 = (0..self.dim).map(|a| (d[a] as f64 * self.spacing[a]).powi(2)).sum();
                    if r2.sqrt() <= radius * (1.0 + 1e-12) {
                        out.push(d);
                    }
                }
            }
        }
        Ok(out)
    }

    #[inline]
    pub fn shifted_index(&self, c: [usize; 3], d: [isize; 3]) -> usize {
        let mut p = [0usize; 3];
        for a in 0..3 {
            let n = self.dims[a] as isize;
            p[a] = (c[a] as isize + d[a]).rem_euclid(n) as usize;
        }
        self.index(p[0], p[1], p[2])
    }
}

pub fn same_grid(a: &Arc<PeriodicGrid>, b: &Arc<PeriodicGrid>) -> bool {
    Arc::ptr_eq(a, b) || (a.dims == b.dims && a.lengths == b.lengths && a.dim == b.dim)
}

/// Periodic derivative of every component along every axis.
/// Output component `alpha * c + i` holds `d_alpha f^i`; derivatives along
/// the inactive third axis of a 2D grid are zero.
pub fn gradient(f: &Field, mode: DiffMode) -> Field {
    let g = f.grid().clone();
    let c = f.ncomp();
    let mut out = Field::zeros(&g, 3 * c);
    match mode {
        DiffMode::Spectral => {
            let s = g.spectral().forward(f);
            for a in 0..g.dim() {
                let d = g.spectral().inverse(&s.derivative(a));
                for i in 0..c {
                    out.comp_mut(a * c + i).copy_from_slice(d.comp(i));
                }
            }
        }
        DiffMode::Fd2 => {
            for a in 0..g.dim() {
                for i in 0..c {
                    let src = f.comp(i);
                    let h2 = 2.0 * g.spacing()[a];
                    let mut dst = vec![0.0; g.len()];
                    for (idx, v) in dst.iter_mut().enumerate() {
                        let cc = g.coords_of(idx);
                        let mut plus = [0isize; 3];
                        plus[a] = 1;
                        let mut minus = [0isize; 3];
                        minus[a] = -1;
                        *v = (src[g.shifted_index(cc, plus)] - src[g.shifted_index(cc, minus)]) / h2;
                    }
                    out.comp_mut(a * c + i).copy_from_slice(&dst);
                }
            }
        }
    }
    out
}

/// `sum_a d_a F^a` over the first `min(ncomp, 3)` components.
pub fn divergence(f: &Field) -> Field {
    let g = f.grid().clone();
    let s = g.spectral().forward(f);
    let n = f.ncomp().min(3).min(g.dim());
    let mut acc = SpectralField::zeros(&g, 1);
    for a in 0..n {
        acc.add_derivative_of(&s, a, a, 0);
    }
    g.spectral().inverse(&acc)
}

/// Row divergence of a 3x3 tensor field: `(div T)_i = sum_j d_j T_ij`.
pub fn divergence_rows(t: &Field) -> Field {
    assert_eq!(t.ncomp(), 9, "tensor field expected");
    let g = t.grid().clone();
    let s = g.spectral().forward(t);
    let mut acc = SpectralField::zeros(&g, 3);
    for i in 0..3 {
        for j in 0..g.dim() {
            acc.add_derivative_of(&s, i * 3 + j, j, i);
        }
    }
    g.spectral().inverse(&acc)
}

/// First-index divergence of a 3x3 tensor field:
/// `(div T)_i = sum_alpha d_alpha T[alpha][i]`.
pub fn divergence_first(t: &Field) -> Field {
    assert_eq!(t.ncomp(), 9, "tensor field expected");
    let g = t.grid().clone();
    let d = g.dim();
    let mut rows = Field::zeros(&g, 3 * d);
    for c in 0..3 * d {
        rows.comp_mut(c).copy_from_slice(t.comp(c));
    }
    let s = g.spectral().forward(&rows);
    let mut acc = SpectralField::zeros(&g, 3);
    for i in 0..3 {
        for a in 0..d {
            acc.add_derivative_of(&s, a * 3 + i, a, i);
        }
    }
    g.spectral().inverse(&acc)
}

/// Random real field whose Fourier modes satisfy `|m_a| <= kmax` on every
/// axis, with coefficients decaying like `1 / (1 + |m|^2)`, rescaled so the
/// largest pointwise entry equals `amplitude`.
pub fn random_band_limited(
    grid: &Arc<PeriodicGrid>,
    ncomp: usize,
    kmax: usize,
    amplitude: f64,
    rng: &mut impl Rng,
) -> Field {
    let mut s = SpectralField::zeros(grid, ncomp);
    for c in 0..ncomp {
        for (p, z) in s.comp_mut(c).iter_mut().enumerate() {
            let m = grid.spectral().mode_of(p);
            if m.iter().all(|x| x.unsigned_abs() <= kmax) {
                let m2: isize = m.iter().map(|x| x * x).sum();
                let w = 1.0 / (1.0 + m2 as f64);
                *z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * w;
            }
        }
    }
    let mut f = grid.spectral().inverse(&s);
    let m = f.max_abs();
    if m > 0.0 {
        f.scale(amplitude / m);
    }
    f
}

/// Curl of a 3-component field (2D fields are treated as z-independent).
pub fn curl(f: &Field) -> Field {
    assert_eq!(f.ncomp(), 3, "curl needs three components");
    let gf = gradient(f, DiffMode::Spectral);
    let d = |a: usize, i: usize| gf.comp(a * 3 + i);
    let g = f.grid().clone();
    let mut out = Field::zeros(&g, 3);
    for p in 0..g.len() {
        out.comp_mut(0)[p] = d(1, 2)[p] - d(2, 1)[p];
        out.comp_mut(1)[p] = d(2, 0)[p] - d(0, 2)[p];
        out.comp_mut(2)[p] = d(0, 1)[p] - d(1, 0)[p];
    }
    out
}

/// Componentwise spectral Laplacian (full symbol `-|k|^2`).
pub fn laplacian(f: &Field) -> Field {
    let g = f.grid().clone();
    let mut s = g.spectral().forward(f);
    s.apply_laplacian();
    g.spectral().inverse(&s)
}

/// Orthogonal projection onto divergence-free fields; the mean of each
/// component is preserved.
pub fn leray_project(v: &Field) -> Field {
    let g = v.grid().clone();
    let mut s = g.spectral().forward(v);
    s.project_solenoidal();
    g.spectral().inverse(&s)
}

/// Solves `-Lap P = d_i d_j F^{ij}` with the zero-mean gauge, i.e. applies
/// the composed Riesz symbol `-xi_i xi_j / |xi|^2`.
pub fn pressure_from_stress(f: &Field) -> Field {
    assert_eq!(f.ncomp(), 9, "tensor field expected");
    let g = f.grid().clone();
    let s = g.spectral().forward(f);
    g.spectral().inverse(&s.riesz_pressure())
}

/// 2/3-rule truncation of every component.
pub fn dealias(f: &Field) -> Field {
    let g = f.grid().clone();
    let mut s = g.spectral().forward(f);
    s.truncate_two_thirds();
    g.spectral().inverse(&s)
}

/// Pointwise product of two scalar fields followed by 2/3-rule truncation.
pub fn dealiased_product(a: &Field, b: &Field) -> Field {
    assert!(a.ncomp() == 1 && b.ncomp() == 1);
    let mut p = a.clone();
    for (x, y) in p.comp_mut(0).iter_mut().zip(b.comp(0)) {
        *x *= y;
    }
    dealias(&p)
}

/// Rectangle-rule `L^2` inner product summed over components.
pub fn inner_product(f: &Field, g: &Field) -> f64 {
    assert_eq!(f.ncomp(), g.ncomp(), "component count mismatch");
    let s: f64 = f.data().iter().zip(g.data()).map(|(a, b)| a * b).sum();
    s * f.grid().cell_volume()
}

pub fn norm_l2(f: &Field) -> f64 {
    inner_product(f, f).sqrt()
}

/// `int_{B_R(center)} |f|^3 dx` over the discrete periodic ball.
pub fn norm_l3_window(f: &Field, center: [usize; 3], radius: f64) -> Result<f64, GridError> {
    let g = f.grid();
    let offsets = g.ball_offsets(radius)?;
    let cubes = pointwise_norm_cubed(f);
    Ok(window_sum(g, &cubes, center, &offsets))
}

/// `int_{B_R(x)} rho` for every grid center `x` at once, as a periodic
/// correlation with the discrete ball computed by FFT.
pub fn ball_sums(rho: &Field, radius: f64) -> Result<Field, GridError> {
    assert_eq!(rho.ncomp(), 1, "density must be scalar");
    let g = rho.grid().clone();
    let offsets = g.ball_offsets(radius)?;
    let mut ball = Field::zeros(&g, 1);
    for d in &offsets {
        ball.set(0, g.shifted_index([0, 0, 0], *d), 1.0);
    }
    let spec = g.spectral();
    let mut s = spec.forward(rho);
    let k = spec.forward(&ball);
    for (z, w) in s.comp_mut(0).iter_mut().zip(k.comp(0)) {
        *z *= w.conj();
    }
    let mut out = spec.inverse(&s);
    out.scale(g.cell_volume());
    Ok(out)
}

pub(crate) fn pointwise_norm_cubed(f: &Field) -> Vec<f64> {
    let n = f.grid().len();
    (0..n)
        .map(|p| {
            let s: f64 = (0..f.ncomp()).map(|c| f.comp(c)[p].powi(2)).sum();
            s.sqrt().powi(3)
        })
        .collect()
}

pub(crate) fn window_sum(g: &PeriodicGrid, density: &[f64], center: [usize; 3], offsets: &[[isize; 3]]) -> f64 {
    offsets.iter().map(|d| density[g.shifted_index(center, *d)]).sum::<f64>() * g.cell_volume()
}
