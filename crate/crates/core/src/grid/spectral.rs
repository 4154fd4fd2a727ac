use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{Field, PeriodicGrid};

/// FFT plans and wavenumber tables for one grid. Plans are immutable and
/// shared; concurrent transforms only allocate their own scratch.
pub struct Spectral {
    dims: [usize; 3],
    forward: [Option<Arc<dyn Fft<f64>>>; 3],
    inverse: [Option<Arc<dyn Fft<f64>>>; 3],
    /// First-derivative wavevector per point (Nyquist entries zeroed).
    k_first: Vec<[f64; 3]>,
    /// `|k|^2` with the full Nyquist symbol, for Laplacians.
    k2_full: Vec<f64>,
    /// 2/3-rule mask per point.
    keep: Vec<bool>,
}

impl fmt::Debug for Spectral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Spectral").field("dims", &self.dims).finish()
    }
}

fn mode_index(i: usize, n: usize) -> isize {
    if i <= n / 2 {
        i as isize
    } else {
        i as isize - n as isize
    }
}

impl Spectral {
    pub(super) fn new(dims: [usize; 3], lengths: [f64; 3], dim: usize) -> Self {
        let mut planner = FftPlanner::new();
        let mut forward: [Option<Arc<dyn Fft<f64>>>; 3] = [None, None, None];
        let mut inverse: [Option<Arc<dyn Fft<f64>>>; 3] = [None, None, None];
        for a in 0..dim {
            forward[a] = Some(planner.plan_fft_forward(dims[a]));
            inverse[a] = Some(planner.plan_fft_inverse(dims[a]));
        }
        let n: usize = dims.iter().product();
        let mut k_first = Vec::with_capacity(n);
        let mut k2_full = Vec::with_capacity(n);
        let mut keep = Vec::with_capacity(n);
        for i in 0..dims[0] {
            for j in 0..dims[1] {
                for k in 0..dims[2] {
                    let idx = [i, j, k];
                    let mut kf = [0.0; 3];
                    let mut k2 = 0.0;
                    let mut kept = true;
                    for a in 0..dim {
                        let m = mode_index(idx[a], dims[a]);
                        let w = 2.0 * PI / lengths[a] * m as f64;
                        k2 += w * w;
                        if 2 * m.unsigned_abs() != dims[a] {
                            kf[a] = w;
                        }
                        if m.unsigned_abs() > dims[a] / 3 {
                            kept = false;
                        }
                    }
                    k_first.push(kf);
                    k2_full.push(k2);
                    keep.push(kept);
                }
            }
        }
        Self { dims, forward, inverse, k_first, k2_full, keep }
    }

    fn len(&self) -> usize {
        self.dims.iter().product()
    }

    /// Signed integer mode indices of flat spectral position `p`.
    pub fn mode_of(&self, p: usize) -> [isize; 3] {
        let k = p % self.dims[2];
        let j = (p / self.dims[2]) % self.dims[1];
        let i = p / (self.dims[1] * self.dims[2]);
        [mode_index(i, self.dims[0]), mode_index(j, self.dims[1]), mode_index(k, self.dims[2])]
    }

    fn transform(&self, buf: &mut [Complex64], inverse: bool) {
        let n = self.len();
        let plans = if inverse { &self.inverse } else { &self.forward };
        for (a, plan) in plans.iter().enumerate() {
            let Some(plan) = plan else { continue };
            let len = self.dims[a];
            let stride: usize = self.dims[a + 1..].iter().product();
            let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
            if stride == 1 {
                plan.process_with_scratch(buf, &mut scratch);
                continue;
            }
            let block = len * stride;
            let mut lines = vec![Complex64::default(); n];
            for b in 0..n / block {
                let base = b * block;
                for m in 0..len {
                    let src = &buf[base + m * stride..][..stride];
                    for (s, v) in src.iter().enumerate() {
                        lines[base + s * len + m] = *v;
                    }
                }
            }
            plan.process_with_scratch(&mut lines, &mut scratch);
            for b in 0..n / block {
                let base = b * block;
                for m in 0..len {
                    let dst = &mut buf[base + m * stride..][..stride];
                    for (s, v) in dst.iter_mut().enumerate() {
                        *v = lines[base + s * len + m];
                    }
                }
            }
        }
        if inverse {
            let scale = 1.0 / n as f64;
            buf.iter_mut().for_each(|z| *z *= scale);
        }
    }

    pub fn forward(&self, f: &Field) -> SpectralField {
        let n = self.len();
        let mut data: Vec<Complex64> = f.data().iter().map(|&x| Complex64::new(x, 0.0)).collect();
        data.par_chunks_mut(n).for_each(|c| self.transform(c, false));
        SpectralField { grid: f.grid().clone(), ncomp: f.ncomp(), data }
    }

    /// Inverse transform keeping the real part.
    pub fn inverse(&self, s: &SpectralField) -> Field {
        let n = self.len();
        let mut data = s.data.clone();
        data.par_chunks_mut(n).for_each(|c| self.transform(c, true));
        Field::from_vec(&s.grid, s.ncomp, data.into_iter().map(|z| z.re).collect())
    }
}

/// Fourier coefficients of a multi-component field, component-major.
#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: Arc<PeriodicGrid>,
    ncomp: usize,
    data: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: &Arc<PeriodicGrid>, ncomp: usize) -> Self {
        Self { grid: grid.clone(), ncomp, data: vec![Complex64::default(); ncomp * grid.len()] }
    }

    pub fn ncomp(&self) -> usize {
        self.ncomp
    }

    pub fn comp(&self, c: usize) -> &[Complex64] {
        let n = self.grid.len();
        &self.data[c * n..(c + 1) * n]
    }

    pub fn comp_mut(&mut self, c: usize) -> &mut [Complex64] {
        let n = self.grid.len();
        &mut self.data[c * n..(c + 1) * n]
    }

    fn tables(&self) -> &Spectral {
        self.grid.spectral()
    }

    /// Derivative of every component along `axis`.
    pub fn derivative(&self, axis: usize) -> SpectralField {
        let mut out = self.clone();
        let n = self.grid.len();
        let kf = &self.grid.spectral().k_first;
        for c in 0..self.ncomp {
            for (p, z) in out.data[c * n..(c + 1) * n].iter_mut().enumerate() {
                *z *= Complex64::new(0.0, kf[p][axis]);
            }
        }
        out
    }

    /// `self[dst] += d_axis src[src_comp]`
    pub fn add_derivative_of(&mut self, src: &SpectralField, src_comp: usize, axis: usize, dst: usize) {
        let grid = self.grid.clone();
        let kf = &grid.spectral().k_first;
        let s = src.comp(src_comp);
        for (p, z) in self.comp_mut(dst).iter_mut().enumerate() {
            *z += Complex64::new(0.0, kf[p][axis]) * s[p];
        }
    }

    pub fn apply_laplacian(&mut self) {
        let n = self.grid.len();
        let k2 = &self.grid.spectral().k2_full;
        for c in 0..self.ncomp {
            for (p, z) in self.data[c * n..(c + 1) * n].iter_mut().enumerate() {
                *z *= -k2[p];
            }
        }
    }

    /// Multiplies every mode by `factor(|k|^2)`.
    pub fn map_modes(&mut self, factor: impl Fn(f64) -> f64) {
        let n = self.grid.len();
        let k2 = &self.grid.spectral().k2_full;
        for c in 0..self.ncomp {
            for (p, z) in self.data[c * n..(c + 1) * n].iter_mut().enumerate() {
                *z *= factor(k2[p]);
            }
        }
    }

    /// Removes the gradient part of the first `dim` components.
    pub fn project_solenoidal(&mut self) {
        let dim = self.grid.dim().min(self.ncomp);
        let n = self.grid.len();
        let kf = &self.grid.spectral().k_first;
        for p in 0..n {
            let k = kf[p];
            let k2: f64 = k[..dim].iter().map(|x| x * x).sum();
            if k2 == 0.0 {
                // zero mode keeps the mean; pure Nyquist modes carry no divergence
                continue;
            }
            let mut kv = Complex64::default();
            for a in 0..dim {
                kv += self.data[a * n + p] * k[a];
            }
            for a in 0..dim {
                self.data[a * n + p] -= kv * (k[a] / k2);
            }
        }
    }

    /// Zero-mean pressure from a 9-component tensor spectrum.
    pub fn riesz_pressure(&self) -> SpectralField {
        assert_eq!(self.ncomp, 9);
        let n = self.grid.len();
        let kf = &self.tables().k_first;
        let mut out = SpectralField::zeros(&self.grid, 1);
        for p in 0..n {
            let k = kf[p];
            let k2: f64 = k.iter().map(|x| x * x).sum();
            if k2 == 0.0 {
                continue;
            }
            let mut acc = Complex64::default();
            for i in 0..3 {
                for j in 0..3 {
                    acc += self.data[(i * 3 + j) * n + p] * (k[i] * k[j]);
                }
            }
            out.data[p] = -acc / k2;
        }
        out
    }

    pub fn truncate_two_thirds(&mut self) {
        let n = self.grid.len();
        let keep = &self.grid.spectral().keep;
        for c in 0..self.ncomp {
            for (p, z) in self.data[c * n..(c + 1) * n].iter_mut().enumerate() {
                if !keep[p] {
                    *z = Complex64::default();
                }
            }
        }
    }

    /// Sum over modes of `w(|k|^2) |f_k|^2`, normalized so that `w = 1`
    /// reproduces the rectangle-rule `L^2` norm squared.
    pub fn weighted_energy(&self, w: impl Fn(f64) -> f64) -> f64 {
        let n = self.grid.len();
        let k2 = &self.tables().k2_full;
        let mut s = 0.0;
        for c in 0..self.ncomp {
            for (p, z) in self.data[c * n..(c + 1) * n].iter().enumerate() {
                s += w(k2[p]) * z.norm_sqr();
            }
        }
        s * self.grid.volume() / (n as f64 * n as f64)
    }
}
