//! Flow kinematics, the co-rotational director rate, the Leslie viscous
//! stress and the dissipation functionals.
//!
//! The velocity gradient is `G_ij = d_j v^i`; two-dimensional velocities are
//! embedded with a zero third component. Stress contractions use
//! `sigma : G = sigma_ij G_ij`.

use crate::grid::{self, DiffMode, Field};
use crate::oseen_frank::pointwise::dot;
use crate::params::LeslieCoefficients;

pub type Mat3 = [[f64; 3]; 3];

/// Symmetric (`a`) and antisymmetric (`omega`) parts of the velocity gradient.
#[derive(Debug, Clone)]
pub struct KinematicTensors {
    pub a: Field,
    pub omega: Field,
}

#[inline]
pub fn mat_vec(m: &Mat3, v: &[f64; 3]) -> [f64; 3] {
    [dot(&m[0], v), dot(&m[1], v), dot(&m[2], v)]
}

/// `G_ij = d_j v^i` as a 9-component field.
pub fn velocity_gradient(v: &Field) -> Field {
    let d = v.ncomp();
    let gv = grid::gradient(v, DiffMode::Spectral);
    let mut g = Field::zeros(v.grid(), 9);
    for i in 0..d.min(3) {
        for j in 0..v.grid().dim() {
            g.comp_mut(i * 3 + j).copy_from_slice(gv.comp(j * d + i));
        }
    }
    g
}

/// Splits a velocity-gradient field into its symmetric and antisymmetric parts.
pub fn split_gradient(g: &Field) -> KinematicTensors {
    let grid = g.grid();
    let mut a = Field::zeros(grid, 9);
    let mut omega = Field::zeros(grid, 9);
    for i in 0..3 {
        for j in 0..3 {
            let (gij, gji) = (g.comp(i * 3 + j), g.comp(j * 3 + i));
            let sym: Vec<f64> = gij.iter().zip(gji).map(|(x, y)| 0.5 * (x + y)).collect();
            let skew: Vec<f64> = gij.iter().zip(gji).map(|(x, y)| 0.5 * (x - y)).collect();
            a.comp_mut(i * 3 + j).copy_from_slice(&sym);
            omega.comp_mut(i * 3 + j).copy_from_slice(&skew);
        }
    }
    KinematicTensors { a, omega }
}

pub fn rate_tensors(v: &Field) -> KinematicTensors {
    split_gradient(&velocity_gradient(v))
}

/// `(v . grad) u` for a director gradient `gu[alpha][i] = d_alpha u^i`.
pub fn advective_derivative(v: &Field, gu: &Field) -> Field {
    let c = gu.ncomp() / 3;
    let g = v.grid();
    let mut out = Field::zeros(g, c);
    for p in 0..g.len() {
        let vv = v.vec3(p);
        for i in 0..c {
            let s: f64 = (0..3).map(|a| vv[a] * gu.at(a * c + i, p)).sum();
            out.set(i, p, s);
        }
    }
    out
}

/// `N = du/dt + (v . grad) u - Omega u`.
pub fn corotational_n(dudt: &Field, v: &Field, u: &Field, gu: &Field, kin: &KinematicTensors) -> Field {
    let adv = advective_derivative(v, gu);
    Field::from_points::<3>(u.grid(), |p| {
        let wu = mat_vec(&kin.omega.mat3(p), &u.vec3(p));
        let d = dudt.vec3(p);
        let a = adv.vec3(p);
        [d[0] + a[0] - wu[0], d[1] + a[1] - wu[1], d[2] + a[2] - wu[2]]
    })
}

/// Pointwise Leslie stress.
pub fn leslie_stress_at(u: &[f64; 3], n: &[f64; 3], a: &Mat3, c: &LeslieCoefficients) -> Mat3 {
    let au = mat_vec(a, u);
    let uau = dot(u, &au);
    let mut s = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            s[i][j] = c.alpha(1) * uau * u[i] * u[j]
                + c.alpha(2) * n[i] * u[j]
                + c.alpha(3) * u[i] * n[j]
                + c.alpha(4) * a[i][j]
                + c.alpha(5) * au[i] * u[j]
                + c.alpha(6) * u[i] * au[j];
        }
    }
    s
}

pub fn leslie_stress(u: &Field, n: &Field, kin: &KinematicTensors, coeffs: &LeslieCoefficients) -> Field {
    Field::from_points::<9>(u.grid(), |p| {
        let s = leslie_stress_at(&u.vec3(p), &n.vec3(p), &kin.a.mat3(p), coeffs);
        [s[0][0], s[0][1], s[0][2], s[1][0], s[1][1], s[1][2], s[2][0], s[2][1], s[2][2]]
    })
}

/// The four dissipation integrals of the energy law.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Dissipation {
    /// `alpha4 int |A|^2`
    pub d_a: f64,
    /// `alpha1 int (u^T A u)^2`
    pub d_uau: f64,
    /// `beta int |A u|^2`
    pub d_au: f64,
    /// `(1/gamma1) int |h|^2`
    pub d_h: f64,
}

impl Dissipation {
    pub fn total(&self) -> f64 {
        self.d_a + self.d_uau + self.d_au + self.d_h
    }
}

pub fn dissipation_terms(u: &Field, h: &Field, kin: &KinematicTensors, c: &LeslieCoefficients) -> Dissipation {
    let g = u.grid();
    let (mut aa, mut uau2, mut au2, mut hh) = (0.0, 0.0, 0.0, 0.0);
    for p in 0..g.len() {
        let a = kin.a.mat3(p);
        let uv = u.vec3(p);
        let au = mat_vec(&a, &uv);
        let uau = dot(&uv, &au);
        aa += a.iter().flatten().map(|x| x * x).sum::<f64>();
        uau2 += uau * uau;
        au2 += dot(&au, &au);
        let hv = h.vec3(p);
        hh += dot(&hv, &hv);
    }
    let dv = g.cell_volume();
    Dissipation {
        d_a: c.alpha(4) * aa * dv,
        d_uau: c.alpha(1) * uau2 * dv,
        d_au: c.beta() * au2 * dv,
        d_h: hh * dv / c.gamma1(),
    }
}
