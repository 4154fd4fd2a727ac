//! Oseen-Frank elasticity: density, analytic variations, molecular field and
//! Ericksen stress.
//!
//! Gradients use the convention `p[alpha][i] = d_alpha u^i`; field versions
//! store them as 9 components at index `alpha * 3 + i`.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::grid::{self, DiffMode, Field, PeriodicGrid};
use crate::params::ElasticConstants;

pub type Mat3 = [[f64; 3]; 3];

/// Pointwise kernels on a single `(u, p)` pair.
pub mod pointwise {
    use super::Mat3;
    use crate::params::ElasticConstants;

    #[inline]
    pub fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
        a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
    }

    #[inline]
    pub fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
        [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
    }

    /// `curl u` from `p[alpha][i] = d_alpha u^i`.
    #[inline]
    pub fn curl(p: &Mat3) -> [f64; 3] {
        [p[1][2] - p[2][1], p[2][0] - p[0][2], p[0][1] - p[1][0]]
    }

    #[inline]
    fn trace(p: &Mat3) -> f64 {
        p[0][0] + p[1][1] + p[2][2]
    }

    /// `tr((grad u)^2) = p[a][i] p[i][a]`
    #[inline]
    fn trace_sq(p: &Mat3) -> f64 {
        let mut s = 0.0;
        for a in 0..3 {
            for i in 0..3 {
                s += p[a][i] * p[i][a];
            }
        }
        s
    }

    /// Adds `g_m eps_{m alpha i}` to `out[alpha][i]` (the pullback of a
    /// curl-gradient through `d curl / d p`).
    #[inline]
    fn add_curl_adjoint(out: &mut Mat3, g: &[f64; 3]) {
        out[1][2] += g[0];
        out[2][1] -= g[0];
        out[2][0] += g[1];
        out[0][2] -= g[1];
        out[0][1] += g[2];
        out[1][0] -= g[2];
    }

    pub fn density(k: &ElasticConstants, u: &[f64; 3], p: &Mat3) -> f64 {
        let div = trace(p);
        let c = curl(p);
        let twist = dot(u, &c);
        let bend = cross(u, &c);
        k.k1() * div * div
            + k.k2() * twist * twist
            + k.k3() * dot(&bend, &bend)
            + (k.k2() + k.k4()) * (trace_sq(p) - div * div)
    }

    /// `dW/dp[alpha][i]`
    pub fn dw_dp(k: &ElasticConstants, u: &[f64; 3], p: &Mat3) -> Mat3 {
        let div = trace(p);
        let c = curl(p);
        let uc = dot(u, &c);
        let uu = dot(u, u);
        let (k1, k2, k3, k4) = (k.k1(), k.k2(), k.k3(), k.k4());
        let mut out = [[0.0; 3]; 3];
        for a in 0..3 {
            for i in 0..3 {
                out[a][i] = 2.0 * (k2 + k4) * p[i][a];
            }
            out[a][a] += 2.0 * (k1 - k2 - k4) * div;
        }
        let g = [
            2.0 * k2 * uc * u[0] + 2.0 * k3 * (uu * c[0] - uc * u[0]),
            2.0 * k2 * uc * u[1] + 2.0 * k3 * (uu * c[1] - uc * u[1]),
            2.0 * k2 * uc * u[2] + 2.0 * k3 * (uu * c[2] - uc * u[2]),
        ];
        add_curl_adjoint(&mut out, &g);
        out
    }

    /// `dW/du^i`
    pub fn dw_du(k: &ElasticConstants, u: &[f64; 3], p: &Mat3) -> [f64; 3] {
        let c = curl(p);
        let uc = dot(u, &c);
        let cc = dot(&c, &c);
        let (k2, k3) = (k.k2(), k.k3());
        [
            2.0 * k2 * uc * c[0] + 2.0 * k3 * (cc * u[0] - uc * c[0]),
            2.0 * k2 * uc * c[1] + 2.0 * k3 * (cc * u[1] - uc * c[1]),
            2.0 * k2 * uc * c[2] + 2.0 * k3 * (cc * u[2] - uc * c[2]),
        ]
    }

    /// p-Hessian of the coercive equivalent density applied to `xi`.
    ///
    /// With `a = min(k1, k2, k3)` and `|z| = 1`, the density differs from
    /// `a|p|^2 + (k1-a)(tr p)^2 + (k2-a)(z.curl p)^2 + (k3-a)|z x curl p|^2`
    /// by the null Lagrangian `(k2+k4-a)[tr(p^2) - (tr p)^2]`. The Hessian of
    /// that form is bounded below by `2a`.
    pub fn hessian_apply(k: &ElasticConstants, z: &[f64; 3], xi: &Mat3) -> Mat3 {
        let a = k.min_frank();
        let div = trace(xi);
        let c = curl(xi);
        let zc = dot(z, &c);
        let zz = dot(z, z);
        let (tw, bd) = (k.k2() - a, k.k3() - a);
        let mut out = [[0.0; 3]; 3];
        for al in 0..3 {
            for i in 0..3 {
                out[al][i] = 2.0 * a * xi[al][i];
            }
            out[al][al] += 2.0 * (k.k1() - a) * div;
        }
        let g = [
            2.0 * tw * zc * z[0] + 2.0 * bd * (zz * c[0] - zc * z[0]),
            2.0 * tw * zc * z[1] + 2.0 * bd * (zz * c[1] - zc * z[1]),
            2.0 * tw * zc * z[2] + 2.0 * bd * (zz * c[2] - zc * z[2]),
        ];
        add_curl_adjoint(&mut out, &g);
        out
    }
}

/// A director field together with its gradient.
#[derive(Debug, Clone)]
pub struct ElasticState {
    pub u: Field,
    pub gu: Field,
}

impl ElasticState {
    /// Builds the view with a spectral gradient.
    pub fn new(u: &Field) -> Self {
        assert_eq!(u.ncomp(), 3, "director must have three components");
        Self { u: u.clone(), gu: grid::gradient(u, DiffMode::Spectral) }
    }

    pub fn from_parts(u: Field, gu: Field) -> Self {
        assert!(u.ncomp() == 3 && gu.ncomp() == 9);
        Self { u, gu }
    }

    pub fn grid(&self) -> &Arc<PeriodicGrid> {
        self.u.grid()
    }
}

fn map_points<const C: usize>(s: &ElasticState, f: impl Fn([f64; 3], Mat3) -> [f64; C]) -> Field {
    Field::from_points(s.grid(), |p| f(s.u.vec3(p), s.gu.mat3(p)))
}

fn flatten(m: Mat3) -> [f64; 9] {
    [m[0][0], m[0][1], m[0][2], m[1][0], m[1][1], m[1][2], m[2][0], m[2][1], m[2][2]]
}

pub fn density_w(s: &ElasticState, k: &ElasticConstants) -> Field {
    map_points(s, |u, p| [pointwise::density(k, &u, &p)])
}

pub fn dw_dp(s: &ElasticState, k: &ElasticConstants) -> Field {
    map_points(s, |u, p| flatten(pointwise::dw_dp(k, &u, &p)))
}

pub fn dw_du(s: &ElasticState, k: &ElasticConstants) -> Field {
    map_points(s, |u, p| pointwise::dw_du(k, &u, &p))
}

/// Pointwise coercive p-Hessian (frozen at the local director) applied to `xi`.
pub fn hessian_apply(s: &ElasticState, k: &ElasticConstants, xi: &Field) -> Field {
    assert_eq!(xi.ncomp(), 9);
    Field::from_points(s.grid(), |p| flatten(pointwise::hessian_apply(k, &s.u.vec3(p), &xi.mat3(p))))
}

/// Elastic part of the molecular field, `div(dW/dp) - dW/du`.
pub fn elastic_molecular_field(s: &ElasticState, k: &ElasticConstants) -> Field {
    let mut h = grid::divergence_first(&dw_dp(s, k));
    h.axpy(-1.0, &dw_du(s, k));
    h
}

/// Penalized molecular field `h_eps = div(dW/dp) - dW/du + u(1-|u|^2)/eps^2`.
pub fn molecular_field(s: &ElasticState, k: &ElasticConstants, epsilon: f64) -> Field {
    let mut h = elastic_molecular_field(s, k);
    add_penalty_force(&mut h, &s.u, epsilon);
    h
}

pub(crate) fn add_penalty_force(h: &mut Field, u: &Field, epsilon: f64) {
    let inv = 1.0 / (epsilon * epsilon);
    for p in 0..u.grid().len() {
        let uv = u.vec3(p);
        let f = inv * (1.0 - pointwise::dot(&uv, &uv));
        for c in 0..3 {
            h.set(c, p, h.at(c, p) + f * uv[c]);
        }
    }
}

/// Ericksen stress `sigma_ij = -d_i u^k dW/dp^k_j`.
pub fn ericksen_stress(s: &ElasticState, k: &ElasticConstants) -> Field {
    map_points(s, |u, p| {
        let w = pointwise::dw_dp(k, &u, &p);
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = -(0..3).map(|kk| p[i][kk] * w[j][kk]).sum::<f64>();
            }
        }
        flatten(out)
    })
}

/// `int W + (1 - |u|^2)^2 / (4 eps^2)` by grid quadrature.
pub fn total_energy(u: &Field, k: &ElasticConstants, epsilon: f64) -> f64 {
    let s = ElasticState::new(u);
    let w = density_w(&s, k);
    let inv = 1.0 / (4.0 * epsilon * epsilon);
    let mut sum = 0.0;
    for p in 0..u.grid().len() {
        let uv = u.vec3(p);
        let d = 1.0 - pointwise::dot(&uv, &uv);
        sum += w.at(0, p) + inv * d * d;
    }
    sum * u.grid().cell_volume()
}

/// Central finite-difference check of `h = -dE/du` on random band-limited
/// states. Returns the largest relative error over `trials` states.
pub fn gradient_check(
    grid: &Arc<PeriodicGrid>,
    k: &ElasticConstants,
    epsilon: f64,
    trials: usize,
    step: f64,
    seed: u64,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let mut u = grid::random_band_limited(grid, 3, 4, 0.3, &mut rng);
        for p in 0..grid.len() {
            u.set(2, p, u.at(2, p) + 1.0);
        }
        let phi = grid::random_band_limited(grid, 3, 4, 1.0, &mut rng);
        let h = molecular_field(&ElasticState::new(&u), k, epsilon);
        let analytic = -grid::inner_product(&h, &phi);
        let mut up = u.clone();
        up.axpy(step, &phi);
        let mut um = u.clone();
        um.axpy(-step, &phi);
        let fd = (total_energy(&up, k, epsilon) - total_energy(&um, k, epsilon)) / (2.0 * step);
        worst = worst.max((fd - analytic).abs() / analytic.abs().max(f64::MIN_POSITIVE));
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use std::f64::consts::PI;

    fn consts() -> ElasticConstants {
        ElasticConstants::new(1.3, 0.8, 1.7, 0.3).unwrap()
    }

    fn random_mat(rng: &mut impl Rng) -> Mat3 {
        let mut m = [[0.0; 3]; 3];
        for row in m.iter_mut() {
            for x in row.iter_mut() {
                *x = rng.random_range(-1.0..1.0);
            }
        }
        m
    }

    #[test]
    fn pointwise_derivatives_match_central_differences() {
        let k = consts();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let u = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let p = random_mat(&mut rng);
            let phi = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let psi = random_mat(&mut rng);
            let t = 1e-5;
            let shift = |s: f64| {
                let uu = [u[0] + s * phi[0], u[1] + s * phi[1], u[2] + s * phi[2]];
                let mut pp = p;
                for a in 0..3 {
                    for i in 0..3 {
                        pp[a][i] += s * psi[a][i];
                    }
                }
                pointwise::density(&k, &uu, &pp)
            };
            let fd = (shift(t) - shift(-t)) / (2.0 * t);
            let du = pointwise::dw_du(&k, &u, &p);
            let dp = pointwise::dw_dp(&k, &u, &p);
            let mut an = pointwise::dot(&du, &phi);
            for a in 0..3 {
                for i in 0..3 {
                    an += dp[a][i] * psi[a][i];
                }
            }
            assert!((fd - an).abs() <= 1e-7 * an.abs().max(1.0), "fd {fd} analytic {an}");
        }
    }

    #[test]
    fn euler_homogeneity_in_gradient() {
        let k = consts();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let u = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let p = random_mat(&mut rng);
            let w = pointwise::density(&k, &u, &p);
            let dp = pointwise::dw_dp(&k, &u, &p);
            let contr: f64 = (0..3).flat_map(|a| (0..3).map(move |i| (a, i))).map(|(a, i)| dp[a][i] * p[a][i]).sum();
            assert!((contr - 2.0 * w).abs() < 1e-12 * w.abs().max(1.0));
            let mut p3 = p;
            p3.iter_mut().flatten().for_each(|x| *x *= 3.0);
            assert!((pointwise::density(&k, &u, &p3) - 9.0 * w).abs() < 1e-12 * w.abs().max(1.0));
        }
    }

    #[test]
    fn hessian_is_linear_and_coercive() {
        let k = consts();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let z = [rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)];
            let x1 = random_mat(&mut rng);
            let x2 = random_mat(&mut rng);
            let mut sum = x1;
            for a in 0..3 {
                for i in 0..3 {
                    sum[a][i] += x2[a][i];
                }
            }
            let h1 = pointwise::hessian_apply(&k, &z, &x1);
            let h2 = pointwise::hessian_apply(&k, &z, &x2);
            let hs = pointwise::hessian_apply(&k, &z, &sum);
            let mut form = 0.0;
            let mut norm = 0.0;
            for a in 0..3 {
                for i in 0..3 {
                    assert!((hs[a][i] - h1[a][i] - h2[a][i]).abs() < 1e-13);
                    form += h1[a][i] * x1[a][i];
                    norm += x1[a][i] * x1[a][i];
                }
            }
            assert!(form >= 2.0 * k.min_frank() * norm * (1.0 - 1e-12));
        }
    }

    #[test]
    fn constant_director_has_no_elastic_response() {
        let g = PeriodicGrid::cube(2, 16).unwrap();
        let u = Field::from_fn(&g, 3, |_, c| [0.6, 0.0, 0.8][c]);
        let s = ElasticState::new(&u);
        let k = consts();
        assert!(density_w(&s, &k).max_abs() < 1e-24);
        assert!(dw_dp(&s, &k).max_abs() < 1e-12);
        assert!(dw_du(&s, &k).max_abs() < 1e-24);
        assert!(ericksen_stress(&s, &k).max_abs() < 1e-24);
        assert!(molecular_field(&s, &k, 0.1).max_abs() < 1e-10);
    }

    #[test]
    fn shrunken_constant_director_feels_penalty() {
        let g = PeriodicGrid::cube(2, 8).unwrap();
        let eps = 0.2;
        let u = Field::from_fn(&g, 3, |_, c| 0.9 * [0.0, 0.6, 0.8][c]);
        let h = molecular_field(&ElasticState::new(&u), &consts(), eps);
        for p in 0..g.len() {
            for (c, b) in [0.0, 0.6, 0.8].iter().enumerate() {
                assert!((h.at(c, p) - 0.171 / (eps * eps) * b).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn one_constant_planar_rotation() {
        let l = 2.0 * PI;
        let g = PeriodicGrid::cube(2, 32).unwrap();
        let u = Field::from_fn(&g, 3, |x, c| [(x[0]).cos(), (x[0]).sin(), 0.0][c]);
        let w = density_w(&ElasticState::new(&u), &ElasticConstants::one_constant());
        let expect = (2.0 * PI / l).powi(2);
        for p in 0..g.len() {
            assert!((w.at(0, p) - expect).abs() < 1e-10 * expect);
        }
    }

    #[test]
    fn axis_permutation_commutes_with_density() {
        let g = PeriodicGrid::cube(2, 16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let u = grid::random_band_limited(&g, 3, 3, 0.5, &mut rng);
        let n = g.dims()[0];
        // swap x <-> y in both positions and components 0 <-> 1
        let swap = |f: &Field| {
            Field::from_points::<3>(&g, |p| {
                let [i, j, _] = g.coords_of(p);
                let q = g.index(j, i, 0);
                [f.at(1, q), f.at(0, q), f.at(2, q)]
            })
        };
        let k = consts();
        let w = density_w(&ElasticState::new(&u), &k);
        let ws = density_w(&ElasticState::new(&swap(&u)), &k);
        for i in 0..n {
            for j in 0..n {
                let a = w.at(0, g.index(j, i, 0));
                let b = ws.at(0, g.index(i, j, 0));
                assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
            }
        }
    }

    #[test]
    fn ericksen_trace_is_minus_twice_density() {
        let g = PeriodicGrid::cube(2, 16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let u = grid::random_band_limited(&g, 3, 3, 0.5, &mut rng);
        let s = ElasticState::new(&u);
        let k = consts();
        let sig = ericksen_stress(&s, &k);
        let w = density_w(&s, &k);
        for p in 0..g.len() {
            let tr = sig.at(0, p) + sig.at(4, p) + sig.at(8, p);
            assert!((tr + 2.0 * w.at(0, p)).abs() < 1e-12 * w.at(0, p).abs().max(1.0));
        }
    }
}
