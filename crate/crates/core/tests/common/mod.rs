#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::Arc;

use nematic_flow::grid::{self, Field, PeriodicGrid};
use nematic_flow::params::{ElasticConstants, LeslieCoefficients};
use rand::Rng;

pub fn square(n: usize) -> Arc<PeriodicGrid> {
    PeriodicGrid::new(&[n, n], &[2.0 * PI, 2.0 * PI]).unwrap()
}

/// Six coefficients satisfying every admissibility condition.
pub fn admissible_alpha(rng: &mut impl Rng) -> [f64; 6] {
    let a1 = rng.random_range(0.0..1.0);
    let a4 = rng.random_range(0.1..2.0);
    let g1 = rng.random_range(0.2..2.0);
    let g2 = rng.random_range(-g1..g1);
    let sum56 = g2 * g2 / g1 + rng.random_range(0.0..1.0);
    let (a5, a6) = (0.5 * (sum56 - g2), 0.5 * (sum56 + g2));
    let (a2, a3) = (0.5 * (g2 - g1), 0.5 * (g2 + g1));
    [a1, a2, a3, a4, a5, a6]
}

/// Frank constants satisfying the strong Ericksen inequalities.
pub fn admissible_k(rng: &mut impl Rng) -> [f64; 4] {
    let k1 = rng.random_range(0.8..2.0);
    let k3 = rng.random_range(0.5..2.0);
    let k2: f64 = rng.random_range(0.3..1.5);
    // |k4| < k2 and k2 + k4 < 2 k1
    let hi = k2.min(2.0 * k1 - k2);
    let k4 = rng.random_range(-k2 * 0.95..hi * 0.95);
    [k1, k2, k3, k4]
}

pub fn leslie(rng: &mut impl Rng) -> LeslieCoefficients {
    LeslieCoefficients::new(admissible_alpha(rng)).unwrap()
}

pub fn elastic(rng: &mut impl Rng) -> ElasticConstants {
    let k = admissible_k(rng);
    ElasticConstants::new(k[0], k[1], k[2], k[3]).unwrap()
}

/// Smooth director near `(0, 0, 1)` with `|u|` not identically one.
pub fn random_director(g: &Arc<PeriodicGrid>, rng: &mut impl Rng) -> Field {
    let mut u = grid::random_band_limited(g, 3, 4, 0.4, rng);
    for p in 0..g.len() {
        u.set(2, p, u.at(2, p) + 1.0);
    }
    u
}

pub fn random_solenoidal(g: &Arc<PeriodicGrid>, rng: &mut impl Rng) -> Field {
    grid::leray_project(&grid::random_band_limited(g, g.dim(), 4, 1.0, rng))
}

pub fn unit_director(g: &Arc<PeriodicGrid>, rng: &mut impl Rng) -> Field {
    let mut u = random_director(g, rng);
    for p in 0..g.len() {
        let v = u.vec3(p);
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        u.set_vec3(p, v.map(|x| x / n));
    }
    u
}
