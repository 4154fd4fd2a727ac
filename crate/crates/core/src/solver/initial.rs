use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{SolverError, State};
use crate::grid::{self, Field, PeriodicGrid};

pub const GENERATORS: &[&str] = &["uniform", "twist", "bump-tilt", "gl-vortex-pair", "random-solenoidal-v"];

/// Generator controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialOptions {
    /// Twist or tilt angle at the bump center; in-plane strength of the
    /// vortex pair; peak speed for `random-solenoidal-v`.
    pub amplitude: f64,
    /// Peak speed of an added random solenoidal velocity (0 for none).
    pub v_amplitude: f64,
}

impl Default for InitialOptions {
    fn default() -> Self {
        Self { amplitude: 1.0, v_amplitude: 0.0 }
    }
}

fn compact_cutoff(t: f64) -> f64 {
    if t >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - t * t)).exp()
    }
}

/// Gaussian of width `s` times a smooth cutoff of radius `r`, both relative to
/// the shortest box side; equals 1 at `center`.
fn bump(g: &PeriodicGrid, x: [f64; 3], center: [f64; 3], s: f64, r: f64) -> f64 {
    let l = g.max_window_radius() * 2.0;
    let d = g.periodic_delta(x, center);
    let rho2: f64 = d.iter().map(|t| t * t).sum();
    let (s, r) = (s * l, r * l);
    (-rho2 / (2.0 * s * s)).exp() * compact_cutoff(rho2.sqrt() / r)
}

fn box_center(g: &PeriodicGrid) -> [f64; 3] {
    let l = g.lengths();
    let mut c = [0.0; 3];
    for a in 0..g.dim() {
        c[a] = 0.5 * l[a];
    }
    c
}

fn standard_bump(g: &PeriodicGrid, x: [f64; 3], center: [f64; 3]) -> f64 {
    bump(g, x, center, 0.12, 0.45)
}

fn random_solenoidal(g: &Arc<PeriodicGrid>, amplitude: f64, rng: &mut ChaCha8Rng) -> Field {
    let mut v = grid::leray_project(&grid::random_band_limited(g, g.dim(), 4, 1.0, rng));
    let m = v.max_norm();
    if m > 0.0 {
        v.scale(amplitude / m);
    }
    v
}

/// Builds initial data. The director equals `(0, 0, 1)` outside a compactly
/// supported bump around the box center.
///
/// * `uniform`: `u = (0, 0, 1)`.
/// * `twist`: `u` rotated about the x axis by `amplitude * bump`; `|u| = 1`.
/// * `bump-tilt`: a tilt about the y axis with modulus `1 +- 0.2` bumps.
/// * `gl-vortex-pair`: a +1/-1 planar vortex pair escaped into `z`; `|u| = 1`.
/// * `random-solenoidal-v`: uniform director, random projected velocity of
///   peak speed `amplitude`.
pub fn make_initial(
    kind: &str,
    grid: &Arc<PeriodicGrid>,
    epsilon: f64,
    seed: u64,
    opts: &InitialOptions,
) -> Result<State, SolverError> {
    let g = grid.as_ref();
    let c = box_center(g);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amp = opts.amplitude;
    let (u, mut v) = match kind {
        "uniform" => (Field::from_points::<3>(grid, |_| [0.0, 0.0, 1.0]), Field::zeros(grid, g.dim())),
        "twist" => {
            let u = Field::from_points::<3>(grid, |p| {
                let th = amp * standard_bump(g, g.position(p), c);
                [0.0, -th.sin(), th.cos()]
            });
            (u, Field::zeros(grid, g.dim()))
        }
        "bump-tilt" => {
            let shift = 0.25 * g.lengths()[0];
            let (mut cp, mut cm) = (c, c);
            cp[0] += shift;
            cm[0] -= shift;
            let u = Field::from_points::<3>(grid, |p| {
                let x = g.position(p);
                let th = amp * standard_bump(g, x, c);
                let m = 1.0 + 0.2 * (standard_bump(g, x, cp) - standard_bump(g, x, cm));
                [m * th.sin(), 0.0, m * th.cos()]
            });
            (u, Field::zeros(grid, g.dim()))
        }
        "gl-vortex-pair" => {
            let l = g.max_window_radius() * 2.0;
            let core = 0.06 * l;
            let (mut c1, mut c2) = (c, c);
            c1[0] += l / 8.0;
            c2[0] -= l / 8.0;
            let strength = amp.clamp(0.0, 1.0 - 1e-9);
            let u = Field::from_points::<3>(grid, |p| {
                let x = g.position(p);
                let (d1, d2) = (g.periodic_delta(x, c1), g.periodic_delta(x, c2));
                let n1 = (d1[0] * d1[0] + d1[1] * d1[1] + core * core).sqrt();
                let n2 = (d2[0] * d2[0] + d2[1] * d2[1] + core * core).sqrt();
                // (z1 / n1) * conj(z2 / n2) with z = dx + i dy
                let (a, b) = (d1[0] / n1, d1[1] / n1);
                let (cc, dd) = (d2[0] / n2, -d2[1] / n2);
                let s = strength * bump(g, x, c, 0.15, 0.45);
                let (wr, wi) = (s * (a * cc - b * dd), s * (a * dd + b * cc));
                [wr, wi, (1.0 - wr * wr - wi * wi).sqrt()]
            });
            (u, Field::zeros(grid, g.dim()))
        }
        "random-solenoidal-v" => {
            let u = Field::from_points::<3>(grid, |_| [0.0, 0.0, 1.0]);
            (u, random_solenoidal(grid, amp, &mut rng))
        }
        other => return Err(SolverError::UnknownGenerator(other.to_string())),
    };
    if opts.v_amplitude > 0.0 && kind != "random-solenoidal-v" {
        v = random_solenoidal(grid, opts.v_amplitude, &mut rng);
    }
    Ok(State::new(0.0, u, v, epsilon))
}
