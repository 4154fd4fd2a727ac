//! Energies, dissipation rates, director bounds and concentration monitors.
//!
//! Everything here is recomputed from the state alone so it can serve as an
//! independent check on the time stepper.

use crate::grid::{self, DiffMode, Field, GridError};
use crate::leslie::{self, Dissipation};
use crate::oseen_frank::{self, pointwise::dot, ElasticState};
use crate::params::ModelParams;
use crate::solver::State;

pub const CSV_HEADER: &str = "t,kinetic,elastic,penalty,total,D_A,D_uAu,D_Au,D_h,residual,umin,umax,l3max";

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyBudget {
    pub t: f64,
    pub kinetic: f64,
    pub elastic: f64,
    pub penalty: f64,
    pub total: f64,
    pub d_a: f64,
    pub d_uau: f64,
    pub d_au: f64,
    pub d_h: f64,
}

impl EnergyBudget {
    pub fn dissipation(&self) -> f64 {
        self.d_a + self.d_uau + self.d_au + self.d_h
    }
}

pub fn energy_budget(state: &State, model: &ModelParams) -> EnergyBudget {
    let g = state.u.grid();
    let es = ElasticState::new(&state.u);
    let w = oseen_frank::density_w(&es, &model.elastic);
    let h = oseen_frank::molecular_field(&es, &model.elastic, state.epsilon);
    let kin = leslie::rate_tensors(&state.v);
    let Dissipation { d_a, d_uau, d_au, d_h } = leslie::dissipation_terms(&state.u, &h, &kin, &model.leslie);
    let dv = g.cell_volume();
    let inv = 1.0 / (4.0 * state.epsilon * state.epsilon);
    let (mut kinetic, mut penalty) = (0.0, 0.0);
    for p in 0..g.len() {
        let v = state.v.vec3(p);
        kinetic += 0.5 * dot(&v, &v);
        let u = state.u.vec3(p);
        let d = 1.0 - dot(&u, &u);
        penalty += inv * d * d;
    }
    let (kinetic, penalty) = (kinetic * dv, penalty * dv);
    let elastic = w.comp(0).iter().sum::<f64>() * dv;
    EnergyBudget { t: state.t, kinetic, elastic, penalty, total: kinetic + elastic + penalty, d_a, d_uau, d_au, d_h }
}

/// `|(E1 - E0)/dt + (D0 + D1)/2|`.
pub fn energy_identity_residual(b0: &EnergyBudget, b1: &EnergyBudget, dt: f64) -> f64 {
    ((b1.total - b0.total) / dt + 0.5 * (b0.dissipation() + b1.dissipation())).abs()
}

/// Grid minimum and maximum of `|u|`.
pub fn director_range(state: &State) -> (f64, f64) {
    let g = state.u.grid();
    (0..g.len())
        .map(|p| {
            let u = state.u.vec3(p);
            dot(&u, &u).sqrt()
        })
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), m| (lo.min(m), hi.max(m)))
}

/// Pointwise `|grad u|^3 + |v|^3`.
pub fn concentration_density(state: &State) -> Vec<f64> {
    let gu = grid::gradient(&state.u, DiffMode::Spectral);
    let a = grid::pointwise_norm_cubed(&gu);
    let b = grid::pointwise_norm_cubed(&state.v);
    a.iter().zip(&b).map(|(x, y)| x + y).collect()
}

/// Largest `int_{B_R(x)} |grad u|^3 + |v|^3` over grid centers `x` visited
/// with the given stride, and the maximizing center.
pub fn concentration_scan(state: &State, radius: f64, stride: usize) -> Result<(f64, [usize; 3]), GridError> {
    let g = state.u.grid();
    let density = Field::from_vec(g, 1, concentration_density(state));
    let sums = grid::ball_sums(&density, radius)?;
    let stride = stride.max(1);
    let dims = g.dims();
    let mut best = (0.0, [0usize; 3]);
    for i in (0..dims[0]).step_by(stride) {
        for j in (0..dims[1]).step_by(stride) {
            for k in (0..dims[2]).step_by(stride) {
                let m = sums.at(0, g.index(i, j, k));
                if m > best.0 {
                    best = (m, [i, j, k]);
                }
            }
        }
    }
    Ok(best)
}

/// Cutoff-weighted energy and dissipation integrals.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LocalEnergy {
    /// `int |v|^2 phi^2`
    pub kinetic: f64,
    /// `int |grad u|^2 phi^2`
    pub gradient: f64,
    /// `int (1 - |u|^2)^2 phi^2 / eps^2`
    pub penalty: f64,
    pub d_a: f64,
    pub d_uau: f64,
    pub d_au: f64,
    pub d_h: f64,
}

pub fn local_energy(state: &State, model: &ModelParams, phi: &Field) -> LocalEnergy {
    assert_eq!(phi.ncomp(), 1, "cutoff must be scalar");
    let g = state.u.grid();
    let es = ElasticState::new(&state.u);
    let h = oseen_frank::molecular_field(&es, &model.elastic, state.epsilon);
    let kin = leslie::rate_tensors(&state.v);
    let c = &model.leslie;
    let inv = 1.0 / (state.epsilon * state.epsilon);
    let mut out = LocalEnergy::default();
    for p in 0..g.len() {
        let w = phi.at(0, p).powi(2);
        let (u, v, hv) = (state.u.vec3(p), state.v.vec3(p), h.vec3(p));
        let a = kin.a.mat3(p);
        let au = leslie::mat_vec(&a, &u);
        let pm = es.gu.mat3(p);
        let d = 1.0 - dot(&u, &u);
        out.kinetic += w * dot(&v, &v);
        out.gradient += w * pm.iter().flatten().map(|x| x * x).sum::<f64>();
        out.penalty += w * inv * d * d;
        out.d_a += w * c.alpha(4) * a.iter().flatten().map(|x| x * x).sum::<f64>();
        out.d_uau += w * c.alpha(1) * dot(&u, &au).powi(2);
        out.d_au += w * c.beta() * dot(&au, &au);
        out.d_h += w * dot(&hv, &hv) / c.gamma1();
    }
    let dv = g.cell_volume();
    for x in [
        &mut out.kinetic,
        &mut out.gradient,
        &mut out.penalty,
        &mut out.d_a,
        &mut out.d_uau,
        &mut out.d_au,
        &mut out.d_h,
    ] {
        *x *= dv;
    }
    out
}

/// One line of `diagnostics.csv`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRow {
    pub budget: EnergyBudget,
    pub residual: f64,
    pub umin: f64,
    pub umax: f64,
    pub l3max: f64,
}

impl DiagnosticsRow {
    pub fn to_csv(&self) -> String {
        let b = &self.budget;
        [
            b.t,
            b.kinetic,
            b.elastic,
            b.penalty,
            b.total,
            b.d_a,
            b.d_uau,
            b.d_au,
            b.d_h,
            self.residual,
            self.umin,
            self.umax,
            self.l3max,
        ]
        .iter()
        .map(|x| format!("{x:e}"))
        .collect::<Vec<_>>()
        .join(",")
    }
}
