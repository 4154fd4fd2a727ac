//! Coupled director and momentum evolution with runtime monitors.
//!
//! Each rate evaluation first solves the director equation for `du/dt`,
//! rebuilds the co-rotational rate from it and only then assembles the Leslie
//! stress, so the viscous stress always sees the same `du/dt` as the director
//! update.

mod initial;
mod run;

use std::io;

use thiserror::Error;

use crate::config::{Scheme, SimulationConfig};
use crate::diagnostics::{self, EnergyBudget};
use crate::grid::{self, Field, GridError, SpectralField};
use crate::leslie::{self, KinematicTensors};
use crate::oseen_frank::{self, ElasticState};
use crate::params::ModelParams;

pub use initial::{make_initial, InitialOptions, GENERATORS};
pub use run::{run, stacked_state, ConcentrationEvent, CsvSink, FileSink, MemorySink, RunSummary, Sink};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("|u| = {modulus} left the director band [{lo}, {hi}] at x = {position:?}, t = {t}")]
    DirectorBandExit { t: f64, position: [f64; 3], modulus: f64, lo: f64, hi: f64 },
    #[error("advective CFL number {cfl} exceeds 0.5 at t = {t}")]
    CflViolation { t: f64, cfl: f64 },
    #[error("non-finite values in the state at t = {t}")]
    NonFinite { t: f64 },
    #[error("max|div v| = {value} exceeds tolerance {tol} at t = {t}")]
    IncompressibilityLoss { t: f64, value: f64, tol: f64 },
    #[error("unknown initial-data generator `{0}`")]
    UnknownGenerator(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Director `u` (three components) and velocity `v` (`dim` components).
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub u: Field,
    pub v: Field,
    pub epsilon: f64,
}

impl State {
    pub fn new(t: f64, u: Field, v: Field, epsilon: f64) -> Self {
        assert_eq!(u.ncomp(), 3, "director needs three components");
        assert_eq!(v.ncomp(), u.grid().dim(), "velocity needs one component per axis");
        assert!(grid::same_grid(u.grid(), v.grid()));
        Self { t, u, v, epsilon }
    }
}

/// Intermediate quantities shared by the director and momentum equations.
struct Terms {
    elastic: ElasticState,
    grad_v: Field,
    kin: KinematicTensors,
    /// Elastic molecular field without the penalty.
    h_elastic: Field,
    h: Field,
    /// `-v . grad u + Omega u`
    transport: Field,
    au: Field,
}

fn terms(state: &State, model: &ModelParams) -> Terms {
    let elastic = ElasticState::new(&state.u);
    let h_elastic = oseen_frank::elastic_molecular_field(&elastic, &model.elastic);
    let mut h = h_elastic.clone();
    oseen_frank::add_penalty_force(&mut h, &state.u, state.epsilon);
    let grad_v = leslie::velocity_gradient(&state.v);
    let kin = leslie::split_gradient(&grad_v);
    let adv = leslie::advective_derivative(&state.v, &elastic.gu);
    let g = state.u.grid();
    let mut transport = Field::zeros(g, 3);
    let mut au = Field::zeros(g, 3);
    for p in 0..g.len() {
        let u = state.u.vec3(p);
        let wu = leslie::mat_vec(&kin.omega.mat3(p), &u);
        let a = adv.vec3(p);
        transport.set_vec3(p, [wu[0] - a[0], wu[1] - a[1], wu[2] - a[2]]);
        au.set_vec3(p, leslie::mat_vec(&kin.a.mat3(p), &u));
    }
    Terms { elastic, grad_v, kin, h_elastic, h, transport, au }
}

fn director_rate_from(t: &Terms, model: &ModelParams) -> Field {
    let c = &model.leslie;
    let (g1, g2) = (c.gamma1(), c.gamma2());
    let mut out = t.transport.clone();
    for ((o, h), au) in out.data_mut().iter_mut().zip(t.h.data()).zip(t.au.data()) {
        *o += (h - g2 * au) / g1;
    }
    out
}

/// `du/dt = (h - gamma2 A u) / gamma1 - v . grad u + Omega u`.
pub fn director_rate(state: &State, model: &ModelParams) -> Field {
    director_rate_from(&terms(state, model), model)
}

/// Total Ericksen plus Leslie stress for a given director rate.
fn total_stress(state: &State, t: &Terms, dudt: &Field, model: &ModelParams) -> (Field, Field) {
    let n = leslie::corotational_n(dudt, &state.v, &state.u, &t.elastic.gu, &t.kin);
    let sigma_l = leslie::leslie_stress(&state.u, &n, &t.kin, &model.leslie);
    let sigma_e = oseen_frank::ericksen_stress(&t.elastic, &model.elastic);
    (sigma_e, sigma_l)
}

/// Leray-projected `-v . grad v + div sigma` in Fourier space, `dim` components.
fn momentum_spectrum(v: &Field, grad_v: &Field, sigma: &Field, dealias: bool) -> SpectralField {
    let g = v.grid().clone();
    let d = g.dim();
    let mut packed = Field::zeros(&g, d * d + d);
    for i in 0..d {
        for j in 0..d {
            packed.comp_mut(i * d + j).copy_from_slice(sigma.comp(i * 3 + j));
        }
    }
    for p in 0..g.len() {
        for i in 0..d {
            let a: f64 = (0..d).map(|j| v.at(j, p) * grad_v.at(i * 3 + j, p)).sum();
            packed.set(d * d + i, p, a);
        }
    }
    let mut s = g.spectral().forward(&packed);
    if dealias {
        s.truncate_two_thirds();
    }
    let mut acc = SpectralField::zeros(&g, d);
    for i in 0..d {
        for j in 0..d {
            acc.add_derivative_of(&s, i * d + j, j, i);
        }
        let adv = s.comp(d * d + i).to_vec();
        for (z, a) in acc.comp_mut(i).iter_mut().zip(adv) {
            *z -= a;
        }
    }
    acc.project_solenoidal();
    acc
}

fn add(a: &Field, b: &Field) -> Field {
    let mut out = a.clone();
    out.axpy(1.0, b);
    out
}

/// Projected momentum rate and the zero-mean pressure.
///
/// The pressure solves `-Lap P = d_i d_j F^{ij}` with
/// `F = -sigma^E + v (x) v - sigma^L` and is returned for inspection only.
pub fn velocity_rate(state: &State, dudt: &Field, model: &ModelParams, dealias: bool) -> (Field, Field) {
    let t = terms(state, model);
    let (sigma_e, sigma_l) = total_stress(state, &t, dudt, model);
    let sigma = add(&sigma_e, &sigma_l);
    let g = state.v.grid();
    let rate = g.spectral().inverse(&momentum_spectrum(&state.v, &t.grad_v, &sigma, dealias));
    let mut f = sigma;
    f.scale(-1.0);
    for p in 0..g.len() {
        let v = state.v.vec3(p);
        for i in 0..3 {
            for j in 0..3 {
                f.set(i * 3 + j, p, f.at(i * 3 + j, p) + v[i] * v[j]);
            }
        }
    }
    if dealias {
        f = grid::dealias(&f);
    }
    (rate, grid::pressure_from_stress(&f))
}

/// Both rates at one state, sharing all intermediate work.
fn rates(state: &State, model: &ModelParams, dealias: bool) -> (Field, SpectralField, Terms) {
    let t = terms(state, model);
    let dudt = director_rate_from(&t, model);
    let (sigma_e, sigma_l) = total_stress(state, &t, &dudt, model);
    let dv = momentum_spectrum(&state.v, &t.grad_v, &add(&sigma_e, &sigma_l), dealias);
    (dudt, dv, t)
}

/// Diagnostics of one accepted step.
#[derive(Debug, Clone)]
pub struct StepReport {
    pub dt_used: f64,
    pub before: EnergyBudget,
    pub after: EnergyBudget,
    pub residual: f64,
    /// `max | |u| - 1 |` after the step.
    pub max_u_deviation: f64,
    /// `dt max|v| / h_min` before the step.
    pub cfl: f64,
    pub max_divergence: f64,
}

/// Advances states with one model and configuration.
#[derive(Debug, Clone, Copy)]
pub struct Stepper<'a> {
    pub model: &'a ModelParams,
    pub config: &'a SimulationConfig,
}

impl<'a> Stepper<'a> {
    pub fn new(model: &'a ModelParams, config: &'a SimulationConfig) -> Self {
        Self { model, config }
    }

    pub fn cfl(&self, state: &State, dt: f64) -> f64 {
        let g = state.v.grid();
        let h = g.spacing()[..g.dim()].iter().cloned().fold(f64::INFINITY, f64::min);
        dt * state.v.max_norm() / h
    }

    /// One step of size `dt` followed by the finiteness, band and
    /// incompressibility checks.
    pub fn advance(&self, state: &State, dt: f64) -> Result<State, SolverError> {
        let cfl = self.cfl(state, dt);
        if cfl > 0.5 {
            return Err(SolverError::CflViolation { t: state.t, cfl });
        }
        let next = match self.config.scheme {
            Scheme::ExplicitRk2 => self.heun(state, dt),
            Scheme::Imex => self.imex(state, dt),
        };
        self.check(&next)?;
        Ok(next)
    }

    /// Verifies finiteness, the director band and incompressibility.
    pub fn check(&self, s: &State) -> Result<(), SolverError> {
        if !(s.u.is_finite() && s.v.is_finite()) {
            return Err(SolverError::NonFinite { t: s.t });
        }
        check_band(s, self.config.director_band)?;
        let div = grid::divergence(&s.v).max_abs();
        let tol = self.config.divergence_tol * (1.0 + s.v.max_norm());
        if div > tol {
            return Err(SolverError::IncompressibilityLoss { t: s.t, value: div, tol });
        }
        Ok(())
    }

    fn heun(&self, s: &State, dt: f64) -> State {
        let dealias = self.config.dealias;
        let spec = s.v.grid().spectral();
        let (du1, dv1, _) = rates(s, self.model, dealias);
        let dv1 = spec.inverse(&dv1);
        let mut mid = s.clone();
        mid.u.axpy(dt, &du1);
        mid.v.axpy(dt, &dv1);
        mid.t = s.t + dt;
        let (du2, dv2, _) = rates(&mid, self.model, dealias);
        let dv2 = spec.inverse(&dv2);
        let mut next = s.clone();
        next.u.axpy(0.5 * dt, &du1);
        next.u.axpy(0.5 * dt, &du2);
        next.v.axpy(0.5 * dt, &dv1);
        next.v.axpy(0.5 * dt, &dv2);
        next.t = s.t + dt;
        next
    }

    /// Radially implicit penalty for `u`, implicit `(alpha4/2) Lap v`.
    fn imex(&self, s: &State, dt: f64) -> State {
        let c = &self.model.leslie;
        let (g1, g2, a4) = (c.gamma1(), c.gamma2(), c.alpha(4));
        let (_, dv, t) = rates(s, self.model, self.config.dealias);
        let inv_eps2 = 1.0 / (s.epsilon * s.epsilon);
        let g = s.u.grid();
        let mut u_next = Field::zeros(g, 3);
        for p in 0..g.len() {
            let u = s.u.vec3(p);
            let (he, tr, au) = (t.h_elastic.vec3(p), t.transport.vec3(p), t.au.vec3(p));
            let e: [f64; 3] = std::array::from_fn(|i| he[i] + g1 * tr[i] - g2 * au[i]);
            let r = oseen_frank::pointwise::dot(&u, &u).sqrt();
            if r == 0.0 {
                u_next.set_vec3(p, e.map(|x| dt / g1 * x));
                continue;
            }
            let dir = u.map(|x| x / r);
            let er = oseen_frank::pointwise::dot(&e, &dir);
            let stiff = r * (1.0 + r) * inv_eps2;
            let radial = (g1 * r / dt + er + stiff) / (g1 / dt + stiff);
            let w: [f64; 3] = std::array::from_fn(|i| radial * dir[i] + dt / g1 * (e[i] - er * dir[i]));
            u_next.set_vec3(p, w);
        }
        let mut dv = dv;
        dv.map_modes(|k2| 1.0 / (1.0 + 0.5 * dt * a4 * k2));
        let mut v_next = s.v.clone();
        v_next.axpy(dt, &g.spectral().inverse(&dv));
        State { t: s.t + dt, u: u_next, v: v_next, epsilon: s.epsilon }
    }
}

/// Fails on the first point whose `|u|` leaves `[lo, hi]`.
pub fn check_band(s: &State, (lo, hi): (f64, f64)) -> Result<(), SolverError> {
    let g = s.u.grid();
    for p in 0..g.len() {
        let u = s.u.vec3(p);
        let m = oseen_frank::pointwise::dot(&u, &u).sqrt();
        if !(lo..=hi).contains(&m) {
            return Err(SolverError::DirectorBandExit { t: s.t, position: g.position(p), modulus: m, lo, hi });
        }
    }
    Ok(())
}

/// One step with energy bookkeeping.
pub fn step(state: &State, model: &ModelParams, config: &SimulationConfig) -> Result<(State, StepReport), SolverError> {
    let stepper = Stepper::new(model, config);
    let dt = config.dt;
    let cfl = stepper.cfl(state, dt);
    let before = diagnostics::energy_budget(state, model);
    let next = stepper.advance(state, dt)?;
    let after = diagnostics::energy_budget(&next, model);
    let (umin, umax) = diagnostics::director_range(&next);
    let report = StepReport {
        dt_used: dt,
        residual: diagnostics::energy_identity_residual(&before, &after, dt),
        before,
        after,
        max_u_deviation: (1.0 - umin).max(umax - 1.0),
        cfl,
        max_divergence: grid::divergence(&next.v).max_abs(),
    };
    Ok((next, report))
}
