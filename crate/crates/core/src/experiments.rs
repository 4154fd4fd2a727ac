//! The epsilon sweep and time-step refinement studies.
//!
//! No epsilon = 0 reference is computed. Convergence is judged from Cauchy
//! differences between consecutive epsilon runs that share their initial data,
//! grid, time step and sample times.

use std::fmt::{self, Write as _};
use std::io;
use std::path::Path;

use rayon::prelude::*;
use thiserror::Error;

use crate::config::SimulationConfig;
use crate::diagnostics;
use crate::grid::{self, Field};
use crate::params::ModelParams;
use crate::solver::{self, MemorySink, State, Stepper};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("epsilon list must be nonempty, positive and strictly decreasing")]
    BadEpsilonList,
    #[error("dt list needs at least three entries, each half the previous one")]
    BadDtList,
    #[error("initial director must have |u| = 1 at every point (max deviation {0:e})")]
    NonUnitDirector(f64),
    #[error(transparent)]
    Solver(#[from] solver::SolverError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    /// Steps between samples; the final time is always sampled.
    pub sample_every: usize,
    /// Higher seminorm probes only look at samples with `t >= tau`.
    pub tau: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { sample_every: 10, tau: 0.0 }
    }
}

/// Norms of one trajectory at one sample time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub v_h1: f64,
    pub grad_u_h1: f64,
    pub penalty: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub epsilon: f64,
    pub samples: Vec<Sample>,
    /// Why the run stopped early, if it did. Samples up to the failure are kept.
    pub failure: Option<String>,
    states: Vec<State>,
}

impl Trajectory {
    pub fn failed(&self) -> bool {
        self.failure.is_some()
    }

    pub fn final_penalty(&self) -> Option<f64> {
        if self.failed() {
            None
        } else {
            self.samples.last().map(|s| s.penalty)
        }
    }
}

/// Differences between the runs at `eps_a > eps_b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CauchyPair {
    pub eps_a: f64,
    pub eps_b: f64,
    /// `max_t |grad u_a - grad u_b|_{L^2}`
    pub grad_u_linf_l2: f64,
    /// `max_t |v_a - v_b|_{L^2}`
    pub v_linf_l2: f64,
    /// `(int_0^T |grad u_a - grad u_b|_{H^1}^2 dt)^{1/2}`, trapezoid in time
    pub grad_u_l2_h1: f64,
    pub v_l2_h1: f64,
    /// `max_{t >= tau}` of the `H^2` and `H^3` seminorms of `u_a - u_b`
    pub u_h2_late: f64,
    pub u_h3_late: f64,
    pub v_h2_late: f64,
    pub v_h3_late: f64,
}

impl CauchyPair {
    const NAMES: [&'static str; 8] =
        ["grad_u_linf_l2", "v_linf_l2", "grad_u_l2_h1", "v_l2_h1", "u_h2_late", "u_h3_late", "v_h2_late", "v_h3_late"];

    fn values(&self) -> [f64; 8] {
        [
            self.grad_u_linf_l2,
            self.v_linf_l2,
            self.grad_u_l2_h1,
            self.v_l2_h1,
            self.u_h2_late,
            self.u_h3_late,
            self.v_h2_late,
            self.v_h3_late,
        ]
    }
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub eps_list: Vec<f64>,
    pub trajectories: Vec<Trajectory>,
    /// One entry per consecutive pair; `None` when either run failed.
    pub pairs: Vec<Option<CauchyPair>>,
}

impl SweepReport {
    /// `pair[k + 1] / pair[k]` for the named Cauchy quantity.
    pub fn cauchy_ratios(&self, f: impl Fn(&CauchyPair) -> f64) -> Vec<Option<f64>> {
        self.pairs
            .windows(2)
            .map(|w| match (w[0], w[1]) {
                (Some(a), Some(b)) => Some(f(&b) / f(&a)),
                _ => None,
            })
            .collect()
    }

    /// Final penalty of the smallest epsilon over that of the largest.
    pub fn penalty_ratio(&self) -> Option<f64> {
        let first = self.trajectories.first()?.final_penalty()?;
        let last = self.trajectories.last()?.final_penalty()?;
        Some(last / first)
    }

    /// Least-squares slope of `log y` against `log eps` over successful runs
    /// or pairs; `None` with fewer than two positive points.
    pub fn fitted_order(points: &[(f64, f64)]) -> Option<f64> {
        let pts: Vec<(f64, f64)> = points.iter().filter(|(_, y)| *y > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
        if pts.len() < 2 {
            return None;
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
        (sxx > 0.0).then(|| sxy / sxx)
    }

    /// Per-epsilon, per-sample rows.
    pub fn report_csv(&self) -> String {
        let mut out = String::from("epsilon,t,v_h1,grad_u_h1,penalty,status\n");
        for tr in &self.trajectories {
            let status = if tr.failed() { "failed" } else { "ok" };
            for s in &tr.samples {
                let _ =
                    writeln!(out, "{:e},{:e},{:e},{:e},{:e},{status}", tr.epsilon, s.t, s.v_h1, s.grad_u_h1, s.penalty);
            }
        }
        out
    }

    /// Cauchy norms, their consecutive ratios, penalty ratios and fitted
    /// orders as `quantity,eps_a,eps_b,value` rows. Missing values print as
    /// `nan`.
    pub fn summary_csv(&self) -> String {
        let fmt = |x: Option<f64>| x.map_or("nan".to_string(), |v| format!("{v:e}"));
        let mut out = String::from("quantity,eps_a,eps_b,value\n");
        for tr in &self.trajectories {
            let status = if tr.failed() { "failed" } else { "ok" };
            let _ = writeln!(out, "status_{status},{:e},,", tr.epsilon);
            let _ = writeln!(out, "penalty_final,{:e},,{}", tr.epsilon, fmt(tr.final_penalty()));
        }
        for (k, w) in self.trajectories.windows(2).enumerate() {
            let (a, b) = (&w[0], &w[1]);
            let ratio = a.final_penalty().zip(b.final_penalty()).map(|(x, y)| y / x);
            let _ = writeln!(out, "penalty_ratio,{:e},{:e},{}", a.epsilon, b.epsilon, fmt(ratio));
            for (i, name) in CauchyPair::NAMES.iter().enumerate() {
                let v = self.pairs[k].map(|p| p.values()[i]);
                let _ = writeln!(out, "cauchy_{name},{:e},{:e},{}", a.epsilon, b.epsilon, fmt(v));
            }
        }
        for (i, name) in CauchyPair::NAMES.iter().enumerate() {
            for (k, r) in self.cauchy_ratios(|p| p.values()[i]).into_iter().enumerate() {
                let (a, b) = (self.eps_list[k], self.eps_list[k + 2]);
                let _ = writeln!(out, "ratio_{name},{a:e},{b:e},{}", fmt(r));
            }
        }
        let (first, last) = (self.eps_list[0], self.eps_list[self.eps_list.len() - 1]);
        let _ = writeln!(out, "penalty_ratio_total,{first:e},{last:e},{}", fmt(self.penalty_ratio()));
        let pen: Vec<(f64, f64)> =
            self.trajectories.iter().filter_map(|t| t.final_penalty().map(|p| (t.epsilon, p))).collect();
        let _ = writeln!(out, "order_penalty,{first:e},{last:e},{}", fmt(Self::fitted_order(&pen)));
        for (i, name) in CauchyPair::NAMES.iter().enumerate() {
            let pts: Vec<(f64, f64)> = self.pairs.iter().flatten().map(|p| (p.eps_a, p.values()[i])).collect();
            let _ = writeln!(out, "order_{name},{first:e},{last:e},{}", fmt(Self::fitted_order(&pts)));
        }
        out
    }

    /// Writes `sweep_report.csv` and `sweep_summary.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> io::Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("sweep_report.csv"), self.report_csv())?;
        std::fs::write(dir.join("sweep_summary.csv"), self.summary_csv())
    }
}

fn seminorm2(f: &Field, s: i32) -> f64 {
    f.grid().spectral().forward(f).weighted_energy(|k2| k2.powi(s))
}

fn sample(state: &State) -> Sample {
    let inv = 1.0 / (4.0 * state.epsilon * state.epsilon);
    let g = state.u.grid();
    let penalty: f64 = (0..g.len())
        .map(|p| {
            let u = state.u.vec3(p);
            let d = 1.0 - u.iter().map(|x| x * x).sum::<f64>();
            inv * d * d
        })
        .sum::<f64>()
        * g.cell_volume();
    Sample {
        t: state.t,
        v_h1: (seminorm2(&state.v, 0) + seminorm2(&state.v, 1)).sqrt(),
        grad_u_h1: (seminorm2(&state.u, 1) + seminorm2(&state.u, 2)).sqrt(),
        penalty,
    }
}

fn trajectory(initial: &State, model: &ModelParams, config: &SimulationConfig, every: usize) -> Trajectory {
    let stepper = Stepper::new(model, config);
    let mut state = initial.clone();
    let mut tr = Trajectory {
        epsilon: initial.epsilon,
        samples: vec![sample(&state)],
        failure: None,
        states: vec![state.clone()],
    };
    let n_steps = (config.t_end / config.dt).round() as usize;
    for n in 1..=n_steps {
        match stepper.advance(&state, config.dt) {
            Ok(mut next) => {
                next.t = initial.t + n as f64 * config.dt;
                state = next;
            }
            Err(e) => {
                tr.failure = Some(e.to_string());
                return tr;
            }
        }
        if n % every == 0 || n == n_steps {
            tr.samples.push(sample(&state));
            tr.states.push(state.clone());
        }
    }
    tr
}

fn cauchy(a: &Trajectory, b: &Trajectory, tau: f64) -> CauchyPair {
    let mut p = CauchyPair {
        eps_a: a.epsilon,
        eps_b: b.epsilon,
        grad_u_linf_l2: 0.0,
        v_linf_l2: 0.0,
        grad_u_l2_h1: 0.0,
        v_l2_h1: 0.0,
        u_h2_late: 0.0,
        u_h3_late: 0.0,
        v_h2_late: 0.0,
        v_h3_late: 0.0,
    };
    let mut prev: Option<(f64, f64, f64)> = None;
    for (sa, sb) in a.states.iter().zip(&b.states) {
        let du = sa.u.sub(&sb.u);
        let dv = sa.v.sub(&sb.v);
        let su = [1, 2, 3].map(|s| seminorm2(&du, s));
        let sv = [0, 1, 2, 3].map(|s| seminorm2(&dv, s));
        p.grad_u_linf_l2 = p.grad_u_linf_l2.max(su[0].sqrt());
        p.v_linf_l2 = p.v_linf_l2.max(sv[0].sqrt());
        let (gu_h1, v_h1) = (su[0] + su[1], sv[0] + sv[1]);
        if let Some((t0, g0, v0)) = prev {
            let h = sa.t - t0;
            p.grad_u_l2_h1 += 0.5 * h * (g0 + gu_h1);
            p.v_l2_h1 += 0.5 * h * (v0 + v_h1);
        }
        prev = Some((sa.t, gu_h1, v_h1));
        if sa.t >= tau {
            p.u_h2_late = p.u_h2_late.max(su[1].sqrt());
            p.u_h3_late = p.u_h3_late.max(su[2].sqrt());
            p.v_h2_late = p.v_h2_late.max(sv[2].sqrt());
            p.v_h3_late = p.v_h3_late.max(sv[3].sqrt());
        }
    }
    p.grad_u_l2_h1 = p.grad_u_l2_h1.sqrt();
    p.v_l2_h1 = p.v_l2_h1.sqrt();
    p
}

/// Runs `initial` once per epsilon (in parallel) with the shared `config`
/// and compares consecutive runs at common sample times. A failed run is
/// recorded in its trajectory and excluded from the comparisons; the other
/// runs still complete.
pub fn epsilon_sweep(
    model: &ModelParams,
    config: &SimulationConfig,
    initial: &State,
    eps_list: &[f64],
    opts: &SweepOptions,
) -> Result<SweepReport, ExperimentError> {
    if eps_list.is_empty()
        || eps_list.iter().any(|e| !(*e > 0.0 && e.is_finite()))
        || eps_list.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(ExperimentError::BadEpsilonList);
    }
    let (umin, umax) = diagnostics::director_range(initial);
    let dev = (1.0 - umin).max(umax - 1.0);
    if dev > 1e-12 {
        return Err(ExperimentError::NonUnitDirector(dev));
    }
    let every = opts.sample_every.max(1);
    let trajectories: Vec<Trajectory> = eps_list
        .par_iter()
        .map(|&eps| {
            let mut cfg = config.clone();
            cfg.epsilon = eps;
            let mut s0 = initial.clone();
            s0.epsilon = eps;
            trajectory(&s0, model, &cfg, every)
        })
        .collect();
    let pairs = trajectories
        .windows(2)
        .map(|w| (!w[0].failed() && !w[1].failed()).then(|| cauchy(&w[0], &w[1], opts.tau)))
        .collect();
    Ok(SweepReport { eps_list: eps_list.to_vec(), trajectories, pairs })
}

/// Observed convergence order between consecutive refinements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Order {
    /// Both differences vanish identically.
    Exact,
    Observed(f64),
    /// The coarser difference vanished but the finer did not.
    Undetermined,
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Exact => f.write_str("exact"),
            Order::Observed(p) => write!(f, "{p:.3}"),
            Order::Undetermined => f.write_str("undetermined"),
        }
    }
}

fn order(coarse: f64, fine: f64) -> Order {
    match (coarse == 0.0, fine == 0.0) {
        (true, true) => Order::Exact,
        (true, false) => Order::Undetermined,
        _ => Order::Observed((coarse / fine).log2()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderStudy {
    pub dts: Vec<f64>,
    /// `|s_{dt_k} - s_{dt_{k+1}}|_{L^2}` at the final time, director and
    /// velocity together.
    pub differences: Vec<f64>,
    /// `log2` of consecutive difference ratios.
    pub orders: Vec<Order>,
    /// Time-averaged energy identity residual per dt.
    pub residuals: Vec<f64>,
    pub residual_orders: Vec<Order>,
}

impl OrderStudy {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("dt,residual,difference,order,residual_order\n");
        for (k, dt) in self.dts.iter().enumerate() {
            let d = self.differences.get(k).map_or(String::new(), |x| format!("{x:e}"));
            let o = k.checked_sub(1).and_then(|j| self.orders.get(j)).map_or(String::new(), |o| o.to_string());
            let ro = k.checked_sub(1).map_or(String::new(), |j| self.residual_orders[j].to_string());
            let _ = writeln!(out, "{dt:e},{:e},{d},{o},{ro}", self.residuals[k]);
        }
        out
    }
}

/// Runs `initial` to `config.t_end` once per time step of a halving
/// sequence and reports Richardson orders of the final states and of the
/// averaged energy residual.
pub fn dt_order_study(
    model: &ModelParams,
    config: &SimulationConfig,
    initial: &State,
    dt_list: &[f64],
) -> Result<OrderStudy, ExperimentError> {
    let halving = dt_list.windows(2).all(|w| ((w[0] / w[1]) - 2.0).abs() < 1e-9);
    if dt_list.len() < 3 || !halving || dt_list.iter().any(|d| !d.is_finite() || *d <= 0.0) {
        return Err(ExperimentError::BadDtList);
    }
    let runs: Vec<Result<(State, f64), ExperimentError>> = dt_list
        .par_iter()
        .map(|&dt| {
            let mut cfg = config.clone();
            cfg.dt = dt;
            let mut sink = MemorySink::default();
            let s = solver::run(initial.clone(), model, &cfg, &mut sink)?;
            let n = sink.rows.len().saturating_sub(1).max(1);
            let avg = sink.rows.iter().skip(1).map(|r| r.residual).sum::<f64>() / n as f64;
            Ok((s.final_state, avg))
        })
        .collect();
    let runs = runs.into_iter().collect::<Result<Vec<_>, _>>()?;
    let differences: Vec<f64> = runs
        .windows(2)
        .map(|w| {
            let du = grid::norm_l2(&w[0].0.u.sub(&w[1].0.u));
            let dv = grid::norm_l2(&w[0].0.v.sub(&w[1].0.v));
            (du * du + dv * dv).sqrt()
        })
        .collect();
    let residuals: Vec<f64> = runs.iter().map(|r| r.1).collect();
    Ok(OrderStudy {
        dts: dt_list.to_vec(),
        orders: differences.windows(2).map(|w| order(w[0], w[1])).collect(),
        residual_orders: residuals.windows(2).map(|w| order(w[0], w[1])).collect(),
        differences,
        residuals,
    })
}
