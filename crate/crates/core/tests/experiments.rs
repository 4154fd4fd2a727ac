mod common;

use nematic_flow::config::{Config, Scheme};
use nematic_flow::experiments::{dt_order_study, epsilon_sweep, ExperimentError, Order, SweepOptions, SweepReport};
use nematic_flow::grid::Field;
use nematic_flow::solver::{make_initial, InitialOptions, State};

fn small_config(scheme: Scheme) -> Config {
    let mut c = Config::parse("nx = 32\nny = 32\n").unwrap();
    c.sim.scheme = scheme;
    c.sim.dt = 4e-4;
    c.sim.t_end = 0.04;
    c
}

fn twist(c: &Config, amp: f64) -> State {
    let g = c.sim.grid().unwrap();
    make_initial("twist", &g, c.sim.epsilon, 0, &InitialOptions { amplitude: amp, v_amplitude: 0.0 }).unwrap()
}

fn uniform(c: &Config) -> State {
    let g = c.sim.grid().unwrap();
    State::new(0.0, Field::from_points::<3>(&g, |_| [0.0, 0.0, 1.0]), Field::zeros(&g, 2), c.sim.epsilon)
}

#[test]
fn constant_data_has_zero_differences_and_penalties() {
    let c = small_config(Scheme::Imex);
    let r = epsilon_sweep(&c.model, &c.sim, &uniform(&c), &[0.4, 0.2, 0.1], &SweepOptions::default()).unwrap();
    for t in &r.trajectories {
        assert!(!t.failed());
        assert!(t.samples.iter().all(|s| s.penalty == 0.0 && s.v_h1 == 0.0 && s.grad_u_h1 == 0.0));
    }
    for p in r.pairs.iter().map(|p| p.unwrap()) {
        assert_eq!(p.grad_u_linf_l2 + p.v_linf_l2 + p.grad_u_l2_h1 + p.v_l2_h1, 0.0);
        assert_eq!(p.u_h2_late + p.u_h3_late + p.v_h2_late + p.v_h3_late, 0.0);
    }
}

#[test]
fn single_epsilon_has_no_pairs() {
    let c = small_config(Scheme::Imex);
    let r = epsilon_sweep(&c.model, &c.sim, &twist(&c, 0.5), &[0.2], &SweepOptions::default()).unwrap();
    assert!(r.pairs.is_empty());
    assert_eq!(r.trajectories[0].samples.len(), 11);
    assert!(r.summary_csv().contains("penalty_final,2e-1"));
}

#[test]
fn sweep_preconditions() {
    let c = small_config(Scheme::Imex);
    let s = twist(&c, 0.5);
    for bad in [&[][..], &[0.1, 0.2], &[0.2, 0.2], &[0.2, -0.1]] {
        assert!(matches!(
            epsilon_sweep(&c.model, &c.sim, &s, bad, &SweepOptions::default()),
            Err(ExperimentError::BadEpsilonList)
        ));
    }
    let g = c.sim.grid().unwrap();
    let tilt = make_initial("bump-tilt", &g, 0.2, 0, &InitialOptions::default()).unwrap();
    assert!(matches!(
        epsilon_sweep(&c.model, &c.sim, &tilt, &[0.2, 0.1], &SweepOptions::default()),
        Err(ExperimentError::NonUnitDirector(_))
    ));
}

#[test]
fn failed_runs_are_marked_without_stopping_the_others() {
    let mut c = small_config(Scheme::ExplicitRk2);
    // the explicit penalty is unstable at eps = 0.02 with this step
    c.sim.dt = 2e-3;
    c.sim.t_end = 0.1;
    let r = epsilon_sweep(&c.model, &c.sim, &twist(&c, 0.5), &[0.5, 0.4, 0.02], &SweepOptions::default()).unwrap();
    assert!(!r.trajectories[0].failed() && !r.trajectories[1].failed());
    assert!(r.trajectories[2].failed());
    assert!(r.pairs[0].is_some() && r.pairs[1].is_none());
    assert!(r.report_csv().contains(",failed"));
    assert!(r.summary_csv().contains("status_failed,2e-2"));
}

#[test]
fn fitted_order_recovers_power_laws() {
    let pts: Vec<(f64, f64)> = [0.4, 0.2, 0.1].iter().map(|&e: &f64| (e, 3.0 * e.powf(1.5))).collect();
    assert!((SweepReport::fitted_order(&pts).unwrap() - 1.5).abs() < 1e-12);
    assert_eq!(SweepReport::fitted_order(&pts[..1]), None);
}

#[test]
fn sweep_output_is_deterministic() {
    let c = small_config(Scheme::Imex);
    let s = twist(&c, 0.8);
    let opts = SweepOptions { sample_every: 5, tau: 0.02 };
    let a = epsilon_sweep(&c.model, &c.sim, &s, &[0.4, 0.2, 0.1], &opts).unwrap();
    let b = epsilon_sweep(&c.model, &c.sim, &s, &[0.4, 0.2, 0.1], &opts).unwrap();
    assert_eq!(a.report_csv(), b.report_csv());
    assert_eq!(a.summary_csv(), b.summary_csv());
    let dir = tempfile::tempdir().unwrap();
    a.write(dir.path()).unwrap();
    assert_eq!(std::fs::read_to_string(dir.path().join("sweep_report.csv")).unwrap(), a.report_csv());
}

fn observed(o: Order) -> f64 {
    match o {
        Order::Observed(p) => p,
        other => panic!("expected a number, got {other}"),
    }
}

#[test]
fn heun_is_second_order() {
    let c = small_config(Scheme::ExplicitRk2);
    let s = twist(&c, 0.5);
    let study = dt_order_study(&c.model, &c.sim, &s, &[4e-4, 2e-4, 1e-4]).unwrap();
    assert!((observed(study.orders[0]) - 2.0).abs() <= 0.3, "{:?}", study);
    assert!((observed(study.residual_orders[0]) - 2.0).abs() <= 0.3, "{:?}", study);
    assert!((observed(study.residual_orders[1]) - 2.0).abs() <= 0.3, "{:?}", study);
}

#[test]
fn imex_is_first_order() {
    let c = small_config(Scheme::Imex);
    let mut s = twist(&c, 0.5);
    s.u.scale(0.95);
    let study = dt_order_study(&c.model, &c.sim, &s, &[4e-4, 2e-4, 1e-4]).unwrap();
    assert!((observed(study.orders[0]) - 1.0).abs() <= 0.3, "{:?}", study);
    assert!((observed(study.residual_orders[1]) - 1.0).abs() <= 0.3, "{:?}", study);
}

#[test]
fn constant_data_is_exact() {
    let c = small_config(Scheme::ExplicitRk2);
    let study = dt_order_study(&c.model, &c.sim, &uniform(&c), &[4e-4, 2e-4, 1e-4]).unwrap();
    assert_eq!(study.orders, vec![Order::Exact]);
    assert!(study.differences.iter().all(|d| *d == 0.0));
    assert!(study.to_csv().contains("exact"));
    assert!(matches!(
        dt_order_study(&c.model, &c.sim, &uniform(&c), &[4e-4, 3e-4, 1e-4]),
        Err(ExperimentError::BadDtList)
    ));
}
