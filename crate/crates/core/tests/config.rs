use nematic_flow::config::{Config, ConfigError, Scheme, KEYS};
use nematic_flow::params::ParamError;
use proptest::prelude::*;

#[test]
fn empty_text_gives_defaults() {
    let c = Config::parse("").unwrap();
    assert_eq!(c, Config::default());
    assert_eq!(c.sim.grid_dims, vec![64, 64]);
    assert_eq!(c.sim.scheme, Scheme::ExplicitRk2);
    assert!(c.sim.dealias);
    assert_eq!(c.sim.director_band, (0.5, 1.5));
}

#[test]
fn comments_blank_lines_and_whitespace() {
    let c = Config::parse("# header\n\n  epsilon =  0.1  # trailing\nscheme=imex\nnz = 8\n").unwrap();
    assert_eq!(c.sim.epsilon, 0.1);
    assert_eq!(c.sim.scheme, Scheme::Imex);
    assert_eq!(c.sim.grid_dims, vec![64, 64, 8]);
    assert_eq!(c.sim.dim(), 3);
}

#[test]
fn overrides_apply_after_the_file() {
    let c = Config::parse_with_overrides("dt = 0.01\nseed = 3\n", &["dt=0.002", "seed = 9"]).unwrap();
    assert_eq!(c.sim.dt, 0.002);
    assert_eq!(c.sim.seed, 9);
}

#[test]
fn errors_name_the_problem() {
    assert!(matches!(Config::parse("epsilno = 0.1"), Err(ConfigError::UnknownKey(k)) if k == "epsilno"));
    assert!(matches!(Config::parse("just words"), Err(ConfigError::Syntax { line: 1, .. })));
    assert!(matches!(Config::parse("dt = fast"), Err(ConfigError::BadValue { .. })));
    assert!(matches!(Config::parse("scheme = rk4"), Err(ConfigError::BadValue { .. })));
    assert!(matches!(Config::parse_with_overrides("", &["dt"]), Err(ConfigError::BadOverride(_))));
    assert!(matches!(Config::parse_with_overrides("", &["bogus=1"]), Err(ConfigError::UnknownKey(_))));
    assert!(matches!(Config::parse("nx = 63"), Err(ConfigError::Invalid(_))));
    assert!(matches!(Config::parse("band_lo = 1.1"), Err(ConfigError::Invalid(_))));
    assert!(matches!(Config::parse("epsilon = -1"), Err(ConfigError::Invalid(_))));
    assert!(matches!(Config::parse("k4 = 1.5"), Err(ConfigError::Param(ParamError::EricksenViolation(_)))));
    assert!(matches!(Config::parse("alpha5 = 0.9"), Err(ConfigError::Param(ParamError::ParodiViolation { .. }))));
}

#[test]
fn dump_lists_only_known_keys() {
    let c = Config::parse("l3_radius = 0.5\nl3_threshold = 2\nnz = 6\nlz = 3\n").unwrap();
    for line in c.dump().lines() {
        let key = line.split('=').next().unwrap().trim();
        assert!(KEYS.contains(&key), "{key}");
    }
}

proptest! {
    #[test]
    fn dump_round_trips(
        eps in 0.01f64..1.0,
        dt in 1e-6f64..1e-2,
        n in 2usize..40,
        lx in 0.5f64..20.0,
        seed in any::<u64>(),
        imex in any::<bool>(),
        dealias in any::<bool>(),
        radius in proptest::option::of(0.1f64..2.0),
        three_d in any::<bool>(),
    ) {
        let mut text = format!(
            "epsilon = {eps}\ndt = {dt}\nnx = {}\nlx = {lx}\nseed = {seed}\nscheme = {}\ndealias = {dealias}\n",
            2 * n,
            if imex { "imex" } else { "explicit-rk2" }
        );
        if let Some(r) = radius {
            text.push_str(&format!("l3_radius = {r}\n"));
        }
        if three_d {
            text.push_str("nz = 6\nlz = 1.5\n");
        }
        let c = Config::parse(&text).unwrap();
        prop_assert_eq!(Config::parse(&c.dump()).unwrap(), c);
    }
}
