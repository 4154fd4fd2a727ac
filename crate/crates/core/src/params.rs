//! Material coefficients and their admissibility checks.
//!
//! Frank elastic constants must satisfy the strong Ericksen inequalities and
//! the Leslie viscosities must satisfy the Parodi relation together with the
//! positivity conditions that make the energy law dissipative. Both types can
//! only be obtained through their validating constructors, so every solver
//! entry point receives admissible coefficients.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::oseen_frank::pointwise;

/// Relative tolerance for the Parodi equality.
pub const PARODI_RTOL: f64 = 1e-12;

/// Default number of samples drawn by [`estimate_coercivity`].
pub const DEFAULT_COERCIVITY_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("strong Ericksen inequalities violated: {0}")]
    EricksenViolation(&'static str),
    #[error("Parodi relation alpha2+alpha3=alpha6-alpha5 violated ({lhs} != {rhs})")]
    ParodiViolation { lhs: f64, rhs: f64 },
    #[error("gamma1 = alpha3 - alpha2 must be positive, got {0}")]
    GammaOneNonpositive(f64),
    #[error("beta = alpha5 + alpha6 - gamma2^2/gamma1 must be nonnegative, got {0}")]
    BetaNegative(f64),
    #[error("alpha4 must be positive, got {0}")]
    Alpha4Nonpositive(f64),
    #[error("alpha1 must be nonnegative, got {0}")]
    Alpha1Negative(f64),
    #[error("coefficient {0} is not finite")]
    NonFinite(&'static str),
    #[error("coercivity sampling needs at least one sample")]
    NoSamples,
    #[error("sampled Hessian form is not positive: min value {0}")]
    CoercivitySamplingFailure(f64),
}

/// Frank elastic constants (splay, twist, bend, saddle-splay).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElasticConstants {
    k1: f64,
    k2: f64,
    k3: f64,
    k4: f64,
}

impl ElasticConstants {
    pub fn new(k1: f64, k2: f64, k3: f64, k4: f64) -> Result<Self, ParamError> {
        validate_elastic([k1, k2, k3, k4])
    }

    /// The isotropic one-constant case `k1 = k2 = k3 = 1, k4 = 0`.
    pub fn one_constant() -> Self {
        Self { k1: 1.0, k2: 1.0, k3: 1.0, k4: 0.0 }
    }

    pub fn k1(&self) -> f64 {
        self.k1
    }
    pub fn k2(&self) -> f64 {
        self.k2
    }
    pub fn k3(&self) -> f64 {
        self.k3
    }
    pub fn k4(&self) -> f64 {
        self.k4
    }

    pub fn raw(&self) -> [f64; 4] {
        [self.k1, self.k2, self.k3, self.k4]
    }

    /// Smallest of the splay, twist and bend constants. The coercive
    /// equivalent density is `a|p|^2` plus nonnegative terms with this `a`.
    pub fn min_frank(&self) -> f64 {
        self.k1.min(self.k2).min(self.k3)
    }

    /// Uniform rescaling; admissibility is preserved for `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self, ParamError> {
        validate_elastic(self.raw().map(|k| k * c))
    }
}

/// Accepts the constants iff `k1 > 0`, `k2 > |k4|`, `k3 > 0` and `2 k1 > k2 + k4`.
pub fn validate_elastic(k: [f64; 4]) -> Result<ElasticConstants, ParamError> {
    const NAMES: [&str; 4] = ["k1", "k2", "k3", "k4"];
    for (v, name) in k.iter().zip(NAMES) {
        if !v.is_finite() {
            return Err(ParamError::NonFinite(name));
        }
    }
    let [k1, k2, k3, k4] = k;
    if k1 <= 0.0 {
        return Err(ParamError::EricksenViolation("k1 > 0"));
    }
    if k2 <= k4.abs() {
        return Err(ParamError::EricksenViolation("k2 > |k4|"));
    }
    if k3 <= 0.0 {
        return Err(ParamError::EricksenViolation("k3 > 0"));
    }
    if 2.0 * k1 <= k2 + k4 {
        return Err(ParamError::EricksenViolation("2 k1 > k2 + k4"));
    }
    Ok(ElasticConstants { k1, k2, k3, k4 })
}

/// Leslie viscosities with the derived rotational viscosity `gamma1`,
/// torque coefficient `gamma2` and `beta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeslieCoefficients {
    alpha: [f64; 6],
    gamma1: f64,
    gamma2: f64,
    beta: f64,
}

impl LeslieCoefficients {
    pub fn new(alpha: [f64; 6]) -> Result<Self, ParamError> {
        validate_leslie(alpha)
    }

    /// `alpha(1)` .. `alpha(6)`, one-based like the usual notation.
    pub fn alpha(&self, i: usize) -> f64 {
        self.alpha[i - 1]
    }

    pub fn raw(&self) -> [f64; 6] {
        self.alpha
    }

    pub fn gamma1(&self) -> f64 {
        self.gamma1
    }

    pub fn gamma2(&self) -> f64 {
        self.gamma2
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// Checks, in order: `alpha1 >= 0`, `alpha4 > 0`, `gamma1 > 0`, `beta >= 0`,
/// then the Parodi relation to relative tolerance [`PARODI_RTOL`].
pub fn validate_leslie(alpha: [f64; 6]) -> Result<LeslieCoefficients, ParamError> {
    const NAMES: [&str; 6] = ["alpha1", "alpha2", "alpha3", "alpha4", "alpha5", "alpha6"];
    for (v, name) in alpha.iter().zip(NAMES) {
        if !v.is_finite() {
            return Err(ParamError::NonFinite(name));
        }
    }
    let [a1, a2, a3, a4, a5, a6] = alpha;
    if a1 < 0.0 {
        return Err(ParamError::Alpha1Negative(a1));
    }
    if a4 <= 0.0 {
        return Err(ParamError::Alpha4Nonpositive(a4));
    }
    let gamma1 = a3 - a2;
    if gamma1 <= 0.0 {
        return Err(ParamError::GammaOneNonpositive(gamma1));
    }
    let gamma2 = a6 - a5;
    let beta = a5 + a6 - gamma2 * gamma2 / gamma1;
    if beta < 0.0 {
        return Err(ParamError::BetaNegative(beta));
    }
    let lhs = a2 + a3;
    let scale = a2.abs().max(a3.abs()).max(a5.abs()).max(a6.abs());
    if (lhs - gamma2).abs() > PARODI_RTOL * scale {
        return Err(ParamError::ParodiViolation { lhs, rhs: gamma2 });
    }
    Ok(LeslieCoefficients { alpha, gamma1, gamma2, beta })
}

/// Sampled lower bound of the p-Hessian quadratic form `xi : W_pp(z) : xi`
/// over random unit directors `z` and random unit 3x3 matrices `xi`.
///
/// The Hessian is that of the coercive equivalent density (see
/// [`crate::oseen_frank::hessian_apply`]); it is constant in `p`.
pub fn estimate_coercivity(k: &ElasticConstants, samples: usize, seed: u64) -> Result<f64, ParamError> {
    if samples == 0 {
        return Err(ParamError::NoSamples);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min = f64::INFINITY;
    for _ in 0..samples {
        let z = unit_vector::<3>(&mut rng);
        let flat = unit_vector::<9>(&mut rng);
        let xi = [[flat[0], flat[1], flat[2]], [flat[3], flat[4], flat[5]], [flat[6], flat[7], flat[8]]];
        let hx = pointwise::hessian_apply(k, &z, &xi);
        let form: f64 = (0..3).flat_map(|a| (0..3).map(move |i| (a, i))).map(|(a, i)| hx[a][i] * xi[a][i]).sum();
        min = min.min(form);
    }
    if min > 0.0 {
        Ok(min)
    } else {
        Err(ParamError::CoercivitySamplingFailure(min))
    }
}

fn unit_vector<const N: usize>(rng: &mut impl Rng) -> [f64; N] {
    loop {
        let mut v = [0.0; N];
        for x in v.iter_mut() {
            *x = rng.sample(StandardNormal);
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-12 {
            return v.map(|x| x / n);
        }
    }
}

/// Elastic and viscous coefficients of one model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub elastic: ElasticConstants,
    pub leslie: LeslieCoefficients,
}
