//! Model parameters, the saturating incidence and the two homogeneous states.
//!
//! The PDE is
//!
//! ```text
//! S_t = d1 S_xx - beta S I / (1 + sigma S) + gamma I
//! I_t = d2 I_xx + beta S I / (1 + sigma S) - gamma I
//! ```
//!
//! and the regime fixes how `d1`, `d2` scale with the small parameter.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{Error, Result};

pub const DEFAULT_EPSILON: f64 = 0.01;
pub const DEFAULT_ALPHA: f64 = 1.0;

/// Diffusion regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// `d1 = alpha * eps`, `d2 = eps`.
    #[serde(rename = "case1")]
    Case1ComparableSmall,
    /// `d1 = 1`, `d2 = eps`.
    #[serde(rename = "case2")]
    Case2SlowInfected,
    /// `d1 = eps`, `d2 = 1`.
    #[serde(rename = "case3")]
    Case3FastInfected,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Case1ComparableSmall => "case1",
            Regime::Case2SlowInfected => "case2",
            Regime::Case3FastInfected => "case3",
        }
    }

    /// `(d1, d2)` for the given small parameter and Case-1 ratio.
    pub fn diffusivities(&self, epsilon: f64, alpha: f64) -> (f64, f64) {
        match self {
            Regime::Case1ComparableSmall => (alpha * epsilon, epsilon),
            Regime::Case2SlowInfected => (1.0, epsilon),
            Regime::Case3FastInfected => (epsilon, 1.0),
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "case1" | "1" => Ok(Regime::Case1ComparableSmall),
            "case2" | "2" => Ok(Regime::Case2SlowInfected),
            "case3" | "3" => Ok(Regime::Case3FastInfected),
            other => Err(Error::InvalidInput(format!(
                "unknown regime {other:?} (expected case1, case2 or case3)"
            ))),
        }
    }
}

/// Unvalidated parameter record, as read from a config file or flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawParams {
    pub beta: f64,
    pub gamma: f64,
    pub sigma: f64,
    pub c: f64,
    pub epsilon: f64,
    pub alpha: f64,
    pub regime: Regime,
}

impl Default for RawParams {
    fn default() -> Self {
        Self {
            beta: 2.0,
            gamma: 1.0,
            sigma: 0.0,
            c: 1.0,
            epsilon: DEFAULT_EPSILON,
            alpha: DEFAULT_ALPHA,
            regime: Regime::Case2SlowInfected,
        }
    }
}

/// A single violated constraint.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Violation {
    #[error("admissibility violated: beta = {beta} <= gamma*(1+sigma) = {bound}")]
    AdmissibilityViolation { beta: f64, bound: f64 },
    #[error("{name} = {value} must be strictly positive")]
    NonPositiveParameter { name: &'static str, value: f64 },
    #[error("sigma = {0} must be non-negative")]
    NegativeSigma(f64),
    #[error("epsilon = {0} must be strictly positive")]
    BadEpsilon(f64),
    #[error("{name} is not finite")]
    NonFinite { name: &'static str },
}

/// Every constraint a raw record violated.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid parameters: {}", display_violations(.violations))]
pub struct ValidationError {
    pub violations: Vec<Violation>,
}

fn display_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

impl ValidationError {
    pub fn has_admissibility_violation(&self) -> bool {
        self.violations
            .iter()
            .any(|v| matches!(v, Violation::AdmissibilityViolation { .. }))
    }
}

/// Validated parameters. Construct through [`validate_params`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelParams {
    beta: f64,
    gamma: f64,
    sigma: f64,
    c: f64,
    epsilon: f64,
    alpha: f64,
    regime: Regime,
    d1: f64,
    d2: f64,
}

/// Check every constraint on a raw record and derive the diffusivities.
pub fn validate_params(raw: &RawParams) -> Result<ModelParams> {
    let mut violations = Vec::new();
    let named = [
        ("beta", raw.beta),
        ("gamma", raw.gamma),
        ("sigma", raw.sigma),
        ("c", raw.c),
        ("epsilon", raw.epsilon),
        ("alpha", raw.alpha),
    ];
    for (name, value) in named {
        if !value.is_finite() {
            violations.push(Violation::NonFinite { name });
        }
    }
    for (name, value) in [("beta", raw.beta), ("gamma", raw.gamma), ("c", raw.c), ("alpha", raw.alpha)] {
        if value.is_finite() && value <= 0.0 {
            violations.push(Violation::NonPositiveParameter { name, value });
        }
    }
    if raw.sigma.is_finite() && raw.sigma < 0.0 {
        violations.push(Violation::NegativeSigma(raw.sigma));
    }
    if raw.epsilon.is_finite() && raw.epsilon <= 0.0 {
        violations.push(Violation::BadEpsilon(raw.epsilon));
    }
    if raw.beta.is_finite() && raw.gamma.is_finite() && raw.sigma.is_finite() {
        let bound = raw.gamma * (1.0 + raw.sigma);
        if raw.beta <= bound {
            violations.push(Violation::AdmissibilityViolation { beta: raw.beta, bound });
        }
    }
    if !violations.is_empty() {
        return Err(ValidationError { violations }.into());
    }
    let (d1, d2) = raw.regime.diffusivities(raw.epsilon, raw.alpha);
    Ok(ModelParams {
        beta: raw.beta,
        gamma: raw.gamma,
        sigma: raw.sigma,
        c: raw.c,
        epsilon: raw.epsilon,
        alpha: raw.alpha,
        regime: raw.regime,
        d1,
        d2,
    })
}

impl ModelParams {
    pub fn new(beta: f64, gamma: f64, sigma: f64, c: f64, epsilon: f64, regime: Regime) -> Result<Self> {
        validate_params(&RawParams { beta, gamma, sigma, c, epsilon, alpha: DEFAULT_ALPHA, regime })
    }

    pub fn raw(&self) -> RawParams {
        RawParams {
            beta: self.beta,
            gamma: self.gamma,
            sigma: self.sigma,
            c: self.c,
            epsilon: self.epsilon,
            alpha: self.alpha,
            regime: self.regime,
        }
    }

    pub fn with_speed(&self, c: f64) -> Result<Self> {
        validate_params(&RawParams { c, ..self.raw() })
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        validate_params(&RawParams { epsilon, ..self.raw() })
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        validate_params(&RawParams { alpha, ..self.raw() })
    }

    pub fn with_regime(&self, regime: Regime) -> Self {
        let (d1, d2) = regime.diffusivities(self.epsilon, self.alpha);
        Self { regime, d1, d2, ..self.clone() }
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn sigma(&self) -> f64 {
        self.sigma
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn regime(&self) -> Regime {
        self.regime
    }
    pub fn d1(&self) -> f64 {
        self.d1
    }
    pub fn d2(&self) -> f64 {
        self.d2
    }

    /// Susceptible density of the endemic state, `gamma / (beta - gamma sigma)`.
    pub fn s_endemic(&self) -> f64 {
        self.gamma / (self.beta - self.gamma * self.sigma)
    }

    /// Infected density of the endemic state.
    pub fn i_endemic(&self) -> f64 {
        1.0 - self.s_endemic()
    }

    /// `(beta - (1+sigma) gamma) / (1+sigma)`: the linear growth rate of
    /// infection at the disease-free state.
    pub fn growth_rate(&self) -> f64 {
        (self.beta - (1.0 + self.sigma) * self.gamma) / (1.0 + self.sigma)
    }

    /// `S / (1 + sigma S)` without the density check.
    #[inline]
    pub fn saturation(&self, s: f64) -> f64 {
        s / (1.0 + self.sigma * s)
    }

    /// Net per-unit-volume infection flux `beta S I / (1 + sigma S) - gamma I`.
    #[inline]
    pub fn net_infection(&self, s: f64, i: f64) -> f64 {
        self.beta * self.saturation(s) * i - self.gamma * i
    }
}

/// Incidence per infected individual, `beta S / (1 + sigma S)`.
pub fn incidence_rate(s: f64, params: &ModelParams) -> Result<f64> {
    if s < 0.0 {
        return Err(Error::NegativeDensity(s));
    }
    Ok(params.beta * params.saturation(s))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EquilibriumLabel {
    #[serde(rename = "A")]
    Endemic,
    #[serde(rename = "B")]
    DiseaseFree,
}

/// A homogeneous state in full `(S, U, I, V)` coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Equilibrium {
    pub label: EquilibriumLabel,
    pub coords: [f64; 4],
}

impl Equilibrium {
    pub fn s(&self) -> f64 {
        self.coords[0]
    }
    pub fn i(&self) -> f64 {
        self.coords[2]
    }
    /// `(S, I, V)`.
    pub fn reduced3(&self) -> [f64; 3] {
        [self.coords[0], self.coords[2], self.coords[3]]
    }
    /// `(S, I)` for the Case-2 plane.
    pub fn case2(&self) -> [f64; 2] {
        [self.coords[0], self.coords[2]]
    }
    /// `(I, V)` for the Case-3 plane.
    pub fn case3(&self) -> [f64; 2] {
        [self.coords[2], self.coords[3]]
    }
}

/// Endemic state `A` and disease-free state `B`.
pub fn equilibria(params: &ModelParams) -> (Equilibrium, Equilibrium) {
    let s = params.s_endemic();
    (
        Equilibrium { label: EquilibriumLabel::Endemic, coords: [s, 0.0, 1.0 - s, 0.0] },
        Equilibrium { label: EquilibriumLabel::DiseaseFree, coords: [1.0, 0.0, 0.0, 0.0] },
    )
}
