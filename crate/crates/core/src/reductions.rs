//! Regime-specific reductions: critical manifolds, reduced flows, the
//! large-speed rescaling, minimum speeds and the `sigma = 0` Burgers-FKPP
//! specialization.
//!
//! The singularly perturbed systems of all three regimes share one
//! constructor, [`slow_fast_system`], keyed by regime, [`Form`] and `eps`.
//! Writing `N = (N_S, N_I, N_V)` for the regime numerators
//!
//! | regime | `N_S`                       | fast variables |
//! |--------|-----------------------------|----------------|
//! | Case 1 | `(-eps V - c(I+S-1)) / alpha` | `S`, `V`     |
//! | Case 2 | `-eps V - c(I+S-1)`         | `V`            |
//! | Case 3 | `-V - c(I+S-1)`             | `S`            |
//!
//! with `N_I = V` and `N_V = -cV - R(S, I)`, the slow form (independent
//! variable `z`) divides the fast components by `eps`, and the fast form
//! (independent variable `z / eps`) multiplies the slow components by `eps`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ModelParams, Regime};
use crate::phasespace::{PhaseState, System, SystemId};

/// Independent-variable scaling of a slow/fast system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Form {
    Slow,
    Fast,
}

/// Indices into `(S, I, V)` of the fast variables of a regime.
pub fn fast_variables(regime: Regime) -> &'static [usize] {
    match regime {
        Regime::Case1ComparableSmall => &[0, 2],
        Regime::Case2SlowInfected => &[2],
        Regime::Case3FastInfected => &[0],
    }
}

fn numerators(regime: Regime, x: &[f64; 3], params: &ModelParams, eps: f64) -> [f64; 3] {
    let [s, i, v] = *x;
    let c = params.c();
    let drift = c * (i + s - 1.0);
    let n_s = match regime {
        Regime::Case1ComparableSmall => (-eps * v - drift) / params.alpha(),
        Regime::Case2SlowInfected => -eps * v - drift,
        Regime::Case3FastInfected => -v - drift,
    };
    [n_s, v, -c * v - params.net_infection(s, i)]
}

/// Slow/fast right-hand side for the regime stored in `params`.
///
/// The slow form needs `eps > 0`; the fast form accepts `eps = 0`, where it
/// becomes the layer problem whose equilibria form the critical manifold.
pub fn slow_fast_rhs(x: &[f64; 3], params: &ModelParams, form: Form, eps: f64) -> Result<[f64; 3]> {
    slow_fast_rhs_for(params.regime(), x, params, form, eps)
}

fn slow_fast_rhs_for(regime: Regime, x: &[f64; 3], params: &ModelParams, form: Form, eps: f64) -> Result<[f64; 3]> {
    if !(eps >= 0.0 && eps.is_finite()) || (form == Form::Slow && eps == 0.0) {
        return Err(Error::BadEpsilon(eps));
    }
    let mut out = numerators(regime, x, params, eps);
    let fast = fast_variables(regime);
    for (k, val) in out.iter_mut().enumerate() {
        let is_fast = fast.contains(&k);
        match form {
            Form::Slow if is_fast => *val /= eps,
            Form::Fast if !is_fast => *val *= eps,
            _ => {}
        }
    }
    Ok(out)
}

/// The slow/fast system of `params.regime()` as a [`System`].
pub fn slow_fast_system(params: &ModelParams, form: Form, eps: f64) -> Result<System> {
    if !(eps >= 0.0 && eps.is_finite()) || (form == Form::Slow && eps == 0.0) {
        return Err(Error::BadEpsilon(eps));
    }
    Ok(System::new(SystemId::SlowFast { form, eps }, params.clone()))
}

/// Reduced flow on the Case-1 critical manifold `{S = 1 - I, -cV = R}`.
///
/// Equal to the `V` component of [`case1_manifold_point`], since `I' = V`.
pub fn case1_reduced_flow(i: f64, params: &ModelParams) -> f64 {
    let (beta, gamma, sigma, c) = (params.beta(), params.gamma(), params.sigma(), params.c());
    i * (gamma - (beta - sigma * gamma) * (1.0 - i)) / (c * (1.0 + sigma * (1.0 - i)))
}

/// Derivatives of [`case1_reduced_flow`] at the endemic and disease-free
/// states, `(positive, negative)`.
pub fn case1_eigs(params: &ModelParams) -> (f64, f64) {
    let (beta, gamma, sigma, c) = (params.beta(), params.gamma(), params.sigma(), params.c());
    let b = beta - sigma * gamma;
    (params.i_endemic() * b * b / (c * beta), -params.growth_rate() / c)
}

/// The point of the Case-1 critical manifold above `I`.
pub fn case1_manifold_point(i: f64, params: &ModelParams) -> PhaseState {
    let (beta, gamma, sigma, c) = (params.beta(), params.gamma(), params.sigma(), params.c());
    let v = -beta * i * (1.0 - i) / (c * (1.0 + sigma * (1.0 - i))) + gamma * i / c;
    PhaseState::new(SystemId::Reduced3, vec![1.0 - i, i, v]).expect("finite manifold point")
}

/// Case-1 fast (layer) system in `(S, I, V)`.
pub fn case1_fast_rhs(state: &PhaseState, params: &ModelParams, eps: f64) -> Result<[f64; 3]> {
    let x = state.coords();
    if x.len() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, got: x.len() });
    }
    slow_fast_rhs_for(Regime::Case1ComparableSmall, &[x[0], x[1], x[2]], params, Form::Fast, eps)
}

/// Case-2 planar flow on the slow manifold, in `(S, I)`.
pub fn case2_reduced_rhs(s: f64, i: f64, params: &ModelParams) -> [f64; 2] {
    let (beta, gamma, c) = (params.beta(), params.gamma(), params.c());
    [-c * (i + s - 1.0), -(beta / c) * i * (params.saturation(s) - gamma / beta)]
}

/// Eigenvalues of the Case-2 planar flow at the disease-free state; both negative.
pub fn case2_eigs_b(params: &ModelParams) -> (f64, f64) {
    (-params.growth_rate() / params.c(), -params.c())
}

/// Eigenvalues of the Case-2 planar flow at the endemic state, `(unstable, stable)`.
pub fn case2_eigs_a(params: &ModelParams) -> (f64, f64) {
    let (beta, gamma, sigma, c) = (params.beta(), params.gamma(), params.sigma(), params.c());
    let q = (beta - sigma * gamma) * (beta - (1.0 + sigma) * gamma) / beta;
    let root = (c * c + 4.0 * q).sqrt();
    ((-c + root) / 2.0, (-c - root) / 2.0)
}

/// Case-2 flow in the stretched variable, with `delta = 1/c^2`.
pub fn case2_rescaled_rhs(s: f64, i: f64, params: &ModelParams, delta: f64) -> Result<[f64; 2]> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::InvalidInput(format!("delta must be finite and >= 0, got {delta}")));
    }
    let (beta, gamma) = (params.beta(), params.gamma());
    Ok([1.0 - i - s, -delta * beta * i * (params.saturation(s) - gamma / beta)])
}

/// Slow flow on the limit line `S = 1 - I` as `delta -> 0`.
pub fn case2_limit_flow(i: f64, params: &ModelParams) -> f64 {
    let (beta, gamma) = (params.beta(), params.gamma());
    -beta * i * (params.saturation(1.0 - i) - gamma / beta)
}

fn saturation_checked(h: f64, params: &ModelParams) -> Result<f64> {
    let denom = 1.0 + params.sigma() * h;
    if denom.abs() < 1e-14 {
        return Err(Error::SingularDenominator { h });
    }
    Ok(h / denom)
}

/// Case-3 planar flow on the slow manifold `S = 1 - I - V/c`, in `(I, V)`.
pub fn case3_reduced_rhs(i: f64, v: f64, params: &ModelParams) -> Result<[f64; 2]> {
    let (beta, gamma, c) = (params.beta(), params.gamma(), params.c());
    let g = saturation_checked(1.0 - i - v / c, params)?;
    Ok([v, -c * v - beta * i * (g - gamma / beta)])
}

/// Eigenvalues of the Case-3 planar flow at the endemic state: `(-c, positive)`.
pub fn case3_eigs_a(params: &ModelParams) -> (f64, f64) {
    let (beta, gamma, sigma, c) = (params.beta(), params.gamma(), params.sigma(), params.c());
    (-c, (beta - (1.0 + sigma) * gamma) * (beta - gamma * sigma) / (c * beta))
}

/// Eigenvalues of the Case-3 planar flow at the disease-free state.
///
/// Roots of `lambda^2 + c lambda + K`; a complex pair below the minimum speed.
pub fn case3_eigs_b(params: &ModelParams) -> (Complex64, Complex64) {
    let c = params.c();
    let disc = Complex64::new(c * c / 4.0 - params.growth_rate(), 0.0).sqrt();
    let mid = Complex64::new(-c / 2.0, 0.0);
    (mid + disc, mid - disc)
}

/// Open interval of trapping slopes. Degenerate (`lo == hi`) at the
/// minimum speed, where it contains no point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeInterval {
    pub lo: f64,
    pub hi: f64,
}

impl SlopeInterval {
    pub fn contains(&self, r: f64) -> bool {
        self.lo < r && r < self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// Minimum speed together with the slope interval at a given speed, when it exists.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpeedBound {
    pub c_min: f64,
    pub r_interval: Option<SlopeInterval>,
}

impl SpeedBound {
    pub fn at(params: &ModelParams) -> Self {
        Self { c_min: case3_min_speed(params), r_interval: case3_slope_interval(params, params.c()).ok() }
    }
}

/// `2 sqrt(K)` with `K = (beta - (1+sigma) gamma)/(1+sigma)`.
pub fn case3_min_speed(params: &ModelParams) -> f64 {
    2.0 * params.growth_rate().sqrt()
}

/// Slopes `r` for which the Case-3 trapping triangle is positively invariant at speed `c`.
pub fn case3_slope_interval(params: &ModelParams, c: f64) -> Result<SlopeInterval> {
    let c_min = case3_min_speed(params);
    if !(c >= c_min) {
        return Err(Error::SpeedBelowBound { c, c_min });
    }
    let root = (c * c - 4.0 * params.growth_rate()).max(0.0).sqrt();
    Ok(SlopeInterval { lo: ((c - root) / 2.0).max(0.0), hi: ((c + root) / 2.0).min(c) })
}

/// Residual of the second-order equation satisfied by the Case-3 infected profile.
pub fn kpp_second_order_residual(i: f64, iy: f64, iyy: f64, params: &ModelParams) -> Result<f64> {
    let (beta, gamma, c) = (params.beta(), params.gamma(), params.c());
    let g = saturation_checked(1.0 - i - iy / c, params)?;
    Ok(iyy + c * iy + beta * i * (g - gamma / beta))
}

/// Burgers-FKPP constants for `sigma = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FkppParameters {
    /// Nonlinear advection strength in the scaled equation, `sqrt(beta - gamma)/c`.
    pub k: f64,
    /// Minimum speed of the scaled equation.
    pub c_scaled_min: f64,
    /// Minimum speed in the original variables, `2 sqrt(beta - gamma)`.
    pub c_original_min: f64,
}

/// Minimum speed of the scaled Burgers-FKPP equation as a function of `k`.
pub fn burgers_fkpp_min_speed(k: f64) -> f64 {
    if k < 2.0 {
        2.0
    } else {
        k / 2.0 + 2.0 / k
    }
}

pub fn fkpp_parameters(params: &ModelParams) -> Result<FkppParameters> {
    if params.sigma() != 0.0 {
        return Err(Error::SigmaNotZero(params.sigma()));
    }
    let root = (params.beta() - params.gamma()).sqrt();
    let k = root / params.c();
    Ok(FkppParameters { k, c_scaled_min: burgers_fkpp_min_speed(k), c_original_min: 2.0 * root })
}

/// First-order form of the Burgers-FKPP traveling-wave equation, `(I, V)`.
pub fn burgers_fkpp_rhs_tw(i: f64, v: f64, params: &ModelParams) -> Result<[f64; 2]> {
    if params.sigma() != 0.0 {
        return Err(Error::SigmaNotZero(params.sigma()));
    }
    let (beta, gamma, c) = (params.beta(), params.gamma(), params.c());
    Ok([v, (beta * i / c - c) * v - beta * i * (1.0 - gamma / beta - i)])
}

/// Invariant manifolds of the reductions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ManifoldId {
    /// Case 1: `S = 1 - I` and `-cV - R = 0`.
    M0Case1,
    /// Case 2: `V = -(beta/c)(S/(1+sigma S) - gamma/beta) I`.
    N0Case2,
    /// Case 3: `S = 1 - I - V/c`.
    K0Case3,
    /// Large speed: `S = 1 - I`.
    L0LargeC,
}

impl ManifoldId {
    /// Absolute defining residual at `(S, I, V)`; `v` is ignored for `L0`.
    pub fn residual(&self, s: f64, i: f64, v: f64, params: &ModelParams) -> f64 {
        let (beta, gamma, c) = (params.beta(), params.gamma(), params.c());
        match self {
            ManifoldId::M0Case1 => (i + s - 1.0).abs() + (-c * v - params.net_infection(s, i)).abs(),
            ManifoldId::N0Case2 => (v + (beta / c) * (params.saturation(s) - gamma / beta) * i).abs(),
            ManifoldId::K0Case3 => (s - (1.0 - i - v / c)).abs(),
            ManifoldId::L0LargeC => (1.0 - i - s).abs(),
        }
    }
}

/// [`ManifoldId::residual`] for a state of any system that carries `S` and `I`
/// (and `V`, for the manifolds that need it).
pub fn manifold_residual(manifold: ManifoldId, state: &PhaseState, params: &ModelParams) -> Result<f64> {
    let x = state.coords();
    let (s, i, v) = match state.system() {
        SystemId::Full4 => (x[0], x[2], Some(x[3])),
        SystemId::Reduced3 | SystemId::SlowFast { .. } => (x[0], x[1], Some(x[2])),
        SystemId::Case2Planar | SystemId::Case2Rescaled { .. } => (x[0], x[1], None),
        other => {
            return Err(Error::InvalidInput(format!("{} does not carry S", other.name())));
        }
    };
    match (manifold, v) {
        (ManifoldId::L0LargeC, _) => Ok(manifold.residual(s, i, 0.0, params)),
        (_, Some(v)) => Ok(manifold.residual(s, i, v, params)),
        (_, None) => Err(Error::InvalidInput(format!("{manifold:?} needs V"))),
    }
}
