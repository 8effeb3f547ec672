//! Traveling-wave vector fields in the co-moving coordinate `z = x - c t`.
//!
//! The full system lives in `(S, U, I, V) = (S, S_z, I, I_z)`. Adding the two
//! second-order equations and integrating once against the disease-free
//! state at `z = +inf` gives the first integral
//!
//! ```text
//! d1 U + d2 V + c S + c I = c
//! ```
//!
//! which eliminates `U` and leaves a three-dimensional system in `(S, I, V)`.
//! The planar and scalar reductions of each regime are defined in
//! [`crate::reductions`]; [`System`] dispatches to all of them.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrate::VectorField;
use crate::model::ModelParams;
use crate::reductions::{self, Form};

/// Which vector field a set of coordinates belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "system", rename_all = "snake_case")]
pub enum SystemId {
    /// `(S, U, I, V)`.
    Full4,
    /// `(S, I, V)` on the level set of the first integral.
    Reduced3,
    /// `I` on the Case-1 critical manifold.
    Case1Flow,
    /// `(S, I)` on the Case-2 slow manifold.
    Case2Planar,
    /// `(S, I)` in the stretched variable with `delta = 1/c^2`.
    Case2Rescaled { delta: f64 },
    /// `I` on the large-speed limit line `S = 1 - I`.
    Case2Limit,
    /// `(I, V)` on the Case-3 slow manifold.
    Case3Planar,
    /// `(I, V)` of the Burgers-FKPP traveling-wave equation (`sigma = 0`).
    BurgersFkpp,
    /// `(S, I, V)` singularly perturbed form of the params' regime.
    SlowFast { form: Form, eps: f64 },
}

impl SystemId {
    pub fn dim(&self) -> usize {
        match self {
            SystemId::Full4 => 4,
            SystemId::Reduced3 | SystemId::SlowFast { .. } => 3,
            SystemId::Case1Flow | SystemId::Case2Limit => 1,
            SystemId::Case2Planar
            | SystemId::Case2Rescaled { .. }
            | SystemId::Case3Planar
            | SystemId::BurgersFkpp => 2,
        }
    }

    pub fn coordinate_names(&self) -> &'static [&'static str] {
        match self {
            SystemId::Full4 => &["S", "U", "I", "V"],
            SystemId::Reduced3 | SystemId::SlowFast { .. } => &["S", "I", "V"],
            SystemId::Case1Flow | SystemId::Case2Limit => &["I"],
            SystemId::Case2Planar | SystemId::Case2Rescaled { .. } => &["S", "I"],
            SystemId::Case3Planar | SystemId::BurgersFkpp => &["I", "V"],
        }
    }

    /// Position of the infected density among the coordinates.
    pub fn infected_index(&self) -> usize {
        self.coordinate_names()
            .iter()
            .position(|n| *n == "I")
            .expect("every system carries I")
    }

    /// Short stable name for file output.
    pub fn name(&self) -> &'static str {
        match self {
            SystemId::Full4 => "full4",
            SystemId::Reduced3 => "reduced3",
            SystemId::Case1Flow => "case1_flow",
            SystemId::Case2Planar => "case2_planar",
            SystemId::Case2Rescaled { .. } => "case2_rescaled",
            SystemId::Case2Limit => "case2_limit",
            SystemId::Case3Planar => "case3_planar",
            SystemId::BurgersFkpp => "burgers_fkpp",
            SystemId::SlowFast { form: Form::Slow, .. } => "slow_form",
            SystemId::SlowFast { form: Form::Fast, .. } => "fast_form",
        }
    }
}

/// A point of one of the phase spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseState {
    system: SystemId,
    coords: Vec<f64>,
}

impl PhaseState {
    pub fn new(system: SystemId, coords: Vec<f64>) -> Result<Self> {
        if coords.len() != system.dim() {
            return Err(Error::DimensionMismatch { expected: system.dim(), got: coords.len() });
        }
        if coords.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState { t: f64::NAN });
        }
        Ok(Self { system, coords })
    }

    pub fn system(&self) -> SystemId {
        self.system
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }
}

/// Signed value of `d1 U + d2 V + c S + c I - c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConservationResidual(pub f64);

/// Full first-order traveling-wave system with explicit diffusivities.
pub fn full4_with(x: &[f64; 4], params: &ModelParams, d1: f64, d2: f64) -> Result<[f64; 4]> {
    if d1 == 0.0 {
        return Err(Error::ZeroDiffusivity { name: "d1" });
    }
    if d2 == 0.0 {
        return Err(Error::ZeroDiffusivity { name: "d2" });
    }
    let [s, u, i, v] = *x;
    let c = params.c();
    let r = params.net_infection(s, i);
    Ok([u, (-c * u + r) / d1, v, (-c * v - r) / d2])
}

pub fn rhs_full4(x: &[f64; 4], params: &ModelParams) -> Result<[f64; 4]> {
    full4_with(x, params, params.d1(), params.d2())
}

/// Three-dimensional system after eliminating `U`, with explicit diffusivities.
pub fn reduced3_with(x: &[f64; 3], params: &ModelParams, d1: f64, d2: f64) -> Result<[f64; 3]> {
    if d1 == 0.0 {
        return Err(Error::ZeroDiffusivity { name: "d1" });
    }
    if d2 == 0.0 {
        return Err(Error::ZeroDiffusivity { name: "d2" });
    }
    let [s, i, v] = *x;
    let c = params.c();
    Ok([(-d2 * v - c * (i + s - 1.0)) / d1, v, (-c * v - params.net_infection(s, i)) / d2])
}

pub fn rhs_reduced3(x: &[f64; 3], params: &ModelParams) -> Result<[f64; 3]> {
    reduced3_with(x, params, params.d1(), params.d2())
}

pub fn conservation_residual(x: &[f64; 4], params: &ModelParams) -> ConservationResidual {
    let [s, u, i, v] = *x;
    let c = params.c();
    ConservationResidual(params.d1() * u + params.d2() * v + c * s + c * i - c)
}

/// `U` on the level set of the first integral.
pub fn lift_u(s: f64, i: f64, v: f64, params: &ModelParams) -> f64 {
    (-params.d2() * v - params.c() * (i + s - 1.0)) / params.d1()
}

/// A vector field bound to its parameters.
#[derive(Debug, Clone)]
pub struct System {
    pub id: SystemId,
    pub params: ModelParams,
}

impl System {
    pub fn new(id: SystemId, params: ModelParams) -> Self {
        Self { id, params }
    }

    pub fn eval_state(&self, state: &PhaseState) -> Result<PhaseState> {
        if state.system != self.id {
            return Err(Error::InvalidInput(format!(
                "state belongs to {} but the system is {}",
                state.system.name(),
                self.id.name()
            )));
        }
        let mut out = vec![0.0; self.id.dim()];
        self.eval(&state.coords, &mut out)?;
        PhaseState::new(self.id, out)
    }
}

impl VectorField for System {
    fn dim(&self) -> usize {
        self.id.dim()
    }

    fn eval(&self, x: &[f64], dx: &mut [f64]) -> Result<()> {
        if x.len() != self.id.dim() {
            return Err(Error::DimensionMismatch { expected: self.id.dim(), got: x.len() });
        }
        let p = &self.params;
        match self.id {
            SystemId::Full4 => dx.copy_from_slice(&rhs_full4(&[x[0], x[1], x[2], x[3]], p)?),
            SystemId::Reduced3 => dx.copy_from_slice(&rhs_reduced3(&[x[0], x[1], x[2]], p)?),
            SystemId::Case1Flow => dx[0] = reductions::case1_reduced_flow(x[0], p),
            SystemId::Case2Planar => dx.copy_from_slice(&reductions::case2_reduced_rhs(x[0], x[1], p)),
            SystemId::Case2Rescaled { delta } => {
                dx.copy_from_slice(&reductions::case2_rescaled_rhs(x[0], x[1], p, delta)?)
            }
            SystemId::Case2Limit => dx[0] = reductions::case2_limit_flow(x[0], p),
            SystemId::Case3Planar => dx.copy_from_slice(&reductions::case3_reduced_rhs(x[0], x[1], p)?),
            SystemId::BurgersFkpp => dx.copy_from_slice(&reductions::burgers_fkpp_rhs_tw(x[0], x[1], p)?),
            SystemId::SlowFast { form, eps } => {
                dx.copy_from_slice(&reductions::slow_fast_rhs(&[x[0], x[1], x[2]], p, form, eps)?)
            }
        }
        Ok(())
    }

    fn coordinate_names(&self) -> Vec<String> {
        self.id.coordinate_names().iter().map(|s| s.to_string()).collect()
    }
}

/// Central-difference Jacobian with step `max(1e-6, 1e-6 |x_j|)`.
pub fn jacobian<F: VectorField + ?Sized>(f: &F, x: &[f64]) -> Result<DMatrix<f64>> {
    let n = f.dim();
    if x.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x.len() });
    }
    let mut jac = DMatrix::zeros(n, n);
    let mut xp = x.to_vec();
    let mut fp = vec![0.0; n];
    let mut fm = vec![0.0; n];
    for j in 0..n {
        let h = (1e-6 * x[j].abs()).max(1e-6);
        xp[j] = x[j] + h;
        f.eval(&xp, &mut fp)?;
        xp[j] = x[j] - h;
        f.eval(&xp, &mut fm)?;
        xp[j] = x[j];
        for i in 0..n {
            jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    Ok(jac)
}
