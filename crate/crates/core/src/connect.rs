//! Heteroclinic connections from the endemic saddle to the disease-free
//! sink, found by forward shooting along the one-dimensional unstable
//! manifold.
//!
//! ```
//! use sisfront::connect::{shoot_heteroclinic, ShootSpec};
//! use sisfront::model::{ModelParams, Regime};
//! use sisfront::phasespace::SystemId;
//!
//! let p = ModelParams::new(2.0, 1.0, 0.0, 1.0, 0.01, Regime::Case2SlowInfected)?;
//! let front = shoot_heteroclinic(&ShootSpec::new(SystemId::Case2Planar), &p)?;
//! assert!(front.endpoint_gap <= 1e-6 * (1.0 + 1e-9));
//! assert_eq!(front.s[0], 0.5);
//! # Ok::<(), sisfront::Error>(())
//! ```

use std::io::{self, Write};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrate::{integrate_until, Event, Termination, VectorField, DEFAULT_TOL};
use crate::linalg::{eigenvalues, eigenvector};
use crate::model::{equilibria, EquilibriumLabel, ModelParams, RawParams, Regime};
use crate::output::fmt_f64;
use crate::phasespace::{jacobian, lift_u, System, SystemId};
use crate::reductions::{case1_reduced_flow, case3_min_speed, ManifoldId};

pub const DEFAULT_OFFSET: f64 = 1e-6;
pub const DEFAULT_BALL_RADIUS: f64 = 1e-6;
pub const DEFAULT_SHOOT_SPAN: f64 = 1e4;
/// Trajectories leaving this ball are treated as escaped.
pub const ESCAPE_NORM: f64 = 1e3;

/// What to shoot and how.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShootSpec {
    pub system: SystemId,
    pub source: EquilibriumLabel,
    pub target: EquilibriumLabel,
    /// Launch distance along the unstable eigenvector.
    pub offset: f64,
    /// Arrival radius around the target.
    pub ball_radius: f64,
    pub max_span: f64,
    pub tol: f64,
}

impl ShootSpec {
    /// Endemic to disease-free with the default offsets.
    pub fn new(system: SystemId) -> Self {
        Self {
            system,
            source: EquilibriumLabel::Endemic,
            target: EquilibriumLabel::DiseaseFree,
            offset: DEFAULT_OFFSET,
            ball_radius: DEFAULT_BALL_RADIUS,
            max_span: DEFAULT_SHOOT_SPAN,
            tol: DEFAULT_TOL,
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [("offset", self.offset), ("ball_radius", self.ball_radius), ("max_span", self.max_span)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if self.source == self.target {
            return Err(Error::InvalidInput("source and target coincide".into()));
        }
        if self.system == SystemId::Full4 {
            return Err(Error::InvalidInput(
                "shoot in reduced3: the first integral makes the 4D saddle degenerate".into(),
            ));
        }
        Ok(())
    }
}

/// An equilibrium written in the coordinates of `system`.
pub fn equilibrium_coords(system: SystemId, label: EquilibriumLabel, params: &ModelParams) -> Vec<f64> {
    let (a, b) = equilibria(params);
    let e = if label == EquilibriumLabel::Endemic { a } else { b };
    match system {
        SystemId::Full4 => e.coords.to_vec(),
        SystemId::Reduced3 | SystemId::SlowFast { .. } => e.reduced3().to_vec(),
        SystemId::Case2Planar | SystemId::Case2Rescaled { .. } => e.case2().to_vec(),
        SystemId::Case3Planar | SystemId::BurgersFkpp => e.case3().to_vec(),
        SystemId::Case1Flow | SystemId::Case2Limit => vec![e.i()],
    }
}

/// Unstable eigenpair of a saddle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnstableDirection {
    pub eigenvalue: f64,
    /// Unit vector oriented so that `I` decreases along it.
    pub vector: Vec<f64>,
}

fn count_unstable(jac: &nalgebra::DMatrix<f64>) -> (usize, Vec<num_complex::Complex64>) {
    let ev = eigenvalues(jac);
    let scale = 1.0 + ev.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let n = ev.iter().filter(|z| z.re > 1e-10 * scale).count();
    (n, ev)
}

/// Eigenvector of the single unstable eigenvalue at `saddle`.
pub fn unstable_direction(system: &System, saddle: &[f64]) -> Result<UnstableDirection> {
    let jac = jacobian(system, saddle)?;
    let (n, ev) = count_unstable(&jac);
    if n != 1 {
        return Err(Error::NotASaddle { unstable: n });
    }
    let lambda = ev.last().expect("sorted eigenvalues").re;
    let v = eigenvector(&jac, lambda);
    let ii = system.id.infected_index();
    let sign = if v[ii] > 0.0 { -1.0 } else { 1.0 };
    Ok(UnstableDirection { eigenvalue: lambda, vector: v.iter().map(|x| sign * x).collect() })
}

/// `(S, I, V)` on the relevant slow manifold for a state of a reduced system.
///
/// Systems that already carry `S` and `V` pass them through; the planar
/// Case-2 systems get `V` from the slow-manifold relation, the Case-3 and
/// Burgers-FKPP planes get `S = 1 - I - V/c`, and the scalar flows use
/// `S = 1 - I`.
pub fn reconstruct_susceptible(system: SystemId, x: &[f64], params: &ModelParams) -> Result<[f64; 3]> {
    if x.len() != system.dim() {
        return Err(Error::DimensionMismatch { expected: system.dim(), got: x.len() });
    }
    let c = params.c();
    let n0_v = |s: f64, i: f64| -(params.beta() / c) * (params.saturation(s) - params.gamma() / params.beta()) * i;
    Ok(match system {
        SystemId::Full4 => [x[0], x[2], x[3]],
        SystemId::Reduced3 | SystemId::SlowFast { .. } => [x[0], x[1], x[2]],
        SystemId::Case2Planar | SystemId::Case2Rescaled { .. } => [x[0], x[1], n0_v(x[0], x[1])],
        SystemId::Case3Planar | SystemId::BurgersFkpp => [1.0 - x[0] - x[1] / c, x[0], x[1]],
        SystemId::Case1Flow => [1.0 - x[0], x[0], case1_reduced_flow(x[0], params)],
        SystemId::Case2Limit => [1.0 - x[0], x[0], n0_v(1.0 - x[0], x[0])],
    })
}

/// A computed front, sampled at the accepted integration steps.
#[derive(Debug, Clone, Serialize)]
pub struct FrontProfile {
    pub system: SystemId,
    pub params: RawParams,
    pub regime: Regime,
    pub c: f64,
    /// `0` for the reduced (`eps = 0`) systems.
    pub epsilon: f64,
    /// Independent variable, shifted so that `I = I_A / 2` at `z = 0`.
    pub z: Vec<f64>,
    pub s: Vec<f64>,
    pub i: Vec<f64>,
    pub v: Vec<f64>,
    /// States in the coordinates of `system`.
    #[serde(skip)]
    pub states: Vec<Vec<f64>>,
    pub coordinate_names: Vec<String>,
    pub endpoint_gap: f64,
    pub verify_gap: f64,
    pub launch_offset: f64,
    pub unstable_eigenvalue: f64,
    pub termination: Termination,
    /// Largest defining residual of the regime's critical manifold along
    /// the orbit; only for full-system connections.
    pub max_manifold_residual: Option<f64>,
}

/// Compact JSON record of a [`FrontProfile`].
#[derive(Debug, Clone, Serialize)]
pub struct ProfileSummary {
    pub system: &'static str,
    pub params: RawParams,
    pub regime: Regime,
    pub c: f64,
    pub epsilon: f64,
    pub samples: usize,
    pub z_range: (f64, f64),
    pub endpoint_gap: f64,
    pub verify_gap: f64,
    pub launch_offset: f64,
    pub unstable_eigenvalue: f64,
    pub termination: Termination,
    pub max_manifold_residual: Option<f64>,
}

impl FrontProfile {
    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    pub fn summary(&self) -> ProfileSummary {
        ProfileSummary {
            system: self.system.name(),
            params: self.params.clone(),
            regime: self.regime,
            c: self.c,
            epsilon: self.epsilon,
            samples: self.len(),
            z_range: (self.z[0], *self.z.last().expect("non-empty profile")),
            endpoint_gap: self.endpoint_gap,
            verify_gap: self.verify_gap,
            launch_offset: self.launch_offset,
            unstable_eigenvalue: self.unstable_eigenvalue,
            termination: self.termination,
            max_manifold_residual: self.max_manifold_residual,
        }
    }

    /// Columns `z,S,I,V` followed by the system's own coordinates.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        write!(w, "z,S,I,V")?;
        for n in &self.coordinate_names {
            write!(w, ",x_{n}")?;
        }
        writeln!(w)?;
        for k in 0..self.len() {
            write!(w, "{},{},{},{}", fmt_f64(self.z[k]), fmt_f64(self.s[k]), fmt_f64(self.i[k]), fmt_f64(self.v[k]))?;
            for x in &self.states[k] {
                write!(w, ",{}", fmt_f64(*x))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// `I` at `z`, by linear interpolation; `None` outside the sampled range.
    pub fn infected_at(&self, z: f64) -> Option<f64> {
        interpolate(&self.z, &self.i, z)
    }

    pub fn susceptible_at(&self, z: f64) -> Option<f64> {
        interpolate(&self.z, &self.s, z)
    }
}

/// Piecewise-linear interpolation on increasing `xs`.
pub fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> Option<f64> {
    if xs.is_empty() || x < xs[0] || x > xs[xs.len() - 1] {
        return None;
    }
    let k = xs.partition_point(|&t| t <= x);
    if k == xs.len() {
        return Some(ys[xs.len() - 1]);
    }
    if k == 0 {
        return Some(ys[0]);
    }
    let (x0, x1) = (xs[k - 1], xs[k]);
    if x1 == x0 {
        return Some(ys[k]);
    }
    let w = (x - x0) / (x1 - x0);
    Some(ys[k - 1] * (1.0 - w) + ys[k] * w)
}

struct Shot {
    times: Vec<f64>,
    states: Vec<Vec<f64>>,
    gap: f64,
    termination: Termination,
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn shoot_once(system: &System, spec: &ShootSpec, src: &[f64], dst: &[f64], dir: &[f64], offset: f64) -> Result<Shot> {
    let x0: Vec<f64> = src.iter().zip(dir).map(|(s, d)| s + offset * d).collect();
    let events = [
        Event::EnterBall { center: dst.to_vec(), radius: spec.ball_radius },
        Event::ExceedNorm { bound: ESCAPE_NORM },
        Event::MaxSpan(spec.max_span),
    ];
    let tr = integrate_until(system, &x0, &events, spec.tol)?;
    let termination = tr.meta.termination;
    if termination != Termination::EnterBall {
        let reason = match termination {
            Termination::ExceedNorm => format!("state norm exceeded {ESCAPE_NORM}"),
            _ => format!("target not reached within span {}", spec.max_span),
        };
        return Err(Error::NoConnection { reason, escape: tr.last_state().to_vec(), z: tr.last_time() });
    }
    let gap = distance(tr.last_state(), dst);
    Ok(Shot { times: tr.times, states: tr.states, gap, termination })
}

fn speed_guard(system: SystemId, params: &ModelParams) -> Result<()> {
    let needs_bound = matches!(system, SystemId::Case3Planar | SystemId::BurgersFkpp)
        || (matches!(system, SystemId::Reduced3 | SystemId::SlowFast { .. })
            && params.regime() == Regime::Case3FastInfected);
    let c_min = case3_min_speed(params);
    if needs_bound && params.c() < c_min {
        return Err(Error::SpeedBelowBound { c: params.c(), c_min });
    }
    Ok(())
}

fn build_profile(
    system: &System,
    spec: &ShootSpec,
    src: &[f64],
    dir: &UnstableDirection,
    shot: Shot,
    verify_gap: f64,
) -> Result<FrontProfile> {
    let params = &system.params;
    // Time to grow from rounding level to the launch offset, so the
    // saddle marker sits at a consistent distance behind the orbit.
    let lead = (spec.offset / f64::EPSILON).ln() / dir.eigenvalue;
    let mut times = Vec::with_capacity(shot.times.len() + 1);
    let mut states = Vec::with_capacity(shot.states.len() + 1);
    times.push(shot.times[0] - lead);
    states.push(src.to_vec());
    times.extend(shot.times);
    states.extend(shot.states);

    let mut s = Vec::with_capacity(states.len());
    let mut i = Vec::with_capacity(states.len());
    let mut v = Vec::with_capacity(states.len());
    for x in &states {
        let [a, b, c] = reconstruct_susceptible(system.id, x, params)?;
        s.push(a);
        i.push(b);
        v.push(c);
    }

    let half = 0.5 * params.i_endemic();
    let z0 = (1..i.len())
        .find(|&k| i[k - 1] >= half && i[k] < half)
        .map(|k| {
            let w = (i[k - 1] - half) / (i[k - 1] - i[k]);
            times[k - 1] + w * (times[k] - times[k - 1])
        })
        .unwrap_or(0.0);
    let z = times.iter().map(|t| t - z0).collect();

    Ok(FrontProfile {
        system: system.id,
        params: params.raw(),
        regime: params.regime(),
        c: params.c(),
        epsilon: match system.id {
            SystemId::Reduced3 => params.epsilon(),
            SystemId::SlowFast { eps, .. } => eps,
            _ => 0.0,
        },
        z,
        s,
        i,
        v,
        states,
        coordinate_names: system.coordinate_names(),
        endpoint_gap: shot.gap,
        verify_gap,
        launch_offset: spec.offset,
        unstable_eigenvalue: dir.eigenvalue,
        termination: shot.termination,
        max_manifold_residual: None,
    })
}

fn shoot_with(system: &System, spec: &ShootSpec, dir: UnstableDirection) -> Result<FrontProfile> {
    let src = equilibrium_coords(system.id, spec.source, &system.params);
    let dst = equilibrium_coords(system.id, spec.target, &system.params);
    let main = shoot_once(system, spec, &src, &dst, &dir.vector, spec.offset)?;
    let check = shoot_once(system, spec, &src, &dst, &dir.vector, spec.offset / 10.0)?;
    let (lo, hi) = (main.gap.min(check.gap), main.gap.max(check.gap));
    if hi > 10.0 * lo.max(f64::MIN_POSITIVE) {
        return Err(Error::NoConnection {
            reason: format!("arrival gap depends on the launch offset ({} vs {})", main.gap, check.gap),
            escape: main.states.last().cloned().unwrap_or_default(),
            z: main.times.last().copied().unwrap_or(0.0),
        });
    }
    build_profile(system, spec, &src, &dir, main, check.gap)
}

/// Shoot from `spec.source` along its unstable direction until the orbit
/// enters the ball around `spec.target`.
///
/// The run is repeated at a tenth of the offset and rejected if the two
/// arrival gaps differ by more than a factor of ten.
pub fn shoot_heteroclinic(spec: &ShootSpec, params: &ModelParams) -> Result<FrontProfile> {
    spec.validate()?;
    speed_guard(spec.system, params)?;
    let system = System::new(spec.system, params.clone());
    let src = equilibrium_coords(spec.system, spec.source, params);
    let dir = unstable_direction(&system, &src)?;
    shoot_with(&system, spec, dir)
}

/// Critical manifold of a regime.
pub fn regime_manifold(regime: Regime) -> ManifoldId {
    match regime {
        Regime::Case1ComparableSmall => ManifoldId::M0Case1,
        Regime::Case2SlowInfected => ManifoldId::N0Case2,
        Regime::Case3FastInfected => ManifoldId::K0Case3,
    }
}

/// Connection of the three-dimensional system at `0 < eps <= 0.1`.
pub fn full_system_connection(params: &ModelParams, regime: Regime, eps: f64) -> Result<FrontProfile> {
    full_system_connection_with(&ShootSpec::new(SystemId::Reduced3), params, regime, eps)
}

/// [`full_system_connection`] with explicit shooting settings; `spec.system` is ignored.
pub fn full_system_connection_with(spec: &ShootSpec, params: &ModelParams, regime: Regime, eps: f64) -> Result<FrontProfile> {
    if !(eps > 0.0 && eps <= 0.1) {
        return Err(Error::BadEpsilon(eps));
    }
    let spec = ShootSpec { system: SystemId::Reduced3, ..spec.clone() };
    spec.validate()?;
    let q = params.with_regime(regime).with_epsilon(eps)?;
    speed_guard(SystemId::Reduced3, &q)?;
    let system = System::new(SystemId::Reduced3, q.clone());
    let src = equilibrium_coords(SystemId::Reduced3, spec.source, &q);
    let dir = match unstable_direction(&system, &src) {
        Ok(d) => d,
        Err(Error::NotASaddle { unstable }) => return Err(Error::EigenstructureChanged { unstable }),
        Err(e) => return Err(e),
    };
    let mut profile = shoot_with(&system, &spec, dir)?;
    let manifold = regime_manifold(regime);
    let worst = profile
        .states
        .iter()
        .map(|x| manifold.residual(x[0], x[1], x[2], &q))
        .fold(0.0f64, f64::max);
    profile.max_manifold_residual = Some(worst);
    Ok(profile)
}

/// Full `(S, U, I, V)` states of a three-dimensional profile, with `U`
/// lifted from the first integral.
pub fn lift_profile(profile: &FrontProfile, params: &ModelParams) -> Vec<[f64; 4]> {
    (0..profile.len())
        .map(|k| {
            let (s, i, v) = (profile.s[k], profile.i[k], profile.v[k]);
            [s, lift_u(s, i, v, params), i, v]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn p(beta: f64, gamma: f64, sigma: f64, c: f64) -> ModelParams {
        ModelParams::new(beta, gamma, sigma, c, 0.01, Regime::Case2SlowInfected).unwrap()
    }

    #[test]
    fn case2_direction_points_down_in_i() {
        let q = p(2.0, 1.0, 0.0, 1.0);
        let sys = System::new(SystemId::Case2Planar, q.clone());
        let d = unstable_direction(&sys, &[0.5, 0.5]).unwrap();
        assert_abs_diff_eq!(d.eigenvalue, (-1.0 + 5f64.sqrt()) / 2.0, epsilon = 1e-8);
        assert!(d.vector[1] < 0.0);
        assert!(d.vector[0] * d.vector[1] < 0.0);
        // oracle: (J - lambda) v = 0 for J = [[-c, -c], [-(beta/c) I_A, 0]] at sigma = 0
        let (j, l) = ([[-1.0, -1.0], [-1.0, 0.0]], d.eigenvalue);
        let r0 = (j[0][0] - l) * d.vector[0] + j[0][1] * d.vector[1];
        let r1 = j[1][0] * d.vector[0] + (j[1][1] - l) * d.vector[1];
        assert!(r0.abs() < 1e-7 && r1.abs() < 1e-7);
        let node = unstable_direction(&sys, &[1.0, 0.0]);
        assert!(matches!(node, Err(Error::NotASaddle { unstable: 0 })));
    }

    #[test]
    fn case3_direction_has_negative_v() {
        let q = p(2.0, 1.0, 0.0, 2.5);
        let sys = System::new(SystemId::Case3Planar, q.clone());
        let d = unstable_direction(&sys, &[0.5, 0.0]).unwrap();
        assert!(d.vector[1] < 0.0 && d.vector[0] < 0.0);
        // eigenvector of [[0, 1], [D, -c]] for lambda = D/c is (1, lambda)
        assert_abs_diff_eq!(d.vector[1] / d.vector[0], d.eigenvalue, epsilon = 1e-7);
    }

    #[test]
    fn reconstruct_examples() {
        let q = p(2.0, 0.5, 0.5, 1.5);
        assert_eq!(reconstruct_susceptible(SystemId::Case3Planar, &[0.0, 0.0], &q).unwrap()[0], 1.0);
        let a = reconstruct_susceptible(SystemId::Case3Planar, &[q.i_endemic(), 0.0], &q).unwrap();
        assert_abs_diff_eq!(a[0], q.s_endemic(), epsilon = 1e-15);
        let m = reconstruct_susceptible(SystemId::Case1Flow, &[0.3], &q).unwrap();
        assert_abs_diff_eq!(m[0], 0.7, epsilon = 1e-15);
        assert!(reconstruct_susceptible(SystemId::Case1Flow, &[0.3, 0.1], &q).is_err());
    }

    #[test]
    fn interpolation() {
        let xs = [0.0, 1.0, 3.0];
        let ys = [1.0, 3.0, -1.0];
        assert_eq!(interpolate(&xs, &ys, 0.5), Some(2.0));
        assert_eq!(interpolate(&xs, &ys, 2.0), Some(1.0));
        assert_eq!(interpolate(&xs, &ys, 3.0), Some(-1.0));
        assert_eq!(interpolate(&xs, &ys, 3.5), None);
    }

    #[test]
    fn spec_guards() {
        let q = p(2.0, 1.0, 0.0, 1.0);
        let mut spec = ShootSpec::new(SystemId::Case2Planar);
        spec.offset = 0.0;
        assert!(shoot_heteroclinic(&spec, &q).unwrap_err().is_validation());
        assert!(matches!(
            shoot_heteroclinic(&ShootSpec::new(SystemId::Case3Planar), &q),
            Err(Error::SpeedBelowBound { .. })
        ));
        assert!(matches!(full_system_connection(&q, Regime::Case2SlowInfected, 0.0), Err(Error::BadEpsilon(_))));
        assert!(shoot_heteroclinic(&ShootSpec::new(SystemId::Full4), &q).is_err());
    }
}
