//! Adaptive Dormand-Prince 5(4) integration of autonomous systems, with
//! event detection for the shooting code.

use std::io::{self, Write};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::output::fmt_f64;

pub const DEFAULT_TOL: f64 = 1e-10;
/// Span used by [`integrate_until`] when no [`Event::MaxSpan`] is given.
pub const DEFAULT_MAX_SPAN: f64 = 1e4;

const EVENT_BISECTION_TOL: f64 = 1e-10;

/// Autonomous vector field `x' = f(x)`.
pub trait VectorField {
    fn dim(&self) -> usize;

    fn eval(&self, x: &[f64], dx: &mut [f64]) -> Result<()>;

    fn coordinate_names(&self) -> Vec<String> {
        (0..self.dim()).map(|k| format!("x{k}")).collect()
    }
}

impl<F: VectorField + ?Sized> VectorField for &F {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, x: &[f64], dx: &mut [f64]) -> Result<()> {
        (**self).eval(x, dx)
    }
    fn coordinate_names(&self) -> Vec<String> {
        (**self).coordinate_names()
    }
}

/// Wraps a closure as a [`VectorField`].
pub struct FnField<F> {
    dim: usize,
    f: F,
}

impl<F> FnField<F>
where
    F: Fn(&[f64], &mut [f64]),
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> VectorField for FnField<F>
where
    F: Fn(&[f64], &mut [f64]),
{
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, x: &[f64], dx: &mut [f64]) -> Result<()> {
        (self.f)(x, dx);
        Ok(())
    }
}

/// Termination condition for [`integrate_until`].
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Event {
    /// Euclidean distance to `center` drops to `radius` or below.
    EnterBall { center: Vec<f64>, radius: f64 },
    /// Euclidean norm of the state exceeds `bound`.
    ExceedNorm { bound: f64 },
    /// Integration has covered `span`.
    MaxSpan(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// [`integrate`] reached the end of its span.
    Completed,
    EnterBall,
    ExceedNorm,
    /// The maximum span elapsed without any other event firing.
    SpanExhausted,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryMeta {
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub evaluations: usize,
    pub tol: f64,
    pub termination: Termination,
}

/// Accepted steps of one integration run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub names: Vec<String>,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_state(&self) -> &[f64] {
        self.states.last().expect("trajectory has at least two samples")
    }

    pub fn last_time(&self) -> f64 {
        *self.times.last().expect("trajectory has at least two samples")
    }

    /// One header row (`t` then coordinate names), one row per accepted step.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        write!(w, "t")?;
        for n in &self.names {
            write!(w, ",{n}")?;
        }
        writeln!(w)?;
        for (t, x) in self.times.iter().zip(&self.states) {
            write!(w, "{}", fmt_f64(*t))?;
            for v in x {
                write!(w, ",{}", fmt_f64(*v))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

// Dormand-Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Difference between the 5th- and 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

struct Stepper<'a, F: ?Sized> {
    f: &'a F,
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
    evaluations: usize,
}

impl<'a, F: VectorField + ?Sized> Stepper<'a, F> {
    fn new(f: &'a F) -> Self {
        let n = f.dim();
        Self {
            f,
            k: std::array::from_fn(|_| vec![0.0; n]),
            tmp: vec![0.0; n],
            evaluations: 0,
        }
    }

    fn eval(&mut self, stage: usize, x: &[f64]) -> Result<()> {
        self.evaluations += 1;
        self.f.eval(x, &mut self.k[stage])
    }

    /// One step of size `h` from `(y, k0 = f(y))`. Writes the 5th-order
    /// solution into `out` and returns the scaled error norm.
    fn step(&mut self, y: &[f64], h: f64, tol: f64, out: &mut [f64]) -> Result<f64> {
        let n = y.len();
        macro_rules! stage {
            ($s:expr, $($a:expr => $j:expr),+) => {{
                for m in 0..n {
                    self.tmp[m] = y[m] + h * (0.0 $(+ $a * self.k[$j][m])+);
                }
                let tmp = std::mem::take(&mut self.tmp);
                let r = self.eval($s, &tmp);
                self.tmp = tmp;
                r?;
            }};
        }
        stage!(1, A21 => 0);
        stage!(2, A31 => 0, A32 => 1);
        stage!(3, A41 => 0, A42 => 1, A43 => 2);
        stage!(4, A51 => 0, A52 => 1, A53 => 2, A54 => 3);
        stage!(5, A61 => 0, A62 => 1, A63 => 2, A64 => 3, A65 => 4);
        for m in 0..n {
            out[m] = y[m]
                + h * (B1 * self.k[0][m] + B3 * self.k[2][m] + B4 * self.k[3][m] + B5 * self.k[4][m] + B6 * self.k[5][m]);
        }
        self.eval(6, out)?;
        let mut err: f64 = 0.0;
        for m in 0..n {
            let e = h
                * (E1 * self.k[0][m]
                    + E3 * self.k[2][m]
                    + E4 * self.k[3][m]
                    + E5 * self.k[4][m]
                    + E6 * self.k[5][m]
                    + E7 * self.k[6][m]);
            let scale = tol * (1.0 + y[m].abs().max(out[m].abs()));
            err = err.max(e.abs() / scale);
        }
        Ok(err)
    }
}

fn all_finite(x: &[f64]) -> bool {
    x.iter().all(|v| v.is_finite())
}

fn euclid_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn check_tol(tol: f64) -> Result<()> {
    if !(1e-13..=1e-3).contains(&tol) {
        return Err(Error::BadTolerance(tol));
    }
    Ok(())
}

/// Integrate over `[0, span]`.
pub fn integrate<F: VectorField + ?Sized>(rhs: &F, y0: &[f64], span: f64, tol: f64) -> Result<Trajectory> {
    if !(span > 0.0 && span.is_finite()) {
        return Err(Error::InvalidInput(format!("span must be positive, got {span}")));
    }
    run(rhs, y0, span, &[], tol, Termination::Completed)
}

/// Integrate until the first event fires. Running out of span is reported
/// through [`Termination::SpanExhausted`], not as an error.
pub fn integrate_until<F: VectorField + ?Sized>(rhs: &F, y0: &[f64], events: &[Event], tol: f64) -> Result<Trajectory> {
    for e in events {
        match e {
            Event::MaxSpan(t) => {
                if !(*t > 0.0) {
                    return Err(Error::InvalidInput(format!("max span must be positive, got {t}")));
                }
            }
            Event::EnterBall { center, radius } => {
                if !(*radius > 0.0) {
                    return Err(Error::InvalidInput(format!("ball radius must be positive, got {radius}")));
                }
                if center.len() != rhs.dim() {
                    return Err(Error::DimensionMismatch { expected: rhs.dim(), got: center.len() });
                }
            }
            Event::ExceedNorm { bound } => {
                if !(*bound > 0.0) {
                    return Err(Error::InvalidInput(format!("norm bound must be positive, got {bound}")));
                }
            }
        }
    }
    let span = events
        .iter()
        .filter_map(|e| match e {
            Event::MaxSpan(t) => Some(*t),
            _ => None,
        })
        .fold(f64::INFINITY, f64::min);
    let span = if span.is_finite() { span } else { DEFAULT_MAX_SPAN };
    run(rhs, y0, span, events, tol, Termination::SpanExhausted)
}

fn triggered(event: &Event, y: &[f64]) -> bool {
    match event {
        Event::EnterBall { center, radius } => euclid_dist(y, center) <= *radius,
        Event::ExceedNorm { bound } => norm(y) > *bound,
        Event::MaxSpan(_) => false,
    }
}

fn run<F: VectorField + ?Sized>(
    rhs: &F,
    y0: &[f64],
    span: f64,
    events: &[Event],
    tol: f64,
    at_end: Termination,
) -> Result<Trajectory> {
    check_tol(tol)?;
    let n = rhs.dim();
    if y0.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: y0.len() });
    }
    if !all_finite(y0) {
        return Err(Error::NonFiniteState { t: 0.0 });
    }

    let mut st = Stepper::new(rhs);
    let mut y = y0.to_vec();
    let mut y_new = vec![0.0; n];
    st.eval(0, &y)?;

    let mut times = vec![0.0];
    let mut states = vec![y.clone()];
    let mut t = 0.0;
    let mut h = span / 1000.0;
    let h_min = 1e-14 * span;
    let mut accepted = 0;
    let mut rejected = 0;
    let mut termination = at_end;

    'outer: while t < span {
        let last = t + h >= span;
        if last {
            h = span - t;
        }
        let err = st.step(&y, h, tol, &mut y_new)?;
        if !err.is_finite() || !all_finite(&y_new) {
            // Treat blow-up inside a trial step as a rejection first.
            if h * 0.25 < h_min {
                return Err(Error::NonFiniteState { t });
            }
            h *= 0.25;
            rejected += 1;
            continue;
        }
        if err > 1.0 {
            rejected += 1;
            h *= (0.9 * err.powf(-0.2)).max(0.2);
            if h < h_min {
                return Err(Error::StepUnderflow { t, h });
            }
            continue;
        }
        accepted += 1;

        for ev in events {
            if triggered(ev, &y_new) {
                let (theta, y_hit) = localize(&mut st, ev, &y, h, tol)?;
                times.push(t + theta * h);
                states.push(y_hit);
                termination = match ev {
                    Event::EnterBall { .. } => Termination::EnterBall,
                    Event::ExceedNorm { .. } => Termination::ExceedNorm,
                    Event::MaxSpan(_) => unreachable!(),
                };
                break 'outer;
            }
        }

        t = if last { span } else { t + h };
        std::mem::swap(&mut y, &mut y_new);
        // FSAL: the last stage is f(y_new).
        st.k.swap(0, 6);
        times.push(t);
        states.push(y.clone());

        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
        if h < h_min && t < span {
            return Err(Error::StepUnderflow { t, h });
        }
    }

    Ok(Trajectory {
        names: rhs.coordinate_names(),
        times,
        states,
        meta: TrajectoryMeta {
            accepted_steps: accepted,
            rejected_steps: rejected,
            evaluations: st.evaluations,
            tol,
            termination,
        },
    })
}

/// Bisect on the fraction of the step at which `event` first fires.
/// `st.k[0]` must hold `f(y)`.
fn localize<F: VectorField + ?Sized>(
    st: &mut Stepper<'_, F>,
    event: &Event,
    y: &[f64],
    h: f64,
    tol: f64,
) -> Result<(f64, Vec<f64>)> {
    let mut out = vec![0.0; y.len()];
    if triggered(event, y) {
        // Already inside at the start of the step: fire at the step end.
        st.step(y, h, tol, &mut out)?;
        return Ok((1.0, out));
    }
    let k0 = st.k[0].clone();
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > EVENT_BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        st.k[0].copy_from_slice(&k0);
        st.step(y, mid * h, tol, &mut out)?;
        if triggered(event, &out) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    st.k[0].copy_from_slice(&k0);
    st.step(y, hi * h, tol, &mut out)?;
    Ok((hi, out))
}
