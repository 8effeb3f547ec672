//! Method-of-lines simulation of the reaction-diffusion system on an
//! interval with zero-flux ends.
//!
//! Space uses second-order central differences with mirrored ghost nodes,
//! time uses classical fourth-order Runge-Kutta with a fixed step. With
//! trapezoid weights the discrete total population `sum w_k (S_k + I_k) dx`
//! is conserved exactly by the stationary-frame scheme.
//!
//! ```
//! use sisfront::model::{ModelParams, Regime};
//! use sisfront::pdesim::{initial_front, simulate, Grid1D, SimConfig};
//!
//! let p = ModelParams::new(2.0, 1.0, 0.0, 1.0, 0.01, Regime::Case2SlowInfected)?;
//! let grid = Grid1D::new(0.0, 60.0, 301)?;
//! let init = initial_front(&grid, &p, 15.0, 1.0)?;
//! let run = simulate(&p, &grid, &init, &SimConfig::new(0.01, 1.0))?;
//! assert_eq!(run.snapshots.last().unwrap().t, 1.0);
//! # Ok::<(), sisfront::Error>(())
//! ```

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::connect::{interpolate, FrontProfile};
use crate::error::{Error, Result};
use crate::model::{ModelParams, RawParams};
use crate::output::fmt_f64;

/// Uniform grid `x_k = x_min + k dx`, `k = 0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid1D {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
    pub dx: f64,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if n < 100 {
            return Err(Error::InvalidInput(format!("grid needs at least 100 nodes, got {n}")));
        }
        if !(x_max > x_min && x_min.is_finite() && x_max.is_finite()) {
            return Err(Error::InvalidInput(format!("bad domain [{x_min}, {x_max}]")));
        }
        Ok(Self { x_min, x_max, n, dx: (x_max - x_min) / (n - 1) as f64 })
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    /// Position of node `k` before any window shift.
    pub fn x(&self, k: usize) -> f64 {
        self.x_min + k as f64 * self.dx
    }
}

/// Densities at the grid nodes at time `t`.
///
/// `offset` is the distance the computational window has moved to the right
/// since the start, so node `k` sits at `grid.x(k) + offset`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Field {
    pub t: f64,
    pub offset: f64,
    pub s: Vec<f64>,
    pub i: Vec<f64>,
}

impl Field {
    pub fn constant(grid: &Grid1D, s: f64, i: f64) -> Self {
        Self { t: 0.0, offset: 0.0, s: vec![s; grid.n], i: vec![i; grid.n] }
    }

    /// Render a front profile onto the grid with `z = x - shift`.
    ///
    /// Left of the profile the first sample is held. Right of it the
    /// deviation from `(1, 0)` keeps decaying exponentially at the rate seen
    /// over the last unit of `z`; holding a small positive `I` there would
    /// seed a spurious second front.
    pub fn from_profile(grid: &Grid1D, profile: &FrontProfile, shift: f64) -> Self {
        let m = profile.len() - 1;
        let (z0, z1) = (profile.z[0], profile.z[m]);
        let (s1, i1) = (profile.s[m], profile.i[m]);
        let back = (z1 - 1.0).max(z0);
        let i_back = interpolate(&profile.z, &profile.i, back).expect("inside range");
        let rate = if i1 > 0.0 && i_back > i1 && z1 > back { (i1 / i_back).ln() / (z1 - back) } else { f64::NEG_INFINITY };
        let mut f = Self::constant(grid, 0.0, 0.0);
        for k in 0..grid.n {
            let z = grid.x(k) - shift;
            if z > z1 {
                let w = (rate * (z - z1)).exp();
                f.s[k] = 1.0 + (s1 - 1.0) * w;
                f.i[k] = i1 * w;
            } else {
                let z = z.max(z0);
                f.s[k] = interpolate(&profile.z, &profile.s, z).expect("inside range");
                f.i[k] = interpolate(&profile.z, &profile.i, z).expect("inside range");
            }
        }
        f
    }

    pub fn x(&self, grid: &Grid1D, k: usize) -> f64 {
        grid.x(k) + self.offset
    }

    /// Trapezoid rule for `integral (S + I) dx`.
    pub fn total_population(&self, grid: &Grid1D) -> f64 {
        let n = self.s.len();
        let inner: f64 = (1..n - 1).map(|k| self.s[k] + self.i[k]).sum();
        grid.dx * (inner + 0.5 * (self.s[0] + self.i[0] + self.s[n - 1] + self.i[n - 1]))
    }

    pub fn min_infected(&self) -> f64 {
        self.i.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn write_csv<W: Write>(&self, grid: &Grid1D, mut w: W) -> io::Result<()> {
        writeln!(w, "x,S,I")?;
        for k in 0..self.s.len() {
            writeln!(w, "{},{},{}", fmt_f64(self.x(grid, k)), fmt_f64(self.s[k]), fmt_f64(self.i[k]))?;
        }
        Ok(())
    }
}

/// Smooth step from the endemic state (left) to the disease-free state
/// (right), with `I = I_A / 2` at `interface_x`.
pub fn initial_front(grid: &Grid1D, params: &ModelParams, interface_x: f64, width: f64) -> Result<Field> {
    if !(interface_x > grid.x_min && interface_x < grid.x_max) {
        return Err(Error::InvalidInput(format!("interface {interface_x} outside the domain")));
    }
    if !(width > 2.0 * grid.dx) {
        return Err(Error::InvalidInput(format!("width {width} must exceed 2 dx = {}", 2.0 * grid.dx)));
    }
    let (s_a, i_a) = (params.s_endemic(), params.i_endemic());
    let mut f = Field::constant(grid, 0.0, 0.0);
    for k in 0..grid.n {
        let w = 0.5 * (1.0 + ((grid.x(k) - interface_x) / width).tanh());
        f.s[k] = s_a + (1.0 - s_a) * w;
        f.i[k] = i_a * (1.0 - w);
    }
    Ok(f)
}

/// Reference frame of the simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "frame", rename_all = "snake_case")]
pub enum Frame {
    Stationary,
    /// Coordinates moving right at speed `c`; adds `c u_z` with one-sided
    /// (upwind) differences.
    CoMoving { c: f64 },
}

/// Keep a rightward front inside the window by dropping nodes on the left
/// and appending disease-free nodes on the right.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MovingWindow {
    /// Fraction of `I_A` that marks the front.
    pub level: f64,
    /// Shift once the front passes this fraction of the window...
    pub trigger: f64,
    /// ...moving it back to this fraction.
    pub target: f64,
}

impl Default for MovingWindow {
    fn default() -> Self {
        Self { level: 0.5, trigger: 0.6, target: 0.25 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub dt: f64,
    pub t_end: f64,
    /// Record a snapshot every `stride` steps (the final state is always kept).
    pub stride: usize,
    pub frame: Frame,
    pub window: Option<MovingWindow>,
}

impl SimConfig {
    pub fn new(dt: f64, t_end: f64) -> Self {
        Self { dt, t_end, stride: usize::MAX, frame: Frame::Stationary, window: None }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.stride = stride.max(1);
        self
    }

    pub fn with_frame(mut self, frame: Frame) -> Self {
        self.frame = frame;
        self
    }

    pub fn with_window(mut self, window: MovingWindow) -> Self {
        self.window = Some(window);
        self
    }
}

/// Largest stable step for the grid and parameters.
pub fn max_stable_dt(params: &ModelParams, grid: &Grid1D, frame: Frame) -> f64 {
    let d = params.d1().max(params.d2());
    let mut limit = (0.4 * grid.dx * grid.dx / d).min(0.1 / params.beta());
    if let Frame::CoMoving { c } = frame {
        if c != 0.0 {
            limit = limit.min(grid.dx / c.abs());
        }
    }
    limit
}

#[derive(Debug, Clone, Serialize)]
pub struct Simulation {
    pub params: RawParams,
    pub grid: Grid1D,
    pub config: SimConfig,
    pub steps: usize,
    pub snapshots: Vec<Field>,
}

struct Rhs<'a> {
    params: &'a ModelParams,
    inv_dx2: f64,
    inv_dx: f64,
    advect: f64,
}

impl Rhs<'_> {
    fn eval(&self, s: &[f64], i: &[f64], ds: &mut [f64], di: &mut [f64]) {
        let n = s.len();
        let (d1, d2) = (self.params.d1() * self.inv_dx2, self.params.d2() * self.inv_dx2);
        let a = self.advect * self.inv_dx;
        for k in 0..n {
            let (l, r) = (if k == 0 { 1 } else { k - 1 }, if k == n - 1 { n - 2 } else { k + 1 });
            let lap_s = s[l] - 2.0 * s[k] + s[r];
            let lap_i = i[l] - 2.0 * i[k] + i[r];
            let react = self.params.net_infection(s[k], i[k]);
            ds[k] = d1 * lap_s - react;
            di[k] = d2 * lap_i + react;
            if a != 0.0 && k < n - 1 {
                ds[k] += a * (s[k + 1] - s[k]);
                di[k] += a * (i[k + 1] - i[k]);
            }
        }
    }
}

/// Rightmost position where `I` falls through `value`, linearly interpolated.
pub fn front_position(field: &Field, grid: &Grid1D, value: f64) -> Option<f64> {
    let i = &field.i;
    let k = (0..i.len() - 1).rev().find(|&k| i[k] >= value && i[k + 1] < value)?;
    let w = (i[k] - value) / (i[k] - i[k + 1]);
    Some(field.x(grid, k) + w * grid.dx)
}

fn recenter(field: &mut Field, grid: &Grid1D, win: &MovingWindow, value: f64) {
    let Some(pos) = front_position(field, grid, value) else { return };
    let local = pos - field.offset - grid.x_min;
    if local <= win.trigger * grid.length() {
        return;
    }
    let m = ((local - win.target * grid.length()) / grid.dx).floor() as usize;
    if m == 0 || m >= grid.n {
        return;
    }
    field.s.drain(..m);
    field.i.drain(..m);
    field.s.resize(grid.n, 1.0);
    field.i.resize(grid.n, 0.0);
    field.offset += m as f64 * grid.dx;
}

/// Advance `init` to `config.t_end` with fixed steps of `config.dt` (the last
/// step is shortened to land on `t_end`).
pub fn simulate(params: &ModelParams, grid: &Grid1D, init: &Field, config: &SimConfig) -> Result<Simulation> {
    if init.s.len() != grid.n || init.i.len() != grid.n {
        return Err(Error::DimensionMismatch { expected: grid.n, got: init.s.len().min(init.i.len()) });
    }
    if init.s.iter().chain(&init.i).any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteField { t: init.t });
    }
    if !(config.t_end > 0.0 && config.t_end.is_finite()) {
        return Err(Error::InvalidInput(format!("horizon must be positive, got {}", config.t_end)));
    }
    let diffusion_length = params.d1().max(params.d2()).sqrt();
    if grid.length() < 50.0 * diffusion_length {
        return Err(Error::InvalidInput(format!(
            "domain length {} is shorter than 50 diffusion lengths ({})",
            grid.length(),
            50.0 * diffusion_length
        )));
    }
    let limit = max_stable_dt(params, grid, config.frame);
    if !(config.dt > 0.0 && config.dt <= limit) {
        return Err(Error::CflViolation { dt: config.dt, limit });
    }
    let rhs = Rhs {
        params,
        inv_dx2: 1.0 / (grid.dx * grid.dx),
        inv_dx: 1.0 / grid.dx,
        advect: match config.frame {
            Frame::Stationary => 0.0,
            Frame::CoMoving { c } => c,
        },
    };
    let level_value = config.window.map(|w| w.level * params.i_endemic()).unwrap_or(0.0);

    let n = grid.n;
    let mut field = init.clone();
    let mut snapshots = vec![field.clone()];
    let (mut k1s, mut k1i) = (vec![0.0; n], vec![0.0; n]);
    let (mut k2s, mut k2i) = (vec![0.0; n], vec![0.0; n]);
    let (mut k3s, mut k3i) = (vec![0.0; n], vec![0.0; n]);
    let (mut k4s, mut k4i) = (vec![0.0; n], vec![0.0; n]);
    let (mut ts, mut ti) = (vec![0.0; n], vec![0.0; n]);

    let total_steps = (config.t_end / config.dt - 1e-9).ceil() as usize;
    let t0 = init.t;
    for step in 1..=total_steps {
        let t_next = if step == total_steps { t0 + config.t_end } else { t0 + step as f64 * config.dt };
        let h = t_next - field.t;
        let (s, i) = (&field.s, &field.i);

        rhs.eval(s, i, &mut k1s, &mut k1i);
        for k in 0..n {
            ts[k] = s[k] + 0.5 * h * k1s[k];
            ti[k] = i[k] + 0.5 * h * k1i[k];
        }
        rhs.eval(&ts, &ti, &mut k2s, &mut k2i);
        for k in 0..n {
            ts[k] = s[k] + 0.5 * h * k2s[k];
            ti[k] = i[k] + 0.5 * h * k2i[k];
        }
        rhs.eval(&ts, &ti, &mut k3s, &mut k3i);
        for k in 0..n {
            ts[k] = s[k] + h * k3s[k];
            ti[k] = i[k] + h * k3i[k];
        }
        rhs.eval(&ts, &ti, &mut k4s, &mut k4i);
        let mut finite = true;
        for k in 0..n {
            field.s[k] += h / 6.0 * (k1s[k] + 2.0 * (k2s[k] + k3s[k]) + k4s[k]);
            field.i[k] += h / 6.0 * (k1i[k] + 2.0 * (k2i[k] + k3i[k]) + k4i[k]);
            finite &= field.s[k].is_finite() && field.i[k].is_finite();
        }
        field.t = t_next;
        if !finite {
            return Err(Error::NonFiniteField { t: t_next });
        }
        if let Some(win) = &config.window {
            recenter(&mut field, grid, win, level_value);
        }
        if step % config.stride == 0 || step == total_steps {
            snapshots.push(field.clone());
        }
    }
    Ok(Simulation { params: params.raw(), grid: *grid, config: config.clone(), steps: total_steps, snapshots })
}

/// Slope, intercept and coefficient of determination of a least-squares line.
pub fn fit_line(ts: &[f64], xs: &[f64]) -> (f64, f64, f64) {
    let n = ts.len() as f64;
    let (mt, mx) = (ts.iter().sum::<f64>() / n, xs.iter().sum::<f64>() / n);
    let stt: f64 = ts.iter().map(|t| (t - mt) * (t - mt)).sum();
    let stx: f64 = ts.iter().zip(xs).map(|(t, x)| (t - mt) * (x - mx)).sum();
    let slope = if stt > 0.0 { stx / stt } else { 0.0 };
    let intercept = mx - slope * mt;
    let ss_tot: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let ss_res: f64 = ts.iter().zip(xs).map(|(t, x)| (x - intercept - slope * t).powi(2)).sum();
    let r2 = if ss_tot > 0.0 { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) } else { 1.0 };
    (slope, intercept, r2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpeedEstimate {
    pub c_hat: f64,
    pub intercept: f64,
    pub r2: f64,
    /// Fraction of `I_A` tracked.
    pub level: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub samples: usize,
}

/// Fit the position of the `level * I_A` crossing against time over the
/// last `window` fraction of the simulated span.
pub fn measure_front_speed(
    snapshots: &[Field],
    grid: &Grid1D,
    params: &ModelParams,
    level: f64,
    window: f64,
) -> Result<SpeedEstimate> {
    if !(level > 0.0 && level < 1.0) || !(window > 0.0 && window <= 1.0) {
        return Err(Error::InvalidInput(format!("level {level} and window {window} must lie in (0, 1)")));
    }
    let (Some(first), Some(last)) = (snapshots.first(), snapshots.last()) else {
        return Err(Error::InterfaceLost("no snapshots".into()));
    };
    let t_start = last.t - window * (last.t - first.t);
    let value = level * params.i_endemic();
    let margin = 10.0 * grid.dx;
    let (mut ts, mut xs) = (Vec::new(), Vec::new());
    for f in snapshots.iter().filter(|f| f.t >= t_start - 1e-12) {
        let x = front_position(f, grid, value)
            .ok_or_else(|| Error::InterfaceLost(format!("no crossing of I = {value} at t = {}", f.t)))?;
        let local = x - f.offset;
        if local < grid.x_min + margin || local > grid.x_max - margin {
            return Err(Error::InterfaceLost(format!("front at x = {x} is within 10 dx of the boundary at t = {}", f.t)));
        }
        ts.push(f.t);
        xs.push(x);
    }
    if ts.len() < 10 {
        return Err(Error::InvalidInput(format!("need at least 10 snapshots in the window, got {}", ts.len())));
    }
    let (c_hat, intercept, r2) = fit_line(&ts, &xs);
    Ok(SpeedEstimate { c_hat, intercept, r2, level, t_start, t_end: last.t, samples: ts.len() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileComparison {
    /// Largest Euclidean distance between `(S, I)` pairs over the compared nodes.
    pub discrepancy: f64,
    pub nodes: usize,
    /// Added to `z` to place the profile on the grid.
    pub shift: f64,
}

/// Align `profile` with `field` at their `I = I_A/2` crossings and take the
/// sup-norm difference over nodes with `0.05 I_A <= I <= 0.95 I_A`.
pub fn compare_profile(field: &Field, grid: &Grid1D, profile: &FrontProfile, params: &ModelParams) -> Result<ProfileComparison> {
    let i_a = params.i_endemic();
    let half = 0.5 * i_a;
    let x_star = front_position(field, grid, half).ok_or(Error::NoOverlap)?;
    let z_star = (1..profile.len())
        .find(|&k| profile.i[k - 1] >= half && profile.i[k] < half)
        .map(|k| {
            let w = (profile.i[k - 1] - half) / (profile.i[k - 1] - profile.i[k]);
            profile.z[k - 1] + w * (profile.z[k] - profile.z[k - 1])
        })
        .ok_or(Error::NoOverlap)?;
    let shift = x_star - z_star;
    let mut worst: f64 = 0.0;
    let mut nodes = 0;
    for k in 0..grid.n {
        let i = field.i[k];
        if !(0.05 * i_a..=0.95 * i_a).contains(&i) {
            continue;
        }
        let z = field.x(grid, k) - shift;
        let (Some(ps), Some(pi)) = (interpolate(&profile.z, &profile.s, z), interpolate(&profile.z, &profile.i, z)) else {
            continue;
        };
        worst = worst.max((field.s[k] - ps).hypot(i - pi));
        nodes += 1;
    }
    if nodes == 0 {
        return Err(Error::NoOverlap);
    }
    Ok(ProfileComparison { discrepancy: worst, nodes, shift })
}

/// JSON manifest accompanying the snapshot files.
#[derive(Debug, Clone, Serialize)]
pub struct SnapshotManifest<'a> {
    pub params: &'a RawParams,
    pub grid: &'a Grid1D,
    pub config: &'a SimConfig,
    pub steps: usize,
    pub snapshot_times: Vec<f64>,
    pub files: Vec<String>,
}

impl Simulation {
    /// Write `snapshot_NNNNN.csv` files and `snapshots.json` into `dir`;
    /// returns every path written, manifest last.
    pub fn write_to(&self, dir: &Path) -> io::Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut paths = Vec::with_capacity(self.snapshots.len() + 1);
        for (k, f) in self.snapshots.iter().enumerate() {
            let path = dir.join(format!("snapshot_{k:05}.csv"));
            let mut w = BufWriter::new(File::create(&path)?);
            f.write_csv(&self.grid, &mut w)?;
            w.flush()?;
            paths.push(path);
        }
        let manifest = SnapshotManifest {
            params: &self.params,
            grid: &self.grid,
            config: &self.config,
            steps: self.steps,
            snapshot_times: self.snapshots.iter().map(|f| f.t).collect(),
            files: paths.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect(),
        };
        let path = dir.join("snapshots.json");
        fs::write(&path, serde_json::to_string_pretty(&manifest).map_err(io::Error::other)?)?;
        paths.push(path);
        Ok(paths)
    }
}
