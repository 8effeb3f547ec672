use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Serialize;
use sisfront::connect::{
    equilibrium_coords, full_system_connection, shoot_heteroclinic, FrontProfile, ShootSpec, DEFAULT_BALL_RADIUS,
};
use sisfront::geometry::{
    interior_probe_grid, rotation_monotonicity_scan, trap_check_case2, trap_check_case3, TrapReport,
};
use sisfront::linalg::{eigenvalues, sort_eigenvalues};
use sisfront::model::{EquilibriumLabel, ModelParams, RawParams};
use sisfront::pdesim::{
    compare_profile, initial_front, max_stable_dt, measure_front_speed, simulate, Field, Frame, Grid1D, MovingWindow,
    ProfileComparison, SimConfig, SpeedEstimate,
};
use sisfront::phasespace::{jacobian, System, SystemId};
use sisfront::reductions::{
    case1_eigs, case2_eigs_a, case2_eigs_b, case3_eigs_a, case3_eigs_b, case3_slope_interval, fkpp_parameters,
    FkppParameters, SpeedBound,
};
use sisfront::Regime;

use crate::error::CliError;
use crate::run::{write_json, write_with, Report};

/// The reduced (`eps = 0`) system of a regime.
pub fn reduced_system(regime: Regime) -> SystemId {
    match regime {
        Regime::Case1ComparableSmall => SystemId::Case1Flow,
        Regime::Case2SlowInfected => SystemId::Case2Planar,
        Regime::Case3FastInfected => SystemId::Case3Planar,
    }
}

#[derive(Debug, Serialize)]
pub struct EigenReport {
    pub point: EquilibriumLabel,
    pub coords: Vec<f64>,
    /// `[re, im]` pairs, sorted by real part.
    pub closed_form: Vec<[f64; 2]>,
    pub numerical: Vec<[f64; 2]>,
}

#[derive(Debug, Serialize)]
pub struct Analysis {
    pub params: RawParams,
    pub d1: f64,
    pub d2: f64,
    pub endemic: [f64; 2],
    pub disease_free: [f64; 2],
    pub growth_rate: f64,
    pub system: &'static str,
    pub coordinates: &'static [&'static str],
    pub eigenvalues: Vec<EigenReport>,
    pub case3_speed: Option<SpeedBound>,
    pub fkpp: Option<FkppParameters>,
}

fn pairs(mut ev: Vec<Complex64>) -> Vec<[f64; 2]> {
    sort_eigenvalues(&mut ev);
    ev.into_iter().map(|z| [z.re, z.im]).collect()
}

fn real(xs: &[f64]) -> Vec<Complex64> {
    xs.iter().map(|x| Complex64::new(*x, 0.0)).collect()
}

pub fn analysis(params: &ModelParams) -> Result<Analysis, CliError> {
    let id = reduced_system(params.regime());
    let closed = |label: EquilibriumLabel| -> Vec<Complex64> {
        let endemic = label == EquilibriumLabel::Endemic;
        match params.regime() {
            Regime::Case1ComparableSmall => {
                let (a, b) = case1_eigs(params);
                real(&[if endemic { a } else { b }])
            }
            Regime::Case2SlowInfected => {
                let (x, y) = if endemic { case2_eigs_a(params) } else { case2_eigs_b(params) };
                real(&[x, y])
            }
            Regime::Case3FastInfected if endemic => {
                let (x, y) = case3_eigs_a(params);
                real(&[x, y])
            }
            Regime::Case3FastInfected => {
                let (x, y) = case3_eigs_b(params);
                vec![x, y]
            }
        }
    };
    let system = System::new(id, params.clone());
    let mut reports = Vec::new();
    for label in [EquilibriumLabel::Endemic, EquilibriumLabel::DiseaseFree] {
        let coords = equilibrium_coords(id, label, params);
        let numerical = eigenvalues(&jacobian(&system, &coords)?);
        reports.push(EigenReport { point: label, coords, closed_form: pairs(closed(label)), numerical: pairs(numerical) });
    }
    Ok(Analysis {
        params: params.raw(),
        d1: params.d1(),
        d2: params.d2(),
        endemic: [params.s_endemic(), params.i_endemic()],
        disease_free: [1.0, 0.0],
        growth_rate: params.growth_rate(),
        system: id.name(),
        coordinates: id.coordinate_names(),
        eigenvalues: reports,
        case3_speed: (params.regime() == Regime::Case3FastInfected).then(|| SpeedBound::at(params)),
        fkpp: fkpp_parameters(params).ok(),
    })
}

pub fn analyze(params: &ModelParams, out: &Path) -> Result<Report, CliError> {
    let a = analysis(params)?;
    println!("{}", serde_json::to_string_pretty(&a)?);
    let path = write_json(&out.join("analysis.json"), &a)?;
    Ok(Report { outputs: vec![path], passed: true, summary: format!("{} analysed", a.system), failure: None })
}

fn arrived(p: &FrontProfile) -> bool {
    p.endpoint_gap <= DEFAULT_BALL_RADIUS * (1.0 + 1e-9)
}

fn write_profile(p: &FrontProfile, out: &Path, stem: &str) -> Result<Vec<PathBuf>, CliError> {
    let csv = write_with(&out.join(format!("{stem}.csv")), |w| p.write_csv(w))?;
    let json = write_json(&out.join(format!("{stem}.json")), &p.summary())?;
    Ok(vec![csv, json])
}

pub fn shoot(params: &ModelParams, reduced: bool, out: &Path) -> Result<Report, CliError> {
    let profile = if reduced {
        shoot_heteroclinic(&ShootSpec::new(reduced_system(params.regime())), params)?
    } else {
        full_system_connection(params, params.regime(), params.epsilon())?
    };
    let outputs = write_profile(&profile, out, "profile")?;
    Ok(Report {
        outputs,
        passed: arrived(&profile),
        summary: format!("{}: endpoint gap {:e}, {} samples", profile.system.name(), profile.endpoint_gap, profile.len()),
        failure: None,
    })
}

pub fn trap_report(params: &ModelParams, r: Option<f64>, samples: usize) -> Result<TrapReport, CliError> {
    match params.regime() {
        Regime::Case2SlowInfected => Ok(trap_check_case2(params, samples)?),
        Regime::Case3FastInfected => {
            let c = params.c();
            let r = match r {
                Some(r) => r,
                None => case3_slope_interval(params, c)?.midpoint(),
            };
            Ok(trap_check_case3(params, c, r, samples)?)
        }
        Regime::Case1ComparableSmall => {
            Err(CliError::Validation("trapping regions exist for regimes case2 and case3 only".into()))
        }
    }
}

pub fn trap(params: &ModelParams, r: Option<f64>, samples: usize, out: &Path) -> Result<Report, CliError> {
    let rep = trap_report(params, r, samples)?;
    let path = write_json(&out.join("trap.json"), &rep)?;
    Ok(Report {
        outputs: vec![path],
        passed: rep.passed(),
        summary: format!("{:?} triangle: worst margin {:e}", rep.region, rep.worst_margin),
        failure: None,
    })
}

/// Orbits of the stretched Case-2 system for each `delta`, plus the wedge scan.
pub fn rotation(params: &ModelParams, deltas: &[f64], out: &Path) -> Result<Report, CliError> {
    if params.regime() != Regime::Case2SlowInfected {
        return Err(CliError::Validation("rotation scans need regime case2".into()));
    }
    let mut outputs = Vec::new();
    for (k, &delta) in deltas.iter().enumerate() {
        let p = shoot_heteroclinic(&ShootSpec::new(SystemId::Case2Rescaled { delta }), params)?;
        outputs.extend(write_profile(&p, out, &format!("orbit_{k:03}"))?);
    }
    let scan = rotation_monotonicity_scan(params, &interior_probe_grid(params, 20), deltas)?;
    outputs.push(write_json(&out.join("rotation.json"), &scan)?);
    Ok(Report {
        outputs,
        passed: scan.passed(),
        summary: format!("{} deltas, {} non-monotone probes", deltas.len(), scan.failures.len()),
        failure: None,
    })
}

/// Initial data for `simulate`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Init {
    /// Smooth ramp from the endemic to the disease-free state.
    Front,
    /// The reduced traveling-wave profile of the regime.
    Profile,
    /// The endemic state everywhere.
    Endemic,
}

#[derive(Debug, Clone, clap::Args)]
pub struct SimArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub x_min: f64,
    #[arg(long, default_value_t = 200.0, allow_negative_numbers = true)]
    pub x_max: f64,
    /// Number of grid nodes.
    #[arg(long, default_value_t = 2001)]
    pub n: usize,
    #[arg(long, default_value_t = 50.0)]
    pub t_end: f64,
    /// Time step; defaults to the largest stable one.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Steps between snapshots; defaults to one snapshot per unit time.
    #[arg(long)]
    pub stride: Option<usize>,
    #[arg(long, value_enum, default_value_t = Init::Front)]
    pub init: Init,
    /// Interface position of the initial data; defaults to a quarter of the domain.
    #[arg(long, allow_negative_numbers = true)]
    pub interface: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub width: f64,
    /// Solve in the frame moving with speed `c`.
    #[arg(long)]
    pub comoving: bool,
    /// Keep the front inside the domain by shifting it back.
    #[arg(long)]
    pub window: bool,
    /// Fraction of `I_A` tracked as the interface.
    #[arg(long, default_value_t = 0.5)]
    pub level: f64,
    /// Trailing fraction of the run used for the speed fit.
    #[arg(long, default_value_t = 0.5)]
    pub fit_window: f64,
    /// Compare the final state with the full-system profile at `epsilon`.
    #[arg(long)]
    pub compare: bool,
}

#[derive(Debug, Serialize)]
struct SpeedRecord {
    frame: Frame,
    estimate: SpeedEstimate,
    /// Speed in the laboratory frame.
    lab_speed: f64,
}

pub fn simulate_cmd(params: &ModelParams, a: &SimArgs, out: &Path) -> Result<Report, CliError> {
    let grid = Grid1D::new(a.x_min, a.x_max, a.n)?;
    let frame = if a.comoving { Frame::CoMoving { c: params.c() } } else { Frame::Stationary };
    let interface = a.interface.unwrap_or(a.x_min + 0.25 * grid.length());
    let init = match a.init {
        Init::Front => initial_front(&grid, params, interface, a.width)?,
        Init::Profile => {
            let p = shoot_heteroclinic(&ShootSpec::new(reduced_system(params.regime())), params)?;
            Field::from_profile(&grid, &p, interface)
        }
        Init::Endemic => Field::constant(&grid, params.s_endemic(), params.i_endemic()),
    };
    let dt = a.dt.unwrap_or_else(|| max_stable_dt(params, &grid, frame));
    let stride = a.stride.unwrap_or(((1.0 / dt).round() as usize).max(1));
    let mut cfg = SimConfig::new(dt, a.t_end).with_stride(stride).with_frame(frame);
    if a.window {
        cfg = cfg.with_window(MovingWindow::default());
    }
    let run = simulate(params, &grid, &init, &cfg)?;
    let mut outputs = run.write_to(&out.join("snapshots"))?;
    let mut summary = format!("{} steps, {} snapshots", run.steps, run.snapshots.len());

    let mut failure = None;
    match measure_front_speed(&run.snapshots, &grid, params, a.level, a.fit_window) {
        Ok(estimate) => {
            let lab_speed = estimate.c_hat + if a.comoving { params.c() } else { 0.0 };
            summary += &format!(", front speed {lab_speed:.6}");
            outputs.push(write_json(&out.join("speed.json"), &SpeedRecord { frame, estimate, lab_speed })?);
        }
        Err(e) => failure = Some(CliError::from(e)),
    }
    if a.compare {
        let full = full_system_connection(params, params.regime(), params.epsilon())?;
        let last = run.snapshots.last().expect("simulate keeps the final state");
        let cmp: ProfileComparison = compare_profile(last, &grid, &full, params)?;
        summary += &format!(", profile discrepancy {:.3e}", cmp.discrepancy);
        outputs.push(write_json(&out.join("comparison.json"), &cmp)?);
    }
    Ok(Report { outputs, passed: failure.is_none(), summary, failure })
}
