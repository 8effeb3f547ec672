//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use sisfront::connect::{full_system_connection, lift_profile, shoot_heteroclinic, FrontProfile, ShootSpec};
use sisfront::geometry::{
    case2_corner_path, hausdorff_polylines, interior_probe_grid, logspace, rotation_monotonicity_scan,
    sup_distance_to_limit_line, trap_check_case2, trap_check_case3, wedge_rotation,
};
use sisfront::integrate::integrate;
use sisfront::linalg::{eigenvalues, sort_eigenvalues};
use sisfront::model::{ModelParams, Regime};
use sisfront::pdesim::{
    compare_profile, initial_front, max_stable_dt, measure_front_speed, simulate, Field, Frame, Grid1D, MovingWindow,
    SimConfig,
};
use sisfront::phasespace::{conservation_residual, jacobian, System, SystemId};
use sisfront::reductions::{
    burgers_fkpp_min_speed, burgers_fkpp_rhs_tw, case2_eigs_a, case2_eigs_b, case3_eigs_a, case3_eigs_b,
    case3_min_speed, case3_reduced_rhs, case3_slope_interval, fkpp_parameters,
};
use sisfront::Error;

type Outcome = Result<String, String>;
/// Name, runtime limit in seconds, check.
type Criterion = (&'static str, Option<f64>, fn() -> Outcome);

const PAIRS: [(f64, f64, f64); 2] = [(2.0, 1.0, 0.0), (2.0, 0.5, 0.5)];
const CASE2_SPEEDS: [f64; 6] = [0.2, 0.5, 1.0, 2.0, 5.0, 10.0];

fn params(beta: f64, gamma: f64, sigma: f64, c: f64, regime: Regime) -> ModelParams {
    ModelParams::new(beta, gamma, sigma, c, 0.01, regime).expect("admissible parameters")
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn gap_ok(f: &FrontProfile) -> bool {
    // the arrival event is localised onto the sphere of radius 1e-6
    f.endpoint_gap <= 1e-6 * (1.0 + 1e-9)
}

fn random_params(rng: &mut impl Rng) -> ModelParams {
    let sigma = rng.gen_range(0.0..2.0);
    let gamma = rng.gen_range(0.1..1.0);
    let beta = gamma * (1.0 + sigma) * rng.gen_range(1.1..4.0);
    params(beta, gamma, sigma, rng.gen_range(0.2..5.0), Regime::Case2SlowInfected)
}

fn eig_error(id: SystemId, at: [f64; 2], q: &ModelParams, want: [(f64, f64); 2]) -> f64 {
    let got = eigenvalues(&jacobian(&System::new(id, q.clone()), &at).expect("jacobian"));
    let mut want: Vec<_> = want.iter().map(|(re, im)| num_complex::Complex64::new(*re, *im)).collect();
    sort_eigenvalues(&mut want);
    got.iter().zip(&want).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
}

fn eigenvalue_oracle() -> Outcome {
    let mut rng = rand::rngs::StdRng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let base = random_params(&mut rng);
        let (a1, a2) = case2_eigs_a(&base);
        let (b1, b2) = case2_eigs_b(&base);
        worst = worst.max(eig_error(SystemId::Case2Planar, [base.s_endemic(), base.i_endemic()], &base, [(a1, 0.0), (a2, 0.0)]));
        worst = worst.max(eig_error(SystemId::Case2Planar, [1.0, 0.0], &base, [(b1, 0.0), (b2, 0.0)]));

        let c_min = case3_min_speed(&base);
        let f = if rng.gen_bool(0.5) { rng.gen_range(1.05..3.0) } else { rng.gen_range(0.2..0.95) };
        let q = base.with_speed(c_min * f).expect("positive speed");
        let (a1, a2) = case3_eigs_a(&q);
        let (b1, b2) = case3_eigs_b(&q);
        worst = worst.max(eig_error(SystemId::Case3Planar, [q.i_endemic(), 0.0], &q, [(a1, 0.0), (a2, 0.0)]));
        worst = worst.max(eig_error(SystemId::Case3Planar, [0.0, 0.0], &q, [(b1.re, b1.im), (b2.re, b2.im)]));
    }
    check(worst < 1e-8, || format!("max eigenvalue error {worst:e}"))?;
    Ok(format!("max eigenvalue error {worst:.2e} over 100 draws"))
}

fn trapping() -> Outcome {
    let mut checked2 = 0;
    let mut checked3 = 0;
    let mut rejected = 0;
    for sigma in [0.0, 0.5, 2.0] {
        for gamma in [0.2, 0.4, 0.6, 0.8, 1.0] {
            for m in [1.1, 1.5, 2.0, 3.0, 5.0] {
                let beta = gamma * (1.0 + sigma) * m;
                for c in [0.2, 1.0, 5.0] {
                    let q = params(beta, gamma, sigma, c, Regime::Case2SlowInfected);
                    let rep = trap_check_case2(&q, 100).map_err(|e| e.to_string())?;
                    let l3 = rep.segment("l3").expect("invariant side");
                    check(rep.passed() && -l3.min_margin < 1e-12, || {
                        format!("case 2 fails at beta={beta} gamma={gamma} sigma={sigma} c={c}: {rep:?}")
                    })?;
                    checked2 += 1;
                }
                let base = params(beta, gamma, sigma, 1.0, Regime::Case3FastInfected);
                let c_min = case3_min_speed(&base);
                for c in [0.2, 1.0, 5.0].into_iter().chain([1.05, 1.5, 3.0].map(|f| f * c_min)) {
                    if c < 1.05 * c_min {
                        continue;
                    }
                    let iv = case3_slope_interval(&base, c).map_err(|e| e.to_string())?;
                    let rep = trap_check_case3(&base, c, iv.midpoint(), 100).map_err(|e| e.to_string())?;
                    check(rep.passed(), || format!("case 3 midpoint fails at beta={beta} gamma={gamma} sigma={sigma} c={c}"))?;
                    checked3 += 1;
                    let mut outside = vec![0.5 * iv.lo];
                    if iv.hi < c {
                        outside.push(0.5 * (iv.hi + c));
                    }
                    for r in outside {
                        let rep = trap_check_case3(&base, c, r, 100).map_err(|e| e.to_string())?;
                        let s3 = rep.segment("s3").expect("lower side").min_margin;
                        check(!rep.passed() && s3 < 0.0, || format!("slope {r} outside the interval passed at c={c}"))?;
                        rejected += 1;
                    }
                }
            }
        }
    }
    Ok(format!("{checked2} case-2 triangles, {checked3} case-3 triangles pass; {rejected} outside slopes rejected"))
}

fn case2_existence() -> Outcome {
    let mut runs = 0;
    for (beta, gamma, sigma) in PAIRS {
        for c in CASE2_SPEEDS {
            let q = params(beta, gamma, sigma, c, Regime::Case2SlowInfected);
            let f = shoot_heteroclinic(&ShootSpec::new(SystemId::Case2Planar), &q).map_err(|e| format!("reduced c={c}: {e}"))?;
            check(gap_ok(&f), || format!("reduced c={c}: gap {}", f.endpoint_gap))?;
            for eps in [0.01, 0.005] {
                let f = full_system_connection(&q, Regime::Case2SlowInfected, eps)
                    .map_err(|e| format!("full c={c} eps={eps}: {e}"))?;
                check(gap_ok(&f), || format!("full c={c} eps={eps}: gap {}", f.endpoint_gap))?;
            }
            runs += 3;
        }
    }
    Ok(format!("{runs} connections with endpoint gap <= 1e-6"))
}

fn case3_existence() -> Outcome {
    let mut runs = 0;
    for (beta, gamma, sigma) in PAIRS {
        let base = params(beta, gamma, sigma, 1.0, Regime::Case3FastInfected);
        let c_min = case3_min_speed(&base);
        for f in [1.05, 1.5, 3.0] {
            let q = base.with_speed(f * c_min).expect("positive speed");
            let p = shoot_heteroclinic(&ShootSpec::new(SystemId::Case3Planar), &q).map_err(|e| format!("reduced {f} c_min: {e}"))?;
            check(gap_ok(&p), || format!("reduced {f} c_min: gap {}", p.endpoint_gap))?;
            let p = full_system_connection(&q, Regime::Case3FastInfected, 0.01).map_err(|e| format!("full {f} c_min: {e}"))?;
            check(gap_ok(&p), || format!("full {f} c_min: gap {}", p.endpoint_gap))?;
            runs += 2;
        }
        let slow = base.with_speed(0.5 * c_min).expect("positive speed");
        let below = shoot_heteroclinic(&ShootSpec::new(SystemId::Case3Planar), &slow);
        check(matches!(below, Err(Error::SpeedBelowBound { .. })), || format!("0.5 c_min gave {below:?}"))?;
    }
    Ok(format!("{runs} connections; SpeedBelowBound raised at 0.5 c_min"))
}

fn case1_existence() -> Outcome {
    let mut runs = 0;
    for (beta, gamma, sigma) in PAIRS {
        let q = params(beta, gamma, sigma, 1.0, Regime::Case1ComparableSmall);
        let f = shoot_heteroclinic(&ShootSpec::new(SystemId::Case1Flow), &q).map_err(|e| e.to_string())?;
        check(f.i.windows(2).all(|w| w[1] < w[0]), || "reduced flow samples not decreasing".into())?;
        check(gap_ok(&f), || format!("reduced gap {}", f.endpoint_gap))?;
        for alpha in [0.5, 1.0, 2.0] {
            let qa = q.with_alpha(alpha).map_err(|e| e.to_string())?;
            let f = full_system_connection(&qa, Regime::Case1ComparableSmall, 0.01).map_err(|e| format!("alpha={alpha}: {e}"))?;
            check(gap_ok(&f), || format!("alpha={alpha}: gap {}", f.endpoint_gap))?;
            runs += 1;
        }
    }
    Ok(format!("reduced flows monotone; {runs} full connections at eps = 0.01"))
}

fn residual_order() -> Outcome {
    let mut ratios = Vec::new();
    for (beta, gamma, sigma) in PAIRS {
        let q2 = params(beta, gamma, sigma, 1.0, Regime::Case2SlowInfected);
        let c3 = 1.5 * case3_min_speed(&q2);
        let q3 = q2.with_speed(c3).expect("positive speed");
        for (q, regime) in [(q2, Regime::Case2SlowInfected), (q3, Regime::Case3FastInfected)] {
            let r = |eps: f64| {
                full_system_connection(&q, regime, eps)
                    .map(|f| f.max_manifold_residual.expect("full-system residual"))
                    .map_err(|e| e.to_string())
            };
            let ratio = r(0.01)? / r(0.005)?;
            check((1.5..=2.5).contains(&ratio), || format!("{regime} c={}: ratio {ratio}", q.c()))?;
            ratios.push(ratio);
        }
    }
    let list: Vec<String> = ratios.iter().map(|r| format!("{r:.3}")).collect();
    Ok(format!("residual ratios eps/(eps/2) = [{}]", list.join(", ")))
}

fn phase_points(f: &FrontProfile) -> Vec<[f64; 2]> {
    f.s.iter().zip(&f.i).map(|(s, i)| [*s, *i]).collect()
}

fn rotation() -> Outcome {
    let q = params(2.0, 1.0, 0.0, 1.0, Regime::Case2SlowInfected);
    let probes = interior_probe_grid(&q, 20);
    for p in &probes {
        let w = wedge_rotation(p[0], p[1], &q).map_err(|e| e.to_string())?;
        check(w < 0.0, || format!("wedge {w} at {p:?}"))?;
    }
    let scan = rotation_monotonicity_scan(&q, &probes, &logspace(-2.0, 2.0, 20)).map_err(|e| e.to_string())?;
    check(scan.passed(), || format!("{} probes not rotating monotonically", scan.failures.len()))?;

    let shoot = |c: f64| {
        shoot_heteroclinic(&ShootSpec::new(SystemId::Case2Planar), &q.with_speed(c).expect("positive speed"))
            .map(|f| phase_points(&f))
            .map_err(|e| e.to_string())
    };
    let mut large = Vec::new();
    for c in [2.0, 5.0, 10.0, 20.0] {
        large.push(sup_distance_to_limit_line(&shoot(c)?));
    }
    check(large.windows(2).all(|w| w[1] < w[0]), || format!("limit-line distances {large:?}"))?;
    let corner = case2_corner_path(&q);
    let mut small = Vec::new();
    for c in [0.5, 0.25, 0.1] {
        small.push(hausdorff_polylines(&shoot(c)?, &corner, 200));
    }
    check(small.windows(2).all(|w| w[1] < w[0]), || format!("corner distances {small:?}"))?;
    Ok(format!(
        "400 probes x 20 deltas monotone; line distances {:.3?}; corner distances {:.3?}",
        large, small
    ))
}

fn conservation() -> Outcome {
    let mut worst_orbit: f64 = 0.0;
    let cases = [
        (1.0, Regime::Case1ComparableSmall),
        (1.0, Regime::Case2SlowInfected),
        (2.5, Regime::Case3FastInfected),
    ];
    for (c, regime) in cases {
        let q = params(2.0, 1.0, 0.0, c, regime);
        let f = full_system_connection(&q, regime, 0.01).map_err(|e| e.to_string())?;
        let q = q.with_epsilon(0.01).map_err(|e| e.to_string())?;
        let lifted = lift_profile(&f, &q);
        for x in &lifted {
            worst_orbit = worst_orbit.max(conservation_residual(x, &q).0.abs());
        }
        // integrate the 4D system from a lifted state near the saddle
        let tr = integrate(&System::new(SystemId::Full4, q.clone()), &lifted[1], 20.0, 1e-11).map_err(|e| e.to_string())?;
        for x in &tr.states {
            worst_orbit = worst_orbit.max(conservation_residual(&[x[0], x[1], x[2], x[3]], &q).0.abs());
        }
    }
    check(worst_orbit < 1e-6, || format!("orbit residual {worst_orbit:e}"))?;

    let q = params(2.0, 1.0, 0.0, 1.0, Regime::Case2SlowInfected);
    let g = Grid1D::new(0.0, 200.0, 1001).map_err(|e| e.to_string())?;
    let init = initial_front(&g, &q, 50.0, 2.0).map_err(|e| e.to_string())?;
    let cfg = SimConfig::new(max_stable_dt(&q, &g, Frame::Stationary), 50.0).with_stride(100);
    let run = simulate(&q, &g, &init, &cfg).map_err(|e| e.to_string())?;
    let m0 = init.total_population(&g);
    let drift = run.snapshots.iter().map(|f| (f.total_population(&g) - m0).abs()).fold(0.0, f64::max);
    check(drift < 1e-8 * g.length(), || format!("population drift {drift:e}"))?;
    Ok(format!("orbit residual {worst_orbit:.2e}; PDE drift {drift:.2e} (limit {:.0e})", 1e-8 * g.length()))
}

fn pulled_speed_at(n: usize) -> Result<f64, String> {
    let q = params(2.0, 1.0, 0.0, 2.0, Regime::Case3FastInfected);
    let g = Grid1D::new(0.0, 400.0, n).map_err(|e| e.to_string())?;
    let init = initial_front(&g, &q, 100.0, 1.0).map_err(|e| e.to_string())?;
    let dt = max_stable_dt(&q, &g, Frame::Stationary);
    let cfg = SimConfig::new(dt, 200.0).with_stride((1.0 / dt).round() as usize).with_window(MovingWindow::default());
    let run = simulate(&q, &g, &init, &cfg).map_err(|e| e.to_string())?;
    measure_front_speed(&run.snapshots, &g, &q, 0.5, 0.5).map(|e| e.c_hat).map_err(|e| e.to_string())
}

fn pulled_speed() -> Outcome {
    let target = 2.0;
    let coarse = pulled_speed_at(4000)?;
    check((coarse - target).abs() < 0.1 * target, || format!("c_hat {coarse} vs {target}"))?;
    let fine = pulled_speed_at(7999)?;
    let change = (fine - coarse).abs() / coarse;
    check(change < 0.01, || format!("grid change {change}"))?;
    Ok(format!("c_hat {coarse:.4} (n=4000), {fine:.4} (n=7999); relative change {change:.1e}"))
}

fn sigma_zero_consistency() -> Outcome {
    let mut rng = rand::rngs::StdRng::seed_from_u64(77);
    let mut worst: f64 = 0.0;
    let mut ks = 0;
    for _ in 0..1000 {
        let gamma = rng.gen_range(0.1..1.0);
        let q = params(gamma * rng.gen_range(1.1..4.0), gamma, 0.0, rng.gen_range(0.2..5.0), Regime::Case3FastInfected);
        let (i, v) = (rng.gen_range(-0.5..1.5), rng.gen_range(-2.0..2.0));
        let a = case3_reduced_rhs(i, v, &q).map_err(|e| e.to_string())?;
        let b = burgers_fkpp_rhs_tw(i, v, &q).map_err(|e| e.to_string())?;
        worst = worst.max((a[0] - b[0]).abs()).max((a[1] - b[1]).abs());
        let fk = fkpp_parameters(&q).map_err(|e| e.to_string())?;
        if fk.k < 2.0 {
            check(fk.c_scaled_min == 2.0, || format!("k = {} gave {}", fk.k, fk.c_scaled_min))?;
            ks += 1;
        }
    }
    for k in [0.0, 0.5, 1.0, 1.5, 1.999] {
        check(burgers_fkpp_min_speed(k) == 2.0, || format!("k = {k}"))?;
    }
    check(worst < 1e-12, || format!("max difference {worst:e}"))?;
    Ok(format!("max difference {worst:.1e} on 1000 states; c~ = 2 for {ks} sampled k < 2"))
}

fn pde_vs_ode() -> Outcome {
    let q = params(2.0, 1.0, 0.0, 1.0, Regime::Case2SlowInfected);
    let reduced = shoot_heteroclinic(&ShootSpec::new(SystemId::Case2Planar), &q).map_err(|e| e.to_string())?;
    let full = full_system_connection(&q, Regime::Case2SlowInfected, 0.01).map_err(|e| e.to_string())?;
    let g = Grid1D::new(-60.0, 60.0, 2401).map_err(|e| e.to_string())?;
    let frame = Frame::CoMoving { c: 1.0 };
    let init = Field::from_profile(&g, &reduced, 0.0);
    let cfg = SimConfig::new(max_stable_dt(&q, &g, frame), 20.0).with_frame(frame);
    let run = simulate(&q, &g, &init, &cfg).map_err(|e| e.to_string())?;
    let cmp = compare_profile(run.snapshots.last().expect("final state"), &g, &full, &q).map_err(|e| e.to_string())?;
    check(cmp.discrepancy < 0.05, || format!("discrepancy {}", cmp.discrepancy))?;
    Ok(format!("sup discrepancy {:.2e} over {} nodes after T = 20", cmp.discrepancy, cmp.nodes))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("eigenvalue oracle agreement", Some(1.0), eigenvalue_oracle),
        ("trapping verification", Some(5.0), trapping),
        ("heteroclinic existence, case 2", Some(30.0), case2_existence),
        ("heteroclinic existence, case 3", Some(30.0), case3_existence),
        ("case 1 connections", None, case1_existence),
        ("manifold residual order", None, residual_order),
        ("rotation monotonicity and limit shapes", Some(5.0), rotation),
        ("conservation", None, conservation),
        ("pulled-front speed", None, pulled_speed),
        ("sigma = 0 consistency", None, sigma_zero_consistency),
        ("PDE vs ODE profile agreement", None, pde_vs_ode),
    ];
    let mut failed = 0;
    for (k, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut outcome = run();
        let secs = start.elapsed().as_secs_f64();
        if let (Ok(detail), Some(limit)) = (&outcome, limit) {
            if secs > *limit {
                outcome = Err(format!("{detail}; runtime {secs:.2} s exceeds {limit} s"));
            }
        }
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} ({secs:.2} s)", k + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} ({secs:.2} s)", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
