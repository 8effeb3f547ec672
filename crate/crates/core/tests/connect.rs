use sisfront::connect::{
    full_system_connection, lift_profile, shoot_heteroclinic, unstable_direction, FrontProfile, ShootSpec,
};
use sisfront::geometry::{
    case2_corner_path, hausdorff_polylines, sup_distance_to_limit_line, TriangleSpec,
};
use sisfront::integrate::integrate;
use sisfront::model::{ModelParams, Regime};
use sisfront::phasespace::{conservation_residual, System, SystemId};
use sisfront::reductions::{case3_min_speed, case3_slope_interval, ManifoldId};
use sisfront::Error;

fn params(beta: f64, gamma: f64, sigma: f64, c: f64, regime: Regime) -> ModelParams {
    ModelParams::new(beta, gamma, sigma, c, 0.01, regime).unwrap()
}

fn case2(c: f64) -> FrontProfile {
    let q = params(2.0, 1.0, 0.0, c, Regime::Case2SlowInfected);
    shoot_heteroclinic(&ShootSpec::new(SystemId::Case2Planar), &q).unwrap()
}

fn phase_points(f: &FrontProfile) -> Vec<[f64; 2]> {
    f.s.iter().zip(&f.i).map(|(s, i)| [*s, *i]).collect()
}

#[test]
fn case2_reduced_connection() {
    let f = case2(1.0);
    assert!(f.endpoint_gap <= 1e-6 * (1.0 + 1e-9));
    assert_eq!((f.s[0], f.i[0]), (0.5, 0.5));
    let last = f.len() - 1;
    assert!((f.s[last] - 1.0).hypot(f.i[last]) <= 1e-6 * (1.0 + 1e-9));
    // recentred: I crosses I_A/2 at z = 0
    assert!((f.infected_at(0.0).unwrap() - 0.25).abs() < 1e-9);
    assert!(f.z.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn case2_profiles_stay_in_trapping_triangle() {
    for c in [0.2, 0.5, 1.0, 2.0, 5.0, 10.0] {
        let f = case2(c);
        let q = params(2.0, 1.0, 0.0, c, Regime::Case2SlowInfected);
        let tri = TriangleSpec::case2(&q);
        for p in phase_points(&f) {
            assert!(tri.contains(p, 1e-9), "c = {c}: {p:?} outside");
        }
        for k in 0..f.len() {
            assert!(f.s[k] >= 0.0 && f.s[k] <= 1.0 + 1e-9);
            assert!(f.i[k] >= -1e-9 && f.i[k] <= 1.0 + 1e-9);
        }
    }
}

#[test]
fn case2_launch_enters_triangle() {
    let q = params(2.7, 0.8, 0.5, 0.7, Regime::Case2SlowInfected);
    let sys = System::new(SystemId::Case2Planar, q.clone());
    let a = [q.s_endemic(), q.i_endemic()];
    let d = unstable_direction(&sys, &a).unwrap();
    let tri = TriangleSpec::case2(&q);
    let p = [a[0] + 1e-6 * d.vector[0], a[1] + 1e-6 * d.vector[1]];
    assert!(tri.signed_distances(p).iter().all(|x| *x > 0.0), "{:?}", tri.signed_distances(p));
}

#[test]
fn case3_reduced_connection() {
    let q = params(2.0, 1.0, 0.0, 2.5, Regime::Case3FastInfected);
    let f = shoot_heteroclinic(&ShootSpec::new(SystemId::Case3Planar), &q).unwrap();
    assert!(f.endpoint_gap <= 1e-6 * (1.0 + 1e-9));
    // monotone decrease toward 0 (node, not focus)
    assert!(f.i.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    let slow = params(2.0, 1.0, 0.0, 1.0, Regime::Case3FastInfected);
    assert!(matches!(
        shoot_heteroclinic(&ShootSpec::new(SystemId::Case3Planar), &slow),
        Err(Error::SpeedBelowBound { .. })
    ));
}

#[test]
fn case3_profiles_stay_in_trapping_triangle() {
    for (beta, gamma, sigma) in [(2.0, 1.0, 0.0), (2.0, 0.5, 0.5), (4.0, 0.5, 2.0)] {
        let base = params(beta, gamma, sigma, 1.0, Regime::Case3FastInfected);
        let c_min = case3_min_speed(&base);
        for f in [1.05, 1.5, 3.0] {
            let q = base.with_speed(c_min * f).unwrap();
            let r = case3_slope_interval(&q, q.c()).unwrap().midpoint();
            let tri = TriangleSpec::case3(&q, r);
            let prof = shoot_heteroclinic(&ShootSpec::new(SystemId::Case3Planar), &q).unwrap();
            for x in &prof.states {
                assert!(tri.contains([x[0], x[1]], 1e-9), "c/c_min = {f}: {x:?}");
            }
        }
    }
}

#[test]
fn burgers_fkpp_matches_case3_profile() {
    let q = params(2.0, 1.0, 0.0, 2.5, Regime::Case3FastInfected);
    let a = shoot_heteroclinic(&ShootSpec::new(SystemId::Case3Planar), &q).unwrap();
    let b = shoot_heteroclinic(&ShootSpec::new(SystemId::BurgersFkpp), &q).unwrap();
    for z in [-5.0, -1.0, 0.0, 2.0, 6.0] {
        assert!((a.infected_at(z).unwrap() - b.infected_at(z).unwrap()).abs() < 1e-6);
    }
}

#[test]
fn case1_flow_connection() {
    let q = params(2.0, 1.0, 0.5, 1.0, Regime::Case1ComparableSmall);
    let f = shoot_heteroclinic(&ShootSpec::new(SystemId::Case1Flow), &q).unwrap();
    assert!(f.i.windows(2).all(|w| w[1] < w[0]));
    for k in 0..f.len() {
        assert!((f.s[k] + f.i[k] - 1.0).abs() < 1e-15);
    }
}

#[test]
fn large_speed_orbits_approach_limit_line() {
    let d: Vec<f64> = [2.0, 5.0, 10.0, 20.0].iter().map(|c| sup_distance_to_limit_line(&phase_points(&case2(*c)))).collect();
    assert!(d.windows(2).all(|w| w[1] < w[0]), "{d:?}");
}

#[test]
fn small_speed_orbits_approach_corner_path() {
    let q = params(2.0, 1.0, 0.0, 1.0, Regime::Case2SlowInfected);
    let corner = case2_corner_path(&q);
    let d: Vec<f64> = [0.5, 0.25, 0.1]
        .iter()
        .map(|c| hausdorff_polylines(&phase_points(&case2(*c)), &corner, 200))
        .collect();
    assert!(d.windows(2).all(|w| w[1] < w[0]), "{d:?}");
}

#[test]
fn full_case2_connection_tracks_slow_manifold() {
    let q = params(2.0, 1.0, 0.0, 1.0, Regime::Case2SlowInfected);
    let a = full_system_connection(&q, Regime::Case2SlowInfected, 0.01).unwrap();
    let b = full_system_connection(&q, Regime::Case2SlowInfected, 0.005).unwrap();
    assert!(a.endpoint_gap <= 1e-6 * (1.0 + 1e-9));
    let (ra, rb) = (a.max_manifold_residual.unwrap(), b.max_manifold_residual.unwrap());
    assert!(ra < 0.1, "{ra}");
    // first order in eps: halving eps roughly halves the residual
    let ratio = ra / rb;
    assert!((1.6..2.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn full_case3_connection_tracks_slow_manifold() {
    let q = params(2.0, 1.0, 0.0, 2.5, Regime::Case3FastInfected);
    let a = full_system_connection(&q, Regime::Case3FastInfected, 0.01).unwrap();
    let b = full_system_connection(&q, Regime::Case3FastInfected, 0.005).unwrap();
    let (ra, rb) = (a.max_manifold_residual.unwrap(), b.max_manifold_residual.unwrap());
    let ratio = ra / rb;
    assert!((1.6..2.5).contains(&ratio), "ratio {ratio}");
    let slow = q.with_speed(1.5).unwrap();
    assert!(matches!(full_system_connection(&slow, Regime::Case3FastInfected, 0.01), Err(Error::SpeedBelowBound { .. })));
}

#[test]
fn full_case1_connection() {
    let q = params(2.0, 1.0, 0.0, 1.0, Regime::Case1ComparableSmall);
    let f = full_system_connection(&q, Regime::Case1ComparableSmall, 0.01).unwrap();
    assert!(f.max_manifold_residual.unwrap() < 0.1);
    assert!(full_system_connection(&q, Regime::Case1ComparableSmall, 0.2).is_err());
}

#[test]
fn lifted_orbit_conserves_first_integral() {
    let q = params(2.0, 1.0, 0.0, 1.0, Regime::Case2SlowInfected);
    let f = full_system_connection(&q, Regime::Case2SlowInfected, 0.01).unwrap();
    let q = q.with_epsilon(0.01).unwrap();
    let lifted = lift_profile(&f, &q);
    for x in &lifted {
        assert!(conservation_residual(x, &q).0.abs() < 1e-12);
    }
    // Integrating the 4D system from a lifted sample follows the 3D orbit
    // and keeps the first integral.
    let k = 1;
    let span = 10.0;
    let tr = integrate(&System::new(SystemId::Full4, q.clone()), &lifted[k], span, 1e-11).unwrap();
    for x in &tr.states {
        assert!(conservation_residual(&[x[0], x[1], x[2], x[3]], &q).0.abs() < 1e-6);
    }
    let end = tr.last_state();
    let z_end = f.z[k] + span;
    assert!((end[2] - f.infected_at(z_end).unwrap()).abs() < 1e-3);
    assert!((end[0] - f.susceptible_at(z_end).unwrap()).abs() < 1e-3);
}

#[test]
fn manifold_residuals_of_reduced_profiles_vanish() {
    let q = params(2.0, 1.0, 0.0, 2.5, Regime::Case3FastInfected);
    let f = shoot_heteroclinic(&ShootSpec::new(SystemId::Case3Planar), &q).unwrap();
    for k in 0..f.len() {
        assert!(ManifoldId::K0Case3.residual(f.s[k], f.i[k], f.v[k], &q) < 1e-14);
    }
}

#[test]
fn csv_and_summary() {
    let f = case2(1.0);
    let mut buf = Vec::new();
    f.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "z,S,I,V,x_S,x_I");
    assert_eq!(text.lines().count(), f.len() + 1);
    let row: Vec<f64> = lines.next().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(row[1], 0.5);
    let json = serde_json::to_value(f.summary()).unwrap();
    assert_eq!(json["system"], "case2_planar");
    assert_eq!(json["termination"], "enter_ball");
}
