use std::f64::consts::PI;

use realmon_core::character::{fricke_residual, TraceCoordinates};
use realmon_core::solver::{
    a_k, base_traces, certify_main, chifix, continuation, find_real_parameter, find_unitary_parameter,
    unitarize, unitary_puncture_defect, SolveConfig,
};
use realmon_core::transport::holonomy_generators;
use realmon_core::{ConnectionFamily, Error, Level};

fn cfg() -> SolveConfig {
    SolveConfig::default()
}

#[test]
fn rho_zero_root_is_a_k() {
    for k in [1, -1] {
        let sol = find_real_parameter(chifix(), 0.0, k, &cfg()).unwrap();
        assert!((sol.a - a_k(k)).norm() < 1e-12, "k = {k}: {}", sol.a);
        let want = -((-2.0 * PI * k as f64).exp() + (2.0 * PI * k as f64).exp());
        assert!((sol.t1.re - want).abs() < 1e-8 * want.abs());
    }
}

#[test]
fn zero_k_is_rejected() {
    assert!(matches!(
        find_real_parameter(chifix(), 0.1, 0, &cfg()),
        Err(Error::InvalidParameter(_))
    ));
}

#[test]
fn real_solve_at_one_sixth() {
    let rho = 1.0 / 6.0;
    let sol = find_real_parameter(chifix(), rho, 1, &cfg()).unwrap();
    assert!(sol.residual < 1e-10);
    assert!(sol.t1.im.abs() < 1e-10 && sol.t2.im.abs() < 1e-10);
    assert!(sol.t1.re < -2.0 && sol.t2.re < -2.0);
    for w in sol.residual_history.windows(2) {
        assert!(w[1] < w[0], "{:?}", sol.residual_history);
    }
    let fam = ConnectionFamily::new(sol.a, chifix(), rho).unwrap();
    let rep = holonomy_generators(&fam, Level::Base, &cfg().transport).unwrap();
    let t = TraceCoordinates::of(&rep, rho);
    assert!(fricke_residual(t.x, t.y, t.z, rho) < 1e-8);
}

#[test]
fn small_weights_are_well_conditioned_and_approach_a_k() {
    let mut last = f64::INFINITY;
    for rho in [1e-2, 1e-3] {
        let sol = find_real_parameter(chifix(), rho, 1, &cfg()).unwrap();
        let cond = sol.jacobian_condition.unwrap();
        assert!(cond < 1e6, "rho {rho}: condition {cond}");
        let dist = (sol.a - a_k(1)).norm();
        assert!(dist < last);
        last = dist;
    }
    assert!(last < 1e-5);
}

#[test]
fn halving_the_difference_step_is_stable() {
    let a1 = find_real_parameter(chifix(), 1.0 / 6.0, 1, &cfg()).unwrap().a;
    let halved = SolveConfig {
        fd_step: cfg().fd_step / 2.0,
        ..cfg()
    };
    let a2 = find_real_parameter(chifix(), 1.0 / 6.0, 1, &halved).unwrap().a;
    assert!((a1 - a2).norm() < 1e-8);
}

#[test]
fn unitary_seed_is_exact_at_rho_zero() {
    let sol = find_unitary_parameter(chifix(), 0.0, &cfg()).unwrap();
    assert!((sol.a + chifix().conj()).norm() < 1e-9);
    assert!(sol.x.norm() < 1e-8 && sol.y.norm() < 1e-8);
}

#[test]
fn unitary_solve_at_one_sixth() {
    let rho = 1.0 / 6.0;
    let sol = find_unitary_parameter(chifix(), rho, &cfg()).unwrap();
    assert!(sol.x.norm() < 1e-8 && sol.y.norm() < 1e-8);
    // x = y = 0 on the Fricke surface leaves z² = 2 + 2cos(2πρ)
    let z2 = 2.0 + 2.0 * (2.0 * PI * rho).cos();
    assert!((sol.z * sol.z - z2).norm() < 1e-6, "z = {}", sol.z);
    let (x, y) = base_traces(chifix(), rho, sol.a, &cfg().transport).unwrap();
    assert!((x - sol.x).norm() < 1e-12 && (y - sol.y).norm() < 1e-12);
    assert!(unitary_puncture_defect(&sol, &cfg().transport).unwrap() < 1e-6);
    let (realization, defect) = unitarize(&sol, &cfg()).unwrap();
    assert!(defect < 1e-6);
    assert!(realization.residual < 1e-6);
}

#[test]
fn continuation_path_is_continuous() {
    let report = continuation(chifix(), 1, &[1e-3, 1e-2], &cfg());
    assert_eq!(report.frontier, Some(1e-2));
    let a: Vec<_> = report.points.iter().map(|p| p.a.unwrap()).collect();
    assert!((a[0] - a_k(1)).norm() < (a[1] - a_k(1)).norm());
    assert!((a[1] - a[0]).norm() < 1e-3);
}

#[test]
fn continuation_records_failures_without_aborting() {
    let strict = SolveConfig {
        residual_tol: 1e-300,
        max_iterations: 2,
        ..cfg()
    };
    let report = continuation(chifix(), 1, &[0.05, 0.1], &strict);
    assert_eq!(report.points.len(), 2);
    assert!(report.points.iter().all(|p| p.failure.is_some() && p.a.is_none()));
    assert_eq!(report.frontier, None);
}

#[test]
fn main_certificate_for_p_three() {
    let cert = certify_main(3, 1, &cfg()).unwrap();
    assert_eq!(cert.rho, 1.0 / 6.0);
    assert!(cert.solve.residual < 1e-6);
    assert!(cert.fricke_residual < 1e-6);
    assert!(cert.irreducibility_margin > 1e-4);
    assert!(cert.realization.residual < 1e-6);
    assert!(cert.audit.worst_relative_imaginary < 1e-6);
    assert!(cert.square_consistency < 1e-6);
    assert!(cert.subgroup_report.max_distance() < 1e-8);
    assert!(cert.subgroup_report.max_puncture_distance() < 1e-8);
    assert!(cert.subgroup_report.twist_consistent());
    let json = serde_json::to_string(&cert).unwrap();
    let back: realmon_core::solver::MainCertificate = serde_json::from_str(&json).unwrap();
    assert_eq!(back.a_solved, cert.a_solved);
}
