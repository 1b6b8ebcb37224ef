use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use realmon_core::character::{fricke_residual, TraceCoordinates};
use realmon_core::transport::{
    generator_holonomies, holonomy_generators, homotopy_check, transport, PathCorpus, Segment,
};
use realmon_core::{Complex64, ConnectionFamily, Level, Matrix2, PathSpec, TransportConfig};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn chifix() -> Complex64 {
    c(PI / 4.0, -PI / 4.0)
}

fn a_k(k: i32) -> Complex64 {
    c(-PI / 4.0, -PI / 4.0) + c(PI, PI) * k as f64
}

fn cfg() -> TransportConfig {
    TransportConfig::default()
}

#[test]
fn diagonal_holonomy_at_rho_zero() {
    let a = c(0.3, -0.2);
    let chi = c(0.1, 0.4);
    let fam = ConnectionFamily::new(a, chi, 0.0).unwrap();
    let h = transport(&fam, &PathSpec::alpha(), &cfg()).unwrap();
    let s = a + chi;
    let want = Matrix2::diag((-s).exp(), s.exp());
    assert!(h.matrix.distance(&want) < 1e-10, "{}", h.matrix);
    assert!(h.usable);
}

#[test]
fn closed_form_traces_on_double_cover() {
    for k in [0, 1] {
        let fam = ConnectionFamily::new(a_k(k), chifix(), 0.0).unwrap();
        let [ha, hb] = generator_holonomies(&fam, Level::Double, &cfg()).unwrap();
        let want = -((-2.0 * PI * k as f64).exp() + (2.0 * PI * k as f64).exp());
        for h in [ha, hb] {
            let t = h.matrix.trace();
            assert!((t - want).norm() < 1e-8 * want.abs(), "k = {k}: {t} vs {want}");
            assert!(h.det_drift < 1e-9);
        }
    }
}

#[test]
fn double_cover_generators_are_squares() {
    let fam = ConnectionFamily::new(c(0.2, 0.1), chifix(), 1.0 / 6.0).unwrap();
    let base = holonomy_generators(&fam, Level::Base, &cfg()).unwrap();
    let hat = holonomy_generators(&fam, Level::Double, &cfg()).unwrap();
    for i in 0..2 {
        let sq = base.matrices[i] * base.matrices[i];
        assert!(sq.distance(&hat.matrices[i]) < 1e-9);
    }
}

/// χ in [−1, 1]² with the theta shift −χ/π at least 0.1 away from ½Γ.
fn sample_chi(rng: &mut ChaCha8Rng) -> Complex64 {
    loop {
        let chi = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let d = -2.0 * chi / PI;
        let off = c(d.re - d.re.round(), d.im - d.im.round()).norm() / 2.0;
        if off >= 0.1 {
            return chi;
        }
    }
}

#[test]
fn fricke_relation_for_transported_traces() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for rho in [0.0, 0.1, 1.0 / 6.0] {
        for _ in 0..4 {
            let a = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let chi = sample_chi(&mut rng);
            let fam = ConnectionFamily::new(a, chi, rho).unwrap();
            let rep = holonomy_generators(&fam, Level::Base, &cfg()).unwrap();
            let t = TraceCoordinates::of(&rep, rho);
            assert!(t.fricke_residual() < 1e-8, "rho {rho} a {a} chi {chi}: {} {:?}", t.fricke_residual(), t);
            assert!(rep.det_drift() < 1e-9);
        }
    }
}

#[test]
fn commutator_has_local_exponents() {
    for rho in [0.1, 1.0 / 6.0] {
        let fam = ConnectionFamily::new(c(0.3, 0.2), chifix(), rho).unwrap();
        let rep = holonomy_generators(&fam, Level::Base, &cfg()).unwrap();
        let (a, b) = (rep.matrices[0], rep.matrices[1]);
        let comm = b.inverse().unwrap() * a.inverse().unwrap() * b * a;
        let want = Complex64::from_polar(1.0, 2.0 * PI * rho);
        let [l1, l2] = comm.eigenvalues();
        let err = ((l1 - want).norm() + (l2 - want.conj()).norm())
            .min((l1 - want.conj()).norm() + (l2 - want).norm());
        assert!(err < 1e-6, "rho {rho}: {l1} {l2}");
    }
}

#[test]
fn concatenated_path_matches_composition() {
    let fam = ConnectionFamily::new(c(0.1, -0.3), chifix(), 0.1).unwrap();
    let h_a = transport(&fam, &PathSpec::alpha(), &cfg()).unwrap().matrix;
    let h_b = transport(&fam, &PathSpec::beta(), &cfg()).unwrap().matrix;
    let ba = PathSpec::alpha().then(&PathSpec::beta());
    let h_ba = transport(&fam, &ba, &cfg()).unwrap().matrix;
    assert!(h_ba.distance(&(h_b * h_a)) < 1e-8);
    let z = h_ba.trace();
    let t = TraceCoordinates::of(&realmon_core::Representation::pair(h_a, h_b), 0.1);
    assert!((t.z - z).norm() < 1e-8);
    assert!(fricke_residual(h_a.trace(), h_b.trace(), z, 0.1) < 1e-8);
}

#[test]
fn half_tolerance_reintegration_agrees() {
    let fam = ConnectionFamily::new(c(0.5, 0.5), chifix(), 1.0 / 6.0).unwrap();
    let coarse = transport(&fam, &PathSpec::alpha_hat(), &cfg()).unwrap();
    let fine = transport(&fam, &PathSpec::alpha_hat(), &cfg().with_tolerance(1e-14)).unwrap();
    let diff = coarse.matrix.distance(&fine.matrix);
    assert!(diff < 1e-8);
    assert!((coarse.matrix.trace() - fine.matrix.trace()).norm() <= coarse.est_error.max(1e-13));
}

#[test]
fn bumped_path_is_homotopic() {
    let fam = ConnectionFamily::new(c(0.2, 0.4), chifix(), 1.0 / 6.0).unwrap();
    let straight = PathSpec::alpha_hat();
    for amplitude in [0.1, -0.1, 0.2, -0.2, 0.05] {
        let bumped = PathSpec::new(
            "bumped",
            c(0.0, 0.0),
            vec![Segment::Bump {
                from: c(0.0, 0.0),
                to: c(2.0, 0.0),
                amplitude,
            }],
        );
        assert!(homotopy_check(&fam, &straight, &bumped, &cfg()).unwrap() < 1e-8);
    }
    assert_eq!(homotopy_check(&fam, &straight, &straight, &cfg()).unwrap(), 0.0);
}

#[test]
fn small_circle_matches_commutator_word() {
    let fam = ConnectionFamily::new(c(0.2, 0.4), chifix(), 1.0 / 6.0).unwrap();
    let rep = holonomy_generators(&fam, Level::Base, &cfg()).unwrap();
    let (a, b) = (rep.matrices[0], rep.matrices[1]);
    let word = b.inverse().unwrap() * a.inverse().unwrap() * b * a;
    let lasso = PathSpec::lasso("p1", c(0.0, 0.0), c(0.5, 0.5), 0.1);
    let h = transport(&fam, &lasso, &cfg()).unwrap();
    assert!(h.matrix.distance(&word) < 1e-6, "{} vs {}", h.matrix, word);
    let square = PathSpec::unit_square("c1", c(0.0, 0.0));
    let hs = transport(&fam, &square, &cfg()).unwrap();
    assert!(hs.matrix.distance(&word) < 1e-8);
}

#[test]
fn corpus_paths_all_transport_with_small_drift() {
    let fam = ConnectionFamily::new(a_k(1), chifix(), 1.0 / 6.0).unwrap();
    for path in PathCorpus::standard().paths {
        let level = if path.label.ends_with("_hat") {
            realmon_core::Lattice::double()
        } else {
            realmon_core::Lattice::base()
        };
        let h = transport(&fam.on_lattice(level), &path, &cfg()).unwrap();
        assert!(h.det_drift < 1e-9, "{}: {}", path.label, h.det_drift);
    }
}

#[test]
fn path_through_pole_is_rejected() {
    let fam = ConnectionFamily::new(c(0.0, 0.0), chifix(), 0.1).unwrap();
    let bad = PathSpec::new(
        "diagonal",
        c(0.0, 0.0),
        vec![Segment::Line {
            from: c(0.0, 0.0),
            to: c(1.0, 1.0),
        }],
    );
    assert!(matches!(
        transport(&fam, &bad, &cfg()),
        Err(realmon_core::Error::PoleProximity { .. })
    ));
}
