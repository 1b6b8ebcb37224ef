use proptest::prelude::*;
use realmon_core::covering::{
    c4_in_subgroup, puncture_monodromies, puncture_words, subgroup_images, reidemeister_schreier, surface_relation, to_base,
    twisted_subgroup_evaluation, unitary_reference, CyclicCharacter,
};
use realmon_core::{FreeWord, Matrix2};

#[test]
fn schreier_rank_is_one_plus_four_p() {
    for p in [1u32, 3, 5, 7] {
        let basis = reidemeister_schreier(&CyclicCharacter::torus(p).unwrap()).unwrap();
        assert_eq!(basis.generators.len(), 1 + 4 * p as usize, "p = {p}");
        assert!(basis.generators.iter().all(|w| basis.character.evaluate(w) == 0));
    }
}

#[test]
fn even_modulus_is_rejected() {
    assert!(CyclicCharacter::torus(4).is_err());
}

#[test]
fn relation_holds_in_every_reference_representation() {
    for p in [3u32, 5, 7] {
        let rho = 1.0 / (2.0 * p as f64);
        let rep = unitary_reference(rho);
        let mut images = subgroup_images().to_vec();
        images.push(puncture_words()[3].clone());
        let relation = rep.evaluate(&surface_relation().substitute(&images));
        assert!(relation.distance(&Matrix2::identity()) < 1e-12);
        let c4 = rep.evaluate(&to_base(&c4_in_subgroup()));
        assert!(c4.distance(&puncture_monodromies(&rep)[3]) < 1e-12);
        let basis = reidemeister_schreier(&CyclicCharacter::torus(p).unwrap()).unwrap();
        let report = twisted_subgroup_evaluation(&rep, &basis, 1e-8).unwrap();
        assert!(report.max_distance() < 1e-8);
        assert!(report.max_puncture_distance() < 1e-8);
        assert!(report.twist_consistent() && report.twist_squares_trivially);
        assert!(report.twisted_max_distance < 1e-8);
    }
}

proptest! {
    #[test]
    fn rewriting_inverts_substitution(codes in prop::collection::vec(prop_oneof![-5i32..=-1, 1i32..=5], 0..12)) {
        let ch = CyclicCharacter::torus(3).unwrap();
        let basis = reidemeister_schreier(&ch).unwrap();
        let w = FreeWord::new(codes.iter().map(|&c| realmon_core::words::Letter::from_signed(c).unwrap()).collect::<Vec<_>>());
        // close w into the kernel with the shifting generator
        let g = FreeWord::generator(basis.shift_generator);
        let k = &w * &g.pow(-(ch.evaluate(&w)));
        prop_assert_eq!(ch.evaluate(&k), 0);
        let rewritten = basis.rewrite(&k).unwrap();
        prop_assert_eq!(rewritten.substitute(&basis.generators), k);
    }
}
