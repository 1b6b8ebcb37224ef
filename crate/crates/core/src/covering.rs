//! Covering-space word algebra for the four-punctured torus `T̂²∖{p₁,…,p₄}`
//! and its cyclic covers.
//!
//! The double cover `T̂² = C/2Γ → T² = C/Γ` corresponds to the index-four
//! subgroup of `π₁(T²∖{o}) = F(α, β)` of words with even exponent sums in
//! both letters. That subgroup is free on
//!
//! ```text
//! α̂ = α²,  β̂ = β²,  c₁ = β⁻¹α⁻¹βα,  c₂ = αβ⁻¹α⁻¹β,  c₃ = βαβ⁻¹α⁻¹,
//! ```
//!
//! and the fourth puncture word `c₄ = α⁻¹βαβ⁻¹` satisfies the surface relation
//! `α̂ c₄ β̂ c₁ α̂⁻¹ c₂ β̂⁻¹ c₃ = 1`, i.e. `c₄ = α̂⁻¹ c₃⁻¹ β̂ c₂⁻¹ α̂ c₁⁻¹ β̂⁻¹`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::character::{
    squares_reducible, standard_rep, Representation, SquaresTest,
};
use crate::error::{Error, Result};
use crate::matrix::Matrix2;
use crate::words::{FreeWord, Letter};
use num_complex::Complex64;

pub const BASE_NAMES: [&str; 2] = ["alpha", "beta"];
/// Free generators of the four-punctured torus group.
pub const SUBGROUP_NAMES: [&str; 5] = ["alpha_hat", "beta_hat", "c1", "c2", "c3"];
pub const PUNCTURE_NAMES: [&str; 4] = ["c1", "c2", "c3", "c4"];
/// Letters of the surface relation: the five free generators followed by `c₄`.
pub const RELATION_NAMES: [&str; 6] = ["alpha_hat", "beta_hat", "c1", "c2", "c3", "c4"];

fn base(text: &str) -> FreeWord {
    FreeWord::parse(text, &BASE_NAMES).expect("static word")
}

fn sub(text: &str) -> FreeWord {
    FreeWord::parse(text, &SUBGROUP_NAMES).expect("static word")
}

/// The punctured-torus presentation with the four puncture words.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PuncturedTorusPresentation {
    pub generators: Vec<String>,
    pub punctures: [FreeWord; 4],
}

impl Default for PuncturedTorusPresentation {
    fn default() -> Self {
        PuncturedTorusPresentation {
            generators: BASE_NAMES.iter().map(|s| s.to_string()).collect(),
            punctures: puncture_words(),
        }
    }
}

/// `c₁ = β⁻¹α⁻¹βα`, `c₂ = αβ⁻¹α⁻¹β`, `c₃ = βαβ⁻¹α⁻¹`, `c₄ = α⁻¹βαβ⁻¹`.
pub fn puncture_words() -> [FreeWord; 4] {
    [
        base("beta^-1 alpha^-1 beta alpha"),
        base("alpha beta^-1 alpha^-1 beta"),
        base("beta alpha beta^-1 alpha^-1"),
        base("alpha^-1 beta alpha beta^-1"),
    ]
}

/// Images of `α̂, β̂, c₁, c₂, c₃` as words in `α, β`.
pub fn subgroup_images() -> [FreeWord; 5] {
    let [c1, c2, c3, _] = puncture_words();
    [base("alpha^2"), base("beta^2"), c1, c2, c3]
}

/// `c₄` as a word in the free generators of the subgroup.
pub fn c4_in_subgroup() -> FreeWord {
    sub("alpha_hat^-1 c3^-1 beta_hat c2^-1 alpha_hat c1^-1 beta_hat^-1")
}

/// `α̂ c₄ β̂ c₁ α̂⁻¹ c₂ β̂⁻¹ c₃` over [`RELATION_NAMES`].
pub fn surface_relation() -> FreeWord {
    FreeWord::parse(
        "alpha_hat c4 beta_hat c1 alpha_hat^-1 c2 beta_hat^-1 c3",
        &RELATION_NAMES,
    )
    .expect("static word")
}

/// Rewrites a subgroup word in `α, β`.
pub fn to_base(word: &FreeWord) -> FreeWord {
    word.substitute(&subgroup_images())
}

/// The restriction of a representation of `α, β` to the four-punctured torus.
pub fn subgroup_representation(rep: &Representation) -> Representation {
    rep.pull_back(
        SUBGROUP_NAMES.iter().map(|s| s.to_string()).collect(),
        &subgroup_images(),
    )
}

/// The four puncture monodromies `h(c₁), …, h(c₄)`.
pub fn puncture_monodromies(rep: &Representation) -> [Matrix2; 4] {
    puncture_words().map(|w| rep.evaluate(&w))
}

/// Largest deviation from the alternating pattern
/// `c₁, c₃ ~ diag(e^{2πiρ}, e^{−2πiρ})`, `c₂, c₄ ~ diag(e^{−2πiρ}, e^{2πiρ})`
/// in a common eigenbasis.
pub fn puncture_pattern_defect(rep: &Representation, rho: f64) -> f64 {
    let lambda = Complex64::from_polar(1.0, 2.0 * PI * rho);
    let ms = puncture_monodromies(rep);
    let pattern = [lambda, lambda.conj(), lambda, lambda.conj()];
    // try both orientations of the common basis
    [lambda, lambda.conj()]
        .iter()
        .map(|&first| {
            let flip = first != lambda;
            let v = eigenvector(&ms[0], first);
            let w = eigenvector(&ms[0], first.inv());
            ms.iter()
                .zip(pattern.iter())
                .map(|(m, &p)| {
                    let p = if flip { p.conj() } else { p };
                    residual(m, v, p).max(residual(m, w, p.inv()))
                })
                .fold(0.0, f64::max)
        })
        .fold(f64::INFINITY, f64::min)
}

fn eigenvector(m: &Matrix2, lambda: Complex64) -> [Complex64; 2] {
    let [[a, b], [c, d]] = m.0;
    let v1 = [b, lambda - a];
    let v2 = [lambda - d, c];
    let n1 = v1[0].norm() + v1[1].norm();
    let n2 = v2[0].norm() + v2[1].norm();
    let (v, n) = if n1 >= n2 { (v1, n1) } else { (v2, n2) };
    if n == 0.0 {
        // m is scalar, every vector is an eigenvector
        return [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
    }
    let norm = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    [v[0] / norm, v[1] / norm]
}

fn residual(m: &Matrix2, v: [Complex64; 2], lambda: Complex64) -> f64 {
    let r0 = m.get(0, 0) * v[0] + m.get(0, 1) * v[1] - lambda * v[0];
    let r1 = m.get(1, 0) * v[0] + m.get(1, 1) * v[1] - lambda * v[1];
    (r0.norm_sqr() + r1.norm_sqr()).sqrt()
}

/// `h(α)², h(β)²` as the generators `α̂, β̂` of the double cover. On the cover
/// `Σ` the identification holds only up to the sign of the spin twist.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoubleCover {
    pub rep: Representation,
    pub sign_ambiguous: bool,
}

pub fn double_cover_generators(rep: &Representation) -> DoubleCover {
    let a = rep.matrices[0];
    let b = rep.matrices[1];
    DoubleCover {
        rep: Representation::new(
            vec!["alpha_hat".into(), "beta_hat".into()],
            vec![a * a, b * b],
        ),
        sign_ambiguous: true,
    }
}

/// A character of the four-punctured torus group to `Z/pZ`, stored on
/// `α̂, β̂, c₁, c₂, c₃, c₄`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CyclicCharacter {
    pub modulus: u32,
    pub values: [i64; 6],
}

impl CyclicCharacter {
    /// `m(α̂) = m(β̂) = 0`, `m(c₁) = m(c₃) = 1`, `m(c₂) = m(c₄) = −1`.
    pub fn torus(p: u32) -> Result<Self> {
        let ch = CyclicCharacter {
            modulus: p,
            values: [0, 0, 1, -1, 1, -1],
        };
        ch.validate()?;
        Ok(ch)
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.modulus as i64;
        if p == 0 || p % 2 == 0 {
            return Err(Error::InvalidCharacter(format!(
                "modulus must be odd and positive, got {p}"
            )));
        }
        let punctures: i64 = self.values[2..].iter().sum();
        if punctures.rem_euclid(p) != 0 {
            return Err(Error::InvalidCharacter(format!(
                "puncture values sum to {punctures}, not 0 mod {p}"
            )));
        }
        if p > 1 && self.shift_generator().is_none() {
            return Err(Error::InvalidCharacter(
                "no generator maps to a unit, the character is not onto".into(),
            ));
        }
        Ok(())
    }

    fn reduce(&self, v: i64) -> i64 {
        v.rem_euclid(self.modulus as i64)
    }

    /// Value on a word in the five free generators.
    pub fn evaluate(&self, word: &FreeWord) -> i64 {
        let total: i64 = word
            .letters()
            .iter()
            .map(|l| l.exponent() * self.values[l.generator])
            .sum();
        self.reduce(total)
    }

    /// First free generator whose value is a unit mod p.
    fn shift_generator(&self) -> Option<usize> {
        let p = self.modulus as i64;
        (0..5).find(|&g| gcd(self.reduce(self.values[g]), p) == 1)
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn mod_inverse(v: i64, p: i64) -> i64 {
    (1..p).find(|k| (v * k).rem_euclid(p) == 1).unwrap_or(0)
}

/// Free generators of the kernel of a [`CyclicCharacter`], with the Schreier
/// transversal `{gᵉ : 0 ≤ e < p}` built from one shifting generator `g`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchreierBasis {
    pub character: CyclicCharacter,
    pub shift_generator: usize,
    pub transversal: Vec<FreeWord>,
    /// Words in the five free generators of the punctured-torus group.
    pub generators: Vec<FreeWord>,
    /// `(e, x)` with `gᵉ · x · (representative)⁻¹` for each generator.
    pub edges: Vec<(usize, usize)>,
}

impl SchreierBasis {
    pub fn modulus(&self) -> u32 {
        self.character.modulus
    }

    fn exponent_of_coset(&self, coset: i64) -> usize {
        let p = self.modulus() as i64;
        if p == 1 {
            return 0;
        }
        let v = self.character.reduce(self.character.values[self.shift_generator]);
        (coset * mod_inverse(v, p)).rem_euclid(p) as usize
    }

    fn edge_index(&self, e: usize, x: usize) -> Option<usize> {
        self.edges.iter().position(|&(a, b)| a == e && b == x)
    }

    /// Expresses a word of the kernel in the Schreier generators.
    pub fn rewrite(&self, word: &FreeWord) -> Result<FreeWord> {
        let ch = &self.character;
        let mut coset = 0i64;
        let mut out = Vec::new();
        for &l in word.letters() {
            let m = ch.values[l.generator];
            if l.inverse {
                coset = ch.reduce(coset - m);
                let e = self.exponent_of_coset(coset);
                if let Some(i) = self.edge_index(e, l.generator) {
                    out.push(Letter::new(i, true));
                }
            } else {
                let e = self.exponent_of_coset(coset);
                if let Some(i) = self.edge_index(e, l.generator) {
                    out.push(Letter::new(i, false));
                }
                coset = ch.reduce(coset + m);
            }
        }
        if coset != 0 {
            return Err(Error::InvalidCharacter(format!(
                "word maps to {coset}, not into the kernel"
            )));
        }
        Ok(FreeWord::new(out))
    }
}

/// Reidemeister–Schreier generators of `ker(F(α̂, β̂, c₁, c₂, c₃) → Z/pZ)`.
/// The rank is `1 + 4p`.
pub fn reidemeister_schreier(character: &CyclicCharacter) -> Result<SchreierBasis> {
    character.validate()?;
    let p = character.modulus as usize;
    let g = if p == 1 {
        0
    } else {
        character.shift_generator().expect("validated")
    };
    let mut basis = SchreierBasis {
        character: character.clone(),
        shift_generator: g,
        transversal: (0..p).map(|e| FreeWord::generator(g).pow(e as i64)).collect(),
        generators: Vec::new(),
        edges: Vec::new(),
    };
    let v = character.values[g];
    for e in 0..p {
        let coset = character.reduce(e as i64 * v);
        for x in 0..5 {
            let target = character.reduce(coset + character.values[x]);
            let rep = &basis.transversal[basis.exponent_of_coset(target)];
            let word = &(&basis.transversal[e] * &FreeWord::generator(x)) * &rep.inverse();
            if !word.is_empty() {
                basis.generators.push(word);
                basis.edges.push((e, x));
            }
        }
    }
    Ok(basis)
}

/// A sign character on the Schreier generators.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpinTwist {
    pub signs: Vec<i8>,
}

impl SpinTwist {
    /// Value on a word in the Schreier generators.
    pub fn evaluate(&self, word: &FreeWord) -> i8 {
        word.letters()
            .iter()
            .map(|l| self.signs[l.generator])
            .product()
    }

    /// The square of the character, which must be trivial.
    pub fn squared(&self) -> SpinTwist {
        SpinTwist {
            signs: self.signs.iter().map(|s| s * s).collect(),
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.signs.iter().all(|&s| s == 1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubgroupEvaluation {
    /// Rendered over the five free generators.
    pub word: String,
    pub sign: i8,
    /// Operator-norm distance to `sign·Id`.
    pub distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PunctureCheck {
    pub word: String,
    /// Distance of `h(cᵢ)^p` from `−Id`.
    pub distance_to_minus_id: f64,
    /// The twist read through the rewriting agrees with the observed sign.
    pub twist_consistent: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubgroupReport {
    pub modulus: u32,
    pub evaluations: Vec<SubgroupEvaluation>,
    pub twist: SpinTwist,
    pub twist_squares_trivially: bool,
    /// Largest distance of a twisted evaluation from `Id`.
    pub twisted_max_distance: f64,
    pub puncture_powers: Vec<PunctureCheck>,
}

impl SubgroupReport {
    pub fn max_distance(&self) -> f64 {
        self.evaluations.iter().map(|e| e.distance).fold(0.0, f64::max)
    }

    pub fn max_puncture_distance(&self) -> f64 {
        self.puncture_powers
            .iter()
            .map(|c| c.distance_to_minus_id)
            .fold(0.0, f64::max)
    }

    pub fn twist_consistent(&self) -> bool {
        self.puncture_powers.iter().all(|c| c.twist_consistent)
    }
}

/// The unitary reducible representation `standard_rep(0, 0, 2cos(πρ))`.
pub fn unitary_reference(rho: f64) -> Representation {
    let z = Complex64::new(2.0 * (PI * rho).cos(), 0.0);
    standard_rep(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), z)
}

fn sign_and_distance(m: &Matrix2) -> (i8, f64) {
    let plus = m.distance(&Matrix2::identity());
    let minus = m.distance(&-Matrix2::identity());
    if plus <= minus {
        (1, plus)
    } else {
        (-1, minus)
    }
}

/// Evaluates a representation of `α, β` on the Schreier generators, checks
/// every value is `±Id`, reads off the sign character `μ` and confirms that
/// `μ`-twisted evaluation is trivial.
pub fn twisted_subgroup_evaluation(
    rep: &Representation,
    basis: &SchreierBasis,
    tol: f64,
) -> Result<SubgroupReport> {
    let p = basis.modulus();
    if p < 3 {
        return Err(Error::InvalidParameter(format!(
            "p = {p} gives rho = 1/(2p) outside (0, 1/2)"
        )));
    }
    let mut evaluations = Vec::with_capacity(basis.generators.len());
    for word in &basis.generators {
        let m = rep.evaluate(&to_base(word));
        let (sign, distance) = sign_and_distance(&m);
        let rendered = word.render(&SUBGROUP_NAMES);
        if !(distance <= tol) {
            return Err(Error::NotCentral {
                word: rendered,
                distance,
            });
        }
        evaluations.push(SubgroupEvaluation {
            word: rendered,
            sign,
            distance,
        });
    }
    let twist = SpinTwist {
        signs: evaluations.iter().map(|e| e.sign).collect(),
    };
    let twisted_max_distance = basis
        .generators
        .iter()
        .zip(&twist.signs)
        .map(|(w, &s)| {
            let m = rep.evaluate(&to_base(w)).scale(Complex64::new(s as f64, 0.0));
            m.distance(&Matrix2::identity())
        })
        .fold(0.0, f64::max);

    let [c1, c2, c3, _] = [sub("c1"), sub("c2"), sub("c3"), FreeWord::identity()];
    let punctures = [c1, c2, c3, c4_in_subgroup()];
    let mut puncture_powers = Vec::new();
    for (name, c) in PUNCTURE_NAMES.iter().zip(punctures.iter()) {
        let power = c.pow(p as i64);
        let m = rep.evaluate(&to_base(&power));
        let (observed, _) = sign_and_distance(&m);
        let through_twist = twist.evaluate(&basis.rewrite(&power)?);
        puncture_powers.push(PunctureCheck {
            word: format!("{name}^{p}"),
            distance_to_minus_id: m.distance(&-Matrix2::identity()),
            twist_consistent: observed == through_twist,
        });
    }

    Ok(SubgroupReport {
        modulus: p,
        evaluations,
        twist_squares_trivially: twist.squared().is_trivial(),
        twist,
        twisted_max_distance,
        puncture_powers,
    })
}

/// Traces of `±h(α)²`, `±h(β)²` and the squares test on the cover.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaTraceReport {
    /// `tr h(α)²`, `−tr h(α)²`, `tr h(β)²`, `−tr h(β)²`
    pub traces: [Complex64; 4],
    /// Largest `|Im t| / max(1, |t|)` over the traces.
    pub max_relative_imaginary: f64,
    pub squares: SquaresTest,
    pub irreducible: bool,
}

pub fn sigma_trace_report(rep: &Representation) -> Result<SigmaTraceReport> {
    let cover = double_cover_generators(rep);
    let ta = cover.rep.matrices[0].trace();
    let tb = cover.rep.matrices[1].trace();
    let traces = [ta, -ta, tb, -tb];
    let max_relative_imaginary = traces
        .iter()
        .map(|t| t.im.abs() / t.norm().max(1.0))
        .fold(0.0, f64::max);
    let squares = squares_reducible(rep)?;
    Ok(SigmaTraceReport {
        traces,
        max_relative_imaginary,
        irreducible: !squares.reducible,
        squares,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c4_expressed_in_subgroup_generators() {
        assert_eq!(to_base(&c4_in_subgroup()), puncture_words()[3]);
    }

    #[test]
    fn surface_relation_is_trivial_in_the_base_group() {
        let [c1, c2, c3, c4] = puncture_words();
        let images = [base("alpha^2"), base("beta^2"), c1, c2, c3, c4];
        assert!(surface_relation().substitute(&images).is_empty());
    }

    #[test]
    fn subgroup_generators_have_even_exponent_sums() {
        for w in subgroup_images() {
            assert_eq!(w.exponent_sum(0) % 2, 0);
            assert_eq!(w.exponent_sum(1) % 2, 0);
        }
    }

    #[test]
    fn torus_character_is_consistent() {
        let ch = CyclicCharacter::torus(3).unwrap();
        assert_eq!(ch.evaluate(&c4_in_subgroup()), ch.reduce(-1));
        assert!(CyclicCharacter::torus(4).is_err());
        let bad = CyclicCharacter {
            modulus: 3,
            values: [0, 0, 1, 1, 1, -1],
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn schreier_ranks() {
        for p in [1u32, 3, 5, 7] {
            let basis = reidemeister_schreier(&CyclicCharacter::torus(p).unwrap()).unwrap();
            assert_eq!(basis.generators.len(), 1 + 4 * p as usize);
            for w in &basis.generators {
                assert_eq!(basis.character.evaluate(w), 0);
            }
        }
        let trivial = reidemeister_schreier(&CyclicCharacter::torus(1).unwrap()).unwrap();
        let originals: Vec<FreeWord> = (0..5).map(FreeWord::generator).collect();
        assert_eq!(trivial.generators, originals);
    }

    #[test]
    fn rewriting_recovers_the_word() {
        let basis = reidemeister_schreier(&CyclicCharacter::torus(5).unwrap()).unwrap();
        let words = [
            sub("c1^5"),
            sub("c1 c2"),
            sub("alpha_hat c3 beta_hat^-1 c2"),
            c4_in_subgroup().pow(5),
        ];
        for w in words {
            let r = basis.rewrite(&w).unwrap();
            assert_eq!(r.substitute(&basis.generators), w);
        }
        assert!(basis.rewrite(&sub("c1")).is_err());
    }

    #[test]
    fn unitary_reference_punctures_alternate() {
        let rho = 1.0 / 6.0;
        let rep = unitary_reference(rho);
        assert!(puncture_pattern_defect(&rep, rho) < 1e-10);
        let lam = Complex64::from_polar(1.0, PI / 3.0);
        for m in puncture_monodromies(&rep) {
            let [l1, l2] = m.eigenvalues();
            let hit = ((l1 - lam).norm() + (l2 - lam.conj()).norm())
                .min((l1 - lam.conj()).norm() + (l2 - lam).norm());
            assert!(hit < 1e-10);
        }
    }

    #[test]
    fn trivial_rep_has_trivial_punctures() {
        let rep = Representation::pair(Matrix2::identity(), Matrix2::identity());
        for m in puncture_monodromies(&rep) {
            assert_eq!(m, Matrix2::identity());
        }
    }

    #[test]
    fn unitary_squares_are_minus_identity() {
        let cover = double_cover_generators(&unitary_reference(0.2));
        for m in &cover.rep.matrices {
            assert!(m.distance(&-Matrix2::identity()) < 1e-12);
        }
        assert!(cover.sign_ambiguous);
    }

    #[test]
    fn subgroup_evaluation_for_p_three() {
        let basis = reidemeister_schreier(&CyclicCharacter::torus(3).unwrap()).unwrap();
        let report = twisted_subgroup_evaluation(&unitary_reference(1.0 / 6.0), &basis, 1e-8).unwrap();
        assert_eq!(report.evaluations.len(), 13);
        assert!(report.max_distance() < 1e-8);
        assert!(report.twisted_max_distance < 1e-8);
        assert!(report.twist_squares_trivially);
        assert!(report.max_puncture_distance() < 1e-8);
        assert!(report.twist_consistent());
    }

    #[test]
    fn subgroup_evaluation_off_centre_is_reported() {
        let basis = reidemeister_schreier(&CyclicCharacter::torus(3).unwrap()).unwrap();
        // wrong weight: the puncture powers are no longer central
        let err = twisted_subgroup_evaluation(&unitary_reference(0.1), &basis, 1e-8).unwrap_err();
        assert!(matches!(err, Error::NotCentral { .. }));
        let basis1 = reidemeister_schreier(&CyclicCharacter::torus(1).unwrap()).unwrap();
        assert!(twisted_subgroup_evaluation(&unitary_reference(0.5), &basis1, 1e-8).is_err());
    }

    #[test]
    fn sigma_report_for_unitary_reference_is_reducible() {
        let report = sigma_trace_report(&unitary_reference(1.0 / 6.0)).unwrap();
        assert!(!report.irreducible);
        assert_eq!(report.traces[0].norm(), report.traces[1].norm());
    }
}
