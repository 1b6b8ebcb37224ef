//! Self-validating JSON certificates.
//!
//! A [`Certificate`] stores matrices by name together with a list of
//! [`CheckRecord`]s. Every check names the stored data it reads and the
//! tolerance it was held to, so [`validate`] can recompute it without
//! integrating any ODE. A SHA-256 digest over everything except the timestamp
//! and the digest itself detects byte edits.
//!
//! Complex numbers serialize as `[re, im]`; matrices as row-major
//! `[[a, b], [c, d]]` of complex pairs.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::character::{
    fricke_residual, squared_pair_margin, unitarity_defect, RealFormBranch, RealizationCertificate,
    Representation,
};
use crate::covering::{
    puncture_pattern_defect, puncture_words, reidemeister_schreier, subgroup_images, to_base,
    twisted_subgroup_evaluation, CyclicCharacter, SchreierBasis, BASE_NAMES, PUNCTURE_NAMES,
    SUBGROUP_NAMES,
};
use crate::elliptic::{theta, theta_prime_zero};
use crate::error::{Error, Result};
use crate::matrix::Matrix2;
use crate::solver::{MainCertificate, RealSolution, SolveConfig, UnitarySolution};
use crate::words::FreeWord;

pub const SCHEMA_VERSION: &str = "1.0";

/// A word evaluated on stored matrices: letter `i` of `word` is the matrix
/// named `generators[i]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WordRef {
    pub generators: Vec<String>,
    pub word: FreeWord,
}

impl WordRef {
    pub fn new(generators: &[&str], word: FreeWord) -> Self {
        WordRef {
            generators: generators.iter().map(|s| s.to_string()).collect(),
            word,
        }
    }

    pub fn single(name: &str) -> Self {
        WordRef::new(&[name], FreeWord::generator(0))
    }

    pub fn render(&self) -> String {
        let names: Vec<&str> = self.generators.iter().map(String::as_str).collect();
        self.word.render(&names)
    }

    fn evaluate(&self, store: &BTreeMap<String, Matrix2>) -> Result<Matrix2> {
        let mut out = Matrix2::identity();
        for l in self.word.letters() {
            let name = self
                .generators
                .get(l.generator)
                .ok_or_else(|| Error::Schema(format!("letter {} has no generator name", l.generator)))?;
            let m = lookup(store, name)?;
            let m = if l.inverse {
                m.inverse()
                    .ok_or_else(|| Error::Schema(format!("matrix {name} is singular")))?
            } else {
                m
            };
            out = out * m;
        }
        Ok(out)
    }
}

fn lookup(store: &BTreeMap<String, Matrix2>, name: &str) -> Result<Matrix2> {
    store
        .get(name)
        .copied()
        .ok_or_else(|| Error::Schema(format!("no stored matrix named {name}")))
}

fn lookup_all(store: &BTreeMap<String, Matrix2>, names: &[String]) -> Result<Vec<Matrix2>> {
    names.iter().map(|n| lookup(store, n)).collect()
}

/// A recomputable claim. Each variant measures a nonnegative defect that must
/// not exceed the tolerance, except [`Check::SquaresMargin`], which measures a
/// margin that must exceed it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Check {
    /// Fricke residual of the traces of two stored matrices.
    Fricke { alpha: String, beta: String, rho: f64 },
    /// Fricke residual of explicit trace coordinates.
    FrickeTraces {
        x: Complex64,
        y: Complex64,
        z: Complex64,
        rho: f64,
    },
    /// `|det M − 1|`
    Determinant { matrix: String },
    /// `|tr w − value| / max(1, |value|)`
    TraceValue { word: WordRef, value: Complex64 },
    /// `|Im tr w|`
    TraceImaginary { word: WordRef },
    /// `Re tr w − bound`
    TraceBelow { word: WordRef, bound: f64 },
    /// `‖w − E‖ / max(1, ‖E‖)`
    WordEquals { word: WordRef, expected: String },
    /// Distance of `w` from the nearer of `±Id`.
    Central { word: WordRef },
    /// `χ(w) mod p` as a number.
    InKernel { character: CyclicCharacter, word: FreeWord },
    /// `|#generators − (1 + 4p)|` after recomputing the Schreier basis, or
    /// infinity if the stored list differs from the recomputed one.
    SchreierRank {
        character: CyclicCharacter,
        generators: Vec<FreeWord>,
    },
    /// Twisted evaluation on the Schreier generators; infinity if the twist
    /// is inconsistent with the puncture signs.
    SpinTwist {
        character: CyclicCharacter,
        alpha: String,
        beta: String,
    },
    /// Worst relative imaginary trace over reduced words up to `depth`.
    RealTraces { generators: Vec<String>, depth: usize },
    /// Largest `|det(XY − YX)|` over squares of the named generators.
    SquaresMargin { generators: Vec<String> },
    /// Relative defect of `conj(G) C = C G` over the named generators.
    Intertwiner { c: String, generators: Vec<String> },
    /// Relative distance of `D G D⁻¹` from the stored conjugates, combined
    /// with the realness or unitarity defect of the conjugates.
    Conjugation {
        d: String,
        generators: Vec<String>,
        conjugated: Vec<String>,
        branch: RealFormBranch,
    },
    /// Puncture eigenvalue pattern of the pair.
    PuncturePattern { alpha: String, beta: String, rho: f64 },
    /// Relative quasi-periodicity defect of ϑ at `w`.
    ThetaQuasiPeriodicity { w: Complex64 },
    /// A quantity that can only be recomputed by integrating; stored as is.
    Recorded { value: f64 },
}

impl Check {
    pub fn is_lower_bound(&self) -> bool {
        matches!(self, Check::SquaresMargin { .. })
    }

    pub fn passes(&self, value: f64, tolerance: f64) -> bool {
        if self.is_lower_bound() {
            value > tolerance
        } else {
            value <= tolerance
        }
    }

    pub fn measure(&self, store: &BTreeMap<String, Matrix2>) -> Result<f64> {
        Ok(match self {
            Check::Fricke { alpha, beta, rho } => {
                let (a, b) = (lookup(store, alpha)?, lookup(store, beta)?);
                fricke_residual(a.trace(), b.trace(), (b * a).trace(), *rho)
            }
            Check::FrickeTraces { x, y, z, rho } => fricke_residual(*x, *y, *z, *rho),
            Check::Determinant { matrix } => (lookup(store, matrix)?.det() - 1.0).norm(),
            Check::TraceValue { word, value } => {
                (word.evaluate(store)?.trace() - value).norm() / value.norm().max(1.0)
            }
            Check::TraceImaginary { word } => word.evaluate(store)?.trace().im.abs(),
            Check::TraceBelow { word, bound } => word.evaluate(store)?.trace().re - bound,
            Check::WordEquals { word, expected } => {
                let e = lookup(store, expected)?;
                word.evaluate(store)?.distance(&e) / e.op_norm().max(1.0)
            }
            Check::Central { word } => {
                let m = word.evaluate(store)?;
                m.distance(&Matrix2::identity())
                    .min(m.distance(&-Matrix2::identity()))
            }
            Check::InKernel { character, word } => {
                character.validate()?;
                character.evaluate(word).rem_euclid(character.modulus as i64) as f64
            }
            Check::SchreierRank { character, generators } => {
                let basis = reidemeister_schreier(character)?;
                if &basis.generators != generators {
                    f64::INFINITY
                } else {
                    let expected = 1 + 4 * character.modulus as usize;
                    (generators.len() as f64 - expected as f64).abs()
                }
            }
            Check::SpinTwist { character, alpha, beta } => {
                let rep = Representation::pair(lookup(store, alpha)?, lookup(store, beta)?);
                let basis = reidemeister_schreier(character)?;
                match twisted_subgroup_evaluation(&rep, &basis, f64::INFINITY) {
                    Ok(r) if r.twist_consistent() && r.twist_squares_trivially => r.twisted_max_distance,
                    _ => f64::INFINITY,
                }
            }
            Check::RealTraces { generators, depth } => {
                let rep = Representation::new(generators.clone(), lookup_all(store, generators)?);
                crate::character::audit_real_traces(&rep, *depth).worst_relative_imaginary
            }
            Check::SquaresMargin { generators } => {
                let rep = Representation::new(generators.clone(), lookup_all(store, generators)?);
                squared_pair_margin(&rep)
            }
            Check::Intertwiner { c, generators } => {
                let c = lookup(store, c)?;
                lookup_all(store, generators)?
                    .iter()
                    .map(|g| (g.conj() * c - c * *g).op_norm() / (g.op_norm() * c.op_norm().max(1.0)))
                    .fold(0.0, f64::max)
            }
            Check::Conjugation {
                d,
                generators,
                conjugated,
                branch,
            } => {
                if generators.len() != conjugated.len() {
                    return Err(Error::Schema("conjugation lists differ in length".into()));
                }
                let d = lookup(store, d)?;
                let d_inv = d
                    .inverse()
                    .ok_or_else(|| Error::Schema("conjugator is singular".into()))?;
                let gs = lookup_all(store, generators)?;
                let hs = lookup_all(store, conjugated)?;
                gs.iter()
                    .zip(&hs)
                    .map(|(g, h)| {
                        let scale = g.op_norm().max(1.0);
                        let moved = (d * *g * d_inv).distance(h) / scale;
                        let form = match branch {
                            RealFormBranch::RealForm => h.max_imag() / scale,
                            RealFormBranch::UnitaryForm => unitarity_defect(h),
                        };
                        moved.max(form)
                    })
                    .fold(0.0, f64::max)
            }
            Check::PuncturePattern { alpha, beta, rho } => {
                let rep = Representation::pair(lookup(store, alpha)?, lookup(store, beta)?);
                puncture_pattern_defect(&rep, *rho)
            }
            Check::ThetaQuasiPeriodicity { w } => {
                let v = theta(*w).value;
                let one = (theta(w + 1.0).value - v).norm();
                let tau = (theta(w + Complex64::i()).value + v * (-2.0 * PI * Complex64::i() * w).exp()).norm();
                one.max(tau) / v.norm().max(1.0)
            }
            Check::Recorded { value } => *value,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub check: Check,
    pub tolerance: f64,
    pub value: f64,
    pub passed: bool,
}

/// Version and every setting that can change a number in the certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub version: String,
    pub config: SolveConfig,
}

impl Environment {
    pub fn new(config: &SolveConfig) -> Self {
        Environment {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub schema_version: String,
    pub command: String,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub environment: Environment,
    pub timestamp: String,
    pub matrices: BTreeMap<String, Matrix2>,
    /// Informational outputs. Anything held to a tolerance appears in `checks`.
    pub values: BTreeMap<String, serde_json::Value>,
    pub checks: Vec<CheckRecord>,
    pub notes: Vec<String>,
    pub passed: bool,
    pub digest: String,
}

fn json<T: Serialize>(value: &T) -> serde_json::Value {
    serde_json::to_value(value).expect("certificate values serialize")
}

impl Certificate {
    pub fn new(command: &str, config: &SolveConfig) -> Self {
        Certificate {
            schema_version: SCHEMA_VERSION.to_string(),
            command: command.to_string(),
            parameters: BTreeMap::new(),
            environment: Environment::new(config),
            timestamp: String::new(),
            matrices: BTreeMap::new(),
            values: BTreeMap::new(),
            checks: Vec::new(),
            notes: Vec::new(),
            passed: false,
            digest: String::new(),
        }
    }

    pub fn parameter<T: Serialize>(&mut self, key: &str, value: T) -> &mut Self {
        self.parameters.insert(key.to_string(), json(&value));
        self
    }

    pub fn value<T: Serialize>(&mut self, key: &str, value: T) -> &mut Self {
        self.values.insert(key.to_string(), json(&value));
        self
    }

    pub fn matrix(&mut self, name: &str, m: Matrix2) -> &mut Self {
        self.matrices.insert(name.to_string(), m);
        self
    }

    pub fn note(&mut self, text: &str) -> &mut Self {
        self.notes.push(text.to_string());
        self
    }

    /// Measures `check` against the stored matrices and records the outcome.
    /// A check that cannot be measured is recorded as failed with value NaN.
    pub fn check(&mut self, name: &str, check: Check, tolerance: f64) -> &CheckRecord {
        let value = check.measure(&self.matrices).unwrap_or(f64::NAN);
        let passed = check.passes(value, tolerance);
        self.checks.push(CheckRecord {
            name: name.to_string(),
            check,
            tolerance,
            value,
            passed,
        });
        self.checks.last().expect("just pushed")
    }

    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Stamps the time, sets the overall verdict and computes the digest.
    pub fn seal(&mut self, timestamp: &str) {
        self.timestamp = timestamp.to_string();
        self.passed = self.all_checks_pass();
        self.digest = self.compute_digest();
    }

    /// SHA-256 of the canonical serialization with `timestamp` and `digest` blanked.
    pub fn compute_digest(&self) -> String {
        let mut copy = self.clone();
        copy.timestamp.clear();
        copy.digest.clear();
        let bytes = serde_json::to_vec(&copy).expect("certificate serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cert: Certificate = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        if cert.schema_version != SCHEMA_VERSION {
            return Err(Error::Schema(format!(
                "schema version {} is not {SCHEMA_VERSION}",
                cert.schema_version
            )));
        }
        Ok(cert)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationItem {
    pub name: String,
    pub value: f64,
    pub recorded_value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub digest_ok: bool,
    pub items: Vec<ValidationItem>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.digest_ok && self.items.iter().all(|i| i.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ValidationItem> {
        self.items.iter().filter(|i| !i.passed)
    }
}

/// Recomputes every check from the stored matrices with the tolerances the
/// certificate itself records, and verifies the digest.
pub fn validate(cert: &Certificate) -> ValidationReport {
    let items = cert
        .checks
        .iter()
        .map(|rec| {
            let value = rec.check.measure(&cert.matrices).unwrap_or(f64::NAN);
            ValidationItem {
                name: rec.name.clone(),
                value,
                recorded_value: rec.value,
                tolerance: rec.tolerance,
                passed: rec.check.passes(value, rec.tolerance),
            }
        })
        .collect();
    ValidationReport {
        digest_ok: cert.compute_digest() == cert.digest,
        items,
    }
}

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

fn base_word(word: FreeWord) -> WordRef {
    WordRef::new(&BASE_NAMES, word)
}

/// Relative tolerance for traces re-read from stored matrices.
const STORED_TRACE_TOL: f64 = 1e-9;

pub fn theta_certificate(w: Complex64, cfg: &SolveConfig) -> Certificate {
    let mut cert = Certificate::new("theta", cfg);
    let t = theta(w);
    cert.parameter("w", w)
        .value("theta", t.value)
        .value("truncation_error", t.truncation_error)
        .value("theta_prime_zero", theta_prime_zero());
    cert.check("quasi-periodicity", Check::ThetaQuasiPeriodicity { w }, 1e-12);
    cert.check("truncation", Check::Recorded { value: t.truncation_error }, 1e-14 * t.value.norm().max(1.0));
    cert
}

pub fn fricke_certificate(x: Complex64, y: Complex64, z: Complex64, rho: f64, cfg: &SolveConfig) -> Certificate {
    let mut cert = Certificate::new("fricke", cfg);
    cert.parameter("x", x).parameter("y", y).parameter("z", z).parameter("rho", rho);
    cert.check("fricke", Check::FrickeTraces { x, y, z, rho }, cfg.fricke_tol);
    cert
}

/// One stored matrix per transported path, with determinant checks, and the
/// Fricke residual when both base generators are present.
pub fn holonomy_certificate(
    parameters: &[(&str, serde_json::Value)],
    paths: &[(String, crate::transport::HolonomyResult)],
    rho: f64,
    cfg: &SolveConfig,
) -> Certificate {
    let mut cert = Certificate::new("holonomy", cfg);
    for (k, v) in parameters {
        cert.parameter(k, v.clone());
    }
    for (label, h) in paths {
        cert.matrix(label, h.matrix);
        cert.value(&format!("{label}.steps"), h.steps)
            .value(&format!("{label}.est_error"), h.est_error);
    }
    for (label, h) in paths {
        cert.check(&format!("det {label}"), Check::Determinant { matrix: label.clone() }, cfg.transport.det_tolerance);
        cert.check(
            &format!("det drift {label}"),
            Check::Recorded { value: h.det_drift },
            cfg.transport.det_tolerance,
        );
    }
    if cert.matrices.contains_key("alpha") && cert.matrices.contains_key("beta") {
        cert.check(
            "fricke",
            Check::Fricke {
                alpha: "alpha".into(),
                beta: "beta".into(),
                rho,
            },
            cfg.fricke_tol,
        );
    }
    cert
}

fn hyperbolic_checks(cert: &mut Certificate, cfg: &SolveConfig) {
    for name in ["alpha_hat", "beta_hat"] {
        cert.check(
            &format!("Im tr {name}"),
            Check::TraceImaginary {
                word: WordRef::single(name),
            },
            cfg.residual_tol,
        );
        cert.check(
            &format!("Re tr {name} < -2"),
            Check::TraceBelow {
                word: WordRef::single(name),
                bound: -2.0,
            },
            0.0,
        );
        cert.check(&format!("det {name}"), Check::Determinant { matrix: name.into() }, cfg.transport.det_tolerance);
    }
}

pub fn real_parameter_certificate(sol: &RealSolution, k: i32, double: &Representation, cfg: &SolveConfig) -> Certificate {
    let mut cert = Certificate::new("find-real-a", cfg);
    cert.parameter("chi", sol.chi).parameter("rho", sol.rho).parameter("k", k);
    cert.matrix("alpha_hat", double.matrices[0]).matrix("beta_hat", double.matrices[1]);
    cert.value("a", sol.a)
        .value("T1", sol.t1)
        .value("T2", sol.t2)
        .value("iterations", sol.iterations)
        .value("trail", &sol.trail)
        .value("residual_history", &sol.residual_history)
        .value("jacobian_condition", sol.jacobian_condition);
    hyperbolic_checks(&mut cert, cfg);
    cert
}

fn realization_checks(
    cert: &mut Certificate,
    realization: &RealizationCertificate,
    prefix: &str,
    generators: &[String],
    tol: f64,
) {
    let conjugated: Vec<String> = generators.iter().map(|g| format!("{prefix}{g}")).collect();
    for (name, m) in conjugated.iter().zip(&realization.conjugated_generators) {
        cert.matrix(name, *m);
    }
    cert.matrix("C", realization.c).matrix("D", realization.d);
    cert.value("branch", realization.branch)
        .value("singular_gap", realization.singular_gap)
        .value("audit_words_checked", realization.audit.words_checked)
        .value("audit_depth", realization.audit.depth);
    cert.check(
        "intertwiner",
        Check::Intertwiner {
            c: "C".into(),
            generators: generators.to_vec(),
        },
        1e-8,
    );
    cert.check("det D", Check::Determinant { matrix: "D".into() }, 1e-9);
    cert.check(
        "conjugation",
        Check::Conjugation {
            d: "D".into(),
            generators: generators.to_vec(),
            conjugated,
            branch: realization.branch,
        },
        tol,
    );
}

pub fn unitary_parameter_certificate(
    sol: &UnitarySolution,
    base: &Representation,
    realization: Option<&RealizationCertificate>,
    cfg: &SolveConfig,
) -> Certificate {
    let mut cert = Certificate::new("find-unitary-a", cfg);
    cert.parameter("chi", sol.chi).parameter("rho", sol.rho);
    cert.matrix("alpha", base.matrices[0]).matrix("beta", base.matrices[1]);
    cert.value("a_u", sol.a)
        .value("x", sol.x)
        .value("y", sol.y)
        .value("z", sol.z)
        .value("iterations", sol.iterations)
        .value("trail", &sol.trail);
    let zero = Complex64::new(0.0, 0.0);
    cert.check(
        "x = 0",
        Check::TraceValue {
            word: WordRef::single("alpha"),
            value: zero,
        },
        cfg.unitary_tol,
    );
    cert.check(
        "y = 0",
        Check::TraceValue {
            word: WordRef::single("beta"),
            value: zero,
        },
        cfg.unitary_tol,
    );
    cert.check(
        "z = 2cos(pi rho)",
        Check::TraceValue {
            word: base_word(FreeWord::from_signed(&[2, 1]).expect("reduced")),
            value: Complex64::new(2.0 * (PI * sol.rho).cos(), 0.0),
        },
        1e-6,
    );
    cert.check(
        "fricke",
        Check::Fricke {
            alpha: "alpha".into(),
            beta: "beta".into(),
            rho: sol.rho,
        },
        cfg.fricke_tol,
    );
    cert.check(
        "puncture pattern",
        Check::PuncturePattern {
            alpha: "alpha".into(),
            beta: "beta".into(),
            rho: sol.rho,
        },
        1e-6,
    );
    if let Some(r) = realization {
        realization_checks(&mut cert, r, "unitary_", &names(&BASE_NAMES), 1e-6);
    }
    cert
}

fn subgroup_matrices(cert: &mut Certificate, base: &Representation) {
    let images = subgroup_images();
    for (name, word) in SUBGROUP_NAMES.iter().zip(images.iter()) {
        cert.matrix(name, base.evaluate(word));
    }
    let c4 = base.evaluate(&puncture_words()[3]);
    cert.matrix("c4", c4);
    for (name, word) in SUBGROUP_NAMES.iter().zip(images.iter()) {
        cert.check(
            &format!("{name} as a word"),
            Check::WordEquals {
                word: base_word(word.clone()),
                expected: name.to_string(),
            },
            STORED_TRACE_TOL,
        );
    }
    cert.check(
        "c4 as a word",
        Check::WordEquals {
            word: base_word(puncture_words()[3].clone()),
            expected: "c4".into(),
        },
        STORED_TRACE_TOL,
    );
}

/// Realization of the 4-punctured-torus representation for a given base pair.
pub fn sl2r_certificate(
    a: Complex64,
    chi: Complex64,
    rho: f64,
    base: &Representation,
    realization: &RealizationCertificate,
    cfg: &SolveConfig,
) -> Certificate {
    let mut cert = Certificate::new("certify-sl2r", cfg);
    cert.parameter("a", a).parameter("chi", chi).parameter("rho", rho);
    cert.matrix("alpha", base.matrices[0]).matrix("beta", base.matrices[1]);
    subgroup_matrices(&mut cert, base);
    sl2r_checks(&mut cert, rho, realization, cfg);
    cert
}

fn sl2r_checks(cert: &mut Certificate, rho: f64, realization: &RealizationCertificate, cfg: &SolveConfig) {
    let subgroup = names(&SUBGROUP_NAMES);
    cert.check(
        "fricke",
        Check::Fricke {
            alpha: "alpha".into(),
            beta: "beta".into(),
            rho,
        },
        cfg.fricke_tol,
    );
    cert.check(
        "real traces",
        Check::RealTraces {
            generators: subgroup.clone(),
            depth: cfg.word_depth,
        },
        cfg.trace_tol,
    );
    cert.check(
        "squares margin",
        Check::SquaresMargin {
            generators: names(&BASE_NAMES),
        },
        cfg.margin_floor,
    );
    realization_checks(cert, realization, "real_", &subgroup, 1e-6);
}

/// Schreier generators, kernel membership, and the unitary reference checks.
pub fn covering_certificate(p: u32, basis: &SchreierBasis, cfg: &SolveConfig) -> Certificate {
    let mut cert = Certificate::new("covering", cfg);
    let rho = 1.0 / (2.0 * p as f64);
    cert.parameter("p", p).parameter("rho", rho);
    covering_checks(&mut cert, p, basis, cfg);
    cert
}

fn covering_checks(cert: &mut Certificate, p: u32, basis: &SchreierBasis, cfg: &SolveConfig) {
    let rho = 1.0 / (2.0 * p as f64);
    let reference = crate::covering::unitary_reference(rho);
    cert.matrix("u_alpha", reference.matrices[0])
        .matrix("u_beta", reference.matrices[1])
        .matrix("minus_identity", -Matrix2::identity());
    let rendered: Vec<String> = basis.generators.iter().map(|w| w.render(&SUBGROUP_NAMES)).collect();
    cert.value("schreier_generators", &rendered)
        .value("transversal", basis.transversal.iter().map(|w| w.render(&SUBGROUP_NAMES)).collect::<Vec<_>>());
    cert.check(
        "schreier rank",
        Check::SchreierRank {
            character: basis.character.clone(),
            generators: basis.generators.clone(),
        },
        0.0,
    );
    let u = ["u_alpha", "u_beta"];
    for (word, text) in basis.generators.iter().zip(&rendered) {
        cert.check(
            &format!("kernel {text}"),
            Check::InKernel {
                character: basis.character.clone(),
                word: word.clone(),
            },
            0.0,
        );
        cert.check(
            &format!("central {text}"),
            Check::Central {
                word: WordRef::new(&u, to_base(word)),
            },
            cfg.central_tol,
        );
    }
    for (name, word) in PUNCTURE_NAMES.iter().zip(puncture_words().iter()) {
        cert.check(
            &format!("{name}^{p} = -Id"),
            Check::WordEquals {
                word: WordRef::new(&u, word.pow(p as i64)),
                expected: "minus_identity".into(),
            },
            cfg.central_tol,
        );
    }
    cert.check(
        "spin twist",
        Check::SpinTwist {
            character: basis.character.clone(),
            alpha: "u_alpha".into(),
            beta: "u_beta".into(),
        },
        cfg.central_tol,
    );
}

/// Certificate of the end-to-end pipeline.
pub fn main_certificate(main: &MainCertificate, cfg: &SolveConfig) -> Result<Certificate> {
    let mut cert = Certificate::new("certify-main", cfg);
    cert.parameter("p", main.p)
        .parameter("k", main.k)
        .parameter("rho", main.rho)
        .parameter("chi", main.chi);
    cert.matrix("alpha", main.base.matrices[0])
        .matrix("beta", main.base.matrices[1])
        .matrix("alpha_hat", main.double.matrices[0])
        .matrix("beta_hat", main.double.matrices[1]);
    cert.value("a_solved", main.a_solved)
        .value("iterations", main.solve.iterations)
        .value("trail", &main.solve.trail)
        .value("residual_history", &main.solve.residual_history)
        .value("jacobian_condition", main.solve.jacobian_condition)
        .value("worst_audit_word", main.audit.worst_word.render(&SUBGROUP_NAMES))
        .value("audit_words_checked", main.audit.words_checked)
        .value("sigma_traces", main.sigma_report.traces);
    for (label, t) in &main.trace_table {
        cert.value(&format!("trace {label}"), t);
    }

    for name in ["alpha", "beta"] {
        cert.check(&format!("det {name}"), Check::Determinant { matrix: name.into() }, cfg.transport.det_tolerance);
    }
    hyperbolic_checks(&mut cert, cfg);
    for (base, hat) in [("alpha", "alpha_hat"), ("beta", "beta_hat")] {
        cert.check(
            &format!("{base}^2 = {hat}"),
            Check::WordEquals {
                word: WordRef::new(&[base], FreeWord::generator(0).pow(2)),
                expected: hat.into(),
            },
            1e-6,
        );
    }
    // the ODE-derived matrices on the double cover are stored, so α̂ and β̂ in
    // the subgroup are the integrated ones; c1..c4 come from base words
    for (name, word) in PUNCTURE_NAMES.iter().zip(puncture_words().iter()) {
        cert.matrix(name, main.base.evaluate(word));
        cert.check(
            &format!("{name} as a word"),
            Check::WordEquals {
                word: base_word(word.clone()),
                expected: name.to_string(),
            },
            STORED_TRACE_TOL,
        );
    }
    let mut traces = vec![
        ("x", base_word(FreeWord::generator(0))),
        ("y", base_word(FreeWord::generator(1))),
        ("z", base_word(FreeWord::from_signed(&[2, 1]).expect("reduced"))),
        ("T1", WordRef::single("alpha_hat")),
        ("T2", WordRef::single("beta_hat")),
    ];
    for name in PUNCTURE_NAMES {
        traces.push((name, WordRef::single(name)));
    }
    let coords = crate::character::TraceCoordinates::of(&main.base, main.rho);
    let values = [coords.x, coords.y, coords.z, main.solve.t1, main.solve.t2];
    for (i, (label, word)) in traces.into_iter().enumerate() {
        let value = if i < values.len() {
            values[i]
        } else {
            main.puncture_monodromies[i - values.len()].trace()
        };
        cert.check(&format!("trace {label}"), Check::TraceValue { word, value }, STORED_TRACE_TOL);
    }
    cert.check(
        "solve residual",
        Check::Recorded {
            value: main.solve.residual,
        },
        cfg.residual_tol,
    );

    let cover_names = names(&SUBGROUP_NAMES);
    let realization = &main.realization;
    if realization.generator_names != cover_names {
        return Err(Error::Schema("realization is not on the subgroup generators".into()));
    }
    sl2r_checks(&mut cert, main.rho, realization, cfg);

    let basis = reidemeister_schreier(&CyclicCharacter::torus(main.p)?)?;
    covering_checks(&mut cert, main.p, &basis, cfg);
    cert.note(&main.note);
    Ok(cert)
}
