//! `SL(2,C)` trace algebra on the free group of the punctured torus, and the
//! conjugation of representations with real traces into `SL(2,R)` or `SU(2)`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix2;
use crate::words::{FreeWord, Letter};

/// Below this, `|det(AB − BA)|` declares a pair reducible.
pub const REDUCIBILITY_THRESHOLD: f64 = 1e-9;

/// Default length bound for the real-trace audit.
pub const DEFAULT_WORD_DEPTH: usize = 6;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Named generator images.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Representation {
    pub names: Vec<String>,
    pub matrices: Vec<Matrix2>,
}

impl Representation {
    pub fn new(names: Vec<String>, matrices: Vec<Matrix2>) -> Self {
        assert_eq!(names.len(), matrices.len(), "one matrix per generator");
        Representation { names, matrices }
    }

    /// A representation on `α, β`.
    pub fn pair(alpha: Matrix2, beta: Matrix2) -> Self {
        Self::new(vec!["alpha".into(), "beta".into()], vec![alpha, beta])
    }

    pub fn rank(&self) -> usize {
        self.matrices.len()
    }

    pub fn name_refs(&self) -> Vec<&str> {
        self.names.iter().map(String::as_str).collect()
    }

    pub fn get(&self, name: &str) -> Option<Matrix2> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.matrices[i])
    }

    pub fn letter(&self, l: Letter) -> Matrix2 {
        let m = self.matrices[l.generator];
        if l.inverse {
            inverse(&m)
        } else {
            m
        }
    }

    /// Product of the letter images in written order.
    pub fn evaluate(&self, word: &FreeWord) -> Matrix2 {
        word.letters()
            .iter()
            .fold(Matrix2::identity(), |acc, &l| acc * self.letter(l))
    }

    /// Largest `|det − 1|` over the generators.
    pub fn det_drift(&self) -> f64 {
        self.matrices
            .iter()
            .map(|m| (m.det() - 1.0).norm())
            .fold(0.0, f64::max)
    }

    /// The representation `g ↦ h(words[g])` of a free group on new generators.
    pub fn pull_back(&self, names: Vec<String>, words: &[FreeWord]) -> Representation {
        let matrices = words.iter().map(|w| self.evaluate(w)).collect();
        Representation::new(names, matrices)
    }

    /// Conjugates every generator by `d`: `g ↦ d g d⁻¹`.
    pub fn conjugate(&self, d: &Matrix2) -> Representation {
        let dinv = inverse(d);
        Representation::new(
            self.names.clone(),
            self.matrices.iter().map(|g| *d * *g * dinv).collect(),
        )
    }
}

/// Inverse that falls back to the adjugate for numerically singular input.
pub(crate) fn inverse(m: &Matrix2) -> Matrix2 {
    m.inverse().unwrap_or_else(|| m.adjugate())
}

pub fn trace_word(rep: &Representation, word: &FreeWord) -> Complex64 {
    rep.evaluate(word).trace()
}

/// `|x² + y² + z² − xyz − 2 − 2cos(2πρ)|`
pub fn fricke_residual(x: Complex64, y: Complex64, z: Complex64, rho: f64) -> f64 {
    (x * x + y * y + z * z - x * y * z - 2.0 - 2.0 * (2.0 * PI * rho).cos()).norm()
}

/// `(x, y, z) = (tr h(α), tr h(β), tr h(βα))` together with the weight ρ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceCoordinates {
    pub x: Complex64,
    pub y: Complex64,
    pub z: Complex64,
    pub rho: f64,
}

impl TraceCoordinates {
    pub fn new(x: Complex64, y: Complex64, z: Complex64, rho: f64) -> Self {
        TraceCoordinates { x, y, z, rho }
    }

    /// Reads off the coordinates from the first two generators.
    pub fn of(rep: &Representation, rho: f64) -> Self {
        let a = rep.matrices[0];
        let b = rep.matrices[1];
        TraceCoordinates {
            x: a.trace(),
            y: b.trace(),
            z: (b * a).trace(),
            rho,
        }
    }

    pub fn fricke_residual(&self) -> f64 {
        fricke_residual(self.x, self.y, self.z, self.rho)
    }
}

/// The root of `ζ + ζ⁻¹ = z` with `|ζ| > 1`; on the unit circle, the one with
/// nonnegative imaginary part.
pub fn zeta_root(z: Complex64) -> Complex64 {
    let disc = (z * z - 4.0).sqrt();
    let r1 = (z + disc) / 2.0;
    let r2 = (z - disc) / 2.0;
    if (r1.norm() - r2.norm()).abs() <= 1e-12 * r1.norm().max(1.0) {
        if r1.im >= r2.im {
            r1
        } else {
            r2
        }
    } else if r1.norm() > r2.norm() {
        r1
    } else {
        r2
    }
}

/// `h(α) = [[x, 1], [−1, 0]]`, `h(β) = [[0, −ζ], [ζ⁻¹, y]]` with `ζ + ζ⁻¹ = z`.
pub fn standard_rep(x: Complex64, y: Complex64, z: Complex64) -> Representation {
    let zeta = zeta_root(z);
    let one = Complex64::new(1.0, 0.0);
    Representation::pair(
        Matrix2::new(x, one, -one, ZERO),
        Matrix2::new(ZERO, -zeta, zeta.inv(), y),
    )
}

/// `|det(AB − BA)|`, zero exactly when `A` and `B` share an eigenvector.
pub fn irreducibility_margin(a: &Matrix2, b: &Matrix2) -> f64 {
    a.commutator(b).det().norm()
}

/// Outcome of the squares test on a representation of `α, β`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SquaresTest {
    /// `|det(XY − YX)|` for `X = h(α)²`, `Y = h(β)²`.
    pub margin: f64,
    /// `|x·y|`
    pub xy: f64,
    pub reducible: bool,
}

/// Whether `h(α)², h(β)²` generate a reducible group. The margin is measured
/// directly and cross-checked against `|xy|²·|det(h(α)h(β) − h(β)h(α))|`.
pub fn squares_reducible(rep: &Representation) -> Result<SquaresTest> {
    let a = rep.matrices[0];
    let b = rep.matrices[1];
    let x = a.trace();
    let y = b.trace();
    let margin = irreducibility_margin(&(a * a), &(b * b));
    let predicted = (x * y).norm_sqr() * irreducibility_margin(&a, &b);
    let scale = 1.0 + predicted.max(margin);
    if (margin - predicted).abs() > 1e-8 * scale {
        return Err(Error::Inconsistent {
            margin,
            xy: (x * y).norm(),
        });
    }
    Ok(SquaresTest {
        margin,
        xy: (x * y).norm(),
        reducible: margin < REDUCIBILITY_THRESHOLD,
    })
}

/// `‖M M* − Id‖` in the operator norm.
pub fn unitarity_defect(m: &Matrix2) -> f64 {
    (*m * m.adjoint() - Matrix2::identity()).op_norm()
}

/// Result of checking that all short words have real trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealTraceAudit {
    pub depth: usize,
    pub words_checked: usize,
    /// `|Im tr w|` divided by the product of the letters' operator norms
    /// (at least 1), maximized over words.
    pub worst_relative_imaginary: f64,
    pub worst_word: FreeWord,
}

impl RealTraceAudit {
    pub fn passes(&self, tol: f64) -> bool {
        self.worst_relative_imaginary <= tol
    }
}

/// Checks every freely reduced word of length at most `depth`.
pub fn audit_real_traces(rep: &Representation, depth: usize) -> RealTraceAudit {
    let letters: Vec<Letter> = (0..rep.rank())
        .flat_map(|g| [Letter::new(g, false), Letter::new(g, true)])
        .collect();
    let images: Vec<(Matrix2, f64)> = letters
        .iter()
        .map(|&l| {
            let m = rep.letter(l);
            (m, m.op_norm())
        })
        .collect();

    struct Best {
        count: usize,
        worst: f64,
        word: Vec<Letter>,
    }

    fn walk(
        letters: &[Letter],
        images: &[(Matrix2, f64)],
        prefix: &mut Vec<Letter>,
        product: Matrix2,
        scale: f64,
        depth: usize,
        best: &mut Best,
    ) {
        best.count += 1;
        let rel = product.trace().im.abs() / scale.max(1.0);
        if rel > best.worst {
            best.worst = rel;
            best.word = prefix.clone();
        }
        if prefix.len() == depth {
            return;
        }
        for (i, &l) in letters.iter().enumerate() {
            if prefix.last() == Some(&l.inv()) {
                continue;
            }
            prefix.push(l);
            let (m, n) = images[i];
            walk(letters, images, prefix, product * m, scale * n, depth, best);
            prefix.pop();
        }
    }

    let partial: Vec<Best> = if depth == 0 {
        Vec::new()
    } else {
        (0..letters.len())
            .into_par_iter()
            .map(|i| {
                let mut best = Best {
                    count: 0,
                    worst: 0.0,
                    word: Vec::new(),
                };
                let mut prefix = vec![letters[i]];
                let (m, n) = images[i];
                walk(&letters, &images, &mut prefix, m, n, depth, &mut best);
                best
            })
            .collect()
    };

    // the empty word has trace 2
    let mut out = RealTraceAudit {
        depth,
        words_checked: 1,
        worst_relative_imaginary: 0.0,
        worst_word: FreeWord::identity(),
    };
    for b in partial {
        out.words_checked += b.count;
        if b.worst > out.worst_relative_imaginary {
            out.worst_relative_imaginary = b.worst;
            out.worst_word = FreeWord::new(b.word);
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RealFormBranch {
    /// Conjugate into `SL(2,R)`; `C̄C = Id`.
    RealForm,
    /// Conjugate into `SU(2)`; `C̄C = −Id`.
    UnitaryForm,
}

/// Intertwiner `C` with `C⁻¹ h̄ C = h`, the factor `D` with `D̄ C = D` (real
/// form) or `D̄ C = J D` (unitary form), and the conjugated generators `D h D⁻¹`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealizationCertificate {
    pub branch: RealFormBranch,
    pub c: Matrix2,
    pub d: Matrix2,
    pub generator_names: Vec<String>,
    pub conjugated_generators: Vec<Matrix2>,
    /// Real form: largest imaginary part of a conjugated entry relative to the
    /// generator's norm. Unitary form: largest unitarity defect.
    pub residual: f64,
    /// Largest relative change of a generator trace under conjugation.
    pub trace_error: f64,
    /// Ratio of the two smallest singular values of the intertwiner system.
    pub singular_gap: f64,
    pub audit: RealTraceAudit,
    pub irreducibility_margin: f64,
}

/// Settings for [`realize_real`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RealizeConfig {
    /// Relative tolerance for the real-trace precondition.
    pub trace_tol: f64,
    pub word_depth: usize,
    pub irreducibility: IrreducibilityTest,
}

impl Default for RealizeConfig {
    fn default() -> Self {
        RealizeConfig {
            trace_tol: 1e-6,
            word_depth: DEFAULT_WORD_DEPTH,
            irreducibility: IrreducibilityTest::SquaredPairs,
        }
    }
}

/// Which pairs of matrices must fail to commute before an intertwiner is sought.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IrreducibilityTest {
    /// Pairs of squared generators; required on the punctured-torus cover.
    #[default]
    SquaredPairs,
    /// Pairs of generators themselves.
    Pairs,
}

/// Largest `|det(GᵢGⱼ − GⱼGᵢ)|` over pairs of generators.
pub fn pair_margin(rep: &Representation) -> f64 {
    let mut best = 0.0_f64;
    for i in 0..rep.rank() {
        for j in i + 1..rep.rank() {
            best = best.max(irreducibility_margin(&rep.matrices[i], &rep.matrices[j]));
        }
    }
    best
}

/// Largest `|det(Gᵢ²Gⱼ² − Gⱼ²Gᵢ²)|` over pairs of generators.
///
/// Squares are used because for the punctured torus the relevant group is the
/// one generated by `h(α)², h(β)²` and the puncture loops; an irreducible pair
/// of squares forces a one-dimensional intertwiner space.
pub fn squared_pair_margin(rep: &Representation) -> f64 {
    let squares: Vec<Matrix2> = rep.matrices.iter().map(|m| *m * *m).collect();
    let mut best = 0.0_f64;
    for i in 0..squares.len() {
        for j in i + 1..squares.len() {
            best = best.max(irreducibility_margin(&squares[i], &squares[j]));
        }
    }
    best
}

/// Solves `conj(Gᵢ) C = C Gᵢ` for all generators; returns `C` with
/// `det C = 1` and the singular-value gap.
pub fn intertwiner(rep: &Representation) -> Result<(Matrix2, f64)> {
    let n = rep.rank();
    let mut sys = DMatrix::<Complex64>::zeros(4 * n, 4);
    for (k, g) in rep.matrices.iter().enumerate() {
        let gs = g.scale(Complex64::new(1.0 / g.op_norm().max(1.0), 0.0));
        let gb = gs.conj();
        // (conj(G) C − C G)_{ij} = Σ_l conj(G)_{il} C_{lj} − C_{il} G_{lj}
        for i in 0..2 {
            for j in 0..2 {
                let row = 4 * k + 2 * i + j;
                for l in 0..2 {
                    sys[(row, 2 * l + j)] += gb.get(i, l);
                    sys[(row, 2 * i + l)] -= gs.get(l, j);
                }
            }
        }
    }
    let svd = sys.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Intertwiner("singular vectors unavailable".into()))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    if order.len() < 2 {
        return Err(Error::Intertwiner("too few equations".into()));
    }
    let s1 = svd.singular_values[order[0]];
    let s2 = svd.singular_values[order[1]];
    if !(s2 > 1e3 * s1) {
        return Err(Error::Intertwiner(format!(
            "solution space not one-dimensional (singular values {s1:.3e}, {s2:.3e})"
        )));
    }
    let null: DVector<Complex64> = v_t.row(order[0]).transpose().map(|z| z.conj());
    let c = Matrix2::new(null[0], null[1], null[2], null[3]);
    let det = c.det();
    if det.norm() < 1e-12 {
        return Err(Error::Intertwiner("intertwiner is singular".into()));
    }
    let gap = if s1 == 0.0 { f64::INFINITY } else { s2 / s1 };
    Ok((c.scale(det.sqrt().inv()), gap))
}

fn probes() -> [Matrix2; 6] {
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    [
        Matrix2::identity(),
        Matrix2::diag(i, i),
        Matrix2::new(one, i, ZERO, one),
        Matrix2::new(one, ZERO, i, one),
        Matrix2::new(Complex64::new(1.0, 2.0), one, -one, Complex64::new(1.0, -1.0)),
        Matrix2::new(Complex64::new(0.3, -0.7), Complex64::new(1.1, 0.4), Complex64::new(-0.2, 0.9), Complex64::new(0.5, 0.5)),
    ]
}

/// Conjugates a representation with real traces into `SL(2,R)` or `SU(2)`.
pub fn realize_real(rep: &Representation, cfg: &RealizeConfig) -> Result<RealizationCertificate> {
    let audit = audit_real_traces(rep, cfg.word_depth);
    if !audit.passes(cfg.trace_tol) {
        return Err(Error::NotRealTraces {
            word: audit.worst_word.render(&rep.name_refs()),
            imaginary: audit.worst_relative_imaginary,
        });
    }
    let margin = match cfg.irreducibility {
        IrreducibilityTest::SquaredPairs => squared_pair_margin(rep),
        IrreducibilityTest::Pairs => pair_margin(rep),
    };
    if margin < REDUCIBILITY_THRESHOLD {
        return Err(Error::ReducibleInput {
            margin,
            threshold: REDUCIBILITY_THRESHOLD,
        });
    }
    let (c, gap) = intertwiner(rep)?;
    let s = c.conj() * c;
    let sign = s.trace().re / 2.0;
    let branch = if sign > 0.0 {
        RealFormBranch::RealForm
    } else {
        RealFormBranch::UnitaryForm
    };
    if s.distance(&Matrix2::identity().scale(Complex64::new(sign.signum(), 0.0))) > 1e-6 {
        return Err(Error::Intertwiner(format!("C̄C = {s} is not ±Id")));
    }

    let j_inv = -Matrix2::j();
    let mut chosen = None;
    for e in probes() {
        let d = match branch {
            RealFormBranch::RealForm => e + e.conj() * c,
            RealFormBranch::UnitaryForm => e + j_inv * e.conj() * c,
        };
        let det = d.det();
        let scale = e.frobenius() * (1.0 + c.frobenius());
        if det.norm() > 1e-6 * scale * scale {
            chosen = Some(d.scale(det.sqrt().inv()));
            break;
        }
    }
    let d = chosen.ok_or(Error::SingularProbe)?;
    let conjugated = rep.conjugate(&d);

    let residual = conjugated
        .matrices
        .iter()
        .map(|g| match branch {
            RealFormBranch::RealForm => g.max_imag() / g.op_norm().max(1.0),
            RealFormBranch::UnitaryForm => unitarity_defect(g),
        })
        .fold(0.0, f64::max);
    let trace_error = rep
        .matrices
        .iter()
        .zip(&conjugated.matrices)
        .map(|(a, b)| (a.trace() - b.trace()).norm() / a.op_norm().max(1.0))
        .fold(0.0, f64::max);

    Ok(RealizationCertificate {
        branch,
        c,
        d,
        generator_names: rep.names.clone(),
        conjugated_generators: conjugated.matrices,
        residual,
        trace_error,
        singular_gap: gap,
        audit,
        irreducibility_margin: margin,
    })
}
