//! Parameter searches on the holonomy map `a ↦ (traces)`.
//!
//! * [`find_real_parameter`]: Newton's method on `(s, t) ↦ (Im T₁, Im T₂)` with
//!   `a = a_k + s + √−1 t`, where `T₁ = tr h(α̂)`, `T₂ = tr h(β̂)`.
//! * [`find_unitary_parameter`]: Levenberg–Marquardt on `(Re x, Im x, Re y, Im y)`.
//! * [`continuation`] and [`certify_main`] chain these with the algebraic checks.
//!
//! Jacobians are central differences of transported traces.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::character::{
    audit_real_traces, fricke_residual, realize_real, unitarity_defect, IrreducibilityTest, squares_reducible, RealFormBranch,
    RealTraceAudit, RealizationCertificate, RealizeConfig, Representation, TraceCoordinates,
    DEFAULT_WORD_DEPTH,
};
use crate::connection::ConnectionFamily;
use crate::covering::{
    puncture_monodromies, puncture_pattern_defect, reidemeister_schreier, sigma_trace_report,
    subgroup_representation, twisted_subgroup_evaluation, unitary_reference, CyclicCharacter,
    SigmaTraceReport, SubgroupReport, SUBGROUP_NAMES,
};
use crate::error::{Error, Result};
use crate::matrix::Matrix2;
use crate::transport::{generator_holonomies, holonomy_generators, Level, TransportConfig};

/// `χ = π/4·(1 − √−1)`
pub fn chifix() -> Complex64 {
    Complex64::new(PI / 4.0, -PI / 4.0)
}

/// `a_k = −π/4·(1 + √−1) + kπ(1 + √−1)`
pub fn a_k(k: i32) -> Complex64 {
    Complex64::new(-PI / 4.0, -PI / 4.0) + Complex64::new(PI, PI) * k as f64
}

/// Solver settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    pub residual_tol: f64,
    pub max_iterations: usize,
    pub fd_step: f64,
    pub damping: f64,
    /// Increasing weights used to continue from `ρ = 0` when a direct solve fails.
    pub rho_grid: Vec<f64>,
    /// `|x|, |y|` bound for the unitary search.
    pub unitary_tol: f64,
    /// Relative tolerance for the real-trace audit.
    pub trace_tol: f64,
    pub word_depth: usize,
    /// Tolerance for `±Id` checks on the cover.
    pub central_tol: f64,
    pub fricke_tol: f64,
    /// Required squares margin for the irreducibility verdict in `certify_main`.
    pub margin_floor: f64,
    pub transport: TransportConfig,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            residual_tol: 1e-11,
            max_iterations: 40,
            fd_step: 1e-7,
            damping: 1.0,
            rho_grid: vec![0.01, 0.02, 0.04, 0.06, 0.08, 0.1, 0.12, 0.14, 0.16],
            unitary_tol: 1e-8,
            trace_tol: 1e-6,
            word_depth: DEFAULT_WORD_DEPTH,
            central_tol: 1e-8,
            fricke_tol: 1e-8,
            margin_floor: 1e-4,
            transport: TransportConfig::default(),
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.residual_tol,
            self.fd_step,
            self.unitary_tol,
            self.trace_tol,
            self.central_tol,
            self.fricke_tol,
        ];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidParameter("solver tolerances must be positive".into()));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::InvalidParameter("damping must lie in (0, 1]".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter("max_iterations must be positive".into()));
        }
        if self.rho_grid.iter().any(|r| !(*r > 0.0 && *r < 0.5)) {
            return Err(Error::InvalidParameter("rho grid values must lie in (0, 1/2)".into()));
        }
        if self.rho_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("rho grid must be increasing".into()));
        }
        self.transport.validate()
    }
}

fn family(chi: Complex64, rho: f64, a: Complex64) -> Result<ConnectionFamily> {
    ConnectionFamily::new(a, chi, rho)
}

/// `(T₁, T₂) = (tr h(α̂), tr h(β̂))`.
pub fn double_traces(chi: Complex64, rho: f64, a: Complex64, cfg: &TransportConfig) -> Result<(Complex64, Complex64)> {
    let [h1, h2] = generator_holonomies(&family(chi, rho, a)?, Level::Double, cfg)?;
    Ok((h1.matrix.trace(), h2.matrix.trace()))
}

/// `(x, y)` from the base generators.
pub fn base_traces(chi: Complex64, rho: f64, a: Complex64, cfg: &TransportConfig) -> Result<(Complex64, Complex64)> {
    let [h1, h2] = generator_holonomies(&family(chi, rho, a)?, Level::Base, cfg)?;
    Ok((h1.matrix.trace(), h2.matrix.trace()))
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Result of [`find_real_parameter`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealSolution {
    pub a: Complex64,
    pub rho: f64,
    pub chi: Complex64,
    pub t1: Complex64,
    pub t2: Complex64,
    /// `max(|Im T₁|, |Im T₂|)` at `a`.
    pub residual: f64,
    pub iterations: usize,
    pub trail: Vec<Complex64>,
    pub residual_history: Vec<f64>,
    /// Condition number of the last Jacobian; `None` when the seed already solved.
    pub jacobian_condition: Option<f64>,
}

fn real_objective(chi: Complex64, rho: f64, a: Complex64, cfg: &TransportConfig) -> Result<([f64; 2], (Complex64, Complex64))> {
    let (t1, t2) = double_traces(chi, rho, a, cfg)?;
    Ok(([t1.im, t2.im], (t1, t2)))
}

fn condition_2x2(j: [[f64; 2]; 2]) -> f64 {
    let f2 = j.iter().flatten().map(|v| v * v).sum::<f64>();
    let det = (j[0][0] * j[1][1] - j[0][1] * j[1][0]).abs();
    let disc = (f2 * f2 - 4.0 * det * det).max(0.0).sqrt();
    let smax = ((f2 + disc) / 2.0).sqrt();
    let smin = ((f2 - disc).max(0.0) / 2.0).sqrt();
    if smin == 0.0 {
        f64::INFINITY
    } else {
        smax / smin
    }
}

/// Solves `Im T₁ = Im T₂ = 0` starting from `seed`.
pub fn find_real_parameter_from(chi: Complex64, rho: f64, seed: Complex64, cfg: &SolveConfig) -> Result<RealSolution> {
    cfg.validate()?;
    let tcfg = &cfg.transport;
    let mut a = seed;
    let (mut f, mut traces) = real_objective(chi, rho, a, tcfg)?;
    let mut trail = vec![a];
    let mut history = vec![sup(&f)];
    let mut condition = None;
    let h = cfg.fd_step;
    let mut iterations = 0;

    while sup(&f) >= cfg.residual_tol {
        if iterations >= cfg.max_iterations {
            return Err(Error::NoConvergence {
                iterations,
                residual: sup(&f),
                trail,
            });
        }
        iterations += 1;
        let probes = [
            Complex64::new(h, 0.0),
            Complex64::new(-h, 0.0),
            Complex64::new(0.0, h),
            Complex64::new(0.0, -h),
        ];
        let values: Vec<[f64; 2]> = probes
            .par_iter()
            .map(|d| real_objective(chi, rho, a + d, tcfg).map(|r| r.0))
            .collect::<Result<Vec<_>>>()?;
        // columns: ∂/∂s, ∂/∂t
        let jac = [
            [(values[0][0] - values[1][0]) / (2.0 * h), (values[2][0] - values[3][0]) / (2.0 * h)],
            [(values[0][1] - values[1][1]) / (2.0 * h), (values[2][1] - values[3][1]) / (2.0 * h)],
        ];
        condition = Some(condition_2x2(jac));
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err(Error::NoConvergence {
                iterations,
                residual: sup(&f),
                trail,
            });
        }
        let ds = -(jac[1][1] * f[0] - jac[0][1] * f[1]) / det;
        let dt = -(-jac[1][0] * f[0] + jac[0][0] * f[1]) / det;
        let step = Complex64::new(ds, dt);

        let mut lambda = cfg.damping;
        let mut accepted = None;
        for _ in 0..12 {
            let trial = a + step * lambda;
            if let Ok((ft, tt)) = real_objective(chi, rho, trial, tcfg) {
                if sup(&ft) < sup(&f) {
                    accepted = Some((trial, ft, tt));
                    break;
                }
            }
            lambda /= 2.0;
        }
        match accepted {
            Some((trial, ft, tt)) => {
                a = trial;
                f = ft;
                traces = tt;
            }
            None => {
                return Err(Error::NoConvergence {
                    iterations,
                    residual: sup(&f),
                    trail,
                })
            }
        }
        trail.push(a);
        history.push(sup(&f));
    }

    let (t1, t2) = traces;
    if !(t1.re < -2.0 && t2.re < -2.0) {
        return Err(Error::HyperbolicityViolated { t1: t1.re, t2: t2.re });
    }
    Ok(RealSolution {
        a,
        rho,
        chi,
        t1,
        t2,
        residual: sup(&f),
        iterations,
        trail,
        residual_history: history,
        jacobian_condition: condition,
    })
}

/// Real-monodromy parameter near `a_k`. Tries a direct solve from `a_k` and
/// otherwise continues along the configured grid of weights below `rho`.
pub fn find_real_parameter(chi: Complex64, rho: f64, k: i32, cfg: &SolveConfig) -> Result<RealSolution> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be nonzero".into()));
    }
    if !(0.0..0.5).contains(&rho) {
        return Err(Error::InvalidParameter(format!("rho = {rho} outside [0, 1/2)")));
    }
    match find_real_parameter_from(chi, rho, a_k(k), cfg) {
        Ok(sol) => Ok(sol),
        Err(direct) => {
            let mut seed = a_k(k);
            for &r in cfg.rho_grid.iter().filter(|&&r| r < rho) {
                match find_real_parameter_from(chi, r, seed, cfg) {
                    Ok(sol) => seed = sol.a,
                    Err(_) => return Err(direct),
                }
            }
            find_real_parameter_from(chi, rho, seed, cfg)
        }
    }
}

/// Result of [`find_unitary_parameter`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitarySolution {
    pub a: Complex64,
    pub rho: f64,
    pub chi: Complex64,
    pub x: Complex64,
    pub y: Complex64,
    pub z: Complex64,
    /// `|z − 2cos(πρ)|`
    pub z_deviation: f64,
    pub residual: f64,
    pub iterations: usize,
    pub trail: Vec<Complex64>,
}

fn unitary_residual(chi: Complex64, rho: f64, a: Complex64, cfg: &TransportConfig) -> Result<[f64; 4]> {
    let (x, y) = base_traces(chi, rho, a, cfg)?;
    Ok([x.re, x.im, y.re, y.im])
}

fn norm4(v: &[f64; 4]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Drives `x` and `y` to zero from `seed` by damped Gauss–Newton.
pub fn find_unitary_parameter_from(chi: Complex64, rho: f64, seed: Complex64, cfg: &SolveConfig) -> Result<UnitarySolution> {
    cfg.validate()?;
    let tcfg = &cfg.transport;
    let h = cfg.fd_step;
    let mut a = seed;
    let mut r = unitary_residual(chi, rho, a, tcfg)?;
    let mut trail = vec![a];
    let mut mu = 1e-6;
    let mut iterations = 0;
    let converged = |r: &[f64; 4]| r[0].hypot(r[1]) < cfg.unitary_tol && r[2].hypot(r[3]) < cfg.unitary_tol;

    while !converged(&r) {
        if iterations >= cfg.max_iterations {
            return Err(Error::NoConvergence {
                iterations,
                residual: norm4(&r),
                trail,
            });
        }
        iterations += 1;
        let probes = [
            Complex64::new(h, 0.0),
            Complex64::new(-h, 0.0),
            Complex64::new(0.0, h),
            Complex64::new(0.0, -h),
        ];
        let values: Vec<[f64; 4]> = probes
            .par_iter()
            .map(|d| unitary_residual(chi, rho, a + d, tcfg))
            .collect::<Result<Vec<_>>>()?;
        let mut jac = [[0.0; 2]; 4];
        for i in 0..4 {
            jac[i][0] = (values[0][i] - values[1][i]) / (2.0 * h);
            jac[i][1] = (values[2][i] - values[3][i]) / (2.0 * h);
        }
        // normal equations (JᵀJ + μ·diag) δ = −Jᵀr
        let mut jtj = [[0.0; 2]; 2];
        let mut jtr = [0.0; 2];
        for i in 0..4 {
            for p in 0..2 {
                jtr[p] += jac[i][p] * r[i];
                for q in 0..2 {
                    jtj[p][q] += jac[i][p] * jac[i][q];
                }
            }
        }
        let mut accepted = None;
        for _ in 0..16 {
            let m00 = jtj[0][0] * (1.0 + mu);
            let m11 = jtj[1][1] * (1.0 + mu);
            let det = m00 * m11 - jtj[0][1] * jtj[1][0];
            if det != 0.0 && det.is_finite() {
                let d0 = -(m11 * jtr[0] - jtj[0][1] * jtr[1]) / det;
                let d1 = -(-jtj[1][0] * jtr[0] + m00 * jtr[1]) / det;
                let trial = a + Complex64::new(d0, d1) * cfg.damping;
                if let Ok(rt) = unitary_residual(chi, rho, trial, tcfg) {
                    if norm4(&rt) < norm4(&r) {
                        accepted = Some((trial, rt));
                        mu = (mu / 10.0).max(1e-12);
                        break;
                    }
                }
            }
            mu *= 10.0;
        }
        match accepted {
            Some((trial, rt)) => {
                a = trial;
                r = rt;
                trail.push(a);
            }
            None => {
                return Err(Error::NoConvergence {
                    iterations,
                    residual: norm4(&r),
                    trail,
                })
            }
        }
    }

    let rep = holonomy_generators(&family(chi, rho, a)?, Level::Base, tcfg)?;
    let t = TraceCoordinates::of(&rep, rho);
    Ok(UnitarySolution {
        a,
        rho,
        chi,
        x: t.x,
        y: t.y,
        z: t.z,
        z_deviation: (t.z - 2.0 * (PI * rho).cos()).norm(),
        residual: norm4(&r),
        iterations,
        trail,
    })
}

/// The unitarizing parameter `a^u`, seeded at `−χ̄` (exact for `ρ = 0`).
pub fn find_unitary_parameter(chi: Complex64, rho: f64, cfg: &SolveConfig) -> Result<UnitarySolution> {
    if !(0.0..0.5).contains(&rho) {
        return Err(Error::InvalidParameter(format!("rho = {rho} outside [0, 1/2)")));
    }
    let seed = -chi.conj();
    match find_unitary_parameter_from(chi, rho, seed, cfg) {
        Ok(sol) => Ok(sol),
        Err(direct) => {
            let mut seed = seed;
            for &r in cfg.rho_grid.iter().filter(|&&r| r < rho) {
                match find_unitary_parameter_from(chi, r, seed, cfg) {
                    Ok(sol) => seed = sol.a,
                    Err(_) => return Err(direct),
                }
            }
            find_unitary_parameter_from(chi, rho, seed, cfg)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuationPoint {
    pub rho: f64,
    pub a: Option<Complex64>,
    pub residual: Option<f64>,
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuationReport {
    pub k: i32,
    pub points: Vec<ContinuationPoint>,
    /// Largest grid weight reached by an unbroken chain of successes.
    pub frontier: Option<f64>,
}

/// Follows the real-monodromy parameter along `rho_grid`, seeding each solve
/// with the previous solution. Failures are recorded and the next point is
/// seeded from the last success.
pub fn continuation(chi: Complex64, k: i32, rho_grid: &[f64], cfg: &SolveConfig) -> ContinuationReport {
    let mut seed = a_k(k);
    let mut points = Vec::new();
    let mut frontier = None;
    let mut unbroken = true;
    for &rho in rho_grid {
        match find_real_parameter_from(chi, rho, seed, cfg) {
            Ok(sol) => {
                seed = sol.a;
                if unbroken {
                    frontier = Some(rho);
                }
                points.push(ContinuationPoint {
                    rho,
                    a: Some(sol.a),
                    residual: Some(sol.residual),
                    failure: None,
                });
            }
            Err(e) => {
                unbroken = false;
                points.push(ContinuationPoint {
                    rho,
                    a: None,
                    residual: None,
                    failure: Some(e.to_string()),
                });
            }
        }
    }
    ContinuationReport { k, points, frontier }
}

/// Output of the end-to-end pipeline for `ρ = 1/(2p)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MainCertificate {
    pub p: u32,
    pub rho: f64,
    pub k: i32,
    pub chi: Complex64,
    pub a_solved: Complex64,
    pub solve: RealSolution,
    /// Generator matrices of the base torus at `a_solved`.
    pub base: Representation,
    /// `h(α̂), h(β̂)` integrated on the double cover.
    pub double: Representation,
    /// Largest distance between `h(α)²` and the integrated `h(α̂)` (same for β).
    pub square_consistency: f64,
    pub trace_table: Vec<(String, Complex64)>,
    pub fricke_residual: f64,
    pub irreducibility_margin: f64,
    pub audit: RealTraceAudit,
    pub realization: RealizationCertificate,
    pub puncture_monodromies: [Matrix2; 4],
    pub unitary_reference: Representation,
    pub subgroup_report: SubgroupReport,
    pub sigma_report: SigmaTraceReport,
    pub note: String,
}

/// Runs the full pipeline: real solve, Fricke and trace audits, squares
/// margin, real-form realization, and the covering checks against the
/// unitary reference at the same weight.
pub fn certify_main(p: u32, k: i32, cfg: &SolveConfig) -> Result<MainCertificate> {
    if p < 3 || p.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("p must be odd and at least 3, got {p}")));
    }
    cfg.validate()?;
    let rho = 1.0 / (2.0 * p as f64);
    let chi = chifix();

    let solve = find_real_parameter(chi, rho, k, cfg).map_err(|e| e.at_stage("find-real-a"))?;
    let a = solve.a;
    let fam = family(chi, rho, a)?;
    let base = holonomy_generators(&fam, Level::Base, &cfg.transport).map_err(|e| e.at_stage("holonomy"))?;
    let double = holonomy_generators(&fam, Level::Double, &cfg.transport).map_err(|e| e.at_stage("holonomy"))?;
    let square_consistency = (0..2)
        .map(|i| {
            let sq = base.matrices[i] * base.matrices[i];
            sq.distance(&double.matrices[i]) / double.matrices[i].op_norm().max(1.0)
        })
        .fold(0.0, f64::max);

    let coords = TraceCoordinates::of(&base, rho);
    let fricke = fricke_residual(coords.x, coords.y, coords.z, rho);
    if !(fricke < cfg.fricke_tol) {
        return Err(Error::InvalidParameter(format!("Fricke residual {fricke:.3e}")).at_stage("fricke"));
    }

    let cover = subgroup_representation(&base);
    let audit = audit_real_traces(&cover, cfg.word_depth);
    if !audit.passes(cfg.trace_tol) {
        return Err(Error::NotRealTraces {
            word: audit.worst_word.render(&SUBGROUP_NAMES),
            imaginary: audit.worst_relative_imaginary,
        }
        .at_stage("trace-audit"));
    }
    let squares = squares_reducible(&base).map_err(|e| e.at_stage("irreducibility"))?;
    if !(squares.margin > cfg.margin_floor) {
        return Err(Error::ReducibleInput {
            margin: squares.margin,
            threshold: cfg.margin_floor,
        }
        .at_stage("irreducibility"));
    }

    let realization = realize_real(
        &cover,
        &RealizeConfig {
            trace_tol: cfg.trace_tol,
            word_depth: cfg.word_depth,
            ..RealizeConfig::default()
        },
    )
    .map_err(|e| e.at_stage("realize"))?;
    if realization.branch != RealFormBranch::RealForm {
        return Err(Error::Intertwiner("C̄C = −Id, expected the real form".into()).at_stage("realize"));
    }

    let punctures = puncture_monodromies(&base);
    let reference = unitary_reference(rho);
    let basis = reidemeister_schreier(&CyclicCharacter::torus(p)?).map_err(|e| e.at_stage("covering"))?;
    let subgroup_report =
        twisted_subgroup_evaluation(&reference, &basis, cfg.central_tol).map_err(|e| e.at_stage("covering"))?;
    let sigma_report = sigma_trace_report(&base).map_err(|e| e.at_stage("sigma"))?;
    if !sigma_report.irreducible {
        return Err(Error::ReducibleInput {
            margin: sigma_report.squares.margin,
            threshold: crate::character::REDUCIBILITY_THRESHOLD,
        }
        .at_stage("sigma"));
    }

    let mut trace_table = vec![
        ("x = tr h(alpha)".to_string(), coords.x),
        ("y = tr h(beta)".to_string(), coords.y),
        ("z = tr h(beta alpha)".to_string(), coords.z),
        ("T1 = tr h(alpha_hat)".to_string(), solve.t1),
        ("T2 = tr h(beta_hat)".to_string(), solve.t2),
    ];
    for (i, m) in punctures.iter().enumerate() {
        trace_table.push((format!("tr h(c{})", i + 1), m.trace()));
    }

    Ok(MainCertificate {
        p,
        rho,
        k,
        chi,
        a_solved: a,
        solve,
        base,
        double,
        square_consistency,
        trace_table,
        fricke_residual: fricke,
        irreducibility_margin: squares.margin,
        audit,
        realization,
        puncture_monodromies: punctures,
        unitary_reference: reference,
        subgroup_report,
        sigma_report,
        note: "numerical certificate, not a proof".into(),
    })
}

/// Conjugates the base representation at a solved unitary parameter into
/// `SU(2)`; returns the realization and the largest unitarity defect of the
/// conjugated generators.
pub fn unitarize(sol: &UnitarySolution, cfg: &SolveConfig) -> Result<(RealizationCertificate, f64)> {
    let rep = holonomy_generators(&family(sol.chi, sol.rho, sol.a)?, Level::Base, &cfg.transport)?;
    let cert = realize_real(
        &rep,
        &RealizeConfig {
            trace_tol: cfg.trace_tol,
            word_depth: cfg.word_depth,
            irreducibility: IrreducibilityTest::Pairs,
        },
    )?;
    if cert.branch != RealFormBranch::UnitaryForm {
        return Err(Error::Intertwiner("C̄C = Id, expected the unitary form".into()));
    }
    let defect = cert
        .conjugated_generators
        .iter()
        .map(unitarity_defect)
        .fold(0.0, f64::max);
    Ok((cert, defect))
}

/// Puncture pattern deviation of a solved unitary parameter.
pub fn unitary_puncture_defect(sol: &UnitarySolution, cfg: &TransportConfig) -> Result<f64> {
    let rep = holonomy_generators(&family(sol.chi, sol.rho, sol.a)?, Level::Base, cfg)?;
    Ok(puncture_pattern_defect(&rep, sol.rho))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn a_k_values() {
        assert!((a_k(0) - Complex64::new(-PI / 4.0, -PI / 4.0)).norm() < 1e-15);
        assert!((a_k(1) - Complex64::new(3.0 * PI / 4.0, 3.0 * PI / 4.0)).norm() < 1e-15);
    }

    #[test]
    fn config_validation() {
        assert!(SolveConfig::default().validate().is_ok());
        let bad = SolveConfig {
            rho_grid: vec![0.1, 0.05],
            ..SolveConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = SolveConfig {
            damping: 0.0,
            ..SolveConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn condition_number_of_diagonal() {
        assert!((condition_2x2([[2.0, 0.0], [0.0, 0.5]]) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn even_p_rejected() {
        assert!(matches!(
            certify_main(4, 1, &SolveConfig::default()),
            Err(Error::InvalidParameter(_))
        ));
        assert!(certify_main(1, 1, &SolveConfig::default()).is_err());
    }
}
