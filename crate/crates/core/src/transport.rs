//! Numerical parallel transport along piecewise-smooth loops.
//!
//! The frame `Ψ` along a path `γ` solves
//!
//! ```text
//! Ψ′(t) = −(A(γ(t)) γ′(t) + B conj(γ′(t))) Ψ(t),   Ψ(0) = Id,
//! ```
//!
//! and the holonomy is `Ψ(1)`. If a loop runs first along `δ` and then along
//! `γ`, its holonomy is `h(γ)·h(δ)`, so the written word `βα` means "α, then β".
//!
//! Each segment is integrated from the identity with an adaptive
//! Dormand–Prince 5(4) pair and the segment holonomies are multiplied. Starting
//! every segment afresh keeps the state well scaled, which is what holds the
//! determinant drift at the level of rounding even when the holonomy is large.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::character::Representation;
use crate::connection::{Connection, ConnectionFamily};
use crate::elliptic::{Lattice, POLE_EXCLUSION_RADIUS};
use crate::error::{Error, Result};
use crate::matrix::Matrix2;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// One smooth piece of a loop, parametrized over `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Segment {
    Line {
        from: Complex64,
        to: Complex64,
    },
    /// Circular arc starting at `center + radius·e^{i·start_angle}` and sweeping
    /// `sweep` radians (positive is counterclockwise).
    Arc {
        center: Complex64,
        radius: f64,
        start_angle: f64,
        sweep: f64,
    },
    /// The chord `from → to` pushed sideways by `amplitude·sin²(πt)` along the
    /// left normal. Endpoints and tangents at the ends agree with the chord.
    Bump {
        from: Complex64,
        to: Complex64,
        amplitude: f64,
    },
}

impl Segment {
    pub fn point(&self, t: f64) -> Complex64 {
        match *self {
            Segment::Line { from, to } => from + (to - from) * t,
            Segment::Arc {
                center,
                radius,
                start_angle,
                sweep,
            } => center + Complex64::from_polar(radius, start_angle + sweep * t),
            Segment::Bump {
                from,
                to,
                amplitude,
            } => {
                let chord = to - from;
                let normal = I * chord / chord.norm();
                from + chord * t + normal * (amplitude * (PI * t).sin().powi(2))
            }
        }
    }

    pub fn derivative(&self, t: f64) -> Complex64 {
        match *self {
            Segment::Line { from, to } => to - from,
            Segment::Arc {
                radius,
                start_angle,
                sweep,
                ..
            } => I * sweep * Complex64::from_polar(radius, start_angle + sweep * t),
            Segment::Bump {
                from,
                to,
                amplitude,
            } => {
                let chord = to - from;
                let normal = I * chord / chord.norm();
                chord + normal * (amplitude * PI * (2.0 * PI * t).sin())
            }
        }
    }

    pub fn start(&self) -> Complex64 {
        self.point(0.0)
    }

    pub fn end(&self) -> Complex64 {
        self.point(1.0)
    }

    fn is_finite(&self) -> bool {
        match *self {
            Segment::Line { from, to } => from.is_finite() && to.is_finite(),
            Segment::Arc {
                center,
                radius,
                start_angle,
                sweep,
            } => center.is_finite() && radius.is_finite() && start_angle.is_finite() && sweep.is_finite(),
            Segment::Bump {
                from,
                to,
                amplitude,
            } => from.is_finite() && to.is_finite() && amplitude.is_finite() && from != to,
        }
    }
}

/// A closed piecewise-smooth loop in C.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathSpec {
    pub label: String,
    pub basepoint: Complex64,
    pub segments: Vec<Segment>,
}

const CLOSURE_TOLERANCE: f64 = 1e-12;
const CLEARANCE_SAMPLES: usize = 512;

impl PathSpec {
    pub fn new(label: impl Into<String>, basepoint: Complex64, segments: Vec<Segment>) -> Self {
        PathSpec {
            label: label.into(),
            basepoint,
            segments,
        }
    }

    fn line(label: &str, to: Complex64) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        Self::new(label, zero, vec![Segment::Line { from: zero, to }])
    }

    /// `t ↦ t`, the generator α of the base torus.
    pub fn alpha() -> Self {
        Self::line("alpha", Complex64::new(1.0, 0.0))
    }

    /// `t ↦ t√−1`, the generator β of the base torus.
    pub fn beta() -> Self {
        Self::line("beta", I)
    }

    /// `t ↦ 2t`, the generator α̂ of the double cover.
    pub fn alpha_hat() -> Self {
        Self::line("alpha_hat", Complex64::new(2.0, 0.0))
    }

    /// `t ↦ 2t√−1`, the generator β̂ of the double cover.
    pub fn beta_hat() -> Self {
        Self::line("beta_hat", 2.0 * I)
    }

    /// The same loop traversed backwards.
    pub fn reversed(&self) -> Self {
        let segments = self
            .segments
            .iter()
            .rev()
            .map(|s| match *s {
                Segment::Line { from, to } => Segment::Line { from: to, to: from },
                Segment::Arc {
                    center,
                    radius,
                    start_angle,
                    sweep,
                } => Segment::Arc {
                    center,
                    radius,
                    start_angle: start_angle + sweep,
                    sweep: -sweep,
                },
                Segment::Bump {
                    from,
                    to,
                    amplitude,
                } => Segment::Bump {
                    from: to,
                    to: from,
                    amplitude: -amplitude,
                },
            })
            .collect();
        Self::new(format!("{}^-1", self.label), self.end(), segments)
    }

    /// Translates every point by `shift`.
    pub fn translated(&self, shift: Complex64) -> Self {
        let segments = self
            .segments
            .iter()
            .map(|s| match *s {
                Segment::Line { from, to } => Segment::Line {
                    from: from + shift,
                    to: to + shift,
                },
                Segment::Arc {
                    center,
                    radius,
                    start_angle,
                    sweep,
                } => Segment::Arc {
                    center: center + shift,
                    radius,
                    start_angle,
                    sweep,
                },
                Segment::Bump {
                    from,
                    to,
                    amplitude,
                } => Segment::Bump {
                    from: from + shift,
                    to: to + shift,
                    amplitude,
                },
            })
            .collect();
        Self::new(self.label.clone(), self.basepoint + shift, segments)
    }

    /// Runs `self` first and then `next`; the holonomy is `h(next)·h(self)`.
    ///
    /// Loops on a torus close up only modulo the lattice, so `next` is
    /// translated to start where `self` ends.
    pub fn then(&self, next: &PathSpec) -> Self {
        let end = self.end();
        let moved = next.translated(end - next.basepoint);
        let mut segments = self.segments.clone();
        segments.extend(moved.segments);
        Self::new(format!("{}*{}", next.label, self.label), self.basepoint, segments)
    }

    /// Concatenates the loops of a written word. The word `w₁w₂…wₙ` is run
    /// right to left, matching the matrix product `h(w₁)…h(wₙ)`.
    pub fn from_word(label: &str, letters: &[PathSpec]) -> Result<Self> {
        let mut iter = letters.iter().rev();
        let first = iter.next().ok_or_else(|| Error::InvalidPath {
            label: label.into(),
            reason: "empty word".into(),
        })?;
        let mut path = first.clone();
        for next in iter {
            path = path.then(next);
        }
        path.label = label.into();
        Ok(path)
    }

    /// A lasso from `basepoint` to a circle of `radius` about `center`, once
    /// around counterclockwise, and straight back.
    pub fn lasso(label: &str, basepoint: Complex64, center: Complex64, radius: f64) -> Self {
        let towards = (center - basepoint) / (center - basepoint).norm();
        let touch = center - towards * radius;
        let start_angle = (-towards).arg();
        Self::new(
            label,
            basepoint,
            vec![
                Segment::Line {
                    from: basepoint,
                    to: touch,
                },
                Segment::Arc {
                    center,
                    radius,
                    start_angle,
                    sweep: 2.0 * PI,
                },
                Segment::Line {
                    from: touch,
                    to: basepoint,
                },
            ],
        )
    }

    /// Counterclockwise boundary of the axis-parallel unit square with
    /// lower-left corner `corner`, starting at the lattice point 0.
    ///
    /// The four squares meeting at 0 give the puncture words
    /// `c₁ = β⁻¹α⁻¹βα`, `c₂ = αβ⁻¹α⁻¹β`, `c₃ = βαβ⁻¹α⁻¹`, `c₄ = α⁻¹βαβ⁻¹`.
    pub fn unit_square(label: &str, corner: Complex64) -> Self {
        let vertices = [corner, corner + 1.0, corner + 1.0 + I, corner + I];
        let zero = Complex64::new(0.0, 0.0);
        let start = vertices
            .iter()
            .position(|v| v.norm() < CLOSURE_TOLERANCE)
            .unwrap_or(0);
        let segments = (0..4)
            .map(|k| Segment::Line {
                from: vertices[(start + k) % 4],
                to: vertices[(start + k + 1) % 4],
            })
            .collect();
        let base = if start < 4 { vertices[start] } else { zero };
        Self::new(label, base, segments)
    }

    pub fn start(&self) -> Complex64 {
        self.segments
            .first()
            .map(Segment::start)
            .unwrap_or(self.basepoint)
    }

    pub fn end(&self) -> Complex64 {
        self.segments
            .last()
            .map(Segment::end)
            .unwrap_or(self.basepoint)
    }

    /// Checks continuity, closure modulo the lattice, and clearance from the
    /// pole locus.
    pub fn validate(&self, lattice: &Lattice, radius: f64) -> Result<()> {
        let bad = |reason: String| Error::InvalidPath {
            label: self.label.clone(),
            reason,
        };
        if self.segments.is_empty() {
            return Err(bad("no segments".into()));
        }
        if self.segments.iter().any(|s| !s.is_finite()) {
            return Err(bad("non-finite or degenerate segment".into()));
        }
        if (self.start() - self.basepoint).norm() > CLOSURE_TOLERANCE {
            return Err(bad(format!(
                "first segment starts at {} instead of the basepoint {}",
                self.start(),
                self.basepoint
            )));
        }
        for (k, pair) in self.segments.windows(2).enumerate() {
            let gap = (pair[0].end() - pair[1].start()).norm();
            if gap > CLOSURE_TOLERANCE {
                return Err(bad(format!("gap of {gap:.3e} after segment {k}")));
            }
        }
        let offset = (self.end() - self.basepoint) / lattice.generator1();
        let off_lattice = (offset.re - offset.re.round()).abs().max((offset.im - offset.im.round()).abs());
        if off_lattice > CLOSURE_TOLERANCE {
            return Err(bad(format!(
                "end point {} is not a lattice translate of the basepoint",
                self.end()
            )));
        }
        for segment in &self.segments {
            for j in 0..=CLEARANCE_SAMPLES {
                let w = segment.point(j as f64 / CLEARANCE_SAMPLES as f64);
                lattice.check_clearance(w, radius)?;
            }
        }
        Ok(())
    }
}

/// Integrator settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransportConfig {
    pub rtol: f64,
    pub atol: f64,
    pub initial_step: f64,
    pub min_step: f64,
    pub max_steps: usize,
    /// Results with `|det − 1|` above this are flagged unusable.
    pub det_tolerance: f64,
    pub exclusion_radius: f64,
}

impl Default for TransportConfig {
    fn default() -> Self {
        TransportConfig {
            rtol: 1e-12,
            atol: 1e-12,
            initial_step: 1e-2,
            min_step: 1e-13,
            max_steps: 1_000_000,
            det_tolerance: 1e-9,
            exclusion_radius: POLE_EXCLUSION_RADIUS,
        }
    }
}

impl TransportConfig {
    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.rtol = tol;
        self.atol = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.rtol,
            self.atol,
            self.initial_step,
            self.min_step,
            self.det_tolerance,
        ];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) || self.max_steps == 0 {
            return Err(Error::InvalidParameter(
                "integrator tolerances and step bounds must be positive".into(),
            ));
        }
        if !(self.exclusion_radius >= 0.0) {
            return Err(Error::InvalidParameter("exclusion radius must be nonnegative".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolonomyResult {
    pub matrix: Matrix2,
    /// `|det − 1|`
    pub det_drift: f64,
    pub steps: usize,
    /// Propagated local error estimate, a bound-like figure for entry and trace errors.
    pub est_error: f64,
    pub usable: bool,
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Difference between the fifth- and fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates one segment from the identity. Returns the segment holonomy,
/// the step count and an error estimate relative to the segment holonomy.
fn integrate_segment(
    conn: &Connection,
    segment: &Segment,
    cfg: &TransportConfig,
    label: &str,
) -> Result<(Matrix2, usize, f64)> {
    let generator = |t: f64| -> Result<Matrix2> {
        let coeffs = conn.coefficients(segment.point(t))?;
        let d = segment.derivative(t);
        Ok(-(coeffs.a * d + coeffs.b * d.conj()))
    };

    let mut t = 0.0;
    let mut y = Matrix2::identity();
    let mut h = cfg.initial_step.min(1.0);
    let mut steps = 0usize;
    let mut accumulated = 0.0;
    let mut m_start = generator(0.0)?;
    let mut k = [Matrix2::zero(); 7];

    while t < 1.0 {
        if steps >= cfg.max_steps {
            return Err(Error::StepUnderflow {
                label: label.into(),
                t,
                step: h,
            });
        }
        let last = t + h >= 1.0;
        if last {
            h = 1.0 - t;
        }
        k[0] = m_start * y;
        let mut m_end = m_start;
        for s in 1..7 {
            let mut stage = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                if A[s][j] != 0.0 {
                    stage = stage + *kj * Complex64::new(h * A[s][j], 0.0);
                }
            }
            let ts = if s >= 5 && last { 1.0 } else { t + C[s] * h };
            let m = generator(ts)?;
            if s == 6 {
                m_end = m;
            }
            k[s] = m * stage;
            if s == 6 {
                // the seventh stage point is the fifth-order solution
                let mut err = Matrix2::zero();
                for (j, kj) in k.iter().enumerate() {
                    if E[j] != 0.0 {
                        err = err + *kj * Complex64::new(h * E[j], 0.0);
                    }
                }
                let ratio = y
                    .entries()
                    .iter()
                    .zip(stage.entries().iter())
                    .zip(err.entries().iter())
                    .map(|((a, b), e)| e.norm() / (cfg.atol + cfg.rtol * a.norm().max(b.norm())))
                    .fold(0.0, f64::max);
                if !ratio.is_finite() {
                    return Err(Error::StepUnderflow {
                        label: label.into(),
                        t,
                        step: h,
                    });
                }
                if ratio <= 1.0 {
                    // error introduced at t propagates to the end through Ψ(1)Ψ(t)⁻¹
                    let inv = y.adjugate().scale(y.det().inv());
                    accumulated += inv.op_norm() * err.op_norm();
                    t = if last { 1.0 } else { t + h };
                    y = stage;
                    m_start = m_end;
                    steps += 1;
                }
                let factor = if ratio == 0.0 {
                    5.0
                } else {
                    (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0)
                };
                let factor = if ratio > 1.0 { factor.min(1.0) } else { factor };
                h *= factor;
                if t < 1.0 && h < cfg.min_step {
                    return Err(Error::StepUnderflow {
                        label: label.into(),
                        t,
                        step: h,
                    });
                }
            }
        }
    }
    let est = accumulated * y.op_norm();
    Ok((y, steps, est))
}

/// Holonomy of `family` along `path`.
pub fn transport(family: &ConnectionFamily, path: &PathSpec, cfg: &TransportConfig) -> Result<HolonomyResult> {
    cfg.validate()?;
    let conn = Connection::new(*family)?.with_exclusion_radius(cfg.exclusion_radius);
    transport_with(&conn, path, cfg)
}

/// Like [`transport`], reusing a prepared connection.
pub fn transport_with(conn: &Connection, path: &PathSpec, cfg: &TransportConfig) -> Result<HolonomyResult> {
    path.validate(&conn.family().lattice, cfg.exclusion_radius)?;
    let mut total = Matrix2::identity();
    let mut est = 0.0;
    let mut steps = 0;
    for segment in &path.segments {
        let (m, n, e) = integrate_segment(conn, segment, cfg, &path.label)?;
        // δ(M·P) ≈ δM·P + M·δP
        est = e * total.op_norm() + m.op_norm() * est;
        total = m * total;
        steps += n;
    }
    let det_drift = (total.det() - 1.0).norm();
    // a trace error is at most twice the operator-norm error
    let est_error = 2.0 * est;
    Ok(HolonomyResult {
        matrix: total,
        det_drift,
        steps,
        est_error,
        usable: det_drift < cfg.det_tolerance && total.is_finite(),
    })
}

/// Which torus the generators live on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    /// `T² = C/Γ` with generators α, β.
    Base,
    /// `T̂² = C/2Γ` with generators α̂, β̂.
    Double,
}

impl Level {
    pub fn lattice(&self) -> Lattice {
        match self {
            Level::Base => Lattice::base(),
            Level::Double => Lattice::double(),
        }
    }

    pub fn generator_names(&self) -> [&'static str; 2] {
        match self {
            Level::Base => ["alpha", "beta"],
            Level::Double => ["alpha_hat", "beta_hat"],
        }
    }

    pub fn generator_paths(&self) -> [PathSpec; 2] {
        match self {
            Level::Base => [PathSpec::alpha(), PathSpec::beta()],
            Level::Double => [PathSpec::alpha_hat(), PathSpec::beta_hat()],
        }
    }
}

/// Holonomies of both generators, integrated concurrently.
pub fn generator_holonomies(
    family: &ConnectionFamily,
    level: Level,
    cfg: &TransportConfig,
) -> Result<[HolonomyResult; 2]> {
    cfg.validate()?;
    let family = family.on_lattice(level.lattice());
    let conn = Connection::new(family)?.with_exclusion_radius(cfg.exclusion_radius);
    let [p, q] = level.generator_paths();
    let (first, second) = rayon::join(|| transport_with(&conn, &p, cfg), || transport_with(&conn, &q, cfg));
    Ok([first?, second?])
}

/// The representation on the two generators of the chosen level.
pub fn holonomy_generators(family: &ConnectionFamily, level: Level, cfg: &TransportConfig) -> Result<Representation> {
    let [h1, h2] = generator_holonomies(family, level, cfg)?;
    let names = level.generator_names();
    Ok(Representation::new(
        vec![names[0].to_string(), names[1].to_string()],
        vec![h1.matrix, h2.matrix],
    ))
}

/// Operator-norm distance between the holonomies of two loops that the
/// caller asserts are homotopic in the punctured surface.
pub fn homotopy_check(
    family: &ConnectionFamily,
    first: &PathSpec,
    second: &PathSpec,
    cfg: &TransportConfig,
) -> Result<f64> {
    cfg.validate()?;
    let conn = Connection::new(*family)?.with_exclusion_radius(cfg.exclusion_radius);
    let (a, b) = rayon::join(|| transport_with(&conn, first, cfg), || transport_with(&conn, second, cfg));
    Ok(a?.matrix.distance(&b?.matrix))
}

/// A named collection of loops, stored as TOML.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PathCorpus {
    #[serde(default, rename = "path")]
    pub paths: Vec<PathSpec>,
}

impl PathCorpus {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Schema(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Schema(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_toml()?).map_err(|e| Error::Schema(format!("{}: {e}", path.display())))
    }

    pub fn get(&self, label: &str) -> Option<&PathSpec> {
        self.paths.iter().find(|p| p.label == label)
    }

    /// Generators of both levels, the four puncture squares, and a lasso
    /// around the puncture in the first square.
    pub fn standard() -> Self {
        let zero = Complex64::new(0.0, 0.0);
        PathCorpus {
            paths: vec![
                PathSpec::alpha(),
                PathSpec::beta(),
                PathSpec::alpha_hat(),
                PathSpec::beta_hat(),
                PathSpec::unit_square("c1", zero),
                PathSpec::unit_square("c2", Complex64::new(-1.0, 0.0)),
                PathSpec::unit_square("c3", Complex64::new(-1.0, -1.0)),
                PathSpec::unit_square("c4", Complex64::new(0.0, -1.0)),
                PathSpec::lasso("lasso_p1", zero, Complex64::new(0.5, 0.5), 0.1),
            ],
        }
    }
}
