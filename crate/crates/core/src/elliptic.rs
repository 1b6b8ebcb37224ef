//! Theta function of the square lattice `Γ = Z + iZ` and the sections `t_x`.
//!
//! The theta function used throughout is the entire function
//!
//! ```text
//! ϑ(w) = Σ_n (−1)^n q^{n(n−1)} e^{2πi n w},   q = e^{−π},
//! ```
//!
//! which vanishes at `w = 0` and obeys `ϑ(w + 1) = ϑ(w)` and
//! `ϑ(w + i) = −ϑ(w) e^{−2πi w}`. The terms `n` and `1 − n` share the weight
//! `q^{n(n−1)}`, so the series is summed in those pairs; at `w = 0` every pair
//! cancels exactly.
//!
//! The section `t_x` is evaluated in the coordinate of the right-hand side of
//! its defining formula:
//!
//! ```text
//! t_section(x, w) = ϑ(w − x) / ϑ(w) · exp(−π x (w − w̄))
//! ```
//!
//! This function is Γ-periodic, has its zero at `w = x` and its pole at the
//! lattice points. The connection coefficients need the section centred on
//! the puncture `o = (1 + i)/2`, i.e. `t_section(x, w + o)`; that shifted form
//! is [`section_on_torus`], with poles on `o + Γ`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default radius around each pole inside which evaluation is refused.
pub const POLE_EXCLUSION_RADIUS: f64 = 0.05;

/// Relative size of the first neglected term at which the series stops.
pub const SERIES_TOLERANCE: f64 = 1e-17;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// The puncture `o = [(1 + i)/2]`.
pub fn puncture() -> Complex64 {
    Complex64::new(0.5, 0.5)
}

/// `Γ` scaled by 1 (the torus `T²`) or by 2 (the four-fold cover `T̂²`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Lattice {
    scale: u32,
}

impl Lattice {
    pub fn new(scale: u32) -> Result<Self> {
        match scale {
            1 | 2 => Ok(Lattice { scale }),
            s => Err(Error::InvalidParameter(format!(
                "lattice scale must be 1 or 2, got {s}"
            ))),
        }
    }

    pub const fn base() -> Self {
        Lattice { scale: 1 }
    }

    pub const fn double() -> Self {
        Lattice { scale: 2 }
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn generator1(&self) -> Complex64 {
        Complex64::new(self.scale as f64, 0.0)
    }

    pub fn generator2(&self) -> Complex64 {
        Complex64::new(0.0, self.scale as f64)
    }

    /// Representative of `w` in `[0, s) × [0, s)`.
    pub fn reduce(&self, w: Complex64) -> Complex64 {
        let s = self.scale as f64;
        Complex64::new(w.re.rem_euclid(s), w.im.rem_euclid(s))
    }

    /// Representatives of the pole locus `o + Γ` modulo this lattice.
    ///
    /// For scale 2 these are `p₁ … p₄ = (1+i)/2, (3+i)/2, (3+3i)/2, (1+3i)/2`.
    pub fn poles(&self) -> Vec<Complex64> {
        match self.scale {
            1 => vec![puncture()],
            _ => vec![
                Complex64::new(0.5, 0.5),
                Complex64::new(1.5, 0.5),
                Complex64::new(1.5, 1.5),
                Complex64::new(0.5, 1.5),
            ],
        }
    }

    /// Nearest point of `o + Γ` to `w`: `(label index, the point in C, distance)`.
    pub fn nearest_pole(&self, w: Complex64) -> (usize, Complex64, f64) {
        let u = w - puncture();
        let nearest = Complex64::new(u.re.round(), u.im.round());
        let pole = puncture() + nearest;
        let distance = (u - nearest).norm();
        let reduced = self.reduce(pole);
        let label = self
            .poles()
            .iter()
            .position(|p| (p - reduced).norm() < 1e-9)
            .unwrap_or(0);
        (label, pole, distance)
    }

    /// Errors with [`Error::PoleProximity`] when `w` is within `radius` of `o + Γ`.
    pub fn check_clearance(&self, w: Complex64, radius: f64) -> Result<()> {
        let (_, pole, distance) = self.nearest_pole(w);
        if distance < radius || !distance.is_finite() {
            return Err(Error::PoleProximity {
                point: w,
                pole: self.reduce(pole),
                distance,
                radius,
            });
        }
        Ok(())
    }
}

impl Default for Lattice {
    fn default() -> Self {
        Lattice::base()
    }
}

impl TryFrom<u32> for Lattice {
    type Error = Error;

    fn try_from(scale: u32) -> Result<Self> {
        Lattice::new(scale)
    }
}

impl From<Lattice> for u32 {
    fn from(l: Lattice) -> u32 {
        l.scale
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaValue {
    pub value: Complex64,
    pub argument: Complex64,
    /// Bound on the neglected tail, in the same units as `value`.
    pub truncation_error: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectionValue {
    pub value: Complex64,
    /// The parameter `x` of `t_x`.
    pub shift: Complex64,
    pub argument: Complex64,
}

/// Theta function with an explicit global normalization constant.
///
/// Every quantity the connection uses is a ratio of theta values, so the
/// constant cancels; it is kept only so that invariance can be checked.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Theta {
    normalization: Complex64,
}

impl Default for Theta {
    fn default() -> Self {
        Theta {
            normalization: Complex64::new(1.0, 0.0),
        }
    }
}

impl Theta {
    pub fn with_normalization(normalization: Complex64) -> Self {
        Theta { normalization }
    }

    pub fn normalization(&self) -> Complex64 {
        self.normalization
    }

    pub fn value(&self, w: Complex64) -> ThetaValue {
        // ϑ(u + m + k i) = (−1)^k exp(−2πi k u + π k(k−1)) ϑ(u)
        let k = w.im.round();
        let m = w.re.round();
        let u = Complex64::new(w.re - m, w.im - k);
        let (sum, tail) = fundamental_series(u);
        let ki = k as i64;
        let sign = if ki.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let factor = (-2.0 * PI * I * k * u + PI * k * (k - 1.0)).exp() * sign;
        let scale = self.normalization * factor;
        ThetaValue {
            value: sum * scale,
            argument: w,
            truncation_error: tail * scale.norm(),
        }
    }

    pub fn eval(&self, w: Complex64) -> Complex64 {
        self.value(w).value
    }

    /// `ϑ′(0) = 2πi Σ_n (−1)^n n q^{n(n−1)}`, summed in the same pairs.
    pub fn prime_zero(&self) -> Complex64 {
        // pair j: (−1)^j q^{j(j+1)} (−j − (j+1)) = −(−1)^j (2j+1) q^{j(j+1)}
        let mut acc = 0.0;
        for j in 0..64 {
            let jf = j as f64;
            let weight = (-PI * jf * (jf + 1.0)).exp();
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let term = -sign * (2.0 * jf + 1.0) * weight;
            acc += term;
            if term.abs() < SERIES_TOLERANCE * acc.abs() {
                break;
            }
        }
        self.normalization * (2.0 * PI * I * acc)
    }

    /// `ϑ(w − x)/ϑ(w) · exp(−πx(w − w̄))`; see the module docs for the convention.
    pub fn section(&self, x: Complex64, w: Complex64, radius: f64) -> Result<SectionValue> {
        // periodic, so evaluate on the representative nearest the origin
        let v = Complex64::new(w.re - w.re.round(), w.im - w.im.round());
        let distance = v.norm();
        if distance < radius || !distance.is_finite() {
            return Err(Error::PoleProximity {
                point: w,
                pole: w - v,
                distance,
                radius,
            });
        }
        let ratio = self.eval(v - x) / self.eval(v);
        let value = ratio * (-PI * x * (v - v.conj())).exp();
        Ok(SectionValue {
            value,
            shift: x,
            argument: w,
        })
    }

    /// `t_x` centred on the puncture, with poles on `o + Γ`.
    pub fn torus_section(&self, x: Complex64, w: Complex64, radius: f64) -> Result<SectionValue> {
        let mut s = self.section(x, w + puncture(), radius)?;
        s.argument = w;
        Ok(s)
    }
}

/// Pair-summed series for `u` in the fundamental square around 0.
///
/// Returns the sum and a bound on the neglected tail.
fn fundamental_series(u: Complex64) -> (Complex64, f64) {
    let z = (2.0 * PI * I * u).exp();
    let z_inv = z.inv();
    // pair j contributes (−1)^j q^{j(j+1)} (z^{−j} − z^{j+1})
    let mut neg = Complex64::new(1.0, 0.0);
    let mut pos = z;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut scale = 0.0_f64;
    let mut tail = 0.0;
    for j in 0..64 {
        let jf = j as f64;
        let weight = (-PI * jf * (jf + 1.0)).exp();
        let magnitude = weight * (neg.norm() + pos.norm());
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        sum += (neg - pos) * (sign * weight);
        scale = scale.max(magnitude);
        if j > 0 && magnitude < SERIES_TOLERANCE * scale {
            tail = magnitude;
            break;
        }
        neg *= z_inv;
        pos *= z;
    }
    (sum, tail)
}

/// `ϑ(w)` with the leading coefficient normalized to 1.
pub fn theta(w: Complex64) -> ThetaValue {
    Theta::default().value(w)
}

pub fn theta_prime_zero() -> Complex64 {
    Theta::default().prime_zero()
}

/// `t_x` in the right-hand-side coordinate: zero at `x`, poles on `Γ`.
pub fn t_section(x: Complex64, w: Complex64) -> Result<SectionValue> {
    Theta::default().section(x, w, POLE_EXCLUSION_RADIUS)
}

/// `t_x` centred on the puncture: `t_section(x, w + o)`, poles on `o + Γ`.
pub fn section_on_torus(x: Complex64, w: Complex64) -> Result<SectionValue> {
    Theta::default().torus_section(x, w, POLE_EXCLUSION_RADIUS)
}
