//! Coefficients of the abelianized connection `∇^{a,χ,ρ}` in the global smooth
//! trivialization.
//!
//! The connection form is `A(w) dw + B dw̄` with
//!
//! ```text
//! A(w) = [[ a,        γ⁺(w) ],      B = [[ χ,  0 ],
//!         [ γ⁻(w),   −a     ]],          [ 0, −χ ]],
//!
//! γ⁺(w) = ρ ϑ′(0)/ϑ(−2x) · t_{2x}(w),   γ⁻(w) = ρ ϑ′(0)/ϑ(2x) · t_{−2x}(w),   x = −χ/π,
//! ```
//!
//! where `t_{±2x}` is the section centred on the puncture `o` (see
//! [`crate::elliptic`]). Both off-diagonal entries have a simple pole at `o`
//! with residue `ρ`, so the quadratic residue of `γ⁺γ⁻` there is `ρ²`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::elliptic::{puncture, Lattice, Theta, POLE_EXCLUSION_RADIUS};
use crate::error::{Error, Result};
use crate::matrix::Matrix2;

/// Parameters `(a, χ, ρ)` of the family together with the lattice the loops live on.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnectionFamily {
    pub a: Complex64,
    pub chi: Complex64,
    pub rho: f64,
    #[serde(default)]
    pub lattice: Lattice,
}

impl ConnectionFamily {
    pub fn new(a: Complex64, chi: Complex64, rho: f64) -> Result<Self> {
        let family = ConnectionFamily {
            a,
            chi,
            rho,
            lattice: Lattice::base(),
        };
        family.validate()?;
        Ok(family)
    }

    pub fn on_lattice(mut self, lattice: Lattice) -> Self {
        self.lattice = lattice;
        self
    }

    /// `x = −χ/π`.
    pub fn theta_shift(&self) -> Complex64 {
        -self.chi / PI
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..0.5).contains(&self.rho) || !self.rho.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "rho must lie in [0, 1/2), got {}",
                self.rho
            )));
        }
        if !(self.a.is_finite() && self.chi.is_finite()) {
            return Err(Error::InvalidParameter("a and chi must be finite".into()));
        }
        if self.rho > 0.0 && in_half_lattice(self.theta_shift()) {
            return Err(Error::DegenerateBundle {
                theta_shift: self.theta_shift(),
                rho: self.rho,
            });
        }
        Ok(())
    }
}

fn in_half_lattice(x: Complex64) -> bool {
    let d = 2.0 * x;
    (d.re - d.re.round()).abs() < 1e-12 && (d.im - d.im.round()).abs() < 1e-12
}

/// `A` multiplies `dw`, `B` multiplies `dw̄`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientPair {
    pub a: Matrix2,
    pub b: Matrix2,
    pub at: Complex64,
}

/// A family with its theta constants precomputed, ready for repeated evaluation.
#[derive(Clone, Debug)]
pub struct Connection {
    family: ConnectionFamily,
    theta: Theta,
    /// `ρ ϑ′(0)/ϑ(−2x)`
    plus: Complex64,
    /// `ρ ϑ′(0)/ϑ(2x)`
    minus: Complex64,
    two_x: Complex64,
    exclusion_radius: f64,
}

impl Connection {
    pub fn new(family: ConnectionFamily) -> Result<Self> {
        Self::with_theta(family, Theta::default())
    }

    pub fn with_theta(family: ConnectionFamily, theta: Theta) -> Result<Self> {
        family.validate()?;
        let two_x = 2.0 * family.theta_shift();
        let (plus, minus) = if family.rho == 0.0 {
            (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
        } else {
            let d = theta.prime_zero() * family.rho;
            (d / theta.eval(-two_x), d / theta.eval(two_x))
        };
        Ok(Connection {
            family,
            theta,
            plus,
            minus,
            two_x,
            exclusion_radius: POLE_EXCLUSION_RADIUS,
        })
    }

    pub fn with_exclusion_radius(mut self, radius: f64) -> Self {
        self.exclusion_radius = radius;
        self
    }

    pub fn family(&self) -> &ConnectionFamily {
        &self.family
    }

    pub fn exclusion_radius(&self) -> f64 {
        self.exclusion_radius
    }

    /// `(γ⁺(w), γ⁻(w))`, the `dw`-coefficients off the diagonal.
    pub fn off_diagonal(&self, w: Complex64) -> Result<(Complex64, Complex64)> {
        let shifted = w + puncture();
        let v = Complex64::new(shifted.re - shifted.re.round(), shifted.im - shifted.im.round());
        let distance = v.norm();
        if distance < self.exclusion_radius || !distance.is_finite() {
            let (_, pole, distance) = self.family.lattice.nearest_pole(w);
            return Err(Error::PoleProximity {
                point: w,
                pole: self.family.lattice.reduce(pole),
                distance,
                radius: self.exclusion_radius,
            });
        }
        if self.family.rho == 0.0 {
            return Ok((Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)));
        }
        let denom = self.theta.eval(v);
        let phase = (-PI * self.two_x * (v - v.conj())).exp();
        let t_plus = self.theta.eval(v - self.two_x) / denom * phase;
        let t_minus = self.theta.eval(v + self.two_x) / denom / phase;
        Ok((self.plus * t_plus, self.minus * t_minus))
    }

    pub fn coefficients(&self, w: Complex64) -> Result<CoefficientPair> {
        let (up, down) = self.off_diagonal(w)?;
        let a = self.family.a;
        let chi = self.family.chi;
        Ok(CoefficientPair {
            a: Matrix2::new(a, up, down, -a),
            b: Matrix2::diag(chi, -chi),
            at: w,
        })
    }

    /// Coefficients of the pullback to `C/2Γ`; the coefficients are Γ-periodic,
    /// so this is evaluation at the same point of C with poles labelled `p₁ … p₄`.
    pub fn pullback_coefficients(&self, w: Complex64) -> Result<CoefficientPair> {
        let lifted = Connection {
            family: self.family.on_lattice(Lattice::double()),
            ..self.clone()
        };
        lifted.coefficients(w)
    }
}

pub fn coefficients(family: &ConnectionFamily, w: Complex64) -> Result<CoefficientPair> {
    Connection::new(*family)?.coefficients(w)
}

pub fn pullback_coefficients(family: &ConnectionFamily, w: Complex64) -> Result<CoefficientPair> {
    Connection::new(*family)?.pullback_coefficients(w)
}
