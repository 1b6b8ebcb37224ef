//! Holonomy of abelianized flat `SL(2,C)` connections on the once-punctured
//! square torus, with solvers for real and unitary monodromy and the
//! covering-space checks built on top of them.

// Negated comparisons are how NaN inputs are routed to the failure branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certificate;
pub mod character;
pub mod connection;
pub mod covering;
pub mod elliptic;
pub mod error;
pub mod matrix;
pub mod solver;
pub mod transport;
pub mod words;

pub use character::{Representation, TraceCoordinates};
pub use connection::{CoefficientPair, Connection, ConnectionFamily};
pub use elliptic::{Lattice, Theta};
pub use error::{Error, Result};
pub use matrix::Matrix2;
pub use num_complex::Complex64;
pub use transport::{HolonomyResult, Level, PathSpec, TransportConfig};
pub use words::FreeWord;
