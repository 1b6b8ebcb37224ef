use num_complex::Complex64;
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("point {point} lies within {radius} of the pole at {pole} (distance {distance:.3e})")]
    PoleProximity {
        point: Complex64,
        pole: Complex64,
        distance: f64,
        radius: f64,
    },

    #[error("theta shift {theta_shift} lies in the half lattice; the line bundle degenerates for rho = {rho}")]
    DegenerateBundle { theta_shift: Complex64, rho: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid path `{label}`: {reason}")]
    InvalidPath { label: String, reason: String },

    #[error("integrator could not meet tolerance on `{label}` at t = {t:.6} (step {step:.3e})")]
    StepUnderflow { label: String, t: f64, step: f64 },

    #[error("no convergence after {iterations} iterations (last residual {residual:.3e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        trail: Vec<Complex64>,
    },

    #[error("traces not hyperbolic at the solution: Re T1 = {t1:.6}, Re T2 = {t2:.6}")]
    HyperbolicityViolated { t1: f64, t2: f64 },

    #[error("representation has non-real traces (word `{word}` has relative imaginary part {imaginary:.3e})")]
    NotRealTraces { word: String, imaginary: f64 },

    #[error("representation is reducible (irreducibility margin {margin:.3e} below {threshold:.1e})")]
    ReducibleInput { margin: f64, threshold: f64 },

    #[error("intertwiner solve failed: {0}")]
    Intertwiner(String),

    #[error("could not find a nonsingular probe for the real-form factorization")]
    SingularProbe,

    #[error("squares test inconsistent: margin {margin:.3e} vs |xy| = {xy:.3e}")]
    Inconsistent { margin: f64, xy: f64 },

    #[error("invalid cyclic character: {0}")]
    InvalidCharacter(String),

    #[error("subgroup word `{word}` evaluates off +-Id (distance {distance:.3e})")]
    NotCentral { word: String, distance: f64 },

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },

    #[error("schema error: {0}")]
    Schema(String),
}

impl Error {
    pub fn at_stage(self, stage: &str) -> Error {
        Error::Stage {
            stage: stage.to_string(),
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
