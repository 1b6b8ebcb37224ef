//! Configuration file and environment overrides.
//!
//! The file is TOML with the solver keys at top level and integrator keys in
//! a `[transport]` table:
//!
//! ```toml
//! residual_tol = 1e-11
//! word_depth = 6
//! rho_grid = [0.01, 0.05, 0.1, 0.16]
//!
//! [transport]
//! rtol = 1e-12
//! atol = 1e-12
//! ```
//!
//! Missing keys take their defaults. The environment variables
//! `REALMON_RTOL`, `REALMON_ATOL`, `REALMON_RESIDUAL_TOL`, `REALMON_TRACE_TOL`,
//! `REALMON_FRICKE_TOL` and `REALMON_WORD_DEPTH` override the file.

use std::path::Path;

use anyhow::{bail, Context, Result};
use realmon_core::solver::SolveConfig;

pub fn load(path: Option<&Path>) -> Result<SolveConfig> {
    let mut cfg = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            parse(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => SolveConfig::default(),
    };
    apply_env(&mut cfg, |k| std::env::var(k).ok())?;
    cfg.validate().context("invalid configuration")?;
    Ok(cfg)
}

pub fn parse(text: &str) -> Result<SolveConfig> {
    Ok(toml::from_str(text)?)
}

fn float(name: &str, raw: &str) -> Result<f64> {
    match raw.trim().parse::<f64>() {
        Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
        _ => bail!("{name} must be a positive number, got {raw:?}"),
    }
}

/// Applies overrides read through `get`, so tests need not touch the process
/// environment.
pub fn apply_env(cfg: &mut SolveConfig, get: impl Fn(&str) -> Option<String>) -> Result<()> {
    if let Some(v) = get("REALMON_RTOL") {
        cfg.transport.rtol = float("REALMON_RTOL", &v)?;
    }
    if let Some(v) = get("REALMON_ATOL") {
        cfg.transport.atol = float("REALMON_ATOL", &v)?;
    }
    if let Some(v) = get("REALMON_RESIDUAL_TOL") {
        cfg.residual_tol = float("REALMON_RESIDUAL_TOL", &v)?;
    }
    if let Some(v) = get("REALMON_TRACE_TOL") {
        cfg.trace_tol = float("REALMON_TRACE_TOL", &v)?;
    }
    if let Some(v) = get("REALMON_FRICKE_TOL") {
        cfg.fricke_tol = float("REALMON_FRICKE_TOL", &v)?;
    }
    if let Some(v) = get("REALMON_WORD_DEPTH") {
        cfg.word_depth = v
            .trim()
            .parse()
            .with_context(|| format!("REALMON_WORD_DEPTH must be a nonnegative integer, got {v:?}"))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(parse("").unwrap(), SolveConfig::default());
    }

    #[test]
    fn sections_and_overrides() {
        let mut cfg = parse("word_depth = 4\n[transport]\nrtol = 1e-10\n").unwrap();
        assert_eq!(cfg.word_depth, 4);
        assert_eq!(cfg.transport.rtol, 1e-10);
        assert_eq!(cfg.transport.atol, SolveConfig::default().transport.atol);
        apply_env(&mut cfg, |k| (k == "REALMON_WORD_DEPTH").then(|| "3".to_string())).unwrap();
        assert_eq!(cfg.word_depth, 3);
    }

    #[test]
    fn bad_override_is_rejected() {
        let mut cfg = SolveConfig::default();
        assert!(apply_env(&mut cfg, |k| (k == "REALMON_RTOL").then(|| "-1".to_string())).is_err());
    }

    #[test]
    fn unknown_key_is_an_error() {
        assert!(parse("residual_toll = 1e-3").is_err());
    }
}
