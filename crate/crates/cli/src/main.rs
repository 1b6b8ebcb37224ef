//! `realmon`: holonomy, parameter solves and certificates from the command line.
//!
//! Every computing command writes a JSON certificate (default
//! `realmon-<command>.json`, or `--out`) and prints a one-line verdict per
//! check. Exit status: 0 when every check passes, 1 on a failed check or a
//! computation error, 2 on a usage error.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use realmon_core::certificate::{self, Certificate};
use realmon_core::character::{realize_real, RealizeConfig};
use realmon_core::covering::{reidemeister_schreier, subgroup_representation, CyclicCharacter};
use realmon_core::solver::{self, chifix, SolveConfig};
use realmon_core::transport::{holonomy_generators, transport, PathCorpus};
use realmon_core::{Complex64, ConnectionFamily, Lattice, Level};

#[derive(Parser, Debug)]
#[command(name = "realmon", version, about = "Real and unitary monodromy of abelianized connections on the square torus")]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Where to write the certificate.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate the theta function and check its quasi-periodicity.
    Theta {
        /// Point in the plane, as RE or RE,IM.
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        w: Complex64,
    },
    /// Transport around loops of a path corpus.
    Holonomy {
        /// Diagonal holomorphic parameter, as RE or RE,IM.
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        a: Complex64,
        /// Dolbeault parameter; defaults to pi/4 (1 - i).
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        chi: Option<Complex64>,
        /// Parabolic weight in [0, 1/2).
        #[arg(long, allow_hyphen_values = true)]
        rho: f64,
        /// Path corpus file; the built-in corpus is used otherwise.
        #[arg(long, value_name = "FILE")]
        corpus: Option<PathBuf>,
        /// Restrict to these path labels.
        #[arg(long = "path", value_name = "LABEL")]
        paths: Vec<String>,
        /// Lattice on which the loops are drawn.
        #[arg(long, value_enum, default_value_t = LevelArg::Auto)]
        level: LevelArg,
    },
    /// Fricke residual of trace coordinates.
    Fricke {
        /// Trace of alpha.
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        x: Complex64,
        /// Trace of beta.
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        y: Complex64,
        /// Trace of beta alpha.
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        z: Complex64,
        /// Parabolic weight in [0, 1/2).
        #[arg(long, allow_hyphen_values = true)]
        rho: f64,
    },
    /// Solve Im tr h(alpha_hat) = Im tr h(beta_hat) = 0 near a_k.
    FindRealA {
        /// Parabolic weight in [0, 1/2).
        #[arg(long, allow_hyphen_values = true)]
        rho: f64,
        /// Nonzero branch index of the seed a_k.
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        k: i32,
        /// Dolbeault parameter; defaults to pi/4 (1 - i).
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        chi: Option<Complex64>,
    },
    /// Solve tr h(alpha) = tr h(beta) = 0.
    FindUnitaryA {
        /// Parabolic weight in [0, 1/2).
        #[arg(long, allow_hyphen_values = true)]
        rho: f64,
        /// Dolbeault parameter; defaults to pi/4 (1 - i).
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        chi: Option<Complex64>,
    },
    /// Conjugate the four-punctured-torus representation into SL(2,R).
    CertifySl2r {
        /// Parabolic weight in [0, 1/2).
        #[arg(long, allow_hyphen_values = true)]
        rho: f64,
        /// Parameter to certify; solved near a_k when omitted.
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        a: Option<Complex64>,
        /// Nonzero branch index of the seed a_k.
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        k: i32,
        /// Dolbeault parameter; defaults to pi/4 (1 - i).
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        chi: Option<Complex64>,
    },
    /// Schreier generators of the p-fold cover and the unitary reference checks.
    Covering {
        /// Odd cover degree, at least 3.
        #[arg(long)]
        p: u32,
    },
    /// Full pipeline at rho = 1/(2p).
    CertifyMain {
        /// Odd cover degree, at least 3.
        #[arg(long)]
        p: u32,
        /// Nonzero branch index of the seed a_k.
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        k: i32,
    },
    /// Recompute every check of a certificate from its stored matrices.
    Validate {
        /// Certificate written by one of the other commands.
        file: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum LevelArg {
    /// Double lattice for labels ending in `_hat`, base lattice otherwise.
    Auto,
    Base,
    Double,
}

/// Accepts `RE` or `RE,IM`.
fn parse_complex(s: &str) -> Result<Complex64, String> {
    let parts: Vec<&str> = s.split(',').collect();
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| format!("{t:?} is not a finite number"))
    };
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => Err(format!("expected RE or RE,IM, got {s:?}")),
    }
}

enum Failure {
    Usage(anyhow::Error),
    Compute(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Compute(e)
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(anyhow!(msg.into()))
}

fn check_rho(rho: f64) -> Result<(), Failure> {
    if (0.0..0.5).contains(&rho) {
        Ok(())
    } else {
        Err(usage(format!("--rho must lie in [0, 1/2), got {rho}")))
    }
}

fn check_p(p: u32) -> Result<(), Failure> {
    if p >= 3 && p % 2 == 1 {
        Ok(())
    } else {
        Err(usage(format!("--p must be odd and at least 3, got {p}")))
    }
}

fn check_k(k: i32) -> Result<(), Failure> {
    if k == 0 {
        Err(usage("--k must be nonzero"))
    } else {
        Ok(())
    }
}

/// Validates the arguments that do not need the configuration.
fn precheck(command: &Command) -> Result<(), Failure> {
    match command {
        Command::Holonomy { rho, .. } | Command::Fricke { rho, .. } | Command::FindUnitaryA { rho, .. } => {
            check_rho(*rho)
        }
        Command::FindRealA { rho, k, .. } | Command::CertifySl2r { rho, k, .. } => {
            check_rho(*rho)?;
            check_k(*k)
        }
        Command::Covering { p } => check_p(*p),
        Command::CertifyMain { p, k } => {
            check_p(*p)?;
            check_k(*k)
        }
        Command::Theta { .. } | Command::Validate { .. } => Ok(()),
    }
}

fn stage<T>(name: &str, r: realmon_core::Result<T>) -> anyhow::Result<T> {
    r.map_err(|e| anyhow!(e.at_stage(name)))
}

fn holonomy(
    a: Complex64,
    chi: Complex64,
    rho: f64,
    corpus: Option<&Path>,
    labels: &[String],
    level: LevelArg,
    cfg: &SolveConfig,
) -> Result<Certificate, Failure> {
    let corpus = match corpus {
        Some(p) => PathCorpus::load(p).map_err(|e| usage(e.to_string()))?,
        None => PathCorpus::standard(),
    };
    let selected: Vec<_> = if labels.is_empty() {
        corpus.paths.clone()
    } else {
        labels
            .iter()
            .map(|l| corpus.get(l).cloned().ok_or_else(|| usage(format!("no path labelled {l:?}"))))
            .collect::<Result<_, _>>()?
    };
    let family = ConnectionFamily::new(a, chi, rho).map_err(|e| usage(e.to_string()))?;
    let mut results = Vec::new();
    for path in &selected {
        let lattice = match level {
            LevelArg::Base => Lattice::base(),
            LevelArg::Double => Lattice::double(),
            LevelArg::Auto if path.label.ends_with("_hat") => Lattice::double(),
            LevelArg::Auto => Lattice::base(),
        };
        let h = stage(&format!("transport {}", path.label), transport(&family.on_lattice(lattice), path, &cfg.transport))?;
        results.push((path.label.clone(), h));
    }
    let params = [
        ("a", serde_json::to_value(a).expect("complex serializes")),
        ("chi", serde_json::to_value(chi).expect("complex serializes")),
        ("rho", serde_json::json!(rho)),
    ];
    Ok(certificate::holonomy_certificate(&params, &results, rho, cfg))
}

fn certify_sl2r(rho: f64, a: Option<Complex64>, k: i32, chi: Complex64, cfg: &SolveConfig) -> anyhow::Result<Certificate> {
    let a = match a {
        Some(a) => a,
        None => stage("find-real-a", solver::find_real_parameter(chi, rho, k, cfg))?.a,
    };
    let family = stage("connection", ConnectionFamily::new(a, chi, rho))?;
    let base = stage("holonomy", holonomy_generators(&family, Level::Base, &cfg.transport))?;
    let cover = subgroup_representation(&base);
    let realization = stage(
        "realize",
        realize_real(
            &cover,
            &RealizeConfig {
                trace_tol: cfg.trace_tol,
                word_depth: cfg.word_depth,
                ..RealizeConfig::default()
            },
        ),
    )?;
    Ok(certificate::sl2r_certificate(a, chi, rho, &base, &realization, cfg))
}

fn compute(command: &Command, cfg: &SolveConfig) -> Result<Certificate, Failure> {
    Ok(match command {
        Command::Theta { w } => certificate::theta_certificate(*w, cfg),
        Command::Holonomy {
            a,
            chi,
            rho,
            corpus,
            paths,
            level,
        } => holonomy(*a, chi.unwrap_or_else(chifix), *rho, corpus.as_deref(), paths, *level, cfg)?,
        Command::Fricke { x, y, z, rho } => certificate::fricke_certificate(*x, *y, *z, *rho, cfg),
        Command::FindRealA { rho, k, chi } => {
            let chi = chi.unwrap_or_else(chifix);
            let sol = stage("find-real-a", solver::find_real_parameter(chi, *rho, *k, cfg))?;
            let family = stage("connection", ConnectionFamily::new(sol.a, chi, *rho))?;
            let double = stage("holonomy", holonomy_generators(&family, Level::Double, &cfg.transport))?;
            certificate::real_parameter_certificate(&sol, *k, &double, cfg)
        }
        Command::FindUnitaryA { rho, chi } => {
            let chi = chi.unwrap_or_else(chifix);
            let sol = stage("find-unitary-a", solver::find_unitary_parameter(chi, *rho, cfg))?;
            let family = stage("connection", ConnectionFamily::new(sol.a, chi, *rho))?;
            let base = stage("holonomy", holonomy_generators(&family, Level::Base, &cfg.transport))?;
            let realization = solver::unitarize(&sol, cfg).ok().map(|r| r.0);
            certificate::unitary_parameter_certificate(&sol, &base, realization.as_ref(), cfg)
        }
        Command::CertifySl2r { rho, a, k, chi } => certify_sl2r(*rho, *a, *k, chi.unwrap_or_else(chifix), cfg)?,
        Command::Covering { p } => {
            let character = stage("covering", CyclicCharacter::torus(*p))?;
            let basis = stage("covering", reidemeister_schreier(&character))?;
            certificate::covering_certificate(*p, &basis, cfg)
        }
        Command::CertifyMain { p, k } => {
            let main = stage("certify-main", solver::certify_main(*p, *k, cfg))?;
            stage("certificate", certificate::main_certificate(&main, cfg))?
        }
        Command::Validate { .. } => unreachable!("validate does not compute"),
    })
}

fn command_name(command: &Command) -> &'static str {
    match command {
        Command::Theta { .. } => "theta",
        Command::Holonomy { .. } => "holonomy",
        Command::Fricke { .. } => "fricke",
        Command::FindRealA { .. } => "find-real-a",
        Command::FindUnitaryA { .. } => "find-unitary-a",
        Command::CertifySl2r { .. } => "certify-sl2r",
        Command::Covering { .. } => "covering",
        Command::CertifyMain { .. } => "certify-main",
        Command::Validate { .. } => "validate",
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}

fn validate_file(path: &Path) -> anyhow::Result<bool> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let cert = Certificate::from_json(&text).map_err(|e| anyhow!(e))?;
    let report = certificate::validate(&cert);
    println!("{} digest", verdict(report.digest_ok));
    for item in &report.items {
        println!("{} {}: {:.3e} (tolerance {:.1e})", verdict(item.passed), item.name, item.value, item.tolerance);
    }
    let ok = report.passed();
    println!("{}: {} of {} checks pass", cert.command, report.items.iter().filter(|i| i.passed).count(), report.items.len());
    Ok(ok)
}

fn run(cli: Cli) -> Result<bool, Failure> {
    precheck(&cli.command)?;
    if let Command::Validate { file } = &cli.command {
        return Ok(validate_file(file)?);
    }
    let cfg = config::load(cli.config.as_deref()).map_err(Failure::Usage)?;
    let name = command_name(&cli.command);
    let mut cert = compute(&cli.command, &cfg)?;
    cert.seal(&chrono::Utc::now().to_rfc3339());

    for rec in &cert.checks {
        println!("{} {}: {:.3e} (tolerance {:.1e})", verdict(rec.passed), rec.name, rec.value, rec.tolerance);
    }
    let out = cli.out.unwrap_or_else(|| PathBuf::from(format!("realmon-{name}.json")));
    std::fs::write(&out, cert.to_json()).with_context(|| format!("writing {}", out.display()))?;
    println!("{name}: {} -> {}", if cert.passed { "all checks pass" } else { "some checks FAIL" }, out.display());
    Ok(cert.passed)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(e)) => {
            eprintln!("usage error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_arguments() {
        assert_eq!(parse_complex("2").unwrap(), Complex64::new(2.0, 0.0));
        assert_eq!(parse_complex("-0.5, 1e-3").unwrap(), Complex64::new(-0.5, 1e-3));
        assert!(parse_complex("1,2,3").is_err());
        assert!(parse_complex("nan").is_err());
    }

    #[test]
    fn arguments_are_checked_before_computing() {
        assert!(matches!(precheck(&Command::Covering { p: 4 }), Err(Failure::Usage(_))));
        assert!(matches!(
            precheck(&Command::FindRealA {
                rho: 0.7,
                k: 1,
                chi: None
            }),
            Err(Failure::Usage(_))
        ));
        assert!(precheck(&Command::CertifyMain { p: 3, k: 1 }).is_ok());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn stage_errors_carry_the_stage_name() {
        let e = stage::<()>("fricke", Err(realmon_core::Error::InvalidParameter("x".into()))).unwrap_err();
        assert!(format!("{e:#}").contains("fricke"));
    }
}
