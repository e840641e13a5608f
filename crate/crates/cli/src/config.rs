//! Command-line flags and the resolved run configuration.

use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use resurgo::algebra::parse::parse_ratfunc;
use resurgo::algebra::{BigComplex, DEFAULT_PRECISION};
use serde::Serialize;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Expand,
    Germ,
    Pade,
    Singulant,
    Stokes,
    Transseries,
    Jump,
    Validate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Continuation when a trans-series component predicts the jump, rays otherwise.
    Auto,
    /// ODE continuation from two points off the Stokes line.
    Continuation,
    /// Laplace sums of the Padé-continued germ along two rays.
    Rays,
}

#[derive(Debug, Parser)]
#[command(name = "resurgo", version, about = "Borel-plane exponential asymptotics for singularly perturbed linear ODEs")]
pub struct Args {
    #[arg(value_enum)]
    pub command: Command,
    /// ODE spec file (JSON).
    #[arg(long)]
    pub spec: PathBuf,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Working precision in bits.
    #[arg(long)]
    pub precision: Option<u32>,
    /// Number of perturbative orders.
    #[arg(long)]
    pub terms: Option<usize>,
    /// Padé orders as L:M.
    #[arg(long, default_value = "20:21")]
    pub pade: String,
    /// Probe point RE,IM (repeatable); exact rationals like -1/2 are accepted.
    #[arg(long = "z", allow_hyphen_values = true)]
    pub z: Vec<String>,
    /// Comma-separated list of ε values.
    #[arg(long, allow_hyphen_values = true)]
    pub eps: Option<String>,
    /// Rectangle RE0,IM0,RE1,IM1 for Stokes graphs.
    #[arg(long, default_value = "-2,-2,2,2", allow_hyphen_values = true)]
    pub domain: String,
    /// Relative tolerance for validation.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// How jumps are measured.
    #[arg(long, value_enum, default_value = "auto")]
    pub mode: Mode,
    /// Distance of the continuation start points from the probe.
    #[arg(long, default_value_t = 1.5)]
    pub offset: f64,
    /// Half-angle between the two Laplace rays.
    #[arg(long, default_value_t = 0.1)]
    pub spread: f64,
}

/// Everything a run depends on; recorded in every output.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub spec: PathBuf,
    pub out: PathBuf,
    pub precision: u32,
    pub terms: usize,
    pub pade: (usize, usize),
    pub domain: [f64; 4],
    pub eps: Vec<String>,
    pub z: Vec<String>,
    pub tol: f64,
    pub mode: Mode,
    pub offset: f64,
    pub spread: f64,
}

pub const DEFAULT_TERMS: usize = 40;

fn parse_real(text: &str, what: &str) -> Result<BigComplex, CliError> {
    let bad = || CliError::Parse(format!("{what}: cannot read '{text}' as a number"));
    let r = parse_ratfunc(text.trim()).map_err(|_| bad())?;
    let c = r.as_constant().ok_or_else(bad)?;
    Ok(c.to_complex(512))
}

/// Parses `RE,IM` (or a lone real) exactly, then rounds to `prec` bits.
pub fn parse_point(text: &str, prec: u32) -> Result<BigComplex, CliError> {
    let parts: Vec<&str> = text.split(',').collect();
    let v = match parts.as_slice() {
        [re] => parse_real(re, "point")?,
        [re, im] => &parse_real(re, "point")? + &parse_real(im, "point")?.mul_i(),
        _ => return Err(CliError::Parse(format!("point '{text}' is not RE,IM"))),
    };
    Ok(v.with_prec(prec))
}

impl RunConfig {
    /// Resolves flags against the spec file's own settings. Precision comes
    /// from the flag, then the spec file, then `RESURGO_PRECISION`, then
    /// the built-in default.
    pub fn resolve(args: &Args, spec_precision: Option<u32>, spec_terms: Option<usize>) -> Result<RunConfig, CliError> {
        let env = match std::env::var("RESURGO_PRECISION") {
            Ok(v) => Some(v.trim().parse::<u32>().map_err(|_| CliError::Parse(format!("RESURGO_PRECISION: '{v}' is not an integer")))?),
            Err(_) => None,
        };
        let precision = args.precision.or(spec_precision).or(env).unwrap_or(DEFAULT_PRECISION);
        if precision < 64 {
            return Err(CliError::Parse(format!("precision {precision} is below 64 bits")));
        }
        let pade = match args.pade.split_once(':').map(|(l, m)| (l.trim().parse::<usize>(), m.trim().parse::<usize>())) {
            Some((Ok(l), Ok(m))) => (l, m),
            _ => return Err(CliError::Parse(format!("--pade '{}' is not L:M", args.pade))),
        };
        let domain: Vec<f64> = args.domain.split(',').map(|s| s.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| CliError::Parse(format!("--domain '{}' is not RE0,IM0,RE1,IM1", args.domain)))?;
        let domain: [f64; 4] = domain.try_into().map_err(|_| CliError::Parse(format!("--domain '{}' needs four numbers", args.domain)))?;
        if !(domain[0] < domain[2] && domain[1] < domain[3]) {
            return Err(CliError::Parse("--domain must have RE0 < RE1 and IM0 < IM1".into()));
        }
        for (name, v) in [("--tol", args.tol), ("--offset", args.offset), ("--spread", args.spread)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Parse(format!("{name} must be positive")));
            }
        }
        let eps: Vec<String> = args.eps.as_deref().map(|s| s.split(',').map(|x| x.trim().to_string()).filter(|x| !x.is_empty()).collect()).unwrap_or_default();
        let cfg = RunConfig {
            command: args.command,
            spec: args.spec.clone(),
            out: args.out.clone(),
            precision,
            terms: args.terms.or(spec_terms).unwrap_or(DEFAULT_TERMS),
            pade,
            domain,
            eps,
            z: args.z.clone(),
            tol: args.tol,
            mode: args.mode,
            offset: args.offset,
            spread: args.spread,
        };
        // fail early on unreadable probes
        cfg.probes()?;
        cfg.epsilons()?;
        Ok(cfg)
    }

    pub fn probes(&self) -> Result<Vec<BigComplex>, CliError> {
        self.z.iter().map(|s| parse_point(s, self.precision)).collect()
    }

    pub fn epsilons(&self) -> Result<Vec<BigComplex>, CliError> {
        self.eps.iter().map(|s| Ok(parse_real(s, "eps")?.with_prec(self.precision))).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("run config serializes")
    }
}
