//! `fbh`: command-line verifier for f-biharmonic hypersurfaces in conformally
//! flat spaces, built on [`fbh_core`].
//!
//! Exit codes: 0 when the claim holds, 1 when it is violated, 2 on usage or
//! parse errors.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::ffi::OsString;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub mod commands;
pub mod corpus;
pub mod report;
pub mod suites;

pub use report::Format;

#[derive(Debug, Parser)]
#[command(name = "fbh", version, about = "Verify f-biharmonic hypersurfaces in conformally flat spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify a catalogued family or a custom hypersurface on seeded samples.
    Verify(VerifyArgs),
    /// Sample sectional curvatures of a conformal factor on random 2-planes.
    Curvature(CurvatureArgs),
    /// Exact reduction of a power-law ansatz to a quadratic in the exponent.
    Ansatz(AnsatzArgs),
    /// Run the built-in oracle, curvature and catalogue suites.
    Selftest(SelftestArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PerturbArg {
    None,
    Exponent,
    Weight,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Expect {
    Negative,
    Zero,
    Positive,
}

impl Expect {
    pub fn as_str(self) -> &'static str {
        match self {
            Expect::Negative => "negative",
            Expect::Zero => "zero",
            Expect::Positive => "positive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EquationArg {
    Pq1,
    Pc1,
}

fn parse_binding(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got `{s}`"))?;
    let v: f64 = v.trim().parse().map_err(|_| format!("`{v}` is not a number"))?;
    let k = k.trim();
    if k.is_empty() {
        return Err(format!("missing parameter name in `{s}`"));
    }
    Ok((k.to_string(), v))
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Catalogued family name.
    #[arg(long, conflicts_with_all = ["sigma", "hyperplane", "immersion", "guard"])]
    pub family: Option<String>,
    /// Hypersurface dimension.
    #[arg(long)]
    pub m: Option<usize>,
    /// Parameter binding NAME=VALUE (repeatable).
    #[arg(long = "param", value_parser = parse_binding)]
    pub params: Vec<(String, f64)>,
    /// Conformal factor σ of h = σ⁻²h₀.
    #[arg(long)]
    pub sigma: Option<String>,
    /// Hyperplane z = Σ aᵢxᵢ + a_{m+1}, written "a1,...,am;a_{m+1}".
    #[arg(long, conflicts_with = "immersion")]
    pub hyperplane: Option<String>,
    /// Chart components "e1|...|e_{m+1}" in x1..xm.
    #[arg(long)]
    pub immersion: Option<String>,
    /// Weight function f.
    #[arg(long, default_value = "1")]
    pub f: String,
    /// Ambient domain guard, required positive (repeatable).
    #[arg(long)]
    pub guard: Vec<String>,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, env = "FBH_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Chart box "lo,hi[;lo,hi...]"; a single pair applies to every coordinate.
    #[arg(long = "box")]
    pub domain: Option<String>,
    /// Worker threads for residual evaluation (0 = all cores).
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    #[arg(long)]
    pub tol_verify: Option<f64>,
    #[arg(long, default_value_t = fbh_core::fbiharmonic::TOL_FALSIFY)]
    pub tol_falsify: f64,
    #[arg(long, value_enum, default_value_t = PerturbArg::None)]
    pub perturb: PerturbArg,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[arg(long)]
    pub output: Option<std::path::PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CurvatureArgs {
    #[arg(long, conflicts_with = "family")]
    pub sigma: Option<String>,
    /// Take σ, guards and parameters from a catalogued family.
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub m: Option<usize>,
    /// Ambient dimension.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long = "param", value_parser = parse_binding)]
    pub params: Vec<(String, f64)>,
    #[arg(long)]
    pub guard: Vec<String>,
    /// Ambient box "lo,hi[;lo,hi...]"; default x ∈ [−2,2], z ∈ [0.5,5].
    #[arg(long = "box")]
    pub domain: Option<String>,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[arg(long, env = "FBH_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum)]
    pub expect: Option<Expect>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[arg(long)]
    pub output: Option<std::path::PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct AnsatzArgs {
    #[arg(long, value_enum)]
    pub equation: EquationArg,
    #[arg(long, allow_negative_numbers = true)]
    pub m: i64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[arg(long)]
    pub output: Option<std::path::PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SelftestArgs {
    #[arg(long, env = "FBH_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, hide = true)]
    pub inject_christoffel_sign_flip: bool,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match commands::execute(&cli.command) {
        Ok(out) => {
            let code = if out.passed { 0 } else { 1 };
            if let Some(msg) = &out.message {
                eprintln!("{msg}");
            }
            code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
