use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Parses a finite decimal, or the token `pi`.
pub fn parse_length(s: &str) -> Result<f64, String> {
    let v = if s.trim() == "pi" { std::f64::consts::PI } else { parse_finite(s)? };
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("length must be positive, got {s}"))
    }
}

pub fn parse_finite(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("not a decimal number: {s}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("not a finite number: {s}"))
    }
}

#[derive(Debug, Parser)]
#[command(name = "cattaneo", version, about = "Spectral experiments for the fourth-order Cattaneo heat equation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// CSV destination; standard output when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dirichlet-Laplacian eigenvalues on an interval or box.
    #[command(allow_negative_numbers = true)]
    Spectrum(SpectrumArgs),
    /// The exceptional set for c or for σ.
    #[command(allow_negative_numbers = true)]
    Exceptional(ExceptionalArgs),
    /// Homogeneous-boundary evolution of modal initial data.
    #[command(allow_negative_numbers = true)]
    Solve(SolveArgs),
    /// Evolution under a Dirichlet boundary signal on an interval.
    #[command(allow_negative_numbers = true)]
    Boundary(BoundaryArgs),
    /// c approaching 1/λ² from both sides.
    #[command(allow_negative_numbers = true)]
    Limit1(Limit1Args),
    /// The sequence c_k = 1/λ_k² + γ/λ_k³.
    #[command(allow_negative_numbers = true)]
    Limit2(Limit2Args),
    /// The sequence σ_k = 5/k² on the quartic example.
    #[command(allow_negative_numbers = true)]
    Limit3(Limit3Args),
    /// Distance to the heat solution along a σ sequence.
    #[command(allow_negative_numbers = true)]
    Heatcmp(HeatcmpArgs),
    /// Boundary bursts and the mass they leave in an interior subinterval.
    #[command(allow_negative_numbers = true)]
    Propagation(PropagationArgs),
    /// Whole-line Fourier mode near the singular frequency 1/√c.
    #[command(allow_negative_numbers = true)]
    Wholeline(WholelineArgs),
    /// Seeded randomized checks against the oracles.
    #[command(allow_negative_numbers = true)]
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Args)]
pub struct DomainArgs {
    /// Side length, repeated once per axis (`pi` allowed).
    #[arg(long = "L", value_parser = parse_length, default_value = "pi")]
    pub lengths: Vec<f64>,

    /// Number of retained modes.
    #[arg(long = "N", default_value_t = 128)]
    pub truncation: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MapKind {
    /// a = χ/σ, b = χ²/(σγρ), c = σ/γρ
    M1,
    /// σθ'' + χθ' = (χ²/γρ)Δθ − (σ²/γρ)Δθ''
    M2,
}

/// Either `--a --b --c`, or `--chi --sigma --gamma-rho` with `--map`.
#[derive(Debug, Clone, Args)]
pub struct ParamArgs {
    #[arg(long, value_parser = parse_finite)]
    pub a: Option<f64>,
    #[arg(long, value_parser = parse_finite)]
    pub b: Option<f64>,
    #[arg(long, value_parser = parse_finite)]
    pub c: Option<f64>,
    #[arg(long, value_parser = parse_finite)]
    pub chi: Option<f64>,
    #[arg(long, value_parser = parse_finite)]
    pub sigma: Option<f64>,
    #[arg(long = "gamma-rho", value_parser = parse_finite)]
    pub gamma_rho: Option<f64>,
    #[arg(long, value_enum)]
    pub map: Option<MapKind>,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub domain: DomainArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SetKind {
    C,
    Sigma,
}

#[derive(Debug, Args)]
pub struct ExceptionalArgs {
    #[command(flatten)]
    pub domain: DomainArgs,
    #[arg(long, value_enum, default_value = "c")]
    pub kind: SetKind,
    /// γρ, needed for `--kind sigma`.
    #[arg(long = "gamma-rho", value_parser = parse_finite)]
    pub gamma_rho: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub domain: DomainArgs,
    #[command(flatten)]
    pub params: ParamArgs,
    /// Modal coefficients of θ(0), comma separated; missing modes are zero.
    #[arg(long, value_parser = parse_finite, value_delimiter = ',', allow_hyphen_values = true)]
    pub theta0: Vec<f64>,
    /// Modal coefficients of θ'(0).
    #[arg(long, value_parser = parse_finite, value_delimiter = ',', allow_hyphen_values = true, default_value = "1")]
    pub theta1: Vec<f64>,
    /// Output times, comma separated.
    #[arg(long, value_parser = parse_finite, value_delimiter = ',', allow_hyphen_values = true, default_value = "0,0.5,1")]
    pub times: Vec<f64>,
    /// Distance to ℰ under which c is reported as near-exceptional.
    #[arg(long, value_parser = parse_finite, default_value = "1e-3")]
    pub threshold: f64,
    /// Solve at an exceptional c when every degenerate mode is compatible.
    #[arg(long)]
    pub allow_exceptional: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProfileKind {
    Constant,
    Sine,
    Polynomial,
    Step,
    Burst,
}

#[derive(Debug, Args)]
pub struct BoundaryArgs {
    #[command(flatten)]
    pub domain: DomainArgs,
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, value_parser = parse_finite, default_value = "1")]
    pub g0: f64,
    #[arg(long, value_parser = parse_finite, default_value = "0")]
    pub g1: f64,
    #[arg(long, value_enum, default_value = "sine")]
    pub profile: ProfileKind,
    /// Profile parameters: constant value; sine ω,φ; polynomial coefficients;
    /// step center,width; burst rate.
    #[arg(long = "profile-params", value_parser = parse_finite, value_delimiter = ',', allow_hyphen_values = true, default_value = "1")]
    pub profile_params: Vec<f64>,
    #[arg(long, value_parser = parse_finite, default_value = "1")]
    pub t: f64,
    /// Convolution quadrature step; defaults to 1e-3·t.
    #[arg(long = "quad-step", value_parser = parse_finite)]
    pub quad_step: Option<f64>,
    /// Also run the classical-solution residual check on this many time points.
    #[arg(long)]
    pub check: Option<usize>,
}

#[derive(Debug, Args)]
pub struct Limit1Args {
    #[arg(long, value_parser = parse_finite, default_value = "1")]
    pub a: f64,
    #[arg(long, value_parser = parse_finite, default_value = "1")]
    pub b: f64,
    #[arg(long = "lambda-sq", value_parser = parse_finite, default_value = "1")]
    pub lambda_sq: f64,
    #[arg(long, value_parser = parse_finite, default_value = "0.5")]
    pub t: f64,
    /// c = (1 ± 10⁻ʲ)/λ² for j in jmin..=jmax.
    #[arg(long, default_value_t = 2)]
    pub jmin: i32,
    #[arg(long, default_value_t = 6)]
    pub jmax: i32,
    /// Explicit c values, replacing the j scan.
    #[arg(long, value_parser = parse_finite, value_delimiter = ',', allow_hyphen_values = true)]
    pub cs: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct Limit2Args {
    #[arg(long = "L", value_parser = parse_length, default_value = "pi")]
    pub lengths: Vec<f64>,
    #[arg(long, value_parser = parse_finite, default_value = "1")]
    pub a: f64,
    #[arg(long, value_parser = parse_finite, default_value = "1")]
    pub b: f64,
    #[arg(long, value_parser = parse_finite, default_value = "1")]
    pub gamma: f64,
    #[arg(long, default_value_t = 4)]
    pub kmin: usize,
    #[arg(long, default_value_t = 40)]
    pub kmax: usize,
    #[arg(long, value_parser = parse_finite, default_value = "0.1")]
    pub t: f64,
    /// Report the smallest k with |θ_k(t)|/k above this bound.
    #[arg(long, value_parser = parse_finite, default_value = "1e3")]
    pub bound: f64,
}

#[derive(Debug, Args)]
pub struct Limit3Args {
    #[arg(long, default_value_t = 1)]
    pub kmin: usize,
    #[arg(long, default_value_t = 12)]
    pub kmax: usize,
    #[arg(long, value_parser = parse_finite, default_value = "0.1")]
    pub t: f64,
}

#[derive(Debug, Args)]
pub struct HeatcmpArgs {
    #[arg(long = "N", default_value_t = 128)]
    pub truncation: usize,
    #[arg(long, value_parser = parse_finite, default_value = "2")]
    pub chi: f64,
    #[arg(long = "gamma-rho", value_parser = parse_finite, default_value = "4")]
    pub gamma_rho: f64,
    /// σ = 5/k² for k in kmin..=kmax, unless `--sigmas` is given.
    #[arg(long, default_value_t = 1)]
    pub kmin: usize,
    #[arg(long, default_value_t = 12)]
    pub kmax: usize,
    #[arg(long, value_parser = parse_finite, value_delimiter = ',', allow_hyphen_values = true)]
    pub sigmas: Option<Vec<f64>>,
    #[arg(long, value_parser = parse_finite, default_value = "0.1")]
    pub t: f64,
}

#[derive(Debug, Args)]
pub struct PropagationArgs {
    #[arg(long = "L", value_parser = parse_length, default_value = "pi")]
    pub length: f64,
    #[arg(long = "N", default_value_t = 256)]
    pub truncation: usize,
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, value_parser = parse_finite, default_value = "1")]
    pub g0: f64,
    #[arg(long, value_parser = parse_finite, default_value = "0")]
    pub g1: f64,
    #[arg(long = "T", value_parser = parse_finite, default_value = "0.05")]
    pub horizon: f64,
    /// Burst indices n = 2ʲ for j in 1..=jmax.
    #[arg(long, default_value_t = 12)]
    pub jmax: u32,
    #[arg(long, value_parser = parse_finite, default_value = "1")]
    pub lo: f64,
    #[arg(long, value_parser = parse_finite, default_value = "2")]
    pub hi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SideKind {
    Below,
    Above,
}

#[derive(Debug, Args)]
pub struct WholelineArgs {
    #[arg(long, value_parser = parse_finite, default_value = "1")]
    pub a: f64,
    #[arg(long, value_parser = parse_finite, default_value = "1")]
    pub b: f64,
    #[arg(long, value_parser = parse_finite, default_value = "0.5")]
    pub c: f64,
    #[arg(long, value_parser = parse_finite, default_value = "1")]
    pub t: f64,
    #[arg(long, default_value_t = 1)]
    pub jmin: i32,
    #[arg(long, default_value_t = 20)]
    pub jmax: i32,
    #[arg(long, value_enum, default_value = "below")]
    pub side: SideKind,
    #[arg(long, value_parser = parse_finite, default_value = "1")]
    pub w1: f64,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 200)]
    pub cases: usize,
}
