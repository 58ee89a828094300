//! Command-line grammar. Every subcommand also accepts `--config FILE` with
//! a JSON object mirroring its flags (kebab-case keys); the file then
//! replaces the command line entirely.

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use fpq::ServiceDistribution;
use serde::Deserialize;

use crate::CmdError;

/// Service-distribution argument: the command line takes the compact
/// `det:V | exp:RATE | hyper:p..:r..` spec; JSON configs may use either that
/// string or the canonical object form `{"kind": "exponential", "rate": 1.0}`.
#[derive(Clone, Debug, PartialEq)]
pub struct DistArg(pub ServiceDistribution);

impl Default for DistArg {
    fn default() -> Self {
        DistArg(ServiceDistribution::exponential(1.0).expect("valid"))
    }
}

impl FromStr for DistArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        parse_dist(s).map(DistArg).map_err(|e| e.to_string())
    }
}

impl<'de> Deserialize<'de> for DistArg {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Spec(String),
            Object(ServiceDistribution),
        }
        match Repr::deserialize(de)? {
            Repr::Spec(s) => s.parse().map_err(serde::de::Error::custom),
            Repr::Object(d) => {
                d.validate().map_err(serde::de::Error::custom)?;
                Ok(DistArg(d))
            }
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "fpq",
    version,
    about = "Finite-pool queue simulation and heavy-traffic numerics"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Simulate one embedded queue path and export it rescaled, with the
    /// drift curve q + βt - γt².
    SamplePath(SamplePathArgs),
    /// Monte Carlo over first-busy-period sizes (scaled in the critical
    /// regime, raw when --lambda fixes the arrival rate).
    BusyPeriodMc(BusyPeriodArgs),
    /// Evaluate the closed-form first-passage density: mean and/or a curve.
    Airy(AiryArgs),
    /// Busy-period kernel density estimates for several pool sizes against
    /// the exact limit density, on a common grid.
    Figure2(Figure2Args),
    /// Monte Carlo hitting times of the limiting diffusion.
    DiffusionMc(DiffusionArgs),
    /// Run the built-in invariant suite.
    Check(CheckArgs),
}

macro_rules! impl_resolve {
    ($t:ty) => {
        impl $t {
            /// Replace the flags with the JSON config when one is given.
            pub fn resolve(self) -> Result<Self, CmdError> {
                match &self.config {
                    None => Ok(self),
                    Some(path) => {
                        let text = std::fs::read_to_string(path)?;
                        serde_json::from_str(&text)
                            .map_err(|e| CmdError::Usage(format!("bad config {path:?}: {e}")))
                    }
                }
            }
        }
    };
}

#[derive(Args, Debug, Clone, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
#[derive(Default)]
pub struct SamplePathArgs {
    /// Pool size n
    #[arg(long)]
    pub n: Option<usize>,
    /// Arrival exponent α in [0, 1]
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Criticality offset β
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// Initial scaled queue q
    #[arg(long, default_value_t = 1.0)]
    pub q: f64,
    /// Service distribution: det:V | exp:RATE | hyper:p1,p2,..:r1,r2,..
    #[arg(long)]
    pub dist: Option<DistArg>,
    /// Master seed (required for reproducibility)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of services to simulate; defaults to 3·n^{2/3}
    #[arg(long)]
    pub horizon_steps: Option<u64>,
    /// Rescaled-path CSV (t, q_scaled, drift); stdout when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Raw embedded-path CSV (k, A, N, Q, served_index, parent_index)
    #[arg(long)]
    pub raw_out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}
impl_resolve!(SamplePathArgs);

#[derive(Args, Debug, Clone, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
#[derive(Default)]
pub struct BusyPeriodArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub dist: Option<DistArg>,
    /// Replications
    #[arg(long)]
    pub reps: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub q: f64,
    /// Fixed arrival rate: switches to the nonscaled queue (initial queue
    /// round(q), raw busy-period output)
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Samples CSV (replication, bp, scaled_bp)
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}
impl_resolve!(BusyPeriodArgs);

#[derive(Args, Debug, Clone, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
#[derive(Default)]
pub struct AiryArgs {
    /// Derive (γ, σ) from a service distribution at this α
    #[arg(long)]
    pub dist: Option<DistArg>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Quadratic drift coefficient γ (alternative to --dist/--alpha)
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Noise variance σ²
    #[arg(long)]
    pub sigma2: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub q: f64,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// Print the mean hitting time (4 decimals)
    #[arg(long)]
    #[serde(default)]
    pub mean: bool,
    /// Density grid START:END:POINTS; written as CSV (t, density)
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}
impl_resolve!(AiryArgs);

#[derive(Args, Debug, Clone, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
#[derive(Default)]
pub struct Figure2Args {
    /// Pool sizes, comma separated (e.g. 100,1000,10000)
    #[arg(long)]
    pub n_list: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Replications per pool size (the reference figure uses 10^6;
    /// the desk-scale default is 10^5)
    #[arg(long, default_value_t = 100_000)]
    #[serde(default = "default_reps")]
    pub reps: u64,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = "exp:1")]
    #[serde(default = "default_dist")]
    pub dist: DistArg,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub q: f64,
    /// KDE/density grid START:END:POINTS
    #[arg(long, default_value = "0.025:4.5:180")]
    pub grid: String,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}
impl_resolve!(Figure2Args);

#[derive(Args, Debug, Clone, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
#[derive(Default)]
pub struct DiffusionArgs {
    #[arg(long, default_value_t = 1.0)]
    pub q: f64,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub sigma2: Option<f64>,
    /// Alternative to --gamma/--sigma2: derive from a distribution at α
    #[arg(long)]
    pub dist: Option<DistArg>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, default_value_t = 1e-4)]
    pub dt: f64,
    #[arg(long, default_value_t = 30.0)]
    pub horizon: f64,
    #[arg(long)]
    pub reps: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Brownian-bridge crossing detection instead of the plain grid rule
    #[arg(long)]
    #[serde(default)]
    pub bridge: bool,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Hitting-time samples CSV (single column)
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}
impl_resolve!(DiffusionArgs);

#[derive(Args, Debug, Clone, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
#[derive(Default)]
pub struct CheckArgs {
    #[arg(long, default_value_t = 0)]
    #[serde(default)]
    pub seed: u64,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}
impl_resolve!(CheckArgs);

fn default_reps() -> u64 {
    100_000
}

fn default_dist() -> DistArg {
    DistArg::default()
}

/// Required-argument helper: present either on the command line or in the
/// config file.
pub fn require<T: Clone>(v: &Option<T>, name: &str) -> Result<T, CmdError> {
    v.clone()
        .ok_or_else(|| CmdError::Usage(format!("--{name} is required")))
}

/// Parse `det:V`, `exp:RATE` or `hyper:p1,p2,..:r1,r2,..`.
pub fn parse_dist(spec: &str) -> Result<ServiceDistribution, CmdError> {
    let bad = |m: String| CmdError::Usage(m);
    let mut parts = spec.splitn(2, ':');
    let kind = parts.next().unwrap_or("");
    let rest = parts
        .next()
        .ok_or_else(|| bad(format!("distribution '{spec}' missing parameters")))?;
    let dist = match kind {
        "det" | "deterministic" => {
            let v: f64 = rest
                .parse()
                .map_err(|_| bad(format!("bad deterministic value '{rest}'")))?;
            ServiceDistribution::deterministic(v)
        }
        "exp" | "exponential" => {
            let r: f64 = rest
                .parse()
                .map_err(|_| bad(format!("bad exponential rate '{rest}'")))?;
            ServiceDistribution::exponential(r)
        }
        "hyper" | "hyperexponential" => {
            let mut halves = rest.splitn(2, ':');
            let probs = parse_f64_list(halves.next().unwrap_or(""))?;
            let rates = parse_f64_list(
                halves
                    .next()
                    .ok_or_else(|| bad("hyper needs probs and rates".into()))?,
            )?;
            ServiceDistribution::hyperexponential(probs, rates)
        }
        other => return Err(bad(format!("unknown distribution kind '{other}'"))),
    };
    dist.map_err(|e| bad(format!("invalid distribution '{spec}': {e}")))
}

pub fn parse_f64_list(s: &str) -> Result<Vec<f64>, CmdError> {
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| CmdError::Usage(format!("bad number '{tok}'")))
        })
        .collect()
}

pub fn parse_usize_list(s: &str) -> Result<Vec<usize>, CmdError> {
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<usize>()
                .map_err(|_| CmdError::Usage(format!("bad integer '{tok}'")))
        })
        .collect()
}

/// Parse START:END:POINTS into a uniform grid.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CmdError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(CmdError::Usage(format!(
            "grid '{spec}' must be START:END:POINTS"
        )));
    }
    let start: f64 = parts[0]
        .parse()
        .map_err(|_| CmdError::Usage(format!("bad grid start '{}'", parts[0])))?;
    let end: f64 = parts[1]
        .parse()
        .map_err(|_| CmdError::Usage(format!("bad grid end '{}'", parts[1])))?;
    let points: usize = parts[2]
        .parse()
        .map_err(|_| CmdError::Usage(format!("bad grid point count '{}'", parts[2])))?;
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN-rejecting
    if points < 2 || !(end > start) {
        return Err(CmdError::Usage("grid needs end > start and >= 2 points".into()));
    }
    let h = (end - start) / (points - 1) as f64;
    Ok((0..points).map(|i| start + i as f64 * h).collect())
}
