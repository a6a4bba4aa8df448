use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fpp_core::C64;
use serde::{Deserialize, Serialize};

/// Seeded experiments on linear maps that preserve fixed products.
///
/// Exit status: 0 Pass, 1 Fail, 2 Infeasible, 3 usage or I/O error.
#[derive(Parser, Debug)]
#[command(name = "fpp", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Everything needed to reproduce a run. Serialized into every report.
#[derive(Subcommand, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Rank factorization C = Σ vᵢ⊗fᵢ of a given or sampled matrix.
    Factorize(FactorizeArgs),
    /// Factorization certificates reducing fixed-product preservation to
    /// zero-product preservation for sampled pairs QP = 0.
    Prop21(Prop21Args),
    /// Product preservation at C, zero products, annihilators and rank.
    VerifyPreserver(PreserverArgs),
    /// Zero / invertible dichotomies between C and the inferred D.
    Thm33(PreserverArgs),
    /// Staged classification pipeline for invertible C.
    Thm41(PreserverArgs),
    /// Hua's identity on sampled admissible matrices.
    Hua(HuaArgs),
    /// Experiments on the pointwise algebra ℂ^m.
    Pointwise(PointwiseArgs),
    /// Re-run the configuration embedded in a report and compare.
    Revalidate(RevalidateArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Factorize(_) => "factorize",
            Command::Prop21(_) => "prop21",
            Command::VerifyPreserver(_) => "verify-preserver",
            Command::Thm33(_) => "thm33",
            Command::Thm41(_) => "thm41",
            Command::Hua(_) => "hua",
            Command::Pointwise(_) => "pointwise",
            Command::Revalidate(_) => "revalidate",
        }
    }

    pub fn common(&self) -> &Common {
        match self {
            Command::Factorize(a) => &a.common,
            Command::Prop21(a) => &a.common,
            Command::VerifyPreserver(a) | Command::Thm33(a) | Command::Thm41(a) => &a.common,
            Command::Hua(a) => &a.common,
            Command::Pointwise(a) => &a.common,
            Command::Revalidate(a) => &a.common,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

/// Options shared by every subcommand. `out` and `no_timestamp` only affect
/// where and how the report is written, so they are not part of the
/// recorded configuration.
#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Common {
    /// Master seed; sample i uses a sub-stream derived from it.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of random samples (default depends on the subcommand).
    #[arg(long)]
    pub samples: Option<usize>,
    /// Residual tolerance for Pass/Fail.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Omit the timestamp so identical configurations give identical bytes.
    #[arg(long)]
    #[serde(skip)]
    pub no_timestamp: bool,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorizeArgs {
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    /// Rank of the sampled C (ignored with --C).
    #[arg(long = "rank-c", default_value_t = 2)]
    pub rank_c: usize,
    /// Matrix file for C.
    #[arg(long = "C", value_name = "FILE")]
    pub c: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prop21Args {
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    #[arg(long = "rank-c", default_value_t = 1)]
    pub rank_c: usize,
    /// Rank of the sampled Q; random in 1..=n−1 per instance when absent.
    #[arg(long = "rank-q")]
    pub rank_q: Option<usize>,
    /// Matrix file for C (overrides --rank-c).
    #[arg(long = "C", value_name = "FILE")]
    pub c: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// Φ(T) = αUTU⁻¹ with D = α²UCU⁻¹.
    Conj,
    /// Φ(T) = αDUTᵗU⁻¹ with D solved from C; needs invertible C.
    Tconj,
    /// Ginibre superoperator with an unrelated random D (negative control).
    Random,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreserverArgs {
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = Family::Conj)]
    pub family: Family,
    /// Scalar α as RE or RE,IM; random when absent.
    #[arg(long, value_parser = parse_alpha, value_name = "RE,IM")]
    pub alpha: Option<[f64; 2]>,
    /// Rank of the sampled C (default n).
    #[arg(long = "rank-c")]
    pub rank_c: Option<usize>,
    #[arg(long = "U", value_name = "FILE")]
    pub u: Option<PathBuf>,
    /// Declared target D (default: the family's D).
    #[arg(long = "D", value_name = "FILE")]
    pub d: Option<PathBuf>,
    #[arg(long = "C", value_name = "FILE")]
    pub c: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HuaArgs {
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointwiseKind {
    /// Φ(f)(i) = f(⌈i/2⌉): multiplicative, not injective.
    Halving,
    /// Composition with a random permutation.
    Permutation,
    /// Random invertible weight times a random permutation.
    Weighted,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointwiseArgs {
    #[arg(long, default_value_t = 6)]
    pub m: usize,
    #[arg(long, value_enum, default_value_t = PointwiseKind::Permutation)]
    pub map: PointwiseKind,
    /// Number of zero coordinates in the sampled c.
    #[arg(long, default_value_t = 1)]
    pub zeros: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RevalidateArgs {
    /// Report written by an earlier run.
    pub report: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

/// Parses `RE` or `RE,IM` into a nonzero finite complex scalar.
pub fn parse_alpha(s: &str) -> Result<[f64; 2], String> {
    let mut parts = s.split(',');
    let re = parts.next().unwrap_or_default();
    let im = parts.next();
    if parts.next().is_some() {
        return Err(format!("expected RE or RE,IM, got `{s}`"));
    }
    let num = |t: &str| -> Result<f64, String> {
        let x: f64 = t
            .trim()
            .parse()
            .map_err(|_| format!("`{t}` is not a number"))?;
        if x.is_finite() {
            Ok(x)
        } else {
            Err(format!("`{t}` is not finite"))
        }
    };
    let z = [num(re)?, im.map(num).transpose()?.unwrap_or(0.0)];
    if z == [0.0, 0.0] {
        return Err("α must be nonzero".into());
    }
    Ok(z)
}

pub fn alpha_scalar(a: [f64; 2]) -> C64 {
    C64::new(a[0], a[1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_forms() {
        assert_eq!(parse_alpha("2"), Ok([2.0, 0.0]));
        assert_eq!(parse_alpha("1.5,-0.25"), Ok([1.5, -0.25]));
        assert_eq!(parse_alpha(" 1 , 2 "), Ok([1.0, 2.0]));
        assert!(parse_alpha("0").is_err());
        assert!(parse_alpha("0,0").is_err());
        assert!(parse_alpha("1,2,3").is_err());
        assert!(parse_alpha("inf").is_err());
        assert!(parse_alpha("").is_err());
        assert!(parse_alpha("x,1").is_err());
    }

    #[test]
    fn config_roundtrip() {
        let cli = Cli::try_parse_from([
            "fpp",
            "thm41",
            "--family",
            "tconj",
            "--n",
            "3",
            "--alpha",
            "2",
            "--seed",
            "1",
            "--out",
            "x.json",
            "--no-timestamp",
        ])
        .unwrap();
        let s = serde_json::to_string(&cli.command).unwrap();
        assert!(s.starts_with(r#"{"command":"thm41""#), "{s}");
        assert!(!s.contains("x.json"));
        let back: Command = serde_json::from_str(&s).unwrap();
        assert_eq!(back.name(), "thm41");
        assert_eq!(back.common().seed, 1);
        assert_eq!(back.common().out, None);
    }
}
