//! Command-line front end: construct objects, compute norms, run sweeps,
//! emit CSV/JSON. All randomness descends from user-supplied 64-bit seeds,
//! so every output is reproducible; worker count is controlled by the
//! RAYON_NUM_THREADS environment variable and never changes results.

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::constructions::{diagonal_form, ksz_witness, PartitionScheme};
use crate::experiments::{ratio_sweep, records_to_csv, sharpness_verdict, slope_fit};
use crate::exponents::{self, Regime, WitnessFamily};
use crate::norms::{sup_norm_estimate, sup_norm_exact_vertex, OptimizerConfig};
use crate::poly::{BlockDegrees, Multipolynomial, Point};

#[derive(Parser)]
#[command(name = "multipoly", version, about = "Multipolynomials on lp balls: constructions, norms, and scaling experiments")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct a polynomial and write it in the JSON term format.
    Gen(GenArgs),
    /// Evaluate a polynomial file at a point.
    Eval(EvalArgs),
    /// Estimate or exactly compute a sup-norm.
    Norm(NormArgs),
    /// Fold a multipolynomial into a one-block homogeneous polynomial.
    Fold(FoldArgs),
    /// Run a ratio sweep from a JSON config and write CSV.
    Sweep(SweepArgs),
    /// Print the critical exponents and regime for (M, p).
    Exponents(ExponentsArgs),
}

#[derive(Args)]
struct GenArgs {
    #[command(subcommand)]
    kind: GenKind,
}

#[derive(Subcommand)]
enum GenKind {
    /// Diagonal form T_n as an M-block multilinear polynomial.
    Diagonal {
        #[arg(long)]
        n: usize,
        #[arg(long = "M")]
        total_degree: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// KSZ random-sign witness folded to the given block degrees.
    Ksz {
        #[arg(long)]
        n: usize,
        #[arg(long, value_delimiter = ',')]
        degrees: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    file: PathBuf,
    /// Point as semicolon-separated blocks of comma-separated coordinates,
    /// e.g. "1,0;3".
    #[arg(long)]
    point: String,
}

#[derive(Args)]
struct NormArgs {
    #[arg(long)]
    file: PathBuf,
    #[arg(long, value_parser = parse_p)]
    p: f64,
    /// Force the exact vertex oracle (p = inf, multi-affine only).
    #[arg(long)]
    exact: bool,
    #[arg(long, default_value_t = 64)]
    starts: usize,
    #[arg(long, default_value_t = 2000)]
    max_iters: usize,
    #[arg(long, default_value_t = 0.1)]
    step_init: f64,
    #[arg(long, default_value_t = 1e-9)]
    rel_tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct FoldArgs {
    #[arg(long)]
    file: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExponentsArgs {
    #[arg(long = "M")]
    total_degree: usize,
    #[arg(long, value_parser = parse_p)]
    p: f64,
}

/// Parse "inf"/"infinity" or a number.
pub fn parse_p(s: &str) -> Result<f64, String> {
    match s.to_ascii_lowercase().as_str() {
        "inf" | "infinity" => Ok(f64::INFINITY),
        other => other.parse::<f64>().map_err(|e| e.to_string()),
    }
}

/// p value that serializes as a number or the string "inf".
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PParam(pub f64);

impl Serialize for PParam {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            ser.serialize_str("inf")
        } else {
            ser.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for PParam {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        let v = serde_json::Value::deserialize(de)?;
        match v {
            serde_json::Value::Number(n) => Ok(PParam(n.as_f64().unwrap())),
            serde_json::Value::String(s) => parse_p(&s).map(PParam).map_err(D::Error::custom),
            _ => Err(D::Error::custom("p must be a number or \"inf\"")),
        }
    }
}

/// Sweep configuration; fully determines the output CSV and is embedded in it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub family: WitnessFamilyParam,
    pub degrees: Vec<usize>,
    pub p: PParam,
    pub s: f64,
    #[serde(default = "default_n_grid")]
    pub n_grid: Vec<usize>,
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    /// Tolerance used for the sharpness verdict.
    #[serde(default = "default_verdict_tol")]
    pub verdict_tol: f64,
}

fn default_n_grid() -> Vec<usize> {
    vec![4, 8, 16, 32]
}

fn default_verdict_tol() -> f64 {
    0.15
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessFamilyParam {
    Diagonal,
    Ksz,
}

impl From<WitnessFamilyParam> for WitnessFamily {
    fn from(w: WitnessFamilyParam) -> Self {
        match w {
            WitnessFamilyParam::Diagonal => WitnessFamily::Diagonal,
            WitnessFamilyParam::Ksz => WitnessFamily::Ksz,
        }
    }
}

/// Run a sweep from a parsed config and render the full CSV (config comment,
/// header, records, fit summary comment).
pub fn run_sweep_to_csv(cfg: &RunConfig) -> anyhow::Result<String> {
    let degrees = BlockDegrees::new(cfg.degrees.clone())?;
    let family: WitnessFamily = cfg.family.into();
    let p = cfg.p.0;
    let records = ratio_sweep(
        family,
        &degrees,
        p,
        cfg.s,
        &cfg.n_grid,
        &cfg.seeds,
        &cfg.optimizer,
    )?;
    let fit = slope_fit(&records)?;
    let theory = exponents::theoretical_ratio_slope(degrees.total_degree(), p, cfg.s, family)
        .unwrap_or(f64::NAN);
    let verdict = sharpness_verdict(&fit, theory, cfg.verdict_tol);
    let config_line = format!("config={}", serde_json::to_string(cfg)?);
    let mut csv = records_to_csv(&records, &[config_line]);
    csv.push_str(&format!(
        "# slope={} r2={} theory={} verdict={}\n",
        fmt17(fit.slope),
        fmt17(fit.r2),
        fmt17(theory),
        verdict
    ));
    Ok(csv)
}

fn fmt17(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        (if x > 0.0 { "inf" } else { "-inf" }).into()
    } else {
        format!("{x:.16e}")
    }
}

fn read_poly(path: &PathBuf) -> anyhow::Result<Multipolynomial> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let p: Multipolynomial = serde_json::from_str(&text)?;
    let report = crate::poly::validate(&p);
    if !report.is_ok() {
        bail!("invalid polynomial file: {:?}", report.violations);
    }
    Ok(p)
}

fn write_or_print(out: &Option<PathBuf>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn parse_point(spec: &str) -> anyhow::Result<Point> {
    let blocks: Result<Vec<Vec<f64>>, _> = spec
        .split(';')
        .map(|b| b.split(',').map(|v| v.trim().parse::<f64>()).collect())
        .collect();
    Ok(Point(blocks.context("parsing point")?))
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Gen(args) => match args.kind {
            GenKind::Diagonal { n, total_degree, out } => {
                let t = diagonal_form(n, total_degree)?;
                let p = t.to_multipolynomial()?;
                write_or_print(&out, &serde_json::to_string(&p)?)
            }
            GenKind::Ksz { n, degrees, seed, out } => {
                let degrees = BlockDegrees::new(degrees)?;
                let w = ksz_witness(n, &degrees, seed)?;
                write_or_print(&out, &serde_json::to_string(&w)?)
            }
        },
        Command::Eval(args) => {
            let p = read_poly(&args.file)?;
            let x = parse_point(&args.point)?;
            println!("{}", fmt17(p.evaluate(&x)?));
            Ok(())
        }
        Command::Norm(args) => {
            let poly = read_poly(&args.file)?;
            let est = if args.exact {
                if !args.p.is_infinite() {
                    bail!("--exact requires --p inf");
                }
                sup_norm_exact_vertex(&poly)?
            } else {
                let cfg = OptimizerConfig {
                    starts: args.starts,
                    max_iters: args.max_iters,
                    step_init: args.step_init,
                    rel_tol: args.rel_tol,
                    seed: args.seed,
                };
                if args.p.is_infinite() && poly.is_multi_affine() {
                    sup_norm_exact_vertex(&poly).or_else(|_| sup_norm_estimate(&poly, args.p, &cfg))?
                } else {
                    sup_norm_estimate(&poly, args.p, &cfg)?
                }
            };
            println!("{}", serde_json::to_string_pretty(&est)?);
            Ok(())
        }
        Command::Fold(args) => {
            let p = read_poly(&args.file)?;
            let scheme = PartitionScheme::contiguous_multipoly_to_poly(p.dims());
            let q = crate::constructions::fold_multipolynomial_to_homogeneous(&p, &scheme)?;
            write_or_print(&args.out, &serde_json::to_string(&q)?)
        }
        Command::Sweep(args) => {
            let text = fs::read_to_string(&args.config)
                .with_context(|| format!("reading {}", args.config.display()))?;
            let cfg: RunConfig = serde_json::from_str(&text)?;
            let csv = run_sweep_to_csv(&cfg)?;
            fs::write(&args.out, csv)
                .with_context(|| format!("writing {}", args.out.display()))?;
            Ok(())
        }
        Command::Exponents(args) => {
            let m = args.total_degree;
            let p = args.p;
            let regime = Regime::classify(m, p);
            println!("M={m} p={}", fmt_p(p));
            println!("regime={}", serde_json::to_string(&regime.kind)?.trim_matches('"'));
            match exponents::hl_exponent_high(m, p) {
                Ok(v) => println!("hl_exponent_high={}", fmt17(v)),
                Err(_) => println!("hl_exponent_high=n/a"),
            }
            match exponents::hl_exponent_low(m, p) {
                Ok(v) => println!("hl_exponent_low={}", fmt17(v)),
                Err(_) => println!("hl_exponent_low=n/a"),
            }
            println!("ksz_exponent={}", fmt17(exponents::ksz_exponent(m, p)?));
            Ok(())
        }
    }
}

fn fmt_p(p: f64) -> String {
    if p.is_infinite() {
        "inf".into()
    } else {
        p.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p_param_round_trip() {
        let inf: PParam = serde_json::from_str("\"inf\"").unwrap();
        assert!(inf.0.is_infinite());
        assert_eq!(serde_json::to_string(&inf).unwrap(), "\"inf\"");
        let three: PParam = serde_json::from_str("3.0").unwrap();
        assert_eq!(three.0, 3.0);
    }

    #[test]
    fn sweep_config_defaults() {
        let cfg: RunConfig = serde_json::from_str(
            r#"{"family":"diagonal","degrees":[1,1],"p":3.0,"s":2.0}"#,
        )
        .unwrap();
        assert_eq!(cfg.n_grid, vec![4, 8, 16, 32]);
        assert_eq!(cfg.verdict_tol, 0.15);
    }

    #[test]
    fn sweep_csv_is_reproducible() {
        let cfg: RunConfig = serde_json::from_str(
            r#"{"family":"diagonal","degrees":[1,1],"p":3.0,"s":2.0,"n_grid":[2,4,8,16]}"#,
        )
        .unwrap();
        let a = run_sweep_to_csv(&cfg).unwrap();
        let b = run_sweep_to_csv(&cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.starts_with("# config="));
        assert!(a.trim_end().ends_with("verdict=consistent"));
    }
}
