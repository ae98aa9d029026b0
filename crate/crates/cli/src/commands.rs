use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use superorth::classify::{parse_type_list, separated_vanishing_check};
use superorth::coefficients::{compute_coefficients, oracle_coefficients};
use superorth::positivity::positivity_report;
use superorth::ratios::RatioReport;
use superorth::scalar::{format_rational, parse_rational, Mode};
use superorth::{
    classify, enumerate_partitions, ratios, sharpness_lower_bound, verify_identity, BilinearForm, CostGuard, Error,
    FunctionFamily, LoadedFamily, Result, RunConfig, Scalar, SetPartition,
};

use crate::source::{self, FamilyArgs, Generator};

#[derive(Debug, Parser)]
#[command(name = "superorth", version, about = "Partition identities, positivity and square-function ratios for superorthogonal families")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Scalar field; defaults to the family's own mode, exact for generated families.
    #[arg(long, global = true, value_parser = parse_mode)]
    pub mode: Option<Mode>,
    /// Seed for random families and martingale generators.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Maximum estimated scalar multiplications (overrides SUPERORTH_COST_GUARD).
    #[arg(long, global = true)]
    pub cost_guard: Option<u64>,
    /// Run past the cost guard.
    #[arg(long, global = true)]
    pub force: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Partition coefficients C_P for partitions of [n].
    Coeffs {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Use the triangular-solve oracle instead of the recursion.
        #[arg(long)]
        oracle: bool,
    },
    /// Check the distinct-index identity at every atom and after integration.
    VerifyIdentity {
        #[command(flatten)]
        source: FamilyArgs,
        #[arg(long)]
        r: usize,
        /// Include per-atom reports.
        #[arg(long)]
        per_atom: bool,
    },
    /// Circle decomposition and folded sums for perfect matchings of [2r].
    Positivity {
        #[command(flatten)]
        source: FamilyArgs,
        #[arg(long)]
        r: usize,
        /// One matching such as "1,3|2,4"; all matchings when omitted.
        #[arg(long)]
        partition: Option<String>,
    },
    /// Superorthogonality types of a family.
    Classify {
        #[command(flatten)]
        source: FamilyArgs,
        #[arg(long)]
        r: usize,
        /// Comma-separated list from i*, i, ii, iii, iv.
        #[arg(long)]
        types: Option<String>,
        /// Also test tuples whose indices differ pairwise by more than this.
        #[arg(long)]
        separation: Option<usize>,
    },
    /// Square-function ratios on a generated family.
    Bench {
        #[arg(long, value_enum)]
        generator: Generator,
        #[arg(long = "L", value_name = "L")]
        levels: usize,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        epsilon: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Counting lower bound binom(L, m) / binom(L-2r, m-2r), m = floor(C^2) + 1.
    Sharpness {
        #[arg(long = "L", value_name = "L")]
        levels: usize,
        #[arg(long)]
        r: usize,
        #[arg(long = "C", value_name = "C")]
        c: String,
    },
}

fn parse_mode(s: &str) -> std::result::Result<Mode, String> {
    s.parse::<Mode>().map_err(|e| e.to_string())
}

pub struct Outcome {
    pub stdout: String,
    pub passed: bool,
}

impl Outcome {
    fn json(v: &Value, passed: bool) -> Result<Self> {
        let mut stdout = serde_json::to_string_pretty(v)?;
        stdout.push('\n');
        Ok(Outcome { stdout, passed })
    }
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::PositivityViolation(_) => 1,
        _ => 2,
    }
}

fn config(global: &GlobalArgs) -> Result<RunConfig> {
    let mut cfg = RunConfig::from_env()?;
    if let Some(limit) = global.cost_guard {
        cfg.cost_guard = limit;
    }
    cfg.force = global.force;
    if let Some(mode) = global.mode {
        cfg.mode = mode;
    }
    Ok(cfg)
}

pub fn run(cli: Cli) -> Result<Outcome> {
    let cfg = config(&cli.global)?;
    let guard = cfg.guard()?;
    let seed = cli.global.seed;
    let mode = cli.global.mode;
    match cli.command {
        Command::Coeffs { n, format, oracle } => coeffs(n, format, oracle),
        Command::VerifyIdentity { source, r, per_atom } => {
            let family = source::with_mode(source::load(&source, seed)?, mode)?;
            match family {
                LoadedFamily::Exact(b, f) => identity(&b, &f, r, per_atom, &guard),
                LoadedFamily::Float(b, f) => identity(&b, &f, r, per_atom, &guard),
            }
        }
        Command::Positivity { source, r, partition } => {
            let family = source::with_mode(source::load(&source, seed)?, mode)?;
            let partitions = match partition {
                Some(p) => vec![p.parse::<SetPartition>()?],
                None => enumerate_partitions(2 * r)?.into_iter().filter(SetPartition::is_double).collect(),
            };
            match family {
                LoadedFamily::Exact(b, f) => positivity(&b, &f, r, &partitions),
                LoadedFamily::Float(b, f) => positivity(&b, &f, r, &partitions),
            }
        }
        Command::Classify { source, r, types, separation } => {
            let family = source::with_mode(source::load(&source, seed)?, mode)?;
            let types = match (&types, separation) {
                (Some(t), _) => parse_type_list(t)?,
                (None, Some(_)) => Vec::new(),
                (None, None) => parse_type_list("iv")?,
            };
            match family {
                LoadedFamily::Exact(b, f) => classify_cmd(&b, &f, r, &types, separation, &guard),
                LoadedFamily::Float(b, f) => classify_cmd(&b, &f, r, &types, separation, &guard),
            }
        }
        Command::Bench { generator, levels, r, epsilon, format } => {
            let (b, f) = source::generate(generator, levels, epsilon.as_deref(), seed)?;
            let eps = epsilon.as_deref().map(parse_rational).transpose()?.map(|e| format_rational(&e));
            let meta = BenchMeta { generator, levels, eps };
            match mode.unwrap_or(Mode::Exact) {
                Mode::Exact => bench(&b, &f, r, &meta, format),
                Mode::Float => bench(&b.map_scalar(Scalar::to_f64), &f.map_scalar(Scalar::to_f64), r, &meta, format),
            }
        }
        Command::Sharpness { levels, r, c } => {
            let c = parse_rational(&c)?;
            let bound = sharpness_lower_bound(levels, r, &c)?;
            let all = superorth::sharpness::ordered_distinct_count(levels, r);
            let v = json!({
                "L": levels,
                "r": r,
                "C": format_rational(&c),
                "m": superorth::sharpness::sharpness_m(&c)?,
                "bound": format_rational(&bound),
                "ordered_distinct_tuples": all.to_string(),
            });
            Outcome::json(&v, true)
        }
    }
}

fn coeffs(n: usize, format: Format, oracle: bool) -> Result<Outcome> {
    let table = if oracle { oracle_coefficients(n)? } else { compute_coefficients(n)? };
    match format {
        Format::Json => Outcome::json(&serde_json::to_value(table.to_json())?, true),
        Format::Csv => Ok(Outcome { stdout: table.to_csv(), passed: true }),
    }
}

fn mode_name<S: Scalar>() -> &'static str {
    match S::MODE {
        Mode::Exact => "exact",
        Mode::Float => "float",
    }
}

fn identity<S: Scalar>(
    b: &BilinearForm<S>,
    f: &FunctionFamily<S>,
    r: usize,
    per_atom: bool,
    guard: &CostGuard,
) -> Result<Outcome> {
    let table = compute_coefficients(2 * r)?;
    let v = verify_identity(b, f, r, &table, guard)?;
    let mut out = v.to_json(per_atom);
    out["r"] = json!(r);
    out["mode"] = json!(mode_name::<S>());
    Outcome::json(&out, v.passed())
}

fn positivity<S: Scalar>(b: &BilinearForm<S>, f: &FunctionFamily<S>, r: usize, partitions: &[SetPartition]) -> Result<Outcome> {
    let pf = b.symmetrize().certify_positive()?;
    let reports = partitions
        .iter()
        .map(|p| positivity_report(&pf, f, p, r))
        .collect::<Result<Vec<_>>>()?;
    let passed = reports.iter().all(|rep| rep.nonnegative);
    let v = json!({
        "r": r,
        "mode": mode_name::<S>(),
        "nonnegative": passed,
        "partitions": reports.iter().map(|rep| rep.to_json()).collect::<Vec<_>>(),
    });
    Outcome::json(&v, passed)
}

fn classify_cmd<S: Scalar>(
    b: &BilinearForm<S>,
    f: &FunctionFamily<S>,
    r: usize,
    types: &[superorth::TypeTag],
    separation: Option<usize>,
    guard: &CostGuard,
) -> Result<Outcome> {
    let mut out = json!({"r": r, "mode": mode_name::<S>()});
    let mut passed = true;
    if !types.is_empty() {
        let rep = classify(b, f, r, types, guard)?;
        passed &= rep.all_hold();
        out["per_type"] = rep.to_json()["per_type"].clone();
    }
    if let Some(sep) = separation {
        let rep = separated_vanishing_check(b, f, r, sep, guard)?;
        passed &= rep.result.holds;
        out["separation"] = json!({"separation": sep, "result": rep.result.to_json()});
    }
    out["holds"] = json!(passed);
    Outcome::json(&out, passed)
}

struct BenchMeta {
    generator: Generator,
    levels: usize,
    eps: Option<String>,
}

fn bench<S: Scalar>(b: &BilinearForm<S>, f: &FunctionFamily<S>, r: usize, meta: &BenchMeta, format: Format) -> Result<Outcome> {
    let rep = ratios(b, f, r)?;
    match format {
        Format::Json => {
            let v = json!({
                "generator": meta.generator.to_possible_value().map(|p| p.get_name().to_string()),
                "L": meta.levels,
                "epsilon": meta.eps,
                "mode": mode_name::<S>(),
                "report": rep.to_json(),
            });
            Outcome::json(&v, true)
        }
        Format::Csv => {
            let stdout = format!("{}\n{}\n", RatioReport::<S>::CSV_HEADER, rep.csv_row(meta.levels, meta.eps.as_deref()));
            Ok(Outcome { stdout, passed: true })
        }
    }
}
