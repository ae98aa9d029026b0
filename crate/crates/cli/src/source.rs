//! Where a command's family comes from: a file, a seeded random family, or
//! one of the generators.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use superorth::generators::{gen_appendix_counterexample, gen_martingale, gen_rademacher, random_family};
use superorth::scalar::{parse_rational, Mode};
use superorth::{load_family, BilinearForm, Error, FunctionFamily, LoadedFamily, Rational, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Generator {
    Rademacher,
    Martingale,
    Appendix,
}

#[derive(Debug, Clone, Args)]
pub struct FamilyArgs {
    /// Family file (JSON).
    #[arg(long, conflicts_with_all = ["random", "generator"])]
    pub family: Option<PathBuf>,
    /// Seeded random family with this many members.
    #[arg(long, value_name = "L", conflicts_with = "generator")]
    pub random: Option<usize>,
    /// Value dimension of a random family.
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Atom count of a random family.
    #[arg(long, default_value_t = 2)]
    pub atoms: usize,
    /// Generated family.
    #[arg(long, value_enum)]
    pub generator: Option<Generator>,
    /// Generator size: 2^L atoms.
    #[arg(long = "L", value_name = "L")]
    pub levels: Option<usize>,
    /// Pairing parameter of the appendix family, as p/q.
    #[arg(long)]
    pub epsilon: Option<String>,
}

impl FamilyArgs {
    pub fn epsilon_text(&self) -> Option<&str> {
        self.epsilon.as_deref()
    }
}

/// Martingale generators use `h(x)` uniform in `-5..=5`, drawn from `seed`.
pub fn martingale_seed(levels: usize, seed: u64) -> Vec<Rational> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..1usize << levels.min(superorth::generators::MAX_DYADIC_LEVELS))
        .map(|_| Rational::from_integer(rng.gen_range(-5i64..=5).into()))
        .collect()
}

pub fn generate(
    generator: Generator,
    levels: usize,
    epsilon: Option<&str>,
    seed: u64,
) -> Result<(BilinearForm<Rational>, FunctionFamily<Rational>)> {
    match generator {
        Generator::Rademacher => gen_rademacher(levels),
        Generator::Martingale => gen_martingale(levels, &martingale_seed(levels, seed)),
        Generator::Appendix => {
            let eps = epsilon.ok_or_else(|| Error::InvalidArgument("--epsilon is required for the appendix generator".into()))?;
            gen_appendix_counterexample(levels, &parse_rational(eps)?)
        }
    }
}

pub fn load(args: &FamilyArgs, seed: u64) -> Result<LoadedFamily> {
    if let Some(path) = &args.family {
        return load_family(path);
    }
    if let Some(len) = args.random {
        let (b, f) = random_family(seed, len, args.dim, args.atoms)?;
        return Ok(LoadedFamily::Exact(b, f));
    }
    if let Some(g) = args.generator {
        let levels = args.levels.ok_or_else(|| Error::InvalidArgument("--L is required with --generator".into()))?;
        let (b, f) = generate(g, levels, args.epsilon_text(), seed)?;
        return Ok(LoadedFamily::Exact(b, f));
    }
    Err(Error::InvalidArgument("one of --family, --random or --generator is required".into()))
}

/// Applies the requested mode. Float input cannot be promoted to exact.
pub fn with_mode(loaded: LoadedFamily, mode: Option<Mode>) -> Result<LoadedFamily> {
    match (mode, loaded) {
        (Some(Mode::Float), l @ LoadedFamily::Exact(..)) => {
            let (b, f) = l.into_float();
            Ok(LoadedFamily::Float(b, f))
        }
        (Some(Mode::Exact), LoadedFamily::Float(..)) => {
            Err(Error::ModeMixing("exact mode requested for a float family".into()))
        }
        (_, l) => Ok(l),
    }
}
