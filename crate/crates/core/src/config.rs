//! Run configuration shared by the command-line front end and library callers.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::Mode;

pub const DEFAULT_COST_GUARD: u64 = 100_000_000;
pub const COST_GUARD_ENV: &str = "SUPERORTH_COST_GUARD";

/// Refuses computations whose estimated multiplication count exceeds `limit`,
/// unless `force` is set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostGuard {
    limit: u64,
    force: bool,
}

impl Default for CostGuard {
    fn default() -> Self {
        CostGuard { limit: DEFAULT_COST_GUARD, force: false }
    }
}

impl CostGuard {
    pub fn new(limit: u64, force: bool) -> Result<Self> {
        if limit == 0 {
            return Err(invalid("cost guard must be positive"));
        }
        Ok(CostGuard { limit, force })
    }

    /// Never refuses.
    pub fn unlimited() -> Self {
        CostGuard { limit: u64::MAX, force: true }
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn force(&self) -> bool {
        self.force
    }

    pub fn check(&self, estimated: u128) -> Result<()> {
        if estimated <= self.limit as u128 {
            return Ok(());
        }
        if self.force {
            log::warn!("forcing computation of ~{estimated} multiplications past guard {}", self.limit);
            return Ok(());
        }
        Err(Error::ResourceLimit { estimated, limit: self.limit })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(Error::Parse(format!("unknown format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub mode: Mode,
    pub cost_guard: u64,
    pub output: OutputFormat,
    pub force: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: Mode::Exact,
            cost_guard: DEFAULT_COST_GUARD,
            output: OutputFormat::Json,
            force: false,
        }
    }
}

impl RunConfig {
    /// Defaults with the guard taken from `SUPERORTH_COST_GUARD` when set.
    pub fn from_env() -> Result<Self> {
        let mut cfg = RunConfig::default();
        if let Ok(raw) = std::env::var(COST_GUARD_ENV) {
            cfg.cost_guard = parse_guard(&raw)?;
        }
        Ok(cfg)
    }

    pub fn guard(&self) -> Result<CostGuard> {
        CostGuard::new(self.cost_guard, self.force)
    }
}

pub fn parse_guard(raw: &str) -> Result<u64> {
    let v: u64 = raw
        .trim()
        .replace('_', "")
        .parse()
        .map_err(|_| Error::Parse(format!("{COST_GUARD_ENV}=`{raw}` is not a positive integer")))?;
    if v == 0 {
        return Err(invalid("cost guard must be positive"));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn guard_behaviour() {
        let g = CostGuard::new(100, false).unwrap();
        assert!(g.check(100).is_ok());
        assert!(matches!(g.check(101), Err(Error::ResourceLimit { estimated: 101, limit: 100 })));
        assert!(CostGuard::new(100, true).unwrap().check(10_000).is_ok());
        assert!(CostGuard::new(0, false).is_err());
    }

    #[test]
    fn guard_parsing() {
        assert_eq!(parse_guard("1_000").unwrap(), 1000);
        assert!(parse_guard("0").is_err());
        assert!(parse_guard("lots").is_err());
    }
}
