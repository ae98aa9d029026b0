//! Benchmark fixtures shared by the criterion targets.

use superorth::{random_family, BilinearForm, FunctionFamily, Rational};

/// Seeded exact family used by every benchmark.
pub fn fixture(len: usize, dim: usize, atoms: usize) -> (BilinearForm<Rational>, FunctionFamily<Rational>) {
    random_family(0, len, dim, atoms).expect("fixture parameters are valid")
}
