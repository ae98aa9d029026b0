//! Verification toolkit for type IV superorthogonality.
//!
//! The crate computes the integer partition coefficients `C_P` of the
//! distinct-index identity, checks that identity exactly, evaluates double
//! partition sums through circle decompositions, classifies families by
//! superorthogonality type, and measures the square-function ratios on
//! generated families. Every computation is generic over [`Scalar`], with
//! exact rationals and `f64` as the two modes.

pub mod bilinear;
pub mod classify;
pub mod coefficients;
pub mod config;
pub mod error;
pub mod generators;
pub mod identity;
pub mod io;
pub mod partition;
pub mod positivity;
pub mod ratios;
pub mod scalar;
pub mod sharpness;

pub use bilinear::{
    BilinearForm, DiscreteMeasureSpace, FunctionFamily, PositiveForm, PositivityCertificate, Vector,
};
pub use classify::{classify, separated_vanishing_check, tuple_in_vanishing_set, TypeReport, TypeResult, TypeTag};
pub use coefficients::{compute_coefficients, inclusion_exclusion, oracle_coefficients, CoefficientTable};
pub use config::{CostGuard, OutputFormat, RunConfig};
pub use error::{Error, Result};
pub use generators::{gen_appendix_counterexample, gen_martingale, gen_rademacher, random_family};
pub use identity::{
    bound_partition_sum, distinct_sum, partition_sum, verify_identity, IdentityReport, IdentityVerification,
    LambdaMap, MultilinearMap, ProductFunctional,
};
pub use io::{load_family, save_family, LoadedFamily};
pub use partition::{bell_number, classify_partition, enumerate_partitions, PartitionClass, SetPartition};
pub use positivity::{
    build_pairing_graph, circle_sum, decompose_circles, double_partition_sum, CircleDecomposition, PairingGraph,
};
pub use ratios::{lp_norm, ratios, Ratio, RatioReport};
pub use scalar::{Mode, Rational, Scalar};
pub use sharpness::sharpness_lower_bound;
