//! Property-based verification: random instance generation, independent
//! oracles and the suite registry.

mod instance;
mod oracles;
mod quadrature;
mod report;
mod suites;

pub use instance::{Coefficients, Gen, InstanceSpec, Shape};
pub use oracles::{
    oracle_fermion_expectation, oracle_grassmann_integral, oracle_isserlis, GRASSMANN_LIMIT, ISSERLIS_LIMIT,
};
pub use quadrature::{gauss_hermite, normal_expectation, normal_expectation_2d};
pub use report::{fingerprint, Failure, PropertyReport, Trial, FLOAT_REL_TOL};
pub use suites::{check_registry, lookup, registry, run_suite, Arithmetic, SuiteInfo, TOPICS};

#[cfg(test)]
mod tests;
