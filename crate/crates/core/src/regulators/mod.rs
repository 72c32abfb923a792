//! Fluctuation-field and large-field regulators on a torus, regulator-weighted
//! norms evaluated over a fixed probe family, and a seeded Monte-Carlo
//! estimate of `E G^t`.
//!
//! Regulator norms are suprema over all fields and are not computable in
//! general. [`regulator_norm`] reports the maximum over [`ProbeFamily`],
//! which is a certified lower bound, and an analytic upper bound where one
//! is available.

mod chain;
mod lemmas;
mod mc;
mod probes;
mod regulator;

pub use chain::{kkk_check, KkkReport};
pub use lemmas::{exponential_moment_check, lattice_sobolev_check, MomentCheck, SobolevCheck};
pub use mc::{hypothesis_gate, mc_csv, regulator_expectation_mc, Gate, McReport, MC_STREAMS, Z99};
pub use probes::{Probe, ProbeFamily};
pub(crate) use regulator::growth_sup;
pub use regulator::{
    element_sites, fluctuation_regulator, large_field_regulator, log_regulator, regulator_norm, RegulatorKind,
    RegulatorNorm, RegulatorParams,
};

#[cfg(test)]
mod tests;
