//! Gaussian expectations over a primed copy of the lattice fields.
//!
//! Elements over `Λ ⊔ Λ'` live on a doubled [`crate::Layout`]: base species
//! `s` becomes `2s` and its primed copy `2s + 1`. Conventions:
//! `E phibar_k phi_l = C_b[k][l]`, `E psibar_k psi_l = C_f[k][l]`, and
//! `E psi_u psi_v = -𝑪_f[u][v]` for the assembled antisymmetric matrix.

mod checks;
mod covariance;
mod ops;

pub use checks::{
    compare, convolution_check, factorisation_check, heat_equation_check, integration_by_parts_check,
    max_coefficient, CheckOutcome,
};
pub use covariance::{decaying, lift_index, primed_index, BijectionMap, CovBlock, CovariancePair};
pub use ops::{
    boson_expectation, combined_expectation, expect_theta, fermion_expectation, fermion_expectation_by_integration,
    grassmann_integral, heat_semigroup, laplacian, project_to_base, standard_order, theta,
};

#[cfg(test)]
mod tests;
