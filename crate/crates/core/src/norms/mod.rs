//! Test functions, the weighted `Phi` norm and the `T_phi` semi-norm.
//!
//! `T_phi` is the dual of the `Phi` norm under the pairing
//! `<F, g>_phi = sum_z F_z(phi) g_z / z!`. Without derivative constraints
//! (`p_phi = 0`) it has a closed form; otherwise it is a linear program per
//! sequence pattern.

mod adjoint;
mod localized;
mod lp;
mod phi;
mod test_function;
mod tphi;
mod weight;

pub use adjoint::{forget, rho_ratio, sigma_star, sigma_star_derivative, theta_star};
pub use localized::{local_field_norm, max_polynomial_degree, quotient_field_norm, LocalNorm};
pub(crate) use phi::field_rows;
pub use phi::{pattern, phi_norm, Pattern, PhiNorm};
pub use test_function::{
    block_permutations, coefficient_table, covariance_test_function, fermion_covariance_test_function, pairing,
    symmetrise, TestFunction,
};
pub use tphi::{
    tphi_certified, tphi_seminorm, verify_certificate, Certificate, CertificateCheck, CertificateEntry, NormMode,
    NormParams, NormValue,
};
pub use weight::Weight;
