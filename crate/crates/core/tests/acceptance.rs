//! Acceptance criteria. Each test runs the designated suites at the
//! required trial counts and prints one PASS/FAIL line; run with
//! `--nocapture` to see them. Runtime limits are wall-clock over all the
//! criterion's suites.

use std::time::Instant;

use supernorm::verify::{run_suite, InstanceSpec, PropertyReport};

const SEED: u64 = 20_240_917;

fn spec() -> InstanceSpec {
    InstanceSpec { seed: SEED, ..InstanceSpec::default() }
}

/// Runs `(suite, trials, spec)` triples; passes when every report has the
/// requested trials, zero violations, and the runtime limit holds.
fn criterion(n: usize, title: &str, runs: &[(&str, usize, InstanceSpec)], limit_s: Option<f64>) {
    let start = Instant::now();
    let reports: Vec<PropertyReport> =
        runs.iter().map(|(id, trials, s)| run_suite(id, s, *trials).unwrap_or_else(|e| panic!("{id}: {e}"))).collect();
    let secs = start.elapsed().as_secs_f64();
    let counts_ok = reports.iter().zip(runs).all(|(r, (_, t, _))| r.trials == *t);
    let clean = reports.iter().all(PropertyReport::passed);
    let fast = limit_s.map_or(true, |l| secs < l);
    let pass = counts_ok && clean && fast;
    let detail: Vec<String> = reports.iter().map(|r| format!("{} {}/{} violations", r.id, r.violations, r.trials)).collect();
    let limit = limit_s.map_or(String::new(), |l| format!(", limit {l} s"));
    println!(
        "criterion {n:>2} {}: {title} [{}; {secs:.2} s{limit}]",
        if pass { "PASS" } else { "FAIL" },
        detail.join(", ")
    );
    for r in &reports {
        for f in r.failures.iter().take(3) {
            println!("    {} trial {}: {}", r.id, f.trial, f.message);
        }
    }
    assert!(counts_ok, "criterion {n}: trial counts differ from the requested ones");
    assert!(clean, "criterion {n}: violations {detail:?}");
    assert!(fast, "criterion {n}: {secs:.2} s exceeds the limit");
}

#[test]
fn criterion_01_wick_heat_identity() {
    let s = InstanceSpec { sites: 2, max_degree: 6, ..spec() };
    criterion(1, "E theta P = exp(Delta/2) P, degree <= 6, 2 sites, exact", &[("wick-heat", 200, s)], Some(10.0));
}

#[test]
fn criterion_02_convolution_property() {
    let s = InstanceSpec { sites: 3, ..spec() };
    criterion(2, "convolution property, M <= 3, exact", &[("convolution", 100, s)], Some(30.0));
}

#[test]
fn criterion_03_determinant_formula() {
    // trials cycle M_f = 1, 2, 3; each trial is exhaustive over monomials
    criterion(3, "determinant route = brute-force Berezin route, M_f <= 3", &[("determinant-formula", 6, spec())], None);
}

#[test]
fn criterion_04_moment_identities() {
    criterion(4, "second moments of the combined Gaussian, 20 covariances", &[("moments", 20, spec())], None);
}

#[test]
fn criterion_05_tau_norm_identity() {
    criterion(5, "||tau_x|| = (|phi_x| + h)^2 + h^2 to 1e-12, exact and LP", &[("tau-norm", 50, spec())], None);
}

#[test]
fn criterion_06_product_property() {
    criterion(
        6,
        "||FG|| <= ||F|| ||G||, closed form and LP",
        &[("product-property", 1000, spec()), ("product-property-lp", 100, spec())],
        None,
    );
}

#[test]
fn criterion_07_exponential_bound() {
    criterion(7, "||exp(-F)|| <= exp(-2 Re F_0 + ||F||)", &[("exponential-bound", 200, spec())], None);
}

#[test]
fn criterion_08_polynomial_and_norm_change_bounds() {
    criterion(8, "polynomial bound and norm change", &[("polynomial-bound", 200, spec()), ("norm-change", 200, spec())], None);
}

#[test]
fn criterion_09_theta_contraction_and_adjoint() {
    criterion(
        9,
        "theta* adjoint exact, theta contraction",
        &[("theta-adjoint", 100, spec()), ("theta-contraction", 500, spec())],
        None,
    );
}

#[test]
fn criterion_10_laplacian_bound() {
    criterion(10, "(1/2)||Delta F|| <= binom(A,2) ||C|| ||F||", &[("laplacian-bound", 200, spec())], None);
}

#[test]
fn criterion_11_integration_bound() {
    criterion(11, "integration bound with 51-point quadrature, tolerance 1e-6", &[("integration-bound", 50, spec())], None);
}

#[test]
fn criterion_12_gram_and_sobolev() {
    criterion(12, "Gram and lattice Sobolev inequalities", &[("gram", 1000, spec()), ("lattice-sobolev", 1000, spec())], None);
}

#[test]
fn criterion_13_exponential_moment() {
    criterion(13, "prod (1 - lambda)^(-1/2) <= exp(Tr C)", &[("exponential-moment", 100, spec())], None);
}

#[test]
fn criterion_14_regulator_expectation() {
    criterion(14, "MC E G <= alpha_G^(|X|/R^d) + 3 CI, 1e5 samples", &[("regulator-expectation", 1, spec())], Some(60.0));
}

#[test]
fn criterion_15_tau_exponential_chain() {
    // trial 0 takes a = 1, trial 1 takes a = 1 + 0.4i
    criterion(15, "exp(-a tau^2) chain on a 100-point grid, q2 = 4", &[("tau-exponential-bound", 2, spec())], None);
}
