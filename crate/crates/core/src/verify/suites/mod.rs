//! Suite registry. Each suite is a per-trial check; trials draw from
//! independent random streams, run in parallel and are merged by index.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;

use super::instance::{Gen, InstanceSpec};
use super::report::{fingerprint, Failure, PropertyReport, Trial};
use crate::error::{Error, Result};

mod common;
mod gaussian;
mod meta;
mod norms;
mod regulators;
mod structure;

type TrialFn = fn(&InstanceSpec, &mut Gen, usize) -> Result<Trial>;

/// Whether a suite's verdict is an exact-arithmetic identity or a floating
/// inequality with a stated tolerance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Arithmetic {
    Exact,
    Float,
}

#[derive(Clone, Copy)]
pub struct SuiteInfo {
    pub id: &'static str,
    pub summary: &'static str,
    /// Results of the underlying theory this suite is the designated check for.
    pub covers: &'static [&'static str],
    pub arithmetic: Arithmetic,
    pub default_trials: usize,
    run: TrialFn,
}

impl std::fmt::Debug for SuiteInfo {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SuiteInfo").field("id", &self.id).finish()
    }
}

/// Results that must each have exactly one designated suite.
pub const TOPICS: &[&str] = &[
    "convolution property",
    "wick formula",
    "factorisation property",
    "determinant formula",
    "gaussian moments",
    "symmetrisation",
    "product property",
    "exponential bound",
    "tau norm identity",
    "tau exponential bound",
    "polynomial bound",
    "norm change bound",
    "theta contraction",
    "regulator product bound",
    "regulator norm comparison",
    "laplacian bound",
    "integration bound",
    "regulator expectation",
    "star product",
    "sigma-star bounds",
    "theta adjoint",
    "gram inequality",
    "lattice sobolev inequality",
    "exponential moment bound",
];

const fn suite(
    id: &'static str,
    summary: &'static str,
    covers: &'static [&'static str],
    arithmetic: Arithmetic,
    default_trials: usize,
    run: TrialFn,
) -> SuiteInfo {
    SuiteInfo { id, summary, covers, arithmetic, default_trials, run }
}

use Arithmetic::{Exact, Float};

static REGISTRY: &[SuiteInfo] = &[
    // lattice
    suite("lattice-periodicity", "finite differences commute with translations", &[], Exact, 50, structure::periodicity),
    suite("lattice-block-paving", "blocks partition the torus", &[], Exact, 20, structure::block_paving),
    suite("lattice-small-set-census", "small sets against brute-force enumeration", &[], Exact, 20, structure::small_set_census),
    // algebra
    suite("algebra-associativity", "associativity and distributivity", &[], Exact, 100, structure::associativity),
    suite("algebra-star-product", "coefficient product formula against multiplication", &["star product"], Exact, 100, structure::star_product),
    suite("algebra-coefficient-symmetry", "coefficient (anti)symmetry under transpositions", &[], Exact, 100, structure::coefficient_symmetry),
    suite("algebra-derivatives-commute", "boson and fermion derivatives (anti)commute", &[], Exact, 100, structure::derivatives_commute),
    // gaussian
    suite("wick-heat", "E theta P against exp(Delta/2) P", &["wick formula"], Exact, 200, gaussian::wick_heat),
    suite("convolution", "E_C2 theta E_C1 theta F = E_{C1+C2} theta F", &["convolution property"], Exact, 100, gaussian::convolution),
    suite("factorisation", "expectation factorises over uncorrelated supports", &["factorisation property"], Exact, 50, gaussian::factorisation),
    suite("determinant-formula", "determinant route against literal Berezin expansion", &["determinant formula"], Exact, 6, gaussian::determinant_formula),
    suite("moments", "second moments of the combined Gaussian", &["gaussian moments"], Exact, 20, gaussian::moments),
    suite("oracle-agreement", "expectations against Grassmann and Isserlis oracles", &[], Exact, 10, gaussian::oracle_agreement),
    suite("gaussian-integration-by-parts", "fermionic integration by parts", &[], Exact, 50, gaussian::integration_by_parts),
    suite("gaussian-heat-equation", "heat equation in the covariance scale", &[], Exact, 50, gaussian::heat_equation),
    suite("gaussian-wick-routes", "determinant route against the integration route", &[], Exact, 6, gaussian::wick_routes),
    suite("gaussian-moment-parity", "unbalanced monomials have zero expectation", &[], Exact, 50, gaussian::moment_parity),
    // norms
    suite("tau-norm", "closed form of the tau norm in exact and LP modes", &["tau norm identity"], Float, 50, norms::tau_norm),
    suite("tau-exponential-bound", "the exp(-a tau^2) chain on a field grid", &["tau exponential bound"], Float, 2, norms::tau_exponential),
    suite("product-property", "||FG|| <= ||F|| ||G||, closed form", &["product property"], Float, 1000, norms::product),
    suite("product-property-lp", "||FG|| <= ||F|| ||G||, linear program", &[], Float, 100, norms::product_lp),
    suite("exponential-bound", "||exp(-F)|| <= exp(-2 Re F_0 + ||F||)", &["exponential bound"], Float, 200, norms::exponential),
    suite("polynomial-bound", "||F||_phi <= ||F||_0 (1 + ||phi||)^A and its Gaussian form", &["polynomial bound"], Float, 200, norms::polynomial),
    suite("norm-change", "norm change with the rho ratio", &["norm change bound"], Float, 200, norms::norm_change),
    suite("theta-contraction", "theta contracts T and theta* contracts Phi", &["theta contraction"], Float, 500, norms::theta_contraction),
    suite("theta-adjoint", "<theta F, g> = <F, theta* g>", &["theta adjoint"], Exact, 100, norms::theta_adjoint),
    suite("laplacian-bound", "(1/2)||Delta F|| <= binom(A,2) ||C|| ||F||", &["laplacian bound"], Float, 200, norms::laplacian_bound),
    suite("integration-bound", "||E F|| <= E ||F|| by 51-point quadrature", &["integration bound"], Float, 50, norms::integration),
    suite("symmetrisation", "pairing is unchanged by symmetrising g", &["symmetrisation"], Exact, 100, norms::symmetrisation),
    suite("sigma-star", "shift identity and bounds for sigma*", &["sigma-star bounds"], Float, 100, norms::sigma_star_suite),
    suite("phi-norm-product", "||g1 (x) g2|| <= ||g1|| ||g2||", &[], Float, 100, norms::phi_product),
    suite("dual-norm-sanity", "closed form equals LP value for real F", &[], Float, 50, norms::dual_sanity),
    suite("t0-lower-bound", "||F||_phi >= |F_0(phi)|", &[], Float, 100, norms::t0_lower),
    suite("gram", "|det <u_i, v_j>| <= prod |u_i| |v_i|", &["gram inequality"], Float, 1000, norms::gram),
    suite("lattice-sobolev", "block Sobolev inequality with 2^(3d+2)", &["lattice sobolev inequality"], Float, 1000, norms::sobolev),
    suite("exponential-moment", "prod (1 - lambda)^(-1/2) <= exp(Tr C)", &["exponential moment bound"], Float, 100, norms::exponential_moment),
    // regulators
    suite("regulator-monotonicity", "G and G~ are nondecreasing in X", &[], Float, 30, regulators::monotonicity),
    suite("regulator-multiplicativity", "regulators multiply over disjoint unions", &[], Float, 30, regulators::multiplicativity),
    suite("regulator-growth-chain", "(1 + ||phi||)^(A+1) <= c_A G^(1/2) with explicit c_A", &[], Float, 30, regulators::growth_chain),
    suite("large-field-domination", "G~(X, t phi) <= G(X, phi)^(1/2)", &[], Float, 30, regulators::large_field_domination),
    suite("regulator-product", "regulator norms of products over disjoint sets", &["regulator product bound"], Float, 20, regulators::product),
    suite("kkk-bound", "||F||_G against T_0 and the G~ norm", &["regulator norm comparison"], Float, 200, regulators::kkk),
    suite("mc-determinism", "Monte-Carlo output is bit-identical across runs and thread counts", &[], Exact, 3, regulators::mc_determinism),
    suite("regulator-expectation", "Monte-Carlo E G^t against alpha_G^(|X|/R^d)", &["regulator expectation"], Float, 1, regulators::expectation),
    // meta
    suite("seed-determinism", "identical spec and seed give identical reports", &[], Exact, 4, meta::seed_determinism),
    suite("coverage-registry", "every topic has exactly one designated suite", &[], Exact, 1, meta::coverage),
    suite("serialization-round-trip", "text and JSON formats round-trip", &[], Exact, 50, meta::round_trip),
];

pub fn registry() -> &'static [SuiteInfo] {
    REGISTRY
}

pub fn lookup(id: &str) -> Result<&'static SuiteInfo> {
    REGISTRY.iter().find(|s| s.id == id).ok_or_else(|| Error::UnknownSuite(id.to_string()))
}

/// Ids, topic coverage and uniqueness of the registry.
pub fn check_registry() -> Result<()> {
    let mut ids = BTreeMap::new();
    for s in REGISTRY {
        if ids.insert(s.id, ()).is_some() {
            return Err(Error::Invalid(format!("suite id `{}` registered twice", s.id)));
        }
        if let Some(t) = s.covers.iter().find(|t| !TOPICS.contains(t)) {
            return Err(Error::Invalid(format!("suite `{}` covers unknown topic `{t}`", s.id)));
        }
    }
    for t in TOPICS {
        let owners: Vec<&str> = REGISTRY.iter().filter(|s| s.covers.contains(t)).map(|s| s.id).collect();
        if owners.len() != 1 {
            return Err(Error::Invalid(format!("topic `{t}` has suites {owners:?}, expected exactly one")));
        }
    }
    Ok(())
}

/// Runs `trials` trials of suite `id`. Failed trials and trial errors are
/// collected; the run never stops early.
pub fn run_suite(id: &str, spec: &InstanceSpec, trials: usize) -> Result<PropertyReport> {
    let info = lookup(id)?;
    spec.validate()?;
    let start = Instant::now();
    let outcomes: Vec<Result<Trial>> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut gen = Gen::new(spec, k as u64);
            (info.run)(spec, &mut gen, k)
        })
        .collect();
    let mut violations = 0;
    let mut worst: Option<f64> = None;
    let mut failures = Vec::new();
    for (k, o) in outcomes.into_iter().enumerate() {
        match o {
            Ok(t) => {
                if let Some(s) = t.slack {
                    worst = Some(worst.map_or(s, |w: f64| w.min(s)));
                }
                if !t.holds {
                    violations += 1;
                    failures.push(Failure { trial: k, message: t.note.unwrap_or_else(|| "violated".into()) });
                }
            }
            Err(e) => {
                violations += 1;
                failures.push(Failure { trial: k, message: format!("error: {e}") });
            }
        }
    }
    Ok(PropertyReport {
        id: id.to_string(),
        trials,
        violations,
        worst_slack: worst,
        runtime_ms: start.elapsed().as_secs_f64() * 1e3,
        seed: spec.seed,
        fingerprint: fingerprint(spec),
        failures,
    })
}
