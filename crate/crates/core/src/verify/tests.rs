use std::sync::Arc;

use num_traits::{One, Zero};

use super::*;
use crate::algebra::{Cq, Field, FieldIndex, Layout, NElement, Scalar};
use crate::gaussian::{BijectionMap, CovariancePair};
use crate::linalg::Mat;

fn q(n: i64) -> Cq {
    Cq::from_i64(n)
}

/// Doubled layout for a 2-site supersymmetric base with `C_b = 1` and
/// `C_f = diag(2, 3)`.
fn diagonal_setup() -> (Arc<Layout>, CovariancePair<Cq>) {
    let base = Arc::new(Layout::supersymmetric(2));
    let cf = Mat::from_rows(vec![vec![q(2), q(0)], vec![q(0), q(3)]]).unwrap();
    let c = CovariancePair::pair(&base, Mat::identity(2), cf).unwrap();
    let b = BijectionMap::for_covariance(&base, &c);
    (b.doubled_layout(&base), c)
}

fn psi(conj: bool, site: u32) -> FieldIndex {
    FieldIndex::new(3, conj, site)
}

#[test]
fn fermion_oracle_examples() {
    let (dl, c) = diagonal_setup();
    let zero = Field::zero();
    let one = oracle_fermion_expectation(&NElement::one(&dl), &c).unwrap();
    assert_eq!(one.constant_at(&zero), Cq::one());
    let off = NElement::<Cq>::fermion(&dl, psi(true, 0)).mul(&NElement::fermion(&dl, psi(false, 1)));
    assert!(oracle_fermion_expectation(&off, &c).unwrap().is_zero());
    let diag = NElement::<Cq>::fermion(&dl, psi(true, 1)).mul(&NElement::fermion(&dl, psi(false, 1)));
    assert_eq!(oracle_fermion_expectation(&diag, &c).unwrap().constant_at(&zero), q(3));
}

#[test]
fn grassmann_oracle_extracts_top_coefficient() {
    let (dl, _) = diagonal_setup();
    let order = [psi(true, 0), psi(false, 0)];
    let top = NElement::fermion(&dl, order[0]).mul(&NElement::fermion(&dl, order[1])).scale(&q(5));
    let got = oracle_grassmann_integral(&top, &order).unwrap();
    assert_eq!(got.constant_at(&Field::zero()), q(5));
    let swapped = NElement::<Cq>::fermion(&dl, order[1]).mul(&NElement::fermion(&dl, order[0]));
    assert_eq!(oracle_grassmann_integral(&swapped, &order).unwrap().constant_at(&Field::zero()), q(-1));
}

#[test]
fn isserlis_oracle_examples() {
    let c = Mat::from_rows(vec![vec![q(3), q(1)], vec![q(1), q(2)]]).unwrap();
    let phi = |conj, site| FieldIndex::new(0, conj, site);
    assert_eq!(oracle_isserlis(&[phi(true, 0), phi(false, 1)], &c, true).unwrap(), q(1));
    assert_eq!(oracle_isserlis(&[phi(false, 0), phi(true, 0), phi(false, 0), phi(true, 0)], &c, true).unwrap(), q(18));
    assert!(oracle_isserlis(&[phi(false, 0), phi(true, 0), phi(false, 1)], &c, true).unwrap().is_zero());
    assert!(oracle_isserlis(&[phi(false, 0), phi(false, 1)], &c, true).unwrap().is_zero());
    let eleven = vec![phi(false, 0); ISSERLIS_LIMIT + 1];
    assert!(oracle_isserlis(&eleven, &c, true).is_err());
}

#[test]
fn zero_trials_is_an_empty_pass() {
    let r = run_suite("convolution", &InstanceSpec::default(), 0).unwrap();
    assert!(r.passed());
    assert_eq!(r.trials, 0);
    assert!(r.failures.is_empty());
}

#[test]
fn unknown_suite_is_an_error() {
    let err = run_suite("no-such-suite", &InstanceSpec::default(), 1).unwrap_err();
    assert!(matches!(err, crate::Error::UnknownSuite(_)));
}

#[test]
fn registry_covers_every_topic_once() {
    check_registry().unwrap();
    for t in TOPICS {
        assert_eq!(registry().iter().filter(|s| s.covers.contains(t)).count(), 1, "{t}");
    }
    assert!(run_suite("coverage-registry", &InstanceSpec::default(), 1).unwrap().passed());
}

#[test]
fn reports_are_deterministic() {
    let spec = InstanceSpec { seed: 7, ..InstanceSpec::default() };
    for id in ["algebra-star-product", "product-property", "gram"] {
        let a = run_suite(id, &spec, 10).unwrap();
        let b = run_suite(id, &spec, 10).unwrap();
        assert!(a.same_outcome(&b), "{id}");
        assert_eq!(a.fingerprint, b.fingerprint);
    }
}

#[test]
fn invalid_spec_is_rejected() {
    let bad = InstanceSpec { sites: 0, ..InstanceSpec::default() };
    assert!(run_suite("gram", &bad, 3).is_err());
}

#[test]
fn every_suite_runs_a_few_trials() {
    let spec = InstanceSpec::default();
    for s in registry() {
        let trials = match s.id {
            "regulator-expectation" | "mc-determinism" | "tau-exponential-bound" => 1,
            _ => 2,
        };
        let r = run_suite(s.id, &spec, trials).unwrap();
        assert!(r.passed(), "{}: {:?}", s.id, r.failures);
    }
}

#[test]
fn report_line_is_json() {
    let r = run_suite("gram", &InstanceSpec::default(), 3).unwrap();
    let back: PropertyReport = serde_json::from_str(&r.to_json_line()).unwrap();
    assert_eq!(back, r);
    assert!(r.worst_slack.is_some());
}
