use std::collections::BTreeSet;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::algebra::{BMono, FieldIndex, Layout, NElement, Poly, C64};
use crate::lattice::{Polymer, Torus};
use crate::norms::{NormMode, NormParams, Weight};

fn phi(x: u32) -> FieldIndex {
    FieldIndex::new(0, false, x)
}
fn phib(x: u32) -> FieldIndex {
    FieldIndex::new(0, true, x)
}

fn tau(l: &Arc<Layout>, x: u32) -> NElement<C64> {
    let b = NElement::from_poly(l, Poly::var(phi(x)).mul(&Poly::var(phib(x))));
    let pair = [FieldIndex::new(1, false, x), FieldIndex::new(1, true, x)];
    b.add(&NElement::monomial(l, C64::new(1.0, 0.0), BMono::one(), &pair))
}

fn reg() -> RegulatorParams {
    RegulatorParams::new(0.5, 2.0, 1, 1.1, 1.0).unwrap()
}

fn random_field(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<C64> {
    (0..n).map(|_| C64::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))).collect()
}

fn sites(t: &Torus, blocks: &[usize]) -> BTreeSet<usize> {
    t.polymer_sites(&blocks.iter().copied().collect())
}

#[test]
fn zero_field_regulators_are_one() {
    let t = Torus::new(1, 2, 4).unwrap();
    let zero = vec![C64::new(0.0, 0.0); 8];
    let x = sites(&t, &[0, 1]);
    assert_eq!(fluctuation_regulator(&t, &x, &zero, &reg()).unwrap(), 1.0);
    assert_eq!(large_field_regulator(&t, &x, &zero, &reg()).unwrap(), 1.0);
}

#[test]
fn constant_field_on_one_block() {
    let t = Torus::new(1, 2, 4).unwrap();
    let p = reg();
    let x = sites(&t, &[2]);
    for p_phi in [0, 1] {
        let p = p.clone().with_p_phi(p_phi);
        let c = vec![C64::new(0.3, 0.0); 8];
        let g = fluctuation_regulator(&t, &x, &c, &p).unwrap();
        assert!((g - (0.3f64 / 0.5).powi(2).exp()).abs() < 1e-12);
    }
    let c = vec![C64::new(0.3, 0.4); 8];
    let g = fluctuation_regulator(&t, &x, &c, &p).unwrap();
    let exact = 1.0f64.exp();
    let slack = (std::f64::consts::PI / 32.0).cos().powi(-2);
    assert!(g >= exact - 1e-12 && g <= exact.powf(slack) + 1e-12);
}

#[test]
fn regulators_are_multiplicative_and_monotone() {
    let t = Torus::new(1, 2, 4).unwrap();
    let p = reg().with_p_phi(1);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..5 {
        let f = random_field(&mut rng, 8, 1.0);
        for kind in [RegulatorKind::Fluctuation, RegulatorKind::LargeField] {
            let lx = log_regulator(kind, &t, &sites(&t, &[0]), &f, &p).unwrap();
            let ly = log_regulator(kind, &t, &sites(&t, &[2, 3]), &f, &p).unwrap();
            let lxy = log_regulator(kind, &t, &sites(&t, &[0, 2, 3]), &f, &p).unwrap();
            assert!((lxy - lx - ly).abs() < 1e-12);
            assert!(lx <= lxy && ly <= lxy);
            let partial: BTreeSet<usize> = [0].into();
            assert!(log_regulator(kind, &t, &partial, &f, &p).unwrap() <= lx + 1e-15);
        }
    }
}

#[test]
fn polynomial_field_has_unit_large_field_regulator() {
    let t = Torus::new(1, 2, 4).unwrap();
    let f: Vec<C64> = (0..8).map(|s| C64::new(0.7 + 1.3 * s as f64, 0.0)).collect();
    let x = sites(&t, &[1]);
    assert!((large_field_regulator(&t, &x, &f, &reg()).unwrap() - 1.0).abs() < 1e-9);
    let mut p0 = reg();
    p0.d_pi = 0;
    assert!(large_field_regulator(&t, &x, &f, &p0).unwrap() > 1.0);
    let small = Torus::new(1, 2, 2).unwrap();
    assert!(large_field_regulator(&small, &sites(&small, &[0]), &[C64::new(1.0, 0.0); 4], &reg()).is_err());
}

#[test]
fn large_field_regulator_is_dominated() {
    let t = Torus::new(1, 2, 4).unwrap();
    let p = reg().with_p_phi(1);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let x = sites(&t, &[0, 1]);
    for _ in 0..5 {
        let f = random_field(&mut rng, 8, 2.0);
        let half_log_g = 0.5 * log_regulator(RegulatorKind::Fluctuation, &t, &x, &f, &p).unwrap();
        for k in 0..=4 {
            let s = k as f64 / 4.0;
            let scaled: Vec<C64> = f.iter().map(|z| z * s).collect();
            assert!(log_regulator(RegulatorKind::LargeField, &t, &x, &scaled, &p).unwrap() <= half_log_g + 1e-12);
        }
    }
}

fn norm_setup() -> (Torus, Arc<Layout>, NormParams, Vec<Probe>) {
    let t = Torus::new(1, 2, 4).unwrap();
    let l = Arc::new(Layout::supersymmetric(8));
    let np = NormParams::new(4, Weight::uniform(0.5, 2, 0, 2.0).unwrap(), NormMode::Exact);
    let probes = ProbeFamily::default().probes(&t, 0.5);
    (t, l, np, probes)
}

#[test]
fn unit_element_has_unit_regulator_norms() {
    let (t, l, np, probes) = norm_setup();
    let one = NElement::one(&l);
    let x: Polymer = [1].into();
    for kind in [RegulatorKind::Fluctuation, RegulatorKind::LargeField] {
        let n = regulator_norm(&one, &t, &x, kind, &reg(), &np, &probes).unwrap();
        assert!((n.lower - 1.0).abs() < 1e-15);
        assert_eq!(n.argmax, "zero");
    }
    let n = regulator_norm(&one, &t, &x, RegulatorKind::Fluctuation, &reg(), &np, &probes).unwrap();
    assert_eq!(n.upper, Some(1.0));
}

#[test]
fn regulator_norm_bounds_and_support() {
    let (t, l, np, probes) = norm_setup();
    let f = tau(&l, 2);
    let x: Polymer = [1].into();
    let n = regulator_norm(&f, &t, &x, RegulatorKind::Fluctuation, &reg(), &np, &probes).unwrap();
    let t0 = crate::norms::tphi_seminorm(&f, &crate::algebra::Field::zero(), &np, None).unwrap().value;
    assert!(t0 <= n.lower);
    assert!(n.lower <= n.upper.unwrap() + 1e-12);
    // X^box of block 1 is sites 0..=5.
    let far = tau(&l, 7);
    assert!(regulator_norm(&far, &t, &x, RegulatorKind::Fluctuation, &reg(), &np, &probes).is_err());
}

#[test]
fn regulator_norm_product_bound() {
    let (t, l, np, probes) = norm_setup();
    let (x, y): (Polymer, Polymer) = ([0].into(), [2].into());
    let f = tau(&l, 1);
    let k = NElement::from_poly(&l, Poly::var(phi(4)).scale(&C64::new(0.0, 2.0))).add(&NElement::one(&l));
    let xy: Polymer = [0, 2].into();
    for kind in [RegulatorKind::Fluctuation, RegulatorKind::LargeField] {
        let nf = regulator_norm(&f, &t, &x, kind, &reg(), &np, &probes).unwrap().lower;
        let nk = regulator_norm(&k, &t, &y, kind, &reg(), &np, &probes).unwrap().lower;
        let nfk = regulator_norm(&f.mul(&k), &t, &xy, kind, &reg(), &np, &probes).unwrap().lower;
        assert!(nfk <= nf * nk * (1.0 + 1e-12));
    }
}

#[test]
fn kkk_chain_for_tau() {
    let (t, l, np, probes) = norm_setup();
    let x: Polymer = [1].into();
    let p = reg();
    let rep = kkk_check(&tau(&l, 2), 2, &t, &x, &p, &np, &probes).unwrap();
    assert!(rep.holds, "{rep:?}");
    assert!(rep.c_a >= 1.0);
    assert!((rep.rho - 2.0 * (0.5f64 / 2.0).powi(3)).abs() < 1e-15);
    let c = NElement::constant(&l, C64::new(3.0, 0.0));
    assert!(kkk_check(&c, 1, &t, &x, &p, &np, &probes).unwrap().holds);
    assert!(kkk_check(&c, 4, &t, &x, &p, &np, &probes).is_err());
}

fn small_covariance(scale: f64) -> DMatrix<f64> {
    let n = 4;
    DMatrix::from_fn(n, n, |i, j| {
        let d = (i as i64 - j as i64).rem_euclid(n as i64).min((j as i64 - i as i64).rem_euclid(n as i64));
        scale * [1.0, 0.3, 0.1][d as usize]
    })
}

#[test]
fn mc_zero_power_is_exact() {
    let t = Torus::new(1, 2, 2).unwrap();
    let mut p = reg();
    p.t = 0.0;
    let x: Polymer = [0, 1].into();
    let r = regulator_expectation_mc(&t, &x, &p, &small_covariance(0.01), 1000, 3).unwrap();
    assert_eq!(r.estimate, 1.0);
    assert_eq!(r.ci_halfwidth, 0.0);
}

#[test]
fn mc_is_deterministic_and_within_bound() {
    let t = Torus::new(1, 2, 2).unwrap();
    let x: Polymer = [0, 1].into();
    let cb = small_covariance(0.005);
    let a = regulator_expectation_mc(&t, &x, &reg(), &cb, 4000, 42).unwrap();
    let b = regulator_expectation_mc(&t, &x, &reg(), &cb, 4000, 42).unwrap();
    assert_eq!(a.estimate.to_bits(), b.estimate.to_bits());
    assert!(a.gate.inside && a.flags.is_empty());
    assert!(a.gate.lambda_max <= a.gate.young + 1e-15);
    assert!(a.estimate <= a.gate.majorant + 3.0 * a.ci_halfwidth);
    assert!(a.estimate <= a.bound + 3.0 * a.ci_halfwidth);
    let big = regulator_expectation_mc(&t, &x, &reg(), &small_covariance(5.0), 200, 1).unwrap();
    assert!(!big.gate.inside && !big.flags.is_empty());
    let csv = mc_csv(&[a]);
    assert!(csv.starts_with("X,t,estimate,bound\n0;1,1,"));
}

#[test]
fn mc_second_moment_matches_covariance() {
    // E conj(phi_0) phi_1 = C_01 and E phi_0 phi_1 = 0 for the sampler.
    let n = 4;
    let cb = small_covariance(1.0);
    let l = crate::linalg::cholesky(&(&cb * 0.5)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let samples = 40_000;
    let (mut acc, mut acc2) = (0.0, 0.0);
    for _ in 0..samples {
        let z1 = nalgebra::DVector::from_fn(n, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal));
        let z2 = nalgebra::DVector::from_fn(n, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal));
        let (u, v) = (&l * z1, &l * z2);
        let p0 = C64::new(u[0], v[0]);
        let p1 = C64::new(u[1], v[1]);
        acc += (p0.conj() * p1).re;
        acc2 += (p0 * p1).re;
    }
    let (m, mm) = (acc / samples as f64, acc2 / samples as f64);
    assert!((m - 0.3).abs() < 0.03, "{m}");
    assert!(mm.abs() < 0.03, "{mm}");
}

#[test]
fn exponential_moment_examples() {
    let c = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.1, 0.2, 0.4]));
    let m = exponential_moment_check(&c).unwrap();
    let exact = (0.9f64 * 0.8 * 0.6).powf(-0.5);
    assert!((m.exact - exact).abs() < 1e-12);
    assert!((m.bound - 0.7f64.exp()).abs() < 1e-12);
    assert!(m.holds());
    assert!(exponential_moment_check(&(c * 2.0)).is_err());
}

#[test]
fn sobolev_examples() {
    let c = lattice_sobolev_check(&[C64::new(2.0, -1.0); 16], 2, 4).unwrap();
    assert!((c.worst_ratio - 1.0 / 2f64.powi(8)).abs() < 1e-15);
    let mut delta = vec![C64::new(0.0, 0.0); 4];
    delta[0] = C64::new(1.0, 0.0);
    let c = lattice_sobolev_check(&delta, 1, 4).unwrap();
    assert!((c.rhs - 136.0).abs() < 1e-12);
    assert!((c.worst_ratio - 1.0 / 136.0).abs() < 1e-15);
    assert!(lattice_sobolev_check(&delta, 1, 3).is_err());
}
