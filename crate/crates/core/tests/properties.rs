//! Invariants as property tests. Instances come from the seeded generator,
//! with the seed and small shape parameters chosen by proptest.

use std::collections::BTreeSet;
use std::sync::Arc;

use proptest::prelude::*;
use supernorm::algebra::serialize::{from_text, to_text};
use supernorm::gaussian::{combined_expectation, compare, decaying, expect_theta, heat_semigroup, BijectionMap};
use supernorm::lattice::{Dir, MultiIndex};
use supernorm::norms::{pairing, symmetrise, tphi_seminorm};
use supernorm::regulators::{log_regulator, regulator_expectation_mc, RegulatorKind, RegulatorParams};
use supernorm::verify::{run_suite, Gen, InstanceSpec, Shape};
use supernorm::{CovariancePair, Cq, Field, FieldIndex, Layout, NElement, NormMode, NormParams, Scalar, Torus, Weight, C64};

fn spec(seed: u64, sites: usize) -> InstanceSpec {
    InstanceSpec { seed, sites, max_terms: 4, max_degree: 3, ..InstanceSpec::default() }
}

fn gen(seed: u64, sites: usize) -> (InstanceSpec, Gen) {
    let s = spec(seed, sites);
    let g = Gen::new(&s, 0);
    (s, g)
}

fn shape() -> Shape {
    Shape::new(4, 3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn translation_commutes_with_differences(d in 1usize..=2, r in 2usize..=3, m in 1usize..=3, seed: u64, axis in 0usize..2, p in 0u32..=2) {
        let torus = Torus::new(d, r, m).unwrap();
        let n = torus.num_sites();
        let (_, mut g) = gen(seed, 1);
        let f: Vec<Cq> = g.field_values(n, true);
        let e = Dir::plus(axis % d);
        let alphas = MultiIndex::up_to(d, p);
        let alpha = g.pick(&alphas);
        let shift = |h: &[Cq]| -> Vec<Cq> { (0..n).map(|x| h[torus.shift(x, e)].clone()).collect() };
        prop_assert_eq!(torus.apply_multiindex(&shift(&f), &alpha), shift(&torus.apply_multiindex(&f, &alpha)));
    }

    #[test]
    fn blocks_partition_the_torus(d in 1usize..=3, r in 2usize..=3, m in 1usize..=3) {
        let torus = Torus::new(d, r, m).unwrap();
        let mut count = vec![0usize; torus.num_sites()];
        for b in 0..torus.num_blocks() {
            for s in torus.block_sites(b) {
                count[s] += 1;
                prop_assert_eq!(torus.block_of(s), b);
            }
        }
        prop_assert!(count.iter().all(|&c| c == 1));
    }

    #[test]
    fn multiplication_is_associative(seed: u64, sites in 1usize..=3) {
        let (_, mut g) = gen(seed, sites);
        let layout = Arc::new(Layout::supersymmetric(sites));
        let a: NElement<Cq> = g.element(&layout, shape());
        let b: NElement<Cq> = g.element(&layout, shape());
        let c: NElement<Cq> = g.element(&layout, shape());
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
    }

    #[test]
    fn derivatives_commute(seed: u64, sites in 1usize..=3) {
        let (_, mut g) = gen(seed, sites);
        let layout = Arc::new(Layout::supersymmetric(sites));
        let f: NElement<Cq> = g.element(&layout, shape());
        let bosons = layout.indices(supernorm::Kind::Boson);
        let fermions = layout.indices(supernorm::Kind::Fermion);
        let (x, y) = (g.pick(&bosons), g.pick(&fermions));
        let (y1, y2) = (g.pick(&fermions), g.pick(&fermions));
        prop_assert_eq!(f.boson_derivative(&[x]).fermion_derivative(y), f.fermion_derivative(y).boson_derivative(&[x]));
        prop_assert_eq!(
            f.fermion_derivative(y1).fermion_derivative(y2),
            f.fermion_derivative(y2).fermion_derivative(y1).neg()
        );
    }

    #[test]
    fn element_text_round_trips(seed: u64, sites in 1usize..=3) {
        let (_, mut g) = gen(seed, sites);
        let layout = Arc::new(Layout::supersymmetric(sites));
        let f: NElement<Cq> = g.element(&layout, shape());
        prop_assert_eq!(from_text::<Cq>(&to_text(&f)).unwrap(), f);
    }

    #[test]
    fn wick_formula_matches_heat_semigroup(seed: u64, sites in 1usize..=2) {
        let (_, mut g) = gen(seed, sites);
        let base = Arc::new(Layout::supersymmetric(sites));
        let c = CovariancePair::pair(&base, g.spd::<Cq>(sites), g.symmetric_invertible(sites)).unwrap();
        let b = BijectionMap::for_covariance(&base, &c);
        let f: NElement<Cq> = g.element(&base, shape());
        let lhs = expect_theta(&f, &c, &b).unwrap();
        prop_assert!(compare(&lhs, &heat_semigroup(&f, &c, &b, &Cq::from_i64(1))).holds);
    }

    #[test]
    fn unbalanced_monomials_have_zero_expectation(seed: u64, k in 0u32..2, extra in 1u32..4, fermion: bool) {
        let (_, mut g) = gen(seed, 2);
        let base = Arc::new(Layout::supersymmetric(2));
        let c = CovariancePair::pair(&base, g.spd::<Cq>(2), g.symmetric_invertible(2)).unwrap();
        let dl = BijectionMap::for_covariance(&base, &c).doubled_layout(&base);
        // primed phi or psi factors with no conjugate partner
        let f = if fermion {
            NElement::<Cq>::fermion(&dl, FieldIndex::new(3, false, k))
        } else {
            let phi = NElement::<Cq>::boson(&dl, FieldIndex::new(1, false, k));
            (1..extra).fold(phi.clone(), |acc, _| acc.mul(&phi))
        };
        prop_assert!(combined_expectation(&f, &c, &base).unwrap().is_zero());
    }

    #[test]
    fn product_property(seed: u64, sites in 1usize..=2, h in 0.2f64..3.0) {
        let (_, mut g) = gen(seed, sites);
        let layout = Arc::new(Layout::supersymmetric(sites));
        let f: NElement<C64> = g.element(&layout, shape());
        let k: NElement<C64> = g.element(&layout, shape());
        let phi = g.field(&layout, false);
        let p = NormParams::new(4, Weight::uniform(h, 2, 0, 2.0).unwrap(), NormMode::Exact);
        let n = |e: &NElement<C64>| tphi_seminorm(e, &phi, &p, None).unwrap().value;
        prop_assert!(n(&f.mul(&k)) <= n(&f) * n(&k) * (1.0 + 1e-12));
        prop_assert!(f.constant_at(&phi).norm() <= n(&f) * (1.0 + 1e-12));
    }

    #[test]
    fn pairing_ignores_symmetrisation(seed: u64, sites in 1usize..=2) {
        let (_, mut g) = gen(seed, sites);
        let layout = Arc::new(Layout::supersymmetric(sites));
        let f: NElement<Cq> = g.element(&layout, shape());
        let t = g.test_function::<Cq>(&layout, 4, 6, false);
        let phi: Field<Cq> = g.field(&layout, false);
        prop_assert_eq!(pairing(&f, &t, &phi), pairing(&f, &symmetrise(&t, &layout), &phi));
    }

    #[test]
    fn regulators_grow_with_the_set(seed: u64, mask in 1u32..256, sub in 0u32..256) {
        let torus = Torus::new(1, 2, 4).unwrap();
        let (_, mut g) = gen(seed, 1);
        let phi: Vec<C64> = g.field_values::<C64>(8, false).iter().map(|z| z.to_c64()).collect();
        let reg = RegulatorParams::new(1.0, 1.0, 1, 1.1, 1.0).unwrap();
        let y: BTreeSet<usize> = (0..8).filter(|s| mask & (1 << s) != 0).collect();
        let x: BTreeSet<usize> = y.iter().copied().filter(|s| sub & (1 << s) != 0).collect();
        for kind in [RegulatorKind::Fluctuation, RegulatorKind::LargeField] {
            let (lx, ly) = (log_regulator(kind, &torus, &x, &phi, &reg).unwrap(), log_regulator(kind, &torus, &y, &phi, &reg).unwrap());
            prop_assert!(lx <= ly * (1.0 + 1e-12) + 1e-15);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn monte_carlo_is_seed_deterministic(seed: u64) {
        let torus = Torus::new(1, 2, 2).unwrap();
        let reg = RegulatorParams::new(1.0, 1.0, 1, 1.1, 1.0).unwrap();
        let x: BTreeSet<usize> = (0..torus.num_blocks()).collect();
        let cb = decaying::<C64>(4, &C64::new(0.5, 0.0)).to_f64() * 0.1;
        let a = regulator_expectation_mc(&torus, &x, &reg, &cb, 300, seed).unwrap();
        let b = regulator_expectation_mc(&torus, &x, &reg, &cb, 300, seed).unwrap();
        prop_assert_eq!(a.estimate.to_bits(), b.estimate.to_bits());
    }

    #[test]
    fn reports_depend_only_on_spec_and_seed(seed: u64) {
        let s = spec(seed, 2);
        let a = run_suite("theta-adjoint", &s, 4).unwrap();
        let b = run_suite("theta-adjoint", &s, 4).unwrap();
        prop_assert!(a.same_outcome(&b));
    }
}
