use std::sync::Arc;

use num_traits::One;

use super::*;
use crate::algebra::{BMono, Cq, Field, FieldIndex, Layout, NElement, Scalar};
use crate::linalg::Mat;

fn q(n: i64) -> Cq {
    Cq::from_i64(n)
}

fn sym2(a: i64, b: i64, c: i64) -> Mat<Cq> {
    Mat::from_rows(vec![vec![q(a), q(b)], vec![q(b), q(c)]]).unwrap()
}

struct Setup {
    base: Arc<Layout>,
    dl: Arc<Layout>,
    c: CovariancePair<Cq>,
    b: BijectionMap,
}

fn setup(cb: Mat<Cq>, cf: Mat<Cq>) -> Setup {
    let base = Arc::new(Layout::supersymmetric(cb.n));
    let c = CovariancePair::pair(&base, cb, cf).unwrap();
    let b = BijectionMap::for_covariance(&base, &c);
    let dl = b.doubled_layout(&base);
    Setup { base, dl, c, b }
}

// primed generators on the doubled supersymmetric layout
fn xi(k: u32) -> FieldIndex {
    FieldIndex::new(1, false, k)
}
fn xib(k: u32) -> FieldIndex {
    FieldIndex::new(1, true, k)
}
fn eta(k: u32) -> FieldIndex {
    FieldIndex::new(3, false, k)
}
fn etab(k: u32) -> FieldIndex {
    FieldIndex::new(3, true, k)
}

fn mono(l: &Arc<Layout>, bos: &[FieldIndex], fer: &[FieldIndex]) -> NElement<Cq> {
    let b = BMono::from_powers(bos.iter().map(|&u| (u, 1)).collect());
    NElement::monomial(l, Cq::one(), b, fer)
}

fn expect(s: &Setup, g: &NElement<Cq>) -> Cq {
    combined_expectation(g, &s.c, &s.base).unwrap().constant_at(&Field::zero())
}

#[test]
fn grassmann_integral_examples() {
    let s = setup(sym2(2, 1, 3), sym2(2, 1, 3));
    let (order, species) = standard_order(&s.dl, &s.c);
    let no_primed = mono(&s.dl, &[], &[FieldIndex::new(2, false, 0)]);
    assert!(grassmann_integral(&no_primed, &order, &species).unwrap().is_zero());

    let g = mono(&s.dl, &[FieldIndex::new(0, false, 1)], &[FieldIndex::new(2, true, 0)]);
    let mut full = g.clone();
    for &u in &order {
        full = full.mul(&NElement::fermion(&s.dl, u));
    }
    assert_eq!(grassmann_integral(&full, &order, &species).unwrap(), g);

    let two = mono(&s.dl, &[], &[eta(0), eta(1)]);
    let v = grassmann_integral(&two, &[eta(1), eta(0)], &[3]);
    assert!(v.is_err(), "order must cover the conjugate generators too");
    let single = Arc::new(Layout::new(vec![crate::algebra::Species {
        name: "chi".into(),
        kind: crate::algebra::Kind::Fermion,
        pair: false,
        sites: 2,
    }])
    .unwrap());
    let a = FieldIndex::new(0, false, 0);
    let bb = FieldIndex::new(0, false, 1);
    let two = mono(&single, &[], &[a, bb]);
    let r = grassmann_integral(&two, &[bb, a], &[0]).unwrap();
    assert_eq!(r, NElement::constant(&single, q(-1)));
    assert!(grassmann_integral(&two, &[a], &[0]).is_err());
}

#[test]
fn fermion_moments() {
    let s = setup(sym2(2, 1, 3), sym2(5, 2, 7));
    let cf = s.c.cf(&s.base).unwrap().clone();
    for k in 0..2u32 {
        for l in 0..2u32 {
            let g = mono(&s.dl, &[], &[etab(k), eta(l)]);
            assert_eq!(expect(&s, &g), cf.get(k as usize, l as usize));
        }
    }
    let big = s.c.assembled_fermion(1).unwrap();
    let gens: Vec<FieldIndex> = (0..2).map(eta).chain((0..2).map(etab)).collect();
    for (i, &u) in gens.iter().enumerate() {
        for (j, &v) in gens.iter().enumerate() {
            let g = NElement::fermion(&s.dl, u).mul(&NElement::fermion(&s.dl, v));
            assert_eq!(expect(&s, &g), -big.get(i, j), "pair {u:?} {v:?}");
        }
    }
    let g = mono(&s.dl, &[], &[etab(0), eta(0), etab(1), eta(1)]);
    assert_eq!(expect(&s, &g), q(5 * 7 - 2 * 2));
}

#[test]
fn determinant_and_integration_routes_agree() {
    let s = setup(sym2(2, 1, 3), sym2(5, 2, 7));
    let gens = [eta(0), eta(1), etab(0), etab(1)];
    for mask in 0u32..16 {
        let fer: Vec<FieldIndex> = (0..4).filter(|i| mask >> i & 1 == 1).map(|i| gens[i]).collect();
        let g = mono(&s.dl, &[FieldIndex::new(0, false, 0)], &fer);
        let a = fermion_expectation(&g, &s.c);
        let b = fermion_expectation_by_integration(&g, &s.c).unwrap();
        assert_eq!(a, b, "mask {mask}");
    }
}

#[test]
fn boson_moments() {
    let s = setup(sym2(2, 1, 3), sym2(5, 2, 7));
    assert_eq!(expect(&s, &mono(&s.dl, &[xib(0), xi(1)], &[])), q(1));
    assert_eq!(expect(&s, &mono(&s.dl, &[xib(1), xi(1)], &[])), q(3));
    assert_eq!(expect(&s, &mono(&s.dl, &[xi(0), xi(1)], &[])), q(0));
    assert_eq!(expect(&s, &mono(&s.dl, &[xib(0), xib(0)], &[])), q(0));
    let four = NElement::monomial(&s.dl, Cq::one(), BMono::from_powers(vec![(xi(0), 2), (xib(0), 2)]), &[]);
    assert_eq!(expect(&s, &four), q(2 * 2 * 2));
    assert_eq!(expect(&s, &NElement::one(&s.dl)), q(1));
}

#[test]
fn supersymmetric_cancellation() {
    let c = sym2(3, 1, 2);
    let s = setup(c.clone(), c);
    let sum = mono(&s.dl, &[xib(0), xi(1)], &[]).add(&mono(&s.dl, &[], &[etab(0), eta(1)]));
    assert_eq!(expect(&s, &sum), q(2));
    // tau = phi phibar + psi psibar at one site
    let tau = mono(&s.dl, &[xi(0), xib(0)], &[]).add(&mono(&s.dl, &[], &[eta(0), etab(0)]));
    assert_eq!(expect(&s, &tau), q(0));
    assert!(s.c.is_supersymmetric(&s.base));
}

#[test]
fn laplacian_examples() {
    let s = setup(sym2(2, 1, 3), sym2(5, 2, 7));
    let phi = |c, k| FieldIndex::new(0, c, k);
    let psi = |c, k| FieldIndex::new(1, c, k);
    let f = mono(&s.base, &[phi(false, 0), phi(true, 1)], &[]);
    let half = laplacian(&f, &s.c, &s.b).scale(&Cq::from_ratio(1, 2));
    assert_eq!(half, NElement::constant(&s.base, q(1)));
    assert!(laplacian(&NElement::constant(&s.base, q(4)), &s.c, &s.b).is_zero());
    let g = mono(&s.base, &[], &[psi(true, 0), psi(false, 1)]);
    let half = laplacian(&g, &s.c, &s.b).scale(&Cq::from_ratio(1, 2));
    assert_eq!(half, NElement::constant(&s.base, q(2)));
}

#[test]
fn heat_semigroup_examples() {
    let s = setup(sym2(2, 1, 3), sym2(5, 2, 7));
    let phi = |c, k| FieldIndex::new(0, c, k);
    let f = mono(&s.base, &[phi(false, 0), phi(true, 1)], &[]);
    assert_eq!(heat_semigroup(&f, &s.c, &s.b, &q(0)), f);
    let t = Cq::from_ratio(1, 3);
    let expected = f.add(&laplacian(&f, &s.c, &s.b).scale(&(t.clone() / q(2))));
    assert_eq!(heat_semigroup(&f, &s.c, &s.b, &t), expected);
    // Wick: E theta P = exp(Delta/2) P
    let p = NElement::monomial(
        &s.base,
        q(3),
        BMono::from_powers(vec![(phi(false, 0), 2), (phi(true, 1), 1), (phi(true, 0), 1)]),
        &[FieldIndex::new(1, true, 0), FieldIndex::new(1, false, 1)],
    );
    assert_eq!(expect_theta(&p, &s.c, &s.b).unwrap(), heat_semigroup(&p, &s.c, &s.b, &q(1)));
}

#[test]
fn theta_examples() {
    let s = setup(sym2(2, 1, 3), sym2(5, 2, 7));
    let psi0 = FieldIndex::new(1, false, 0);
    let f = NElement::<Cq>::fermion(&s.base, psi0);
    let t = theta(&f, &q(1), &s.b);
    let expect = NElement::fermion(&s.dl, FieldIndex::new(2, false, 0)).add(&NElement::fermion(&s.dl, eta(0)));
    assert_eq!(t, expect);
    let g = mono(&s.base, &[FieldIndex::new(0, false, 1)], &[psi0, FieldIndex::new(1, true, 1)]);
    let lifted = g.relabel(&s.dl, lift_index);
    assert_eq!(theta(&g, &q(0), &s.b), lifted);
    assert_eq!(theta(&f.mul(&g).add(&g), &q(1), &s.b), theta(&f, &q(1), &s.b).mul(&theta(&g, &q(1), &s.b)).add(&theta(&g, &q(1), &s.b)));
}

#[test]
fn external_sites_are_untouched() {
    let base = Arc::new(Layout::supersymmetric(3));
    let c = CovariancePair::pair(&base, sym2(2, 1, 3), sym2(5, 2, 7)).unwrap();
    let b = BijectionMap::restricted(&base, &[(0, vec![0, 1]), (1, vec![0, 1])]).unwrap();
    let ext = mono(&base, &[FieldIndex::new(0, false, 2)], &[FieldIndex::new(1, true, 2)]);
    assert_eq!(expect_theta(&ext, &c, &b).unwrap(), ext);
    assert!(laplacian(&ext, &c, &b).is_zero());
}

#[test]
fn convolution_examples() {
    let s = setup(sym2(2, 1, 3), sym2(5, 2, 7));
    let c2 = CovariancePair::pair(&s.base, sym2(1, 0, 1), sym2(3, -1, 2)).unwrap();
    let phi = |c, k| FieldIndex::new(0, c, k);
    let psi = |c, k| FieldIndex::new(1, c, k);
    for f in [
        NElement::one(&s.base),
        mono(&s.base, &[phi(false, 0), phi(true, 1)], &[]),
        mono(&s.base, &[], &[psi(true, 0), psi(false, 1)]),
        mono(&s.base, &[phi(false, 0), phi(true, 1), phi(true, 0)], &[psi(true, 0), psi(false, 1)]),
    ] {
        let r = convolution_check(&f, &s.c, &c2, &s.b).unwrap();
        assert!(r.holds && r.residual == 0.0);
    }
}

#[test]
fn factorisation_examples() {
    let c = sym2(3, 0, 2);
    let s = setup(c.clone(), c);
    let f1 = mono(&s.dl, &[], &[etab(0), eta(0)]);
    let f2 = mono(&s.dl, &[], &[etab(1), eta(1)]);
    assert!(factorisation_check(&f1, &f2, &s.c, &s.b, &s.base).unwrap().holds);
    let g1 = mono(&s.dl, &[xib(0), xi(0), FieldIndex::new(0, false, 1)], &[]);
    let g2 = mono(&s.dl, &[xib(1), xi(1)], &[FieldIndex::new(2, false, 0)]);
    assert!(factorisation_check(&g1, &g2, &s.c, &s.b, &s.base).unwrap().holds);
    let one = NElement::one(&s.dl);
    assert!(factorisation_check(&one, &one, &s.c, &s.b, &s.base).unwrap().holds);

    let coupled = setup(sym2(3, 1, 2), sym2(3, 1, 2));
    let err = factorisation_check(&f1, &f2, &coupled.c, &coupled.b, &coupled.base);
    assert!(matches!(err, Err(crate::Error::Precondition(_))));
    let err = factorisation_check(&f1, &f1, &s.c, &s.b, &s.base);
    assert!(matches!(err, Err(crate::Error::Precondition(_))));
}

#[test]
fn integration_by_parts_and_heat_equation() {
    let s = setup(sym2(2, 1, 3), sym2(5, 2, 7));
    let g = mono(&s.dl, &[xi(0)], &[eta(1), etab(0), etab(1)]).add(&mono(&s.dl, &[], &[eta(0)]));
    for x in [eta(0), eta(1), etab(0), etab(1)] {
        assert!(integration_by_parts_check(&g, x, &s.c).unwrap().holds);
    }
    let phi = |c, k| FieldIndex::new(0, c, k);
    let f = NElement::monomial(
        &s.base,
        q(2),
        BMono::from_powers(vec![(phi(false, 0), 2), (phi(true, 1), 2)]),
        &[FieldIndex::new(1, true, 0), FieldIndex::new(1, false, 1)],
    );
    assert!(heat_equation_check(&f, &s.c, &s.b).unwrap().holds);
}

#[test]
fn decaying_covariance_is_valid() {
    let base = Layout::supersymmetric(4);
    let c = decaying(4, &Cq::from_ratio(1, 2));
    assert!(CovariancePair::supersymmetric(&base, c).is_ok());
}
