//! Exact Gaussian identities over complex rationals.

use std::sync::Arc;

use num_traits::{One, Zero};

use super::common::{block_diagonal, of_kind, primed, random_pair, unprimed};
use crate::algebra::{BMono, Cq, Field, FieldIndex, Kind, Layout, NElement};
use crate::error::Result;
use crate::gaussian::{
    combined_expectation, compare, convolution_check, expect_theta, factorisation_check, fermion_expectation,
    fermion_expectation_by_integration, grassmann_integral, heat_equation_check, heat_semigroup,
    integration_by_parts_check, standard_order, BijectionMap, CovariancePair,
};
use crate::linalg::det;
use crate::verify::instance::{Gen, InstanceSpec, Shape};
use crate::verify::oracles::{oracle_fermion_expectation, oracle_grassmann_integral, oracle_isserlis};
use crate::verify::report::Trial;

/// Sites for the trial: cycles through `1..=min(sites, 3)`.
fn sites(spec: &InstanceSpec, trial: usize) -> usize {
    1 + trial % spec.sites.min(3)
}

fn identity(outcome: crate::gaussian::CheckOutcome, what: &str) -> Trial {
    Trial::exact(outcome.holds, || format!("{what}: residual {:e}", outcome.residual))
}

fn mono(layout: &Arc<Layout>, fermions: &[FieldIndex]) -> NElement<Cq> {
    NElement::monomial(layout, Cq::one(), BMono::one(), fermions)
}

pub fn wick_heat(spec: &InstanceSpec, gen: &mut Gen, _trial: usize) -> Result<Trial> {
    let s = random_pair::<Cq>(gen, spec.sites)?;
    let f = gen.element(&s.base, Shape::new(spec.max_terms, spec.max_degree));
    let lhs = expect_theta(&f, &s.c, &s.b)?;
    let rhs = heat_semigroup(&f, &s.c, &s.b, &Cq::one());
    Ok(identity(compare(&lhs, &rhs), "E theta P != exp(Delta/2) P"))
}

pub fn convolution(spec: &InstanceSpec, gen: &mut Gen, trial: usize) -> Result<Trial> {
    let m = sites(spec, trial);
    let s = random_pair::<Cq>(gen, m)?;
    let c2 = CovariancePair::pair(&s.base, gen.spd(m), gen.symmetric_invertible(m))?;
    let f = gen.element(&s.base, Shape::new(spec.max_terms, spec.max_degree));
    Ok(identity(convolution_check(&f, &s.c, &c2, &s.b)?, "convolution"))
}

pub fn factorisation(spec: &InstanceSpec, gen: &mut Gen, _trial: usize) -> Result<Trial> {
    // site 0 is uncorrelated with sites 1 and 2
    let base = Arc::new(Layout::supersymmetric(3));
    let cb = block_diagonal(&[gen.spd::<Cq>(1), gen.spd(2)]);
    let cf = block_diagonal(&[gen.symmetric_invertible::<Cq>(1), gen.symmetric_invertible(2)]);
    let c = CovariancePair::pair(&base, cb, cf)?;
    let b = BijectionMap::for_covariance(&base, &c);
    let dl = b.doubled_layout(&base);
    let outer = unprimed(&dl);
    let inner = primed(&dl);
    let pool = |first: bool| -> Vec<FieldIndex> {
        let mut p: Vec<FieldIndex> = inner.iter().copied().filter(|u| (u.site == 0) == first).collect();
        p.extend(&outer);
        p
    };
    let shape = Shape::new(spec.max_terms.min(4), spec.max_degree);
    let f1 = gen.element_on(&dl, &pool(true), shape);
    let f2 = gen.element_on(&dl, &pool(false), shape);
    Ok(identity(factorisation_check(&f1, &f2, &c, &b, &base)?, "E(F1 F2) != E F1 E F2"))
}

/// All subsets of the primed fermions of a doubled layout as monomials,
/// times a random factor on the unprimed indices.
pub fn determinant_formula(spec: &InstanceSpec, gen: &mut Gen, trial: usize) -> Result<Trial> {
    let m = 1 + trial % 3;
    let s = random_pair::<Cq>(gen, m)?;
    let gens = of_kind(&s.dl, &primed(&s.dl), Kind::Fermion);
    let outer = unprimed(&s.dl);
    let mut parts = Vec::new();
    for mask in 0u32..(1 << gens.len()) {
        let ys: Vec<FieldIndex> = (0..gens.len()).filter(|i| mask & (1 << i) != 0).map(|i| gens[i]).collect();
        let tail = gen.element_on(&s.dl, &outer, Shape::new(2, spec.max_degree.min(3)));
        let g = mono(&s.dl, &ys).mul(&NElement::one(&s.dl).add(&tail));
        let det_route = fermion_expectation(&g, &s.c);
        let oracle = oracle_fermion_expectation(&g, &s.c)?;
        parts.push(identity(compare(&det_route, &oracle), &format!("monomial {ys:?}")));
    }
    // E psibar_{k1} psi_{l1} ... psibar_{kn} psi_{ln} = det C_f[k_i][l_j]
    let cf = s.c.cf(&s.base).expect("fermion block").clone();
    let n = 1 + gen.below(m);
    let mut ks: Vec<u32> = (0..m as u32).collect();
    let mut ls = ks.clone();
    for v in [&mut ks, &mut ls] {
        for i in (1..v.len()).rev() {
            let j = gen.below(i + 1);
            v.swap(i, j);
        }
    }
    let mut g = NElement::one(&s.dl);
    for i in 0..n {
        g = g.mul(&NElement::fermion(&s.dl, FieldIndex::new(3, true, ks[i])));
        g = g.mul(&NElement::fermion(&s.dl, FieldIndex::new(3, false, ls[i])));
    }
    let rows: Vec<Vec<Cq>> = (0..n).map(|i| (0..n).map(|j| cf.get(ks[i] as usize, ls[j] as usize)).collect()).collect();
    let want = det(rows);
    let got = combined_expectation(&g, &s.c, &s.base)?.constant_at(&Field::zero());
    parts.push(Trial::exact(got == want, || format!("pair product {ks:?}/{ls:?}: det route gives {got}")));
    Ok(Trial::all(parts))
}

pub fn moments(_spec: &InstanceSpec, gen: &mut Gen, trial: usize) -> Result<Trial> {
    let m = 1 + trial % 3;
    let s = random_pair::<Cq>(gen, m)?;
    let cb = s.c.cb(&s.base).expect("boson block").clone();
    let cf = s.c.cf(&s.base).expect("fermion block").clone();
    let big = s.c.assembled_fermion(1).expect("assembled fermion covariance");
    let e = |g: NElement<Cq>| -> Result<Cq> { Ok(combined_expectation(&g, &s.c, &s.base)?.constant_at(&Field::zero())) };
    let pair = |u: FieldIndex, v: FieldIndex, fermion: bool| {
        if fermion {
            NElement::fermion(&s.dl, u).mul(&NElement::fermion(&s.dl, v))
        } else {
            NElement::boson(&s.dl, u).mul(&NElement::boson(&s.dl, v))
        }
    };
    let pos = |u: FieldIndex| u.site as usize + if u.conj { m } else { 0 };
    let mut parts = Vec::new();
    for k in 0..m as u32 {
        for l in 0..m as u32 {
            let (ku, lu) = (k as usize, l as usize);
            let phibar_phi = e(pair(FieldIndex::new(1, true, k), FieldIndex::new(1, false, l), false))?;
            let phi_phi = e(pair(FieldIndex::new(1, false, k), FieldIndex::new(1, false, l), false))?;
            let bar_bar = e(pair(FieldIndex::new(1, true, k), FieldIndex::new(1, true, l), false))?;
            let psibar_psi = e(pair(FieldIndex::new(3, true, k), FieldIndex::new(3, false, l), true))?;
            parts.push(Trial::exact(phibar_phi == cb.get(ku, lu), || format!("E phibar_{k} phi_{l}")));
            parts.push(Trial::exact(phi_phi.is_zero() && bar_bar.is_zero(), || format!("E phi phi at {k},{l}")));
            parts.push(Trial::exact(psibar_psi == cf.get(ku, lu), || format!("E psibar_{k} psi_{l}")));
        }
    }
    let fermions = of_kind(&s.dl, &primed(&s.dl), Kind::Fermion);
    for &u in &fermions {
        for &v in &fermions {
            let got = e(pair(u, v, true))?;
            let want = -big.get(pos(u), pos(v));
            parts.push(Trial::exact(got == want, || format!("E psi_u psi_v at {u:?}, {v:?}")));
        }
    }
    Ok(Trial::all(parts))
}

pub fn oracle_agreement(spec: &InstanceSpec, gen: &mut Gen, _trial: usize) -> Result<Trial> {
    let s = random_pair::<Cq>(gen, 2)?;
    let mut parts = Vec::new();
    // fermions: random elements on the full doubled layout
    for _ in 0..4 {
        let g = gen.element(&s.dl, Shape::new(spec.max_terms, spec.max_degree));
        parts.push(identity(compare(&fermion_expectation(&g, &s.c), &oracle_fermion_expectation(&g, &s.c)?), "fermion oracle"));
        let (order, species) = standard_order(&s.dl, &s.c);
        let lhs = grassmann_integral(&g, &order, &species)?;
        parts.push(identity(compare(&lhs, &oracle_grassmann_integral(&g, &order)?), "Grassmann oracle"));
    }
    // bosons: every primed monomial of degree <= 4 against Isserlis
    let cb = s.c.cb(&s.base).expect("boson block").clone();
    let bosons = of_kind(&s.dl, &primed(&s.dl), Kind::Boson);
    let mut stack: Vec<Vec<FieldIndex>> = vec![vec![]];
    while let Some(xs) = stack.pop() {
        let g = NElement::monomial(&s.dl, Cq::one(), BMono::from_powers(xs.iter().map(|&u| (u, 1)).collect()), &[]);
        let got = combined_expectation(&g, &s.c, &s.base)?.constant_at(&Field::zero());
        let want = oracle_isserlis(&xs, &cb, true)?;
        parts.push(Trial::exact(got == want, || format!("boson moment {xs:?}")));
        if xs.len() < 4 {
            for &u in bosons.iter().filter(|u| xs.last().map_or(true, |l| *l <= **u)) {
                let mut ys = xs.clone();
                ys.push(u);
                stack.push(ys);
            }
        }
    }
    Ok(Trial::all(parts))
}

pub fn integration_by_parts(spec: &InstanceSpec, gen: &mut Gen, trial: usize) -> Result<Trial> {
    let s = random_pair::<Cq>(gen, sites(spec, trial))?;
    let g = gen.element(&s.dl, Shape::new(spec.max_terms, spec.max_degree));
    let x = gen.pick(&of_kind(&s.dl, &primed(&s.dl), Kind::Fermion));
    Ok(identity(integration_by_parts_check(&g, x, &s.c)?, "integration by parts"))
}

pub fn heat_equation(spec: &InstanceSpec, gen: &mut Gen, trial: usize) -> Result<Trial> {
    let s = random_pair::<Cq>(gen, sites(spec, trial))?;
    let f = gen.element(&s.base, Shape::new(spec.max_terms, spec.max_degree));
    Ok(identity(heat_equation_check(&f, &s.c, &s.b)?, "heat equation"))
}

pub fn wick_routes(spec: &InstanceSpec, gen: &mut Gen, trial: usize) -> Result<Trial> {
    let s = random_pair::<Cq>(gen, 1 + trial % 3)?;
    let g = gen.element(&s.dl, Shape::new(spec.max_terms, spec.max_degree + 2));
    let lhs = fermion_expectation(&g, &s.c);
    let rhs = fermion_expectation_by_integration(&g, &s.c)?;
    Ok(identity(compare(&lhs, &rhs), "determinant and integration routes"))
}

pub fn moment_parity(spec: &InstanceSpec, gen: &mut Gen, trial: usize) -> Result<Trial> {
    let s = random_pair::<Cq>(gen, sites(spec, trial))?;
    let pool = primed(&s.dl);
    let len = 1 + gen.below(spec.max_degree as usize);
    let mut us: Vec<FieldIndex> = (0..len).map(|_| gen.pick(&pool)).collect();
    // unbalance one species by an extra unbarred factor
    let balanced = |us: &[FieldIndex], sp: u16| {
        us.iter().filter(|u| u.species == sp && u.conj).count() == us.iter().filter(|u| u.species == sp && !u.conj).count()
    };
    if balanced(&us, 1) && balanced(&us, 3) {
        us.push(FieldIndex::new(1, false, 0));
    }
    let (bos, fer): (Vec<FieldIndex>, Vec<FieldIndex>) = us.iter().partition(|u| s.dl.kind(u.species) == Kind::Boson);
    let g = NElement::monomial(&s.dl, Cq::one(), BMono::from_powers(bos.iter().map(|&u| (u, 1)).collect()), &fer);
    let e = combined_expectation(&g, &s.c, &s.base)?;
    Ok(Trial::exact(e.is_zero(), || format!("unbalanced moment {us:?} has nonzero expectation")))
}
