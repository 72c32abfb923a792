//! Brute-force ground truth, written without the determinant, Laplacian
//! or element-product code it is compared against.

use std::collections::BTreeMap;

use crate::algebra::{FieldIndex, Kind, NElement, Poly, Scalar};
use crate::error::{Error, Result};
use crate::gaussian::CovariancePair;
use crate::linalg::Mat;

/// Largest number of integrated fermion generators.
pub const GRASSMANN_LIMIT: usize = 8;
/// Largest number of boson factors in an Isserlis moment.
pub const ISSERLIS_LIMIT: usize = 10;

/// Parity of the number of pairs `(i in a, j in b)` with `i > j`: the sign
/// of `psi^a psi^b` relative to `psi^{a | b}` for disjoint bit sets.
fn merge_sign(a: u32, b: u32) -> bool {
    let mut odd = false;
    let mut rest = a;
    while rest != 0 {
        let i = rest.trailing_zeros();
        rest &= rest - 1;
        // generators of b below i
        odd ^= (b & ((1u32 << i) - 1)).count_ones() % 2 == 1;
    }
    odd
}

/// Dense Grassmann element over `n` generators with scalar coefficients.
#[derive(Clone)]
struct Dense<S> {
    c: Vec<S>,
}

impl<S: Scalar> Dense<S> {
    fn zero(n: usize) -> Self {
        Dense { c: vec![S::zero(); 1 << n] }
    }

    fn mul(&self, o: &Self) -> Self {
        let mut out = Dense { c: vec![S::zero(); self.c.len()] };
        for (a, x) in self.c.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (b, y) in o.c.iter().enumerate() {
                if y.is_zero() || a & b != 0 {
                    continue;
                }
                let v = x.clone() * y.clone();
                let slot = &mut out.c[a | b];
                *slot = if merge_sign(a as u32, b as u32) { slot.clone() - v } else { slot.clone() + v };
            }
        }
        out
    }

    /// `sum_n x^n / n!` for nilpotent `x` without constant term.
    fn exp(&self, n: usize) -> Self {
        let mut out = Dense::zero(n);
        out.c[0] = S::one();
        let mut power = out.clone();
        for k in 1..=n {
            power = power.mul(self);
            let inv = S::one() / S::from_i64(k as i64);
            power.c.iter_mut().for_each(|v| *v = v.clone() * inv.clone());
            for (o, p) in out.c.iter_mut().zip(&power.c) {
                *o = o.clone() + p.clone();
            }
        }
        out
    }
}

/// Sign of writing the canonical sequence `y` as (entries outside `gens`)
/// followed by (entries in `gens`), and the two parts.
fn split(y: &[FieldIndex], gens: &[FieldIndex]) -> (bool, Vec<FieldIndex>, u32) {
    let mut odd = false;
    let mut seen_inner = 0usize;
    let mut outer = Vec::new();
    let mut mask = 0u32;
    for u in y {
        match gens.iter().position(|g| g == u) {
            Some(i) => {
                seen_inner += 1;
                mask |= 1 << i;
            }
            None => {
                odd ^= seen_inner % 2 == 1;
                outer.push(*u);
            }
        }
    }
    (odd, outer, mask)
}

/// Sign of the permutation taking `order` to ascending order.
fn order_sign(order: &[FieldIndex]) -> bool {
    let mut odd = false;
    for i in 0..order.len() {
        for j in i + 1..order.len() {
            odd ^= order[i] > order[j];
        }
    }
    odd
}

fn check_order<S: Scalar>(f: &NElement<S>, order: &[FieldIndex]) -> Result<()> {
    if order.len() > GRASSMANN_LIMIT {
        return Err(Error::TooLarge(format!(
            "{} Grassmann generators, the oracle handles at most {GRASSMANN_LIMIT}",
            order.len()
        )));
    }
    for (i, u) in order.iter().enumerate() {
        if !f.layout.contains(*u) || f.layout.kind(u.species) != Kind::Fermion {
            return Err(Error::Invalid(format!("{u:?} is not a fermion generator of the layout")));
        }
        if order[..i].contains(u) {
            return Err(Error::Invalid(format!("{u:?} listed twice")));
        }
    }
    Ok(())
}

/// `int F` over the generators `order` with the top monomial `psi^order`
/// written on the right, per coefficient of the remaining generators.
/// `weight` multiplies `F` from the left before extraction.
fn integrate<S: Scalar>(f: &NElement<S>, order: &[FieldIndex], weight: &Dense<S>) -> NElement<S> {
    let mut gens = order.to_vec();
    gens.sort();
    let n = gens.len();
    let full = (1u32 << n) - 1;
    let top_odd = order_sign(order);
    // group F by its outer monomial
    let mut grouped: BTreeMap<Vec<FieldIndex>, Vec<(u32, bool, Poly<S>)>> = BTreeMap::new();
    for (y, p) in &f.terms {
        let (odd, outer, mask) = split(y, &gens);
        grouped.entry(outer).or_default().push((mask, odd, p.clone()));
    }
    let mut out = NElement::zero(&f.layout);
    out.trunc = f.trunc;
    for (outer, parts) in grouped {
        let mut acc = Poly::zero();
        for (mask, odd, p) in parts {
            // weight * psi^mask, top coefficient
            let mut c = S::zero();
            for (a, w) in weight.c.iter().enumerate() {
                if w.is_zero() || a as u32 | mask != full || a as u32 & mask != 0 {
                    continue;
                }
                let neg = merge_sign(a as u32, mask) ^ odd ^ top_odd;
                c = if neg { c - w.clone() } else { c + w.clone() };
            }
            if !c.is_zero() {
                acc.add_scaled(&p, &c);
            }
        }
        out.add_term(outer, acc);
    }
    out
}

/// Berezin integral over the generators in `order`, by literal expansion:
/// the coefficient of `psi^order` in each term, other terms dropped.
pub fn oracle_grassmann_integral<S: Scalar>(f: &NElement<S>, order: &[FieldIndex]) -> Result<NElement<S>> {
    check_order(f, order)?;
    let mut one = Dense::zero(order.len());
    one.c[0] = S::one();
    Ok(integrate(f, order, &one))
}

/// `E_C F` over the primed fermions of a doubled-layout element by full
/// expansion of `exp(-S_f)` with `S_f = sum A_kl psi'_k psibar'_l`,
/// `A = C_f^{-1}`, in the order `psibar'_1, psi'_1, psibar'_2, ...`, and
/// division by the integral of `exp(-S_f)`.
pub fn oracle_fermion_expectation<S: Scalar>(f: &NElement<S>, c: &CovariancePair<S>) -> Result<NElement<S>> {
    let layout = &f.layout;
    let mut order = Vec::new();
    let mut blocks: Vec<(u16, &Mat<S>)> = Vec::new();
    for (&s, m) in &c.blocks {
        let primed = 2 * s + 1;
        if layout.species.get(primed as usize).map(|sp| sp.kind) != Some(Kind::Fermion) {
            continue;
        }
        for k in 0..m.n as u32 {
            order.push(FieldIndex::new(primed, true, k));
            order.push(FieldIndex::new(primed, false, k));
        }
        blocks.push((primed, m));
    }
    check_order(f, &order)?;
    let mut gens = order.clone();
    gens.sort();
    let n = gens.len();
    let bit = |u: FieldIndex| 1u32 << gens.iter().position(|g| *g == u).expect("generator");
    let mut minus_action: Dense<S> = Dense::zero(n);
    for (sp, m) in blocks {
        let a = m.inverse()?;
        for k in 0..a.n as u32 {
            for l in 0..a.n as u32 {
                let v = a.get(k as usize, l as usize);
                if v.is_zero() {
                    continue;
                }
                let (x, y) = (bit(FieldIndex::new(sp, false, k)), bit(FieldIndex::new(sp, true, l)));
                // psi_k psibar_l = +/- psi^{x|y}
                let neg = !merge_sign(x, y);
                let slot = &mut minus_action.c[(x | y) as usize];
                *slot = if neg { slot.clone() - v } else { slot.clone() + v };
            }
        }
    }
    let weight = minus_action.exp(n);
    let z = integrate(&NElement::one(layout), &order, &weight).constant_at(&crate::algebra::Field::zero());
    if z.is_zero() {
        return Err(Error::Invalid("fermionic normalisation vanishes".into()));
    }
    Ok(integrate(f, &order, &weight).scale(&(S::one() / z)))
}

/// Wick/Isserlis moment `E prod phi'` of one complex boson species with
/// `E phibar_k phi_l = C_b[k][l]`: the sum over bijections pairing each
/// unbarred factor with a barred one. Real species use all perfect
/// matchings with weight `C[k][l]`.
pub fn oracle_isserlis<S: Scalar>(factors: &[FieldIndex], cb: &Mat<S>, pair: bool) -> Result<S> {
    if factors.len() > ISSERLIS_LIMIT {
        return Err(Error::TooLarge(format!(
            "{} boson factors, the oracle handles at most {ISSERLIS_LIMIT}",
            factors.len()
        )));
    }
    if let Some(u) = factors.iter().find(|u| u.site as usize >= cb.n) {
        return Err(Error::Invalid(format!("{u:?} outside the covariance")));
    }
    if pair {
        let plain: Vec<usize> = factors.iter().filter(|u| !u.conj).map(|u| u.site as usize).collect();
        let barred: Vec<usize> = factors.iter().filter(|u| u.conj).map(|u| u.site as usize).collect();
        if plain.len() != barred.len() {
            return Ok(S::zero());
        }
        let mut used = vec![false; barred.len()];
        Ok(bijections(&plain, &barred, &mut used, cb))
    } else {
        let sites: Vec<usize> = factors.iter().map(|u| u.site as usize).collect();
        if sites.len() % 2 == 1 {
            return Ok(S::zero());
        }
        let mut used = vec![false; sites.len()];
        Ok(matchings(&sites, &mut used, cb))
    }
}

fn bijections<S: Scalar>(plain: &[usize], barred: &[usize], used: &mut [bool], cb: &Mat<S>) -> S {
    let Some((&l, rest)) = plain.split_first() else { return S::one() };
    let mut total = S::zero();
    for j in 0..barred.len() {
        if used[j] {
            continue;
        }
        let w = cb.get(barred[j], l);
        if w.is_zero() {
            continue;
        }
        used[j] = true;
        total = total + w * bijections(rest, barred, used, cb);
        used[j] = false;
    }
    total
}

fn matchings<S: Scalar>(sites: &[usize], used: &mut [bool], c: &Mat<S>) -> S {
    let Some(i) = used.iter().position(|u| !u) else { return S::one() };
    used[i] = true;
    let mut total = S::zero();
    for j in i + 1..sites.len() {
        if used[j] {
            continue;
        }
        used[j] = true;
        total = total + c.get(sites[i], sites[j]) * matchings(sites, used, c);
        used[j] = false;
    }
    used[i] = false;
    total
}
