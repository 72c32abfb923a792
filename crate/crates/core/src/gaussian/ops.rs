use std::collections::BTreeSet;
use std::sync::Arc;

use super::covariance::{lift_index, primed_index, BijectionMap, CovariancePair};
use crate::algebra::{perm_sign, FieldIndex, Kind, Layout, NElement, Scalar};
use crate::error::{Error, Result};

/// A second-order operator `sum c * d_u d_v` (bosons) plus
/// `sum c * i_u i_v` (fermions).
struct SecondOrder<S> {
    boson: Vec<(FieldIndex, FieldIndex, S)>,
    fermion: Vec<(FieldIndex, FieldIndex, S)>,
}

impl<S: Scalar> SecondOrder<S> {
    /// Half Laplacian with the covariance blocks placed on the indices
    /// produced by `at(species, conj, primed_site)`; `None` drops a row.
    fn half_laplacian(
        layout: &Layout,
        c: &CovariancePair<S>,
        at: impl Fn(u16, bool, u32) -> Option<FieldIndex>,
    ) -> Self {
        let mut op = SecondOrder { boson: Vec::new(), fermion: Vec::new() };
        let half = S::from_ratio(1, 2);
        for (&s, m) in &c.blocks {
            let sp = &layout.species[s as usize];
            for k in 0..m.n as u32 {
                for l in 0..m.n as u32 {
                    let v = m.get(k as usize, l as usize);
                    if v.is_zero() {
                        continue;
                    }
                    let (a, b) = if sp.pair {
                        (at(s, false, k), at(s, true, l))
                    } else {
                        (at(s, false, k), at(s, false, l))
                    };
                    let (Some(a), Some(b)) = (a, b) else { continue };
                    match (sp.kind, sp.pair) {
                        (Kind::Boson, true) => op.boson.push((a, b, v)),
                        (Kind::Boson, false) => op.boson.push((a, b, v * half.clone())),
                        (Kind::Fermion, _) => op.fermion.push((a, b, v)),
                    }
                }
            }
        }
        op
    }

    fn apply(&self, f: &NElement<S>) -> NElement<S> {
        let mut out = NElement::zero(&f.layout);
        out.trunc = f.trunc;
        for (u, v, c) in &self.boson {
            let d = f.boson_derivative(&[*u, *v]);
            if !d.is_zero() {
                out = out.add(&d.scale(c));
            }
        }
        for (u, v, c) in &self.fermion {
            let d = f.fermion_derivative(*v).fermion_derivative(*u);
            if !d.is_zero() {
                out = out.add(&d.scale(c));
            }
        }
        out
    }

    /// `sum_n (t L)^n / n! F`; terminates because `L` lowers degree by 2.
    fn exp_apply(&self, f: &NElement<S>, t: &S) -> NElement<S> {
        let mut out = f.clone();
        let mut term = f.clone();
        let mut n = 1i64;
        loop {
            term = self.apply(&term).scale(&(t.clone() / S::from_i64(n)));
            if term.is_zero() {
                break;
            }
            out = out.add(&term);
            n += 1;
        }
        out
    }
}

fn base_op<S: Scalar>(layout: &Layout, c: &CovariancePair<S>, b: &BijectionMap) -> SecondOrder<S> {
    SecondOrder::half_laplacian(layout, c, |s, conj, k| {
        b.unprime_site(s, k).map(|x| FieldIndex::new(s, conj, x))
    })
}

fn primed_op<S: Scalar>(layout: &Layout, c: &CovariancePair<S>) -> SecondOrder<S> {
    SecondOrder::half_laplacian(layout, c, |s, conj, k| Some(FieldIndex::new(2 * s + 1, conj, k)))
}

/// `Delta_C F`. External indices contribute nothing.
pub fn laplacian<S: Scalar>(f: &NElement<S>, c: &CovariancePair<S>, b: &BijectionMap) -> NElement<S> {
    base_op(&f.layout, c, b).apply(f).scale(&S::from_i64(2))
}

/// `exp(t Delta_C / 2) F` for polynomial `F`.
pub fn heat_semigroup<S: Scalar>(f: &NElement<S>, c: &CovariancePair<S>, b: &BijectionMap, t: &S) -> NElement<S> {
    base_op(&f.layout, c, b).exp_apply(f, t)
}

/// `theta_t F` on the doubled layout: `psi_y -> psi_y + t psi_y'` and
/// `phi_x -> phi_x + t xi_x'`, external indices fixed.
pub fn theta<S: Scalar>(f: &NElement<S>, t: &S, b: &BijectionMap) -> NElement<S> {
    let dl = b.doubled_layout(&f.layout);
    let shift = |u: FieldIndex| {
        let mut v = vec![(lift_index(u), S::one())];
        if let Some(p) = primed_index(b, u) {
            if !t.is_zero() {
                v.push((p, t.clone()));
            }
        }
        v
    };
    let mut out = NElement::zero(&dl);
    out.trunc = f.trunc;
    for (y, p) in &f.terms {
        let mut acc = NElement::from_poly(&dl, p.substitute(shift));
        for &u in y {
            let mut g = NElement::fermion(&dl, lift_index(u));
            if let Some(pu) = primed_index(b, u) {
                g = g.add(&NElement::fermion(&dl, pu).scale(t));
            }
            acc = acc.mul(&g);
            if acc.is_zero() {
                break;
            }
        }
        out = out.add(&acc);
    }
    out
}

/// Moves an element of the doubled layout with no primed indices back to
/// the base layout.
pub fn project_to_base<S: Scalar>(g: &NElement<S>, base: &Arc<Layout>) -> Result<NElement<S>> {
    let primed = |u: &FieldIndex| u.species % 2 == 1;
    for (y, p) in &g.terms {
        if y.iter().any(primed) || p.terms.keys().any(|m| m.indices().any(|u| primed(&u))) {
            return Err(Error::Invalid("element still depends on integrated fields".into()));
        }
    }
    Ok(g.relabel(base, |u| FieldIndex::new(u.species / 2, u.conj, u.site)))
}

/// Berezin integral over the generators of `species`, taken in `order`:
/// the coefficient of `psi^order` with the reordering sign, other terms
/// dropped.
pub fn grassmann_integral<S: Scalar>(f: &NElement<S>, order: &[FieldIndex], species: &[u16]) -> Result<NElement<S>> {
    let expected: BTreeSet<FieldIndex> = f
        .layout
        .indices(Kind::Fermion)
        .into_iter()
        .filter(|u| species.contains(&u.species))
        .collect();
    let given: BTreeSet<FieldIndex> = order.iter().copied().collect();
    if given.len() != order.len() || given != expected {
        return Err(Error::Invalid("integration order must enumerate each integrated generator once".into()));
    }
    let mut out = NElement::zero(&f.layout);
    out.trunc = f.trunc;
    for (y, p) in &f.terms {
        if y.iter().filter(|u| given.contains(u)).count() != order.len() {
            continue;
        }
        let rest: Vec<FieldIndex> = y.iter().copied().filter(|u| !given.contains(u)).collect();
        let target: Vec<usize> = rest
            .iter()
            .chain(order.iter())
            .map(|u| y.iter().position(|v| v == u).expect("present"))
            .collect();
        let q = if perm_sign(&target) < 0 { p.neg() } else { p.clone() };
        out.add_term(rest, q);
    }
    Ok(out)
}

/// Integration order `psibar'_1, psi'_1, psibar'_2, psi'_2, ...` for the
/// primed fermion species of a doubled layout.
pub fn standard_order(dl: &Layout, c: &CovariancePair<impl Scalar>) -> (Vec<FieldIndex>, Vec<u16>) {
    let mut order = Vec::new();
    let mut species = Vec::new();
    for (&s, m) in &c.blocks {
        if dl.kind(2 * s) != Kind::Fermion {
            continue;
        }
        species.push(2 * s + 1);
        for k in 0..m.n as u32 {
            order.push(FieldIndex::new(2 * s + 1, true, k));
            order.push(FieldIndex::new(2 * s + 1, false, k));
        }
    }
    (order, species)
}

/// Fermionic expectation over the primed fermions of a doubled-layout
/// element by the determinant formula.
pub fn fermion_expectation<S: Scalar>(g: &NElement<S>, c: &CovariancePair<S>) -> NElement<S> {
    let mut out = NElement::zero(&g.layout);
    out.trunc = g.trunc;
    for (y, p) in &g.terms {
        let (base, primed): (Vec<FieldIndex>, Vec<FieldIndex>) = y.iter().partition(|u| u.species % 2 == 0);
        if primed.is_empty() {
            out.add_term(base, p.clone());
            continue;
        }
        // sign of moving the primed generators to the right
        let mut inv = 0usize;
        let mut seen_primed = 0usize;
        for u in y {
            if u.species % 2 == 1 {
                seen_primed += 1;
            } else {
                inv += seen_primed;
            }
        }
        let mut val = if inv % 2 == 0 { S::one() } else { -S::one() };
        let mut start = 0;
        while start < primed.len() && !val.is_zero() {
            let s = primed[start].species;
            let end = start + primed[start..].iter().take_while(|u| u.species == s).count();
            val = val * monomial_moment(&primed[start..end], c.block(s / 2).expect("covariance block"));
            start = end;
        }
        if !val.is_zero() {
            out.add_term(base, p.scale(&val));
        }
    }
    out
}

/// `E psi'_{l_1} .. psi'_{l_p} psibar'_{k_1} .. psibar'_{k_p}` (the
/// canonical order within one species) as a signed determinant.
fn monomial_moment<S: Scalar>(block: &[FieldIndex], c: &crate::linalg::Mat<S>) -> S {
    let ls: Vec<usize> = block.iter().filter(|u| !u.conj).map(|u| u.site as usize).collect();
    let ks: Vec<usize> = block.iter().filter(|u| u.conj).map(|u| u.site as usize).collect();
    if ls.len() != ks.len() {
        return S::zero();
    }
    let p = ls.len();
    // target psibar_{k1} psi_{l1} psibar_{k2} psi_{l2} ...
    let target: Vec<usize> = (0..p).flat_map(|r| [p + r, r]).collect();
    let d = crate::linalg::det(c.select(&ks, &ls));
    if perm_sign(&target) < 0 {
        -d
    } else {
        d
    }
}

/// Fermionic expectation by literal integration of `exp(-S_f) G` with
/// `S_f = sum A_kl psi'_k psibar'_l`, `A = C_f^{-1}`, normalised by the
/// integral of `exp(-S_f)`.
pub fn fermion_expectation_by_integration<S: Scalar>(g: &NElement<S>, c: &CovariancePair<S>) -> Result<NElement<S>> {
    let dl = &g.layout;
    let (order, species) = standard_order(dl, c);
    let mut action = NElement::zero(dl);
    for &sp in &species {
        let a = c.block(sp / 2).expect("covariance block").inverse()?;
        for k in 0..a.n {
            for l in 0..a.n {
                let v = a.get(k, l);
                if v.is_zero() {
                    continue;
                }
                let mono = [FieldIndex::new(sp, false, k as u32), FieldIndex::new(sp, true, l as u32)];
                action = action.add(&NElement::monomial(dl, v, Default::default(), &mono));
            }
        }
    }
    let mut weight = action.neg().taylor_exponential(0)?;
    weight.trunc = None;
    let z = grassmann_integral(&weight, &order, &species)?.constant_at(&crate::algebra::Field::zero());
    if z.is_zero() {
        return Err(Error::Invalid("fermionic normalisation vanishes".into()));
    }
    let mut out = grassmann_integral(&weight.mul(g), &order, &species)?.scale(&(S::one() / z));
    out.trunc = g.trunc;
    Ok(out)
}

/// Bosonic expectation over the primed bosons of a doubled-layout element:
/// `exp(Delta'/2)` on the primed variables, then primed variables set to 0.
pub fn boson_expectation<S: Scalar>(g: &NElement<S>, c: &CovariancePair<S>) -> NElement<S> {
    let mut bosonic = c.clone();
    bosonic.blocks.retain(|s, _| g.layout.kind(2 * s) == Kind::Boson);
    let h = primed_op(&g.layout, &bosonic).exp_apply(g, &S::one());
    let boson_primed =
        |u: FieldIndex| u.species % 2 == 1 && g.layout.kind(u.species) == Kind::Boson;
    h.map_polys(|p| p.set_zero(boson_primed))
}

/// `E_C G` for `G` on the doubled layout of `base`, returned on `base`.
pub fn combined_expectation<S: Scalar>(g: &NElement<S>, c: &CovariancePair<S>, base: &Arc<Layout>) -> Result<NElement<S>> {
    project_to_base(&boson_expectation(&fermion_expectation(g, c), c), base)
}

/// `E_C theta F`.
pub fn expect_theta<S: Scalar>(f: &NElement<S>, c: &CovariancePair<S>, b: &BijectionMap) -> Result<NElement<S>> {
    b.check(&f.layout, c)?;
    combined_expectation(&theta(f, &S::one(), b), c, &f.layout)
}
