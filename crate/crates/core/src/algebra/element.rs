use std::collections::BTreeMap;
use std::sync::Arc;

use super::index::{sort_sign, Field, FieldIndex, IndexSequence, Kind, Layout};
use super::poly::{BMono, Poly};
use super::scalar::Scalar;
use crate::error::{Error, Result};

/// Canonical fermion monomial: strictly increasing generator list.
pub type FMono = Vec<FieldIndex>;

/// Element of the algebra: `sum_y F_y psi^y` over canonical monomials `y`
/// with polynomial boson coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct NElement<S> {
    pub layout: Arc<Layout>,
    pub terms: BTreeMap<FMono, Poly<S>>,
    /// Boson degree above which the coefficients were truncated, if any.
    pub trunc: Option<u32>,
}

/// Sign of `psi^a psi^b` relative to the canonical product, or `None` if
/// the monomials share a generator.
pub fn fermion_product_sign(a: &[FieldIndex], b: &[FieldIndex]) -> Option<(i8, FMono)> {
    let mut inv = 0usize;
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i] < b[j]) {
            out.push(a[i]);
            i += 1;
        } else {
            if i < a.len() && a[i] == b[j] {
                return None;
            }
            inv += a.len() - i;
            out.push(b[j]);
            j += 1;
        }
    }
    Some((if inv % 2 == 0 { 1 } else { -1 }, out))
}

fn min_trunc(a: Option<u32>, b: Option<u32>) -> Option<u32> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

impl<S: Scalar> NElement<S> {
    pub fn zero(layout: &Arc<Layout>) -> Self {
        NElement { layout: layout.clone(), terms: BTreeMap::new(), trunc: None }
    }

    pub fn constant(layout: &Arc<Layout>, c: S) -> Self {
        Self::from_poly(layout, Poly::constant(c))
    }

    pub fn one(layout: &Arc<Layout>) -> Self {
        Self::constant(layout, S::one())
    }

    pub fn from_poly(layout: &Arc<Layout>, p: Poly<S>) -> Self {
        let mut e = Self::zero(layout);
        e.add_term(Vec::new(), p);
        e
    }

    pub fn boson(layout: &Arc<Layout>, u: FieldIndex) -> Self {
        debug_assert_eq!(layout.kind(u.species), Kind::Boson);
        Self::from_poly(layout, Poly::var(u))
    }

    pub fn fermion(layout: &Arc<Layout>, u: FieldIndex) -> Self {
        debug_assert_eq!(layout.kind(u.species), Kind::Fermion);
        let mut e = Self::zero(layout);
        e.add_term(vec![u], Poly::constant(S::one()));
        e
    }

    /// `c * phi^b * psi_{y_1} ... psi_{y_q}` with `y` in the given order.
    pub fn monomial(layout: &Arc<Layout>, c: S, bosons: BMono, fermions: &[FieldIndex]) -> Self {
        let mut y = fermions.to_vec();
        let mut e = Self::zero(layout);
        if let Some(sign) = sort_sign(&mut y) {
            let c = if sign < 0 { -c } else { c };
            e.add_term(y, Poly::monomial(bosons, c));
        }
        e
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn same_layout(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.layout, &other.layout) || *self.layout == *other.layout
    }

    pub fn add_term(&mut self, y: FMono, p: Poly<S>) {
        if p.is_zero() {
            return;
        }
        match self.terms.get_mut(&y) {
            Some(q) => {
                q.add_assign(&p);
                if q.is_zero() {
                    self.terms.remove(&y);
                }
            }
            None => {
                self.terms.insert(y, p);
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert!(self.same_layout(other), "layout mismatch in add");
        let mut out = self.clone();
        for (y, p) in &other.terms {
            out.add_term(y.clone(), p.clone());
        }
        out.trunc = min_trunc(self.trunc, other.trunc);
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: &S) -> Self {
        let mut out = Self::zero(&self.layout);
        out.trunc = self.trunc;
        for (y, p) in &self.terms {
            out.add_term(y.clone(), p.scale(k));
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(&-S::one())
    }

    /// Exact product; fails on a layout mismatch.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        if !self.same_layout(other) {
            return Err(Error::Layout("operands live on different layouts".into()));
        }
        let mut out = Self::zero(&self.layout);
        out.trunc = min_trunc(self.trunc, other.trunc);
        for (a, pa) in &self.terms {
            for (b, pb) in &other.terms {
                if let Some((sign, y)) = fermion_product_sign(a, b) {
                    let mut p = pa.mul(pb);
                    if sign < 0 {
                        p = p.neg();
                    }
                    out.add_term(y, p);
                }
            }
        }
        Ok(out)
    }

    /// Product for operands known to share a layout.
    pub fn mul(&self, other: &Self) -> Self {
        self.multiply(other).expect("layout mismatch in mul")
    }

    fn mul_capped(&self, other: &Self, cap: u32) -> Self {
        let mut out = Self::zero(&self.layout);
        for (a, pa) in &self.terms {
            for (b, pb) in &other.terms {
                if let Some((sign, y)) = fermion_product_sign(a, b) {
                    let mut p = pa.mul_capped(pb, cap);
                    if sign < 0 {
                        p = p.neg();
                    }
                    out.add_term(y, p);
                }
            }
        }
        out
    }

    /// Iterated boson derivative `d/d phi_{x_p} ... d/d phi_{x_1}`.
    pub fn boson_derivative(&self, xs: &[FieldIndex]) -> Self {
        let mut out = Self::zero(&self.layout);
        out.trunc = self.trunc.map(|c| c.saturating_sub(xs.len() as u32));
        for (y, p) in &self.terms {
            out.add_term(y.clone(), p.derivatives(xs));
        }
        out
    }

    /// The anti-derivation `i_u`.
    pub fn fermion_derivative(&self, u: FieldIndex) -> Self {
        let mut out = Self::zero(&self.layout);
        out.trunc = self.trunc;
        for (y, p) in &self.terms {
            if let Some(pos) = y.iter().position(|&v| v == u) {
                let mut rest = y.clone();
                rest.remove(pos);
                let q = if pos % 2 == 0 { p.clone() } else { p.neg() };
                out.add_term(rest, q);
            }
        }
        out
    }

    /// `F_y` as a polynomial for an arbitrary fermion sequence `y`
    /// (antisymmetric in `y`).
    pub fn fermion_coefficient(&self, y: &[FieldIndex]) -> Poly<S> {
        let mut key = y.to_vec();
        match sort_sign(&mut key) {
            None => Poly::zero(),
            Some(sign) => match self.terms.get(&key) {
                None => Poly::zero(),
                Some(p) if sign > 0 => p.clone(),
                Some(p) => p.neg(),
            },
        }
    }

    /// `F_z(phi)` for a sequence `z`: boson entries differentiate, fermion
    /// entries select the (signed) coefficient.
    pub fn coefficient(&self, z: &IndexSequence, phi: &Field<S>) -> S {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for &u in &z.entries {
            match self.layout.kind(u.species) {
                Kind::Boson => xs.push(u),
                Kind::Fermion => ys.push(u),
            }
        }
        self.fermion_coefficient(&ys).derivatives(&xs).eval(phi)
    }

    /// `F_empty(phi)`.
    pub fn constant_at(&self, phi: &Field<S>) -> S {
        self.terms.get(&Vec::new()).map_or_else(S::zero, |p| p.eval(phi))
    }

    pub fn boson_degree(&self) -> u32 {
        self.terms.values().filter_map(Poly::degree).max().unwrap_or(0)
    }

    pub fn fermion_degree(&self) -> usize {
        self.terms.keys().map(Vec::len).max().unwrap_or(0)
    }

    /// Polynomial degree `max(p(x) + q(y))` over nonzero terms.
    pub fn degree(&self) -> u32 {
        self.terms
            .iter()
            .map(|(y, p)| p.degree().unwrap_or(0) + y.len() as u32)
            .max()
            .unwrap_or(0)
    }

    pub fn is_even(&self) -> bool {
        self.terms.keys().all(|y| y.len() % 2 == 0)
    }

    pub fn map_polys(&self, f: impl Fn(&Poly<S>) -> Poly<S>) -> Self {
        let mut out = Self::zero(&self.layout);
        out.trunc = self.trunc;
        for (y, p) in &self.terms {
            out.add_term(y.clone(), f(p));
        }
        out
    }

    /// Taylor polynomial at `phi`: `F(phi + zeta)` in the variables `zeta`.
    pub fn recentre(&self, phi: &Field<S>) -> Self {
        self.map_polys(|p| p.recentre(phi))
    }

    pub fn truncate(&self, cap: u32) -> Self {
        let mut out = self.map_polys(|p| p.truncate(cap));
        out.trunc = min_trunc(self.trunc, Some(cap));
        out
    }

    /// Moves every index through `f` into `layout`. `f` must preserve the
    /// relative order of fermion generators up to the sign it reports.
    pub fn relabel(&self, layout: &Arc<Layout>, f: impl Fn(FieldIndex) -> FieldIndex) -> Self {
        let mut out = Self::zero(layout);
        out.trunc = self.trunc;
        for (y, p) in &self.terms {
            let mut ny: Vec<FieldIndex> = y.iter().map(|&u| f(u)).collect();
            if let Some(sign) = sort_sign(&mut ny) {
                let q = p.relabel(&f);
                out.add_term(ny, if sign < 0 { q.neg() } else { q });
            }
        }
        out
    }

    pub fn map_scalars<T: Scalar>(&self, f: impl Fn(&S) -> T) -> NElement<T> {
        let mut out = NElement::<T>::zero(&self.layout);
        out.trunc = self.trunc;
        for (y, p) in &self.terms {
            out.add_term(y.clone(), p.map_coeffs(&f));
        }
        out
    }

    /// `exp(P)` for `P` with only even fermion monomials. The fermionic
    /// part is exponentiated exactly (it is nilpotent); the boson series is
    /// kept up to total degree `cap`, which is recorded in `trunc`.
    pub fn taylor_exponential(&self, cap: u32) -> Result<Self> {
        if !self.is_even() {
            return Err(Error::Invalid("exponential of an element with odd fermion monomials".into()));
        }
        let boson = self.terms.get(&Vec::new()).cloned().unwrap_or_default();
        let c0 = boson.constant_term();
        let e0 = c0
            .exp()
            .ok_or_else(|| Error::Invalid("exp of a nonzero constant is not exact in this scalar field".into()))?;
        let mut b_rest = boson.clone();
        b_rest.add_term(BMono::one(), -c0);
        let b_rest = b_rest.truncate(cap);
        let mut nil = self.clone();
        nil.terms.remove(&Vec::new());
        let nil = nil.truncate(cap);

        // sum_n X^n / n! with X = boson part without constant, then times
        // the nilpotent fermionic series; both terminate under the cap.
        let layout = &self.layout;
        let mut bexp = Poly::constant(S::one());
        let mut power = Poly::constant(S::one());
        let mut fact = S::one();
        for n in 1..=cap {
            power = power.mul_capped(&b_rest, cap);
            if power.is_zero() {
                break;
            }
            fact = fact * S::from_i64(n as i64);
            bexp.add_scaled(&power, &(S::one() / fact.clone()));
        }
        let mut fexp = Self::one(layout);
        let mut fpow = Self::one(layout);
        let mut fact = S::one();
        let mut n = 1i64;
        loop {
            fpow = fpow.mul_capped(&nil, cap);
            if fpow.is_zero() {
                break;
            }
            fact = fact * S::from_i64(n);
            fexp = fexp.add(&fpow.scale(&(S::one() / fact.clone())));
            n += 1;
        }
        let mut out = Self::from_poly(layout, bexp.scale(&e0)).mul_capped(&fexp, cap);
        out.trunc = Some(cap);
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::scalar::Cq;
    use num_traits::One;

    fn lay() -> Arc<Layout> {
        Arc::new(Layout::supersymmetric(2))
    }
    fn phi(s: u32) -> FieldIndex {
        FieldIndex::new(0, false, s)
    }
    fn phib(s: u32) -> FieldIndex {
        FieldIndex::new(0, true, s)
    }
    fn psi(s: u32) -> FieldIndex {
        FieldIndex::new(1, false, s)
    }
    fn psib(s: u32) -> FieldIndex {
        FieldIndex::new(1, true, s)
    }

    #[test]
    fn grassmann_square_vanishes() {
        let l = lay();
        let a = NElement::<Cq>::fermion(&l, psi(0));
        assert!(a.mul(&a).is_zero());
    }

    #[test]
    fn generators_anticommute() {
        let l = lay();
        let a = NElement::<Cq>::fermion(&l, psi(0));
        let b = NElement::<Cq>::fermion(&l, psib(1));
        assert_eq!(a.mul(&b), b.mul(&a).neg());
    }

    #[test]
    fn anti_derivation_signs() {
        let l = lay();
        let uv = NElement::<Cq>::monomial(&l, Cq::one(), BMono::one(), &[psi(0), psi(1)]);
        assert_eq!(uv.fermion_derivative(psi(0)), NElement::fermion(&l, psi(1)));
        assert_eq!(uv.fermion_derivative(psi(1)), NElement::fermion(&l, psi(0)).neg());
        assert!(NElement::<Cq>::one(&l).fermion_derivative(psi(0)).is_zero());
    }

    #[test]
    fn coefficient_is_antisymmetric_in_fermions() {
        let l = lay();
        let f = NElement::<Cq>::monomial(&l, Cq::from_i64(3), BMono::one(), &[psi(0), psi(1)]);
        let z1 = IndexSequence::new(vec![psi(0), psi(1)]);
        let z2 = IndexSequence::new(vec![psi(1), psi(0)]);
        let zero = Field::zero();
        assert_eq!(f.coefficient(&z1, &zero), Cq::from_i64(3));
        assert_eq!(f.coefficient(&z2, &zero), Cq::from_i64(-3));
    }

    #[test]
    fn coefficient_of_tau() {
        let l = lay();
        let tau = tau(&l, 0);
        let z = IndexSequence::new(vec![phi(0), phib(0)]);
        assert_eq!(tau.coefficient(&z, &Field::zero()), Cq::one());
        let mut f = Field::zero();
        f.set(phi(0), Cq::from_i64(2));
        f.set(phib(0), Cq::from_i64(2));
        let b = NElement::from_poly(&l, Poly::var(phi(0)).mul(&Poly::var(phib(0))));
        assert_eq!(b.coefficient(&IndexSequence::empty(), &f), Cq::from_i64(4));
    }

    fn tau(l: &Arc<Layout>, x: u32) -> NElement<Cq> {
        let b = NElement::from_poly(l, Poly::var(phi(x)).mul(&Poly::var(phib(x))));
        let f = NElement::monomial(l, Cq::one(), BMono::one(), &[psi(x), psib(x)]);
        b.add(&f)
    }

    #[test]
    fn exponential_of_tau_factorises() {
        let l = lay();
        let a = Cq::from_ratio(3, 2);
        let e = tau(&l, 0).scale(&-a.clone()).taylor_exponential(6).unwrap();
        let boson = NElement::from_poly(&l, Poly::var(phi(0)).mul(&Poly::var(phib(0))))
            .scale(&-a.clone())
            .taylor_exponential(6)
            .unwrap();
        let ferm = NElement::one(&l).sub(&NElement::monomial(&l, a, BMono::one(), &[psi(0), psib(0)]));
        assert_eq!(e, boson.mul(&ferm).truncate(6));
        assert_eq!(e.trunc, Some(6));
    }

    #[test]
    fn exponential_rejects_odd_and_handles_zero() {
        let l = lay();
        assert!(NElement::<Cq>::fermion(&l, psi(0)).taylor_exponential(4).is_err());
        let one = NElement::<Cq>::zero(&l).taylor_exponential(4).unwrap();
        assert_eq!(one.terms, NElement::one(&l).terms);
    }

    #[test]
    fn mismatched_layout_is_rejected() {
        let a = NElement::<Cq>::one(&lay());
        let b = NElement::<Cq>::one(&Arc::new(Layout::supersymmetric(3)));
        assert!(a.multiply(&b).is_err());
    }
}
