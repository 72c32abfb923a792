use std::collections::BTreeMap;

use super::index::{Field, FieldIndex};
use super::scalar::Scalar;

/// Boson monomial: sorted `(index, exponent)` pairs with positive exponents.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct BMono(pub Vec<(FieldIndex, u32)>);

impl BMono {
    pub fn one() -> Self {
        BMono(Vec::new())
    }

    pub fn var(u: FieldIndex) -> Self {
        BMono(vec![(u, 1)])
    }

    pub fn from_powers(mut p: Vec<(FieldIndex, u32)>) -> Self {
        p.retain(|&(_, e)| e > 0);
        p.sort();
        let mut out: Vec<(FieldIndex, u32)> = Vec::with_capacity(p.len());
        for (u, e) in p {
            match out.last_mut() {
                Some(last) if last.0 == u => last.1 += e,
                _ => out.push((u, e)),
            }
        }
        BMono(out)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn exponent(&self, u: FieldIndex) -> u32 {
        self.0.iter().find(|&&(v, _)| v == u).map_or(0, |&(_, e)| e)
    }

    pub fn mul(&self, other: &BMono) -> BMono {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        BMono(out)
    }

    /// `d/du` of the monomial as `(multiplier, monomial)`.
    pub fn derivative(&self, u: FieldIndex) -> Option<(u32, BMono)> {
        let pos = self.0.iter().position(|&(v, _)| v == u)?;
        let mut m = self.0.clone();
        let e = m[pos].1;
        if e == 1 {
            m.remove(pos);
        } else {
            m[pos].1 -= 1;
        }
        Some((e, BMono(m)))
    }

    /// `prod_u (exponent_u)!`.
    pub fn factorial(&self) -> u128 {
        self.0.iter().map(|&(_, e)| (1..=e as u128).product::<u128>()).product()
    }

    pub fn eval<S: Scalar>(&self, field: &Field<S>) -> S {
        let mut acc = S::one();
        for &(u, e) in &self.0 {
            let v = field.get(u);
            if v.is_zero() {
                return S::zero();
            }
            for _ in 0..e {
                acc = acc * v.clone();
            }
        }
        acc
    }

    pub fn indices(&self) -> impl Iterator<Item = FieldIndex> + '_ {
        self.0.iter().map(|&(u, _)| u)
    }
}

/// Polynomial in boson variables with no stored zero coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly<S> {
    pub terms: BTreeMap<BMono, S>,
}

impl<S: Scalar> Default for Poly<S> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<S: Scalar> Poly<S> {
    pub fn zero() -> Self {
        Poly { terms: BTreeMap::new() }
    }

    pub fn constant(c: S) -> Self {
        let mut p = Self::zero();
        p.add_term(BMono::one(), c);
        p
    }

    pub fn var(u: FieldIndex) -> Self {
        let mut p = Self::zero();
        p.add_term(BMono::var(u), S::one());
        p
    }

    pub fn monomial(m: BMono, c: S) -> Self {
        let mut p = Self::zero();
        p.add_term(m, c);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, m: BMono, c: S) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                let s = v.clone() + c;
                if s.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *v = s;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn add_assign(&mut self, other: &Poly<S>) {
        for (m, c) in &other.terms {
            self.add_term(m.clone(), c.clone());
        }
    }

    pub fn add_scaled(&mut self, other: &Poly<S>, k: &S) {
        if k.is_zero() {
            return;
        }
        for (m, c) in &other.terms {
            self.add_term(m.clone(), c.clone() * k.clone());
        }
    }

    pub fn scale(&self, k: &S) -> Poly<S> {
        let mut out = Self::zero();
        out.add_scaled(self, k);
        out
    }

    pub fn neg(&self) -> Poly<S> {
        self.scale(&-S::one())
    }

    pub fn mul(&self, other: &Poly<S>) -> Poly<S> {
        let mut out = Self::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                out.add_term(a.mul(b), ca.clone() * cb.clone());
            }
        }
        out
    }

    /// Product with all monomials of degree above `cap` dropped.
    pub fn mul_capped(&self, other: &Poly<S>, cap: u32) -> Poly<S> {
        let mut out = Self::zero();
        for (a, ca) in &self.terms {
            let da = a.degree();
            if da > cap {
                continue;
            }
            for (b, cb) in &other.terms {
                if da + b.degree() <= cap {
                    out.add_term(a.mul(b), ca.clone() * cb.clone());
                }
            }
        }
        out
    }

    pub fn truncate(&self, cap: u32) -> Poly<S> {
        Poly { terms: self.terms.iter().filter(|(m, _)| m.degree() <= cap).map(|(m, c)| (m.clone(), c.clone())).collect() }
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(BMono::degree).max()
    }

    pub fn constant_term(&self) -> S {
        self.terms.get(&BMono::one()).cloned().unwrap_or_else(S::zero)
    }

    pub fn derivative(&self, u: FieldIndex) -> Poly<S> {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            if let Some((e, dm)) = m.derivative(u) {
                out.add_term(dm, c.clone() * S::from_i64(e as i64));
            }
        }
        out
    }

    pub fn derivatives(&self, us: &[FieldIndex]) -> Poly<S> {
        let mut p = self.clone();
        for &u in us {
            if p.is_zero() {
                break;
            }
            p = p.derivative(u);
        }
        p
    }

    pub fn eval(&self, field: &Field<S>) -> S {
        let mut acc = S::zero();
        for (m, c) in &self.terms {
            acc = acc + c.clone() * m.eval(field);
        }
        acc
    }

    /// Sets every variable accepted by `kill` to zero.
    pub fn set_zero(&self, kill: impl Fn(FieldIndex) -> bool) -> Poly<S> {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            if !m.indices().any(&kill) {
                out.add_term(m.clone(), c.clone());
            }
        }
        out
    }

    /// Replaces each variable `u` by the linear form `subst(u)`
    /// (a list of `(variable, coefficient)` plus the implicit constant 0).
    pub fn substitute(&self, subst: impl Fn(FieldIndex) -> Vec<(FieldIndex, S)>) -> Poly<S> {
        let mut out = Self::zero();
        let mut cache: BTreeMap<FieldIndex, Poly<S>> = BTreeMap::new();
        for (m, c) in &self.terms {
            let mut acc = Poly::constant(c.clone());
            for &(u, e) in &m.0 {
                let lin = cache
                    .entry(u)
                    .or_insert_with(|| {
                        let mut p = Poly::zero();
                        for (v, k) in subst(u) {
                            p.add_term(BMono::var(v), k);
                        }
                        p
                    })
                    .clone();
                for _ in 0..e {
                    acc = acc.mul(&lin);
                }
            }
            out.add_assign(&acc);
        }
        out
    }

    /// `p(phi + zeta)` expanded as a polynomial in the shift variables,
    /// i.e. the Taylor polynomial of `p` at `phi`.
    pub fn recentre(&self, phi: &Field<S>) -> Poly<S> {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let mut acc = Poly::constant(c.clone());
            for &(u, e) in &m.0 {
                let mut lin = Poly::var(u);
                lin.add_term(BMono::one(), phi.get(u));
                for _ in 0..e {
                    acc = acc.mul(&lin);
                }
            }
            out.add_assign(&acc);
        }
        out
    }

    pub fn map_coeffs<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Poly<T> {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c));
        }
        out
    }

    pub fn relabel(&self, f: &impl Fn(FieldIndex) -> FieldIndex) -> Poly<S> {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let powers = m.0.iter().map(|&(u, e)| (f(u), e)).collect();
            out.add_term(BMono::from_powers(powers), c.clone());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::scalar::Cq;
    use num_traits::One;

    fn u(s: u32) -> FieldIndex {
        FieldIndex::new(0, false, s)
    }

    #[test]
    fn second_derivative_of_square() {
        let p: Poly<Cq> = Poly::var(u(0)).mul(&Poly::var(u(0)));
        let d = p.derivatives(&[u(0), u(0)]);
        assert_eq!(d, Poly::constant(Cq::from_i64(2)));
    }

    #[test]
    fn mixed_partials_commute() {
        let p: Poly<Cq> = Poly::var(u(0)).mul(&Poly::var(u(1)));
        assert_eq!(p.derivatives(&[u(0), u(1)]), Poly::constant(Cq::one()));
        assert_eq!(p.derivatives(&[u(1), u(0)]), Poly::constant(Cq::one()));
    }

    #[test]
    fn recentre_matches_evaluation() {
        let p: Poly<Cq> = Poly::var(u(0)).mul(&Poly::var(u(0))).mul(&Poly::var(u(1)));
        let mut phi = Field::zero();
        phi.set(u(0), Cq::from_i64(2));
        phi.set(u(1), Cq::from_ratio(1, 3));
        let q = p.recentre(&phi);
        assert_eq!(q.constant_term(), p.eval(&phi));
        assert_eq!(q.derivative(u(1)).constant_term(), Cq::from_i64(4));
    }
}
