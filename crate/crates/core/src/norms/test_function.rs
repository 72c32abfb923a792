use std::collections::BTreeMap;

use crate::algebra::{Field, FieldIndex, IndexSequence, Kind, Layout, NElement, Scalar};
use crate::gaussian::{BijectionMap, CovariancePair};
use crate::linalg::Mat;

/// A finitely supported function on species-ordered index sequences.
#[derive(Clone, Debug, PartialEq)]
pub struct TestFunction<S> {
    pub values: BTreeMap<IndexSequence, S>,
}

impl<S: Scalar> Default for TestFunction<S> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<S: Scalar> TestFunction<S> {
    pub fn zero() -> Self {
        TestFunction { values: BTreeMap::new() }
    }

    pub fn get(&self, z: &IndexSequence) -> S {
        self.values.get(z).cloned().unwrap_or_else(S::zero)
    }

    pub fn set(&mut self, z: IndexSequence, v: S) {
        if v.is_zero() {
            self.values.remove(&z);
        } else {
            self.values.insert(z, v);
        }
    }

    pub fn add_at(&mut self, z: IndexSequence, v: S) {
        let cur = self.get(&z);
        self.set(z, cur + v);
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (z, v) in &other.values {
            out.add_at(z.clone(), v.clone());
        }
        out
    }

    pub fn scale(&self, k: &S) -> Self {
        let mut out = Self::zero();
        for (z, v) in &self.values {
            out.set(z.clone(), v.clone() * k.clone());
        }
        out
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> TestFunction<T> {
        let mut out = TestFunction::zero();
        for (z, v) in &self.values {
            out.set(z.clone(), f(v));
        }
        out
    }

    pub fn to_c64(&self) -> TestFunction<crate::algebra::C64> {
        self.map(Scalar::to_c64)
    }

    /// Drops sequences with more than `p_n` boson entries.
    pub fn truncate_bosons(&self, layout: &Layout, p_n: u32) -> Self {
        let mut out = self.clone();
        out.values.retain(|z, _| z.boson_count(layout) <= p_n as usize);
        out
    }

    pub fn to_text(&self, layout: &Layout) -> String {
        crate::algebra::serialize::test_function_to_text(layout, &self.values)
    }

    pub fn from_text(layout: &Layout, text: &str) -> crate::error::Result<Self> {
        Ok(TestFunction { values: crate::algebra::serialize::test_function_from_text(layout, text)? })
    }

    /// Restriction to sequences of length `r`.
    pub fn of_length(&self, r: usize) -> Self {
        let mut out = self.clone();
        out.values.retain(|z, _| z.len() == r);
        out
    }

    /// The test function `u -> phi_u` on length-one sequences.
    pub fn from_field(phi: &Field<S>) -> Self {
        let mut out = Self::zero();
        for (u, v) in &phi.values {
            out.set(IndexSequence::new(vec![*u]), v.clone());
        }
        out
    }

    /// `g_z = g1_{z1} g2_{z2}` for `z = z1 ∘ z2`, where `g1` and `g2` use
    /// disjoint species so that the decomposition is unique.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (z1, a) in &self.values {
            for (z2, b) in &other.values {
                out.add_at(z1.concat(z2), a.clone() * b.clone());
            }
        }
        out
    }
}

/// `<F, g>_phi = sum_z F_z(phi) g_z / z!` over the support of `g`.
pub fn pairing<S: Scalar>(f: &NElement<S>, g: &TestFunction<S>, phi: &Field<S>) -> S {
    let mut acc = S::zero();
    for (z, v) in &g.values {
        let fz = f.coefficient(z, phi);
        if !fz.is_zero() {
            acc = acc + fz * v.clone() / S::from_i64(z.factorial() as i64);
        }
    }
    acc
}

/// Position permutations of `z` that preserve its species blocks, with the
/// product of the fermion block parities.
pub fn block_permutations(z: &IndexSequence, layout: &Layout) -> Vec<(Vec<usize>, i8)> {
    let mut blocks: Vec<(usize, usize, bool)> = Vec::new();
    let mut start = 0;
    for i in 1..=z.len() {
        if i == z.len() || z.entries[i].species != z.entries[start].species {
            let fermion = layout.kind(z.entries[start].species) == Kind::Fermion;
            blocks.push((start, i, fermion));
            start = i;
        }
    }
    let mut out = vec![(Vec::with_capacity(z.len()), 1i8)];
    for (a, b, fermion) in blocks {
        let perms = permutations(b - a);
        let mut next = Vec::with_capacity(out.len() * perms.len());
        for (p, s) in &out {
            for (q, t) in &perms {
                let mut v = p.clone();
                v.extend(q.iter().map(|&k| a + k));
                next.push((v, if fermion { s * t } else { *s }));
            }
        }
        out = next;
    }
    out
}

/// All permutations of `0..n` with their parities (Heap's algorithm).
fn permutations(n: usize) -> Vec<(Vec<usize>, i8)> {
    let mut a: Vec<usize> = (0..n).collect();
    let mut out = vec![(a.clone(), 1i8)];
    let mut c = vec![0usize; n];
    let mut sign = 1i8;
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            sign = -sign;
            out.push((a.clone(), sign));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

/// `(Sg)_z = (1/z!) sum_sigma sgn(sigma_f) g_{sigma z}` over species-block
/// permutations.
pub fn symmetrise<S: Scalar>(g: &TestFunction<S>, layout: &Layout) -> TestFunction<S> {
    let mut out = TestFunction::zero();
    for (z, v) in &g.values {
        let w = v.clone() / S::from_i64(z.factorial() as i64);
        for (perm, sign) in block_permutations(z, layout) {
            // (sigma z~)_i = z~_{sigma(i)} = z_i
            let mut zt = z.entries.clone();
            for (i, &p) in perm.iter().enumerate() {
                zt[p] = z.entries[i];
            }
            let term = if sign < 0 { -w.clone() } else { w.clone() };
            out.add_at(IndexSequence::new(zt), term);
        }
    }
    out
}

/// Every nonzero `F_z(phi)` with at most `p_n` boson entries and length at
/// most `max_len`.
pub fn coefficient_table<S: Scalar>(
    f: &NElement<S>,
    phi: &Field<S>,
    p_n: u32,
    max_len: usize,
) -> BTreeMap<IndexSequence, S> {
    let layout = f.layout.clone();
    let centred = f.recentre(phi);
    let mut out = BTreeMap::new();
    for (y, p) in &centred.terms {
        for (m, c) in &p.terms {
            if m.degree() > p_n || m.degree() as usize + y.len() > max_len {
                continue;
            }
            let mut bosons = Vec::new();
            for (u, k) in &m.0 {
                bosons.extend(std::iter::repeat(*u).take(*k as usize));
            }
            let base = IndexSequence::new(bosons).concat(&IndexSequence::new(y.clone()));
            let value = c.clone() * S::from_i64(m.factorial() as i64);
            for (perm, sign) in block_permutations(&base, &layout) {
                let z = IndexSequence::new(perm.iter().map(|&i| base.entries[i]).collect());
                out.insert(z, if sign < 0 { -value.clone() } else { value.clone() });
            }
        }
    }
    out
}

/// The covariance as a test function on length-two base sequences:
/// `(phi_k, phibar_l)` and `(phibar_l, phi_k)` carry `C_b[k][l]`,
/// `(psi_k, psibar_l)` carries `C_f[k][l]` and `(psibar_l, psi_k)` its
/// negative. Sites are mapped back through `b`.
pub fn covariance_test_function<S: Scalar>(
    base: &Layout,
    c: &CovariancePair<S>,
    b: &BijectionMap,
) -> TestFunction<S> {
    let mut out = TestFunction::zero();
    for (&s, m) in &c.blocks {
        let sp = &base.species[s as usize];
        let site = |k: usize| b.unprime_site(s, k as u32).unwrap_or(k as u32);
        for k in 0..m.n {
            for l in 0..m.n {
                let v = m.get(k, l);
                if v.is_zero() {
                    continue;
                }
                let (xk, xl) = (site(k), site(l));
                let seq = |a: FieldIndex, b: FieldIndex| IndexSequence::new(vec![a, b]);
                match (sp.kind, sp.pair) {
                    (Kind::Boson, true) => {
                        let (p, q) = (FieldIndex::new(s, false, xk), FieldIndex::new(s, true, xl));
                        out.add_at(seq(p, q), v.clone());
                        out.add_at(seq(q, p), v.clone());
                    }
                    (Kind::Boson, false) => {
                        out.add_at(seq(FieldIndex::new(s, false, xk), FieldIndex::new(s, false, xl)), v.clone());
                    }
                    (Kind::Fermion, _) => {
                        let (p, q) = (FieldIndex::new(s, false, xk), FieldIndex::new(s, true, xl));
                        out.add_at(seq(p, q), v.clone());
                        out.add_at(seq(q, p), -v.clone());
                    }
                }
            }
        }
    }
    out
}

/// `C_f` as a test function on unbarred pairs `(psi_k, psi_l)` of `species`.
pub fn fermion_covariance_test_function<S: Scalar>(cf: &Mat<S>, species: u16) -> TestFunction<S> {
    let mut out = TestFunction::zero();
    for k in 0..cf.n {
        for l in 0..cf.n {
            let u = FieldIndex::new(species, false, k as u32);
            let v = FieldIndex::new(species, false, l as u32);
            out.set(IndexSequence::new(vec![u, v]), cf.get(k, l));
        }
    }
    out
}
