use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::scalar::{Scalar, C64};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Boson,
    Fermion,
}

/// One species of field. A `pair` species carries both an unbarred and a
/// barred copy of every site (complex boson, or conjugate fermion pair).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Species {
    pub name: String,
    pub kind: Kind,
    pub pair: bool,
    pub sites: usize,
}

impl Species {
    pub fn boson_pair(name: &str, sites: usize) -> Self {
        Species { name: name.into(), kind: Kind::Boson, pair: true, sites }
    }
    pub fn fermion_pair(name: &str, sites: usize) -> Self {
        Species { name: name.into(), kind: Kind::Fermion, pair: true, sites }
    }
    pub fn real_boson(name: &str, sites: usize) -> Self {
        Species { name: name.into(), kind: Kind::Boson, pair: false, sites }
    }
}

/// Ordered list of species. Species ids are positions in this list.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    pub species: Vec<Species>,
}

impl Layout {
    pub fn new(species: Vec<Species>) -> Result<Self> {
        for (i, s) in species.iter().enumerate() {
            if s.name.is_empty() || s.name.contains(|c: char| c.is_whitespace() || "@^*:".contains(c)) {
                return Err(Error::Invalid(format!("bad species name `{}`", s.name)));
            }
            if species[..i].iter().any(|t| t.name == s.name) {
                return Err(Error::Invalid(format!("duplicate species `{}`", s.name)));
            }
        }
        Ok(Layout { species })
    }

    /// One complex boson species `phi` and one fermion pair species `psi`,
    /// both on `n` sites.
    pub fn supersymmetric(n: usize) -> Self {
        Layout { species: vec![Species::boson_pair("phi", n), Species::fermion_pair("psi", n)] }
    }

    pub fn kind(&self, s: u16) -> Kind {
        self.species[s as usize].kind
    }

    pub fn by_name(&self, name: &str) -> Option<u16> {
        self.species.iter().position(|s| s.name == name).map(|i| i as u16)
    }

    /// Every index of the given kind in global order.
    pub fn indices(&self, kind: Kind) -> Vec<FieldIndex> {
        let mut out = Vec::new();
        for (i, s) in self.species.iter().enumerate() {
            if s.kind != kind {
                continue;
            }
            let conjs: &[bool] = if s.pair { &[false, true] } else { &[false] };
            for &c in conjs {
                for site in 0..s.sites {
                    out.push(FieldIndex::new(i as u16, c, site as u32));
                }
            }
        }
        out
    }

    pub fn all_indices(&self) -> Vec<FieldIndex> {
        let mut v = self.indices(Kind::Boson);
        v.extend(self.indices(Kind::Fermion));
        v.sort();
        v
    }

    pub fn contains(&self, u: FieldIndex) -> bool {
        match self.species.get(u.species as usize) {
            Some(s) => (u.site as usize) < s.sites && (s.pair || !u.conj),
            None => false,
        }
    }

    /// Layout with a primed copy of every species placed right after it.
    /// Species `i` becomes `2i`, its primed copy `2i + 1` with
    /// `primed_sites[i]` sites.
    pub fn doubled(&self, primed_sites: &[usize]) -> Layout {
        let mut species = Vec::with_capacity(2 * self.species.len());
        for (s, &n) in self.species.iter().zip(primed_sites) {
            species.push(s.clone());
            let mut p = s.clone();
            p.name = format!("{}'", s.name);
            p.sites = n;
            species.push(p);
        }
        Layout { species }
    }

    pub fn display(&self, u: FieldIndex) -> String {
        let s = &self.species[u.species as usize];
        format!("{}{}@{}", s.name, if u.conj { "*" } else { "" }, u.site)
    }

    pub fn parse_index(&self, tok: &str) -> Result<FieldIndex> {
        let (name, site) = tok
            .split_once('@')
            .ok_or_else(|| Error::Invalid(format!("index `{tok}` lacks `@site`")))?;
        let (name, conj) = match name.strip_suffix('*') {
            Some(n) => (n, true),
            None => (name, false),
        };
        let sp = self.by_name(name).ok_or_else(|| Error::Invalid(format!("unknown species `{name}`")))?;
        let site: u32 = site.parse().map_err(|_| Error::Invalid(format!("bad site in `{tok}`")))?;
        let u = FieldIndex::new(sp, conj, site);
        if !self.contains(u) {
            return Err(Error::Invalid(format!("index `{tok}` outside layout")));
        }
        Ok(u)
    }
}

/// A species-tagged, conjugation-tagged site. The derived order
/// (species, conjugated, site) is the global order on generators.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FieldIndex {
    pub species: u16,
    pub conj: bool,
    pub site: u32,
}

impl FieldIndex {
    pub const fn new(species: u16, conj: bool, site: u32) -> Self {
        FieldIndex { species, conj, site }
    }
    pub fn bar(self) -> Self {
        FieldIndex { conj: !self.conj, ..self }
    }
}

impl fmt::Debug for FieldIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}@{}", self.species, if self.conj { "*" } else { "" }, self.site)
    }
}

/// Sorts `v` in place and returns the parity sign of the sorting
/// permutation, or `None` when `v` has a repeated entry.
pub fn sort_sign<T: Ord>(v: &mut [T]) -> Option<i8> {
    let mut sign = 1i8;
    // insertion sort: each adjacent swap flips the sign
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some(sign)
    }
}

/// Parity of the permutation that orders `v` (entries assumed distinct).
pub fn perm_sign(v: &[usize]) -> i8 {
    let mut inv = 0usize;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            if v[i] > v[j] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1
    } else {
        -1
    }
}

/// A finite sequence of field indices. `species_sorted` holds when the
/// species ids are nondecreasing along the sequence.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct IndexSequence {
    pub entries: Vec<FieldIndex>,
}

impl IndexSequence {
    pub fn new(entries: Vec<FieldIndex>) -> Self {
        IndexSequence { entries }
    }
    pub fn empty() -> Self {
        IndexSequence { entries: Vec::new() }
    }
    pub fn len(&self) -> usize {
        self.entries.len()
    }
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
    pub fn species_sorted(&self) -> bool {
        self.entries.windows(2).all(|w| w[0].species <= w[1].species)
    }

    /// Product over species of (length of the species subsequence)!.
    pub fn factorial(&self) -> u128 {
        let mut out = 1u128;
        let mut run = 0u128;
        for (i, u) in self.entries.iter().enumerate() {
            if i > 0 && self.entries[i - 1].species == u.species {
                run += 1;
            } else {
                run = 1;
            }
            out *= run;
        }
        out
    }

    /// Species-wise concatenation: the species-`i` block of the result is
    /// the species-`i` block of `self` followed by that of `other`.
    pub fn concat(&self, other: &IndexSequence) -> IndexSequence {
        let mut out = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        while i < self.len() || j < other.len() {
            let take_self = match (self.entries.get(i), other.entries.get(j)) {
                (Some(a), Some(b)) => a.species <= b.species,
                (Some(_), None) => true,
                _ => false,
            };
            if take_self {
                out.push(self.entries[i]);
                i += 1;
            } else {
                out.push(other.entries[j]);
                j += 1;
            }
        }
        IndexSequence { entries: out }
    }

    pub fn boson_count(&self, layout: &Layout) -> usize {
        self.entries.iter().filter(|u| layout.kind(u.species) == Kind::Boson).count()
    }

    pub fn all_in(&self, pred: impl Fn(FieldIndex) -> bool) -> bool {
        self.entries.iter().all(|&u| pred(u))
    }
}

/// A boson field assignment: a value for every boson index of a layout.
/// Barred and unbarred coordinates are independent.
#[derive(Clone, Debug, PartialEq)]
pub struct Field<S> {
    pub values: BTreeMap<FieldIndex, S>,
}

impl<S: Scalar> Field<S> {
    pub fn zero() -> Self {
        Field { values: BTreeMap::new() }
    }

    pub fn get(&self, u: FieldIndex) -> S {
        self.values.get(&u).cloned().unwrap_or_else(S::zero)
    }

    pub fn set(&mut self, u: FieldIndex, v: S) {
        if v.is_zero() {
            self.values.remove(&u);
        } else {
            self.values.insert(u, v);
        }
    }

    /// Field whose barred coordinates are the complex conjugates of the
    /// unbarred ones, for every pair boson species.
    pub fn from_complex(layout: &Layout, species: u16, vals: &[S]) -> Self {
        let mut f = Field::zero();
        let pair = layout.species[species as usize].pair;
        for (site, v) in vals.iter().enumerate() {
            f.set(FieldIndex::new(species, false, site as u32), v.clone());
            if pair {
                f.set(FieldIndex::new(species, true, site as u32), v.conj());
            }
        }
        f
    }

    pub fn scaled(&self, t: &S) -> Self {
        let mut out = Field::zero();
        for (k, v) in &self.values {
            out.set(*k, v.clone() * t.clone());
        }
        out
    }

    pub fn add(&self, other: &Field<S>) -> Self {
        let mut out = self.clone();
        for (k, v) in &other.values {
            let cur = out.get(*k);
            out.set(*k, cur + v.clone());
        }
        out
    }

    pub fn to_c64(&self) -> Field<C64> {
        Field { values: self.values.iter().map(|(k, v)| (*k, v.to_c64())).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sort_sign_parity() {
        let mut v = vec![3, 1, 2];
        assert_eq!(sort_sign(&mut v), Some(1));
        assert_eq!(v, vec![1, 2, 3]);
        let mut w = vec![2, 1];
        assert_eq!(sort_sign(&mut w), Some(-1));
        let mut r = vec![1, 2, 1];
        assert_eq!(sort_sign(&mut r), None);
    }

    #[test]
    fn factorial_is_per_species() {
        let z = IndexSequence::new(vec![
            FieldIndex::new(0, false, 0),
            FieldIndex::new(0, true, 1),
            FieldIndex::new(1, false, 0),
        ]);
        assert_eq!(z.factorial(), 2);
        assert!(z.species_sorted());
        assert_eq!(IndexSequence::empty().factorial(), 1);
    }

    #[test]
    fn concat_is_species_wise() {
        let a = IndexSequence::new(vec![FieldIndex::new(0, false, 0), FieldIndex::new(1, false, 0)]);
        let b = IndexSequence::new(vec![FieldIndex::new(0, false, 1), FieldIndex::new(1, false, 1)]);
        let c = a.concat(&b);
        let sites: Vec<_> = c.entries.iter().map(|u| (u.species, u.site)).collect();
        assert_eq!(sites, vec![(0, 0), (0, 1), (1, 0), (1, 1)]);
    }

    #[test]
    fn index_text_round_trip() {
        let l = Layout::supersymmetric(3);
        let u = FieldIndex::new(1, true, 2);
        assert_eq!(l.parse_index(&l.display(u)).unwrap(), u);
        assert!(l.parse_index("psi@3").is_err());
        assert!(l.parse_index("chi@0").is_err());
    }
}
