use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algebra::{FieldIndex, Kind, Layout, Scalar};
use crate::error::{Error, Result};
use crate::linalg::{cholesky, det, Mat};

/// Covariance blocks keyed by base species id.
///
/// Complex boson species carry `C_b` with `E phibar_k phi_l = C_b[k][l]`,
/// real boson species carry the covariance itself, and conjugate fermion
/// species carry `C_f` with `E psibar_k psi_l = C_f[k][l]`.
#[derive(Clone, Debug, PartialEq)]
pub struct CovariancePair<S> {
    pub blocks: BTreeMap<u16, Mat<S>>,
}

/// One labelled block as read from configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovBlock {
    pub species: String,
    /// Row-major entries as text scalars (`"1/2"`, `"0.25"`, ...).
    pub rows: Vec<Vec<String>>,
}

fn relative_tol<S: Scalar>() -> f64 {
    if S::EXACT {
        0.0
    } else {
        1e-12
    }
}

fn positive_definite<S: Scalar>(m: &Mat<S>) -> bool {
    if !m.is_real() {
        return false;
    }
    if S::EXACT {
        // Sylvester: every leading principal minor is positive.
        (1..=m.n).all(|k| {
            let idx: Vec<usize> = (0..k).collect();
            let d = det(m.select(&idx, &idx));
            d.to_c64().re > 0.0
        })
    } else {
        cholesky(&m.to_f64()).is_ok()
    }
}

impl<S: Scalar> CovariancePair<S> {
    /// Validates each block against the kind of its species.
    pub fn new(layout: &Layout, blocks: Vec<(u16, Mat<S>)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (s, m) in blocks {
            let sp = layout
                .species
                .get(s as usize)
                .ok_or_else(|| Error::Invalid(format!("covariance for unknown species {s}")))?;
            if !m.is_symmetric(relative_tol::<S>()) {
                return Err(Error::Invalid(format!("covariance for `{}` is not symmetric", sp.name)));
            }
            match sp.kind {
                Kind::Boson => {
                    if !positive_definite(&m) {
                        return Err(Error::Invalid(format!(
                            "covariance for `{}` is not real positive definite",
                            sp.name
                        )));
                    }
                }
                Kind::Fermion => {
                    if !sp.pair {
                        return Err(Error::Invalid(format!(
                            "fermion species `{}` must be a conjugate pair to be integrated",
                            sp.name
                        )));
                    }
                    if m.det().is_zero() {
                        return Err(Error::Invalid(format!("covariance for `{}` is singular", sp.name)));
                    }
                }
            }
            if map.insert(s, m).is_some() {
                return Err(Error::Invalid(format!("two covariance blocks for `{}`", sp.name)));
            }
        }
        Ok(CovariancePair { blocks: map })
    }

    /// `C_b` on the first complex boson species and `C_f` on the first
    /// fermion pair species.
    pub fn pair(layout: &Layout, cb: Mat<S>, cf: Mat<S>) -> Result<Self> {
        let find = |kind| {
            layout
                .species
                .iter()
                .position(|s| s.kind == kind && s.pair)
                .map(|i| i as u16)
                .ok_or_else(|| Error::Invalid(format!("layout has no {kind:?} pair species")))
        };
        Self::new(layout, vec![(find(Kind::Boson)?, cb), (find(Kind::Fermion)?, cf)])
    }

    /// Equal boson and fermion covariance.
    pub fn supersymmetric(layout: &Layout, c: Mat<S>) -> Result<Self> {
        Self::pair(layout, c.clone(), c)
    }

    pub fn from_config(layout: &Layout, blocks: &[CovBlock]) -> Result<Self> {
        let mut out = Vec::new();
        for b in blocks {
            let s = layout
                .by_name(&b.species)
                .ok_or_else(|| Error::Invalid(format!("unknown species `{}`", b.species)))?;
            let rows = b
                .rows
                .iter()
                .map(|r| {
                    r.iter()
                        .map(|t| S::parse_text(t, "0").ok_or_else(|| Error::Invalid(format!("bad entry `{t}`"))))
                        .collect::<Result<Vec<S>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            out.push((s, Mat::from_rows(rows)?));
        }
        Self::new(layout, out)
    }

    pub fn block(&self, s: u16) -> Option<&Mat<S>> {
        self.blocks.get(&s)
    }

    fn first_of(&self, layout: &Layout, kind: Kind) -> Option<&Mat<S>> {
        self.blocks.iter().find(|(s, _)| layout.kind(**s) == kind).map(|(_, m)| m)
    }

    pub fn cb(&self, layout: &Layout) -> Option<&Mat<S>> {
        self.first_of(layout, Kind::Boson)
    }

    pub fn cf(&self, layout: &Layout) -> Option<&Mat<S>> {
        self.first_of(layout, Kind::Fermion)
    }

    /// Entry-wise sum. Both sides must cover the same species with equal
    /// block sizes.
    pub fn sum(&self, other: &Self) -> Result<Self> {
        if self.blocks.len() != other.blocks.len() {
            return Err(Error::Invalid("covariances cover different species".into()));
        }
        let mut blocks = BTreeMap::new();
        for (s, a) in &self.blocks {
            let b = other.blocks.get(s).filter(|b| b.n == a.n).ok_or_else(|| {
                Error::Invalid(format!("covariance blocks for species {s} do not match"))
            })?;
            blocks.insert(*s, a.add(b));
        }
        Ok(CovariancePair { blocks })
    }

    pub fn scaled(&self, t: &S) -> Self {
        CovariancePair { blocks: self.blocks.iter().map(|(s, m)| (*s, m.scale(t))).collect() }
    }

    /// One boson block and one fermion block, equal to each other.
    pub fn is_supersymmetric(&self, layout: &Layout) -> bool {
        match (self.cb(layout), self.cf(layout)) {
            (Some(b), Some(f)) => self.blocks.len() == 2 && b == f,
            _ => false,
        }
    }

    /// The antisymmetric fermion matrix on `(psi_1..psi_M, psibar_1..psibar_M)`
    /// with `E psi_u psi_v = -C[u][v]`.
    pub fn assembled_fermion(&self, s: u16) -> Option<Mat<S>> {
        let c = self.blocks.get(&s)?;
        let m = c.n;
        let mut out = Mat::zeros(2 * m);
        for k in 0..m {
            for l in 0..m {
                out.set(k, m + l, c.get(k, l));
                out.set(m + l, k, -c.get(k, l));
            }
        }
        Some(out)
    }

    /// `E phi_u phi_v` for a complex boson species in the coordinates
    /// `(phi_1..phi_M, phibar_1..phibar_M)`.
    pub fn assembled_boson(&self, s: u16) -> Option<Mat<S>> {
        let c = self.blocks.get(&s)?;
        let m = c.n;
        let mut out = Mat::zeros(2 * m);
        for k in 0..m {
            for l in 0..m {
                out.set(k, m + l, c.get(k, l));
                out.set(m + l, k, c.get(l, k));
            }
        }
        Some(out)
    }

    /// `C_b` for the real coordinates: `u` and `v` each have covariance
    /// `C_b / 2` and are independent.
    pub fn real_part_covariance(&self, s: u16) -> Option<Mat<S>> {
        Some(self.blocks.get(&s)?.scale(&S::from_ratio(1, 2)))
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> CovariancePair<T> {
        CovariancePair { blocks: self.blocks.iter().map(|(s, m)| (*s, m.map(&f))).collect() }
    }
}

/// `C[x][y] = kappa^|x - y|` on `n` points.
pub fn decaying<S: Scalar>(n: usize, kappa: &S) -> Mat<S> {
    let mut m = Mat::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let mut v = S::one();
            for _ in 0..i.abs_diff(j) {
                v = v * kappa.clone();
            }
            m.set(i, j, v);
        }
    }
    m
}

/// Partial bijection `x -> x'` from sites of the base layout onto the
/// primed sites `0..M` of each integrated species. Species without an
/// entry and unmatched sites are external.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BijectionMap {
    pub maps: BTreeMap<u16, Vec<Option<u32>>>,
}

impl BijectionMap {
    /// Every site of each listed species is integrated, with `x' = x`.
    pub fn identity(layout: &Layout, species: &[u16]) -> Self {
        let maps = species
            .iter()
            .map(|&s| (s, (0..layout.species[s as usize].sites as u32).map(Some).collect()))
            .collect();
        BijectionMap { maps }
    }

    /// Every species that has a covariance block, all sites matched.
    pub fn for_covariance<S: Scalar>(layout: &Layout, c: &CovariancePair<S>) -> Self {
        Self::identity(layout, &c.blocks.keys().copied().collect::<Vec<_>>())
    }

    /// The listed sites of each species are matched, in order, to primed
    /// sites `0, 1, ...`.
    pub fn restricted(layout: &Layout, sites: &[(u16, Vec<u32>)]) -> Result<Self> {
        let mut maps = BTreeMap::new();
        for (s, list) in sites {
            let n = layout
                .species
                .get(*s as usize)
                .ok_or_else(|| Error::Invalid(format!("unknown species {s}")))?
                .sites;
            let mut m = vec![None; n];
            for (k, &x) in list.iter().enumerate() {
                let slot = m
                    .get_mut(x as usize)
                    .ok_or_else(|| Error::Invalid(format!("site {x} outside species {s}")))?;
                if slot.is_some() {
                    return Err(Error::Invalid(format!("site {x} matched twice")));
                }
                *slot = Some(k as u32);
            }
            maps.insert(*s, m);
        }
        Ok(BijectionMap { maps })
    }

    pub fn primed_count(&self, s: u16) -> usize {
        self.maps.get(&s).map_or(0, |m| m.iter().flatten().count())
    }

    /// Primed site of `x`, if matched.
    pub fn prime_site(&self, s: u16, x: u32) -> Option<u32> {
        self.maps.get(&s)?.get(x as usize).copied().flatten()
    }

    /// Base site matched to primed site `k`.
    pub fn unprime_site(&self, s: u16, k: u32) -> Option<u32> {
        self.maps.get(&s)?.iter().position(|&p| p == Some(k)).map(|x| x as u32)
    }

    pub fn doubled_layout(&self, base: &Layout) -> Arc<Layout> {
        let counts: Vec<usize> = (0..base.species.len() as u16).map(|s| self.primed_count(s)).collect();
        Arc::new(base.doubled(&counts))
    }

    /// Covariance blocks must match the primed sites exactly.
    pub fn check<S: Scalar>(&self, layout: &Layout, c: &CovariancePair<S>) -> Result<()> {
        for (s, m) in &self.maps {
            if *s as usize >= layout.species.len() || m.len() != layout.species[*s as usize].sites {
                return Err(Error::Invalid(format!("bijection does not fit species {s}")));
            }
            let mut seen = BTreeSet::new();
            for k in m.iter().flatten() {
                if !seen.insert(*k) || *k as usize >= m.len() {
                    return Err(Error::Invalid(format!("bijection for species {s} is not injective")));
                }
            }
            if seen.iter().enumerate().any(|(i, &k)| i as u32 != k) {
                return Err(Error::Invalid(format!("primed sites of species {s} are not 0..M")));
            }
            if !seen.is_empty() && c.block(*s).map(|b| b.n) != Some(seen.len()) {
                return Err(Error::Invalid(format!(
                    "species {s} has {} primed sites but no matching covariance block",
                    seen.len()
                )));
            }
        }
        for (s, b) in &c.blocks {
            if self.primed_count(*s) != b.n {
                return Err(Error::Invalid(format!(
                    "covariance block for species {s} has size {} but {} sites are matched",
                    b.n,
                    self.primed_count(*s)
                )));
            }
        }
        Ok(())
    }
}

/// Base index to its primed copy in the doubled layout.
pub fn primed_index(b: &BijectionMap, u: FieldIndex) -> Option<FieldIndex> {
    b.prime_site(u.species, u.site).map(|k| FieldIndex::new(2 * u.species + 1, u.conj, k))
}

/// Base index to its unprimed copy in the doubled layout.
pub fn lift_index(u: FieldIndex) -> FieldIndex {
    FieldIndex::new(2 * u.species, u.conj, u.site)
}
