use std::sync::Arc;

use crate::algebra::{Field, FieldIndex, Kind, Layout, Scalar};
use crate::error::Result;
use crate::gaussian::{lift_index, BijectionMap, CovariancePair};
use crate::linalg::Mat;
use crate::norms::{forget, TestFunction};
use crate::verify::instance::Gen;

/// A base layout with a random covariance pair and its doubled layout.
pub struct Setup<S> {
    pub base: Arc<Layout>,
    pub dl: Arc<Layout>,
    pub c: CovariancePair<S>,
    pub b: BijectionMap,
}

/// Supersymmetric layout on `m` sites with an SPD boson covariance and a
/// symmetric invertible fermion covariance.
pub fn random_pair<S: Scalar>(gen: &mut Gen, m: usize) -> Result<Setup<S>> {
    let base = Arc::new(Layout::supersymmetric(m));
    let cb = gen.spd(m);
    let cf = gen.symmetric_invertible(m);
    let c = CovariancePair::pair(&base, cb, cf)?;
    let b = BijectionMap::for_covariance(&base, &c);
    let dl = b.doubled_layout(&base);
    Ok(Setup { base, dl, c, b })
}

/// Block-diagonal embedding of square blocks.
pub fn block_diagonal<S: Scalar>(blocks: &[Mat<S>]) -> Mat<S> {
    let n = blocks.iter().map(|b| b.n).sum();
    let mut out = Mat::zeros(n);
    let mut off = 0;
    for b in blocks {
        for i in 0..b.n {
            for j in 0..b.n {
                out.set(off + i, off + j, b.get(i, j));
            }
        }
        off += b.n;
    }
    out
}

/// Indices of the doubled layout on primed (odd) species.
pub fn primed(dl: &Layout) -> Vec<FieldIndex> {
    dl.all_indices().into_iter().filter(|u| u.species % 2 == 1).collect()
}

/// Indices of the doubled layout on base (even) species.
pub fn unprimed(dl: &Layout) -> Vec<FieldIndex> {
    dl.all_indices().into_iter().filter(|u| u.species % 2 == 0).collect()
}

pub fn of_kind(layout: &Layout, pool: &[FieldIndex], kind: Kind) -> Vec<FieldIndex> {
    pool.iter().copied().filter(|u| layout.kind(u.species) == kind).collect()
}

/// `phi ⊔ xi` on the doubled layout from a base field and a field on the
/// primed bosons.
pub fn disjoint_field<S: Scalar>(phi: &Field<S>, xi: &Field<S>) -> Field<S> {
    let mut out = Field::zero();
    for (&u, v) in &phi.values {
        out.set(lift_index(u), v.clone());
    }
    for (&u, v) in &xi.values {
        out.set(u, v.clone());
    }
    out
}

/// `phi + xi` on the base layout, primed sites mapped back through `b`.
pub fn summed_field<S: Scalar>(phi: &Field<S>, xi: &Field<S>, b: &BijectionMap) -> Field<S> {
    let mut out = phi.clone();
    for (&u, v) in &xi.values {
        let z = forget(u, b);
        out.set(z, out.get(z) + v.clone());
    }
    out
}

/// A random field on the primed boson species of a doubled layout.
pub fn primed_field<S: Scalar>(gen: &mut Gen, dl: &Layout, real: bool) -> Field<S> {
    let mut f = Field::zero();
    for (s, sp) in dl.species.iter().enumerate() {
        if s % 2 == 1 && sp.kind == Kind::Boson {
            let vals = gen.field_values::<S>(sp.sites, real);
            f = f.add(&Field::from_complex(dl, s as u16, &vals));
        }
    }
    f
}

/// Random test function whose sequences are drawn from `pool`.
pub fn test_function_on<S: Scalar>(
    gen: &mut Gen,
    pool: &[FieldIndex],
    max_len: usize,
    count: usize,
    real: bool,
) -> TestFunction<S> {
    let mut g = TestFunction::zero();
    for _ in 0..count {
        let len = gen.below(max_len + 1);
        let z = gen.sequence(pool, len);
        let v = if real { gen.real_scalar::<S>() } else { gen.scalar::<S>() };
        g.set(z, v);
    }
    g
}

/// A random nonempty subset of `0..n`.
pub fn subset(gen: &mut Gen, n: usize) -> Vec<usize> {
    loop {
        let s: Vec<usize> = (0..n).filter(|_| gen.coin()).collect();
        if !s.is_empty() {
            return s;
        }
    }
}

pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
