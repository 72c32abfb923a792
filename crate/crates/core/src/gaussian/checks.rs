use std::collections::BTreeSet;

use serde::Serialize;

use super::covariance::{BijectionMap, CovariancePair};
use super::ops::{combined_expectation, expect_theta, fermion_expectation, laplacian};
use crate::algebra::{FieldIndex, Kind, NElement, Scalar};
use crate::error::{Error, Result};

/// Outcome of comparing two computed sides of an identity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub holds: bool,
    /// Largest coefficient modulus of the difference.
    pub residual: f64,
}

/// Exact equality for exact scalars, `1e-9` relative to the larger side
/// otherwise.
pub fn compare<S: Scalar>(lhs: &NElement<S>, rhs: &NElement<S>) -> CheckOutcome {
    let diff = lhs.sub(rhs);
    let residual = max_coefficient(&diff);
    let holds = if S::EXACT {
        diff.is_zero()
    } else {
        residual <= 1e-9 * max_coefficient(lhs).max(max_coefficient(rhs)).max(1.0)
    };
    CheckOutcome { holds, residual }
}

pub fn max_coefficient<S: Scalar>(f: &NElement<S>) -> f64 {
    f.terms.values().flat_map(|p| p.terms.values()).map(Scalar::norm_f64).fold(0.0, f64::max)
}

/// `(E_{C2} theta o E_{C1} theta) F` against `E_{C1+C2} theta F`.
pub fn convolution_check<S: Scalar>(
    f: &NElement<S>,
    c1: &CovariancePair<S>,
    c2: &CovariancePair<S>,
    b: &BijectionMap,
) -> Result<CheckOutcome> {
    let lhs = expect_theta(&expect_theta(f, c1, b)?, c2, b)?;
    let rhs = expect_theta(f, &c1.sum(c2)?, b)?;
    Ok(compare(&lhs, &rhs))
}

/// Primed sites (of any species) that `g` depends on.
fn primed_support<S: Scalar>(g: &NElement<S>) -> BTreeSet<u32> {
    let mut out = BTreeSet::new();
    for (y, p) in &g.terms {
        out.extend(y.iter().filter(|u| u.species % 2 == 1).map(|u| u.site));
        for m in p.terms.keys() {
            out.extend(m.indices().filter(|u| u.species % 2 == 1).map(|u| u.site));
        }
    }
    out
}

/// `E(F1 F2) = (E F1)(E F2)` for doubled-layout elements whose primed
/// supports are disjoint and uncorrelated under `c`.
pub fn factorisation_check<S: Scalar>(
    f1: &NElement<S>,
    f2: &NElement<S>,
    c: &CovariancePair<S>,
    b: &BijectionMap,
    base: &std::sync::Arc<crate::algebra::Layout>,
) -> Result<CheckOutcome> {
    b.check(base, c)?;
    let (x, y) = (primed_support(f1), primed_support(f2));
    if !x.is_disjoint(&y) {
        return Err(Error::Precondition("the two factors share integrated sites".into()));
    }
    for m in c.blocks.values() {
        for &k in &x {
            for &l in &y {
                let (k, l) = (k as usize, l as usize);
                if k < m.n && l < m.n && !(m.get(k, l).is_zero() && m.get(l, k).is_zero()) {
                    return Err(Error::Precondition(format!(
                        "covariance couples primed sites {k} and {l}"
                    )));
                }
            }
        }
    }
    let lhs = combined_expectation(&f1.mul(f2), c, base)?;
    let rhs = combined_expectation(f1, c, base)?.mul(&combined_expectation(f2, c, base)?);
    Ok(compare(&lhs, &rhs))
}

/// Fermionic integration by parts on the doubled layout:
/// `E psi_x G = sum_y Cf[y][x] E i_y G` over primed fermion indices, with
/// the assembled matrix of [`CovariancePair::assembled_fermion`]. Under the
/// convention `E psi_u psi_v = -Cf[u][v]` this is the transposed weight.
pub fn integration_by_parts_check<S: Scalar>(
    g: &NElement<S>,
    x: FieldIndex,
    c: &CovariancePair<S>,
) -> Result<CheckOutcome> {
    let s = x.species;
    if s % 2 == 0 || g.layout.kind(s) != Kind::Fermion {
        return Err(Error::Invalid("integration by parts needs a primed fermion index".into()));
    }
    let big = c
        .assembled_fermion(s / 2)
        .ok_or_else(|| Error::Invalid("no covariance for this fermion species".into()))?;
    let m = big.n / 2;
    let pos = |u: FieldIndex| u.site as usize + if u.conj { m } else { 0 };
    let lhs = fermion_expectation(&NElement::fermion(&g.layout, x).mul(g), c);
    let mut rhs = NElement::zero(&g.layout);
    for conj in [false, true] {
        for k in 0..m as u32 {
            let y = FieldIndex::new(s, conj, k);
            let w = big.get(pos(y), pos(x));
            if !w.is_zero() {
                rhs = rhs.add(&fermion_expectation(&g.fermion_derivative(y), c).scale(&w));
            }
        }
    }
    Ok(compare(&lhs, &rhs))
}

/// `d/dt E_{tC} theta F = (1/2) Delta_C E_{tC} theta F` at `t = 1`. The left
/// side is the exact derivative of the interpolating polynomial in `t`
/// through `t = 1, ..., D + 1`, where `D` bounds its degree.
pub fn heat_equation_check<S: Scalar>(f: &NElement<S>, c: &CovariancePair<S>, b: &BijectionMap) -> Result<CheckOutcome> {
    let deg = f.degree() as usize / 2;
    let ts: Vec<S> = (1..=deg as i64 + 1).map(S::from_i64).collect();
    let vals = ts.iter().map(|t| expect_theta(f, &c.scaled(t), b)).collect::<Result<Vec<_>>>()?;
    let t0 = S::one();
    let mut deriv = NElement::zero(&f.layout);
    for (j, tj) in ts.iter().enumerate() {
        // L_j'(t0) = sum_{m != j} 1/(tj - tm) prod_{n != j, m} (t0 - tn)/(tj - tn)
        let mut w = S::zero();
        for (mi, tm) in ts.iter().enumerate() {
            if mi == j {
                continue;
            }
            let mut term = S::one() / (tj.clone() - tm.clone());
            for (ni, tn) in ts.iter().enumerate() {
                if ni != j && ni != mi {
                    term = term * (t0.clone() - tn.clone()) / (tj.clone() - tn.clone());
                }
            }
            w = w + term;
        }
        deriv = deriv.add(&vals[j].scale(&w));
    }
    let rhs = laplacian(&vals[0], c, b).scale(&S::from_ratio(1, 2));
    Ok(compare(&deriv, &rhs))
}
