//! Coefficient-level product: `(F' * F'')_z` as a sum over complementary
//! subsequence pairs of `z`, with the fermion reordering sign.

use super::element::NElement;
use super::index::{perm_sign, Field, IndexSequence, Kind};
use super::scalar::Scalar;

/// `sum_{(z', z'') complementary in z} F'_{z'}(phi) F''_{z''}(phi) sgn`.
pub fn star_coefficient<S: Scalar>(a: &NElement<S>, b: &NElement<S>, z: &IndexSequence, phi: &Field<S>) -> S {
    let n = z.len();
    assert!(n < 24, "sequence too long for subset enumeration");
    let layout = &a.layout;
    let ferm: Vec<bool> = z.entries.iter().map(|u| layout.kind(u.species) == Kind::Fermion).collect();
    let mut total = S::zero();
    for mask in 0u32..(1 << n) {
        let mut left = Vec::new();
        let mut right = Vec::new();
        let mut order_l = Vec::new();
        let mut order_r = Vec::new();
        for (i, &u) in z.entries.iter().enumerate() {
            if mask & (1 << i) != 0 {
                left.push(u);
                if ferm[i] {
                    order_l.push(i);
                }
            } else {
                right.push(u);
                if ferm[i] {
                    order_r.push(i);
                }
            }
        }
        let ca = a.coefficient(&IndexSequence::new(left), phi);
        if ca.is_zero() {
            continue;
        }
        let cb = b.coefficient(&IndexSequence::new(right), phi);
        if cb.is_zero() {
            continue;
        }
        order_l.extend(order_r);
        let term = ca * cb;
        total = if perm_sign(&order_l) > 0 { total + term } else { total - term };
    }
    total
}
