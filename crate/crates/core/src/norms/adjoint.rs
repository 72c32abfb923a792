use super::test_function::TestFunction;
use super::weight::Weight;
use crate::algebra::{Field, FieldIndex, IndexSequence, Kind, Layout, Scalar};
use crate::error::{Error, Result};
use crate::gaussian::BijectionMap;

/// Species-ordered sequences of length `len` drawn from `pool`.
fn ordered_sequences(pool: &[FieldIndex], len: usize) -> Vec<Vec<FieldIndex>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(len);
    fn rec(pool: &[FieldIndex], len: usize, cur: &mut Vec<FieldIndex>, out: &mut Vec<Vec<FieldIndex>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for &u in pool {
            if cur.last().map_or(true, |l: &FieldIndex| l.species <= u.species) {
                cur.push(u);
                rec(pool, len, cur, out);
                cur.pop();
            }
        }
    }
    rec(pool, len, &mut cur, &mut out);
    out
}

/// Sum over splits `z = z' ∘ z''` with `z''` bosonic of
/// `z!/(z'! z''!) mult(|z''|) xi^{z''} g_{z'}`, dropping results with more
/// than `p_n` boson entries.
fn sigma_terms<S: Scalar>(
    g: &TestFunction<S>,
    xi: &Field<S>,
    layout: &Layout,
    p_n: u32,
    lengths: impl Iterator<Item = usize> + Clone,
    mult: impl Fn(usize) -> S,
) -> TestFunction<S> {
    let pool: Vec<FieldIndex> =
        xi.values.keys().copied().filter(|u| layout.kind(u.species) == Kind::Boson).collect();
    let mut out = TestFunction::zero();
    for (z1, v) in &g.values {
        let b1 = z1.boson_count(layout);
        for len in lengths.clone() {
            if b1 + len > p_n as usize {
                continue;
            }
            let m = mult(len);
            if m.is_zero() {
                continue;
            }
            for z2 in ordered_sequences(&pool, len) {
                let z2 = IndexSequence::new(z2);
                let z = z1.concat(&z2);
                let comb = z.factorial() / (z1.factorial() * z2.factorial());
                let xz = z2.entries.iter().fold(S::one(), |acc, &u| acc * xi.get(u));
                out.add_at(z, v.clone() * xz * m.clone() * S::from_i64(comb as i64));
            }
        }
    }
    out
}

/// `sigma*_xi(s) g`, the test function with
/// `<P, g>_{t phi + s xi} = <P, sigma*_xi(s) g>_{t phi}` for polynomials of
/// degree at most `p_n`.
pub fn sigma_star<S: Scalar>(g: &TestFunction<S>, xi: &Field<S>, s: &S, layout: &Layout, p_n: u32) -> TestFunction<S> {
    sigma_terms(g, xi, layout, p_n, 0..=p_n as usize, |len| {
        (0..len).fold(S::one(), |acc, _| acc * s.clone())
    })
}

/// `m`-th derivative of `sigma*_xi(s) g` at `s = 0`.
pub fn sigma_star_derivative<S: Scalar>(
    g: &TestFunction<S>,
    xi: &Field<S>,
    m: usize,
    layout: &Layout,
    p_n: u32,
) -> TestFunction<S> {
    let mfact = (1..=m as i64).fold(S::one(), |acc, k| acc * S::from_i64(k));
    sigma_terms(g, xi, layout, p_n, m..=m, |_| mfact.clone())
}

/// Maps a doubled-layout index to its base counterpart.
pub fn forget(u: FieldIndex, b: &BijectionMap) -> FieldIndex {
    let s = u.species / 2;
    let site = if u.species % 2 == 1 { b.unprime_site(s, u.site).unwrap_or(u.site) } else { u.site };
    FieldIndex::new(s, u.conj, site)
}

/// `(theta* g)_z = sum_{forget(v) = z} (z!/v!) g_v`.
pub fn theta_star<S: Scalar>(g: &TestFunction<S>, b: &BijectionMap) -> TestFunction<S> {
    let mut out = TestFunction::zero();
    for (v, val) in &g.values {
        let z = IndexSequence::new(v.entries.iter().map(|&u| forget(u, b)).collect());
        let ratio = S::from_i64(z.factorial() as i64) / S::from_i64(v.factorial() as i64);
        out.add_at(z, val.clone() * ratio);
    }
    out
}

/// `rho^(n) = 2 sup_{r >= n} sup_{||g||_{Phi'(r)} <= 1} ||g||_{Phi(r)}` for two
/// weights of the same family, up to sequences of length `max_len`. The sup
/// is `prod h'/h` over the best admissible species composition.
pub fn rho_ratio(primed: &Weight, base: &Weight, n: usize, layout: &Layout, p_n: u32, max_len: usize) -> Result<f64> {
    if primed.p_phi != base.p_phi || primed.r != base.r {
        return Err(Error::Invalid("rho needs weights with equal derivative cap and smoothness scale".into()));
    }
    let mut best_b: Option<f64> = None;
    let mut best_f: Option<f64> = None;
    for (s, sp) in layout.species.iter().enumerate() {
        let ratio = primed.scale(s as u16)? / base.scale(s as u16)?;
        let slot = if sp.kind == Kind::Boson { &mut best_b } else { &mut best_f };
        *slot = Some(slot.map_or(ratio, |b: f64| b.max(ratio)));
    }
    let mut sup: f64 = 0.0;
    for r in n..=max_len {
        for i in 0..=r.min(p_n as usize) {
            let bos = match (i, best_b) {
                (0, _) => 1.0,
                (_, Some(b)) => b.powi(i as i32),
                (_, None) => continue,
            };
            let fer = match (r - i, best_f) {
                (0, _) => 1.0,
                (j, Some(f)) => f.powi(j as i32),
                (_, None) => continue,
            };
            sup = sup.max(bos * fer);
        }
    }
    Ok(2.0 * sup)
}
