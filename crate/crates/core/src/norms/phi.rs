use std::collections::{BTreeMap, HashMap};

use super::test_function::TestFunction;
use super::weight::Weight;
use crate::algebra::{IndexSequence, Scalar, C64};
use crate::error::{Error, Result};
use crate::lattice::{Dir, MultiIndex, Torus};

/// `||g||_Phi` together with the norms of its fixed-length restrictions.
#[derive(Clone, Debug, PartialEq)]
pub struct PhiNorm {
    pub value: f64,
    pub per_length: BTreeMap<usize, f64>,
}

impl PhiNorm {
    pub fn of_length(&self, r: usize) -> f64 {
        self.per_length.get(&r).copied().unwrap_or(0.0)
    }
}

/// Species and conjugation of each entry; sequences sharing a pattern are
/// coupled by the derivative constraints.
pub type Pattern = Vec<(u16, bool)>;

pub fn pattern(z: &IndexSequence) -> Pattern {
    z.entries.iter().map(|u| (u.species, u.conj)).collect()
}

const DENSE_LIMIT: usize = 1 << 22;

pub(crate) fn dense_size(n: usize, k: usize) -> Result<usize> {
    n.checked_pow(k as u32)
        .filter(|&s| s <= DENSE_LIMIT)
        .ok_or_else(|| Error::TooLarge(format!("{n}^{k} site tuples")))
}

/// Index of a site tuple in the dense layout `sum_i x_i N^i`.
pub(crate) fn tuple_index(z: &IndexSequence, n: usize) -> Result<usize> {
    let mut idx = 0;
    let mut stride = 1;
    for u in &z.entries {
        if u.site as usize >= n {
            return Err(Error::Precondition(format!("site {} lies outside the torus", u.site)));
        }
        idx += u.site as usize * stride;
        stride *= n;
    }
    Ok(idx)
}

pub(crate) fn tuple_sites(mut idx: usize, n: usize, k: usize) -> Vec<u32> {
    (0..k)
        .map(|_| {
            let s = idx % n;
            idx /= n;
            s as u32
        })
        .collect()
}

/// Groups the support of `g` by pattern.
pub(crate) fn by_pattern<S: Clone>(values: &BTreeMap<IndexSequence, S>) -> BTreeMap<Pattern, Vec<(IndexSequence, S)>> {
    let mut out: BTreeMap<Pattern, Vec<(IndexSequence, S)>> = BTreeMap::new();
    for (z, v) in values {
        out.entry(pattern(z)).or_default().push((z.clone(), v.clone()));
    }
    out
}

/// `sup w^-1 |grad^alpha g_z|` over all `(alpha, z)` with finite weight.
/// A torus is needed only when `p_phi > 0`.
pub fn phi_norm<S: Scalar>(g: &TestFunction<S>, weight: &Weight, torus: Option<&Torus>) -> Result<PhiNorm> {
    let mut per_length: BTreeMap<usize, f64> = BTreeMap::new();
    for (pat, entries) in by_pattern(&g.values) {
        let w0 = pat.iter().try_fold(1.0, |acc, &(s, _)| Ok::<_, Error>(acc * weight.scale(s)?))?;
        let best = if weight.p_phi == 0 || pat.is_empty() {
            entries.iter().map(|(_, v)| v.norm_f64()).fold(0.0, f64::max) / w0
        } else {
            let torus = torus.ok_or_else(|| Error::Invalid("derivative weights need a torus".into()))?;
            dense_sup(torus, &entries, weight)? / w0
        };
        let slot = per_length.entry(pat.len()).or_insert(0.0);
        *slot = slot.max(best);
    }
    let value = per_length.values().copied().fold(0.0, f64::max);
    Ok(PhiNorm { value, per_length })
}

struct Shifts {
    n: usize,
    table: Vec<Vec<usize>>,
}

impl Shifts {
    fn new(torus: &Torus) -> Self {
        let n = torus.num_sites();
        let table = Dir::all(torus.d).into_iter().map(|e| (0..n).map(|x| torus.shift(x, e)).collect()).collect();
        Shifts { n, table }
    }

    /// Forward difference along `e` acting on component `comp`.
    fn apply(&self, arr: &[C64], comp: usize, slot: usize) -> Vec<C64> {
        let stride = self.n.pow(comp as u32);
        let tab = &self.table[slot];
        (0..arr.len())
            .map(|idx| {
                let x = (idx / stride) % self.n;
                let moved = idx + tab[x] * stride - x * stride;
                arr[moved] - arr[idx]
            })
            .collect()
    }
}

fn dir_slots(alpha: &MultiIndex) -> Vec<usize> {
    alpha.counts.iter().enumerate().flat_map(|(k, &c)| std::iter::repeat(k).take(c as usize)).collect()
}

/// Largest `R^{sum|alpha_i|} |grad^alpha g|` over the dense pattern array.
fn dense_sup<S: Scalar>(torus: &Torus, entries: &[(IndexSequence, S)], weight: &Weight) -> Result<f64> {
    let k = entries[0].0.len();
    let n = torus.num_sites();
    let mut arr = vec![C64::new(0.0, 0.0); dense_size(n, k)?];
    for (z, v) in entries {
        arr[tuple_index(z, n)?] = v.to_c64();
    }
    let shifts = Shifts::new(torus);
    let alphas: Vec<Vec<usize>> = MultiIndex::up_to(torus.d, weight.p_phi).iter().map(dir_slots).collect();
    fn rec(arr: &[C64], comp: usize, order: u32, k: usize, alphas: &[Vec<usize>], sh: &Shifts, r: f64) -> f64 {
        if comp == k {
            let m = arr.iter().map(|c| c.norm()).fold(0.0, f64::max);
            return m * r.powi(order as i32);
        }
        let mut best: f64 = 0.0;
        for a in alphas {
            let mut cur = arr.to_vec();
            for &slot in a {
                cur = sh.apply(&cur, comp, slot);
            }
            best = best.max(rec(&cur, comp + 1, order + a.len() as u32, k, alphas, sh, r));
        }
        best
    }
    Ok(rec(&arr, 0, 0, k, &alphas, &shifts, weight.r))
}

/// A derivative constraint `|sum_j c_j g_j| <= rhs` on dense tuple indices.
#[derive(Clone, Debug)]
pub(crate) struct Row {
    pub coefs: Vec<(usize, i64)>,
    pub rhs: f64,
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Constraint rows of a single-field `Phi` norm in the scale of species 0,
/// as `(site coefficients, weight)`.
pub(crate) fn field_rows(torus: &Torus, weight: &Weight) -> Result<Vec<(Vec<(usize, i64)>, f64)>> {
    Ok(constraint_rows(torus, &[weight.scale(0)?], weight)?.into_iter().map(|r| (r.coefs, r.rhs)).collect())
}

/// All finite-weight derivative constraints for one pattern whose entries
/// have scales `scales`, deduplicated up to sign and integer multiples.
pub(crate) fn constraint_rows(torus: &Torus, scales: &[f64], weight: &Weight) -> Result<Vec<Row>> {
    let k = scales.len();
    let n = torus.num_sites();
    let total = dense_size(n, k)?;
    let alphas = MultiIndex::up_to(torus.d, weight.p_phi);
    if total.saturating_mul(alphas.len().saturating_pow(k as u32)) > DENSE_LIMIT {
        return Err(Error::TooLarge(format!("{} constraint rows", total * alphas.len().pow(k as u32))));
    }
    let stencils: Vec<Vec<Vec<(usize, i64)>>> =
        alphas.iter().map(|a| (0..n).map(|x| torus.stencil(a, x)).collect()).collect();
    let w0: f64 = scales.iter().product();
    let mut rows: HashMap<Vec<(usize, i64)>, f64> = HashMap::new();
    let mut choice = vec![0usize; k];
    loop {
        let order: u32 = choice.iter().map(|&a| alphas[a].order()).sum();
        let rhs = w0 * weight.r.powi(-(order as i32));
        for idx in 0..total {
            let sites = tuple_sites(idx, n, k);
            let mut acc: Vec<(usize, i64)> = vec![(0, 1)];
            let mut stride = 1;
            for (comp, &a) in choice.iter().enumerate() {
                let st = &stencils[a][sites[comp] as usize];
                let mut next = Vec::with_capacity(acc.len() * st.len());
                for &(i, c) in &acc {
                    for &(s, d) in st {
                        next.push((i + s * stride, c * d));
                    }
                }
                acc = next;
                stride *= n;
            }
            acc.sort_unstable();
            let mut merged: Vec<(usize, i64)> = Vec::with_capacity(acc.len());
            for (i, c) in acc {
                match merged.last_mut() {
                    Some(last) if last.0 == i => last.1 += c,
                    _ => merged.push((i, c)),
                }
            }
            merged.retain(|p| p.1 != 0);
            if merged.is_empty() {
                continue;
            }
            let mut g = merged.iter().fold(0, |acc, p| gcd(acc, p.1));
            if merged[0].1 < 0 {
                g = -g;
            }
            for p in &mut merged {
                p.1 /= g;
            }
            let bound = rhs / g.abs() as f64;
            rows.entry(merged).and_modify(|b| *b = b.min(bound)).or_insert(bound);
        }
        let mut c = 0;
        while c < k {
            choice[c] += 1;
            if choice[c] < alphas.len() {
                break;
            }
            choice[c] = 0;
            c += 1;
        }
        if c == k {
            break;
        }
    }
    let mut out: Vec<Row> = rows.into_iter().map(|(coefs, rhs)| Row { coefs, rhs }).collect();
    out.sort_by(|a, b| a.coefs.cmp(&b.coefs));
    Ok(out)
}
