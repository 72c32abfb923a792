//! Discrete torus `Z^d / (mR Z^d)` paved by blocks of side `R`.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::algebra::Scalar;
use crate::error::{Error, Result};

/// Signed unit direction `+e_axis` or `-e_axis`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dir {
    pub axis: usize,
    pub plus: bool,
}

impl Dir {
    pub fn plus(axis: usize) -> Self {
        Dir { axis, plus: true }
    }
    pub fn minus(axis: usize) -> Self {
        Dir { axis, plus: false }
    }
    fn slot(self) -> usize {
        2 * self.axis + usize::from(!self.plus)
    }
    /// All `2d` directions in slot order.
    pub fn all(d: usize) -> Vec<Dir> {
        (0..2 * d).map(|k| Dir { axis: k / 2, plus: k % 2 == 0 }).collect()
    }
}

/// Counts per signed unit direction; `|alpha|_1` is their sum.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    pub counts: Vec<u32>,
}

impl MultiIndex {
    pub fn zero(d: usize) -> Self {
        MultiIndex { counts: vec![0; 2 * d] }
    }

    pub fn single(d: usize, e: Dir) -> Self {
        let mut m = Self::zero(d);
        m.counts[e.slot()] = 1;
        m
    }

    pub fn order(&self) -> u32 {
        self.counts.iter().sum()
    }

    pub fn with(mut self, e: Dir, n: u32) -> Self {
        self.counts[e.slot()] += n;
        self
    }

    /// Directions with repetition, in slot order.
    pub fn dirs(&self) -> Vec<Dir> {
        let d = self.counts.len() / 2;
        let all = Dir::all(d);
        let mut out = Vec::new();
        for (k, &c) in self.counts.iter().enumerate() {
            for _ in 0..c {
                out.push(all[k]);
            }
        }
        out
    }

    /// Every multi-index with `|alpha|_1 <= p`.
    pub fn up_to(d: usize, p: u32) -> Vec<MultiIndex> {
        let slots = 2 * d;
        let mut out = Vec::new();
        let mut cur = vec![0u32; slots];
        fn rec(k: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            if k == cur.len() {
                out.push(MultiIndex { counts: cur.clone() });
                return;
            }
            for c in 0..=left {
                cur[k] = c;
                rec(k + 1, left - c, cur, out);
            }
            cur[k] = 0;
        }
        rec(0, p, &mut cur, &mut out);
        out.sort_by_key(|a| a.order());
        out
    }

    /// Multi-indices using only forward directions with each count at most
    /// one (`alpha in {0,1}^d`).
    pub fn forward_cube(d: usize) -> Vec<MultiIndex> {
        (0u32..(1 << d))
            .map(|mask| {
                let mut m = Self::zero(d);
                for axis in 0..d {
                    if mask & (1 << axis) != 0 {
                        m.counts[2 * axis] = 1;
                    }
                }
                m
            })
            .collect()
    }
}

/// Set of block ids (block ids index the block grid in row-major order).
pub type Polymer = BTreeSet<usize>;

#[derive(Debug, Serialize, Deserialize)]
pub struct Torus {
    pub d: usize,
    pub r: usize,
    pub m: usize,
    #[serde(skip)]
    neighbourhoods: OnceLock<Vec<BTreeSet<usize>>>,
}

impl Clone for Torus {
    fn clone(&self) -> Self {
        Torus { d: self.d, r: self.r, m: self.m, neighbourhoods: OnceLock::new() }
    }
}

impl PartialEq for Torus {
    fn eq(&self, o: &Self) -> bool {
        (self.d, self.r, self.m) == (o.d, o.r, o.m)
    }
}

impl Torus {
    pub fn new(d: usize, r: usize, m: usize) -> Result<Self> {
        if d == 0 || r < 2 || m == 0 {
            return Err(Error::Invalid(format!("torus needs d >= 1, R >= 2, m >= 1 (got d={d}, R={r}, m={m})")));
        }
        if (m * r).checked_pow(d as u32).map_or(true, |n| n > 1 << 20) {
            return Err(Error::TooLarge(format!("torus with (mR)^d sites for d={d}, R={r}, m={m}")));
        }
        Ok(Torus { d, r, m, neighbourhoods: OnceLock::new() })
    }

    pub fn period(&self) -> usize {
        self.m * self.r
    }

    pub fn num_sites(&self) -> usize {
        self.period().pow(self.d as u32)
    }

    pub fn num_blocks(&self) -> usize {
        self.m.pow(self.d as u32)
    }

    pub fn block_volume(&self) -> usize {
        self.r.pow(self.d as u32)
    }

    pub fn coords(&self, site: usize) -> Vec<usize> {
        let n = self.period();
        let mut c = vec![0; self.d];
        let mut s = site;
        for i in (0..self.d).rev() {
            c[i] = s % n;
            s /= n;
        }
        c
    }

    pub fn site(&self, coords: &[i64]) -> usize {
        let n = self.period() as i64;
        coords.iter().fold(0usize, |acc, &x| acc * n as usize + x.rem_euclid(n) as usize)
    }

    pub fn shift(&self, site: usize, e: Dir) -> usize {
        let mut c: Vec<i64> = self.coords(site).into_iter().map(|x| x as i64).collect();
        c[e.axis] += if e.plus { 1 } else { -1 };
        self.site(&c)
    }

    /// `(grad^e f)_x = f_{x+e} - f_x` with periodic wraparound.
    pub fn forward_difference<S: Scalar>(&self, f: &[S], e: Dir) -> Vec<S> {
        (0..self.num_sites()).map(|x| f[self.shift(x, e)].clone() - f[x].clone()).collect()
    }

    pub fn apply_multiindex<S: Scalar>(&self, f: &[S], alpha: &MultiIndex) -> Vec<S> {
        let mut g = f.to_vec();
        for e in alpha.dirs() {
            g = self.forward_difference(&g, e);
        }
        g
    }

    /// `(grad^alpha f)_x` as a sparse combination `sum_k c_k f_{s_k}`.
    pub fn stencil(&self, alpha: &MultiIndex, x: usize) -> Vec<(usize, i64)> {
        let mut cur: BTreeMap<usize, i64> = BTreeMap::new();
        cur.insert(x, 1);
        for e in alpha.dirs() {
            let mut next = BTreeMap::new();
            for (&s, &c) in &cur {
                *next.entry(self.shift(s, e)).or_insert(0) += c;
                *next.entry(s).or_insert(0) -= c;
            }
            next.retain(|_, c| *c != 0);
            cur = next;
        }
        cur.into_iter().collect()
    }

    pub fn block_coords(&self, b: usize) -> Vec<usize> {
        let mut c = vec![0; self.d];
        let mut s = b;
        for i in (0..self.d).rev() {
            c[i] = s % self.m;
            s /= self.m;
        }
        c
    }

    fn block_id(&self, bc: &[i64]) -> usize {
        let m = self.m as i64;
        bc.iter().fold(0usize, |acc, &x| acc * self.m + x.rem_euclid(m) as usize)
    }

    /// Block containing `site`.
    pub fn block_of(&self, site: usize) -> usize {
        let bc: Vec<i64> = self.coords(site).iter().map(|&x| (x / self.r) as i64).collect();
        self.block_id(&bc)
    }

    /// Minimal corner site of block `b`.
    pub fn block_corner(&self, b: usize) -> usize {
        let c: Vec<i64> = self.block_coords(b).iter().map(|&x| (x * self.r) as i64).collect();
        self.site(&c)
    }

    pub fn block_sites(&self, b: usize) -> Vec<usize> {
        let corner: Vec<usize> = self.coords(self.block_corner(b));
        let mut out = Vec::with_capacity(self.block_volume());
        for k in 0..self.block_volume() {
            let mut off = k;
            let mut c = vec![0i64; self.d];
            for i in (0..self.d).rev() {
                c[i] = (corner[i] + off % self.r) as i64;
                off /= self.r;
            }
            out.push(self.site(&c));
        }
        out.sort_unstable();
        out
    }

    pub fn polymer_sites(&self, x: &Polymer) -> BTreeSet<usize> {
        x.iter().flat_map(|&b| self.block_sites(b)).collect()
    }

    /// Blocks at sup-distance exactly one (corners included), no repeats.
    pub fn block_neighbours(&self, b: usize) -> Vec<usize> {
        let bc = self.block_coords(b);
        let mut out = BTreeSet::new();
        for k in 0..3usize.pow(self.d as u32) {
            let mut off = k;
            let mut c = vec![0i64; self.d];
            for i in 0..self.d {
                c[i] = bc[i] as i64 + (off % 3) as i64 - 1;
                off /= 3;
            }
            let nb = self.block_id(&c);
            if nb != b {
                out.insert(nb);
            }
        }
        out.into_iter().collect()
    }

    pub fn is_connected(&self, x: &Polymer) -> bool {
        let Some(&start) = x.iter().next() else { return true };
        let mut seen = BTreeSet::from([start]);
        let mut stack = vec![start];
        while let Some(b) = stack.pop() {
            for nb in self.block_neighbours(b) {
                if x.contains(&nb) && seen.insert(nb) {
                    stack.push(nb);
                }
            }
        }
        seen.len() == x.len()
    }

    /// All connected polymers with at most `2^d` blocks.
    pub fn small_sets(&self) -> Vec<Polymer> {
        let cap = 1usize << self.d;
        let mut found: HashSet<Polymer> = HashSet::new();
        let mut frontier: Vec<Polymer> = (0..self.num_blocks()).map(|b| Polymer::from([b])).collect();
        found.extend(frontier.iter().cloned());
        for _ in 1..cap {
            let mut next = Vec::new();
            for x in &frontier {
                for &b in x {
                    for nb in self.block_neighbours(b) {
                        if !x.contains(&nb) {
                            let mut y = x.clone();
                            y.insert(nb);
                            if found.insert(y.clone()) {
                                next.push(y);
                            }
                        }
                    }
                }
            }
            frontier = next;
        }
        let mut v: Vec<Polymer> = found.into_iter().collect();
        v.sort();
        v
    }

    /// For each block `B`, the blocks of `B^box` (cached).
    pub fn block_neighbourhoods(&self) -> &[BTreeSet<usize>] {
        self.neighbourhoods.get_or_init(|| {
            let mut nb = vec![BTreeSet::new(); self.num_blocks()];
            for y in self.small_sets() {
                for &b in &y {
                    nb[b].extend(y.iter().copied());
                }
            }
            nb
        })
    }

    /// `X^box`: union of all small sets that meet `X`.
    pub fn small_set_neighbourhood(&self, x: &BTreeSet<usize>) -> BTreeSet<usize> {
        let blocks: BTreeSet<usize> = x.iter().map(|&s| self.block_of(s)).collect();
        let nb = self.block_neighbourhoods();
        let mut out = BTreeSet::new();
        for b in blocks {
            for &c in &nb[b] {
                out.extend(self.block_sites(c));
            }
        }
        out
    }

    /// Sites of `B^box` for the block `b` with integer coordinates
    /// relative to the corner of `b`, valid when `B^box` does not wrap.
    pub fn embed_neighbourhood(&self, b: usize) -> Result<Vec<(usize, Vec<i64>)>> {
        let reach = (1usize << self.d) - 1;
        if (2 * reach + 1) > self.m {
            return Err(Error::Precondition(format!(
                "block neighbourhood wraps the torus: need m >= {} for d = {}, got m = {}",
                2 * reach + 1,
                self.d,
                self.m
            )));
        }
        let corner: Vec<i64> = self.coords(self.block_corner(b)).iter().map(|&x| x as i64).collect();
        let n = self.period() as i64;
        let mut out = Vec::new();
        for &c in &self.block_neighbourhoods()[b] {
            for s in self.block_sites(c) {
                let rel: Vec<i64> = self
                    .coords(s)
                    .iter()
                    .zip(&corner)
                    .map(|(&x, &c0)| {
                        let mut v = x as i64 - c0;
                        if v > n / 2 {
                            v -= n;
                        }
                        if v < -n / 2 {
                            v += n;
                        }
                        v
                    })
                    .collect();
                out.push((s, rel));
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Cq;
    use num_traits::Zero;

    fn q(v: &[i64]) -> Vec<Cq> {
        v.iter().map(|&x| Cq::from_i64(x)).collect()
    }

    #[test]
    fn difference_of_alternating_sequence() {
        let t = Torus::new(1, 2, 2).unwrap();
        assert_eq!(t.forward_difference(&q(&[0, 1, 0, 1]), Dir::plus(0)), q(&[1, -1, 1, -1]));
    }

    #[test]
    fn constant_has_zero_difference() {
        let t = Torus::new(2, 2, 2).unwrap();
        let f = q(&vec![5; 16]);
        for e in Dir::all(2) {
            assert!(t.forward_difference(&f, e).iter().all(Zero::is_zero));
        }
    }

    #[test]
    fn minus_plus_is_negated_second_difference() {
        let t = Torus::new(1, 3, 2).unwrap();
        let f = q(&[3, 1, 4, 1, 5, 9]);
        let a = MultiIndex::zero(1).with(Dir::plus(0), 1).with(Dir::minus(0), 1);
        let g = t.apply_multiindex(&f, &a);
        for x in 0..6usize {
            let lap = f[(x + 1) % 6].clone() - f[x].clone() * Cq::from_i64(2) + f[(x + 5) % 6].clone();
            assert_eq!(g[x], -lap);
        }
    }

    #[test]
    fn linear_function_second_difference_vanishes_in_interior() {
        let t = Torus::new(1, 4, 2).unwrap();
        let f = q(&[0, 1, 2, 3, 4, 5, 6, 7]);
        let a = MultiIndex::zero(1).with(Dir::plus(0), 1).with(Dir::minus(0), 1);
        let g = t.apply_multiindex(&f, &a);
        assert!(g[1..7].iter().all(Zero::is_zero));
    }

    #[test]
    fn stencil_matches_apply() {
        let t = Torus::new(2, 2, 2).unwrap();
        let f: Vec<Cq> = (0..16).map(|i| Cq::from_i64(i * i - 3 * i)).collect();
        let a = MultiIndex::zero(2).with(Dir::plus(0), 2).with(Dir::minus(1), 1);
        let g = t.apply_multiindex(&f, &a);
        for x in 0..16 {
            let s = t.stencil(&a, x).iter().fold(Cq::zero(), |acc, &(y, c)| acc + f[y].clone() * Cq::from_i64(c));
            assert_eq!(s, g[x]);
        }
    }

    #[test]
    fn blocks_partition_sites() {
        let t = Torus::new(2, 2, 3).unwrap();
        let mut seen = vec![0; t.num_sites()];
        for b in 0..t.num_blocks() {
            for s in t.block_sites(b) {
                seen[s] += 1;
                assert_eq!(t.block_of(s), b);
            }
        }
        assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn one_dimensional_neighbourhood_is_three_blocks() {
        let t = Torus::new(1, 2, 4).unwrap();
        let x: BTreeSet<usize> = t.block_sites(1).into_iter().collect();
        let nb = t.small_set_neighbourhood(&x);
        let want: BTreeSet<usize> = (0..6).collect();
        assert_eq!(nb, want);
        assert!(t.small_set_neighbourhood(&BTreeSet::new()).is_empty());
    }

    fn brute_force_small_sets(t: &Torus) -> usize {
        let nb = t.num_blocks();
        (1u32..(1 << nb))
            .filter(|&mask| {
                let x: Polymer = (0..nb).filter(|&b| mask & (1 << b) != 0).collect();
                x.len() <= 1 << t.d && t.is_connected(&x)
            })
            .count()
    }

    #[test]
    fn small_set_census() {
        for (d, m) in [(1, 3), (1, 5), (2, 3), (2, 4)] {
            let t = Torus::new(d, 2, m).unwrap();
            assert_eq!(t.small_sets().len(), brute_force_small_sets(&t), "d={d} m={m}");
        }
    }

    #[test]
    fn embedding_guard() {
        let t = Torus::new(1, 2, 2).unwrap();
        assert!(t.embed_neighbourhood(0).is_err());
        let t = Torus::new(1, 2, 3).unwrap();
        let e = t.embed_neighbourhood(1).unwrap();
        let mut xs: Vec<i64> = e.iter().map(|(_, c)| c[0]).collect();
        xs.sort();
        assert_eq!(xs, vec![-2, -1, 0, 1, 2, 3]);
    }
}
