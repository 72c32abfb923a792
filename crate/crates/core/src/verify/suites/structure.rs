//! Lattice geometry and the algebra of elements.

use std::collections::BTreeSet;

use num_traits::Zero;

use crate::algebra::star::star_coefficient;
use crate::algebra::{Cq, FieldIndex, IndexSequence, Kind, NElement, Scalar};
use crate::error::Result;
use crate::lattice::{Dir, MultiIndex, Polymer, Torus};
use crate::verify::instance::{Gen, InstanceSpec, Shape};
use crate::verify::report::Trial;

/// Tori cycled through by the lattice suites, after the configured one.
const TORI: &[(usize, usize, usize)] = &[(1, 2, 3), (1, 3, 4), (2, 2, 2), (2, 3, 1), (2, 2, 3), (3, 2, 1)];

fn torus_for(spec: &InstanceSpec, trial: usize) -> Result<Torus> {
    if trial % (TORI.len() + 1) == 0 {
        return spec.torus();
    }
    let (d, r, m) = TORI[trial % (TORI.len() + 1) - 1];
    Torus::new(d, r, m)
}

pub fn periodicity(spec: &InstanceSpec, gen: &mut Gen, trial: usize) -> Result<Trial> {
    let torus = torus_for(spec, trial)?;
    let n = torus.num_sites();
    let f: Vec<Cq> = gen.field_values(n, false);
    let alphas = MultiIndex::up_to(torus.d, 3);
    let alpha = gen.pick(&alphas);
    let e = gen.pick(&Dir::all(torus.d));
    let translate = |g: &[Cq]| -> Vec<Cq> { (0..n).map(|x| g[torus.shift(x, e)].clone()).collect() };
    let lhs = torus.apply_multiindex(&translate(&f), &alpha);
    let rhs = translate(&torus.apply_multiindex(&f, &alpha));
    let grad = torus.apply_multiindex(&f, &alpha);
    let x = gen.below(n);
    let via_stencil = torus
        .stencil(&alpha, x)
        .into_iter()
        .fold(Cq::zero(), |acc, (s, c)| acc + f[s].clone() * Cq::from_i64(c));
    Ok(Trial::all([
        Trial::exact(lhs == rhs, || format!("translation by {e:?} does not commute with {alpha:?}")),
        Trial::exact(via_stencil == grad[x], || format!("stencil of {alpha:?} at {x} disagrees")),
    ]))
}

pub fn block_paving(spec: &InstanceSpec, _gen: &mut Gen, trial: usize) -> Result<Trial> {
    let torus = torus_for(spec, trial)?;
    let mut seen = vec![false; torus.num_sites()];
    let mut parts = Vec::new();
    for b in 0..torus.num_blocks() {
        let sites = torus.block_sites(b);
        parts.push(Trial::exact(sites.len() == torus.block_volume(), || format!("block {b} has {} sites", sites.len())));
        for s in sites {
            parts.push(Trial::exact(!seen[s], || format!("site {s} in two blocks")));
            seen[s] = true;
            parts.push(Trial::exact(torus.block_of(s) == b, || format!("block_of({s}) != {b}")));
        }
        parts.push(Trial::exact(torus.block_of(torus.block_corner(b)) == b, || format!("corner of {b}")));
    }
    parts.push(Trial::exact(seen.iter().all(|&s| s), || "blocks do not cover the torus".into()));
    Ok(Trial::all(parts))
}

/// Blocks adjacent in sup-distance one, from block coordinates directly.
fn adjacent(torus: &Torus, a: usize, b: usize) -> bool {
    let m = torus.m;
    let (ca, cb) = (torus.block_coords(a), torus.block_coords(b));
    a != b && ca.iter().zip(&cb).all(|(&x, &y)| {
        let diff = (x + m - y) % m;
        diff == 0 || diff == 1 || diff == m - 1
    })
}

pub fn small_set_census(spec: &InstanceSpec, _gen: &mut Gen, trial: usize) -> Result<Trial> {
    let torus = torus_for(spec, trial)?;
    let nb = torus.num_blocks();
    if nb > 16 {
        return Ok(Trial::identity(true).with_note("skipped: too many blocks for enumeration"));
    }
    let cap = 1usize << torus.d;
    let mut brute: Vec<Polymer> = Vec::new();
    for mask in 1u32..(1 << nb) {
        let x: Polymer = (0..nb).filter(|b| mask & (1 << b) != 0).collect();
        if x.len() > cap {
            continue;
        }
        // connectivity by flood fill over the adjacency above
        let start = *x.iter().next().expect("nonempty");
        let mut reached = BTreeSet::from([start]);
        let mut stack = vec![start];
        while let Some(a) = stack.pop() {
            for &b in &x {
                if adjacent(&torus, a, b) && reached.insert(b) {
                    stack.push(b);
                }
            }
        }
        if reached.len() == x.len() {
            brute.push(x);
        }
    }
    brute.sort();
    let found = torus.small_sets();
    Ok(Trial::exact(found == brute, || format!("{} small sets, brute force finds {}", found.len(), brute.len())))
}

fn shape(spec: &InstanceSpec) -> Shape {
    Shape::new(spec.max_terms, spec.max_degree)
}

pub fn associativity(spec: &InstanceSpec, gen: &mut Gen, _trial: usize) -> Result<Trial> {
    let layout = spec.layout();
    let [a, b, c]: [NElement<Cq>; 3] = std::array::from_fn(|_| gen.element(&layout, shape(spec)));
    let assoc = a.mul(&b).mul(&c) == a.mul(&b.mul(&c));
    let left = a.mul(&b.add(&c)) == a.mul(&b).add(&a.mul(&c));
    let right = a.add(&b).mul(&c) == a.mul(&c).add(&b.mul(&c));
    Ok(Trial::all([
        Trial::exact(assoc, || "(ab)c != a(bc)".into()),
        Trial::exact(left && right, || "distributivity fails".into()),
    ]))
}

pub fn star_product(spec: &InstanceSpec, gen: &mut Gen, _trial: usize) -> Result<Trial> {
    let layout = spec.layout();
    let a: NElement<Cq> = gen.element(&layout, shape(spec));
    let b: NElement<Cq> = gen.element(&layout, shape(spec));
    let phi = gen.field(&layout, false);
    let product = a.mul(&b);
    let pool = layout.all_indices();
    let mut parts = Vec::new();
    for _ in 0..8 {
        let len = gen.below(2 * spec.max_degree as usize + 1);
        let z = gen.sequence(&pool, len);
        let lhs = star_coefficient(&a, &b, &z, &phi);
        let rhs = product.coefficient(&z, &phi);
        parts.push(Trial::exact(lhs == rhs, || format!("coefficient at {z:?}")));
    }
    Ok(Trial::all(parts))
}

pub fn coefficient_symmetry(spec: &InstanceSpec, gen: &mut Gen, _trial: usize) -> Result<Trial> {
    let layout = spec.layout();
    let f: NElement<Cq> = gen.element(&layout, shape(spec));
    let phi = gen.field(&layout, false);
    let pool = layout.all_indices();
    let mut parts = Vec::new();
    for s in 0..layout.species.len() as u16 {
        let own: Vec<FieldIndex> = pool.iter().copied().filter(|u| u.species == s).collect();
        // two entries of species s plus a random tail, species-ordered
        let extra = gen.below(3);
        let mut entries = vec![gen.pick(&own), gen.pick(&own)];
        entries.extend(gen.sequence(&pool, extra).entries);
        entries.sort_by_key(|u| u.species);
        let first = entries.iter().position(|u| u.species == s).expect("species present");
        let mut swapped = entries.clone();
        swapped.swap(first, first + 1);
        let (z, w) = (IndexSequence::new(entries), IndexSequence::new(swapped));
        let (cz, cw) = (f.coefficient(&z, &phi), f.coefficient(&w, &phi));
        let want = if layout.kind(s) == Kind::Fermion { -cz.clone() } else { cz.clone() };
        parts.push(Trial::exact(cw == want, || format!("transposition in {z:?}")));
    }
    Ok(Trial::all(parts))
}

pub fn derivatives_commute(spec: &InstanceSpec, gen: &mut Gen, _trial: usize) -> Result<Trial> {
    let layout = spec.layout();
    let f: NElement<Cq> = gen.element(&layout, shape(spec));
    let bosons = layout.indices(Kind::Boson);
    let fermions = layout.indices(Kind::Fermion);
    let (x1, x2) = (gen.pick(&bosons), gen.pick(&bosons));
    let (y1, y2) = (gen.pick(&fermions), gen.pick(&fermions));
    let bb = f.boson_derivative(&[x1, x2]) == f.boson_derivative(&[x2, x1]);
    let ff = f.fermion_derivative(y1).fermion_derivative(y2) == f.fermion_derivative(y2).fermion_derivative(y1).neg();
    let bf = f.boson_derivative(&[x1]).fermion_derivative(y1) == f.fermion_derivative(y1).boson_derivative(&[x1]);
    let nil = f.fermion_derivative(y1).fermion_derivative(y1).is_zero();
    Ok(Trial::all([
        Trial::exact(bb, || "boson derivatives do not commute".into()),
        Trial::exact(ff, || "fermion derivatives do not anticommute".into()),
        Trial::exact(bf, || "mixed derivatives do not commute".into()),
        Trial::exact(nil, || "fermion derivative does not square to zero".into()),
    ]))
}
