use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use super::lp::{LinearProgram, Outcome};
use super::phi::constraint_rows;
use super::weight::Weight;
use crate::algebra::C64;
use crate::error::{Error, Result};
use crate::lattice::Torus;

/// A localized field norm with its bracket `lower <= true <= value`. The two
/// agree for real fields; complex fields use inscribed `K`-gons.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalNorm {
    pub value: f64,
    pub lower: f64,
}

/// Value at a site: a constant plus complex multiples of free variables.
#[derive(Clone, Debug)]
struct Affine {
    constant: C64,
    terms: Vec<(usize, C64)>,
}

/// `min_t` such that every `|grad^alpha h_x| <= t w_alpha`, where `h` is
/// given per site by `site_value` in terms of `nfree` complex unknowns.
fn minimise_sup(
    torus: &Torus,
    weight: &Weight,
    species: u16,
    site_value: &[Affine],
    nfree: usize,
    real: bool,
    grid: usize,
) -> Result<LocalNorm> {
    let h = weight.scale(species)?;
    let rows = constraint_rows(torus, &[h], weight)?;
    let combine = |coefs: &[(usize, i64)]| -> Affine {
        let mut constant = C64::new(0.0, 0.0);
        let mut acc: BTreeMap<usize, C64> = BTreeMap::new();
        for &(site, c) in coefs {
            let a = &site_value[site];
            constant += a.constant * c as f64;
            for &(v, k) in &a.terms {
                *acc.entry(v).or_default() += k * c as f64;
            }
        }
        Affine { constant, terms: acc.into_iter().collect() }
    };
    if nfree == 0 {
        let value = rows.iter().map(|r| combine(&r.coefs).constant.norm() / r.rhs).fold(0.0, f64::max);
        return Ok(LocalNorm { value, lower: value });
    }
    if grid < 4 || grid % 2 != 0 {
        return Err(Error::Invalid("grid size must be even and at least 4".into()));
    }
    let mut lp = LinearProgram::minimize();
    for _ in 0..nfree {
        lp.var(0.0, f64::NEG_INFINITY, f64::INFINITY);
        if !real {
            lp.var(0.0, f64::NEG_INFINITY, f64::INFINITY);
        }
    }
    let t = lp.var(1.0, 0.0, f64::INFINITY);
    let stride = if real { 1 } else { 2 };
    let apothem = (PI / grid as f64).cos();
    for row in &rows {
        let a = combine(&row.coefs);
        if real {
            let mut terms: Vec<(usize, f64)> = a.terms.iter().map(|&(v, k)| (v, k.re)).collect();
            terms.push((t, -row.rhs));
            lp.le(&terms, -a.constant.re);
            let mut neg: Vec<(usize, f64)> = a.terms.iter().map(|&(v, k)| (v, -k.re)).collect();
            neg.push((t, -row.rhs));
            lp.le(&neg, a.constant.re);
        } else {
            for j in 0..grid {
                let (sin, cos) = (2.0 * PI * j as f64 / grid as f64).sin_cos();
                // Re(e^{-i theta} (k (x + i y))) for each free unknown.
                let mut terms: Vec<(usize, f64)> = Vec::new();
                for &(v, k) in &a.terms {
                    terms.push((stride * v, cos * k.re + sin * k.im));
                    terms.push((stride * v + 1, -cos * k.im + sin * k.re));
                }
                terms.push((t, -row.rhs * apothem));
                lp.le(&terms, -(cos * a.constant.re + sin * a.constant.im));
            }
        }
    }
    match lp.solve()? {
        Outcome::Unbounded => Err(Error::Lp("sup-norm minimisation is unbounded".into())),
        Outcome::Optimal(x) => {
            let value = x[t].max(0.0);
            Ok(if real { LocalNorm { value, lower: value } } else { LocalNorm { value, lower: value * apothem } })
        }
    }
}

fn check_field(torus: &Torus, f: &[C64]) -> Result<bool> {
    if f.len() != torus.num_sites() {
        return Err(Error::Invalid(format!("field has {} values for {} sites", f.len(), torus.num_sites())));
    }
    Ok(f.iter().all(|z| z.im == 0.0))
}

/// `||f||_{Phi(X)}`: the Phi norm of `f` minimised over modifications off
/// `X`, with the scale of `species` in `weight`.
pub fn local_field_norm(
    torus: &Torus,
    f: &[C64],
    x: &BTreeSet<usize>,
    weight: &Weight,
    species: u16,
    grid: usize,
) -> Result<LocalNorm> {
    let real = check_field(torus, f)?;
    let mut nfree = 0;
    let site_value: Vec<Affine> = (0..f.len())
        .map(|s| {
            if x.contains(&s) {
                Affine { constant: f[s], terms: Vec::new() }
            } else {
                nfree += 1;
                Affine { constant: C64::new(0.0, 0.0), terms: vec![(nfree - 1, C64::new(1.0, 0.0))] }
            }
        })
        .collect();
    minimise_sup(torus, weight, species, &site_value, nfree, real, grid)
}

/// Largest polynomial degree whose dimension `(d - 2)/2 + degree` is at most
/// `d_pi`.
pub fn max_polynomial_degree(d: usize, d_pi: u32) -> Option<u32> {
    let twice = 2 * d_pi as i64 + 2 - d as i64;
    (twice >= 0).then(|| (twice / 2) as u32)
}

/// Exponent vectors in `d` variables of total degree at most `deg`.
fn exponents(d: usize, deg: u32) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for _ in 0..d {
        let mut next = Vec::new();
        for e in &out {
            let used: u32 = e.iter().sum();
            for k in 0..=deg - used {
                let mut v = e.clone();
                v.push(k);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

/// `||f||_{Phi~(B^box)}`: the Phi norm of `f - P` minimised over lattice
/// polynomials `P` on `B^box` of dimension at most `d_pi`, with `f - P`
/// free off `B^box`.
pub fn quotient_field_norm(
    torus: &Torus,
    f: &[C64],
    block: usize,
    d_pi: u32,
    weight: &Weight,
    species: u16,
    grid: usize,
) -> Result<LocalNorm> {
    let real = check_field(torus, f)?;
    let embedded = torus.embed_neighbourhood(block)?;
    let monos = max_polynomial_degree(torus.d, d_pi).map_or_else(Vec::new, |deg| exponents(torus.d, deg));
    let mut site_value: Vec<Option<Affine>> = vec![None; f.len()];
    for (s, rel) in &embedded {
        let terms = monos
            .iter()
            .enumerate()
            .map(|(k, e)| {
                let m: f64 = e.iter().zip(rel).map(|(&p, &x)| (x as f64).powi(p as i32)).product();
                (k, C64::new(-m, 0.0))
            })
            .filter(|(_, c)| c.re != 0.0)
            .collect();
        site_value[*s] = Some(Affine { constant: f[*s], terms });
    }
    let mut nfree = monos.len();
    let site_value: Vec<Affine> = site_value
        .into_iter()
        .map(|v| {
            v.unwrap_or_else(|| {
                nfree += 1;
                Affine { constant: C64::new(0.0, 0.0), terms: vec![(nfree - 1, C64::new(1.0, 0.0))] }
            })
        })
        .collect();
    minimise_sup(torus, weight, species, &site_value, nfree, real, grid)
}
