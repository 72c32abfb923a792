//! Line-oriented text format for elements and field assignments.
//!
//! ```text
//! species phi boson pair 2
//! species psi fermion pair 2
//! term 1 0 : psi@0 psi*@0 :
//! term -1/2 0 : : phi@0^2 phi*@1
//! ```
//!
//! A `term` line is `term <re> <im> : <fermions> : <bosons>`; fermion
//! generators may appear in any order and the reordering sign is applied.
//! Output is canonical: terms sorted by fermion monomial, then boson
//! monomial.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::sync::Arc;

use super::element::NElement;
use super::index::{Field, FieldIndex, IndexSequence, Kind, Layout, Species};
use super::poly::{BMono, Poly};
use super::scalar::Scalar;
use crate::error::{Error, Result};

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

pub fn write_layout(layout: &Layout, out: &mut String) {
    for s in &layout.species {
        let kind = match s.kind {
            Kind::Boson => "boson",
            Kind::Fermion => "fermion",
        };
        let pair = if s.pair { "pair" } else { "real" };
        let _ = writeln!(out, "species {} {} {} {}", s.name, kind, pair, s.sites);
    }
}

fn parse_species(line: usize, toks: &[&str]) -> Result<Species> {
    if toks.len() != 5 {
        return Err(perr(line, "expected `species <name> <boson|fermion> <pair|real> <sites>`"));
    }
    let kind = match toks[2] {
        "boson" => Kind::Boson,
        "fermion" => Kind::Fermion,
        k => return Err(perr(line, format!("unknown kind `{k}`"))),
    };
    let pair = match toks[3] {
        "pair" => true,
        "real" => false,
        p => return Err(perr(line, format!("expected pair|real, got `{p}`"))),
    };
    let sites = toks[4].parse().map_err(|_| perr(line, format!("bad site count `{}`", toks[4])))?;
    Ok(Species { name: toks[1].to_string(), kind, pair, sites })
}

pub fn to_text<S: Scalar>(f: &NElement<S>) -> String {
    let mut out = String::new();
    write_layout(&f.layout, &mut out);
    if let Some(c) = f.trunc {
        let _ = writeln!(out, "trunc {c}");
    }
    for (y, p) in &f.terms {
        for (m, c) in &p.terms {
            let (re, im) = c.to_text();
            let fs: Vec<String> = y.iter().map(|&u| f.layout.display(u)).collect();
            let bs: Vec<String> = m
                .0
                .iter()
                .map(|&(u, e)| {
                    if e == 1 {
                        f.layout.display(u)
                    } else {
                        format!("{}^{}", f.layout.display(u), e)
                    }
                })
                .collect();
            let _ = writeln!(out, "term {re} {im} : {} : {}", fs.join(" "), bs.join(" "));
        }
    }
    out
}

pub fn from_text<S: Scalar>(text: &str) -> Result<NElement<S>> {
    let mut species = Vec::new();
    let mut layout: Option<Arc<Layout>> = None;
    let mut elem: Option<NElement<S>> = None;
    let mut trunc = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let head = body.split_whitespace().next().unwrap_or("");
        match head {
            "species" => {
                if layout.is_some() {
                    return Err(perr(line, "species declared after the first term"));
                }
                let toks: Vec<&str> = body.split_whitespace().collect();
                species.push(parse_species(line, &toks)?);
            }
            "trunc" => {
                let v = body[5..].trim();
                trunc = Some(v.parse().map_err(|_| perr(line, format!("bad truncation `{v}`")))?);
            }
            "term" => {
                if layout.is_none() {
                    let l = Layout::new(species.clone()).map_err(|e| perr(line, e.to_string()))?;
                    let l = Arc::new(l);
                    elem = Some(NElement::zero(&l));
                    layout = Some(l);
                }
                let l = layout.as_ref().unwrap();
                let parts: Vec<&str> = body[4..].split(':').collect();
                if parts.len() != 3 {
                    return Err(perr(line, "expected `term <re> <im> : <fermions> : <bosons>`"));
                }
                let coef: Vec<&str> = parts[0].split_whitespace().collect();
                if coef.len() != 2 {
                    return Err(perr(line, "coefficient needs a real and an imaginary part"));
                }
                let c = S::parse_text(coef[0], coef[1])
                    .ok_or_else(|| perr(line, format!("bad coefficient `{} {}`", coef[0], coef[1])))?;
                let mut ys = Vec::new();
                for tok in parts[1].split_whitespace() {
                    let u = l.parse_index(tok).map_err(|e| perr(line, e.to_string()))?;
                    if l.kind(u.species) != Kind::Fermion {
                        return Err(perr(line, format!("`{tok}` is not a fermion")));
                    }
                    ys.push(u);
                }
                let mut powers = Vec::new();
                for tok in parts[2].split_whitespace() {
                    let (name, e) = match tok.split_once('^') {
                        Some((n, e)) => (n, e.parse::<u32>().map_err(|_| perr(line, format!("bad exponent in `{tok}`")))?),
                        None => (tok, 1),
                    };
                    let u = l.parse_index(name).map_err(|e| perr(line, e.to_string()))?;
                    if l.kind(u.species) != Kind::Boson {
                        return Err(perr(line, format!("`{tok}` is not a boson")));
                    }
                    powers.push((u, e));
                }
                let t = NElement::monomial(l, c, BMono::from_powers(powers), &ys);
                let e = elem.take().unwrap();
                elem = Some(e.add(&t));
            }
            other => return Err(perr(line, format!("unknown record `{other}`"))),
        }
    }
    let mut e = match elem {
        Some(e) => e,
        None => {
            let l = Layout::new(species).map_err(|e| perr(0, e.to_string()))?;
            NElement::zero(&Arc::new(l))
        }
    };
    e.trunc = trunc;
    Ok(e)
}

/// Field file: `value <index> <re> <im>` lines. For pair species a missing
/// barred coordinate defaults to the conjugate of the unbarred one.
pub fn field_from_text<S: Scalar>(layout: &Layout, text: &str) -> Result<Field<S>> {
    let mut f = Field::zero();
    let mut given = BTreeSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let toks: Vec<&str> = body.split_whitespace().collect();
        if toks[0] != "value" || toks.len() != 4 {
            return Err(perr(line, "expected `value <index> <re> <im>`"));
        }
        let u = layout.parse_index(toks[1]).map_err(|e| perr(line, e.to_string()))?;
        if layout.kind(u.species) != Kind::Boson {
            return Err(perr(line, format!("`{}` is not a boson index", toks[1])));
        }
        let v = S::parse_text(toks[2], toks[3]).ok_or_else(|| perr(line, "bad value"))?;
        f.set(u, v);
        given.insert(u);
    }
    for &u in &given {
        if !u.conj && layout.species[u.species as usize].pair && !given.contains(&u.bar()) {
            let v = f.get(u).conj();
            f.set(u.bar(), v);
        }
    }
    Ok(f)
}

pub fn field_to_text<S: Scalar>(layout: &Layout, f: &Field<S>) -> String {
    let mut out = String::new();
    for (u, v) in &f.values {
        let (re, im) = v.to_text();
        let _ = writeln!(out, "value {} {re} {im}", layout.display(*u));
    }
    out
}

/// Polynomial helper used by fixtures: `c * prod u_i`.
pub fn product_poly<S: Scalar>(c: S, us: &[FieldIndex]) -> Poly<S> {
    Poly::monomial(BMono::from_powers(us.iter().map(|&u| (u, 1)).collect()), c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::scalar::Cq;

    #[test]
    fn round_trip_is_identity() {
        let text = "species phi boson pair 2\nspecies psi fermion pair 2\n\
                    term 1 0 : psi*@0 psi@0 :\nterm -1/2 3 : : phi@0^2 phi*@1\n";
        let e: NElement<Cq> = from_text(text).unwrap();
        let back: NElement<Cq> = from_text(&to_text(&e)).unwrap();
        assert_eq!(e, back);
        // reordering sign applied: psi*@0 psi@0 = - psi@0 psi*@0
        assert!(to_text(&e).contains("term -1 0 : psi@0 psi*@0 :"));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = "species phi boson pair 2\n\nterm 1 0 : : phi@7\n";
        match from_text::<Cq>(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn field_defaults_to_conjugate() {
        let l = Layout::supersymmetric(2);
        let f: Field<Cq> = field_from_text(&l, "value phi@1 1 2\n").unwrap();
        assert_eq!(f.get(FieldIndex::new(0, true, 1)), Cq::parse_text("1", "-2").unwrap());
    }
}

/// Test-function file: `entry <re> <im> : <indices>` lines, the empty
/// sequence written with nothing after the colon.
pub fn test_function_to_text<S: Scalar>(layout: &Layout, values: &BTreeMap<IndexSequence, S>) -> String {
    let mut out = String::new();
    for (z, v) in values {
        let (re, im) = v.to_text();
        let idx: Vec<String> = z.entries.iter().map(|&u| layout.display(u)).collect();
        let _ = writeln!(out, "entry {re} {im} : {}", idx.join(" "));
    }
    out
}

pub fn test_function_from_text<S: Scalar>(layout: &Layout, text: &str) -> Result<BTreeMap<IndexSequence, S>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (head, tail) = body.split_once(':').ok_or_else(|| perr(line, "expected `entry <re> <im> : <indices>`"))?;
        let toks: Vec<&str> = head.split_whitespace().collect();
        if toks.len() != 3 || toks[0] != "entry" {
            return Err(perr(line, "expected `entry <re> <im> : <indices>`"));
        }
        let v = S::parse_text(toks[1], toks[2]).ok_or_else(|| perr(line, "bad value"))?;
        let z = tail
            .split_whitespace()
            .map(|t| layout.parse_index(t).map_err(|e| perr(line, e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        let z = IndexSequence::new(z);
        if out.contains_key(&z) {
            return Err(perr(line, "sequence given twice"));
        }
        if !v.is_zero() {
            out.insert(z, v);
        }
    }
    Ok(out)
}
