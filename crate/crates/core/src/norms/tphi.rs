use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::lp::{LinearProgram, Outcome};
use super::phi::{by_pattern, constraint_rows, dense_size, phi_norm, tuple_index, tuple_sites, Row};
use super::test_function::{coefficient_table, pairing, TestFunction};
use super::weight::Weight;
use crate::algebra::{Field, FieldIndex, IndexSequence, Kind, Layout, NElement, Scalar, C64};
use crate::error::{Error, Result};
use crate::lattice::Torus;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormMode {
    /// Closed form, valid when `p_phi = 0`.
    Exact,
    /// Linear program over real test functions; exact when every pattern's
    /// coefficients share one phase.
    Lp,
    /// Linear program with the modulus constraints replaced by inscribed
    /// `K`-gons; returns a lower bound and the upper bound `lower / cos(pi/K)`.
    Grid,
}

impl std::str::FromStr for NormMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(NormMode::Exact),
            "lp" => Ok(NormMode::Lp),
            "grid" => Ok(NormMode::Grid),
            _ => Err(Error::Invalid(format!("unknown norm mode `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormParams {
    /// Cap on boson entries of a test-function argument.
    pub p_n: u32,
    pub weight: Weight,
    pub mode: NormMode,
    /// Polygon size `K` for grid mode (even, at least 4).
    pub grid: usize,
    /// Longest sequence paired; defaults to the number of fermion
    /// generators plus `p_n`, which excludes nothing.
    pub max_len: Option<usize>,
}

impl NormParams {
    pub fn new(p_n: u32, weight: Weight, mode: NormMode) -> Self {
        NormParams { p_n, weight, mode, grid: 32, max_len: None }
    }

    pub fn cap(&self, layout: &Layout) -> usize {
        self.max_len.unwrap_or_else(|| layout.indices(Kind::Fermion).len() + self.p_n as usize)
    }

    pub fn with_weight(&self, weight: Weight) -> Self {
        NormParams { weight, ..self.clone() }
    }
}

/// A semi-norm value with its rigor bracket (`value <= true <= upper`;
/// both agree outside grid mode).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormValue {
    pub value: f64,
    pub upper: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateEntry {
    pub z: Vec<FieldIndex>,
    pub re: f64,
    pub im: f64,
}

/// Optimising test function with the parameters that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub mode: NormMode,
    pub value: f64,
    pub upper: f64,
    pub p_n: u32,
    pub max_len: usize,
    pub weight: Weight,
    pub grid: usize,
    /// `(d, R, m)` of the torus used for derivative constraints.
    pub torus: Option<(usize, usize, usize)>,
    pub entries: Vec<CertificateEntry>,
}

impl Certificate {
    pub fn test_function(&self) -> TestFunction<C64> {
        let mut g = TestFunction::zero();
        for e in &self.entries {
            g.set(IndexSequence::new(e.z.clone()), C64::new(e.re, e.im));
        }
        g
    }
}

/// `||F||_{T_phi}`.
pub fn tphi_seminorm<S: Scalar>(
    f: &NElement<S>,
    phi: &Field<S>,
    params: &NormParams,
    torus: Option<&Torus>,
) -> Result<NormValue> {
    if params.mode == NormMode::Exact {
        let v = exact_value(f, phi, params)?;
        return Ok(NormValue { value: v, upper: v });
    }
    Ok(tphi_certified(f, phi, params, torus)?.0)
}

/// `sum_z |F_z(phi)| w_z / z!`, summed per monomial: the orderings of one
/// Taylor coefficient `q` contribute `|q| prod h` in total.
fn exact_value<S: Scalar>(f: &NElement<S>, phi: &Field<S>, params: &NormParams) -> Result<f64> {
    if params.weight.p_phi != 0 {
        return Err(Error::Precondition("the closed form needs p_phi = 0".into()));
    }
    let cap = params.cap(&f.layout);
    let centred = f.recentre(phi);
    let mut total = 0.0;
    for (y, p) in &centred.terms {
        let hy = y.iter().try_fold(1.0, |acc, u| Ok::<_, Error>(acc * params.weight.scale(u.species)?))?;
        for (m, c) in &p.terms {
            if m.degree() > params.p_n || m.degree() as usize + y.len() > cap {
                continue;
            }
            let mut w = hy;
            for (u, k) in &m.0 {
                w *= params.weight.scale(u.species)?.powi(*k as i32);
            }
            total += c.norm_f64() * w;
        }
    }
    Ok(total)
}

/// `||F||_{T_phi}` together with a maximising test function.
pub fn tphi_certified<S: Scalar>(
    f: &NElement<S>,
    phi: &Field<S>,
    params: &NormParams,
    torus: Option<&Torus>,
) -> Result<(NormValue, Certificate)> {
    let fc = f.map_scalars(Scalar::to_c64);
    let pc = phi.to_c64();
    let cap = params.cap(&f.layout);
    let table = coefficient_table(&fc, &pc, params.p_n, cap);
    let w = &params.weight;
    if params.mode == NormMode::Grid && (params.grid < 4 || params.grid % 2 != 0) {
        return Err(Error::Invalid("grid size must be even and at least 4".into()));
    }
    if params.mode == NormMode::Exact && w.p_phi != 0 {
        return Err(Error::Precondition("exact mode needs p_phi = 0".into()));
    }
    let torus = match (w.p_phi, torus) {
        (0, _) => None,
        (_, Some(t)) => Some(t),
        (_, None) => return Err(Error::Invalid("derivative weights need a torus".into())),
    };
    let mut g = TestFunction::zero();
    // Total width of the grid-mode brackets.
    let mut gap = 0.0;
    let mut unbounded = false;
    for (pat, entries) in by_pattern(&table) {
        let zfact = entries[0].0.factorial() as f64;
        let scales: Vec<f64> = pat.iter().map(|&(s, _)| w.scale(s)).collect::<Result<_>>()?;
        let w0: f64 = scales.iter().product();
        if params.mode == NormMode::Exact || pat.is_empty() {
            // Entries decouple: g_z = w_z conj(F_z)/|F_z|.
            for (z, c) in &entries {
                g.set(z.clone(), c.conj() / c.norm() * w0);
            }
            continue;
        }
        // Variables are dense site tuples on the torus, or just the support
        // when there are no derivative constraints.
        let (rows, nvars, index): (Vec<Row>, usize, Vec<usize>) = match torus {
            Some(t) => {
                let n = t.num_sites();
                let index = entries.iter().map(|(z, _)| tuple_index(z, n)).collect::<Result<_>>()?;
                (constraint_rows(t, &scales, w)?, dense_size(n, pat.len())?, index)
            }
            None => {
                let rows = (0..entries.len()).map(|i| Row { coefs: vec![(i, 1)], rhs: w0 }).collect();
                (rows, entries.len(), (0..entries.len()).collect())
            }
        };
        let (lo, hi, sol) = match align_phase(&entries) {
            Some(phase) => {
                let obj: Vec<(usize, f64)> =
                    entries.iter().zip(&index).map(|((_, c), &i)| (i, (c * phase.conj()).re / zfact)).collect();
                let (v, x) = solve_real(&rows, nvars, &obj, w0)?;
                (v, v, x.into_iter().map(|(i, a)| (i, phase.conj() * a)).collect::<Vec<_>>())
            }
            None if params.mode == NormMode::Grid => {
                let obj: Vec<(usize, C64)> = entries.iter().zip(&index).map(|((_, c), &i)| (i, c / zfact)).collect();
                let (v, x) = solve_polygon(&rows, nvars, &obj, w0, params.grid)?;
                (v, v / (PI / params.grid as f64).cos(), x)
            }
            None => {
                return Err(Error::Precondition(
                    "coefficients of one pattern are not real up to a common phase; use grid mode".into(),
                ))
            }
        };
        unbounded |= lo.is_infinite();
        gap += hi - lo;
        for (idx, v) in sol {
            let z = match torus {
                Some(t) => {
                    let sites = tuple_sites(idx, t.num_sites(), pat.len());
                    IndexSequence::new(pat.iter().zip(sites).map(|(&(s, c), x)| FieldIndex::new(s, c, x)).collect())
                }
                None => entries[idx].0.clone(),
            };
            g.set(z, v);
        }
    }
    // The reported value is the pairing of the certificate itself.
    let paired: f64 = g
        .values
        .iter()
        .map(|(z, v)| (table.get(z).copied().unwrap_or_default() * v).re / z.factorial() as f64)
        .sum();
    let value = if unbounded { f64::INFINITY } else { paired };
    let upper = value + gap;
    let cert = Certificate {
        mode: params.mode,
        value,
        upper,
        p_n: params.p_n,
        max_len: cap,
        weight: w.clone(),
        grid: params.grid,
        torus: torus.map(|t| (t.d, t.r, t.m)),
        entries: g
            .values
            .iter()
            .filter(|(_, v)| v.norm() > 0.0)
            .map(|(z, v)| CertificateEntry { z: z.entries.clone(), re: v.re, im: v.im })
            .collect(),
    };
    Ok((NormValue { value, upper }, cert))
}

/// A unit phase `u` with every coefficient real after multiplying by
/// `conj(u)`, if one exists.
fn align_phase(entries: &[(IndexSequence, C64)]) -> Option<C64> {
    let (_, big) = entries.iter().max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))?;
    let scale = big.norm();
    if scale == 0.0 {
        return Some(C64::new(1.0, 0.0));
    }
    let u = big / scale;
    entries.iter().all(|(_, c)| (c * u.conj()).im.abs() <= 1e-13 * scale).then_some(u)
}

/// `max sum_j c_j g_j` over real `g` with `|row . g| <= rhs`.
fn solve_real(
    rows: &[Row],
    nvars: usize,
    objective: &[(usize, f64)],
    w0: f64,
) -> Result<(f64, Vec<(usize, f64)>)> {
    let mut obj = vec![0.0; nvars];
    for &(i, c) in objective {
        obj[i] += c;
    }
    let mut bound = vec![w0; nvars];
    let mut lp = LinearProgram::maximize();
    for row in rows {
        if row.coefs.len() == 1 {
            let (i, c) = row.coefs[0];
            bound[i] = bound[i].min(row.rhs / c.abs() as f64);
        }
    }
    for i in 0..nvars {
        lp.var(obj[i], -bound[i], bound[i]);
    }
    for row in rows.iter().filter(|r| r.coefs.len() > 1) {
        let terms: Vec<(usize, f64)> = row.coefs.iter().map(|&(i, c)| (i, c as f64)).collect();
        lp.le(&terms, row.rhs);
        lp.ge(&terms, -row.rhs);
    }
    match lp.solve()? {
        Outcome::Unbounded => Ok((f64::INFINITY, Vec::new())),
        Outcome::Optimal(x) => {
            let v = objective.iter().map(|&(i, c)| c * x[i]).sum();
            Ok((v, x.into_iter().enumerate().filter(|(_, a)| *a != 0.0).collect()))
        }
    }
}

/// `max Re sum_j c_j g_j` over complex `g` with every `row . g` inside the
/// `K`-gon inscribed in the disc of radius `rhs`.
fn solve_polygon(
    rows: &[Row],
    nvars: usize,
    objective: &[(usize, C64)],
    w0: f64,
    k: usize,
) -> Result<(f64, Vec<(usize, C64)>)> {
    let mut obj = vec![C64::new(0.0, 0.0); nvars];
    for &(i, c) in objective {
        obj[i] += c;
    }
    let mut lp = LinearProgram::maximize();
    for c in &obj {
        lp.var(c.re, -w0, w0);
        lp.var(-c.im, -w0, w0);
    }
    let apothem = (PI / k as f64).cos();
    let dirs: Vec<(f64, f64)> = (0..k).map(|j| (2.0 * PI * j as f64 / k as f64).sin_cos()).collect();
    for row in rows {
        for &(sin, cos) in &dirs {
            let terms: Vec<(usize, f64)> = row
                .coefs
                .iter()
                .flat_map(|&(i, c)| [(2 * i, cos * c as f64), (2 * i + 1, sin * c as f64)])
                .collect();
            lp.le(&terms, row.rhs * apothem);
        }
    }
    match lp.solve()? {
        Outcome::Unbounded => Ok((f64::INFINITY, Vec::new())),
        Outcome::Optimal(x) => {
            let g: Vec<(usize, C64)> = (0..nvars)
                .map(|i| (i, C64::new(x[2 * i], x[2 * i + 1])))
                .filter(|(_, v)| v.norm() != 0.0)
                .collect();
            let v = objective.iter().map(|&(i, c)| (c * C64::new(x[2 * i], x[2 * i + 1])).re).sum();
            Ok((v, g))
        }
    }
}

/// Outcome of re-pairing a stored certificate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CertificateCheck {
    pub pairing: f64,
    pub relative_error: f64,
    /// `||g||_Phi`, which must not exceed one.
    pub phi_norm: f64,
}

impl CertificateCheck {
    pub fn holds(&self) -> bool {
        self.relative_error <= 1e-12 && self.phi_norm <= 1.0 + 1e-9
    }
}

pub fn verify_certificate<S: Scalar>(f: &NElement<S>, phi: &Field<S>, cert: &Certificate) -> Result<CertificateCheck> {
    let g = cert.test_function();
    let torus = cert.torus.map(|(d, r, m)| Torus::new(d, r, m)).transpose()?;
    let norm = phi_norm(&g, &cert.weight, torus.as_ref())?.value;
    let p = pairing(&f.map_scalars(Scalar::to_c64), &g, &phi.to_c64()).re;
    let relative_error = (p - cert.value).abs() / cert.value.abs().max(f64::MIN_POSITIVE);
    Ok(CertificateCheck { pairing: p, relative_error: if p == cert.value { 0.0 } else { relative_error }, phi_norm: norm })
}
