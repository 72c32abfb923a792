use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::probes::Probe;
use crate::algebra::{Field, Kind, NElement, C64};
use crate::error::{Error, Result};
use crate::lattice::{Polymer, Torus};
use crate::norms::{local_field_norm, quotient_field_norm, tphi_seminorm, NormParams, Weight};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegulatorParams {
    /// Fluctuation scale `ell`.
    pub ell: f64,
    /// Large-field scale `h`.
    pub h: f64,
    /// Polynomial dimension cap for the quotient norm.
    pub d_pi: u32,
    /// Target growth constant `alpha_G > 1`.
    pub alpha_g: f64,
    /// Power `t >= 0` in `E G^t`.
    pub t: f64,
    /// Derivative cap of the field norms.
    pub p_phi: u32,
    /// Polygon size for complex localized norms.
    pub grid: usize,
}

impl RegulatorParams {
    pub fn new(ell: f64, h: f64, d_pi: u32, alpha_g: f64, t: f64) -> Result<Self> {
        if !(ell > 0.0 && h > 0.0 && ell.is_finite() && h.is_finite()) {
            return Err(Error::Invalid("regulator scales must be positive".into()));
        }
        if !(alpha_g > 1.0) {
            return Err(Error::Invalid("alpha_G must exceed 1".into()));
        }
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::Invalid("regulator power must be nonnegative".into()));
        }
        Ok(RegulatorParams { ell, h, d_pi, alpha_g, t, p_phi: 0, grid: 32 })
    }

    pub fn with_p_phi(mut self, p_phi: u32) -> Self {
        self.p_phi = p_phi;
        self
    }

    /// Field weight at scale `ell` on `torus`.
    pub fn field_weight(&self, torus: &Torus) -> Result<Weight> {
        Weight::uniform(self.ell, 1, self.p_phi, torus.r as f64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegulatorKind {
    /// `G`, built from localized `Phi(B^box)` norms.
    Fluctuation,
    /// `G~`, built from polynomial-quotient norms with a factor one half.
    LargeField,
}

fn check_field(torus: &Torus, phi: &[C64]) -> Result<()> {
    if phi.len() != torus.num_sites() {
        return Err(Error::Invalid(format!("field has {} values for {} sites", phi.len(), torus.num_sites())));
    }
    Ok(())
}

/// `log G(X, phi)` or `log G~(X, phi)` for a site set `x`.
pub fn log_regulator(
    kind: RegulatorKind,
    torus: &Torus,
    x: &BTreeSet<usize>,
    phi: &[C64],
    params: &RegulatorParams,
) -> Result<f64> {
    check_field(torus, phi)?;
    if let Some(&s) = x.iter().find(|&&s| s >= torus.num_sites()) {
        return Err(Error::Invalid(format!("site {s} is off the torus")));
    }
    let w = params.field_weight(torus)?;
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for &s in x {
        *counts.entry(torus.block_of(s)).or_default() += 1;
    }
    let vol = torus.block_volume() as f64;
    let mut total = 0.0;
    for (b, count) in counts {
        let (norm, factor) = match kind {
            RegulatorKind::Fluctuation => {
                let block: BTreeSet<usize> = torus.block_sites(b).into_iter().collect();
                let nb = torus.small_set_neighbourhood(&block);
                (local_field_norm(torus, phi, &nb, &w, 0, params.grid)?.value, 1.0)
            }
            RegulatorKind::LargeField => {
                (quotient_field_norm(torus, phi, b, params.d_pi, &w, 0, params.grid)?.value, 0.5)
            }
        };
        total += factor * count as f64 / vol * norm * norm;
    }
    Ok(total)
}

/// `G(X, phi) = prod_{x in X} exp(|B_x|^-1 ||phi||^2_{Phi(B_x^box, ell)})`.
pub fn fluctuation_regulator(torus: &Torus, x: &BTreeSet<usize>, phi: &[C64], params: &RegulatorParams) -> Result<f64> {
    Ok(log_regulator(RegulatorKind::Fluctuation, torus, x, phi, params)?.exp())
}

/// `G~(X, phi) = prod_{x in X} exp(|B_x|^-1 ||phi||^2_{Phi~(B_x^box, ell)} / 2)`.
pub fn large_field_regulator(torus: &Torus, x: &BTreeSet<usize>, phi: &[C64], params: &RegulatorParams) -> Result<f64> {
    Ok(log_regulator(RegulatorKind::LargeField, torus, x, phi, params)?.exp())
}

/// Sites carrying a field index that occurs in `f`.
pub fn element_sites<S>(f: &NElement<S>) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    for (y, p) in &f.terms {
        out.extend(y.iter().map(|u| u.site as usize));
        for m in p.terms.keys() {
            out.extend(m.indices().map(|u| u.site as usize));
        }
    }
    out
}

/// The single boson species that probe fields are assigned to.
pub(crate) fn boson_species<S>(f: &NElement<S>) -> Result<u16> {
    let bosons: Vec<u16> = (0..f.layout.species.len() as u16).filter(|&s| f.layout.kind(s) == Kind::Boson).collect();
    match bosons.as_slice() {
        [s] if f.layout.species[*s as usize].pair => Ok(*s),
        _ => Err(Error::Invalid("regulator norms need exactly one complex boson species".into())),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegulatorNorm {
    /// Maximum of `||F||_{T_phi} / regulator` over the probes.
    pub lower: f64,
    /// Probe attaining `lower`.
    pub argmax: String,
    /// Analytic upper bound, when available.
    pub upper: Option<f64>,
}

/// `sup_{s >= 0} (1 + k s)^a exp(-s^2)`.
pub(crate) fn growth_sup(a: u32, k: f64) -> f64 {
    if a == 0 || k == 0.0 {
        return 1.0;
    }
    let a = a as f64;
    let s = (-1.0 + (1.0 + 2.0 * a * k * k).sqrt()) / (2.0 * k);
    (1.0 + k * s).powf(a) * (-s * s).exp()
}

/// `||F||_G` or `||F||_G~` over the probe set for `F` supported in `X^box`.
///
/// For the fluctuation kind the upper bound uses
/// `||F||_{T_phi} <= ||F||_{T_0} (1 + ||phi||_{Phi(X^box)})^A` with `A` the
/// degree of `F`, which needs `G(X, phi) >= exp(||phi||^2_{Phi(X^box)})`:
/// available for a single block or `p_phi = 0`.
pub fn regulator_norm(
    f: &NElement<C64>,
    torus: &Torus,
    x: &Polymer,
    kind: RegulatorKind,
    reg: &RegulatorParams,
    tphi: &NormParams,
    probes: &[Probe],
) -> Result<RegulatorNorm> {
    let sites = torus.polymer_sites(x);
    let nb = torus.small_set_neighbourhood(&sites);
    if let Some(s) = element_sites(f).into_iter().find(|s| !nb.contains(s)) {
        return Err(Error::Precondition(format!("element depends on site {s} outside the small-set neighbourhood")));
    }
    let species = boson_species(f)?;
    if probes.is_empty() {
        return Err(Error::Invalid("empty probe set".into()));
    }
    let mut lower = f64::NEG_INFINITY;
    let mut argmax = String::new();
    for p in probes {
        let phi = Field::from_complex(&f.layout, species, &p.field);
        let t = tphi_seminorm(f, &phi, tphi, Some(torus))?.value;
        let ratio = t / log_regulator(kind, torus, &sites, &p.field, reg)?.exp();
        if ratio > lower {
            lower = ratio;
            argmax = p.name.clone();
        }
    }
    let w = &tphi.weight;
    let comparable = w.p_phi <= reg.p_phi && w.r == torus.r as f64;
    let upper = if kind == RegulatorKind::Fluctuation && comparable && (x.len() == 1 || reg.p_phi == 0) {
        let t0 = tphi_seminorm(f, &Field::zero(), tphi, Some(torus))?.upper;
        Some(t0 * growth_sup(f.degree(), reg.ell / w.scale(species)?))
    } else {
        None
    };
    Ok(RegulatorNorm { lower, argmax, upper })
}

#[cfg(test)]
mod tests {
    use super::growth_sup;

    #[test]
    fn growth_sup_matches_scan() {
        for &(a, k) in &[(1u32, 1.0), (3, 0.5), (4, 2.0)] {
            let scan = (0..200_000)
                .map(|i| {
                    let s = i as f64 * 1e-4;
                    (1.0 + k * s).powi(a as i32) * (-s * s).exp()
                })
                .fold(0.0, f64::max);
            assert!((growth_sup(a, k) - scan).abs() < 1e-6);
        }
    }
}
