use serde::{Deserialize, Serialize};

use super::probes::Probe;
use super::regulator::{boson_species, element_sites, log_regulator, RegulatorKind, RegulatorParams};
use crate::algebra::{Field, NElement, C64};
use crate::error::{Error, Result};
use crate::lattice::{Polymer, Torus};
use crate::norms::{local_field_norm, rho_ratio, tphi_seminorm, NormParams, Weight};

/// Points of the `t` grid standing in for `sup_{0 <= t <= 1}`.
const T_GRID: usize = 20;
const REL_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KkkReport {
    pub holds: bool,
    /// Realized `c_A = max (1 + ||phi||_{Phi(ell, X^box)})^{A+1} / G^{1/2}`.
    pub c_a: f64,
    /// Norm-change ratio `rho^(A+1)` between the `ell` and `h` weights.
    pub rho: f64,
    pub t0: f64,
    /// `max ||F||_{T_{t phi}(h)} / G~(X, t phi)` over probes and the `t` grid.
    pub gtilde_probe: f64,
    /// Largest `lhs / rhs` of the final inequality over the probes.
    pub worst_ratio: f64,
    /// Probes violating the pointwise norm-change step.
    pub step_violations: usize,
    /// Probe and `t` pairs with `G~(X, t phi) > G^{1/2}(X, phi)`.
    pub regulator_violations: usize,
    pub probes: usize,
}

struct ProbeData {
    lhs: f64,
    s: f64,
    log_g: f64,
    sup_t: f64,
}

/// Evaluates the chain behind
/// `||F||_{G,ell} <= c_A (||F||_{T_0(ell)} + rho ||F||_{G~,h})` on `probes`:
/// the pointwise norm-change step, `G~(X, t phi) <= G^{1/2}(X, phi)`, and the
/// final inequality with `c_A` and the `G~` norm realized on the probe set.
pub fn kkk_check(
    f: &NElement<C64>,
    a: u32,
    torus: &Torus,
    x: &Polymer,
    reg: &RegulatorParams,
    tphi: &NormParams,
    probes: &[Probe],
) -> Result<KkkReport> {
    if a >= tphi.p_n {
        return Err(Error::Precondition(format!("need A < p_N, got A = {a}, p_N = {}", tphi.p_n)));
    }
    if reg.ell > reg.h {
        return Err(Error::Precondition("the chain is checked with ell <= h".into()));
    }
    let sites = torus.polymer_sites(x);
    if let Some(s) = element_sites(f).into_iter().find(|s| !sites.contains(s)) {
        return Err(Error::Precondition(format!("element depends on site {s} outside X")));
    }
    let species = boson_species(f)?;
    let nspecies = f.layout.species.len();
    let r = torus.r as f64;
    let w_ell = Weight::uniform(reg.ell, nspecies, reg.p_phi, r)?;
    let w_h = Weight::uniform(reg.h, nspecies, reg.p_phi, r)?;
    let p_ell = tphi.with_weight(w_ell.clone());
    let p_h = tphi.with_weight(w_h.clone());
    let rho = rho_ratio(&w_ell, &w_h, a as usize + 1, &f.layout, tphi.p_n, tphi.cap(&f.layout))?;
    let t0 = tphi_seminorm(f, &Field::zero(), &p_ell, Some(torus))?.upper;
    let nb = torus.small_set_neighbourhood(&sites);
    let field_w = reg.field_weight(torus)?;

    let mut data = Vec::with_capacity(probes.len());
    let mut gtilde_probe: f64 = 0.0;
    let mut regulator_violations = 0;
    for p in probes {
        let phi = Field::from_complex(&f.layout, species, &p.field);
        let lhs = tphi_seminorm(f, &phi, &p_ell, Some(torus))?.value;
        let s = local_field_norm(torus, &p.field, &nb, &field_w, 0, reg.grid)?.value;
        let log_g = log_regulator(RegulatorKind::Fluctuation, torus, &sites, &p.field, reg)?;
        let mut sup_t: f64 = 0.0;
        for k in 0..=T_GRID {
            let t = k as f64 / T_GRID as f64;
            let scaled: Vec<C64> = p.field.iter().map(|z| z * t).collect();
            let tp = tphi_seminorm(f, &phi.scaled(&C64::new(t, 0.0)), &p_h, Some(torus))?.upper;
            let log_gt = log_regulator(RegulatorKind::LargeField, torus, &sites, &scaled, reg)?;
            if log_gt > 0.5 * log_g * (1.0 + REL_TOL) + REL_TOL {
                regulator_violations += 1;
            }
            sup_t = sup_t.max(tp);
            gtilde_probe = gtilde_probe.max(tp / log_gt.exp());
        }
        data.push(ProbeData { lhs, s, log_g, sup_t });
    }

    let growth = |s: f64| (1.0 + s).powi(a as i32 + 1);
    let c_a = data.iter().map(|d| growth(d.s) * (-0.5 * d.log_g).exp()).fold(1.0, f64::max);
    let mut step_violations = 0;
    let mut worst_ratio: f64 = 0.0;
    for d in &data {
        let step_rhs = growth(d.s) * (t0 + rho * d.sup_t);
        if d.lhs > step_rhs * (1.0 + REL_TOL) + REL_TOL {
            step_violations += 1;
        }
        let rhs = c_a * (t0 + rho * gtilde_probe);
        let lhs = d.lhs * (-d.log_g).exp();
        if rhs > 0.0 {
            worst_ratio = worst_ratio.max(lhs / rhs);
        } else if lhs > 0.0 {
            worst_ratio = f64::INFINITY;
        }
    }
    let holds = step_violations == 0 && regulator_violations == 0 && worst_ratio <= 1.0 + REL_TOL;
    Ok(KkkReport {
        holds,
        c_a,
        rho,
        t0,
        gtilde_probe,
        worst_ratio,
        step_violations,
        regulator_violations,
        probes: probes.len(),
    })
}
