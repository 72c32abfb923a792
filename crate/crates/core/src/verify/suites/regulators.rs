//! Regulator suites on small tori with `d_pi = 1`.

use std::collections::BTreeSet;
use std::sync::Arc;

use nalgebra::DMatrix;

use super::common::subset;
use crate::algebra::{FieldIndex, Layout, NElement, C64};
use crate::error::{Error, Result};
use crate::gaussian::decaying;
use crate::lattice::{Polymer, Torus};
use crate::norms::{local_field_norm, NormMode, NormParams, Weight};
use crate::regulators::{
    growth_sup, hypothesis_gate, kkk_check, log_regulator, regulator_expectation_mc, regulator_norm, ProbeFamily,
    RegulatorKind, RegulatorParams,
};
use crate::verify::instance::{Gen, InstanceSpec, Shape};
use crate::verify::report::Trial;

const KINDS: [RegulatorKind; 2] = [RegulatorKind::Fluctuation, RegulatorKind::LargeField];

fn small_torus() -> Result<Torus> {
    Torus::new(1, 2, 4)
}

fn reg_params(spec: &InstanceSpec) -> Result<RegulatorParams> {
    RegulatorParams::new(spec.h, spec.h, 1, 1.1, 1.0)
}

/// A complex field of amplitude up to `4 ell`, or a real one.
fn random_field(gen: &mut Gen, torus: &Torus, ell: f64, real: bool) -> Vec<C64> {
    let amp = gen.range(0.0, 4.0) * ell;
    (0..torus.num_sites())
        .map(|_| C64::new(gen.range(-1.0, 1.0), if real { 0.0 } else { gen.range(-1.0, 1.0) }) * amp)
        .collect()
}

fn sites_of(torus: &Torus, gen: &mut Gen) -> BTreeSet<usize> {
    subset(gen, torus.num_sites()).into_iter().collect()
}

pub fn monotonicity(spec: &InstanceSpec, gen: &mut Gen, trial: usize) -> Result<Trial> {
    let torus = small_torus()?;
    let reg = reg_params(spec)?;
    let phi = random_field(gen, &torus, reg.ell, trial % 2 == 0);
    let y = sites_of(&torus, gen);
    let x: BTreeSet<usize> = y.iter().copied().filter(|_| gen.coin()).collect();
    let mut parts = Vec::new();
    for kind in KINDS {
        let (lx, ly) = (log_regulator(kind, &torus, &x, &phi, &reg)?, log_regulator(kind, &torus, &y, &phi, &reg)?);
        parts.push(Trial::le(lx, ly).with_note(format!("{kind:?}: X = {x:?}, Y = {y:?}")));
    }
    Ok(Trial::all(parts))
}

pub fn multiplicativity(spec: &InstanceSpec, gen: &mut Gen, trial: usize) -> Result<Trial> {
    let torus = small_torus()?;
    let reg = reg_params(spec)?;
    let phi = random_field(gen, &torus, reg.ell, trial % 2 == 0);
    let (mut x, mut y) = (BTreeSet::new(), BTreeSet::new());
    for s in 0..torus.num_sites() {
        match gen.below(3) {
            0 => x.insert(s),
            1 => y.insert(s),
            _ => false,
        };
    }
    let union: BTreeSet<usize> = x.union(&y).copied().collect();
    let mut parts = Vec::new();
    for kind in KINDS {
        let lx = log_regulator(kind, &torus, &x, &phi, &reg)?;
        let ly = log_regulator(kind, &torus, &y, &phi, &reg)?;
        let lu = log_regulator(kind, &torus, &union, &phi, &reg)?;
        parts.push(Trial::close(lu, lx + ly, 1e-12).with_note(format!("{kind:?}: log G(X u Y) = {lu}, sum {}", lx + ly)));
    }
    Ok(Trial::all(parts))
}

fn random_polymer(torus: &Torus, gen: &mut Gen) -> Polymer {
    let sets = torus.small_sets();
    gen.pick(&sets)
}

/// `(1 + s)^(A+1) <= growth_sup(A+1, sqrt 2) G^(1/2)` where `s` is the
/// `Phi(X^box)` norm; uses `G >= exp(s^2)` at `p_phi = 0`.
pub fn growth_chain(spec: &InstanceSpec, gen: &mut Gen, trial: usize) -> Result<Trial> {
    let torus = small_torus()?;
    let reg = reg_params(spec)?;
    let phi = random_field(gen, &torus, reg.ell, trial % 2 == 0);
    let x = random_polymer(&torus, gen);
    let sites = torus.polymer_sites(&x);
    let nb = torus.small_set_neighbourhood(&sites);
    let s = local_field_norm(&torus, &phi, &nb, &reg.field_weight(&torus)?, 0, reg.grid)?.value;
    let log_g = log_regulator(RegulatorKind::Fluctuation, &torus, &sites, &phi, &reg)?;
    let a = 1 + gen.below(spec.p_n as usize) as u32;
    let lhs = (1.0 + s).powi(a as i32);
    Ok(Trial::le(lhs, growth_sup(a, std::f64::consts::SQRT_2) * (0.5 * log_g).exp()))
}

/// Real fields only: for complex fields the two regulators use different
/// polygon approximations and the comparison is not exact.
pub fn large_field_domination(spec: &InstanceSpec, gen: &mut Gen, _trial: usize) -> Result<Trial> {
    let torus = small_torus()?;
    let reg = reg_params(spec)?;
    let phi = random_field(gen, &torus, reg.ell, true);
    let x = torus.polymer_sites(&random_polymer(&torus, gen));
    let log_g = log_regulator(RegulatorKind::Fluctuation, &torus, &x, &phi, &reg)?;
    let mut parts = Vec::new();
    for k in 0..=10 {
        let t = k as f64 / 10.0;
        let scaled: Vec<C64> = phi.iter().map(|z| z * t).collect();
        let lt = log_regulator(RegulatorKind::LargeField, &torus, &x, &scaled, &reg)?;
        parts.push(Trial::le(lt, 0.5 * log_g).with_note(format!("t = {t}")));
    }
    Ok(Trial::all(parts))
}

fn probes(gen: &mut Gen) -> ProbeFamily {
    ProbeFamily { amplitudes: vec![0.5, 1.0, 2.0], gaussian: 4, seed: gen.below(1 << 30) as u64 }
}

fn element_on_sites(gen: &mut Gen, layout: &Arc<Layout>, sites: &BTreeSet<usize>, shape: Shape) -> NElement<C64> {
    let pool: Vec<FieldIndex> =
        layout.all_indices().into_iter().filter(|u| sites.contains(&(u.site as usize))).collect();
    gen.element_on(layout, &pool, shape)
}

/// `||FK||_{G(X u Y)} <= ||F||_{G(X)} ||K||_{G(Y)}` on the probe set, for
/// both regulators, with `F` on the sites of `X` and `K` on those of `Y`.
pub fn product(spec: &InstanceSpec, gen: &mut Gen, _trial: usize) -> Result<Trial> {
    let torus = small_torus()?;
    let reg = reg_params(spec)?;
    let layout = Arc::new(Layout::supersymmetric(torus.num_sites()));
    let (x, y): (Polymer, Polymer) = (BTreeSet::from([0]), BTreeSet::from([2]));
    let union: Polymer = x.union(&y).copied().collect();
    let shape = Shape::new(spec.max_terms.min(4), spec.max_degree.min(3));
    let f = element_on_sites(gen, &layout, &torus.polymer_sites(&x), shape);
    let k = element_on_sites(gen, &layout, &torus.polymer_sites(&y), shape);
    let tphi = NormParams::new(spec.p_n, Weight::uniform(spec.h, 2, 0, torus.r as f64)?, NormMode::Exact);
    let probes = probes(gen).probes(&torus, reg.ell);
    let mut parts = Vec::new();
    for kind in KINDS {
        let nf = regulator_norm(&f, &torus, &x, kind, &reg, &tphi, &probes)?.lower;
        let nk = regulator_norm(&k, &torus, &y, kind, &reg, &tphi, &probes)?.lower;
        let nfk = regulator_norm(&f.mul(&k), &torus, &union, kind, &reg, &tphi, &probes)?.lower;
        parts.push(Trial::le(nfk, nf * nk).with_note(format!("{kind:?}")));
    }
    Ok(Trial::all(parts))
}

pub fn kkk(spec: &InstanceSpec, gen: &mut Gen, _trial: usize) -> Result<Trial> {
    let torus = Torus::new(1, 2, 3)?;
    let layout = Arc::new(Layout::supersymmetric(torus.num_sites()));
    let x = random_polymer(&torus, gen);
    let sites = torus.polymer_sites(&x);
    let shape = Shape::new(spec.max_terms.min(4), spec.max_degree.min(spec.p_n.saturating_sub(1)));
    let f = element_on_sites(gen, &layout, &sites, shape);
    let ell = spec.h * gen.range(0.3, 1.0);
    let reg = RegulatorParams::new(ell, spec.h, 1, 1.1, 1.0)?;
    let tphi = NormParams::new(spec.p_n, Weight::uniform(ell, 2, 0, torus.r as f64)?, NormMode::Exact);
    let probes = probes(gen).probes(&torus, ell);
    let report = kkk_check(&f, f.degree(), &torus, &x, &reg, &tphi, &probes)?;
    Ok(Trial::all([
        Trial::exact(report.step_violations == 0, || format!("{} norm-change step violations", report.step_violations)),
        Trial::exact(report.regulator_violations == 0, || {
            format!("{} large-field domination violations", report.regulator_violations)
        }),
        Trial::le_within(report.worst_ratio, 1.0, 1e-9).with_note(format!("worst ratio {}", report.worst_ratio)),
    ]))
}

fn covariance(n: usize, scale: f64) -> DMatrix<f64> {
    decaying::<C64>(n, &C64::new(0.5, 0.0)).to_f64() * scale
}

/// Repeated runs and runs on 1 and 3 worker threads agree bit for bit.
pub fn mc_determinism(spec: &InstanceSpec, _gen: &mut Gen, trial: usize) -> Result<Trial> {
    let torus = Torus::new(1, 2, 2)?;
    let reg = RegulatorParams::new(1.0, 1.0, 1, 1.1, 1.0)?;
    let x: Polymer = (0..torus.num_blocks()).collect();
    let cb = covariance(torus.num_sites(), 0.1);
    let seed = spec.seed.wrapping_add(trial as u64);
    let run = || regulator_expectation_mc(&torus, &x, &reg, &cb, 2000, seed);
    let pool = |n: usize| {
        rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(|e| Error::Invalid(e.to_string()))
    };
    let first = run()?;
    let again = run()?;
    let one = pool(1)?.install(run)?;
    let three = pool(3)?.install(run)?;
    let bits = |r: &crate::regulators::McReport| (r.estimate.to_bits(), r.ci_halfwidth.to_bits());
    Ok(Trial::all([
        Trial::exact(bits(&first) == bits(&again), || "repeat run differs".into()),
        Trial::exact(bits(&one) == bits(&three), || "1 and 3 threads differ".into()),
        Trial::exact(bits(&first) == bits(&one), || "default pool and 1 thread differ".into()),
    ]))
}

/// `E G^t(X) <= alpha_G^(|X| / R^d)` on `d = 1, R = 2, m = 2` with every
/// block in `X`, `t = 1` and `alpha_G = 1.1`. The covariance is scaled into
/// the region where the hypothesis gate proves the bound, then the bound
/// is tested by Monte Carlo with `10^5` samples, allowing three
/// half-widths of the 99% interval.
pub fn expectation(spec: &InstanceSpec, _gen: &mut Gen, trial: usize) -> Result<Trial> {
    let torus = Torus::new(1, 2, 2)?;
    let reg = RegulatorParams::new(1.0, 1.0, 1, 1.1, 1.0)?;
    let x: Polymer = (0..torus.num_blocks()).collect();
    let unit = covariance(torus.num_sites(), 1.0);
    let g1 = hypothesis_gate(&torus, &x, &reg, &unit)?;
    let s = 0.99 * (0.4995 / g1.lambda_max).min(g1.bound.ln() / g1.trace);
    let cb = unit * s;
    let report = regulator_expectation_mc(&torus, &x, &reg, &cb, 100_000, spec.seed.wrapping_add(trial as u64))?;
    Ok(Trial::all([
        Trial::exact(report.gate.implies_bound, || format!("gate does not prove the bound: {:?}", report.gate)),
        Trial::le(report.estimate, report.bound + 3.0 * report.ci_halfwidth).with_note(format!(
            "estimate {} +- {} against {}",
            report.estimate, report.ci_halfwidth, report.bound
        )),
    ]))
}
