//! Norm inequalities. Norms are evaluated in `f64`, so inequalities carry
//! the relative tolerance of [`Trial::le`]; pairing identities are exact.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_traits::{One, Zero};

use super::common::{
    binomial, disjoint_field, primed_field, random_pair, subset, summed_field, test_function_on,
};
use crate::algebra::{Cq, Field, FieldIndex, Kind, Layout, NElement, Scalar, C64};
use crate::error::{Error, Result};
use crate::gaussian::{combined_expectation, laplacian, theta, BijectionMap, CovariancePair};
use crate::lattice::Torus;
use crate::linalg::det;
use crate::norms::{
    covariance_test_function, fermion_covariance_test_function, pairing, phi_norm, rho_ratio, sigma_star,
    sigma_star_derivative, symmetrise, theta_star, tphi_seminorm, NormMode, NormParams, TestFunction, Weight,
};
use crate::regulators::{exponential_moment_check, lattice_sobolev_check};
use crate::verify::instance::{Gen, InstanceSpec, Shape};
use crate::verify::quadrature::normal_expectation_2d;
use crate::verify::report::Trial;

fn params(spec: &InstanceSpec, weight: Weight, mode: NormMode) -> NormParams {
    NormParams::new(spec.p_n, weight, mode)
}

fn norm<S: Scalar>(f: &NElement<S>, phi: &Field<S>, p: &NormParams, torus: Option<&Torus>) -> Result<f64> {
    Ok(tphi_seminorm(f, phi, p, torus)?.value)
}

fn uniform(spec: &InstanceSpec, layout: &Layout) -> Result<Weight> {
    Weight::uniform(spec.h, layout.species.len(), 0, spec.r as f64)
}

/// Random scales in `[lo, hi] * h` per species.
fn scales(gen: &mut Gen, n: usize, h: f64, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| h * gen.range(lo, hi)).collect()
}

fn field_norm<S: Scalar>(phi: &Field<S>, w: &Weight, torus: Option<&Torus>) -> Result<f64> {
    Ok(phi_norm(&TestFunction::from_field(phi), w, torus)?.value)
}

fn shape(spec: &InstanceSpec) -> Shape {
    Shape::new(spec.max_terms, spec.max_degree)
}

/// `tau_x = phi_x phibar_x + psi_x psibar_x` on a supersymmetric layout.
pub(crate) fn tau<S: Scalar>(layout: &Arc<Layout>, x: u32) -> NElement<S> {
    let (phi, phibar) = (FieldIndex::new(0, false, x), FieldIndex::new(0, true, x));
    let (psi, psibar) = (FieldIndex::new(1, false, x), FieldIndex::new(1, true, x));
    let bos = NElement::boson(layout, phi).mul(&NElement::boson(layout, phibar));
    bos.add(&NElement::fermion(layout, psi).mul(&NElement::fermion(layout, psibar)))
}

pub fn tau_norm(spec: &InstanceSpec, gen: &mut Gen, _trial: usize) -> Result<Trial> {
    let layout = spec.layout();
    let x = gen.below(layout.species[0].sites) as u32;
    let h = gen.range(0.1, 3.0);
    let amp = gen.range(0.0, 4.0);
    let phi = gen.field::<C64>(&layout, false).scaled(&C64::new(amp, 0.0));
    let f = tau::<C64>(&layout, x);
    let w = Weight::uniform(h, 2, 0, spec.r as f64)?;
    let p_n = spec.p_n.max(2);
    let modulus = phi.get(FieldIndex::new(0, false, x)).norm();
    let want = (modulus + h).powi(2) + h * h;
    let exact = norm(&f, &phi, &NormParams::new(p_n, w.clone(), NormMode::Exact), None)?;
    let lp = norm(&f, &phi, &NormParams::new(p_n, w.clone(), NormMode::Lp), None)?;
    let phi_n = field_norm(&phi, &w, None)?;
    Ok(Trial::all([
        Trial::close(exact, want, 1e-12).with_note(format!("closed form: {exact} vs {want}")),
        Trial::close(lp, want, 1e-12).with_note(format!("linear program: {lp} vs {want}")),
        Trial::le(exact, 3.0 * h * h * (1.0 + phi_n * phi_n)),
    ]))
}

/// `-2 t^4 + 1.5 P(t)^2 + q2 t^2` with `P(t) = (t + 1)^2 + 1`.
fn tau_profile(t: f64, q2: f64) -> f64 {
    let p = (t + 1.0).powi(2) + 1.0;
    -2.0 * t.powi(4) + 1.5 * p * p + q2 * t * t
}

/// `(q1, t*)` with `q1 = sup_{t >= 0} tau_profile(t, q2)`: a grid scan on
/// `[0, 50]` followed by golden-section refinement of the best cell.
pub(crate) fn tau_q1(q2: f64) -> (f64, f64) {
    let step = 0.01;
    let best = (0..=5000).map(|k| k as f64 * step).max_by(|a, b| tau_profile(*a, q2).total_cmp(&tau_profile(*b, q2)));
    let t0 = best.expect("nonempty grid");
    let (mut lo, mut hi) = ((t0 - step).max(0.0), t0 + step);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let (a, b) = (hi - g * (hi - lo), lo + g * (hi - lo));
        if tau_profile(a, q2) < tau_profile(b, q2) {
            lo = a;
        } else {
            hi = b;
        }
    }
    let t = 0.5 * (lo + hi);
    (tau_profile(t, q2), t)
}

/// The chain `||exp(-a tau^2)||_{T_phi} <= exp(-2 Re a |phi|^4 + ||a tau^2||)
/// <= exp(Re a h^4 (-2 t^4 + 1.5 P^2)) <= exp(Re a h^4 (q1 - q2 t^2))`,
/// compared in log space on a grid of `|phi| / h = t` in `[0, 15]`.
pub fn tau_exponential(spec: &InstanceSpec, _gen: &mut Gen, trial: usize) -> Result<Trial> {
    let a = if trial % 2 == 0 { C64::new(1.0, 0.0) } else { C64::new(1.0, 0.4) };
    let (h, q2) = (0.5, 4.0);
    let (q1, _) = tau_q1(q2);
    let layout = Arc::new(Layout::supersymmetric(1));
    let t2 = tau::<C64>(&layout, 0);
    let f = t2.mul(&t2).scale(&a);
    let w = Weight::uniform(h, 2, 0, spec.r as f64)?;
    let p = NormParams::new(spec.p_n.max(4), w, NormMode::Exact);
    let alpha = a.re;
    let mut parts = Vec::new();
    for k in 0..100 {
        let t = 15.0 * k as f64 / 99.0;
        let z = C64::from_polar(t * h, 0.37 * k as f64);
        let phi = Field::from_complex(&layout, 0, &[z]);
        let centred = f.neg().recentre(&phi);
        let c0 = centred.constant_at(&Field::zero());
        let mut rest = centred.clone();
        rest.add_term(Vec::new(), crate::algebra::Poly::constant(-c0));
        let e = rest.taylor_exponential(p.p_n)?;
        let l0 = c0.re + norm(&e, &Field::zero(), &p, None)?.ln();
        let l1 = -2.0 * alpha * z.norm().powi(4) + norm(&f, &phi, &p, None)?;
        let pt = (t + 1.0).powi(2) + 1.0;
        let l2 = alpha * h.powi(4) * (-2.0 * t.powi(4) + 1.5 * pt * pt);
        let l3 = alpha * h.powi(4) * (q1 - q2 * t * t);
        parts.push(Trial::le_within(l0, l1, 1e-12).with_note(format!("t = {t}: exponential step")));
        parts.push(Trial::le_within(l1, l2, 1e-12).with_note(format!("t = {t}: tau^2 step")));
        parts.push(Trial::le_within(l2, l3, 1e-12).with_note(format!("t = {t}: q1 step")));
    }
    Ok(Trial::all(parts))
}

pub fn product(spec: &InstanceSpec, gen: &mut Gen, _trial: usize) -> Result<Trial> {
    let layout = spec.layout();
    let f: NElement<C64> = gen.element(&layout, shape(spec));
    let g: NElement<C64> = gen.element(&layout, shape(spec));
    let phi = gen.field(&layout, false);
    let p = params(spec, uniform(spec, &layout)?, NormMode::Exact);
    let lhs = norm(&f.mul(&g), &phi, &p, None)?;
    Ok(Trial::le(lhs, norm(&f, &phi, &p, None)? * norm(&g, &phi, &p, None)?))
}

/// Real elements on the configured torus with derivative weights.
pub fn product_lp(spec: &InstanceSpec, gen: &mut Gen, _trial: usize) -> Result<Trial> {
    let torus = spec.torus()?;
    let layout = Arc::new(Layout::supersymmetric(torus.num_sites()));
    let sh = Shape::new(spec.max_terms.min(4), spec.max_degree.min(3)).real();
    let f: NElement<C64> = gen.element(&layout, sh);
    let g: NElement<C64> = gen.element(&layout, sh);
    let phi = gen.field(&layout, true);
    let w = Weight::uniform(spec.h, 2, spec.p_phi.max(1), torus.r as f64)?;
    let p = params(spec, w, NormMode::Lp);
    let t = Some(&torus);
    let lhs = norm(&f.mul(&g), &phi, &p, t)?;
    Ok(Trial::le(lhs, norm(&f, &phi, &p, t)? * norm(&g, &phi, &p, t)?))
}

/// `log ||exp(-F)||_{T_phi}` with the constant factor taken out exactly.
fn log_norm_exp_neg<S: Scalar>(f: &NElement<S>, phi: &Field<S>, p: &NormParams) -> Result<f64> {
    let centred = f.neg().recentre(phi).map_scalars(Scalar::to_c64);
    let c0 = centred.constant_at(&Field::zero());
    let mut rest = centred;
    rest.add_term(Vec::new(), crate::algebra::Poly::constant(-c0));
    let e = rest.taylor_exponential(p.p_n)?;
    Ok(c0.re + norm(&e, &Field::zero(), p, None)?.ln())
}

pub fn exponential(spec: &InstanceSpec, gen: &mut Gen, _trial: usize) -> Result<Trial> {
    let layout = spec.layout();
    let f: NElement<C64> = gen.element(&layout, shape(spec).even());
    let phi = gen.field(&layout, false);
    let p = params(spec, uniform(spec, &layout)?, NormMode::Exact);
    let lhs = log_norm_exp_neg(&f, &phi, &p)?;
    let rhs = -2.0 * f.constant_at(&phi).re + norm(&f, &phi, &p, None)?;
    Ok(Trial::le_within(lhs, rhs, 1e-12))
}

pub fn polynomial(spec: &InstanceSpec, gen: &mut Gen, _trial: usize) -> Result<Trial> {
    let layout = spec.layout();
    let f: NElement<C64> = gen.element(&layout, Shape::new(spec.max_terms, spec.max_degree.min(spec.p_n)));
    let phi = gen.field(&layout, false);
    let w = Weight::new(scales(gen, 2, spec.h, 0.5, 2.0), 0, spec.r as f64)?;
    let p = params(spec, w.clone(), NormMode::Exact);
    let a = f.degree() as i32;
    let x = field_norm(&phi, &w, None)?;
    let lhs = norm(&f, &phi, &p, None)?;
    let t0 = norm(&f, &Field::zero(), &p, None)?;
    let kappa = gen.range(0.05, std::f64::consts::FRAC_1_SQRT_2);
    let a_pow = if a == 0 { 1.0 } else { (a as f64).powf(a as f64 / 2.0) };
    Ok(Trial::all([
        Trial::le(lhs, t0 * (1.0 + x).powi(a)),
        Trial::le(lhs, t0 * a_pow * kappa.powi(-a) * (kappa * kappa * x * x).exp()),
    ]))
}

pub fn norm_change(spec: &InstanceSpec, gen: &mut Gen, trial: usize) -> Result<Trial> {
    let layout = spec.layout();
    let lp = trial % 2 == 1;
    let f: NElement<C64> = gen.element(&layout, if lp { shape(spec).real() } else { shape(spec) });
    let phi = gen.field(&layout, lp);
    let base = Weight::new(scales(gen, 2, spec.h, 0.5, 2.0), 0, spec.r as f64)?;
    let h_primed: Vec<f64> = base.h.iter().map(|&h| h * gen.range(0.2, 1.5)).collect();
    let primed = base.with_scales(h_primed)?;
    let mode = if lp { NormMode::Lp } else { NormMode::Exact };
    let p = params(spec, base.clone(), mode);
    let pp = params(spec, primed.clone(), mode);
    let a = gen.below(spec.p_n as usize) as u32;
    let rho = rho_ratio(&primed, &base, a as usize + 1, &layout, spec.p_n, p.cap(&layout))?;
    let lhs = norm(&f, &phi, &pp, None)?;
    let mut sup_t: f64 = 0.0;
    for k in 0..=40 {
        let t = k as f64 / 40.0;
        sup_t = sup_t.max(norm(&f, &phi.scaled(&C64::new(t, 0.0)), &p, None)?);
    }
    let growth = (1.0 + field_norm(&phi, &primed, None)?).powi(a as i32 + 1);
    let rhs = growth * (norm(&f, &Field::zero(), &pp, None)? + rho * sup_t);
    Ok(Trial::le(lhs, rhs))
}

/// A base layout with a random partial matching of sites to primed sites.
fn restricted_doubling(spec: &InstanceSpec, gen: &mut Gen) -> Result<(Arc<Layout>, BijectionMap, Arc<Layout>)> {
    let base = spec.layout();
    let n = spec.sites;
    let sites: Vec<(u16, Vec<u32>)> =
        (0..2u16).map(|s| (s, subset(gen, n).into_iter().map(|x| x as u32).collect())).collect();
    let b = BijectionMap::restricted(&base, &sites)?;
    let dl = b.doubled_layout(&base);
    Ok((base, b, dl))
}

pub fn theta_contraction(spec: &InstanceSpec, gen: &mut Gen, _trial: usize) -> Result<Trial> {
    let (base, b, dl) = restricted_doubling(spec, gen)?;
    let r = spec.r as f64;
    let w = Weight::new(scales(gen, 2, spec.h, 0.5, 2.0), 0, r)?;
    let wp = Weight::new(scales(gen, 2, spec.h, 0.2, 2.0), 0, r)?;
    let (sum, union) = (w.sum(&wp)?, w.disjoint_union(&wp)?);
    // test functions
    let g: TestFunction<C64> = gen.test_function(&dl, 4, 8, false);
    let lhs = phi_norm(&theta_star(&g, &b), &sum, None)?.value;
    let rhs = phi_norm(&g, &union, None)?.value;
    // elements
    let f: NElement<C64> = gen.element(&base, shape(spec));
    let phi = gen.field(&base, false);
    let xi = primed_field(gen, &dl, false);
    let tf = theta(&f, &C64::one(), &b);
    let l2 = norm(&tf, &disjoint_field(&phi, &xi), &params(spec, union, NormMode::Exact), None)?;
    let r2 = norm(&f, &summed_field(&phi, &xi, &b), &params(spec, sum, NormMode::Exact), None)?;
    Ok(Trial::all([Trial::le(lhs, rhs), Trial::le(l2, r2)]))
}

pub fn theta_adjoint(spec: &InstanceSpec, gen: &mut Gen, _trial: usize) -> Result<Trial> {
    let (base, b, dl) = restricted_doubling(spec, gen)?;
    let f: NElement<Cq> = gen.element(&base, shape(spec));
    let g: TestFunction<Cq> = gen.test_function(&dl, 4, 10, false);
    let phi = gen.field(&base, false);
    let xi = primed_field(gen, &dl, false);
    let lhs = pairing(&theta(&f, &Cq::one(), &b), &g, &disjoint_field(&phi, &xi));
    let rhs = pairing(&f, &theta_star(&g, &b), &summed_field(&phi, &xi, &b));
    Ok(Trial::exact(lhs == rhs, || format!("<theta F, g> = {lhs}, <F, theta* g> = {rhs}")))
}

pub fn laplacian_bound(spec: &InstanceSpec, gen: &mut Gen, trial: usize) -> Result<Trial> {
    let m = 1 + trial % spec.sites.min(3);
    let s = random_pair::<C64>(gen, m)?;
    let f: NElement<C64> = gen.element(&s.base, Shape::new(spec.max_terms, spec.max_degree.min(spec.p_n)));
    let phi = gen.field(&s.base, false);
    let w = Weight::new(scales(gen, 2, spec.h, 0.5, 2.0), 0, spec.r as f64)?;
    let p = params(spec, w.clone(), NormMode::Exact);
    let c_norm = phi_norm(&covariance_test_function(&s.base, &s.c, &s.b), &w, None)?.value;
    let a = f.degree();
    let lhs = 0.5 * norm(&laplacian(&f, &s.c, &s.b), &phi, &p, None)?;
    Ok(Trial::le(lhs, binomial(a, 2) * c_norm * norm(&f, &phi, &p, None)?))
}


/// One integrated boson site and two integrated fermion sites. The right
/// side `E_{C_b} ||F||_{T_{phi ⊔ xi}}` uses a 51 x 51 Gauss-Hermite rule;
/// the difference to a 41-point rule is reported as the quadrature error.
pub fn integration(spec: &InstanceSpec, gen: &mut Gen, _trial: usize) -> Result<Trial> {
    let base = Arc::new(Layout::supersymmetric(2));
    let x0 = gen.below(2) as u32;
    let b = BijectionMap::restricted(&base, &[(0, vec![x0]), (1, vec![0, 1])])?;
    let cb = gen.spd::<C64>(1);
    let cf = gen.symmetric_invertible::<C64>(2);
    let c = CovariancePair::new(&base, vec![(0, cb.clone()), (1, cf.clone())])?;
    b.check(&base, &c)?;
    let dl = b.doubled_layout(&base);
    let r = spec.r as f64;
    let w = Weight::new(scales(gen, 2, spec.h, 0.5, 2.0), 0, r)?;
    let cf_max = cf.data.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let wp = Weight::new(vec![spec.h * gen.range(0.5, 2.0), cf_max.sqrt() * gen.range(1.0, 1.5)], 0, r)?;
    let union = w.disjoint_union(&wp)?;
    let cf_norm = phi_norm(&fermion_covariance_test_function(&cf, 3), &union, None)?.value;
    if cf_norm > 1.0 + 1e-12 {
        return Err(Error::Precondition(format!("||C_f||_Phi(w') = {cf_norm} exceeds 1")));
    }
    let f: NElement<C64> = gen.element(&dl, shape(spec));
    let phi = gen.field(&base, false);
    let p = params(spec, w, NormMode::Exact);
    let pu = params(spec, union, NormMode::Exact);
    let lhs = norm(&combined_expectation(&f, &c, &base)?, &phi, &p, None)?;
    let var = cb.get(0, 0).re / 2.0;
    let integrand = |u: f64, v: f64| {
        let xi = Field::from_complex(&dl, 1, &[C64::new(u, v)]);
        norm(&f, &disjoint_field(&phi, &xi), &pu, None).unwrap_or(f64::NAN)
    };
    let rhs = normal_expectation_2d(51, var, integrand);
    let coarse = normal_expectation_2d(41, var, integrand);
    if !rhs.is_finite() {
        return Err(Error::Invalid("norm evaluation failed inside the quadrature".into()));
    }
    Ok(Trial::le_within(lhs, rhs, 1e-6).with_note(format!(
        "lhs {lhs}, quadrature {rhs} (41-point rule differs by {:e})",
        (rhs - coarse).abs()
    )))
}

pub fn symmetrisation(spec: &InstanceSpec, gen: &mut Gen, _trial: usize) -> Result<Trial> {
    let layout = spec.layout();
    let f: NElement<Cq> = gen.element(&layout, shape(spec));
    let g: TestFunction<Cq> = gen.test_function(&layout, 5, 10, false);
    let phi = gen.field(&layout, false);
    let lhs = pairing(&f, &g, &phi);
    let rhs = pairing(&f, &symmetrise(&g, &layout), &phi);
    Ok(Trial::exact(lhs == rhs, || format!("<F, g> = {lhs}, <F, Sym g> = {rhs}")))
}

/// The exact shift identity for `sigma*`, then the two norm bounds.
pub fn sigma_star_suite(spec: &InstanceSpec, gen: &mut Gen, _trial: usize) -> Result<Trial> {
    let layout = spec.layout();
    let p_n = spec.p_n;
    let poly: NElement<Cq> = gen.element(&layout, Shape::new(spec.max_terms, spec.max_degree.min(p_n)));
    let g: TestFunction<Cq> = gen.test_function(&layout, 4, 8, false);
    let (phi, xi) = (gen.field::<Cq>(&layout, false), gen.field::<Cq>(&layout, false));
    let s = Cq::from_ratio(gen.below(5) as i64, 4);
    let lhs = pairing(&poly, &g, &phi.add(&xi.scaled(&s)));
    let rhs = pairing(&poly, &sigma_star(&g, &xi, &s, &layout, p_n), &phi);
    let mut parts = vec![Trial::exact(lhs == rhs, || format!("shift identity: {lhs} vs {rhs}"))];

    let w = Weight::new(scales(gen, 2, spec.h, 0.5, 2.0), 0, spec.r as f64)?;
    let gc = g.to_c64();
    let xc = xi.to_c64();
    let g_norm = phi_norm(&gc, &w, None)?.value;
    let xi_norm = field_norm(&xc, &w, None)?;
    let shifted = phi_norm(&sigma_star(&gc, &xc, &C64::one(), &layout, p_n), &w, None)?;
    for (&len, &v) in &shifted.per_length {
        parts.push(Trial::le(v, (1.0 + xi_norm).powi(len as i32) * g_norm).with_note(format!("sigma*(1) at length {len}")));
    }
    let len = gen.below(5);
    let gp = gc.of_length(len);
    let gp_norm = phi_norm(&gp, &w, None)?.value;
    for m in 1..=p_n as usize {
        let d = phi_norm(&sigma_star_derivative(&gp, &xc, m, &layout, p_n), &w, None)?;
        let fact = ((len + 1)..=(len + m)).map(|k| k as f64).product::<f64>();
        parts.push(
            Trial::le(d.of_length(len + m), fact * xi_norm.powi(m as i32) * gp_norm)
                .with_note(format!("sigma*^({m}) from length {len}")),
        );
    }
    Ok(Trial::all(parts))
}

pub fn phi_product(spec: &InstanceSpec, gen: &mut Gen, trial: usize) -> Result<Trial> {
    let torus = spec.torus()?;
    let layout = Layout::supersymmetric(torus.num_sites());
    let w = Weight::new(scales(gen, 2, spec.h, 0.5, 2.0), (trial % 2) as u32, torus.r as f64)?;
    let pool = layout.all_indices();
    let bosons: Vec<FieldIndex> = pool.iter().copied().filter(|u| layout.kind(u.species) == Kind::Boson).collect();
    let fermions: Vec<FieldIndex> = pool.iter().copied().filter(|u| layout.kind(u.species) == Kind::Fermion).collect();
    let g1: TestFunction<C64> = test_function_on(gen, &bosons, 3, 5, false);
    let g2: TestFunction<C64> = test_function_on(gen, &fermions, 3, 5, false);
    let t = Some(&torus);
    let lhs = phi_norm(&g1.tensor(&g2), &w, t)?.value;
    Ok(Trial::le(lhs, phi_norm(&g1, &w, t)?.value * phi_norm(&g2, &w, t)?.value))
}

pub fn dual_sanity(spec: &InstanceSpec, gen: &mut Gen, _trial: usize) -> Result<Trial> {
    let layout = spec.layout();
    let f: NElement<C64> = gen.element(&layout, shape(spec).real());
    let phi = gen.field(&layout, true);
    let w = uniform(spec, &layout)?;
    let exact = norm(&f, &phi, &params(spec, w.clone(), NormMode::Exact), None)?;
    let lp = norm(&f, &phi, &params(spec, w, NormMode::Lp), None)?;
    Ok(Trial::close(lp, exact, 1e-9))
}

pub fn t0_lower(spec: &InstanceSpec, gen: &mut Gen, _trial: usize) -> Result<Trial> {
    let layout = spec.layout();
    let f: NElement<C64> = gen.element(&layout, shape(spec));
    let phi = gen.field(&layout, false);
    let p = params(spec, uniform(spec, &layout)?, NormMode::Exact);
    Ok(Trial::le(f.constant_at(&phi).norm(), norm(&f, &phi, &p, None)?))
}

pub fn gram(_spec: &InstanceSpec, gen: &mut Gen, _trial: usize) -> Result<Trial> {
    let n = 1 + gen.below(5);
    let dim = n + gen.below(4);
    let vector = |gen: &mut Gen| -> Vec<C64> { (0..dim).map(|_| C64::new(gen.range(-1.0, 1.0), gen.range(-1.0, 1.0))).collect() };
    let us: Vec<Vec<C64>> = (0..n).map(|_| vector(gen)).collect();
    // occasionally v = u, the Hadamard case
    let vs: Vec<Vec<C64>> = if gen.below(4) == 0 { us.clone() } else { (0..n).map(|_| vector(gen)).collect() };
    let inner = |a: &[C64], b: &[C64]| a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<C64>();
    let rows: Vec<Vec<C64>> = us.iter().map(|u| vs.iter().map(|v| inner(u, v)).collect()).collect();
    let lhs = det(rows).norm();
    let rhs: f64 = us.iter().zip(&vs).map(|(u, v)| inner(u, u).re.sqrt() * inner(v, v).re.sqrt()).product();
    Ok(Trial::le(lhs, rhs))
}

const SOBOLEV_SHAPES: [(usize, usize); 4] = [(1, 2), (1, 4), (2, 2), (2, 4)];

pub fn sobolev(_spec: &InstanceSpec, gen: &mut Gen, trial: usize) -> Result<Trial> {
    let (d, r) = SOBOLEV_SHAPES[trial % 4];
    let vol = r.pow(d as u32);
    let mut f: Vec<C64> = (0..vol).map(|_| C64::new(gen.range(-1.0, 1.0), gen.range(-1.0, 1.0))).collect();
    match (trial / 4) % 3 {
        // nearly constant
        1 => {
            let c = C64::new(gen.range(-2.0, 2.0), gen.range(-2.0, 2.0));
            f.iter_mut().for_each(|z| *z = c + *z * 1e-3);
        }
        // single bump
        2 => {
            let k = gen.below(vol);
            f.iter_mut().enumerate().for_each(|(i, z)| *z = if i == k { C64::new(1.0, 0.0) } else { C64::zero() });
        }
        _ => {}
    }
    let check = lattice_sobolev_check(&f, d, r)?;
    Ok(Trial::le(check.worst_ratio, 1.0))
}

pub fn exponential_moment(_spec: &InstanceSpec, gen: &mut Gen, _trial: usize) -> Result<Trial> {
    let n = 1 + gen.below(8);
    let raw = DMatrix::from_fn(n, n, |_, _| gen.range(-1.0, 1.0));
    let q = raw.qr().q();
    let lambdas = DVector::from_fn(n, |_, _| gen.range(0.0, 0.4999));
    let c = &q * DMatrix::from_diagonal(&lambdas) * q.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let check = exponential_moment_check(&c)?;
    Ok(Trial::le(check.exact, check.bound))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q1_matches_cubic_root() {
        // d/dt profile = -2 t^3 + 18 t^2 + 32 t + 12 for q2 = 4; Newton from t = 10
        let mut t: f64 = 10.0;
        for _ in 0..50 {
            let f = -2.0 * t.powi(3) + 18.0 * t * t + 32.0 * t + 12.0;
            let df = -6.0 * t * t + 36.0 * t + 32.0;
            t -= f / df;
        }
        let (q1, t_star) = tau_q1(4.0);
        assert!((t_star - t).abs() < 1e-6, "{t_star} vs {t}");
        assert!((q1 - tau_profile(t, 4.0)).abs() < 1e-9);
        // frozen value
        assert!((q1 - 2764.805_561_981_845).abs() < 1e-8, "{q1}");
        assert!((t - 10.567_764_362_8).abs() < 1e-9, "{t}");
    }

    #[test]
    fn tau_closed_form_fixtures() {
        let layout = Arc::new(Layout::supersymmetric(1));
        let f = tau::<C64>(&layout, 0);
        let p = NormParams::new(4, Weight::uniform(1.0, 2, 0, 2.0).unwrap(), NormMode::Exact);
        let at = |v: f64| norm(&f, &Field::from_complex(&layout, 0, &[C64::new(v, 0.0)]), &p, None).unwrap();
        assert_eq!(at(0.0), 2.0);
        assert_eq!(at(1.0), 5.0);
    }
}
