//! Checks on the harness itself.

use crate::algebra::serialize::{field_from_text, field_to_text, from_text, to_text};
use crate::algebra::{Cq, NElement, C64};
use crate::error::Result;
use crate::norms::{tphi_certified, verify_certificate, Certificate, NormMode, NormParams, TestFunction, Weight};
use crate::verify::instance::{Gen, InstanceSpec, Shape};
use crate::verify::report::Trial;

/// Two runs of a cheap suite under the same spec and seed.
pub fn seed_determinism(spec: &InstanceSpec, _gen: &mut Gen, trial: usize) -> Result<Trial> {
    let ids = ["algebra-associativity", "product-property", "theta-adjoint", "gram"];
    let id = ids[trial % ids.len()];
    let spec = InstanceSpec { seed: spec.seed.wrapping_add(trial as u64), ..spec.clone() };
    let a = super::run_suite(id, &spec, 8)?;
    let b = super::run_suite(id, &spec, 8)?;
    Ok(Trial::exact(a.same_outcome(&b), || format!("`{id}` differs between runs")))
}

pub fn coverage(_spec: &InstanceSpec, _gen: &mut Gen, _trial: usize) -> Result<Trial> {
    Ok(match super::check_registry() {
        Ok(()) => Trial::identity(true),
        Err(e) => Trial::identity(false).with_note(e.to_string()),
    })
}

pub fn round_trip(spec: &InstanceSpec, gen: &mut Gen, _trial: usize) -> Result<Trial> {
    let layout = spec.layout();
    let shape = Shape::new(spec.max_terms, spec.max_degree);
    let f: NElement<Cq> = gen.element(&layout, shape);
    let f_back: NElement<Cq> = from_text(&to_text(&f))?;

    let g: TestFunction<Cq> = gen.test_function(&layout, 4, 8, false);
    let g_back = TestFunction::<Cq>::from_text(&layout, &g.to_text(&layout))?;

    let phi = gen.field::<Cq>(&layout, false);
    let phi_back: crate::algebra::Field<Cq> = field_from_text(&layout, &field_to_text(&layout, &phi))?;

    let fc: NElement<C64> = gen.element(&layout, shape);
    let phic = gen.field::<C64>(&layout, false);
    let w = Weight::uniform(spec.h, layout.species.len(), 0, spec.r as f64)?;
    let (_, cert) = tphi_certified(&fc, &phic, &NormParams::new(spec.p_n, w, NormMode::Exact), None)?;
    let json = serde_json::to_string(&cert).expect("certificate serializes");
    let cert_back: Certificate =
        serde_json::from_str(&json).map_err(|e| crate::error::Error::Invalid(e.to_string()))?;
    let check = verify_certificate(&fc, &phic, &cert_back)?;

    Ok(Trial::all([
        Trial::exact(f == f_back, || "element text".into()),
        Trial::exact(g == g_back, || "test function text".into()),
        Trial::exact(phi == phi_back, || "field text".into()),
        Trial::exact(cert == cert_back, || "certificate JSON".into()),
        Trial::exact(check.holds(), || "parsed certificate fails verification".into()),
    ]))
}
