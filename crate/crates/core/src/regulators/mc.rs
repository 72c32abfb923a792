use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::regulator::{log_regulator, RegulatorKind, RegulatorParams};
use crate::algebra::{FieldIndex, IndexSequence, C64};
use crate::error::{Error, Result};
use crate::lattice::{Polymer, Torus};
use crate::linalg::{cholesky, sym_eigenvalues};
use crate::norms::{phi_norm, TestFunction, Weight};

/// Two-sided 99% normal quantile.
pub const Z99: f64 = 2.5758293035489004;
/// Independent sampler streams; fixed so that results do not depend on the
/// thread count.
pub const MC_STREAMS: usize = 16;

/// Hypothesis gate for `E G^t <= alpha_G^{R^-d |X|}`.
///
/// `G^t(X, phi) <= exp(t n ||phi||^2_Phi) <= exp(sum_a xi_a^2 / 2)` with `n`
/// the number of blocks of `X`, `xi = c t^{1/2} D phi` split into real and
/// imaginary parts, `D` the rows of the `Phi(ell)` norm and `c = (2n)^{1/2}`.
/// `Q` is the covariance of the real variables `xi_a`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub c: f64,
    pub lambda_max: f64,
    /// Largest absolute row sum of `Q`, an upper bound on `lambda_max`.
    pub young: f64,
    pub trace: f64,
    /// `E exp(sum xi^2 / 2) = prod (1 - lambda)^{-1/2}`, infinite when some
    /// eigenvalue reaches 1.
    pub majorant: f64,
    /// `||C_b||_{Phi+(ell)}` with the derivative cap raised by `d`.
    pub phi_plus_norm: f64,
    pub bound: f64,
    /// `lambda_max < 1/2`.
    pub inside: bool,
    /// The gate holds and `exp(trace) <= bound`, so the bound is proved.
    pub implies_bound: bool,
}

fn check_covariance(torus: &Torus, cb: &DMatrix<f64>) -> Result<()> {
    let n = torus.num_sites();
    if cb.nrows() != n || cb.ncols() != n {
        return Err(Error::Invalid(format!("covariance must be {n} x {n}")));
    }
    if (cb - cb.transpose()).abs().max() > 1e-12 * cb.abs().max().max(1.0) {
        return Err(Error::Invalid("covariance must be symmetric".into()));
    }
    Ok(())
}

/// `||C||_{Phi(ell)}` of the two-point function `C(x, y)` with `p_phi + d`
/// derivatives per argument.
fn phi_plus_norm(torus: &Torus, cb: &DMatrix<f64>, reg: &RegulatorParams) -> Result<f64> {
    let n = torus.num_sites();
    let mut g = TestFunction::<C64>::zero();
    for k in 0..n {
        for l in 0..n {
            let z = IndexSequence::new(vec![FieldIndex::new(0, false, k as u32), FieldIndex::new(0, false, l as u32)]);
            g.set(z, C64::new(cb[(k, l)], 0.0));
        }
    }
    let w = Weight::uniform(reg.ell, 1, reg.p_phi + torus.d as u32, torus.r as f64)?;
    Ok(phi_norm(&g, &w, Some(torus))?.value)
}

pub fn hypothesis_gate(torus: &Torus, x: &Polymer, reg: &RegulatorParams, cb: &DMatrix<f64>) -> Result<Gate> {
    check_covariance(torus, cb)?;
    let n = torus.num_sites();
    let w = reg.field_weight(torus)?;
    let rows = crate::norms::field_rows(torus, &w)?;
    let mut d = DMatrix::<f64>::zeros(rows.len(), n);
    for (i, (coefs, rhs)) in rows.iter().enumerate() {
        for &(s, c) in coefs {
            d[(i, s)] += c as f64 / rhs;
        }
    }
    let nblocks = x.len() as f64;
    let c = (2.0 * nblocks).sqrt();
    // Real and imaginary parts are independent, each with covariance C/2.
    let q = (&d * cb * d.transpose()) * (0.5 * c * c * reg.t);
    let eig = sym_eigenvalues(&q);
    let lambda_max = eig.last().copied().unwrap_or(0.0).max(0.0);
    let young = (0..q.nrows()).map(|i| q.row(i).iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    let trace = 2.0 * q.trace();
    let majorant = if lambda_max < 1.0 {
        eig.iter().map(|&l| (1.0 - l.max(0.0)).powi(-1)).product()
    } else {
        f64::INFINITY
    };
    let bound = reg.alpha_g.powf(nblocks);
    let inside = lambda_max < 0.5;
    Ok(Gate {
        c,
        lambda_max,
        young,
        trace,
        majorant,
        phi_plus_norm: phi_plus_norm(torus, cb, reg)?,
        bound,
        inside,
        implies_bound: inside && trace.exp() <= bound,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub blocks: Vec<usize>,
    pub seed: u64,
    pub samples: usize,
    pub t: f64,
    pub estimate: f64,
    /// Half-width of the 99% normal-approximation interval.
    pub ci_halfwidth: f64,
    /// `alpha_G^{R^-d |X|}`.
    pub bound: f64,
    pub gate: Gate,
    /// Hypothesis flags, empty when the run is inside the hypothesis.
    pub flags: Vec<String>,
}

/// Running count, mean and sum of squared deviations.
#[derive(Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, v: f64) {
        self.n += 1.0;
        let delta = v - self.mean;
        self.mean += delta / self.n;
        self.m2 += delta * (v - self.mean);
    }

    fn merge(self, o: Moments) -> Moments {
        if o.n == 0.0 {
            return self;
        }
        if self.n == 0.0 {
            return o;
        }
        let n = self.n + o.n;
        let delta = o.mean - self.mean;
        Moments { n, mean: self.mean + delta * o.n / n, m2: self.m2 + o.m2 + delta * delta * self.n * o.n / n }
    }
}

/// Seeded Monte-Carlo estimate of `E G^t(X, phi)` for the complex Gaussian
/// field with `E conj(phi_k) phi_l = C_b[k][l]` and `E phi phi = 0`.
///
/// `phi = u + i v` with `u`, `v` independent and covariance `C_b / 2`,
/// sampled through a Cholesky factor. Samples are split over
/// [`MC_STREAMS`] ChaCha streams and merged in stream order, so the result
/// depends only on the seed and the sample count.
pub fn regulator_expectation_mc(
    torus: &Torus,
    x: &Polymer,
    reg: &RegulatorParams,
    cb: &DMatrix<f64>,
    samples: usize,
    seed: u64,
) -> Result<McReport> {
    if samples == 0 {
        return Err(Error::Invalid("need at least one sample".into()));
    }
    if let Some(&b) = x.iter().find(|&&b| b >= torus.num_blocks()) {
        return Err(Error::Invalid(format!("block {b} is off the torus")));
    }
    let gate = hypothesis_gate(torus, x, reg, cb)?;
    let l = cholesky(&(cb * 0.5))?;
    let n = torus.num_sites();
    let sites = torus.polymer_sites(x);
    let per = samples / MC_STREAMS;
    let extra = samples % MC_STREAMS;
    let streams: Vec<Result<Moments>> = (0..MC_STREAMS)
        .into_par_iter()
        .map(|k| {
            let count = per + usize::from(k < extra);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let mut m = Moments::default();
            for _ in 0..count {
                let z1 = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
                let z2 = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
                let (u, v) = (&l * z1, &l * z2);
                let phi: Vec<C64> = (0..n).map(|i| C64::new(u[i], v[i])).collect();
                let value = if reg.t == 0.0 {
                    1.0
                } else {
                    (reg.t * log_regulator(RegulatorKind::Fluctuation, torus, &sites, &phi, reg)?).exp()
                };
                m.push(value);
            }
            Ok(m)
        })
        .collect();
    let mut total = Moments::default();
    for m in streams {
        total = total.merge(m?);
    }
    let var = if total.n > 1.0 { total.m2 / (total.n - 1.0) } else { 0.0 };
    let mut flags = Vec::new();
    if !gate.inside {
        flags.push(format!("outside hypothesis: lambda_max(Q) = {:.6} >= 1/2", gate.lambda_max));
    }
    Ok(McReport {
        blocks: x.iter().copied().collect(),
        seed,
        samples,
        t: reg.t,
        estimate: total.mean,
        ci_halfwidth: Z99 * (var / total.n).sqrt(),
        bound: gate.bound,
        gate,
        flags,
    })
}

/// CSV table with columns `X,t,estimate,bound`; blocks are `;`-separated.
pub fn mc_csv(reports: &[McReport]) -> String {
    let mut out = String::from("X,t,estimate,bound\n");
    for r in reports {
        let blocks: Vec<String> = r.blocks.iter().map(|b| b.to_string()).collect();
        out.push_str(&format!("{},{},{},{}\n", blocks.join(";"), r.t, r.estimate, r.bound));
    }
    out
}
