use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::algebra::C64;
use crate::error::{Error, Result};
use crate::linalg::sym_eigenvalues;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentCheck {
    /// `E exp((xi, xi)/2) = prod (1 - lambda)^{-1/2}`.
    pub exact: f64,
    /// `exp(Tr C)`.
    pub bound: f64,
    pub lambda_max: f64,
}

impl MomentCheck {
    pub fn holds(&self) -> bool {
        self.exact <= self.bound * (1.0 + 1e-12)
    }
}

/// Exponential moment of a centred real Gaussian vector with covariance `c`
/// against `exp(Tr C)`, for `c` positive semidefinite with `lambda_max < 1/2`.
pub fn exponential_moment_check(c: &DMatrix<f64>) -> Result<MomentCheck> {
    if !c.is_square() || (c - c.transpose()).abs().max() > 1e-12 * c.abs().max().max(1.0) {
        return Err(Error::Invalid("covariance must be square and symmetric".into()));
    }
    let eig = sym_eigenvalues(c);
    let lambda_max = eig.last().copied().unwrap_or(0.0);
    if eig.first().is_some_and(|&l| l < -1e-12) {
        return Err(Error::Precondition("covariance is not positive semidefinite".into()));
    }
    if lambda_max >= 0.5 {
        return Err(Error::Precondition(format!("lambda_max = {lambda_max} is not below 1/2")));
    }
    let log_exact: f64 = eig.iter().map(|&l| -0.5 * (1.0 - l.max(0.0)).ln()).sum();
    Ok(MomentCheck { exact: log_exact.exp(), bound: c.trace().exp(), lambda_max })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SobolevCheck {
    /// `max_x |f(x)|^2 / rhs`; the inequality holds when at most 1.
    pub worst_ratio: f64,
    /// `2^{3d+2} R^-d sum_y sum_alpha |grad_R^alpha f(y)|^2`.
    pub rhs: f64,
}

impl SobolevCheck {
    pub fn holds(&self) -> bool {
        self.worst_ratio <= 1.0 + 1e-12
    }
}

/// Lattice Sobolev inequality on one block of side `r` in `d` dimensions.
/// `f` is indexed row-major by block coordinates. Forward differences
/// `grad_R = R grad` with `alpha in {0,1}^d` are summed over the `y` whose
/// stencil stays inside the block.
pub fn lattice_sobolev_check(f: &[C64], d: usize, r: usize) -> Result<SobolevCheck> {
    if d == 0 || r < 2 {
        return Err(Error::Invalid("need d >= 1 and R >= 2".into()));
    }
    let vol = r.pow(d as u32);
    if f.len() != vol {
        return Err(Error::Invalid(format!("block of side {r} in d = {d} has {vol} sites, got {}", f.len())));
    }
    let coords = |mut k: usize| -> Vec<usize> {
        let mut c = vec![0; d];
        for i in (0..d).rev() {
            c[i] = k % r;
            k /= r;
        }
        c
    };
    let index = |c: &[usize]| c.iter().fold(0, |acc, &x| acc * r + x);
    let mut sum = 0.0;
    for mask in 0u32..(1 << d) {
        let order = mask.count_ones() as i32;
        for y in 0..vol {
            let cy = coords(y);
            if (0..d).any(|i| mask & (1 << i) != 0 && cy[i] + 1 >= r) {
                continue;
            }
            let mut diff = C64::new(0.0, 0.0);
            for sub in 0u32..(1 << d) {
                if sub & !mask != 0 {
                    continue;
                }
                let mut c = cy.clone();
                for (i, ci) in c.iter_mut().enumerate() {
                    if sub & (1 << i) != 0 {
                        *ci += 1;
                    }
                }
                let sign = if (order - sub.count_ones() as i32) % 2 == 0 { 1.0 } else { -1.0 };
                diff += f[index(&c)] * sign;
            }
            sum += (r as f64).powi(2 * order) * diff.norm_sqr();
        }
    }
    let rhs = 2f64.powi(3 * d as i32 + 2) * (r as f64).powi(-(d as i32)) * sum;
    let max = f.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
    let worst_ratio = if max == 0.0 { 0.0 } else { max / rhs };
    Ok(SobolevCheck { worst_ratio, rhs })
}
