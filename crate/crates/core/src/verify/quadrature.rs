use nalgebra::{DMatrix, SymmetricEigen};

/// Gauss-Hermite rule for the weight `exp(-x^2)` by the Golub-Welsch
/// eigenvalue method. Returns nodes in ascending order with weights summing
/// to `sqrt(pi)`.
pub fn gauss_hermite(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1, "need at least one node");
    let mut j = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = (k as f64 / 2.0).sqrt();
        j[(k - 1, k)] = b;
        j[(k, k - 1)] = b;
    }
    let eig = SymmetricEigen::new(j);
    let mut out: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], std::f64::consts::PI.sqrt() * v0 * v0)
        })
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// `E f(X)` for `X ~ N(0, var)` with the `n`-point rule.
pub fn normal_expectation(n: usize, var: f64, f: impl Fn(f64) -> f64) -> f64 {
    let s = (2.0 * var).sqrt();
    gauss_hermite(n).iter().map(|&(x, w)| w * f(s * x)).sum::<f64>() / std::f64::consts::PI.sqrt()
}

/// `E f(U, V)` for independent `U, V ~ N(0, var)` with the `n x n` product rule.
pub fn normal_expectation_2d(n: usize, var: f64, f: impl Fn(f64, f64) -> f64) -> f64 {
    let s = (2.0 * var).sqrt();
    let rule = gauss_hermite(n);
    let mut total = 0.0;
    for &(x, wx) in &rule {
        for &(y, wy) in &rule {
            total += wx * wy * f(s * x, s * y);
        }
    }
    total / std::f64::consts::PI
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_and_moments() {
        let rule = gauss_hermite(51);
        let total: f64 = rule.iter().map(|r| r.1).sum();
        assert!((total - std::f64::consts::PI.sqrt()).abs() < 1e-12);
        // E X^2 = var, E X^4 = 3 var^2, E X^6 = 15 var^3
        for (p, want) in [(2, 0.7), (4, 3.0 * 0.49), (6, 15.0 * 0.343)] {
            let got = normal_expectation(51, 0.7, |x| x.powi(p));
            assert!((got - want).abs() < 1e-12 * want.max(1.0), "{p}: {got}");
        }
        // symmetric nodes
        assert!(rule[25].0.abs() < 1e-12);
        assert!((rule[0].0 + rule[50].0).abs() < 1e-10);
    }
}
