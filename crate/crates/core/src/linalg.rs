//! Small dense matrices over a [`Scalar`] field, plus `f64` spectral helpers.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::algebra::{Scalar, C64};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mat<S> {
    pub n: usize,
    pub data: Vec<S>,
}

impl<S: Scalar> Mat<S> {
    pub fn zeros(n: usize) -> Self {
        Mat { n, data: vec![S::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, S::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Invalid("matrix must be square".into()));
        }
        Ok(Mat { n, data: rows.into_iter().flatten().collect() })
    }

    pub fn get(&self, i: usize, j: usize) -> S {
        self.data[i * self.n + j].clone()
    }

    pub fn at(&self, i: usize, j: usize) -> &S {
        &self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self.data[i * self.n + j] = v;
    }

    pub fn add(&self, o: &Mat<S>) -> Mat<S> {
        Mat { n: self.n, data: self.data.iter().zip(&o.data).map(|(a, b)| a.clone() + b.clone()).collect() }
    }

    pub fn scale(&self, k: &S) -> Mat<S> {
        Mat { n: self.n, data: self.data.iter().map(|a| a.clone() * k.clone()).collect() }
    }

    pub fn transpose(&self) -> Mat<S> {
        let mut t = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn mul(&self, o: &Mat<S>) -> Mat<S> {
        let mut out = Self::zeros(self.n);
        for i in 0..self.n {
            for k in 0..self.n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..self.n {
                    let v = out.get(i, j) + a.clone() * o.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    /// Submatrix with the given row and column index lists.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Vec<Vec<S>> {
        rows.iter().map(|&i| cols.iter().map(|&j| self.get(i, j)).collect()).collect()
    }

    pub fn det(&self) -> S {
        det(self.select(&(0..self.n).collect::<Vec<_>>(), &(0..self.n).collect::<Vec<_>>()))
    }

    pub fn inverse(&self) -> Result<Mat<S>> {
        let n = self.n;
        let mut a: Vec<Vec<S>> = (0..n).map(|i| (0..n).map(|j| self.get(i, j)).collect()).collect();
        let mut inv: Vec<Vec<S>> =
            (0..n).map(|i| (0..n).map(|j| if i == j { S::one() } else { S::zero() }).collect()).collect();
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&i, &j| a[i][col].norm_f64().partial_cmp(&a[j][col].norm_f64()).unwrap())
                .filter(|&i| !a[i][col].is_zero())
                .ok_or_else(|| Error::Invalid("singular matrix".into()))?;
            a.swap(col, piv);
            inv.swap(col, piv);
            let p = a[col][col].clone();
            for j in 0..n {
                a[col][j] = a[col][j].clone() / p.clone();
                inv[col][j] = inv[col][j].clone() / p.clone();
            }
            for i in 0..n {
                if i != col && !a[i][col].is_zero() {
                    let f = a[i][col].clone();
                    for j in 0..n {
                        a[i][j] = a[i][j].clone() - f.clone() * a[col][j].clone();
                        inv[i][j] = inv[i][j].clone() - f.clone() * inv[col][j].clone();
                    }
                }
            }
        }
        Ok(Mat { n, data: inv.into_iter().flatten().collect() })
    }

    /// Symmetry with tolerance 0 for exact scalars and `tol` relative
    /// (to the largest entry) otherwise.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        let scale = self.data.iter().map(Scalar::norm_f64).fold(0.0, f64::max).max(1e-300);
        for i in 0..self.n {
            for j in 0..i {
                let (a, b) = (self.get(i, j), self.get(j, i));
                if S::EXACT {
                    if a != b {
                        return false;
                    }
                } else if (a - b).norm_f64() > tol * scale {
                    return false;
                }
            }
        }
        true
    }

    pub fn trace(&self) -> S {
        (0..self.n).fold(S::zero(), |acc, i| acc + self.get(i, i))
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j).to_c64().re)
    }

    pub fn to_c64(&self) -> Mat<C64> {
        Mat { n: self.n, data: self.data.iter().map(Scalar::to_c64).collect() }
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Mat<T> {
        Mat { n: self.n, data: self.data.iter().map(f).collect() }
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|v| v.to_c64().im == 0.0)
    }
}

/// Determinant by elimination over the field.
pub fn det<S: Scalar>(mut a: Vec<Vec<S>>) -> S {
    let n = a.len();
    let mut d = S::one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&i| !a[i][col].is_zero()) else {
            return S::zero();
        };
        if piv != col {
            a.swap(col, piv);
            d = -d;
        }
        let p = a[col][col].clone();
        d = d * p.clone();
        for i in col + 1..n {
            if a[i][col].is_zero() {
                continue;
            }
            let f = a[i][col].clone() / p.clone();
            for j in col..n {
                a[i][j] = a[i][j].clone() - f.clone() * a[col][j].clone();
            }
        }
    }
    d
}

/// Eigenvalues of a real symmetric matrix, ascending.
pub fn sym_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

/// Lower Cholesky factor of a real symmetric positive-definite matrix.
pub fn cholesky(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    m.clone()
        .cholesky()
        .map(|c| c.l())
        .ok_or_else(|| Error::Invalid("matrix is not positive definite".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Cq;

    #[test]
    fn det_and_inverse_agree() {
        let m = Mat::from_rows(vec![
            vec![Cq::from_i64(2), Cq::from_i64(1), Cq::from_i64(0)],
            vec![Cq::from_i64(1), Cq::from_i64(3), Cq::from_i64(1)],
            vec![Cq::from_i64(0), Cq::from_i64(1), Cq::from_i64(4)],
        ])
        .unwrap();
        assert_eq!(m.det(), Cq::from_i64(18));
        assert_eq!(m.mul(&m.inverse().unwrap()), Mat::identity(3));
    }

    #[test]
    fn singular_inverse_fails() {
        let m = Mat::from_rows(vec![vec![Cq::from_i64(1), Cq::from_i64(2)], vec![Cq::from_i64(2), Cq::from_i64(4)]])
            .unwrap();
        assert!(m.inverse().is_err());
        assert_eq!(m.det(), Cq::from_i64(0));
    }
}
