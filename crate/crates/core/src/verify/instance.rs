use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{BMono, Field, FieldIndex, IndexSequence, Kind, Layout, NElement, Scalar, C64};
use crate::error::{Error, Result};
use crate::lattice::Torus;
use crate::linalg::Mat;
use crate::norms::TestFunction;

/// Distribution of random coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Coefficients {
    /// `(a + i b) / denominator` with integers `|a|, |b| <= range`; the
    /// imaginary part is drawn only when `complex`.
    RationalGrid { denominator: i64, range: i64, complex: bool },
    /// Uniform on the closed unit disk.
    UnitDisk,
}

/// Parameters shared by the random generators of every suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InstanceSpec {
    pub d: usize,
    pub r: usize,
    pub m: usize,
    /// Sites of the supersymmetric layout used by the algebra suites.
    pub sites: usize,
    pub max_terms: usize,
    pub max_degree: u32,
    pub p_n: u32,
    pub p_phi: u32,
    pub h: f64,
    pub coefficients: Coefficients,
    pub seed: u64,
}

impl Default for InstanceSpec {
    fn default() -> Self {
        InstanceSpec {
            d: 1,
            r: 2,
            m: 1,
            sites: 2,
            max_terms: 6,
            max_degree: 4,
            p_n: 4,
            p_phi: 0,
            h: 1.0,
            coefficients: Coefficients::RationalGrid { denominator: 4, range: 8, complex: true },
            seed: 0,
        }
    }
}

impl InstanceSpec {
    pub fn validate(&self) -> Result<()> {
        Torus::new(self.d, self.r, self.m)?;
        if self.sites == 0 || self.sites > 8 {
            return Err(Error::Invalid("sites must be between 1 and 8".into()));
        }
        if self.max_terms == 0 {
            return Err(Error::Invalid("max_terms must be positive".into()));
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::Invalid("h must be positive".into()));
        }
        if let Coefficients::RationalGrid { denominator, range, .. } = self.coefficients {
            if denominator <= 0 || range <= 0 {
                return Err(Error::Invalid("rational grid needs positive denominator and range".into()));
            }
        }
        Ok(())
    }

    pub fn torus(&self) -> Result<Torus> {
        Torus::new(self.d, self.r, self.m)
    }

    pub fn layout(&self) -> Arc<Layout> {
        Arc::new(Layout::supersymmetric(self.sites))
    }
}

/// Shape of a random element.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Shape {
    pub terms: usize,
    /// Bound on `p(x) + q(y)` per term.
    pub degree: u32,
    pub max_fermions: usize,
    /// Only even fermion monomials.
    pub even: bool,
    /// Real coefficients.
    pub real: bool,
}

impl Shape {
    pub fn new(terms: usize, degree: u32) -> Self {
        Shape { terms, degree, max_fermions: usize::MAX, even: false, real: false }
    }
    pub fn even(self) -> Self {
        Shape { even: true, ..self }
    }
    pub fn real(self) -> Self {
        Shape { real: true, ..self }
    }
    pub fn fermions(self, n: usize) -> Self {
        Shape { max_fermions: n, ..self }
    }
}

/// Random source for one trial. The stream is a function of the spec seed
/// and the trial index only.
pub struct Gen {
    pub rng: ChaCha8Rng,
    pub coefficients: Coefficients,
}

impl Gen {
    pub fn new(spec: &InstanceSpec, trial: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(trial);
        Gen { rng, coefficients: spec.coefficients.clone() }
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..=hi)
    }

    pub fn coin(&mut self) -> bool {
        self.rng.gen()
    }

    pub fn pick<T: Clone>(&mut self, v: &[T]) -> T {
        v.choose(&mut self.rng).expect("nonempty choice").clone()
    }

    /// Rational `n / den` with `|n| <= range`.
    pub fn ratio<S: Scalar>(&mut self, range: i64, den: i64) -> S {
        S::from_ratio(self.rng.gen_range(-range..=range), den)
    }

    fn draw<S: Scalar>(&mut self, real: bool) -> S {
        match self.coefficients.clone() {
            Coefficients::RationalGrid { denominator, range, complex } => {
                let re: S = self.ratio(range, denominator);
                if complex && !real {
                    let im: S = self.ratio(range, denominator);
                    re + im * S::from_c64(C64::new(0.0, 1.0))
                } else {
                    re
                }
            }
            Coefficients::UnitDisk => {
                let (r, a): (f64, f64) = (self.rng.gen::<f64>().sqrt(), self.rng.gen_range(0.0..std::f64::consts::TAU));
                if real {
                    S::from_c64(C64::new(r * a.cos(), 0.0))
                } else {
                    S::from_c64(C64::from_polar(r, a))
                }
            }
        }
    }

    /// A nonzero coefficient from the configured distribution.
    pub fn scalar<S: Scalar>(&mut self) -> S {
        self.nonzero(false)
    }

    pub fn real_scalar<S: Scalar>(&mut self) -> S {
        self.nonzero(true)
    }

    fn nonzero<S: Scalar>(&mut self, real: bool) -> S {
        loop {
            let v: S = self.draw(real);
            if !v.is_zero() {
                return v;
            }
        }
    }

    /// Complex field values on `n` sites.
    pub fn field_values<S: Scalar>(&mut self, n: usize, real: bool) -> Vec<S> {
        (0..n).map(|_| self.draw(real)).collect()
    }

    /// A boson field on every pair or real boson species of `layout`, with
    /// barred coordinates the conjugates of unbarred ones.
    pub fn field<S: Scalar>(&mut self, layout: &Layout, real: bool) -> Field<S> {
        let mut f = Field::zero();
        for (s, sp) in layout.species.iter().enumerate() {
            if sp.kind == Kind::Boson {
                let vals = self.field_values::<S>(sp.sites, real);
                f = f.add(&Field::from_complex(layout, s as u16, &vals));
            }
        }
        f
    }

    /// Random element with generators drawn from `pool` (all indices of
    /// the layout when empty).
    pub fn element_on<S: Scalar>(&mut self, layout: &Arc<Layout>, pool: &[FieldIndex], shape: Shape) -> NElement<S> {
        let all;
        let pool = if pool.is_empty() {
            all = layout.all_indices();
            &all[..]
        } else {
            pool
        };
        let bosons: Vec<FieldIndex> = pool.iter().copied().filter(|u| layout.kind(u.species) == Kind::Boson).collect();
        let fermions: Vec<FieldIndex> =
            pool.iter().copied().filter(|u| layout.kind(u.species) == Kind::Fermion).collect();
        let mut out = NElement::zero(layout);
        for _ in 0..shape.terms {
            let deg = self.rng.gen_range(0..=shape.degree) as usize;
            let mut nf = self.rng.gen_range(0..=deg.min(fermions.len()).min(shape.max_fermions));
            if shape.even && nf % 2 == 1 {
                nf -= 1;
            }
            let ys: Vec<FieldIndex> = fermions.choose_multiple(&mut self.rng, nf).copied().collect();
            let nb = if bosons.is_empty() { 0 } else { deg - nf };
            let xs: Vec<(FieldIndex, u32)> = (0..nb).map(|_| (*bosons.choose(&mut self.rng).expect("boson"), 1)).collect();
            let c = self.nonzero::<S>(shape.real);
            out = out.add(&NElement::monomial(layout, c, BMono::from_powers(xs), &ys));
        }
        out
    }

    pub fn element<S: Scalar>(&mut self, layout: &Arc<Layout>, shape: Shape) -> NElement<S> {
        self.element_on(layout, &[], shape)
    }

    /// Random species-ordered sequence of length `len` over `pool`.
    pub fn sequence(&mut self, pool: &[FieldIndex], len: usize) -> IndexSequence {
        let mut z: Vec<FieldIndex> = (0..len).map(|_| *pool.choose(&mut self.rng).expect("pool")).collect();
        z.sort_by_key(|u| u.species);
        IndexSequence::new(z)
    }

    /// Test function with `count` random entries of length at most `max_len`.
    pub fn test_function<S: Scalar>(&mut self, layout: &Layout, max_len: usize, count: usize, real: bool) -> TestFunction<S> {
        let pool = layout.all_indices();
        let mut g = TestFunction::zero();
        for _ in 0..count {
            let len = self.rng.gen_range(0..=max_len);
            let z = self.sequence(&pool, len);
            let v = self.nonzero::<S>(real);
            g.set(z, v);
        }
        g
    }

    /// Symmetric positive definite rational matrix `B B^T + I / k` with
    /// small integer `B` entries.
    pub fn spd<S: Scalar>(&mut self, n: usize) -> Mat<S> {
        let b: Vec<Vec<i64>> = (0..n).map(|_| (0..n).map(|_| self.rng.gen_range(-2..=2)).collect()).collect();
        let shift = self.rng.gen_range(1..=4);
        let den = self.rng.gen_range(1..=4);
        let mut rows = vec![vec![S::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                let dot: i64 = (0..n).map(|k| b[i][k] * b[j][k]).sum();
                let v = S::from_ratio(dot * shift + i64::from(i == j), shift * den);
                rows[i][j] = v;
            }
        }
        Mat::from_rows(rows).expect("square")
    }

    /// Symmetric invertible rational matrix (not necessarily definite).
    pub fn symmetric_invertible<S: Scalar>(&mut self, n: usize) -> Mat<S> {
        loop {
            let mut m = Mat::<S>::zeros(n);
            for i in 0..n {
                for j in i..n {
                    let v: S = self.ratio(4, 3);
                    m.set(i, j, v.clone());
                    m.set(j, i, v);
                }
            }
            if !m.det().is_zero() {
                return m;
            }
        }
    }
}
