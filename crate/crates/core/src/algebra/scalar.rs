use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Complex rational scalar used by the exact suites.
pub type Cq = Complex<BigRational>;
/// Complex double scalar used by norms and sampling.
pub type C64 = Complex<f64>;

/// Coefficient field for [`crate::NElement`] and test functions.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const EXACT: bool;

    fn from_i64(n: i64) -> Self;
    fn from_ratio(n: i64, d: i64) -> Self;
    fn from_c64(z: C64) -> Self;
    fn to_c64(&self) -> C64;
    fn conj(&self) -> Self;
    /// `exp(self)` when representable in this field.
    fn exp(&self) -> Option<Self>;
    /// Real and imaginary parts as text.
    fn to_text(&self) -> (String, String);
    fn parse_text(re: &str, im: &str) -> Option<Self>;

    fn norm_f64(&self) -> f64 {
        self.to_c64().norm()
    }

    fn from_usize(n: usize) -> Self {
        Self::from_i64(n as i64)
    }
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `a`, `a/b` or a decimal literal such as `-1.25e-3` exactly.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(p) => (&s[..p], s[p + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int}{frac}0").parse().ok()?;
    let digits = digits / BigInt::from(10);
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut r = BigRational::from_integer(digits);
    if scale >= 0 {
        r *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        r /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Some(if neg { -r } else { r })
}

fn rat_text(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn rat_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| if r.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY })
}

impl Scalar for Cq {
    const EXACT: bool = true;

    fn from_i64(n: i64) -> Self {
        Complex::new(rat(n, 1), BigRational::zero())
    }
    fn from_ratio(n: i64, d: i64) -> Self {
        Complex::new(rat(n, d), BigRational::zero())
    }
    fn from_c64(z: C64) -> Self {
        let re = BigRational::from_float(z.re).unwrap_or_else(BigRational::zero);
        let im = BigRational::from_float(z.im).unwrap_or_else(BigRational::zero);
        Complex::new(re, im)
    }
    fn to_c64(&self) -> C64 {
        Complex::new(rat_f64(&self.re), rat_f64(&self.im))
    }
    fn conj(&self) -> Self {
        Complex::conj(self)
    }
    fn exp(&self) -> Option<Self> {
        if self.is_zero() {
            Some(Self::one())
        } else {
            None
        }
    }
    fn to_text(&self) -> (String, String) {
        (rat_text(&self.re), rat_text(&self.im))
    }
    fn parse_text(re: &str, im: &str) -> Option<Self> {
        Some(Complex::new(parse_rational(re)?, parse_rational(im)?))
    }
}

impl Scalar for C64 {
    const EXACT: bool = false;

    fn from_i64(n: i64) -> Self {
        Complex::new(n as f64, 0.0)
    }
    fn from_ratio(n: i64, d: i64) -> Self {
        Complex::new(n as f64 / d as f64, 0.0)
    }
    fn from_c64(z: C64) -> Self {
        z
    }
    fn to_c64(&self) -> C64 {
        *self
    }
    fn conj(&self) -> Self {
        Complex::conj(self)
    }
    fn exp(&self) -> Option<Self> {
        Some(Complex::exp(*self))
    }
    fn to_text(&self) -> (String, String) {
        (format!("{:e}", self.re), format!("{:e}", self.im))
    }
    fn parse_text(re: &str, im: &str) -> Option<Self> {
        let re = match parse_rational(re) {
            Some(r) => rat_f64(&r),
            None => re.trim().parse().ok()?,
        };
        let im = match parse_rational(im) {
            Some(r) => rat_f64(&r),
            None => im.trim().parse().ok()?,
        };
        Some(Complex::new(re, im))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_literals_parse_exactly() {
        assert_eq!(parse_rational("1.25").unwrap(), rat(5, 4));
        assert_eq!(parse_rational("-3/6").unwrap(), rat(-1, 2));
        assert_eq!(parse_rational("2e-2").unwrap(), rat(1, 50));
        assert_eq!(parse_rational(".5").unwrap(), rat(1, 2));
        assert!(parse_rational("1/0").is_none());
        assert!(parse_rational("x").is_none());
    }

    #[test]
    fn text_round_trip() {
        let z = Cq::new(rat(-7, 3), rat(2, 1));
        let (a, b) = z.to_text();
        assert_eq!(Cq::parse_text(&a, &b).unwrap(), z);
        let w = C64::new(0.1, -2.5);
        let (a, b) = w.to_text();
        assert_eq!(C64::parse_text(&a, &b).unwrap(), w);
    }
}
