use serde::{Deserialize, Serialize};

use crate::algebra::{FieldIndex, IndexSequence};
use crate::error::{Error, Result};

/// Weight of the `(h, p_phi, R)` family: an entry `u` differentiated `|alpha|`
/// times has weight `h[species(u)] * R^-|alpha|` when `|alpha| <= p_phi`
/// and is unconstrained above.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Weight {
    /// Scale per species id.
    pub h: Vec<f64>,
    pub p_phi: u32,
    pub r: f64,
}

impl Weight {
    pub fn new(h: Vec<f64>, p_phi: u32, r: f64) -> Result<Self> {
        if h.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(Error::Invalid("weight scales must be positive and finite".into()));
        }
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::Invalid("weight smoothness scale must be positive".into()));
        }
        Ok(Weight { h, p_phi, r })
    }

    /// The same scale `h` for `species` species.
    pub fn uniform(h: f64, species: usize, p_phi: u32, r: f64) -> Result<Self> {
        Self::new(vec![h; species], p_phi, r)
    }

    pub fn scale(&self, species: u16) -> Result<f64> {
        self.h
            .get(species as usize)
            .copied()
            .ok_or_else(|| Error::Invalid(format!("weight has no scale for species {species}")))
    }

    /// `w_{alpha,u}` for `|alpha| = order`; `None` when unconstrained.
    pub fn entry(&self, order: u32, u: FieldIndex) -> Result<Option<f64>> {
        if order > self.p_phi {
            return Ok(None);
        }
        Ok(Some(self.scale(u.species)? * self.r.powi(-(order as i32))))
    }

    /// `w_{0,z}`, the product of the underived entry weights.
    pub fn sequence(&self, z: &IndexSequence) -> Result<f64> {
        z.entries.iter().try_fold(1.0, |acc, u| Ok(acc * self.scale(u.species)?))
    }

    fn compatible(&self, other: &Weight) -> Result<()> {
        if self.p_phi != other.p_phi || self.r != other.r {
            return Err(Error::Invalid("weights differ in derivative cap or smoothness scale".into()));
        }
        Ok(())
    }

    /// `w + w'` on the same layout.
    pub fn sum(&self, other: &Weight) -> Result<Weight> {
        self.compatible(other)?;
        if self.h.len() != other.h.len() {
            return Err(Error::Invalid("weights cover different species counts".into()));
        }
        Ok(Weight { h: self.h.iter().zip(&other.h).map(|(a, b)| a + b).collect(), ..self.clone() })
    }

    /// `w ⊔ w'` on the doubled layout: species `2s` takes `h[s]`, `2s + 1`
    /// takes `h'[s]`.
    pub fn disjoint_union(&self, primed: &Weight) -> Result<Weight> {
        self.compatible(primed)?;
        if self.h.len() != primed.h.len() {
            return Err(Error::Invalid("weights cover different species counts".into()));
        }
        let h = self.h.iter().zip(&primed.h).flat_map(|(&a, &b)| [a, b]).collect();
        Ok(Weight { h, ..self.clone() })
    }

    pub fn with_scales(&self, h: Vec<f64>) -> Result<Weight> {
        Weight::new(h, self.p_phi, self.r)
    }
}
