use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::algebra::C64;
use crate::lattice::Torus;

/// A named probe field.
#[derive(Clone, Debug, PartialEq)]
pub struct Probe {
    pub name: String,
    pub field: Vec<C64>,
}

/// The fixed probe family: the zero field, real and rotated constants,
/// single-site bumps, linear ramps along each axis and complex Gaussian
/// draws. Amplitudes are multiples of the regulator scale.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeFamily {
    pub amplitudes: Vec<f64>,
    pub gaussian: usize,
    pub seed: u64,
}

impl Default for ProbeFamily {
    fn default() -> Self {
        ProbeFamily { amplitudes: vec![0.25, 0.5, 1.0, 2.0, 4.0], gaussian: 16, seed: 0 }
    }
}

impl ProbeFamily {
    pub fn probes(&self, torus: &Torus, scale: f64) -> Vec<Probe> {
        let n = torus.num_sites();
        let zero = C64::new(0.0, 0.0);
        let rot = C64::from_polar(1.0, std::f64::consts::FRAC_PI_3);
        let mut out = vec![Probe { name: "zero".into(), field: vec![zero; n] }];
        for &a in &self.amplitudes {
            let c = C64::new(a * scale, 0.0);
            out.push(Probe { name: format!("constant({a})"), field: vec![c; n] });
            out.push(Probe { name: format!("rotated-constant({a})"), field: vec![c * rot; n] });
            for s in 0..n {
                let mut field = vec![zero; n];
                field[s] = c;
                out.push(Probe { name: format!("bump({a},{s})"), field });
            }
            let period = torus.period() as f64;
            for axis in 0..torus.d {
                let field = (0..n).map(|s| c * (torus.coords(s)[axis] as f64 / period)).collect();
                out.push(Probe { name: format!("ramp({a},{axis})"), field });
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let sd = scale / std::f64::consts::SQRT_2;
        for k in 0..self.gaussian {
            let field = (0..n)
                .map(|_| {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    C64::new(re * sd, im * sd)
                })
                .collect();
            out.push(Probe { name: format!("gaussian({k})"), field });
        }
        out
    }
}
