use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{h1_norm_sq, quartic_integral, FieldPair, NonlinearityParams};
use crate::error::{Error, Result};
use crate::spectral::{Geometry, ScalarField, SpectralGrid};

/// `A exp(-|x - c|^2 / w^2)`. On radial grids `center[0]` is a shell radius and
/// the profile is symmetrized in `r` so it stays smooth at the origin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianBump {
    pub amplitude: f64,
    pub center: [f64; 3],
    pub width: f64,
}

impl GaussianBump {
    fn eval(&self, geometry: Geometry, x: &[f64]) -> f64 {
        let w2 = self.width * self.width;
        match geometry {
            Geometry::Cartesian => {
                let r2: f64 = x
                    .iter()
                    .zip(&self.center)
                    .map(|(a, c)| (a - c).powi(2))
                    .sum();
                self.amplitude * (-r2 / w2).exp()
            }
            Geometry::Radial => {
                let (r, c) = (x[0], self.center[0]);
                self.amplitude * ((-(r - c).powi(2) / w2).exp() + (-(r + c).powi(2) / w2).exp())
            }
        }
    }
}

/// Analytic description of a pair as sums of Gaussian bumps.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BumpSpec {
    pub first: Vec<GaussianBump>,
    pub second: Vec<GaussianBump>,
}

impl BumpSpec {
    pub fn render(&self, grid: &SpectralGrid) -> FieldPair {
        let geo = grid.geometry();
        let one = |bumps: &[GaussianBump]| {
            ScalarField::from_fn(grid, |x| bumps.iter().map(|b| b.eval(geo, x)).sum())
        };
        FieldPair::new(one(&self.first), one(&self.second)).expect("same grid")
    }

    pub fn scaled(&self, s: f64) -> Self {
        let f = |v: &[GaussianBump]| {
            v.iter()
                .map(|b| GaussianBump {
                    amplitude: s * b.amplitude,
                    ..*b
                })
                .collect()
        };
        Self {
            first: f(&self.first),
            second: f(&self.second),
        }
    }

    /// `e^{d lambda / 2} phi(e^lambda x)` in space dimension `d`.
    pub fn dilated(&self, lambda: f64, space_dim: usize) -> Self {
        let amp = (0.5 * space_dim as f64 * lambda).exp();
        let shrink = (-lambda).exp();
        let f = |v: &[GaussianBump]| {
            v.iter()
                .map(|b| GaussianBump {
                    amplitude: amp * b.amplitude,
                    center: b.center.map(|c| c * shrink),
                    width: b.width * shrink,
                })
                .collect()
        };
        Self {
            first: f(&self.first),
            second: f(&self.second),
        }
    }
}

/// Ranges for the random bump generator.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BumpSampler {
    pub max_bumps: usize,
    pub center_spread: f64,
    pub width_range: (f64, f64),
    pub amplitude_range: (f64, f64),
    /// Probability that the second component is left empty.
    pub empty_second: f64,
}

impl Default for BumpSampler {
    fn default() -> Self {
        Self {
            max_bumps: 4,
            center_spread: 1.5,
            width_range: (0.8, 1.6),
            amplitude_range: (0.3, 1.0),
            empty_second: 0.1,
        }
    }
}

impl BumpSampler {
    pub fn sample<R: Rng>(&self, rng: &mut R, grid: &SpectralGrid) -> BumpSpec {
        let one = |rng: &mut R| -> Vec<GaussianBump> {
            let count = rng.random_range(1..=self.max_bumps.max(1));
            (0..count).map(|_| self.bump(rng, grid)).collect()
        };
        let first = one(rng);
        let second = if rng.random_bool(self.empty_second) {
            Vec::new()
        } else {
            one(rng)
        };
        BumpSpec { first, second }
    }

    fn bump(&self, rng: &mut impl Rng, grid: &SpectralGrid) -> GaussianBump {
        let mut center = [0.0; 3];
        match grid.geometry() {
            Geometry::Cartesian => {
                for c in center.iter_mut().take(grid.dim()) {
                    *c = rng.random_range(-self.center_spread..=self.center_spread);
                }
            }
            Geometry::Radial => center[0] = rng.random_range(0.0..=self.center_spread),
        }
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        GaussianBump {
            amplitude: sign * rng.random_range(self.amplitude_range.0..=self.amplitude_range.1),
            center,
            width: rng.random_range(self.width_range.0..=self.width_range.1),
        }
    }
}

/// Which side of the Nehari constraint the amplitude rescaling lands on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NehariSide {
    /// `K0 > 0` (the smaller amplitude root).
    Positive,
    /// `K0 < 0` (the larger amplitude root).
    Negative,
}

/// Rescales `spec` in amplitude so that `J = target`. Along `s -> s spec`,
/// `J(s) = s^2 a / 2 - s^4 b / 4`, which is solved in closed form.
pub fn random_pair_with_action(
    spec: &BumpSpec,
    grid: &SpectralGrid,
    params: &NonlinearityParams,
    target: f64,
    side: NehariSide,
) -> Result<(BumpSpec, FieldPair)> {
    let pair = spec.render(grid);
    let a = h1_norm_sq(&pair);
    let b = quartic_integral(&pair, params);
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::NoCrossing(b));
    }
    let disc = a * a - 4.0 * b * target;
    if disc < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "target action {target} exceeds the ray maximum {}",
            a * a / (4.0 * b)
        )));
    }
    let s2 = match side {
        NehariSide::Positive if target >= 0.0 => (a - disc.sqrt()) / b,
        NehariSide::Positive => {
            return Err(Error::InvalidArgument(
                "negative action requires K0 < 0".into(),
            ))
        }
        NehariSide::Negative => (a + disc.sqrt()) / b,
    };
    let s = s2.sqrt();
    Ok((spec.scaled(s), pair.scaled(s)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::{k0, static_action};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rescaling_hits_target_on_both_sides() {
        let g = SpectralGrid::new(2, 32, 8.0).unwrap();
        let p = NonlinearityParams::with_beta(1.2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let spec = BumpSampler::default().sample(&mut rng, &g);
        for (side, t) in [
            (NehariSide::Positive, 0.4),
            (NehariSide::Negative, 0.4),
            (NehariSide::Negative, -2.0),
        ] {
            let (scaled, pair) = random_pair_with_action(&spec, &g, &p, t, side).unwrap();
            let j = static_action(&pair, &p);
            assert!((j - t).abs() < 1e-10 * t.abs().max(1.0));
            let k = k0(&pair, &p);
            assert_eq!(k > 0.0, side == NehariSide::Positive, "{k}");
            assert!(scaled.render(&g).u1().max_abs_diff(pair.u1()) < 1e-12);
        }
    }

    #[test]
    fn dilation_preserves_l2_mass() {
        let g = SpectralGrid::radial(512, 14.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let spec = BumpSampler::default().sample(&mut rng, &g);
        let m0 = crate::functionals::l2_norm_sq(&spec.render(&g));
        let m1 = crate::functionals::l2_norm_sq(&spec.dilated(0.2, 3).render(&g));
        assert!((m0 - m1).abs() < 1e-10 * m0);
    }
}
