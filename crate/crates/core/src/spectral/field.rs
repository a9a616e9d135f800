use num_complex::Complex64;

use super::{Geometry, SpectralGrid};
use crate::error::{Error, Result};

/// Real samples of a field on a grid.
///
/// On radial grids the stored values are `w = r u`; [`ScalarField::physical`]
/// recovers `u`.
#[derive(Clone, Debug)]
pub struct ScalarField {
    grid: SpectralGrid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: &SpectralGrid) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![0.0; grid.len()],
        }
    }

    /// Wraps stored values (representation values on radial grids).
    pub fn from_values(grid: &SpectralGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("field values"));
        }
        Ok(Self {
            grid: grid.clone(),
            values,
        })
    }

    /// Samples a physical function. Cartesian grids pass the point coordinates;
    /// radial grids pass `[r]` with `r >= 0`.
    pub fn from_fn(grid: &SpectralGrid, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = match grid.geometry() {
            Geometry::Cartesian => (0..grid.len())
                .map(|i| {
                    let x = grid.position(i);
                    f(&x[..grid.dim()])
                })
                .collect(),
            Geometry::Radial => grid.coords().iter().map(|&x| x * f(&[x.abs()])).collect(),
        };
        Self {
            grid: grid.clone(),
            values,
        }
    }

    /// Builds a field from physical samples `u` at the grid points.
    pub fn from_physical(grid: &SpectralGrid, physical: &[f64]) -> Result<Self> {
        match grid.geometry() {
            Geometry::Cartesian => Self::from_values(grid, physical.to_vec()),
            Geometry::Radial => {
                let vals = grid
                    .coords()
                    .iter()
                    .zip(physical)
                    .map(|(x, u)| x * u)
                    .collect();
                Self::from_values(grid, vals)
            }
        }
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Physical samples `u(x_i)`. On radial grids the origin value is the
    /// spectral derivative `w'(0)`.
    pub fn physical(&self) -> Vec<f64> {
        match self.grid.geometry() {
            Geometry::Cartesian => self.values.clone(),
            Geometry::Radial => {
                let o = self.grid.origin_index();
                let mut out: Vec<f64> = self
                    .grid
                    .coords()
                    .iter()
                    .zip(&self.values)
                    .map(|(x, w)| if *x == 0.0 { 0.0 } else { w / x })
                    .collect();
                out[o] = self.radial_slope_at_origin();
                out
            }
        }
    }

    fn radial_slope_at_origin(&self) -> f64 {
        self.grid.origin_slope(&self.spectrum())
    }

    pub fn spectrum(&self) -> Vec<Complex64> {
        self.grid.forward(&self.values)
    }

    pub fn from_spectrum(grid: &SpectralGrid, spectrum: Vec<Complex64>) -> Self {
        Self {
            grid: grid.clone(),
            values: grid.inverse_real(spectrum),
        }
    }

    /// Multiplies every Fourier coefficient by `symbol(mode index)`.
    pub fn apply_multiplier(&self, symbol: impl Fn(usize) -> f64) -> Self {
        let mut spec = self.spectrum();
        for (i, c) in spec.iter_mut().enumerate() {
            *c *= symbol(i);
        }
        Self::from_spectrum(&self.grid, spec)
    }

    /// `<grad>^s`.
    pub fn apply_bessel(&self, s: f64) -> Self {
        let b = self.grid.bessel_symbol();
        self.apply_multiplier(|i| b[i].powf(s))
    }

    /// Spectral partial derivative along a Cartesian axis.
    pub fn derivative(&self, axis: usize) -> Result<Self> {
        if self.grid.is_radial() {
            return Err(Error::Geometry("radial"));
        }
        if axis >= self.grid.dim() {
            return Err(Error::InvalidArgument(format!("axis {axis} out of range")));
        }
        let mut spec = self.spectrum();
        for (i, c) in spec.iter_mut().enumerate() {
            *c *= Complex64::new(0.0, self.grid.derivative_wavevector(i)[axis]);
        }
        Ok(Self::from_spectrum(&self.grid, spec))
    }

    /// `a * self`.
    pub fn scaled(&self, a: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| a * v).collect(),
        }
    }

    /// `self + a * other`.
    ///
    /// # Panics
    /// If the grids differ.
    pub fn add_scaled(&self, other: &Self, a: f64) -> Self {
        assert!(self.grid == other.grid, "fields live on different grids");
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| x + a * y)
            .collect();
        Self {
            grid: self.grid.clone(),
            values,
        }
    }

    /// Maximum absolute difference of stored values.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn bessel_on_constant_and_mode() {
        let g = SpectralGrid::new(1, 64, PI).unwrap();
        let one = ScalarField::from_fn(&g, |_| 1.0);
        assert!(one.apply_bessel(1.0).max_abs_diff(&one) < 1e-14);
        let c = ScalarField::from_fn(&g, |x| (5.0 * x[0]).cos());
        let expect = c.scaled(26.0);
        assert!(c.apply_bessel(2.0).max_abs_diff(&expect) < 1e-12);
    }

    #[test]
    fn bessel_inverse_pair() {
        let g = SpectralGrid::new(2, 32, 4.0).unwrap();
        let f = ScalarField::from_fn(&g, |x| {
            (-(x[0] * x[0] + 2.0 * x[1] * x[1])).exp() * (1.0 + x[0])
        });
        let back = f.apply_bessel(1.0).apply_bessel(-1.0);
        assert!(back.max_abs_diff(&f) < 1e-12 * f.max_abs());
    }

    #[test]
    fn derivative_of_sine() {
        let g = SpectralGrid::new(2, 32, PI).unwrap();
        let f = ScalarField::from_fn(&g, |x| (2.0 * x[0]).sin() * x[1].cos());
        let d = f.derivative(0).unwrap();
        let expect = ScalarField::from_fn(&g, |x| 2.0 * (2.0 * x[0]).cos() * x[1].cos());
        assert!(d.max_abs_diff(&expect) < 1e-12);
    }

    #[test]
    fn radial_physical_round_trip() {
        let g = SpectralGrid::radial(256, 12.0).unwrap();
        let f = ScalarField::from_fn(&g, |r| (-r[0] * r[0]).exp());
        let phys = f.physical();
        for (x, u) in g.coords().iter().zip(&phys) {
            assert!((u - (-x * x).exp()).abs() < 1e-10, "{x} {u}");
        }
        let back = ScalarField::from_physical(&g, &phys).unwrap();
        assert!(back.max_abs_diff(&f) < 1e-12);
    }

    #[test]
    fn rejects_nonfinite() {
        let g = SpectralGrid::new(1, 8, 1.0).unwrap();
        let mut v = vec![0.0; 8];
        v[3] = f64::NAN;
        assert!(ScalarField::from_values(&g, v).is_err());
        assert!(ScalarField::from_values(&g, vec![0.0; 7]).is_err());
    }
}
