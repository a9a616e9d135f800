use super::{Geometry, ScalarField};

/// `||f||_p` by rectangle-rule quadrature of the physical samples; `p = inf` gives the max.
pub fn lebesgue_norm(field: &ScalarField, p: f64) -> f64 {
    assert!(p >= 1.0, "lebesgue_norm needs p >= 1");
    let phys = field.physical();
    if p.is_infinite() {
        return phys.iter().fold(0.0, |m, v| m.max(v.abs()));
    }
    let grid = field.grid();
    let sum: f64 = match grid.geometry() {
        Geometry::Cartesian => {
            phys.iter().map(|v| v.abs().powf(p)).sum::<f64>() * grid.cell_weight()
        }
        Geometry::Radial => phys
            .iter()
            .zip(grid.weights())
            .map(|(v, w)| w * v.abs().powf(p))
            .sum(),
    };
    sum.powf(1.0 / p)
}

fn weighted_spectral_sum(field: &ScalarField, weight: impl Fn(usize) -> f64) -> f64 {
    let grid = field.grid();
    let spec = field.spectrum();
    let s: f64 = spec
        .iter()
        .enumerate()
        .map(|(i, c)| weight(i) * c.norm_sqr())
        .sum();
    s * grid.cell_weight() / grid.len() as f64
}

/// `||f||_2` from the Fourier side (Plancherel).
pub fn l2_norm_spectral(field: &ScalarField) -> f64 {
    weighted_spectral_sum(field, |_| 1.0).sqrt()
}

/// `||grad f||_2^2`.
pub fn gradient_norm_sq(field: &ScalarField) -> f64 {
    let k2 = field.grid().k_squared();
    weighted_spectral_sum(field, |i| k2[i])
}

/// `||<grad> f||_2`.
pub fn sobolev_h1_norm(field: &ScalarField) -> f64 {
    let k2 = field.grid().k_squared();
    weighted_spectral_sum(field, |i| 1.0 + k2[i]).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::SpectralGrid;
    use std::f64::consts::PI;

    #[test]
    fn constant_and_cosine() {
        let g = SpectralGrid::new(2, 32, 3.0).unwrap();
        let v = g.volume();
        let c = ScalarField::from_fn(&g, |_| -2.5);
        assert!((lebesgue_norm(&c, 2.0) - 2.5 * v.sqrt()).abs() < 1e-12);
        assert!((lebesgue_norm(&c, f64::INFINITY) - 2.5).abs() < 1e-15);
        let k0 = 2.0 * PI / 3.0;
        let f = ScalarField::from_fn(&g, |x| (k0 * x[0]).cos());
        assert!((lebesgue_norm(&f, 2.0) - (v / 2.0).sqrt()).abs() < 1e-12);
        assert!((sobolev_h1_norm(&f) - ((1.0 + k0 * k0) * v / 2.0).sqrt()).abs() < 1e-11);
    }

    #[test]
    fn radial_norms_match_closed_forms() {
        // u = exp(-r^2): ||u||_2^2 = (pi/2)^{3/2}, ||grad u||^2 = 3 (pi/2)^{3/2},
        // ||u||_4^4 = (pi/4)^{3/2}.
        let g = SpectralGrid::radial(512, 12.0).unwrap();
        let u = ScalarField::from_fn(&g, |r| (-r[0] * r[0]).exp());
        let m = (PI / 2.0).powf(1.5);
        assert!((l2_norm_spectral(&u).powi(2) - m).abs() < 1e-12);
        assert!((lebesgue_norm(&u, 2.0).powi(2) - m).abs() < 1e-12);
        assert!((gradient_norm_sq(&u) - 3.0 * m).abs() < 1e-11);
        assert!((lebesgue_norm(&u, 4.0).powi(4) - (PI / 4.0).powf(1.5)).abs() < 1e-12);
    }
}
