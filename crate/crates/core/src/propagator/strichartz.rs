//! The free Strichartz functional `Phi(U) = int_0^T ||S(t)U||^3_{L^6 x L^6} dt`,
//! its `H x H` gradient, and an ascent for the ratio `Phi^{1/3} / ||U||_{H x H}`.

use num_complex::Complex64;

use crate::functionals::{energy_inner, energy_norm_sq, PhasePoint};
use crate::spectral::{Geometry, SpectralGrid};

/// Trapezoid samples of the free flow on `[0, horizon]`.
struct Sampling {
    times: Vec<f64>,
    weights: Vec<f64>,
}

impl Sampling {
    fn new(horizon: f64, dt: f64) -> Self {
        let steps = (horizon / dt).ceil().max(1.0) as usize;
        let h = horizon / steps as f64;
        let times = (0..=steps).map(|s| s as f64 * h).collect();
        let weights = (0..=steps)
            .map(|s| if s == 0 || s == steps { 0.5 * h } else { h })
            .collect();
        Self { times, weights }
    }
}

/// Physical samples of a stored-representation array and the quadrature weight
/// attached to each point.
fn physical_and_weights(grid: &SpectralGrid, rep: &[f64]) -> (Vec<f64>, Vec<f64>) {
    match grid.geometry() {
        Geometry::Cartesian => (rep.to_vec(), vec![grid.cell_weight(); rep.len()]),
        Geometry::Radial => {
            let x = grid.coords();
            // The origin carries zero weight, so its value is irrelevant.
            let u = rep
                .iter()
                .zip(x)
                .map(|(w, x)| if *x == 0.0 { 0.0 } else { w / x })
                .collect();
            (u, grid.weights().to_vec())
        }
    }
}

/// `Phi(U)` and, on request, its gradient in the `H x H` inner product.
pub fn strichartz_functional(
    phase: &PhasePoint,
    horizon: f64,
    dt: f64,
    gradient: bool,
) -> (f64, Option<PhasePoint>) {
    let grid = phase.grid();
    let n = grid.len();
    let omega = grid.bessel_symbol();
    let [u1, v1, u2, v2] = phase.fields().map(|f| f.spectrum());
    let (u, v) = ([u1, u2], [v1, v2]);
    let radial = grid.is_radial();
    let x = grid.coords();
    let sampling = Sampling::new(horizon, dt);
    let mut phi = 0.0;
    let mut gu = [
        vec![Complex64::new(0.0, 0.0); n],
        vec![Complex64::new(0.0, 0.0); n],
    ];
    let mut gv = gu.clone();
    for (&t, &c) in sampling.times.iter().zip(&sampling.weights) {
        let (cos, sin): (Vec<f64>, Vec<f64>) =
            omega.iter().map(|w| ((w * t).cos(), (w * t).sin())).unzip();
        let mut sixth = [0.0; 2];
        let mut samples = Vec::with_capacity(2);
        for comp in 0..2 {
            let spec: Vec<Complex64> = (0..n)
                .map(|i| u[comp][i] * cos[i] + v[comp][i] * (sin[i] / omega[i]))
                .collect();
            let (phys, wts) = physical_and_weights(grid, &grid.inverse_real(spec));
            sixth[comp] = phys
                .iter()
                .zip(&wts)
                .map(|(p, w)| w * p.powi(6))
                .sum::<f64>();
            samples.push((phys, wts));
        }
        let norm = (sixth[0].cbrt() + sixth[1].cbrt()).sqrt();
        phi += c * norm.powi(3);
        if !gradient || norm == 0.0 {
            continue;
        }
        // d(N^3) = 3 N sum_i S_i^{-2/3} int u_i^5 du_i, with S_i = int u_i^6.
        for comp in 0..2 {
            if sixth[comp] == 0.0 {
                continue;
            }
            let a = c * 3.0 * norm * sixth[comp].powf(-2.0 / 3.0);
            let (phys, wts) = &samples[comp];
            let dens: Vec<f64> = (0..n)
                .map(|i| {
                    let f = wts[i] * phys[i].powi(5);
                    if radial {
                        if x[i] == 0.0 {
                            0.0
                        } else {
                            f / x[i]
                        }
                    } else {
                        f
                    }
                })
                .collect();
            let fhat = grid.forward(&dens);
            for i in 0..n {
                gu[comp][i] += fhat[i] * (a * cos[i]);
                gv[comp][i] += fhat[i] * (a * sin[i] / omega[i]);
            }
        }
    }
    if !gradient {
        return (phi, None);
    }
    // Riesz map: <G, dU>_{HxH} = (cell / N) sum (omega^2 conj(G_u) dU + conj(G_v) dV).
    // The pairing above is the plain sum over points, i.e. (1 / N) sum conj(F) dU.
    let cell = grid.cell_weight();
    for comp in 0..2 {
        for i in 0..n {
            gu[comp][i] /= cell * omega[i] * omega[i];
            gv[comp][i] /= cell;
        }
    }
    let f = |s: &Vec<Complex64>| crate::spectral::ScalarField::from_spectrum(grid, s.clone());
    let g =
        PhasePoint::from_fields([f(&gu[0]), f(&gv[0]), f(&gu[1]), f(&gv[1])]).expect("same grid");
    (phi, Some(g))
}

/// `Phi^{1/3} / ||U||_{H x H}`.
pub fn strichartz_ratio(phase: &PhasePoint, horizon: f64, dt: f64) -> f64 {
    strichartz_functional(phase, horizon, dt, false).0.cbrt() / energy_norm_sq(phase).sqrt()
}

/// Result of [`maximize_strichartz_ratio`].
#[derive(Clone, Debug)]
pub struct StrichartzAscent {
    pub initial_ratio: f64,
    pub ratio: f64,
    pub maximizer: PhasePoint,
    pub iterations: usize,
}

/// Projected gradient ascent of the ratio on the unit `H x H` sphere with a
/// backtracking step. Stops after `max_iter` steps or when a step gains less than
/// `rtol` relative.
pub fn maximize_strichartz_ratio(
    phase: &PhasePoint,
    horizon: f64,
    dt: f64,
    max_iter: usize,
    rtol: f64,
) -> StrichartzAscent {
    let unit = |p: &PhasePoint| p.scaled(1.0 / energy_norm_sq(p).sqrt());
    let mut u = unit(phase);
    let (mut phi, mut grad) = strichartz_functional(&u, horizon, dt, true);
    let initial_ratio = phi.cbrt();
    let mut step = 0.5;
    let mut iterations = 0;
    while iterations < max_iter {
        let g = grad.take().expect("gradient requested");
        // Tangential part of grad(Phi^{1/3}) at the unit point u.
        let dphi = g.scaled(phi.powf(-2.0 / 3.0) / 3.0);
        let radial_part: f64 = energy_inner(&dphi, &u);
        let tangent = dphi.add_scaled(&u, -radial_part);
        let tn = energy_norm_sq(&tangent).sqrt();
        if tn == 0.0 {
            break;
        }
        let mut accepted = None;
        while step > 1e-6 {
            let trial = unit(&u.add_scaled(&tangent, step / tn));
            let (p, gr) = strichartz_functional(&trial, horizon, dt, true);
            if p > phi {
                accepted = Some((trial, p, gr));
                break;
            }
            step *= 0.5;
        }
        let Some((trial, p, gr)) = accepted else {
            break;
        };
        iterations += 1;
        let gain = p.cbrt() / phi.cbrt() - 1.0;
        u = trial;
        phi = p;
        grad = gr;
        step = (step * 1.5).min(2.0);
        if gain < rtol {
            break;
        }
    }
    StrichartzAscent {
        initial_ratio,
        ratio: phi.cbrt(),
        maximizer: u,
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::FieldPair;
    use crate::spectral::ScalarField;

    fn datum(grid: &SpectralGrid) -> PhasePoint {
        let g = |x: &[f64], w: f64| (-x.iter().map(|c| c * c).sum::<f64>() / (w * w)).exp();
        let u1 = ScalarField::from_fn(grid, |x| g(x, 1.0));
        let u2 = ScalarField::from_fn(grid, |x| 0.4 * g(x, 1.7));
        let v1 = ScalarField::from_fn(grid, |x| -0.3 * g(x, 1.2));
        let v2 = ScalarField::from_fn(grid, |x| 0.2 * g(x, 0.9));
        PhasePoint::new(FieldPair::new(u1, u2).unwrap(), v1, v2).unwrap()
    }

    #[test]
    fn functional_matches_running_norm() {
        let g = SpectralGrid::radial(256, 16.0).unwrap();
        let d = datum(&g);
        let (phi, _) = strichartz_functional(&d, 5.0, 0.05, false);
        let (_, run) = super::super::free_strichartz(&d, 5.0, 0.05);
        assert!((phi.cbrt() / run.last().unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        for g in [
            SpectralGrid::radial(256, 16.0).unwrap(),
            SpectralGrid::new(1, 128, 12.0).unwrap(),
        ] {
            let d = datum(&g);
            let (_, grad) = strichartz_functional(&d, 3.0, 0.05, true);
            let grad = grad.unwrap();
            let dir = datum(&g).scaled(0.5).add_scaled(&free_dir(&g), 1.0);
            let h = 1e-5;
            let fd = (strichartz_functional(&d.add_scaled(&dir, h), 3.0, 0.05, false).0
                - strichartz_functional(&d.add_scaled(&dir, -h), 3.0, 0.05, false).0)
                / (2.0 * h);
            let an = super::energy_inner(&grad, &dir);
            assert!((fd - an).abs() < 1e-6 * an.abs(), "{fd} {an}");
        }
    }

    fn free_dir(g: &SpectralGrid) -> PhasePoint {
        let s = |x: &[f64]| (-(x[0] - 0.0).powi(2) / 3.0).exp();
        let f = ScalarField::from_fn(g, s);
        PhasePoint::new(
            FieldPair::new(f.scaled(0.3), f.scaled(-0.2)).unwrap(),
            f.scaled(0.1),
            f.scaled(0.5),
        )
        .unwrap()
    }

    #[test]
    fn ascent_increases_ratio() {
        let g = SpectralGrid::radial(256, 16.0).unwrap();
        let a = maximize_strichartz_ratio(&datum(&g), 5.0, 0.05, 10, 1e-4);
        assert!(a.ratio >= a.initial_ratio);
        assert!((strichartz_ratio(&a.maximizer, 5.0, 0.05) - a.ratio).abs() < 1e-12);
    }
}
