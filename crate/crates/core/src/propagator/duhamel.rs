use num_complex::Complex64;

use super::{force_spectra, SpectralPhase, Trajectory};
use crate::error::{Error, Result};
use crate::spectral::SpectralGrid;

fn energy_norm_sq(grid: &SpectralGrid, s: &SpectralPhase) -> f64 {
    let k2 = grid.k_squared();
    let mut acc = 0.0;
    for c in 0..2 {
        for i in 0..grid.len() {
            acc += (1.0 + k2[i]) * s.u[c][i].norm_sqr() + s.v[c][i].norm_sqr();
        }
    }
    acc * grid.cell_weight() / grid.len() as f64
}

/// Energy-weighted mean of `<k>`: the typical temporal frequency of the data.
fn effective_frequency(grid: &SpectralGrid, s: &SpectralPhase) -> f64 {
    let b = grid.bessel_symbol();
    let (mut num, mut den) = (0.0, 0.0);
    for c in 0..2 {
        for i in 0..grid.len() {
            let e = b[i] * b[i] * s.u[c][i].norm_sqr() + s.v[c][i].norm_sqr();
            num += b[i] * e;
            den += e;
        }
    }
    if den > 0.0 {
        num / den
    } else {
        1.0
    }
}

/// Quadrature weights for samples `0..=m` at uniform spacing `h`: composite
/// Simpson, closing with the 3/8 rule on the last three intervals when `m` is odd.
fn simpson_weights(m: usize, h: f64) -> Vec<f64> {
    let mut w = vec![0.0; m + 1];
    match m {
        0 => {}
        1 => {
            w[0] = 0.5 * h;
            w[1] = 0.5 * h;
        }
        _ => {
            let simpson_end = if m.is_multiple_of(2) { m } else { m - 3 };
            let mut i = 0;
            while i + 2 <= simpson_end {
                w[i] += h / 3.0;
                w[i + 1] += 4.0 * h / 3.0;
                w[i + 2] += h / 3.0;
                i += 2;
            }
            if m % 2 == 1 {
                let s = simpson_end;
                for (k, c) in [1.0, 3.0, 3.0, 1.0].iter().enumerate() {
                    w[s + k] += 3.0 * h / 8.0 * c;
                }
            }
        }
    }
    w
}

/// Largest relative Duhamel defect
/// `||S(-t)U(t) - U(0) - int_0^t S(-s)(0, N(U(s))) ds||_{H x H} / ||U(t)||_{H x H}`
/// over `sample_times`, which must coincide with stored snapshot times. `S(t)` is an
/// isometry of `H x H`, so this equals the defect of the forward Duhamel formula.
pub fn duhamel_residual(trajectory: &Trajectory, sample_times: &[f64]) -> Result<f64> {
    let snaps = &trajectory.snapshots;
    let grid = trajectory.grid().clone();
    if snaps.len() < 2 {
        return Err(Error::InsufficientSnapshots {
            spacing: f64::INFINITY,
            limit: 0.0,
        });
    }
    let h = snaps[1].t - snaps[0].t;
    for (i, s) in snaps.iter().enumerate() {
        if (s.t - i as f64 * h).abs() > 1e-9 * h.max(1.0) {
            return Err(Error::Precondition(
                "snapshots are not uniformly spaced".into(),
            ));
        }
    }
    let s0 = SpectralPhase::from_phase(&snaps[0].phase);
    let limit = 0.5 / effective_frequency(&grid, &s0);
    if h > limit {
        return Err(Error::InsufficientSnapshots { spacing: h, limit });
    }
    let pulled: Vec<SpectralPhase> = snaps
        .iter()
        .map(|s| {
            let reps = [
                s.phase.pair().u1().values().to_vec(),
                s.phase.pair().u2().values().to_vec(),
            ];
            let force = force_spectra(&grid, &reps, &trajectory.params);
            let zero = vec![Complex64::default(); grid.len()];
            let mut sp = SpectralPhase {
                grid: grid.clone(),
                u: [zero.clone(), zero],
                v: force,
            };
            sp.free(-s.t);
            sp
        })
        .collect();
    let mut worst: f64 = 0.0;
    for &t in sample_times {
        let m = (t / h).round() as usize;
        if m >= snaps.len() || (snaps[m].t - t).abs() > 1e-9 * h.max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "sample time {t} is not a stored snapshot time"
            )));
        }
        let mut back = SpectralPhase::from_phase(&snaps[m].phase);
        let scale = energy_norm_sq(&grid, &back).sqrt();
        back.free(-snaps[m].t);
        let w = simpson_weights(m, h);
        for c in 0..2 {
            for i in 0..grid.len() {
                let mut iu = Complex64::default();
                let mut iv = Complex64::default();
                for (k, wk) in w.iter().enumerate() {
                    iu += pulled[k].u[c][i] * wk;
                    iv += pulled[k].v[c][i] * wk;
                }
                back.u[c][i] -= s0.u[c][i] + iu;
                back.v[c][i] -= s0.v[c][i] + iv;
            }
        }
        let r = energy_norm_sq(&grid, &back).sqrt();
        let rel = if scale > 0.0 { r / scale } else { r };
        worst = worst.max(rel);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_integrate_cubics_exactly() {
        for m in 1..9usize {
            let h = 0.1;
            let w = simpson_weights(m, h);
            let t = m as f64 * h;
            let approx: f64 = w
                .iter()
                .enumerate()
                .map(|(i, wi)| wi * (i as f64 * h).powi(if m == 1 { 1 } else { 3 }))
                .sum();
            let exact = if m == 1 { t * t / 2.0 } else { t.powi(4) / 4.0 };
            assert!((approx - exact).abs() < 1e-14, "m={m}");
        }
    }
}
