use serde::{Deserialize, Serialize};

use super::Trajectory;
use crate::error::{Error, Result};
use crate::functionals::{localized_virial, momentum, PhasePoint};
use crate::spectral::partition_bump;

fn cartesian_only(phase: &PhasePoint, center: &[f64]) -> Result<()> {
    if phase.grid().is_radial() {
        return Err(Error::Geometry("radial"));
    }
    if center.len() != phase.grid().dim() {
        return Err(Error::InvalidArgument(
            "center has the wrong dimension".into(),
        ));
    }
    Ok(())
}

/// `sum_i <chi_R v_i, (x - c) . grad u_i + (d/2) u_i>`; its time derivative is
/// `-K2` while the solution stays inside the cutoff.
pub fn k2_virial_moment(phase: &PhasePoint, radius: f64, center: &[f64]) -> Result<f64> {
    cartesian_only(phase, center)?;
    let grid = phase.grid();
    let d = grid.dim();
    let mut acc = 0.0;
    for (u, v) in phase
        .pair()
        .components()
        .into_iter()
        .zip(phase.velocities())
    {
        let grads: Vec<_> = (0..d).map(|a| u.derivative(a)).collect::<Result<_>>()?;
        for i in 0..grid.len() {
            let x = grid.position(i);
            let r = (0..d)
                .map(|a| (x[a] - center[a]).powi(2))
                .sum::<f64>()
                .sqrt();
            let chi = partition_bump(r / radius);
            if chi == 0.0 {
                continue;
            }
            let mut gen = 0.5 * d as f64 * u.values()[i];
            for a in 0..d {
                gen += (x[a] - center[a]) * grads[a].values()[i];
            }
            acc += chi * v.values()[i] * gen;
        }
    }
    Ok(acc * grid.cell_weight())
}

/// `1/2 int_{|x - c| >= R} sum_i (|grad u_i|^2 + u_i^2 + v_i^2)`.
pub fn exterior_free_energy(phase: &PhasePoint, radius: f64, center: &[f64]) -> Result<f64> {
    cartesian_only(phase, center)?;
    let grid = phase.grid();
    let d = grid.dim();
    let mut acc = 0.0;
    for (u, v) in phase
        .pair()
        .components()
        .into_iter()
        .zip(phase.velocities())
    {
        let grads: Vec<_> = (0..d).map(|a| u.derivative(a)).collect::<Result<_>>()?;
        for i in 0..grid.len() {
            let x = grid.position(i);
            let r = (0..d)
                .map(|a| (x[a] - center[a]).powi(2))
                .sum::<f64>()
                .sqrt();
            if r < radius {
                continue;
            }
            let mut e = u.values()[i].powi(2) + v.values()[i].powi(2);
            for g in &grads {
                e += g.values()[i].powi(2);
            }
            acc += 0.5 * e;
        }
    }
    Ok(acc * grid.cell_weight())
}

/// One interior sample of the localized-virial balance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VirialSample {
    pub t: f64,
    /// Centered difference of `X_R` between neighbouring snapshots.
    pub dxdt: Vec<f64>,
    pub momentum: Vec<f64>,
    pub exterior: f64,
}

impl VirialSample {
    /// `|dX_R/dt + P|`, the part of the derivative controlled by the exterior energy.
    pub fn defect(&self) -> f64 {
        self.dxdt
            .iter()
            .zip(&self.momentum)
            .map(|(a, b)| (a + b).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// `dX_R/dt` by centered differences over the stored snapshots, with the momentum
/// and exterior free energy at each interior snapshot.
pub fn virial_derivative_samples(
    trajectory: &Trajectory,
    radius: f64,
    center: &[f64],
) -> Result<Vec<VirialSample>> {
    let snaps = &trajectory.snapshots;
    let params = &trajectory.params;
    let moments: Vec<Vec<f64>> = snaps
        .iter()
        .map(|s| localized_virial(&s.phase, params, radius, center))
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for i in 1..snaps.len().saturating_sub(1) {
        let dt = snaps[i + 1].t - snaps[i - 1].t;
        let dxdt = moments[i + 1]
            .iter()
            .zip(&moments[i - 1])
            .map(|(a, b)| (a - b) / dt)
            .collect();
        out.push(VirialSample {
            t: snaps[i].t,
            dxdt,
            momentum: momentum(&snaps[i].phase),
            exterior: exterior_free_energy(&snaps[i].phase, radius, center)?,
        });
    }
    Ok(out)
}
