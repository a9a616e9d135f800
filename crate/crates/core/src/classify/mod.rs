//! Payne-Sattinger regions, dichotomy runs, the pull-back scattering proxy and
//! the perturbation response harness.

mod ensemble;

pub use ensemble::{
    dichotomy_ensemble, small_margin_data, write_ensemble_csv, EnsembleDatum, EnsembleRow, Family,
};

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{energy_norm_sq, report, NonlinearityParams, PhasePoint};
use crate::propagator::{
    evolve, free_evolve, l6_norm, running_strichartz, RunStatus, StepPolicy, Trajectory,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    #[serde(rename = "PS_plus")]
    PsPlus,
    #[serde(rename = "PS_minus")]
    PsMinus,
    #[serde(rename = "above_threshold")]
    AboveThreshold,
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Region::PsPlus => "PS_plus",
            Region::PsMinus => "PS_minus",
            Region::AboveThreshold => "above_threshold",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionVerdict {
    pub region: Region,
    #[serde(rename = "E")]
    pub energy: f64,
    #[serde(rename = "K0")]
    pub k0: f64,
    /// `h0 - E`.
    pub margin: f64,
    /// `|K0|` is below `BORDERLINE * ||pair||^2_{H^1 x H^1}`.
    pub borderline: bool,
}

/// Relative band around `K0 = 0` that is flagged, not reclassified.
pub const BORDERLINE: f64 = 1e-10;

fn region_of(energy: f64, k0: f64, h1_sq: f64, h0: f64) -> RegionVerdict {
    let region = if energy < h0 {
        if k0 >= 0.0 {
            Region::PsPlus
        } else {
            Region::PsMinus
        }
    } else {
        Region::AboveThreshold
    };
    RegionVerdict {
        region,
        energy,
        k0,
        margin: h0 - energy,
        borderline: k0.abs() <= BORDERLINE * h1_sq,
    }
}

pub fn classify(phase: &PhasePoint, params: &NonlinearityParams, h0: f64) -> RegionVerdict {
    let r = report(phase, params);
    region_of(r.energy, r.k0, r.h1_norm_sq, h0)
}

/// Radius (about the origin) outside which every field is below
/// `SUPPORT_FLOOR` times its largest value.
pub fn support_radius(phase: &PhasePoint) -> f64 {
    let g = phase.grid();
    let peak = phase
        .fields()
        .iter()
        .map(|f| f.max_abs())
        .fold(0.0, f64::max);
    if peak == 0.0 {
        return 0.0;
    }
    let cut = SUPPORT_FLOOR * peak;
    let mut r: f64 = 0.0;
    for idx in 0..g.len() {
        if phase.fields().iter().any(|f| f.values()[idx].abs() > cut) {
            let p = g.position(idx);
            r = r.max(p[..g.dim()].iter().map(|c| c * c).sum::<f64>().sqrt());
        }
    }
    r
}

pub const SUPPORT_FLOOR: f64 = 1e-6;

/// First time unit-speed radiation leaving the support reaches the box boundary,
/// `L - R`. Later, reflected or wrapped radiation meets outgoing radiation and the
/// pull-back picks up spurious interaction terms.
pub fn wrap_time(phase: &PhasePoint) -> f64 {
    (phase.grid().half_length() - support_radius(phase)).max(0.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub horizon: f64,
    #[serde(default)]
    pub policy: StepPolicy,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            horizon: 30.0,
            policy: StepPolicy::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    GlobalBounded,
    BlowupDetected,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DichotomyReport {
    pub initial: RegionVerdict,
    pub verdict: Verdict,
    pub status: RunStatus,
    pub horizon: f64,
    pub escape_time: Option<f64>,
    pub initial_h1: f64,
    /// Peak of `||U(t)||_{H x H}`.
    pub peak_h1: f64,
    pub strichartz_final: f64,
    /// Every stored record stayed in the initial region.
    pub region_invariant: bool,
    /// `||U(t) - S(t) V(t_end)||_{H x H}` at the stored snapshots (completed runs only).
    pub free_fit_error_series: Vec<(f64, f64)>,
    pub note: Option<String>,
}

/// Evolves a below-threshold datum and reports which side of the dichotomy it lands on.
/// The horizon is capped by [`wrap_time`].
pub fn run_dichotomy(
    phase: &PhasePoint,
    params: &NonlinearityParams,
    h0: f64,
    config: &SimConfig,
) -> Result<DichotomyReport> {
    let initial = classify(phase, params, h0);
    if initial.region == Region::AboveThreshold {
        return Err(Error::Precondition(format!(
            "datum above threshold: E = {} >= h0 = {h0}",
            initial.energy
        )));
    }
    let initial_h1 = energy_norm_sq(phase).sqrt();
    if initial_h1 == 0.0 {
        return Ok(DichotomyReport {
            initial,
            verdict: Verdict::GlobalBounded,
            status: RunStatus::Completed,
            horizon: config.horizon,
            escape_time: None,
            initial_h1,
            peak_h1: 0.0,
            strichartz_final: 0.0,
            region_invariant: true,
            free_fit_error_series: Vec::new(),
            note: None,
        });
    }
    let horizon = config.horizon.min(wrap_time(phase));
    if !(horizon > 0.0) {
        return Err(Error::Precondition(
            "datum fills the box: no time before wrap-around".into(),
        ));
    }
    let traj = evolve(phase, horizon, &config.policy, params)?;
    let region_invariant = traj.records.iter().all(|r| {
        region_of(r.report.energy, r.report.k0, r.report.h1_norm_sq, h0).region == initial.region
    });
    let peak_h1 = traj.peak_energy_norm();
    let mut note = None;
    let verdict = match (traj.status, initial.region) {
        (RunStatus::BlowupDetected, Region::PsMinus) => Verdict::BlowupDetected,
        (RunStatus::Completed, Region::PsPlus)
            if peak_h1 < 2.0 * initial_h1 && region_invariant =>
        {
            Verdict::GlobalBounded
        }
        (RunStatus::Completed, Region::PsPlus) => {
            note = Some(format!(
                "bounded run failed checks: peak ratio {}, invariant {region_invariant}",
                peak_h1 / initial_h1
            ));
            Verdict::Inconclusive
        }
        (RunStatus::ResolutionExhausted, _) => {
            note = Some("spectral tail exceeded the resolution limit".into());
            Verdict::Inconclusive
        }
        (status, region) => {
            note = Some(format!("run ended {status:?} from {region}"));
            Verdict::Inconclusive
        }
    };
    let free_fit_error_series = if traj.status == RunStatus::Completed {
        free_fit_errors(&traj)
    } else {
        Vec::new()
    };
    Ok(DichotomyReport {
        initial,
        verdict,
        status: traj.status,
        horizon,
        escape_time: traj.escape_time,
        initial_h1,
        peak_h1,
        strichartz_final: traj.records.last().map_or(0.0, |r| r.strichartz_running),
        region_invariant,
        free_fit_error_series,
        note,
    })
}

fn distance(a: &PhasePoint, b: &PhasePoint) -> f64 {
    energy_norm_sq(&a.add_scaled(b, -1.0)).sqrt()
}

fn free_fit_errors(traj: &Trajectory) -> Vec<(f64, f64)> {
    let last = traj.last();
    let v_end = free_evolve(&last.phase, -last.t);
    traj.snapshots
        .par_iter()
        .map(|s| (s.t, distance(&s.phase, &free_evolve(&v_end, s.t))))
        .collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScatteringReport {
    /// Window boundaries `t_k` at which the pull-back `V(t_k) = S(-t_k) U(t_k)` was taken.
    pub window_times: Vec<f64>,
    /// `||V(t_{k+1}) - V(t_k)||_{H x H}`.
    pub increments: Vec<f64>,
    pub datum_norm: f64,
    pub free_fit_error: Vec<(f64, f64)>,
}

impl ScatteringReport {
    /// Increments whose window starts in the final `fraction` of the run.
    pub fn final_increments(&self, fraction: f64) -> &[f64] {
        let t_end = self.window_times.last().copied().unwrap_or(0.0);
        let start = t_end * (1.0 - fraction);
        let first = self
            .window_times
            .iter()
            .position(|&t| t >= start - 1e-9)
            .unwrap_or(self.increments.len());
        &self.increments[first.min(self.increments.len())..]
    }

    /// Non-increasing, allowing for a rounding floor of `1e-12 * datum_norm`.
    pub fn monotone_over(&self, fraction: f64) -> bool {
        let floor = 1e-12 * self.datum_norm;
        self.final_increments(fraction)
            .windows(2)
            .all(|w| w[1] <= w[0] + floor)
    }

    pub fn final_relative_increment(&self) -> f64 {
        self.increments.last().copied().unwrap_or(0.0) / self.datum_norm.max(f64::MIN_POSITIVE)
    }
}

/// Cauchy proxy for the existence of the scattering state: pull-backs at window
/// boundaries `0, w, 2w, ...`, taken at the nearest stored snapshot.
pub fn scattering_diagnostic(trajectory: &Trajectory, window: f64) -> Result<ScatteringReport> {
    if trajectory.status != RunStatus::Completed {
        return Err(Error::Precondition(format!(
            "trajectory ended {:?}",
            trajectory.status
        )));
    }
    if !(window > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "window must be positive, got {window}"
        )));
    }
    let snaps = &trajectory.snapshots;
    let spacing = snaps
        .windows(2)
        .map(|w| w[1].t - w[0].t)
        .fold(0.0, f64::max);
    if spacing > 0.5 * window {
        return Err(Error::InsufficientSnapshots {
            spacing,
            limit: 0.5 * window,
        });
    }
    let t_end = trajectory.last().t;
    let count = (t_end / window + 1e-9).floor() as usize;
    let picks: Vec<usize> = (0..=count)
        .map(|k| {
            let target = k as f64 * window;
            (0..snaps.len())
                .min_by(|&a, &b| {
                    (snaps[a].t - target)
                        .abs()
                        .total_cmp(&(snaps[b].t - target).abs())
                })
                .unwrap()
        })
        .collect();
    let pulled: Vec<PhasePoint> = picks
        .par_iter()
        .map(|&i| free_evolve(&snaps[i].phase, -snaps[i].t))
        .collect();
    let increments = pulled.windows(2).map(|w| distance(&w[1], &w[0])).collect();
    Ok(ScatteringReport {
        window_times: picks.iter().map(|&i| snaps[i].t).collect(),
        increments,
        datum_norm: energy_norm_sq(trajectory.initial()).sqrt(),
        free_fit_error: free_fit_errors(trajectory),
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PerturbationRow {
    pub delta: f64,
    pub direction: usize,
    /// `sup_t ||U_delta(t) - U(t)||_{H x H}` over shared snapshot times.
    pub sup_distance: f64,
    /// Discrete `L^3_t L^6_x` norm of the difference.
    pub strichartz_distance: f64,
    /// The perturbed run left the base region or failed to complete.
    pub hypothesis_violated: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PerturbationReport {
    pub rows: Vec<PerturbationRow>,
    /// Least-squares slope of `log sup_distance` against `log delta`.
    pub exponent_sup: Option<f64>,
    pub exponent_strichartz: Option<f64>,
}

/// Evolves `phase + delta * d / ||d||` for each size and direction alongside the base
/// run and fits the response exponent. The horizon is capped by [`wrap_time`].
pub fn perturbation_test(
    phase: &PhasePoint,
    params: &NonlinearityParams,
    h0: f64,
    deltas: &[f64],
    directions: &[PhasePoint],
    config: &SimConfig,
) -> Result<PerturbationReport> {
    let horizon = config.horizon.min(wrap_time(phase));
    let base = evolve(phase, horizon, &config.policy, params)?;
    if base.status != RunStatus::Completed {
        return Err(Error::Precondition(format!(
            "base run ended {:?}",
            base.status
        )));
    }
    let base_region = classify(phase, params, h0).region;
    let jobs: Vec<(f64, usize)> = deltas
        .iter()
        .flat_map(|&d| (0..directions.len()).map(move |k| (d, k)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(delta, k)| -> Result<PerturbationRow> {
            let dir = &directions[k];
            let n = energy_norm_sq(dir).sqrt();
            if !(n > 0.0) {
                return Err(Error::InvalidArgument(format!("direction {k} is zero")));
            }
            let data = phase.add_scaled(dir, delta / n);
            let region = classify(&data, params, h0).region;
            let run = evolve(&data, horizon, &config.policy, params)?;
            let violated = region != base_region || run.status != RunStatus::Completed;
            let (sup_distance, strichartz_distance) = if violated {
                (f64::NAN, f64::NAN)
            } else {
                trajectory_distance(&base, &run)?
            };
            Ok(PerturbationRow {
                delta,
                direction: k,
                sup_distance,
                strichartz_distance,
                hypothesis_violated: violated,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let fit = |f: fn(&PerturbationRow) -> f64| {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| !r.hypothesis_violated && r.delta > 0.0 && f(r) > 0.0)
            .map(|r| (r.delta.ln(), f(r).ln()))
            .collect();
        log_slope(&pts)
    };
    Ok(PerturbationReport {
        exponent_sup: fit(|r| r.sup_distance),
        exponent_strichartz: fit(|r| r.strichartz_distance),
        rows,
    })
}

fn trajectory_distance(a: &Trajectory, b: &Trajectory) -> Result<(f64, f64)> {
    let mut times = Vec::new();
    let mut l6 = Vec::new();
    let mut sup: f64 = 0.0;
    let mut j = 0;
    for s in &a.snapshots {
        while j < b.snapshots.len() && b.snapshots[j].t < s.t - 1e-9 {
            j += 1;
        }
        let Some(o) = b.snapshots.get(j) else { break };
        if (o.t - s.t).abs() > 1e-9 {
            continue;
        }
        let diff = o.phase.add_scaled(&s.phase, -1.0);
        sup = sup.max(energy_norm_sq(&diff).sqrt());
        times.push(s.t);
        l6.push(l6_norm(&diff));
    }
    if times.len() < 2 {
        return Err(Error::InsufficientSnapshots {
            spacing: f64::INFINITY,
            limit: a.last().t,
        });
    }
    Ok((sup, *running_strichartz(&times, &l6).last().unwrap()))
}

/// Ordinary least-squares slope; `None` with fewer than two distinct abscissae.
pub fn log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::FieldPair;
    use crate::spectral::{ScalarField, SpectralGrid};

    fn bump(g: &SpectralGrid, a: f64) -> PhasePoint {
        let u = ScalarField::from_fn(g, |x| a * (-x[0] * x[0]).exp());
        PhasePoint::at_rest(FieldPair::new(u, ScalarField::zeros(g)).unwrap())
    }

    #[test]
    fn zero_datum_is_plus_and_bounded() {
        let g = SpectralGrid::radial(256, 20.0).unwrap();
        let p = NonlinearityParams::default();
        let z = PhasePoint::zeros(&g);
        let v = classify(&z, &p, 1.0);
        assert_eq!((v.region, v.energy, v.k0), (Region::PsPlus, 0.0, 0.0));
        assert!(v.borderline);
        let r = run_dichotomy(&z, &p, 1.0, &SimConfig::default()).unwrap();
        assert_eq!(r.verdict, Verdict::GlobalBounded);
    }

    #[test]
    fn above_threshold_is_refused() {
        let g = SpectralGrid::radial(256, 20.0).unwrap();
        let p = NonlinearityParams::default();
        let d = bump(&g, 1.0);
        assert_eq!(classify(&d, &p, 1e-3).region, Region::AboveThreshold);
        assert!(matches!(
            run_dichotomy(&d, &p, 1e-3, &SimConfig::default()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn free_pullback_is_constant() {
        let g = SpectralGrid::radial(512, 40.0).unwrap();
        let d = bump(&g, 0.5);
        let traj = evolve(&d, 8.0, &StepPolicy::default(), &NonlinearityParams::free()).unwrap();
        let rep = scattering_diagnostic(&traj, 1.0).unwrap();
        assert_eq!(rep.increments.len(), 8);
        assert!(
            rep.increments.iter().all(|&x| x <= 1e-10),
            "{:?}",
            rep.increments
        );
    }

    #[test]
    fn diagnostic_refuses_blowup() {
        let g = SpectralGrid::radial(512, 24.0).unwrap();
        let p = NonlinearityParams::default();
        let traj = evolve(&bump(&g, 6.0), 5.0, &StepPolicy::default(), &p).unwrap();
        assert_eq!(traj.status, RunStatus::BlowupDetected);
        assert!(matches!(
            scattering_diagnostic(&traj, 1.0),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn zero_perturbation_has_zero_distance() {
        let g = SpectralGrid::radial(256, 30.0).unwrap();
        let p = NonlinearityParams::default();
        let d = bump(&g, 0.5);
        let cfg = SimConfig {
            horizon: 4.0,
            ..Default::default()
        };
        let rep = perturbation_test(&d, &p, 100.0, &[0.0], &[bump(&g, 1.0)], &cfg).unwrap();
        assert_eq!(rep.rows[0].sup_distance, 0.0);
        assert_eq!(rep.exponent_sup, None);
    }

    #[test]
    fn slope_fit() {
        let pts: Vec<(f64, f64)> = (0..5).map(|i| (i as f64, 2.0 * i as f64 + 1.0)).collect();
        assert!((log_slope(&pts).unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(log_slope(&[(1.0, 1.0)]), None);
    }
}
