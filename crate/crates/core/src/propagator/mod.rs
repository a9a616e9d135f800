//! Exact free Klein-Gordon flow and the Strang split-step integrator.

mod duhamel;
mod strichartz;
mod virial;

pub use duhamel::duhamel_residual;
pub use strichartz::{
    maximize_strichartz_ratio, strichartz_functional, strichartz_ratio, StrichartzAscent,
};
pub use virial::{exterior_free_energy, k2_virial_moment, virial_derivative_samples, VirialSample};

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{FunctionalReport, NonlinearityParams, PhasePoint};
use crate::spectral::{ScalarField, SpectralGrid};

/// Time-step control for [`evolve`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StepPolicy {
    pub dt_base: f64,
    pub dt_min: f64,
    /// The step shrinks as `dt_base * min(1, amplitude_guard / ||u||_inf)`.
    pub amplitude_guard: f64,
    pub snapshot_stride: usize,
}

impl Default for StepPolicy {
    fn default() -> Self {
        Self {
            dt_base: 1e-2,
            dt_min: 1e-6,
            amplitude_guard: 4.0,
            snapshot_stride: 10,
        }
    }
}

impl StepPolicy {
    pub fn validate(&self) -> Result<()> {
        let ok = self.dt_base > 0.0
            && self.dt_min > 0.0
            && self.dt_min <= self.dt_base
            && self.amplitude_guard > 0.0
            && self.snapshot_stride > 0;
        if !ok {
            return Err(Error::InvalidArgument(format!(
                "invalid step policy {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Running,
    Completed,
    BlowupDetected,
    ResolutionExhausted,
}

/// Diagnostics at one time level.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiagnosticRecord {
    pub t: f64,
    pub report: FunctionalReport,
    /// `||U||_{H x H}`.
    pub energy_norm: f64,
    pub linf: f64,
    /// `||U||_{L^6 x L^6}` (Euclidean combination of the two components).
    pub l6: f64,
    pub strichartz_running: f64,
    /// Fraction of `||U||^2_{H x H}` in the outer third of the spectrum.
    pub spectral_tail: f64,
}

#[derive(Clone, Debug)]
pub struct StoredState {
    pub t: f64,
    pub phase: PhasePoint,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub params: NonlinearityParams,
    pub records: Vec<DiagnosticRecord>,
    pub snapshots: Vec<StoredState>,
    pub status: RunStatus,
    /// Time at which the norm-escape or step-floor criterion fired.
    pub escape_time: Option<f64>,
    /// `max_t |E(t) - E(0)| / |E(0)|` (absolute when `E(0) = 0`), set on completion.
    pub max_energy_drift: Option<f64>,
}

impl Trajectory {
    pub fn grid(&self) -> &SpectralGrid {
        self.snapshots[0].phase.grid()
    }

    pub fn initial(&self) -> &PhasePoint {
        &self.snapshots[0].phase
    }

    pub fn last(&self) -> &StoredState {
        self.snapshots
            .last()
            .expect("trajectory has at least one snapshot")
    }

    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    pub fn peak_energy_norm(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.energy_norm)
            .fold(0.0, f64::max)
    }

    /// Largest absolute drift of any momentum component.
    pub fn max_momentum_drift(&self) -> f64 {
        let p0 = &self.records[0].report.momentum;
        self.records
            .iter()
            .flat_map(|r| r.report.momentum.iter().zip(p0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max)
    }

    /// Writes `t, E, P1..Pd, K0, K2, H1sq, Linf, strichartz_running`.
    pub fn write_csv(&self, w: &mut impl Write, comment: Option<&str>) -> Result<()> {
        let d = self.records.first().map_or(0, |r| r.report.momentum.len());
        if let Some(c) = comment {
            writeln!(w, "# {c}")?;
        }
        let mut header = vec!["t".to_string(), "E".into()];
        header.extend((1..=d).map(|j| format!("P{j}")));
        header.extend(["K0", "K2", "H1sq", "Linf", "strichartz_running"].map(String::from));
        writeln!(w, "{}", header.join(","))?;
        for r in &self.records {
            let mut row = vec![r.t, r.report.energy];
            row.extend(&r.report.momentum);
            row.extend([
                r.report.k0,
                r.report.k2,
                r.report.h1_norm_sq,
                r.linf,
                r.strichartz_running,
            ]);
            writeln!(
                w,
                "{}",
                row.iter()
                    .map(|v| fmt_sig(*v))
                    .collect::<Vec<_>>()
                    .join(",")
            )?;
        }
        Ok(())
    }
}

/// Ten significant digits, scientific notation.
pub fn fmt_sig(v: f64) -> String {
    format!("{v:.9e}")
}

/// Phase point held as Fourier coefficients.
#[derive(Clone)]
pub(crate) struct SpectralPhase {
    pub grid: SpectralGrid,
    pub u: [Vec<Complex64>; 2],
    pub v: [Vec<Complex64>; 2],
}

impl SpectralPhase {
    pub fn from_phase(phase: &PhasePoint) -> Self {
        let [u1, v1, u2, v2] = phase.fields().map(|f| f.spectrum());
        Self {
            grid: phase.grid().clone(),
            u: [u1, u2],
            v: [v1, v2],
        }
    }

    pub fn to_phase(&self) -> PhasePoint {
        let g = &self.grid;
        let f = |s: &Vec<Complex64>| ScalarField::from_spectrum(g, s.clone());
        PhasePoint::from_fields([f(&self.u[0]), f(&self.v[0]), f(&self.u[1]), f(&self.v[1])])
            .expect("same grid")
    }

    /// Exact free flow over `t`.
    pub fn free(&mut self, t: f64) {
        let table = FreeTable::new(&self.grid, t);
        self.free_with(&table);
    }

    fn free_with(&mut self, table: &FreeTable) {
        for c in 0..2 {
            for i in 0..table.cos.len() {
                let (ca, sa, w) = (table.cos[i], table.sin[i], table.omega[i]);
                let u = self.u[c][i];
                let v = self.v[c][i];
                self.u[c][i] = u * ca + v * (sa / w);
                self.v[c][i] = v * ca - u * (w * sa);
            }
        }
    }

    /// Stored-representation samples of `u1, u2`.
    pub fn positions(&self) -> [Vec<f64>; 2] {
        [
            self.grid.inverse_real(self.u[0].clone()),
            self.grid.inverse_real(self.u[1].clone()),
        ]
    }

    /// Exact flow of `u' = 0, v' = N(u)` over `dt` with 2/3 truncation of `N(u)`.
    pub fn kick(&mut self, dt: f64, params: &NonlinearityParams) {
        let reps = self.positions();
        let force = force_spectra(&self.grid, &reps, params);
        for c in 0..2 {
            for (v, f) in self.v[c].iter_mut().zip(&force[c]) {
                *v += f * dt;
            }
        }
    }
}

/// Dealiased spectra of the nonlinearity evaluated at stored-representation samples.
pub(crate) fn force_spectra(
    grid: &SpectralGrid,
    reps: &[Vec<f64>; 2],
    params: &NonlinearityParams,
) -> [Vec<Complex64>; 2] {
    let n = grid.len();
    let mut f1 = vec![0.0; n];
    let mut f2 = vec![0.0; n];
    if grid.is_radial() {
        for (i, x) in grid.coords().iter().enumerate() {
            if *x == 0.0 {
                continue;
            }
            let (a, b) = params.force(reps[0][i] / x, reps[1][i] / x);
            f1[i] = x * a;
            f2[i] = x * b;
        }
        grid.make_odd(&mut f1);
        grid.make_odd(&mut f2);
    } else {
        for i in 0..n {
            let (a, b) = params.force(reps[0][i], reps[1][i]);
            f1[i] = a;
            f2[i] = b;
        }
    }
    let mask = grid.dealias_mask();
    [f1, f2].map(|f| {
        let mut s = grid.forward(&f);
        for (c, keep) in s.iter_mut().zip(mask) {
            if !keep {
                *c = Complex64::default();
            }
        }
        s
    })
}

struct FreeTable {
    tau: f64,
    cos: Vec<f64>,
    sin: Vec<f64>,
    omega: Vec<f64>,
}

impl FreeTable {
    fn new(grid: &SpectralGrid, tau: f64) -> Self {
        let omega = grid.bessel_symbol().to_vec();
        let cos = omega.iter().map(|w| (w * tau).cos()).collect();
        let sin = omega.iter().map(|w| (w * tau).sin()).collect();
        Self {
            tau,
            cos,
            sin,
            omega,
        }
    }
}

/// `S(t)` applied to a phase point.
pub fn free_evolve(phase: &PhasePoint, t: f64) -> PhasePoint {
    let mut s = SpectralPhase::from_phase(phase);
    s.free(t);
    s.to_phase()
}

/// `v_i += dt N_i(u)`, with `N` truncated by the 2/3 rule.
pub fn nonlinear_kick(phase: &PhasePoint, dt: f64, params: &NonlinearityParams) -> PhasePoint {
    let mut s = SpectralPhase::from_phase(phase);
    s.kick(dt, params);
    let g = phase.grid();
    PhasePoint::from_fields([
        phase.pair().u1().clone(),
        ScalarField::from_spectrum(g, s.v[0].clone()),
        phase.pair().u2().clone(),
        ScalarField::from_spectrum(g, s.v[1].clone()),
    ])
    .expect("same grid")
}

/// Flips the velocities; evolving the result forward runs the original backward.
pub fn time_reversed(phase: &PhasePoint) -> PhasePoint {
    let [u1, v1, u2, v2] = phase.fields().map(|f| f.clone());
    PhasePoint::from_fields([u1, v1.scaled(-1.0), u2, v2.scaled(-1.0)]).expect("same grid")
}

struct Diagnostics {
    report: FunctionalReport,
    energy_norm: f64,
    linf: f64,
    l6: f64,
    tail: f64,
}

fn diagnostics(
    state: &SpectralPhase,
    reps: &[Vec<f64>; 2],
    params: &NonlinearityParams,
) -> Diagnostics {
    let grid = &state.grid;
    let k2 = grid.k_squared();
    let w = grid.cell_weight() / grid.len() as f64;
    let resolved = grid.dealias_mask();
    let (mut grad, mut mass, mut kin, mut total, mut tail) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for c in 0..2 {
        for i in 0..grid.len() {
            let a = state.u[c][i].norm_sqr();
            let b = state.v[c][i].norm_sqr();
            grad += k2[i] * a;
            mass += a;
            kin += b;
            let e = (1.0 + k2[i]) * a + b;
            total += e;
            if !resolved[i] {
                tail += e;
            }
        }
    }
    let (grad, mass, kin) = (grad * w, mass * w, kin * w);
    let phys: Vec<Vec<f64>> = if grid.is_radial() {
        let o = grid.origin_index();
        (0..2)
            .map(|c| {
                let mut p: Vec<f64> = grid
                    .coords()
                    .iter()
                    .zip(&reps[c])
                    .map(|(x, r)| if *x == 0.0 { 0.0 } else { r / x })
                    .collect();
                p[o] = grid.origin_slope(&state.u[c]);
                p
            })
            .collect()
    } else {
        vec![reps[0].clone(), reps[1].clone()]
    };
    let mut q = vec![0.0; grid.len()];
    let mut s6 = [vec![0.0; grid.len()], vec![0.0; grid.len()]];
    let mut linf: f64 = 0.0;
    for i in 0..grid.len() {
        let (a, b) = (phys[0][i], phys[1][i]);
        q[i] = params.quartic(a, b);
        s6[0][i] = a.powi(6);
        s6[1][i] = b.powi(6);
        linf = linf.max(a.abs()).max(b.abs());
    }
    let quartic = grid.integrate(&q);
    let l6 =
        (grid.integrate(&s6[0]).powf(1.0 / 3.0) + grid.integrate(&s6[1]).powf(1.0 / 3.0)).sqrt();
    let d = grid.space_dim() as f64;
    let h1 = grad + mass;
    let j = 0.5 * h1 - 0.25 * quartic;
    let k0 = h1 - quartic;
    let k2v = grad - 0.25 * d * quartic;
    let momentum = spectral_momentum(state);
    Diagnostics {
        report: FunctionalReport {
            energy: j + 0.5 * kin,
            j,
            k0,
            k2: k2v,
            g0: j - 0.25 * k0,
            g2: j - k2v / 3.0,
            momentum,
            h1_norm_sq: h1,
        },
        energy_norm: (h1 + kin).sqrt(),
        linf,
        l6,
        tail: if total > 0.0 { tail / total } else { 0.0 },
    }
}

fn spectral_momentum(state: &SpectralPhase) -> Vec<f64> {
    let grid = &state.grid;
    if grid.is_radial() {
        return vec![0.0; 3];
    }
    let w = grid.cell_weight() / grid.len() as f64;
    let mut p = vec![0.0; grid.dim()];
    for c in 0..2 {
        for i in 0..grid.len() {
            let k = grid.derivative_wavevector(i);
            // Re(conj(v) i k u) = -k Im(conj(v) u)
            let im = (state.v[c][i].conj() * state.u[c][i]).im;
            for (a, pa) in p.iter_mut().enumerate() {
                *pa -= k[a] * im * w;
            }
        }
    }
    p
}

/// Blow-up is declared once `||U||_{H x H}` exceeds this multiple of its initial value.
pub const ESCAPE_FACTOR: f64 = 10.0;
/// Spectral-tail fraction above which the run stops as under-resolved.
pub const TAIL_LIMIT: f64 = 1e-3;

/// Integrates the system on `[0, t_final]` with Strang splitting
/// (half free step, exact kick, half free step).
pub fn evolve(
    phase: &PhasePoint,
    t_final: f64,
    policy: &StepPolicy,
    params: &NonlinearityParams,
) -> Result<Trajectory> {
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "final time must be positive, got {t_final}"
        )));
    }
    policy.validate()?;
    if !phase.is_finite() {
        return Err(Error::NonFinite("initial data"));
    }
    let mut state = SpectralPhase::from_phase(phase);
    let reps = [
        phase.pair().u1().values().to_vec(),
        phase.pair().u2().values().to_vec(),
    ];
    let d0 = diagnostics(&state, &reps, params);
    let norm0 = d0.energy_norm;
    let e0 = d0.report.energy;
    let mut traj = Trajectory {
        params: *params,
        records: vec![record(0.0, d0, 0.0)],
        snapshots: vec![StoredState {
            t: 0.0,
            phase: phase.clone(),
        }],
        status: RunStatus::Running,
        escape_time: None,
        max_energy_drift: None,
    };
    let steps = (t_final / policy.dt_base).ceil().max(1.0);
    let dt_nominal = t_final / steps;
    let mut table: Option<FreeTable> = None;
    let mut t = 0.0;
    let mut step = 0usize;
    let mut strich_cubed = 0.0;
    let end_tol = 1e-12 * t_final;
    while t < t_final - end_tol {
        let prev = traj.records.last().unwrap();
        let guard = if prev.linf > 0.0 {
            (policy.amplitude_guard / prev.linf).min(1.0)
        } else {
            1.0
        };
        let mut dt = dt_nominal * guard;
        if dt < policy.dt_min {
            traj.status = RunStatus::BlowupDetected;
            traj.escape_time = Some(t);
            break;
        }
        if t + dt > t_final - end_tol {
            dt = t_final - t;
        }
        let half = 0.5 * dt;
        if table.as_ref().is_none_or(|tb| tb.tau != half) {
            table = Some(FreeTable::new(&state.grid, half));
        }
        let tb = table.as_ref().unwrap();
        state.free_with(tb);
        state.kick(dt, params);
        state.free_with(tb);
        step += 1;
        t = if guard == 1.0 && dt == dt_nominal {
            step as f64 * dt_nominal
        } else {
            t + dt
        };
        let reps = state.positions();
        let d = diagnostics(&state, &reps, params);
        let finite = d.energy_norm.is_finite() && d.linf.is_finite();
        if !finite {
            traj.status = RunStatus::BlowupDetected;
            traj.escape_time = Some(t);
            break;
        }
        let l6_prev = prev.l6;
        strich_cubed += 0.5 * dt * (l6_prev.powi(3) + d.l6.powi(3));
        let escaped = norm0 > 0.0 && d.energy_norm > ESCAPE_FACTOR * norm0;
        let tail = d.tail;
        traj.records.push(record(t, d, strich_cubed.cbrt()));
        if escaped {
            traj.status = RunStatus::BlowupDetected;
            traj.escape_time = Some(t);
            traj.snapshots.push(StoredState {
                t,
                phase: state.to_phase(),
            });
            break;
        }
        if tail > TAIL_LIMIT {
            traj.status = RunStatus::ResolutionExhausted;
            traj.snapshots.push(StoredState {
                t,
                phase: state.to_phase(),
            });
            break;
        }
        if step.is_multiple_of(policy.snapshot_stride) || t >= t_final - end_tol {
            traj.snapshots.push(StoredState {
                t,
                phase: state.to_phase(),
            });
        }
    }
    if traj.status == RunStatus::Running {
        traj.status = RunStatus::Completed;
        let scale = if e0 != 0.0 { e0.abs() } else { 1.0 };
        let drift = traj
            .records
            .iter()
            .map(|r| (r.report.energy - e0).abs() / scale)
            .fold(0.0, f64::max);
        traj.max_energy_drift = Some(drift);
    }
    Ok(traj)
}

fn record(t: f64, d: Diagnostics, strichartz: f64) -> DiagnosticRecord {
    DiagnosticRecord {
        t,
        report: d.report,
        energy_norm: d.energy_norm,
        linf: d.linf,
        l6: d.l6,
        strichartz_running: strichartz,
        spectral_tail: d.tail,
    }
}

/// Running `(int_0^t ||U||^3_{L^6 x L^6} ds)^{1/3}` by the trapezoid rule on the records.
pub fn strichartz_accumulator(trajectory: &Trajectory) -> Vec<f64> {
    running_strichartz(
        &trajectory.times(),
        &trajectory.records.iter().map(|r| r.l6).collect::<Vec<_>>(),
    )
}

pub(crate) fn running_strichartz(times: &[f64], l6: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for i in 0..times.len() {
        if i > 0 {
            acc += 0.5 * (times[i] - times[i - 1]) * (l6[i - 1].powi(3) + l6[i].powi(3));
        }
        out.push(acc.cbrt());
    }
    out
}

/// `||U||_{L^6 x L^6}` of a phase point.
pub fn l6_norm(phase: &PhasePoint) -> f64 {
    let g = phase.grid();
    let mut total = 0.0;
    for u in phase.pair().components() {
        let p: Vec<f64> = u.physical().iter().map(|v| v.powi(6)).collect();
        total += g.integrate(&p).powf(1.0 / 3.0);
    }
    total.sqrt()
}

/// Free-flow `||S(t) U||_{L^3_t L^6_x}` on `[0, horizon]` sampled every `dt`, plus
/// the running series at the sample times.
pub fn free_strichartz(phase: &PhasePoint, horizon: f64, dt: f64) -> (Vec<f64>, Vec<f64>) {
    let steps = (horizon / dt).ceil().max(1.0) as usize;
    let h = horizon / steps as f64;
    let mut state = SpectralPhase::from_phase(phase);
    let table = FreeTable::new(&state.grid, h);
    let mut times = Vec::with_capacity(steps + 1);
    let mut norms = Vec::with_capacity(steps + 1);
    for s in 0..=steps {
        if s > 0 {
            state.free_with(&table);
        }
        times.push(s as f64 * h);
        norms.push(l6_norm(&state.to_phase()));
    }
    let run = running_strichartz(&times, &norms);
    (times, run)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::{energy, FieldPair};
    use std::f64::consts::PI;

    fn bump_phase(grid: &SpectralGrid, amp: f64) -> PhasePoint {
        let u1 = ScalarField::from_fn(grid, |x| {
            amp * (-(x.iter().map(|c| c * c).sum::<f64>())).exp()
        });
        let u2 = ScalarField::from_fn(grid, |x| {
            0.5 * amp * (-(x.iter().map(|c| (c - 0.3).powi(2)).sum::<f64>()) / 2.0).exp()
        });
        let v1 = ScalarField::from_fn(grid, |x| {
            0.2 * amp * x[0] * (-(x.iter().map(|c| c * c).sum::<f64>())).exp()
        });
        PhasePoint::new(
            FieldPair::new(u1, u2).unwrap(),
            v1,
            ScalarField::zeros(grid),
        )
        .unwrap()
    }

    #[test]
    fn free_single_mode() {
        let g = SpectralGrid::new(1, 32, PI).unwrap();
        let k0 = 3.0;
        let u = ScalarField::from_fn(&g, |x| (k0 * x[0]).cos());
        let ph = PhasePoint::at_rest(FieldPair::new(u, ScalarField::zeros(&g)).unwrap());
        let t = 1.7;
        let out = free_evolve(&ph, t);
        let w = (1.0f64 + k0 * k0).sqrt();
        let eu = ScalarField::from_fn(&g, |x| (w * t).cos() * (k0 * x[0]).cos());
        let ev = ScalarField::from_fn(&g, |x| -w * (w * t).sin() * (k0 * x[0]).cos());
        assert!(out.pair().u1().max_abs_diff(&eu) < 1e-12);
        assert!(out.v1().max_abs_diff(&ev) < 1e-12);
    }

    #[test]
    fn free_group_law_and_identity() {
        let g = SpectralGrid::new(2, 32, 6.0).unwrap();
        let ph = bump_phase(&g, 1.0);
        let id = free_evolve(&ph, 0.0);
        assert!(id.pair().u1().max_abs_diff(ph.pair().u1()) < 1e-14);
        let a = free_evolve(&free_evolve(&ph, 0.8), 1.3);
        let b = free_evolve(&ph, 2.1);
        for (x, y) in a.fields().iter().zip(b.fields()) {
            assert!(x.max_abs_diff(y) < 1e-12);
        }
    }

    #[test]
    fn kick_on_constants() {
        let g = SpectralGrid::new(1, 16, 2.0).unwrap();
        let p = NonlinearityParams::new(0.5, 1.0, 2.0).unwrap();
        let (a, b) = (0.7, -0.4);
        let ph = PhasePoint::at_rest(
            FieldPair::new(
                ScalarField::from_fn(&g, |_| a),
                ScalarField::from_fn(&g, |_| b),
            )
            .unwrap(),
        );
        let dt = 0.3;
        let out = nonlinear_kick(&ph, dt, &p);
        let e1 = dt * (a * a * a + 0.5 * b * b * a);
        let e2 = dt * (2.0 * b * b * b + 0.5 * a * a * b);
        assert!(out.v1().values().iter().all(|v| (v - e1).abs() < 1e-14));
        assert!(out.v2().values().iter().all(|v| (v - e2).abs() < 1e-14));
        assert!(out.pair().u1().max_abs_diff(ph.pair().u1()) == 0.0);
        let same = nonlinear_kick(&ph, 0.0, &p);
        assert!(same.v1().max_abs() == 0.0);
    }

    #[test]
    fn zero_data_stays_zero() {
        let g = SpectralGrid::new(1, 64, 10.0).unwrap();
        let tr = evolve(
            &PhasePoint::zeros(&g),
            1.0,
            &StepPolicy::default(),
            &NonlinearityParams::default(),
        )
        .unwrap();
        assert_eq!(tr.status, RunStatus::Completed);
        assert!(tr
            .records
            .iter()
            .all(|r| r.report.energy == 0.0 && r.strichartz_running == 0.0));
    }

    #[test]
    fn energy_error_is_second_order() {
        let g = SpectralGrid::new(1, 256, 20.0).unwrap();
        let p = NonlinearityParams::with_beta(1.0).unwrap();
        let ph = bump_phase(&g, 0.3);
        let tr = evolve(&ph, 2.0, &StepPolicy::default(), &p).unwrap();
        let fine = evolve(
            &ph,
            2.0,
            &StepPolicy {
                dt_base: 5e-3,
                ..Default::default()
            },
            &p,
        )
        .unwrap();
        assert_eq!(tr.status, RunStatus::Completed);
        let ratio = tr.max_energy_drift.unwrap() / fine.max_energy_drift.unwrap();
        assert!((3.5..4.5).contains(&ratio), "{ratio}");
        assert!((tr.records[0].report.energy - energy(&ph, &p)).abs() < 1e-12);
        assert!((tr.last().t - 2.0).abs() < 1e-12);
        assert_eq!(tr.snapshots.len(), 21);
    }

    #[test]
    fn strichartz_of_constant_profile() {
        let times: Vec<f64> = (0..=10).map(|i| i as f64 * 0.3).collect();
        let run = running_strichartz(&times, &[2.0; 11]);
        assert!((run[10] - 3.0f64.cbrt() * 2.0).abs() < 1e-12);
        assert!(run.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn csv_layout() {
        let g = SpectralGrid::new(2, 16, 5.0).unwrap();
        let tr = evolve(
            &bump_phase(&g, 0.3),
            0.05,
            &StepPolicy::default(),
            &NonlinearityParams::default(),
        )
        .unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf, Some("config abc")).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("# config abc"));
        assert_eq!(
            lines.next(),
            Some("t,E,P1,P2,K0,K2,H1sq,Linf,strichartz_running")
        );
        assert_eq!(lines.count(), tr.records.len());
    }
}
