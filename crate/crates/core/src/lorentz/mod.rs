//! Lorentz boosts of stored space-time solution data and the energy-momentum
//! rotation law.
//!
//! A boost along axis `j` with rapidity `lambda` reads the solution at
//! `y0 = x0 cosh + xj sinh`, `yj = x0 sinh + xj cosh`. Values between grid
//! points come from line-wise Fourier interpolation along `j`, values between
//! snapshots from quintic Lagrange interpolation in time.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{energy, momentum, FieldPair, NonlinearityParams, PhasePoint};
use crate::propagator::{fmt_sig, Trajectory};
use crate::spectral::{ScalarField, SpectralGrid};

/// Largest admissible rapidity.
pub const MAX_RAPIDITY: f64 = 0.5;
/// Fields must stay below this fraction of their peak in the outer tenth of the box.
pub const EDGE_RATIO_LIMIT: f64 = 1e-6;
/// Bound on the stride-halving estimate of the time-interpolation error.
pub const TIME_INTERPOLATION_LIMIT: f64 = 1e-6;

const STENCIL: usize = 6;

/// Uniformly spaced snapshots of one solution on a Cartesian grid.
#[derive(Clone, Debug)]
pub struct SpacetimeBlock {
    params: NonlinearityParams,
    t0: f64,
    stride: f64,
    states: Vec<PhasePoint>,
}

impl SpacetimeBlock {
    pub fn new(
        params: NonlinearityParams,
        t0: f64,
        stride: f64,
        states: Vec<PhasePoint>,
    ) -> Result<Self> {
        if states.len() < 2 * STENCIL {
            return Err(Error::InsufficientSnapshots {
                spacing: stride,
                limit: 0.0,
            });
        }
        if !(stride > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "stride must be positive, got {stride}"
            )));
        }
        let grid = states[0].grid();
        if grid.is_radial() {
            return Err(Error::Geometry("radial"));
        }
        if states.iter().any(|s| s.grid() != grid) {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            params,
            t0,
            stride,
            states,
        })
    }

    /// Takes the longest run of equally spaced snapshots from the start.
    pub fn from_trajectory(trajectory: &Trajectory) -> Result<Self> {
        let snaps = &trajectory.snapshots;
        if snaps.len() < 2 {
            return Err(Error::InsufficientSnapshots {
                spacing: f64::INFINITY,
                limit: 0.0,
            });
        }
        let h = snaps[1].t - snaps[0].t;
        let count = snaps
            .iter()
            .enumerate()
            .take_while(|(k, s)| (s.t - snaps[0].t - *k as f64 * h).abs() <= 1e-9 * (1.0 + s.t))
            .count();
        let states = snaps[..count].iter().map(|s| s.phase.clone()).collect();
        Self::new(trajectory.params, snaps[0].t, h, states)
    }

    pub fn grid(&self) -> &SpectralGrid {
        self.states[0].grid()
    }

    pub fn params(&self) -> &NonlinearityParams {
        &self.params
    }

    pub fn stride(&self) -> f64 {
        self.stride
    }

    pub fn states(&self) -> &[PhasePoint] {
        &self.states
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.stride
    }

    pub fn t_a(&self) -> f64 {
        self.t0
    }

    pub fn t_b(&self) -> f64 {
        self.time(self.states.len() - 1)
    }

    /// Stride-halving estimate: every odd node is interpolated from the even
    /// nodes (stride `2h`), and the sixth-order error law scales that down to
    /// stride `h`. Relative to the largest field value in the block.
    pub fn time_interpolation_error(&self) -> f64 {
        let evens: Vec<usize> = (0..self.states.len()).step_by(2).collect();
        let scale = self.field_scale();
        if evens.len() < STENCIL || scale == 0.0 {
            return 0.0;
        }
        let worst = (1..self.states.len())
            .step_by(2)
            .collect::<Vec<_>>()
            .par_iter()
            .map(|&k| {
                let pos = k as f64 / 2.0;
                let first = stencil_start(pos, evens.len());
                let nodes: Vec<f64> = (first..first + STENCIL).map(|e| e as f64).collect();
                let w = lagrange_weights(&nodes, pos);
                let mut err: f64 = 0.0;
                for f in 0..4 {
                    let exact = self.states[k].fields()[f].values();
                    for (i, &e) in exact.iter().enumerate() {
                        let v: f64 = (0..STENCIL)
                            .map(|s| w[s] * self.states[evens[first + s]].fields()[f].values()[i])
                            .sum();
                        err = err.max((v - e).abs());
                    }
                }
                err
            })
            .reduce(|| 0.0, f64::max);
        worst / 64.0 / scale
    }

    fn field_scale(&self) -> f64 {
        self.states
            .iter()
            .flat_map(|s| s.fields().map(|f| f.max_abs()))
            .fold(0.0, f64::max)
    }

    /// Largest field value in the outer tenth of the box along any axis, relative
    /// to the largest value anywhere in the block.
    pub fn edge_ratio(&self) -> f64 {
        let g = self.grid();
        let band = 0.9 * g.half_length();
        let edge: Vec<usize> = (0..g.len())
            .filter(|&i| g.position(i)[..g.dim()].iter().any(|c| c.abs() >= band))
            .collect();
        let peak = self.field_scale();
        if peak == 0.0 {
            return 0.0;
        }
        let worst = self
            .states
            .par_iter()
            .map(|s| {
                s.fields()
                    .iter()
                    .flat_map(|f| edge.iter().map(|&i| f.values()[i].abs()))
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max);
        worst / peak
    }

    pub fn check_support(&self) -> Result<()> {
        let r = self.edge_ratio();
        if r > EDGE_RATIO_LIMIT {
            return Err(Error::SupportViolation(r));
        }
        Ok(())
    }
}

fn stencil_start(pos: f64, len: usize) -> usize {
    let centre = pos.floor() as isize - (STENCIL as isize / 2 - 1);
    centre.clamp(0, (len - STENCIL) as isize) as usize
}

fn lagrange_weights(nodes: &[f64], x: f64) -> Vec<f64> {
    (0..nodes.len())
        .map(|i| {
            nodes
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &xj)| (x - xj) / (nodes[i] - xj))
                .product()
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoostParams {
    pub lambda: f64,
    /// 1-based spatial axis.
    pub axis: usize,
}

impl BoostParams {
    pub fn new(lambda: f64, axis: usize) -> Result<Self> {
        if !(lambda.abs() <= MAX_RAPIDITY) {
            return Err(Error::InvalidArgument(format!(
                "rapidity {lambda} outside [-{MAX_RAPIDITY}, {MAX_RAPIDITY}]"
            )));
        }
        if axis == 0 || axis > 3 {
            return Err(Error::InvalidArgument(format!("axis {axis} outside 1..=3")));
        }
        Ok(Self { lambda, axis })
    }
}

/// Range of source times `[min, max]` read by a boost to `target`.
pub fn slab(grid: &SpectralGrid, boost: &BoostParams, target: f64) -> (f64, f64) {
    let (c, s) = (boost.lambda.cosh(), boost.lambda.sinh());
    let x = grid.coords();
    let a = target * c + x[0] * s;
    let b = target * c + x[x.len() - 1] * s;
    (a.min(b), a.max(b))
}

/// Target time whose slab is centred in the block.
pub fn centred_target(block: &SpacetimeBlock, lambda: f64) -> f64 {
    0.5 * (block.t_a() + block.t_b()) / lambda.cosh()
}

/// Line spectra along one axis for the four fields of every snapshot.
struct LineSpectra {
    axis: usize,
    data: Vec<[Vec<Complex64>; 4]>,
}

impl LineSpectra {
    fn new(block: &SpacetimeBlock, axis: usize) -> Self {
        let g = block.grid();
        let data = block
            .states
            .par_iter()
            .map(|s| {
                s.fields().map(|f| {
                    let mut d: Vec<Complex64> =
                        f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
                    g.transform_axis(&mut d, axis, false);
                    d
                })
            })
            .collect();
        Self { axis, data }
    }
}

/// `L^lambda_j U` at time `target`.
pub fn boost(block: &SpacetimeBlock, boost: &BoostParams, target: f64) -> Result<PhasePoint> {
    let prepared = prepare(block, boost)?;
    boost_with(block, &prepared, boost, target)
}

fn prepare(block: &SpacetimeBlock, boost: &BoostParams) -> Result<LineSpectra> {
    if boost.axis > block.grid().dim() {
        return Err(Error::InvalidArgument(format!(
            "axis {} on a {}-dimensional grid",
            boost.axis,
            block.grid().dim()
        )));
    }
    block.check_support()?;
    Ok(LineSpectra::new(block, boost.axis - 1))
}

fn check_slab(block: &SpacetimeBlock, boost: &BoostParams, target: f64) -> Result<()> {
    let (lo, hi) = slab(block.grid(), boost, target);
    let tol = 1e-9 * (1.0 + block.t_b().abs());
    if lo < block.t_a() - tol || hi > block.t_b() + tol {
        return Err(Error::SlabViolation {
            need_lo: lo,
            need_hi: hi,
            have_lo: block.t_a(),
            have_hi: block.t_b(),
        });
    }
    Ok(())
}

fn boost_with(
    block: &SpacetimeBlock,
    spectra: &LineSpectra,
    boost: &BoostParams,
    target: f64,
) -> Result<PhasePoint> {
    check_slab(block, boost, target)?;
    let g = block.grid();
    let n = g.points_per_axis();
    let axis = spectra.axis;
    let stride = n.pow((g.dim() - 1 - axis) as u32);
    let (ch, sh) = (boost.lambda.cosh(), boost.lambda.sinh());
    let x = g.coords();
    let k = g.wavenumbers();
    let len = g.len();
    let norm = 1.0 / n as f64;
    // Line origins: flat indices whose coordinate along `axis` is zero.
    let bases: Vec<usize> = (0..len).filter(|&i| g.multi_index(i)[axis] == 0).collect();
    let columns: Vec<Vec<[f64; 6]>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let y0 = target * ch + x[i] * sh;
            let yj = target * sh + x[i] * ch;
            let pos = (y0 - block.t_a()) / block.stride;
            let first = stencil_start(pos, block.states.len());
            let nodes: Vec<f64> = (first..first + STENCIL).map(|e| e as f64).collect();
            let w = lagrange_weights(&nodes, pos);
            let phase: Vec<Complex64> = k
                .iter()
                .map(|&km| Complex64::from_polar(norm, km * (yj - x[0])))
                .collect();
            let dk: Vec<f64> = (0..n)
                .map(|m| if m == n / 2 { 0.0 } else { k[m] })
                .collect();
            bases
                .iter()
                .map(|&b| {
                    // Fields in order u1, v1, u2, v2; derivatives of u1 and u2.
                    let mut out = [0.0; 6];
                    for (s, &ws) in w.iter().enumerate() {
                        let spec = &spectra.data[first + s];
                        for f in 0..4 {
                            let c = &spec[f];
                            let mut val = Complex64::default();
                            let mut der = Complex64::default();
                            for m in 0..n {
                                let term = c[b + m * stride] * phase[m];
                                val += term;
                                if f % 2 == 0 {
                                    der += term * dk[m];
                                }
                            }
                            out[f] += ws * val.re;
                            if f % 2 == 0 {
                                // d/dy of Re(c e^{iky}) = Re(i k c e^{iky}) = -k Im(...)
                                out[4 + f / 2] -= ws * der.im;
                            }
                        }
                    }
                    out
                })
                .collect()
        })
        .collect();
    let mut fields = [
        vec![0.0; len],
        vec![0.0; len],
        vec![0.0; len],
        vec![0.0; len],
    ];
    for (i, col) in columns.iter().enumerate() {
        for (b, vals) in bases.iter().zip(col) {
            let idx = b + i * stride;
            fields[0][idx] = vals[0];
            fields[1][idx] = ch * vals[1] + sh * vals[4];
            fields[2][idx] = vals[2];
            fields[3][idx] = ch * vals[3] + sh * vals[5];
        }
    }
    let [u1, v1, u2, v2] = fields.map(|v| ScalarField::from_values(g, v).expect("grid-sized"));
    PhasePoint::new(FieldPair::new(u1, u2)?, v1, v2)
}

/// Boosted solution sampled at `count` equally spaced times starting at `start`,
/// as a block that can itself be boosted.
pub fn boost_block(
    block: &SpacetimeBlock,
    boost: &BoostParams,
    start: f64,
    stride: f64,
    count: usize,
) -> Result<SpacetimeBlock> {
    let prepared = prepare(block, boost)?;
    let states = (0..count)
        .map(|k| boost_with(block, &prepared, boost, start + k as f64 * stride))
        .collect::<Result<Vec<_>>>()?;
    SpacetimeBlock::new(block.params, start, stride, states)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RotationRow {
    pub lambda: f64,
    pub e_boosted: f64,
    pub p_boosted: f64,
    pub e_predicted: f64,
    pub p_predicted: f64,
    /// `hypot(dE, dP) / hypot(E, P)`.
    pub rel_err: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RotationReport {
    pub axis: usize,
    pub energy: f64,
    pub momentum: f64,
    pub rows: Vec<RotationRow>,
    pub max_rel_err: f64,
}

impl RotationReport {
    pub fn write_csv(&self, w: &mut impl Write, comment: Option<&str>) -> Result<()> {
        if let Some(c) = comment {
            writeln!(w, "# {c}")?;
        }
        writeln!(
            w,
            "lambda,E_boosted,P_boosted,E_predicted,P_predicted,rel_err"
        )?;
        for r in &self.rows {
            let vals = [
                r.lambda,
                r.e_boosted,
                r.p_boosted,
                r.e_predicted,
                r.p_predicted,
                r.rel_err,
            ];
            writeln!(w, "{}", vals.map(fmt_sig).join(","))?;
        }
        Ok(())
    }
}

/// Energy and momentum (along the boost axis) of the block's middle snapshot.
pub fn block_energy_momentum(block: &SpacetimeBlock, axis: usize) -> (f64, f64) {
    let mid = &block.states[block.states.len() / 2];
    (energy(mid, &block.params), momentum(mid)[axis - 1])
}

/// Compares `E`, `P_j` of the boosted data with the hyperbolic rotation of the
/// unboosted values, one row per rapidity.
pub fn energy_momentum_rotation_check(
    block: &SpacetimeBlock,
    axis: usize,
    lambdas: &[f64],
) -> Result<RotationReport> {
    let (e, p) = block_energy_momentum(block, axis);
    let scale = e.hypot(p);
    let spectra = prepare(block, &BoostParams::new(0.0, axis)?)?;
    let rows = lambdas
        .iter()
        .map(|&lambda| -> Result<RotationRow> {
            let b = BoostParams::new(lambda, axis)?;
            let ph = boost_with(block, &spectra, &b, centred_target(block, lambda))?;
            let eb = energy(&ph, &block.params);
            let pb = momentum(&ph)[axis - 1];
            let ep = e * lambda.cosh() + p * lambda.sinh();
            let pp = e * lambda.sinh() + p * lambda.cosh();
            Ok(RotationRow {
                lambda,
                e_boosted: eb,
                p_boosted: pb,
                e_predicted: ep,
                p_predicted: pp,
                rel_err: (eb - ep).hypot(pb - pp) / scale,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_rel_err = rows.iter().map(|r| r.rel_err).fold(0.0, f64::max);
    Ok(RotationReport {
        axis,
        energy: e,
        momentum: p,
        rows,
        max_rel_err,
    })
}

/// Centred differences of `E` and `P_j` in the rapidity at zero.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DerivativeCheck {
    pub energy: f64,
    pub momentum: f64,
    pub de_dlambda: f64,
    pub dp_dlambda: f64,
    /// `|dE/dlambda - P| / hypot(E, P)`.
    pub dep_rel_err: f64,
    /// `|dP/dlambda - E| / hypot(E, P)`.
    pub dpe_rel_err: f64,
}

pub fn derivative_check(block: &SpacetimeBlock, axis: usize, step: f64) -> Result<DerivativeCheck> {
    let (e, p) = block_energy_momentum(block, axis);
    let spectra = prepare(block, &BoostParams::new(0.0, axis)?)?;
    let at = |l: f64| -> Result<(f64, f64)> {
        let ph = boost_with(
            block,
            &spectra,
            &BoostParams::new(l, axis)?,
            centred_target(block, l),
        )?;
        Ok((energy(&ph, &block.params), momentum(&ph)[axis - 1]))
    };
    let (ep, pp) = at(step)?;
    let (em, pm) = at(-step)?;
    let de = (ep - em) / (2.0 * step);
    let dp = (pp - pm) / (2.0 * step);
    let scale = e.hypot(p);
    Ok(DerivativeCheck {
        energy: e,
        momentum: p,
        de_dlambda: de,
        dp_dlambda: dp,
        dep_rel_err: (de - p).abs() / scale,
        dpe_rel_err: (dp - e).abs() / scale,
    })
}

/// Sup-norm mismatch between boosting by `l1` then `l2` and boosting by `l1 + l2`
/// along `axis`, relative to the sup norm of the direct boost. The intermediate
/// block covers the slab the second boost reads, at the original stride.
pub fn group_law_defect(block: &SpacetimeBlock, axis: usize, l1: f64, l2: f64) -> Result<f64> {
    let h = block.stride();
    let half = block.grid().half_length() * l2.abs().sinh() + 0.2;
    let count = (2.0 * half / h).ceil() as usize + 1;
    let b1 = boost_block(
        block,
        &BoostParams::new(l1, axis)?,
        centred_target(block, l1) - half,
        h,
        count,
    )?;
    let tau = centred_target(&b1, l2);
    let composed = boost(&b1, &BoostParams::new(l2, axis)?, tau)?;
    let direct = boost(block, &BoostParams::new(l1 + l2, axis)?, tau)?;
    let scale = direct
        .fields()
        .iter()
        .map(|f| f.max_abs())
        .fold(0.0, f64::max);
    let err = composed
        .fields()
        .iter()
        .zip(direct.fields())
        .map(|(a, b)| a.max_abs_diff(b))
        .fold(0.0, f64::max);
    Ok(if scale > 0.0 { err / scale } else { err })
}

/// Sup-norm defect of the equation for the boosted field at `target`, relative to
/// the largest of the sup norms of its terms. Time derivatives of the boosted
/// velocity use a five-point stencil with spacing equal to the block stride.
pub fn boosted_residual(block: &SpacetimeBlock, boost: &BoostParams, target: f64) -> Result<f64> {
    let spectra = prepare(block, boost)?;
    let h = block.stride;
    let states = [-2.0, -1.0, 1.0, 2.0, 0.0]
        .iter()
        .map(|o| boost_with(block, &spectra, boost, target + o * h))
        .collect::<Result<Vec<_>>>()?;
    let mid = &states[4];
    let g = block.grid();
    let params = &block.params;
    let u = [mid.pair().u1().physical(), mid.pair().u2().physical()];
    let mut scale: f64 = 0.0;
    let mut defect: f64 = 0.0;
    for c in 0..2 {
        let v = |k: usize| states[k].velocities()[c].physical();
        let (vm2, vm1, vp1, vp2) = (v(0), v(1), v(2), v(3));
        let lap = mid.pair().components()[c]
            .apply_multiplier(|i| -g.k_squared()[i])
            .physical();
        for i in 0..g.len() {
            let utt = (vm2[i] - 8.0 * vm1[i] + 8.0 * vp1[i] - vp2[i]) / (12.0 * h);
            let (f1, f2) = params.force(u[0][i], u[1][i]);
            let force = if c == 0 { f1 } else { f2 };
            let r = utt - lap[i] + u[c][i] - force;
            defect = defect.max(r.abs());
            scale = scale
                .max(utt.abs())
                .max(lap[i].abs())
                .max(u[c][i].abs())
                .max(force.abs());
        }
    }
    Ok(if scale > 0.0 { defect / scale } else { 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagator::{evolve, StepPolicy};

    fn travelling_block(params: NonlinearityParams) -> SpacetimeBlock {
        let g = SpectralGrid::new(1, 192, 24.0).unwrap();
        let f = |x: f64| (-x * x).exp();
        let u1 = ScalarField::from_fn(&g, |x| 0.6 * f(x[0]));
        let v1 = ScalarField::from_fn(&g, |x| 0.6 * 0.4 * 2.0 * x[0] * f(x[0]));
        let u2 = ScalarField::from_fn(&g, |x| 0.3 * f(x[0] - 1.0));
        let ph =
            PhasePoint::new(FieldPair::new(u1, u2).unwrap(), v1, ScalarField::zeros(&g)).unwrap();
        let pol = StepPolicy {
            dt_base: 1e-2,
            snapshot_stride: 5,
            ..Default::default()
        };
        SpacetimeBlock::from_trajectory(&evolve(&ph, 12.0, &pol, &params).unwrap()).unwrap()
    }

    #[test]
    fn zero_rapidity_is_identity_on_nodes() {
        let block = travelling_block(NonlinearityParams::free());
        let k = 100;
        let b = boost(&block, &BoostParams::new(0.0, 1).unwrap(), block.time(k)).unwrap();
        for (a, e) in b.fields().iter().zip(block.states()[k].fields()) {
            assert!(a.max_abs_diff(e) < 1e-12);
        }
    }

    #[test]
    fn slab_and_parameter_checks() {
        let block = travelling_block(NonlinearityParams::free());
        assert!(BoostParams::new(0.6, 1).is_err());
        let b = BoostParams::new(0.5, 1).unwrap();
        assert!(matches!(
            boost(&block, &b, 6.0),
            Err(Error::SlabViolation { .. })
        ));
        assert!(matches!(
            boost(&block, &BoostParams::new(0.1, 2).unwrap(), 6.0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(block.time_interpolation_error() < TIME_INTERPOLATION_LIMIT);
    }

    #[test]
    fn support_violation_is_reported() {
        let g = SpectralGrid::new(1, 128, 8.0).unwrap();
        let u = ScalarField::from_fn(&g, |x| (-(x[0] * x[0]) / 4.0).exp());
        let ph = PhasePoint::at_rest(FieldPair::new(u, ScalarField::zeros(&g)).unwrap());
        let pol = StepPolicy {
            snapshot_stride: 5,
            ..Default::default()
        };
        let block = SpacetimeBlock::from_trajectory(
            &evolve(&ph, 2.0, &pol, &NonlinearityParams::free()).unwrap(),
        )
        .unwrap();
        assert!(matches!(
            boost(&block, &BoostParams::new(0.0, 1).unwrap(), 1.0),
            Err(Error::SupportViolation(_))
        ));
    }

    #[test]
    fn inverse_boost_restores_data() {
        let block = travelling_block(NonlinearityParams::free());
        let h = block.stride();
        let start = centred_target(&block, 0.1) - 2.6;
        let boosted =
            boost_block(&block, &BoostParams::new(0.1, 1).unwrap(), start, h, 105).unwrap();
        let t = centred_target(&boosted, -0.1);
        let there = boost(&boosted, &BoostParams::new(-0.1, 1).unwrap(), t).unwrap();
        let direct = boost(&block, &BoostParams::new(0.0, 1).unwrap(), t).unwrap();
        let scale = direct
            .fields()
            .iter()
            .map(|f| f.max_abs())
            .fold(0.0, f64::max);
        let err = there
            .fields()
            .iter()
            .zip(direct.fields())
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max);
        assert!(err < 1e-5 * scale, "{err}");
    }
}
