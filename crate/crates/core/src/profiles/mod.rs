//! Finite-n linear profile decomposition of sequences of free waves, with a
//! synthesizer for sequences carrying planted bubbles.
//!
//! Conventions: a bubble `V` with shifts `(t_n, x_n)` contributes
//! `V(t + t_n, x + x_n)` to the n-th free wave, so it concentrates near
//! `(t, x) = (-t_n, -x_n)`. Detection uses `2^{-dj/2} |P_j S(t) gamma|`
//! in space dimension `d` (the `L^2 -> L^inf` Bernstein scaling).

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{energy_norm_sq, FieldPair, PhasePoint};
use crate::propagator::free_evolve;
use crate::spectral::{lebesgue_norm, partition_bump, LpBlock, ScalarField, SpectralGrid};

/// A profile and its space-time shifts along the sequence.
#[derive(Clone, Debug)]
pub struct BubbleSpec {
    pub datum: PhasePoint,
    pub shifts: Vec<(f64, [f64; 3])>,
}

impl BubbleSpec {
    /// `[S(t_n) V](. + x_n)`.
    pub fn member(&self, n: usize) -> PhasePoint {
        let (t, x) = self.shifts[n];
        translate(&free_evolve(&self.datum, t), x)
    }

    pub fn energy(&self) -> f64 {
        energy_norm_sq(&self.datum)
    }
}

/// `f(. + a)` for every field, by a Fourier phase.
pub fn translate(phase: &PhasePoint, a: [f64; 3]) -> PhasePoint {
    if a.iter().all(|&c| c == 0.0) {
        return phase.clone();
    }
    let g = phase.grid();
    let shift: Vec<Complex64> = (0..g.len())
        .map(|i| {
            let k = g.derivative_wavevector(i);
            Complex64::from_polar(1.0, k[0] * a[0] + k[1] * a[1] + k[2] * a[2])
        })
        .collect();
    let fields = phase.fields().map(|f| {
        let s: Vec<Complex64> = f
            .spectrum()
            .iter()
            .zip(&shift)
            .map(|(c, e)| c * e)
            .collect();
        ScalarField::from_spectrum(g, s)
    });
    PhasePoint::from_fields(fields).expect("same grid")
}

fn separation(a: (f64, [f64; 3]), b: (f64, [f64; 3])) -> f64 {
    let dx: f64 =
        a.1.iter()
            .zip(&b.1)
            .map(|(p, q)| (p - q).powi(2))
            .sum::<f64>()
            .sqrt();
    (a.0 - b.0).abs() + dx
}

/// Radius about the origin outside which all fields are below `1e-6` of their peak.
fn support_radius(phase: &PhasePoint) -> f64 {
    let g = phase.grid();
    let peak = phase
        .fields()
        .iter()
        .map(|f| f.max_abs())
        .fold(0.0, f64::max);
    let cut = 1e-6 * peak;
    (0..g.len())
        .filter(|&i| phase.fields().iter().any(|f| f.values()[i].abs() > cut))
        .map(|i| g.position(i).iter().map(|c| c.abs()).fold(0.0, f64::max))
        .fold(0.0, f64::max)
}

/// Builds `U_n(0) = sum_j [S(t_n^j) V^j](. + x_n^j) + noise_n` for `n < n_count`.
/// The noise is a smooth random field with `||noise_n||_{H x H} = noise_amplitude`.
pub fn synthesize_sequence(
    bubbles: &[BubbleSpec],
    grid: &SpectralGrid,
    noise_amplitude: f64,
    n_count: usize,
    seed: u64,
) -> Result<Vec<PhasePoint>> {
    if grid.is_radial() {
        return Err(Error::Geometry("radial"));
    }
    for (j, b) in bubbles.iter().enumerate() {
        if b.datum.grid() != grid {
            return Err(Error::GridMismatch);
        }
        if b.shifts.len() < n_count {
            return Err(Error::InvalidArgument(format!(
                "bubble {j} has {} shifts for {n_count} members",
                b.shifts.len()
            )));
        }
        let r = support_radius(&b.datum);
        for (n, &(t, x)) in b.shifts.iter().take(n_count).enumerate() {
            let reach = x.iter().map(|c| c.abs()).fold(0.0, f64::max) + r + t.abs();
            if reach > grid.half_length() {
                return Err(Error::BoxOverflow(format!(
                    "bubble {j} member {n} reaches {reach:.3} > {}",
                    grid.half_length()
                )));
            }
        }
    }
    for j in 0..bubbles.len() {
        for k in j + 1..bubbles.len() {
            let sep: Vec<f64> = (0..n_count)
                .map(|n| separation(bubbles[j].shifts[n], bubbles[k].shifts[n]))
                .collect();
            if sep.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::InvalidArgument(format!(
                    "shift separation of bubbles {j} and {k} is not increasing"
                )));
            }
        }
    }
    (0..n_count)
        .into_par_iter()
        .map(|n| {
            let mut u = PhasePoint::zeros(grid);
            for b in bubbles {
                u = u.add_scaled(&b.member(n), 1.0);
            }
            if noise_amplitude > 0.0 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(n as u64));
                u = u.add_scaled(&smooth_noise(grid, &mut rng), noise_amplitude);
            }
            Ok(u)
        })
        .collect()
}

/// Unit `H x H` norm noise with spectrum damped as `1 / (1 + |k|^2)`.
fn smooth_noise(grid: &SpectralGrid, rng: &mut ChaCha8Rng) -> PhasePoint {
    let k2 = grid.k_squared();
    let fields = [(); 4].map(|_| {
        let white: Vec<f64> = (0..grid.len())
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        ScalarField::from_values(grid, white)
            .expect("grid-sized")
            .apply_multiplier(|i| 1.0 / (1.0 + k2[i]))
    });
    let p = PhasePoint::from_fields(fields).expect("same grid");
    let n = energy_norm_sq(&p).sqrt();
    p.scaled(1.0 / n)
}

/// Knobs of the extraction loop.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtractOptions {
    pub max_bubbles: usize,
    pub nu_floor: f64,
    /// Sampled time window for the sup over `t`.
    pub t_min: f64,
    pub t_max: f64,
    pub t_step: f64,
    /// Fraction of the sequence (from the end) averaged into the profile estimate.
    pub tail_fraction: f64,
    /// Blocks above `detection block + filter_margin` are removed from the estimate.
    pub filter_margin: u32,
    /// Backfitting sweeps after each new bubble: every profile is re-estimated from
    /// the sequence minus the other bubbles, shifts held fixed.
    pub refine_sweeps: usize,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        Self {
            max_bubbles: 4,
            nu_floor: 1e-3,
            t_min: -8.0,
            t_max: 8.0,
            t_step: 0.25,
            tail_fraction: 0.5,
            filter_margin: 3,
            refine_sweeps: 2,
        }
    }
}

impl ExtractOptions {
    pub fn times(&self) -> Vec<f64> {
        let count = ((self.t_max - self.t_min) / self.t_step + 1e-9).floor() as usize;
        (0..=count)
            .map(|i| self.t_min + i as f64 * self.t_step)
            .collect()
    }

    fn validate(&self) -> Result<()> {
        let ok = self.t_step > 0.0
            && self.t_max >= self.t_min
            && self.tail_fraction > 0.0
            && self.tail_fraction <= 1.0
            && self.nu_floor >= 0.0;
        if !ok {
            return Err(Error::InvalidArgument(format!(
                "invalid extraction options {self:?}"
            )));
        }
        Ok(())
    }
}

/// Position components of `S(t) U` in Fourier space.
struct FreeSpectra {
    u: [Vec<Complex64>; 2],
    v: [Vec<Complex64>; 2],
}

impl FreeSpectra {
    fn new(phase: &PhasePoint) -> Self {
        let [u1, v1, u2, v2] = phase.fields().map(|f| f.spectrum());
        Self {
            u: [u1, u2],
            v: [v1, v2],
        }
    }

    fn position_at(&self, grid: &SpectralGrid, t: f64, c: usize) -> Vec<Complex64> {
        let w = grid.bessel_symbol();
        self.u[c]
            .iter()
            .zip(&self.v[c])
            .zip(w)
            .map(|((u, v), w)| u * (w * t).cos() + v * ((w * t).sin() / w))
            .collect()
    }
}

/// Peak of `2^{-dj/2} |P_j S(t) U(x)|` over both components.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub value: f64,
    pub block: u32,
    pub t: f64,
    pub x: [f64; 3],
}

fn block_weight(grid: &SpectralGrid, block: u32) -> f64 {
    2f64.powf(-0.5 * grid.dim() as f64 * block as f64)
}

fn block_symbols(grid: &SpectralGrid, block: LpBlock) -> Vec<f64> {
    grid.k_squared()
        .iter()
        .map(|k2| block.symbol(k2.sqrt()))
        .collect()
}

/// Better of two detections under the tie rule: larger value, then smaller block,
/// earlier time, lexicographically smaller position.
fn better(a: Detection, b: Detection) -> Detection {
    let tol = 1e-12 * a.value.abs().max(b.value.abs());
    if (a.value - b.value).abs() > tol {
        return if a.value > b.value { a } else { b };
    }
    let key = |d: &Detection| (d.block, d.t, d.x);
    let (ka, kb) = (key(&a), key(&b));
    let a_first = ka.0 < kb.0
        || (ka.0 == kb.0
            && (ka.1 < kb.1
                || (ka.1 == kb.1 && ka.2.partial_cmp(&kb.2) != Some(std::cmp::Ordering::Greater))));
    if a_first {
        a
    } else {
        b
    }
}

/// Best detection over the given blocks and sampled times.
fn detect(phase: &PhasePoint, blocks: &[u32], times: &[f64]) -> Detection {
    let g = phase.grid();
    let spectra = FreeSpectra::new(phase);
    let symbols: Vec<(u32, Vec<f64>)> = blocks
        .iter()
        .map(|&b| (b, block_symbols(g, LpBlock(b))))
        .collect();
    times
        .par_iter()
        .map(|&t| {
            let mut best = Detection {
                value: 0.0,
                block: blocks[0],
                t,
                x: [0.0; 3],
            };
            for c in 0..2 {
                let s = spectra.position_at(g, t, c);
                for (b, sym) in &symbols {
                    let vals = g.inverse_real(s.iter().zip(sym).map(|(a, m)| a * m).collect());
                    let w = block_weight(g, *b);
                    for (i, v) in vals.iter().enumerate() {
                        let cand = Detection {
                            value: w * v.abs(),
                            block: *b,
                            t,
                            x: g.position(i),
                        };
                        if cand.value >= best.value * (1.0 - 1e-12) {
                            best = better(best, cand);
                        }
                    }
                }
            }
            best
        })
        .reduce(
            || Detection {
                value: 0.0,
                block: u32::MAX,
                t: f64::INFINITY,
                x: [0.0; 3],
            },
            better,
        )
}

fn all_blocks(grid: &SpectralGrid) -> Vec<u32> {
    LpBlock::all(grid).into_iter().map(|b| b.0).collect()
}

/// `sup_t max_j 2^{-dj/2} ||P_j S(t) U||_inf` over the sampled window.
pub fn besov_detection(phase: &PhasePoint, options: &ExtractOptions) -> Detection {
    detect(phase, &all_blocks(phase.grid()), &options.times())
}

/// Largest `2^{-dj/2} ||P_j||_{L^2 -> L^inf}` over the blocks of the grid.
pub fn detection_constant(grid: &SpectralGrid) -> f64 {
    all_blocks(grid)
        .into_iter()
        .map(|b| {
            let s2: f64 = block_symbols(grid, LpBlock(b)).iter().map(|m| m * m).sum();
            block_weight(grid, b) * (s2 / grid.volume()).sqrt()
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug)]
pub struct ExtractedBubble {
    pub spec: BubbleSpec,
    pub nu: f64,
    pub block: u32,
    /// `||V||^2_{H x H}`.
    pub energy: f64,
    /// `||V(0)||_{L^2 x L^2}` of the position components.
    pub l2_norm: f64,
    /// `sup_x 2^{-dk/2} |P_k V(0)|` at the detection block.
    pub detection_peak: f64,
}

#[derive(Clone, Debug)]
pub struct Decomposition {
    pub bubbles: Vec<ExtractedBubble>,
    pub remainders: Vec<PhasePoint>,
    pub nu_series: Vec<f64>,
    pub block_levels: Vec<u32>,
    /// `max_bubbles` was reached with the detection level still above the floor.
    pub incomplete: bool,
}

/// Profile estimate: pointwise median of the pulled-back tail members,
/// low-pass filtered above `block + margin`.
fn estimate_profile(
    members: &[PhasePoint],
    shifts: &[(f64, [f64; 3])],
    first: usize,
    cutoff: u32,
) -> PhasePoint {
    let g = members[0].grid();
    let pulled: Vec<PhasePoint> = (first..members.len())
        .into_par_iter()
        .map(|n| {
            let (t, x) = shifts[n];
            free_evolve(&translate(&members[n], x.map(|c| -c)), -t)
        })
        .collect();
    let k2 = g.k_squared();
    let cut = 2f64.powi(cutoff as i32);
    let fields = [0, 1, 2, 3].map(|f| {
        let vals: Vec<f64> = (0..g.len())
            .map(|i| {
                let mut column: Vec<f64> =
                    pulled.iter().map(|p| p.fields()[f].values()[i]).collect();
                median(&mut column)
            })
            .collect();
        ScalarField::from_values(g, vals)
            .expect("grid-sized")
            .apply_multiplier(|i| partition_bump(k2[i].sqrt() / cut))
    });
    PhasePoint::from_fields(fields).expect("same grid")
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// The extraction loop: detect on the last member, locate each member's own peak at
/// the detected block, estimate the profile from the tail, subtract its free
/// evolution from every member, repeat.
pub fn extract_profiles(
    sequence: &[PhasePoint],
    options: &ExtractOptions,
) -> Result<Decomposition> {
    options.validate()?;
    let Some(last) = sequence.last() else {
        return Err(Error::InvalidArgument("empty sequence".into()));
    };
    let g = last.grid().clone();
    if g.is_radial() {
        return Err(Error::Geometry("radial"));
    }
    if sequence.iter().any(|p| p.grid() != &g) {
        return Err(Error::GridMismatch);
    }
    let times = options.times();
    let blocks = all_blocks(&g);
    let n_count = sequence.len();
    let first =
        n_count - ((options.tail_fraction * n_count as f64).ceil() as usize).clamp(1, n_count);
    let mut remainders = sequence.to_vec();
    let mut out = Decomposition {
        bubbles: Vec::new(),
        remainders: Vec::new(),
        nu_series: Vec::new(),
        block_levels: Vec::new(),
        incomplete: false,
    };
    loop {
        let top = detect(&remainders[n_count - 1], &blocks, &times);
        out.nu_series.push(top.value);
        if top.value < options.nu_floor {
            break;
        }
        if out.bubbles.len() == options.max_bubbles {
            out.incomplete = true;
            break;
        }
        let shifts: Vec<(f64, [f64; 3])> = remainders
            .par_iter()
            .map(|r| {
                let d = detect(r, &[top.block], &times);
                (-d.t, d.x.map(|c| -c))
            })
            .collect();
        let datum = estimate_profile(
            &remainders,
            &shifts,
            first,
            top.block + options.filter_margin,
        );
        out.bubbles.push(ExtractedBubble {
            spec: BubbleSpec { datum, shifts },
            nu: top.value,
            block: top.block,
            energy: 0.0,
            l2_norm: 0.0,
            detection_peak: 0.0,
        });
        out.block_levels.push(top.block);
        let sweeps = if out.bubbles.len() > 1 {
            options.refine_sweeps
        } else {
            0
        };
        for _ in 0..sweeps {
            for j in 0..out.bubbles.len() {
                let others: Vec<PhasePoint> = (0..n_count)
                    .into_par_iter()
                    .map(|n| {
                        out.bubbles
                            .iter()
                            .enumerate()
                            .filter(|(i, _)| *i != j)
                            .fold(sequence[n].clone(), |acc, (_, b)| {
                                acc.add_scaled(&b.spec.member(n), -1.0)
                            })
                    })
                    .collect();
                let b = &mut out.bubbles[j];
                b.spec.datum = estimate_profile(
                    &others,
                    &b.spec.shifts,
                    first,
                    b.block + options.filter_margin,
                );
            }
        }
        remainders = (0..n_count)
            .into_par_iter()
            .map(|n| {
                out.bubbles.iter().fold(sequence[n].clone(), |acc, b| {
                    acc.add_scaled(&b.spec.member(n), -1.0)
                })
            })
            .collect();
        for b in &mut out.bubbles {
            let d = &b.spec.datum;
            b.energy = b.spec.energy();
            b.l2_norm = d
                .pair()
                .components()
                .iter()
                .map(|u| lebesgue_norm(u, 2.0).powi(2))
                .sum::<f64>()
                .sqrt();
            b.detection_peak = detect(d, &[b.block], &[0.0]).value;
        }
    }
    out.remainders = remainders;
    Ok(out)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OrthogonalityReport {
    /// `|‖U_n‖^2 - sum_j ‖V^j‖^2 - ‖gamma_n‖^2| / ‖U_n‖^2` for each n.
    pub defects: Vec<f64>,
    /// Defects are nonincreasing over the final half of the sequence.
    pub final_half_nonincreasing: bool,
    /// `sup_t ||gamma_N(t)||_{L^p x L^p}` over the window at the largest n, p = 3 and 4.
    pub remainder_l3: f64,
    pub remainder_l4: f64,
    /// Measured Bernstein constant.
    pub c0: f64,
    /// `C0 ||V(0)||_{L^2 x L^2} >= 2^{-dk/2}|P_k V(0)| > nu / 4` for each bubble.
    pub c0_relation: Vec<bool>,
}

pub fn orthogonality_check(
    decomposition: &Decomposition,
    sequence: &[PhasePoint],
    options: &ExtractOptions,
) -> Result<OrthogonalityReport> {
    if sequence.len() != decomposition.remainders.len() || sequence.is_empty() {
        return Err(Error::InvalidArgument(
            "decomposition does not belong to this sequence".into(),
        ));
    }
    let bubble_sum: f64 = decomposition.bubbles.iter().map(|b| b.energy).sum();
    let defects: Vec<f64> = sequence
        .iter()
        .zip(&decomposition.remainders)
        .map(|(u, r)| {
            let total = energy_norm_sq(u);
            if total == 0.0 {
                0.0
            } else {
                (total - bubble_sum - energy_norm_sq(r)).abs() / total
            }
        })
        .collect();
    let half = defects.len() / 2;
    let final_half_nonincreasing = defects[half..]
        .windows(2)
        .all(|w| w[1] <= w[0] * (1.0 + 1e-9) + 1e-15);
    let last = decomposition.remainders.last().unwrap();
    let (l3, l4) = options
        .times()
        .par_iter()
        .map(|&t| {
            let p = free_evolve(last, t);
            let norm = |q: f64| {
                p.pair()
                    .components()
                    .iter()
                    .map(|u| lebesgue_norm(u, q).powi(2))
                    .sum::<f64>()
                    .sqrt()
            };
            (norm(3.0), norm(4.0))
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    let c0 = detection_constant(last.grid());
    let c0_relation = decomposition
        .bubbles
        .iter()
        .map(|b| c0 * b.l2_norm >= b.detection_peak && b.detection_peak > b.nu / 4.0)
        .collect();
    Ok(OrthogonalityReport {
        defects,
        final_half_nonincreasing,
        remainder_l3: l3,
        remainder_l4: l4,
        c0,
        c0_relation,
    })
}

/// Weak-limit proxy for bubble `j`: L^2 norm of the low-pass part (blocks up to
/// `max_block`) of `gamma_n(-t_n^j, . - x_n^j)` inside the ball of radius
/// `radius`, for every n.
pub fn weak_limit_proxy(
    decomposition: &Decomposition,
    j: usize,
    max_block: u32,
    radius: f64,
) -> Result<Vec<f64>> {
    let Some(b) = decomposition.bubbles.get(j) else {
        return Err(Error::InvalidArgument(format!("no bubble {j}")));
    };
    let cut = 2f64.powi(max_block as i32);
    Ok(decomposition
        .remainders
        .par_iter()
        .zip(&b.spec.shifts)
        .map(|(r, &(t, x))| {
            let pulled = free_evolve(&translate(r, x.map(|c| -c)), -t);
            let g = pulled.grid();
            let k2 = g.k_squared();
            let mut total = 0.0;
            for u in pulled.pair().components() {
                let low = u.apply_multiplier(|i| partition_bump(k2[i].sqrt() / cut));
                let vals = low.values();
                for (i, v) in vals.iter().enumerate() {
                    let p = g.position(i);
                    if (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt() <= radius {
                        total += v * v;
                    }
                }
            }
            (total * g.cell_weight()).sqrt()
        })
        .collect())
}

/// JSON summary of a decomposition.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecompositionManifest {
    pub bubbles: Vec<BubbleSummary>,
    pub nu_series: Vec<f64>,
    pub block_levels: Vec<u32>,
    pub incomplete: bool,
    pub defects: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BubbleSummary {
    pub nu: f64,
    pub block: u32,
    pub energy: f64,
    pub shifts: Vec<(f64, [f64; 3])>,
}

impl DecompositionManifest {
    pub fn new(decomposition: &Decomposition, report: &OrthogonalityReport) -> Self {
        Self {
            bubbles: decomposition
                .bubbles
                .iter()
                .map(|b| BubbleSummary {
                    nu: b.nu,
                    block: b.block,
                    energy: b.energy,
                    shifts: b.spec.shifts.clone(),
                })
                .collect(),
            nu_series: decomposition.nu_series.clone(),
            block_levels: decomposition.block_levels.clone(),
            incomplete: decomposition.incomplete,
            defects: report.defects.clone(),
        }
    }
}

/// Gaussian pair at rest centred at the origin, `(a1 g_w, a2 g_w)`.
pub fn gaussian_bubble(grid: &SpectralGrid, a1: f64, a2: f64, width: f64) -> PhasePoint {
    let g = |x: &[f64]| (-x.iter().map(|c| c * c).sum::<f64>() / (width * width)).exp();
    let u1 = ScalarField::from_fn(grid, |x| a1 * g(x));
    let u2 = ScalarField::from_fn(grid, |x| a2 * g(x));
    PhasePoint::at_rest(FieldPair::new(u1, u2).expect("same grid"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> SpectralGrid {
        SpectralGrid::new(1, 512, 32.0).unwrap()
    }

    #[test]
    fn constant_sequence_from_unshifted_bubble() {
        let g = grid();
        let b = BubbleSpec {
            datum: gaussian_bubble(&g, 1.0, 0.5, 1.0),
            shifts: vec![(0.0, [0.0; 3]); 4],
        };
        let seq = synthesize_sequence(std::slice::from_ref(&b), &g, 0.0, 4, 1).unwrap();
        for u in &seq {
            for (a, e) in u.fields().iter().zip(b.datum.fields()) {
                assert!(a.max_abs_diff(e) < 1e-14);
            }
        }
    }

    #[test]
    fn noise_only_has_requested_norm_and_no_bubbles() {
        let g = grid();
        let seq = synthesize_sequence(&[], &g, 1e-4, 6, 3).unwrap();
        for u in &seq {
            assert!((energy_norm_sq(u).sqrt() - 1e-4).abs() < 1e-12);
        }
        let opts = ExtractOptions {
            nu_floor: 1e-3,
            ..Default::default()
        };
        let d = extract_profiles(&seq, &opts).unwrap();
        assert!(d.bubbles.is_empty());
        for (r, u) in d.remainders.iter().zip(&seq) {
            assert_eq!(r.fields()[0].values(), u.fields()[0].values());
        }
        let rep = orthogonality_check(&d, &seq, &opts).unwrap();
        assert!(rep.defects.iter().all(|&x| x < 1e-12));
    }

    #[test]
    fn overflow_and_separation_are_checked() {
        let g = grid();
        let datum = gaussian_bubble(&g, 1.0, 0.0, 1.0);
        let far = BubbleSpec {
            datum: datum.clone(),
            shifts: vec![(0.0, [30.0, 0.0, 0.0])],
        };
        assert!(matches!(
            synthesize_sequence(&[far], &g, 0.0, 1, 0),
            Err(Error::BoxOverflow(_))
        ));
        let a = BubbleSpec {
            datum: datum.clone(),
            shifts: vec![(0.0, [0.0; 3]); 3],
        };
        let b = BubbleSpec {
            datum,
            shifts: vec![(0.0, [5.0, 0.0, 0.0]); 3],
        };
        assert!(synthesize_sequence(&[a, b], &g, 0.0, 3, 0).is_err());
    }

    #[test]
    fn translation_is_exact_on_grid_shifts() {
        let g = grid();
        let d = gaussian_bubble(&g, 1.0, 0.3, 1.2);
        let dx = g.spacing();
        let moved = translate(&d, [-8.0 * dx, 0.0, 0.0]);
        let idx = g.len() / 2;
        assert!((moved.fields()[0].values()[idx + 8] - d.fields()[0].values()[idx]).abs() < 1e-13);
    }

    #[test]
    fn bernstein_constant_bounds_blocks() {
        let g = grid();
        let c0 = detection_constant(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let p = smooth_noise(&g, &mut rng);
            let d = besov_detection(
                &p,
                &ExtractOptions {
                    t_min: 0.0,
                    t_max: 0.0,
                    ..Default::default()
                },
            );
            let l2 = p
                .pair()
                .components()
                .iter()
                .map(|u| lebesgue_norm(u, 2.0))
                .fold(0.0, f64::max);
            assert!(d.value <= c0 * l2 * (1.0 + 1e-12));
        }
    }

    #[test]
    fn moving_bubble_is_recovered() {
        let g = SpectralGrid::new(1, 512, 48.0).unwrap();
        let planted = BubbleSpec {
            datum: gaussian_bubble(&g, 0.8, 0.4, 1.0),
            shifts: (1..=8)
                .map(|n| (0.25 * n as f64, [-3.0 * n as f64, 0.0, 0.0]))
                .collect(),
        };
        let seq = synthesize_sequence(std::slice::from_ref(&planted), &g, 0.0, 8, 0).unwrap();
        let opts = ExtractOptions {
            t_min: -3.0,
            t_max: 3.0,
            ..Default::default()
        };
        let d = extract_profiles(&seq, &opts).unwrap();
        assert_eq!(d.bubbles.len(), 1);
        assert_eq!(d.bubbles[0].spec.shifts, planted.shifts);
        assert!((d.bubbles[0].energy / planted.energy() - 1.0).abs() < 1e-10);
        assert!(d.nu_series[1] < 1e-8);
        let rep = orthogonality_check(&d, &seq, &opts).unwrap();
        assert!(rep.c0_relation[0]);
    }
}
