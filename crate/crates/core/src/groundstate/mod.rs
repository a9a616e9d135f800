//! Scalar and coupled ground states and the mountain-pass level `h0`.

mod shooting;

pub use shooting::{scalar_ground_state, RadialProfile};

use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{
    h1_norm_sq, k0, scaling_normalize, static_action, FieldPair, NonlinearityParams, StaticParts,
};
use crate::spectral::{sobolev_h1_norm, ScalarField, SpectralGrid};

/// Profile used for candidates and seeds.
pub fn reference_profile() -> &'static RadialProfile {
    static PROFILE: OnceLock<RadialProfile> = OnceLock::new();
    PROFILE.get_or_init(|| {
        scalar_ground_state(20.0, 4000, 1e-5).expect("reference shooting converges")
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroundStateKind {
    Semitrivial,
    Symmetric,
    CoupledAsymmetric,
}

/// Component structure from the two `H^1` norms.
pub fn classify_kind(pair: &FieldPair) -> GroundStateKind {
    let a = sobolev_h1_norm(pair.u1());
    let b = sobolev_h1_norm(pair.u2());
    let (lo, hi) = (a.min(b), a.max(b));
    if lo < 1e-3 * hi {
        GroundStateKind::Semitrivial
    } else if hi - lo <= 1e-3 * hi {
        GroundStateKind::Symmetric
    } else {
        GroundStateKind::CoupledAsymmetric
    }
}

/// Levels of the explicit candidates built from the scalar profile in `R^3`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CandidateLevels {
    /// `J_scalar[S] / max(mu1, mu2)`.
    pub semitrivial: f64,
    /// Level of the synchronized pair `(a S, b S)` with
    /// `mu1 a^2 + beta b^2 = beta a^2 + mu2 b^2 = 1`, when both amplitudes are real.
    pub symmetric: Option<f64>,
    /// Amplitudes `(a, b)` of the synchronized candidate.
    pub symmetric_amplitudes: Option<(f64, f64)>,
    /// Largest `|K0| / ||.||^2_{H^1 x H^1}` over the candidates, by radial quadrature.
    pub constraint_defect: f64,
}

impl CandidateLevels {
    pub fn best(&self) -> f64 {
        self.symmetric
            .map_or(self.semitrivial, |s| s.min(self.semitrivial))
    }
}

/// Synchronized amplitudes, if real and positive.
fn synchronized_amplitudes(params: &NonlinearityParams) -> Option<(f64, f64)> {
    let (m1, m2, b) = (params.mu1, params.mu2, params.beta);
    let (a2, b2) = if m1 == m2 {
        (1.0 / (m1 + b), 1.0 / (m1 + b))
    } else {
        let det = m1 * m2 - b * b;
        if det == 0.0 {
            return None;
        }
        ((m2 - b) / det, (m1 - b) / det)
    };
    (a2 > 0.0 && b2 > 0.0).then(|| (a2.sqrt(), b2.sqrt()))
}

pub fn candidate_levels(params: &NonlinearityParams) -> Result<CandidateLevels> {
    params.validate()?;
    let p = reference_profile();
    let h1 = p.h1_norm_sq();
    let q4 = p.quartic_integral();
    let level_of = |a: f64, b: f64| {
        let norm = (a * a + b * b) * h1;
        let quartic =
            (params.mu1 * a.powi(4) + params.mu2 * b.powi(4) + 2.0 * params.beta * a * a * b * b)
                * q4;
        (0.5 * norm - 0.25 * quartic, (norm - quartic).abs() / norm)
    };
    let (s1, d1) = level_of(1.0 / params.mu1.sqrt(), 0.0);
    let (s2, d2) = level_of(0.0, 1.0 / params.mu2.sqrt());
    let mut defect = d1.max(d2);
    let amps = synchronized_amplitudes(params);
    let symmetric = amps.map(|(a, b)| {
        let (l, d) = level_of(a, b);
        defect = defect.max(d);
        l
    });
    Ok(CandidateLevels {
        semitrivial: s1.min(s2),
        symmetric,
        symmetric_amplitudes: amps,
        constraint_defect: defect,
    })
}

/// Solver output.
#[derive(Clone, Debug)]
pub struct GroundState {
    pub pair: FieldPair,
    pub level: f64,
    pub params: NonlinearityParams,
    /// Sup norm of `-Delta Q_i + Q_i - N_i(Q)` over both components.
    pub el_residual: f64,
    pub kind: GroundStateKind,
    pub converged: bool,
    pub iterations: usize,
}

impl GroundState {
    pub fn k0(&self) -> f64 {
        k0(&self.pair, &self.params)
    }

    pub fn table_row(&self) -> GroundStateRow {
        GroundStateRow {
            beta: self.params.beta,
            mu1: self.params.mu1,
            mu2: self.params.mu2,
            level: self.level,
            kind: self.kind,
            residual: self.el_residual,
        }
    }
}

/// One row of the exported ground-state table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundStateRow {
    pub beta: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub level: f64,
    pub kind: GroundStateKind,
    pub residual: f64,
}

/// `(N_1(u), N_2(u))` in the stored representation.
fn force_pair(pair: &FieldPair, params: &NonlinearityParams) -> FieldPair {
    let grid = pair.grid();
    let p1 = pair.u1().physical();
    let p2 = pair.u2().physical();
    let (mut f1, mut f2) = (vec![0.0; grid.len()], vec![0.0; grid.len()]);
    for i in 0..grid.len() {
        let (a, b) = params.force(p1[i], p2[i]);
        f1[i] = a;
        f2[i] = b;
    }
    let rep = |f: &[f64]| {
        let mut v = ScalarField::from_physical(grid, f)
            .expect("finite force")
            .into_values();
        if grid.is_radial() {
            grid.make_odd(&mut v);
        }
        ScalarField::from_values(grid, v).expect("finite force")
    };
    FieldPair::new(rep(&f1), rep(&f2)).expect("same grid")
}

/// `<a, b>_{H^1 x H^1}`.
pub fn h1_inner(a: &FieldPair, b: &FieldPair) -> f64 {
    let grid = a.grid();
    let k2 = grid.k_squared();
    let mut acc = 0.0;
    for (x, y) in a.components().into_iter().zip(b.components()) {
        let (sx, sy) = (x.spectrum(), y.spectrum());
        for i in 0..grid.len() {
            acc += (1.0 + k2[i]) * (sx[i].conj() * sy[i]).re;
        }
    }
    acc * grid.cell_weight() / grid.len() as f64
}

/// `H^1`-gradient of `J`: `u - (1 - Delta)^{-1} N(u)`.
pub fn preconditioned_gradient_j(pair: &FieldPair, params: &NonlinearityParams) -> FieldPair {
    let f = force_pair(pair, params);
    let (f1, f2) = f.into_parts();
    let inv = FieldPair::new(f1.apply_bessel(-2.0), f2.apply_bessel(-2.0)).expect("same grid");
    pair.add_scaled(&inv, -1.0)
}

/// `H^1`-gradient of `G0 = ||u||^2_{H^1} / 4`, which is `u / 2`: a pure scaling
/// direction that the projection onto `K0 = 0` removes.
pub fn preconditioned_gradient_g0(pair: &FieldPair) -> FieldPair {
    pair.scaled(0.5)
}

/// Sup norm of the Euler-Lagrange defect `(1 - Delta) u - N(u)` in physical values.
pub fn euler_lagrange_residual(pair: &FieldPair, params: &NonlinearityParams) -> f64 {
    let f = force_pair(pair, params);
    pair.components()
        .into_iter()
        .zip(f.components())
        .map(|(u, n)| {
            let r = u.apply_bessel(2.0).add_scaled(n, -1.0);
            r.physical().iter().fold(0.0f64, |m, v| m.max(v.abs()))
        })
        .fold(0.0, f64::max)
}

/// `d/dlambda J[e^lambda pair] = K0[e^lambda pair]`.
pub fn ray_slope(pair: &FieldPair, params: &NonlinearityParams, lambda: f64) -> f64 {
    k0(&pair.scaled(lambda.exp()), params)
}

fn project(pair: &FieldPair, params: &NonlinearityParams) -> Result<FieldPair> {
    Ok(pair.scaled(scaling_normalize(pair, params)?.exp()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverOptions {
    /// Descent step in the `H^1` metric; 1 jumps to `(1 - Delta)^{-1} N(u)`.
    pub step: f64,
    pub max_iter: usize,
    pub random_seeds: usize,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            step: 1.0,
            max_iter: 4000,
            random_seeds: 5,
            seed: 7,
        }
    }
}

fn seed_shape(grid: &SpectralGrid) -> ScalarField {
    if grid.space_dim() == 3 {
        let p = reference_profile();
        ScalarField::from_fn(grid, |x| p.at(x.iter().map(|c| c * c).sum::<f64>().sqrt()))
    } else {
        ScalarField::from_fn(grid, |x| {
            2.0 * (-0.5 * x.iter().map(|c| c * c).sum::<f64>()).exp()
        })
    }
}

fn candidate_seed(
    grid: &SpectralGrid,
    params: &NonlinearityParams,
    cands: &CandidateLevels,
) -> FieldPair {
    let s = seed_shape(grid);
    let zero = ScalarField::zeros(grid);
    match cands.symmetric_amplitudes {
        Some((a, b)) if cands.symmetric.unwrap() <= cands.semitrivial => {
            FieldPair::new(s.scaled(a), s.scaled(b)).expect("same grid")
        }
        _ if params.mu1 >= params.mu2 => {
            FieldPair::new(s.scaled(params.mu1.powf(-0.5)), zero).expect("same grid")
        }
        _ => FieldPair::new(zero, s.scaled(params.mu2.powf(-0.5))).expect("same grid"),
    }
}

fn random_seed(grid: &SpectralGrid, rng: &mut ChaCha8Rng) -> FieldPair {
    let comp = |rng: &mut ChaCha8Rng| {
        let amp = rng.random_range(0.2..1.0);
        let width: f64 = rng.random_range(0.8..2.0);
        let shift: [f64; 3] = if grid.is_radial() {
            [0.0; 3]
        } else {
            [0, 1, 2].map(|_| rng.random_range(-0.5..0.5))
        };
        ScalarField::from_fn(grid, |x| {
            let r2: f64 = x.iter().zip(&shift).map(|(a, c)| (a - c).powi(2)).sum();
            amp * (-r2 / (width * width)).exp()
        })
    };
    let a = comp(rng);
    let b = comp(rng);
    FieldPair::new(a, b).expect("same grid")
}

struct Descent {
    pair: FieldPair,
    residual: f64,
    iterations: usize,
    converged: bool,
}

/// Projected descent from one seed: `u <- P(u - step * grad_J(u))`, where `P`
/// rescales onto `K0 = 0`.
fn descend(
    seed: FieldPair,
    params: &NonlinearityParams,
    tol: f64,
    opts: &SolverOptions,
) -> Result<Descent> {
    let mut u = project(&seed, params)?;
    let mut residual = euler_lagrange_residual(&u, params);
    let mut best = residual;
    let mut since_best = 0;
    let mut it = 0;
    while it < opts.max_iter && residual > 0.01 * tol {
        let g = preconditioned_gradient_j(&u, params);
        u = project(&u.add_scaled(&g, -opts.step), params)?;
        it += 1;
        residual = euler_lagrange_residual(&u, params);
        if !residual.is_finite() {
            return Err(Error::NonFinite("ground-state iterate"));
        }
        if residual < 0.999 * best {
            best = residual;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best > 200 {
                break;
            }
        }
    }
    Ok(Descent {
        pair: u,
        residual,
        iterations: it,
        converged: residual <= tol,
    })
}

/// Minimizer of `J` on `K0 = 0` by projected `H^1`-preconditioned descent from the
/// best explicit candidate and `opts.random_seeds` random seeds. Returns the lowest
/// level among limits with residual `<= tol`, or the best iterate flagged unconverged.
pub fn solve_ground_state_with(
    params: &NonlinearityParams,
    grid: &SpectralGrid,
    tol: f64,
    opts: &SolverOptions,
) -> Result<GroundState> {
    params.validate()?;
    if grid.half_length() < 12.0 {
        return Err(Error::InvalidArgument(format!(
            "box half-length {} < 12 cannot hold the decay",
            grid.half_length()
        )));
    }
    let cands = candidate_levels(params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut seeds = vec![candidate_seed(grid, params, &cands)];
    seeds.extend((0..opts.random_seeds).map(|_| random_seed(grid, &mut rng)));
    let runs: Vec<Descent> = seeds
        .into_par_iter()
        .map(|s| descend(s, params, tol, opts))
        .collect::<Result<Vec<_>>>()?;
    let level = |d: &Descent| static_action(&d.pair, params);
    let pick = runs
        .iter()
        .filter(|d| d.converged)
        .min_by(|a, b| level(a).total_cmp(&level(b)))
        .or_else(|| runs.iter().min_by(|a, b| a.residual.total_cmp(&b.residual)))
        .expect("at least one seed");
    Ok(GroundState {
        level: level(pick),
        kind: classify_kind(&pick.pair),
        pair: pick.pair.clone(),
        params: *params,
        el_residual: pick.residual,
        converged: pick.converged,
        iterations: pick.iterations,
    })
}

/// Projected descent from a single given seed, without the level comparison
/// across seeds. Used to follow one branch (semitrivial or synchronized).
pub fn solve_from_seed(
    seed: &FieldPair,
    params: &NonlinearityParams,
    tol: f64,
    opts: &SolverOptions,
) -> Result<GroundState> {
    params.validate()?;
    let d = descend(seed.clone(), params, tol, opts)?;
    Ok(GroundState {
        level: static_action(&d.pair, params),
        kind: classify_kind(&d.pair),
        pair: d.pair,
        params: *params,
        el_residual: d.residual,
        converged: d.converged,
        iterations: d.iterations,
    })
}

/// `(a S, b S)` built from the shooting profile on `grid`.
pub fn profile_pair(grid: &SpectralGrid, a: f64, b: f64) -> FieldPair {
    let s = seed_shape(grid);
    FieldPair::new(s.scaled(a), s.scaled(b)).expect("same grid")
}

pub fn solve_ground_state(
    params: &NonlinearityParams,
    grid: &SpectralGrid,
    tol: f64,
) -> Result<GroundState> {
    solve_ground_state_with(params, grid, tol, &SolverOptions::default())
}

/// Radial grid used by [`h0`]: 1024 points on `r in [0, 24)`.
pub fn default_radial_grid() -> SpectralGrid {
    SpectralGrid::radial(1024, 24.0).expect("valid grid")
}

/// Cached threshold data for one parameter point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEntry {
    pub beta: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub h0: f64,
    pub solver_level: f64,
    pub candidate_level: f64,
    pub kind: GroundStateKind,
    pub residual: f64,
}

impl ThresholdEntry {
    pub fn params(&self) -> Result<NonlinearityParams> {
        NonlinearityParams::new(self.beta, self.mu1, self.mu2)
    }
}

type ParamsKey = [u64; 3];

fn key(p: &NonlinearityParams) -> ParamsKey {
    [p.beta.to_bits(), p.mu1.to_bits(), p.mu2.to_bits()]
}

fn cache() -> &'static RwLock<HashMap<ParamsKey, ThresholdEntry>> {
    static CACHE: OnceLock<RwLock<HashMap<ParamsKey, ThresholdEntry>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Solver tolerance used for cached thresholds.
pub const THRESHOLD_TOL: f64 = 1e-8;

/// `h0 = min(candidate levels, solver level)` with its provenance, cached per params.
pub fn threshold(params: &NonlinearityParams) -> Result<ThresholdEntry> {
    params.validate()?;
    if let Some(e) = cache().read().expect("cache lock").get(&key(params)) {
        return Ok(e.clone());
    }
    let cands = candidate_levels(params)?;
    let gs = solve_ground_state(params, &default_radial_grid(), THRESHOLD_TOL)?;
    if !gs.converged {
        return Err(Error::Precondition(format!(
            "ground-state solver did not converge (residual {:.3e})",
            gs.el_residual
        )));
    }
    let entry = ThresholdEntry {
        beta: params.beta,
        mu1: params.mu1,
        mu2: params.mu2,
        h0: gs.level.min(cands.best()),
        solver_level: gs.level,
        candidate_level: cands.best(),
        kind: gs.kind,
        residual: gs.el_residual,
    };
    cache()
        .write()
        .expect("cache lock")
        .insert(key(params), entry.clone());
    Ok(entry)
}

pub fn h0(params: &NonlinearityParams) -> Result<f64> {
    threshold(params).map(|e| e.h0)
}

/// Every cached entry, sorted by `(beta, mu1, mu2)`.
pub fn cached_thresholds() -> Vec<ThresholdEntry> {
    let mut v: Vec<_> = cache()
        .read()
        .expect("cache lock")
        .values()
        .cloned()
        .collect();
    v.sort_by(|a, b| {
        (a.beta, a.mu1, a.mu2)
            .partial_cmp(&(b.beta, b.mu1, b.mu2))
            .unwrap()
    });
    v
}

/// Inserts previously computed entries; entries with invalid params are skipped.
pub fn preload_thresholds(entries: impl IntoIterator<Item = ThresholdEntry>) {
    let mut c = cache().write().expect("cache lock");
    for e in entries {
        if let Ok(p) = e.params() {
            if e.h0.is_finite() && e.h0 > 0.0 {
                c.insert(key(&p), e);
            }
        }
    }
}

pub fn clear_threshold_cache() {
    cache().write().expect("cache lock").clear();
}

/// `(1 - Delta)^{-1}`-metric check that the pair lies on `K0 = 0`:
/// `|K0| / ||pair||^2_{H^1 x H^1}`.
pub fn constraint_defect(pair: &FieldPair, params: &NonlinearityParams) -> f64 {
    let s = StaticParts::of(pair, params);
    s.k0().abs() / h1_norm_sq(pair)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::g0;

    #[test]
    fn candidate_algebra() {
        let js = reference_profile().action();
        let c0 = candidate_levels(&NonlinearityParams::with_beta(0.0).unwrap()).unwrap();
        // Decoupled: the synchronized pair has twice the level.
        assert!((c0.semitrivial - js).abs() < 1e-12 * js);
        assert!((c0.symmetric.unwrap() - 2.0 * js).abs() < 1e-12 * js);
        let c1 = candidate_levels(&NonlinearityParams::with_beta(1.0).unwrap()).unwrap();
        assert!((c1.semitrivial - c1.symmetric.unwrap()).abs() < 1e-8 * js);
        let c3 = candidate_levels(&NonlinearityParams::with_beta(3.0).unwrap()).unwrap();
        assert!((c3.symmetric.unwrap() / c3.semitrivial - 0.5).abs() < 1e-12);
        assert!(c3.constraint_defect < 1e-6);
        // No synchronized pair when mu1 < beta < mu2.
        let mixed = candidate_levels(&NonlinearityParams::new(1.5, 1.0, 2.0).unwrap()).unwrap();
        assert!(mixed.symmetric.is_none());
        assert!((mixed.semitrivial - js / 2.0).abs() < 1e-12 * js);
    }

    #[test]
    fn one_dimensional_soliton() {
        // In 1D the scalar ground state is sqrt(2) sech(x), with J = 4/3.
        let g = SpectralGrid::new(1, 256, 16.0).unwrap();
        let gs =
            solve_ground_state(&NonlinearityParams::with_beta(0.0).unwrap(), &g, 1e-9).unwrap();
        assert!(gs.converged);
        assert_eq!(gs.kind, GroundStateKind::Semitrivial);
        assert!((gs.level - 4.0 / 3.0).abs() < 1e-9, "{}", gs.level);
        // ||sqrt(2) sech||_2^2 = 4
        let mass = crate::functionals::l2_norm_sq(&gs.pair);
        assert!((mass - 4.0).abs() < 1e-8, "{mass}");
    }

    #[test]
    fn radial_levels_match_candidates() {
        let g = default_radial_grid();
        let js = reference_profile().action();
        for (beta, kind, expect) in [
            (0.0, GroundStateKind::Semitrivial, js),
            (3.0, GroundStateKind::Symmetric, 0.5 * js),
        ] {
            let p = NonlinearityParams::with_beta(beta).unwrap();
            let gs = solve_ground_state(&p, &g, 1e-7).unwrap();
            assert!(gs.converged, "beta {beta}: residual {}", gs.el_residual);
            assert_eq!(gs.kind, kind);
            assert!(
                (gs.level - expect).abs() < 1e-4 * expect,
                "beta {beta}: {} vs {expect}",
                gs.level
            );
            assert!(constraint_defect(&gs.pair, &p) < 1e-10);
            let gv = g0(&gs.pair, &p);
            assert!((gv - gs.level).abs() < 1e-8 * gs.level);
            assert!((0.25 * h1_norm_sq(&gs.pair) - gs.level).abs() < 1e-6 * gs.level);
        }
    }

    #[test]
    fn mountain_pass_signs() {
        let g = default_radial_grid();
        let p = NonlinearityParams::with_beta(1.0).unwrap();
        let gs = solve_ground_state(&p, &g, 1e-7).unwrap();
        for l in [-0.1, -0.01] {
            assert!(ray_slope(&gs.pair, &p, l) > 0.0);
        }
        for l in [0.01, 0.1] {
            assert!(ray_slope(&gs.pair, &p, l) < 0.0);
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let g = SpectralGrid::new(1, 64, 12.0).unwrap();
        let p = NonlinearityParams::new(0.7, 1.0, 1.3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_seed(&g, &mut rng).scaled(2.0);
        let gj = preconditioned_gradient_j(&u, &p);
        let gg = preconditioned_gradient_g0(&u);
        for _ in 0..10 {
            let d = random_seed(&g, &mut rng);
            let h = 1e-4;
            let fd_j = (static_action(&u.add_scaled(&d, h), &p)
                - static_action(&u.add_scaled(&d, -h), &p))
                / (2.0 * h);
            let an_j = h1_inner(&gj, &d);
            assert!(
                (fd_j - an_j).abs() < 1e-5 * an_j.abs().max(1e-3),
                "{fd_j} {an_j}"
            );
            let fd_g = (g0(&u.add_scaled(&d, h), &p) - g0(&u.add_scaled(&d, -h), &p)) / (2.0 * h);
            let an_g = h1_inner(&gg, &d);
            assert!((fd_g - an_g).abs() < 1e-5 * an_g.abs(), "{fd_g} {an_g}");
        }
    }
}
