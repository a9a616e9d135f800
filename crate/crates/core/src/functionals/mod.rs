//! Variational and conserved quantities of the system.

mod bumps;
mod inequality;

pub use bumps::{random_pair_with_action, BumpSampler, BumpSpec, GaussianBump, NehariSide};
pub use inequality::{
    conditional_inequality_check, BranchCheck, ConditionalReport, ConditionalStatus,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{gradient_norm_sq, partition_bump, ScalarField, SpectralGrid};

/// Coupling `beta` and self-interaction weights `mu1`, `mu2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearityParams {
    pub beta: f64,
    pub mu1: f64,
    pub mu2: f64,
}

impl Default for NonlinearityParams {
    fn default() -> Self {
        Self {
            beta: 0.0,
            mu1: 1.0,
            mu2: 1.0,
        }
    }
}

impl NonlinearityParams {
    pub fn new(beta: f64, mu1: f64, mu2: f64) -> Result<Self> {
        let p = Self { beta, mu1, mu2 };
        p.validate()?;
        Ok(p)
    }

    pub fn with_beta(beta: f64) -> Result<Self> {
        Self::new(beta, 1.0, 1.0)
    }

    /// No nonlinearity at all: the linear Klein-Gordon flow. Used for checks only.
    pub fn free() -> Self {
        Self {
            beta: 0.0,
            mu1: 0.0,
            mu2: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.beta.is_finite() && self.mu1.is_finite() && self.mu2.is_finite();
        if !ok || self.beta < 0.0 || self.mu1 <= 0.0 || self.mu2 <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "need beta >= 0 and mu1, mu2 > 0, got beta={} mu1={} mu2={}",
                self.beta, self.mu1, self.mu2
            )));
        }
        Ok(())
    }

    /// `(mu1 u1^3 + beta u2^2 u1, mu2 u2^3 + beta u1^2 u2)`.
    #[inline]
    pub fn force(&self, u1: f64, u2: f64) -> (f64, f64) {
        let (a, b) = (u1 * u1, u2 * u2);
        (
            u1 * (self.mu1 * a + self.beta * b),
            u2 * (self.mu2 * b + self.beta * a),
        )
    }

    /// `mu1 u1^4 + mu2 u2^4 + 2 beta u1^2 u2^2`.
    #[inline]
    pub fn quartic(&self, u1: f64, u2: f64) -> f64 {
        let (a, b) = (u1 * u1, u2 * u2);
        self.mu1 * a * a + self.mu2 * b * b + 2.0 * self.beta * a * b
    }
}

/// Static pair `(u1, u2)` on one grid.
#[derive(Clone, Debug)]
pub struct FieldPair {
    u1: ScalarField,
    u2: ScalarField,
}

impl FieldPair {
    pub fn new(u1: ScalarField, u2: ScalarField) -> Result<Self> {
        if u1.grid() != u2.grid() {
            return Err(Error::GridMismatch);
        }
        Ok(Self { u1, u2 })
    }

    pub fn zeros(grid: &SpectralGrid) -> Self {
        Self {
            u1: ScalarField::zeros(grid),
            u2: ScalarField::zeros(grid),
        }
    }

    pub fn grid(&self) -> &SpectralGrid {
        self.u1.grid()
    }

    pub fn u1(&self) -> &ScalarField {
        &self.u1
    }

    pub fn u2(&self) -> &ScalarField {
        &self.u2
    }

    pub fn components(&self) -> [&ScalarField; 2] {
        [&self.u1, &self.u2]
    }

    pub fn into_parts(self) -> (ScalarField, ScalarField) {
        (self.u1, self.u2)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            u1: self.u1.scaled(s),
            u2: self.u2.scaled(s),
        }
    }

    pub fn add_scaled(&self, other: &Self, a: f64) -> Self {
        Self {
            u1: self.u1.add_scaled(&other.u1, a),
            u2: self.u2.add_scaled(&other.u2, a),
        }
    }

    pub fn swapped(&self) -> Self {
        Self {
            u1: self.u2.clone(),
            u2: self.u1.clone(),
        }
    }
}

/// Phase-space point `((u1, v1), (u2, v2))` with `v = du/dt`.
#[derive(Clone, Debug)]
pub struct PhasePoint {
    pair: FieldPair,
    v1: ScalarField,
    v2: ScalarField,
}

impl PhasePoint {
    pub fn new(pair: FieldPair, v1: ScalarField, v2: ScalarField) -> Result<Self> {
        if v1.grid() != pair.grid() || v2.grid() != pair.grid() {
            return Err(Error::GridMismatch);
        }
        Ok(Self { pair, v1, v2 })
    }

    pub fn at_rest(pair: FieldPair) -> Self {
        let g = pair.grid().clone();
        Self {
            pair,
            v1: ScalarField::zeros(&g),
            v2: ScalarField::zeros(&g),
        }
    }

    pub fn zeros(grid: &SpectralGrid) -> Self {
        Self::at_rest(FieldPair::zeros(grid))
    }

    pub fn grid(&self) -> &SpectralGrid {
        self.pair.grid()
    }

    pub fn pair(&self) -> &FieldPair {
        &self.pair
    }

    pub fn v1(&self) -> &ScalarField {
        &self.v1
    }

    pub fn v2(&self) -> &ScalarField {
        &self.v2
    }

    pub fn velocities(&self) -> [&ScalarField; 2] {
        [&self.v1, &self.v2]
    }

    /// Fields in storage order `u1, v1, u2, v2`.
    pub fn fields(&self) -> [&ScalarField; 4] {
        [&self.pair.u1, &self.v1, &self.pair.u2, &self.v2]
    }

    pub fn from_fields(fields: [ScalarField; 4]) -> Result<Self> {
        let [u1, v1, u2, v2] = fields;
        Self::new(FieldPair::new(u1, u2)?, v1, v2)
    }

    pub fn into_fields(self) -> [ScalarField; 4] {
        [self.pair.u1, self.v1, self.pair.u2, self.v2]
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            pair: self.pair.scaled(s),
            v1: self.v1.scaled(s),
            v2: self.v2.scaled(s),
        }
    }

    pub fn add_scaled(&self, other: &Self, a: f64) -> Self {
        Self {
            pair: self.pair.add_scaled(&other.pair, a),
            v1: self.v1.add_scaled(&other.v1, a),
            v2: self.v2.add_scaled(&other.v2, a),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.fields().iter().all(|f| f.is_finite())
    }
}

/// All functionals of a phase point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionalReport {
    #[serde(rename = "E")]
    pub energy: f64,
    #[serde(rename = "J")]
    pub j: f64,
    #[serde(rename = "K0")]
    pub k0: f64,
    #[serde(rename = "K2")]
    pub k2: f64,
    #[serde(rename = "G0")]
    pub g0: f64,
    #[serde(rename = "G2")]
    pub g2: f64,
    #[serde(rename = "P")]
    pub momentum: Vec<f64>,
    #[serde(rename = "H1sq")]
    pub h1_norm_sq: f64,
}

/// Building blocks shared by all static functionals.
#[derive(Clone, Copy, Debug)]
pub(crate) struct StaticParts {
    pub grad_sq: f64,
    pub mass: f64,
    pub quartic: f64,
    pub space_dim: f64,
}

impl StaticParts {
    pub fn of(pair: &FieldPair, params: &NonlinearityParams) -> Self {
        let grid = pair.grid();
        let mut grad_sq = 0.0;
        let mut mass = 0.0;
        for u in pair.components() {
            let (g, m) = quadratic_parts(u);
            grad_sq += g;
            mass += m;
        }
        let quartic = quartic_integral(pair, params);
        Self {
            grad_sq,
            mass,
            quartic,
            space_dim: grid.space_dim() as f64,
        }
    }

    pub fn h1_sq(&self) -> f64 {
        self.grad_sq + self.mass
    }

    pub fn j(&self) -> f64 {
        0.5 * self.h1_sq() - 0.25 * self.quartic
    }

    pub fn k0(&self) -> f64 {
        self.h1_sq() - self.quartic
    }

    pub fn k2(&self) -> f64 {
        self.grad_sq - 0.25 * self.space_dim * self.quartic
    }
}

/// `(||grad u||^2, ||u||^2)` from one transform.
pub(crate) fn quadratic_parts(u: &ScalarField) -> (f64, f64) {
    let grid = u.grid();
    let k2 = grid.k_squared();
    let spec = u.spectrum();
    let mut g = 0.0;
    let mut m = 0.0;
    for (c, k) in spec.iter().zip(k2) {
        let a = c.norm_sqr();
        g += k * a;
        m += a;
    }
    let w = grid.cell_weight() / grid.len() as f64;
    (g * w, m * w)
}

pub(crate) fn quartic_from_physical(
    grid: &SpectralGrid,
    p1: &[f64],
    p2: &[f64],
    params: &NonlinearityParams,
) -> f64 {
    let density: Vec<f64> = p1
        .iter()
        .zip(p2)
        .map(|(a, b)| params.quartic(*a, *b))
        .collect();
    grid.integrate(&density)
}

/// `int (mu1 u1^4 + mu2 u2^4 + 2 beta u1^2 u2^2)`.
pub fn quartic_integral(pair: &FieldPair, params: &NonlinearityParams) -> f64 {
    quartic_from_physical(
        pair.grid(),
        &pair.u1.physical(),
        &pair.u2.physical(),
        params,
    )
}

/// `||(u1, u2)||^2_{H^1 x H^1}`.
pub fn h1_norm_sq(pair: &FieldPair) -> f64 {
    pair.components()
        .iter()
        .map(|u| {
            let (g, m) = quadratic_parts(u);
            g + m
        })
        .sum()
}

/// `||(u1, u2)||^2_{L^2 x L^2}`.
pub fn l2_norm_sq(pair: &FieldPair) -> f64 {
    pair.components().iter().map(|u| quadratic_parts(u).1).sum()
}

/// `sum_j ||grad u_j||^2`.
pub fn gradient_sq(pair: &FieldPair) -> f64 {
    pair.components().iter().map(|u| gradient_norm_sq(u)).sum()
}

/// `||U||^2_{H x H} = ||u||^2_{H^1} + ||v||^2_{L^2}`.
pub fn energy_norm_sq(phase: &PhasePoint) -> f64 {
    h1_norm_sq(&phase.pair)
        + phase
            .velocities()
            .iter()
            .map(|v| quadratic_parts(v).1)
            .sum::<f64>()
}

/// `<A, B>_{H x H}`, the inner product of [`energy_norm_sq`].
pub fn energy_inner(a: &PhasePoint, b: &PhasePoint) -> f64 {
    let grid = a.grid();
    let k2 = grid.k_squared();
    let w = grid.cell_weight() / grid.len() as f64;
    let mut total = 0.0;
    for (f, (x, y)) in a.fields().iter().zip(b.fields()).enumerate() {
        let (sx, sy) = (x.spectrum(), y.spectrum());
        // fields are ordered u1, v1, u2, v2
        let position = f % 2 == 0;
        for i in 0..sx.len() {
            let m = if position { 1.0 + k2[i] } else { 1.0 };
            total += m * (sx[i].conj() * sy[i]).re;
        }
    }
    total * w
}

/// Static action `J`.
pub fn static_action(pair: &FieldPair, params: &NonlinearityParams) -> f64 {
    StaticParts::of(pair, params).j()
}

/// Derivative of `J` along amplitude scaling.
pub fn k0(pair: &FieldPair, params: &NonlinearityParams) -> f64 {
    StaticParts::of(pair, params).k0()
}

/// Derivative of `J` along the dilation `e^{d lambda / 2} phi(e^lambda x)`.
pub fn k2(pair: &FieldPair, params: &NonlinearityParams) -> f64 {
    StaticParts::of(pair, params).k2()
}

/// `J - K0/4`.
pub fn g0(pair: &FieldPair, params: &NonlinearityParams) -> f64 {
    let s = StaticParts::of(pair, params);
    s.j() - 0.25 * s.k0()
}

/// `J - K2/3`.
pub fn g2(pair: &FieldPair, params: &NonlinearityParams) -> f64 {
    let s = StaticParts::of(pair, params);
    s.j() - s.k2() / 3.0
}

/// Kinetic energy `1/2 (||v1||^2 + ||v2||^2)`.
pub fn kinetic(phase: &PhasePoint) -> f64 {
    0.5 * phase
        .velocities()
        .iter()
        .map(|v| quadratic_parts(v).1)
        .sum::<f64>()
}

/// `E = J + kinetic`.
pub fn energy(phase: &PhasePoint, params: &NonlinearityParams) -> f64 {
    static_action(&phase.pair, params) + kinetic(phase)
}

/// Momentum `P_j = <v1, d_j u1> + <v2, d_j u2>`; zero on radial grids.
pub fn momentum(phase: &PhasePoint) -> Vec<f64> {
    let grid = phase.grid();
    if grid.is_radial() {
        return vec![0.0; 3];
    }
    let w = grid.cell_weight() / grid.len() as f64;
    let mut p = vec![0.0; grid.dim()];
    for (u, v) in phase.pair.components().into_iter().zip(phase.velocities()) {
        let us = u.spectrum();
        let vs = v.spectrum();
        for i in 0..grid.len() {
            let k = grid.derivative_wavevector(i);
            // Re(conj(v) * i k u) = -k Im(conj(v) u)
            let im = (vs[i].conj() * us[i]).im;
            for (a, pa) in p.iter_mut().enumerate() {
                *pa -= k[a] * im * w;
            }
        }
    }
    p
}

/// All functionals at once.
pub fn report(phase: &PhasePoint, params: &NonlinearityParams) -> FunctionalReport {
    let s = StaticParts::of(&phase.pair, params);
    let j = s.j();
    FunctionalReport {
        energy: j + kinetic(phase),
        j,
        k0: s.k0(),
        k2: s.k2(),
        g0: j - 0.25 * s.k0(),
        g2: j - s.k2() / 3.0,
        momentum: momentum(phase),
        h1_norm_sq: s.h1_sq(),
    }
}

/// Energy density `1/2 sum (v^2 + |grad u|^2 + u^2) - 1/4 quartic` (Cartesian grids).
pub fn energy_density(phase: &PhasePoint, params: &NonlinearityParams) -> Result<ScalarField> {
    let grid = phase.grid();
    if grid.is_radial() {
        return Err(Error::Geometry("radial"));
    }
    let mut e = vec![0.0; grid.len()];
    for (u, v) in phase.pair.components().into_iter().zip(phase.velocities()) {
        for (ei, (a, b)) in e.iter_mut().zip(u.values().iter().zip(v.values())) {
            *ei += 0.5 * (a * a + b * b);
        }
        for axis in 0..grid.dim() {
            let d = u.derivative(axis)?;
            for (ei, g) in e.iter_mut().zip(d.values()) {
                *ei += 0.5 * g * g;
            }
        }
    }
    for (ei, (a, b)) in e
        .iter_mut()
        .zip(phase.pair.u1.values().iter().zip(phase.pair.u2.values()))
    {
        *ei -= 0.25 * params.quartic(*a, *b);
    }
    ScalarField::from_values(grid, e)
}

/// Localized first moment `int chi_R(x - c) (x - c) e(x) dx`, one entry per axis.
pub fn localized_virial(
    phase: &PhasePoint,
    params: &NonlinearityParams,
    radius: f64,
    center: &[f64],
) -> Result<Vec<f64>> {
    let grid = phase.grid();
    if !(radius > 0.0) || 2.0 * radius > grid.half_length() {
        return Err(Error::InvalidArgument(format!(
            "cutoff radius {radius} needs 0 < 2R <= {}",
            grid.half_length()
        )));
    }
    if center.len() != grid.dim() {
        return Err(Error::InvalidArgument(
            "center has the wrong dimension".into(),
        ));
    }
    let e = energy_density(phase, params)?;
    let mut out = vec![0.0; grid.dim()];
    for (i, ei) in e.values().iter().enumerate() {
        let x = grid.position(i);
        let mut r2 = 0.0;
        for a in 0..grid.dim() {
            r2 += (x[a] - center[a]).powi(2);
        }
        let chi = partition_bump(r2.sqrt() / radius);
        if chi == 0.0 {
            continue;
        }
        for a in 0..grid.dim() {
            out[a] += chi * (x[a] - center[a]) * ei;
        }
    }
    let w = grid.cell_weight();
    Ok(out.into_iter().map(|v| v * w).collect())
}

/// `lambda*` with `K0[e^{lambda*} pair] = 0`.
pub fn scaling_normalize(pair: &FieldPair, params: &NonlinearityParams) -> Result<f64> {
    let a = h1_norm_sq(pair);
    let b = quartic_integral(pair, params);
    if !(b > 0.0) || !(a > 0.0) {
        return Err(Error::NoCrossing(b));
    }
    Ok(0.5 * (a / b).ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{lebesgue_norm, SpectralGrid};
    use std::f64::consts::PI;

    fn gaussian_pair(grid: &SpectralGrid) -> FieldPair {
        let u1 = ScalarField::from_fn(grid, |x| {
            1.3 * (-(x.iter().map(|c| c * c).sum::<f64>()) / 2.0).exp()
        });
        let u2 = ScalarField::from_fn(grid, |x| {
            0.7 * (-(x.iter().map(|c| (c - 0.5).powi(2)).sum::<f64>()) / 1.5).exp()
        });
        FieldPair::new(u1, u2).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(NonlinearityParams::new(-0.1, 1.0, 1.0).is_err());
        assert!(NonlinearityParams::new(0.0, 0.0, 1.0).is_err());
        assert!(NonlinearityParams::new(2.0, 1.0, 0.5).is_ok());
        let p = NonlinearityParams::with_beta(2.0).unwrap();
        assert_eq!(p.force(1.0, 2.0), (9.0, 12.0));
        assert_eq!(p.quartic(1.0, 2.0), 1.0 + 16.0 + 16.0);
    }

    #[test]
    fn zero_pair_and_kinetic_only() {
        let g = SpectralGrid::new(2, 16, 4.0).unwrap();
        let p = NonlinearityParams::default();
        let z = PhasePoint::zeros(&g);
        let r = report(&z, &p);
        assert_eq!((r.energy, r.j, r.k0, r.k2), (0.0, 0.0, 0.0, 0.0));
        let w = ScalarField::from_fn(&g, |x| (-(x[0] * x[0] + x[1] * x[1])).exp());
        let ph = PhasePoint::new(FieldPair::zeros(&g), w.clone(), ScalarField::zeros(&g)).unwrap();
        let expect = 0.5 * lebesgue_norm(&w, 2.0).powi(2);
        assert!((energy(&ph, &p) - expect).abs() < 1e-14 * expect.max(1.0));
    }

    #[test]
    fn g0_g2_closed_forms() {
        let g = SpectralGrid::new(3, 24, 7.0).unwrap();
        let p = NonlinearityParams::new(1.5, 1.0, 0.8).unwrap();
        let pair = gaussian_pair(&g);
        let h1: f64 = pair
            .components()
            .iter()
            .map(|u| lebesgue_norm(&u.apply_bessel(1.0), 2.0).powi(2))
            .sum();
        let l2: f64 = pair
            .components()
            .iter()
            .map(|u| lebesgue_norm(u, 2.0).powi(2))
            .sum();
        assert!((g0(&pair, &p) - 0.25 * h1).abs() < 1e-12 * h1);
        let expect = (h1 - l2) / 6.0 + 0.5 * l2;
        assert!((g2(&pair, &p) - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn k0_is_amplitude_derivative() {
        let g = SpectralGrid::new(2, 32, 8.0).unwrap();
        let p = NonlinearityParams::with_beta(0.7).unwrap();
        let pair = gaussian_pair(&g);
        let h: f64 = 1e-5;
        let fd = (static_action(&pair.scaled(h.exp()), &p)
            - static_action(&pair.scaled((-h).exp()), &p))
            / (2.0 * h);
        let k = k0(&pair, &p);
        assert!((fd - k).abs() < 1e-8 * k.abs().max(1.0), "{fd} {k}");
    }

    #[test]
    fn scaling_normalize_properties() {
        let g = SpectralGrid::new(2, 32, 8.0).unwrap();
        let p = NonlinearityParams::with_beta(0.3).unwrap();
        let pair = gaussian_pair(&g);
        let ls = scaling_normalize(&pair, &p).unwrap();
        let on = pair.scaled(ls.exp());
        let a = h1_norm_sq(&on);
        assert!(k0(&on, &p).abs() < 1e-10 * a);
        assert!(scaling_normalize(&on, &p).unwrap().abs() < 1e-12);
        let mu: f64 = 0.37;
        let shifted = scaling_normalize(&pair.scaled(mu.exp()), &p).unwrap();
        assert!((shifted - (ls - mu)).abs() < 1e-12);
        assert!(k0(&pair.scaled((ls - 0.1).exp()), &p) > 0.0);
        assert!(matches!(
            scaling_normalize(&FieldPair::zeros(&g), &p),
            Err(Error::NoCrossing(_))
        ));
        // bisection on j'(lambda) = K0[e^lambda pair]
        let (mut lo, mut hi) = (-10.0, 10.0);
        for _ in 0..200 {
            let mid: f64 = 0.5 * (lo + hi);
            if k0(&pair.scaled(mid.exp()), &p) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((0.5 * (lo + hi) - ls).abs() < 1e-10);
    }

    #[test]
    fn momentum_of_even_and_travelling_data() {
        let g = SpectralGrid::new(1, 256, 20.0).unwrap();
        let f = |x: f64| (-x * x / 2.0).exp();
        let fp = |x: f64| -x * (-x * x / 2.0).exp();
        let u = ScalarField::from_fn(&g, |x| f(x[0]));
        let even_v = ScalarField::from_fn(&g, |x| (x[0] * x[0] - 1.0) * f(x[0]));
        let ph = PhasePoint::new(
            FieldPair::new(u.clone(), u.clone()).unwrap(),
            even_v.clone(),
            even_v,
        )
        .unwrap();
        assert!(momentum(&ph)[0].abs() < 1e-14);
        let c = 0.6;
        let v = ScalarField::from_fn(&g, |x| -c * fp(x[0]));
        let ph = PhasePoint::new(FieldPair::new(u.clone(), u).unwrap(), v.clone(), v).unwrap();
        // ||f'||^2 = sqrt(pi)/2 for f = exp(-x^2/2); two components.
        let expect = -c * PI.sqrt() / 2.0 * 2.0;
        assert!((momentum(&ph)[0] - expect).abs() < 1e-12);
    }

    #[test]
    fn density_integrates_to_energy_and_virial_moments() {
        let g = SpectralGrid::new(2, 128, 16.0).unwrap();
        let p = NonlinearityParams::with_beta(1.0).unwrap();
        let make = |y: [f64; 2]| {
            let u1 = ScalarField::from_fn(&g, |x| {
                (-((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2))).exp()
            });
            let v1 = ScalarField::from_fn(&g, |x| {
                0.5 * (x[0] - y[0]) * (-((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2))).exp()
            });
            let u2 = u1.scaled(0.5);
            PhasePoint::new(FieldPair::new(u1, u2).unwrap(), v1, ScalarField::zeros(&g)).unwrap()
        };
        let ph = make([0.0, 0.0]);
        let e = energy(&ph, &p);
        let dens = energy_density(&ph, &p).unwrap();
        assert!((g.integrate(dens.values()) - e).abs() < 1e-10 * e.abs());
        let x0 = localized_virial(&ph, &p, 7.0, &[0.0, 0.0]).unwrap();
        assert!(x0[0].abs() < 1e-12 && x0[1].abs() < 1e-12);
        let y0 = [1.5, -2.0];
        let x1 = localized_virial(&make(y0), &p, 7.0, &[0.0, 0.0]).unwrap();
        for a in 0..2 {
            assert!((x1[a] - x0[a] - y0[a] * e).abs() < 1e-8 * e.abs(), "{a}");
        }
        assert!(localized_virial(&ph, &p, 9.0, &[0.0, 0.0]).is_err());
    }
}
