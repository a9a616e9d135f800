//! Periodic Fourier discretization: grids, fields, multipliers, dyadic blocks and norms.
//!
//! Two geometries share one code path. A Cartesian grid samples `[-L, L)^d`. A
//! radial grid stores a radially symmetric function `u(|x|)` on `R^3` through its
//! odd extension `w(x) = x u(|x|)` on `[-L, L)`; every radial Fourier multiplier of
//! `R^3` acts on `w` as the same one-dimensional multiplier, so the linear
//! machinery is identical and only the measure and the pointwise nonlinearity
//! change.

mod field;
mod lp;
mod norms;
mod snapshot;

pub use field::ScalarField;
pub use lp::{besov_norm, lp_decompose, lp_project, partition_bump, LpBlock};
pub use norms::{gradient_norm_sq, l2_norm_spectral, lebesgue_norm, sobolev_h1_norm};
pub use snapshot::{read_snapshot, write_snapshot, Snapshot};

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    Cartesian,
    /// Radially symmetric fields on R^3 stored as `w = r u` on a 1D grid.
    Radial,
}

struct GridInner {
    dim: usize,
    points: usize,
    half_length: f64,
    geometry: Geometry,
    spacing: f64,
    coords: Vec<f64>,
    wavenumbers: Vec<f64>,
    k_sq: Vec<f64>,
    bessel: Vec<f64>,
    dealias: Vec<bool>,
    deriv_k: Vec<[f64; 3]>,
    weights: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

/// Immutable, cheaply clonable grid description with precomputed multiplier tables.
#[derive(Clone)]
pub struct SpectralGrid {
    inner: Arc<GridInner>,
}

impl fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralGrid")
            .field("geometry", &self.inner.geometry)
            .field("dim", &self.inner.dim)
            .field("points", &self.inner.points)
            .field("half_length", &self.inner.half_length)
            .finish()
    }
}

impl PartialEq for SpectralGrid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.dim == other.inner.dim
                && self.inner.points == other.inner.points
                && self.inner.half_length == other.inner.half_length
                && self.inner.geometry == other.inner.geometry)
    }
}

/// Grids at least this large spread axis transforms over the rayon pool.
const PARALLEL_THRESHOLD: usize = 1 << 15;
const TILE_LINES: usize = 16;

fn supported_size(n: usize) -> bool {
    if n < 8 || !n.is_multiple_of(2) {
        return false;
    }
    let mut m = n;
    while m.is_multiple_of(2) {
        m /= 2;
    }
    while m.is_multiple_of(3) {
        m /= 3;
    }
    m == 1
}

impl SpectralGrid {
    /// Cartesian grid on `[-L, L)^dim` with `points` samples per axis.
    pub fn new(dim: usize, points: usize, half_length: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::UnsupportedDimension(dim));
        }
        Self::build(dim, points, half_length, Geometry::Cartesian)
    }

    /// Radial grid for rotation-invariant fields on R^3.
    pub fn radial(points: usize, half_length: f64) -> Result<Self> {
        Self::build(1, points, half_length, Geometry::Radial)
    }

    fn build(dim: usize, n: usize, half_length: f64, geometry: Geometry) -> Result<Self> {
        if !supported_size(n) {
            return Err(Error::UnsupportedSize(n));
        }
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "box half length must be positive, got {half_length}"
            )));
        }
        let spacing = 2.0 * half_length / n as f64;
        let coords: Vec<f64> = (0..n).map(|i| -half_length + i as f64 * spacing).collect();
        let wavenumbers: Vec<f64> = (0..n)
            .map(|i| PI * signed_mode(i, n) as f64 / half_length)
            .collect();
        let len = n.pow(dim as u32);
        let third = n as i64 / 3;
        let mut k_sq = vec![0.0; len];
        let mut dealias = vec![true; len];
        let mut deriv_k = vec![[0.0; 3]; len];
        for idx in 0..len {
            let mut rem = idx;
            let mut s = 0.0;
            let mut keep = true;
            for a in (0..dim).rev() {
                let i = rem % n;
                rem /= n;
                s += wavenumbers[i] * wavenumbers[i];
                keep &= signed_mode(i, n).abs() <= third;
                if i != n / 2 {
                    deriv_k[idx][a] = wavenumbers[i];
                }
            }
            k_sq[idx] = s;
            dealias[idx] = keep;
        }
        let bessel = k_sq.iter().map(|k2| (1.0 + k2).sqrt()).collect();
        let weights = match geometry {
            Geometry::Cartesian => Vec::new(),
            Geometry::Radial => coords.iter().map(|x| 2.0 * PI * x * x * spacing).collect(),
        };
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        Ok(Self {
            inner: Arc::new(GridInner {
                dim,
                points: n,
                half_length,
                geometry,
                spacing,
                coords,
                wavenumbers,
                k_sq,
                bessel,
                dealias,
                deriv_k,
                weights,
                fwd,
                inv,
            }),
        })
    }

    /// Number of array axes.
    pub fn dim(&self) -> usize {
        self.inner.dim
    }

    /// Dimension of the physical space the fields live on (3 for radial grids).
    pub fn space_dim(&self) -> usize {
        match self.inner.geometry {
            Geometry::Cartesian => self.inner.dim,
            Geometry::Radial => 3,
        }
    }

    pub fn geometry(&self) -> Geometry {
        self.inner.geometry
    }

    pub fn is_radial(&self) -> bool {
        self.inner.geometry == Geometry::Radial
    }

    pub fn points_per_axis(&self) -> usize {
        self.inner.points
    }

    /// Total number of samples.
    pub fn len(&self) -> usize {
        self.inner.k_sq.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn half_length(&self) -> f64 {
        self.inner.half_length
    }

    pub fn spacing(&self) -> f64 {
        self.inner.spacing
    }

    /// Sample coordinates along one axis.
    pub fn coords(&self) -> &[f64] {
        &self.inner.coords
    }

    /// Angular wavenumbers along one axis in FFT order.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.inner.wavenumbers
    }

    /// `|k|^2` for every mode, flat row-major order.
    pub fn k_squared(&self) -> &[f64] {
        &self.inner.k_sq
    }

    /// `<k> = sqrt(1 + |k|^2)` for every mode.
    pub fn bessel_symbol(&self) -> &[f64] {
        &self.inner.bessel
    }

    /// Mask of modes kept by the 2/3 truncation.
    pub fn dealias_mask(&self) -> &[bool] {
        &self.inner.dealias
    }

    /// Wavevector used for first derivatives: the Nyquist component is zero so
    /// that derivatives of real fields stay real.
    pub fn derivative_wavevector(&self, idx: usize) -> [f64; 3] {
        self.inner.deriv_k[idx]
    }

    /// Largest `|k|` on the grid.
    pub fn max_wavenumber(&self) -> f64 {
        let nyq = PI * (self.inner.points / 2) as f64 / self.inner.half_length;
        nyq * (self.inner.dim as f64).sqrt()
    }

    /// Volume of the Cartesian box, or of the ball of radius L for radial grids.
    pub fn volume(&self) -> f64 {
        match self.inner.geometry {
            Geometry::Cartesian => (2.0 * self.inner.half_length).powi(self.inner.dim as i32),
            Geometry::Radial => 4.0 / 3.0 * PI * self.inner.half_length.powi(3),
        }
    }

    /// Quadrature weight of the stored representation: `dx^d`, or `2 pi dx` for
    /// radial grids (so that `cell * sum w^2 = ||u||_2^2`).
    pub fn cell_weight(&self) -> f64 {
        match self.inner.geometry {
            Geometry::Cartesian => self.inner.spacing.powi(self.inner.dim as i32),
            Geometry::Radial => 2.0 * PI * self.inner.spacing,
        }
    }

    /// Integrates a physical density sampled at the grid points.
    pub fn integrate(&self, density: &[f64]) -> f64 {
        assert_eq!(density.len(), self.len());
        match self.inner.geometry {
            Geometry::Cartesian => density.iter().sum::<f64>() * self.cell_weight(),
            Geometry::Radial => density
                .iter()
                .zip(&self.inner.weights)
                .map(|(d, w)| d * w)
                .sum(),
        }
    }

    /// Per-point measure weights (constant `dx^d` for Cartesian grids).
    pub fn point_weight(&self, idx: usize) -> f64 {
        match self.inner.geometry {
            Geometry::Cartesian => self.cell_weight(),
            Geometry::Radial => self.inner.weights[idx],
        }
    }

    /// Multi-index of a flat index, first axis slowest.
    pub fn multi_index(&self, idx: usize) -> [usize; 3] {
        let n = self.inner.points;
        let mut out = [0; 3];
        let mut rem = idx;
        for a in (0..self.inner.dim).rev() {
            out[a] = rem % n;
            rem /= n;
        }
        out
    }

    /// Coordinates of a grid point (unused axes are zero).
    pub fn position(&self, idx: usize) -> [f64; 3] {
        let m = self.multi_index(idx);
        let mut x = [0.0; 3];
        for a in 0..self.inner.dim {
            x[a] = self.inner.coords[m[a]];
        }
        x
    }

    /// Wavevector of a mode (unused axes are zero).
    pub fn wavevector(&self, idx: usize) -> [f64; 3] {
        let m = self.multi_index(idx);
        let mut k = [0.0; 3];
        for a in 0..self.inner.dim {
            k[a] = self.inner.wavenumbers[m[a]];
        }
        k
    }

    /// Largest `|m|` over axes of the integer mode index.
    pub fn mode_extent(&self, idx: usize) -> i64 {
        let m = self.multi_index(idx);
        (0..self.inner.dim)
            .map(|a| signed_mode(m[a], self.inner.points).abs())
            .max()
            .unwrap_or(0)
    }

    /// Unnormalized forward transform of real samples.
    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        assert_eq!(values.len(), self.len());
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut data, false);
        data
    }

    /// Inverse transform (normalized) keeping the real part.
    pub fn inverse_real(&self, mut spectrum: Vec<Complex64>) -> Vec<f64> {
        assert_eq!(spectrum.len(), self.len());
        self.transform(&mut spectrum, true);
        let scale = 1.0 / self.len() as f64;
        spectrum.into_iter().map(|c| c.re * scale).collect()
    }

    /// In-place multidimensional transform, unnormalized in both directions.
    pub fn transform(&self, data: &mut [Complex64], inverse: bool) {
        for axis in 0..self.inner.dim {
            self.transform_axis(data, axis, inverse);
        }
    }

    /// In-place transform along a single axis, unnormalized.
    pub fn transform_axis(&self, data: &mut [Complex64], axis: usize, inverse: bool) {
        let inner = &*self.inner;
        let n = inner.points;
        let fft = if inverse { &inner.inv } else { &inner.fwd };
        let stride = n.pow((inner.dim - 1 - axis) as u32);
        let parallel = data.len() >= PARALLEL_THRESHOLD;
        if stride == 1 {
            let rows = (4096 / n).max(1) * n;
            let work = |chunk: &mut [Complex64], scratch: &mut Vec<Complex64>| {
                fft.process_with_scratch(chunk, scratch)
            };
            let scratch = || vec![Complex64::default(); fft.get_inplace_scratch_len()];
            if parallel {
                data.par_chunks_mut(rows)
                    .for_each_init(scratch, |s, c| work(c, s));
            } else {
                let mut s = scratch();
                work(data, &mut s);
            }
            return;
        }
        // Lines along this axis are strided; gather a tile of them into a
        // contiguous buffer, transform, and scatter back.
        let block = n * stride;
        let tile = TILE_LINES.min(stride);
        let work = |chunk: &mut [Complex64], bufs: &mut (Vec<Complex64>, Vec<Complex64>)| {
            let (buf, scratch) = bufs;
            let mut o0 = 0;
            while o0 < stride {
                let w = tile.min(stride - o0);
                for p in 0..n {
                    let row = &chunk[p * stride + o0..p * stride + o0 + w];
                    for (o, v) in row.iter().enumerate() {
                        buf[o * n + p] = *v;
                    }
                }
                fft.process_with_scratch(&mut buf[..w * n], scratch);
                for p in 0..n {
                    let row = &mut chunk[p * stride + o0..p * stride + o0 + w];
                    for (o, v) in row.iter_mut().enumerate() {
                        *v = buf[o * n + p];
                    }
                }
                o0 += w;
            }
        };
        let bufs = || {
            (
                vec![Complex64::default(); tile * n],
                vec![Complex64::default(); fft.get_inplace_scratch_len()],
            )
        };
        if parallel {
            data.par_chunks_mut(block)
                .for_each_init(bufs, |b, c| work(c, b));
        } else {
            let mut b = bufs();
            for chunk in data.chunks_mut(block) {
                work(chunk, &mut b);
            }
        }
    }

    /// Index of the grid point at the origin.
    pub(crate) fn origin_index(&self) -> usize {
        let half = self.inner.points / 2;
        (0..self.inner.dim).fold(0, |acc, _| acc * self.inner.points + half)
    }

    /// Replaces radial representation samples by their odd part `(w(x) - w(-x)) / 2`.
    /// The even sector carries the singular `e^{-r}/r` profile and is unphysical;
    /// rounding errors seeded there can grow under nonlinear maps.
    pub(crate) fn make_odd(&self, values: &mut [f64]) {
        let n = self.inner.points;
        let half = n / 2;
        values[0] = 0.0;
        values[half] = 0.0;
        for i in 1..half {
            let a = 0.5 * (values[half + i] - values[half - i]);
            values[half + i] = a;
            values[half - i] = -a;
        }
    }

    /// Derivative at the origin of a 1D field given its spectrum; recovers
    /// `u(0) = w'(0)` on radial grids.
    pub(crate) fn origin_slope(&self, spectrum: &[Complex64]) -> f64 {
        let n = self.inner.points;
        let l = self.inner.half_length;
        let mut acc = 0.0;
        for (m, (c, k)) in spectrum.iter().zip(&self.inner.wavenumbers).enumerate() {
            if m == n / 2 {
                continue;
            }
            acc += (Complex64::new(0.0, *k) * c * Complex64::from_polar(1.0, k * l)).re;
        }
        acc / n as f64
    }

    pub(crate) fn weights(&self) -> &[f64] {
        &self.inner.weights
    }
}

/// Signed integer frequency of FFT slot `i` (Nyquist counted as positive).
pub(crate) fn signed_mode(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_rules() {
        assert!(SpectralGrid::new(1, 256, 16.0 * PI).is_ok());
        assert!(SpectralGrid::new(3, 48, 8.0 * PI).is_ok());
        assert!(matches!(
            SpectralGrid::new(2, 7, 10.0),
            Err(Error::UnsupportedSize(7))
        ));
        assert!(matches!(
            SpectralGrid::new(2, 10, 10.0),
            Err(Error::UnsupportedSize(10))
        ));
        assert!(matches!(
            SpectralGrid::new(4, 16, 1.0),
            Err(Error::UnsupportedDimension(4))
        ));
        assert!(SpectralGrid::new(1, 16, 0.0).is_err());
    }

    #[test]
    fn spacing_and_len() {
        let g = SpectralGrid::new(1, 256, 16.0 * PI).unwrap();
        assert!((g.spacing() - 32.0 * PI / 256.0).abs() < 1e-15);
        let g3 = SpectralGrid::new(3, 48, 8.0 * PI).unwrap();
        assert_eq!(g3.len(), 48 * 48 * 48);
        assert_eq!(g3.origin_index(), (24 * 48 + 24) * 48 + 24);
        assert_eq!(g3.position(g3.origin_index()), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn wavenumbers_symmetric_and_bessel() {
        let g = SpectralGrid::new(2, 32, 3.0).unwrap();
        let k = g.wavenumbers();
        for m in 1..16 {
            assert_eq!(k[m], -k[32 - m]);
        }
        let b = g.bessel_symbol();
        assert_eq!(b[0], 1.0);
        assert!(b.iter().skip(1).all(|&x| x > 1.0));
    }

    #[test]
    fn round_trip_transform() {
        let g = SpectralGrid::new(3, 16, 2.0).unwrap();
        let vals: Vec<f64> = (0..g.len())
            .map(|i| ((i * 7919) % 1013) as f64 / 1013.0 - 0.5)
            .collect();
        let back = g.inverse_real(g.forward(&vals));
        let err = vals
            .iter()
            .zip(&back)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-13, "{err}");
    }

    #[test]
    fn axis_transform_matches_separable_mode() {
        // cos along axis 1 only: after transforming axis 1 each line has two spikes.
        let g = SpectralGrid::new(2, 16, PI).unwrap();
        let vals: Vec<f64> = (0..g.len())
            .map(|i| (3.0 * g.position(i)[1]).cos())
            .collect();
        let mut data: Vec<Complex64> = vals.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        g.transform_axis(&mut data, 1, false);
        for row in 0..16 {
            let line = &data[row * 16..row * 16 + 16];
            assert!((line[3].norm() - 8.0).abs() < 1e-12);
            assert!((line[13].norm() - 8.0).abs() < 1e-12);
            assert!(line[0].norm() < 1e-12);
        }
    }
}
