use serde::{Deserialize, Serialize};

use super::{lebesgue_norm, ScalarField, SpectralGrid};

/// Dyadic block index; block 0 is the low-frequency ball.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LpBlock(pub u32);

fn smooth_step_core(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// Radial cutoff `phi(|xi|)`: 1 for `|xi| <= 1`, 0 for `|xi| >= 2`, smooth in between.
pub fn partition_bump(s: f64) -> f64 {
    let a = smooth_step_core(2.0 - s);
    let b = smooth_step_core(s - 1.0);
    a / (a + b)
}

impl LpBlock {
    /// Symbol of the block at frequency magnitude `s`.
    pub fn symbol(self, s: f64) -> f64 {
        let j = self.0 as i32;
        if j == 0 {
            partition_bump(s)
        } else {
            partition_bump(s / 2f64.powi(j)) - partition_bump(s / 2f64.powi(j - 1))
        }
    }

    /// Every block that can be nonzero on the grid, in increasing order.
    pub fn all(grid: &SpectralGrid) -> Vec<LpBlock> {
        let kmax = grid.max_wavenumber();
        let top = if kmax <= 1.0 {
            0
        } else {
            kmax.log2().ceil() as u32
        };
        (0..=top).map(LpBlock).collect()
    }
}

/// `P_j f`.
pub fn lp_project(field: &ScalarField, block: LpBlock) -> ScalarField {
    let k2 = field.grid().k_squared();
    field.apply_multiplier(|i| block.symbol(k2[i].sqrt()))
}

/// All nonzero blocks of `f`, sharing one forward transform.
pub fn lp_decompose(field: &ScalarField) -> Vec<(LpBlock, ScalarField)> {
    let grid = field.grid();
    let spec = field.spectrum();
    let k: Vec<f64> = grid.k_squared().iter().map(|x| x.sqrt()).collect();
    LpBlock::all(grid)
        .into_iter()
        .map(|b| {
            let s = spec.iter().zip(&k).map(|(c, k)| c * b.symbol(*k)).collect();
            (b, ScalarField::from_spectrum(grid, s))
        })
        .collect()
}

/// `||P_0 f||_p + (sum_{j>=1} 2^{2 sigma j} ||P_j f||_p^2)^{1/2}`.
pub fn besov_norm(field: &ScalarField, sigma: f64, p: f64) -> f64 {
    let mut low = 0.0;
    let mut high = 0.0;
    for (b, part) in lp_decompose(field) {
        let n = lebesgue_norm(&part, p);
        if b.0 == 0 {
            low = n;
        } else {
            high += 2f64.powf(2.0 * sigma * b.0 as f64) * n * n;
        }
    }
    low + high.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_supports() {
        assert_eq!(partition_bump(0.0), 1.0);
        assert_eq!(partition_bump(1.0), 1.0);
        assert_eq!(partition_bump(2.0), 0.0);
        assert_eq!(partition_bump(7.0), 0.0);
        let mid = partition_bump(1.5);
        assert!((mid - 0.5).abs() < 1e-15);
        let mut prev = 1.0;
        for i in 0..=100 {
            let v = partition_bump(1.0 + i as f64 / 100.0);
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn blocks_sum_to_identity() {
        let g = SpectralGrid::new(2, 32, 4.0).unwrap();
        let f = ScalarField::from_fn(&g, |x| {
            (-(x[0] * x[0] + x[1] * x[1]) * 3.0).exp() + 0.3 * (x[0] * 2.0).sin()
        });
        let mut acc = ScalarField::zeros(&g);
        for (_, part) in lp_decompose(&f) {
            acc = acc.add_scaled(&part, 1.0);
        }
        assert!(acc.max_abs_diff(&f) < 1e-12);
    }

    #[test]
    fn low_mode_is_single_block() {
        let g = SpectralGrid::new(1, 64, std::f64::consts::PI).unwrap();
        let f = ScalarField::from_fn(&g, |x| x[0].cos());
        assert!((besov_norm(&f, 0.7, 4.0) - lebesgue_norm(&f, 4.0)).abs() < 1e-13);
        assert_eq!(besov_norm(&ScalarField::zeros(&g), 1.0, 2.0), 0.0);
    }

    #[test]
    fn annulus_field_vanishes_in_far_block() {
        let g = SpectralGrid::new(1, 256, std::f64::consts::PI).unwrap();
        // k = 12 sits in blocks 3 and 4 only (8 < 12 < 16).
        let f = ScalarField::from_fn(&g, |x| (12.0 * x[0]).cos());
        for b in LpBlock::all(&g) {
            let p = lp_project(&f, b);
            if b.0 == 3 || b.0 == 4 {
                assert!(p.max_abs() > 1e-3);
            } else {
                assert!(p.max_abs() < 1e-14, "block {}", b.0);
            }
        }
    }
}
