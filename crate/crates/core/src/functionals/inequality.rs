use serde::{Deserialize, Serialize};

use super::{FieldPair, NonlinearityParams, StaticParts};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionalStatus {
    Checked,
    /// `J >= h0`: the lemmas say nothing.
    AboveLevel,
    /// Zero pair.
    Degenerate,
}

/// Outcome for one of the two functionals (K0 or K2).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchCheck {
    pub value: f64,
    /// On `K < 0`: whether `-K >= 2 (h0 - J)`. On `K >= 0`: whether the
    /// admissible constant is positive.
    pub holds: bool,
    /// `-K - 2 (h0 - J)` on the negative branch, `K` otherwise.
    pub slack: f64,
    /// Largest `c` with `K >= c min(h0 - J, ||pair||^2_{H^1})`; only on `K >= 0`.
    pub admissible_constant: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionalReport {
    pub status: ConditionalStatus,
    pub j: f64,
    pub gap: f64,
    pub h1_norm_sq: f64,
    pub k0: BranchCheck,
    pub k2: BranchCheck,
}

impl ConditionalReport {
    /// True when the preconditions held and either inequality failed.
    pub fn violated(&self) -> bool {
        self.status == ConditionalStatus::Checked && !(self.k0.holds && self.k2.holds)
    }
}

fn branch(value: f64, gap: f64, h1: f64) -> BranchCheck {
    if value < 0.0 {
        let slack = -value - 2.0 * gap;
        BranchCheck {
            value,
            holds: slack >= 0.0,
            slack,
            admissible_constant: None,
        }
    } else {
        let m = gap.min(h1);
        let c = if m > 0.0 { value / m } else { f64::INFINITY };
        BranchCheck {
            value,
            holds: c > 0.0,
            slack: value,
            admissible_constant: Some(c),
        }
    }
}

/// Evaluates both conditional inequalities (for `K0` and `K2`) at `pair`.
pub fn conditional_inequality_check(
    pair: &FieldPair,
    params: &NonlinearityParams,
    h0: f64,
) -> ConditionalReport {
    let s = StaticParts::of(pair, params);
    let j = s.j();
    let h1 = s.h1_sq();
    let gap = h0 - j;
    let status = if h1 == 0.0 {
        ConditionalStatus::Degenerate
    } else if gap <= 0.0 {
        ConditionalStatus::AboveLevel
    } else {
        ConditionalStatus::Checked
    };
    ConditionalReport {
        status,
        j,
        gap,
        h1_norm_sq: h1,
        k0: branch(s.k0(), gap, h1),
        k2: branch(s.k2(), gap, h1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::SpectralGrid;

    #[test]
    fn zero_pair_is_degenerate() {
        let g = SpectralGrid::new(1, 16, 4.0).unwrap();
        let r = conditional_inequality_check(
            &FieldPair::zeros(&g),
            &NonlinearityParams::default(),
            1.0,
        );
        assert_eq!(r.status, ConditionalStatus::Degenerate);
        assert!(!r.violated());
    }

    #[test]
    fn branch_logic() {
        let b = branch(-3.0, 1.0, 5.0);
        assert!(b.holds && (b.slack - 1.0).abs() < 1e-15);
        assert!(!branch(-1.0, 1.0, 5.0).holds);
        let c = branch(2.0, 4.0, 1.0);
        assert_eq!(c.admissible_constant, Some(2.0));
    }
}
