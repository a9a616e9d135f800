use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Positive radial solution of `S'' + (2/r) S' - S + S^3 = 0` on `[0, r_max]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RadialProfile {
    pub r_max: f64,
    pub nodes: usize,
    /// `S(r_i)` at `r_i = i * r_max / nodes`, `i = 0..=nodes`.
    pub values: Vec<f64>,
    pub slopes: Vec<f64>,
    /// Rate of `r S(r) ~ e^{-rate r}` fitted on the integrated part of the profile.
    pub decay_rate: f64,
    /// Adjacent scan values of `S(0)` that first changed shooting outcome.
    pub bracket: (f64, f64),
    /// Radius past which the integrated solution is replaced by `C e^{-r} / r`.
    pub splice_radius: f64,
    /// Sup norm of the ODE defect by fourth-order differences.
    pub ode_residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Shot {
    /// `S` crossed zero.
    Over,
    /// `S'` turned positive while `S > 0`.
    Under,
    /// Reached `r_max` undecided.
    Undecided,
}

/// `w = r S` satisfies `w'' = w - w^3 / r^2`, which is regular at the origin.
fn rhs(r: f64, w: f64) -> f64 {
    if r == 0.0 {
        0.0
    } else {
        w - w * w * w / (r * r)
    }
}

/// Taylor coefficients `c_k` of `S = sum c_k r^{2k}`, from
/// `(2k+2)(2k+3) c_{k+1} = c_k - [S^3]_k`.
fn series(s0: f64, terms: usize) -> Vec<f64> {
    let mut c = vec![s0];
    for k in 0..terms - 1 {
        let mut cube = 0.0;
        for i in 0..=k {
            for j in 0..=k - i {
                cube += c[i] * c[j] * c[k - i - j];
            }
        }
        c.push((c[k] - cube) / ((2 * k + 2) * (2 * k + 3)) as f64);
    }
    c
}

/// Radius up to which the profile is taken from the Taylor series (capped at
/// `1.2 / S(0)`); the series converges for `r` below about `2.4 / S(0)`.
const SERIES_RADIUS: f64 = 0.3;

/// Series start on `[0, 0.3]`, then RK4 for `w` from the last series node; stops at
/// the first decisive event. Returns `S` and `S'` at the nodes reached.
fn shoot(s0: f64, h: f64, nodes: usize) -> (Shot, Vec<f64>, Vec<f64>) {
    let c = series(s0, 48);
    let start = ((SERIES_RADIUS.min(1.2 / s0) / h).floor() as usize).clamp(1, nodes);
    let mut vals = Vec::with_capacity(nodes + 1);
    let mut slopes = Vec::with_capacity(nodes + 1);
    for i in 0..=start {
        let r = i as f64 * h;
        let r2 = r * r;
        // p = r^{2k}, q = r^{2k-1}
        let (mut s, mut ds, mut p, mut q) = (0.0, 0.0, 1.0, 0.0);
        for (k, ck) in c.iter().enumerate() {
            s += ck * p;
            ds += 2.0 * k as f64 * ck * q;
            q = p * r;
            p *= r2;
        }
        vals.push(s);
        slopes.push(ds);
    }
    let r0 = start as f64 * h;
    let (mut w, mut dw) = (r0 * vals[start], vals[start] + r0 * slopes[start]);
    for i in start..nodes {
        let r = i as f64 * h;
        let k1 = (dw, rhs(r, w));
        let k2 = (dw + 0.5 * h * k1.1, rhs(r + 0.5 * h, w + 0.5 * h * k1.0));
        let k3 = (dw + 0.5 * h * k2.1, rhs(r + 0.5 * h, w + 0.5 * h * k2.0));
        let k4 = (dw + h * k3.1, rhs(r + h, w + h * k3.0));
        w += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        dw += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        let r1 = r + h;
        let s = w / r1;
        let ds = (dw - s) / r1;
        vals.push(s);
        slopes.push(ds);
        if s < 0.0 {
            return (Shot::Over, vals, slopes);
        }
        if ds > 0.0 {
            return (Shot::Under, vals, slopes);
        }
    }
    (Shot::Undecided, vals, slopes)
}

/// Scalar ground state by bisection shooting on `S(0)`.
///
/// The bracket is found by scanning `S(0)` over `[2, 6]` in steps of `0.05`; the
/// first under/over transition is the nodeless branch.
pub fn scalar_ground_state(r_max: f64, nodes: usize, tol: f64) -> Result<RadialProfile> {
    if !(r_max >= 15.0) || nodes < 2000 {
        return Err(Error::InvalidArgument(format!(
            "need r_max >= 15 and nodes >= 2000, got {r_max}, {nodes}"
        )));
    }
    let h = r_max / nodes as f64;
    let (scan_lo, scan_hi, scan_step) = (2.0, 6.0, 0.05);
    let mut bracket = None;
    let mut prev = (scan_lo, shoot(scan_lo, h, nodes).0);
    let mut s = scan_lo;
    while s < scan_hi {
        s = (s + scan_step).min(scan_hi);
        let out = shoot(s, h, nodes).0;
        if prev.1 == Shot::Under && out == Shot::Over {
            bracket = Some((prev.0, s));
            break;
        }
        prev = (s, out);
    }
    let (b_lo, b_hi) = bracket.ok_or(Error::BracketFailure {
        lo: scan_lo,
        hi: scan_hi,
    })?;
    let (mut lo, mut hi) = (b_lo, b_hi);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match shoot(mid, h, nodes).0 {
            Shot::Over => hi = mid,
            _ => lo = mid,
        }
    }
    let (_, under, under_d) = shoot(lo, h, nodes);
    let (_, over, _) = shoot(hi, h, nodes);
    // The two shots agree until the growing mode e^{r} separates them; keep the
    // part where they agree to 1e-6 relative, then continue with the decaying
    // solution of the linearized equation.
    let common = under.len().min(over.len());
    let mut splice = 1;
    for i in 1..common {
        if (under[i] - over[i]).abs() > 1e-6 * under[i].abs() {
            break;
        }
        splice = i;
    }
    let splice = splice.min(nodes);
    let r_s = splice as f64 * h;
    let s_s = under[splice];
    let mut values = under[..=splice].to_vec();
    let mut slopes = under_d[..=splice].to_vec();
    for i in splice + 1..=nodes {
        let r = i as f64 * h;
        let v = s_s * (r_s / r) * (-(r - r_s)).exp();
        values.push(v);
        slopes.push(-v * (1.0 + 1.0 / r));
    }
    let decay_rate = fit_decay(&values, h, 0.5 * r_s, r_s);
    let ode_residual = ode_defect(&values, h);
    if ode_residual > tol {
        return Err(Error::Precondition(format!(
            "shooting residual {ode_residual:.3e} exceeds tolerance {tol:.3e}"
        )));
    }
    Ok(RadialProfile {
        r_max,
        nodes,
        values,
        slopes,
        decay_rate,
        bracket: (b_lo, b_hi),
        splice_radius: r_s,
        ode_residual,
    })
}

/// Least-squares slope of `-ln(r S)` on `[a, b]`.
fn fit_decay(values: &[f64], h: f64, a: f64, b: f64) -> f64 {
    let pts: Vec<(f64, f64)> = values
        .iter()
        .enumerate()
        .map(|(i, v)| (i as f64 * h, *v))
        .filter(|(r, v)| *r >= a && *r <= b && *v > 0.0)
        .map(|(r, v)| (r, -(r * v).ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Sup of `|S'' + 2S'/r - S + S^3|`, evaluated as `(w'' - w + w^3/r^2) / r` for
/// `w = r S` with five-point stencils; at the origin `3 S''(0) - S + S^3`.
fn ode_defect(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    let s_at = |i: isize| values[i.unsigned_abs()];
    let w_at = |i: isize| i as f64 * h * values[i.unsigned_abs()];
    let stencil = |f: &dyn Fn(isize) -> f64, i: isize| {
        (-f(i + 2) + 16.0 * f(i + 1) - 30.0 * f(i) + 16.0 * f(i - 1) - f(i - 2)) / (12.0 * h * h)
    };
    let mut worst: f64 = 0.0;
    for i in 0..n.saturating_sub(2) as isize {
        let s = s_at(i);
        let defect = if i == 0 {
            3.0 * stencil(&s_at, 0) - s + s * s * s
        } else {
            let r = i as f64 * h;
            let w = w_at(i);
            (stencil(&w_at, i) - w + w * w * w / (r * r)) / r
        };
        worst = worst.max(defect.abs());
    }
    worst
}

impl RadialProfile {
    pub fn spacing(&self) -> f64 {
        self.r_max / self.nodes as f64
    }

    pub fn center_value(&self) -> f64 {
        self.values[0]
    }

    /// `S(r)` by cubic Hermite interpolation; the exponential tail beyond `r_max`.
    pub fn at(&self, r: f64) -> f64 {
        let r = r.abs();
        let h = self.spacing();
        if r >= self.r_max {
            let last = *self.values.last().unwrap();
            return last * (self.r_max / r) * (-(r - self.r_max)).exp();
        }
        let i = ((r / h).floor() as usize).min(self.nodes - 1);
        let t = r / h - i as f64;
        let (p0, p1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * p0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * p1
            + (t3 - t2) * m1
    }

    fn radial_simpson(&self, f: impl Fn(usize) -> f64) -> f64 {
        let h = self.spacing();
        let n = self.nodes;
        let mut acc = 0.0;
        for i in 0..=n {
            let w = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let r = i as f64 * h;
            acc += w * f(i) * r * r;
        }
        // Odd node counts leave one interval out of Simpson; it sits in the tail.
        4.0 * std::f64::consts::PI * acc * h / 3.0
    }

    /// `||S||^2_{H^1(R^3)}`.
    pub fn h1_norm_sq(&self) -> f64 {
        self.radial_simpson(|i| self.values[i].powi(2) + self.slopes[i].powi(2))
    }

    /// `||grad S||^2_{L^2(R^3)}`.
    pub fn gradient_sq(&self) -> f64 {
        self.radial_simpson(|i| self.slopes[i].powi(2))
    }

    /// `int S^4` over `R^3`.
    pub fn quartic_integral(&self) -> f64 {
        self.radial_simpson(|i| self.values[i].powi(4))
    }

    /// `J_scalar[S] = 1/2 ||S||^2_{H^1} - 1/4 int S^4`.
    pub fn action(&self) -> f64 {
        0.5 * self.h1_norm_sq() - 0.25 * self.quartic_integral()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_domains() {
        assert!(scalar_ground_state(10.0, 4000, 1e-6).is_err());
        assert!(scalar_ground_state(20.0, 1000, 1e-6).is_err());
    }

    #[test]
    fn profile_shape() {
        let p = scalar_ground_state(20.0, 4000, 1e-5).unwrap();
        assert!(p.center_value() > 2.0 && p.center_value() < 6.0);
        assert!(p.values.iter().all(|v| *v > 0.0));
        assert!(*p.values.last().unwrap() <= 1e-8 * p.center_value());
        assert!((p.decay_rate - 1.0).abs() < 0.2, "{}", p.decay_rate);
        // Nehari identity on the constraint.
        let lhs = 0.25 * p.h1_norm_sq();
        assert!(
            (lhs - p.action()).abs() < 1e-6 * lhs,
            "{lhs} {}",
            p.action()
        );
        // Pohozaev: ||grad S||^2 = 3/4 int S^4.
        assert!((p.gradient_sq() - 0.75 * p.quartic_integral()).abs() < 1e-6 * p.gradient_sq());
    }

    #[test]
    fn interpolation_matches_nodes() {
        let p = scalar_ground_state(20.0, 2000, 1e-4).unwrap();
        let h = p.spacing();
        for i in [0, 1, 17, 500, 1999] {
            assert!((p.at(i as f64 * h) - p.values[i]).abs() < 1e-14);
        }
        let mid = p.at(1.234);
        assert!(mid > p.at(1.3) && mid < p.at(1.2));
    }

    #[test]
    fn self_convergence() {
        let a = scalar_ground_state(20.0, 2000, 1e-4).unwrap();
        let b = scalar_ground_state(20.0, 4000, 1e-5).unwrap();
        assert_eq!(a.bracket, b.bracket);
        assert!((a.center_value() - b.center_value()).abs() <= 1e-6 * b.center_value());
    }
}
