use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{classify, DichotomyReport, Region, RegionVerdict};
use crate::error::{Error, Result};
use crate::functionals::{
    l2_norm_sq, random_pair_with_action, static_action, BumpSampler, BumpSpec, FieldPair,
    GaussianBump, NehariSide, NonlinearityParams, PhasePoint,
};
use crate::groundstate::GroundState;
use crate::propagator::fmt_sig;
use crate::spectral::SpectralGrid;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `s Q` at rest.
    Ray,
    /// `s Q` with velocity along `Q`.
    MovingRay,
    /// Gaussian bumps rescaled to a prescribed action.
    Bump,
    /// Rescaled bumps with velocity along the bump.
    MovingBump,
}

#[derive(Clone, Debug)]
pub struct EnsembleDatum {
    pub label: String,
    pub family: Family,
    pub phase: PhasePoint,
    pub verdict: RegionVerdict,
}

/// Alternates PS+ and PS- members and cycles through the families. `ground` must
/// live on `grid`.
pub fn dichotomy_ensemble(
    ground: &GroundState,
    h0: f64,
    count: usize,
    seed: u64,
) -> Result<Vec<EnsembleDatum>> {
    let grid = ground.pair.grid();
    let params = &ground.params;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sampler = BumpSampler::default();
    let families = [
        Family::Ray,
        Family::MovingRay,
        Family::Bump,
        Family::MovingBump,
    ];
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let plus = i % 2 == 0;
        let family = families[(i / 2) % families.len()];
        let (pair, moving) = match family {
            Family::Ray | Family::MovingRay => {
                let s = if plus {
                    rng.random_range(0.3..0.95)
                } else {
                    rng.random_range(1.05..1.3)
                };
                (ground.pair.scaled(s), family == Family::MovingRay)
            }
            Family::Bump | Family::MovingBump => {
                let (side, f) = if plus {
                    (NehariSide::Positive, rng.random_range(0.2..0.9))
                } else {
                    (NehariSide::Negative, rng.random_range(-0.5..0.7))
                };
                let spec = sampler.sample(&mut rng, grid);
                let (_, pair) = random_pair_with_action(&spec, grid, params, f * h0, side)?;
                (pair, family == Family::MovingBump)
            }
        };
        let phase = if moving {
            with_velocity(&pair, params, h0, rng.random_range(0.2..0.7))
        } else {
            PhasePoint::at_rest(pair)
        };
        let verdict = classify(&phase, params, h0);
        let want = if plus {
            Region::PsPlus
        } else {
            Region::PsMinus
        };
        if verdict.region != want {
            return Err(Error::Precondition(format!(
                "member {i} ({family:?}) landed in {} instead of {want}",
                verdict.region
            )));
        }
        out.push(EnsembleDatum {
            label: format!("{family:?}-{i}").to_lowercase(),
            family,
            phase,
            verdict,
        });
    }
    Ok(out)
}

/// PS+ data with energy in `[0.8, 0.95] h0`: centred Gaussians of width in `[1, 2]`
/// rescaled along their ray, far from the ground state in shape. A second
/// component is present with probability one half.
pub fn small_margin_data(
    grid: &SpectralGrid,
    params: &NonlinearityParams,
    h0: f64,
    count: usize,
    seed: u64,
) -> Result<Vec<PhasePoint>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let bump = |rng: &mut ChaCha8Rng, a: f64| GaussianBump {
                amplitude: a,
                center: [0.0; 3],
                width: rng.random_range(1.0..2.0),
            };
            let first = vec![bump(&mut rng, 1.0)];
            let second = if rng.random_bool(0.5) {
                let a = rng.random_range(0.3..1.0);
                vec![bump(&mut rng, a)]
            } else {
                Vec::new()
            };
            let target = rng.random_range(0.8..0.95) * h0;
            let (_, pair) = random_pair_with_action(
                &BumpSpec { first, second },
                grid,
                params,
                target,
                NehariSide::Positive,
            )?;
            Ok(PhasePoint::at_rest(pair))
        })
        .collect()
}

/// Velocity `c * pair` carrying `fraction` of the remaining margin `h0 - J` as kinetic energy.
fn with_velocity(
    pair: &FieldPair,
    params: &NonlinearityParams,
    h0: f64,
    fraction: f64,
) -> PhasePoint {
    let gap = h0 - static_action(pair, params);
    let c = (2.0 * fraction * gap / l2_norm_sq(pair)).sqrt();
    let [v1, v2] = pair.components().map(|u| u.scaled(c));
    PhasePoint::new(pair.clone(), v1, v2).expect("same grid")
}

/// One line of the ensemble summary.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnsembleRow {
    pub label: String,
    pub family: Family,
    pub report: DichotomyReport,
    /// Last Cauchy increment of the pull-back, relative to the datum norm.
    pub final_increment: Option<f64>,
}

/// `label, family, E, K0, margin, region, verdict, escape_time, final_increment`.
pub fn write_ensemble_csv(
    rows: &[EnsembleRow],
    w: &mut impl Write,
    comment: Option<&str>,
) -> Result<()> {
    if let Some(c) = comment {
        writeln!(w, "# {c}")?;
    }
    writeln!(
        w,
        "label,family,E,K0,margin,region,verdict,escape_time,final_increment"
    )?;
    let opt = |v: Option<f64>| v.map(fmt_sig).unwrap_or_default();
    for r in rows {
        let v = &r.report.initial;
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            r.label,
            serde_json::to_value(r.family)?.as_str().unwrap_or_default(),
            fmt_sig(v.energy),
            fmt_sig(v.k0),
            fmt_sig(v.margin),
            v.region,
            serde_json::to_value(r.report.verdict)?
                .as_str()
                .unwrap_or_default(),
            opt(r.report.escape_time),
            opt(r.final_increment),
        )?;
    }
    Ok(())
}
