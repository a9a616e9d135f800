//! One runner per scenario kind. Each writes its reports into the run directory
//! and returns the declared checks.

use kglab::classify::{
    dichotomy_ensemble, perturbation_test, run_dichotomy, write_ensemble_csv, EnsembleRow, Region,
    SimConfig, Verdict,
};
use kglab::functionals::{
    energy_norm_sq, random_pair_with_action, BumpSampler, NehariSide, PhasePoint,
};
use kglab::groundstate::{
    candidate_levels, constraint_defect, solve_ground_state_with, threshold, SolverOptions,
};
use kglab::lorentz::{
    derivative_check, energy_momentum_rotation_check, group_law_defect, SpacetimeBlock,
};
use kglab::profiles::{
    extract_profiles, orthogonality_check, synthesize_sequence, DecompositionManifest,
};
use kglab::propagator::{evolve, RunStatus};
use kglab::validation::{conservation_datum, lorentz_datum, planted_bubbles};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Kind, Scenario};
use crate::output::RunDir;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: Option<f64>,
    pub limit: Option<f64>,
}

#[derive(Debug, Default, Serialize)]
pub struct Checks(pub Vec<Check>);

impl Checks {
    fn at_most(&mut self, name: &str, value: f64, limit: f64) {
        self.0.push(Check {
            name: name.into(),
            passed: value <= limit,
            value: Some(value),
            limit: Some(limit),
        });
    }

    fn require(&mut self, name: &str, passed: bool) {
        self.0.push(Check {
            name: name.into(),
            passed,
            value: None,
            limit: None,
        });
    }

    pub fn passed(&self) -> bool {
        self.0.iter().all(|c| c.passed)
    }
}

pub fn run(s: &Scenario, out: &RunDir) -> kglab::Result<Checks> {
    match s.kind {
        Kind::GroundstateSweep => groundstate_sweep(s, out),
        Kind::DichotomyEnsemble => dichotomy(s, out),
        Kind::LorentzCheck => lorentz(s, out),
        Kind::ProfileTest => profiles(s, out),
        Kind::PerturbationStudy => perturbation(s, out),
        Kind::SingleRun => single(s, out),
    }
}

#[derive(Serialize)]
struct SweepRow {
    beta: f64,
    mu1: f64,
    mu2: f64,
    level: f64,
    candidate_level: f64,
    kind: kglab::groundstate::GroundStateKind,
    k0_defect: f64,
    el_residual: f64,
    converged: bool,
    iterations: usize,
}

fn groundstate_sweep(s: &Scenario, out: &RunDir) -> kglab::Result<Checks> {
    let sec = s.groundstate_sweep.clone().unwrap_or_default();
    let grid = s.grid_spec().build()?;
    let opts = SolverOptions {
        random_seeds: sec.random_seeds,
        seed: s.seed,
        ..Default::default()
    };
    let solved = sec
        .betas
        .par_iter()
        .map(|&beta| {
            let p = kglab::functionals::NonlinearityParams::new(beta, s.params.mu1, s.params.mu2)?;
            let gs = solve_ground_state_with(&p, &grid, sec.tol, &opts)?;
            Ok((gs, candidate_levels(&p)?))
        })
        .collect::<kglab::Result<Vec<_>>>()?;
    let mut checks = Checks::default();
    let mut rows = Vec::new();
    let mut profile_cols = vec![grid.coords().to_vec()];
    for (i, (gs, cands)) in solved.iter().enumerate() {
        let beta = gs.params.beta;
        let defect = constraint_defect(&gs.pair, &gs.params);
        checks.require(&format!("beta {beta}: converged"), gs.converged);
        checks.at_most(&format!("beta {beta}: |K0| / ||Q||^2"), defect, 1e-6);
        // The solver starts from the best candidate, so it can only go lower.
        checks.at_most(
            &format!("beta {beta}: level over candidate level"),
            gs.level / cands.best() - 1.0,
            1e-4,
        );
        rows.push(SweepRow {
            beta,
            mu1: gs.params.mu1,
            mu2: gs.params.mu2,
            level: gs.level,
            candidate_level: cands.best(),
            kind: gs.kind,
            k0_defect: defect,
            el_residual: gs.el_residual,
            converged: gs.converged,
            iterations: gs.iterations,
        });
        out.snapshot(
            &format!("groundstate_{i}.bin"),
            &PhasePoint::at_rest(gs.pair.clone()),
        )?;
        profile_cols.push(gs.pair.u1().physical());
        profile_cols.push(gs.pair.u2().physical());
    }
    out.json("groundstates.json", &rows)?;
    out.csv(
        "groundstates.csv",
        &[
            "beta",
            "mu1",
            "mu2",
            "level",
            "candidate_level",
            "k0_defect",
            "el_residual",
        ],
        &rows
            .iter()
            .map(|r| {
                vec![
                    r.beta,
                    r.mu1,
                    r.mu2,
                    r.level,
                    r.candidate_level,
                    r.k0_defect,
                    r.el_residual,
                ]
            })
            .collect::<Vec<_>>(),
    )?;
    let mut header = vec!["x".to_string()];
    for i in 0..solved.len() {
        header.push(format!("Q1_{i}"));
        header.push(format!("Q2_{i}"));
    }
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let table: Vec<Vec<f64>> = (0..grid.len())
        .filter(|&k| grid.coords()[k] >= 0.0)
        .map(|k| profile_cols.iter().map(|c| c[k]).collect())
        .collect();
    out.csv("profiles.csv", &header, &table)?;
    Ok(checks)
}

#[derive(Serialize)]
struct EnsembleSummary {
    h0: Option<f64>,
    members: usize,
    ps_minus: usize,
    misclassified: usize,
    rows: Vec<EnsembleRow>,
}

fn dichotomy(s: &Scenario, out: &RunDir) -> kglab::Result<Checks> {
    let sec = s.dichotomy_ensemble.clone().unwrap_or_default();
    let mut checks = Checks::default();
    let mut summary = EnsembleSummary {
        h0: None,
        members: 0,
        ps_minus: 0,
        misclassified: 0,
        rows: Vec::new(),
    };
    if sec.count > 0 {
        let grid = s.grid_spec().build()?;
        let h0 = threshold(&s.params)?.h0;
        let gs = solve_ground_state_with(&s.params, &grid, 1e-8, &SolverOptions::default())?;
        let members = dichotomy_ensemble(&gs, h0, sec.count, s.seed)?;
        let config = SimConfig {
            horizon: sec.horizon,
            policy: s.step_policy(),
        };
        let reports = members
            .par_iter()
            .map(|d| run_dichotomy(&d.phase, &s.params, h0, &config))
            .collect::<kglab::Result<Vec<_>>>()?;
        summary.h0 = Some(h0);
        summary.members = members.len();
        for (d, r) in members.into_iter().zip(reports) {
            let expected = match d.verdict.region {
                Region::PsMinus => Verdict::BlowupDetected,
                _ => Verdict::GlobalBounded,
            };
            summary.ps_minus += usize::from(d.verdict.region == Region::PsMinus);
            summary.misclassified += usize::from(r.verdict != expected);
            summary.rows.push(EnsembleRow {
                label: d.label,
                family: d.family,
                report: r,
                final_increment: None,
            });
        }
    }
    checks.at_most("misclassified members", summary.misclassified as f64, 0.0);
    checks.require(
        "region invariance at every stored step",
        summary.rows.iter().all(|r| r.report.region_invariant),
    );
    out.with_writer("ensemble.csv", |w| {
        write_ensemble_csv(&summary.rows, w, Some(&out.comment()))
    })?;
    let mut series = Vec::new();
    for (i, r) in summary.rows.iter().enumerate() {
        for &(t, e) in &r.report.free_fit_error_series {
            series.push(vec![i as f64, t, e]);
        }
    }
    out.csv("free_fit_error.csv", &["member", "t", "error"], &series)?;
    out.json("summary.json", &summary)?;
    Ok(checks)
}

#[derive(Serialize)]
struct LorentzSummary {
    derivative: kglab::lorentz::DerivativeCheck,
    rotation: kglab::lorentz::RotationReport,
    group_law_defect: f64,
}

fn lorentz(s: &Scenario, out: &RunDir) -> kglab::Result<Checks> {
    let sec = s.lorentz_check.clone().unwrap_or_default();
    let grid = s.grid_spec().build()?;
    let datum = lorentz_datum(&grid, sec.moving)?;
    let traj = evolve(&datum, sec.horizon, &s.step_policy(), &s.params)?;
    let block = SpacetimeBlock::from_trajectory(&traj)?;
    let derivative = derivative_check(&block, 1, sec.derivative_step)?;
    let rotation = energy_momentum_rotation_check(&block, 1, &sec.lambdas)?;
    let group = group_law_defect(&block, 1, sec.group[0], sec.group[1])?;
    let mut checks = Checks::default();
    checks.at_most("dE/dlambda = P", derivative.dep_rel_err, sec.derivative_tol);
    checks.at_most("dP/dlambda = E", derivative.dpe_rel_err, sec.derivative_tol);
    checks.at_most("cosh/sinh rotation", rotation.max_rel_err, sec.rotation_tol);
    checks.at_most("group law", group, sec.group_tol);
    out.with_writer("rotation.csv", |w| {
        rotation.write_csv(w, Some(&out.comment()))
    })?;
    out.json(
        "lorentz.json",
        &LorentzSummary {
            derivative,
            rotation,
            group_law_defect: group,
        },
    )?;
    Ok(checks)
}

fn profiles(s: &Scenario, out: &RunDir) -> kglab::Result<Checks> {
    let sec = s.profile_test.clone().unwrap_or_default();
    let grid = s.grid_spec().build()?;
    let planted = planted_bubbles(&grid, sec.members, sec.bubbles == 2);
    let seq = synthesize_sequence(&planted, &grid, sec.noise, sec.members, s.seed)?;
    let dec = extract_profiles(&seq, &sec.extract)?;
    let rep = orthogonality_check(&dec, &seq, &sec.extract)?;
    let mut checks = Checks::default();
    checks.require(
        "bubble count matches the planted count",
        dec.bubbles.len() == planted.len(),
    );
    let energy_tol = sec
        .energy_tol
        .unwrap_or(if sec.bubbles == 1 { 0.02 } else { 0.05 });
    for (j, b) in planted.iter().enumerate() {
        let found = dec.bubbles.iter().find(|x| {
            x.spec.shifts.iter().zip(&b.shifts).all(|(a, e)| {
                (a.0 - e.0).abs() < 1e-9 && a.1.iter().zip(&e.1).all(|(p, q)| (p - q).abs() < 1e-9)
            })
        });
        checks.require(
            &format!("planted bubble {j}: shifts recovered"),
            found.is_some(),
        );
        if let Some(x) = found {
            checks.at_most(
                &format!("planted bubble {j}: relative energy error"),
                (x.energy - b.energy()).abs() / b.energy(),
                energy_tol,
            );
        }
    }
    checks.at_most(
        "Pythagorean defect at the largest n",
        rep.defects.last().copied().unwrap_or(f64::NAN),
        sec.defect_tol,
    );
    let again = extract_profiles(&dec.remainders, &sec.extract)?;
    checks.require("re-extraction finds nothing", again.bubbles.is_empty());
    for (j, b) in dec.bubbles.iter().enumerate() {
        out.snapshot(&format!("profile_{j}.bin"), &b.spec.datum)?;
    }
    out.csv(
        "defects.csv",
        &["n", "defect"],
        &rep.defects
            .iter()
            .enumerate()
            .map(|(n, d)| vec![(n + 1) as f64, *d])
            .collect::<Vec<_>>(),
    )?;
    out.csv(
        "nu_series.csv",
        &["step", "nu", "block"],
        &dec.nu_series
            .iter()
            .zip(&dec.block_levels)
            .enumerate()
            .map(|(i, (nu, b))| vec![i as f64, *nu, *b as f64])
            .collect::<Vec<_>>(),
    )?;
    out.json(
        "decomposition.json",
        &DecompositionManifest::new(&dec, &rep),
    )?;
    out.json("orthogonality.json", &rep)?;
    Ok(checks)
}

fn perturbation(s: &Scenario, out: &RunDir) -> kglab::Result<Checks> {
    let sec = s.perturbation_study.clone().unwrap_or_default();
    let grid = s.grid_spec().build()?;
    let h0 = threshold(&s.params)?.h0;
    let sampler = BumpSampler::default();
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let spec = sampler.sample(&mut rng, &grid);
    let (_, pair) = random_pair_with_action(
        &spec,
        &grid,
        &s.params,
        sec.fraction * h0,
        NehariSide::Positive,
    )?;
    let base = PhasePoint::at_rest(pair);
    let dirs: Vec<PhasePoint> = (0..sec.directions)
        .map(|_| {
            let u = sampler.sample(&mut rng, &grid).render(&grid);
            let [v1, v2] = sampler
                .sample(&mut rng, &grid)
                .render(&grid)
                .components()
                .map(|c| c.clone());
            PhasePoint::new(u, v1, v2)
        })
        .collect::<kglab::Result<_>>()?;
    let config = SimConfig {
        horizon: sec.horizon,
        policy: s.step_policy(),
    };
    let rep = perturbation_test(&base, &s.params, h0, &sec.deltas, &dirs, &config)?;
    let mut checks = Checks::default();
    checks.require(
        "perturbed runs stay in the base region and complete",
        rep.rows.iter().all(|r| !r.hypothesis_violated),
    );
    let [lo, hi] = sec.exponent_range;
    for (name, e) in [
        ("sup-norm response exponent", rep.exponent_sup),
        ("Strichartz response exponent", rep.exponent_strichartz),
    ] {
        let e = e.unwrap_or(f64::NAN);
        checks.0.push(Check {
            name: format!("{name} in [{lo}, {hi}]"),
            passed: (lo..=hi).contains(&e),
            value: Some(e),
            limit: None,
        });
    }
    out.csv(
        "perturbation.csv",
        &[
            "delta",
            "direction",
            "sup_distance",
            "strichartz_distance",
            "violated",
        ],
        &rep.rows
            .iter()
            .map(|r| {
                vec![
                    r.delta,
                    r.direction as f64,
                    r.sup_distance,
                    r.strichartz_distance,
                    f64::from(u8::from(r.hypothesis_violated)),
                ]
            })
            .collect::<Vec<_>>(),
    )?;
    out.json("perturbation.json", &rep)?;
    out.snapshot("base.bin", &base)?;
    Ok(checks)
}

#[derive(Serialize)]
struct SingleSummary {
    status: RunStatus,
    final_time: f64,
    escape_time: Option<f64>,
    max_energy_drift: Option<f64>,
    max_momentum_drift: f64,
    initial_energy_norm: f64,
    peak_energy_norm: f64,
}

fn single(s: &Scenario, out: &RunDir) -> kglab::Result<Checks> {
    let sec = s.single_run.clone().unwrap_or_default();
    let grid = s.grid_spec().build()?;
    let datum = conservation_datum(&grid, sec.amplitude, sec.width);
    let traj = evolve(&datum, sec.horizon, &s.step_policy(), &s.params)?;
    let mut checks = Checks::default();
    checks.require("run completes", traj.status == RunStatus::Completed);
    if let Some(limit) = sec.max_energy_drift {
        checks.at_most(
            "relative energy drift",
            traj.max_energy_drift.unwrap_or(f64::NAN),
            limit,
        );
    }
    out.with_writer("trajectory.csv", |w| {
        traj.write_csv(w, Some(&out.comment()))
    })?;
    out.snapshot("initial.bin", &datum)?;
    out.snapshot("final.bin", &traj.last().phase)?;
    out.json(
        "run.json",
        &SingleSummary {
            status: traj.status,
            final_time: traj.last().t,
            escape_time: traj.escape_time,
            max_energy_drift: traj.max_energy_drift,
            max_momentum_drift: traj.max_momentum_drift(),
            initial_energy_norm: energy_norm_sq(&datum).sqrt(),
            peak_energy_norm: traj.peak_energy_norm(),
        },
    )?;
    Ok(checks)
}
