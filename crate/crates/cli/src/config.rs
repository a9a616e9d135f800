//! Scenario files: TOML, unknown keys rejected at every level.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use kglab::functionals::NonlinearityParams;
use kglab::profiles::ExtractOptions;
use kglab::propagator::StepPolicy;
use kglab::spectral::{Geometry, SpectralGrid};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    GroundstateSweep,
    DichotomyEnsemble,
    LorentzCheck,
    ProfileTest,
    PerturbationStudy,
    SingleRun,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::GroundstateSweep => "groundstate_sweep",
            Kind::DichotomyEnsemble => "dichotomy_ensemble",
            Kind::LorentzCheck => "lorentz_check",
            Kind::ProfileTest => "profile_test",
            Kind::PerturbationStudy => "perturbation_study",
            Kind::SingleRun => "single_run",
        }
    }

    /// Grid used when the scenario has no `[grid]` table.
    fn default_grid(self) -> GridSpec {
        let radial = |points, half_length| GridSpec {
            geometry: Geometry::Radial,
            dim: 1,
            points,
            half_length,
        };
        let line = |points, half_length| GridSpec {
            geometry: Geometry::Cartesian,
            dim: 1,
            points,
            half_length,
        };
        match self {
            Kind::GroundstateSweep => radial(1024, 24.0),
            Kind::DichotomyEnsemble | Kind::PerturbationStudy => radial(2048, 48.0),
            Kind::LorentzCheck => line(512, 40.0),
            Kind::ProfileTest => line(3072, 192.0),
            Kind::SingleRun => line(256, 16.0 * PI),
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default = "cartesian")]
    pub geometry: Geometry,
    #[serde(default = "one")]
    pub dim: usize,
    pub points: usize,
    pub half_length: f64,
}

fn cartesian() -> Geometry {
    Geometry::Cartesian
}

fn one() -> usize {
    1
}

impl GridSpec {
    pub fn build(&self) -> kglab::Result<SpectralGrid> {
        match self.geometry {
            Geometry::Cartesian => SpectralGrid::new(self.dim, self.points, self.half_length),
            Geometry::Radial => SpectralGrid::radial(self.points, self.half_length),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub betas: Vec<f64>,
    pub tol: f64,
    pub random_seeds: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            betas: vec![0.0, 1.0, 2.0],
            tol: 1e-8,
            random_seeds: 5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleSection {
    pub count: usize,
    pub horizon: f64,
}

impl Default for EnsembleSection {
    fn default() -> Self {
        Self {
            count: 40,
            horizon: 30.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LorentzSection {
    pub moving: bool,
    pub horizon: f64,
    pub lambdas: Vec<f64>,
    pub derivative_step: f64,
    /// Rapidities composed in the group-law check.
    pub group: [f64; 2],
    pub derivative_tol: f64,
    pub rotation_tol: f64,
    pub group_tol: f64,
}

impl Default for LorentzSection {
    fn default() -> Self {
        Self {
            moving: true,
            horizon: 28.0,
            lambdas: vec![-0.3, -0.2, -0.1, 0.0, 0.1, 0.2, 0.3],
            derivative_step: 0.01,
            group: [0.1, 0.15],
            derivative_tol: 1e-3,
            rotation_tol: 2e-3,
            group_tol: 1e-4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileSection {
    /// 1 or 2 planted bubbles.
    pub bubbles: usize,
    pub members: usize,
    pub noise: f64,
    pub energy_tol: Option<f64>,
    pub defect_tol: f64,
    pub extract: ExtractOptions,
}

impl Default for ProfileSection {
    fn default() -> Self {
        Self {
            bubbles: 2,
            members: 16,
            noise: 5e-3,
            energy_tol: None,
            defect_tol: 0.03,
            extract: ExtractOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerturbationSection {
    /// Base datum action as a fraction of `h0`.
    pub fraction: f64,
    pub deltas: Vec<f64>,
    pub directions: usize,
    pub horizon: f64,
    pub exponent_range: [f64; 2],
}

impl Default for PerturbationSection {
    fn default() -> Self {
        Self {
            fraction: 0.3,
            deltas: vec![1e-4, 3e-4, 1e-3, 3e-3, 1e-2],
            directions: 3,
            horizon: 20.0,
            exponent_range: [0.9, 1.1],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SingleSection {
    pub amplitude: f64,
    pub width: f64,
    pub horizon: f64,
    pub max_energy_drift: Option<f64>,
}

impl Default for SingleSection {
    fn default() -> Self {
        Self {
            amplitude: 0.25,
            width: 2.0,
            horizon: 10.0,
            max_energy_drift: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub kind: Kind,
    #[serde(default)]
    pub seed: u64,
    pub output_dir: PathBuf,
    #[serde(default = "coupled")]
    pub params: NonlinearityParams,
    pub grid: Option<GridSpec>,
    pub policy: Option<StepPolicy>,
    pub groundstate_sweep: Option<SweepSection>,
    pub dichotomy_ensemble: Option<EnsembleSection>,
    pub lorentz_check: Option<LorentzSection>,
    pub profile_test: Option<ProfileSection>,
    pub perturbation_study: Option<PerturbationSection>,
    pub single_run: Option<SingleSection>,
}

fn coupled() -> NonlinearityParams {
    NonlinearityParams {
        beta: 1.0,
        mu1: 1.0,
        mu2: 1.0,
    }
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A parsed scenario together with the hash of its source text.
#[derive(Clone, Debug)]
pub struct LoadedScenario {
    pub scenario: Scenario,
    pub hash: String,
}

impl Scenario {
    pub fn grid_spec(&self) -> GridSpec {
        self.grid
            .clone()
            .unwrap_or_else(|| self.kind.default_grid())
    }

    /// `[policy]` or the kind's default. Lorentz blocks need a finer snapshot stride
    /// for their time interpolation.
    pub fn step_policy(&self) -> StepPolicy {
        self.policy.clone().unwrap_or_else(|| match self.kind {
            Kind::LorentzCheck => StepPolicy {
                snapshot_stride: 5,
                ..Default::default()
            },
            _ => StepPolicy::default(),
        })
    }

    /// Semantic checks beyond the schema. Every problem is a config error.
    fn check(&self) -> Result<(), ConfigError> {
        let err = |m: String| Err(ConfigError(m));
        let present = [
            (Kind::GroundstateSweep, self.groundstate_sweep.is_some()),
            (Kind::DichotomyEnsemble, self.dichotomy_ensemble.is_some()),
            (Kind::LorentzCheck, self.lorentz_check.is_some()),
            (Kind::ProfileTest, self.profile_test.is_some()),
            (Kind::PerturbationStudy, self.perturbation_study.is_some()),
            (Kind::SingleRun, self.single_run.is_some()),
        ];
        for (k, there) in present {
            if there && k != self.kind {
                return err(format!(
                    "table [{k}] does not apply to kind = \"{}\"",
                    self.kind
                ));
            }
        }
        if let Err(e) = self.params.validate() {
            return err(format!("[params]: {e}"));
        }
        if let Err(e) = self.step_policy().validate() {
            return err(format!("[policy]: {e}"));
        }
        let grid = self.grid_spec();
        if let Err(e) = grid.build() {
            return err(format!("[grid]: {e}"));
        }
        let radial = grid.geometry == Geometry::Radial;
        match self.kind {
            Kind::DichotomyEnsemble | Kind::PerturbationStudy | Kind::GroundstateSweep
                if !radial && grid.dim != 3 =>
            {
                return err(format!(
                    "[grid]: {} needs radial geometry or dim = 3",
                    self.kind
                ));
            }
            Kind::LorentzCheck | Kind::ProfileTest if radial => {
                return err(format!("[grid]: {} needs cartesian geometry", self.kind));
            }
            _ => {}
        }
        if let Some(s) = &self.groundstate_sweep {
            if s.betas.is_empty() || s.betas.iter().any(|b| !(*b >= 0.0)) {
                return err("[groundstate_sweep].betas: need a nonempty list of beta >= 0".into());
            }
            if !(s.tol > 0.0) {
                return err("[groundstate_sweep].tol must be positive".into());
            }
        }
        if let Some(s) = &self.dichotomy_ensemble {
            if !(s.horizon > 0.0) {
                return err("[dichotomy_ensemble].horizon must be positive".into());
            }
        }
        if let Some(s) = &self.lorentz_check {
            if s.lambdas.iter().chain(&s.group).any(|l| !(l.abs() <= 1.0)) {
                return err("[lorentz_check]: rapidities must lie in [-1, 1]".into());
            }
            if !(s.horizon > 0.0 && s.derivative_step > 0.0) {
                return err("[lorentz_check]: horizon and derivative_step must be positive".into());
            }
        }
        if let Some(s) = &self.profile_test {
            if !(1..=2).contains(&s.bubbles) || s.members == 0 {
                return err("[profile_test]: bubbles must be 1 or 2 and members positive".into());
            }
        }
        if let Some(s) = &self.perturbation_study {
            if !(s.fraction > 0.0 && s.fraction < 1.0) {
                return err("[perturbation_study].fraction must lie in (0, 1)".into());
            }
            if s.deltas.iter().any(|d| !(*d > 0.0)) || s.directions == 0 {
                return err(
                    "[perturbation_study]: deltas must be positive, directions >= 1".into(),
                );
            }
        }
        if let Some(s) = &self.single_run {
            if !(s.horizon > 0.0 && s.width > 0.0) {
                return err("[single_run]: horizon and width must be positive".into());
            }
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<LoadedScenario, ConfigError> {
        let scenario: Scenario = toml::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        scenario.check()?;
        Ok(LoadedScenario {
            scenario,
            hash: hex::encode(Sha256::digest(text.as_bytes())),
        })
    }

    pub fn load(path: &Path) -> Result<LoadedScenario, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_takes_defaults() {
        let l = Scenario::parse("kind = \"single_run\"\noutput_dir = \"out\"\n").unwrap();
        assert_eq!(l.scenario.params, coupled());
        assert_eq!(l.scenario.grid_spec().points, 256);
        assert_eq!(l.hash.len(), 64);
    }

    #[test]
    fn unknown_keys_are_rejected_with_context() {
        let e = Scenario::parse("kind = \"single_run\"\noutput_dir = \"o\"\n[policy]\ndt = 0.1\n")
            .unwrap_err();
        assert!(e.0.contains("dt"), "{e}");
        assert!(e.0.contains("line 4"), "{e}");
        let e =
            Scenario::parse("kind = \"single_run\"\noutput_dir = \"o\"\ncolour = 1\n").unwrap_err();
        assert!(e.0.contains("colour"), "{e}");
    }

    #[test]
    fn foreign_section_is_rejected() {
        let e = Scenario::parse(
            "kind = \"single_run\"\noutput_dir = \"o\"\n[dichotomy_ensemble]\ncount = 0\n",
        )
        .unwrap_err();
        assert!(e.0.contains("does not apply"), "{e}");
    }

    #[test]
    fn semantic_errors() {
        let bad = [
            "kind = \"single_run\"\noutput_dir = \"o\"\n[params]\nbeta = -1\nmu1 = 1\nmu2 = 1\n",
            "kind = \"single_run\"\noutput_dir = \"o\"\n[grid]\npoints = 7\nhalf_length = 3\n",
            "kind = \"lorentz_check\"\noutput_dir = \"o\"\n[grid]\ngeometry = \"radial\"\npoints = 64\nhalf_length = 12\n",
        ];
        for b in bad {
            assert!(Scenario::parse(b).is_err(), "{b}");
        }
    }

    #[test]
    fn hash_tracks_text() {
        let a = Scenario::parse("kind = \"single_run\"\noutput_dir = \"o\"\n").unwrap();
        let b = Scenario::parse("kind = \"single_run\"\noutput_dir = \"o\"\nseed = 0\n").unwrap();
        assert_ne!(a.hash, b.hash);
    }
}
