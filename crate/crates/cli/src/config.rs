//! Flat TOML scenario configuration.
//!
//! Physical parameters are mandatory; everything numerical has a default.

use std::path::{Path, PathBuf};

use cra_photon::quad::QuadTolerance;
use cra_photon::realspace::GridSpec;
use cra_photon::{Model, ModelParams};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// Minimum grid points per axis accepted from a config.
pub const MIN_GRID_POINTS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    BoundStates,
    BoundRtSweep,
    BreakupMap,
    TwoPhotonCorr,
    ThreeBody,
    OracleCheck,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::BoundStates => "bound_states",
            Self::BoundRtSweep => "bound_rt_sweep",
            Self::BreakupMap => "breakup_map",
            Self::TwoPhotonCorr => "two_photon_corr",
            Self::ThreeBody => "three_body",
            Self::OracleCheck => "oracle_check",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    // Physics, all required.
    pub omega0: f64,
    pub hopping: f64,
    pub coupling: f64,
    pub omega_tls: f64,

    #[serde(default)]
    pub scenario: Option<ScenarioKind>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,

    /// Bound-state index for the bound-channel scenarios.
    #[serde(default)]
    pub s: Option<usize>,
    /// Incident photon energy on the bound state (breakup map).
    #[serde(default)]
    pub eps0: Option<f64>,
    #[serde(default)]
    pub eps0_min: Option<f64>,
    #[serde(default)]
    pub eps0_max: Option<f64>,
    #[serde(default)]
    pub points: Option<usize>,

    /// Incident energies of the two-photon scenario.
    #[serde(default)]
    pub eps1: Option<f64>,
    #[serde(default)]
    pub eps2: Option<f64>,
    #[serde(default)]
    pub x_c: Option<Vec<f64>>,
    #[serde(default)]
    pub x_r_max: Option<f64>,
    #[serde(default)]
    pub x_r_points: Option<usize>,

    #[serde(default)]
    pub x_min: Option<f64>,
    #[serde(default)]
    pub x_max: Option<f64>,
    #[serde(default)]
    pub grid_n: Option<usize>,

    #[serde(default)]
    pub chain_sites: Option<usize>,
    #[serde(default)]
    pub samples: Option<usize>,

    #[serde(default)]
    pub quad_abs: Option<f64>,
    #[serde(default)]
    pub quad_rel: Option<f64>,
    #[serde(default)]
    pub quad_max_panels: Option<usize>,
}

fn invalid(field: &str, message: impl Into<String>) -> CliError {
    CliError::ConfigInvalid {
        field: field.to_string(),
        message: message.into(),
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// Minimal config with only the physics set.
    pub fn with_params(omega0: f64, hopping: f64, coupling: f64, omega_tls: f64) -> Self {
        Self {
            omega0,
            hopping,
            coupling,
            omega_tls,
            scenario: None,
            output_dir: None,
            seed: 0,
            s: None,
            eps0: None,
            eps0_min: None,
            eps0_max: None,
            points: None,
            eps1: None,
            eps2: None,
            x_c: None,
            x_r_max: None,
            x_r_points: None,
            x_min: None,
            x_max: None,
            grid_n: None,
            chain_sites: None,
            samples: None,
            quad_abs: None,
            quad_rel: None,
            quad_max_panels: None,
        }
    }

    /// SHA-256 of the canonical JSON form, so formatting and comments in the
    /// TOML file do not change the hash.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(canonical))
    }

    pub fn params(&self) -> CliResult<ModelParams> {
        for (field, v) in [
            ("omega0", self.omega0),
            ("hopping", self.hopping),
            ("coupling", self.coupling),
            ("omega_tls", self.omega_tls),
        ] {
            if !v.is_finite() {
                return Err(invalid(field, "must be finite"));
            }
        }
        if self.hopping <= 0.0 {
            return Err(invalid("hopping", "must be positive"));
        }
        if self.coupling < 0.0 {
            return Err(invalid("coupling", "must be non-negative"));
        }
        ModelParams::new(self.omega0, self.hopping, self.coupling, self.omega_tls)
            .map_err(|e| invalid("omega0", e.to_string()))
    }

    pub fn quad_tolerance(&self) -> QuadTolerance {
        let d = QuadTolerance::default();
        QuadTolerance {
            abs: self.quad_abs.unwrap_or(d.abs),
            rel: self.quad_rel.unwrap_or(d.rel),
            max_panels: self.quad_max_panels.unwrap_or(d.max_panels),
        }
    }

    pub fn model(&self) -> CliResult<Model> {
        let model = Model::new(self.params()?)
            .map_err(|e| CliError::physics("single-photon bound states", e))?;
        Ok(model.with_tolerance(self.quad_tolerance()))
    }

    pub fn bound_index(&self) -> CliResult<usize> {
        match self.s.unwrap_or(1) {
            s @ (1 | 2) => Ok(s),
            s => Err(invalid(
                "s",
                format!("bound-state index must be 1 or 2, got {s}"),
            )),
        }
    }

    pub fn grid(&self) -> CliResult<GridSpec> {
        let d = GridSpec::default();
        let n = self.grid_n.unwrap_or(d.n);
        if n < MIN_GRID_POINTS {
            return Err(invalid(
                "grid_n",
                format!("need at least {MIN_GRID_POINTS} points, got {n}"),
            ));
        }
        GridSpec::new(
            self.x_min.unwrap_or(d.x_min),
            self.x_max.unwrap_or(d.x_max),
            n,
        )
        .map_err(|e| invalid("x_max", e.to_string()))
    }

    /// `field` must be strictly inside the photon band.
    pub fn in_band(&self, field: &str, value: Option<f64>) -> CliResult<f64> {
        let p = self.params()?;
        let v = value.ok_or_else(|| invalid(field, "required for this scenario"))?;
        if !(v > p.band_min() && v < p.band_max()) {
            return Err(invalid(
                field,
                format!(
                    "{v} is outside the open band ({}, {})",
                    p.band_min(),
                    p.band_max()
                ),
            ));
        }
        Ok(v)
    }

    pub fn output_dir(&self, cli_override: Option<&Path>) -> CliResult<PathBuf> {
        cli_override
            .map(Path::to_path_buf)
            .or_else(|| self.output_dir.clone())
            .ok_or_else(|| invalid("output_dir", "set it in the config or pass --out"))
    }

    /// Check that a scenario named in the file agrees with the requested one.
    pub fn check_scenario(&self, requested: ScenarioKind) -> CliResult<()> {
        match self.scenario {
            Some(s) if s != requested => Err(invalid(
                "scenario",
                format!(
                    "config is for `{}` but `{}` was requested",
                    s.name(),
                    requested.name()
                ),
            )),
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn physics_fields_are_mandatory() {
        let err =
            ScenarioConfig::from_toml("omega0 = 4.0\nhopping = 1.0\ncoupling = 1.0\n").unwrap_err();
        assert!(err.to_string().contains("omega_tls"), "{err}");
    }

    #[test]
    fn unknown_fields_rejected() {
        let text = "omega0 = 4.0\nhopping = 1.0\ncoupling = 1.0\nomega_tls = 2.5\ntypo = 3\n";
        assert!(ScenarioConfig::from_toml(text).is_err());
    }

    #[test]
    fn hash_ignores_formatting() {
        let a = ScenarioConfig::from_toml(
            "omega0 = 4.0\nhopping = 1.0\ncoupling = 1.0\nomega_tls = 2.5\n",
        )
        .unwrap();
        let b = ScenarioConfig::from_toml(
            "# comment\nomega_tls=2.5\ncoupling=1.0\nhopping=1.0\nomega0=4.0",
        )
        .unwrap();
        assert_eq!(a.hash(), b.hash());
        let mut c = a.clone();
        c.seed = 1;
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn field_level_validation() {
        let mut c = ScenarioConfig::with_params(4.0, 1.0, 1.0, 2.5);
        c.grid_n = Some(8);
        assert!(
            matches!(c.grid(), Err(CliError::ConfigInvalid { field, .. }) if field == "grid_n")
        );
        assert!(
            matches!(c.in_band("eps1", Some(7.0)), Err(CliError::ConfigInvalid { field, .. }) if field == "eps1")
        );
        c.hopping = -1.0;
        assert!(
            matches!(c.params(), Err(CliError::ConfigInvalid { field, .. }) if field == "hopping")
        );
    }
}
