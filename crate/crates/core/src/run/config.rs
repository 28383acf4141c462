use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::airfoil::{self, AeroCache, CachedAero, XfoilClient, XfoilConfig};
use crate::drl::TrainingConfig;
use crate::error::{Error, Result};
use crate::kursawe::{self, ExperimentConfig};
use crate::problem::McmoProblem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    Kursawe,
    AirfoilMock,
    AirfoilExternal,
}

impl ProblemKind {
    pub fn default_reference(self) -> [f64; 2] {
        match self {
            ProblemKind::Kursawe => kursawe::REFERENCE,
            ProblemKind::AirfoilMock | ProblemKind::AirfoilExternal => airfoil::REFERENCE,
        }
    }
}

/// Everything a run needs. Unknown keys anywhere are errors; omitted keys
/// take their defaults, and the resolved config is what gets written to a
/// run's manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub training: TrainingConfig,
    #[serde(default)]
    pub xfoil: XfoilConfig,
    /// Persistent cache for external solver results.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aero_cache: Option<PathBuf>,
    #[serde(default)]
    pub experiment: ExperimentConfig,
}

impl RunConfig {
    pub fn new(problem: ProblemKind) -> Self {
        Self {
            problem,
            output: None,
            training: TrainingConfig::default(),
            xfoil: XfoilConfig::default(),
            aero_cache: None,
            experiment: ExperimentConfig::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Fills in the HV reference point so the serialized form is complete.
    pub fn resolved(mut self) -> Self {
        self.training
            .hv_reference
            .get_or_insert(self.problem.default_reference());
        self
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(format!("serializing config: {e}")))
    }

    pub fn reference_point(&self) -> [f64; 2] {
        self.training
            .hv_reference
            .unwrap_or_else(|| self.problem.default_reference())
    }

    pub fn validate(&self) -> Result<()> {
        self.training.validate()?;
        if let Some(r) = self.training.hv_reference {
            if r.iter().any(|v| !v.is_finite()) {
                return Err(Error::Config("reference must be finite".into()));
            }
        }
        if i64::try_from(self.training.seed).is_err() {
            return Err(Error::Config(
                "training.seed must fit in a signed 64-bit integer".into(),
            ));
        }
        if self.problem == ProblemKind::AirfoilExternal && self.xfoil.binary.is_none() {
            return Err(Error::Config(
                "xfoil.binary is required for the airfoil-external problem".into(),
            ));
        }
        self.experiment.validate()
    }

    /// Instantiates the configured problem.
    pub fn build_problem(&self) -> Result<McmoProblem> {
        Ok(match self.problem {
            ProblemKind::Kursawe => kursawe::kursawe_problem(),
            ProblemKind::AirfoilMock => airfoil::mock_airfoil_problem(),
            ProblemKind::AirfoilExternal => {
                let client = XfoilClient::new(self.xfoil.clone())?;
                let cache = match &self.aero_cache {
                    Some(path) => AeroCache::open(path)?,
                    None => AeroCache::in_memory(),
                };
                airfoil::airfoil_problem("airfoil-external", CachedAero::new(client, cache))
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_takes_defaults() {
        let c =
            RunConfig::from_toml("problem = \"kursawe\"\n[training]\nepisodes = 200\nseed = 7\n")
                .unwrap();
        assert_eq!(c.training.episodes, 200);
        assert_eq!(c.training.batch_size, 100);
        assert_eq!(c.reference_point(), [-2.0, 13.0]);
        assert_eq!(
            RunConfig::new(ProblemKind::AirfoilMock).reference_point(),
            [0.0, 0.0]
        );
    }

    #[test]
    fn unknown_keys_and_bad_values_are_rejected() {
        assert!(RunConfig::from_toml("problem = \"kursawe\"\nepisodes = 3\n").is_err());
        assert!(RunConfig::from_toml("problem = \"rosenbrock\"\n").is_err());
        let e = RunConfig::from_toml("problem = \"kursawe\"\n[training]\nbatch_size = 0\n")
            .unwrap_err();
        assert!(e.to_string().contains("batch_size"), "{e}");
        assert!(e.is_validation());
    }

    #[test]
    fn external_problem_needs_a_binary() {
        let e = RunConfig::from_toml("problem = \"airfoil-external\"\n").unwrap_err();
        assert!(matches!(e, Error::Config(_)));
        let ok = RunConfig::from_toml(
            "problem = \"airfoil-external\"\n[xfoil]\nbinary = \"/usr/bin/xfoil\"\n",
        );
        assert!(ok.is_ok());
    }

    #[test]
    fn resolved_config_round_trips() {
        let c = RunConfig::from_toml(
            "problem = \"airfoil-mock\"\n[training]\nseed = 3\nepisodes = 10\n",
        )
        .unwrap()
        .resolved();
        let text = c.to_toml().unwrap();
        assert_eq!(RunConfig::from_toml(&text).unwrap(), c);
        assert!(text.contains("hv_reference"));
    }
}
