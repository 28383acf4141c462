use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Stop once HV_avg has been flat for `window` logged values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlateauRule {
    pub window: usize,
    pub rel_tol: f64,
}

/// Hyperparameters of the training loop. Defaults are the full-scale values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainingConfig {
    pub seed: u64,
    /// Episode budget; one function evaluation per episode.
    pub episodes: u64,
    pub batch_size: usize,
    /// Learning iterations per episode.
    pub learning_iterations: usize,
    /// The actor is updated on iterations divisible by this.
    pub actor_delay: usize,
    /// Samples stored per successful evaluation.
    pub reproduction: usize,
    pub warmup_episodes: u64,
    pub sigma_amplitude: f64,
    pub sigma_period: f64,
    pub actor_learning_rate: f64,
    pub critic_learning_rate: f64,
    pub hidden_layers: Vec<usize>,
    pub leaky_slope: f64,
    /// Utopia margin per objective; `None` means 0.01 for each.
    pub tau: Option<Vec<f64>>,
    /// Cells of the condition grid used for utopia tracking.
    pub utopia_cells: usize,
    /// Cells of the condition grid used for HV_avg logging.
    pub analysis_cells: usize,
    /// Log HV_avg every this many episodes (and at the last one).
    pub hv_log_interval: u64,
    /// `None` falls back to the problem's default reference point.
    pub hv_reference: Option<[f64; 2]>,
    /// Write network checkpoints every this many episodes; 0 keeps only the
    /// final one.
    pub checkpoint_interval: u64,
    pub plateau: Option<PlateauRule>,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            episodes: 100_000,
            batch_size: 100,
            learning_iterations: 100,
            actor_delay: 2,
            reproduction: 100,
            warmup_episodes: 1000,
            sigma_amplitude: 0.05,
            sigma_period: 1000.0,
            actor_learning_rate: 1e-4,
            critic_learning_rate: 1e-4,
            hidden_layers: vec![512, 256, 256, 128],
            leaky_slope: crate::nn::DEFAULT_LEAKY_SLOPE,
            tau: None,
            utopia_cells: 100,
            analysis_cells: 100,
            hv_log_interval: 100,
            hv_reference: None,
            checkpoint_interval: 0,
            plateau: None,
        }
    }
}

impl TrainingConfig {
    /// Reduced networks and learning iterations for fast runs.
    pub fn test_scale() -> Self {
        Self {
            hidden_layers: vec![64, 64],
            learning_iterations: 10,
            ..Self::default()
        }
    }

    pub fn tau_for(&self, objectives: usize) -> Vec<f64> {
        self.tau.clone().unwrap_or_else(|| vec![0.01; objectives])
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("episodes", self.episodes as usize),
            ("batch_size", self.batch_size),
            ("learning_iterations", self.learning_iterations),
            ("actor_delay", self.actor_delay),
            ("reproduction", self.reproduction),
            ("utopia_cells", self.utopia_cells),
            ("analysis_cells", self.analysis_cells),
            ("hv_log_interval", self.hv_log_interval as usize),
        ];
        for (name, value) in positive {
            if value == 0 {
                return Err(Error::Config(format!("training.{name} must be positive")));
            }
        }
        if self.hidden_layers.contains(&0) {
            return Err(Error::Config(
                "training.hidden_layers must be positive".into(),
            ));
        }
        let rates = [
            ("actor_learning_rate", self.actor_learning_rate),
            ("critic_learning_rate", self.critic_learning_rate),
            ("sigma_period", self.sigma_period),
        ];
        for (name, value) in rates {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::Config(format!("training.{name} must be positive")));
            }
        }
        if !(self.sigma_amplitude.is_finite() && self.sigma_amplitude >= 0.0) {
            return Err(Error::Config(
                "training.sigma_amplitude must be non-negative".into(),
            ));
        }
        if !(self.leaky_slope.is_finite() && self.leaky_slope >= 0.0) {
            return Err(Error::Config(
                "training.leaky_slope must be non-negative".into(),
            ));
        }
        if let Some(tau) = &self.tau {
            if tau.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
                return Err(Error::Config(
                    "training.tau entries must be positive".into(),
                ));
            }
        }
        if let Some(rule) = &self.plateau {
            if rule.window < 2 || !(rule.rel_tol >= 0.0) {
                return Err(Error::Config(
                    "training.plateau needs window >= 2 and rel_tol >= 0".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Exploration noise scale: 1 during warm-up, then
/// `amplitude * (cos(2π · episode / period) + 1)`.
pub fn exploration_sigma(episode: u64, config: &TrainingConfig) -> f64 {
    if episode <= config.warmup_episodes {
        1.0
    } else {
        let phase = std::f64::consts::TAU * episode as f64 / config.sigma_period;
        config.sigma_amplitude * (phase.cos() + 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_schedule() {
        let c = TrainingConfig::default();
        assert_eq!(exploration_sigma(1, &c), 1.0);
        assert_eq!(exploration_sigma(500, &c), 1.0);
        assert_eq!(exploration_sigma(1000, &c), 1.0);
        assert!(exploration_sigma(1500, &c).abs() < 1e-15);
        assert!((exploration_sigma(2000, &c) - 0.1).abs() < 1e-15);
        for e in 1..10_000 {
            let s = exploration_sigma(e, &c);
            assert!((0.0..=1.0).contains(&s));
        }
    }

    #[test]
    fn validation() {
        assert!(TrainingConfig::default().validate().is_ok());
        let bad = TrainingConfig {
            batch_size: 0,
            ..TrainingConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = TrainingConfig {
            tau: Some(vec![0.01, -1.0]),
            ..TrainingConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<TrainingConfig>("episodes = 5\nbatch_sise = 3").is_err());
        let c: TrainingConfig = toml::from_str("episodes = 5").unwrap();
        assert_eq!(c.episodes, 5);
        assert_eq!(c.batch_size, 100);
    }
}
