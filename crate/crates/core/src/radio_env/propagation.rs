use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::RadioError;
use crate::units::SPEED_OF_LIGHT_M_S;

/// Log-distance path loss with optional log-normal shadowing.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagationConfig {
    pub exponent: f64,
    pub ref_distance_m: f64,
    /// Loss at `ref_distance_m`; `None` means free space at the carrier.
    pub ref_loss_db: Option<f64>,
    pub shadowing_sigma_db: f64,
    pub seed: u64,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        Self { exponent: 3.5, ref_distance_m: 1.0, ref_loss_db: None, shadowing_sigma_db: 0.0, seed: 0 }
    }
}

impl PropagationConfig {
    pub fn validate(&self) -> Result<(), RadioError> {
        if !(self.exponent >= 2.0) {
            return Err(RadioError::Config(format!("path-loss exponent {} < 2", self.exponent)));
        }
        if !(self.ref_distance_m > 0.0) {
            return Err(RadioError::Config("reference distance must be positive".into()));
        }
        if !(self.shadowing_sigma_db >= 0.0) {
            return Err(RadioError::Config("shadowing sigma must be non-negative".into()));
        }
        Ok(())
    }

    pub fn ref_loss_at(&self, freq_mhz: f64) -> f64 {
        self.ref_loss_db.unwrap_or_else(|| free_space_loss_db(self.ref_distance_m, freq_mhz))
    }

    /// Median loss (no shadowing).
    pub fn median_loss_db(&self, distance_m: f64, freq_mhz: f64) -> Result<f64, RadioError> {
        if !(distance_m > 0.0) {
            return Err(RadioError::Domain(format!("distance must be positive, got {distance_m} m")));
        }
        Ok(self.ref_loss_at(freq_mhz) + 10.0 * self.exponent * (distance_m / self.ref_distance_m).log10())
    }

    /// Inverse of [`median_loss_db`](Self::median_loss_db): the distance at
    /// which the median loss equals `loss_db`.
    pub fn distance_for_loss(&self, loss_db: f64, freq_mhz: f64) -> f64 {
        self.ref_distance_m * 10f64.powf((loss_db - self.ref_loss_at(freq_mhz)) / (10.0 * self.exponent))
    }
}

/// Friis free-space loss `20 log10(4 pi d f / c)`.
pub fn free_space_loss_db(distance_m: f64, freq_mhz: f64) -> f64 {
    20.0 * (4.0 * std::f64::consts::PI * distance_m * freq_mhz * 1e6 / SPEED_OF_LIGHT_M_S).log10()
}

/// Stateful path-loss source; shadowing draws come from a seeded stream so
/// a fixed seed and call order reproduce the same losses.
#[derive(Debug, Clone)]
pub struct PathLoss {
    cfg: PropagationConfig,
    rng: ChaCha8Rng,
    shadowing: Option<Normal<f64>>,
}

impl PathLoss {
    pub fn new(cfg: PropagationConfig) -> Result<Self, RadioError> {
        cfg.validate()?;
        let shadowing = if cfg.shadowing_sigma_db > 0.0 {
            Some(Normal::new(0.0, cfg.shadowing_sigma_db).map_err(|e| RadioError::Config(e.to_string()))?)
        } else {
            None
        };
        let rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        Ok(Self { cfg, rng, shadowing })
    }

    pub fn config(&self) -> &PropagationConfig {
        &self.cfg
    }

    pub fn loss_db(&mut self, distance_m: f64, freq_mhz: f64) -> Result<f64, RadioError> {
        let median = self.cfg.median_loss_db(distance_m, freq_mhz)?;
        Ok(match &self.shadowing {
            Some(n) => median + n.sample(&mut self.rng),
            None => median,
        })
    }
}
