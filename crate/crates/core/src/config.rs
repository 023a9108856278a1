//! Effort budgets shared by every search in the crate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Environment variable that overrides [`RunConfig::rng_seed`].
pub const SEED_ENV_VAR: &str = "ARBOREAL_SEED";

/// Budgets and knobs for a run. Every field has an embedded default, so a
/// partial JSON document deserializes into a complete config.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub trial_division_bound: u64,
    pub rho_step_budget: u64,
    pub rng_seed: u64,
    pub zassenhaus_degree_bound: usize,
    pub max_level: u32,
    pub mod_p_prime_count: usize,
    /// Iterates whose numerator or denominator exceed this many bits abort.
    pub height_budget_bits: u64,
    /// Largest degree `iterate_minus` will expand.
    pub degree_budget: u64,
    /// Subset budget for Zassenhaus recombination.
    pub recombination_budget: u64,
    /// Cofactors above this size are not primality-tested.
    pub primality_bit_limit: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            trial_division_bound: 1_000_000,
            rho_step_budget: 10_000_000,
            rng_seed: 0,
            zassenhaus_degree_bound: 24,
            max_level: 6,
            mod_p_prime_count: 25,
            height_budget_bits: 1 << 16,
            degree_budget: 4096,
            recombination_budget: 1 << 16,
            primality_bit_limit: 1 << 14,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("trial_division_bound", self.trial_division_bound),
            ("rho_step_budget", self.rho_step_budget),
            ("zassenhaus_degree_bound", self.zassenhaus_degree_bound as u64),
            ("max_level", self.max_level as u64),
            ("mod_p_prime_count", self.mod_p_prime_count as u64),
            ("height_budget_bits", self.height_budget_bits),
            ("degree_budget", self.degree_budget),
            ("recombination_budget", self.recombination_budget),
            ("primality_bit_limit", self.primality_bit_limit),
        ];
        for (name, value) in positive {
            if value == 0 {
                return Err(Error::InvalidArgument(format!("{name} must be positive")));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: RunConfig = serde_json::from_str(text)
            .map_err(|e| Error::InvalidArgument(format!("config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    /// Applies the `ARBOREAL_SEED` override if the variable is set.
    pub fn with_env_overrides(mut self) -> Result<Self> {
        if let Ok(seed) = std::env::var(SEED_ENV_VAR) {
            self.rng_seed = seed
                .trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("{SEED_ENV_VAR}={seed:?}")))?;
        }
        Ok(self)
    }

    pub fn factor_config(&self) -> FactorConfig {
        FactorConfig {
            trial_division_bound: self.trial_division_bound,
            rho_step_budget: self.rho_step_budget,
            seed: self.rng_seed,
            primality_bit_limit: self.primality_bit_limit,
        }
    }
}

/// The slice of [`RunConfig`] that integer factorization needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FactorConfig {
    pub trial_division_bound: u64,
    pub rho_step_budget: u64,
    pub seed: u64,
    pub primality_bit_limit: u64,
}

impl Default for FactorConfig {
    fn default() -> Self {
        RunConfig::default().factor_config()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_is_identity() {
        let config = RunConfig {
            rng_seed: 17,
            max_level: 9,
            ..RunConfig::default()
        };
        let text = serde_json::to_string(&config).unwrap();
        assert_eq!(RunConfig::from_json(&text).unwrap(), config);
    }

    #[test]
    fn partial_json_fills_defaults() {
        let config = RunConfig::from_json(r#"{"rng_seed": 5}"#).unwrap();
        assert_eq!(config.rng_seed, 5);
        assert_eq!(config.trial_division_bound, 1_000_000);
    }

    #[test]
    fn zero_bounds_are_rejected() {
        assert!(RunConfig::from_json(r#"{"rho_step_budget": 0}"#).is_err());
        assert!(RunConfig::from_json(r#"{"bogus": 1}"#).is_err());
    }
}
