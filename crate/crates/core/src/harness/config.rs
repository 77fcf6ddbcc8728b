//! Scenario files: one TOML document with every model parameter, fully
//! defaulted and strictly validated.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::consumat::ConsumatConfig;
use crate::environment::{EnvironmentConfig, ModeState};
use crate::error::{Error, Result};
use crate::network::NetworkConfig;
use crate::policy::{validate_policies, PolicyIntervention};
use crate::population::DemographicConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    /// Decision periods (commute years) per replication.
    pub years: u32,
    pub reps: u32,
    pub master_seed: u64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig { years: 10, reps: 80, master_seed: 2022 }
    }
}

/// Settings of the `validate` pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidationConfig {
    /// Replications of the short share-check protocol.
    pub reps: u32,
    /// Periods of the short share-check protocol.
    pub periods: u32,
    /// Commuters represented by the synthetic population, used to turn motorcycle shares into counts.
    pub commuter_population: f64,
    /// Calendar year of model period 0.
    pub base_year: u32,
    /// Reference diffusion curve, used when no registry file is supplied.
    pub bass: Option<BassReference>,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        ValidationConfig { reps: 100, periods: 3, commuter_population: 1_000_000.0, base_year: 2022, bass: None }
    }
}

/// Bass parameters with the calendar year that maps to t = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BassReference {
    pub p: f64,
    pub q: f64,
    pub m: f64,
    pub origin_year: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub population: DemographicConfig,
    pub network: NetworkConfig,
    pub modes: ModeState,
    pub environment: EnvironmentConfig,
    pub consumat: ConsumatConfig,
    pub simulation: SimulationConfig,
    pub policies: Vec<PolicyIntervention>,
    pub validation: ValidationConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            name: "cali-default".to_string(),
            population: DemographicConfig::default(),
            network: NetworkConfig::default(),
            modes: ModeState::default(),
            environment: EnvironmentConfig::default(),
            consumat: ConsumatConfig::default(),
            simulation: SimulationConfig::default(),
            policies: Vec::new(),
            validation: ValidationConfig::default(),
        }
    }
}

impl ScenarioConfig {
    /// Parses and validates a scenario document. Schema violations report the offending key path.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(text).map_err(|e| Error::config("<document>", e.to_string()))?;
        let cfg: ScenarioConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::config(if path == "." { "<document>".to_string() } else { path }, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Runtime(format!("serializing scenario: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        self.population.validate()?;
        self.network.validate(self.population.n_agents)?;
        self.modes.validate()?;
        self.environment.validate()?;
        self.consumat.validate()?;
        validate_policies(&self.policies)?;
        if self.simulation.reps == 0 {
            return Err(Error::config("simulation.reps", "must be at least 1"));
        }
        if self.validation.reps == 0 {
            return Err(Error::config("validation.reps", "must be at least 1"));
        }
        if !(self.validation.commuter_population > 0.0) {
            return Err(Error::config("validation.commuter_population", "must be positive"));
        }
        if let Some(b) = &self.validation.bass {
            for (name, v) in [("p", b.p), ("q", b.q), ("m", b.m)] {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::config(format!("validation.bass.{name}"), "must be positive"));
                }
            }
        }
        Ok(())
    }

    /// SHA-256 over the canonical JSON form of every field.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("scenario serializes to JSON");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_the_default() {
        assert_eq!(ScenarioConfig::from_toml_str("").unwrap(), ScenarioConfig::default());
    }

    #[test]
    fn default_round_trips_through_toml() {
        let cfg = ScenarioConfig::default();
        let text = cfg.to_toml_string().unwrap();
        assert_eq!(ScenarioConfig::from_toml_str(&text).unwrap(), cfg);
    }

    #[test]
    fn unknown_key_reports_path() {
        let err = ScenarioConfig::from_toml_str("[network]\nm = 2\nrewire = true\n").unwrap_err();
        match err {
            Error::Config { field, message } => {
                assert!(field.starts_with("network"), "{field}");
                assert!(message.contains("rewire"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn semantic_errors_name_the_field() {
        let err = ScenarioConfig::from_toml_str("[population]\nses_shares = [0.5, 0.5, 0.5]\n").unwrap_err();
        assert!(matches!(err, Error::Config { ref field, .. } if field == "population.ses_shares"));
        let err = ScenarioConfig::from_toml_str("[population]\nn_agents = -4\n").unwrap_err();
        assert!(matches!(err, Error::Config { ref field, .. } if field.contains("n_agents")), "{err}");
    }

    #[test]
    fn policies_section_parses() {
        let text = r#"
[[policies]]
kind = "fare_free"
magnitude = 0.0

[[policies]]
kind = "security"
magnitude = 0.3
start_year = 2
"#;
        let cfg = ScenarioConfig::from_toml_str(text).unwrap();
        assert_eq!(cfg.policies.len(), 2);
        assert_eq!(cfg.policies[1].start_year, 2);
    }

    #[test]
    fn hash_tracks_every_field() {
        let base = ScenarioConfig::default();
        let h = base.hash();
        assert_eq!(h, ScenarioConfig::default().hash());
        let mut c = base.clone();
        c.environment.bus_occupancy += 1e-9;
        assert_ne!(c.hash(), h);
        let mut c = base.clone();
        c.population.weights.means.high[6] = 0.39;
        assert_ne!(c.hash(), h);
        let mut c = base;
        c.simulation.master_seed += 1;
        assert_ne!(c.hash(), h);
    }
}
