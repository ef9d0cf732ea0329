use std::path::PathBuf;

use lpweak::verify::{ScenarioParams, SCENARIOS};
use serde::Deserialize;

#[derive(Debug)]
pub struct ConfigError(pub String);

/// The `[run]` table.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RunSection {
    scenarios: Option<Vec<String>>,
    seed: Option<u64>,
    workers: Option<usize>,
    out: Option<PathBuf>,
}

/// A validated configuration.
#[derive(Debug)]
pub struct RunConfig {
    pub scenarios: Vec<String>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub params: ScenarioParams,
}

impl RunConfig {
    /// Parses and validates; every scenario runs when `[run] scenarios` is
    /// absent.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError(e.to_string()))?;
        let run: RunSection = match table.remove("run") {
            Some(v) => v.try_into().map_err(|e: toml::de::Error| ConfigError(format!("[run]: {e}")))?,
            None => RunSection::default(),
        };
        let params: ScenarioParams = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| ConfigError(e.to_string()))?;
        params.validate().map_err(|e| ConfigError(e.to_string()))?;
        let scenarios = run
            .scenarios
            .unwrap_or_else(|| SCENARIOS.iter().map(|s| s.to_string()).collect());
        for s in &scenarios {
            if !SCENARIOS.contains(&s.as_str()) {
                return Err(ConfigError(format!("unknown scenario {s}")));
            }
        }
        if run.workers == Some(0) {
            return Err(ConfigError("workers must be positive".into()));
        }
        let mut cfg = Self {
            scenarios,
            seed: None,
            workers: run.workers,
            out: run.out,
            params,
        };
        if let Some(seed) = run.seed {
            cfg.set_seed(seed);
        }
        Ok(cfg)
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.seed = Some(seed);
        self.params.set_seed(seed);
    }
}
