//! Layered run configuration: built-in defaults, then an optional TOML file,
//! then `IDEXTRACT_<KEY>` environment variables, then command-line flags.

use std::path::{Path, PathBuf};
use std::time::Duration;

use idextract_core::llm::{RemoteBackend, RemoteLlmConfig};
use idextract_core::router::PolicyError;
use idextract_core::{
    default_policy, ClockMode, CorpusSpec, CostModel, DocFormat, Gateway, IngestContext,
    OcrProfile, RemoteOcrConfig, RoutingPolicy,
};
use serde::{Deserialize, Serialize};

pub const ENV_PREFIX: &str = "IDEXTRACT_";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum GatewayKind {
    Reference,
    Remote,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AppConfig {
    pub seed: u64,
    pub docs_per_format: usize,
    pub entries_min: usize,
    pub entries_max: usize,
    pub formats: Vec<DocFormat>,
    pub policy: Option<PathBuf>,
    pub backend: GatewayKind,
    pub endpoint: Option<String>,
    pub model: String,
    pub timeout_s: f64,
    pub cost_base_latency: f64,
    pub cost_per_token_latency: f64,
    pub ocr_preserving_noise: f64,
    pub ocr_destroying_noise: f64,
    pub ocr_noise_seed: u64,
    pub ocr_preserving_seconds: f64,
    pub ocr_destroying_seconds: f64,
    pub ocr_endpoint: Option<String>,
    pub clock: ClockMode,
    pub workers: usize,
    pub out: PathBuf,
}

impl Default for AppConfig {
    fn default() -> Self {
        let corpus = CorpusSpec::default();
        let cost = CostModel::default();
        let preserving = OcrProfile::layout_preserving();
        let destroying = OcrProfile::layout_destroying();
        Self {
            seed: corpus.seed,
            docs_per_format: corpus.docs_per_format,
            entries_min: corpus.entries_min,
            entries_max: corpus.entries_max,
            formats: corpus.formats,
            policy: None,
            backend: GatewayKind::Reference,
            endpoint: None,
            model: "default".into(),
            timeout_s: 60.0,
            cost_base_latency: cost.base_latency,
            cost_per_token_latency: cost.per_token_latency,
            ocr_preserving_noise: preserving.char_noise_rate,
            ocr_destroying_noise: destroying.char_noise_rate,
            ocr_noise_seed: preserving.noise_seed,
            ocr_preserving_seconds: preserving.simulated_ocr_seconds,
            ocr_destroying_seconds: destroying.simulated_ocr_seconds,
            ocr_endpoint: None,
            clock: ClockMode::Virtual,
            workers: 4,
            out: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{0}")]
    Invalid(String),
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Policy(#[from] PolicyError),
}

impl ConfigError {
    pub fn is_io(&self) -> bool {
        matches!(
            self,
            ConfigError::Io { .. } | ConfigError::Policy(PolicyError::Io { .. })
        )
    }
}

/// Parses an environment value as a TOML literal, falling back to a plain
/// string. Bare comma lists become arrays where the key holds an array.
fn env_value(raw: &str, current: Option<&toml::Value>) -> toml::Value {
    if matches!(current, Some(toml::Value::Array(_))) && !raw.trim_start().starts_with('[') {
        return toml::Value::Array(
            raw.split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| toml::Value::String(s.to_owned()))
                .collect(),
        );
    }
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_owned()))
}

impl AppConfig {
    /// Defaults overlaid with `file` (if any) and then `env`.
    pub fn load(
        file: Option<&Path>,
        env: impl IntoIterator<Item = (String, String)>,
    ) -> Result<Self, ConfigError> {
        let mut table = toml::Table::try_from(AppConfig::default()).expect("defaults serialize");
        if let Some(path) = file {
            let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
                path: path.to_path_buf(),
                source,
            })?;
            let from_file: AppConfig = toml::from_str(&text)
                .map_err(|e| ConfigError::Invalid(format!("{}: {e}", path.display())))?;
            table = toml::Table::try_from(from_file).expect("config serializes");
        }
        let mut vars: Vec<(String, String)> = env
            .into_iter()
            .filter_map(|(k, v)| {
                k.strip_prefix(ENV_PREFIX)
                    .map(|k| (k.to_ascii_lowercase(), v))
            })
            .collect();
        vars.sort();
        for (key, raw) in vars {
            let value = env_value(&raw, table.get(&key));
            table.insert(key, value);
        }
        toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| {
                ConfigError::Invalid(format!("environment override: {}", e.message()))
            })
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.workers == 0 {
            return bad("workers must be at least 1".into());
        }
        if self.backend == GatewayKind::Remote && self.endpoint.is_none() {
            return bad("the remote backend needs an endpoint".into());
        }
        if self.timeout_s.is_nan() || self.timeout_s <= 0.0 {
            return bad("timeout_s must be positive".into());
        }
        self.cost().validate().map_err(ConfigError::Invalid)?;
        let ctx = self.ingest_context();
        ctx.ocr_preserving
            .validate()
            .map_err(ConfigError::Invalid)?;
        ctx.ocr_destroying
            .validate()
            .map_err(ConfigError::Invalid)?;
        self.corpus_spec()
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn corpus_dir(&self) -> PathBuf {
        self.out.join("corpus")
    }

    pub fn report_dir(&self) -> PathBuf {
        self.out.join("report")
    }

    pub fn corpus_spec(&self) -> CorpusSpec {
        CorpusSpec {
            seed: self.seed,
            docs_per_format: self.docs_per_format,
            entries_min: self.entries_min,
            entries_max: self.entries_max,
            formats: self.formats.clone(),
        }
    }

    fn cost(&self) -> CostModel {
        CostModel {
            base_latency: self.cost_base_latency,
            per_token_latency: self.cost_per_token_latency,
        }
    }

    fn timeout(&self) -> Duration {
        Duration::from_secs_f64(self.timeout_s)
    }

    pub fn gateway(&self) -> Gateway {
        let base = match (self.backend, &self.endpoint) {
            (GatewayKind::Remote, Some(endpoint)) => Gateway::new(
                std::sync::Arc::new(RemoteBackend::new(RemoteLlmConfig {
                    endpoint: endpoint.clone(),
                    model: self.model.clone(),
                    timeout: self.timeout(),
                })),
                self.cost(),
                self.clock,
            ),
            _ => Gateway::reference(),
        };
        base.with_cost(self.cost()).with_clock(self.clock)
    }

    pub fn ingest_context(&self) -> IngestContext {
        let mut preserving = OcrProfile::layout_preserving()
            .with_noise(self.ocr_preserving_noise)
            .with_seed(self.ocr_noise_seed);
        preserving.simulated_ocr_seconds = self.ocr_preserving_seconds;
        let mut destroying = OcrProfile::layout_destroying()
            .with_noise(self.ocr_destroying_noise)
            .with_seed(self.ocr_noise_seed);
        destroying.simulated_ocr_seconds = self.ocr_destroying_seconds;
        IngestContext {
            ocr_preserving: preserving,
            ocr_destroying: destroying,
            remote_ocr: self.ocr_endpoint.as_ref().map(|endpoint| RemoteOcrConfig {
                endpoint: endpoint.clone(),
                timeout: self.timeout(),
            }),
            clock: self.clock,
        }
    }

    pub fn routing_policy(&self) -> Result<RoutingPolicy, ConfigError> {
        let policy = match &self.policy {
            Some(path) => RoutingPolicy::load(path)?,
            None => default_policy(),
        };
        policy.validate()?;
        Ok(if self.ocr_endpoint.is_some() {
            policy.with_remote_ocr_fallback()
        } else {
            policy
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }

    #[test]
    fn defaults_validate() {
        let cfg = AppConfig::load(None, Vec::new()).unwrap();
        assert_eq!(cfg, AppConfig::default());
        cfg.validate().unwrap();
        assert_eq!(cfg.corpus_spec(), CorpusSpec::default());
    }

    #[test]
    fn env_overrides_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "seed = 9\nworkers = 2\nclock = \"wall\"\n").unwrap();
        let cfg = AppConfig::load(
            Some(&path),
            env(&[
                ("IDEXTRACT_SEED", "11"),
                ("IDEXTRACT_FORMATS", "docx, pdf"),
                ("IDEXTRACT_ENDPOINT", "http://localhost:1"),
                ("OTHER_SEED", "3"),
            ]),
        )
        .unwrap();
        assert_eq!(cfg.seed, 11);
        assert_eq!(cfg.workers, 2);
        assert_eq!(cfg.clock, ClockMode::Wall);
        assert_eq!(cfg.formats, vec![DocFormat::Docx, DocFormat::Pdf]);
        assert_eq!(cfg.endpoint.as_deref(), Some("http://localhost:1"));
    }

    #[test]
    fn bad_keys_and_values_are_rejected() {
        assert!(AppConfig::load(None, env(&[("IDEXTRACT_SEEDS", "1")])).is_err());
        assert!(AppConfig::load(None, env(&[("IDEXTRACT_WORKERS", "many")])).is_err());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "seed = 1\nunknown = 2\n").unwrap();
        let err = AppConfig::load(Some(&path), Vec::new())
            .unwrap_err()
            .to_string();
        assert!(err.contains("unknown"), "{err}");
        assert!(
            AppConfig::load(Some(&dir.path().join("none.toml")), Vec::new())
                .unwrap_err()
                .is_io()
        );
    }

    #[test]
    fn validation_rules() {
        let mut cfg = AppConfig {
            workers: 0,
            ..AppConfig::default()
        };
        assert!(cfg.validate().is_err());
        cfg.workers = 1;
        cfg.backend = GatewayKind::Remote;
        assert!(cfg.validate().is_err());
        cfg.endpoint = Some("http://localhost:9".into());
        cfg.validate().unwrap();
        cfg.entries_min = 40;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn dump_round_trips() {
        let cfg = AppConfig {
            policy: Some("p.toml".into()),
            ..AppConfig::default()
        };
        let back: AppConfig = toml::from_str(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
    }
}
