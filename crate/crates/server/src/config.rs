//! Service configuration: a TOML file, then environment overrides.

use std::path::{Path, PathBuf};

use lectern::pipeline::LectureConfig;
use lectern::teach::TeachConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ServerConfig {
    pub bind: String,
    pub data_dir: PathBuf,
    /// When set, every request must carry `Authorization: Bearer <token>`.
    pub token: Option<String>,
    /// Threads running session steps.
    pub workers: usize,
    /// Pin session timestamps, for reproducible transcripts.
    pub fixed_clock_ms: Option<u64>,
    pub lecture: LectureConfig,
    pub teach: TeachConfig,
    pub gateway: GatewayConfig,
    pub renderer: RendererConfig,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            bind: "127.0.0.1:8080".into(),
            data_dir: PathBuf::from("lectern-data"),
            token: None,
            workers: 2,
            fixed_clock_ms: None,
            lecture: LectureConfig::default(),
            teach: TeachConfig::default(),
            gateway: GatewayConfig::default(),
            renderer: RendererConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    #[default]
    Http,
    Scripted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct GatewayConfig {
    pub backend: BackendKind,
    pub endpoint: String,
    pub api_key: Option<String>,
    pub planner_model: String,
    pub tutor_model: String,
    pub timeout_secs: u64,
    pub max_attempts: u32,
    pub inflight_limit: usize,
    /// Scripted backend only.
    pub fixture: Option<PathBuf>,
    pub planner_scenario: String,
    pub tutor_scenario: String,
}

impl Default for GatewayConfig {
    fn default() -> Self {
        GatewayConfig {
            backend: BackendKind::Http,
            endpoint: "http://127.0.0.1:8000/v1/chat/completions".into(),
            api_key: None,
            planner_model: "planner".into(),
            tutor_model: "tutor".into(),
            timeout_secs: 120,
            max_attempts: 3,
            inflight_limit: 8,
            fixture: None,
            planner_scenario: "pipeline".into(),
            tutor_scenario: "session".into(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RendererConfig {
    /// External page renderer; `{input}` and `{outdir}` are substituted.
    /// Without one, plain placeholder pages are drawn.
    pub command: Option<Vec<String>>,
    pub timeout_secs: Option<u64>,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: toml::de::Error },
    #[error("{var}: {reason}")]
    Env { var: String, reason: String },
}

impl ServerConfig {
    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
        Self::from_toml(&text).map_err(|source| ConfigError::Parse { path: path.into(), source })
    }

    /// Applies `LECTERN_*` variables from `vars`.
    pub fn apply_env<I, K, V>(&mut self, vars: I) -> Result<(), ConfigError>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: Into<String>,
    {
        fn num<T: std::str::FromStr>(var: &str, v: &str) -> Result<T, ConfigError>
        where
            T::Err: std::fmt::Display,
        {
            v.trim().parse().map_err(|e: T::Err| ConfigError::Env { var: var.into(), reason: e.to_string() })
        }
        for (k, v) in vars {
            let (k, v) = (k.as_ref(), v.into());
            match k {
                "LECTERN_BIND" => self.bind = v,
                "LECTERN_DATA_DIR" => self.data_dir = v.into(),
                "LECTERN_TOKEN" => self.token = Some(v).filter(|t| !t.is_empty()),
                "LECTERN_WORKERS" => self.workers = num(k, &v)?,
                "LECTERN_GATEWAY_ENDPOINT" => self.gateway.endpoint = v,
                "LECTERN_GATEWAY_API_KEY" => self.gateway.api_key = Some(v).filter(|t| !t.is_empty()),
                "LECTERN_PLANNER_MODEL" => self.gateway.planner_model = v,
                "LECTERN_TUTOR_MODEL" => self.gateway.tutor_model = v,
                "LECTERN_K" => self.lecture.context_pages = num(k, &v)?,
                "LECTERN_R" => self.lecture.segment_retries = num(k, &v)?,
                "LECTERN_QUESTIONS_KEPT" => self.lecture.questions_kept = num(k, &v)?,
                "LECTERN_H" => self.teach.history_window = num(k, &v)?,
                _ => {}
            }
        }
        Ok(())
    }
}
