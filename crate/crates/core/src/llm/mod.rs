//! Model access: one gateway in front of interchangeable completion backends,
//! with a token-count cost model for latency accounting.

pub mod prompts;
mod reference;
mod remote;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::lexicon::is_cjk;

pub use reference::ReferenceBackend;
pub use remote::{RemoteBackend, RemoteLlmConfig};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GatewayError {
    #[error("model backend timed out or is unreachable: {0}")]
    Timeout(String),
    #[error("model backend failed: {0}")]
    RemoteFailure(String),
    #[error("output hit the {limit}-token limit")]
    OutputTruncated { limit: usize },
}

/// Which duration a run charges for model and OCR stages.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClockMode {
    /// Deterministic costs from the token model and fixed stage constants.
    #[default]
    Virtual,
    /// Measured elapsed time.
    Wall,
}

impl std::str::FromStr for ClockMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "virtual" => Ok(ClockMode::Virtual),
            "wall" => Ok(ClockMode::Wall),
            other => Err(format!(
                "unknown clock mode {other:?} (expected virtual or wall)"
            )),
        }
    }
}

impl std::fmt::Display for ClockMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ClockMode::Virtual => "virtual",
            ClockMode::Wall => "wall",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompletionRequest {
    pub system_prompt: String,
    pub user_prompt: String,
    pub max_output_tokens: usize,
}

impl CompletionRequest {
    /// Sampling temperature; pinned for reproducible structured output.
    pub const TEMPERATURE: f64 = 0.0;
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompletionResponse {
    pub text: String,
    pub output_token_count: usize,
    pub virtual_latency: f64,
    pub wall_latency: f64,
}

/// Latency as an affine function of output tokens.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    pub base_latency: f64,
    pub per_token_latency: f64,
}

impl Default for CostModel {
    fn default() -> Self {
        Self {
            base_latency: 0.25,
            per_token_latency: 0.02,
        }
    }
}

impl CostModel {
    pub fn latency(&self, output_tokens: usize) -> f64 {
        self.base_latency + self.per_token_latency * output_tokens as f64
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.base_latency >= 0.0 && self.per_token_latency >= 0.0 {
            Ok(())
        } else {
            Err("cost model latencies must be >= 0".into())
        }
    }
}

/// Approximate token count: every CJK character is one token; other text is
/// split on whitespace and each non-CJK stretch costs one token per started
/// group of four bytes.
pub fn count_tokens(text: &str) -> usize {
    let mut tokens = 0;
    for word in text.split_whitespace() {
        let mut run_bytes = 0usize;
        for c in word.chars() {
            if is_cjk(c) {
                tokens += run_bytes.div_ceil(4) + 1;
                run_bytes = 0;
            } else {
                run_bytes += c.len_utf8();
            }
        }
        tokens += run_bytes.div_ceil(4);
    }
    tokens
}

/// What a backend hands back before accounting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawCompletion {
    pub text: String,
    /// The backend itself reported stopping at the length limit.
    pub truncated: bool,
}

pub trait CompletionBackend: Send + Sync {
    fn name(&self) -> &str;
    fn complete(&self, req: &CompletionRequest) -> Result<RawCompletion, GatewayError>;
}

/// A backend with nothing behind it; every call fails.
#[derive(Debug, Default)]
pub struct UnavailableBackend;

impl CompletionBackend for UnavailableBackend {
    fn name(&self) -> &str {
        "unavailable"
    }

    fn complete(&self, _req: &CompletionRequest) -> Result<RawCompletion, GatewayError> {
        Err(GatewayError::RemoteFailure(
            "no model backend is available".into(),
        ))
    }
}

/// Shared entry point for completions. Cheap to clone; safe to use from
/// many threads at once.
#[derive(Clone)]
pub struct Gateway {
    backend: Arc<dyn CompletionBackend>,
    cost: CostModel,
    clock: ClockMode,
}

impl std::fmt::Debug for Gateway {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Gateway")
            .field("backend", &self.backend.name())
            .field("cost", &self.cost)
            .field("clock", &self.clock)
            .finish()
    }
}

impl Gateway {
    pub fn new(backend: Arc<dyn CompletionBackend>, cost: CostModel, clock: ClockMode) -> Self {
        Self {
            backend,
            cost,
            clock,
        }
    }

    pub fn reference() -> Self {
        Self::new(
            Arc::new(ReferenceBackend),
            CostModel::default(),
            ClockMode::Virtual,
        )
    }

    pub fn unavailable() -> Self {
        Self::new(
            Arc::new(UnavailableBackend),
            CostModel::default(),
            ClockMode::Virtual,
        )
    }

    pub fn with_clock(mut self, clock: ClockMode) -> Self {
        self.clock = clock;
        self
    }

    pub fn with_cost(mut self, cost: CostModel) -> Self {
        self.cost = cost;
        self
    }

    pub fn backend_name(&self) -> &str {
        self.backend.name()
    }

    pub fn clock(&self) -> ClockMode {
        self.clock
    }

    pub fn cost(&self) -> CostModel {
        self.cost
    }

    /// Seconds charged for a response under this gateway's clock.
    pub fn charged_seconds(&self, resp: &CompletionResponse) -> f64 {
        match self.clock {
            ClockMode::Virtual => resp.virtual_latency,
            ClockMode::Wall => resp.wall_latency,
        }
    }

    pub fn complete(&self, req: &CompletionRequest) -> Result<CompletionResponse, GatewayError> {
        if req.system_prompt.trim().is_empty() || req.user_prompt.trim().is_empty() {
            return Err(GatewayError::RemoteFailure("empty prompt".into()));
        }
        if req.max_output_tokens == 0 {
            return Err(GatewayError::RemoteFailure(
                "max_output_tokens must be >= 1".into(),
            ));
        }
        let started = Instant::now();
        let raw =
            catch_unwind(AssertUnwindSafe(|| self.backend.complete(req))).unwrap_or_else(|_| {
                Err(GatewayError::RemoteFailure(format!(
                    "backend {} panicked",
                    self.backend.name()
                )))
            })?;
        let wall_latency = started.elapsed().as_secs_f64();
        let output_token_count = count_tokens(&raw.text);
        if raw.truncated || output_token_count > req.max_output_tokens {
            return Err(GatewayError::OutputTruncated {
                limit: req.max_output_tokens,
            });
        }
        Ok(CompletionResponse {
            virtual_latency: self.cost.latency(output_token_count),
            text: raw.text,
            output_token_count,
            wall_latency,
        })
    }
}
