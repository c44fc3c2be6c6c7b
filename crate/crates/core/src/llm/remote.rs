//! Chat-completion client for OpenAI-compatible servers.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{CompletionBackend, CompletionRequest, GatewayError, RawCompletion};
use crate::http::{self, HttpError};

#[derive(Debug, Clone, PartialEq)]
pub struct RemoteLlmConfig {
    /// Base URL (`/chat/completions` is appended) or the full endpoint.
    pub endpoint: String,
    pub model: String,
    pub timeout: Duration,
}

impl RemoteLlmConfig {
    pub fn url(&self) -> String {
        if self.endpoint.contains("chat/completions") {
            self.endpoint.clone()
        } else {
            format!("{}/chat/completions", self.endpoint.trim_end_matches('/'))
        }
    }
}

#[derive(Debug)]
pub struct RemoteBackend {
    config: RemoteLlmConfig,
}

impl RemoteBackend {
    pub fn new(config: RemoteLlmConfig) -> Self {
        Self { config }
    }
}

#[derive(Serialize)]
struct Message<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: Vec<Message<'a>>,
    temperature: f64,
    max_tokens: usize,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ReplyMessage,
    #[serde(default)]
    finish_reason: Option<String>,
}

#[derive(Deserialize)]
struct ReplyMessage {
    #[serde(default)]
    content: Option<String>,
}

impl CompletionBackend for RemoteBackend {
    fn name(&self) -> &str {
        "remote"
    }

    fn complete(&self, req: &CompletionRequest) -> Result<RawCompletion, GatewayError> {
        let body = ChatRequest {
            model: &self.config.model,
            messages: vec![
                Message {
                    role: "system",
                    content: &req.system_prompt,
                },
                Message {
                    role: "user",
                    content: &req.user_prompt,
                },
            ],
            temperature: CompletionRequest::TEMPERATURE,
            max_tokens: req.max_output_tokens,
        };
        let body = serde_json::to_vec(&body).expect("request serializes");
        let reply = http::post(
            &self.config.url(),
            "application/json",
            &body,
            self.config.timeout,
        )
        .map_err(|e| match e {
            HttpError::Unreachable(m) => GatewayError::Timeout(m),
            HttpError::Failure(m) => GatewayError::RemoteFailure(m),
        })?;
        if !(200..300).contains(&reply.status) {
            let snippet: String = reply.body.chars().take(200).collect();
            return Err(GatewayError::RemoteFailure(format!(
                "HTTP status {}: {snippet}",
                reply.status
            )));
        }
        let parsed: ChatResponse = serde_json::from_str(&reply.body)
            .map_err(|e| GatewayError::RemoteFailure(format!("unreadable response: {e}")))?;
        let choice = parsed
            .choices
            .into_iter()
            .next()
            .ok_or_else(|| GatewayError::RemoteFailure("response has no choices".into()))?;
        Ok(RawCompletion {
            text: choice.message.content.unwrap_or_default(),
            truncated: choice.finish_reason.as_deref() == Some("length"),
        })
    }
}
