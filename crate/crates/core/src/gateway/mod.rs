//! Model gateway.
//!
//! Every language-model call in the crate goes through [`Gateway::complete`].
//! The gateway owns the retry policy, the in-flight cap and the call log; the
//! actual transport is a [`Backend`] (HTTP chat-completion endpoint or the
//! fixture-driven [`ScriptedBackend`]).

mod http;
mod log;
mod scripted;

use std::collections::BTreeMap;
use std::sync::{Arc, Condvar, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use self::http::{HttpBackend, HttpBackendConfig};
pub use self::log::{CallLog, CallOutcome, CallRecord};
pub use self::scripted::{Expectation, ScriptEntry, ScriptFixture, ScriptedBackend, SimulatedFailure};

/// Largest inline image accepted in a request.
pub const MAX_IMAGE_BYTES: usize = 4 * 1024 * 1024;

/// Which hyperparameter profile a request is issued under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// Pre-class generation: descriptions, segmentation, scripts, questions.
    Planner,
    /// In-class interaction: controller decisions and agent replies.
    Tutor,
}

impl Profile {
    pub fn as_str(self) -> &'static str {
        match self {
            Profile::Planner => "planner",
            Profile::Tutor => "tutor",
        }
    }

    /// Default sampling parameters for the profile.
    pub fn defaults(self) -> SamplingParams {
        match self {
            Profile::Planner => SamplingParams {
                max_tokens: 4096,
                temperature: 1.0,
                top_p: 1.0,
                n: 1,
                frequency_penalty: 0.0,
                presence_penalty: 0.0,
                stop: None,
                logit_bias: None,
                logprobs: false,
                do_sample: true,
            },
            Profile::Tutor => SamplingParams {
                max_tokens: 1024,
                temperature: 0.95,
                top_p: 0.7,
                n: 1,
                frequency_penalty: 0.0,
                presence_penalty: 0.0,
                stop: None,
                logit_bias: None,
                logprobs: false,
                do_sample: true,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingParams {
    pub max_tokens: u32,
    pub temperature: f64,
    pub top_p: f64,
    pub n: u32,
    pub frequency_penalty: f64,
    pub presence_penalty: f64,
    pub stop: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub logit_bias: Option<BTreeMap<String, f64>>,
    pub logprobs: bool,
    pub do_sample: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    System,
    User,
    Assistant,
}

/// An image attached to a user message.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ImageRef {
    /// Inline bytes, sent base64-encoded.
    Inline {
        media_type: String,
        #[serde(with = "base64_bytes")]
        data: Vec<u8>,
    },
    Url { url: String },
}

impl ImageRef {
    pub fn png(data: Vec<u8>) -> Self {
        ImageRef::Inline { media_type: "image/png".into(), data }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub text: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub images: Vec<ImageRef>,
}

/// Bookkeeping carried alongside a request. Never sent to the backend, but
/// recorded in the call log.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequestMeta {
    /// Deck, lecture or session the call belongs to.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scope: Option<String>,
    /// Which generator issued the call (`describe`, `segment`, `agent`, ...).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub purpose: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRequest {
    pub profile: Profile,
    pub messages: Vec<Message>,
    pub params: SamplingParams,
    #[serde(skip)]
    pub meta: RequestMeta,
}

impl ModelRequest {
    /// Starts a request with the profile's default parameters and the given
    /// system prompt.
    pub fn new(profile: Profile, system: impl Into<String>) -> Self {
        ModelRequest {
            profile,
            messages: vec![Message { role: Role::System, text: system.into(), images: Vec::new() }],
            params: profile.defaults(),
            meta: RequestMeta::default(),
        }
    }

    pub fn user(mut self, text: impl Into<String>) -> Self {
        self.push(Role::User, text.into(), Vec::new());
        self
    }

    pub fn user_with_images(mut self, text: impl Into<String>, images: Vec<ImageRef>) -> Self {
        self.push(Role::User, text.into(), images);
        self
    }

    pub fn assistant(mut self, text: impl Into<String>) -> Self {
        self.push(Role::Assistant, text.into(), Vec::new());
        self
    }

    pub fn push(&mut self, role: Role, text: String, images: Vec<ImageRef>) {
        self.messages.push(Message { role, text, images });
    }

    pub fn scope(mut self, scope: impl Into<String>) -> Self {
        self.meta.scope = Some(scope.into());
        self
    }

    pub fn purpose(mut self, purpose: impl Into<String>) -> Self {
        self.meta.purpose = Some(purpose.into());
        self
    }

    pub fn system_text(&self) -> &str {
        self.messages.first().map(|m| m.text.as_str()).unwrap_or_default()
    }

    /// Messages after the system prompt.
    pub fn conversation(&self) -> &[Message] {
        self.messages.get(1..).unwrap_or_default()
    }

    pub fn image_count(&self) -> usize {
        self.messages.iter().map(|m| m.images.len()).sum()
    }

    /// Checks the structural rules every request must satisfy.
    pub fn validate(&self) -> Result<(), GatewayError> {
        let invalid = |msg: &str| Err(GatewayError::InvalidRequest(msg.to_string()));
        match self.messages.first() {
            Some(m) if m.role == Role::System => {}
            _ => return invalid("first message must be the system prompt"),
        }
        if self.messages.iter().filter(|m| m.role == Role::System).count() != 1 {
            return invalid("exactly one system message is allowed");
        }
        for m in &self.messages {
            if !m.images.is_empty() && m.role != Role::User {
                return invalid("images are only allowed on user messages");
            }
            for img in &m.images {
                if let ImageRef::Inline { data, .. } = img {
                    if data.len() > MAX_IMAGE_BYTES {
                        return invalid("inline image exceeds 4 MB");
                    }
                }
            }
        }
        Ok(())
    }

    /// Hex SHA-256 over the wire-relevant content (profile, messages, params).
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("request serializes");
        hex::encode(Sha256::digest(bytes))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FinishReason {
    Stop,
    Length,
    Other(String),
}

impl FinishReason {
    pub fn from_wire(s: &str) -> Self {
        match s {
            "stop" => FinishReason::Stop,
            "length" => FinishReason::Length,
            other => FinishReason::Other(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelCompletion {
    pub text: String,
    pub finish_reason: FinishReason,
    #[serde(default)]
    pub usage: Usage,
}

impl ModelCompletion {
    pub fn stop(text: impl Into<String>) -> Self {
        ModelCompletion { text: text.into(), finish_reason: FinishReason::Stop, usage: Usage::default() }
    }
}

/// Failure reported by a backend for a single attempt.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BackendError {
    #[error("transient backend failure: {0}")]
    Transient(String),
    #[error("backend timed out")]
    Timeout,
    #[error("backend rejected the request: {0}")]
    Rejected(String),
    #[error("scripted fixture `{scenario}` exhausted at call {index}")]
    FixtureExhausted { scenario: String, index: usize },
    #[error("scripted assertion failed at call {index}: {detail}")]
    AssertionFailed { index: usize, detail: String },
}

impl BackendError {
    fn is_retryable(&self) -> bool {
        matches!(self, BackendError::Transient(_) | BackendError::Timeout)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GatewayError {
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("model call timed out after {attempts} attempt(s)")]
    Timeout { attempts: u32 },
    #[error("backend rejected the request: {0}")]
    BackendRejected(String),
    #[error("retries exhausted after {attempts} attempt(s): {last}")]
    RetriesExhausted { attempts: u32, last: String },
    #[error("scripted fixture `{scenario}` exhausted at call {index}")]
    FixtureExhausted { scenario: String, index: usize },
    #[error("scripted assertion failed at call {index}: {detail}")]
    AssertionFailed { index: usize, detail: String },
}

/// Transport for model calls.
pub trait Backend: Send + Sync {
    fn send(&self, request: &ModelRequest) -> Result<ModelCompletion, BackendError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    #[serde(with = "millis")]
    pub base_delay: Duration,
    #[serde(with = "millis")]
    pub max_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_attempts: 3,
            base_delay: Duration::from_millis(500),
            max_delay: Duration::from_secs(8),
        }
    }
}

impl RetryPolicy {
    /// Same attempt budget, no sleeping between attempts.
    pub fn immediate() -> Self {
        RetryPolicy { base_delay: Duration::ZERO, max_delay: Duration::ZERO, ..Default::default() }
    }

    fn delay_before(&self, attempt: u32) -> Duration {
        // attempt is 1-based; no delay before the first one
        if attempt <= 1 {
            return Duration::ZERO;
        }
        let factor = 1u32.checked_shl(attempt - 2).unwrap_or(u32::MAX);
        self.base_delay.saturating_mul(factor).min(self.max_delay)
    }
}

struct InflightCap {
    limit: usize,
    active: Mutex<usize>,
    freed: Condvar,
}

impl InflightCap {
    fn acquire(&self) -> InflightGuard<'_> {
        let mut active = self.active.lock().unwrap();
        while *active >= self.limit {
            active = self.freed.wait(active).unwrap();
        }
        *active += 1;
        InflightGuard { cap: self }
    }
}

struct InflightGuard<'a> {
    cap: &'a InflightCap,
}

impl Drop for InflightGuard<'_> {
    fn drop(&mut self) {
        *self.cap.active.lock().unwrap() -= 1;
        self.cap.freed.notify_one();
    }
}

/// The single chokepoint for model calls. Cheap to clone; clones share the
/// backend, the in-flight cap and the call log.
#[derive(Clone)]
pub struct Gateway {
    backend: Arc<dyn Backend>,
    policy: RetryPolicy,
    log: Arc<CallLog>,
    cap: Arc<InflightCap>,
}

impl std::fmt::Debug for Gateway {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Gateway").field("policy", &self.policy).field("calls", &self.log.len()).finish()
    }
}

impl Gateway {
    pub fn new(backend: Arc<dyn Backend>) -> Self {
        Gateway {
            backend,
            policy: RetryPolicy::default(),
            log: Arc::new(CallLog::in_memory()),
            cap: Arc::new(InflightCap { limit: 8, active: Mutex::new(0), freed: Condvar::new() }),
        }
    }

    /// Gateway over a scripted backend, with retries that never sleep.
    pub fn scripted(backend: ScriptedBackend) -> Self {
        Gateway::new(Arc::new(backend)).with_retry(RetryPolicy::immediate())
    }

    pub fn with_retry(mut self, policy: RetryPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn with_log(mut self, log: Arc<CallLog>) -> Self {
        self.log = log;
        self
    }

    pub fn with_inflight_limit(mut self, limit: usize) -> Self {
        self.cap = Arc::new(InflightCap { limit: limit.max(1), active: Mutex::new(0), freed: Condvar::new() });
        self
    }

    pub fn log(&self) -> &Arc<CallLog> {
        &self.log
    }

    pub fn policy(&self) -> RetryPolicy {
        self.policy
    }

    /// Sends the request, retrying transient failures with exponential
    /// backoff. Every attempt is appended to the call log before its result
    /// is returned.
    pub fn complete(&self, request: &ModelRequest) -> Result<ModelCompletion, GatewayError> {
        self.complete_counted(request, &mut 0)
    }

    /// Like [`Gateway::complete`], adding the number of backend attempts made
    /// to `attempts_made` whether or not the call succeeds. Resumable callers
    /// persist this so a replayed fixture can be fast-forwarded.
    pub fn complete_counted(
        &self,
        request: &ModelRequest,
        attempts_made: &mut usize,
    ) -> Result<ModelCompletion, GatewayError> {
        request.validate()?;
        let hash = request.hash();
        let attempts = self.policy.max_attempts.max(1);
        let mut last = None;
        for attempt in 1..=attempts {
            std::thread::sleep(self.policy.delay_before(attempt));
            let result = {
                let _slot = self.cap.acquire();
                self.backend.send(request)
            };
            *attempts_made += 1;
            self.log.append(request, &hash, attempt, &result);
            match result {
                Ok(completion) => return Ok(completion),
                Err(err) if err.is_retryable() => {
                    tracing::warn!(attempt, %err, "model call failed; retrying");
                    last = Some(err);
                }
                Err(BackendError::Rejected(msg)) => return Err(GatewayError::BackendRejected(msg)),
                Err(BackendError::FixtureExhausted { scenario, index }) => {
                    return Err(GatewayError::FixtureExhausted { scenario, index })
                }
                Err(BackendError::AssertionFailed { index, detail }) => {
                    return Err(GatewayError::AssertionFailed { index, detail })
                }
                Err(_) => unreachable!("retryable errors handled above"),
            }
        }
        match last {
            Some(BackendError::Timeout) => Err(GatewayError::Timeout { attempts }),
            Some(err) => Err(GatewayError::RetriesExhausted { attempts, last: err.to_string() }),
            None => unreachable!("at least one attempt is made"),
        }
    }
}

mod base64_bytes {
    use base64::engine::general_purpose::STANDARD;
    use base64::Engine;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bytes: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&STANDARD.encode(bytes))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        let s = String::deserialize(d)?;
        STANDARD.decode(s.as_bytes()).map_err(serde::de::Error::custom)
    }
}

mod millis {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_millis() as u64)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Ok(Duration::from_millis(u64::deserialize(d)?))
    }
}
