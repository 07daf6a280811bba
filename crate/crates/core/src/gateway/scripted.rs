//! Deterministic fixture-driven backend.
//!
//! Replies are served strictly in sequence. Each entry may carry request-shape
//! expectations that are checked before the reply is handed out, which is how
//! tests pin down what a caller actually put into a prompt.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{Backend, BackendError, FinishReason, ModelCompletion, ModelRequest, Profile, Usage};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expectation {
    /// Some message (any role) contains the text.
    Contains(String),
    NotContains(String),
    SystemContains(String),
    /// Messages after the system prompt.
    MessageCount(usize),
    MaxMessages(usize),
    ImageCount(usize),
    Profile(Profile),
    Purpose(String),
}

impl Expectation {
    fn check(&self, req: &ModelRequest) -> Result<(), String> {
        let any_contains = |needle: &str| req.messages.iter().any(|m| m.text.contains(needle));
        match self {
            Expectation::Contains(s) if !any_contains(s) => Err(format!("expected request to contain {s:?}")),
            Expectation::NotContains(s) if any_contains(s) => Err(format!("expected request not to contain {s:?}")),
            Expectation::SystemContains(s) if !req.system_text().contains(s.as_str()) => {
                Err(format!("expected system prompt to contain {s:?}"))
            }
            Expectation::MessageCount(n) if req.conversation().len() != *n => {
                Err(format!("expected {n} messages after the system prompt, got {}", req.conversation().len()))
            }
            Expectation::MaxMessages(n) if req.conversation().len() > *n => {
                Err(format!("expected at most {n} messages after the system prompt, got {}", req.conversation().len()))
            }
            Expectation::ImageCount(n) if req.image_count() != *n => {
                Err(format!("expected {n} images, got {}", req.image_count()))
            }
            Expectation::Profile(p) if req.profile != *p => Err(format!("expected profile {p:?}, got {:?}", req.profile)),
            Expectation::Purpose(p) if req.meta.purpose.as_deref() != Some(p.as_str()) => {
                Err(format!("expected purpose {p:?}, got {:?}", req.meta.purpose))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimulatedFailure {
    Transient,
    Timeout,
    Rejected,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptEntry {
    #[serde(default)]
    pub reply: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub expect: Vec<Expectation>,
    /// Fail this call instead of replying.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fail: Option<SimulatedFailure>,
}

impl ScriptEntry {
    pub fn reply(text: impl Into<String>) -> Self {
        ScriptEntry { reply: text.into(), ..Default::default() }
    }

    pub fn failing(failure: SimulatedFailure) -> Self {
        ScriptEntry { fail: Some(failure), ..Default::default() }
    }

    pub fn expect(mut self, e: Expectation) -> Self {
        self.expect.push(e);
        self
    }
}

/// On-disk fixture: named scenarios, each an ordered list of entries.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptFixture {
    pub scenarios: BTreeMap<String, Vec<ScriptEntry>>,
}

impl ScriptFixture {
    pub fn load(path: &Path) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    }
}

#[derive(Debug)]
pub struct ScriptedBackend {
    scenario: String,
    entries: Vec<ScriptEntry>,
    position: Mutex<usize>,
}

impl ScriptedBackend {
    pub fn new(scenario: impl Into<String>, entries: Vec<ScriptEntry>) -> Self {
        ScriptedBackend { scenario: scenario.into(), entries, position: Mutex::new(0) }
    }

    /// Backend for one scenario of a fixture; `None` if the scenario is absent.
    pub fn from_fixture(fixture: &ScriptFixture, scenario: &str) -> Option<Self> {
        fixture.scenarios.get(scenario).map(|entries| ScriptedBackend::new(scenario, entries.clone()))
    }

    /// Skips the first `position` entries, e.g. when a run resumes after
    /// `position` calls were already made.
    pub fn starting_at(self, position: usize) -> Self {
        *self.position.lock().unwrap() = position;
        self
    }

    pub fn position(&self) -> usize {
        *self.position.lock().unwrap()
    }

    pub fn remaining(&self) -> usize {
        self.entries.len().saturating_sub(self.position())
    }
}

impl Backend for ScriptedBackend {
    fn send(&self, request: &ModelRequest) -> Result<ModelCompletion, BackendError> {
        let mut pos = self.position.lock().unwrap();
        let index = *pos;
        let entry = self
            .entries
            .get(index)
            .ok_or_else(|| BackendError::FixtureExhausted { scenario: self.scenario.clone(), index })?;
        *pos += 1;
        for e in &entry.expect {
            e.check(request).map_err(|detail| BackendError::AssertionFailed { index, detail })?;
        }
        match entry.fail {
            Some(SimulatedFailure::Transient) => return Err(BackendError::Transient("scripted failure".into())),
            Some(SimulatedFailure::Timeout) => return Err(BackendError::Timeout),
            Some(SimulatedFailure::Rejected) => return Err(BackendError::Rejected("scripted rejection".into())),
            None => {}
        }
        let prompt_tokens = request.messages.iter().map(|m| approx_tokens(&m.text)).sum();
        let completion_tokens = approx_tokens(&entry.reply);
        Ok(ModelCompletion {
            text: entry.reply.clone(),
            finish_reason: FinishReason::Stop,
            usage: Usage { prompt_tokens, completion_tokens },
        })
    }
}

// whitespace word count; good enough for bookkeeping in tests
fn approx_tokens(text: &str) -> u64 {
    text.split_whitespace().count() as u64
}
