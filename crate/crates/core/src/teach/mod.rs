//! In-class tutoring sessions.
//!
//! A [`Session`] walks the action queue with a cursor. Each action kind has
//! a scene controller implemented as a small state machine in
//! [`TeachEngine`]; the machine advances one micro-step at a time, and each
//! step makes at most one model call before the session is saved. While a
//! session waits for the student, no step is pending.

mod controller;
mod engine;
mod history;
mod steps;
mod store;
mod user;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::gateway::GatewayError;
use crate::plan::{ActionQueue, QAItem};
use crate::prompts::CourseInfo;

pub use self::controller::{parse_decision, AgentRole, Choice, ControllerDecision, Roster};
pub use self::engine::{grade_answer, Clock, CustomController, FixedClock, SystemClock, TeachEngine, Verdict};
pub use self::history::model_window;
pub use self::steps::{MemoryStepQueue, StepLease, StepQueue, StepTicket};
pub use self::store::{FileSessionStore, MemorySessionStore, SessionStore};
pub use self::user::{drive, ScriptedUser};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct TeachConfig {
    /// Utterances of history given to the controller and agents (H).
    pub history_window: usize,
    /// Agent replies allowed in a row before the session waits for the
    /// student again.
    pub max_agent_turns: usize,
    /// Consecutive unusable controller replies that end the discussion.
    pub fallback_limit: u32,
    pub language: String,
    pub course: CourseInfo,
}

impl Default for TeachConfig {
    fn default() -> Self {
        TeachConfig {
            history_window: 12,
            max_agent_turns: 3,
            fallback_limit: 2,
            language: "English".into(),
            course: CourseInfo::titled("this course"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum TeachError {
    #[error("lecture {0} has no compiled action queue")]
    NoQueue(String),
    #[error("unknown session {0}")]
    UnknownSession(String),
    #[error("session is not waiting for input (phase {0})")]
    NotAwaitingInput(String),
    #[error("option {index} does not exist; the question has {options} options")]
    BadIndex { index: usize, options: usize },
    #[error("no controller is registered for action kind {0}")]
    UnsupportedAction(String),
    #[error("session has no pending step")]
    NoPendingStep,
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error("session store: {0}")]
    Store(String),
    #[error("scripted user has no event at position {position}")]
    ScriptExhausted { position: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Speaker {
    User,
    Teacher,
    TeachingAssistant,
    System,
}

impl Speaker {
    pub fn as_str(self) -> &'static str {
        match self {
            Speaker::User => "user",
            Speaker::Teacher => "teacher",
            Speaker::TeachingAssistant => "teaching_assistant",
            Speaker::System => "system",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Speaker::User => "Student",
            Speaker::Teacher => "Teacher",
            Speaker::TeachingAssistant => "Teaching assistant",
            Speaker::System => "System",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UtteranceKind {
    Say,
    ShowPage,
    PostQuestion,
    Explanation,
    Control,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Attachment {
    Page { page_index: usize },
    Question { qa: QAItem },
    Choice { options: BTreeSet<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Utterance {
    pub speaker: Speaker,
    pub content: String,
    pub kind: UtteranceKind,
    /// Milliseconds since the Unix epoch.
    pub timestamp: u64,
    /// Queue position of the action this utterance belongs to.
    pub action: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attachment: Option<Attachment>,
}

/// One utterance as delivered to clients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventEnvelope {
    pub session_id: String,
    /// 1-based, gapless.
    pub seq: u64,
    pub utterance: Utterance,
}

/// What the student can do.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum UserEvent {
    Say { text: String },
    Choose { options: BTreeSet<usize> },
    Continue,
}

/// Where the active action's controller is.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "phase", rename_all = "snake_case")]
pub enum Phase {
    /// The action at the cursor has not started.
    Entering,
    /// Waiting for the student during a script.
    AwaitingUser,
    /// The controller picks the next speaker.
    Selecting,
    Responding { agent: Speaker },
    /// A question is posed; waiting for a submission.
    AwaitingSolution,
    Grading { submission: BTreeSet<usize> },
    Complete,
}

impl Phase {
    pub fn name(&self) -> &'static str {
        match self {
            Phase::Entering => "entering",
            Phase::AwaitingUser => "awaiting_user",
            Phase::Selecting => "selecting",
            Phase::Responding { .. } => "responding",
            Phase::AwaitingSolution => "awaiting_solution",
            Phase::Grading { .. } => "grading",
            Phase::Complete => "complete",
        }
    }

    /// Whether a step can run without student input.
    pub fn has_pending_step(&self) -> bool {
        matches!(self, Phase::Entering | Phase::Selecting | Phase::Responding { .. } | Phase::Grading { .. })
    }
}

/// What one executed step did.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step_no: u64,
    pub cursor: usize,
    pub phase: String,
    /// Gateway calls made by the step: 0 or 1.
    pub calls: u32,
    /// Backend attempts behind those calls, retries included.
    pub attempts: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub request_hash: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decision: Option<ControllerDecision>,
    /// Utterances appended by the step.
    pub emitted: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub session_id: String,
    pub lecture_id: String,
    pub user_id: String,
    /// The queue as it was when the session started.
    pub queue: ActionQueue,
    pub cursor: usize,
    pub phase: Phase,
    pub history: Vec<Utterance>,
    pub step_log: Vec<StepRecord>,
    /// Student events accepted so far.
    pub user_events: usize,
    /// Agent replies since the student last spoke.
    pub agent_turns: usize,
    /// Consecutive controller replies that needed the fallback.
    pub fallback_streak: u32,
}

impl Session {
    pub fn is_complete(&self) -> bool {
        self.phase == Phase::Complete
    }

    pub fn has_pending_step(&self) -> bool {
        self.phase.has_pending_step()
    }

    /// Backend attempts recorded across all steps.
    pub fn backend_attempts(&self) -> usize {
        self.step_log.iter().map(|s| s.attempts as usize).sum()
    }

    /// History as numbered envelopes, starting at seq 1.
    pub fn transcript(&self) -> Vec<EventEnvelope> {
        self.envelopes_from(0)
    }

    /// Envelopes with seq greater than `after`.
    pub fn envelopes_from(&self, after: u64) -> Vec<EventEnvelope> {
        self.history
            .iter()
            .enumerate()
            .skip(after as usize)
            .map(|(i, u)| EventEnvelope { session_id: self.session_id.clone(), seq: i as u64 + 1, utterance: u.clone() })
            .collect()
    }
}
