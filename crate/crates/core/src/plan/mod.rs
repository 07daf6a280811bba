//! Teaching-action planning: per-page scripts, per-section quizzes, and the
//! flattened action queue.

pub mod action;
mod generate;
mod questions;
mod queue;

use serde::{Deserialize, Serialize};

use crate::gateway::GatewayError;

pub use self::action::{ActionKind, ActionQueue, ActionValue, QAItem, QaError, QuestionType, TeachingAction};
pub use self::generate::{plan_askquestion, plan_readscript, plan_showfile};
pub use self::questions::{parse_question_block, render_question, BlockError, QuestionParse};
pub use self::queue::{
    compile_queue, eligible_sections, revise_queue, validate_queue, Plan, PlanBuild, PlanUnit, QueueEdit, SectionQuestions,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanConfig {
    /// Scripts of this many preceding pages are given as context (k); also
    /// the minimum leaf count for a section to get questions.
    pub context_pages: usize,
    /// Valid questions kept per section, 1 to 3.
    pub questions_kept: usize,
    pub language: String,
}

impl Default for PlanConfig {
    fn default() -> Self {
        PlanConfig { context_pages: 3, questions_kept: 1, language: "English".into() }
    }
}

impl PlanConfig {
    pub fn validate(&self) -> Result<(), PlanError> {
        if !(1..=3).contains(&self.questions_kept) {
            return Err(PlanError::InvalidConfig(format!("questions_kept must be 1 to 3, got {}", self.questions_kept)));
        }
        if self.context_pages == 0 {
            return Err(PlanError::InvalidConfig("context_pages must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PlanError {
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error("model returned an empty completion")]
    EmptyCompletion,
    #[error(transparent)]
    Ingest(#[from] crate::ingest::IngestError),
    #[error("node {0} is not a leaf")]
    NotALeaf(String),
    #[error("section {section} has {leaves} pages; at least {k} are needed for questions")]
    NotEligible { section: String, leaves: usize, k: usize },
    #[error("no valid questions for section {section}")]
    NoValidQuestions { section: String, failures: Vec<String> },
    #[error("deck has no page {0}")]
    MissingPage(usize),
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("edit {edit} refers to position {position}, which does not exist")]
    BadPosition { edit: usize, position: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
