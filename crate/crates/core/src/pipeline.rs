//! The whole pre-class run as one resumable state machine: describe every
//! page, segment every page, write scripts, write section quizzes.

use serde::{Deserialize, Serialize};

use crate::agenda::{AgendaBuild, AgendaConfig, AgendaError};
use crate::gateway::Gateway;
use crate::ingest::SlideDeck;
use crate::plan::{Plan, PlanBuild, PlanConfig, PlanError, PlanUnit};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct LectureConfig {
    /// k: neighbouring pages of context, and the minimum section size for
    /// questions.
    pub context_pages: usize,
    /// R: re-asks after an invalid segmentation reply.
    pub segment_retries: u32,
    pub description_cap: usize,
    pub questions_kept: usize,
    pub language: String,
}

impl Default for LectureConfig {
    fn default() -> Self {
        let a = AgendaConfig::default();
        LectureConfig {
            context_pages: a.context_pages,
            segment_retries: a.segment_retries,
            description_cap: a.description_cap,
            questions_kept: PlanConfig::default().questions_kept,
            language: a.language,
        }
    }
}

impl LectureConfig {
    pub fn agenda(&self) -> AgendaConfig {
        AgendaConfig {
            context_pages: self.context_pages,
            segment_retries: self.segment_retries,
            description_cap: self.description_cap,
            language: self.language.clone(),
        }
    }

    pub fn plan(&self) -> PlanConfig {
        PlanConfig { context_pages: self.context_pages, questions_kept: self.questions_kept, language: self.language.clone() }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Agenda(#[from] AgendaError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error("deck {found} does not match the pipeline state for deck {expected}")]
    WrongDeck { expected: String, found: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Describing,
    Segmenting,
    Planning,
    Done,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineState {
    pub lecture_id: String,
    pub agenda: AgendaBuild,
    pub plan: PlanBuild,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<Plan>,
}

impl PipelineState {
    pub fn new(lecture_id: impl Into<String>, deck: &SlideDeck) -> Self {
        let lecture_id = lecture_id.into();
        PipelineState { plan: PlanBuild::new(lecture_id.clone()), lecture_id, agenda: AgendaBuild::new(deck), result: None }
    }

    pub fn stage(&self) -> Stage {
        if self.result.is_some() {
            Stage::Done
        } else if self.agenda.descriptions.len() < self.agenda.page_count {
            Stage::Describing
        } else if !self.agenda.is_done() {
            Stage::Segmenting
        } else {
            Stage::Planning
        }
    }

    /// Backend attempts consumed so far. A scripted backend restarted at
    /// this position continues exactly where the run stopped.
    pub fn calls(&self) -> usize {
        self.agenda.calls + self.plan.calls
    }

    /// One unit of work. Returns the stage after the unit.
    pub fn advance(&mut self, deck: &SlideDeck, gateway: &Gateway, cfg: &LectureConfig) -> Result<Stage, PipelineError> {
        if deck.deck_id != self.agenda.deck_id {
            return Err(PipelineError::WrongDeck { expected: self.agenda.deck_id.clone(), found: deck.deck_id.clone() });
        }
        match self.stage() {
            Stage::Describing | Stage::Segmenting => {
                self.agenda.advance(deck, gateway, &cfg.agenda())?;
            }
            Stage::Planning => {
                let pcfg = cfg.plan();
                pcfg.validate()?;
                let agenda = &self.agenda.agenda;
                if self.plan.next_unit(agenda, &pcfg) != PlanUnit::Done {
                    self.plan.advance(agenda, deck, gateway, &pcfg)?;
                }
                if self.plan.next_unit(agenda, &pcfg) == PlanUnit::Done {
                    self.result = Some(self.plan.finish(agenda, deck.pages.len())?);
                }
            }
            Stage::Done => {}
        }
        Ok(self.stage())
    }
}

/// Runs the pipeline from `state` to completion, calling `checkpoint` after
/// every unit.
pub fn run_pipeline(
    state: &mut PipelineState,
    deck: &SlideDeck,
    gateway: &Gateway,
    cfg: &LectureConfig,
    mut checkpoint: impl FnMut(&PipelineState),
) -> Result<Plan, PipelineError> {
    while state.stage() != Stage::Done {
        state.advance(deck, gateway, cfg)?;
        checkpoint(state);
    }
    Ok(state.result.clone().expect("done implies a result"))
}
