use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::action::{ActionKind, ActionQueue, ActionValue, TeachingAction};
use super::generate::{askquestion_counted, plan_showfile, readscript_counted};
use super::{PlanConfig, PlanError};
use crate::agenda::Agenda;
use crate::gateway::Gateway;
use crate::ingest::SlideDeck;

/// A compiled lecture plan: the agenda with each leaf's actions filled in,
/// and the flattened queue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub agenda: Agenda,
    pub queue: ActionQueue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "unit", content = "index", rename_all = "snake_case")]
pub enum PlanUnit {
    /// Script for the page at this index.
    Script(usize),
    /// Questions for the n-th eligible section (post-order).
    Questions(usize),
    Done,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionQuestions {
    pub section_id: String,
    pub actions: Vec<TeachingAction>,
    /// Set when the section produced no valid question and was skipped.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
}

/// Resumable plan compilation over a finished agenda.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanBuild {
    pub lecture_id: String,
    pub scripts: Vec<String>,
    pub sections: Vec<SectionQuestions>,
    pub calls: usize,
}

/// Sections (root excluded) whose flattened leaf count reaches k, children
/// before parents.
pub fn eligible_sections(agenda: &Agenda, k: usize) -> Vec<String> {
    agenda.sections_post_order().into_iter().filter(|s| s.leaves().len() >= k).map(|s| s.node_id.clone()).collect()
}

impl PlanBuild {
    pub fn new(lecture_id: impl Into<String>) -> Self {
        PlanBuild { lecture_id: lecture_id.into(), scripts: Vec::new(), sections: Vec::new(), calls: 0 }
    }

    pub fn next_unit(&self, agenda: &Agenda, cfg: &PlanConfig) -> PlanUnit {
        if self.scripts.len() < agenda.leaf_count {
            PlanUnit::Script(self.scripts.len())
        } else if self.sections.len() < eligible_sections(agenda, cfg.context_pages).len() {
            PlanUnit::Questions(self.sections.len())
        } else {
            PlanUnit::Done
        }
    }

    /// One script or one section's questions. On error only `calls`
    /// changes. A section whose reply holds no valid question is recorded
    /// as skipped rather than failing the build.
    pub fn advance(&mut self, agenda: &Agenda, deck: &SlideDeck, gateway: &Gateway, cfg: &PlanConfig) -> Result<PlanUnit, PlanError> {
        let unit = self.next_unit(agenda, cfg);
        match unit {
            PlanUnit::Script(i) => {
                let leaves = agenda.leaves();
                let leaf = leaves[i];
                let page_index = leaf.page_index.ok_or_else(|| PlanError::NotALeaf(leaf.node_id.clone()))?;
                let page = deck.page(page_index).ok_or(PlanError::MissingPage(page_index))?;
                let script =
                    readscript_counted(leaf, page, &self.scripts, gateway, cfg, &self.lecture_id, &mut self.calls)?;
                self.scripts.push(script);
            }
            PlanUnit::Questions(j) => {
                let id = &eligible_sections(agenda, cfg.context_pages)[j];
                let section = agenda.find(id).expect("eligible section exists");
                let leaves = agenda.leaves();
                let last = section.leaves().last().expect("non-empty").node_id.clone();
                let pos = leaves.iter().position(|l| l.node_id == last).expect("leaf in agenda");
                let window = &self.scripts[(pos + 1).saturating_sub(cfg.context_pages + 1)..=pos];
                let entry = match askquestion_counted(section, window, gateway, cfg, &self.lecture_id, &mut self.calls) {
                    Ok(actions) => SectionQuestions { section_id: id.clone(), actions, skipped: None },
                    Err(PlanError::NoValidQuestions { failures, .. }) => {
                        tracing::warn!(section = %id, "no valid questions; section skipped");
                        SectionQuestions { section_id: id.clone(), actions: Vec::new(), skipped: Some(failures.join("; ")) }
                    }
                    Err(e) => return Err(e),
                };
                self.sections.push(entry);
            }
            PlanUnit::Done => {}
        }
        Ok(unit)
    }

    /// Attaches actions to leaves and flattens them. Call once
    /// [`PlanBuild::next_unit`] reports `Done`.
    pub fn finish(&self, agenda: &Agenda, page_count: usize) -> Result<Plan, PlanError> {
        let mut agenda = agenda.clone();
        let mut questions: HashMap<&str, Vec<&TeachingAction>> = HashMap::new();
        for s in &self.sections {
            for a in &s.actions {
                questions.entry(a.origin_leaf.as_str()).or_default().push(a);
            }
        }
        let leaf_ids: Vec<String> = agenda.leaves().iter().map(|l| l.node_id.clone()).collect();
        if leaf_ids.len() != self.scripts.len() {
            return Err(PlanError::InvariantViolation(format!(
                "{} scripts for {} leaves",
                self.scripts.len(),
                leaf_ids.len()
            )));
        }
        let mut actions = Vec::new();
        for (id, script) in leaf_ids.iter().zip(&self.scripts) {
            let leaf = agenda.find_mut(id).expect("leaf exists");
            let mut list = vec![plan_showfile(leaf)?, TeachingAction::read_script(script.clone(), id.clone())];
            list.extend(questions.get(id.as_str()).into_iter().flatten().map(|a| (*a).clone()));
            leaf.actions = list.clone();
            actions.extend(list);
        }
        let queue = ActionQueue { lecture_id: self.lecture_id.clone(), revision: 1, page_count, actions };
        validate_queue(&queue)?;
        Ok(Plan { agenda, queue })
    }
}

/// Generates scripts for every leaf, then questions for every eligible
/// section, and returns the compiled plan. `checkpoint` sees the build
/// state after each unit.
pub fn compile_queue(
    lecture_id: &str,
    agenda: &Agenda,
    deck: &SlideDeck,
    gateway: &Gateway,
    cfg: &PlanConfig,
    mut checkpoint: impl FnMut(&PlanBuild),
) -> Result<Plan, PlanError> {
    cfg.validate()?;
    let mut build = PlanBuild::new(lecture_id);
    while build.next_unit(agenda, cfg) != PlanUnit::Done {
        build.advance(agenda, deck, gateway, cfg)?;
        checkpoint(&build);
    }
    build.finish(agenda, deck.pages.len())
}

fn rank(kind: &ActionKind) -> Option<u8> {
    match kind {
        ActionKind::ShowFile => Some(0),
        ActionKind::ReadScript => Some(1),
        ActionKind::AskQuestion => Some(2),
        ActionKind::Custom(_) => None,
    }
}

/// Checks the queue invariants: ShowFile pages in range and strictly
/// increasing, scripts non-empty, questions valid, and per leaf ShowFile
/// before ReadScript before AskQuestion.
pub fn validate_queue(queue: &ActionQueue) -> Result<(), PlanError> {
    let violation = |msg: String| Err(PlanError::InvariantViolation(msg));
    let mut last_page: Option<usize> = None;
    let mut last_rank: HashMap<&str, (u8, usize)> = HashMap::new();
    for (pos, a) in queue.actions.iter().enumerate() {
        match &a.value {
            ActionValue::ShowFile(p) => {
                if *p >= queue.page_count {
                    return violation(format!("action {pos} shows page {p} of a {}-page deck", queue.page_count));
                }
                if let Some(prev) = last_page.filter(|prev| p <= prev) {
                    return violation(format!("action {pos} shows page {p} after page {prev}"));
                }
                last_page = Some(*p);
            }
            ActionValue::ReadScript(s) if s.trim().is_empty() => return violation(format!("action {pos} has an empty script")),
            ActionValue::AskQuestion(qa) => {
                qa.validate().map_err(|e| PlanError::InvariantViolation(format!("action {pos}: {e}")))?
            }
            _ => {}
        }
        if let Some(r) = rank(&a.kind()) {
            if let Some(&(prev, at)) = last_rank.get(a.origin_leaf.as_str()) {
                if r < prev {
                    return violation(format!(
                        "action {pos} ({}) comes after action {at} of the same leaf {}",
                        a.kind(),
                        a.origin_leaf
                    ));
                }
            }
            last_rank.insert(&a.origin_leaf, (r, pos));
        }
    }
    Ok(())
}

/// A teacher edit. Positions index the queue as it stands when the edit
/// is applied, edits being applied in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum QueueEdit {
    Insert { position: usize, action: TeachingAction },
    Remove { position: usize },
    Replace { position: usize, action: TeachingAction },
}

/// Applies all edits or none. On success the revision is bumped by one.
pub fn revise_queue(queue: &ActionQueue, edits: &[QueueEdit]) -> Result<ActionQueue, PlanError> {
    let mut actions = queue.actions.clone();
    for (i, edit) in edits.iter().enumerate() {
        let bad = |position: usize| PlanError::BadPosition { edit: i, position };
        match edit {
            QueueEdit::Insert { position, action } => {
                if *position > actions.len() {
                    return Err(bad(*position));
                }
                actions.insert(*position, action.clone());
            }
            QueueEdit::Remove { position } => {
                if *position >= actions.len() {
                    return Err(bad(*position));
                }
                actions.remove(*position);
            }
            QueueEdit::Replace { position, action } => {
                *actions.get_mut(*position).ok_or_else(|| bad(*position))? = action.clone();
            }
        }
    }
    let revised = ActionQueue { actions, revision: queue.revision + 1, ..queue.clone() };
    validate_queue(&revised)?;
    Ok(revised)
}
