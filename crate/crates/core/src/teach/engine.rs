use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::controller::{parse_decision, Choice, ControllerDecision, Roster};
use super::history::{model_window, push_for_agent, push_for_controller};
use super::store::{MemorySessionStore, SessionStore};
use super::{Attachment, Phase, Session, Speaker, StepRecord, TeachConfig, TeachError, UserEvent, Utterance, UtteranceKind};
use crate::gateway::{Gateway, ModelRequest, Profile};
use crate::plan::{ActionKind, ActionQueue, ActionValue, QAItem};
use crate::prompts;

pub trait Clock: Send + Sync {
    fn now_ms(&self) -> u64;
}

pub struct SystemClock;

impl Clock for SystemClock {
    fn now_ms(&self) -> u64 {
        SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0)
    }
}

/// Always returns the same instant. Makes transcripts reproducible.
pub struct FixedClock(pub u64);

impl Clock for FixedClock {
    fn now_ms(&self) -> u64 {
        self.0
    }
}

/// Runs an extension action kind. The action ends right after the
/// returned utterances are emitted.
pub trait CustomController: Send + Sync {
    fn run(&self, value: &serde_json::Value) -> Vec<(Speaker, UtteranceKind, String)>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Correct,
    Incorrect,
}

/// Exact-set grading: correct only when the submission equals the answer.
pub fn grade_answer(qa: &QAItem, submission: &BTreeSet<usize>) -> Result<Verdict, TeachError> {
    if let Some(&index) = submission.iter().find(|&&i| i >= qa.options.len()) {
        return Err(TeachError::BadIndex { index, options: qa.options.len() });
    }
    Ok(if *submission == qa.answer { Verdict::Correct } else { Verdict::Incorrect })
}

pub struct TeachEngine {
    gateway: Gateway,
    config: TeachConfig,
    roster: Roster,
    custom: HashMap<String, Arc<dyn CustomController>>,
    clock: Arc<dyn Clock>,
    store: Arc<dyn SessionStore>,
}

struct StepOutput {
    calls: u32,
    attempts: u32,
    request_hash: Option<String>,
    decision: Option<ControllerDecision>,
}

impl StepOutput {
    fn none() -> Self {
        StepOutput { calls: 0, attempts: 0, request_hash: None, decision: None }
    }
}

impl TeachEngine {
    pub fn new(gateway: Gateway, config: TeachConfig) -> Self {
        TeachEngine {
            gateway,
            config,
            roster: Roster::default(),
            custom: HashMap::new(),
            clock: Arc::new(SystemClock),
            store: Arc::new(MemorySessionStore::default()),
        }
    }

    pub fn with_store(mut self, store: Arc<dyn SessionStore>) -> Self {
        self.store = store;
        self
    }

    pub fn with_clock(mut self, clock: Arc<dyn Clock>) -> Self {
        self.clock = clock;
        self
    }

    pub fn with_roster(mut self, roster: Roster) -> Self {
        self.roster = roster;
        self
    }

    /// Registers a controller for an extension action kind.
    pub fn register(mut self, kind: impl Into<String>, controller: Arc<dyn CustomController>) -> Self {
        self.custom.insert(kind.into(), controller);
        self
    }

    pub fn gateway(&self) -> &Gateway {
        &self.gateway
    }

    pub fn config(&self) -> &TeachConfig {
        &self.config
    }

    pub fn store(&self) -> &Arc<dyn SessionStore> {
        &self.store
    }

    /// A new session at the start of `queue`. Fails if the queue holds an
    /// action kind no controller handles.
    pub fn start_session(
        &self,
        session_id: impl Into<String>,
        lecture_id: &str,
        user_id: &str,
        queue: Option<&ActionQueue>,
    ) -> Result<Session, TeachError> {
        let queue = queue.ok_or_else(|| TeachError::NoQueue(lecture_id.to_string()))?;
        for a in &queue.actions {
            if let ActionKind::Custom(kind) = a.kind() {
                if !self.custom.contains_key(&kind) {
                    return Err(TeachError::UnsupportedAction(kind));
                }
            }
        }
        let session = Session {
            session_id: session_id.into(),
            lecture_id: lecture_id.to_string(),
            user_id: user_id.to_string(),
            queue: queue.clone(),
            cursor: 0,
            phase: if queue.actions.is_empty() { Phase::Complete } else { Phase::Entering },
            history: Vec::new(),
            step_log: Vec::new(),
            user_events: 0,
            agent_turns: 0,
            fallback_streak: 0,
        };
        self.store.save(&session)?;
        Ok(session)
    }

    pub fn resume_session(&self, session_id: &str) -> Result<Session, TeachError> {
        self.store.load(session_id)
    }

    /// Executes one micro-step: at most one gateway call, then the session
    /// is saved. On error `session` is left untouched.
    pub fn run_step(&self, session: &mut Session) -> Result<Vec<Utterance>, TeachError> {
        if !session.has_pending_step() {
            return Err(TeachError::NoPendingStep);
        }
        let mut next = session.clone();
        let before = next.history.len();
        let cursor = next.cursor;
        let phase = next.phase.name().to_string();
        let out = match next.phase.clone() {
            Phase::Entering => self.enter(&mut next)?,
            Phase::Selecting => self.select(&mut next)?,
            Phase::Responding { agent } => self.respond(&mut next, agent)?,
            Phase::Grading { submission } => self.grade(&mut next, &submission)?,
            _ => unreachable!("pending phases only"),
        };
        let emitted = next.history.len() - before;
        next.step_log.push(StepRecord {
            step_no: next.step_log.len() as u64,
            cursor,
            phase,
            calls: out.calls,
            attempts: out.attempts,
            request_hash: out.request_hash,
            decision: out.decision,
            emitted,
        });
        self.store.save(&next)?;
        let events = next.history[before..].to_vec();
        *session = next;
        Ok(events)
    }

    /// Records a student event and moves the active controller along.
    pub fn submit_user_event(&self, session: &mut Session, event: UserEvent) -> Result<Utterance, TeachError> {
        let mut next = session.clone();
        match (&next.phase, event) {
            (Phase::AwaitingUser, UserEvent::Say { text }) => {
                self.emit(&mut next, Speaker::User, UtteranceKind::Say, text, None);
                next.agent_turns = 0;
                next.phase = Phase::Selecting;
            }
            (Phase::AwaitingSolution, UserEvent::Choose { options }) => {
                let qa = self.active_question(&next).expect("awaiting a solution implies a question");
                grade_answer(qa, &options)?;
                let letters: Vec<String> = options.iter().map(|&i| QAItem::letter(i).to_string()).collect();
                let content = if letters.is_empty() { "(no option selected)".to_string() } else { letters.join(", ") };
                let attachment = Attachment::Choice { options: options.clone() };
                self.emit(&mut next, Speaker::User, UtteranceKind::Say, content, Some(attachment));
                next.phase = Phase::Grading { submission: options };
            }
            (Phase::AwaitingUser | Phase::AwaitingSolution, UserEvent::Continue) => {
                self.emit(&mut next, Speaker::User, UtteranceKind::Control, "continue".into(), None);
                advance(&mut next);
            }
            (phase, _) => return Err(TeachError::NotAwaitingInput(phase.name().to_string())),
        }
        next.user_events += 1;
        self.store.save(&next)?;
        let u = next.history.last().cloned().expect("an utterance was emitted");
        *session = next;
        Ok(u)
    }

    fn emit(&self, s: &mut Session, speaker: Speaker, kind: UtteranceKind, content: String, attachment: Option<Attachment>) {
        let floor = s.history.last().map(|u| u.timestamp).unwrap_or(0);
        s.history.push(Utterance {
            speaker,
            content,
            kind,
            timestamp: self.clock.now_ms().max(floor),
            action: s.cursor,
            attachment,
        });
    }

    fn active_question<'a>(&self, s: &'a Session) -> Option<&'a QAItem> {
        match &s.queue.actions.get(s.cursor)?.value {
            ActionValue::AskQuestion(qa) => Some(qa),
            _ => None,
        }
    }

    fn call(&self, s: &Session, req: ModelRequest) -> Result<(String, StepOutput), TeachError> {
        let req = req.scope(s.session_id.clone());
        let hash = req.hash();
        let mut attempts = 0;
        let text = self.gateway.complete_counted(&req, &mut attempts)?.text;
        Ok((text, StepOutput { calls: 1, attempts: attempts as u32, request_hash: Some(hash), decision: None }))
    }

    fn enter(&self, s: &mut Session) -> Result<StepOutput, TeachError> {
        let action = s.queue.actions[s.cursor].clone();
        match action.value {
            ActionValue::ShowFile(page) => {
                let attachment = Some(Attachment::Page { page_index: page });
                self.emit(s, Speaker::System, UtteranceKind::ShowPage, format!("Slide {}", page + 1), attachment);
                advance(s);
            }
            ActionValue::ReadScript(script) => {
                self.emit(s, Speaker::Teacher, UtteranceKind::Say, script, None);
                s.phase = Phase::AwaitingUser;
            }
            ActionValue::AskQuestion(qa) => {
                let question = qa.question.clone();
                self.emit(s, Speaker::Teacher, UtteranceKind::PostQuestion, question, Some(Attachment::Question { qa }));
                s.phase = Phase::AwaitingSolution;
            }
            ActionValue::Custom { kind, value } => {
                let controller = self.custom.get(&kind).ok_or_else(|| TeachError::UnsupportedAction(kind.clone()))?;
                for (speaker, k, content) in controller.run(&value) {
                    self.emit(s, speaker, k, content, None);
                }
                advance(s);
            }
        }
        Ok(StepOutput::none())
    }

    fn select(&self, s: &mut Session) -> Result<StepOutput, TeachError> {
        if s.agent_turns >= self.config.max_agent_turns {
            s.phase = Phase::AwaitingUser;
            return Ok(StepOutput::none());
        }
        let mut req = ModelRequest::new(Profile::Tutor, self.roster.controller_prompt()).purpose("controller");
        push_for_controller(&mut req, &model_window(&s.history, self.config.history_window));
        let (reply, mut out) = self.call(s, req)?;
        let mut decision = parse_decision(&reply, &self.roster);
        if decision.fallback {
            s.fallback_streak += 1;
            if s.fallback_streak >= self.config.fallback_limit {
                decision.choice = Choice::Terminate;
            }
        } else {
            s.fallback_streak = 0;
        }
        match decision.choice {
            Choice::Teacher => s.phase = Phase::Responding { agent: Speaker::Teacher },
            Choice::TeachingAssistant => s.phase = Phase::Responding { agent: Speaker::TeachingAssistant },
            Choice::User => s.phase = Phase::AwaitingUser,
            Choice::Terminate => {
                self.emit(s, Speaker::System, UtteranceKind::Control, "end of discussion".into(), None);
                advance(s);
            }
        }
        out.decision = Some(decision);
        Ok(out)
    }

    fn agent_request(&self, agent: Speaker, injected: Option<&str>) -> ModelRequest {
        let system = match agent {
            Speaker::TeachingAssistant => prompts::teaching_assistant(&self.config.language),
            _ => prompts::teacher(&self.config.course, &self.config.language, injected),
        };
        ModelRequest::new(Profile::Tutor, system).purpose(agent.as_str())
    }

    fn respond(&self, s: &mut Session, agent: Speaker) -> Result<StepOutput, TeachError> {
        let mut req = self.agent_request(agent, None);
        push_for_agent(&mut req, &model_window(&s.history, self.config.history_window), agent);
        let (reply, out) = self.call(s, req)?;
        let reply = reply.trim();
        if !reply.is_empty() {
            self.emit(s, agent, UtteranceKind::Say, reply.to_string(), None);
        }
        s.agent_turns += 1;
        s.phase = Phase::Selecting;
        Ok(out)
    }

    fn grade(&self, s: &mut Session, submission: &BTreeSet<usize>) -> Result<StepOutput, TeachError> {
        let qa = self.active_question(s).expect("grading implies a question").clone();
        grade_answer(&qa, submission)?;
        let correct: Vec<usize> = qa.answer.iter().copied().collect();
        let chosen: Vec<usize> = submission.iter().copied().collect();
        let injection = prompts::answer_injection(&qa.question, &qa.options, &correct, &chosen);
        let mut req = self.agent_request(Speaker::Teacher, Some(&injection)).purpose("explain");
        push_for_agent(&mut req, &model_window(&s.history, self.config.history_window), Speaker::Teacher);
        let (reply, out) = self.call(s, req)?;
        self.emit(s, Speaker::Teacher, UtteranceKind::Explanation, reply.trim().to_string(), None);
        advance(s);
        Ok(out)
    }
}

fn advance(s: &mut Session) {
    s.cursor += 1;
    s.phase = if s.cursor >= s.queue.actions.len() { Phase::Complete } else { Phase::Entering };
    s.agent_turns = 0;
    s.fallback_streak = 0;
}
