//! The lecture service: everything the HTTP layer and the CLI do, as plain
//! blocking calls over the shared stores.

use std::collections::{HashMap, HashSet};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Duration;

use lectern::agenda::Agenda;
use lectern::gateway::{CallLog, CallRecord, Gateway, HttpBackend, HttpBackendConfig, RetryPolicy, ScriptFixture, ScriptedBackend};
use lectern::ingest::{parse_deck, rasterize_deck, CommandRenderer, IngestError, PageRenderer, PlaceholderRenderer, SlideDeck};
use lectern::pipeline::{LectureConfig, PipelineError, PipelineState, Stage};
use lectern::plan::{revise_queue, ActionQueue, PlanError, QueueEdit};
use lectern::teach::{
    Clock, EventEnvelope, FixedClock, MemoryStepQueue, Session, SessionStore, StepLease, StepQueue, StepRecord, StepTicket,
    SystemClock, TeachEngine, TeachError, UserEvent,
};
use serde::{Deserialize, Serialize};
use tokio::sync::broadcast;

use crate::config::{BackendKind, GatewayConfig, ServerConfig};
use crate::docstore::{Collection, Documents, FileDocStore, StoreError};
use crate::records::{LectureRecord, LectureStatus, PlanningProgress, PlanningState};

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("{0} not found")]
    NotFound(String),
    #[error("{0}")]
    Conflict(String),
    #[error("queue is at revision {current}, edit was made against {given}")]
    StaleRevision { current: u64, given: u64 },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Teach(#[from] TeachError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("{0}")]
    Internal(String),
}

impl From<std::io::Error> for ServiceError {
    fn from(e: std::io::Error) -> Self {
        ServiceError::Internal(e.to_string())
    }
}

/// Builds gateways. The planner gateway is rebuilt for every planning run
/// so a replayed fixture can be fast-forwarded to `resume_at`.
pub trait GatewayFactory: Send + Sync {
    fn planner(&self, resume_at: usize) -> Result<Gateway, ServiceError>;
    fn tutor(&self, resume_at: usize) -> Result<Gateway, ServiceError>;
}

pub struct HttpGateways {
    cfg: GatewayConfig,
    log: Arc<CallLog>,
}

impl HttpGateways {
    fn build(&self, model: &str) -> Result<Gateway, ServiceError> {
        let backend = HttpBackend::new(HttpBackendConfig {
            endpoint: self.cfg.endpoint.clone(),
            api_key: self.cfg.api_key.clone(),
            model: model.to_string(),
            timeout_secs: self.cfg.timeout_secs,
        })
        .map_err(|e| ServiceError::Internal(format!("http client: {e}")))?;
        let policy = RetryPolicy { max_attempts: self.cfg.max_attempts, ..RetryPolicy::default() };
        Ok(Gateway::new(Arc::new(backend))
            .with_retry(policy)
            .with_log(self.log.clone())
            .with_inflight_limit(self.cfg.inflight_limit))
    }
}

impl GatewayFactory for HttpGateways {
    fn planner(&self, _resume_at: usize) -> Result<Gateway, ServiceError> {
        self.build(&self.cfg.planner_model)
    }

    fn tutor(&self, _resume_at: usize) -> Result<Gateway, ServiceError> {
        self.build(&self.cfg.tutor_model)
    }
}

/// Replays a fixture file. Offline demos and tests.
pub struct ScriptedGateways {
    fixture: ScriptFixture,
    planner_scenario: String,
    tutor_scenario: String,
    log: Arc<CallLog>,
}

impl ScriptedGateways {
    fn build(&self, scenario: &str, resume_at: usize) -> Result<Gateway, ServiceError> {
        // a missing scenario behaves as an empty one: the first call fails
        let backend = ScriptedBackend::from_fixture(&self.fixture, scenario).unwrap_or_else(|| {
            tracing::warn!(scenario, "fixture has no such scenario");
            ScriptedBackend::new(scenario, Vec::new())
        });
        Ok(Gateway::scripted(backend.starting_at(resume_at)).with_log(self.log.clone()))
    }
}

impl GatewayFactory for ScriptedGateways {
    fn planner(&self, resume_at: usize) -> Result<Gateway, ServiceError> {
        self.build(&self.planner_scenario, resume_at)
    }

    fn tutor(&self, resume_at: usize) -> Result<Gateway, ServiceError> {
        self.build(&self.tutor_scenario, resume_at)
    }
}

pub fn gateway_factory(cfg: &GatewayConfig, log: Arc<CallLog>) -> Result<Box<dyn GatewayFactory>, ServiceError> {
    Ok(match cfg.backend {
        BackendKind::Http => Box::new(HttpGateways { cfg: cfg.clone(), log }),
        BackendKind::Scripted => {
            let path = cfg.fixture.as_ref().ok_or_else(|| ServiceError::Invalid("scripted gateway needs a fixture".into()))?;
            Box::new(ScriptedGateways {
                fixture: ScriptFixture::load(path).map_err(|e| ServiceError::Invalid(format!("{}: {e}", path.display())))?,
                planner_scenario: cfg.planner_scenario.clone(),
                tutor_scenario: cfg.tutor_scenario.clone(),
                log,
            })
        }
    })
}

enum Renderer {
    Placeholder(PlaceholderRenderer),
    Command(CommandRenderer),
}

impl Renderer {
    fn get(&self) -> &dyn PageRenderer {
        match self {
            Renderer::Placeholder(r) => r,
            Renderer::Command(r) => r,
        }
    }
}

/// Sessions kept in the document store, so they are schema-checked too.
struct DocSessionStore(Arc<Documents>);

fn teach_store_err(e: StoreError) -> TeachError {
    TeachError::Store(e.to_string())
}

impl SessionStore for DocSessionStore {
    fn save(&self, session: &Session) -> Result<(), TeachError> {
        self.0.save(Collection::Sessions, &session.session_id, session).map_err(teach_store_err)
    }

    fn load(&self, session_id: &str) -> Result<Session, TeachError> {
        match self.0.load(Collection::Sessions, session_id) {
            Ok(Some(s)) => Ok(s),
            Ok(None) | Err(StoreError::BadId(_)) => Err(TeachError::UnknownSession(session_id.to_string())),
            Err(e) => Err(teach_store_err(e)),
        }
    }

    fn list(&self) -> Result<Vec<String>, TeachError> {
        self.0.list(Collection::Sessions).map_err(teach_store_err)
    }
}

/// What stream subscribers receive.
#[derive(Debug, Clone)]
pub enum StreamItem {
    Event(EventEnvelope),
    /// The session finished; no more events will follow.
    End,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub session_id: String,
    pub lecture_id: String,
    pub user_id: String,
    pub phase: String,
    pub cursor: usize,
    pub action_count: usize,
    pub awaiting_input: bool,
    pub complete: bool,
    pub events: usize,
    pub steps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub last_error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SessionHistory {
    pub session: SessionSummary,
    pub events: Vec<EventEnvelope>,
    pub steps: Vec<StepRecord>,
    /// Gateway attempts made on behalf of this session, from the call log.
    pub calls: Vec<CallRecord>,
}

pub struct LectureService {
    data_dir: PathBuf,
    docs: Arc<Documents>,
    gateways: Box<dyn GatewayFactory>,
    renderer: Renderer,
    lecture_cfg: LectureConfig,
    clock: Arc<dyn Clock>,
    engine: TeachEngine,
    steps: MemoryStepQueue,
    planning: Mutex<HashSet<String>>,
    records: Mutex<()>,
    session_locks: Mutex<HashMap<String, Arc<Mutex<()>>>>,
    streams: Mutex<HashMap<String, broadcast::Sender<StreamItem>>>,
    errors: Mutex<HashMap<String, String>>,
    shutdown: AtomicBool,
    threads: Mutex<Vec<JoinHandle<()>>>,
}

const CALL_LOG: &str = "calls.ndjson";

impl LectureService {
    /// Opens (or creates) the data directory. Planning runs that were in
    /// flight when the process died are marked failed and can be
    /// re-triggered; sessions with a pending step are queued again.
    pub fn open(cfg: &ServerConfig) -> Result<Arc<Self>, ServiceError> {
        std::fs::create_dir_all(&cfg.data_dir)?;
        let docs = Arc::new(Documents::new(Box::new(FileDocStore::new(cfg.data_dir.join("docs"))?)));
        let log = Arc::new(CallLog::with_file(&cfg.data_dir.join(CALL_LOG))?);
        let gateways = gateway_factory(&cfg.gateway, log)?;
        let clock: Arc<dyn Clock> = match cfg.fixed_clock_ms {
            Some(ms) => Arc::new(FixedClock(ms)),
            None => Arc::new(SystemClock),
        };
        let store: Arc<dyn SessionStore> = Arc::new(DocSessionStore(docs.clone()));

        let mut sessions = Vec::new();
        for id in store.list()? {
            sessions.push(store.load(&id)?);
        }
        let tutor_calls = sessions.iter().map(Session::backend_attempts).sum();
        let engine = TeachEngine::new(gateways.tutor(tutor_calls)?, cfg.teach.clone()).with_store(store).with_clock(clock.clone());

        let renderer = match &cfg.renderer.command {
            Some(cmd) => {
                let mut r = CommandRenderer::new(cmd.clone());
                if let Some(t) = cfg.renderer.timeout_secs {
                    r.timeout_secs = t;
                }
                Renderer::Command(r)
            }
            None => Renderer::Placeholder(PlaceholderRenderer::default()),
        };

        let svc = LectureService {
            data_dir: cfg.data_dir.clone(),
            docs,
            gateways,
            renderer,
            lecture_cfg: cfg.lecture.clone(),
            clock,
            engine,
            steps: MemoryStepQueue::default(),
            planning: Mutex::new(HashSet::new()),
            records: Mutex::new(()),
            session_locks: Mutex::new(HashMap::new()),
            streams: Mutex::new(HashMap::new()),
            errors: Mutex::new(HashMap::new()),
            shutdown: AtomicBool::new(false),
            threads: Mutex::new(Vec::new()),
        };

        for id in svc.docs.list(Collection::Lectures)? {
            let mut rec = svc.lecture(&id)?;
            if rec.planning.state == PlanningState::Running {
                rec.planning.state = PlanningState::Failed;
                rec.planning.error = Some("interrupted by a restart".into());
                svc.docs.save(Collection::Lectures, &id, &rec)?;
            }
        }
        for s in &sessions {
            if s.has_pending_step() {
                svc.enqueue(s);
            }
        }
        Ok(Arc::new(svc))
    }

    pub fn data_dir(&self) -> &Path {
        &self.data_dir
    }

    pub fn engine(&self) -> &TeachEngine {
        &self.engine
    }

    /// Starts `n` threads executing session steps.
    pub fn start_workers(self: &Arc<Self>, n: usize) {
        let mut threads = self.threads.lock().unwrap();
        for _ in 0..n {
            let svc = self.clone();
            threads.push(std::thread::spawn(move || {
                while !svc.shutdown.load(Ordering::SeqCst) {
                    if let Some(lease) = svc.steps.lease(Duration::from_millis(100)) {
                        svc.run_ticket(lease);
                    }
                }
            }));
        }
    }

    /// Stops the workers and waits for them. Planning threads are left to
    /// finish on their own.
    pub fn shutdown(&self) {
        self.shutdown.store(true, Ordering::SeqCst);
        for t in self.threads.lock().unwrap().drain(..) {
            let _ = t.join();
        }
    }

    // ---- lectures

    fn blob_dir(&self, lecture_id: &str) -> PathBuf {
        self.data_dir.join("blobs").join(lecture_id)
    }

    pub fn lecture(&self, id: &str) -> Result<LectureRecord, ServiceError> {
        match self.docs.load(Collection::Lectures, id) {
            Ok(Some(r)) => Ok(r),
            Ok(None) | Err(StoreError::BadId(_)) => Err(ServiceError::NotFound(format!("lecture {id}"))),
            Err(e) => Err(e.into()),
        }
    }

    pub fn lectures(&self) -> Result<Vec<LectureRecord>, ServiceError> {
        self.docs.list(Collection::Lectures)?.iter().map(|id| self.lecture(id)).collect()
    }

    fn update_lecture(&self, id: &str, f: impl FnOnce(&mut LectureRecord)) -> Result<LectureRecord, ServiceError> {
        let _guard = self.records.lock().unwrap();
        let mut rec = self.lecture(id)?;
        f(&mut rec);
        self.docs.save(Collection::Lectures, id, &rec)?;
        Ok(rec)
    }

    /// Stores the archive, extracts and renders its pages.
    pub fn upload(&self, title: &str, archive: &[u8]) -> Result<LectureRecord, ServiceError> {
        let deck = parse_deck(archive, title)?;
        let lecture_id = uuid::Uuid::new_v4().simple().to_string();
        let dir = self.blob_dir(&lecture_id);
        std::fs::create_dir_all(&dir)?;
        let path = dir.join("deck.pptx");
        std::fs::write(&path, archive)?;
        let deck = match rasterize_deck(deck, &path, self.renderer.get()) {
            Ok(d) => d,
            Err(e) => {
                let _ = std::fs::remove_dir_all(&dir);
                return Err(e.into());
            }
        };
        deck.write_manifest(&dir.join("deck"))?;
        let rec = LectureRecord {
            lecture_id: lecture_id.clone(),
            title: deck.title.clone(),
            status: LectureStatus::Ingested,
            deck_id: deck.deck_id.clone(),
            page_count: deck.pages.len(),
            created_ms: self.clock.now_ms(),
            planning: PlanningProgress::default(),
            queue_revision: None,
        };
        self.docs.save(Collection::Lectures, &lecture_id, &rec)?;
        tracing::info!(%lecture_id, pages = rec.page_count, "lecture ingested");
        Ok(rec)
    }

    pub fn deck(&self, lecture_id: &str) -> Result<SlideDeck, ServiceError> {
        self.lecture(lecture_id)?;
        Ok(SlideDeck::read_manifest(&self.blob_dir(lecture_id).join("deck"))?)
    }

    /// Starts planning on a background thread. Returns the record with the
    /// planning state set to running; a planned lecture is returned as is.
    pub fn generate_plan(self: &Arc<Self>, id: &str) -> Result<LectureRecord, ServiceError> {
        let rec = self.begin_planning(id)?;
        if rec.planning.state != PlanningState::Running {
            return Ok(rec);
        }
        let svc = self.clone();
        let id = id.to_string();
        std::thread::spawn(move || {
            if let Err(err) = svc.run_planning(&id) {
                tracing::warn!(lecture_id = %id, %err, "planning failed");
            }
        });
        Ok(rec)
    }

    /// Plans on the calling thread.
    pub fn plan_blocking(&self, id: &str) -> Result<LectureRecord, ServiceError> {
        let rec = self.begin_planning(id)?;
        if rec.planning.state != PlanningState::Running {
            return Ok(rec);
        }
        self.run_planning(id)
    }

    fn begin_planning(&self, id: &str) -> Result<LectureRecord, ServiceError> {
        let rec = self.lecture(id)?;
        if rec.status >= LectureStatus::Planned {
            return Ok(rec);
        }
        if !self.planning.lock().unwrap().insert(id.to_string()) {
            return Err(ServiceError::Conflict(format!("lecture {id} is already being planned")));
        }
        self.update_lecture(id, |r| {
            r.planning.state = PlanningState::Running;
            r.planning.error = None;
        })
        .inspect_err(|_| {
            self.planning.lock().unwrap().remove(id);
        })
    }

    fn run_planning(&self, id: &str) -> Result<LectureRecord, ServiceError> {
        let result = self.plan_inner(id);
        let out = match result {
            Ok(()) => self.update_lecture(id, |r| {
                r.planning.state = PlanningState::Done;
                r.planning.stage = Some("done".into());
            }),
            Err(err) => {
                let msg = err.to_string();
                let _ = self.update_lecture(id, |r| {
                    r.planning.state = PlanningState::Failed;
                    r.planning.error = Some(msg);
                });
                Err(err)
            }
        };
        self.planning.lock().unwrap().remove(id);
        out
    }

    fn plan_inner(&self, id: &str) -> Result<(), ServiceError> {
        let deck = self.deck(id)?;
        let mut state: PipelineState = match self.docs.load(Collection::Pipelines, id)? {
            Some(s) => s,
            None => PipelineState::new(id, &deck),
        };
        let gateway = self.gateways.planner(state.calls())?;
        while state.stage() != Stage::Done {
            let step = state.advance(&deck, &gateway, &self.lecture_cfg);
            // failed attempts still count, so the state is saved either way
            self.docs.save(Collection::Pipelines, id, &state)?;
            let stage = step?;
            let reached = match stage {
                Stage::Describing => LectureStatus::Ingested,
                Stage::Segmenting => LectureStatus::Described,
                Stage::Planning => LectureStatus::Segmented,
                Stage::Done => LectureStatus::Segmented,
            };
            let calls = state.calls();
            self.update_lecture(id, |r| {
                r.advance(reached);
                r.planning.stage = Some(stage_name(stage).into());
                r.planning.calls = calls;
            })?;
        }
        let plan = state.result.clone().expect("done implies a result");
        self.docs.save(Collection::Agendas, id, &plan.agenda)?;
        self.docs.save(Collection::Queues, id, &plan.queue)?;
        self.update_lecture(id, |r| {
            r.advance(LectureStatus::Planned);
            r.queue_revision = Some(plan.queue.revision);
        })?;
        tracing::info!(lecture_id = %id, actions = plan.queue.actions.len(), calls = state.calls(), "lecture planned");
        Ok(())
    }

    fn planned(&self, id: &str) -> Result<LectureRecord, ServiceError> {
        let rec = self.lecture(id)?;
        if rec.status < LectureStatus::Planned {
            return Err(ServiceError::Conflict(format!("lecture {id} has not been planned")));
        }
        Ok(rec)
    }

    pub fn agenda(&self, id: &str) -> Result<Agenda, ServiceError> {
        self.planned(id)?;
        self.docs.load(Collection::Agendas, id)?.ok_or_else(|| ServiceError::NotFound(format!("agenda of {id}")))
    }

    pub fn actions(&self, id: &str) -> Result<ActionQueue, ServiceError> {
        self.planned(id)?;
        self.docs.load(Collection::Queues, id)?.ok_or_else(|| ServiceError::NotFound(format!("queue of {id}")))
    }

    /// Applies teacher edits made against `revision`. The agenda keeps the
    /// generated actions; the queue is what sessions use.
    pub fn update_actions(&self, id: &str, revision: u64, edits: &[QueueEdit]) -> Result<ActionQueue, ServiceError> {
        let _guard = self.records.lock().unwrap();
        let mut rec = self.planned(id)?;
        let queue: ActionQueue =
            self.docs.load(Collection::Queues, id)?.ok_or_else(|| ServiceError::NotFound(format!("queue of {id}")))?;
        if queue.revision != revision {
            return Err(ServiceError::StaleRevision { current: queue.revision, given: revision });
        }
        let revised = revise_queue(&queue, edits)?;
        self.docs.save(Collection::Queues, id, &revised)?;
        rec.queue_revision = Some(revised.revision);
        self.docs.save(Collection::Lectures, id, &rec)?;
        Ok(revised)
    }

    pub fn publish(&self, id: &str) -> Result<LectureRecord, ServiceError> {
        self.planned(id)?;
        self.update_lecture(id, |r| r.advance(LectureStatus::Published))
    }

    // ---- sessions

    fn lock_for(&self, session_id: &str) -> Arc<Mutex<()>> {
        self.session_locks.lock().unwrap().entry(session_id.to_string()).or_default().clone()
    }

    fn sender(&self, session_id: &str) -> broadcast::Sender<StreamItem> {
        self.streams.lock().unwrap().entry(session_id.to_string()).or_insert_with(|| broadcast::channel(256).0).clone()
    }

    pub fn subscribe(&self, session_id: &str) -> broadcast::Receiver<StreamItem> {
        self.sender(session_id).subscribe()
    }

    fn publish_events(&self, session: &Session, from: usize) {
        let tx = self.sender(&session.session_id);
        for env in session.envelopes_from(from as u64) {
            let _ = tx.send(StreamItem::Event(env));
        }
        if session.is_complete() {
            let _ = tx.send(StreamItem::End);
        }
    }

    fn enqueue(&self, session: &Session) {
        self.steps.enqueue(StepTicket { session_id: session.session_id.clone(), step_no: session.step_log.len() as u64 });
    }

    pub fn session(&self, id: &str) -> Result<Session, ServiceError> {
        Ok(self.engine.resume_session(id)?)
    }

    pub fn summary(&self, id: &str) -> Result<SessionSummary, ServiceError> {
        let s = self.session(id)?;
        Ok(SessionSummary {
            session_id: s.session_id.clone(),
            lecture_id: s.lecture_id.clone(),
            user_id: s.user_id.clone(),
            phase: s.phase.name().to_string(),
            cursor: s.cursor,
            action_count: s.queue.actions.len(),
            awaiting_input: !s.is_complete() && !s.has_pending_step(),
            complete: s.is_complete(),
            events: s.history.len(),
            steps: s.step_log.len(),
            last_error: self.errors.lock().unwrap().get(id).cloned(),
        })
    }

    pub fn create_session(&self, lecture_id: &str, user_id: &str) -> Result<SessionSummary, ServiceError> {
        self.planned(lecture_id)?;
        let queue = self.actions(lecture_id)?;
        let id = uuid::Uuid::new_v4().simple().to_string();
        let session = self.engine.start_session(id.clone(), lecture_id, user_id, Some(&queue))?;
        if session.has_pending_step() {
            self.enqueue(&session);
        }
        self.summary(&id)
    }

    /// Records a student event and schedules the steps it unblocks.
    /// Returns the envelopes it added.
    pub fn post_user_event(&self, session_id: &str, event: UserEvent) -> Result<Vec<EventEnvelope>, ServiceError> {
        let lock = self.lock_for(session_id);
        let _guard = lock.lock().unwrap();
        let mut s = self.session(session_id)?;
        let before = s.history.len();
        self.engine.submit_user_event(&mut s, event)?;
        self.publish_events(&s, before);
        if s.has_pending_step() {
            self.enqueue(&s);
        }
        Ok(s.envelopes_from(before as u64))
    }

    fn run_ticket(&self, lease: StepLease) {
        let id = lease.ticket.session_id.clone();
        if let Err(err) = self.step_once(&id, Some(lease.ticket.step_no)) {
            tracing::warn!(session_id = %id, %err, "session step failed");
            self.errors.lock().unwrap().insert(id, err.to_string());
        }
        self.steps.ack(lease);
    }

    /// Runs the session's next step if it is still `expected` (any step
    /// when `None`). Returns whether a step ran.
    fn step_once(&self, session_id: &str, expected: Option<u64>) -> Result<bool, ServiceError> {
        let lock = self.lock_for(session_id);
        let _guard = lock.lock().unwrap();
        let mut s = self.session(session_id)?;
        if !s.has_pending_step() || expected.is_some_and(|n| n != s.step_log.len() as u64) {
            return Ok(false);
        }
        let before = s.history.len();
        self.engine.run_step(&mut s)?;
        self.errors.lock().unwrap().remove(session_id);
        self.publish_events(&s, before);
        if s.has_pending_step() {
            self.enqueue(&s);
        }
        Ok(true)
    }

    /// Runs pending steps on the calling thread until the session waits
    /// for input or completes. For use without workers.
    pub fn run_pending(&self, session_id: &str) -> Result<Session, ServiceError> {
        while self.step_once(session_id, None)? {}
        self.session(session_id)
    }

    pub fn history(&self, session_id: &str) -> Result<SessionHistory, ServiceError> {
        let s = self.session(session_id)?;
        Ok(SessionHistory {
            session: self.summary(session_id)?,
            events: s.transcript(),
            steps: s.step_log,
            calls: self.logged_calls(session_id)?,
        })
    }

    /// Call records for `scope` from the on-disk log, which outlives
    /// restarts.
    pub fn logged_calls(&self, scope: &str) -> Result<Vec<CallRecord>, ServiceError> {
        let text = match std::fs::read_to_string(self.data_dir.join(CALL_LOG)) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(e.into()),
        };
        let mut out = Vec::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            // a torn last line from a crash is skipped
            if let Ok(rec) = serde_json::from_str::<CallRecord>(line) {
                if rec.scope.as_deref() == Some(scope) {
                    out.push(rec);
                }
            }
        }
        Ok(out)
    }
}

fn stage_name(stage: Stage) -> &'static str {
    match stage {
        Stage::Describing => "describing",
        Stage::Segmenting => "segmenting",
        Stage::Planning => "planning",
        Stage::Done => "done",
    }
}
