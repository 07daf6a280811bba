//! A session survives its process. The first engine stops after a few
//! steps; a second one, with a fresh backend, loads the saved session and
//! finishes it.

use std::path::Path;
use std::sync::Arc;

use lectern::gateway::{Gateway, ScriptFixture, ScriptedBackend};
use lectern::plan::ActionQueue;
use lectern::teach::{drive, FileSessionStore, FixedClock, ScriptedUser, TeachConfig, TeachEngine};

fn engine(fixture: &ScriptFixture, store: &Path, resume_at: usize) -> TeachEngine {
    let backend = ScriptedBackend::from_fixture(fixture, "session").expect("scenario").starting_at(resume_at);
    TeachEngine::new(Gateway::scripted(backend), TeachConfig::default())
        .with_store(Arc::new(FileSessionStore::new(store).unwrap()))
        .with_clock(Arc::new(FixedClock(1_700_000_000_000)))
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/golden");
    let queue: ActionQueue = serde_json::from_str(&std::fs::read_to_string(root.join("queue.json"))?)?;
    let user = ScriptedUser::load(&root.join("user_session.json"))?;
    let fixture = ScriptFixture::load(&root.join("gateway_session.json"))?;
    let dir = tempfile::tempdir()?;

    let first = engine(&fixture, dir.path(), 0);
    let mut s = first.start_session("demo", "golden", "student-1", Some(&queue))?;
    drive(&first, &mut s, &user, Some(20))?;
    println!("stopped after {} steps at action {} ({})", s.step_log.len(), s.cursor, s.phase.name());
    let consumed = s.backend_attempts();
    drop(first);

    let second = engine(&fixture, dir.path(), consumed);
    let mut s = second.resume_session("demo")?;
    drive(&second, &mut s, &user, None)?;
    println!("finished: {} steps, {} utterances", s.step_log.len(), s.history.len());
    Ok(())
}
