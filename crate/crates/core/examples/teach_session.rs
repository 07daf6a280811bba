//! Plays the bundled tutoring scenario: the golden action queue, a scripted
//! student and replayed model replies. Prints the classroom transcript.

use std::path::Path;

use lectern::gateway::{Gateway, ScriptFixture, ScriptedBackend};
use lectern::plan::ActionQueue;
use lectern::teach::{drive, ScriptedUser, TeachConfig, TeachEngine, UtteranceKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/golden");
    let queue: ActionQueue = serde_json::from_str(&std::fs::read_to_string(root.join("queue.json"))?)?;
    let user = ScriptedUser::load(&root.join("user_session.json"))?;
    let fixture = ScriptFixture::load(&root.join("gateway_session.json"))?;
    let gateway = Gateway::scripted(ScriptedBackend::from_fixture(&fixture, "session").expect("scenario"));

    let engine = TeachEngine::new(gateway, TeachConfig::default());
    let mut session = engine.start_session("demo", "golden", "student-1", Some(&queue))?;
    drive(&engine, &mut session, &user, None)?;

    for u in &session.history {
        match u.kind {
            UtteranceKind::ShowPage => println!("\n==== {} ====", u.content),
            UtteranceKind::Control => println!("  ({} {})", u.speaker.display_name(), u.content),
            _ => println!("{}: {}", u.speaker.display_name(), u.content),
        }
    }
    let calls: u32 = session.step_log.iter().map(|s| s.calls).sum();
    println!("\n{} utterances, {} steps, {calls} model calls", session.history.len(), session.step_log.len());
    Ok(())
}
