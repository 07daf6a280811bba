//! Runs the service in-process against the recorded model replies: upload,
//! plan, one session driven by the recorded student, then the call totals.

use std::path::Path;

use lectern::gateway::ScriptFixture;
use lectern::teach::ScriptedUser;
use lectern_server::config::BackendKind;
use lectern_server::{LectureService, ServerConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/golden");
    let data = tempfile::tempdir()?;

    // the service reads one fixture file holding both scenarios
    let mut fixture = ScriptFixture::load(&golden.join("gateway_pipeline.json"))?;
    fixture.scenarios.extend(ScriptFixture::load(&golden.join("gateway_session.json"))?.scenarios);
    let fixture_path = data.path().join("fixture.json");
    std::fs::write(&fixture_path, serde_json::to_string(&fixture)?)?;

    let mut cfg = ServerConfig { data_dir: data.path().join("data"), ..Default::default() };
    cfg.gateway.backend = BackendKind::Scripted;
    cfg.gateway.fixture = Some(fixture_path);
    let svc = LectureService::open(&cfg)?;

    let rec = svc.upload("Foundations of Machine Learning", &std::fs::read(golden.join("deck.pptx"))?)?;
    let rec = svc.plan_blocking(&rec.lecture_id)?;
    println!("lecture {} is {:?} after {} calls", rec.lecture_id, rec.status, rec.planning.calls);

    let user = ScriptedUser::load(&golden.join("user_session.json"))?;
    let id = svc.create_session(&rec.lecture_id, "demo-student")?.session_id;
    let session = loop {
        let s = svc.run_pending(&id)?;
        if s.is_complete() {
            break s;
        }
        svc.post_user_event(&id, user.events[s.user_events].clone())?;
    };

    let history = svc.history(&id)?;
    println!("session {id}: {} utterances, {} steps, {} model calls", session.history.len(), history.steps.len(), history.calls.len());
    for line in session.history.iter().rev().take(3).rev() {
        println!("  {}: {}", line.speaker.display_name(), line.content);
    }
    svc.shutdown();
    Ok(())
}
