//! Registers a controller for a new action kind. Here a "poll" action asks
//! the class a show-of-hands question and moves on without a model call.

use std::sync::Arc;

use lectern::gateway::{Gateway, ScriptedBackend};
use lectern::plan::{ActionQueue, ActionValue, TeachingAction};
use lectern::teach::{drive, CustomController, ScriptedUser, Speaker, TeachConfig, TeachEngine, UserEvent, UtteranceKind};
use serde_json::{json, Value};

struct Poll;

impl CustomController for Poll {
    fn run(&self, value: &Value) -> Vec<(Speaker, UtteranceKind, String)> {
        let prompt = value["prompt"].as_str().unwrap_or("Any questions?");
        vec![(Speaker::TeachingAssistant, UtteranceKind::Say, format!("Quick poll: {prompt} Raise a hand in the chat."))]
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let poll = TeachingAction {
        value: ActionValue::Custom { kind: "poll".into(), value: json!({ "prompt": "Who has used Python before?" }) },
        origin_leaf: "p0".into(),
    };
    let queue = ActionQueue {
        lecture_id: "demo".into(),
        revision: 1,
        page_count: 1,
        actions: vec![TeachingAction::show_file(0, "p0"), poll, TeachingAction::read_script("Let us begin.", "p0")],
    };
    // no model replies are needed for this queue
    let gateway = Gateway::scripted(ScriptedBackend::new("none", Vec::new()));
    let engine = TeachEngine::new(gateway, TeachConfig::default()).register("poll", Arc::new(Poll));
    let mut session = engine.start_session("poll-demo", "demo", "student", Some(&queue))?;
    drive(&engine, &mut session, &ScriptedUser::new(vec![UserEvent::Continue]), None)?;
    for u in &session.history {
        println!("{:<20} {}", u.speaker.display_name(), u.content);
    }
    Ok(())
}
