use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Session, TeachEngine, TeachError, UserEvent};

/// A fixed sequence of student events, consumed in order whenever the
/// session waits for input.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptedUser {
    pub events: Vec<UserEvent>,
}

impl ScriptedUser {
    pub fn new(events: Vec<UserEvent>) -> Self {
        ScriptedUser { events }
    }

    pub fn load(path: &Path) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    }
}

/// Runs the session until it completes, feeding `user` events as needed.
/// The user's position is taken from the session, so a resumed session
/// continues with the right event. Stops early, returning `false`, after
/// `max_steps` steps.
pub fn drive(engine: &TeachEngine, session: &mut Session, user: &ScriptedUser, max_steps: Option<usize>) -> Result<bool, TeachError> {
    let mut steps = 0;
    while !session.is_complete() {
        if session.has_pending_step() {
            if max_steps.is_some_and(|m| steps >= m) {
                return Ok(false);
            }
            engine.run_step(session)?;
            steps += 1;
        } else {
            let event = user
                .events
                .get(session.user_events)
                .cloned()
                .ok_or(TeachError::ScriptExhausted { position: session.user_events })?;
            engine.submit_user_event(session, event)?;
        }
    }
    Ok(true)
}
