//! JSON schemas for everything the service persists or accepts. The schema
//! files live in `schemas/` and are compiled in.

use std::collections::HashMap;
use std::sync::OnceLock;

use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Schema {
    Lecture,
    Agenda,
    Queue,
    Session,
    Pipeline,
    Event,
    UserEvent,
    QueueEdits,
}

impl Schema {
    pub const ALL: [Schema; 8] = [
        Schema::Lecture,
        Schema::Agenda,
        Schema::Queue,
        Schema::Session,
        Schema::Pipeline,
        Schema::Event,
        Schema::UserEvent,
        Schema::QueueEdits,
    ];

    pub fn source(self) -> &'static str {
        match self {
            Schema::Lecture => include_str!("../schemas/lecture.schema.json"),
            Schema::Agenda => include_str!("../schemas/agenda.schema.json"),
            Schema::Queue => include_str!("../schemas/queue.schema.json"),
            Schema::Session => include_str!("../schemas/session.schema.json"),
            Schema::Pipeline => include_str!("../schemas/pipeline.schema.json"),
            Schema::Event => include_str!("../schemas/event.schema.json"),
            Schema::UserEvent => include_str!("../schemas/user_event.schema.json"),
            Schema::QueueEdits => include_str!("../schemas/queue_edits.schema.json"),
        }
    }

    /// Checks `doc`; the error lists every violation found.
    pub fn validate(self, doc: &Value) -> Result<(), String> {
        let validator = &validators()[&self];
        let errors: Vec<String> = validator.iter_errors(doc).map(|e| format!("{} at {}", e, e.instance_path)).collect();
        match errors.is_empty() {
            true => Ok(()),
            false => Err(format!("{self:?} document: {}", errors.join("; "))),
        }
    }
}

fn validators() -> &'static HashMap<Schema, jsonschema::Validator> {
    static CELL: OnceLock<HashMap<Schema, jsonschema::Validator>> = OnceLock::new();
    CELL.get_or_init(|| {
        Schema::ALL
            .iter()
            .map(|&s| {
                let json: Value = serde_json::from_str(s.source()).expect("schema file is JSON");
                (s, jsonschema::validator_for(&json).unwrap_or_else(|e| panic!("{s:?} schema: {e}")))
            })
            .collect()
    })
}
