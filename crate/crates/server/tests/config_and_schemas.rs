mod common;

use common::*;
use lectern::teach::UserEvent;
use lectern_server::config::BackendKind;
use lectern_server::docstore::{Collection, DocStore, Documents, MemoryDocStore, StoreError};
use lectern_server::records::{LectureRecord, LectureStatus, PlanningProgress};
use lectern_server::schema::Schema;
use lectern_server::ServerConfig;
use serde_json::{json, Value};

#[test]
fn toml_then_environment() {
    let mut cfg = ServerConfig::from_toml(
        r#"
        bind = "0.0.0.0:9000"
        [lecture]
        context_pages = 4
        [teach]
        history_window = 8
        [gateway]
        backend = "scripted"
        fixture = "f.json"
        "#,
    )
    .unwrap();
    assert_eq!(cfg.bind, "0.0.0.0:9000");
    assert_eq!(cfg.lecture.context_pages, 4);
    assert_eq!(cfg.lecture.segment_retries, 2, "unset keys keep defaults");
    assert_eq!(cfg.teach.history_window, 8);
    assert_eq!(cfg.teach.max_agent_turns, 3);
    assert_eq!(cfg.gateway.backend, BackendKind::Scripted);

    cfg.apply_env([
        ("LECTERN_K", "3"),
        ("LECTERN_H", "12"),
        ("LECTERN_R", "1"),
        ("LECTERN_QUESTIONS_KEPT", "2"),
        ("LECTERN_GATEWAY_ENDPOINT", "http://model:8000/v1/chat/completions"),
        ("LECTERN_TUTOR_MODEL", "tutor-large"),
        ("LECTERN_TOKEN", "t"),
        ("PATH", "/bin"),
    ])
    .unwrap();
    assert_eq!(cfg.lecture.context_pages, 3);
    assert_eq!(cfg.teach.history_window, 12);
    assert_eq!(cfg.lecture.segment_retries, 1);
    assert_eq!(cfg.lecture.questions_kept, 2);
    assert_eq!(cfg.gateway.endpoint, "http://model:8000/v1/chat/completions");
    assert_eq!(cfg.gateway.tutor_model, "tutor-large");
    assert_eq!(cfg.token.as_deref(), Some("t"));

    assert!(cfg.apply_env([("LECTERN_K", "three")]).is_err());
    assert!(ServerConfig::from_toml("bind = 5").is_err());
}

#[test]
fn defaults_match_the_reference_settings() {
    let cfg = ServerConfig::default();
    assert_eq!(cfg.lecture.context_pages, 3);
    assert_eq!(cfg.lecture.segment_retries, 2);
    assert_eq!(cfg.lecture.questions_kept, 1);
    assert_eq!(cfg.teach.history_window, 12);
    assert_eq!(cfg.token, None);
}

#[test]
fn every_stored_document_matches_its_schema() {
    let dir = tempfile::tempdir().unwrap();
    let fx = write_fixture(dir.path(), &[]);
    let srv = TestServer::start(&scripted_config(&dir.path().join("data"), fx));
    let id = srv.plan_golden();
    let (_, s) = srv.post("/sessions", &json!({ "lecture_id": id }));
    srv.drive_golden(s["session_id"].as_str().unwrap());
    srv.stop();

    let docs = dir.path().join("data/docs");
    let mut checked = 0;
    for (collection, schema) in [
        ("lectures", Schema::Lecture),
        ("pipelines", Schema::Pipeline),
        ("agendas", Schema::Agenda),
        ("queues", Schema::Queue),
        ("sessions", Schema::Session),
    ] {
        for entry in std::fs::read_dir(docs.join(collection)).unwrap() {
            let doc: Value = serde_json::from_str(&std::fs::read_to_string(entry.unwrap().path()).unwrap()).unwrap();
            schema.validate(&doc).unwrap();
            checked += 1;
        }
    }
    assert_eq!(checked, 5);

    // envelopes and the golden fixtures too
    for env in read_json("golden/transcript.json").as_array().unwrap() {
        Schema::Event.validate(env).unwrap();
    }
    Schema::Agenda.validate(&read_json("golden/agenda.json")).unwrap();
    Schema::Queue.validate(&read_json("golden/queue.json")).unwrap();
    for ev in read_json("golden/user_session.json")["events"].as_array().unwrap() {
        Schema::UserEvent.validate(ev).unwrap();
        let _: UserEvent = serde_json::from_value(ev.clone()).unwrap();
    }
}

#[test]
fn documents_refuse_invalid_writes_and_reads() {
    let store = std::sync::Arc::new(MemoryDocStore::default());
    struct Shared(std::sync::Arc<MemoryDocStore>);
    impl DocStore for Shared {
        fn put(&self, c: &str, id: &str, doc: &Value) -> Result<(), StoreError> {
            self.0.put(c, id, doc)
        }
        fn get(&self, c: &str, id: &str) -> Result<Option<Value>, StoreError> {
            self.0.get(c, id)
        }
        fn list(&self, c: &str) -> Result<Vec<String>, StoreError> {
            self.0.list(c)
        }
    }
    let docs = Documents::new(Box::new(Shared(store.clone())));
    let rec = LectureRecord {
        lecture_id: "l1".into(),
        title: "T".into(),
        status: LectureStatus::Planned,
        deck_id: "d".into(),
        page_count: 3,
        created_ms: 1,
        planning: PlanningProgress::default(),
        queue_revision: Some(1),
    };
    docs.save(Collection::Lectures, "l1", &rec).unwrap();
    assert_eq!(docs.load::<LectureRecord>(Collection::Lectures, "l1").unwrap(), Some(rec));
    assert_eq!(docs.list(Collection::Lectures).unwrap(), ["l1"]);

    assert!(matches!(docs.save(Collection::Lectures, "l2", &json!({ "title": "no id" })), Err(StoreError::Schema(_))));
    assert!(matches!(docs.save(Collection::Lectures, "../x", &json!({})), Err(StoreError::Schema(_) | StoreError::BadId(_))));

    // a document corrupted behind the store's back is caught on read
    store.put("lectures", "l3", &json!({ "lecture_id": "l3", "status": "teleported" })).unwrap();
    assert!(matches!(docs.load::<LectureRecord>(Collection::Lectures, "l3"), Err(StoreError::Schema(_))));
    assert_eq!(docs.load::<LectureRecord>(Collection::Lectures, "absent").unwrap(), None);
}

#[test]
fn schema_files_are_valid_and_reject_junk() {
    for schema in Schema::ALL {
        assert!(schema.validate(&json!(42)).is_err(), "{schema:?} accepts a number");
    }
    assert!(Schema::QueueEdits.validate(&json!({ "revision": 1, "edits": [{ "op": "remove", "position": 0 }] })).is_ok());
    assert!(Schema::QueueEdits.validate(&json!({ "revision": -1, "edits": [] })).is_err());
}
