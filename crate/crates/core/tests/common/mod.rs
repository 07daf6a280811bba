#![allow(dead_code)]

use std::path::PathBuf;

use lectern::gateway::{Gateway, ScriptFixture, ScriptedBackend};
use lectern::ingest::{parse_deck, rasterize_deck, PlaceholderRenderer, SlideDeck};

pub const LECTURE: &str = "golden";

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn read(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// Set LECTERN_BLESS=1 to rewrite golden files instead of comparing.
pub fn check_golden(name: &str, actual: &str) {
    if std::env::var_os("LECTERN_BLESS").is_some() {
        std::fs::write(fixture(name), actual).unwrap();
        return;
    }
    let expected = read(name);
    assert!(expected == actual, "{name} differs from the golden file");
}

pub fn golden_deck() -> SlideDeck {
    let path = fixture("golden/deck.pptx");
    let bytes = std::fs::read(&path).unwrap();
    let deck = parse_deck(&bytes, "Foundations of Machine Learning").unwrap();
    rasterize_deck(deck, &path, &PlaceholderRenderer::default()).unwrap()
}

pub fn scripted(file: &str, scenario: &str) -> ScriptedBackend {
    let fx = ScriptFixture::load(&fixture(file)).unwrap();
    ScriptedBackend::from_fixture(&fx, scenario).unwrap()
}

pub fn pipeline_gateway(start: usize) -> Gateway {
    Gateway::scripted(scripted("golden/gateway_pipeline.json", "pipeline").starting_at(start))
}

pub mod session {
    use std::sync::Arc;

    use lectern::gateway::Gateway;
    use lectern::plan::ActionQueue;
    use lectern::teach::{drive, FixedClock, ScriptedUser, Session, SessionStore, TeachConfig, TeachEngine};

    pub const SESSION: &str = "golden-session";
    pub const T0: u64 = 1_700_000_000_000;

    pub fn queue() -> ActionQueue {
        serde_json::from_str(&super::read("golden/queue.json")).unwrap()
    }

    pub fn user() -> ScriptedUser {
        ScriptedUser::load(&super::fixture("golden/user_session.json")).unwrap()
    }

    pub fn engine(start: usize, store: Option<Arc<dyn SessionStore>>) -> TeachEngine {
        let gw = Gateway::scripted(super::scripted("golden/gateway_session.json", "session").starting_at(start));
        let e = TeachEngine::new(gw, TeachConfig::default()).with_clock(Arc::new(FixedClock(T0)));
        match store {
            Some(s) => e.with_store(s),
            None => e,
        }
    }

    /// The uninterrupted golden run.
    pub fn run() -> (TeachEngine, Session) {
        let e = engine(0, None);
        let mut s = e.start_session(SESSION, super::LECTURE, "student-1", Some(&queue())).unwrap();
        assert!(drive(&e, &mut s, &user(), None).unwrap());
        (e, s)
    }

    pub fn transcript_json(s: &Session) -> String {
        serde_json::to_string_pretty(&s.transcript()).unwrap() + "\n"
    }
}

pub mod trees;
