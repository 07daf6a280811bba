use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use super::{Session, TeachError};

/// Durable session state. Implementations must make `save` atomic: a
/// reader sees either the old or the new session, never a mix.
pub trait SessionStore: Send + Sync {
    fn save(&self, session: &Session) -> Result<(), TeachError>;
    fn load(&self, session_id: &str) -> Result<Session, TeachError>;
    fn list(&self) -> Result<Vec<String>, TeachError>;
}

/// Keeps serialized sessions in memory, so loads go through the same JSON
/// round-trip as the file store.
#[derive(Default)]
pub struct MemorySessionStore {
    sessions: Mutex<HashMap<String, String>>,
}

fn store_err(e: impl std::fmt::Display) -> TeachError {
    TeachError::Store(e.to_string())
}

impl SessionStore for MemorySessionStore {
    fn save(&self, session: &Session) -> Result<(), TeachError> {
        let json = serde_json::to_string(session).map_err(store_err)?;
        self.sessions.lock().unwrap().insert(session.session_id.clone(), json);
        Ok(())
    }

    fn load(&self, session_id: &str) -> Result<Session, TeachError> {
        let map = self.sessions.lock().unwrap();
        let json = map.get(session_id).ok_or_else(|| TeachError::UnknownSession(session_id.to_string()))?;
        serde_json::from_str(json).map_err(store_err)
    }

    fn list(&self) -> Result<Vec<String>, TeachError> {
        let mut ids: Vec<String> = self.sessions.lock().unwrap().keys().cloned().collect();
        ids.sort();
        Ok(ids)
    }
}

/// One `<session_id>.json` per session, replaced atomically on save.
pub struct FileSessionStore {
    dir: PathBuf,
}

impl FileSessionStore {
    pub fn new(dir: impl Into<PathBuf>) -> std::io::Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(FileSessionStore { dir })
    }

    fn path(&self, id: &str) -> Result<PathBuf, TeachError> {
        if id.is_empty() || !id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
            return Err(TeachError::UnknownSession(id.to_string()));
        }
        Ok(self.dir.join(format!("{id}.json")))
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }
}

impl SessionStore for FileSessionStore {
    fn save(&self, session: &Session) -> Result<(), TeachError> {
        let path = self.path(&session.session_id)?;
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir).map_err(store_err)?;
        serde_json::to_writer(&mut tmp, session).map_err(store_err)?;
        tmp.flush().map_err(store_err)?;
        tmp.persist(&path).map_err(store_err)?;
        Ok(())
    }

    fn load(&self, session_id: &str) -> Result<Session, TeachError> {
        let path = self.path(session_id)?;
        let text = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(TeachError::UnknownSession(session_id.to_string()))
            }
            Err(e) => return Err(store_err(e)),
        };
        serde_json::from_str(&text).map_err(store_err)
    }

    fn list(&self) -> Result<Vec<String>, TeachError> {
        let mut ids = Vec::new();
        for entry in std::fs::read_dir(&self.dir).map_err(store_err)? {
            let name = entry.map_err(store_err)?.file_name().to_string_lossy().into_owned();
            if let Some(id) = name.strip_suffix(".json") {
                ids.push(id.to_string());
            }
        }
        ids.sort();
        Ok(ids)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plan::ActionQueue;
    use crate::teach::Phase;

    fn session(id: &str) -> Session {
        Session {
            session_id: id.into(),
            lecture_id: "l".into(),
            user_id: "u".into(),
            queue: ActionQueue { lecture_id: "l".into(), revision: 1, page_count: 0, actions: vec![] },
            cursor: 0,
            phase: Phase::Complete,
            history: vec![],
            step_log: vec![],
            user_events: 0,
            agent_turns: 0,
            fallback_streak: 0,
        }
    }

    #[test]
    fn file_store_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let store = FileSessionStore::new(dir.path()).unwrap();
        store.save(&session("a")).unwrap();
        store.save(&session("b")).unwrap();
        assert_eq!(store.load("a").unwrap(), session("a"));
        assert_eq!(store.list().unwrap(), ["a", "b"]);
        assert!(matches!(store.load("c"), Err(TeachError::UnknownSession(_))));
        assert!(matches!(store.load("../etc/passwd"), Err(TeachError::UnknownSession(_))));
    }
}
