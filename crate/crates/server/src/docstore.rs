//! Document persistence. A store holds JSON documents by collection and id;
//! [`Documents`] adds typed access with schema checks on every write and
//! read.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::path::PathBuf;
use std::sync::Mutex;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use crate::schema::Schema;

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("store i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("stored document is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Schema(String),
    #[error("bad document id {0:?}")]
    BadId(String),
}

pub trait DocStore: Send + Sync {
    fn put(&self, collection: &str, id: &str, doc: &Value) -> Result<(), StoreError>;
    fn get(&self, collection: &str, id: &str) -> Result<Option<Value>, StoreError>;
    fn list(&self, collection: &str) -> Result<Vec<String>, StoreError>;
}

fn check_id(id: &str) -> Result<(), StoreError> {
    if id.is_empty() || !id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
        return Err(StoreError::BadId(id.to_string()));
    }
    Ok(())
}

/// `<root>/<collection>/<id>.json`, each write replacing the file atomically.
pub struct FileDocStore {
    root: PathBuf,
}

impl FileDocStore {
    pub fn new(root: impl Into<PathBuf>) -> std::io::Result<Self> {
        let root = root.into();
        std::fs::create_dir_all(&root)?;
        Ok(FileDocStore { root })
    }
}

impl DocStore for FileDocStore {
    fn put(&self, collection: &str, id: &str, doc: &Value) -> Result<(), StoreError> {
        check_id(id)?;
        let dir = self.root.join(collection);
        std::fs::create_dir_all(&dir)?;
        let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
        serde_json::to_writer(&mut tmp, doc)?;
        tmp.flush()?;
        tmp.persist(dir.join(format!("{id}.json"))).map_err(|e| e.error)?;
        Ok(())
    }

    fn get(&self, collection: &str, id: &str) -> Result<Option<Value>, StoreError> {
        check_id(id)?;
        match std::fs::read(self.root.join(collection).join(format!("{id}.json"))) {
            Ok(bytes) => Ok(Some(serde_json::from_slice(&bytes)?)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    fn list(&self, collection: &str) -> Result<Vec<String>, StoreError> {
        let dir = self.root.join(collection);
        if !dir.exists() {
            return Ok(Vec::new());
        }
        let mut ids = Vec::new();
        for entry in std::fs::read_dir(dir)? {
            let name = entry?.file_name().to_string_lossy().into_owned();
            if let Some(id) = name.strip_suffix(".json") {
                ids.push(id.to_string());
            }
        }
        ids.sort();
        Ok(ids)
    }
}

#[derive(Default)]
pub struct MemoryDocStore {
    docs: Mutex<HashMap<String, BTreeMap<String, String>>>,
}

impl DocStore for MemoryDocStore {
    fn put(&self, collection: &str, id: &str, doc: &Value) -> Result<(), StoreError> {
        check_id(id)?;
        let text = serde_json::to_string(doc)?;
        self.docs.lock().unwrap().entry(collection.to_string()).or_default().insert(id.to_string(), text);
        Ok(())
    }

    fn get(&self, collection: &str, id: &str) -> Result<Option<Value>, StoreError> {
        let docs = self.docs.lock().unwrap();
        match docs.get(collection).and_then(|c| c.get(id)) {
            Some(text) => Ok(Some(serde_json::from_str(text)?)),
            None => Ok(None),
        }
    }

    fn list(&self, collection: &str) -> Result<Vec<String>, StoreError> {
        Ok(self.docs.lock().unwrap().get(collection).map(|c| c.keys().cloned().collect()).unwrap_or_default())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Collection {
    Lectures,
    Pipelines,
    Agendas,
    Queues,
    Sessions,
}

impl Collection {
    pub fn name(self) -> &'static str {
        match self {
            Collection::Lectures => "lectures",
            Collection::Pipelines => "pipelines",
            Collection::Agendas => "agendas",
            Collection::Queues => "queues",
            Collection::Sessions => "sessions",
        }
    }

    pub fn schema(self) -> Schema {
        match self {
            Collection::Lectures => Schema::Lecture,
            Collection::Pipelines => Schema::Pipeline,
            Collection::Agendas => Schema::Agenda,
            Collection::Queues => Schema::Queue,
            Collection::Sessions => Schema::Session,
        }
    }
}

/// Typed, schema-checked access to a [`DocStore`].
pub struct Documents {
    store: Box<dyn DocStore>,
}

impl Documents {
    pub fn new(store: Box<dyn DocStore>) -> Self {
        Documents { store }
    }

    pub fn save<T: Serialize>(&self, c: Collection, id: &str, doc: &T) -> Result<(), StoreError> {
        let value = serde_json::to_value(doc)?;
        c.schema().validate(&value).map_err(StoreError::Schema)?;
        self.store.put(c.name(), id, &value)
    }

    pub fn load<T: DeserializeOwned>(&self, c: Collection, id: &str) -> Result<Option<T>, StoreError> {
        match self.store.get(c.name(), id)? {
            Some(value) => {
                c.schema().validate(&value).map_err(StoreError::Schema)?;
                Ok(Some(serde_json::from_value(value)?))
            }
            None => Ok(None),
        }
    }

    pub fn list(&self, c: Collection) -> Result<Vec<String>, StoreError> {
        self.store.list(c.name())
    }
}
