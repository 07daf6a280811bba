use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::Path;
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::{BackendError, ModelCompletion, ModelRequest, Profile, Usage};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CallOutcome {
    Ok { usage: Usage },
    Failed { error: String },
}

/// One attempt against the backend. The NDJSON sink writes the compact
/// fields; `request` and `completion` are kept in memory only.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CallRecord {
    pub seq: u64,
    pub timestamp_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scope: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub purpose: Option<String>,
    pub profile: Profile,
    pub request_hash: String,
    pub attempt: u32,
    #[serde(flatten)]
    pub outcome: CallOutcome,
    #[serde(skip)]
    pub request: Option<ModelRequest>,
    #[serde(skip)]
    pub completion: Option<ModelCompletion>,
}

/// Append-only, totally ordered record of gateway attempts.
#[derive(Debug)]
pub struct CallLog {
    records: Mutex<Vec<CallRecord>>,
    sink: Mutex<Option<File>>,
}

impl CallLog {
    pub fn in_memory() -> Self {
        CallLog { records: Mutex::new(Vec::new()), sink: Mutex::new(None) }
    }

    /// Also appends each record as one JSON line to `path`.
    pub fn with_file(path: &Path) -> std::io::Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(CallLog { records: Mutex::new(Vec::new()), sink: Mutex::new(Some(file)) })
    }

    pub(super) fn append(
        &self,
        request: &ModelRequest,
        hash: &str,
        attempt: u32,
        result: &Result<ModelCompletion, BackendError>,
    ) {
        let timestamp_ms = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0);
        let mut records = self.records.lock().unwrap();
        let record = CallRecord {
            seq: records.len() as u64,
            timestamp_ms,
            scope: request.meta.scope.clone(),
            purpose: request.meta.purpose.clone(),
            profile: request.profile,
            request_hash: hash.to_string(),
            attempt,
            outcome: match result {
                Ok(c) => CallOutcome::Ok { usage: c.usage },
                Err(e) => CallOutcome::Failed { error: e.to_string() },
            },
            request: Some(request.clone()),
            completion: result.as_ref().ok().cloned(),
        };
        if let Some(file) = self.sink.lock().unwrap().as_mut() {
            let line = serde_json::to_string(&record).expect("call record serializes");
            if let Err(err) = writeln!(file, "{line}") {
                tracing::error!(%err, "failed to append to call log");
            }
        }
        records.push(record);
    }

    pub fn len(&self) -> usize {
        self.records.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn records(&self) -> Vec<CallRecord> {
        self.records.lock().unwrap().clone()
    }

    pub fn records_for_scope(&self, scope: &str) -> Vec<CallRecord> {
        self.records.lock().unwrap().iter().filter(|r| r.scope.as_deref() == Some(scope)).cloned().collect()
    }
}
