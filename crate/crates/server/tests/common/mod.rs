#![allow(dead_code)]

use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use lectern::gateway::{ScriptEntry, ScriptFixture};
use lectern_server::config::BackendKind;
use lectern_server::{http, LectureService, ServerConfig};
use serde_json::{json, Value};

pub const T0: u64 = 1_700_000_000_000;
pub const TITLE: &str = "Foundations of Machine Learning";

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn read_json(name: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(fixture(name)).unwrap()).unwrap()
}

/// Both golden scenarios in one fixture file, with `inject` spliced into
/// the pipeline scenario at the given positions.
pub fn write_fixture(dir: &Path, inject: &[(usize, ScriptEntry)]) -> PathBuf {
    let mut fx = ScriptFixture::load(&fixture("golden/gateway_pipeline.json")).unwrap();
    let session = ScriptFixture::load(&fixture("golden/gateway_session.json")).unwrap();
    fx.scenarios.extend(session.scenarios);
    let pipeline = fx.scenarios.get_mut("pipeline").unwrap();
    let mut sorted: Vec<_> = inject.to_vec();
    sorted.sort_by_key(|(p, _)| std::cmp::Reverse(*p));
    for (pos, entry) in sorted {
        pipeline.insert(pos, entry);
    }
    let path = dir.join("fixture.json");
    std::fs::write(&path, serde_json::to_string(&fx).unwrap()).unwrap();
    path
}

pub fn scripted_config(data: &Path, fixture: PathBuf) -> ServerConfig {
    let mut cfg = ServerConfig { data_dir: data.to_path_buf(), fixed_clock_ms: Some(T0), ..Default::default() };
    cfg.gateway.backend = BackendKind::Scripted;
    cfg.gateway.fixture = Some(fixture);
    cfg
}

pub struct TestServer {
    pub base: String,
    pub svc: Arc<LectureService>,
    pub client: reqwest::blocking::Client,
    token: Option<String>,
    rt: tokio::runtime::Runtime,
}

impl TestServer {
    pub fn start(cfg: &ServerConfig) -> Self {
        let svc = LectureService::open(cfg).unwrap();
        svc.start_workers(2);
        let rt = tokio::runtime::Builder::new_multi_thread().worker_threads(2).enable_all().build().unwrap();
        let listener = rt.block_on(tokio::net::TcpListener::bind("127.0.0.1:0")).unwrap();
        let base = format!("http://{}", listener.local_addr().unwrap());
        let app = http::router(svc.clone(), cfg.token.clone());
        rt.spawn(async move { axum::serve(listener, app).await.unwrap() });
        let client = reqwest::blocking::Client::builder().timeout(Duration::from_secs(30)).build().unwrap();
        TestServer { base, svc, client, token: cfg.token.clone(), rt }
    }

    pub fn stop(self) {
        self.svc.shutdown();
        self.rt.shutdown_timeout(Duration::from_secs(1));
    }

    fn auth(&self, rb: reqwest::blocking::RequestBuilder) -> reqwest::blocking::RequestBuilder {
        match &self.token {
            Some(t) => rb.bearer_auth(t),
            None => rb,
        }
    }

    pub fn get(&self, path: &str) -> (u16, Value) {
        let r = self.auth(self.client.get(format!("{}{path}", self.base))).send().unwrap();
        (r.status().as_u16(), r.json().unwrap_or(Value::Null))
    }

    pub fn send(&self, method: reqwest::Method, path: &str, body: &Value) -> (u16, Value) {
        let r = self.auth(self.client.request(method, format!("{}{path}", self.base))).json(body).send().unwrap();
        (r.status().as_u16(), r.json().unwrap_or(Value::Null))
    }

    pub fn post(&self, path: &str, body: &Value) -> (u16, Value) {
        self.send(reqwest::Method::POST, path, body)
    }

    pub fn upload(&self, bytes: &[u8]) -> (u16, Value) {
        self.post("/lectures", &json!({ "title": TITLE, "archive": STANDARD.encode(bytes) }))
    }

    pub fn upload_golden(&self) -> String {
        let (status, rec) = self.upload(&std::fs::read(fixture("golden/deck.pptx")).unwrap());
        assert_eq!(status, 201, "{rec}");
        rec["lecture_id"].as_str().unwrap().to_string()
    }

    /// Polls the lecture until `pred` holds.
    pub fn wait_lecture(&self, id: &str, pred: impl Fn(&Value) -> bool) -> Value {
        let deadline = Instant::now() + Duration::from_secs(30);
        loop {
            let (_, rec) = self.get(&format!("/lectures/{id}"));
            if pred(&rec) {
                return rec;
            }
            assert!(Instant::now() < deadline, "lecture never reached the expected state: {rec}");
            std::thread::sleep(Duration::from_millis(20));
        }
    }

    pub fn plan_golden(&self) -> String {
        let id = self.upload_golden();
        let (status, _) = self.post(&format!("/lectures/{id}/plan"), &json!({}));
        assert_eq!(status, 202);
        let rec = self.wait_lecture(&id, |r| r["planning"]["state"] != "running");
        assert_eq!(rec["status"], "planned", "{rec}");
        id
    }

    /// Polls the session until it waits for input or completes.
    pub fn wait_idle(&self, sid: &str) -> Value {
        let deadline = Instant::now() + Duration::from_secs(30);
        loop {
            let (_, s) = self.get(&format!("/sessions/{sid}"));
            if s["awaiting_input"] == true || s["complete"] == true {
                return s;
            }
            assert!(s.get("last_error").is_none(), "{s}");
            assert!(Instant::now() < deadline, "session never went idle: {s}");
            std::thread::sleep(Duration::from_millis(10));
        }
    }

    /// Feeds the golden student script through the API.
    pub fn drive_golden(&self, sid: &str) {
        let events = read_json("golden/user_session.json")["events"].as_array().unwrap().clone();
        let mut next = 0;
        loop {
            let s = self.wait_idle(sid);
            if s["complete"] == true {
                break;
            }
            let (status, body) = self.post(&format!("/sessions/{sid}/events"), &events[next]);
            assert_eq!(status, 202, "{body}");
            next += 1;
        }
        assert_eq!(next, events.len());
    }

    /// Reads an SSE stream to its end. Returns (id, event, data) triples.
    pub fn read_stream(&self, path: &str, last_event_id: Option<u64>) -> Vec<(u64, String, Value)> {
        let mut rb = self.auth(self.client.get(format!("{}{path}", self.base))).timeout(Duration::from_secs(60));
        if let Some(id) = last_event_id {
            rb = rb.header("Last-Event-ID", id.to_string());
        }
        let resp = rb.send().unwrap();
        assert_eq!(resp.status().as_u16(), 200);
        let mut out = Vec::new();
        let (mut id, mut event, mut data) = (None, String::new(), String::new());
        for line in BufReader::new(resp).lines() {
            let line = line.unwrap();
            if line.is_empty() {
                if let Some(i) = id.take() {
                    out.push((i, std::mem::take(&mut event), serde_json::from_str(&data).unwrap()));
                }
                data.clear();
            } else if let Some(v) = line.strip_prefix("id:") {
                id = Some(v.trim().parse().unwrap());
            } else if let Some(v) = line.strip_prefix("event:") {
                event = v.trim().to_string();
            } else if let Some(v) = line.strip_prefix("data:") {
                data.push_str(v.strip_prefix(' ').unwrap_or(v));
            }
        }
        out
    }
}
