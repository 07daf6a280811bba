mod common;

use common::*;
use lectern::gateway::{ScriptEntry, SimulatedFailure};
use lectern_server::config::BackendKind;
use lectern_server::ServerConfig;
use serde_json::{json, Value};

/// A model failure at fixture position `cut` kills the planning run; a
/// fresh service on the same data directory resumes it.
fn plan_with_failure_at(cut: usize) -> (Value, Value, Value) {
    let dir = tempfile::tempdir().unwrap();
    let fx = write_fixture(dir.path(), &[(cut, ScriptEntry::failing(SimulatedFailure::Rejected))]);
    let cfg = scripted_config(&dir.path().join("data"), fx);

    let srv = TestServer::start(&cfg);
    let id = srv.upload_golden();
    srv.post(&format!("/lectures/{id}/plan"), &json!({}));
    let failed = srv.wait_lecture(&id, |r| r["planning"]["state"] != "running");
    assert_eq!(failed["planning"]["state"], "failed", "cut {cut}: {failed}");
    srv.stop();

    let srv = TestServer::start(&cfg);
    let (status, _) = srv.post(&format!("/lectures/{id}/plan"), &json!({}));
    assert_eq!(status, 202);
    let done = srv.wait_lecture(&id, |r| r["planning"]["state"] != "running");
    assert_eq!(done["status"], "planned", "cut {cut}: {done}");
    // the failed attempt is counted, so the run used one extra call
    assert_eq!(done["planning"]["calls"], 41);
    let agenda = srv.get(&format!("/lectures/{id}/agenda")).1;
    let queue = srv.get(&format!("/lectures/{id}/actions")).1;
    srv.stop();
    (failed, agenda, queue)
}

#[test]
fn interrupted_planning_resumes_to_the_golden_queue() {
    let golden_agenda = read_json("golden/agenda.json");
    let golden_queue = read_json("golden/queue.json");
    // during describing, segmenting, script writing and question writing
    let cuts = [(5, "ingested"), (18, "described"), (30, "segmented"), (38, "segmented")];
    for (cut, status) in cuts {
        let (failed, agenda, queue) = plan_with_failure_at(cut);
        assert_eq!(failed["status"], status, "cut {cut}");
        assert_eq!(agenda, golden_agenda, "cut {cut}");
        assert_eq!(queue["actions"], golden_queue["actions"], "cut {cut}");
    }
}

#[test]
fn a_planning_run_killed_by_restart_is_marked_failed() {
    let dir = tempfile::tempdir().unwrap();
    let fx = write_fixture(dir.path(), &[]);
    let cfg = scripted_config(&dir.path().join("data"), fx);
    let srv = TestServer::start(&cfg);
    let id = srv.upload_golden();
    srv.stop();
    // simulate a crash mid-run: the record still says running
    let path = cfg.data_dir.join(format!("docs/lectures/{id}.json"));
    let mut rec: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    rec["planning"]["state"] = json!("running");
    std::fs::write(&path, rec.to_string()).unwrap();

    let srv = TestServer::start(&cfg);
    let (_, rec) = srv.get(&format!("/lectures/{id}"));
    assert_eq!(rec["planning"]["state"], "failed");
    srv.stop();
}

#[test]
fn concurrent_plan_requests_conflict() {
    // a model endpoint that accepts connections and never answers
    let hole = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = hole.local_addr().unwrap();
    std::thread::spawn(move || {
        let mut held = Vec::new();
        for conn in hole.incoming() {
            held.push(conn);
        }
    });

    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ServerConfig { data_dir: dir.path().join("data"), ..Default::default() };
    cfg.gateway.backend = BackendKind::Http;
    cfg.gateway.endpoint = format!("http://{addr}/v1/chat/completions");
    cfg.gateway.timeout_secs = 2;
    cfg.gateway.max_attempts = 1;
    let srv = TestServer::start(&cfg);
    let id = srv.upload_golden();

    let (first, rec) = srv.post(&format!("/lectures/{id}/plan"), &json!({}));
    assert_eq!(first, 202);
    assert_eq!(rec["planning"]["state"], "running");
    let (second, err) = srv.post(&format!("/lectures/{id}/plan"), &json!({}));
    assert_eq!(second, 409, "{err}");
    assert_eq!(err["error"], "conflict");

    let rec = srv.wait_lecture(&id, |r| r["planning"]["state"] != "running");
    assert_eq!(rec["planning"]["state"], "failed");
    assert_eq!(rec["status"], "ingested");
    srv.stop();
}

#[test]
fn sessions_survive_a_service_restart() {
    let golden: Vec<Value> = serde_json::from_value(read_json("golden/transcript.json")).unwrap();
    let events = read_json("golden/user_session.json")["events"].as_array().unwrap().clone();
    for stop_after in [0, 5, 11, 17] {
        let dir = tempfile::tempdir().unwrap();
        let fx = write_fixture(dir.path(), &[]);
        let cfg = scripted_config(&dir.path().join("data"), fx);

        let srv = TestServer::start(&cfg);
        let id = srv.plan_golden();
        let (_, s) = srv.post("/sessions", &json!({ "lecture_id": id, "user_id": "student-1" }));
        let sid = s["session_id"].as_str().unwrap().to_string();
        for event in &events[..stop_after] {
            srv.wait_idle(&sid);
            srv.post(&format!("/sessions/{sid}/events"), event);
        }
        // stop without waiting, so a step may be pending
        srv.stop();

        let srv = TestServer::start(&cfg);
        for event in &events[stop_after..] {
            srv.wait_idle(&sid);
            let (status, body) = srv.post(&format!("/sessions/{sid}/events"), event);
            assert_eq!(status, 202, "{body}");
        }
        assert_eq!(srv.wait_idle(&sid)["complete"], true);
        let all = srv.read_stream(&format!("/sessions/{sid}/stream?from=0"), None);
        let got: Vec<Value> = all.iter().map(|(_, _, d)| d["utterance"].clone()).collect();
        let want: Vec<Value> = golden.iter().map(|e| e["utterance"].clone()).collect();
        assert_eq!(got, want, "restart after {stop_after} events");
        srv.stop();
    }
}
