mod common;

use std::process::Command;

use common::*;
use serde_json::Value;

fn lectern(data: &std::path::Path, args: &[&str]) -> Value {
    let out = Command::new(env!("CARGO_BIN_EXE_lectern"))
        .arg("--data")
        .arg(data)
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap();
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn ingest_plan_simulate() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let deck = fixture("golden/deck.pptx");
    let rec = lectern(&data, &["ingest", deck.to_str().unwrap(), "--title", TITLE]);
    assert_eq!(rec["status"], "ingested");
    let id = rec["lecture_id"].as_str().unwrap();

    let pipeline = fixture("golden/gateway_pipeline.json");
    let rec = lectern(&data, &["--gateway", pipeline.to_str().unwrap(), "plan", id]);
    assert_eq!(rec["status"], "planned");
    assert_eq!(rec["planning"]["calls"], 40);

    let session = fixture("golden/gateway_session.json");
    let script = fixture("golden/user_session.json");
    let clock = T0.to_string();
    let transcript = lectern(
        &data,
        &["--gateway", session.to_str().unwrap(), "simulate", id, "--script", script.to_str().unwrap(), "--clock", &clock],
    );
    let got: Vec<Value> = transcript.as_array().unwrap().iter().map(|e| e["utterance"].clone()).collect();
    let want: Vec<Value> = read_json("golden/transcript.json").as_array().unwrap().iter().map(|e| e["utterance"].clone()).collect();
    assert_eq!(got, want);
}

#[test]
fn simulate_reports_a_short_script() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let deck = fixture("golden/deck.pptx");
    let id = lectern(&data, &["ingest", deck.to_str().unwrap(), "--title", TITLE])["lecture_id"].as_str().unwrap().to_string();
    let pipeline = fixture("golden/gateway_pipeline.json");
    lectern(&data, &["--gateway", pipeline.to_str().unwrap(), "plan", &id]);

    let short = dir.path().join("short.json");
    std::fs::write(&short, r#"{"events":[{"type":"continue"}]}"#).unwrap();
    let session = fixture("golden/gateway_session.json");
    let out = Command::new(env!("CARGO_BIN_EXE_lectern"))
        .args(["--data", data.to_str().unwrap(), "--gateway", session.to_str().unwrap()])
        .args(["simulate", &id, "--script", short.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("script ran out"));
}
