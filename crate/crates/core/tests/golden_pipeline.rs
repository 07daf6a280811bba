mod common;

use common::*;
use lectern::agenda::{parse_outline, render_outline, Agenda, AgendaNode, NodeKind};
use lectern::ingest::synth::DeckSource;
use lectern::pipeline::{run_pipeline, LectureConfig, PipelineState};
use lectern::plan::{validate_queue, ActionKind, ActionQueue, ActionValue, Plan};

fn run() -> (Plan, PipelineState) {
    let deck = golden_deck();
    let gw = pipeline_gateway(0);
    let mut state = PipelineState::new(LECTURE, &deck);
    let plan = run_pipeline(&mut state, &deck, &gw, &LectureConfig::default(), |_| {}).unwrap();
    (plan, state)
}

fn pretty<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).unwrap() + "\n"
}

#[test]
fn bundled_archive_matches_its_source() {
    let source: DeckSource = serde_json::from_str(&read("golden/deck.json")).unwrap();
    assert_eq!(std::fs::read(fixture("golden/deck.pptx")).unwrap(), source.to_pptx());
    let deck = golden_deck();
    assert_eq!(deck.pages.len(), 12);
    for (page, slide) in deck.pages.iter().zip(&source.slides) {
        assert_eq!(page.text_blocks[0], slide.title);
        assert_eq!(page.text_blocks[1..], slide.bullets[..]);
    }
}

#[test]
fn golden_agenda_and_queue() {
    let (plan, state) = run();
    check_golden("golden/agenda.json", &pretty(&plan.agenda));
    check_golden("golden/queue.json", &pretty(&plan.queue));
    assert_eq!(state.calls(), 40);
    let fallbacks: Vec<_> = state.agenda.segments.iter().filter(|s| s.fallback).collect();
    assert!(fallbacks.is_empty());
    assert_eq!(state.agenda.segments.iter().map(|s| s.attempts).sum::<u32>(), 13);
}

#[test]
fn pipeline_is_deterministic() {
    let (a, _) = run();
    let (b, _) = run();
    assert_eq!(pretty(&a), pretty(&b));
}

fn count_leaves(n: &AgendaNode) -> usize {
    match n.kind {
        NodeKind::Leaf => 1,
        NodeKind::Section => n.children.iter().map(count_leaves).sum(),
    }
}

fn sections<'a>(n: &'a AgendaNode, out: &mut Vec<&'a AgendaNode>) {
    for c in &n.children {
        if c.kind == NodeKind::Section {
            sections(c, out);
            out.push(c);
        }
    }
}

/// Recount from the agenda alone: one SF and one RS per leaf, and one
/// question per section holding at least k pages.
#[test]
fn queue_counts_match_the_agenda() {
    let agenda: Agenda = serde_json::from_str(&read("golden/agenda.json")).unwrap();
    let queue: ActionQueue = serde_json::from_str(&read("golden/queue.json")).unwrap();
    validate_queue(&queue).unwrap();
    let count = |k: ActionKind| queue.actions.iter().filter(|a| a.kind() == k).count();
    let mut secs = Vec::new();
    sections(&agenda.root, &mut secs);
    let eligible = secs.iter().filter(|s| count_leaves(s) >= 3).count();
    assert_eq!(count(ActionKind::ShowFile), 12);
    assert_eq!(count(ActionKind::ReadScript), 12);
    assert_eq!(count(ActionKind::AskQuestion), eligible);
    assert_eq!(eligible, 3);
}

#[test]
fn golden_agenda_shape() {
    let agenda: Agenda = serde_json::from_str(&read("golden/agenda.json")).unwrap();
    let text = render_outline(&agenda);
    let labels: Vec<&str> = text.lines().filter(|l| !l.starts_with("---")).collect();
    assert_eq!(
        labels,
        [
            "- Foundations of Machine Learning",
            "-- Course overview",
            "-- Supervised learning",
            "-- Unsupervised learning",
            "-- Wrap-up"
        ]
    );
    let pages: Vec<usize> = agenda.leaves().iter().map(|l| l.page_index.unwrap()).collect();
    assert_eq!(pages, (0..12).collect::<Vec<_>>());
    assert_eq!(render_outline(&parse_outline(&text).unwrap()), text);
}

#[test]
fn scripts_are_stored_verbatim() {
    let queue: ActionQueue = serde_json::from_str(&read("golden/queue.json")).unwrap();
    let fx: serde_json::Value = serde_json::from_str(&read("golden/gateway_pipeline.json")).unwrap();
    let replies: Vec<&str> = fx["scenarios"]["pipeline"].as_array().unwrap()[25..37]
        .iter()
        .map(|e| e["reply"].as_str().unwrap())
        .collect();
    let scripts: Vec<&str> = queue
        .actions
        .iter()
        .filter_map(|a| match &a.value {
            ActionValue::ReadScript(s) => Some(s.as_str()),
            _ => None,
        })
        .collect();
    assert_eq!(scripts, replies);
}

/// Stop after every unit of work, reload the saved state, and finish with a
/// fresh backend fast-forwarded past the calls already made.
#[test]
fn resume_after_every_unit() {
    let deck = golden_deck();
    let cfg = LectureConfig::default();
    let expected = pretty(&run().0);
    let mut cut = 0;
    loop {
        let gw = pipeline_gateway(0);
        let mut state = PipelineState::new(LECTURE, &deck);
        for _ in 0..cut {
            state.advance(&deck, &gw, &cfg).unwrap();
        }
        let saved = serde_json::to_string(&state).unwrap();
        let done = state.result.is_some();

        let mut state: PipelineState = serde_json::from_str(&saved).unwrap();
        let gw = pipeline_gateway(state.calls());
        let plan = run_pipeline(&mut state, &deck, &gw, &cfg, |_| {}).unwrap();
        assert_eq!(pretty(&plan), expected, "cut after unit {cut}");
        if done {
            break;
        }
        cut += 1;
    }
    assert!(cut >= 39);
}
