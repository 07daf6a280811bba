//! Runs the whole pre-class pipeline on the bundled deck with replayed
//! model replies, printing progress and the resulting action queue.

use std::path::Path;

use lectern::gateway::{Gateway, ScriptFixture, ScriptedBackend};
use lectern::ingest::{parse_deck, rasterize_deck, PlaceholderRenderer};
use lectern::pipeline::{run_pipeline, LectureConfig, PipelineState};
use lectern::plan::ActionValue;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/golden");
    let archive = root.join("deck.pptx");
    let deck = parse_deck(&std::fs::read(&archive)?, "Foundations of Machine Learning")?;
    let deck = rasterize_deck(deck, &archive, &PlaceholderRenderer::default())?;

    let fixture = ScriptFixture::load(&root.join("gateway_pipeline.json"))?;
    let gateway = Gateway::scripted(ScriptedBackend::from_fixture(&fixture, "pipeline").expect("scenario"));

    let mut state = PipelineState::new("demo", &deck);
    let mut last = None;
    let plan = run_pipeline(&mut state, &deck, &gateway, &LectureConfig::default(), |s| {
        if last != Some(s.stage()) {
            eprintln!("{:?} after call {}", s.stage(), s.calls());
            last = Some(s.stage());
        }
    })?;

    for (i, a) in plan.queue.actions.iter().enumerate() {
        let what = match &a.value {
            ActionValue::ShowFile(p) => format!("show slide {}", p + 1),
            ActionValue::ReadScript(s) => format!("read {} chars", s.len()),
            ActionValue::AskQuestion(q) => format!("ask \"{}\"", q.question),
            ActionValue::Custom { kind, .. } => format!("custom {kind}"),
        };
        println!("{i:>2} {:<12} {what}", a.kind().to_string());
    }
    Ok(())
}
