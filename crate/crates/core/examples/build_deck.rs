//! Writes a slide archive from a JSON deck description.
//!
//!     cargo run --example build_deck -- fixtures/golden/deck.json /tmp/deck.pptx

use lectern::ingest::synth::DeckSource;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let (Some(src), Some(out)) = (args.next(), args.next()) else {
        eprintln!("usage: build_deck <deck.json> <out.pptx>");
        std::process::exit(2);
    };
    let source: DeckSource = serde_json::from_str(&std::fs::read_to_string(src)?)?;
    let bytes = source.to_pptx();
    std::fs::write(&out, &bytes)?;
    println!("{} slides, {} bytes -> {out}", source.slides.len(), bytes.len());
    Ok(())
}
