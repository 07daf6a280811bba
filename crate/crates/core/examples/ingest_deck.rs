//! Extracts page text from a slide archive and renders placeholder page
//! images.
//!
//!     cargo run --example ingest_deck -- fixtures/golden/deck.pptx "Foundations of Machine Learning"

use std::path::PathBuf;

use lectern::ingest::{parse_deck, rasterize_deck, PlaceholderRenderer};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let path = PathBuf::from(args.next().unwrap_or_else(|| "fixtures/golden/deck.pptx".into()));
    let title = args.next().unwrap_or_else(|| "Untitled deck".into());

    let deck = parse_deck(&std::fs::read(&path)?, &title)?;
    let deck = rasterize_deck(deck, &path, &PlaceholderRenderer::default())?;
    println!("deck {} \"{}\": {} pages", deck.deck_id, deck.title, deck.pages.len());
    for page in &deck.pages {
        let img = page.image.as_ref().expect("rasterized");
        println!("  [{}] {:<28} {}x{} png, {} text blocks", page.index, page.text_blocks.first().map(String::as_str).unwrap_or(""), img.width, img.height, page.text_blocks.len());
    }
    Ok(())
}
