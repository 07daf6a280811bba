mod common;

use std::io::Read;

use common::*;
use lectern::ingest::synth::{PptxBuilder, SlideSpec};
use lectern::ingest::{parse_deck, IngestError};

/// Slide texts read straight out of the archive: every `<a:t>` run of
/// `ppt/slides/slideN.xml`, paragraph by paragraph.
fn raw_slide_texts(bytes: &[u8]) -> Vec<Vec<String>> {
    let mut zip = zip::ZipArchive::new(std::io::Cursor::new(bytes)).unwrap();
    let slide = regex::Regex::new(r"^ppt/slides/slide(\d+)\.xml$").unwrap();
    let mut parts: Vec<(usize, String)> = zip
        .file_names()
        .filter_map(|n| slide.captures(n).map(|c| (c[1].parse().unwrap(), n.to_string())))
        .collect();
    parts.sort();
    let para = regex::Regex::new(r"(?s)<a:p>(.*?)</a:p>").unwrap();
    let run = regex::Regex::new(r"<a:t>([^<]*)</a:t>").unwrap();
    parts
        .into_iter()
        .map(|(_, name)| {
            let mut xml = String::new();
            zip.by_name(&name).unwrap().read_to_string(&mut xml).unwrap();
            para.captures_iter(&xml)
                .map(|p| run.captures_iter(&p[1]).map(|r| r[1].to_string()).collect::<String>())
                .filter(|t| !t.is_empty())
                .collect()
        })
        .collect()
}

#[test]
fn golden_deck_agrees_with_the_raw_archive() {
    let bytes = std::fs::read(fixture("golden/deck.pptx")).unwrap();
    let raw = raw_slide_texts(&bytes);
    let deck = parse_deck(&bytes, "T").unwrap();
    assert_eq!(deck.pages.len(), raw.len());
    for (page, texts) in deck.pages.iter().zip(raw) {
        assert_eq!(page.text_blocks, texts);
    }
}

#[test]
fn three_titled_slides() {
    let bytes = PptxBuilder::new()
        .slide(SlideSpec::titled("A", Vec::<String>::new()))
        .slide(SlideSpec::titled("B", Vec::<String>::new()))
        .slide(SlideSpec::titled("C", Vec::<String>::new()))
        .build();
    let deck = parse_deck(&bytes, "ABC").unwrap();
    let raw = raw_slide_texts(&bytes);
    let firsts: Vec<&str> = deck.pages.iter().map(|p| p.text_blocks[0].as_str()).collect();
    assert_eq!(firsts, ["A", "B", "C"]);
    assert_eq!(raw.iter().map(|r| r[0].as_str()).collect::<Vec<_>>(), firsts);
}

#[test]
fn parsing_is_deterministic() {
    let bytes = std::fs::read(fixture("golden/deck.pptx")).unwrap();
    let a = serde_json::to_string(&parse_deck(&bytes, "T").unwrap()).unwrap();
    let b = serde_json::to_string(&parse_deck(&bytes, "T").unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn rasterizing_keeps_page_order() {
    let deck = golden_deck();
    assert!(deck.is_rasterized());
    assert!(deck.pages.iter().enumerate().all(|(i, p)| p.index == i));
    assert!(deck.pages.iter().all(|p| p.image.as_ref().unwrap().width > 0));
}

#[test]
fn not_an_archive() {
    assert!(matches!(parse_deck(b"plain text", "T"), Err(IngestError::MalformedArchive(_))));
}
