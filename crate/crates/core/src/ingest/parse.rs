use std::collections::HashMap;
use std::io::{Cursor, Read};

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;
use sha2::{Digest, Sha256};
use zip::ZipArchive;

use super::{IngestError, Page, SlideDeck};

const PRESENTATION: &str = "ppt/presentation.xml";
const PRESENTATION_RELS: &str = "ppt/_rels/presentation.xml.rels";

/// Parses a slide archive into a deck with one page per slide, in
/// presentation order. Images are left unset.
///
/// Text blocks are paragraphs. Within a slide, shapes are ordered by the
/// top-left corner of their bounding box (top first); if any shape on the
/// slide lacks geometry the whole slide keeps document order. Speaker notes
/// and alt text are not read.
pub fn parse_deck(archive: &[u8], title: &str) -> Result<SlideDeck, IngestError> {
    if title.trim().is_empty() {
        return Err(IngestError::EmptyTitle);
    }
    let mut zip = ZipArchive::new(Cursor::new(archive)).map_err(|e| IngestError::MalformedArchive(e.to_string()))?;

    let presentation = read_part(&mut zip, PRESENTATION)?;
    let rels = read_part(&mut zip, PRESENTATION_RELS)?;
    let targets = relationship_targets(&rels)?;
    let slide_ids = slide_relationship_ids(&presentation)?;
    if slide_ids.is_empty() {
        return Err(IngestError::EmptyDeck);
    }

    let mut pages = Vec::with_capacity(slide_ids.len());
    for (index, rid) in slide_ids.iter().enumerate() {
        let target = targets
            .get(rid)
            .ok_or_else(|| IngestError::MalformedArchive(format!("slide relationship {rid} has no target")))?;
        let part = resolve_target(target);
        let xml = read_part(&mut zip, &part)?;
        let text_blocks = slide_text_blocks(&xml).map_err(|e| IngestError::MalformedArchive(format!("{part}: {e}")))?;
        let page_id = part.rsplit('/').next().unwrap_or(&part).trim_end_matches(".xml").to_string();
        pages.push(Page { index, page_id, text_blocks, image: None });
    }

    let deck_id = hex::encode(&Sha256::digest(archive)[..8]);
    Ok(SlideDeck { deck_id, title: title.trim().to_string(), pages })
}

fn read_part<R: Read + std::io::Seek>(zip: &mut ZipArchive<R>, name: &str) -> Result<String, IngestError> {
    let mut file = zip.by_name(name).map_err(|_| IngestError::MalformedArchive(format!("missing part {name}")))?;
    let mut text = String::new();
    file.read_to_string(&mut text).map_err(|e| IngestError::MalformedArchive(format!("{name}: {e}")))?;
    Ok(text)
}

fn resolve_target(target: &str) -> String {
    match target.strip_prefix('/') {
        Some(abs) => abs.to_string(),
        None => {
            // relative to ppt/
            let mut parts: Vec<&str> = vec!["ppt"];
            for seg in target.split('/') {
                match seg {
                    ".." => {
                        parts.pop();
                    }
                    "." | "" => {}
                    s => parts.push(s),
                }
            }
            parts.join("/")
        }
    }
}

fn xml_err(e: impl std::fmt::Display) -> IngestError {
    IngestError::MalformedArchive(e.to_string())
}

fn attr(e: &BytesStart<'_>, wanted: impl Fn(&[u8]) -> bool) -> Option<String> {
    e.attributes()
        .flatten()
        .find(|a| wanted(a.key.as_ref()))
        .and_then(|a| a.unescape_value().ok().map(|v| v.into_owned()))
}

fn relationship_targets(xml: &str) -> Result<HashMap<String, String>, IngestError> {
    let mut reader = Reader::from_str(xml);
    let mut out = HashMap::new();
    loop {
        match reader.read_event().map_err(xml_err)? {
            Event::Start(e) | Event::Empty(e) if e.local_name().as_ref() == b"Relationship" => {
                if let (Some(id), Some(target)) = (attr(&e, |k| k == b"Id"), attr(&e, |k| k == b"Target")) {
                    out.insert(id, target);
                }
            }
            Event::Eof => break,
            _ => {}
        }
    }
    Ok(out)
}

/// `r:id` values of `p:sldId` entries, in presentation order.
fn slide_relationship_ids(xml: &str) -> Result<Vec<String>, IngestError> {
    let mut reader = Reader::from_str(xml);
    let mut ids = Vec::new();
    loop {
        match reader.read_event().map_err(xml_err)? {
            Event::Start(e) | Event::Empty(e) if e.local_name().as_ref() == b"sldId" => {
                // the relationship id is the namespaced `id` attribute
                let rid = attr(&e, |k| k.len() > 3 && k.ends_with(b":id"))
                    .ok_or_else(|| IngestError::MalformedArchive("sldId without relationship id".into()))?;
                ids.push(rid);
            }
            Event::Eof => break,
            _ => {}
        }
    }
    Ok(ids)
}

#[derive(Default)]
struct Shape {
    offset: Option<(i64, i64)>,
    paragraphs: Vec<String>,
    skip: bool,
}

fn is_shape(local: &[u8]) -> bool {
    matches!(local, b"sp" | b"graphicFrame" | b"cxnSp" | b"pic")
}

fn slide_text_blocks(xml: &str) -> Result<Vec<String>, quick_xml::Error> {
    let mut reader = Reader::from_str(xml);
    let mut stack: Vec<Shape> = Vec::new();
    let mut done: Vec<Shape> = Vec::new();
    let mut paragraph: Option<String> = None;
    let mut in_text = false;

    loop {
        let event = reader.read_event()?;
        match &event {
            Event::Start(e) | Event::Empty(e) => {
                let empty = matches!(event, Event::Empty(_));
                let local = e.local_name();
                match local.as_ref() {
                    l if is_shape(l) && !empty => stack.push(Shape::default()),
                    b"off" => {
                        if let Some(shape) = stack.last_mut() {
                            if shape.offset.is_none() {
                                let x = attr(e, |k| k == b"x").and_then(|v| v.parse().ok());
                                let y = attr(e, |k| k == b"y").and_then(|v| v.parse().ok());
                                if let (Some(x), Some(y)) = (x, y) {
                                    shape.offset = Some((x, y));
                                }
                            }
                        }
                    }
                    b"ph" => {
                        let kind = attr(e, |k| k == b"type");
                        if matches!(kind.as_deref(), Some("sldNum" | "dt")) {
                            if let Some(shape) = stack.last_mut() {
                                shape.skip = true;
                            }
                        }
                    }
                    b"p" if !stack.is_empty() && !empty => paragraph = Some(String::new()),
                    b"t" if !empty => in_text = true,
                    b"br" => {
                        if let Some(p) = paragraph.as_mut() {
                            p.push('\n');
                        }
                    }
                    _ => {}
                }
            }
            Event::Text(t) if in_text => {
                if let Some(p) = paragraph.as_mut() {
                    p.push_str(&t.unescape()?);
                }
            }
            Event::End(e) => match e.local_name().as_ref() {
                b"t" => in_text = false,
                b"p" => {
                    if let (Some(text), Some(shape)) = (paragraph.take(), stack.last_mut()) {
                        let text = text.trim();
                        if !text.is_empty() {
                            shape.paragraphs.push(text.to_string());
                        }
                    }
                }
                l if is_shape(l) => {
                    if let Some(shape) = stack.pop() {
                        if !shape.skip && !shape.paragraphs.is_empty() {
                            done.push(shape);
                        }
                    }
                }
                _ => {}
            },
            Event::Eof => break,
            _ => {}
        }
    }

    if done.iter().all(|s| s.offset.is_some()) {
        // stable: equal positions keep document order
        done.sort_by_key(|s| s.offset.map(|(x, y)| (y, x)));
    }
    Ok(done.into_iter().flat_map(|s| s.paragraphs).collect())
}
