//! Minimal slide-archive writer.
//!
//! Produces just enough of the presentation package for [`parse_deck`](super::parse_deck)
//! and common renderers: content types, the presentation part with its slide
//! list, relationships, and one XML part per slide (plus optional notes).

use std::io::{Cursor, Write};

use quick_xml::escape::escape;
use serde::{Deserialize, Serialize};
use zip::write::SimpleFileOptions;
use zip::{CompressionMethod, DateTime, ZipWriter};

const NS: &str = r#"xmlns:a="http://schemas.openxmlformats.org/drawingml/2006/main" xmlns:r="http://schemas.openxmlformats.org/officeDocument/2006/relationships" xmlns:p="http://schemas.openxmlformats.org/presentationml/2006/main""#;
const REL_SLIDE: &str = "http://schemas.openxmlformats.org/officeDocument/2006/relationships/slide";
const REL_NOTES: &str = "http://schemas.openxmlformats.org/officeDocument/2006/relationships/notesSlide";

#[derive(Debug, Clone)]
pub struct ShapeSpec {
    /// (x, y) in EMU; `None` writes a shape without `a:xfrm`.
    offset: Option<(i64, i64)>,
    paragraphs: Vec<String>,
    placeholder: Option<&'static str>,
}

impl ShapeSpec {
    pub fn at<I, S>(x: i64, y: i64, paragraphs: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ShapeSpec { offset: Some((x, y)), paragraphs: paragraphs.into_iter().map(Into::into).collect(), placeholder: None }
    }

    pub fn floating<I, S>(paragraphs: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ShapeSpec { offset: None, ..ShapeSpec::at(0, 0, paragraphs) }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SlideSpec {
    shapes: Vec<ShapeSpec>,
    notes: Option<String>,
}

impl SlideSpec {
    pub fn new() -> Self {
        SlideSpec::default()
    }

    /// A title box at the top and a body box of bullet paragraphs below it.
    pub fn titled<I, S>(title: &str, bullets: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let bullets: Vec<String> = bullets.into_iter().map(Into::into).collect();
        let mut s = SlideSpec::new().shape(ShapeSpec::at(457_200, 274_638, [title]));
        if !bullets.is_empty() {
            s = s.shape(ShapeSpec::at(457_200, 1_600_200, bullets));
        }
        s
    }

    pub fn shape(mut self, shape: ShapeSpec) -> Self {
        self.shapes.push(shape);
        self
    }

    pub fn notes(mut self, text: impl Into<String>) -> Self {
        self.notes = Some(text.into());
        self
    }

    /// Adds a slide-number placeholder, which carries text but is not content.
    pub fn slide_number(self, n: u32) -> Self {
        let mut shape = ShapeSpec::at(8_000_000, 6_300_000, [n.to_string()]);
        shape.placeholder = Some("sldNum");
        self.shape(shape)
    }
}

#[derive(Debug, Clone, Default)]
pub struct PptxBuilder {
    slides: Vec<SlideSpec>,
}

impl PptxBuilder {
    pub fn new() -> Self {
        PptxBuilder::default()
    }

    pub fn slide(mut self, slide: SlideSpec) -> Self {
        self.slides.push(slide);
        self
    }

    /// Archive bytes. Output is byte-for-byte deterministic.
    pub fn build(&self) -> Vec<u8> {
        let mut zip = ZipWriter::new(Cursor::new(Vec::new()));
        let opts = SimpleFileOptions::default()
            .compression_method(CompressionMethod::Deflated)
            .last_modified_time(DateTime::default());
        let mut put = |name: &str, body: String| {
            zip.start_file(name, opts).expect("zip entry");
            zip.write_all(body.as_bytes()).expect("zip write");
        };

        let mut overrides = String::new();
        overrides.push_str(r#"<Override PartName="/ppt/presentation.xml" ContentType="application/vnd.openxmlformats-officedocument.presentationml.presentation.main+xml"/>"#);
        for (i, slide) in self.slides.iter().enumerate() {
            let n = i + 1;
            overrides.push_str(&format!(
                r#"<Override PartName="/ppt/slides/slide{n}.xml" ContentType="application/vnd.openxmlformats-officedocument.presentationml.slide+xml"/>"#
            ));
            if slide.notes.is_some() {
                overrides.push_str(&format!(
                    r#"<Override PartName="/ppt/notesSlides/notesSlide{n}.xml" ContentType="application/vnd.openxmlformats-officedocument.presentationml.notesSlide+xml"/>"#
                ));
            }
        }
        put(
            "[Content_Types].xml",
            format!(
                r#"<?xml version="1.0" encoding="UTF-8" standalone="yes"?><Types xmlns="http://schemas.openxmlformats.org/package/2006/content-types"><Default Extension="rels" ContentType="application/vnd.openxmlformats-package.relationships+xml"/><Default Extension="xml" ContentType="application/xml"/>{overrides}</Types>"#
            ),
        );
        put(
            "_rels/.rels",
            r#"<?xml version="1.0" encoding="UTF-8" standalone="yes"?><Relationships xmlns="http://schemas.openxmlformats.org/package/2006/relationships"><Relationship Id="rId1" Type="http://schemas.openxmlformats.org/officeDocument/2006/relationships/officeDocument" Target="ppt/presentation.xml"/></Relationships>"#.to_string(),
        );

        let ids: String = (0..self.slides.len())
            .map(|i| format!(r#"<p:sldId id="{}" r:id="rId{}"/>"#, 256 + i, i + 2))
            .collect();
        put(
            "ppt/presentation.xml",
            format!(
                r#"<?xml version="1.0" encoding="UTF-8" standalone="yes"?><p:presentation {NS}><p:sldIdLst>{ids}</p:sldIdLst><p:sldSz cx="9144000" cy="6858000"/></p:presentation>"#
            ),
        );
        let rels: String = (0..self.slides.len())
            .map(|i| format!(r#"<Relationship Id="rId{}" Type="{REL_SLIDE}" Target="slides/slide{}.xml"/>"#, i + 2, i + 1))
            .collect();
        put(
            "ppt/_rels/presentation.xml.rels",
            format!(
                r#"<?xml version="1.0" encoding="UTF-8" standalone="yes"?><Relationships xmlns="http://schemas.openxmlformats.org/package/2006/relationships">{rels}</Relationships>"#
            ),
        );

        for (i, slide) in self.slides.iter().enumerate() {
            let n = i + 1;
            put(&format!("ppt/slides/slide{n}.xml"), slide_xml(slide));
            if let Some(notes) = &slide.notes {
                put(
                    &format!("ppt/slides/_rels/slide{n}.xml.rels"),
                    format!(
                        r#"<?xml version="1.0" encoding="UTF-8" standalone="yes"?><Relationships xmlns="http://schemas.openxmlformats.org/package/2006/relationships"><Relationship Id="rId1" Type="{REL_NOTES}" Target="../notesSlides/notesSlide{n}.xml"/></Relationships>"#
                    ),
                );
                put(
                    &format!("ppt/notesSlides/notesSlide{n}.xml"),
                    format!(
                        r#"<?xml version="1.0" encoding="UTF-8" standalone="yes"?><p:notes {NS}><p:cSld><p:spTree><p:sp><p:txBody><a:p><a:r><a:t>{}</a:t></a:r></a:p></p:txBody></p:sp></p:spTree></p:cSld></p:notes>"#,
                        escape(notes.as_str())
                    ),
                );
            }
        }
        zip.finish().expect("zip finish").into_inner()
    }
}

fn slide_xml(slide: &SlideSpec) -> String {
    let mut shapes = String::new();
    for (i, shape) in slide.shapes.iter().enumerate() {
        let ph = shape.placeholder.map(|t| format!(r#"<p:ph type="{t}"/>"#)).unwrap_or_default();
        let xfrm = shape
            .offset
            .map(|(x, y)| format!(r#"<a:xfrm><a:off x="{x}" y="{y}"/><a:ext cx="8229600" cy="1143000"/></a:xfrm>"#))
            .unwrap_or_default();
        let paras: String = shape
            .paragraphs
            .iter()
            .map(|p| format!(r#"<a:p><a:r><a:rPr lang="en-US"/><a:t>{}</a:t></a:r></a:p>"#, escape(p.as_str())))
            .collect();
        shapes.push_str(&format!(
            r#"<p:sp><p:nvSpPr><p:cNvPr id="{}" name="Shape {}"/><p:cNvSpPr/><p:nvPr>{ph}</p:nvPr></p:nvSpPr><p:spPr>{xfrm}</p:spPr><p:txBody><a:bodyPr/>{paras}</p:txBody></p:sp>"#,
            i + 2,
            i + 1
        ));
    }
    format!(
        r#"<?xml version="1.0" encoding="UTF-8" standalone="yes"?><p:sld {NS}><p:cSld><p:spTree><p:nvGrpSpPr><p:cNvPr id="1" name=""/><p:cNvGrpSpPr/><p:nvPr/></p:nvGrpSpPr><p:grpSpPr/>{shapes}</p:spTree></p:cSld></p:sld>"#
    )
}

/// A deck written as plain data: a title plus one title-and-bullets entry
/// per slide.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeckSource {
    pub title: String,
    pub slides: Vec<SlideSource>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlideSource {
    pub title: String,
    #[serde(default)]
    pub bullets: Vec<String>,
}

impl DeckSource {
    pub fn to_pptx(&self) -> Vec<u8> {
        self.slides
            .iter()
            .fold(PptxBuilder::new(), |b, s| b.slide(SlideSpec::titled(&s.title, s.bullets.iter().cloned())))
            .build()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn build_is_deterministic() {
        let b = PptxBuilder::new().slide(SlideSpec::titled("A", ["x"])).slide(SlideSpec::titled("B", ["y"]));
        assert_eq!(b.build(), b.build());
    }
}
