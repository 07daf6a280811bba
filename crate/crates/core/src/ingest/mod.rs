//! Slide ingestion: per-page text and page images.
//!
//! [`parse_deck`] reads the zip-of-XML slide archive directly; [`rasterize_deck`]
//! hands the archive to an external renderer and attaches the resulting page
//! images.

mod parse;
mod render;
pub mod synth;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use self::parse::parse_deck;
pub use self::render::{rasterize_deck, CommandRenderer, PageRenderer, PlaceholderRenderer, MAX_IMAGE_SIDE};

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("malformed slide archive: {0}")]
    MalformedArchive(String),
    #[error("slide archive contains no slides")]
    EmptyDeck,
    #[error("deck title must not be empty")]
    EmptyTitle,
    #[error("renderer failed: {0}")]
    RendererFailed(String),
    #[error("renderer produced {found} page image(s) for a {expected}-page deck")]
    PageCountMismatch { expected: usize, found: usize },
    #[error("page {index} has not been rasterized")]
    NotRasterized { index: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A rendered page image. Always PNG, longest side at most [`MAX_IMAGE_SIDE`].
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageImage {
    pub width: u32,
    pub height: u32,
    #[serde(with = "png_base64")]
    pub png: Vec<u8>,
}

impl std::fmt::Debug for PageImage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "PageImage({}x{}, {} bytes)", self.width, self.height, self.png.len())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Page {
    pub index: usize,
    pub page_id: String,
    pub text_blocks: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image: Option<PageImage>,
}

impl Page {
    /// Text blocks joined by newlines, plus the page image.
    pub fn content(&self) -> Result<(String, &PageImage), IngestError> {
        let image = self.image.as_ref().ok_or(IngestError::NotRasterized { index: self.index })?;
        Ok((self.text(), image))
    }

    pub fn text(&self) -> String {
        self.text_blocks.join("\n")
    }
}

/// Free-function form of [`Page::content`].
pub fn page_content(page: &Page) -> Result<(String, &PageImage), IngestError> {
    page.content()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlideDeck {
    pub deck_id: String,
    pub title: String,
    pub pages: Vec<Page>,
}

impl SlideDeck {
    pub fn is_rasterized(&self) -> bool {
        self.pages.iter().all(|p| p.image.is_some())
    }

    pub fn page(&self, index: usize) -> Option<&Page> {
        self.pages.get(index)
    }

    /// Writes `manifest.json` plus one `page-<index>.png` per rasterized page
    /// into `dir`.
    pub fn write_manifest(&self, dir: &Path) -> Result<DeckManifest, IngestError> {
        std::fs::create_dir_all(dir)?;
        let mut pages = Vec::with_capacity(self.pages.len());
        for page in &self.pages {
            let image = match &page.image {
                Some(img) => {
                    let name = format!("page-{}.png", page.index);
                    std::fs::write(dir.join(&name), &img.png)?;
                    Some(ManifestImage { path: PathBuf::from(name), width: img.width, height: img.height })
                }
                None => None,
            };
            pages.push(ManifestPage {
                index: page.index,
                page_id: page.page_id.clone(),
                text_blocks: page.text_blocks.clone(),
                image,
            });
        }
        let manifest = DeckManifest { deck_id: self.deck_id.clone(), title: self.title.clone(), pages };
        let json = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
        std::fs::write(dir.join(DeckManifest::FILE_NAME), json)?;
        Ok(manifest)
    }

    /// Inverse of [`SlideDeck::write_manifest`].
    pub fn read_manifest(dir: &Path) -> Result<SlideDeck, IngestError> {
        let bytes = std::fs::read(dir.join(DeckManifest::FILE_NAME))?;
        let manifest: DeckManifest = serde_json::from_slice(&bytes)
            .map_err(|e| IngestError::Io(std::io::Error::new(std::io::ErrorKind::InvalidData, e)))?;
        let mut pages = Vec::with_capacity(manifest.pages.len());
        for p in manifest.pages {
            let image = match p.image {
                Some(img) => Some(PageImage { width: img.width, height: img.height, png: std::fs::read(dir.join(&img.path))? }),
                None => None,
            };
            pages.push(Page { index: p.index, page_id: p.page_id, text_blocks: p.text_blocks, image });
        }
        Ok(SlideDeck { deck_id: manifest.deck_id, title: manifest.title, pages })
    }
}

/// On-disk description of a deck; image paths are relative to the manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeckManifest {
    pub deck_id: String,
    pub title: String,
    pub pages: Vec<ManifestPage>,
}

impl DeckManifest {
    pub const FILE_NAME: &'static str = "manifest.json";
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestPage {
    pub index: usize,
    pub page_id: String,
    pub text_blocks: Vec<String>,
    pub image: Option<ManifestImage>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestImage {
    pub path: PathBuf,
    pub width: u32,
    pub height: u32,
}

mod png_base64 {
    use base64::engine::general_purpose::STANDARD;
    use base64::Engine;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bytes: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&STANDARD.encode(bytes))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        let s = String::deserialize(d)?;
        STANDARD.decode(s.as_bytes()).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn page(blocks: &[&str], image: bool) -> Page {
        Page {
            index: 0,
            page_id: "slide1".into(),
            text_blocks: blocks.iter().map(|s| s.to_string()).collect(),
            image: image.then(|| PageImage { width: 1, height: 1, png: vec![0] }),
        }
    }

    #[test]
    fn content_joins_blocks_with_newlines() {
        let p = page(&["A", "B"], true);
        assert_eq!(page_content(&p).unwrap().0, "A\nB");
        assert_eq!(page(&[], true).content().unwrap().0, "");
    }

    #[test]
    fn content_requires_image() {
        assert!(matches!(page(&["A"], false).content(), Err(IngestError::NotRasterized { index: 0 })));
    }

    #[test]
    fn manifest_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let deck = SlideDeck {
            deck_id: "d".into(),
            title: "T".into(),
            pages: vec![page(&["x"], true), Page { index: 1, ..page(&["y"], false) }],
        };
        let manifest = deck.write_manifest(dir.path()).unwrap();
        assert_eq!(manifest.pages[0].image.as_ref().unwrap().path, PathBuf::from("page-0.png"));
        assert!(manifest.pages[1].image.is_none());
        assert_eq!(SlideDeck::read_manifest(dir.path()).unwrap(), deck);
    }
}
