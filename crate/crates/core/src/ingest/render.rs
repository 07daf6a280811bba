use std::io::Cursor;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::Duration;

use image::{ImageFormat, RgbImage};
use serde::{Deserialize, Serialize};
use wait_timeout::ChildExt;

use super::{IngestError, PageImage, SlideDeck};

/// Longest side of a stored page image, in pixels.
pub const MAX_IMAGE_SIDE: u32 = 1024;

/// Produces `page-<index>.png` files for a slide archive in an output
/// directory.
pub trait PageRenderer {
    fn render(&self, archive: &Path, outdir: &Path, page_count: usize) -> Result<(), IngestError>;
}

/// Runs an external command. `{input}` and `{outdir}` in any argument are
/// replaced with the archive path and the output directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommandRenderer {
    pub command: Vec<String>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
}

fn default_timeout() -> u64 {
    300
}

impl CommandRenderer {
    pub fn new<I, S>(command: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        CommandRenderer { command: command.into_iter().map(Into::into).collect(), timeout_secs: default_timeout() }
    }
}

impl PageRenderer for CommandRenderer {
    fn render(&self, archive: &Path, outdir: &Path, _page_count: usize) -> Result<(), IngestError> {
        let fill = |arg: &str| {
            arg.replace("{input}", &archive.to_string_lossy()).replace("{outdir}", &outdir.to_string_lossy())
        };
        let (program, args) = self
            .command
            .split_first()
            .ok_or_else(|| IngestError::RendererFailed("renderer command is empty".into()))?;
        let mut child = Command::new(fill(program))
            .args(args.iter().map(|a| fill(a)))
            .stdin(Stdio::null())
            .stdout(Stdio::null())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| IngestError::RendererFailed(format!("cannot start {program}: {e}")))?;
        let status = match child.wait_timeout(Duration::from_secs(self.timeout_secs))? {
            Some(status) => status,
            None => {
                let _ = child.kill();
                let _ = child.wait();
                return Err(IngestError::RendererFailed(format!("timed out after {}s", self.timeout_secs)));
            }
        };
        if !status.success() {
            let mut stderr = String::new();
            if let Some(mut err) = child.stderr.take() {
                use std::io::Read;
                let _ = err.read_to_string(&mut stderr);
            }
            return Err(IngestError::RendererFailed(format!("{status}: {}", stderr.trim())));
        }
        Ok(())
    }
}

/// In-process renderer drawing plain placeholder pages. For demos and
/// environments without an office suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlaceholderRenderer {
    pub width: u32,
    pub height: u32,
}

impl Default for PlaceholderRenderer {
    fn default() -> Self {
        PlaceholderRenderer { width: 320, height: 240 }
    }
}

impl PageRenderer for PlaceholderRenderer {
    fn render(&self, _archive: &Path, outdir: &Path, page_count: usize) -> Result<(), IngestError> {
        for i in 0..page_count {
            let shade = 255 - (i % 8) as u8 * 12;
            let img = RgbImage::from_pixel(self.width, self.height, image::Rgb([shade, shade, 255]));
            img.save_with_format(outdir.join(format!("page-{i}.png")), ImageFormat::Png)
                .map_err(|e| IngestError::RendererFailed(e.to_string()))?;
        }
        Ok(())
    }
}

/// Renders the archive at `archive` and attaches one image per page.
///
/// The renderer must produce exactly `page-0.png` .. `page-<n-1>.png` for an
/// `n`-page deck. Images larger than [`MAX_IMAGE_SIDE`] are downscaled.
pub fn rasterize_deck(
    mut deck: SlideDeck,
    archive: &Path,
    renderer: &dyn PageRenderer,
) -> Result<SlideDeck, IngestError> {
    let outdir = tempfile::tempdir()?;
    renderer.render(archive, outdir.path(), deck.pages.len())?;

    let mut rendered: Vec<(usize, PathBuf)> = Vec::new();
    for entry in std::fs::read_dir(outdir.path())? {
        let path = entry?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        if let Some(index) = name.strip_prefix("page-").and_then(|n| n.strip_suffix(".png")).and_then(|n| n.parse().ok()) {
            rendered.push((index, path));
        }
    }
    rendered.sort();
    let expected = deck.pages.len();
    if rendered.len() != expected || rendered.iter().enumerate().any(|(i, (idx, _))| i != *idx) {
        return Err(IngestError::PageCountMismatch { expected, found: rendered.len() });
    }

    for (page, (_, path)) in deck.pages.iter_mut().zip(rendered) {
        let bytes = std::fs::read(&path)?;
        page.image = Some(normalize_png(bytes).map_err(|e| {
            IngestError::RendererFailed(format!("{}: {e}", path.file_name().unwrap_or_default().to_string_lossy()))
        })?);
    }
    Ok(deck)
}

fn normalize_png(bytes: Vec<u8>) -> Result<PageImage, String> {
    let img = image::load_from_memory_with_format(&bytes, ImageFormat::Png).map_err(|e| e.to_string())?;
    let (width, height) = (img.width(), img.height());
    if width == 0 || height == 0 {
        return Err("image has a zero dimension".into());
    }
    if width.max(height) <= MAX_IMAGE_SIDE {
        return Ok(PageImage { width, height, png: bytes });
    }
    let resized = img.resize(MAX_IMAGE_SIDE, MAX_IMAGE_SIDE, image::imageops::FilterType::Triangle);
    let mut out = Cursor::new(Vec::new());
    resized.write_to(&mut out, ImageFormat::Png).map_err(|e| e.to_string())?;
    Ok(PageImage { width: resized.width(), height: resized.height(), png: out.into_inner() })
}
