use super::{AgendaConfig, AgendaError, Description};
use crate::gateway::{Gateway, ImageRef, ModelRequest, Profile};
use crate::ingest::Page;
use crate::prompts;

/// Collapses whitespace to single spaces and truncates to `cap` characters.
pub fn normalize_description(text: &str, cap: usize) -> String {
    let collapsed = text.split_whitespace().collect::<Vec<_>>().join(" ");
    match collapsed.char_indices().nth(cap) {
        Some((byte, _)) => collapsed[..byte].trim_end().to_string(),
        None => collapsed,
    }
}

pub(crate) fn describe_request(
    page: &Page,
    prev: &[Description],
    cfg: &AgendaConfig,
    scope: &str,
) -> Result<ModelRequest, AgendaError> {
    let (text, image) = page.content()?;
    let mut user = format!("Slide {} text:\n{}", page.index + 1, if text.is_empty() { "(no text)" } else { &text });
    if !prev.is_empty() {
        user.push_str("\n\nSummaries of the preceding slides:");
        for d in prev {
            user.push_str(&format!("\n[slide {}] {}", d.page_index + 1, d.text));
        }
    }
    Ok(ModelRequest::new(Profile::Planner, prompts::describe(&cfg.language))
        .user_with_images(user, vec![ImageRef::png(image.png.clone())])
        .scope(scope)
        .purpose("describe"))
}

/// One description call for `page`. `prev` holds up to k earlier
/// descriptions, oldest first; only the last `cfg.context_pages` are sent.
pub fn generate_description(
    page: &Page,
    prev: &[Description],
    gateway: &Gateway,
    cfg: &AgendaConfig,
) -> Result<Description, AgendaError> {
    generate_counted(page, prev, gateway, cfg, "", &mut 0)
}

pub(crate) fn generate_counted(
    page: &Page,
    prev: &[Description],
    gateway: &Gateway,
    cfg: &AgendaConfig,
    scope: &str,
    attempts: &mut usize,
) -> Result<Description, AgendaError> {
    let window = &prev[prev.len().saturating_sub(cfg.context_pages)..];
    let req = describe_request(page, window, cfg, scope)?;
    let completion = gateway.complete_counted(&req, attempts)?;
    let text = normalize_description(&completion.text, cfg.description_cap);
    if text.is_empty() {
        return Err(AgendaError::EmptyCompletion);
    }
    Ok(Description { page_index: page.index, text })
}
