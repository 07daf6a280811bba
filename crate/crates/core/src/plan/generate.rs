use super::action::TeachingAction;
use super::questions::parse_question_block;
use super::{PlanConfig, PlanError};
use crate::agenda::AgendaNode;
use crate::gateway::{Gateway, ImageRef, ModelRequest, Profile};
use crate::ingest::Page;
use crate::prompts;

/// `(ShowFile, page)` for a leaf.
pub fn plan_showfile(leaf: &AgendaNode) -> Result<TeachingAction, PlanError> {
    match (leaf.is_leaf(), leaf.page_index) {
        (true, Some(page)) => Ok(TeachingAction::show_file(page, leaf.node_id.clone())),
        _ => Err(PlanError::NotALeaf(leaf.node_id.clone())),
    }
}

pub(crate) fn readscript_request(page: &Page, prev: &[String], cfg: &PlanConfig, scope: &str) -> Result<ModelRequest, PlanError> {
    let (text, image) = page.content()?;
    let mut user = format!("Slide {} text:\n{}", page.index + 1, if text.is_empty() { "(no text)" } else { &text });
    if !prev.is_empty() {
        user.push_str("\n\nScripts for the preceding slides, oldest first:");
        for (i, s) in prev.iter().enumerate() {
            user.push_str(&format!("\n\n[script {}]\n{s}", i + 1));
        }
    }
    Ok(ModelRequest::new(Profile::Planner, prompts::read_script(&cfg.language))
        .user_with_images(user, vec![ImageRef::png(image.png.clone())])
        .scope(scope)
        .purpose("read_script"))
}

/// `(ReadScript, script)` for a leaf. `prev_scripts` are the scripts of
/// the preceding pages, oldest first; only the last k are sent.
pub fn plan_readscript(
    leaf: &AgendaNode,
    page: &Page,
    prev_scripts: &[String],
    gateway: &Gateway,
    cfg: &PlanConfig,
) -> Result<TeachingAction, PlanError> {
    let script = readscript_counted(leaf, page, prev_scripts, gateway, cfg, "", &mut 0)?;
    Ok(TeachingAction::read_script(script, leaf.node_id.clone()))
}

pub(crate) fn readscript_counted(
    leaf: &AgendaNode,
    page: &Page,
    prev_scripts: &[String],
    gateway: &Gateway,
    cfg: &PlanConfig,
    scope: &str,
    calls: &mut usize,
) -> Result<String, PlanError> {
    if !leaf.is_leaf() {
        return Err(PlanError::NotALeaf(leaf.node_id.clone()));
    }
    let window = &prev_scripts[prev_scripts.len().saturating_sub(cfg.context_pages)..];
    let req = readscript_request(page, window, cfg, scope)?;
    let script = gateway.complete_counted(&req, calls)?.text.trim().to_string();
    if script.is_empty() {
        return Err(PlanError::EmptyCompletion);
    }
    Ok(script)
}

pub(crate) fn askquestion_request(window: &[String], cfg: &PlanConfig, scope: &str) -> ModelRequest {
    let mut user = String::from("Teaching content, oldest first. The last script is the one to base the questions on; the others are background.");
    for (i, s) in window.iter().enumerate() {
        let tag = if i + 1 == window.len() { "current script" } else { "earlier script" };
        user.push_str(&format!("\n\n[{tag}]\n{s}"));
    }
    ModelRequest::new(Profile::Planner, prompts::ask_question(&cfg.language)).user(user).scope(scope).purpose("ask_question")
}

/// Quiz actions for a section, attached to its last leaf.
///
/// `scripts_window` holds up to k+1 scripts ending with the script of the
/// section's last page. The first `cfg.questions_kept` valid questions are
/// kept.
pub fn plan_askquestion(
    section: &AgendaNode,
    scripts_window: &[String],
    gateway: &Gateway,
    cfg: &PlanConfig,
) -> Result<Vec<TeachingAction>, PlanError> {
    askquestion_counted(section, scripts_window, gateway, cfg, "", &mut 0)
}

pub(crate) fn askquestion_counted(
    section: &AgendaNode,
    scripts_window: &[String],
    gateway: &Gateway,
    cfg: &PlanConfig,
    scope: &str,
    calls: &mut usize,
) -> Result<Vec<TeachingAction>, PlanError> {
    let leaves = section.leaves();
    if section.is_leaf() || leaves.len() < cfg.context_pages {
        return Err(PlanError::NotEligible { section: section.node_id.clone(), leaves: leaves.len(), k: cfg.context_pages });
    }
    let last_leaf = leaves.last().expect("eligible sections have leaves").node_id.clone();
    let window = &scripts_window[scripts_window.len().saturating_sub(cfg.context_pages + 1)..];
    let req = askquestion_request(window, cfg, scope);
    let reply = gateway.complete_counted(&req, calls)?.text;
    let parsed = parse_question_block(&reply);
    for f in &parsed.failures {
        tracing::debug!(section = %section.node_id, block = f.block, reason = %f.reason, "question block rejected");
    }
    if parsed.items.is_empty() {
        return Err(PlanError::NoValidQuestions {
            section: section.node_id.clone(),
            failures: parsed.failures.into_iter().map(|f| f.reason).collect(),
        });
    }
    Ok(parsed
        .items
        .into_iter()
        .take(cfg.questions_kept)
        .map(|qa| TeachingAction::ask_question(qa, last_leaf.clone()))
        .collect())
}
