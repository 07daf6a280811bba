use serde::{Deserialize, Serialize};

use super::{leaf_id, parse_outline_tree, prune, render_outline, Agenda, AgendaConfig, AgendaError, AgendaNode, Description, NodeKind, OutlineNode};
use crate::gateway::{Gateway, ModelRequest, Profile};
use crate::prompts;

/// Where a reply placed the new page: under `parent_id`, wrapped in zero or
/// more freshly named sections (outermost first).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Insertion {
    pub parent_id: String,
    pub new_sections: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentOutcome {
    pub agenda: Agenda,
    pub leaf_id: String,
    /// Model calls made (1 + retries used).
    pub attempts: u32,
    /// Why each rejected reply was rejected, in order.
    pub rejections: Vec<String>,
    pub fallback: bool,
}

fn same_label(a: &str, b: &str) -> bool {
    a.split_whitespace().eq(b.split_whitespace())
}

/// Checks a model reply against the pruned view it was shown. The reply must
/// reproduce the view line for line, plus exactly one new chain of lines
/// (zero or more new sections ending in the new page) appended as the last
/// child of an expanded section of the view.
pub fn validate_revision(view: &Agenda, reply: &str) -> Result<Insertion, String> {
    let tree = parse_outline_tree(reply).map_err(|e| e.to_string())?;
    let mut found: Option<Insertion> = None;
    compare(&view.root, &tree, &mut found)?;
    found.ok_or_else(|| "the new page was not added".to_string())
}

fn compare(v: &AgendaNode, r: &OutlineNode, found: &mut Option<Insertion>) -> Result<(), String> {
    if !same_label(&v.label, &r.label) {
        return Err(format!("expected entry {:?}, found {:?}", v.label, r.label));
    }
    let expandable = v.kind == NodeKind::Section && !v.folded;
    if !expandable {
        return match r.children.is_empty() {
            true => Ok(()),
            false => Err(format!("entry {:?} must not get children", v.label)),
        };
    }
    let n = v.children.len();
    if r.children.len() < n {
        return Err(format!("entries under {:?} were removed", v.label));
    }
    if r.children.len() > n + 1 {
        return Err(format!("more than one entry was added under {:?}", v.label));
    }
    for (vc, rc) in v.children.iter().zip(&r.children) {
        compare(vc, rc, found)?;
    }
    if let Some(extra) = r.children.get(n) {
        if found.is_some() {
            return Err("more than one new page was added".into());
        }
        let mut new_sections = Vec::new();
        let mut node = extra;
        while let Some(child) = node.children.first() {
            if node.children.len() > 1 {
                return Err(format!("new section {:?} holds more than one entry", node.label));
            }
            new_sections.push(node.label.clone());
            node = child;
        }
        *found = Some(Insertion { parent_id: v.node_id.clone(), new_sections });
    }
    Ok(())
}

/// Applies an insertion to the master agenda.
pub(crate) fn apply_insertion(master: &mut Agenda, ins: &Insertion, d: &Description) -> Result<String, AgendaError> {
    let mut chain = AgendaNode::leaf(d.page_index, d.text.clone());
    let ids: Vec<String> = ins.new_sections.iter().map(|_| master.fresh_section_id()).collect();
    for (label, id) in ins.new_sections.iter().zip(ids).rev() {
        chain = AgendaNode::section(id, label.clone()).with_children(vec![chain]);
    }
    let parent = master.find_mut(&ins.parent_id).ok_or_else(|| AgendaError::UnknownNode(ins.parent_id.clone()))?;
    parent.children.push(chain);
    master.leaf_count += 1;
    Ok(leaf_id(d.page_index))
}

/// Appends the page under the section holding the last leaf (the root for
/// an empty agenda).
pub fn fallback_insert(master: &mut Agenda, d: &Description) -> Result<String, AgendaError> {
    check_order(master, d)?;
    let parent_id = match master.last_leaf() {
        Some(last) => {
            let path = master.path_to(&last.node_id).expect("leaf is in the tree");
            master.node_at(&path[..path.len() - 1]).node_id.clone()
        }
        None => master.root.node_id.clone(),
    };
    apply_insertion(master, &Insertion { parent_id, new_sections: Vec::new() }, d)
}

fn check_order(master: &Agenda, d: &Description) -> Result<(), AgendaError> {
    if d.page_index != master.leaf_count {
        return Err(AgendaError::OutOfOrder { page: d.page_index, leaves: master.leaf_count });
    }
    Ok(())
}

/// The pruned view the model sees before page `d.page_index` is inserted.
pub(crate) fn view_for(master: &Agenda) -> Result<Agenda, AgendaError> {
    match master.last_leaf() {
        Some(last) => {
            let id = last.node_id.clone();
            prune(master, &id)
        }
        None => Ok(Agenda { root: AgendaNode { children: Vec::new(), ..master.root.clone() }, ..master.clone() }),
    }
}

pub(crate) fn segment_request(view: &Agenda, d: &Description, future: &[Description], cfg: &AgendaConfig, scope: &str) -> ModelRequest {
    let mut user = format!(
        "Current outline:\n{}\n\nNext slide (slide {}):\n{}",
        render_outline(view),
        d.page_index + 1,
        d.text
    );
    if !future.is_empty() {
        user.push_str("\n\nUpcoming slides, for orientation only:");
        for f in future {
            user.push_str(&format!("\n[slide {}] {}", f.page_index + 1, f.text));
        }
    }
    ModelRequest::new(Profile::Planner, prompts::segment(&cfg.language)).user(user).scope(scope).purpose("segment")
}

/// Inserts the page described by `d` into `master`.
///
/// The model sees the pruned view around the previous page. An invalid reply
/// is sent back with the reason, up to `cfg.segment_retries` times; after
/// that the page is appended under the last open section.
pub fn segment_step(
    master: &Agenda,
    d: &Description,
    future: &[Description],
    gateway: &Gateway,
    cfg: &AgendaConfig,
) -> Result<SegmentOutcome, AgendaError> {
    segment_counted(master, d, future, gateway, cfg, "", &mut 0)
}

pub(crate) fn segment_counted(
    master: &Agenda,
    d: &Description,
    future: &[Description],
    gateway: &Gateway,
    cfg: &AgendaConfig,
    scope: &str,
    calls: &mut usize,
) -> Result<SegmentOutcome, AgendaError> {
    check_order(master, d)?;
    let view = view_for(master)?;
    let future = &future[..future.len().min(cfg.context_pages)];
    let mut req = segment_request(&view, d, future, cfg, scope);
    let mut rejections = Vec::new();
    let mut attempts = 0;
    let mut agenda = master.clone();
    loop {
        attempts += 1;
        let reply = gateway.complete_counted(&req, calls)?.text;
        match validate_revision(&view, &reply) {
            Ok(ins) => {
                let leaf_id = apply_insertion(&mut agenda, &ins, d)?;
                return Ok(SegmentOutcome { agenda, leaf_id, attempts, rejections, fallback: false });
            }
            Err(reason) => {
                tracing::debug!(page = d.page_index, %reason, "segmentation reply rejected");
                if attempts > cfg.segment_retries {
                    rejections.push(reason);
                    let leaf_id = fallback_insert(&mut agenda, d)?;
                    return Ok(SegmentOutcome { agenda, leaf_id, attempts, rejections, fallback: true });
                }
                req = req.assistant(reply).user(format!(
                    "That outline was rejected: {reason}. Reply again with the complete outline, keeping every \
                     existing line unchanged and adding the next slide exactly once."
                ));
                rejections.push(reason);
            }
        }
    }
}
