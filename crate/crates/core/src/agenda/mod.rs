//! The tree-formed agenda: section nodes over page leaves.
//!
//! Building happens in two passes over the deck. First every page gets a
//! short description from the model ([`generate_description`]); then pages are
//! inserted one at a time ([`segment_step`]), each time showing the model only
//! the pruned neighbourhood of the previous insertion ([`prune`]) rendered as
//! a dash outline ([`render_outline`]). The full tree is kept as the master
//! copy; pruned trees exist only as prompt views.

mod build;
mod describe;
mod outline;
mod prune;
mod segment;

use serde::{Deserialize, Serialize};

use crate::gateway::GatewayError;
use crate::plan::TeachingAction;

pub use self::build::{build_agenda, AgendaBuild, BuildUnit};
pub use self::describe::{generate_description, normalize_description};
pub use self::outline::{normalize_outline, parse_outline, parse_outline_tree, render_outline, OutlineNode};
pub use self::prune::prune;
pub use self::segment::{fallback_insert, segment_step, validate_revision, Insertion, SegmentOutcome};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgendaConfig {
    /// Number of neighbouring pages given as context (k).
    pub context_pages: usize,
    /// Extra segmentation attempts after an invalid revision (R).
    pub segment_retries: u32,
    /// Hard cap on description length, in characters.
    pub description_cap: usize,
    /// Language the model is asked to write in.
    pub language: String,
}

impl Default for AgendaConfig {
    fn default() -> Self {
        AgendaConfig { context_pages: 3, segment_retries: 2, description_cap: 512, language: "English".into() }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum AgendaError {
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error("model returned an empty completion")]
    EmptyCompletion,
    #[error(transparent)]
    Ingest(#[from] crate::ingest::IngestError),
    #[error("malformed outline at line {line}: {reason}")]
    MalformedOutline { line: usize, reason: String },
    #[error("unknown agenda node {0}")]
    UnknownNode(String),
    #[error("page {page} cannot be inserted into an agenda with {leaves} leaves")]
    OutOfOrder { page: usize, leaves: usize },
    #[error("description for page {expected} expected, got page {got}")]
    DescriptionMismatch { expected: usize, got: usize },
}

/// Per-page summary used in place of the full page content while building
/// the agenda.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Description {
    pub page_index: usize,
    pub text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Section,
    Leaf,
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgendaNode {
    pub node_id: String,
    pub label: String,
    pub kind: NodeKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<AgendaNode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub page_index: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub actions: Vec<TeachingAction>,
    /// Set on sections whose children were dropped from a pruned view.
    #[serde(default, skip_serializing_if = "is_false")]
    pub folded: bool,
}

impl AgendaNode {
    pub fn section(node_id: impl Into<String>, label: impl Into<String>) -> Self {
        AgendaNode {
            node_id: node_id.into(),
            label: label.into(),
            kind: NodeKind::Section,
            children: Vec::new(),
            page_index: None,
            actions: Vec::new(),
            folded: false,
        }
    }

    pub fn leaf(page_index: usize, label: impl Into<String>) -> Self {
        AgendaNode {
            node_id: leaf_id(page_index),
            label: label.into(),
            kind: NodeKind::Leaf,
            children: Vec::new(),
            page_index: Some(page_index),
            actions: Vec::new(),
            folded: false,
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.kind == NodeKind::Leaf
    }

    pub fn with_children(mut self, children: Vec<AgendaNode>) -> Self {
        self.children = children;
        self
    }

    /// Leaves under this node in document order.
    pub fn leaves(&self) -> Vec<&AgendaNode> {
        let mut out = Vec::new();
        fn walk<'a>(n: &'a AgendaNode, out: &mut Vec<&'a AgendaNode>) {
            if n.is_leaf() {
                out.push(n);
            }
            for c in &n.children {
                walk(c, out);
            }
        }
        walk(self, &mut out);
        out
    }

    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(AgendaNode::node_count).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(AgendaNode::depth).max().unwrap_or(0)
    }
}

/// Node id for the leaf of page `index`.
pub fn leaf_id(index: usize) -> String {
    format!("p{index}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Agenda {
    pub root: AgendaNode,
    pub leaf_count: usize,
    /// Counter for fresh section ids.
    #[serde(default)]
    pub next_section: u64,
}

impl Agenda {
    /// The initial agenda: a root section labelled with the deck title.
    pub fn new(title: impl Into<String>) -> Self {
        Agenda { root: AgendaNode::section("root", title), leaf_count: 0, next_section: 1 }
    }

    /// Wraps an existing tree, recounting leaves and picking a fresh section
    /// counter.
    pub fn from_root(root: AgendaNode) -> Self {
        let leaf_count = root.leaves().len();
        let mut max_section = 0;
        fn scan(n: &AgendaNode, max: &mut u64) {
            if let Some(num) = n.node_id.strip_prefix('s').and_then(|s| s.parse::<u64>().ok()) {
                *max = (*max).max(num);
            }
            n.children.iter().for_each(|c| scan(c, max));
        }
        scan(&root, &mut max_section);
        Agenda { root, leaf_count, next_section: max_section + 1 }
    }

    pub fn title(&self) -> &str {
        &self.root.label
    }

    pub fn leaves(&self) -> Vec<&AgendaNode> {
        self.root.leaves()
    }

    pub fn last_leaf(&self) -> Option<&AgendaNode> {
        self.leaves().pop()
    }

    pub fn find(&self, node_id: &str) -> Option<&AgendaNode> {
        let path = self.path_to(node_id)?;
        Some(self.node_at(&path))
    }

    pub fn find_mut(&mut self, node_id: &str) -> Option<&mut AgendaNode> {
        let path = self.path_to(node_id)?;
        let mut node = &mut self.root;
        for &i in &path {
            node = &mut node.children[i];
        }
        Some(node)
    }

    /// Child indices leading from the root to `node_id`.
    pub fn path_to(&self, node_id: &str) -> Option<Vec<usize>> {
        fn walk(n: &AgendaNode, id: &str, path: &mut Vec<usize>) -> bool {
            if n.node_id == id {
                return true;
            }
            for (i, c) in n.children.iter().enumerate() {
                path.push(i);
                if walk(c, id, path) {
                    return true;
                }
                path.pop();
            }
            false
        }
        let mut path = Vec::new();
        walk(&self.root, node_id, &mut path).then_some(path)
    }

    pub fn node_at(&self, path: &[usize]) -> &AgendaNode {
        path.iter().fold(&self.root, |n, &i| &n.children[i])
    }

    /// Sections other than the root, children before parents, in document
    /// order.
    pub fn sections_post_order(&self) -> Vec<&AgendaNode> {
        let mut out = Vec::new();
        fn walk<'a>(n: &'a AgendaNode, out: &mut Vec<&'a AgendaNode>) {
            for c in &n.children {
                walk(c, out);
            }
            if !n.is_leaf() {
                out.push(n);
            }
        }
        for c in &self.root.children {
            walk(c, &mut out);
        }
        out
    }

    pub fn fresh_section_id(&mut self) -> String {
        let id = format!("s{}", self.next_section);
        self.next_section += 1;
        id
    }

    /// Checks the structural invariants of a master agenda.
    pub fn validate(&self) -> Result<(), String> {
        if self.root.is_leaf() {
            return Err("root must be a section".into());
        }
        if self.root.label.trim().is_empty() {
            return Err("root label is empty".into());
        }
        fn walk(n: &AgendaNode) -> Result<(), String> {
            match n.kind {
                NodeKind::Leaf if !n.children.is_empty() => Err(format!("leaf {} has children", n.node_id)),
                NodeKind::Leaf if n.page_index.is_none() => Err(format!("leaf {} has no page index", n.node_id)),
                NodeKind::Section if n.page_index.is_some() => Err(format!("section {} has a page index", n.node_id)),
                _ => n.children.iter().try_for_each(walk),
            }
        }
        walk(&self.root)?;
        let pages: Vec<usize> = self.leaves().iter().filter_map(|l| l.page_index).collect();
        if pages.windows(2).any(|w| w[0] >= w[1]) {
            return Err(format!("leaf pages are not strictly increasing: {pages:?}"));
        }
        if pages.len() != self.leaf_count {
            return Err(format!("leaf_count {} but {} leaves", self.leaf_count, pages.len()));
        }
        Ok(())
    }

    /// Structural shape ignoring node ids and actions: used to compare trees
    /// that were built along different paths.
    pub fn shape(&self) -> Shape {
        fn walk(n: &AgendaNode) -> Shape {
            Shape {
                label: n.label.clone(),
                kind: n.kind,
                page_index: n.page_index,
                children: n.children.iter().map(walk).collect(),
            }
        }
        walk(&self.root)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shape {
    pub label: String,
    pub kind: NodeKind,
    pub page_index: Option<usize>,
    pub children: Vec<Shape>,
}
