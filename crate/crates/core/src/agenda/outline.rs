//! Dash outlines: one node per line, depth given by the number of leading
//! dashes, e.g.
//!
//! ```text
//! - Course title
//! -- Section
//! --- description of page 0
//! ```

use super::{leaf_id, Agenda, AgendaError, AgendaNode};

/// Renders the tree, root at depth 1. Leaves render as their description,
/// folded sections as their bare label.
pub fn render_outline(agenda: &Agenda) -> String {
    let mut lines = Vec::with_capacity(agenda.root.node_count());
    fn walk(n: &AgendaNode, depth: usize, lines: &mut Vec<String>) {
        lines.push(format!("{} {}", "-".repeat(depth), n.label));
        for c in &n.children {
            walk(c, depth + 1, lines);
        }
    }
    walk(&agenda.root, 1, &mut lines);
    lines.join("\n")
}

/// An outline as plain labels, before kinds are assigned.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutlineNode {
    pub label: String,
    pub children: Vec<OutlineNode>,
}

fn malformed(line: usize, reason: impl Into<String>) -> AgendaError {
    AgendaError::MalformedOutline { line, reason: reason.into() }
}

/// Parses a dash outline into a label tree.
///
/// Blank lines and markdown code fences are skipped. The first line must be
/// the single depth-1 root, and depth may grow by at most one per line.
pub fn parse_outline_tree(text: &str) -> Result<OutlineNode, AgendaError> {
    let mut entries: Vec<(usize, String, usize)> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let lineno = n + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with("```") {
            continue;
        }
        let depth = line.chars().take_while(|&c| c == '-').count();
        if depth == 0 {
            return Err(malformed(lineno, "line does not start with '-'"));
        }
        let label = line[depth..].split_whitespace().collect::<Vec<_>>().join(" ");
        if label.is_empty() {
            return Err(malformed(lineno, "empty label"));
        }
        let prev = entries.last().map(|e| e.0);
        match prev {
            None if depth != 1 => return Err(malformed(lineno, "outline must start at depth 1")),
            Some(_) if depth == 1 => return Err(malformed(lineno, "outline has more than one root")),
            Some(p) if depth > p + 1 => {
                return Err(malformed(lineno, format!("depth jumps from {p} to {depth}")))
            }
            _ => {}
        }
        entries.push((depth, label, lineno));
    }
    if entries.is_empty() {
        return Err(malformed(0, "outline is empty"));
    }

    // Stack of open nodes; index i holds the node at depth i+1.
    let mut stack: Vec<OutlineNode> = Vec::new();
    for (depth, label, _) in entries {
        while stack.len() >= depth {
            let done = stack.pop().expect("non-empty");
            stack.last_mut().expect("root stays open").children.push(done);
        }
        stack.push(OutlineNode { label, children: Vec::new() });
    }
    while stack.len() > 1 {
        let done = stack.pop().expect("non-empty");
        stack.last_mut().expect("root").children.push(done);
    }
    Ok(stack.pop().expect("root"))
}

/// Parses a dash outline into an agenda. Childless non-root lines become
/// leaves for pages 0, 1, ... in order; every other line is a section.
pub fn parse_outline(text: &str) -> Result<Agenda, AgendaError> {
    let tree = parse_outline_tree(text)?;
    let mut next_page = 0;
    let mut next_section = 1;
    fn convert(n: OutlineNode, is_root: bool, next_page: &mut usize, next_section: &mut u64) -> AgendaNode {
        if !is_root && n.children.is_empty() {
            let node = AgendaNode::leaf(*next_page, n.label);
            *next_page += 1;
            return node;
        }
        let id = if is_root {
            "root".to_string()
        } else {
            let id = format!("s{next_section}");
            *next_section += 1;
            id
        };
        let children = n.children.into_iter().map(|c| convert(c, false, next_page, next_section)).collect();
        AgendaNode::section(id, n.label).with_children(children)
    }
    let root = convert(tree, true, &mut next_page, &mut next_section);
    debug_assert_eq!(root.leaves().first().map(|l| l.node_id.clone()).unwrap_or_else(|| leaf_id(0)), leaf_id(0));
    Ok(Agenda::from_root(root))
}

/// Canonical text of an outline: one `<dashes> <label>` line per node.
pub fn normalize_outline(text: &str) -> Result<String, AgendaError> {
    let tree = parse_outline_tree(text)?;
    let mut lines = Vec::new();
    fn walk(n: &OutlineNode, depth: usize, lines: &mut Vec<String>) {
        lines.push(format!("{} {}", "-".repeat(depth), n.label));
        n.children.iter().for_each(|c| walk(c, depth + 1, lines));
    }
    walk(&tree, 1, &mut lines);
    Ok(lines.join("\n"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agenda::tests::sample;

    #[test]
    fn single_leaf_rendering() {
        let root = AgendaNode::section("root", "Course").with_children(vec![AgendaNode::leaf(0, "Intro to AI.")]);
        assert_eq!(render_outline(&Agenda::from_root(root)), "- Course\n-- Intro to AI.");
    }

    #[test]
    fn renders_nested_sections() {
        assert_eq!(render_outline(&sample()), "- Course\n-- Intro\n--- d0\n--- d1\n-- Body\n--- d2");
    }

    #[test]
    fn two_siblings() {
        let a = parse_outline("- T\n-- A\n-- B").unwrap();
        assert_eq!(a.title(), "T");
        let labels: Vec<_> = a.root.children.iter().map(|c| c.label.as_str()).collect();
        assert_eq!(labels, ["A", "B"]);
        assert_eq!(a.leaf_count, 2);
        assert_eq!(a.root.children[1].page_index, Some(1));
    }

    #[test]
    fn depth_jump_is_malformed() {
        assert!(matches!(parse_outline("- T\n--- A"), Err(AgendaError::MalformedOutline { line: 2, .. })));
    }

    #[test]
    fn other_malformations() {
        for bad in ["", "T\n-- A", "- T\n-- ", "- T\n- U", "-- T", "- T\nA"] {
            assert!(matches!(parse_outline(bad), Err(AgendaError::MalformedOutline { .. })), "{bad:?}");
        }
    }

    #[test]
    fn tolerates_fences_blank_lines_and_indentation() {
        let text = "```\n- T\n\n  -- A\n--   spaced   label \n```";
        assert_eq!(normalize_outline(text).unwrap(), "- T\n-- A\n-- spaced label");
    }

    #[test]
    fn labels_may_start_with_a_dash_after_the_space() {
        let a = parse_outline("- T\n-- -1 is negative").unwrap();
        assert_eq!(a.root.children[0].label, "-1 is negative");
        assert_eq!(render_outline(&a), "- T\n-- -1 is negative");
    }

    #[test]
    fn round_trip_sample() {
        let a = sample();
        let parsed = parse_outline(&render_outline(&a)).unwrap();
        assert_eq!(parsed.shape(), a.shape());
    }
}
