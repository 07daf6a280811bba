use super::{Agenda, AgendaError, AgendaNode, NodeKind};

/// Context-reduced view of `agenda` around `new_leaf`.
///
/// Keeps the root, every ancestor of `new_leaf` (the node itself included),
/// and the direct siblings of each kept ancestor. Kept siblings lose their
/// children and, if they are sections, are marked folded. Order is preserved.
pub fn prune(agenda: &Agenda, new_leaf: &str) -> Result<Agenda, AgendaError> {
    let path = agenda.path_to(new_leaf).ok_or_else(|| AgendaError::UnknownNode(new_leaf.to_string()))?;
    let root = keep(&agenda.root, &path);
    let leaf_count = root.leaves().len();
    Ok(Agenda { root, leaf_count, next_section: agenda.next_section })
}

fn keep(node: &AgendaNode, path: &[usize]) -> AgendaNode {
    let mut out = AgendaNode { children: Vec::new(), ..node.clone() };
    match path.split_first() {
        Some((&next, rest)) => {
            out.folded = false;
            out.children = node
                .children
                .iter()
                .enumerate()
                .map(|(i, c)| if i == next { keep(c, rest) } else { fold(c) })
                .collect();
        }
        // the target itself: its own descendants are not part of the view
        None => out.folded = node.kind == NodeKind::Section,
    }
    out
}

fn fold(node: &AgendaNode) -> AgendaNode {
    AgendaNode { children: Vec::new(), folded: node.kind == NodeKind::Section, ..node.clone() }
}
