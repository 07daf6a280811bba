//! Random agendas and an independent prune oracle.

use std::collections::HashSet;

use lectern::agenda::{Agenda, AgendaNode, NodeKind};
use rand::seq::SliceRandom;
use rand::Rng;

const WORDS: &[&str] = &["Intro", "Methods", "Results", "Überblick", "数据", "Loss", "Trees", "Intro", "Review", "k-means"];

fn label(rng: &mut impl Rng) -> String {
    let n = rng.gen_range(1..=3);
    (0..n).map(|_| *WORDS.choose(rng).unwrap()).collect::<Vec<_>>().join(" ")
}

/// Up to `max_nodes` nodes including the root, at most `max_depth` levels
/// below it. With `full`, every non-root section has at least one child.
pub fn random_agenda(rng: &mut impl Rng, max_nodes: usize, max_depth: usize, full: bool) -> Agenda {
    // (parent, depth, is_section)
    let mut nodes: Vec<(Option<usize>, usize, bool)> = vec![(None, 0, true)];
    let target = rng.gen_range(1..=max_nodes);
    while nodes.len() < target {
        let open: Vec<usize> = (0..nodes.len()).filter(|&i| nodes[i].2 && nodes[i].1 < max_depth).collect();
        let parent = *open.choose(rng).unwrap();
        let depth = nodes[parent].1 + 1;
        let section = depth < max_depth && rng.gen_bool(0.35);
        nodes.push((Some(parent), depth, section));
    }
    if full {
        for i in 1..nodes.len() {
            if nodes[i].2 && !nodes.iter().any(|n| n.0 == Some(i)) {
                nodes[i].2 = false;
            }
        }
    }
    let mut next_page = 0;
    let mut next_section = 1;
    fn build(i: usize, nodes: &[(Option<usize>, usize, bool)], rng: &mut impl Rng, page: &mut usize, sec: &mut usize) -> AgendaNode {
        if i == 0 {
            let children = kids(i, nodes, rng, page, sec);
            return AgendaNode::section("root", "Course").with_children(children);
        }
        if nodes[i].2 {
            let id = format!("s{sec}");
            *sec += 1;
            let l = label(rng);
            let children = kids(i, nodes, rng, page, sec);
            AgendaNode::section(id, l).with_children(children)
        } else {
            let n = AgendaNode::leaf(*page, label(rng));
            *page += 1;
            n
        }
    }
    fn kids(i: usize, nodes: &[(Option<usize>, usize, bool)], rng: &mut impl Rng, page: &mut usize, sec: &mut usize) -> Vec<AgendaNode> {
        (0..nodes.len()).filter(|&j| nodes[j].0 == Some(i)).map(|j| build(j, nodes, rng, page, sec)).collect()
    }
    Agenda::from_root(build(0, &nodes, rng, &mut next_page, &mut next_section))
}

pub struct Flat {
    pub id: String,
    pub parent: Option<usize>,
    pub kind: NodeKind,
}

pub fn flatten(agenda: &Agenda) -> Vec<Flat> {
    fn walk(n: &AgendaNode, parent: Option<usize>, out: &mut Vec<Flat>) {
        let me = out.len();
        out.push(Flat { id: n.node_id.clone(), parent, kind: n.kind });
        for c in &n.children {
            walk(c, Some(me), out);
        }
    }
    let mut out = Vec::new();
    walk(&agenda.root, None, &mut out);
    out
}

/// Ids the view around `target` must hold, in document order: the root,
/// the target and its ancestors, and every child of a kept ancestor's
/// parent.
pub fn keep_set(agenda: &Agenda, target: &str) -> Vec<String> {
    let flat = flatten(agenda);
    let t = flat.iter().position(|f| f.id == target).unwrap();
    let mut ancestors = vec![t];
    while let Some(p) = flat[*ancestors.last().unwrap()].parent {
        ancestors.push(p);
    }
    let mut keep: HashSet<usize> = ancestors.iter().copied().collect();
    for &a in &ancestors {
        if let Some(p) = flat[a].parent {
            keep.extend((0..flat.len()).filter(|&j| flat[j].parent == Some(p)));
        }
    }
    (0..flat.len()).filter(|i| keep.contains(i)).map(|i| flat[i].id.clone()).collect()
}

/// The bound on view size: path length plus the siblings of every ancestor.
pub fn view_bound(agenda: &Agenda, target: &str) -> usize {
    let flat = flatten(agenda);
    let mut i = flat.iter().position(|f| f.id == target).unwrap();
    let mut bound = 1;
    while let Some(p) = flat[i].parent {
        bound += 1 + flat.iter().filter(|f| f.parent == Some(p)).count() - 1;
        i = p;
    }
    bound
}

pub fn ids(agenda: &Agenda) -> Vec<String> {
    flatten(agenda).into_iter().map(|f| f.id).collect()
}
