use serde::{Deserialize, Serialize};

use super::describe::generate_counted;
use super::segment::segment_counted;
use super::{Agenda, AgendaConfig, AgendaError, Description};
use crate::gateway::Gateway;
use crate::ingest::SlideDeck;

/// The next piece of work in an agenda build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "unit", content = "page", rename_all = "snake_case")]
pub enum BuildUnit {
    Describe(usize),
    Segment(usize),
    Done,
}

/// Per-page record of how segmentation went.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentRecord {
    pub page_index: usize,
    pub attempts: u32,
    pub fallback: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rejections: Vec<String>,
}

/// Resumable agenda build. Serialize it after every [`AgendaBuild::advance`]
/// to be able to pick up after a crash.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgendaBuild {
    pub deck_id: String,
    pub page_count: usize,
    pub descriptions: Vec<Description>,
    /// Master agenda; holds leaves for every segmented page.
    pub agenda: Agenda,
    pub segments: Vec<SegmentRecord>,
    /// Backend attempts consumed so far, including failed ones.
    pub calls: usize,
}

impl AgendaBuild {
    pub fn new(deck: &SlideDeck) -> Self {
        AgendaBuild {
            deck_id: deck.deck_id.clone(),
            page_count: deck.pages.len(),
            descriptions: Vec::new(),
            agenda: Agenda::new(deck.title.clone()),
            segments: Vec::new(),
            calls: 0,
        }
    }

    pub fn next_unit(&self) -> BuildUnit {
        if self.descriptions.len() < self.page_count {
            BuildUnit::Describe(self.descriptions.len())
        } else if self.agenda.leaf_count < self.page_count {
            BuildUnit::Segment(self.agenda.leaf_count)
        } else {
            BuildUnit::Done
        }
    }

    pub fn is_done(&self) -> bool {
        self.next_unit() == BuildUnit::Done
    }

    /// Performs one unit of work (one page description, or one page
    /// insertion including its retries). On error the state is unchanged
    /// apart from `calls`.
    pub fn advance(&mut self, deck: &SlideDeck, gateway: &Gateway, cfg: &AgendaConfig) -> Result<BuildUnit, AgendaError> {
        let unit = self.next_unit();
        match unit {
            BuildUnit::Describe(i) => {
                let page = &deck.pages[i];
                let d = generate_counted(page, &self.descriptions, gateway, cfg, &self.deck_id, &mut self.calls)?;
                if d.page_index != i {
                    return Err(AgendaError::DescriptionMismatch { expected: i, got: d.page_index });
                }
                self.descriptions.push(d);
            }
            BuildUnit::Segment(i) => {
                let end = (i + 1 + cfg.context_pages).min(self.descriptions.len());
                let future = &self.descriptions[i + 1..end];
                let out = segment_counted(
                    &self.agenda,
                    &self.descriptions[i],
                    future,
                    gateway,
                    cfg,
                    &self.deck_id,
                    &mut self.calls,
                )?;
                self.agenda = out.agenda;
                self.segments.push(SegmentRecord {
                    page_index: i,
                    attempts: out.attempts,
                    fallback: out.fallback,
                    rejections: out.rejections,
                });
            }
            BuildUnit::Done => {}
        }
        Ok(unit)
    }
}

/// Describes then segments every page of `deck`, calling `checkpoint` after
/// each unit of work. Returns the master agenda.
pub fn build_agenda(
    deck: &SlideDeck,
    gateway: &Gateway,
    cfg: &AgendaConfig,
    mut checkpoint: impl FnMut(&AgendaBuild),
) -> Result<Agenda, AgendaError> {
    let mut build = AgendaBuild::new(deck);
    while !build.is_done() {
        build.advance(deck, gateway, cfg)?;
        checkpoint(&build);
    }
    Ok(build.agenda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agenda::render_outline;
    use crate::gateway::{ScriptEntry, ScriptedBackend};
    use crate::ingest::{Page, PageImage};

    fn deck(n: usize) -> SlideDeck {
        SlideDeck {
            deck_id: "d".into(),
            title: "Course".into(),
            pages: (0..n)
                .map(|i| Page {
                    index: i,
                    page_id: format!("slide{}", i + 1),
                    text_blocks: vec![format!("t{i}")],
                    image: Some(PageImage { width: 1, height: 1, png: vec![0] }),
                })
                .collect(),
        }
    }

    #[test]
    fn one_page_deck() {
        let g = Gateway::scripted(ScriptedBackend::new(
            "t",
            vec![ScriptEntry::reply("Welcome."), ScriptEntry::reply("- Course\n-- Welcome.")],
        ));
        let mut seen = Vec::new();
        let agenda = build_agenda(&deck(1), &g, &AgendaConfig::default(), |b| seen.push(b.next_unit())).unwrap();
        assert_eq!(render_outline(&agenda), "- Course\n-- Welcome.");
        assert_eq!(agenda.leaf_count, 1);
        assert_eq!(seen, [BuildUnit::Segment(0), BuildUnit::Done]);
    }

    #[test]
    fn failure_keeps_state_but_counts_calls() {
        let g = Gateway::scripted(ScriptedBackend::new("t", vec![ScriptEntry::reply("")]));
        let d = deck(2);
        let mut b = AgendaBuild::new(&d);
        assert!(b.advance(&d, &g, &AgendaConfig::default()).is_err());
        assert_eq!(b.next_unit(), BuildUnit::Describe(0));
        assert_eq!(b.calls, 1);
    }
}
