use serde::{Deserialize, Serialize};

/// Pipeline position of a lecture. Only ever moves forward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LectureStatus {
    Ingested,
    Described,
    Segmented,
    Planned,
    Published,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanningState {
    #[default]
    Idle,
    Running,
    Failed,
    Done,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanningProgress {
    pub state: PlanningState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stage: Option<String>,
    /// Model calls made so far, failed attempts included.
    #[serde(default)]
    pub calls: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LectureRecord {
    pub lecture_id: String,
    pub title: String,
    pub status: LectureStatus,
    pub deck_id: String,
    pub page_count: usize,
    pub created_ms: u64,
    pub planning: PlanningProgress,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub queue_revision: Option<u64>,
}

impl LectureRecord {
    /// Moves the status forward to `status`; never backwards.
    pub fn advance(&mut self, status: LectureStatus) {
        self.status = self.status.max(status);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_is_monotone() {
        let mut r = LectureRecord {
            lecture_id: "l".into(),
            title: "t".into(),
            status: LectureStatus::Ingested,
            deck_id: "d".into(),
            page_count: 1,
            created_ms: 0,
            planning: PlanningProgress::default(),
            queue_revision: None,
        };
        r.advance(LectureStatus::Segmented);
        r.advance(LectureStatus::Described);
        assert_eq!(r.status, LectureStatus::Segmented);
        assert!(LectureStatus::Ingested < LectureStatus::Described && LectureStatus::Planned < LectureStatus::Published);
    }
}
