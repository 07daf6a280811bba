//! Teaching actions and the serialized action queue.

use std::collections::BTreeSet;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

pub const MIN_OPTIONS: usize = 2;
pub const MAX_OPTIONS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuestionType {
    SingleChoice,
    MultipleChoice,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QaError {
    #[error("question text is empty")]
    EmptyQuestion,
    #[error("{0} options given; between 2 and 6 are allowed")]
    OptionCount(usize),
    #[error("option {0} is empty")]
    EmptyOption(usize),
    #[error("answer is empty")]
    NoAnswer,
    #[error("answer index {index} is out of range for {options} options")]
    AnswerOutOfRange { index: usize, options: usize },
    #[error("single-choice question has {0} answers")]
    SingleChoiceArity(usize),
}

/// A quiz question. Construct with [`QAItem::new`]; deserialization runs the
/// same validation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawQa")]
pub struct QAItem {
    pub question: String,
    pub question_type: QuestionType,
    pub options: Vec<String>,
    pub answer: BTreeSet<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
}

#[derive(Deserialize)]
struct RawQa {
    question: String,
    question_type: QuestionType,
    options: Vec<String>,
    answer: BTreeSet<usize>,
    #[serde(default)]
    reference: Option<String>,
}

impl TryFrom<RawQa> for QAItem {
    type Error = QaError;

    fn try_from(r: RawQa) -> Result<Self, QaError> {
        QAItem::new(r.question, r.question_type, r.options, r.answer, r.reference)
    }
}

impl QAItem {
    pub fn new(
        question: impl Into<String>,
        question_type: QuestionType,
        options: Vec<String>,
        answer: impl IntoIterator<Item = usize>,
        reference: Option<String>,
    ) -> Result<Self, QaError> {
        let qa = QAItem {
            question: question.into(),
            question_type,
            options,
            answer: answer.into_iter().collect(),
            reference,
        };
        qa.validate()?;
        Ok(qa)
    }

    pub fn validate(&self) -> Result<(), QaError> {
        if self.question.trim().is_empty() {
            return Err(QaError::EmptyQuestion);
        }
        if !(MIN_OPTIONS..=MAX_OPTIONS).contains(&self.options.len()) {
            return Err(QaError::OptionCount(self.options.len()));
        }
        if let Some(i) = self.options.iter().position(|o| o.trim().is_empty()) {
            return Err(QaError::EmptyOption(i));
        }
        if self.answer.is_empty() {
            return Err(QaError::NoAnswer);
        }
        if let Some(&index) = self.answer.iter().find(|&&i| i >= self.options.len()) {
            return Err(QaError::AnswerOutOfRange { index, options: self.options.len() });
        }
        if self.question_type == QuestionType::SingleChoice && self.answer.len() != 1 {
            return Err(QaError::SingleChoiceArity(self.answer.len()));
        }
        Ok(())
    }

    /// Option letter for an index: 0 → 'A'.
    pub fn letter(index: usize) -> char {
        (b'A' + index as u8) as char
    }
}

/// The kind tag of an action.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ActionKind {
    ShowFile,
    ReadScript,
    AskQuestion,
    /// Extension tag registered by an integrator.
    Custom(String),
}

impl ActionKind {
    pub fn as_str(&self) -> &str {
        match self {
            ActionKind::ShowFile => "ShowFile",
            ActionKind::ReadScript => "ReadScript",
            ActionKind::AskQuestion => "AskQuestion",
            ActionKind::Custom(tag) => tag,
        }
    }
}

impl std::fmt::Display for ActionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ActionValue {
    /// Index of the page to display.
    ShowFile(usize),
    ReadScript(String),
    AskQuestion(QAItem),
    Custom { kind: String, value: Value },
}

/// A `(kind, value)` unit of classroom behaviour, tagged with the agenda
/// leaf it was planned for.
#[derive(Debug, Clone, PartialEq)]
pub struct TeachingAction {
    pub value: ActionValue,
    pub origin_leaf: String,
}

impl TeachingAction {
    pub fn show_file(page_index: usize, origin_leaf: impl Into<String>) -> Self {
        TeachingAction { value: ActionValue::ShowFile(page_index), origin_leaf: origin_leaf.into() }
    }

    pub fn read_script(script: impl Into<String>, origin_leaf: impl Into<String>) -> Self {
        TeachingAction { value: ActionValue::ReadScript(script.into()), origin_leaf: origin_leaf.into() }
    }

    pub fn ask_question(qa: QAItem, origin_leaf: impl Into<String>) -> Self {
        TeachingAction { value: ActionValue::AskQuestion(qa), origin_leaf: origin_leaf.into() }
    }

    pub fn kind(&self) -> ActionKind {
        match &self.value {
            ActionValue::ShowFile(_) => ActionKind::ShowFile,
            ActionValue::ReadScript(_) => ActionKind::ReadScript,
            ActionValue::AskQuestion(_) => ActionKind::AskQuestion,
            ActionValue::Custom { kind, .. } => ActionKind::Custom(kind.clone()),
        }
    }

    pub fn page_index(&self) -> Option<usize> {
        match self.value {
            ActionValue::ShowFile(p) => Some(p),
            _ => None,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct RawAction {
    kind: String,
    value: Value,
    origin_leaf: String,
}

impl Serialize for TeachingAction {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let value = match &self.value {
            ActionValue::ShowFile(p) => Value::from(*p),
            ActionValue::ReadScript(text) => Value::from(text.as_str()),
            ActionValue::AskQuestion(qa) => serde_json::to_value(qa).map_err(serde::ser::Error::custom)?,
            ActionValue::Custom { value, .. } => value.clone(),
        };
        RawAction { kind: self.kind().as_str().to_string(), value, origin_leaf: self.origin_leaf.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for TeachingAction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let raw = RawAction::deserialize(d)?;
        let value = match raw.kind.as_str() {
            "ShowFile" => ActionValue::ShowFile(
                raw.value.as_u64().ok_or_else(|| D::Error::custom("ShowFile value must be a page index"))? as usize,
            ),
            "ReadScript" => ActionValue::ReadScript(
                raw.value.as_str().ok_or_else(|| D::Error::custom("ReadScript value must be text"))?.to_string(),
            ),
            "AskQuestion" => ActionValue::AskQuestion(serde_json::from_value(raw.value).map_err(D::Error::custom)?),
            _ => ActionValue::Custom { kind: raw.kind, value: raw.value },
        };
        Ok(TeachingAction { value, origin_leaf: raw.origin_leaf })
    }
}

/// The flattened lecture plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionQueue {
    pub lecture_id: String,
    pub revision: u64,
    /// Pages in the deck; ShowFile values must be below this.
    pub page_count: usize,
    pub actions: Vec<TeachingAction>,
}

impl ActionQueue {
    /// The exported form: a bare JSON array of `{kind, value, origin_leaf}`.
    pub fn export_json(&self) -> Value {
        serde_json::to_value(&self.actions).expect("actions serialize")
    }

    pub fn count(&self, kind: &ActionKind) -> usize {
        self.actions.iter().filter(|a| &a.kind() == kind).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qa_invariants() {
        let opts = |n: usize| (0..n).map(|i| format!("o{i}")).collect::<Vec<_>>();
        assert!(QAItem::new("q", QuestionType::SingleChoice, opts(4), [1], None).is_ok());
        assert_eq!(
            QAItem::new("q", QuestionType::SingleChoice, opts(4), [0, 1], None).unwrap_err(),
            QaError::SingleChoiceArity(2)
        );
        assert_eq!(
            QAItem::new("q", QuestionType::MultipleChoice, opts(5), [7], None).unwrap_err(),
            QaError::AnswerOutOfRange { index: 7, options: 5 }
        );
        assert_eq!(QAItem::new("q", QuestionType::MultipleChoice, opts(1), [0], None).unwrap_err(), QaError::OptionCount(1));
        assert_eq!(QAItem::new("q", QuestionType::MultipleChoice, opts(7), [0], None).unwrap_err(), QaError::OptionCount(7));
        assert_eq!(QAItem::new("q", QuestionType::MultipleChoice, opts(3), [], None).unwrap_err(), QaError::NoAnswer);
        assert_eq!(QAItem::new(" ", QuestionType::MultipleChoice, opts(3), [0], None).unwrap_err(), QaError::EmptyQuestion);
    }

    #[test]
    fn invalid_qa_json_is_rejected() {
        let bad = r#"{"question":"q","question_type":"single_choice","options":["a","b"],"answer":[0,1]}"#;
        assert!(serde_json::from_str::<QAItem>(bad).is_err());
    }

    #[test]
    fn action_json_shape() {
        let a = TeachingAction::show_file(30, "p30");
        let v = serde_json::to_value(&a).unwrap();
        assert_eq!(v, serde_json::json!({"kind":"ShowFile","value":30,"origin_leaf":"p30"}));
        let back: TeachingAction = serde_json::from_value(v).unwrap();
        assert_eq!(back, a);

        let custom: TeachingAction =
            serde_json::from_str(r#"{"kind":"PlayVideo","value":{"url":"x"},"origin_leaf":"p1"}"#).unwrap();
        assert_eq!(custom.kind(), ActionKind::Custom("PlayVideo".into()));
        assert_eq!(serde_json::to_value(&custom).unwrap()["value"]["url"], "x");
    }
}
