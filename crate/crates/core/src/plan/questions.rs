//! Parser for the quiz layout requested from the model:
//!
//! ```text
//! Question: <text> (single choice)
//! A. <option>
//! B. <option>
//! Answer: B
//! Reference Text: <excerpt>
//! ```
//!
//! Parsing is tolerant: markdown bold, numbering before `Question`, `)` or
//! `:` after option letters, and wrapped lines are accepted. Each block is
//! validated on its own so one bad block does not sink the others.

use serde::{Deserialize, Serialize};

use super::action::{QAItem, QuestionType};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockError {
    /// Zero-based index of the block within the reply.
    pub block: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QuestionParse {
    pub items: Vec<QAItem>,
    pub failures: Vec<BlockError>,
}

#[derive(Default)]
struct Draft {
    question: String,
    options: Vec<String>,
    answer: Option<String>,
    reference: Option<String>,
    field: Field,
    out_of_sequence: bool,
}

#[derive(Default, Clone, Copy, PartialEq)]
enum Field {
    #[default]
    Question,
    Option,
    Answer,
    Reference,
}

fn strip_label<'a>(line: &'a str, labels: &[&str]) -> Option<&'a str> {
    for label in labels {
        if line.get(..label.len()).is_some_and(|head| head.eq_ignore_ascii_case(label)) {
            let rest = line[label.len()..].trim_start();
            if let Some(rest) = rest.strip_prefix(':').or_else(|| rest.strip_prefix('：')) {
                return Some(rest.trim());
            }
        }
    }
    None
}

fn question_line(line: &str) -> Option<&str> {
    // "1. Question:" / "Question 1:" / "Q:"
    let unnumbered = line.trim_start_matches(|c: char| c.is_ascii_digit()).trim_start_matches(['.', ')']).trim_start();
    let after = if unnumbered.get(..8).is_some_and(|head| head.eq_ignore_ascii_case("question")) {
        unnumbered[8..].trim_start_matches(|c: char| c.is_ascii_digit() || c == ' ')
    } else if unnumbered.starts_with('Q') && !unnumbered[1..].starts_with(char::is_alphabetic) {
        unnumbered[1..].trim_start_matches(|c: char| c.is_ascii_digit() || c == ' ')
    } else {
        return None;
    };
    after.strip_prefix(':').or_else(|| after.strip_prefix('：')).map(str::trim)
}

fn option_line(line: &str) -> Option<(usize, &str)> {
    let mut chars = line.chars();
    let letter = chars.next()?;
    if !letter.is_ascii_uppercase() {
        return None;
    }
    let rest = chars.as_str();
    let rest = rest.strip_prefix(['.', ')', ':', '、', '．']).or_else(|| rest.strip_prefix("）"))?;
    Some(((letter as u8 - b'A') as usize, rest.trim()))
}

/// Letters at the start of an answer line: "A", "A, C", "A and B", "AB.".
fn answer_letters(text: &str) -> Vec<usize> {
    let mut out = Vec::new();
    for token in text.split([',', ' ', '、', '/', ';', '&', '，']).filter(|t| !t.is_empty()) {
        let token = token.trim_end_matches(['.', ')']).trim_start_matches('(');
        if token.eq_ignore_ascii_case("and") {
            continue;
        }
        if !token.is_empty() && token.len() <= 6 && token.chars().all(|c| c.is_ascii_uppercase()) {
            out.extend(token.bytes().map(|b| (b - b'A') as usize));
        } else {
            break;
        }
    }
    out
}

/// Removes a "(single choice)" / "(multiple choice)" marker, returning it.
fn take_marker(question: &str) -> (String, Option<QuestionType>) {
    let lower = question.to_ascii_lowercase();
    for (needle, ty) in [("single", QuestionType::SingleChoice), ("multiple", QuestionType::MultipleChoice)] {
        let Some(start) = lower.rfind('(') else { break };
        let Some(len) = lower[start..].find(')') else { break };
        let inner = lower[start + 1..start + len].trim().replace(['-', '_'], " ");
        if inner.starts_with(needle) && inner.ends_with("choice") {
            let mut q = question[..start].to_string();
            q.push_str(&question[start + len + 1..]);
            return (q.split_whitespace().collect::<Vec<_>>().join(" "), Some(ty));
        }
    }
    (question.to_string(), None)
}

impl Draft {
    fn finish(self) -> Result<QAItem, String> {
        let (question, marker) = take_marker(self.question.trim());
        let answer_text = self.answer.ok_or("no Answer line")?;
        let answer = answer_letters(&answer_text);
        if answer.is_empty() {
            return Err(format!("no option letters in answer {answer_text:?}"));
        }
        let question_type = marker.unwrap_or(if answer.len() == 1 {
            QuestionType::SingleChoice
        } else {
            QuestionType::MultipleChoice
        });
        let reference = self.reference.map(|r| r.trim().to_string()).filter(|r| !r.is_empty());
        QAItem::new(question, question_type, self.options, answer, reference).map_err(|e| e.to_string())
    }

    fn append(&mut self, line: &str) {
        let target = match self.field {
            Field::Question => &mut self.question,
            Field::Option => self.options.last_mut().expect("option field implies an option"),
            Field::Answer => self.answer.get_or_insert_with(String::new),
            Field::Reference => self.reference.get_or_insert_with(String::new),
        };
        if !target.is_empty() {
            target.push(' ');
        }
        target.push_str(line);
    }
}

/// Parses every question block in `text`. Text before the first `Question:`
/// line is ignored.
pub fn parse_question_block(text: &str) -> QuestionParse {
    let mut drafts: Vec<Draft> = Vec::new();
    for raw in text.lines() {
        let line = raw.replace("**", "");
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(q) = question_line(line) {
            drafts.push(Draft { question: q.to_string(), ..Default::default() });
            continue;
        }
        let Some(draft) = drafts.last_mut() else { continue };
        if let Some(a) = strip_label(line, &["answers", "answer", "correct answer"]) {
            draft.answer = Some(a.to_string());
            draft.field = Field::Answer;
        } else if let Some(r) = strip_label(line, &["reference text", "reference"]) {
            draft.reference = Some(r.to_string());
            draft.field = Field::Reference;
        } else if let Some((i, opt)) = option_line(line).filter(|_| draft.answer.is_none() && draft.reference.is_none()) {
            draft.out_of_sequence |= i != draft.options.len();
            draft.options.push(opt.to_string());
            draft.field = Field::Option;
        } else {
            draft.append(line);
        }
    }

    let mut out = QuestionParse::default();
    for (block, draft) in drafts.into_iter().enumerate() {
        if draft.out_of_sequence {
            out.failures.push(BlockError { block, reason: "option letters are out of sequence".into() });
            continue;
        }
        match draft.finish() {
            Ok(item) => out.items.push(item),
            Err(reason) => out.failures.push(BlockError { block, reason }),
        }
    }
    out
}

/// Renders a question in the same layout the parser reads.
pub fn render_question(qa: &QAItem) -> String {
    let marker = match qa.question_type {
        QuestionType::SingleChoice => "single choice",
        QuestionType::MultipleChoice => "multiple choice",
    };
    let mut s = format!("Question: {} ({marker})\n", qa.question);
    for (i, o) in qa.options.iter().enumerate() {
        s.push_str(&format!("{}. {o}\n", QAItem::letter(i)));
    }
    let letters: Vec<String> = qa.answer.iter().map(|&i| QAItem::letter(i).to_string()).collect();
    s.push_str(&format!("Answer: {}", letters.join(", ")));
    if let Some(r) = &qa.reference {
        s.push_str(&format!("\nReference Text: {r}"));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_block() {
        let text = "Question: What is 2+2? (single choice)\nA. 3\nB. 4\nC. 5\nAnswer: B\nReference Text: basic sums";
        let p = parse_question_block(text);
        assert!(p.failures.is_empty());
        let q = &p.items[0];
        assert_eq!(q.question, "What is 2+2?");
        assert_eq!(q.question_type, QuestionType::SingleChoice);
        assert_eq!(q.options, ["3", "4", "5"]);
        assert_eq!(q.answer.iter().copied().collect::<Vec<_>>(), [1]);
        assert_eq!(q.reference.as_deref(), Some("basic sums"));
    }

    #[test]
    fn empty_text() {
        assert_eq!(parse_question_block(""), QuestionParse::default());
        assert_eq!(parse_question_block("no questions here").items.len(), 0);
    }

    #[test]
    fn tolerant_layouts() {
        let text = "Here you go:\n\n**Question 1:** Pick primes (multiple-choice)\nA) 2\nB) 3\nC) 4\n**Answer:** A and B\n\n\
                    2. Question: Wrapped\nquestion text?\nA. yes\nB. no\nAnswer: A. yes";
        let p = parse_question_block(text);
        assert!(p.failures.is_empty(), "{:?}", p.failures);
        assert_eq!(p.items[0].question, "Pick primes");
        assert_eq!(p.items[0].answer.len(), 2);
        assert_eq!(p.items[1].question, "Wrapped question text?");
        assert_eq!(p.items[1].question_type, QuestionType::SingleChoice);
    }

    #[test]
    fn bad_block_does_not_sink_others() {
        let text = "Question: q1 (multiple choice)\nA. a\nB. b\nC. c\nD. d\nE. e\nAnswer: H\n\n\
                    Question: q2\nA. a\nB. b\nAnswer: A\n\n\
                    Question: q3 (single choice)\nA. a\nB. b\nAnswer: A, B";
        let p = parse_question_block(text);
        assert_eq!(p.items.len(), 1);
        assert_eq!(p.items[0].question, "q2");
        let blocks: Vec<_> = p.failures.iter().map(|f| f.block).collect();
        assert_eq!(blocks, [0, 2]);
    }

    #[test]
    fn render_round_trip() {
        let qa = QAItem::new("Why?", QuestionType::MultipleChoice, vec!["a".into(), "b".into(), "c".into()], [0, 2], Some("ref".into()))
            .unwrap();
        assert_eq!(parse_question_block(&render_question(&qa)).items, [qa]);
    }

    #[test]
    fn answer_letter_forms() {
        assert_eq!(answer_letters("A, C"), [0, 2]);
        assert_eq!(answer_letters("AB."), [0, 1]);
        assert_eq!(answer_letters("B. To handle things"), [1]);
        assert!(answer_letters("none").is_empty());
    }
}
