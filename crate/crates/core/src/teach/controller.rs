use serde::{Deserialize, Serialize};

use super::Speaker;
use crate::prompts::{self, RosterEntry};

/// A participant the controller may pick.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentRole {
    pub speaker: Speaker,
    /// Shown to the controller.
    pub description: String,
}

/// The agents available to the ReadScript controller. Dropping a role
/// removes that kind of interaction from the classroom.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Roster {
    pub roles: Vec<AgentRole>,
}

impl Default for Roster {
    fn default() -> Self {
        Roster {
            roles: vec![
                AgentRole {
                    speaker: Speaker::Teacher,
                    description: "gives the lecture, answers questions about the course content and explains quiz answers"
                        .into(),
                },
                AgentRole {
                    speaker: Speaker::TeachingAssistant,
                    description: "adds short supplements, keeps the class on topic and handles off-topic or inappropriate messages"
                        .into(),
                },
                AgentRole {
                    speaker: Speaker::System,
                    description: "ends the current discussion and moves the lecture on to the next part".into(),
                },
            ],
        }
    }
}

impl Roster {
    pub fn contains(&self, speaker: Speaker) -> bool {
        self.roles.iter().any(|r| r.speaker == speaker)
    }

    pub fn controller_prompt(&self) -> String {
        let entries: Vec<RosterEntry<'_>> =
            self.roles.iter().map(|r| RosterEntry { name: r.speaker.as_str(), description: &r.description }).collect();
        prompts::controller(&entries)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Choice {
    Teacher,
    TeachingAssistant,
    User,
    Terminate,
}

impl Choice {
    pub fn agent(self) -> Option<Speaker> {
        match self {
            Choice::Teacher => Some(Speaker::Teacher),
            Choice::TeachingAssistant => Some(Speaker::TeachingAssistant),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControllerDecision {
    pub choice: Choice,
    /// The reply did not name a roster member; the teacher was chosen.
    #[serde(default)]
    pub fallback: bool,
    pub raw: String,
}

fn name_choice(word: &str) -> Option<Choice> {
    match word {
        "teacher" | "instructor" => Some(Choice::Teacher),
        "teaching_assistant" | "teaching assistant" | "assistant" | "ta" => Some(Choice::TeachingAssistant),
        "user" | "student" => Some(Choice::User),
        "system" | "terminate" => Some(Choice::Terminate),
        _ => None,
    }
}

/// Maps a controller reply to a choice. Never fails: a reply that does not
/// name exactly one roster member selects the teacher with `fallback` set.
pub fn parse_decision(reply: &str, roster: &Roster) -> ControllerDecision {
    let allowed = |c: Choice| match c {
        Choice::Teacher => roster.contains(Speaker::Teacher),
        Choice::TeachingAssistant => roster.contains(Speaker::TeachingAssistant),
        Choice::Terminate => roster.contains(Speaker::System),
        Choice::User => true,
    };
    let cleaned: String = reply
        .trim()
        .to_lowercase()
        .chars()
        .map(|c| if c.is_alphanumeric() || c == '_' || c == ' ' { c } else { ' ' })
        .collect();
    let cleaned = cleaned.split_whitespace().collect::<Vec<_>>().join(" ");

    let mut choice = name_choice(&cleaned);
    if choice.is_none() {
        // a short sentence naming exactly one participant
        let mut found: Vec<Choice> = Vec::new();
        let words: Vec<&str> = cleaned.split(' ').collect();
        let mut i = 0;
        while i < words.len() {
            let pair = words.get(i + 1).map(|next| format!("{} {next}", words[i]));
            let hit = pair.as_deref().and_then(name_choice).map(|c| (c, 2)).or_else(|| name_choice(words[i]).map(|c| (c, 1)));
            match hit {
                Some((c, n)) => {
                    if !found.contains(&c) {
                        found.push(c);
                    }
                    i += n;
                }
                None => i += 1,
            }
        }
        if found.len() == 1 && words.len() <= 12 {
            choice = Some(found[0]);
        }
    }
    match choice.filter(|c| allowed(*c)) {
        Some(choice) => ControllerDecision { choice, fallback: false, raw: reply.to_string() },
        None => ControllerDecision { choice: Choice::Teacher, fallback: true, raw: reply.to_string() },
    }
}
