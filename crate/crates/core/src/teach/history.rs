use super::{Attachment, Speaker, Utterance, UtteranceKind};
use crate::gateway::{ModelRequest, Role};
use crate::plan::QAItem;

/// The last `window` utterances a model may see. Page changes and control
/// events are bookkeeping, not conversation, and are left out.
pub fn model_window(history: &[Utterance], window: usize) -> Vec<&Utterance> {
    let visible: Vec<&Utterance> = history
        .iter()
        .filter(|u| u.speaker != Speaker::System && !matches!(u.kind, UtteranceKind::Control | UtteranceKind::ShowPage))
        .collect();
    visible[visible.len().saturating_sub(window)..].to_vec()
}

fn render(u: &Utterance) -> String {
    match &u.attachment {
        Some(Attachment::Question { qa }) => {
            let opts: String = qa.options.iter().enumerate().map(|(i, o)| format!("\n{}. {o}", QAItem::letter(i))).collect();
            format!("{}{opts}", u.content)
        }
        _ => u.content.clone(),
    }
}

/// Appends the window as chat messages: `me`'s own lines as assistant
/// turns, everyone else's as user turns prefixed with the speaker's name.
pub(crate) fn push_for_agent(req: &mut ModelRequest, window: &[&Utterance], me: Speaker) {
    for u in window {
        if u.speaker == me {
            req.push(Role::Assistant, render(u), Vec::new());
        } else {
            req.push(Role::User, format!("{}: {}", u.speaker.display_name(), render(u)), Vec::new());
        }
    }
}

/// Appends the window as user turns naming each speaker.
pub(crate) fn push_for_controller(req: &mut ModelRequest, window: &[&Utterance]) {
    for u in window {
        req.push(Role::User, format!("{} ({}): {}", u.speaker.display_name(), u.speaker.as_str(), render(u)), Vec::new());
    }
}
