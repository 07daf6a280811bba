//! Teacher edits on a planned queue: a rewritten script goes through, a
//! slide shown out of order is refused and the queue is left as it was.

use std::path::Path;

use lectern::plan::{revise_queue, ActionQueue, QueueEdit, TeachingAction};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/golden/queue.json");
    let queue: ActionQueue = serde_json::from_str(&std::fs::read_to_string(path)?)?;

    let rewrite = [QueueEdit::Replace {
        position: 1,
        action: TeachingAction::read_script("Welcome! Today is about how machines learn from data.", "p0"),
    }];
    let revised = revise_queue(&queue, &rewrite)?;
    println!("revision {} -> {}", queue.revision, revised.revision);

    let jump_ahead = [QueueEdit::Insert { position: 0, action: TeachingAction::show_file(7, "p7") }];
    match revise_queue(&revised, &jump_ahead) {
        Ok(_) => println!("unexpectedly accepted"),
        Err(e) => println!("refused: {e}"),
    }

    println!("{}", serde_json::to_string_pretty(&revised.export_json()[1])?);
    Ok(())
}
