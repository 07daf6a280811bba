//! The outline text form of an agenda, and the pruned view a model sees
//! when placing a new page.

use lectern::agenda::{parse_outline, prune, render_outline};

const OUTLINE: &str = "\
- Statistics 101
-- Descriptive statistics
--- Mean and median
--- Variance
-- Probability
--- Events and outcomes
--- Conditional probability
---- Bayes' rule
--- Independence
-- Inference
--- Confidence intervals
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let agenda = parse_outline(OUTLINE)?;
    println!("{} nodes, {} pages\n", agenda.root.node_count(), agenda.leaf_count);
    println!("{}", render_outline(&agenda));

    let target = agenda.leaves().iter().find(|l| l.label == "Bayes' rule").unwrap().node_id.clone();
    let view = prune(&agenda, &target)?;
    println!("\nview around {target} ({} nodes):", view.root.node_count());
    println!("{}", render_outline(&view));
    Ok(())
}
