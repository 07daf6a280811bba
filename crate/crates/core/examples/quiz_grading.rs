//! Parses a block of generated quiz questions and grades a few answers.

use lectern::plan::{parse_question_block, render_question, QAItem};
use lectern::teach::grade_answer;

const BLOCK: &str = "\
Question: Which of these are supervised learning tasks? (multiple choice)
A. Predicting house prices
B. Classifying emails as spam
C. Grouping customers by behaviour
Answer: A, B

Question: What does k stand for in k-means?
A. The number of features
B. The number of clusters
C. The number of iterations
Answer: B

Question: This one has no answer line.
A. yes
B. no
";

fn main() {
    let parsed = parse_question_block(BLOCK);
    for failure in &parsed.failures {
        println!("rejected block {}: {}", failure.block, failure.reason);
    }
    for qa in &parsed.items {
        println!("\n{}", render_question(qa));
        for pick in [[0].into(), [0, 1].into(), [1].into()] {
            let verdict = grade_answer(qa, &pick).unwrap();
            let letters: Vec<char> = pick.iter().map(|&i| QAItem::letter(i)).collect();
            println!("  answer {letters:?}: {verdict:?}");
        }
    }
}
