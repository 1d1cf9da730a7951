//! Build the screening prompt for an article and estimate its token
//! cost.
//!
//! Run with: `cargo run --example render_prompt`

use litscreen::corpus::{Decision, ScreeningRecord};
use litscreen::prompt::{estimate_tokens, PromptTemplate};

fn main() -> litscreen::Result<()> {
    let record = ScreeningRecord::new(
        "RL4SE",
        "parmorel",
        "PARMOREL: a framework for customizable model repair",
        "The framework uses reinforcement learning to automatically find the best \
         sequence of actions for repairing a broken model according to user preferences.",
        Decision::Include,
    );

    let template = PromptTemplate::new("reinforcement learning for software engineering");
    let prompt = template.render(&record)?;
    println!("--- default prompt ({} estimated tokens) ---", prompt.estimated_tokens);
    println!("{}\n", prompt.text);

    // a title-only variant drops the abstract line entirely
    let title_only = template.clone().with_inputs(vec!["title".into()]);
    let prompt = title_only.render(&record)?;
    println!("--- title-only prompt ---");
    println!("{}\n", prompt.text);

    // answer words are template parameters too
    let custom = PromptTemplate::new("reinforcement learning for software engineering")
        .with_answer_words("KEEP", "DROP");
    let prompt = custom.render(&record)?;
    let keep_line = prompt
        .text
        .lines()
        .find(|l| l.contains("KEEP"))
        .expect("instruction line");
    println!("custom answer words: {keep_line}");

    // the heuristic is ceil(chars / 4)
    println!("\n400 characters ≈ {} tokens", estimate_tokens(&"x".repeat(400)));
    Ok(())
}
