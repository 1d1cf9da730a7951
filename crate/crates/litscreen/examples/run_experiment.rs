//! Orchestrate a repeated-run experiment from a declarative plan and
//! summarize the resulting series.
//!
//! Run with: `cargo run --example run_experiment`

use std::str::FromStr;

use litscreen::analysis::{
    consistency_report, render_report, run_experiment_on, Artifact, ClassifierSpec,
    ExperimentPlan, ReportFormat,
};
use litscreen::corpus::{Corpus, Decision, ScreeningRecord};
use litscreen::llm::{LlmConfig, ScriptedTransport};
use litscreen::prompt::PromptTemplate;
use rust_decimal::Decimal;

fn main() -> litscreen::Result<()> {
    let records = (0..12)
        .map(|i| {
            ScreeningRecord::new(
                "EXP",
                format!("rec{i:02}"),
                format!("Study {i} on screening automation"),
                "A one-sentence abstract describing the study.",
                if i % 3 == 0 { Decision::Include } else { Decision::Exclude },
            )
        })
        .collect();
    let corpus = Corpus::new(records, "demo");

    let out = std::env::temp_dir().join("litscreen-experiment-example");
    let plan = ExperimentPlan {
        corpus_path: "unused-in-memory".into(),
        classifier: ClassifierSpec::Llm {
            config: LlmConfig::default(),
            template: PromptTemplate::new("screening automation"),
            cache: None,
        },
        runs: 3,
        seeds: vec![],
        minutes_per_paper: 1.0,
        price_per_1k_tokens: Decimal::from_str("0.002").expect("decimal literal"),
        output_dir: out.clone(),
        stamp: Some("demo".into()),
    };

    // a scripted endpoint stands in for the live API; real runs pass an
    // HttpTransport (or replay a recorded cache) instead
    let template = PromptTemplate::new("screening automation");
    let mut transport = ScriptedTransport::new();
    for record in corpus.iter() {
        let prompt = template.render(record)?;
        // right on most records, one spurious inclusion
        let answer = match (record.decision, record.key.as_str()) {
            (_, "rec04") => "Include",
            (Decision::Include, _) => "Include",
            (Decision::Exclude, _) => "Exclude",
        };
        transport = transport.respond(prompt.text, answer);
    }
    let series = run_experiment_on(&plan, &corpus, Some(&transport))?;
    println!(
        "ran {} runs; raw decisions persisted under {}",
        series.runs.len(),
        out.join("demo").display()
    );

    for run in &series.runs {
        println!(
            "run {}: TP {} TN {} FP {} FN {}",
            run.run_index,
            run.confusion.true_positives,
            run.confusion.true_negatives,
            run.confusion.false_positives,
            run.confusion.false_negatives,
        );
    }

    let consistency = consistency_report(&series)?;
    println!(
        "\nFleiss' kappa across runs: {:.3} ({})",
        consistency.agreement.kappa, consistency.agreement.band
    );

    let csv = render_report(&Artifact::Series(&series), ReportFormat::Csv)?;
    println!("\nper-run metric export:\n{}", String::from_utf8_lossy(&csv));
    Ok(())
}
