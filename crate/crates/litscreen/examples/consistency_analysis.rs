//! Measure how consistently a classifier decides across repeated runs:
//! dispersion of each metric, Fleiss' kappa treating runs as raters,
//! and the census of records the runs disagreed on.
//!
//! Run with: `cargo run --example consistency_analysis`

use litscreen::analysis::{consistency_report, render_report, Artifact, ReportFormat, RunRecord, RunSeries};
use litscreen::corpus::Decision;

fn main() -> litscreen::Result<()> {
    // ten articles; truth: first four included
    let keys: Vec<String> = (0..10).map(|i| format!("rec{i}")).collect();
    let truth: Vec<Decision> = (0..10)
        .map(|i| if i < 4 { Decision::Include } else { Decision::Exclude })
        .collect();

    // three runs that mostly agree; runs 1 and 2 spuriously include
    // rec7, and run 2 additionally flips rec9
    let mut runs = Vec::new();
    for run_index in 0..3 {
        let decisions: Vec<Decision> = (0..10)
            .map(|i| match (run_index, i) {
                (_, i) if i < 4 => Decision::Include,
                (1 | 2, 7) => Decision::Include,
                (2, 9) => Decision::Include,
                _ => Decision::Exclude,
            })
            .collect();
        runs.push(RunRecord::from_decisions(
            run_index,
            None,
            keys.clone(),
            truth.clone(),
            decisions,
            0,
        ));
    }
    let series = RunSeries { runs };

    let report = consistency_report(&series)?;
    let markdown = render_report(&Artifact::Consistency(&report), ReportFormat::Markdown)?;
    println!("{}", String::from_utf8_lossy(&markdown));

    // the per-run raw metrics export feeds external significance tools
    let csv = render_report(&Artifact::Series(&series), ReportFormat::Csv)?;
    println!("per-run export:\n{}", String::from_utf8_lossy(&csv));
    Ok(())
}
