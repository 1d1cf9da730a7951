//! Turn a screening outcome into effort savings and a token bill.
//!
//! Run with: `cargo run --example effort_and_cost`

use std::str::FromStr;

use litscreen::analysis::{
    cost_report, effort_report, render_report, Artifact, CostBasis, EffortReport, ReportFormat,
};
use litscreen::metrics::ConfusionMatrix;
use rust_decimal::Decimal;

fn main() -> litscreen::Result<()> {
    // from a confusion matrix: WSS = (TN+FN)/N - 1 + recall
    let cm = ConfusionMatrix::from_counts(77, 680, 315, 17);
    let effort = effort_report(&cm, 1.0)?;
    println!(
        "classifier saved {} of {} papers (WSS {:.3}) ≈ {:.1} h at one minute each\n",
        effort.saved_papers, effort.total_papers, effort.wss, effort.saved_hours
    );

    // or directly from a known WSS figure
    let effort = EffortReport::from_wss(1089, 0.644, 1.0)?;
    let markdown = render_report(&Artifact::Effort(&effort), ReportFormat::Markdown)?;
    println!("{}", String::from_utf8_lossy(&markdown));

    // token bill in exact decimal arithmetic: papers the classifier did
    // not save, times the measured mean tokens per paper
    let mean_tokens = Decimal::from_str("343.728").expect("decimal literal");
    let price = Decimal::from_str("0.002").expect("decimal literal");
    let cost = cost_report(&effort, mean_tokens, price, CostBasis::PapersNotSaved)?;
    println!(
        "billing {} papers × {} tokens → {} tokens → USD {}",
        cost.papers_costed, cost.mean_tokens_per_paper, cost.sum_tokens, cost.usd
    );
    let markdown = render_report(&Artifact::Cost(&cost), ReportFormat::Markdown)?;
    println!("\n{}", String::from_utf8_lossy(&markdown));

    // negative WSS means the classifier cost effort; nothing is saved
    let negative = EffortReport::from_wss(875, -0.019, 1.0)?;
    println!(
        "negative WSS: saved_papers = {}, flagged = {}",
        negative.saved_papers, negative.negative_wss
    );
    Ok(())
}
