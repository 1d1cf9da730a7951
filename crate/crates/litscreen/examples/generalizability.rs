//! Aggregate one classifier's metric reports across several datasets
//! and summarize each metric column with dispersion moments.
//!
//! Run with: `cargo run --example generalizability`

use litscreen::analysis::{aggregate_generalizability, render_report, Artifact, ReportFormat};
use litscreen::metrics::MetricsReport;

fn report(rec: f64, prec: f64, spec: f64, npv: f64, f2: f64, mcc: f64) -> MetricsReport {
    MetricsReport {
        recall: Some(rec),
        precision: Some(prec),
        specificity: Some(spec),
        npv: Some(npv),
        balanced_accuracy: Some((rec + spec) / 2.0),
        f2: Some(f2),
        mcc_normalized: Some(mcc),
    }
}

fn main() -> litscreen::Result<()> {
    // one zero-shot classifier evaluated on five review corpora
    let rows = vec![
        ("dataset-a".to_string(), report(0.821, 0.199, 0.688, 0.976, 0.505, 0.649)),
        ("dataset-b".to_string(), report(0.869, 0.133, 0.666, 0.988, 0.413, 0.628)),
        ("dataset-c".to_string(), report(0.947, 0.108, 0.455, 0.992, 0.371, 0.600)),
        ("dataset-d".to_string(), report(0.327, 0.514, 0.928, 0.856, 0.353, 0.654)),
        ("dataset-e".to_string(), report(0.738, 0.664, 0.592, 0.674, 0.722, 0.667)),
    ];

    let table = aggregate_generalizability(&rows)?;
    let markdown = render_report(&Artifact::Generalizability(&table), ReportFormat::Markdown)?;
    println!("{}", String::from_utf8_lossy(&markdown));

    let bacc = &table.moments["balanced_accuracy"];
    println!(
        "balanced accuracy generalizes best: mean {:.3}, std {:.3}",
        bacc.mean.unwrap_or(f64::NAN),
        bacc.std_dev.unwrap_or(f64::NAN)
    );
    Ok(())
}
