//! Rendering of analysis artifacts to markdown, CSV, and JSON.
//!
//! Rendering is deterministic: the same artifact always yields the same
//! bytes. Markdown tables keep the Rec, Prec, Spec, NPV, bAcc, F2, MCC
//! column order; JSON is lossless; CSV exports one row per run so the
//! raw per-run metrics feed external significance tooling.

use std::fmt::Write as _;
use std::str::FromStr;

use rust_decimal::{Decimal, RoundingStrategy};

use crate::analysis::{
    ConsistencyReport, CostReport, EffortReport, GeneralizabilityTable, RunSeries,
};
use crate::corpus::DatasetProfile;
use crate::error::{Error, Result};
use crate::metrics::{fmt_metric, DispersionStats, MetricsReport, METRIC_COLUMNS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Markdown,
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::UnknownFormat(other.into())),
        }
    }
}

/// Anything the toolkit can render.
#[derive(Debug, Clone, Copy)]
pub enum Artifact<'a> {
    Profile(&'a DatasetProfile),
    Metrics(&'a MetricsReport),
    Series(&'a RunSeries),
    Consistency(&'a ConsistencyReport),
    Effort(&'a EffortReport),
    Cost(&'a CostReport),
    Generalizability(&'a GeneralizabilityTable),
}

/// Render an artifact to bytes in the requested format.
pub fn render_report(artifact: &Artifact<'_>, format: ReportFormat) -> Result<Vec<u8>> {
    let text = match format {
        ReportFormat::Json => to_json(artifact)?,
        ReportFormat::Markdown => to_markdown(artifact),
        ReportFormat::Csv => to_csv(artifact),
    };
    Ok(text.into_bytes())
}

fn to_json(artifact: &Artifact<'_>) -> Result<String> {
    let value = match artifact {
        Artifact::Profile(v) => serde_json::to_value(v)?,
        Artifact::Metrics(v) => serde_json::to_value(v)?,
        Artifact::Series(v) => serde_json::to_value(v)?,
        Artifact::Consistency(v) => serde_json::to_value(v)?,
        Artifact::Effort(v) => serde_json::to_value(v)?,
        Artifact::Cost(v) => serde_json::to_value(v)?,
        Artifact::Generalizability(v) => serde_json::to_value(v)?,
    };
    let mut text = serde_json::to_string_pretty(&value)?;
    text.push('\n');
    Ok(text)
}

/// Three-decimal money string, half-up.
pub fn fmt_usd(value: Decimal) -> String {
    format!(
        "{:.3}",
        value.round_dp_with_strategy(3, RoundingStrategy::MidpointAwayFromZero)
    )
}

/// Screening hours at one decimal, rounded in decimal arithmetic so
/// values like 1089 min = 18.15 h print as 18.2.
fn fmt_hours(papers: u64, minutes_per_paper: f64) -> String {
    let minutes = Decimal::from_f64_retain(minutes_per_paper).unwrap_or(Decimal::ONE);
    let hours = (Decimal::from(papers) * minutes / Decimal::from(60))
        .round_dp_with_strategy(1, RoundingStrategy::MidpointAwayFromZero);
    format!("{hours:.1}")
}

fn fmt_stat(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{v:.3}"),
        None => "—".to_string(),
    }
}

fn metrics_header() -> String {
    format!(
        "| {} |\n|{}|\n",
        METRIC_COLUMNS.join(" | "),
        METRIC_COLUMNS.map(|_| "---").join("|")
    )
}

fn metrics_row(report: &MetricsReport) -> String {
    let cells: Vec<String> = report.column_values().iter().map(|v| fmt_metric(*v)).collect();
    format!("| {} |\n", cells.join(" | "))
}

fn dispersion_table(rows: &[(&str, &DispersionStats)]) -> String {
    let mut out = String::from("| Metric | Mean | Median | Std. dev. | IQR | Kurtosis |\n|---|---|---|---|---|---|\n");
    for (name, stats) in rows {
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {} | {} |",
            name,
            fmt_stat(stats.mean),
            fmt_stat(stats.median),
            fmt_stat(stats.std_dev),
            fmt_stat(stats.iqr),
            fmt_stat(stats.excess_kurtosis),
        );
    }
    out
}

fn to_markdown(artifact: &Artifact<'_>) -> String {
    match artifact {
        Artifact::Profile(p) => {
            format!(
                "| Size | Included | Excluded | Inclusion ratio | Conflicts | Conflict ratio |\n\
                 |---|---|---|---|---|---|\n\
                 | {} | {} | {} | {:.1}% | {} | {:.1}% |\n",
                p.size,
                p.included,
                p.excluded,
                p.inclusion_ratio * 100.0,
                p.conflicts,
                p.conflict_ratio * 100.0
            )
        }
        Artifact::Metrics(report) => format!("{}{}", metrics_header(), metrics_row(report)),
        Artifact::Series(series) => {
            let mut out = format!(
                "| Run | Seed | TP | TN | FP | FN | {} |\n|{}|\n",
                METRIC_COLUMNS.join(" | "),
                (0..6 + METRIC_COLUMNS.len()).map(|_| "---").collect::<Vec<_>>().join("|")
            );
            for run in &series.runs {
                let metric_cells: Vec<String> = run
                    .report
                    .column_values()
                    .iter()
                    .map(|v| fmt_metric(*v))
                    .collect();
                let _ = writeln!(
                    out,
                    "| {} | {} | {} | {} | {} | {} | {} |",
                    run.run_index,
                    run.seed.map_or("—".to_string(), |s| s.to_string()),
                    run.confusion.true_positives,
                    run.confusion.true_negatives,
                    run.confusion.false_positives,
                    run.confusion.false_negatives,
                    metric_cells.join(" | "),
                );
            }
            out
        }
        Artifact::Consistency(report) => {
            let rows: Vec<(&str, &DispersionStats)> = report
                .metric_dispersion
                .iter()
                .map(|(k, v)| (k.as_str(), v))
                .collect();
            let mut out = dispersion_table(&rows);
            let _ = writeln!(
                out,
                "\nFleiss' kappa: {:.3} ({}), p_o = {:.3}, p_e = {:.3}{}",
                report.agreement.kappa,
                report.agreement.band,
                report.agreement.p_o,
                report.agreement.p_e,
                if report.agreement.degenerate {
                    " [degenerate: single category]"
                } else {
                    ""
                }
            );
            let _ = writeln!(
                out,
                "Disagreements: {} of {} records ({:.1}%), {} toward inclusion, {} toward exclusion",
                report.census.disagreements,
                report.census.records,
                report.census.fraction() * 100.0,
                report.census.false_positive_direction,
                report.census.false_negative_direction,
            );
            out
        }
        Artifact::Effort(e) => {
            let saved_papers = if e.negative_wss {
                "N/A (negative WSS)".to_string()
            } else {
                e.saved_papers.to_string()
            };
            format!(
                "| Total papers | Screening time | WSS | Saved papers | Saved time |\n\
                 |---|---|---|---|---|\n\
                 | {} | {} h | {:.3} | {} | {} h |\n",
                e.total_papers,
                fmt_hours(e.total_papers, e.minutes_per_paper),
                e.wss,
                saved_papers,
                fmt_hours(e.saved_papers, e.minutes_per_paper),
            )
        }
        Artifact::Cost(c) => {
            format!(
                "| Mean tokens | Papers costed | Sum tokens | USD | Hours | FTE days |\n\
                 |---|---|---|---|---|---|\n\
                 | {} | {} | {} | {} | {} | {} |\n\nWSS-based savings: {:.1} h = {:.3} FTE days\n",
                c.mean_tokens_per_paper,
                c.papers_costed,
                c.sum_tokens,
                fmt_usd(c.usd),
                c.saved_hours,
                fmt_usd(c.fte_days),
                c.wss_saved_hours,
                c.wss_saved_fte_days,
            )
        }
        Artifact::Generalizability(table) => {
            let mut out = format!(
                "| Dataset | {} |\n|{}|\n",
                METRIC_COLUMNS.join(" | "),
                (0..1 + METRIC_COLUMNS.len()).map(|_| "---").collect::<Vec<_>>().join("|")
            );
            for (dataset, report) in &table.rows {
                let cells: Vec<String> = report
                    .column_values()
                    .iter()
                    .map(|v| fmt_metric(*v))
                    .collect();
                let _ = writeln!(out, "| {} | {} |", dataset, cells.join(" | "));
            }
            // moment rows in the metric column order
            let by_name: std::collections::BTreeMap<&str, &DispersionStats> = table
                .moments
                .iter()
                .map(|(k, v)| (k.as_str(), v))
                .collect();
            let order = [
                ("recall", "Rec"),
                ("precision", "Prec"),
                ("specificity", "Spec"),
                ("npv", "NPV"),
                ("balanced_accuracy", "bAcc"),
                ("f2", "F2"),
                ("mcc_normalized", "MCC"),
            ];
            for (label, pick) in [
                ("Mean", 0usize),
                ("Std. dev.", 1),
                ("Median", 2),
                ("IQR", 3),
                ("Kurtosis", 4),
            ] {
                let cells: Vec<String> = order
                    .iter()
                    .map(|(name, _)| {
                        by_name.get(name).map_or("—".to_string(), |stats| {
                            let value = match pick {
                                0 => stats.mean,
                                1 => stats.std_dev,
                                2 => stats.median,
                                3 => stats.iqr,
                                _ => stats.excess_kurtosis,
                            };
                            fmt_stat(value)
                        })
                    })
                    .collect();
                let _ = writeln!(out, "| **{}** | {} |", label, cells.join(" | "));
            }
            out
        }
    }
}

fn csv_metric(value: Option<f64>) -> String {
    value.map_or(String::new(), |v| format!("{v}"))
}

fn to_csv(artifact: &Artifact<'_>) -> String {
    match artifact {
        Artifact::Profile(p) => format!(
            "size,included,excluded,inclusion_ratio,conflicts,conflict_ratio\n{},{},{},{},{},{}\n",
            p.size, p.included, p.excluded, p.inclusion_ratio, p.conflicts, p.conflict_ratio
        ),
        Artifact::Metrics(report) => {
            let names: Vec<&str> = report.named_values().iter().map(|(n, _)| *n).collect();
            let cells: Vec<String> = report
                .named_values()
                .iter()
                .map(|(_, v)| csv_metric(*v))
                .collect();
            format!("{}\n{}\n", names.join(","), cells.join(","))
        }
        Artifact::Series(series) => {
            let mut out = String::from(
                "run,seed,tp,tn,fp,fn,parse_failures,recall,precision,specificity,npv,balanced_accuracy,f2,mcc_normalized\n",
            );
            for run in &series.runs {
                let metric_cells: Vec<String> = [
                    run.report.recall,
                    run.report.precision,
                    run.report.specificity,
                    run.report.npv,
                    run.report.balanced_accuracy,
                    run.report.f2,
                    run.report.mcc_normalized,
                ]
                .iter()
                .map(|v| csv_metric(*v))
                .collect();
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    run.run_index,
                    run.seed.map_or(String::new(), |s| s.to_string()),
                    run.confusion.true_positives,
                    run.confusion.true_negatives,
                    run.confusion.false_positives,
                    run.confusion.false_negatives,
                    run.parse_failures,
                    metric_cells.join(","),
                );
            }
            out
        }
        Artifact::Consistency(report) => {
            let mut out = String::from("metric,mean,median,std_dev,iqr,excess_kurtosis\n");
            for (name, stats) in &report.metric_dispersion {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    name,
                    csv_metric(stats.mean),
                    csv_metric(stats.median),
                    csv_metric(stats.std_dev),
                    csv_metric(stats.iqr),
                    csv_metric(stats.excess_kurtosis),
                );
            }
            let _ = writeln!(
                out,
                "kappa,{},,,,\np_o,{},,,,\np_e,{},,,,",
                report.agreement.kappa, report.agreement.p_o, report.agreement.p_e
            );
            out
        }
        Artifact::Effort(e) => format!(
            "total_papers,total_screening_hours,wss,saved_papers,saved_hours,negative_wss\n{},{},{},{},{},{}\n",
            e.total_papers,
            e.total_screening_hours,
            e.wss,
            e.saved_papers,
            e.saved_hours,
            e.negative_wss
        ),
        Artifact::Cost(c) => format!(
            "mean_tokens_per_paper,papers_costed,sum_tokens,usd,hours,fte_days,wss_saved_hours,wss_saved_fte_days\n{},{},{},{},{},{},{},{}\n",
            c.mean_tokens_per_paper,
            c.papers_costed,
            c.sum_tokens,
            c.usd,
            c.saved_hours,
            c.fte_days,
            c.wss_saved_hours,
            c.wss_saved_fte_days
        ),
        Artifact::Generalizability(table) => {
            let mut out = String::from(
                "dataset,recall,precision,specificity,npv,balanced_accuracy,f2,mcc_normalized\n",
            );
            for (dataset, report) in &table.rows {
                let cells: Vec<String> = report
                    .named_values()
                    .iter()
                    .map(|(_, v)| csv_metric(*v))
                    .collect();
                let _ = writeln!(out, "{},{}", dataset, cells.join(","));
            }
            for (name, stats) in &table.moments {
                let _ = writeln!(
                    out,
                    "moment:{},{},{},{},{},{}",
                    name,
                    csv_metric(stats.mean),
                    csv_metric(stats.std_dev),
                    csv_metric(stats.median),
                    csv_metric(stats.iqr),
                    csv_metric(stats.excess_kurtosis),
                );
            }
            out
        }
    }
}
