//! Load a screening corpus, apply the retention filter, and profile it.
//!
//! Run with: `cargo run --example profile_corpus`

use litscreen::analysis::{render_report, Artifact, ReportFormat};
use litscreen::corpus::{filter_records, parse_corpus, profile, CorpusFormat, FilterPolicy};

const CORPUS: &str = r#"
{"project":"DEMO","key":"a1","title":"Adaptive model repair","abstract":"We study automated repair of broken models.","decision":"include","exclusion_criteria":[],"reviewers":2,"conflict":false}
{"project":"DEMO","key":"a2","title":"Galaxy surveys at scale","abstract":"A catalogue of galaxies.","decision":"exclude","exclusion_criteria":["off-topic"],"reviewers":2,"conflict":false}
{"project":"DEMO","key":"a3","title":"Policy learning for bug triage","abstract":"Triage decisions learned from reward signals.","decision":"include","exclusion_criteria":[],"reviewers":3,"conflict":true}
{"project":"DEMO","key":"a4","title":"Retail market dynamics","abstract":"","decision":"exclude","exclusion_criteria":["no abstract"],"reviewers":1,"conflict":false}
{"project":"DEMO","key":"a3","title":"Policy learning for bug triage","abstract":"Duplicate row from a second reviewer export.","decision":"include","exclusion_criteria":[],"reviewers":3,"conflict":true}
{"project":"DEMO","key":"a5","title":"Test generation heuristics","abstract":"Search-based generation of unit tests.","decision":"exclude","exclusion_criteria":["wrong venue"],"reviewers":2,"conflict":false}
"#;

fn main() -> litscreen::Result<()> {
    let corpus = parse_corpus(CORPUS.trim_start().as_bytes(), CorpusFormat::Jsonl)?;
    println!("parsed {} records", corpus.len());

    // drop records without usable text and collapse duplicates
    let (kept, log) = filter_records(&corpus, &FilterPolicy::default());
    for dropped in &log.dropped {
        println!("dropped {}/{}: {}", dropped.project, dropped.key, dropped.reason);
    }

    let profile = profile(&kept)?;
    println!(
        "\n{} records, {} included ({:.1}%), {} conflicts ({:.1}%)",
        profile.size,
        profile.included,
        profile.inclusion_ratio * 100.0,
        profile.conflicts,
        profile.conflict_ratio * 100.0
    );

    let markdown = render_report(&Artifact::Profile(&profile), ReportFormat::Markdown)?;
    println!("\n{}", String::from_utf8_lossy(&markdown));
    Ok(())
}
