//! Screen a corpus against a recorded response cache, offline and
//! deterministically.
//!
//! The first pass records request/response pairs into a cache file
//! (here from a scripted stand-in transport; live runs record real
//! endpoint traffic the same way). Replaying the cache then reproduces
//! the run byte-for-byte with zero network calls.
//!
//! Run with: `cargo run --example screen_replay`

use litscreen::corpus::{Corpus, Decision, ScreeningRecord};
use litscreen::llm::{screen_batch, LlmConfig, ReplayCache, ScriptedTransport};
use litscreen::metrics::{metrics_report, ConfusionMatrix};
use litscreen::prompt::PromptTemplate;

fn demo_corpus() -> Corpus {
    let records = (0..10)
        .map(|i| {
            let relevant = i % 2 == 0;
            ScreeningRecord::new(
                "DEMO",
                format!("rec{i}"),
                if relevant {
                    format!("Learning-based repair study {i}")
                } else {
                    format!("Unrelated market analysis {i}")
                },
                "An abstract describing the study in one sentence.",
                if relevant { Decision::Include } else { Decision::Exclude },
            )
        })
        .collect();
    Corpus::new(records, "demo")
}

fn main() -> litscreen::Result<()> {
    let corpus = demo_corpus();
    let template = PromptTemplate::new("learning-based software repair");
    let prompts: Vec<_> = corpus
        .iter()
        .map(|r| template.render(r))
        .collect::<litscreen::Result<Vec<_>>>()?;

    let config = LlmConfig::default();
    let dir = std::env::temp_dir().join("litscreen-replay-example");
    std::fs::create_dir_all(&dir)?;
    let cache_path = dir.join("responses.jsonl");
    let _ = std::fs::remove_file(&cache_path);

    // pass 1: record. The scripted transport answers like the endpoint
    // would; one answer is deliberately off-script to show the fallback.
    let mut script = ScriptedTransport::new().with_fallback("Exclude");
    for (prompt, record) in prompts.iter().zip(corpus.iter()) {
        let answer = match record.decision {
            Decision::Include => "Include",
            Decision::Exclude if record.key == "rec3" => "hmm, unclear",
            Decision::Exclude => "Exclude",
        };
        script = script.respond(prompt.text.clone(), answer);
    }
    let recorder = ReplayCache::record(&cache_path)?;
    let recorded = screen_batch(&script, &config, &prompts, Some(&recorder))?;
    drop(recorder);
    println!("recorded {} responses into {}", recorded.len(), cache_path.display());

    // pass 2 and 3: replay twice; outcomes are byte-identical
    let cache = ReplayCache::replay(&cache_path)?;
    let replay_a = screen_batch(&script, &config, &prompts, Some(&cache))?;
    let replay_b = screen_batch(&script, &config, &prompts, Some(&cache))?;
    assert_eq!(
        serde_json::to_vec(&replay_a).expect("serialize"),
        serde_json::to_vec(&replay_b).expect("serialize")
    );
    println!("two replays are byte-identical");

    let mut cm = ConfusionMatrix::default();
    for (record, outcome) in corpus.iter().zip(&replay_a) {
        cm.record(record.decision, outcome.decision);
        if let Some(raw) = &outcome.parse_failure {
            println!(
                "  {} fell back to {} (raw response: `{raw}`)",
                outcome.record_key, outcome.decision
            );
        }
    }
    let report = metrics_report(&cm);
    println!(
        "recall {} precision {} bAcc {}",
        report.recall.map_or("—".into(), |v| format!("{v:.3}")),
        report.precision.map_or("—".into(), |v| format!("{v:.3}")),
        report.balanced_accuracy.map_or("—".into(), |v| format!("{v:.3}")),
    );
    Ok(())
}
