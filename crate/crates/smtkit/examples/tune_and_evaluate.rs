//! Greedy weight tuning on a dev set, then corpus scoring with BLEU,
//! RIBES, and METEOR.

use smtkit::decode::{decode, DecoderConfig, FeatureWeights};
use smtkit::eval::{bleu_corpus, metric_corpus, RibesConfig, SentenceMetric};
use smtkit::lm::{train_lm, Smoothing};
use smtkit::phrase::PhraseTable;
use smtkit::tune::{tune_weights, TuneMetric};

fn tok(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_string).collect()
}

fn main() -> smtkit::Result<()> {
    let entry = |src: &str, tgt: &str, p: f64| (tok(src), tok(tgt), p, p, p, p);
    let table = PhraseTable::from_entries([
        entry("राम", "ram", 0.9),
        entry("सीता", "sita", 0.9),
        entry("बडा", "big", 0.8),
        entry("ठंडा", "cold", 0.8),
        entry("आम", "mango", 0.8),
        entry("पानी", "water", 0.8),
        entry("खाता", "eats", 0.8),
        entry("पीती", "drinks", 0.8),
    ]);
    let lm_data: Vec<Vec<String>> = [
        "ram eats big mango",
        "sita drinks cold water",
        "ram drinks cold water",
    ]
    .iter()
    .map(|s| tok(s))
    .collect();
    let lm = train_lm(&lm_data, 2, Smoothing::WittenBell)?;
    // Verb-final source, verb-second reference: correct output needs jumps.
    let dev: Vec<(Vec<String>, Vec<String>)> = [
        ("राम बडा आम खाता", "ram eats big mango"),
        ("सीता ठंडा पानी पीती", "sita drinks cold water"),
    ]
    .iter()
    .map(|(s, t)| (tok(s), tok(t)))
    .collect();

    // Start with reordering penalized so heavily that the decoder keeps
    // source order; the search has to rebalance it against the LM.
    let initial = FeatureWeights {
        reorder: 2.0,
        ..FeatureWeights::default()
    };
    let decoder = DecoderConfig::default();
    let ribes = RibesConfig::default();
    let report = tune_weights(
        &dev, &table, &lm, initial, TuneMetric::Bleu, 2, &decoder, &ribes,
    )?;
    print!("{}", report.render());
    println!(
        "\ndev objective: {:.4} -> {:.4}",
        report.iterations[0].1,
        report.final_score()
    );

    // Score the tuned system on the dev set with all three metrics.
    let hyps: Vec<Vec<String>> = dev
        .iter()
        .map(|(src, _)| decode(src, &table, &lm, &report.accepted, &decoder).0)
        .collect();
    let refs: Vec<Vec<String>> = dev.iter().map(|(_, t)| t.clone()).collect();
    let bleu = bleu_corpus(&hyps, &refs, 4)?;
    println!("\nBLEU   {:.4} (brevity penalty {:.4})", bleu.score, bleu.brevity_penalty);
    println!("RIBES  {:.4}", metric_corpus(SentenceMetric::Ribes, &hyps, &refs, &ribes)?);
    println!("METEOR {:.4}", metric_corpus(SentenceMetric::Meteor, &hyps, &refs, &ribes)?);
    Ok(())
}
