//! Beam-stack decoding with reordering and an unknown word: builds a
//! small phrase table and language model by hand, then prints the
//! winning derivation step by step.

use smtkit::decode::{decode, score_derivation, DecoderConfig, FeatureWeights};
use smtkit::lm::{train_lm, Smoothing};
use smtkit::phrase::PhraseTable;

fn tok(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_string).collect()
}

fn main() -> smtkit::Result<()> {
    // Source is verb-final; the language model prefers verb-second, so
    // the decoder has to jump.
    let entry = |src: &str, tgt: &str, p: f64| (tok(src), tok(tgt), p, p, p, p);
    let table = PhraseTable::from_entries([
        entry("राम", "ram", 0.9),
        entry("आम", "a mango", 0.6),
        entry("आम", "mango", 0.3),
        entry("खाता", "eats", 0.8),
    ]);
    let lm_data: Vec<Vec<String>> = [
        "ram eats a mango",
        "sita eats a mango",
        "ram drinks water",
    ]
    .iter()
    .map(|s| tok(s))
    .collect();
    let lm = train_lm(&lm_data, 2, Smoothing::WittenBell)?;

    let weights = FeatureWeights::default();
    let config = DecoderConfig::default();

    // जल्दी is out of vocabulary and copies through.
    let source = tok("राम आम खाता जल्दी");
    let (output, derivation) = decode(&source, &table, &lm, &weights, &config);
    println!("source: {}", source.join(" "));
    println!("output: {}", output.join(" "));
    println!("reordering cost: {}", derivation.total_reorder_distance());
    println!("\nderivation:\n{}", derivation.trace(&source));

    // The recomputed score agrees with the search score.
    let rescored = score_derivation(&source, &derivation, &table, &lm, &weights)?;
    println!("rescored: {rescored:.6} (search {:.6})", derivation.score);
    Ok(())
}
