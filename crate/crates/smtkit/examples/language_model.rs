//! Trains a Witten-Bell trigram language model, scores sentences, and
//! round-trips the model through the ARPA text format.

use smtkit::lm::{read_arpa, train_lm, LanguageModel, Smoothing};

fn main() -> smtkit::Result<()> {
    let sentences: Vec<Vec<String>> = [
        "ram eats a mango",
        "sita drinks water",
        "ram reads a book",
        "the boy eats bread",
        "sita eats a mango",
    ]
    .iter()
    .map(|s| s.split_whitespace().map(str::to_string).collect())
    .collect();

    let model = train_lm(&sentences, 3, Smoothing::WittenBell)?;
    let ctx = |words: &[&str]| -> Vec<String> { words.iter().map(|w| w.to_string()).collect() };
    println!("P(mango | eats a)  = {:.6}", model.prob("mango", &ctx(&["eats", "a"])));
    println!("P(water | eats a)  = {:.6}", model.prob("water", &ctx(&["eats", "a"])));
    println!("P(zebra | eats a)  = {:.6}", model.prob("zebra", &ctx(&["eats", "a"])));

    for sentence in ["ram eats a mango", "mango a eats ram"] {
        let tokens = ctx(&sentence.split(' ').collect::<Vec<_>>());
        println!("log P({sentence}) = {:.4}", model.sentence_log_prob(&tokens));
    }

    // The ARPA file reloads to the same probabilities, byte for byte.
    let dir = tempfile::tempdir()?;
    let path = dir.path().join("example.arpa");
    model.write_arpa(&path)?;
    let reloaded = read_arpa(&path)?;
    assert_eq!(reloaded.to_arpa_string(), std::fs::read_to_string(&path)?);
    let tokens = ctx(&["ram", "eats", "a", "mango"]);
    println!(
        "reloaded ARPA scores the same sentence: {:.4}",
        reloaded.sentence_log_prob(&tokens)
    );
    println!("\nfirst ARPA lines:");
    for line in model.to_arpa_string().lines().take(12) {
        println!("  {line}");
    }
    Ok(())
}
