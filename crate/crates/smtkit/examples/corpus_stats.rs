//! Sentence-length statistics for a parallel corpus: per-side length
//! histograms and the cumulative fraction of sentences under a set of
//! length thresholds.

use smtkit::corpus::{length_ogive, lookup_profile, stats, ParallelCorpus, SentencePair, Side};

fn main() -> smtkit::Result<()> {
    let pairs = [
        ("राम आम खाता है", "ram eats a mango"),
        ("सीता पानी पीती है", "sita drinks water"),
        ("लडका किताब पढता है", "the boy reads a book"),
        ("बडा कुत्ता दौडता है", "the big dog runs"),
        ("वह घर जाता है", "he goes home"),
        ("आम", "mango"),
    ];
    let corpus = ParallelCorpus {
        pairs: pairs
            .iter()
            .enumerate()
            .map(|(i, (s, t))| SentencePair {
                source: s.to_string(),
                target: t.to_string(),
                line_no: i + 1,
            })
            .collect(),
        src_profile: lookup_profile("hi", &[])?,
        tgt_profile: lookup_profile("en", &[])?,
    };

    let s = stats(&corpus);
    println!("pairs: {}", s.pair_count);
    println!("source length histogram: {:?}", s.source_lengths);
    println!("target length histogram: {:?}", s.target_lengths);

    for side in [Side::Source, Side::Target] {
        let cells: Vec<String> = [2, 4, 8, 16]
            .iter()
            .map(|&t| Ok(format!("<{t}: {:.2}", length_ogive(&corpus, t, side)?)))
            .collect::<smtkit::Result<_>>()?;
        println!("{side:?} ogive: {}", cells.join("  "));
    }
    Ok(())
}
