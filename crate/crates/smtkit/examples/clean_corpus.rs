//! Cleans messy parallel text: strips control and format characters,
//! canonicalizes punctuation and digits per language, and filters out
//! unusable sentence pairs.

use smtkit::corpus::{lookup_profile, ParallelCorpus, SentencePair};
use smtkit::preprocess::{clean_line, CleanConfig};

fn main() -> smtkit::Result<()> {
    let hi = lookup_profile("hi", &[])?;
    let en = lookup_profile("en", &[])?;
    let hi_clean = CleanConfig::for_profile(&hi);
    let en_clean = CleanConfig::for_profile(&en);

    // Zero-width joiners, curly quotes, mixed digit scripts, em dashes.
    let messy = [
        ("राम\u{200d} ने “आम” खाया और ९ रुपये दिये।", &hi_clean),
        ("“Hello”\u{200b} — the caf\u{e9} sold 9 mangoes…", &en_clean),
        ("वर्ष २०२३ में ‘पुस्तक’ छपी।", &hi_clean),
    ];
    for (line, config) in messy {
        println!("raw:   {line}");
        println!("clean: {}\n", clean_line(line, config));
    }

    // Pair filtering drops empty lines and wild length ratios.
    let pairs = [
        ("राम आम खाता है", "ram eats a mango"),
        ("", "an empty source line"),
        ("एक", "a single word against a very long target sentence that keeps going"),
    ];
    let corpus = ParallelCorpus {
        pairs: pairs
            .iter()
            .enumerate()
            .map(|(i, (s, t))| SentencePair {
                source: clean_line(s, &hi_clean),
                target: clean_line(t, &en_clean),
                line_no: i + 1,
            })
            .collect(),
        src_profile: hi,
        tgt_profile: en,
    };
    let kept = smtkit::corpus::filter_pairs(&corpus, 80, 9.0);
    println!("kept {} of {} pairs after filtering", kept.pairs.len(), corpus.pairs.len());
    for pair in &kept.pairs {
        println!("  line {}: {} ||| {}", pair.line_no, pair.source, pair.target);
    }
    Ok(())
}
