//! Phrase extraction and table building: consistent spans from one
//! aligned pair, then a scored phrase table over a small corpus.

use smtkit::align::{train_ibm1, train_ibm2, viterbi_align, symmetrize, Alignment, Symmetrization};
use smtkit::phrase::{build_phrase_table, extract_phrases};

fn tok(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_string).collect()
}

fn main() -> smtkit::Result<()> {
    // Extraction on a hand-aligned pair: the verb moves, so spans that
    // cut across the movement are rejected as inconsistent.
    let src = tok("राम आम खाता है");
    let tgt = tok("ram eats a mango");
    let alignment = Alignment::from_links(4, 4, [(0, 0), (1, 3), (2, 1), (3, 2)])?;
    println!("{} ||| {}", src.join(" "), tgt.join(" "));
    println!("links: {}", alignment.to_pharaoh());
    for span in extract_phrases(4, 4, &alignment, 3)? {
        let (a, b) = span.src;
        let (c, d) = span.tgt;
        println!("  [{}] -> [{}]", src[a..=b].join(" "), tgt[c..=d].join(" "));
    }

    // A full table from EM alignments over a tiny corpus.
    let sentences = [
        ("राम आम खाता", "ram eats mango"),
        ("सीता पानी पीती", "sita drinks water"),
        ("राम पानी पीता", "ram drinks water"),
        ("सीता आम खाती", "sita eats mango"),
        ("लडका आम खाता", "boy eats mango"),
    ];
    let fwd_pairs: Vec<(Vec<String>, Vec<String>)> =
        sentences.iter().map(|(s, t)| (tok(s), tok(t))).collect();
    let rev_pairs: Vec<(Vec<String>, Vec<String>)> =
        sentences.iter().map(|(s, t)| (tok(t), tok(s))).collect();
    let fwd = train_ibm2(&fwd_pairs, 5, &train_ibm1(&fwd_pairs, 5)?.lexical)?;
    let rev = train_ibm2(&rev_pairs, 5, &train_ibm1(&rev_pairs, 5)?.lexical)?;
    let alignments: Vec<Alignment> = fwd_pairs
        .iter()
        .map(|(s, t)| {
            let f = viterbi_align(&fwd.lexical, Some(&fwd.distortion), s, t);
            let r = viterbi_align(&rev.lexical, Some(&rev.distortion), t, s);
            symmetrize(&f, &r, Symmetrization::GrowDiagFinalAnd)
        })
        .collect::<smtkit::Result<_>>()?;

    let table = build_phrase_table(&fwd_pairs, &alignments, &fwd.lexical, &rev.lexical, 3)?;
    println!("\nphrase table ({} source phrases):", table.len());
    for (src_phrase, entries) in table.iter().take(8) {
        for entry in entries {
            println!(
                "  {} ||| {} ||| {:.3} {:.3} {:.3} {:.3}",
                src_phrase.join(" "),
                entry.tgt.join(" "),
                entry.phi_tgt_given_src,
                entry.phi_src_given_tgt,
                entry.lex_tgt_given_src,
                entry.lex_src_given_tgt,
            );
        }
    }
    Ok(())
}
