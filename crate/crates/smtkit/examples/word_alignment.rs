//! Word alignment with IBM Model 1 and Model 2: EM training in both
//! directions, Viterbi alignment, and grow-diag-final-and symmetrization.

use smtkit::align::{symmetrize, train_ibm1, train_ibm2, viterbi_align, Symmetrization};

fn tok(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_string).collect()
}

fn main() -> smtkit::Result<()> {
    let sentences = [
        ("राम आम खाता", "ram eats mango"),
        ("सीता पानी पीती", "sita drinks water"),
        ("राम पानी पीता", "ram drinks water"),
        ("सीता आम खाती", "sita eats mango"),
        ("लडका आम खाता", "boy eats mango"),
        ("राम किताब पढता", "ram reads book"),
    ];
    let fwd_pairs: Vec<(Vec<String>, Vec<String>)> =
        sentences.iter().map(|(s, t)| (tok(s), tok(t))).collect();
    let rev_pairs: Vec<(Vec<String>, Vec<String>)> =
        sentences.iter().map(|(s, t)| (tok(t), tok(s))).collect();

    let ibm1 = train_ibm1(&fwd_pairs, 5)?;
    println!("model 1 log-likelihood per iteration:");
    for (i, ll) in ibm1.log_likelihood.iter().enumerate() {
        println!("  {} {ll:.4}", i + 1);
    }

    let fwd = train_ibm2(&fwd_pairs, 5, &ibm1.lexical)?;
    let rev = train_ibm2(&rev_pairs, 5, &train_ibm1(&rev_pairs, 5)?.lexical)?;

    println!("\nstrongest translations of राम:");
    if let Some(row) = fwd.lexical.row("राम") {
        let mut entries: Vec<_> = row.iter().collect();
        entries.sort_by(|a, b| b.1.total_cmp(a.1));
        for (word, p) in entries.iter().take(3) {
            println!("  {word} {p:.4}");
        }
    }

    let (src, tgt) = (&fwd_pairs[0].0, &fwd_pairs[0].1);
    let forward = viterbi_align(&fwd.lexical, Some(&fwd.distortion), src, tgt);
    let reverse = viterbi_align(&rev.lexical, Some(&rev.distortion), tgt, src);
    let merged = symmetrize(&forward, &reverse, Symmetrization::GrowDiagFinalAnd)?;

    println!("\n{} ||| {}", src.join(" "), tgt.join(" "));
    println!("forward:    {}", forward.to_pharaoh());
    println!("reverse:    {}", reverse.transpose().to_pharaoh());
    println!("symmetrized {}", merged.to_pharaoh());
    for (i, j) in merged.links() {
        println!("  {} -> {}", src[i], tgt[j]);
    }
    Ok(())
}
