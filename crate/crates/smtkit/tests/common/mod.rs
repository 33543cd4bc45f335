//! Shared test support: a deterministic corpus generator for a tiny
//! Hindi-to-English toy language, plus independent brute-force oracles
//! for the metrics, phrase extraction, and decoder search.

#![allow(dead_code)]

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use smtkit::decode::{reordering_distance, FeatureWeights, OOV_LOG_SCORE};
use smtkit::lm::{LanguageModel, SENTENCE_END, SENTENCE_START};
use smtkit::phrase::{PhraseSpan, PhraseTable};

/// Small multiplicative congruential generator, so tests need no RNG
/// dependency and replay identically everywhere.
pub struct Lcg(u64);

impl Lcg {
    pub fn new(seed: u64) -> Lcg {
        Lcg(seed | 1)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        self.0
    }

    /// Uniform draw from `0..n`.
    pub fn below(&mut self, n: usize) -> usize {
        ((self.next_u64() >> 33) as usize) % n
    }

    /// Uniform draw from `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
}

/// Subject, verb, adjective, and object vocabularies of the toy
/// language: Devanagari on the source side, lowercase ASCII on the
/// target side, 50 words per side in total.
pub const SUBJECTS: [(&str, &str); 14] = [
    ("राम", "ram"),
    ("सीता", "sita"),
    ("लडका", "boy"),
    ("लडकी", "girl"),
    ("आदमी", "man"),
    ("औरत", "woman"),
    ("बालक", "child"),
    ("मित्र", "friend"),
    ("राजा", "king"),
    ("रानी", "queen"),
    ("किसान", "farmer"),
    ("शिक्षक", "teacher"),
    ("छात्र", "student"),
    ("कवि", "poet"),
];

pub const VERBS: [(&str, &str); 12] = [
    ("देखता", "sees"),
    ("खाता", "eats"),
    ("पीता", "drinks"),
    ("पढता", "reads"),
    ("लिखता", "writes"),
    ("सुनता", "hears"),
    ("बोलता", "speaks"),
    ("चलता", "walks"),
    ("गाता", "sings"),
    ("सोता", "sleeps"),
    ("दौडता", "runs"),
    ("समझता", "thinks"),
];

pub const ADJECTIVES: [(&str, &str); 12] = [
    ("बडा", "big"),
    ("छोटा", "small"),
    ("लाल", "red"),
    ("नीला", "blue"),
    ("हरा", "green"),
    ("पीला", "yellow"),
    ("काला", "black"),
    ("सफेद", "white"),
    ("नया", "new"),
    ("पुराना", "old"),
    ("अच्छा", "good"),
    ("सुनदर", "pretty"),
];

pub const OBJECTS: [(&str, &str); 12] = [
    ("आम", "mango"),
    ("केला", "banana"),
    ("सेब", "apple"),
    ("दूध", "milk"),
    ("पानी", "water"),
    ("घर", "house"),
    ("पेड", "tree"),
    ("फूल", "flower"),
    ("पुस्तक", "book"),
    ("गेंद", "ball"),
    ("रोटी", "bread"),
    ("चावल", "rice"),
];

/// One sentence pair of the toy language. The source reads
/// subject-adjective-object-verb; the target moves the verb to second
/// position, so every pair exercises reordering.
fn toy_pair(s: usize, v: usize, a: usize, o: usize) -> (String, String) {
    let source = format!(
        "{} {} {} {}",
        SUBJECTS[s].0, ADJECTIVES[a].0, OBJECTS[o].0, VERBS[v].0
    );
    let target = format!(
        "{} {} {} {}",
        SUBJECTS[s].1, VERBS[v].1, ADJECTIVES[a].1, OBJECTS[o].1
    );
    (source, target)
}

/// Deterministic toy corpus. The first rows cycle through the whole
/// lexicon so every word is guaranteed to occur in training; the rest
/// are uniform draws.
pub fn toy_corpus(count: usize, rng: &mut Lcg) -> Vec<(String, String)> {
    let mut pairs = Vec::with_capacity(count);
    for i in 0..count {
        if i < SUBJECTS.len() {
            pairs.push(toy_pair(
                i % SUBJECTS.len(),
                i % VERBS.len(),
                i % ADJECTIVES.len(),
                i % OBJECTS.len(),
            ));
        } else {
            pairs.push(toy_pair(
                rng.below(SUBJECTS.len()),
                rng.below(VERBS.len()),
                rng.below(ADJECTIVES.len()),
                rng.below(OBJECTS.len()),
            ));
        }
    }
    pairs
}

/// Purely random toy sentences, for held-out sets.
pub fn toy_random(count: usize, rng: &mut Lcg) -> Vec<(String, String)> {
    (0..count)
        .map(|_| {
            toy_pair(
                rng.below(SUBJECTS.len()),
                rng.below(VERBS.len()),
                rng.below(ADJECTIVES.len()),
                rng.below(OBJECTS.len()),
            )
        })
        .collect()
}

/// Writes the two sides of a corpus under `<prefix>.<lang>`.
pub fn write_side_files(prefix: &Path, pairs: &[(String, String)], src_lang: &str, tgt_lang: &str) {
    let side = |lang: &str| {
        let mut name = prefix.file_name().unwrap().to_os_string();
        name.push(".");
        name.push(lang);
        prefix.with_file_name(name)
    };
    let mut src = String::new();
    let mut tgt = String::new();
    for (s, t) in pairs {
        src.push_str(s);
        src.push('\n');
        tgt.push_str(t);
        tgt.push('\n');
    }
    fs::write(side(src_lang), src).unwrap();
    fs::write(side(tgt_lang), tgt).unwrap();
}

pub fn words(line: &str) -> Vec<String> {
    line.split_whitespace().map(str::to_string).collect()
}

// ---------------------------------------------------------------------
// Brute-force metric oracles. These re-derive each score from the
// definitions with no shared code beyond the token type.
// ---------------------------------------------------------------------

fn oracle_ngrams(tokens: &[String], n: usize) -> HashMap<Vec<String>, usize> {
    let mut m = HashMap::new();
    if tokens.len() >= n {
        for i in 0..=tokens.len() - n {
            *m.entry(tokens[i..i + n].to_vec()).or_insert(0) += 1;
        }
    }
    m
}

/// Corpus BLEU by direct clipped counting.
pub fn bleu_oracle(hyps: &[Vec<String>], refs: &[Vec<String>], max_n: usize) -> f64 {
    let hyp_len: usize = hyps.iter().map(Vec::len).sum();
    let ref_len: usize = refs.iter().map(Vec::len).sum();
    let mut log_sum = 0.0;
    for n in 1..=max_n {
        let mut matched = 0usize;
        let mut total = 0usize;
        for (h, r) in hyps.iter().zip(refs) {
            let rc = oracle_ngrams(r, n);
            for (gram, count) in oracle_ngrams(h, n) {
                matched += count.min(rc.get(&gram).copied().unwrap_or(0));
            }
            total += h.len().saturating_sub(n - 1);
        }
        if matched == 0 || total == 0 {
            return 0.0;
        }
        log_sum += (matched as f64 / total as f64).ln();
    }
    let bp = if hyp_len == 0 {
        0.0
    } else if hyp_len < ref_len {
        (1.0 - ref_len as f64 / hyp_len as f64).exp()
    } else {
        1.0
    };
    bp * (log_sum / max_n as f64).exp()
}

/// Sentence RIBES by re-deriving the word matching (unique unigram, else
/// unique left neighbor bigram, else unique right neighbor bigram, each
/// reference position used once) and counting rank pairs directly.
pub fn ribes_oracle(hyp: &[String], reference: &[String], alpha: f64, beta: f64) -> f64 {
    if hyp.is_empty() {
        return 0.0;
    }
    let occurrences = |tokens: &[String], w: &str| tokens.iter().filter(|t| *t == w).count();
    let bigrams = |tokens: &[String], a: &str, b: &str| {
        (1..tokens.len())
            .filter(|&i| tokens[i - 1] == a && tokens[i] == b)
            .count()
    };
    let mut used = vec![false; reference.len()];
    let mut positions: Vec<usize> = Vec::new();
    for (i, w) in hyp.iter().enumerate() {
        let mut pick: Option<usize> = None;
        if occurrences(hyp, w) == 1 && occurrences(reference, w) == 1 {
            pick = reference.iter().position(|r| r == w);
        } else {
            if i > 0 && bigrams(hyp, &hyp[i - 1], w) == 1 && bigrams(reference, &hyp[i - 1], w) == 1
            {
                pick = (1..reference.len())
                    .find(|&p| reference[p - 1] == hyp[i - 1] && reference[p] == *w);
            }
            if pick.is_none()
                && i + 1 < hyp.len()
                && bigrams(hyp, w, &hyp[i + 1]) == 1
                && bigrams(reference, w, &hyp[i + 1]) == 1
            {
                pick = (1..reference.len())
                    .find(|&p| reference[p - 1] == *w && reference[p] == hyp[i + 1])
                    .map(|p| p - 1);
            }
        }
        if let Some(p) = pick {
            if !used[p] {
                used[p] = true;
                positions.push(p);
            }
        }
    }
    if positions.len() < 2 {
        return 0.0;
    }
    let mut concordant = 0usize;
    let mut pairs = 0usize;
    for i in 0..positions.len() {
        for j in i + 1..positions.len() {
            pairs += 1;
            if positions[j] > positions[i] {
                concordant += 1;
            }
        }
    }
    let nkt = concordant as f64 / pairs as f64;
    let p1 = positions.len() as f64 / hyp.len() as f64;
    let bp = if hyp.len() < reference.len() {
        (1.0 - reference.len() as f64 / hyp.len() as f64).exp()
    } else {
        1.0
    };
    nkt * p1.powf(alpha) * bp.powf(beta)
}

/// Minimal chunk count over all ways of placing the full match quota,
/// by plain exhaustive search.
fn min_chunks_exhaustive(
    hyp: &[String],
    reference: &[String],
    i: usize,
    used: &mut Vec<bool>,
    matched: usize,
    last: Option<usize>,
    chunks: usize,
    quota: usize,
    best: &mut usize,
) {
    if chunks >= *best {
        return;
    }
    if matched + (hyp.len() - i) < quota {
        return;
    }
    if i == hyp.len() {
        if matched == quota {
            *best = chunks;
        }
        return;
    }
    for p in 0..reference.len() {
        if !used[p] && reference[p] == hyp[i] {
            used[p] = true;
            let extends = last == Some(p.wrapping_sub(1)) && p > 0;
            min_chunks_exhaustive(
                hyp,
                reference,
                i + 1,
                used,
                matched + 1,
                Some(p),
                chunks + usize::from(!extends),
                quota,
                best,
            );
            used[p] = false;
        }
    }
    // Skipping hyp[i] always breaks the current chunk.
    min_chunks_exhaustive(hyp, reference, i + 1, used, matched, None, chunks, quota, best);
}

/// Sentence METEOR from the definitions, with exhaustive chunk
/// minimization.
pub fn meteor_oracle(hyp: &[String], reference: &[String]) -> f64 {
    let mut hc: HashMap<&str, usize> = HashMap::new();
    for w in hyp {
        *hc.entry(w).or_insert(0) += 1;
    }
    let mut rc: HashMap<&str, usize> = HashMap::new();
    for w in reference {
        *rc.entry(w).or_insert(0) += 1;
    }
    let quota: usize = hc
        .iter()
        .map(|(w, n)| (*n).min(rc.get(w).copied().unwrap_or(0)))
        .sum();
    if quota == 0 {
        return 0.0;
    }
    let mut best = usize::MAX;
    let mut used = vec![false; reference.len()];
    min_chunks_exhaustive(hyp, reference, 0, &mut used, 0, None, 0, quota, &mut best);
    assert!(best < usize::MAX, "quota is always placeable");
    let p = quota as f64 / hyp.len() as f64;
    let r = quota as f64 / reference.len() as f64;
    let fmean = 10.0 * p * r / (r + 9.0 * p);
    let penalty = if best > 1 {
        0.5 * (best as f64 / quota as f64).powi(3)
    } else {
        0.0
    };
    fmean * (1.0 - penalty)
}

// ---------------------------------------------------------------------
// Phrase extraction oracle: enumerate every span rectangle and test
// consistency directly.
// ---------------------------------------------------------------------

pub fn extraction_oracle(
    src_len: usize,
    tgt_len: usize,
    links: &[(usize, usize)],
    max_len: usize,
) -> Vec<PhraseSpan> {
    let mut spans = Vec::new();
    for i1 in 0..src_len {
        for i2 in i1..src_len.min(i1 + max_len) {
            for j1 in 0..tgt_len {
                for j2 in j1..tgt_len.min(j1 + max_len) {
                    let inside = |i: usize, j: usize| i >= i1 && i <= i2 && j >= j1 && j <= j2;
                    let any_inside = links.iter().any(|&(i, j)| inside(i, j));
                    let consistent = links.iter().all(|&(i, j)| {
                        let src_in = i >= i1 && i <= i2;
                        let tgt_in = j >= j1 && j <= j2;
                        src_in == tgt_in
                    });
                    if any_inside && consistent {
                        spans.push(PhraseSpan {
                            src: (i1, i2),
                            tgt: (j1, j2),
                        });
                    }
                }
            }
        }
    }
    spans.sort();
    spans
}

// ---------------------------------------------------------------------
// Decoder oracle: exhaustive search over every segmentation, coverage
// order, and phrase choice, mirroring the model score term by term.
// ---------------------------------------------------------------------

struct OracleOption {
    start: usize,
    end: usize,
    tgt: Vec<String>,
    log_features: [f64; 4],
}

fn oracle_options(src: &[String], table: &PhraseTable, max_phrase_len: usize) -> Vec<OracleOption> {
    let n = src.len();
    let mut all = Vec::new();
    for start in 0..n {
        for end in start..n.min(start + max_phrase_len) {
            match table.lookup(&src[start..=end]) {
                Some(entries) => {
                    for e in entries {
                        all.push(OracleOption {
                            start,
                            end,
                            tgt: e.tgt.clone(),
                            log_features: [
                                e.phi_tgt_given_src.ln(),
                                e.phi_src_given_tgt.ln(),
                                e.lex_tgt_given_src.ln(),
                                e.lex_src_given_tgt.ln(),
                            ],
                        });
                    }
                }
                None => {
                    if start == end {
                        all.push(OracleOption {
                            start,
                            end,
                            tgt: vec![src[start].clone()],
                            log_features: [OOV_LOG_SCORE; 4],
                        });
                    }
                }
            }
        }
    }
    all
}

#[allow(clippy::too_many_arguments)]
fn oracle_search(
    options: &[OracleOption],
    n: usize,
    covered: u32,
    last_end: usize,
    tail: &[String],
    score: f64,
    lm: &dyn LanguageModel,
    weights: &FeatureWeights,
    best: &mut f64,
) {
    if covered == (1u32 << n) - 1 {
        let total = score + weights.lm * lm.log_prob(SENTENCE_END, tail);
        if total > *best {
            *best = total;
        }
        return;
    }
    let tail_len = lm.order().saturating_sub(1);
    for opt in options {
        let mask = ((1u32 << (opt.end - opt.start + 1)) - 1) << opt.start;
        if covered & mask != 0 {
            continue;
        }
        let mut log_lm = 0.0;
        let mut next_tail = tail.to_vec();
        for token in &opt.tgt {
            log_lm += lm.log_prob(token, &next_tail);
            next_tail.push(token.clone());
            if next_tail.len() > tail_len {
                next_tail.remove(0);
            }
        }
        let distance = reordering_distance(last_end, opt.start + 1);
        let next_score = score
            + weights.lm * log_lm
            + weights.phi_ts * opt.log_features[0]
            + weights.phi_st * opt.log_features[1]
            + weights.lex_ts * opt.log_features[2]
            + weights.lex_st * opt.log_features[3]
            + weights.reorder * -(distance as f64)
            + weights.word_penalty * -(opt.tgt.len() as f64);
        oracle_search(
            options,
            n,
            covered | mask,
            opt.end + 1,
            &next_tail,
            next_score,
            lm,
            weights,
            best,
        );
    }
}

/// Best reachable model score by exhaustive enumeration.
pub fn best_score_oracle(
    src: &[String],
    table: &PhraseTable,
    lm: &dyn LanguageModel,
    weights: &FeatureWeights,
    max_phrase_len: usize,
) -> f64 {
    assert!(src.len() <= 32, "oracle uses a 32-bit coverage mask");
    let options = oracle_options(src, table, max_phrase_len);
    let tail = vec![SENTENCE_START.to_string(); lm.order().saturating_sub(1)];
    let mut best = f64::NEG_INFINITY;
    oracle_search(
        &options,
        src.len(),
        0,
        0,
        &tail,
        0.0,
        lm,
        weights,
        &mut best,
    );
    best
}
