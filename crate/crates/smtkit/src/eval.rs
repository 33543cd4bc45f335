//! Translation quality metrics: corpus BLEU, RIBES, and METEOR.
//!
//! All three score tokenized hypotheses against single references. RIBES
//! and METEOR are sentence-level metrics averaged over the corpus; BLEU
//! aggregates n-gram counts over the whole corpus.

use std::collections::HashMap;

use crate::error::{Result, SmtError};

/// Corpus BLEU with its intermediate quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct BleuReport {
    pub score: f64,
    /// Clipped n-gram precisions for n = 1..=max_n.
    pub precisions: Vec<f64>,
    pub brevity_penalty: f64,
    pub hyp_len: usize,
    pub ref_len: usize,
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

fn check_corpus(hyps: &[Vec<String>], refs: &[Vec<String>]) -> Result<()> {
    if hyps.len() != refs.len() {
        return Err(SmtError::DimensionMismatch(format!(
            "{} hypotheses against {} references",
            hyps.len(),
            refs.len()
        )));
    }
    if hyps.is_empty() {
        return Err(SmtError::EmptyCorpus(
            "evaluation needs at least one sentence".to_string(),
        ));
    }
    Ok(())
}

/// Corpus BLEU over clipped n-gram precisions up to `max_n`, with the
/// brevity penalty `exp(1 - r/c)` applied when the hypothesis side is
/// shorter than the reference side. Any zero precision zeroes the score.
pub fn bleu_corpus(hyps: &[Vec<String>], refs: &[Vec<String>], max_n: usize) -> Result<BleuReport> {
    if max_n == 0 {
        return Err(SmtError::InvalidParameter(
            "BLEU needs max_n of at least 1".to_string(),
        ));
    }
    check_corpus(hyps, refs)?;

    let hyp_len: usize = hyps.iter().map(Vec::len).sum();
    let ref_len: usize = refs.iter().map(Vec::len).sum();
    let mut precisions = Vec::with_capacity(max_n);
    for n in 1..=max_n {
        let mut matched = 0usize;
        let mut total = 0usize;
        for (hyp, reference) in hyps.iter().zip(refs) {
            let ref_counts = ngram_counts(reference, n);
            for (gram, count) in ngram_counts(hyp, n) {
                matched += count.min(ref_counts.get(gram).copied().unwrap_or(0));
            }
            total += hyp.len().saturating_sub(n - 1);
        }
        precisions.push(if total == 0 {
            0.0
        } else {
            matched as f64 / total as f64
        });
    }

    let brevity_penalty = if hyp_len == 0 {
        0.0
    } else if hyp_len < ref_len {
        (1.0 - ref_len as f64 / hyp_len as f64).exp()
    } else {
        1.0
    };
    let score = if precisions.iter().any(|&p| p <= 0.0) {
        0.0
    } else {
        let mean_log: f64 =
            precisions.iter().map(|p| p.ln()).sum::<f64>() / max_n as f64;
        brevity_penalty * mean_log.exp()
    };
    Ok(BleuReport {
        score,
        precisions,
        brevity_penalty,
        hyp_len,
        ref_len,
    })
}

/// Sentence-level BLEU used as a tuning objective: precisions for
/// n >= 2 get add-one smoothing on both numerator and denominator, so a
/// single sentence yields a usable gradient signal. A zero unigram
/// precision still zeroes the score.
pub fn bleu_sentence(hyp: &[String], reference: &[String], max_n: usize) -> f64 {
    if hyp.is_empty() {
        return 0.0;
    }
    let mut log_sum = 0.0;
    for n in 1..=max_n {
        let ref_counts = ngram_counts(reference, n);
        let mut matched = 0usize;
        for (gram, count) in ngram_counts(hyp, n) {
            matched += count.min(ref_counts.get(gram).copied().unwrap_or(0));
        }
        let total = hyp.len().saturating_sub(n - 1);
        let p = if n == 1 {
            matched as f64 / total as f64
        } else {
            (matched + 1) as f64 / (total + 1) as f64
        };
        if p <= 0.0 {
            return 0.0;
        }
        log_sum += p.ln();
    }
    let bp = if hyp.len() < reference.len() {
        (1.0 - reference.len() as f64 / hyp.len() as f64).exp()
    } else {
        1.0
    };
    bp * (log_sum / max_n as f64).exp()
}

/// Kendall's tau over a sequence of distinct ranks: the fraction of
/// concordant pairs scaled to [-1, 1]. Returns `None` for fewer than two
/// ranks, where no pair exists.
pub fn kendall_tau(ranks: &[usize]) -> Option<f64> {
    if ranks.len() < 2 {
        return None;
    }
    let mut concordant = 0usize;
    let mut total = 0usize;
    for i in 0..ranks.len() {
        for j in i + 1..ranks.len() {
            total += 1;
            if ranks[j] > ranks[i] {
                concordant += 1;
            }
        }
    }
    // 2c/n - 1 computed with an integer numerator to avoid rounding.
    Some((2 * concordant as i64 - total as i64) as f64 / total as f64)
}

/// RIBES exponents for unigram precision and the brevity penalty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RibesConfig {
    pub alpha: f64,
    pub beta: f64,
}

impl Default for RibesConfig {
    fn default() -> Self {
        RibesConfig {
            alpha: 0.25,
            beta: 0.10,
        }
    }
}

/// Sentence RIBES with its intermediate quantities. The score is
/// `nkt * p1^alpha * bp^beta` with `nkt = (tau + 1) / 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct RibesReport {
    pub matches: usize,
    pub tau: f64,
    pub nkt: f64,
    pub p1: f64,
    pub bp: f64,
    pub score: f64,
}

/// Maps hypothesis words to reference positions the way RIBES does:
/// a word aligns when it occurs exactly once in both sentences, or when
/// one of its neighbor bigrams occurs exactly once in both. Each
/// reference position is used at most once.
fn token_counts(tokens: &[String]) -> HashMap<&str, usize> {
    let mut m = HashMap::new();
    for t in tokens {
        *m.entry(t.as_str()).or_insert(0) += 1;
    }
    m
}

fn ribes_alignment(hyp: &[String], reference: &[String]) -> Vec<usize> {
    let hyp_counts = token_counts(hyp);
    let ref_counts = token_counts(reference);
    let bigram_count = |tokens: &[String], a: &str, b: &str| {
        tokens
            .windows(2)
            .filter(|w| w[0] == a && w[1] == b)
            .count()
    };

    let mut used = vec![false; reference.len()];
    let mut positions = Vec::new();
    for (i, word) in hyp.iter().enumerate() {
        let in_ref = ref_counts.get(word.as_str()).copied().unwrap_or(0);
        if in_ref == 0 {
            continue;
        }
        let in_hyp = hyp_counts[word.as_str()];
        let mut target: Option<usize> = None;
        if in_ref == 1 && in_hyp == 1 {
            target = reference.iter().position(|r| r == word);
        } else {
            // Disambiguate by a unique neighbor bigram, left then right.
            if i > 0 {
                let prev = &hyp[i - 1];
                if bigram_count(hyp, prev, word) == 1
                    && bigram_count(reference, prev, word) == 1
                {
                    target = reference
                        .windows(2)
                        .position(|w| &w[0] == prev && &w[1] == word)
                        .map(|p| p + 1);
                }
            }
            if target.is_none() && i + 1 < hyp.len() {
                let next = &hyp[i + 1];
                if bigram_count(hyp, word, next) == 1
                    && bigram_count(reference, word, next) == 1
                {
                    target = reference
                        .windows(2)
                        .position(|w| &w[0] == word && &w[1] == next);
                }
            }
        }
        if let Some(p) = target {
            if !used[p] {
                used[p] = true;
                positions.push(p);
            }
        }
    }
    positions
}

/// Sentence RIBES. Fewer than two matched words leave no word-order
/// evidence; the rank correlation then bottoms out and the score is zero.
pub fn ribes_sentence(hyp: &[String], reference: &[String], config: &RibesConfig) -> RibesReport {
    if hyp.is_empty() {
        return RibesReport {
            matches: 0,
            tau: -1.0,
            nkt: 0.0,
            p1: 0.0,
            bp: 1.0,
            score: 0.0,
        };
    }
    let positions = ribes_alignment(hyp, reference);
    let matches = positions.len();
    let p1 = matches as f64 / hyp.len() as f64;
    let bp = if hyp.len() < reference.len() {
        (1.0 - reference.len() as f64 / hyp.len() as f64).exp()
    } else {
        1.0
    };
    let (tau, nkt) = match kendall_tau(&positions) {
        Some(tau) => (tau, (tau + 1.0) / 2.0),
        None => (-1.0, 0.0),
    };
    let score = nkt * p1.powf(config.alpha) * bp.powf(config.beta);
    RibesReport {
        matches,
        tau,
        nkt,
        p1,
        bp,
        score,
    }
}

/// Sentence METEOR with its intermediate quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct MeteorReport {
    pub matches: usize,
    pub chunks: usize,
    pub precision: f64,
    pub recall: f64,
    pub fmean: f64,
    pub penalty: f64,
    pub score: f64,
}

/// Bit set over reference positions, usable as a memo key.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct RefMask {
    bits: Vec<u64>,
}

impl RefMask {
    fn new(n: usize) -> RefMask {
        RefMask {
            bits: vec![0; n.div_ceil(64)],
        }
    }

    fn get(&self, i: usize) -> bool {
        self.bits[i / 64] >> (i % 64) & 1 == 1
    }

    fn with(&self, i: usize) -> RefMask {
        let mut next = self.clone();
        next.bits[i / 64] |= 1 << (i % 64);
        next
    }
}

/// Exact-match METEOR matching state: the quota for each word is
/// min(hypothesis count, reference count), and the chunk count is
/// minimized over all ways of placing those matches.
struct ChunkSearch<'a> {
    hyp: &'a [String],
    /// Reference positions per word.
    ref_positions: HashMap<&'a str, Vec<usize>>,
    /// Matches still required per word at the end.
    quota: HashMap<&'a str, usize>,
    /// Occurrences of hyp[i] strictly after position i.
    later: Vec<usize>,
    memo: HashMap<(usize, RefMask, Option<usize>), usize>,
}

impl<'a> ChunkSearch<'a> {
    fn new(hyp: &'a [String], reference: &'a [String]) -> ChunkSearch<'a> {
        let mut ref_positions: HashMap<&str, Vec<usize>> = HashMap::new();
        for (j, w) in reference.iter().enumerate() {
            ref_positions.entry(w).or_default().push(j);
        }
        let mut hyp_counts: HashMap<&str, usize> = HashMap::new();
        for w in hyp {
            *hyp_counts.entry(w).or_insert(0) += 1;
        }
        let quota: HashMap<&str, usize> = hyp_counts
            .iter()
            .map(|(&w, &h)| {
                let r = ref_positions.get(w).map_or(0, Vec::len);
                (w, h.min(r))
            })
            .collect();
        let mut later = vec![0; hyp.len()];
        let mut seen: HashMap<&str, usize> = HashMap::new();
        for (i, w) in hyp.iter().enumerate().rev() {
            later[i] = seen.get(w.as_str()).copied().unwrap_or(0);
            *seen.entry(w).or_insert(0) += 1;
        }
        ChunkSearch {
            hyp,
            ref_positions,
            quota,
            later,
            memo: HashMap::new(),
        }
    }

    fn matched_so_far(&self, word: &str, used: &RefMask) -> usize {
        self.ref_positions
            .get(word)
            .map_or(0, |ps| ps.iter().filter(|&&p| used.get(p)).count())
    }

    /// Minimum chunks for hyp[i..] given the used reference positions and
    /// the reference position matched at i-1, if any.
    fn min_chunks(&mut self, i: usize, used: &RefMask, last: Option<usize>) -> usize {
        if i == self.hyp.len() {
            return 0;
        }
        let key = (i, used.clone(), last);
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let word = self.hyp[i].as_str();
        let need = self.quota[word];
        let done = self.matched_so_far(word, used);
        let mut best = usize::MAX;
        if done < need {
            let candidates = self.ref_positions[word].clone();
            for j in candidates {
                if used.get(j) {
                    continue;
                }
                let adjacent = j > 0 && last == Some(j - 1);
                let cost = if adjacent { 0 } else { 1 };
                let rest = self.min_chunks(i + 1, &used.with(j), Some(j));
                best = best.min(cost + rest);
            }
        }
        // Skipping is allowed only if later occurrences can still meet
        // the quota.
        if done + self.later[i] >= need {
            best = best.min(self.min_chunks(i + 1, used, None));
        }
        self.memo.insert(key, best);
        best
    }
}

/// Exact-match METEOR: matches are capped per word by both sides, chunks
/// are the fewest contiguous matched runs over all maximal matchings, and
/// the score is `fmean * (1 - penalty)` with `fmean = 10PR / (R + 9P)`
/// and `penalty = 0.5 * (chunks / matches)^3` once there is more than one
/// chunk.
pub fn meteor_sentence(hyp: &[String], reference: &[String]) -> MeteorReport {
    let mut search = ChunkSearch::new(hyp, reference);
    let matches: usize = search.quota.values().sum();
    if matches == 0 || hyp.is_empty() || reference.is_empty() {
        return MeteorReport {
            matches: 0,
            chunks: 0,
            precision: 0.0,
            recall: 0.0,
            fmean: 0.0,
            penalty: 0.0,
            score: 0.0,
        };
    }
    let chunks = search.min_chunks(0, &RefMask::new(reference.len()), None);
    let precision = matches as f64 / hyp.len() as f64;
    let recall = matches as f64 / reference.len() as f64;
    let fmean = 10.0 * precision * recall / (recall + 9.0 * precision);
    let penalty = if chunks > 1 {
        0.5 * (chunks as f64 / matches as f64).powi(3)
    } else {
        0.0
    };
    MeteorReport {
        matches,
        chunks,
        precision,
        recall,
        fmean,
        penalty,
        score: fmean * (1.0 - penalty),
    }
}

/// Which sentence-level metric to average over a corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SentenceMetric {
    Ribes,
    Meteor,
}

/// Mean sentence-level metric over a corpus.
pub fn metric_corpus(
    metric: SentenceMetric,
    hyps: &[Vec<String>],
    refs: &[Vec<String>],
    ribes: &RibesConfig,
) -> Result<f64> {
    check_corpus(hyps, refs)?;
    let total: f64 = hyps
        .iter()
        .zip(refs)
        .map(|(h, r)| match metric {
            SentenceMetric::Ribes => ribes_sentence(h, r, ribes).score,
            SentenceMetric::Meteor => meteor_sentence(h, r).score,
        })
        .sum();
    Ok(total / hyps.len() as f64)
}
