//! Stack decoding for phrase-based translation.
//!
//! Hypotheses grow left to right in the output while consuming arbitrary
//! uncovered source spans, so the search handles reordering. Hypotheses
//! live in stacks indexed by the number of covered source words; each
//! stack is pruned to a fixed size, and hypotheses that agree on
//! coverage, last covered position, and language model state recombine.
//! All tie-breaking is deterministic: higher score first, then the
//! lexicographically smaller output.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SmtError};
use crate::lm::{LanguageModel, SENTENCE_END, SENTENCE_START};
use crate::phrase::PhraseTable;

/// Log-linear weights over the decoder's seven feature functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureWeights {
    pub lm: f64,
    pub phi_ts: f64,
    pub phi_st: f64,
    pub lex_ts: f64,
    pub lex_st: f64,
    pub reorder: f64,
    pub word_penalty: f64,
}

impl Default for FeatureWeights {
    fn default() -> Self {
        FeatureWeights {
            lm: 0.5,
            phi_ts: 0.2,
            phi_st: 0.2,
            lex_ts: 0.2,
            lex_st: 0.2,
            reorder: 0.3,
            word_penalty: 0.5,
        }
    }
}

impl FeatureWeights {
    /// Weight names in sweep order.
    pub const NAMES: [&'static str; 7] = [
        "lm",
        "phi_ts",
        "phi_st",
        "lex_ts",
        "lex_st",
        "reorder",
        "word_penalty",
    ];

    /// Index of the reordering weight, the one kept non-negative.
    pub const REORDER_INDEX: usize = 5;

    pub fn get(&self, idx: usize) -> f64 {
        [
            self.lm,
            self.phi_ts,
            self.phi_st,
            self.lex_ts,
            self.lex_st,
            self.reorder,
            self.word_penalty,
        ][idx]
    }

    pub fn set(&mut self, idx: usize, value: f64) {
        match idx {
            0 => self.lm = value,
            1 => self.phi_ts = value,
            2 => self.phi_st = value,
            3 => self.lex_ts = value,
            4 => self.lex_st = value,
            5 => self.reorder = value,
            6 => self.word_penalty = value,
            _ => panic!("weight index {idx} out of range"),
        }
    }
}

/// Writes weights as `name value` lines in sweep order.
pub fn write_weights(weights: &FeatureWeights, path: &Path) -> Result<()> {
    let mut out = String::new();
    for (idx, name) in FeatureWeights::NAMES.iter().enumerate() {
        out.push_str(&format!("{name} {}\n", weights.get(idx)));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Reads a weights file; all seven weights must be present.
pub fn read_weights(path: &Path) -> Result<FeatureWeights> {
    let text = fs::read_to_string(path)?;
    let mut weights = FeatureWeights::default();
    let mut seen = [false; 7];
    for (idx, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let err = |message: String| SmtError::ParseError {
            path: path.to_path_buf(),
            line: idx + 1,
            message,
        };
        let (name, value) = line
            .split_once(' ')
            .ok_or_else(|| err("expected `name value`".to_string()))?;
        let value: f64 = value
            .parse()
            .map_err(|_| err(format!("bad weight value `{value}`")))?;
        let pos = FeatureWeights::NAMES
            .iter()
            .position(|n| *n == name)
            .ok_or_else(|| err(format!("unknown weight `{name}`")))?;
        weights.set(pos, value);
        seen[pos] = true;
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(SmtError::ParseError {
            path: path.to_path_buf(),
            line: 0,
            message: format!("missing weight `{}`", FeatureWeights::NAMES[missing]),
        });
    }
    Ok(weights)
}

/// Search-space controls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecoderConfig {
    /// Hypotheses kept per stack.
    pub stack_size: usize,
    /// Maximum reordering distance; `None` lifts the limit.
    pub distortion_limit: Option<usize>,
    /// Longest source span looked up in the phrase table.
    pub max_phrase_len: usize,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        DecoderConfig {
            stack_size: 100,
            distortion_limit: Some(6),
            max_phrase_len: 7,
        }
    }
}

/// Log value every feature of an out-of-vocabulary copy-through gets.
pub const OOV_LOG_SCORE: f64 = -10.0;

/// Words skipped between consecutive phrases: with the previous phrase
/// ending at 1-based position `prev_end` and the next starting at 1-based
/// position `next_start`, the distance is `|next_start - prev_end - 1|`.
/// Monotone decoding costs zero everywhere.
pub fn reordering_distance(prev_end: usize, next_start: usize) -> usize {
    (next_start as i64 - prev_end as i64 - 1).unsigned_abs() as usize
}

/// One phrase application inside a derivation.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivationStep {
    /// Inclusive 0-based source span.
    pub src_span: (usize, usize),
    pub tgt: Vec<String>,
    /// Natural logs of the four phrase features in table order.
    pub log_features: [f64; 4],
    /// Language model contribution of this phrase's tokens (unweighted).
    pub log_lm: f64,
    pub reorder_distance: usize,
    pub oov: bool,
}

/// A complete decoding of one sentence.
#[derive(Debug, Clone, PartialEq)]
pub struct Derivation {
    pub steps: Vec<DerivationStep>,
    /// Unweighted log probability of the sentence-end transition.
    pub end_log_lm: f64,
    /// Total weighted model score.
    pub score: f64,
}

impl Derivation {
    pub fn output_tokens(&self) -> Vec<String> {
        self.steps.iter().flat_map(|s| s.tgt.iter().cloned()).collect()
    }

    pub fn total_reorder_distance(&self) -> usize {
        self.steps.iter().map(|s| s.reorder_distance).sum()
    }

    /// Human-readable trace: one line per step with spans, phrases, and
    /// unweighted feature values.
    pub fn trace(&self, src: &[String]) -> String {
        let mut out = String::new();
        for (idx, step) in self.steps.iter().enumerate() {
            let (a, b) = step.src_span;
            let src_phrase = src[a..=b].join(" ");
            out.push_str(&format!(
                "step {}: [{}..{}] \"{}\" -> \"{}\" | d={} lm={} phi_ts={} phi_st={} lex_ts={} lex_st={}{}\n",
                idx + 1,
                a,
                b,
                src_phrase,
                step.tgt.join(" "),
                step.reorder_distance,
                step.log_lm,
                step.log_features[0],
                step.log_features[1],
                step.log_features[2],
                step.log_features[3],
                if step.oov { " oov" } else { "" },
            ));
        }
        out.push_str(&format!("end: lm={}\n", self.end_log_lm));
        out.push_str(&format!("score: {}\n", self.score));
        out
    }
}

/// One way to translate a source span.
#[derive(Debug, Clone)]
struct SpanOption {
    tgt: Vec<String>,
    log_features: [f64; 4],
    oov: bool,
}

/// Word-coverage bitset over the source sentence.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Coverage {
    bits: Vec<u64>,
}

impl Coverage {
    fn new(n: usize) -> Coverage {
        Coverage {
            bits: vec![0; n.div_ceil(64)],
        }
    }

    fn get(&self, i: usize) -> bool {
        self.bits[i / 64] >> (i % 64) & 1 == 1
    }

    fn set(&mut self, i: usize) {
        self.bits[i / 64] |= 1 << (i % 64);
    }

    fn span_free(&self, a: usize, b: usize) -> bool {
        (a..=b).all(|i| !self.get(i))
    }

    fn first_uncovered(&self, n: usize) -> Option<usize> {
        (0..n).find(|&i| !self.get(i))
    }
}

#[derive(Debug, Clone)]
struct Hypothesis {
    coverage: Coverage,
    /// 1-based end of the most recent source span; 0 before any phrase.
    last_end: usize,
    /// Last `order - 1` tokens of the start-padded output.
    lm_tail: Vec<String>,
    output: Vec<String>,
    steps: Vec<DerivationStep>,
    end_log_lm: f64,
    score: f64,
}

/// Score-then-output ordering shared by pruning and final selection.
fn better(a: &Hypothesis, b: &Hypothesis) -> std::cmp::Ordering {
    b.score
        .total_cmp(&a.score)
        .then_with(|| a.output.cmp(&b.output))
}

fn collect_options(
    src: &[String],
    table: &PhraseTable,
    config: &DecoderConfig,
) -> Vec<Vec<Vec<SpanOption>>> {
    let n = src.len();
    let mut options: Vec<Vec<Vec<SpanOption>>> = vec![Vec::new(); n];
    for start in 0..n {
        let max_here = config.max_phrase_len.min(n - start);
        for len in 1..=max_here {
            let span = &src[start..start + len];
            let mut here = Vec::new();
            if let Some(entries) = table.lookup(span) {
                for entry in entries {
                    here.push(SpanOption {
                        tgt: entry.tgt.clone(),
                        log_features: [
                            entry.phi_tgt_given_src.ln(),
                            entry.phi_src_given_tgt.ln(),
                            entry.lex_tgt_given_src.ln(),
                            entry.lex_src_given_tgt.ln(),
                        ],
                        oov: false,
                    });
                }
            } else if len == 1 {
                // Unknown word: copy it through with a fixed penalty on
                // every phrase feature, so weight scaling stays neutral.
                here.push(SpanOption {
                    tgt: vec![span[0].clone()],
                    log_features: [OOV_LOG_SCORE; 4],
                    oov: true,
                });
            }
            options[start].push(here);
        }
    }
    options
}

/// Translates one tokenized sentence. Returns the output tokens and the
/// winning derivation. An empty input gives an empty output.
pub fn decode(
    src: &[String],
    table: &PhraseTable,
    lm: &dyn LanguageModel,
    weights: &FeatureWeights,
    config: &DecoderConfig,
) -> (Vec<String>, Derivation) {
    let n = src.len();
    if n == 0 {
        return (
            Vec::new(),
            Derivation {
                steps: Vec::new(),
                end_log_lm: 0.0,
                score: 0.0,
            },
        );
    }
    let options = collect_options(src, table, config);
    let order = lm.order();
    let tail_len = order.saturating_sub(1);

    let mut stacks: Vec<Vec<Hypothesis>> = (0..=n).map(|_| Vec::new()).collect();
    // Recombination: best hypothesis per (coverage, last_end, LM state).
    let mut recomb: Vec<HashMap<(Vec<u64>, usize, Vec<String>), usize>> =
        (0..=n).map(|_| HashMap::new()).collect();

    stacks[0].push(Hypothesis {
        coverage: Coverage::new(n),
        last_end: 0,
        lm_tail: vec![SENTENCE_START.to_string(); tail_len],
        output: Vec::new(),
        steps: Vec::new(),
        end_log_lm: 0.0,
        score: 0.0,
    });

    for covered in 0..n {
        let mut stack = std::mem::take(&mut stacks[covered]);
        stack.sort_by(better);
        stack.truncate(config.stack_size);

        for hyp in &stack {
            let first_gap = hyp
                .coverage
                .first_uncovered(n)
                .expect("partial hypothesis has a gap");
            for start in 0..n {
                for (len_idx, span_options) in options[start].iter().enumerate() {
                    let end = start + len_idx;
                    if span_options.is_empty() || !hyp.coverage.span_free(start, end) {
                        continue;
                    }
                    let distance = reordering_distance(hyp.last_end, start + 1);
                    // A jump past the limit is still allowed when it goes
                    // to the first gap, so decoding can always finish.
                    if let Some(limit) = config.distortion_limit {
                        if distance > limit && start != first_gap {
                            continue;
                        }
                    }
                    for option in span_options {
                        let mut tail = hyp.lm_tail.clone();
                        let mut log_lm = 0.0;
                        for token in &option.tgt {
                            log_lm += lm.log_prob(token, &tail);
                            tail.push(token.clone());
                            if tail.len() > tail_len {
                                tail.remove(0);
                            }
                        }
                        let feature_score = weights.phi_ts * option.log_features[0]
                            + weights.phi_st * option.log_features[1]
                            + weights.lex_ts * option.log_features[2]
                            + weights.lex_st * option.log_features[3];
                        let mut score = hyp.score
                            + weights.lm * log_lm
                            + feature_score
                            + weights.reorder * -(distance as f64)
                            + weights.word_penalty * -(option.tgt.len() as f64);

                        let mut coverage = hyp.coverage.clone();
                        for i in start..=end {
                            coverage.set(i);
                        }
                        let new_covered = covered + (end - start + 1);
                        let mut output = hyp.output.clone();
                        output.extend(option.tgt.iter().cloned());
                        let mut steps = hyp.steps.clone();
                        steps.push(DerivationStep {
                            src_span: (start, end),
                            tgt: option.tgt.clone(),
                            log_features: option.log_features,
                            log_lm,
                            reorder_distance: distance,
                            oov: option.oov,
                        });
                        let mut end_log_lm = 0.0;
                        if new_covered == n {
                            end_log_lm = lm.log_prob(SENTENCE_END, &tail);
                            score += weights.lm * end_log_lm;
                        }
                        let next = Hypothesis {
                            coverage,
                            last_end: end + 1,
                            lm_tail: tail,
                            output,
                            steps,
                            end_log_lm,
                            score,
                        };

                        let key = (
                            next.coverage.bits.clone(),
                            next.last_end,
                            next.lm_tail.clone(),
                        );
                        match recomb[new_covered].get(&key) {
                            Some(&at) => {
                                let stack = &mut stacks[new_covered];
                                if better(&next, &stack[at]).is_lt() {
                                    stack[at] = next;
                                }
                            }
                            None => {
                                stacks[new_covered].push(next);
                                recomb[new_covered]
                                    .insert(key, stacks[new_covered].len() - 1);
                            }
                        }
                    }
                }
            }
        }
    }

    let mut finals = std::mem::take(&mut stacks[n]);
    finals.sort_by(better);
    let best = finals.into_iter().next().expect("decoder reached full coverage");
    let derivation = Derivation {
        steps: best.steps,
        end_log_lm: best.end_log_lm,
        score: best.score,
    };
    (best.output, derivation)
}

/// Recomputes a derivation's score from the models, validating that the
/// steps cover the source exactly once. Matches [`decode`]'s arithmetic,
/// so it can cross-check search results.
pub fn score_derivation(
    src: &[String],
    derivation: &Derivation,
    table: &PhraseTable,
    lm: &dyn LanguageModel,
    weights: &FeatureWeights,
) -> Result<f64> {
    let n = src.len();
    let mut covered = vec![false; n];
    for step in &derivation.steps {
        let (a, b) = step.src_span;
        if a > b || b >= n {
            return Err(SmtError::InvalidDerivation(format!(
                "span [{a}..{b}] outside source of length {n}"
            )));
        }
        for slot in covered.iter_mut().take(b + 1).skip(a) {
            if *slot {
                return Err(SmtError::InvalidDerivation(format!(
                    "span [{a}..{b}] overlaps an earlier step"
                )));
            }
            *slot = true;
        }
    }
    if let Some(miss) = covered.iter().position(|&c| !c) {
        return Err(SmtError::InvalidDerivation(format!(
            "source position {miss} left uncovered"
        )));
    }

    let order = lm.order();
    let tail_len = order.saturating_sub(1);
    let mut tail = vec![SENTENCE_START.to_string(); tail_len];
    let mut last_end = 0usize;
    let mut score = 0.0;
    for step in &derivation.steps {
        let (a, b) = step.src_span;
        let span = &src[a..=b];
        let log_features = match table
            .lookup(span)
            .and_then(|entries| entries.iter().find(|e| e.tgt == step.tgt))
        {
            Some(entry) => [
                entry.phi_tgt_given_src.ln(),
                entry.phi_src_given_tgt.ln(),
                entry.lex_tgt_given_src.ln(),
                entry.lex_src_given_tgt.ln(),
            ],
            None => {
                let oov_shaped =
                    a == b && table.lookup(span).is_none() && step.tgt == span;
                if !oov_shaped {
                    return Err(SmtError::InvalidDerivation(format!(
                        "no phrase table entry covers [{a}..{b}] -> {:?}",
                        step.tgt.join(" ")
                    )));
                }
                [OOV_LOG_SCORE; 4]
            }
        };
        let mut log_lm = 0.0;
        for token in &step.tgt {
            log_lm += lm.log_prob(token, &tail);
            tail.push(token.clone());
            if tail.len() > tail_len {
                tail.remove(0);
            }
        }
        let distance = reordering_distance(last_end, a + 1);
        last_end = b + 1;
        score += weights.lm * log_lm
            + weights.phi_ts * log_features[0]
            + weights.phi_st * log_features[1]
            + weights.lex_ts * log_features[2]
            + weights.lex_st * log_features[3]
            + weights.reorder * -(distance as f64)
            + weights.word_penalty * -(step.tgt.len() as f64);
    }
    score += weights.lm * lm.log_prob(SENTENCE_END, &tail);
    Ok(score)
}
