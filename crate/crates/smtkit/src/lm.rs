//! Count-based n-gram language models with Witten-Bell smoothing and the
//! ARPA text format.
//!
//! Probabilities interpolate down to a uniform base over the vocabulary
//! plus one unknown-word slot, so every query gets nonzero mass under
//! smoothing. The ARPA export stores fully interpolated probabilities and
//! Witten-Bell backoff weights, so lookups against the file agree with the
//! in-memory model.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SmtError};

pub const SENTENCE_START: &str = "<s>";
pub const SENTENCE_END: &str = "</s>";
pub const UNKNOWN: &str = "<unk>";

/// Probability estimator used by an [`NGramModel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Smoothing {
    /// Raw count ratios; unseen events get probability zero.
    None,
    /// Witten-Bell interpolation down to a uniform base distribution.
    WittenBell,
}

/// Scoring interface shared by trained models and loaded ARPA files.
/// Log probabilities are natural logs.
pub trait LanguageModel {
    fn order(&self) -> usize;

    /// Natural log of P(word | context). Context longer than `order - 1`
    /// is truncated on the left.
    fn log_prob(&self, word: &str, context: &[String]) -> f64;

    /// Log probability of a full sentence: pads with start markers,
    /// scores every token, and closes with the end marker.
    fn sentence_log_prob(&self, tokens: &[String]) -> f64 {
        let order = self.order();
        let pad = order.saturating_sub(1);
        let mut stream: Vec<String> = Vec::with_capacity(pad + tokens.len() + 1);
        stream.resize(pad, SENTENCE_START.to_string());
        stream.extend(tokens.iter().cloned());
        stream.push(SENTENCE_END.to_string());
        (pad..stream.len())
            .map(|i| self.log_prob(&stream[i], &stream[i + 1 - order..i]))
            .sum()
    }
}

/// N-gram counts for orders `1..=order` plus the training vocabulary.
#[derive(Debug, Clone)]
pub struct NGramModel {
    order: usize,
    smoothing: Smoothing,
    /// `counts[k]` maps a context of length `k` to the words following it.
    counts: Vec<HashMap<Vec<String>, HashMap<String, u64>>>,
    vocab: BTreeSet<String>,
}

/// Counts n-grams of every order up to `order` over the sentences. Each
/// sentence is padded with `order - 1` start markers and closed with one
/// end marker.
pub fn train_lm(sentences: &[Vec<String>], order: usize, smoothing: Smoothing) -> Result<NGramModel> {
    if order == 0 {
        return Err(SmtError::InvalidParameter(
            "language model order must be at least 1".to_string(),
        ));
    }
    if sentences.is_empty() {
        return Err(SmtError::EmptyCorpus(
            "language model training needs at least one sentence".to_string(),
        ));
    }
    let mut counts: Vec<HashMap<Vec<String>, HashMap<String, u64>>> =
        vec![HashMap::new(); order];
    let mut vocab = BTreeSet::new();
    vocab.insert(SENTENCE_END.to_string());
    for sent in sentences {
        vocab.extend(sent.iter().cloned());
        for k in 1..=order {
            let pad = k - 1;
            let mut stream: Vec<&str> = Vec::with_capacity(pad + sent.len() + 1);
            stream.resize(pad, SENTENCE_START);
            stream.extend(sent.iter().map(String::as_str));
            stream.push(SENTENCE_END);
            for i in pad..stream.len() {
                let ctx: Vec<String> =
                    stream[i + 1 - k..i].iter().map(|s| s.to_string()).collect();
                *counts[k - 1]
                    .entry(ctx)
                    .or_default()
                    .entry(stream[i].to_string())
                    .or_insert(0) += 1;
            }
        }
    }
    Ok(NGramModel {
        order,
        smoothing,
        counts,
        vocab,
    })
}

impl NGramModel {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn smoothing(&self) -> Smoothing {
        self.smoothing
    }

    pub fn vocab(&self) -> &BTreeSet<String> {
        &self.vocab
    }

    /// Event total and distinct-continuation count for a context.
    fn context_stats(&self, ctx: &[String]) -> Option<(u64, usize)> {
        self.counts[ctx.len()].get(ctx).map(|words| {
            let n: u64 = words.values().sum();
            (n, words.len())
        })
    }

    fn count(&self, word: &str, ctx: &[String]) -> u64 {
        self.counts[ctx.len()]
            .get(ctx)
            .and_then(|words| words.get(word))
            .copied()
            .unwrap_or(0)
    }

    /// Witten-Bell interpolated probability. The base case is uniform over
    /// the vocabulary plus one unknown-word slot.
    fn wb_prob(&self, word: &str, ctx: &[String]) -> f64 {
        let lower: f64 = if ctx.is_empty() {
            1.0 / (self.vocab.len() as f64 + 1.0)
        } else {
            self.wb_prob(word, &ctx[1..])
        };
        match self.context_stats(ctx) {
            None => lower,
            Some((n, t)) => {
                let n = n as f64;
                let t = t as f64;
                let lambda = n / (n + t);
                let ml = self.count(word, ctx) as f64 / n;
                lambda * ml + (1.0 - lambda) * lower
            }
        }
    }

    /// P(word | context); the context is truncated on the left to at most
    /// `order - 1` words. Without smoothing an unseen context or event
    /// gives zero.
    pub fn prob(&self, word: &str, context: &[String]) -> f64 {
        let start = context.len().saturating_sub(self.order - 1);
        let ctx = &context[start..];
        match self.smoothing {
            Smoothing::WittenBell => self.wb_prob(word, ctx),
            Smoothing::None => match self.context_stats(ctx) {
                None => 0.0,
                Some((n, _)) => self.count(word, ctx) as f64 / n as f64,
            },
        }
    }

    /// All n-grams of length `k`, sorted. For unigrams the start and
    /// unknown markers are added.
    fn sorted_ngrams(&self, k: usize) -> Vec<Vec<String>> {
        let mut ngrams: Vec<Vec<String>> = Vec::new();
        for (ctx, words) in &self.counts[k - 1] {
            for word in words.keys() {
                let mut ngram = ctx.clone();
                ngram.push(word.clone());
                ngrams.push(ngram);
            }
        }
        if k == 1 {
            for marker in [SENTENCE_START, UNKNOWN] {
                let unigram = vec![marker.to_string()];
                if !ngrams.contains(&unigram) {
                    ngrams.push(unigram);
                }
            }
        }
        ngrams.sort();
        ngrams
    }

    /// Renders the model in the ARPA text format. Probabilities are the
    /// fully interpolated Witten-Bell estimates in log10; every entry
    /// below the top order carries its backoff weight. The start marker
    /// gets the conventional -99 stand-in since it is never predicted.
    pub fn to_arpa_string(&self) -> String {
        let mut sections: Vec<Vec<String>> = Vec::new();
        for k in 1..=self.order {
            let mut lines = Vec::new();
            for ngram in self.sorted_ngrams(k) {
                let word = ngram.last().expect("non-empty ngram");
                let ctx = &ngram[..ngram.len() - 1];
                let lp = if word == SENTENCE_START {
                    -99.0
                } else {
                    self.wb_prob(word, ctx).log10()
                };
                let mut line = format!("{lp}\t{}", ngram.join(" "));
                if k < self.order {
                    let bow = match self.context_stats(&ngram) {
                        Some((n, t)) => (t as f64 / (n as f64 + t as f64)).log10(),
                        None => 0.0,
                    };
                    line.push_str(&format!("\t{bow}"));
                }
                lines.push(line);
            }
            sections.push(lines);
        }

        let mut out = String::from("\\data\\\n");
        for (i, lines) in sections.iter().enumerate() {
            out.push_str(&format!("ngram {}={}\n", i + 1, lines.len()));
        }
        for (i, lines) in sections.iter().enumerate() {
            out.push_str(&format!("\n\\{}-grams:\n", i + 1));
            for line in lines {
                out.push_str(line);
                out.push('\n');
            }
        }
        out.push_str("\n\\end\\\n");
        out
    }

    pub fn write_arpa(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_arpa_string())?;
        Ok(())
    }
}

impl LanguageModel for NGramModel {
    fn order(&self) -> usize {
        self.order
    }

    fn log_prob(&self, word: &str, context: &[String]) -> f64 {
        self.prob(word, context).ln()
    }
}

/// An n-gram model backed by ARPA entries: log10 probability and log10
/// backoff weight per n-gram.
#[derive(Debug, Clone, PartialEq)]
pub struct ArpaModel {
    order: usize,
    /// `entries[k - 1]` holds the k-gram table.
    entries: Vec<BTreeMap<Vec<String>, (f64, f64)>>,
}

impl ArpaModel {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn entry_count(&self, k: usize) -> usize {
        self.entries[k - 1].len()
    }

    /// Standard backoff lookup in log10: use the longest matching n-gram,
    /// otherwise add the context's backoff weight and retry with the
    /// shortened context. Unknown words resolve to the `<unk>` unigram.
    pub fn log10_prob(&self, word: &str, context: &[String]) -> f64 {
        let start = context.len().saturating_sub(self.order - 1);
        self.backoff_lookup(word, &context[start..])
    }

    fn backoff_lookup(&self, word: &str, ctx: &[String]) -> f64 {
        let mut ngram: Vec<String> = ctx.to_vec();
        ngram.push(word.to_string());
        if let Some(&(lp, _)) = self.entries[ctx.len()].get(&ngram) {
            return lp;
        }
        if ctx.is_empty() {
            return self.entries[0]
                .get(&vec![UNKNOWN.to_string()])
                .map(|&(lp, _)| lp)
                .unwrap_or(-99.0);
        }
        let bow = self.entries[ctx.len() - 1]
            .get(&ctx.to_vec())
            .map(|&(_, b)| b)
            .unwrap_or(0.0);
        bow + self.backoff_lookup(word, &ctx[1..])
    }

    /// Renders the model back into ARPA text. A file produced by
    /// [`NGramModel::to_arpa_string`] survives a read/write cycle
    /// byte for byte.
    pub fn to_arpa_string(&self) -> String {
        let mut out = String::from("\\data\\\n");
        for (i, entries) in self.entries.iter().enumerate() {
            out.push_str(&format!("ngram {}={}\n", i + 1, entries.len()));
        }
        for (i, entries) in self.entries.iter().enumerate() {
            out.push_str(&format!("\n\\{}-grams:\n", i + 1));
            for (ngram, &(lp, bow)) in entries {
                out.push_str(&format!("{lp}\t{}", ngram.join(" ")));
                if i + 1 < self.order {
                    out.push_str(&format!("\t{bow}"));
                }
                out.push('\n');
            }
        }
        out.push_str("\n\\end\\\n");
        out
    }

    pub fn write_arpa(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_arpa_string())?;
        Ok(())
    }
}

impl LanguageModel for ArpaModel {
    fn order(&self) -> usize {
        self.order
    }

    fn log_prob(&self, word: &str, context: &[String]) -> f64 {
        self.log10_prob(word, context) * std::f64::consts::LN_10
    }
}

/// Parses ARPA text. Section sizes must match the header counts.
pub fn parse_arpa(text: &str, path: &Path) -> Result<ArpaModel> {
    let err = |line: usize, message: String| SmtError::ParseError {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut declared: Vec<usize> = Vec::new();
    let mut entries: Vec<BTreeMap<Vec<String>, (f64, f64)>> = Vec::new();
    let mut current: Option<usize> = None;
    let mut seen_data = false;
    let mut seen_end = false;

    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim_end();
        let lineno = idx + 1;
        if line.is_empty() || seen_end {
            continue;
        }
        if line == "\\data\\" {
            seen_data = true;
            continue;
        }
        if line == "\\end\\" {
            seen_end = true;
            continue;
        }
        if !seen_data {
            return Err(err(lineno, "expected \\data\\ header".to_string()));
        }
        if let Some(rest) = line.strip_prefix("ngram ") {
            let (k, n) = rest
                .split_once('=')
                .ok_or_else(|| err(lineno, "malformed ngram count".to_string()))?;
            let k: usize = k
                .trim()
                .parse()
                .map_err(|_| err(lineno, "malformed ngram order".to_string()))?;
            let n: usize = n
                .trim()
                .parse()
                .map_err(|_| err(lineno, "malformed ngram count".to_string()))?;
            if k != declared.len() + 1 {
                return Err(err(lineno, "ngram orders out of sequence".to_string()));
            }
            declared.push(n);
            entries.push(BTreeMap::new());
            continue;
        }
        if line.starts_with('\\') && line.ends_with("-grams:") {
            let k: usize = line[1..line.len() - "-grams:".len()]
                .parse()
                .map_err(|_| err(lineno, "malformed section header".to_string()))?;
            if k == 0 || k > declared.len() {
                return Err(err(lineno, "section order not declared".to_string()));
            }
            current = Some(k);
            continue;
        }
        let k = current.ok_or_else(|| err(lineno, "entry outside any section".to_string()))?;
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 2 || fields.len() > 3 {
            return Err(err(lineno, "expected 2 or 3 tab-separated fields".to_string()));
        }
        let lp: f64 = fields[0]
            .parse()
            .map_err(|_| err(lineno, format!("bad log probability `{}`", fields[0])))?;
        let ngram: Vec<String> = fields[1].split(' ').map(|s| s.to_string()).collect();
        if ngram.len() != k {
            return Err(err(lineno, format!("{}-gram has {} tokens", k, ngram.len())));
        }
        let bow: f64 = if fields.len() == 3 {
            fields[2]
                .parse()
                .map_err(|_| err(lineno, format!("bad backoff weight `{}`", fields[2])))?
        } else {
            0.0
        };
        entries[k - 1].insert(ngram, (lp, bow));
    }

    if !seen_data || !seen_end {
        return Err(err(0, "missing \\data\\ or \\end\\ marker".to_string()));
    }
    for (i, &n) in declared.iter().enumerate() {
        if entries[i].len() != n {
            return Err(err(
                0,
                format!(
                    "header declares {} {}-grams but section has {}",
                    n,
                    i + 1,
                    entries[i].len()
                ),
            ));
        }
    }
    if entries.is_empty() {
        return Err(err(0, "model declares no n-gram orders".to_string()));
    }
    Ok(ArpaModel {
        order: entries.len(),
        entries,
    })
}

pub fn read_arpa(path: &Path) -> Result<ArpaModel> {
    let text = fs::read_to_string(path)?;
    parse_arpa(&text, path)
}
