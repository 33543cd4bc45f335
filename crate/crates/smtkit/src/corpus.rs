//! Language profiles, parallel corpus loading, and corpus statistics.
//!
//! A language profile pins down which codepoints belong to a language's
//! script, where its digit run starts, and the writing direction. The
//! built-in registry covers fifteen Indic-script languages plus English;
//! extra or replacement profiles can be loaded from a JSON file.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SmtError};

/// Writing direction of a script. Text is stored in logical order either
/// way; direction is carried for display and reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    LeftToRight,
    RightToLeft,
}

/// Per-language script description used by cleaning and tokenization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LanguageProfile {
    /// Language tag, e.g. `hi` or `en`.
    pub code: String,
    /// Inclusive codepoint ranges of the script, sorted and non-overlapping.
    pub script_blocks: Vec<(u32, u32)>,
    /// First codepoint of the native digit run `0..=9`.
    pub digit_zero: char,
    pub direction: Direction,
    /// True for Latin-script languages; enables accent stripping.
    pub latin_side: bool,
}

impl LanguageProfile {
    /// Checks the structural invariants: at least one block, blocks sorted
    /// and disjoint, and a full run of ten digit codepoints.
    pub fn validate(&self) -> Result<()> {
        let fail = |reason: &str| {
            Err(SmtError::InvalidProfile {
                code: self.code.clone(),
                reason: reason.to_string(),
            })
        };
        if self.code.is_empty() {
            return fail("empty language code");
        }
        if self.script_blocks.is_empty() {
            return fail("no script blocks");
        }
        let mut prev_end: Option<u32> = None;
        for &(lo, hi) in &self.script_blocks {
            if lo > hi {
                return fail("block start exceeds block end");
            }
            if let Some(p) = prev_end {
                if lo <= p {
                    return fail("blocks overlap or are unsorted");
                }
            }
            prev_end = Some(hi);
        }
        let zero = self.digit_zero as u32;
        for d in 0..10 {
            if char::from_u32(zero + d).is_none() {
                return fail("digit run is not ten contiguous codepoints");
            }
        }
        Ok(())
    }

    /// True if `c` lies inside one of the script blocks.
    pub fn contains(&self, c: char) -> bool {
        let cp = c as u32;
        self.script_blocks
            .binary_search_by(|&(lo, hi)| {
                if hi < cp {
                    std::cmp::Ordering::Less
                } else if lo > cp {
                    std::cmp::Ordering::Greater
                } else {
                    std::cmp::Ordering::Equal
                }
            })
            .is_ok()
    }

    /// True if `c` is one of the profile's native digits.
    pub fn is_native_digit(&self, c: char) -> bool {
        let cp = c as u32;
        let zero = self.digit_zero as u32;
        cp >= zero && cp < zero + 10
    }
}

fn profile(
    code: &str,
    blocks: &[(u32, u32)],
    digit_zero: char,
    direction: Direction,
    latin_side: bool,
) -> LanguageProfile {
    LanguageProfile {
        code: code.to_string(),
        script_blocks: blocks.to_vec(),
        digit_zero,
        direction,
        latin_side,
    }
}

const BENGALI: (u32, u32) = (0x0980, 0x09FF);
const DEVANAGARI: (u32, u32) = (0x0900, 0x097F);
const GUJARATI: (u32, u32) = (0x0A80, 0x0AFF);
const GURMUKHI: (u32, u32) = (0x0A00, 0x0A7F);
const ORIYA: (u32, u32) = (0x0B00, 0x0B7F);
const TAMIL: (u32, u32) = (0x0B80, 0x0BFF);
const TELUGU: (u32, u32) = (0x0C00, 0x0C7F);
const KANNADA: (u32, u32) = (0x0C80, 0x0CFF);
const MALAYALAM: (u32, u32) = (0x0D00, 0x0D7F);
const SINHALA: (u32, u32) = (0x0D80, 0x0DFF);
const ARABIC: (u32, u32) = (0x0600, 0x06FF);
const ARABIC_SUPPLEMENT: (u32, u32) = (0x0750, 0x077F);

/// Built-in profiles for the languages the toolkit ships with.
pub fn builtin_profiles() -> Vec<LanguageProfile> {
    use Direction::{LeftToRight, RightToLeft};
    vec![
        profile("as", &[BENGALI], '\u{09E6}', LeftToRight, false),
        profile("bn", &[BENGALI], '\u{09E6}', LeftToRight, false),
        profile(
            "en",
            // ASCII letters plus Latin-1 letters and the Latin Extended-A/B
            // blocks; accents are stripped during cleaning anyway.
            &[
                (0x0041, 0x005A),
                (0x0061, 0x007A),
                (0x00C0, 0x00D6),
                (0x00D8, 0x00F6),
                (0x00F8, 0x024F),
            ],
            '0',
            LeftToRight,
            true,
        ),
        profile("gu", &[GUJARATI], '\u{0AE6}', LeftToRight, false),
        profile("hi", &[DEVANAGARI], '\u{0966}', LeftToRight, false),
        profile("kn", &[KANNADA], '\u{0CE6}', LeftToRight, false),
        profile("ml", &[MALAYALAM], '\u{0D66}', LeftToRight, false),
        profile("mr", &[DEVANAGARI], '\u{0966}', LeftToRight, false),
        profile("ne", &[DEVANAGARI], '\u{0966}', LeftToRight, false),
        profile("or", &[ORIYA], '\u{0B66}', LeftToRight, false),
        profile(
            "pa",
            &[ARABIC, GURMUKHI],
            '\u{0A66}',
            LeftToRight,
            false,
        ),
        profile(
            "sd",
            &[ARABIC, ARABIC_SUPPLEMENT, DEVANAGARI],
            '\u{0660}',
            RightToLeft,
            false,
        ),
        profile("si", &[SINHALA], '\u{0DE6}', LeftToRight, false),
        profile("ta", &[TAMIL], '\u{0BE6}', LeftToRight, false),
        profile("te", &[TELUGU], '\u{0C66}', LeftToRight, false),
        profile(
            "ur",
            &[ARABIC, ARABIC_SUPPLEMENT],
            '\u{06F0}',
            RightToLeft,
            false,
        ),
    ]
}

/// Looks up `code` among `extra` profiles first, then the built-in registry.
pub fn lookup_profile(code: &str, extra: &[LanguageProfile]) -> Result<LanguageProfile> {
    if let Some(p) = extra.iter().find(|p| p.code == code) {
        return Ok(p.clone());
    }
    builtin_profiles()
        .into_iter()
        .find(|p| p.code == code)
        .ok_or_else(|| SmtError::UnknownLanguage(code.to_string()))
}

/// Reads a JSON array of profiles, validating each one.
pub fn load_profile_file(path: &Path) -> Result<Vec<LanguageProfile>> {
    let text = fs::read_to_string(path)?;
    let profiles: Vec<LanguageProfile> =
        serde_json::from_str(&text).map_err(|source| SmtError::JsonFile {
            path: path.to_path_buf(),
            source,
        })?;
    for p in &profiles {
        p.validate()?;
    }
    Ok(profiles)
}

/// One aligned sentence pair. `line_no` is the 1-based position in the
/// original files, kept for error reporting through the pipeline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentencePair {
    pub source: String,
    pub target: String,
    pub line_no: usize,
}

/// A sentence-aligned bitext with the two language profiles attached.
#[derive(Debug, Clone)]
pub struct ParallelCorpus {
    pub pairs: Vec<SentencePair>,
    pub src_profile: LanguageProfile,
    pub tgt_profile: LanguageProfile,
}

/// Which half of a corpus an operation applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Source,
    Target,
}

/// Reads a text file into lines, tolerating a final newline and CRLF
/// endings, and reporting the first non-UTF-8 line.
pub fn read_lines(path: &Path) -> Result<Vec<String>> {
    let bytes = fs::read(path)?;
    let mut lines = Vec::new();
    for (idx, raw) in bytes.split(|&b| b == b'\n').enumerate() {
        let raw = raw.strip_suffix(b"\r").unwrap_or(raw);
        let line = std::str::from_utf8(raw).map_err(|_| SmtError::InvalidUtf8 {
            path: path.to_path_buf(),
            line: idx + 1,
        })?;
        lines.push(line.to_string());
    }
    // A trailing newline produces one empty final segment; drop it.
    if lines.last().is_some_and(|l| l.is_empty()) {
        lines.pop();
    }
    Ok(lines)
}

/// Loads two line-aligned files into a corpus. Fails if the line counts
/// differ or either file contains invalid UTF-8.
pub fn load_parallel(
    src_path: &Path,
    tgt_path: &Path,
    src_profile: LanguageProfile,
    tgt_profile: LanguageProfile,
) -> Result<ParallelCorpus> {
    let src_lines = read_lines(src_path)?;
    let tgt_lines = read_lines(tgt_path)?;
    if src_lines.len() != tgt_lines.len() {
        return Err(SmtError::LineCountMismatch {
            src_path: src_path.to_path_buf(),
            src_lines: src_lines.len(),
            tgt_path: tgt_path.to_path_buf(),
            tgt_lines: tgt_lines.len(),
        });
    }
    let pairs = src_lines
        .into_iter()
        .zip(tgt_lines)
        .enumerate()
        .map(|(i, (source, target))| SentencePair {
            source,
            target,
            line_no: i + 1,
        })
        .collect();
    Ok(ParallelCorpus {
        pairs,
        src_profile,
        tgt_profile,
    })
}

/// Writes the two sides back out, one sentence per line.
pub fn write_parallel(corpus: &ParallelCorpus, src_path: &Path, tgt_path: &Path) -> Result<()> {
    let mut src = String::new();
    let mut tgt = String::new();
    for pair in &corpus.pairs {
        src.push_str(&pair.source);
        src.push('\n');
        tgt.push_str(&pair.target);
        tgt.push('\n');
    }
    fs::write(src_path, src)?;
    fs::write(tgt_path, tgt)?;
    Ok(())
}

fn token_count(line: &str) -> usize {
    line.split_whitespace().count()
}

/// Drops pairs where either side is empty, either side exceeds `max_len`
/// whitespace tokens, or the length ratio exceeds `max_ratio`.
pub fn filter_pairs(corpus: &ParallelCorpus, max_len: usize, max_ratio: f64) -> ParallelCorpus {
    let pairs = corpus
        .pairs
        .iter()
        .filter(|p| {
            let s = token_count(&p.source);
            let t = token_count(&p.target);
            if s == 0 || t == 0 || s > max_len || t > max_len {
                return false;
            }
            let (long, short) = if s >= t { (s, t) } else { (t, s) };
            long as f64 / short as f64 <= max_ratio
        })
        .cloned()
        .collect();
    ParallelCorpus {
        pairs,
        src_profile: corpus.src_profile.clone(),
        tgt_profile: corpus.tgt_profile.clone(),
    }
}

/// Corpus-level counts used by the `stats` command.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusStats {
    pub pair_count: usize,
    /// Token count -> number of sentences with that count, per side.
    pub source_lengths: BTreeMap<usize, usize>,
    pub target_lengths: BTreeMap<usize, usize>,
}

pub fn stats(corpus: &ParallelCorpus) -> CorpusStats {
    let mut source_lengths = BTreeMap::new();
    let mut target_lengths = BTreeMap::new();
    for pair in &corpus.pairs {
        *source_lengths.entry(token_count(&pair.source)).or_insert(0) += 1;
        *target_lengths.entry(token_count(&pair.target)).or_insert(0) += 1;
    }
    CorpusStats {
        pair_count: corpus.pairs.len(),
        source_lengths,
        target_lengths,
    }
}

/// Fraction of sentences on `side` with strictly fewer than `threshold`
/// tokens. Non-decreasing in the threshold and reaches 1.0 once the
/// threshold passes the longest sentence.
pub fn length_ogive(corpus: &ParallelCorpus, threshold: usize, side: Side) -> Result<f64> {
    if corpus.pairs.is_empty() {
        return Err(SmtError::EmptyCorpus(
            "length ogive needs at least one sentence".to_string(),
        ));
    }
    let below = corpus
        .pairs
        .iter()
        .filter(|p| {
            let line = match side {
                Side::Source => &p.source,
                Side::Target => &p.target,
            };
            token_count(line) < threshold
        })
        .count();
    Ok(below as f64 / corpus.pairs.len() as f64)
}
