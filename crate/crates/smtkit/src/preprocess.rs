//! Text normalization: cleaning, tokenization, detokenization, truecasing.
//!
//! Cleaning is idempotent per configuration: control and format characters
//! go away, characters outside the language's script (plus shared
//! punctuation and digits) go away, punctuation variants collapse to
//! canonical forms, digits map to one script, and whitespace collapses.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use unicode_normalization::UnicodeNormalization;

use crate::corpus::LanguageProfile;
use crate::error::{Result, SmtError};

/// Which digit script cleaned text should end up in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DigitScript {
    /// The profile's native digit run.
    Native,
    /// ASCII `0..=9`.
    Latin,
}

/// Knobs for [`clean_line`].
#[derive(Debug, Clone)]
pub struct CleanConfig {
    pub profile: LanguageProfile,
    pub normalize_digits_to: DigitScript,
    /// Single-codepoint punctuation rewrites applied after filtering.
    pub punct_map: BTreeMap<char, char>,
    /// Strip combining accents on Latin-script text.
    pub deaccent: bool,
}

impl CleanConfig {
    /// Default cleaning for a profile: canonical punctuation, digits kept
    /// in the native script (ASCII for Latin-side languages), accents
    /// stripped only on the Latin side.
    pub fn for_profile(profile: &LanguageProfile) -> Self {
        CleanConfig {
            profile: profile.clone(),
            normalize_digits_to: if profile.latin_side {
                DigitScript::Latin
            } else {
                DigitScript::Native
            },
            punct_map: default_punct_map(),
            deaccent: profile.latin_side,
        }
    }
}

/// Canonical punctuation rewrites: curly quotes to straight quotes, the
/// dash family to `-`, double danda to danda, guillemets to `"`.
pub fn default_punct_map() -> BTreeMap<char, char> {
    let pairs = [
        ('\u{2018}', '\''), // left single quote
        ('\u{2019}', '\''), // right single quote
        ('\u{201A}', '\''),
        ('\u{201B}', '\''),
        ('\u{2018}', '\''),
        ('\u{201C}', '"'), // left double quote
        ('\u{201D}', '"'), // right double quote
        ('\u{201E}', '"'),
        ('\u{201F}', '"'),
        ('\u{00AB}', '"'), // guillemets
        ('\u{00BB}', '"'),
        ('\u{2010}', '-'), // hyphen
        ('\u{2011}', '-'), // non-breaking hyphen
        ('\u{2012}', '-'), // figure dash
        ('\u{2013}', '-'), // en dash
        ('\u{2014}', '-'), // em dash
        ('\u{2015}', '-'), // horizontal bar
        ('\u{2212}', '-'), // minus sign
        ('\u{0965}', '\u{0964}'), // double danda -> danda
    ];
    pairs.into_iter().collect()
}

/// Punctuation accepted for every language: ASCII punctuation, danda and
/// double danda, Arabic-script marks, and the variants the default
/// punctuation map rewrites.
fn is_common_punct(c: char) -> bool {
    if c.is_ascii_punctuation() {
        return true;
    }
    matches!(
        c,
        '\u{0964}' // danda
            | '\u{0965}' // double danda
            | '\u{060C}' // Arabic comma
            | '\u{061B}' // Arabic semicolon
            | '\u{061F}' // Arabic question mark
            | '\u{066D}' // Arabic five pointed star
            | '\u{06D4}' // Arabic full stop
            | '\u{2018}'..='\u{201F}' // curly quotes
            | '\u{00AB}'
            | '\u{00BB}'
            | '\u{2010}'..='\u{2015}' // dash family
            | '\u{2212}' // minus sign
            | '\u{2026}' // ellipsis
    )
}

/// Zero-width and directional format characters removed during cleaning.
/// Covers the invisible characters that actually show up in web-crawled
/// Indic and Latin text.
fn is_format_char(c: char) -> bool {
    matches!(
        c,
        '\u{00AD}' // soft hyphen
            | '\u{0600}'..='\u{0605}' // Arabic number signs
            | '\u{061C}' // Arabic letter mark
            | '\u{06DD}' // Arabic end of ayah
            | '\u{070F}' // Syriac abbreviation mark
            | '\u{200B}'..='\u{200F}' // zero width space/joiners, LRM, RLM
            | '\u{202A}'..='\u{202E}' // embedding controls
            | '\u{2060}'..='\u{2064}' // word joiner, invisible operators
            | '\u{2066}'..='\u{206F}' // isolate controls, deprecated format
            | '\u{FEFF}' // zero width no-break space
    )
}

fn digit_value(c: char, profile: &LanguageProfile) -> Option<u32> {
    if c.is_ascii_digit() {
        Some(c as u32 - '0' as u32)
    } else if profile.is_native_digit(c) {
        Some(c as u32 - profile.digit_zero as u32)
    } else {
        None
    }
}

/// Normalizes one line of text for `config`'s language.
///
/// The passes run in a fixed order: drop control and format characters,
/// drop characters outside the script and the shared punctuation and digit
/// sets, rewrite punctuation variants, expand the ellipsis character to
/// `...`, strip accents on the Latin side, map digits to the configured
/// script, and collapse whitespace. Applying the function twice gives the
/// same output as applying it once.
pub fn clean_line(line: &str, config: &CleanConfig) -> String {
    let profile = &config.profile;

    // Keep script characters, common punctuation, digits, and whitespace.
    let mut kept = String::with_capacity(line.len());
    for c in line.chars() {
        if c.is_control() || is_format_char(c) {
            continue;
        }
        if c.is_whitespace() {
            kept.push(' ');
        } else if profile.contains(c)
            || is_common_punct(c)
            || digit_value(c, profile).is_some()
        {
            kept.push(c);
        }
    }

    // Canonical punctuation, with the ellipsis expanded to three periods.
    let mut mapped = String::with_capacity(kept.len());
    for c in kept.chars() {
        if c == '\u{2026}' {
            mapped.push_str("...");
        } else {
            mapped.push(*config.punct_map.get(&c).unwrap_or(&c));
        }
    }

    let deaccented = if config.deaccent && profile.latin_side {
        mapped
            .nfd()
            .filter(|c| !matches!(c, '\u{0300}'..='\u{036F}'))
            .collect()
    } else {
        mapped
    };

    let target_zero = match config.normalize_digits_to {
        DigitScript::Latin => '0',
        DigitScript::Native => profile.digit_zero,
    };
    let digits_mapped: String = deaccented
        .chars()
        .map(|c| match digit_value(c, profile) {
            Some(v) => char::from_u32(target_zero as u32 + v).unwrap_or(c),
            None => c,
        })
        .collect();

    let mut out = String::with_capacity(digits_mapped.len());
    let mut pending_space = false;
    for c in digits_mapped.chars() {
        if c == ' ' {
            pending_space = !out.is_empty();
        } else {
            if pending_space {
                out.push(' ');
                pending_space = false;
            }
            out.push(c);
        }
    }
    out
}

/// Punctuation that splits off as its own token.
fn is_punct_token_char(c: char) -> bool {
    is_common_punct(c)
}

fn is_word_char(c: char) -> bool {
    !is_punct_token_char(c) && !c.is_whitespace()
}

/// Splits a line into word and punctuation tokens.
///
/// Punctuation detaches from words except in three glue positions, which
/// keep numbers, hyphenated words, and dotted abbreviations whole:
/// `. , :` between two word characters when at least one side is a digit,
/// `-` between word characters, and `.` between word characters.
pub fn tokenize(line: &str, _profile: &LanguageProfile) -> Vec<String> {
    let mut tokens = Vec::new();
    for chunk in line.split_whitespace() {
        let chars: Vec<char> = chunk.chars().collect();
        let mut word = String::new();
        for (i, &c) in chars.iter().enumerate() {
            if !is_punct_token_char(c) {
                word.push(c);
                continue;
            }
            let prev_word = i > 0 && is_word_char(chars[i - 1]);
            let next_word = i + 1 < chars.len() && is_word_char(chars[i + 1]);
            let glued = prev_word && next_word && matches!(c, '.' | ',' | ':' | '-');
            if glued {
                word.push(c);
            } else {
                if !word.is_empty() {
                    tokens.push(std::mem::take(&mut word));
                }
                tokens.push(c.to_string());
            }
        }
        if !word.is_empty() {
            tokens.push(word);
        }
    }
    tokens
}

/// Punctuation that attaches to the preceding token when detokenizing.
fn closes_left(token: &str) -> bool {
    !token.is_empty()
        && token.chars().all(|c| {
            matches!(
                c,
                '.' | ',' | '!' | '?' | ';' | ':' | ')' | ']' | '}' | '%'
                    | '\u{0964}' | '\u{0965}' | '\u{060C}' | '\u{061B}' | '\u{061F}' | '\u{06D4}'
            )
        })
}

/// Punctuation that attaches to the following token.
fn opens_right(token: &str) -> bool {
    !token.is_empty() && token.chars().all(|c| matches!(c, '(' | '[' | '{'))
}

/// Joins tokens back into a line, re-attaching punctuation. Inverse of
/// [`tokenize`] on lines already in canonical spacing.
pub fn detokenize(tokens: &[String], _profile: &LanguageProfile) -> String {
    let mut out = String::new();
    let mut prev_opens = false;
    for token in tokens {
        if !out.is_empty() && !prev_opens && !closes_left(token) {
            out.push(' ');
        }
        out.push_str(token);
        prev_opens = opens_right(token);
    }
    out
}

/// Lowercase-key truecasing model: for every lowercased word, the surface
/// form it should take in mid-sentence position.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TruecaseModel {
    /// Lowercase key -> preferred surface form.
    best_form: BTreeMap<String, String>,
    /// Surface form -> count behind the decision.
    counts: BTreeMap<String, u64>,
}

impl TruecaseModel {
    pub fn best_form(&self, key: &str) -> Option<&str> {
        self.best_form.get(key).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.best_form.len()
    }

    pub fn is_empty(&self) -> bool {
        self.best_form.is_empty()
    }
}

fn has_alpha(token: &str) -> bool {
    token.chars().any(char::is_alphabetic)
}

/// Index of the sentence-initial word: the first token containing an
/// alphabetic character.
fn initial_index(tokens: &[String]) -> Option<usize> {
    tokens.iter().position(|t| has_alpha(t))
}

/// Learns per-word casing from tokenized sentences. Occurrences in
/// sentence-initial position only vote for a word when it never appears
/// elsewhere, since initial position forces capitalization.
pub fn train_truecaser(sentences: &[Vec<String>]) -> TruecaseModel {
    let mut mid: BTreeMap<String, BTreeMap<String, u64>> = BTreeMap::new();
    let mut initial: BTreeMap<String, BTreeMap<String, u64>> = BTreeMap::new();
    for sent in sentences {
        let init = initial_index(sent);
        for (i, token) in sent.iter().enumerate() {
            if !has_alpha(token) {
                continue;
            }
            let key = token.to_lowercase();
            let bucket = if Some(i) == init { &mut initial } else { &mut mid };
            *bucket
                .entry(key)
                .or_default()
                .entry(token.clone())
                .or_insert(0) += 1;
        }
    }

    let mut model = TruecaseModel::default();
    let keys: std::collections::BTreeSet<&String> = mid.keys().chain(initial.keys()).collect();
    for key in keys {
        let forms = mid.get(key).unwrap_or_else(|| &initial[key]);
        // Highest count wins; ties go to the lexicographically smaller form.
        let best = forms
            .iter()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
            .map(|(form, _)| form.clone())
            .expect("non-empty form bucket");
        model.best_form.insert(key.clone(), best);
        for (form, count) in forms {
            *model.counts.entry(form.clone()).or_insert(0) += count;
        }
    }
    model
}

fn is_latin_alpha(c: char) -> bool {
    c.is_alphabetic() && matches!(c as u32, 0x0041..=0x024F)
}

/// Rewrites the sentence-initial word to its preferred casing. Only
/// Latin-script words change; other scripts have no case.
pub fn truecase(tokens: &[String], model: &TruecaseModel) -> Vec<String> {
    let mut out = tokens.to_vec();
    if let Some(idx) = initial_index(tokens) {
        let token = &tokens[idx];
        let first_alpha = token.chars().find(|c| c.is_alphabetic());
        if first_alpha.is_some_and(is_latin_alpha) {
            if let Some(best) = model.best_form(&token.to_lowercase()) {
                out[idx] = best.to_string();
            }
        }
    }
    out
}

/// Drops free-standing quotation marks, apostrophes, and commas from a
/// token sequence. Used on decoder output before detokenization.
pub fn strip_redundant_punct(tokens: &[String]) -> Vec<String> {
    tokens
        .iter()
        .filter(|t| {
            !matches!(
                t.as_str(),
                "\"" | "'" | "," | "\u{060C}" | "`"
            )
        })
        .cloned()
        .collect()
}

/// Serializes a truecase model: one `surface<TAB>count` line per form,
/// grouped by lowercase key with the preferred form first.
pub fn write_truecase_model(model: &TruecaseModel, path: &Path) -> Result<()> {
    let mut out = String::new();
    for (key, best) in &model.best_form {
        let count = model.counts.get(best).copied().unwrap_or(0);
        out.push_str(&format!("{best}\t{count}\n"));
        let mut rest: Vec<(&String, u64)> = model
            .counts
            .iter()
            .filter(|(form, _)| form.to_lowercase() == *key && *form != best)
            .map(|(form, count)| (form, *count))
            .collect();
        rest.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        for (form, count) in rest {
            out.push_str(&format!("{form}\t{count}\n"));
        }
    }
    fs::write(path, out)?;
    Ok(())
}

/// Reads a model written by [`write_truecase_model`]. The first form seen
/// for each lowercase key is taken as the preferred one.
pub fn read_truecase_model(path: &Path) -> Result<TruecaseModel> {
    let text = fs::read_to_string(path)?;
    let mut model = TruecaseModel::default();
    for (idx, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let (form, count) = line.split_once('\t').ok_or_else(|| SmtError::ParseError {
            path: path.to_path_buf(),
            line: idx + 1,
            message: "expected surface<TAB>count".to_string(),
        })?;
        let count: u64 = count.parse().map_err(|_| SmtError::ParseError {
            path: path.to_path_buf(),
            line: idx + 1,
            message: format!("bad count `{count}`"),
        })?;
        let key = form.to_lowercase();
        model.best_form.entry(key).or_insert_with(|| form.to_string());
        *model.counts.entry(form.to_string()).or_insert(0) += count;
    }
    Ok(model)
}
