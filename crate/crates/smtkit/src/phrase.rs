//! Phrase extraction from word-aligned sentence pairs and the scored
//! phrase table.
//!
//! A phrase pair is a pair of spans such that no alignment link crosses
//! the span boundary and at least one link lies inside. Target spans
//! additionally extend over adjacent unaligned target words.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::align::{Alignment, LexicalTable, NULL_WORD};
use crate::error::{Result, SmtError};

/// A consistent phrase occurrence: inclusive 0-based spans into the
/// source and target sentences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct PhraseSpan {
    pub src: (usize, usize),
    pub tgt: (usize, usize),
}

/// Extracts every consistent phrase span with both sides at most
/// `max_len` words, sorted.
pub fn extract_phrases(
    src_len: usize,
    tgt_len: usize,
    alignment: &Alignment,
    max_len: usize,
) -> Result<Vec<PhraseSpan>> {
    if max_len == 0 {
        return Err(SmtError::InvalidParameter(
            "phrase length cap must be at least 1".to_string(),
        ));
    }
    if alignment.src_len != src_len || alignment.tgt_len != tgt_len {
        return Err(SmtError::DimensionMismatch(format!(
            "alignment is {}x{} but the sentence pair is {}x{}",
            alignment.src_len, alignment.tgt_len, src_len, tgt_len
        )));
    }
    let links: Vec<(usize, usize)> = alignment.links().collect();
    let mut tgt_aligned = vec![false; tgt_len];
    for &(_, j) in &links {
        tgt_aligned[j] = true;
    }

    let mut spans = Vec::new();
    for i1 in 0..src_len {
        for i2 in i1..src_len.min(i1 + max_len) {
            // Target extent of the links inside [i1, i2].
            let mut j_min = usize::MAX;
            let mut j_max = 0;
            for &(i, j) in &links {
                if i >= i1 && i <= i2 {
                    j_min = j_min.min(j);
                    j_max = j_max.max(j);
                }
            }
            if j_min == usize::MAX {
                continue;
            }
            // Consistency: no link inside the target extent may leave the
            // source span.
            let consistent = links
                .iter()
                .all(|&(i, j)| j < j_min || j > j_max || (i >= i1 && i <= i2));
            if !consistent {
                continue;
            }
            // Fan out over unaligned target boundary words.
            let mut lo = j_min;
            loop {
                let mut hi = j_max;
                loop {
                    if hi - lo + 1 <= max_len {
                        spans.push(PhraseSpan {
                            src: (i1, i2),
                            tgt: (lo, hi),
                        });
                    }
                    if hi + 1 >= tgt_len || tgt_aligned[hi + 1] {
                        break;
                    }
                    hi += 1;
                }
                if lo == 0 || tgt_aligned[lo - 1] {
                    break;
                }
                lo -= 1;
            }
        }
    }
    spans.sort();
    Ok(spans)
}

/// One target-side candidate for a source phrase, with the four phrase
/// features: forward and reverse phrase probabilities, then forward and
/// reverse lexical weights.
#[derive(Debug, Clone, PartialEq)]
pub struct PhraseEntry {
    pub tgt: Vec<String>,
    pub phi_tgt_given_src: f64,
    pub phi_src_given_tgt: f64,
    pub lex_tgt_given_src: f64,
    pub lex_src_given_tgt: f64,
}

/// Scored phrase pairs keyed by source phrase; entries per source phrase
/// are sorted by target phrase.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PhraseTable {
    entries: BTreeMap<Vec<String>, Vec<PhraseEntry>>,
}

impl PhraseTable {
    pub fn lookup(&self, src: &[String]) -> Option<&[PhraseEntry]> {
        self.entries.get(src).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<String>, &[PhraseEntry])> {
        self.entries.iter().map(|(k, v)| (k, v.as_slice()))
    }

    /// Number of (source, target) pairs.
    pub fn len(&self) -> usize {
        self.entries.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Builds a table directly from `(src, tgt, four features)` tuples.
    /// Meant for tests and examples; training uses [`build_phrase_table`].
    pub fn from_entries<I>(items: I) -> PhraseTable
    where
        I: IntoIterator<Item = (Vec<String>, Vec<String>, f64, f64, f64, f64)>,
    {
        let mut entries: BTreeMap<Vec<String>, Vec<PhraseEntry>> = BTreeMap::new();
        for (src, tgt, phi_ts, phi_st, lex_ts, lex_st) in items {
            entries.entry(src).or_default().push(PhraseEntry {
                tgt,
                phi_tgt_given_src: phi_ts,
                phi_src_given_tgt: phi_st,
                lex_tgt_given_src: lex_ts,
                lex_src_given_tgt: lex_st,
            });
        }
        for list in entries.values_mut() {
            list.sort_by(|a, b| a.tgt.cmp(&b.tgt));
        }
        PhraseTable { entries }
    }

    /// Writes `src ||| tgt ||| p p p p` lines with six significant digits,
    /// sorted by source then target phrase.
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for (src, entries) in &self.entries {
            for e in entries {
                out.push_str(&format!(
                    "{} ||| {} ||| {} {} {} {}\n",
                    src.join(" "),
                    e.tgt.join(" "),
                    format_sig6(e.phi_tgt_given_src),
                    format_sig6(e.phi_src_given_tgt),
                    format_sig6(e.lex_tgt_given_src),
                    format_sig6(e.lex_src_given_tgt),
                ));
            }
        }
        fs::write(path, out)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<PhraseTable> {
        let text = fs::read_to_string(path)?;
        let mut entries: BTreeMap<Vec<String>, Vec<PhraseEntry>> = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let err = |message: String| SmtError::ParseError {
                path: path.to_path_buf(),
                line: idx + 1,
                message,
            };
            let fields: Vec<&str> = line.split(" ||| ").collect();
            if fields.len() != 3 {
                return Err(err("expected `src ||| tgt ||| features`".to_string()));
            }
            let src: Vec<String> = fields[0].split(' ').map(str::to_string).collect();
            let tgt: Vec<String> = fields[1].split(' ').map(str::to_string).collect();
            if src.iter().any(String::is_empty) || tgt.iter().any(String::is_empty) {
                return Err(err("empty phrase".to_string()));
            }
            let feats: Vec<f64> = fields[2]
                .split(' ')
                .map(|f| f.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| err(format!("bad feature values `{}`", fields[2])))?;
            if feats.len() != 4 {
                return Err(err(format!("expected 4 features, got {}", feats.len())));
            }
            entries.entry(src).or_default().push(PhraseEntry {
                tgt,
                phi_tgt_given_src: feats[0],
                phi_src_given_tgt: feats[1],
                lex_tgt_given_src: feats[2],
                lex_src_given_tgt: feats[3],
            });
        }
        for list in entries.values_mut() {
            list.sort_by(|a, b| a.tgt.cmp(&b.tgt));
        }
        Ok(PhraseTable { entries })
    }
}

/// Formats a number with six significant digits, using plain decimal
/// notation in the usual probability range.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-5..6).contains(&exp) {
        format!("{x:.5e}")
    } else {
        let decimals = (5 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    }
}

/// Koehn-style lexical weight of the target phrase given the source
/// phrase: for each target word, average t(target | source) over its
/// linked source words, or t(target | NULL) when unaligned; multiply over
/// target words.
fn lexical_weight(
    from_tokens: &[String],
    to_tokens: &[String],
    links_to_from: &[Vec<usize>],
    table: &LexicalTable,
) -> f64 {
    let mut weight = 1.0;
    for (j, to_word) in to_tokens.iter().enumerate() {
        let linked = &links_to_from[j];
        if linked.is_empty() {
            weight *= table.prob(NULL_WORD, to_word);
        } else {
            let sum: f64 = linked
                .iter()
                .map(|&i| table.prob(&from_tokens[i], to_word))
                .sum();
            weight *= sum / linked.len() as f64;
        }
    }
    weight
}

/// Builds the phrase table from aligned training pairs.
///
/// `forward_lex` is t(target | source) and `reverse_lex` is
/// t(source | target). Phrase probabilities are relative frequencies of
/// extracted occurrences; when one phrase pair surfaces with several
/// internal alignments the larger lexical weight is kept.
pub fn build_phrase_table(
    pairs: &[(Vec<String>, Vec<String>)],
    alignments: &[Alignment],
    forward_lex: &LexicalTable,
    reverse_lex: &LexicalTable,
    max_len: usize,
) -> Result<PhraseTable> {
    if pairs.len() != alignments.len() {
        return Err(SmtError::DimensionMismatch(format!(
            "{} sentence pairs but {} alignments",
            pairs.len(),
            alignments.len()
        )));
    }

    type Phrase = Vec<String>;
    let mut joint: BTreeMap<(Phrase, Phrase), u64> = BTreeMap::new();
    let mut lex_ts: BTreeMap<(Phrase, Phrase), f64> = BTreeMap::new();
    let mut lex_st: BTreeMap<(Phrase, Phrase), f64> = BTreeMap::new();

    for ((src, tgt), alignment) in pairs.iter().zip(alignments) {
        let spans = extract_phrases(src.len(), tgt.len(), alignment, max_len)?;
        for span in spans {
            let (i1, i2) = span.src;
            let (j1, j2) = span.tgt;
            let src_phrase: Phrase = src[i1..=i2].to_vec();
            let tgt_phrase: Phrase = tgt[j1..=j2].to_vec();

            // Links inside the span, reindexed to the phrase.
            let mut tgt_links: Vec<Vec<usize>> = vec![Vec::new(); j2 - j1 + 1];
            let mut src_links: Vec<Vec<usize>> = vec![Vec::new(); i2 - i1 + 1];
            for (i, j) in alignment.links() {
                if i >= i1 && i <= i2 && j >= j1 && j <= j2 {
                    tgt_links[j - j1].push(i - i1);
                    src_links[i - i1].push(j - j1);
                }
            }
            let w_ts = lexical_weight(&src_phrase, &tgt_phrase, &tgt_links, forward_lex);
            let w_st = lexical_weight(&tgt_phrase, &src_phrase, &src_links, reverse_lex);

            let key = (src_phrase, tgt_phrase);
            *joint.entry(key.clone()).or_insert(0) += 1;
            let slot_ts = lex_ts.entry(key.clone()).or_insert(w_ts);
            *slot_ts = slot_ts.max(w_ts);
            let slot_st = lex_st.entry(key).or_insert(w_st);
            *slot_st = slot_st.max(w_st);
        }
    }

    let mut src_totals: BTreeMap<Phrase, u64> = BTreeMap::new();
    let mut tgt_totals: BTreeMap<Phrase, u64> = BTreeMap::new();
    for ((s, t), count) in &joint {
        *src_totals.entry(s.clone()).or_insert(0) += count;
        *tgt_totals.entry(t.clone()).or_insert(0) += count;
    }

    let mut entries: BTreeMap<Phrase, Vec<PhraseEntry>> = BTreeMap::new();
    for ((s, t), count) in &joint {
        let key = (s.clone(), t.clone());
        entries.entry(s.clone()).or_default().push(PhraseEntry {
            tgt: t.clone(),
            phi_tgt_given_src: *count as f64 / src_totals[s] as f64,
            phi_src_given_tgt: *count as f64 / tgt_totals[t] as f64,
            lex_tgt_given_src: lex_ts[&key],
            lex_src_given_tgt: lex_st[&key],
        });
    }
    // BTreeMap iteration already delivers targets in order per source.
    Ok(PhraseTable { entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    fn span(src: (usize, usize), tgt: (usize, usize)) -> PhraseSpan {
        PhraseSpan { src, tgt }
    }

    #[test]
    fn diagonal_alignment_gives_all_square_spans() {
        let a = Alignment::from_links(2, 2, [(0, 0), (1, 1)]).unwrap();
        let spans = extract_phrases(2, 2, &a, 7).unwrap();
        assert_eq!(
            spans,
            vec![
                span((0, 0), (0, 0)),
                span((0, 1), (0, 1)),
                span((1, 1), (1, 1)),
            ]
        );
    }

    #[test]
    fn crossing_links_swap_sub_span_targets() {
        // a<->y, b<->x: the sub-phrases come out swapped, and the full
        // block is consistent too.
        let a = Alignment::from_links(2, 2, [(0, 1), (1, 0)]).unwrap();
        let spans = extract_phrases(2, 2, &a, 7).unwrap();
        assert_eq!(
            spans,
            vec![
                span((0, 0), (1, 1)),
                span((0, 1), (0, 1)),
                span((1, 1), (0, 0)),
            ]
        );
    }

    #[test]
    fn entangled_links_block_sub_spans() {
        // a<->{x,y}, b<->x: neither single-word span is consistent, so
        // only the full 2x2 block survives.
        let a = Alignment::from_links(2, 2, [(0, 0), (0, 1), (1, 0)]).unwrap();
        let spans = extract_phrases(2, 2, &a, 7).unwrap();
        assert_eq!(spans, vec![span((0, 1), (0, 1))]);
    }

    #[test]
    fn unaligned_target_words_extend_spans() {
        // Source "a b", target "x u y": u is unaligned.
        let a = Alignment::from_links(2, 3, [(0, 0), (1, 2)]).unwrap();
        let spans = extract_phrases(2, 3, &a, 7).unwrap();
        assert_eq!(
            spans,
            vec![
                span((0, 0), (0, 0)),
                span((0, 0), (0, 1)),
                span((0, 1), (0, 2)),
                span((1, 1), (1, 2)),
                span((1, 1), (2, 2)),
            ]
        );
    }

    #[test]
    fn empty_alignment_extracts_nothing() {
        let a = Alignment::new(3, 3);
        assert!(extract_phrases(3, 3, &a, 7).unwrap().is_empty());
    }

    #[test]
    fn max_len_caps_both_sides() {
        let a = Alignment::from_links(3, 3, [(0, 0), (1, 1), (2, 2)]).unwrap();
        let spans = extract_phrases(3, 3, &a, 2).unwrap();
        assert!(spans
            .iter()
            .all(|s| s.src.1 - s.src.0 < 2 && s.tgt.1 - s.tgt.0 < 2));
        assert!(!spans.iter().any(|s| s.src == (0, 2)));
    }

    #[test]
    fn extraction_validates_inputs() {
        let a = Alignment::new(2, 2);
        assert!(extract_phrases(2, 2, &a, 0).is_err());
        assert!(extract_phrases(3, 2, &a, 5).is_err());
    }

    #[test]
    fn phrase_probabilities_are_relative_frequencies() {
        let pairs = vec![
            (toks("a b"), toks("x y")),
            (toks("a c"), toks("x z")),
        ];
        let alignments = vec![
            Alignment::from_links(2, 2, [(0, 0), (1, 1)]).unwrap(),
            Alignment::from_links(2, 2, [(0, 0), (1, 1)]).unwrap(),
        ];
        let fwd = ibm1_table(&pairs);
        let rev_pairs: Vec<_> = pairs.iter().map(|(s, t)| (t.clone(), s.clone())).collect();
        let rev = ibm1_table(&rev_pairs);
        let table = build_phrase_table(&pairs, &alignments, &fwd, &rev, 7).unwrap();

        // Source "a" pairs with "x" twice and nothing else.
        let a_entries = table.lookup(&toks("a")).unwrap();
        assert_eq!(a_entries.len(), 1);
        assert!((a_entries[0].phi_tgt_given_src - 1.0).abs() < 1e-12);
        assert!((a_entries[0].phi_src_given_tgt - 1.0).abs() < 1e-12);

        // phi(t|s) sums to one for each source phrase.
        for (_, entries) in table.iter() {
            let total: f64 = entries.iter().map(|e| e.phi_tgt_given_src).sum();
            assert!((total - 1.0).abs() < 1e-9);
        }
    }

    fn ibm1_table(pairs: &[(Vec<String>, Vec<String>)]) -> LexicalTable {
        crate::align::train_ibm1(pairs, 5).unwrap().lexical
    }

    #[test]
    fn lexical_weights_follow_links() {
        // One pair, fully linked: "a b" <-> "x" with both sources linked
        // to the one target word.
        let pairs = vec![(toks("a b"), toks("x"))];
        let alignments = vec![Alignment::from_links(2, 1, [(0, 0), (1, 0)]).unwrap()];
        let fwd = ibm1_table(&pairs);
        let rev_pairs: Vec<_> = pairs.iter().map(|(s, t)| (t.clone(), s.clone())).collect();
        let rev = ibm1_table(&rev_pairs);
        let table = build_phrase_table(&pairs, &alignments, &fwd, &rev, 7).unwrap();
        let entry = &table.lookup(&toks("a b")).unwrap()[0];
        // lex(t|s): average of t(x|a) and t(x|b).
        let expected_ts = 0.5 * (fwd.prob("a", "x") + fwd.prob("b", "x"));
        assert!((entry.lex_tgt_given_src - expected_ts).abs() < 1e-12);
        // lex(s|t): product over source words of t(source | x).
        let expected_st = rev.prob("x", "a") * rev.prob("x", "b");
        assert!((entry.lex_src_given_tgt - expected_st).abs() < 1e-12);
    }

    #[test]
    fn unaligned_words_use_null_row() {
        let pairs = vec![(toks("a"), toks("x u"))];
        let alignments = vec![Alignment::from_links(1, 2, [(0, 0)]).unwrap()];
        let fwd = ibm1_table(&pairs);
        let rev_pairs: Vec<_> = pairs.iter().map(|(s, t)| (t.clone(), s.clone())).collect();
        let rev = ibm1_table(&rev_pairs);
        let table = build_phrase_table(&pairs, &alignments, &fwd, &rev, 7).unwrap();
        let entry = table
            .lookup(&toks("a"))
            .unwrap()
            .iter()
            .find(|e| e.tgt == toks("x u"))
            .unwrap();
        let expected = fwd.prob("a", "x") * fwd.prob(NULL_WORD, "u");
        assert!((entry.lex_tgt_given_src - expected).abs() < 1e-12);
    }

    #[test]
    fn sig6_formatting() {
        assert_eq!(format_sig6(1.0), "1.00000");
        assert_eq!(format_sig6(0.5), "0.500000");
        assert_eq!(format_sig6(1.0 / 3.0), "0.333333");
        assert_eq!(format_sig6(0.0001234567), "0.000123457");
        assert_eq!(format_sig6(0.0), "0");
        assert_eq!(format_sig6(123456.7), "123457");
        assert_eq!(format_sig6(1234567.0), "1.23457e6");
        assert_eq!(format_sig6(0.00000123456), "1.23456e-6");
    }

    #[test]
    fn table_file_roundtrip_is_stable() {
        let pairs = vec![
            (toks("a b c"), toks("x y z")),
            (toks("a b"), toks("x y")),
            (toks("c d"), toks("z w")),
        ];
        let alignments = vec![
            Alignment::from_links(3, 3, [(0, 0), (1, 1), (2, 2)]).unwrap(),
            Alignment::from_links(2, 2, [(0, 0), (1, 1)]).unwrap(),
            Alignment::from_links(2, 2, [(0, 0), (1, 1)]).unwrap(),
        ];
        let fwd = ibm1_table(&pairs);
        let rev_pairs: Vec<_> = pairs.iter().map(|(s, t)| (t.clone(), s.clone())).collect();
        let rev = ibm1_table(&rev_pairs);
        let table = build_phrase_table(&pairs, &alignments, &fwd, &rev, 7).unwrap();

        let dir = tempfile::tempdir().unwrap();
        let p1 = dir.path().join("pt1");
        let p2 = dir.path().join("pt2");
        table.write(&p1).unwrap();
        let back = PhraseTable::read(&p1).unwrap();
        back.write(&p2).unwrap();
        assert_eq!(fs::read(&p1).unwrap(), fs::read(&p2).unwrap());
        assert_eq!(back.len(), table.len());
    }
}
