//! Word alignment: IBM Model 1 and 2 EM training, Viterbi alignment, and
//! bidirectional symmetrization.
//!
//! The forward direction models the target side as generated from the
//! source side: each target position links to a source position or to the
//! reserved NULL word. Reverse models are trained on swapped pairs and
//! transposed back before symmetrization.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use crate::error::{Result, SmtError};

/// Reserved source word for target words with no real counterpart.
pub const NULL_WORD: &str = "NULL";

/// Lexical translation table t(target | source); rows are source words
/// (including NULL) and each row sums to one.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LexicalTable {
    rows: BTreeMap<String, BTreeMap<String, f64>>,
}

impl LexicalTable {
    pub fn prob(&self, src: &str, tgt: &str) -> f64 {
        self.rows
            .get(src)
            .and_then(|row| row.get(tgt))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn row(&self, src: &str) -> Option<&BTreeMap<String, f64>> {
        self.rows.get(src)
    }

    pub fn rows(&self) -> impl Iterator<Item = (&String, &BTreeMap<String, f64>)> {
        self.rows.iter()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Writes `source<TAB>target<TAB>probability` lines, sorted by source
    /// then target word.
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for (src, row) in &self.rows {
            for (tgt, p) in row {
                out.push_str(&format!("{src}\t{tgt}\t{p}\n"));
            }
        }
        fs::write(path, out)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<LexicalTable> {
        let text = fs::read_to_string(path)?;
        let mut rows: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split('\t');
            let (src, tgt, p) = match (fields.next(), fields.next(), fields.next(), fields.next())
            {
                (Some(s), Some(t), Some(p), None) => (s, t, p),
                _ => {
                    return Err(SmtError::ParseError {
                        path: path.to_path_buf(),
                        line: idx + 1,
                        message: "expected source<TAB>target<TAB>probability".to_string(),
                    })
                }
            };
            let p: f64 = p.parse().map_err(|_| SmtError::ParseError {
                path: path.to_path_buf(),
                line: idx + 1,
                message: format!("bad probability `{p}`"),
            })?;
            rows.entry(src.to_string())
                .or_default()
                .insert(tgt.to_string(), p);
        }
        Ok(LexicalTable { rows })
    }
}

/// Position distribution a(i | j, l, m) of IBM Model 2: for a target
/// position `j` in a sentence pair of source length `l` and target length
/// `m`, the probability of each source position. Index 0 stands for NULL
/// and index `i` for source word `i - 1`. Unseen geometries fall back to
/// the uniform 1 / (l + 1).
#[derive(Debug, Clone, Default)]
pub struct DistortionTable {
    table: HashMap<(usize, usize, usize), Vec<f64>>,
}

impl DistortionTable {
    pub fn prob(&self, i: usize, j: usize, l: usize, m: usize) -> f64 {
        match self.table.get(&(j, l, m)) {
            Some(row) => row[i],
            None => 1.0 / (l as f64 + 1.0),
        }
    }

    pub fn row(&self, j: usize, l: usize, m: usize) -> Option<&[f64]> {
        self.table.get(&(j, l, m)).map(Vec::as_slice)
    }

    /// All `(j, l, m)` rows, in no particular order.
    pub fn rows(&self) -> impl Iterator<Item = (&(usize, usize, usize), &[f64])> {
        self.table.iter().map(|(k, v)| (k, v.as_slice()))
    }
}

/// IBM Model 1 parameters plus the training log-likelihood trace, one
/// entry per EM iteration measured under the parameters entering it.
#[derive(Debug, Clone)]
pub struct Ibm1Model {
    pub lexical: LexicalTable,
    pub log_likelihood: Vec<f64>,
}

/// IBM Model 2 parameters plus the log-likelihood trace.
#[derive(Debug, Clone)]
pub struct Ibm2Model {
    pub lexical: LexicalTable,
    pub distortion: DistortionTable,
    pub log_likelihood: Vec<f64>,
}

fn check_training_inputs(pairs: &[(Vec<String>, Vec<String>)], iterations: usize) -> Result<()> {
    if iterations == 0 {
        return Err(SmtError::InvalidParameter(
            "EM needs at least one iteration".to_string(),
        ));
    }
    if pairs.is_empty() {
        return Err(SmtError::EmptyCorpus(
            "alignment training needs at least one sentence pair".to_string(),
        ));
    }
    for (src, tgt) in pairs {
        if src.is_empty() || tgt.is_empty() {
            return Err(SmtError::EmptyCorpus(
                "alignment training pairs must be non-empty on both sides".to_string(),
            ));
        }
    }
    Ok(())
}

fn normalize_rows(counts: BTreeMap<String, BTreeMap<String, f64>>) -> LexicalTable {
    let mut rows = BTreeMap::new();
    for (src, row) in counts {
        let total: f64 = row.values().sum();
        if total > 0.0 {
            let normalized: BTreeMap<String, f64> =
                row.into_iter().map(|(tgt, c)| (tgt, c / total)).collect();
            rows.insert(src, normalized);
        }
    }
    LexicalTable { rows }
}

/// Trains IBM Model 1 by EM. The table starts uniform over each source
/// word's co-occurring target words, so rows sum to one from the start,
/// and the per-iteration corpus log-likelihood never decreases.
pub fn train_ibm1(pairs: &[(Vec<String>, Vec<String>)], iterations: usize) -> Result<Ibm1Model> {
    check_training_inputs(pairs, iterations)?;

    let mut cooc: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (src, tgt) in pairs {
        for e in src.iter().map(String::as_str).chain([NULL_WORD]) {
            let entry = cooc.entry(e.to_string()).or_default();
            entry.extend(tgt.iter().cloned());
        }
    }
    let mut lexical = LexicalTable {
        rows: cooc
            .into_iter()
            .map(|(e, fs)| {
                let p = 1.0 / fs.len() as f64;
                (e, fs.into_iter().map(|f| (f, p)).collect())
            })
            .collect(),
    };

    let mut log_likelihood = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        let mut ll = 0.0;
        let mut counts: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
        for (src, tgt) in pairs {
            let l = src.len();
            for f in tgt {
                let t_null = lexical.prob(NULL_WORD, f);
                let mut denom = t_null;
                for e in src {
                    denom += lexical.prob(e, f);
                }
                // P(f | sentence) = denom / (l + 1) under uniform alignment.
                ll += denom.ln() - ((l + 1) as f64).ln();
                if denom > 0.0 {
                    *counts
                        .entry(NULL_WORD.to_string())
                        .or_default()
                        .entry(f.clone())
                        .or_insert(0.0) += t_null / denom;
                    for e in src {
                        *counts
                            .entry(e.clone())
                            .or_default()
                            .entry(f.clone())
                            .or_insert(0.0) += lexical.prob(e, f) / denom;
                    }
                }
            }
        }
        lexical = normalize_rows(counts);
        log_likelihood.push(ll);
    }
    Ok(Ibm1Model {
        lexical,
        log_likelihood,
    })
}

/// Trains IBM Model 2 by EM, starting from an existing lexical table
/// (normally the IBM Model 1 result) and uniform position distributions.
pub fn train_ibm2(
    pairs: &[(Vec<String>, Vec<String>)],
    iterations: usize,
    init: &LexicalTable,
) -> Result<Ibm2Model> {
    check_training_inputs(pairs, iterations)?;

    let mut lexical = init.clone();
    let mut distortion = DistortionTable::default();
    let mut log_likelihood = Vec::with_capacity(iterations);

    for _ in 0..iterations {
        let mut ll = 0.0;
        let mut lex_counts: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
        let mut pos_counts: HashMap<(usize, usize, usize), Vec<f64>> = HashMap::new();
        for (src, tgt) in pairs {
            let l = src.len();
            let m = tgt.len();
            for (j, f) in tgt.iter().enumerate() {
                // Index 0 is NULL, i stands for source word i - 1.
                let mut joint = Vec::with_capacity(l + 1);
                joint.push(distortion.prob(0, j, l, m) * lexical.prob(NULL_WORD, f));
                for (idx, e) in src.iter().enumerate() {
                    joint.push(distortion.prob(idx + 1, j, l, m) * lexical.prob(e, f));
                }
                let denom: f64 = joint.iter().sum();
                ll += denom.ln();
                if denom <= 0.0 {
                    continue;
                }
                let pos_row = pos_counts
                    .entry((j, l, m))
                    .or_insert_with(|| vec![0.0; l + 1]);
                for (i, jp) in joint.iter().enumerate() {
                    let gamma = jp / denom;
                    let e = if i == 0 { NULL_WORD } else { &src[i - 1] };
                    *lex_counts
                        .entry(e.to_string())
                        .or_default()
                        .entry(f.clone())
                        .or_insert(0.0) += gamma;
                    pos_row[i] += gamma;
                }
            }
        }
        lexical = normalize_rows(lex_counts);
        let mut table = HashMap::with_capacity(pos_counts.len());
        for (key, row) in pos_counts {
            let total: f64 = row.iter().sum();
            if total > 0.0 {
                table.insert(key, row.into_iter().map(|c| c / total).collect());
            }
        }
        distortion = DistortionTable { table };
        log_likelihood.push(ll);
    }
    Ok(Ibm2Model {
        lexical,
        distortion,
        log_likelihood,
    })
}

/// A set of word alignment links between a source sentence of `src_len`
/// words and a target sentence of `tgt_len` words. Links are `(source
/// index, target index)` pairs, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alignment {
    pub src_len: usize,
    pub tgt_len: usize,
    links: BTreeSet<(usize, usize)>,
}

impl Alignment {
    pub fn new(src_len: usize, tgt_len: usize) -> Alignment {
        Alignment {
            src_len,
            tgt_len,
            links: BTreeSet::new(),
        }
    }

    pub fn from_links<I>(src_len: usize, tgt_len: usize, links: I) -> Result<Alignment>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut a = Alignment::new(src_len, tgt_len);
        for (i, j) in links {
            if i >= src_len || j >= tgt_len {
                return Err(SmtError::DimensionMismatch(format!(
                    "link {i}-{j} outside a {src_len}x{tgt_len} sentence pair"
                )));
            }
            a.links.insert((i, j));
        }
        Ok(a)
    }

    pub fn insert(&mut self, i: usize, j: usize) {
        debug_assert!(i < self.src_len && j < self.tgt_len);
        self.links.insert((i, j));
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.links.contains(&(i, j))
    }

    pub fn links(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.links.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    pub fn is_subset(&self, other: &Alignment) -> bool {
        self.links.is_subset(&other.links)
    }

    /// Swaps the two sides, turning a target-to-source alignment into a
    /// source-to-target one.
    pub fn transpose(&self) -> Alignment {
        Alignment {
            src_len: self.tgt_len,
            tgt_len: self.src_len,
            links: self.links.iter().map(|&(i, j)| (j, i)).collect(),
        }
    }

    /// Renders the links as space-separated `i-j` pairs in sorted order.
    pub fn to_pharaoh(&self) -> String {
        self.links
            .iter()
            .map(|(i, j)| format!("{i}-{j}"))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Parses a `i-j i-j ...` line against known sentence lengths.
    pub fn from_pharaoh(line: &str, src_len: usize, tgt_len: usize) -> Result<Alignment> {
        let mut links = Vec::new();
        for token in line.split_whitespace() {
            let (i, j) = token
                .split_once('-')
                .ok_or_else(|| {
                    SmtError::InvalidParameter(format!("malformed alignment pair `{token}`"))
                })?;
            let i: usize = i.parse().map_err(|_| {
                SmtError::InvalidParameter(format!("malformed alignment pair `{token}`"))
            })?;
            let j: usize = j.parse().map_err(|_| {
                SmtError::InvalidParameter(format!("malformed alignment pair `{token}`"))
            })?;
            links.push((i, j));
        }
        Alignment::from_links(src_len, tgt_len, links)
    }
}

/// Most probable link per target position: NULL or the source position
/// maximizing lexical (times position, for Model 2) probability. Ties go
/// to the smaller source position, with NULL smallest of all; a target
/// word linking to NULL produces no link.
pub fn viterbi_align(
    lexical: &LexicalTable,
    distortion: Option<&DistortionTable>,
    src: &[String],
    tgt: &[String],
) -> Alignment {
    let l = src.len();
    let m = tgt.len();
    let mut alignment = Alignment::new(l, m);
    let pos = |i: usize, j: usize| match distortion {
        Some(d) => d.prob(i, j, l, m),
        None => 1.0 / (l as f64 + 1.0),
    };
    for (j, f) in tgt.iter().enumerate() {
        let mut best = lexical.prob(NULL_WORD, f) * pos(0, j);
        let mut best_src: Option<usize> = None;
        for (idx, e) in src.iter().enumerate() {
            let score = lexical.prob(e, f) * pos(idx + 1, j);
            if score > best {
                best = score;
                best_src = Some(idx);
            }
        }
        if let Some(i) = best_src {
            alignment.insert(i, j);
        }
    }
    alignment
}

/// How to merge the two alignment directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetrization {
    Intersection,
    Union,
    /// Grow-diagonal then add links whose source or target is unaligned.
    GrowDiagFinal,
    /// Grow-diagonal then add links with both endpoints unaligned.
    GrowDiagFinalAnd,
}

/// Neighbor offsets scanned during the grow step, in fixed order:
/// N, S, E, W, NE, NW, SE, SW on the (source, target) grid.
const NEIGHBORS: [(isize, isize); 8] = [
    (-1, 0),
    (1, 0),
    (0, 1),
    (0, -1),
    (-1, 1),
    (-1, -1),
    (1, 1),
    (1, -1),
];

/// Merges a forward alignment and a reverse alignment (given in its own
/// target-to-source orientation) into one symmetric alignment. The result
/// always contains the intersection and never exceeds the union.
pub fn symmetrize(
    forward: &Alignment,
    reverse: &Alignment,
    heuristic: Symmetrization,
) -> Result<Alignment> {
    if forward.src_len != reverse.tgt_len || forward.tgt_len != reverse.src_len {
        return Err(SmtError::DimensionMismatch(format!(
            "forward {}x{} and reverse {}x{} alignments do not describe the same pair",
            forward.src_len, forward.tgt_len, reverse.src_len, reverse.tgt_len
        )));
    }
    let reverse = reverse.transpose();
    let src_len = forward.src_len;
    let tgt_len = forward.tgt_len;

    let union: BTreeSet<(usize, usize)> =
        forward.links().chain(reverse.links()).collect();
    let intersection: BTreeSet<(usize, usize)> =
        forward.links().filter(|&(i, j)| reverse.contains(i, j)).collect();

    let mut links = match heuristic {
        Symmetrization::Union => union.clone(),
        Symmetrization::Intersection => intersection.clone(),
        Symmetrization::GrowDiagFinal | Symmetrization::GrowDiagFinalAnd => intersection.clone(),
    };

    if matches!(
        heuristic,
        Symmetrization::GrowDiagFinal | Symmetrization::GrowDiagFinalAnd
    ) {
        let mut src_aligned = vec![false; src_len];
        let mut tgt_aligned = vec![false; tgt_len];
        for &(i, j) in &links {
            src_aligned[i] = true;
            tgt_aligned[j] = true;
        }

        // Grow: repeatedly adopt union neighbors of current links that
        // touch an unaligned word, until nothing changes.
        loop {
            let mut added = false;
            for (i, j) in links.clone() {
                for (di, dj) in NEIGHBORS {
                    let ni = i as isize + di;
                    let nj = j as isize + dj;
                    if ni < 0 || nj < 0 || ni as usize >= src_len || nj as usize >= tgt_len {
                        continue;
                    }
                    let cand = (ni as usize, nj as usize);
                    if union.contains(&cand)
                        && !links.contains(&cand)
                        && (!src_aligned[cand.0] || !tgt_aligned[cand.1])
                    {
                        links.insert(cand);
                        src_aligned[cand.0] = true;
                        tgt_aligned[cand.1] = true;
                        added = true;
                    }
                }
            }
            if !added {
                break;
            }
        }

        // Final: sweep the remaining union links once.
        for &(i, j) in &union {
            if links.contains(&(i, j)) {
                continue;
            }
            let take = match heuristic {
                Symmetrization::GrowDiagFinal => !src_aligned[i] || !tgt_aligned[j],
                _ => !src_aligned[i] && !tgt_aligned[j],
            };
            if take {
                links.insert((i, j));
                src_aligned[i] = true;
                tgt_aligned[j] = true;
            }
        }
    }

    Ok(Alignment {
        src_len,
        tgt_len,
        links,
    })
}
