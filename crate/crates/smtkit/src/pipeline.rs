//! The end-to-end pipeline: run configuration, model directory layout,
//! and the train / tune / translate / evaluate commands.
//!
//! Every artifact is a plain text or JSON file with fully deterministic
//! contents, so repeating a command over the same inputs reproduces each
//! file byte for byte. The run manifest records the stages in order with
//! content digests of what they wrote.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::align::{
    symmetrize, train_ibm1, train_ibm2, viterbi_align, Alignment, Ibm2Model, Symmetrization,
};
use crate::corpus::{
    filter_pairs, length_ogive, load_parallel, lookup_profile, read_lines, stats,
    write_parallel, LanguageProfile, ParallelCorpus, Side,
};
use crate::decode::{
    decode, read_weights, write_weights, DecoderConfig, FeatureWeights,
};
use crate::error::{Result, SmtError};
use crate::eval::{bleu_corpus, metric_corpus, RibesConfig, SentenceMetric};
use crate::lm::{read_arpa, train_lm, ArpaModel, Smoothing};
use crate::phrase::{build_phrase_table, PhraseTable};
use crate::preprocess::{
    clean_line, read_truecase_model, strip_redundant_punct, tokenize, train_truecaser,
    truecase, write_truecase_model, CleanConfig, TruecaseModel,
};
use crate::tune::{tune_weights, TuneMetric, TuneReport};

/// Names of the files a training run leaves in the model directory.
pub mod artifact {
    pub const TOKENIZED_PREFIX: &str = "corpus.tok";
    pub const TRUECASED_PREFIX: &str = "corpus.true";
    pub const TRUECASE_PREFIX: &str = "truecase";
    pub const LM: &str = "lm.arpa";
    pub const LEX_FWD: &str = "lex.fwd";
    pub const LEX_REV: &str = "lex.rev";
    pub const ALIGN_FWD: &str = "align.fwd";
    pub const ALIGN_REV: &str = "align.rev";
    pub const ALIGN_SYM: &str = "align.sym";
    pub const PHRASE_TABLE: &str = "phrase-table";
    pub const WEIGHTS: &str = "weights.txt";
    pub const TUNE_REPORT: &str = "tune-report.txt";
    pub const EM_LOG: &str = "em.log";
    pub const MANIFEST: &str = "manifest.json";
}

/// Sentence-length thresholds reported by the stats and evaluate commands.
pub const OGIVE_THRESHOLDS: [usize; 5] = [4, 8, 16, 32, 64];

fn default_lm_order() -> usize {
    3
}
fn default_em_iterations() -> usize {
    5
}
fn default_max_phrase_len() -> usize {
    7
}
fn default_stack_size() -> usize {
    100
}
fn default_distortion_limit() -> Option<usize> {
    Some(6)
}
fn default_ribes_alpha() -> f64 {
    0.25
}
fn default_ribes_beta() -> f64 {
    0.10
}
fn default_tune_metric() -> TuneMetric {
    TuneMetric::Bleu
}
fn default_tune_passes() -> usize {
    3
}
fn default_max_len() -> usize {
    80
}
fn default_max_ratio() -> f64 {
    9.0
}
fn default_true() -> bool {
    true
}

/// One run configuration, loadable from JSON; every field has a default
/// so a config file only states what it overrides.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct PipelineConfig {
    pub src_lang: String,
    pub tgt_lang: String,
    /// Training corpus prefix; the two sides are `<prefix>.<lang>`.
    pub corpus: Option<PathBuf>,
    /// Dev corpus prefix for tuning.
    pub dev: Option<PathBuf>,
    /// Held-out corpus prefix; translate and evaluate default to it.
    pub test: Option<PathBuf>,
    pub model_dir: PathBuf,
    pub lm_order: usize,
    pub em_iterations: usize,
    pub max_phrase_len: usize,
    pub stack_size: usize,
    /// `null` lifts the reordering limit.
    pub distortion_limit: Option<usize>,
    pub ribes_alpha: f64,
    pub ribes_beta: f64,
    pub tune_metric: TuneMetric,
    pub tune_passes: usize,
    /// Sentence filtering caps applied to the training corpus.
    pub max_len: usize,
    pub max_ratio: f64,
    /// Extra or replacement language profiles, as a JSON array.
    pub profile_file: Option<PathBuf>,
    /// Kept for visibility: this toolkit only does deterministic runs.
    pub deterministic: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            src_lang: "hi".to_string(),
            tgt_lang: "en".to_string(),
            corpus: None,
            dev: None,
            test: None,
            model_dir: PathBuf::from("model"),
            lm_order: default_lm_order(),
            em_iterations: default_em_iterations(),
            max_phrase_len: default_max_phrase_len(),
            stack_size: default_stack_size(),
            distortion_limit: default_distortion_limit(),
            ribes_alpha: default_ribes_alpha(),
            ribes_beta: default_ribes_beta(),
            tune_metric: default_tune_metric(),
            tune_passes: default_tune_passes(),
            max_len: default_max_len(),
            max_ratio: default_max_ratio(),
            profile_file: None,
            deterministic: default_true(),
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<PipelineConfig> {
        let text = fs::read_to_string(path)?;
        let config: PipelineConfig =
            serde_json::from_str(&text).map_err(|source| SmtError::JsonFile {
                path: path.to_path_buf(),
                source,
            })?;
        Ok(config)
    }

    /// Checks value ranges. Path existence is checked by each command for
    /// the files it actually needs.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(SmtError::Config(msg));
        if self.src_lang.is_empty() || self.tgt_lang.is_empty() {
            return bad("src_lang and tgt_lang must be set".to_string());
        }
        if self.lm_order == 0 {
            return bad("lm_order must be at least 1".to_string());
        }
        if self.em_iterations == 0 {
            return bad("em_iterations must be at least 1".to_string());
        }
        if self.max_phrase_len == 0 {
            return bad("max_phrase_len must be at least 1".to_string());
        }
        if self.stack_size == 0 {
            return bad("stack_size must be at least 1".to_string());
        }
        if self.tune_passes == 0 {
            return bad("tune_passes must be at least 1".to_string());
        }
        if self.max_len == 0 {
            return bad("max_len must be at least 1".to_string());
        }
        if self.max_ratio < 1.0 {
            return bad(format!("max_ratio {} must be at least 1", self.max_ratio));
        }
        for (name, v) in [("ribes_alpha", self.ribes_alpha), ("ribes_beta", self.ribes_beta)] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} {v} must lie in [0, 1]"));
            }
        }
        if !self.deterministic {
            return bad("only deterministic runs are supported".to_string());
        }
        Ok(())
    }

    /// Loads extra profiles (if any) and resolves the two language tags.
    pub fn resolve_profiles(&self) -> Result<(LanguageProfile, LanguageProfile)> {
        let extra = match &self.profile_file {
            Some(path) => {
                require_file(path)?;
                crate::corpus::load_profile_file(path)?
            }
            None => Vec::new(),
        };
        let src = lookup_profile(&self.src_lang, &extra)?;
        let tgt = lookup_profile(&self.tgt_lang, &extra)?;
        Ok((src, tgt))
    }

    pub fn decoder_config(&self) -> DecoderConfig {
        DecoderConfig {
            stack_size: self.stack_size,
            distortion_limit: self.distortion_limit,
            max_phrase_len: self.max_phrase_len,
        }
    }

    pub fn ribes_config(&self) -> RibesConfig {
        RibesConfig {
            alpha: self.ribes_alpha,
            beta: self.ribes_beta,
        }
    }

    fn corpus_prefix(&self) -> Result<&Path> {
        self.corpus
            .as_deref()
            .ok_or_else(|| SmtError::Config("no training corpus configured".to_string()))
    }

    pub fn model_path(&self, name: &str) -> PathBuf {
        self.model_dir.join(name)
    }
}

/// `<prefix>.<lang>`, the naming scheme for parallel corpus sides.
pub fn side_path(prefix: &Path, lang: &str) -> PathBuf {
    let mut name = prefix.file_name().unwrap_or_default().to_os_string();
    name.push(".");
    name.push(lang);
    prefix.with_file_name(name)
}

fn require_file(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(SmtError::Config(format!(
            "required file {} does not exist",
            path.display()
        )))
    }
}

fn load_side_pair(
    prefix: &Path,
    src_profile: &LanguageProfile,
    tgt_profile: &LanguageProfile,
) -> Result<ParallelCorpus> {
    let src = side_path(prefix, &src_profile.code);
    let tgt = side_path(prefix, &tgt_profile.code);
    require_file(&src)?;
    require_file(&tgt)?;
    load_parallel(&src, &tgt, src_profile.clone(), tgt_profile.clone())
}

fn clean_corpus(corpus: &ParallelCorpus) -> ParallelCorpus {
    let src_cfg = CleanConfig::for_profile(&corpus.src_profile);
    let tgt_cfg = CleanConfig::for_profile(&corpus.tgt_profile);
    let mut cleaned = corpus.clone();
    for pair in &mut cleaned.pairs {
        pair.source = clean_line(&pair.source, &src_cfg);
        pair.target = clean_line(&pair.target, &tgt_cfg);
    }
    cleaned
}

fn tokenize_pairs(corpus: &ParallelCorpus) -> Vec<(Vec<String>, Vec<String>)> {
    corpus
        .pairs
        .iter()
        .map(|p| {
            (
                tokenize(&p.source, &corpus.src_profile),
                tokenize(&p.target, &corpus.tgt_profile),
            )
        })
        .collect()
}

/// Record of one pipeline stage: a logical sequence number (not a
/// timestamp, so reruns are byte-identical), the parameters that shaped
/// it, and digests of the artifacts it wrote.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct StageRecord {
    pub sequence: usize,
    pub name: String,
    pub parameters: BTreeMap<String, String>,
    pub artifacts: Vec<ArtifactRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ArtifactRecord {
    pub name: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunManifest {
    pub stages: Vec<StageRecord>,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<RunManifest> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|source| SmtError::JsonFile {
            path: path.to_path_buf(),
            source,
        })
    }
}

fn sha256_hex(path: &Path) -> Result<String> {
    let bytes = fs::read(path)?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect())
}

/// Collects digest records for artifacts in the model directory.
fn artifact_records(model_dir: &Path, names: &[&str]) -> Result<Vec<ArtifactRecord>> {
    names
        .iter()
        .map(|name| {
            Ok(ArtifactRecord {
                name: name.to_string(),
                sha256: sha256_hex(&model_dir.join(name))?,
            })
        })
        .collect()
}

fn params(pairs: &[(&str, String)]) -> BTreeMap<String, String> {
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), v.clone()))
        .collect()
}

fn write_token_lines(path: &Path, sentences: &[Vec<String>]) -> Result<()> {
    let mut out = String::new();
    for tokens in sentences {
        out.push_str(&tokens.join(" "));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

fn write_alignment_lines(path: &Path, alignments: &[Alignment]) -> Result<()> {
    let mut out = String::new();
    for a in alignments {
        out.push_str(&a.to_pharaoh());
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Trains the full model: cleans and filters the corpus, tokenizes,
/// truecases, fits the language model, runs EM alignment in both
/// directions, symmetrizes, extracts the phrase table, and writes default
/// weights plus the run manifest into the model directory.
pub fn run_train(config: &PipelineConfig) -> Result<RunManifest> {
    config.validate()?;
    let (src_profile, tgt_profile) = config.resolve_profiles()?;
    let prefix = config.corpus_prefix()?;
    let raw = load_side_pair(prefix, &src_profile, &tgt_profile)?;
    fs::create_dir_all(&config.model_dir)?;
    let model_path = |name: &str| config.model_path(name);

    // Stage 1: clean, filter, tokenize.
    let cleaned = clean_corpus(&raw);
    let filtered = filter_pairs(&cleaned, config.max_len, config.max_ratio);
    if filtered.pairs.is_empty() {
        return Err(SmtError::EmptyCorpus(
            "no sentence pairs survive cleaning and filtering".to_string(),
        ));
    }
    let tokenized = tokenize_pairs(&filtered);
    let tok_src_name = format!("{}.{}", artifact::TOKENIZED_PREFIX, src_profile.code);
    let tok_tgt_name = format!("{}.{}", artifact::TOKENIZED_PREFIX, tgt_profile.code);
    let src_tokens: Vec<Vec<String>> = tokenized.iter().map(|(s, _)| s.clone()).collect();
    let tgt_tokens: Vec<Vec<String>> = tokenized.iter().map(|(_, t)| t.clone()).collect();
    write_token_lines(&model_path(&tok_src_name), &src_tokens)?;
    write_token_lines(&model_path(&tok_tgt_name), &tgt_tokens)?;

    let mut stages = Vec::new();
    stages.push(StageRecord {
        sequence: 1,
        name: "prepare".to_string(),
        parameters: params(&[
            ("src_lang", config.src_lang.clone()),
            ("tgt_lang", config.tgt_lang.clone()),
            ("pairs_in", raw.pairs.len().to_string()),
            ("pairs_kept", filtered.pairs.len().to_string()),
            ("max_len", config.max_len.to_string()),
            ("max_ratio", config.max_ratio.to_string()),
        ]),
        artifacts: artifact_records(&config.model_dir, &[&tok_src_name, &tok_tgt_name])?,
    });

    // Stage 2: truecasing models, applied to both sides.
    let src_truecase = train_truecaser(&src_tokens);
    let tgt_truecase = train_truecaser(&tgt_tokens);
    let tc_src_name = format!("{}.{}", artifact::TRUECASE_PREFIX, src_profile.code);
    let tc_tgt_name = format!("{}.{}", artifact::TRUECASE_PREFIX, tgt_profile.code);
    write_truecase_model(&src_truecase, &model_path(&tc_src_name))?;
    write_truecase_model(&tgt_truecase, &model_path(&tc_tgt_name))?;
    let src_true: Vec<Vec<String>> =
        src_tokens.iter().map(|s| truecase(s, &src_truecase)).collect();
    let tgt_true: Vec<Vec<String>> =
        tgt_tokens.iter().map(|t| truecase(t, &tgt_truecase)).collect();
    let true_src_name = format!("{}.{}", artifact::TRUECASED_PREFIX, src_profile.code);
    let true_tgt_name = format!("{}.{}", artifact::TRUECASED_PREFIX, tgt_profile.code);
    write_token_lines(&model_path(&true_src_name), &src_true)?;
    write_token_lines(&model_path(&true_tgt_name), &tgt_true)?;
    stages.push(StageRecord {
        sequence: 2,
        name: "truecase".to_string(),
        parameters: params(&[
            ("src_forms", src_truecase.len().to_string()),
            ("tgt_forms", tgt_truecase.len().to_string()),
        ]),
        artifacts: artifact_records(
            &config.model_dir,
            &[&tc_src_name, &tc_tgt_name, &true_src_name, &true_tgt_name],
        )?,
    });

    // Stage 3: target-side language model.
    let lm = train_lm(&tgt_true, config.lm_order, Smoothing::WittenBell)?;
    lm.write_arpa(&model_path(artifact::LM))?;
    stages.push(StageRecord {
        sequence: 3,
        name: "language-model".to_string(),
        parameters: params(&[
            ("order", config.lm_order.to_string()),
            ("smoothing", "witten-bell".to_string()),
        ]),
        artifacts: artifact_records(&config.model_dir, &[artifact::LM])?,
    });

    // Stage 4: EM alignment in both directions, then symmetrization.
    let fwd_pairs: Vec<(Vec<String>, Vec<String>)> = src_true
        .iter()
        .cloned()
        .zip(tgt_true.iter().cloned())
        .collect();
    let rev_pairs: Vec<(Vec<String>, Vec<String>)> = tgt_true
        .iter()
        .cloned()
        .zip(src_true.iter().cloned())
        .collect();
    let ibm1_fwd = train_ibm1(&fwd_pairs, config.em_iterations)?;
    let ibm2_fwd = train_ibm2(&fwd_pairs, config.em_iterations, &ibm1_fwd.lexical)?;
    let ibm1_rev = train_ibm1(&rev_pairs, config.em_iterations)?;
    let ibm2_rev = train_ibm2(&rev_pairs, config.em_iterations, &ibm1_rev.lexical)?;
    ibm2_fwd.lexical.write(&model_path(artifact::LEX_FWD))?;
    ibm2_rev.lexical.write(&model_path(artifact::LEX_REV))?;
    write_em_log(&model_path(artifact::EM_LOG), &ibm1_fwd.log_likelihood, &ibm2_fwd.log_likelihood, &ibm1_rev.log_likelihood, &ibm2_rev.log_likelihood)?;

    let viterbi = |model: &Ibm2Model, pairs: &[(Vec<String>, Vec<String>)]| -> Vec<Alignment> {
        pairs
            .iter()
            .map(|(s, t)| viterbi_align(&model.lexical, Some(&model.distortion), s, t))
            .collect()
    };
    let fwd_alignments = viterbi(&ibm2_fwd, &fwd_pairs);
    let rev_alignments = viterbi(&ibm2_rev, &rev_pairs);
    let sym_alignments: Vec<Alignment> = fwd_alignments
        .iter()
        .zip(&rev_alignments)
        .map(|(f, r)| symmetrize(f, r, Symmetrization::GrowDiagFinalAnd))
        .collect::<Result<_>>()?;
    write_alignment_lines(&model_path(artifact::ALIGN_FWD), &fwd_alignments)?;
    // The reverse file is transposed so all alignment files read as
    // source-target links.
    let rev_transposed: Vec<Alignment> =
        rev_alignments.iter().map(Alignment::transpose).collect();
    write_alignment_lines(&model_path(artifact::ALIGN_REV), &rev_transposed)?;
    write_alignment_lines(&model_path(artifact::ALIGN_SYM), &sym_alignments)?;
    stages.push(StageRecord {
        sequence: 4,
        name: "align".to_string(),
        parameters: params(&[
            ("em_iterations", config.em_iterations.to_string()),
            ("symmetrization", "grow-diag-final-and".to_string()),
        ]),
        artifacts: artifact_records(
            &config.model_dir,
            &[
                artifact::LEX_FWD,
                artifact::LEX_REV,
                artifact::EM_LOG,
                artifact::ALIGN_FWD,
                artifact::ALIGN_REV,
                artifact::ALIGN_SYM,
            ],
        )?,
    });

    // Stage 5: phrase table.
    let table = build_phrase_table(
        &fwd_pairs,
        &sym_alignments,
        &ibm2_fwd.lexical,
        &ibm2_rev.lexical,
        config.max_phrase_len,
    )?;
    table.write(&model_path(artifact::PHRASE_TABLE))?;
    stages.push(StageRecord {
        sequence: 5,
        name: "phrases".to_string(),
        parameters: params(&[
            ("max_phrase_len", config.max_phrase_len.to_string()),
            ("entries", table.len().to_string()),
        ]),
        artifacts: artifact_records(&config.model_dir, &[artifact::PHRASE_TABLE])?,
    });

    // Stage 6: default decoder weights.
    write_weights(&FeatureWeights::default(), &model_path(artifact::WEIGHTS))?;
    stages.push(StageRecord {
        sequence: 6,
        name: "weights".to_string(),
        parameters: params(&[("source", "default".to_string())]),
        artifacts: artifact_records(&config.model_dir, &[artifact::WEIGHTS])?,
    });

    let manifest = RunManifest { stages };
    let manifest_text = serde_json::to_string_pretty(&manifest)
        .expect("manifest serializes") + "\n";
    fs::write(model_path(artifact::MANIFEST), manifest_text)?;
    Ok(manifest)
}

fn write_em_log(
    path: &Path,
    ibm1_fwd: &[f64],
    ibm2_fwd: &[f64],
    ibm1_rev: &[f64],
    ibm2_rev: &[f64],
) -> Result<()> {
    let mut out = String::new();
    for (name, trace) in [
        ("ibm1.fwd", ibm1_fwd),
        ("ibm2.fwd", ibm2_fwd),
        ("ibm1.rev", ibm1_rev),
        ("ibm2.rev", ibm2_rev),
    ] {
        for (i, ll) in trace.iter().enumerate() {
            out.push_str(&format!("{name} iteration {} log-likelihood {ll}\n", i + 1));
        }
    }
    fs::write(path, out)?;
    Ok(())
}

/// Everything translate needs from a trained model directory.
#[derive(Debug)]
pub struct TranslationModel {
    pub table: PhraseTable,
    pub lm: ArpaModel,
    pub src_truecase: TruecaseModel,
    pub weights: FeatureWeights,
}

/// Loads the model artifacts, failing with the first missing file.
pub fn load_model(config: &PipelineConfig) -> Result<TranslationModel> {
    let (src_profile, _) = config.resolve_profiles()?;
    let need = |name: &str| -> Result<PathBuf> {
        let path = config.model_path(name);
        if path.is_file() {
            Ok(path)
        } else {
            Err(SmtError::IncompleteModel(path))
        }
    };
    let table = PhraseTable::read(&need(artifact::PHRASE_TABLE)?)?;
    let lm = read_arpa(&need(artifact::LM)?)?;
    let src_truecase = read_truecase_model(&need(&format!(
        "{}.{}",
        artifact::TRUECASE_PREFIX,
        src_profile.code
    ))?)?;
    let weights = read_weights(&need(artifact::WEIGHTS)?)?;
    Ok(TranslationModel {
        table,
        lm,
        src_truecase,
        weights,
    })
}

/// Cleans, tokenizes, and truecases one source-language line.
fn prepare_source_line(
    line: &str,
    profile: &LanguageProfile,
    clean_cfg: &CleanConfig,
    truecaser: &TruecaseModel,
) -> Vec<String> {
    let cleaned = clean_line(line, clean_cfg);
    let tokens = tokenize(&cleaned, profile);
    truecase(&tokens, truecaser)
}

/// Translates the lines of `input`. Returns the output lines; empty or
/// fully-cleaned-away input lines come back empty.
pub fn run_translate(config: &PipelineConfig, input: &Path) -> Result<Vec<String>> {
    config.validate()?;
    require_file(input)?;
    let (src_profile, tgt_profile) = config.resolve_profiles()?;
    let model = load_model(config)?;
    let clean_cfg = CleanConfig::for_profile(&src_profile);
    let decoder_cfg = config.decoder_config();

    let mut out = Vec::new();
    for line in read_lines(input)? {
        let tokens = prepare_source_line(&line, &src_profile, &clean_cfg, &model.src_truecase);
        if tokens.is_empty() {
            out.push(String::new());
            continue;
        }
        let (translated, _) = decode(
            &tokens,
            &model.table,
            &model.lm,
            &model.weights,
            &decoder_cfg,
        );
        let stripped = strip_redundant_punct(&translated);
        out.push(crate::preprocess::detokenize(&stripped, &tgt_profile));
    }
    Ok(out)
}

/// Tunes the decoder weights on the configured dev corpus, then rewrites
/// the weights file and drops a tuning report next to it.
pub fn run_tune(config: &PipelineConfig) -> Result<TuneReport> {
    config.validate()?;
    let (src_profile, tgt_profile) = config.resolve_profiles()?;
    let dev_prefix = config
        .dev
        .as_deref()
        .ok_or_else(|| SmtError::Config("no dev corpus configured".to_string()))?;
    let model = load_model(config)?;
    let tgt_truecase = read_truecase_model(&config.model_path(&format!(
        "{}.{}",
        artifact::TRUECASE_PREFIX,
        tgt_profile.code
    )))?;

    let raw = load_side_pair(dev_prefix, &src_profile, &tgt_profile)?;
    let cleaned = clean_corpus(&raw);
    let dev: Vec<(Vec<String>, Vec<String>)> = tokenize_pairs(&cleaned)
        .into_iter()
        .map(|(s, t)| (truecase(&s, &model.src_truecase), truecase(&t, &tgt_truecase)))
        .filter(|(s, t)| !s.is_empty() && !t.is_empty())
        .collect();
    if dev.is_empty() {
        return Err(SmtError::EmptyCorpus(
            "dev corpus has no usable sentence pairs".to_string(),
        ));
    }

    let report = tune_weights(
        &dev,
        &model.table,
        &model.lm,
        model.weights,
        config.tune_metric,
        config.tune_passes,
        &config.decoder_config(),
        &config.ribes_config(),
    )?;
    write_weights(&report.accepted, &config.model_path(artifact::WEIGHTS))?;
    fs::write(config.model_path(artifact::TUNE_REPORT), report.render())?;
    Ok(report)
}

/// Corpus scores of a hypothesis file against a reference file.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub bleu: f64,
    pub ribes: f64,
    pub meteor: f64,
    pub sentences: usize,
    pub text: String,
}

/// Scores hypotheses against references: corpus BLEU (reported x100),
/// mean sentence RIBES, and mean sentence METEOR. Both files are cleaned
/// and tokenized with the target-language profile first. With `with_stats`
/// the report gains sentence-length ogive rows.
pub fn run_evaluate(
    config: &PipelineConfig,
    hyp_path: &Path,
    ref_path: &Path,
    with_stats: bool,
) -> Result<EvaluationReport> {
    config.validate()?;
    require_file(hyp_path)?;
    require_file(ref_path)?;
    let (_, tgt_profile) = config.resolve_profiles()?;
    let clean_cfg = CleanConfig::for_profile(&tgt_profile);

    let hyp_lines = read_lines(hyp_path)?;
    let ref_lines = read_lines(ref_path)?;
    if hyp_lines.len() != ref_lines.len() {
        return Err(SmtError::LineCountMismatch {
            src_path: hyp_path.to_path_buf(),
            src_lines: hyp_lines.len(),
            tgt_path: ref_path.to_path_buf(),
            tgt_lines: ref_lines.len(),
        });
    }
    let prep = |lines: &[String]| -> Vec<Vec<String>> {
        lines
            .iter()
            .map(|l| tokenize(&clean_line(l, &clean_cfg), &tgt_profile))
            .collect()
    };
    let hyps = prep(&hyp_lines);
    let refs = prep(&ref_lines);

    let bleu = bleu_corpus(&hyps, &refs, 4)?;
    let ribes_cfg = config.ribes_config();
    let ribes = metric_corpus(SentenceMetric::Ribes, &hyps, &refs, &ribes_cfg)?;
    let meteor = metric_corpus(SentenceMetric::Meteor, &hyps, &refs, &ribes_cfg)?;

    let pair = format!("{}-{}", config.src_lang, config.tgt_lang);
    let direction = format!("{}->{}", config.src_lang, config.tgt_lang);
    let bleu_pct = 100.0 * bleu.score;
    let mut text = String::new();
    text.push_str("pair direction BLEU RIBES METEOR\n");
    text.push_str(&format!(
        "{pair} {direction} {bleu_pct:.2} {:.2} {:.2}\n",
        ribes, meteor
    ));
    text.push_str(&format!(
        "{pair},{direction},{bleu_pct:.2},{ribes:.4},{meteor:.4}\n"
    ));
    if with_stats {
        let corpus = ParallelCorpus {
            pairs: hyps
                .iter()
                .zip(&refs)
                .enumerate()
                .map(|(i, (h, r))| crate::corpus::SentencePair {
                    source: h.join(" "),
                    target: r.join(" "),
                    line_no: i + 1,
                })
                .collect(),
            src_profile: tgt_profile.clone(),
            tgt_profile: tgt_profile.clone(),
        };
        for (label, side) in [("hyp", Side::Source), ("ref", Side::Target)] {
            let cells: Vec<String> = OGIVE_THRESHOLDS
                .iter()
                .map(|&t| {
                    let f = length_ogive(&corpus, t, side).expect("non-empty corpus");
                    format!("<{t}={f:.4}")
                })
                .collect();
            text.push_str(&format!("{label} ogive: {}\n", cells.join(" ")));
        }
    }
    Ok(EvaluationReport {
        bleu: bleu.score,
        ribes,
        meteor,
        sentences: hyps.len(),
        text,
    })
}

/// Cleans and filters the configured corpus and writes the two sides
/// under a new prefix. Returns (pairs in, pairs kept).
pub fn run_clean(config: &PipelineConfig, output_prefix: &Path) -> Result<(usize, usize)> {
    config.validate()?;
    let (src_profile, tgt_profile) = config.resolve_profiles()?;
    let raw = load_side_pair(config.corpus_prefix()?, &src_profile, &tgt_profile)?;
    let cleaned = clean_corpus(&raw);
    let kept = filter_pairs(&cleaned, config.max_len, config.max_ratio);
    if let Some(parent) = output_prefix.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    write_parallel(
        &kept,
        &side_path(output_prefix, &src_profile.code),
        &side_path(output_prefix, &tgt_profile.code),
    )?;
    Ok((raw.pairs.len(), kept.pairs.len()))
}

/// Token-count statistics of the configured corpus: pair count, per-side
/// mean and maximum lengths, and the sentence-length ogive.
pub fn run_stats(config: &PipelineConfig) -> Result<String> {
    config.validate()?;
    let (src_profile, tgt_profile) = config.resolve_profiles()?;
    let corpus = load_side_pair(config.corpus_prefix()?, &src_profile, &tgt_profile)?;
    if corpus.pairs.is_empty() {
        return Err(SmtError::EmptyCorpus(
            "stats need at least one sentence pair".to_string(),
        ));
    }
    let s = stats(&corpus);
    let mut text = format!("pairs: {}\n", s.pair_count);
    for (label, side, hist) in [
        ("source", Side::Source, &s.source_lengths),
        ("target", Side::Target, &s.target_lengths),
    ] {
        let total: usize = hist.iter().map(|(len, n)| len * n).sum();
        let max = hist.keys().next_back().copied().unwrap_or(0);
        let mean = total as f64 / s.pair_count as f64;
        text.push_str(&format!(
            "{label}: tokens={total} mean={mean:.2} max={max}\n"
        ));
        let cells: Vec<String> = OGIVE_THRESHOLDS
            .iter()
            .map(|&t| {
                let f = length_ogive(&corpus, t, side).expect("non-empty corpus");
                format!("<{t}={f:.4}")
            })
            .collect();
        text.push_str(&format!("{label} ogive: {}\n", cells.join(" ")));
    }
    Ok(text)
}

/// The effective configuration as pretty JSON.
pub fn render_config(config: &PipelineConfig) -> String {
    serde_json::to_string_pretty(config).expect("config serializes") + "\n"
}
