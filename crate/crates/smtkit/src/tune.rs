//! Greedy coordinate search over the decoder weights against a dev set.
//!
//! Each pass sweeps the seven weights in a fixed order. For each weight a
//! small grid of scaled and sign-flipped candidates is decoded and scored;
//! a candidate is accepted only when it strictly improves the dev metric,
//! so the accepted score trajectory never decreases.

use crate::decode::{decode, DecoderConfig, FeatureWeights};
use crate::error::{Result, SmtError};
use crate::eval::{
    bleu_sentence, meteor_sentence, ribes_sentence, RibesConfig,
};
use crate::lm::LanguageModel;
use crate::phrase::PhraseTable;

use serde::{Deserialize, Serialize};

/// Dev-set objective to maximize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TuneMetric {
    Bleu,
    Ribes,
    Meteor,
}

/// Scale factors tried for every weight; each is also tried sign-flipped
/// except for the reordering weight, which stays non-negative.
const MULTIPLIERS: [f64; 4] = [0.25, 0.5, 2.0, 4.0];

/// One candidate evaluation during the sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct TuneEvaluation {
    pub pass: usize,
    pub weight: &'static str,
    pub multiplier: f64,
    pub candidate: f64,
    pub score: f64,
    pub accepted: bool,
}

/// Everything the tuner did: the accepted trajectory (starting from the
/// initial weights), every candidate evaluation, and the final weights.
#[derive(Debug, Clone, PartialEq)]
pub struct TuneReport {
    pub iterations: Vec<(FeatureWeights, f64)>,
    pub evaluations: Vec<TuneEvaluation>,
    pub accepted: FeatureWeights,
}

impl TuneReport {
    pub fn final_score(&self) -> f64 {
        self.iterations.last().expect("non-empty trajectory").1
    }

    /// Text report: `initial` line, one line per evaluation with pass,
    /// weight name, multiplier, candidate value, and score, then a final
    /// `accepted` line with the seven weights.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let (initial, s0) = &self.iterations[0];
        out.push_str(&format!("initial {} {}\n", weights_line(initial), s0));
        for e in &self.evaluations {
            out.push_str(&format!(
                "{} {} {} {} {}{}\n",
                e.pass,
                e.weight,
                e.multiplier,
                e.candidate,
                e.score,
                if e.accepted { " *" } else { "" },
            ));
        }
        out.push_str(&format!(
            "accepted {} {}\n",
            weights_line(&self.accepted),
            self.final_score()
        ));
        out
    }
}

fn weights_line(w: &FeatureWeights) -> String {
    (0..7)
        .map(|i| format!("{}={}", FeatureWeights::NAMES[i], w.get(i)))
        .collect::<Vec<_>>()
        .join(" ")
}

fn dev_score(
    dev: &[(Vec<String>, Vec<String>)],
    table: &PhraseTable,
    lm: &dyn LanguageModel,
    weights: &FeatureWeights,
    metric: TuneMetric,
    decoder: &DecoderConfig,
    ribes: &RibesConfig,
) -> f64 {
    let mut total = 0.0;
    for (src, reference) in dev {
        let (hyp, _) = decode(src, table, lm, weights, decoder);
        total += match metric {
            TuneMetric::Bleu => bleu_sentence(&hyp, reference, 4),
            TuneMetric::Ribes => ribes_sentence(&hyp, reference, ribes).score,
            TuneMetric::Meteor => meteor_sentence(&hyp, reference).score,
        };
    }
    total / dev.len() as f64
}

/// Runs the coordinate search for `passes` passes over a dev set of
/// (source tokens, reference tokens) pairs and returns the trajectory.
#[allow(clippy::too_many_arguments)]
pub fn tune_weights(
    dev: &[(Vec<String>, Vec<String>)],
    table: &PhraseTable,
    lm: &dyn LanguageModel,
    initial: FeatureWeights,
    metric: TuneMetric,
    passes: usize,
    decoder: &DecoderConfig,
    ribes: &RibesConfig,
) -> Result<TuneReport> {
    if passes == 0 {
        return Err(SmtError::InvalidParameter(
            "tuning needs at least one pass".to_string(),
        ));
    }
    if dev.is_empty() {
        return Err(SmtError::EmptyCorpus(
            "tuning needs at least one dev pair".to_string(),
        ));
    }

    let mut weights = initial;
    let mut current =
        dev_score(dev, table, lm, &weights, metric, decoder, ribes);
    let mut iterations = vec![(weights, current)];
    let mut evaluations = Vec::new();

    for pass in 1..=passes {
        for idx in 0..7 {
            let base = weights.get(idx);
            let mut best: Option<(f64, f64)> = None; // (score, candidate)
            for flip in [1.0, -1.0] {
                for multiplier in MULTIPLIERS {
                    let candidate = flip * multiplier * base;
                    if candidate == base {
                        continue;
                    }
                    if idx == FeatureWeights::REORDER_INDEX && candidate < 0.0 {
                        continue;
                    }
                    let mut trial = weights;
                    trial.set(idx, candidate);
                    let score =
                        dev_score(dev, table, lm, &trial, metric, decoder, ribes);
                    evaluations.push(TuneEvaluation {
                        pass,
                        weight: FeatureWeights::NAMES[idx],
                        multiplier: flip * multiplier,
                        candidate,
                        score,
                        accepted: false,
                    });
                    let better = match best {
                        None => true,
                        Some((s, _)) => score > s,
                    };
                    if better {
                        best = Some((score, candidate));
                    }
                }
            }
            if let Some((score, candidate)) = best {
                if score > current {
                    weights.set(idx, candidate);
                    current = score;
                    iterations.push((weights, current));
                    // Mark the evaluation that was taken.
                    if let Some(e) = evaluations
                        .iter_mut()
                        .rev()
                        .find(|e| e.candidate == candidate && e.weight == FeatureWeights::NAMES[idx])
                    {
                        e.accepted = true;
                    }
                }
            }
        }
    }

    Ok(TuneReport {
        iterations,
        evaluations,
        accepted: weights,
    })
}
