//! Acceptance gate: every release-blocking behavior checked end to end,
//! one test per criterion. Each test prints a PASS line; a failed
//! assertion marks the criterion failed.

mod common;

use std::time::{Duration, Instant};

use common::*;
use smtkit::align::{
    symmetrize, train_ibm1, train_ibm2, Alignment, Symmetrization,
};
use smtkit::corpus::{length_ogive, lookup_profile, ParallelCorpus, SentencePair, Side};
use smtkit::decode::{decode, DecoderConfig, FeatureWeights};
use smtkit::eval::{bleu_corpus, meteor_sentence, ribes_sentence, RibesConfig};
use smtkit::lm::{train_lm, Smoothing};
use smtkit::phrase::{extract_phrases, PhraseTable};
use smtkit::pipeline::{
    load_model, run_evaluate, run_train, run_translate, run_tune, side_path, PipelineConfig,
};
use smtkit::preprocess::tokenize;
use smtkit::tune::{tune_weights, TuneMetric};

const VOCAB: [&str; 10] = [
    "the", "cat", "sat", "on", "mat", "a", "dog", "ran", "big", "red",
];

fn random_sentence(rng: &mut Lcg, max_len: usize) -> Vec<String> {
    let len = 1 + rng.below(max_len);
    (0..len).map(|_| VOCAB[rng.below(VOCAB.len())].to_string()).collect()
}

fn random_alignment(rng: &mut Lcg, src_len: usize, tgt_len: usize, density: f64) -> Alignment {
    let mut links = Vec::new();
    for i in 0..src_len {
        for j in 0..tgt_len {
            if rng.unit() < density {
                links.push((i, j));
            }
        }
    }
    Alignment::from_links(src_len, tgt_len, links).unwrap()
}

#[test]
fn criterion_01_metric_oracles() {
    let started = Instant::now();
    let mut rng = Lcg::new(11);
    let mut hyps = Vec::new();
    let mut refs = Vec::new();
    for _ in 0..50 {
        hyps.push(random_sentence(&mut rng, 12));
        refs.push(random_sentence(&mut rng, 12));
    }

    let got = bleu_corpus(&hyps, &refs, 4).unwrap().score;
    let want = bleu_oracle(&hyps, &refs, 4);
    assert!((got - want).abs() < 1e-9, "corpus BLEU {got} vs oracle {want}");
    for chunk in hyps.chunks(10).zip(refs.chunks(10)) {
        let got = bleu_corpus(chunk.0, chunk.1, 4).unwrap().score;
        let want = bleu_oracle(chunk.0, chunk.1, 4);
        assert!((got - want).abs() < 1e-9);
    }

    let config = RibesConfig::default();
    for (h, r) in hyps.iter().zip(&refs) {
        let got = ribes_sentence(h, r, &config).score;
        let want = ribes_oracle(h, r, config.alpha, config.beta);
        assert!(
            (got - want).abs() < 1e-9,
            "RIBES {got} vs oracle {want} on {h:?} / {r:?}"
        );
        let got = meteor_sentence(h, r).score;
        let want = meteor_oracle(h, r);
        assert!(
            (got - want).abs() < 1e-9,
            "METEOR {got} vs oracle {want} on {h:?} / {r:?}"
        );
    }
    assert!(started.elapsed() < Duration::from_secs(5), "oracle check too slow");
    println!("criterion 1 metric oracles: PASS");
}

#[test]
fn criterion_02_metric_fixed_points() {
    let sentence = words("the big cat sat on the red mat");
    let hyps = vec![sentence.clone()];
    let refs = vec![sentence.clone()];
    assert_eq!(bleu_corpus(&hyps, &refs, 4).unwrap().score, 1.0);
    let config = RibesConfig::default();
    assert_eq!(ribes_sentence(&sentence, &sentence, &config).score, 1.0);
    assert_eq!(meteor_sentence(&sentence, &sentence).score, 1.0);

    let p1 = bleu_corpus(&[words("the the the the")], &[words("the cat")], 1)
        .unwrap()
        .score;
    assert!((p1 - 0.25).abs() < 5e-5, "clipped precision {p1}");

    let ribes = ribes_sentence(&words("a c"), &words("a b c"), &config).score;
    assert!((ribes - 0.9512).abs() < 5e-5, "RIBES {ribes}");

    let meteor = meteor_sentence(&words("the cat"), &words("the cat sat")).score;
    assert!((meteor - 0.6897).abs() < 5e-5, "METEOR {meteor}");
    println!("criterion 2 metric fixed points: PASS");
}

#[test]
fn criterion_03_em_log_likelihood_and_row_sums() {
    let mut rng = Lcg::new(23);
    let pairs: Vec<(Vec<String>, Vec<String>)> = toy_corpus(50, &mut rng)
        .iter()
        .map(|(s, t)| (words(s), words(t)))
        .collect();

    let m1 = train_ibm1(&pairs, 10).unwrap();
    assert_eq!(m1.log_likelihood.len(), 10);
    for w in m1.log_likelihood.windows(2) {
        assert!(w[1] >= w[0] - 1e-9, "model 1 log-likelihood dipped: {w:?}");
    }
    for (src, row) in m1.lexical.rows() {
        let sum: f64 = row.values().sum();
        assert!((sum - 1.0).abs() < 1e-9, "model 1 row {src} sums to {sum}");
    }

    let m2 = train_ibm2(&pairs, 10, &m1.lexical).unwrap();
    assert_eq!(m2.log_likelihood.len(), 10);
    for w in m2.log_likelihood.windows(2) {
        assert!(w[1] >= w[0] - 1e-9, "model 2 log-likelihood dipped: {w:?}");
    }
    for (src, row) in m2.lexical.rows() {
        let sum: f64 = row.values().sum();
        assert!((sum - 1.0).abs() < 1e-9, "model 2 row {src} sums to {sum}");
    }
    for (key, row) in m2.distortion.rows() {
        let sum: f64 = row.iter().sum();
        assert!((sum - 1.0).abs() < 1e-9, "distortion row {key:?} sums to {sum}");
    }
    println!("criterion 3 EM log-likelihood and row sums: PASS");
}

#[test]
fn criterion_04_symmetrization_bounds() {
    let mut rng = Lcg::new(37);
    for _ in 0..200 {
        let l = 1 + rng.below(8);
        let m = 1 + rng.below(8);
        let fwd = random_alignment(&mut rng, l, m, 0.3);
        let rev = random_alignment(&mut rng, m, l, 0.3);

        let inter = symmetrize(&fwd, &rev, Symmetrization::Intersection).unwrap();
        let union = symmetrize(&fwd, &rev, Symmetrization::Union).unwrap();
        let gdfa = symmetrize(&fwd, &rev, Symmetrization::GrowDiagFinalAnd).unwrap();
        assert!(inter.is_subset(&gdfa), "intersection escapes grow-diag-final-and");
        assert!(gdfa.is_subset(&union), "grow-diag-final-and escapes union");

        let agreeing = fwd.transpose();
        for heuristic in [
            Symmetrization::Intersection,
            Symmetrization::Union,
            Symmetrization::GrowDiagFinal,
            Symmetrization::GrowDiagFinalAnd,
        ] {
            assert_eq!(
                symmetrize(&fwd, &agreeing, heuristic).unwrap(),
                fwd,
                "agreeing directions must reproduce the alignment"
            );
        }
    }

    let fwd = Alignment::from_links(2, 2, [(0, 0), (1, 1)]).unwrap();
    let rev = Alignment::from_links(2, 2, [(0, 0)]).unwrap();
    let gdfa = symmetrize(&fwd, &rev, Symmetrization::GrowDiagFinalAnd).unwrap();
    assert_eq!(gdfa, Alignment::from_links(2, 2, [(0, 0), (1, 1)]).unwrap());
    println!("criterion 4 symmetrization bounds: PASS");
}

#[test]
fn criterion_05_extraction_matches_enumeration() {
    let mut rng = Lcg::new(41);
    for case in 0..100 {
        let src_len = 1 + rng.below(10);
        let tgt_len = 1 + rng.below(10);
        let alignment = random_alignment(&mut rng, src_len, tgt_len, 0.25);
        let links: Vec<(usize, usize)> = alignment.links().collect();
        let max_len = if case % 2 == 0 { 7 } else { 3 };
        let got = extract_phrases(src_len, tgt_len, &alignment, max_len).unwrap();
        let want = extraction_oracle(src_len, tgt_len, &links, max_len);
        assert_eq!(got, want, "case {case}: {src_len}x{tgt_len} links {links:?}");
    }
    println!("criterion 5 extraction matches enumeration: PASS");
}

#[test]
fn criterion_06_decoder_matches_exhaustive_search() {
    let started = Instant::now();
    let src_vocab = ["s0", "s1", "s2", "s3", "s4", "s5", "s6", "s7"];
    let tgt_vocab = ["t0", "t1", "t2", "t3", "t4", "t5"];
    let mut rng = Lcg::new(53);

    let mut entries = Vec::new();
    for _ in 0..50 {
        let src: Vec<String> = (0..1 + rng.below(2))
            .map(|_| src_vocab[rng.below(src_vocab.len())].to_string())
            .collect();
        let tgt: Vec<String> = (0..1 + rng.below(3))
            .map(|_| tgt_vocab[rng.below(tgt_vocab.len())].to_string())
            .collect();
        let mut p = || 0.05 + 0.95 * rng.unit();
        let (a, b, c, d) = (p(), p(), p(), p());
        entries.push((src, tgt, a, b, c, d));
    }
    let table = PhraseTable::from_entries(entries);

    let lm_sentences: Vec<Vec<String>> = (0..20)
        .map(|_| {
            (0..1 + rng.below(6))
                .map(|_| tgt_vocab[rng.below(tgt_vocab.len())].to_string())
                .collect()
        })
        .collect();
    let lm = train_lm(&lm_sentences, 2, Smoothing::WittenBell).unwrap();

    let weights = FeatureWeights::default();
    let config = DecoderConfig {
        stack_size: 1_000_000,
        distortion_limit: None,
        max_phrase_len: 3,
    };
    for case in 0..30 {
        let len = 1 + rng.below(6);
        let sentence: Vec<String> = (0..len)
            .map(|_| {
                if rng.below(10) == 0 {
                    "zzz".to_string()
                } else {
                    src_vocab[rng.below(src_vocab.len())].to_string()
                }
            })
            .collect();
        let (_, derivation) = decode(&sentence, &table, &lm, &weights, &config);
        let best = best_score_oracle(&sentence, &table, &lm, &weights, config.max_phrase_len);
        assert!(
            (derivation.score - best).abs() < 1e-9,
            "case {case}: decoder {} vs oracle {best} on {sentence:?}",
            derivation.score
        );
    }
    assert!(started.elapsed() < Duration::from_secs(60), "search check too slow");
    println!("criterion 6 decoder matches exhaustive search: PASS");
}

#[test]
fn criterion_07_end_to_end_synthetic_language() {
    let started = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let mut rng = Lcg::new(7);
    let train = toy_corpus(500, &mut rng);
    let held_out = toy_random(50, &mut rng);

    // The generator guarantees full lexicon coverage in training.
    let train_src = train.iter().map(|(s, _)| s.as_str()).collect::<Vec<_>>().join(" ");
    for (src_word, _) in SUBJECTS.iter().chain(&VERBS).chain(&ADJECTIVES).chain(&OBJECTS) {
        assert!(train_src.contains(src_word), "{src_word} missing from training");
    }

    write_side_files(&dir.path().join("corpus"), &train, "hi", "en");
    write_side_files(&dir.path().join("test"), &held_out, "hi", "en");
    let config = PipelineConfig {
        corpus: Some(dir.path().join("corpus")),
        test: Some(dir.path().join("test")),
        model_dir: dir.path().join("model"),
        ..PipelineConfig::default()
    };
    run_train(&config).unwrap();

    let test_src = side_path(&dir.path().join("test"), "hi");
    let translations = run_translate(&config, &test_src).unwrap();
    assert_eq!(translations.len(), held_out.len());
    let hyp_path = dir.path().join("hyp.en");
    std::fs::write(&hyp_path, translations.join("\n") + "\n").unwrap();

    let report = run_evaluate(
        &config,
        &hyp_path,
        &side_path(&dir.path().join("test"), "en"),
        false,
    )
    .unwrap();
    assert!(report.bleu >= 0.85, "corpus BLEU {} below 0.85", report.bleu);

    // At least one held-out sentence must pay a reordering cost, proving
    // the verb-movement transform is handled by jumps, not memorization.
    let model = load_model(&config).unwrap();
    let hi = lookup_profile("hi", &[]).unwrap();
    let decoder_config = config.decoder_config();
    let reordered = held_out.iter().any(|(src, _)| {
        let tokens = tokenize(src, &hi);
        let (_, derivation) = decode(&tokens, &model.table, &model.lm, &model.weights, &decoder_config);
        derivation.total_reorder_distance() > 0
    });
    assert!(reordered, "no held-out sentence exercised reordering");
    assert!(started.elapsed() < Duration::from_secs(120), "end-to-end too slow");
    println!(
        "criterion 7 end-to-end synthetic language: PASS (BLEU {:.4})",
        report.bleu
    );
}

#[test]
fn criterion_08_tuning_improves_degraded_weights() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = Lcg::new(19);
    let train = toy_corpus(300, &mut rng);
    let dev = toy_random(30, &mut rng);
    write_side_files(&dir.path().join("corpus"), &train, "hi", "en");
    let config = PipelineConfig {
        corpus: Some(dir.path().join("corpus")),
        model_dir: dir.path().join("model"),
        ..PipelineConfig::default()
    };
    run_train(&config).unwrap();
    let model = load_model(&config).unwrap();

    let hi = lookup_profile("hi", &[]).unwrap();
    let en = lookup_profile("en", &[]).unwrap();
    let dev_pairs: Vec<(Vec<String>, Vec<String>)> = dev
        .iter()
        .map(|(s, t)| (tokenize(s, &hi), tokenize(t, &en)))
        .collect();

    // An oversized reordering weight forces monotone (wrong) output.
    let degraded = FeatureWeights {
        reorder: 3.0,
        ..FeatureWeights::default()
    };
    let report = tune_weights(
        &dev_pairs,
        &model.table,
        &model.lm,
        degraded,
        TuneMetric::Bleu,
        3,
        &config.decoder_config(),
        &config.ribes_config(),
    )
    .unwrap();

    let initial_score = report.iterations[0].1;
    assert!(
        report.final_score() > initial_score,
        "tuning did not improve: {initial_score} -> {}",
        report.final_score()
    );
    for w in report.iterations.windows(2) {
        assert!(w[1].1 >= w[0].1, "accepted scores decreased: {} -> {}", w[0].1, w[1].1);
    }
    println!(
        "criterion 8 tuning improves degraded weights: PASS ({:.4} -> {:.4})",
        initial_score,
        report.final_score()
    );
}

#[test]
fn criterion_09_repeated_runs_are_byte_identical() {
    let artifacts = [
        "corpus.tok.hi",
        "corpus.tok.en",
        "truecase.hi",
        "truecase.en",
        "corpus.true.hi",
        "corpus.true.en",
        "lm.arpa",
        "lex.fwd",
        "lex.rev",
        "em.log",
        "align.fwd",
        "align.rev",
        "align.sym",
        "phrase-table",
        "weights.txt",
        "tune-report.txt",
        "manifest.json",
    ];

    let full_run = || -> (tempfile::TempDir, Vec<Vec<u8>>, String, String) {
        let dir = tempfile::tempdir().unwrap();
        let mut rng = Lcg::new(29);
        write_side_files(&dir.path().join("corpus"), &toy_corpus(150, &mut rng), "hi", "en");
        write_side_files(&dir.path().join("dev"), &toy_random(20, &mut rng), "hi", "en");
        write_side_files(&dir.path().join("test"), &toy_random(10, &mut rng), "hi", "en");
        let config = PipelineConfig {
            corpus: Some(dir.path().join("corpus")),
            dev: Some(dir.path().join("dev")),
            test: Some(dir.path().join("test")),
            model_dir: dir.path().join("model"),
            ..PipelineConfig::default()
        };
        run_train(&config).unwrap();
        run_tune(&config).unwrap();
        let translations =
            run_translate(&config, &side_path(&dir.path().join("test"), "hi")).unwrap();
        let hyp = dir.path().join("hyp.en");
        std::fs::write(&hyp, translations.join("\n") + "\n").unwrap();
        let report = run_evaluate(
            &config,
            &hyp,
            &side_path(&dir.path().join("test"), "en"),
            true,
        )
        .unwrap();
        let bytes: Vec<Vec<u8>> = artifacts
            .iter()
            .map(|name| std::fs::read(config.model_dir.join(name)).unwrap())
            .collect();
        (dir, bytes, translations.join("\n"), report.text)
    };

    let (_keep_a, bytes_a, out_a, report_a) = full_run();
    let (_keep_b, bytes_b, out_b, report_b) = full_run();
    for ((name, a), b) in artifacts.iter().zip(&bytes_a).zip(&bytes_b) {
        assert_eq!(a, b, "artifact {name} differs between runs");
    }
    assert_eq!(out_a, out_b, "translations differ between runs");
    assert_eq!(report_a, report_b, "evaluation reports differ between runs");
    println!("criterion 9 repeated runs are byte-identical: PASS");
}

#[test]
fn criterion_10_ogive_report() {
    let en = lookup_profile("en", &[]).unwrap();
    let lengths = [2usize, 3, 3, 5];
    let corpus = ParallelCorpus {
        pairs: lengths
            .iter()
            .enumerate()
            .map(|(i, &len)| SentencePair {
                source: vec!["w"; len].join(" "),
                target: "w".to_string(),
                line_no: i + 1,
            })
            .collect(),
        src_profile: en.clone(),
        tgt_profile: en,
    };
    let at = |threshold| length_ogive(&corpus, threshold, Side::Source).unwrap();
    assert_eq!(at(4), 0.75);

    let mut last = 0.0;
    for threshold in 0..=10 {
        let f = at(threshold);
        assert!(f >= last, "ogive decreased at threshold {threshold}");
        last = f;
    }
    assert_eq!(at(6), 1.0);
    assert_eq!(at(100), 1.0);
    assert_eq!(at(2), 0.0);
    println!("criterion 10 ogive report: PASS");
}
