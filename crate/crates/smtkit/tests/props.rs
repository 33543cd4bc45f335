//! Property tests for the invariants the pipeline leans on: idempotent
//! cleaning, digit-script bijection, detokenization as a right inverse
//! under retokenization, normalized language model distributions,
//! symmetrization bounds, and extraction versus direct enumeration.

mod common;

use proptest::prelude::*;

use common::extraction_oracle;
use smtkit::align::{symmetrize, Alignment, Symmetrization};
use smtkit::corpus::lookup_profile;
use smtkit::lm::{train_lm, Smoothing, UNKNOWN};
use smtkit::phrase::extract_phrases;
use smtkit::preprocess::{clean_line, detokenize, tokenize, CleanConfig, DigitScript};

fn alignment_from_bools(src_len: usize, tgt_len: usize, cells: &[bool]) -> Alignment {
    let links = (0..src_len)
        .flat_map(|i| (0..tgt_len).map(move |j| (i, j)))
        .filter(|&(i, j)| cells[(i * tgt_len + j) % cells.len()]);
    Alignment::from_links(src_len, tgt_len, links).unwrap()
}

proptest! {
    #[test]
    fn cleaning_is_idempotent(line in any::<String>(), latin_side in any::<bool>()) {
        let code = if latin_side { "en" } else { "hi" };
        let profile = lookup_profile(code, &[]).unwrap();
        let config = CleanConfig::for_profile(&profile);
        let once = clean_line(&line, &config);
        let twice = clean_line(&once, &config);
        prop_assert_eq!(&once, &twice);
    }

    #[test]
    fn digit_normalization_is_a_bijection(d in 0u32..10) {
        for code in ["hi", "bn", "ta", "te", "ur", "gu", "pa"] {
            let profile = lookup_profile(code, &[]).unwrap();
            let native = char::from_u32(profile.digit_zero as u32 + d).unwrap();
            let latin = char::from_u32('0' as u32 + d).unwrap();

            let mut to_latin = CleanConfig::for_profile(&profile);
            to_latin.normalize_digits_to = DigitScript::Latin;
            let mut to_native = CleanConfig::for_profile(&profile);
            to_native.normalize_digits_to = DigitScript::Native;

            prop_assert_eq!(clean_line(&native.to_string(), &to_latin), latin.to_string());
            prop_assert_eq!(clean_line(&latin.to_string(), &to_native), native.to_string());
        }
    }

    #[test]
    fn detokenization_round_trips_under_retokenization(
        line in "[a-zA-Z0-9 .,:;!?()'\\-]{0,60}"
    ) {
        let profile = lookup_profile("en", &[]).unwrap();
        let config = CleanConfig::for_profile(&profile);
        let cleaned = clean_line(&line, &config);
        let tokens = tokenize(&cleaned, &profile);
        let rendered = detokenize(&tokens, &profile);
        let retokenized = tokenize(&rendered, &profile);
        prop_assert_eq!(tokens, retokenized);
    }

    #[test]
    fn language_model_distributions_normalize(
        corpus in prop::collection::vec(prop::collection::vec(0usize..3, 1..6), 1..5),
        order in 1usize..4,
        context_ids in prop::collection::vec(0usize..4, 0..3),
    ) {
        let vocab = ["a", "b", "c", "zz"];
        let sentences: Vec<Vec<String>> = corpus
            .iter()
            .map(|s| s.iter().map(|&w| vocab[w].to_string()).collect())
            .collect();
        let model = train_lm(&sentences, order, Smoothing::WittenBell).unwrap();
        let context: Vec<String> =
            context_ids.iter().map(|&w| vocab[w].to_string()).collect();
        let mut total = model.prob(UNKNOWN, &context);
        for word in model.vocab() {
            total += model.prob(word, &context);
        }
        prop_assert!((total - 1.0).abs() < 1e-9, "context {:?} sums to {}", context, total);
    }

    #[test]
    fn symmetrization_lies_between_intersection_and_union(
        src_len in 1usize..7,
        tgt_len in 1usize..7,
        fwd_cells in prop::collection::vec(any::<bool>(), 1..49),
        rev_cells in prop::collection::vec(any::<bool>(), 1..49),
    ) {
        let fwd = alignment_from_bools(src_len, tgt_len, &fwd_cells);
        let rev = alignment_from_bools(tgt_len, src_len, &rev_cells);
        let inter = symmetrize(&fwd, &rev, Symmetrization::Intersection).unwrap();
        let union = symmetrize(&fwd, &rev, Symmetrization::Union).unwrap();
        for heuristic in [Symmetrization::GrowDiagFinal, Symmetrization::GrowDiagFinalAnd] {
            let merged = symmetrize(&fwd, &rev, heuristic).unwrap();
            prop_assert!(inter.is_subset(&merged));
            prop_assert!(merged.is_subset(&union));
        }
    }

    #[test]
    fn agreeing_directions_reproduce_the_alignment(
        src_len in 1usize..7,
        tgt_len in 1usize..7,
        cells in prop::collection::vec(any::<bool>(), 1..49),
    ) {
        let fwd = alignment_from_bools(src_len, tgt_len, &cells);
        let rev = fwd.transpose();
        for heuristic in [
            Symmetrization::Intersection,
            Symmetrization::Union,
            Symmetrization::GrowDiagFinal,
            Symmetrization::GrowDiagFinalAnd,
        ] {
            prop_assert_eq!(&symmetrize(&fwd, &rev, heuristic).unwrap(), &fwd);
        }
    }

    #[test]
    fn extraction_equals_direct_enumeration(
        src_len in 1usize..7,
        tgt_len in 1usize..7,
        cells in prop::collection::vec(any::<bool>(), 1..49),
        max_len in 1usize..5,
    ) {
        let alignment = alignment_from_bools(src_len, tgt_len, &cells);
        let links: Vec<(usize, usize)> = alignment.links().collect();
        let got = extract_phrases(src_len, tgt_len, &alignment, max_len).unwrap();
        let want = extraction_oracle(src_len, tgt_len, &links, max_len);
        prop_assert_eq!(got, want);
    }
}
