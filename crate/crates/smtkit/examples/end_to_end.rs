//! The whole pipeline on generated data: train, tune, translate, and
//! evaluate a verb-final language against a verb-second one, in a
//! temporary directory.

use std::fs;
use std::path::Path;

use smtkit::pipeline::{
    run_evaluate, run_train, run_translate, run_tune, side_path, PipelineConfig,
};

const SUBJECTS: [(&str, &str); 4] =
    [("राम", "ram"), ("सीता", "sita"), ("लडका", "boy"), ("लडकी", "girl")];
const VERBS: [(&str, &str); 4] = [
    ("देखता", "sees"),
    ("खाता", "eats"),
    ("पीता", "drinks"),
    ("पढता", "reads"),
];
const ADJECTIVES: [(&str, &str); 4] =
    [("बडा", "big"), ("लाल", "red"), ("नया", "new"), ("हरा", "green")];
const OBJECTS: [(&str, &str); 4] = [
    ("आम", "mango"),
    ("पानी", "water"),
    ("किताब", "book"),
    ("फूल", "flower"),
];

/// Verb-final source, verb-second target: the adjective-object block
/// trades places with the verb.
fn pair(s: usize, v: usize, a: usize, o: usize) -> (String, String) {
    (
        format!(
            "{} {} {} {}",
            SUBJECTS[s].0, ADJECTIVES[a].0, OBJECTS[o].0, VERBS[v].0
        ),
        format!(
            "{} {} {} {}",
            SUBJECTS[s].1, VERBS[v].1, ADJECTIVES[a].1, OBJECTS[o].1
        ),
    )
}

fn write_corpus(prefix: &Path, pairs: &[(String, String)]) -> std::io::Result<()> {
    let (src, tgt): (Vec<&str>, Vec<&str>) =
        pairs.iter().map(|(s, t)| (s.as_str(), t.as_str())).unzip();
    fs::write(side_path(prefix, "hi"), src.join("\n") + "\n")?;
    fs::write(side_path(prefix, "en"), tgt.join("\n") + "\n")
}

fn main() -> smtkit::Result<()> {
    let dir = tempfile::tempdir()?;
    // All 256 combinations, split into train, dev, and test.
    let mut all = Vec::new();
    for s in 0..4 {
        for v in 0..4 {
            for a in 0..4 {
                for o in 0..4 {
                    all.push(pair(s, v, a, o));
                }
            }
        }
    }
    write_corpus(&dir.path().join("corpus"), &all[..240])?;
    write_corpus(&dir.path().join("dev"), &all[240..248])?;
    write_corpus(&dir.path().join("test"), &all[248..])?;

    let config = PipelineConfig {
        corpus: Some(dir.path().join("corpus")),
        dev: Some(dir.path().join("dev")),
        test: Some(dir.path().join("test")),
        model_dir: dir.path().join("model"),
        lm_order: 2,
        ..PipelineConfig::default()
    };

    let manifest = run_train(&config)?;
    for stage in &manifest.stages {
        println!("trained stage {} {}", stage.sequence, stage.name);
    }

    let tuned = run_tune(&config)?;
    println!("tuned dev objective to {:.4}", tuned.final_score());

    let test_src = side_path(&dir.path().join("test"), "hi");
    let translations = run_translate(&config, &test_src)?;
    println!("\ntranslations of held-out sentences:");
    for (line, (src, _)) in translations.iter().zip(&all[248..]) {
        println!("  {src} -> {line}");
    }

    let hyp = dir.path().join("hyp.en");
    fs::write(&hyp, translations.join("\n") + "\n")?;
    let report = run_evaluate(&config, &hyp, &side_path(&dir.path().join("test"), "en"), false)?;
    println!("\n{}", report.text.trim_end());
    Ok(())
}
