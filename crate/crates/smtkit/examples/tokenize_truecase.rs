//! Tokenization with punctuation splitting and abbreviation glue,
//! truecasing from corpus statistics, and detokenization back to text.

use smtkit::corpus::lookup_profile;
use smtkit::preprocess::{detokenize, tokenize, train_truecaser, truecase};

fn main() -> smtkit::Result<()> {
    let en = lookup_profile("en", &[])?;

    // Periods inside abbreviations stay glued; trailing ones split.
    for line in ["The U.S. agency said: well-known results, 3.5 percent."] {
        let tokens = tokenize(line, &en);
        println!("tokens:      {tokens:?}");
        println!("detokenized: {}", detokenize(&tokens, &en));
    }

    // The truecaser learns each word's usual casing from mid-sentence
    // evidence, so sentence-initial words recover their true case.
    let corpus: Vec<Vec<String>> = [
        "Delhi is a big city .",
        "He lives in Delhi .",
        "The city grows fast .",
        "People like the city .",
    ]
    .iter()
    .map(|s| tokenize(s, &en))
    .collect();
    let model = train_truecaser(&corpus);

    for line in ["Delhi grows fast .", "The people like Delhi ."] {
        let tokens = tokenize(line, &en);
        let cased = truecase(&tokens, &model);
        println!("{line}  ->  {}", cased.join(" "));
    }
    Ok(())
}
