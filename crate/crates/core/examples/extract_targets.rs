//! Trains the opinion target tagger with cluster features, tags unseen
//! text and reports cross-validated span F1.
//!
//! cargo run --example extract_targets

use std::path::Path;

use elixa::config::load_ote_config;
use elixa::corpus::{bio_encode, load_absa_jsonl, Sentence};
use elixa::ote::{cross_validate_ote, train_perceptron, TrainOptions};

fn main() -> elixa::Result<()> {
    let toy = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/toy");
    let sentences = load_absa_jsonl(toy.join("restaurants.jsonl"))?;
    let config = load_ote_config(toy.join("ote.json"))?;
    let opts = TrainOptions::default();

    let model = train_perceptron(&sentences, &config, &opts)?;
    println!("{} features after {} epochs", model.num_features(), opts.epochs);

    for text in [
        "The pizza was great but the waiter was rude.",
        "We loved the wine list.",
    ] {
        let s = Sentence::from_text("new", text);
        let tags = model.decode(&s.tokens);
        let line: Vec<String> = s
            .tokens
            .iter()
            .zip(&tags)
            .map(|(t, tag)| format!("{}/{tag}", t.surface))
            .collect();
        println!("  {}", line.join(" "));
    }
    let first = &sentences[0];
    println!("gold for {:?}: {:?}", first.text, bio_encode(first));

    let report = cross_validate_ote(&sentences, &config, &opts, 5)?;
    for (i, f) in report.folds.iter().enumerate() {
        println!("fold {}: P {:.4} R {:.4} F1 {:.4}", i + 1, f.precision, f.recall, f.f1);
    }
    println!("mean F1 {:.4}", report.mean.f1);
    Ok(())
}
