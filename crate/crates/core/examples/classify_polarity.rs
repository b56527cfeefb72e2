//! Trains the one-vs-one polarity SVM, predicts the polarity of new
//! opinions and compares cross-validated accuracy with the majority class.
//!
//! cargo run --example classify_polarity

use std::path::Path;

use elixa::config::load_polarity_config;
use elixa::corpus::{load_absa_jsonl, Opinion, Sentence};
use elixa::polarity::{
    cross_validate_majority, cross_validate_polarity, labeled_opinions, train_multiclass, SvmModel, SvmOptions,
};

fn main() -> elixa::Result<()> {
    let toy = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/toy");
    let sentences = load_absa_jsonl(toy.join("restaurants.jsonl"))?;
    let config = load_polarity_config(toy.join("pol.json"))?;
    let opts = SvmOptions::default();

    let data = labeled_opinions(&sentences);
    let model = train_multiclass(&data, &config, &opts)?;
    println!(
        "{} classes, {} machines, {} features",
        model.classes.len(),
        model.machines.len(),
        model.index.len()
    );

    let mut bytes = Vec::new();
    model.write(&mut bytes)?;
    let model = SvmModel::read(bytes.as_slice(), "memory")?;

    for (text, target) in [
        ("The soup was delicious.", "soup"),
        ("The waiter was very rude.", "waiter"),
    ] {
        let s = Sentence::from_text("new", text);
        let start = text.find(target).unwrap();
        let opinion = Opinion::with_target(start, start + target.len());
        println!("  {text:<28} -> {}", model.predict(&s, &opinion));
    }

    let svm = cross_validate_polarity(&sentences, &config, &opts, 5, 7)?;
    let majority = cross_validate_majority(&sentences, 5, 7)?;
    println!(
        "5-fold accuracy {:.2}, majority baseline {:.2}",
        100.0 * svm.mean,
        100.0 * majority.mean
    );
    Ok(())
}
