//! Cross-validates each polarity configuration in a directory and prints
//! the ablation table.
//!
//! cargo run --example feature_ablation

use std::path::Path;

use elixa::config::load_polarity_config_dir;
use elixa::corpus::load_absa_jsonl;
use elixa::polarity::{ablation_run, SvmOptions};

fn main() -> elixa::Result<()> {
    let toy = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/toy");
    let sentences = load_absa_jsonl(toy.join("restaurants.jsonl"))?;
    let configs = load_polarity_config_dir(toy.join("ablation"))?;
    let table = ablation_run(&sentences, &configs, &SvmOptions::default(), 5, 7)?;
    print!("{table}");
    Ok(())
}
