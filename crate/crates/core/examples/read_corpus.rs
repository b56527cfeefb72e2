//! Reads SemEval-style XML and shows the BIO view of each sentence.
//!
//! cargo run --example read_corpus

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use elixa::corpus::{bio_encode, char_slice, semeval::read_semeval_xml};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/toy/restaurants.xml");
    let file = File::open(&path)?;
    let sentences = read_semeval_xml(BufReader::new(file))?;
    println!("{} sentences", sentences.len());

    for s in sentences.iter().take(4) {
        println!("\n{}: {}", s.id, s.text);
        let tags = bio_encode(s);
        let line: Vec<String> = s
            .tokens
            .iter()
            .zip(&tags)
            .map(|(t, tag)| format!("{}/{tag}", t.surface))
            .collect();
        println!("  {}", line.join(" "));
        for o in &s.opinions {
            let target = o.target.map(|(a, b)| char_slice(&s.text, a, b)).unwrap_or("NULL");
            let polarity = o.polarity.map(|p| p.to_string()).unwrap_or_default();
            println!(
                "  opinion: target={target:?} category={} polarity={polarity}",
                o.category
            );
        }
    }
    Ok(())
}
