//! Merges the general-purpose source lexicons, restricts the result to
//! strong entries and induces a domain lexicon from rated reviews.
//!
//! cargo run --example build_lexicons

use std::path::Path;

use elixa::corpus::load_rated_reviews;
use elixa::lexicon::{
    build_domain_lexicon, merge_with_priority, read_source_lexicon, restrict_by_threshold, DomainLexiconOptions,
    PolarityLexicon, SourceName,
};

fn show(lex: &PolarityLexicon, n: usize) {
    println!("{} ({} entries)", lex.name, lex.len());
    for (lemma, e) in lex.iter().take(n) {
        println!("  {lemma:<14} {:+.3}  {}", e.weight, e.source);
    }
}

fn main() -> elixa::Result<()> {
    let toy = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/toy");
    let sources = [
        read_source_lexicon(SourceName::Liu, toy.join("liu.txt"))?,
        read_source_lexicon(SourceName::OF, toy.join("of.txt"))?,
        read_source_lexicon(SourceName::GI, toy.join("gi.txt"))?,
        read_source_lexicon(SourceName::SWN, toy.join("swn.txt"))?,
    ];
    let general = merge_with_priority("gen", &sources);
    show(&general, 8);

    let strong = restrict_by_threshold(&general, 0.6)?;
    show(&strong, 8);

    let opts = DomainLexiconOptions {
        name: "yelp".into(),
        min_freq: 3,
        top_k: 50,
    };
    let reviews = load_rated_reviews(toy.join("reviews.jsonl"))?.collect::<elixa::Result<Vec<_>>>()?;
    let domain = build_domain_lexicon(reviews, &opts)?;
    show(&domain, 8);
    Ok(())
}
