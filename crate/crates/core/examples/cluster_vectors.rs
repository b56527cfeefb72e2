//! Clusters word vectors with k-means and uses the result as a class lexicon.
//!
//! cargo run --example cluster_vectors

use std::path::Path;

use elixa::clusters::{kmeans, WordVectors};

fn main() -> elixa::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/toy/vectors.txt");
    let vectors = WordVectors::load(path)?;
    println!("{} vectors of dimension {}", vectors.len(), vectors.dim());

    let fit = kmeans(&vectors, 3, 7, 100)?;
    println!(
        "converged after {} iterations, inertia {:.4}",
        fit.iterations,
        fit.inertia()
    );
    for (c, centroid) in fit.centroids.iter().enumerate() {
        let members: Vec<&str> = vectors
            .words()
            .iter()
            .zip(&fit.assignments)
            .filter(|(_, &a)| a == c)
            .map(|(w, _)| w.as_str())
            .collect();
        let centre: Vec<String> = centroid.iter().map(|v| format!("{v:.2}")).collect();
        println!("  cluster {c} [{}]: {}", centre.join(", "), members.join(" "));
    }
    println!("class of \"pizza\": {:?}", fit.lexicon.lookup("pizza"));
    Ok(())
}
