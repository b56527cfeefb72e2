use std::collections::HashMap;
use std::io::BufRead;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{ClusterKind, ClusterLexicon};
use crate::error::{Error, Result};

/// Word embeddings stored row-major in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct WordVectors {
    dim: usize,
    words: Vec<String>,
    data: Vec<f64>,
    index: HashMap<String, usize>,
}

impl WordVectors {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("vector dimension must be positive"));
        }
        Ok(WordVectors {
            dim,
            words: Vec::new(),
            data: Vec::new(),
            index: HashMap::new(),
        })
    }

    pub fn push(&mut self, word: impl Into<String>, vector: &[f64]) -> Result<()> {
        let word = word.into();
        if vector.len() != self.dim {
            return Err(Error::invalid(format!(
                "vector for `{word}` has {} components, expected {}",
                vector.len(),
                self.dim
            )));
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("vector for `{word}` is not finite")));
        }
        if self.index.contains_key(&word) {
            return Err(Error::invalid(format!("duplicate vector for `{word}`")));
        }
        self.index.insert(word.clone(), self.words.len());
        self.words.push(word);
        self.data.extend_from_slice(vector);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.index.get(word).map(|&i| self.row(i))
    }

    /// Reads the word2vec text format: a `vocab dim` header, then
    /// `word v1 ... vdim` per line.
    pub fn parse<R: BufRead>(reader: R, origin: &str) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        let header = loop {
            match lines.next() {
                None => return Err(Error::parse(origin, 1, "missing `vocab dim` header")),
                Some((_, l)) => {
                    let l = l.map_err(|e| Error::io(origin, e))?;
                    if !l.trim().is_empty() {
                        break l;
                    }
                }
            }
        };
        let nums: Vec<usize> = header
            .split_whitespace()
            .map(|s| s.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::parse(origin, 1, "header must be `vocab dim`"))?;
        let [vocab, dim] = nums[..] else {
            return Err(Error::parse(origin, 1, "header must be `vocab dim`"));
        };
        let mut vectors = WordVectors::new(dim).map_err(|e| Error::parse(origin, 1, e.to_string()))?;
        for (n, line) in lines {
            let line = line.map_err(|e| Error::io(origin, e))?;
            let mut parts = line.split_whitespace();
            let Some(word) = parts.next() else { continue };
            let values: Vec<f64> = parts
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::parse(origin, n + 1, "non-numeric vector component"))?;
            vectors
                .push(word, &values)
                .map_err(|e| Error::parse(origin, n + 1, e.to_string()))?;
        }
        if vectors.len() != vocab {
            log::warn!("{origin}: header announces {vocab} words, read {}", vectors.len());
        }
        Ok(vectors)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::parse(crate::open_file(path)?, &path.display().to_string())
    }
}

#[derive(Debug, Clone)]
pub struct KMeansFit {
    pub lexicon: ClusterLexicon,
    pub centroids: Vec<Vec<f64>>,
    pub assignments: Vec<usize>,
    /// Inertia after each assignment step.
    pub inertia_history: Vec<f64>,
    pub iterations: usize,
}

impl KMeansFit {
    pub fn inertia(&self) -> f64 {
        self.inertia_history.last().copied().unwrap_or(0.0)
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centroid) in centroids.iter().enumerate() {
        let d = sq_dist(point, centroid);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn kmeans_plus_plus(vectors: &WordVectors, k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = vectors.len();
    let mut chosen = vec![false; n];
    let first = rng.gen_range(0..n);
    chosen[first] = true;
    let mut centroids = vec![vectors.row(first).to_vec()];
    let mut d2: Vec<f64> = (0..n).map(|i| sq_dist(vectors.row(i), &centroids[0])).collect();

    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut pick = None;
            for (i, &d) in d2.iter().enumerate() {
                if d > 0.0 {
                    pick = Some(i);
                    if target < d {
                        break;
                    }
                    target -= d;
                }
            }
            pick.unwrap_or(0)
        } else {
            // every point coincides with a centroid: fall back to an unused index
            let free: Vec<usize> = (0..n).filter(|&i| !chosen[i]).collect();
            free[rng.gen_range(0..free.len())]
        };
        chosen[next] = true;
        let c = vectors.row(next).to_vec();
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(sq_dist(vectors.row(i), &c));
        }
        centroids.push(c);
    }
    centroids
}

/// Lloyd's k-means with seeded k-means++ initialization. Class strings are
/// cluster indices in decimal.
pub fn kmeans(vectors: &WordVectors, k: usize, seed: u64, max_iters: usize) -> Result<KMeansFit> {
    let n = vectors.len();
    if k == 0 || k > n {
        return Err(Error::invalid(format!(
            "k = {k} must be between 1 and the vocabulary size {n}"
        )));
    }
    let dim = vectors.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = kmeans_plus_plus(vectors, k, &mut rng);
    let mut assignments = vec![usize::MAX; n];
    let mut distances = vec![0.0; n];
    let mut inertia_history = Vec::new();
    let mut iterations = 0;

    for _ in 0..max_iters.max(1) {
        iterations += 1;
        let mut changed = false;
        for i in 0..n {
            let (c, d) = nearest(vectors.row(i), &centroids);
            if assignments[i] != c {
                assignments[i] = c;
                changed = true;
            }
            distances[i] = d;
        }
        let inertia: f64 = distances.iter().sum();
        if let Some(&prev) = inertia_history.last() {
            debug_assert!(
                inertia <= prev * (1.0 + 1e-12) + 1e-12,
                "inertia increased from {prev} to {inertia}"
            );
        }
        inertia_history.push(inertia);
        if !changed || iterations == max_iters {
            break;
        }

        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (i, &c) in assignments.iter().enumerate() {
            counts[c] += 1;
            for (s, v) in sums[c].iter_mut().zip(vectors.row(i)) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                centroids[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }

        // Re-seed empty clusters with the points farthest from their centroids.
        let empty: Vec<usize> = (0..k).filter(|&c| counts[c] == 0).collect();
        if !empty.is_empty() {
            let mut far: Vec<usize> = (0..n).collect();
            far.sort_by(|&a, &b| {
                let da = sq_dist(vectors.row(a), &centroids[assignments[a]]);
                let db = sq_dist(vectors.row(b), &centroids[assignments[b]]);
                db.total_cmp(&da).then(a.cmp(&b))
            });
            for (c, &i) in empty.iter().zip(&far) {
                centroids[*c] = vectors.row(i).to_vec();
            }
        }
    }

    let mut lexicon = ClusterLexicon::new(ClusterKind::Kmeans);
    for (word, &c) in vectors.words().iter().zip(&assignments) {
        lexicon.insert(word.clone(), c.to_string())?;
    }
    Ok(KMeansFit {
        lexicon,
        centroids,
        assignments,
        inertia_history,
        iterations,
    })
}
