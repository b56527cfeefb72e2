//! Word cluster lexicons (Brown bit paths, Clark classes, k-means classes)
//! and k-means induction over word vectors.

mod kmeans;

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use kmeans::{kmeans, KMeansFit, WordVectors};

/// Prefix lengths taken from Brown bit paths.
pub const BROWN_PREFIX_LENGTHS: [usize; 4] = [4, 8, 12, 20];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClusterKind {
    Brown,
    Clark,
    Kmeans,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterLexicon {
    pub kind: ClusterKind,
    classes: BTreeMap<String, String>,
}

impl ClusterLexicon {
    pub fn new(kind: ClusterKind) -> Self {
        ClusterLexicon {
            kind,
            classes: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, word: impl Into<String>, class: impl Into<String>) -> Result<()> {
        let class = class.into();
        if class.is_empty() {
            return Err(Error::invalid("empty cluster class"));
        }
        if self.kind == ClusterKind::Brown && !is_bit_path(&class) {
            return Err(Error::invalid(format!("`{class}` is not a Brown bit path")));
        }
        self.classes.insert(word.into(), class);
        Ok(())
    }

    /// Class of a word: exact match first, then its lowercased form.
    pub fn lookup(&self, word: &str) -> Option<&str> {
        self.classes
            .get(word)
            .or_else(|| self.classes.get(&word.to_lowercase()))
            .map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.classes.iter().map(|(w, c)| (w.as_str(), c.as_str()))
    }

    /// Writes `word<TAB>class` lines.
    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        for (w, c) in self.iter() {
            writeln!(out, "{w}\t{c}").map_err(|e| Error::io("<output>", e))?;
        }
        Ok(())
    }

    pub fn load(kind: ClusterKind, path: impl AsRef<Path>) -> Result<Self> {
        match kind {
            ClusterKind::Brown => load_brown(path),
            ClusterKind::Clark => load_clark(path),
            ClusterKind::Kmeans => load_kmeans_lexicon(path),
        }
    }
}

fn is_bit_path(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b == b'0' || b == b'1')
}

/// Prefixes of a Brown path at lengths 4, 8, 12 and 20, each capped at the
/// path length, without repeats.
pub fn brown_prefixes(path: &str) -> Vec<&str> {
    let mut out: Vec<&str> = Vec::with_capacity(BROWN_PREFIX_LENGTHS.len());
    for len in BROWN_PREFIX_LENGTHS {
        let p = &path[..len.min(path.len())];
        if out.last() != Some(&p) {
            out.push(p);
        }
    }
    out
}

pub fn parse_brown<R: BufRead>(reader: R, origin: &str) -> Result<ClusterLexicon> {
    let mut lex = ClusterLexicon::new(ClusterKind::Brown);
    let mut best_count: BTreeMap<String, u64> = BTreeMap::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(origin, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |m: &str| Error::parse(origin, n + 1, m);
        let mut fields = line.split('\t');
        let (Some(path), Some(word), Some(count), None) = (fields.next(), fields.next(), fields.next(), fields.next())
        else {
            return Err(bad("expected bitpath<TAB>word<TAB>count"));
        };
        if !is_bit_path(path) {
            return Err(bad("bit path must match [01]+"));
        }
        let count: u64 = count
            .trim()
            .parse()
            .map_err(|_| bad("count must be a non-negative integer"))?;
        if best_count.get(word).is_some_and(|&c| c >= count) {
            continue;
        }
        best_count.insert(word.to_string(), count);
        lex.insert(word, path)?;
    }
    Ok(lex)
}

pub fn load_brown(path: impl AsRef<Path>) -> Result<ClusterLexicon> {
    let path = path.as_ref();
    parse_brown(crate::open_file(path)?, &path.display().to_string())
}

/// Reads `word<TAB>class(<TAB>weight)?` lines; a later duplicate wins.
/// Whitespace-separated lines (as written by Clark's tool) are accepted too.
pub fn parse_class_lexicon<R: BufRead>(kind: ClusterKind, reader: R, origin: &str) -> Result<ClusterLexicon> {
    let mut lex = ClusterLexicon::new(kind);
    for (n, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(origin, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = if line.contains('\t') {
            line.split('\t').collect()
        } else {
            line.split_whitespace().collect()
        };
        let (word, class) = match fields.as_slice() {
            [w, c] | [w, c, _] if !w.is_empty() && !c.trim().is_empty() => (*w, c.trim()),
            _ => return Err(Error::parse(origin, n + 1, "expected word<TAB>class(<TAB>weight)?")),
        };
        if lex.classes.contains_key(word) {
            warn!("{origin}:{}: duplicate word `{word}`, last line wins", n + 1);
        }
        lex.insert(word, class)
            .map_err(|e| Error::parse(origin, n + 1, e.to_string()))?;
    }
    Ok(lex)
}

pub fn load_clark(path: impl AsRef<Path>) -> Result<ClusterLexicon> {
    let path = path.as_ref();
    parse_class_lexicon(ClusterKind::Clark, crate::open_file(path)?, &path.display().to_string())
}

pub fn load_kmeans_lexicon(path: impl AsRef<Path>) -> Result<ClusterLexicon> {
    let path = path.as_ref();
    parse_class_lexicon(
        ClusterKind::Kmeans,
        crate::open_file(path)?,
        &path.display().to_string(),
    )
}
