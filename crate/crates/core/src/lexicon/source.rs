use std::collections::BTreeMap;
use std::fmt;
use std::io::BufRead;
use std::path::Path;
use std::str::FromStr;

use log::debug;

use super::{normalize_key, Origin, PolarityLexicon};
use crate::error::{Error, Result};

/// The four general-purpose source lexicons, in merge priority order
/// (`Liu` wins over `OF`, which wins over `GI`, which wins over `SWN`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SourceName {
    Liu,
    OF,
    GI,
    SWN,
}

impl SourceName {
    pub const PRIORITY: [SourceName; 4] = [SourceName::Liu, SourceName::OF, SourceName::GI, SourceName::SWN];

    pub fn origin(self) -> Origin {
        match self {
            SourceName::Liu => Origin::Liu,
            SourceName::OF => Origin::OF,
            SourceName::GI => Origin::GI,
            SourceName::SWN => Origin::SWN,
        }
    }
}

impl fmt::Display for SourceName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.origin().as_str())
    }
}

impl FromStr for SourceName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "liu" => Ok(SourceName::Liu),
            "of" => Ok(SourceName::OF),
            "gi" => Ok(SourceName::GI),
            "swn" => Ok(SourceName::SWN),
            _ => Err(Error::invalid(format!("unknown source lexicon `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RawAnnotation {
    Category(String),
    Scores { pos: f64, neg: f64 },
}

/// Maps a raw source annotation to a signed weight.
pub fn map_weight(source: SourceName, raw: &RawAnnotation) -> Result<f64> {
    let unknown = |category: &str| Error::UnknownCategory {
        source_name: source.to_string(),
        category: category.to_string(),
    };
    match (source, raw) {
        (SourceName::GI, RawAnnotation::Category(c)) => match c.as_str() {
            "neg_+" => Ok(-0.8),
            "neg" => Ok(-0.6),
            "neg_-" => Ok(-0.2),
            "pos_-" => Ok(0.2),
            "pos" => Ok(0.6),
            "pos_+" => Ok(0.8),
            other => Err(unknown(other)),
        },
        (SourceName::Liu | SourceName::OF, RawAnnotation::Category(c)) => match c.as_str() {
            "neg" => Ok(-0.7),
            "pos" => Ok(0.7),
            other => Err(unknown(other)),
        },
        (SourceName::SWN, RawAnnotation::Scores { pos, neg }) => {
            if !(0.0..=1.0).contains(pos) || !(0.0..=1.0).contains(neg) {
                return Err(Error::invalid(format!("SWN scores ({pos}, {neg}) must lie in [0, 1]")));
            }
            Ok(pos - neg)
        }
        (SourceName::SWN, RawAnnotation::Category(c)) => Err(unknown(c)),
        (_, RawAnnotation::Scores { .. }) => {
            Err(Error::invalid(format!("{source} entries take a category, not scores")))
        }
    }
}

/// A raw source lexicon. Every stored annotation is valid for `name`.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceLexicon {
    pub name: SourceName,
    entries: BTreeMap<String, RawAnnotation>,
}

impl SourceLexicon {
    pub fn new(name: SourceName) -> Self {
        SourceLexicon {
            name,
            entries: BTreeMap::new(),
        }
    }

    /// Adds an entry; the first annotation of a lemma is kept.
    pub fn insert(&mut self, lemma: &str, raw: RawAnnotation) -> Result<()> {
        map_weight(self.name, &raw)?;
        let key = normalize_key(lemma);
        if key.is_empty() {
            return Err(Error::invalid("empty lemma"));
        }
        match self.entries.entry(key) {
            std::collections::btree_map::Entry::Occupied(e) => {
                debug!("{}: duplicate entry `{}` ignored", self.name, e.key());
            }
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(raw);
            }
        }
        Ok(())
    }

    pub fn get(&self, lemma: &str) -> Option<&RawAnnotation> {
        self.entries.get(lemma)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn weight(&self, lemma: &str) -> Option<f64> {
        // Stored annotations were validated on insert.
        self.entries
            .get(lemma)
            .map(|raw| map_weight(self.name, raw).unwrap_or(0.0))
    }

    pub fn lemmas(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Reads `word<TAB>category` (Liu, OF, GI) or `word<TAB>pos<TAB>neg`
    /// (SWN). Blank lines and `#` comments are skipped.
    pub fn parse<R: BufRead>(name: SourceName, reader: R, origin: &str) -> Result<Self> {
        let mut lex = SourceLexicon::new(name);
        for (n, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(origin, e))?;
            let trimmed = line.trim_end_matches(['\r', '\n']);
            if trimmed.trim().is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = trimmed.split('\t').map(str::trim).collect();
            let bad = |msg: String| Error::parse(origin, n + 1, msg);
            let (word, raw) = match (name, fields.as_slice()) {
                (SourceName::SWN, [word, pos, neg]) => {
                    let pos: f64 = pos.parse().map_err(|_| bad(format!("bad score `{pos}`")))?;
                    let neg: f64 = neg.parse().map_err(|_| bad(format!("bad score `{neg}`")))?;
                    (*word, RawAnnotation::Scores { pos, neg })
                }
                (SourceName::SWN, _) => {
                    return Err(bad("expected word<TAB>pos<TAB>neg".to_string()));
                }
                (_, [word, category]) => (*word, RawAnnotation::Category(category.to_string())),
                _ => return Err(bad("expected word<TAB>category".to_string())),
            };
            lex.insert(word, raw).map_err(|e| bad(e.to_string()))?;
        }
        Ok(lex)
    }
}

pub fn read_source_lexicon(name: SourceName, path: impl AsRef<Path>) -> Result<SourceLexicon> {
    let path = path.as_ref();
    SourceLexicon::parse(name, crate::open_file(path)?, &path.display().to_string())
}

/// Merges source lexicons: each lemma takes its weight from the
/// highest-priority lexicon that contains it. Zero weights are dropped.
pub fn merge_with_priority(name: impl Into<String>, lexicons: &[SourceLexicon]) -> PolarityLexicon {
    let mut ordered: Vec<&SourceLexicon> = lexicons.iter().collect();
    ordered.sort_by_key(|l| l.name);

    let mut merged = PolarityLexicon::new(name);
    let mut decided: std::collections::HashSet<&str> = std::collections::HashSet::new();
    for lex in ordered {
        for (lemma, raw) in &lex.entries {
            if !decided.insert(lemma.as_str()) {
                continue;
            }
            let weight = map_weight(lex.name, raw).unwrap_or(0.0);
            // in range by construction: categories map inside [-0.8, 0.8], SWN differences inside [-1, 1]
            let _ = merged.insert(lemma, weight, lex.name.origin());
        }
    }
    merged
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cat(s: &str) -> RawAnnotation {
        RawAnnotation::Category(s.to_string())
    }

    #[test]
    fn gi_mapping() {
        let expected = [
            ("neg_+", -0.8),
            ("neg", -0.6),
            ("neg_-", -0.2),
            ("pos_-", 0.2),
            ("pos", 0.6),
            ("pos_+", 0.8),
        ];
        for (c, w) in expected {
            assert_eq!(map_weight(SourceName::GI, &cat(c)).unwrap(), w);
        }
    }

    #[test]
    fn liu_and_of_mapping() {
        for s in [SourceName::Liu, SourceName::OF] {
            assert_eq!(map_weight(s, &cat("pos")).unwrap(), 0.7);
            assert_eq!(map_weight(s, &cat("neg")).unwrap(), -0.7);
        }
    }

    #[test]
    fn swn_difference_and_cancellation() {
        let w = map_weight(SourceName::SWN, &RawAnnotation::Scores { pos: 0.5, neg: 0.5 }).unwrap();
        assert_eq!(w, 0.0);
        let mut swn = SourceLexicon::new(SourceName::SWN);
        swn.insert("meh", RawAnnotation::Scores { pos: 0.5, neg: 0.5 }).unwrap();
        assert!(merge_with_priority("gen", &[swn]).is_empty());
    }

    #[test]
    fn unknown_category_is_named() {
        let err = map_weight(SourceName::GI, &cat("strong")).unwrap_err();
        assert!(err.to_string().contains("strong"), "{err}");
        assert!(map_weight(SourceName::Liu, &cat("pos_+")).is_err());
        assert!(map_weight(SourceName::SWN, &RawAnnotation::Scores { pos: 1.2, neg: 0.0 }).is_err());
    }

    #[test]
    fn merge_examples() {
        let mut swn = SourceLexicon::new(SourceName::SWN);
        swn.insert("tasty", RawAnnotation::Scores { pos: 0.9, neg: 0.1 })
            .unwrap();
        let mut liu = SourceLexicon::new(SourceName::Liu);
        liu.insert("bland", cat("neg")).unwrap();
        let mut gi = SourceLexicon::new(SourceName::GI);
        gi.insert("bland", cat("pos")).unwrap();
        let of = SourceLexicon::new(SourceName::OF);

        let merged = merge_with_priority("gen", &[swn, gi, of, liu]);
        assert!((merged.weight("tasty").unwrap() - 0.8).abs() < 1e-12);
        assert_eq!(merged.get("tasty").unwrap().source, Origin::SWN);
        assert_eq!(merged.weight("bland"), Some(-0.7));
        assert_eq!(merged.get("bland").unwrap().source, Origin::Liu);

        let empty: Vec<_> = SourceName::PRIORITY.iter().map(|&n| SourceLexicon::new(n)).collect();
        assert!(merge_with_priority("gen", &empty).is_empty());
    }

    #[test]
    fn parse_source_files() {
        let swn = SourceLexicon::parse(
            SourceName::SWN,
            "# comment\ngood\t0.75\t0\na_lot\t0.25\t0.125\n".as_bytes(),
            "swn",
        )
        .unwrap();
        assert_eq!(swn.weight("good"), Some(0.75));
        assert_eq!(swn.weight("a lot"), Some(0.125));
        let gi = SourceLexicon::parse(SourceName::GI, "Abandon\tneg\n".as_bytes(), "gi").unwrap();
        assert_eq!(gi.weight("abandon"), Some(-0.6));
        let err = SourceLexicon::parse(SourceName::GI, "x\tweird\n".as_bytes(), "gi").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    proptest! {
        #[test]
        fn merge_uses_highest_priority_source(
            words in prop::collection::vec(0usize..12, 0..40),
            sources in prop::collection::vec(0usize..4, 0..40),
            cats in prop::collection::vec(0usize..6, 0..40),
        ) {
            let gi_cats = ["neg_+", "neg", "neg_-", "pos_-", "pos", "pos_+"];
            let mut lexicons: Vec<SourceLexicon> =
                SourceName::PRIORITY.iter().map(|&n| SourceLexicon::new(n)).collect();
            for ((w, s), c) in words.iter().zip(&sources).zip(&cats) {
                let lex = &mut lexicons[*s];
                let raw = match lex.name {
                    SourceName::GI => cat(gi_cats[*c]),
                    SourceName::SWN => RawAnnotation::Scores { pos: *c as f64 / 8.0, neg: 0.25 },
                    _ => cat(if c % 2 == 0 { "pos" } else { "neg" }),
                };
                lex.insert(&format!("w{w}"), raw).unwrap();
            }
            let merged = merge_with_priority("gen", &lexicons);
            for w in 0..12 {
                let key = format!("w{w}");
                let winner = lexicons.iter().find(|l| l.get(&key).is_some());
                match winner {
                    None => prop_assert!(merged.get(&key).is_none()),
                    Some(l) => {
                        let expected = l.weight(&key).unwrap();
                        if expected == 0.0 {
                            prop_assert!(merged.get(&key).is_none());
                        } else {
                            let e = merged.get(&key).unwrap();
                            prop_assert_eq!(e.source, l.name.origin());
                            prop_assert_eq!(e.weight, expected);
                        }
                    }
                }
            }
        }
    }
}
