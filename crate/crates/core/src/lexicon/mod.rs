//! Polarity lexicons: merged general-purpose lexicons built from source
//! lexicons, and domain lexicons induced from rated reviews with the
//! log-likelihood ratio.

mod llr;
mod source;

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use llr::{build_domain_lexicon, llr_score, ContingencyCell, DomainCounts, DomainLexiconOptions};
pub use source::{map_weight, merge_with_priority, read_source_lexicon, RawAnnotation, SourceLexicon, SourceName};

/// Where a lexicon entry's weight came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Origin {
    Liu,
    OF,
    GI,
    SWN,
    LLR,
}

impl Origin {
    pub fn as_str(self) -> &'static str {
        match self {
            Origin::Liu => "Liu",
            Origin::OF => "OF",
            Origin::GI => "GI",
            Origin::SWN => "SWN",
            Origin::LLR => "LLR",
        }
    }
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Origin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Liu" => Ok(Origin::Liu),
            "OF" => Ok(Origin::OF),
            "GI" => Ok(Origin::GI),
            "SWN" => Ok(Origin::SWN),
            "LLR" => Ok(Origin::LLR),
            other => Err(Error::invalid(format!("unknown lexicon source `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LexiconEntry {
    pub weight: f64,
    pub source: Origin,
}

/// Lemma to signed weight in [-1, 1]. Zero weights are never stored.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PolarityLexicon {
    pub name: String,
    entries: BTreeMap<String, LexiconEntry>,
}

/// Lowercases and joins multiword keys (`a_lot`, `a  lot`) with single spaces.
pub fn normalize_key(word: &str) -> String {
    word.to_lowercase()
        .split(|c: char| c == '_' || c.is_whitespace())
        .filter(|p| !p.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
}

impl PolarityLexicon {
    pub fn new(name: impl Into<String>) -> Self {
        PolarityLexicon {
            name: name.into(),
            entries: BTreeMap::new(),
        }
    }

    /// Inserts or replaces an entry. A zero weight is dropped and returns
    /// `Ok(false)`; a weight outside [-1, 1] is an error.
    pub fn insert(&mut self, lemma: &str, weight: f64, source: Origin) -> Result<bool> {
        if !weight.is_finite() || !(-1.0..=1.0).contains(&weight) {
            return Err(Error::invalid(format!(
                "weight {weight} for `{lemma}` is outside [-1, 1]"
            )));
        }
        if weight == 0.0 {
            return Ok(false);
        }
        self.entries
            .insert(normalize_key(lemma), LexiconEntry { weight, source });
        Ok(true)
    }

    pub fn get(&self, lemma: &str) -> Option<&LexiconEntry> {
        self.entries.get(lemma)
    }

    pub fn weight(&self, lemma: &str) -> Option<f64> {
        self.entries.get(lemma).map(|e| e.weight)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in lemma order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &LexiconEntry)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn read(name: impl Into<String>, path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::parse(name, crate::open_file(path)?, &path.display().to_string())
    }

    /// Reads `lemma<TAB>weight<TAB>source` lines.
    pub fn parse<R: BufRead>(name: impl Into<String>, reader: R, origin: &str) -> Result<Self> {
        let mut lex = PolarityLexicon::new(name);
        for (n, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(origin, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let [lemma, weight, source] = fields[..] else {
                return Err(Error::parse(origin, n + 1, "expected lemma<TAB>weight<TAB>source"));
            };
            let weight: f64 = weight
                .trim()
                .parse()
                .map_err(|_| Error::parse(origin, n + 1, format!("bad weight `{weight}`")))?;
            let source: Origin = source
                .trim()
                .parse()
                .map_err(|e: Error| Error::parse(origin, n + 1, e.to_string()))?;
            lex.insert(lemma, weight, source)
                .map_err(|e| Error::parse(origin, n + 1, e.to_string()))?;
        }
        Ok(lex)
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        for (lemma, e) in self.iter() {
            writeln!(out, "{lemma}\t{}\t{}", format_weight(e.weight), e.source)
                .map_err(|err| Error::io("<output>", err))?;
        }
        Ok(())
    }
}

/// Shortest round-trip decimal, zero-padded to at least six significant digits.
pub fn format_weight(w: f64) -> String {
    let mut s = format!("{w}");
    if !s.contains('.') {
        s.push('.');
    }
    let significant = s
        .trim_start_matches('-')
        .trim_start_matches(['0', '.'])
        .chars()
        .filter(char::is_ascii_digit)
        .count();
    for _ in significant..6 {
        s.push('0');
    }
    s
}

/// Keeps the entries with `|weight| >= threshold`.
pub fn restrict_by_threshold(lex: &PolarityLexicon, threshold: f64) -> Result<PolarityLexicon> {
    if threshold.is_nan() || threshold <= 0.0 {
        return Err(Error::invalid(format!("threshold must be positive, got {threshold}")));
    }
    Ok(PolarityLexicon {
        name: format!("{}res", lex.name),
        entries: lex
            .entries
            .iter()
            .filter(|(_, e)| e.weight.abs() >= threshold)
            .map(|(k, e)| (k.clone(), *e))
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lex(entries: &[(&str, f64)]) -> PolarityLexicon {
        let mut l = PolarityLexicon::new("gen");
        for (k, w) in entries {
            l.insert(k, *w, Origin::Liu).unwrap();
        }
        l
    }

    #[test]
    fn restrict_example() {
        let r = restrict_by_threshold(&lex(&[("good", 0.7), ("ok", 0.2)]), 0.6).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r.weight("good"), Some(0.7));
        assert!(restrict_by_threshold(&lex(&[]), 0.6).unwrap().is_empty());
        assert!(restrict_by_threshold(&lex(&[]), 0.0).is_err());
    }

    #[test]
    fn restrict_keeps_boundary_weights() {
        let r = restrict_by_threshold(&lex(&[("a", -0.6), ("b", 0.6), ("c", 0.59)]), 0.6).unwrap();
        assert_eq!(r.len(), 2);
    }

    #[test]
    fn insert_drops_zero_and_rejects_out_of_range() {
        let mut l = PolarityLexicon::new("x");
        assert!(!l.insert("meh", 0.0, Origin::SWN).unwrap());
        assert!(l.is_empty());
        assert!(l.insert("bad", -1.5, Origin::SWN).is_err());
    }

    #[test]
    fn keys_are_normalized() {
        let l = lex(&[("A_Lot", 0.2), ("Great", 0.7)]);
        assert_eq!(l.weight("a lot"), Some(0.2));
        assert_eq!(l.weight("great"), Some(0.7));
    }

    #[test]
    fn weight_format_has_six_significant_digits() {
        assert_eq!(format_weight(0.7), "0.700000");
        assert_eq!(format_weight(-1.0), "-1.00000");
        assert_eq!(format_weight(0.0123), "0.0123000");
        assert_eq!(format_weight(0.123456789), "0.123456789");
    }

    #[test]
    fn parse_rejects_malformed_lines() {
        let err = PolarityLexicon::parse("x", "good\t0.7\n".as_bytes(), "t").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    proptest! {
        #[test]
        fn file_round_trip_is_exact(ws in prop::collection::btree_map("[a-z]{1,8}", -1.0f64..=1.0, 0..20)) {
            let mut l = PolarityLexicon::new("r");
            for (k, w) in &ws {
                l.insert(k, *w, Origin::LLR).unwrap();
            }
            let mut buf = Vec::new();
            l.write(&mut buf).unwrap();
            let back = PolarityLexicon::parse("r", buf.as_slice(), "t").unwrap();
            prop_assert_eq!(back, l);
        }

        #[test]
        fn restrict_is_a_subset(ws in prop::collection::btree_map("[a-z]{1,8}", -1.0f64..=1.0, 0..30), t in 0.01f64..1.0) {
            let mut l = PolarityLexicon::new("r");
            for (k, w) in &ws {
                l.insert(k, *w, Origin::GI).unwrap();
            }
            let r = restrict_by_threshold(&l, t).unwrap();
            prop_assert!(r.len() <= l.len());
            for (k, e) in r.iter() {
                prop_assert_eq!(l.get(k), Some(e));
                prop_assert!(e.weight.abs() >= t);
            }
        }
    }
}
