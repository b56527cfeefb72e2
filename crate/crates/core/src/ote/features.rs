use serde::{Deserialize, Serialize};

use crate::clusters::{brown_prefixes, ClusterKind, ClusterLexicon};
use crate::corpus::{shape_of, BioTag, Token};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedClusterLexicon {
    pub name: String,
    pub lexicon: ClusterLexicon,
}

/// Feature templates for opinion target extraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OteFeatureConfig {
    /// Token and shape features are emitted for offsets `-window..=window`.
    pub window: usize,
    pub prefix_len: usize,
    pub suffix_len: usize,
    pub use_bigrams: bool,
    pub use_trigrams: bool,
    pub cluster_lexicons: Vec<NamedClusterLexicon>,
    /// Disables every cluster feature.
    pub constrained: bool,
    /// Features seen fewer times than this in training are ignored.
    pub feature_cutoff: usize,
}

impl Default for OteFeatureConfig {
    fn default() -> Self {
        OteFeatureConfig {
            window: 2,
            prefix_len: 4,
            suffix_len: 4,
            use_bigrams: true,
            use_trigrams: true,
            cluster_lexicons: Vec::new(),
            constrained: false,
            feature_cutoff: 0,
        }
    }
}

pub(crate) fn validate_name(name: &str) -> Result<()> {
    let ok = !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_alphanumeric() || c == '_' || c == '-' || c == '.');
    if ok {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "lexicon name `{name}` must be non-empty and use only letters, digits, `_`, `-` or `.`"
        )))
    }
}

impl OteFeatureConfig {
    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for c in &self.cluster_lexicons {
            validate_name(&c.name)?;
            if !seen.insert(c.name.as_str()) {
                return Err(Error::invalid(format!(
                    "cluster lexicon name `{}` is used twice",
                    c.name
                )));
            }
        }
        Ok(())
    }
}

/// Token text safe for the tab-separated model file.
fn clean(s: &str) -> String {
    s.chars().map(|c| if c.is_whitespace() { '_' } else { c }).collect()
}

fn lower(t: &Token) -> String {
    clean(&t.surface.to_lowercase())
}

fn shape(t: &Token) -> String {
    shape_of(&t.surface).unwrap_or_else(|_| "x".to_string())
}

fn at(tokens: &[Token], position: usize, offset: isize) -> Option<&Token> {
    position.checked_add_signed(offset).and_then(|j| tokens.get(j))
}

fn prev_feature(previous: Option<BioTag>) -> String {
    match previous {
        Some(t) => format!("prev={t}"),
        None => "prev=∅".to_string(),
    }
}

/// Local features of the token at `position` that do not depend on the
/// previous label.
pub(crate) fn static_local_features(tokens: &[Token], position: usize, config: &OteFeatureConfig) -> Vec<String> {
    let mut out = Vec::new();
    if position == 0 {
        out.push("bos".to_string());
    }
    let w = config.window as isize;
    for d in -w..=w {
        if let Some(t) = at(tokens, position, d) {
            out.push(format!("w{d}={}", lower(t)));
            out.push(format!("sh{d}={}", shape(t)));
        }
    }

    let current: Vec<char> = lower(&tokens[position]).chars().collect();
    for n in 1..=config.prefix_len.min(current.len()) {
        out.push(format!("pre{n}={}", current[..n].iter().collect::<String>()));
    }
    for n in 1..=config.suffix_len.min(current.len()) {
        out.push(format!(
            "suf{n}={}",
            current[current.len() - n..].iter().collect::<String>()
        ));
    }

    let mut ngrams = |n: usize, word_tag: &str, shape_tag: &str| {
        for start in -(n as isize - 1)..=0 {
            let span: Option<Vec<&Token>> = (start..start + n as isize).map(|d| at(tokens, position, d)).collect();
            if let Some(span) = span {
                let words: Vec<String> = span.iter().map(|t| lower(t)).collect();
                let shapes: Vec<String> = span.iter().map(|t| shape(t)).collect();
                out.push(format!("{word_tag}{start}={}", words.join("|")));
                out.push(format!("{shape_tag}{start}={}", shapes.join("|")));
            }
        }
    };
    if config.use_bigrams {
        ngrams(2, "wb", "sb");
    }
    if config.use_trigrams {
        ngrams(3, "wt", "st");
    }
    out
}

/// Local features of the token at `position` given the previous label
/// (`None` at sentence start).
pub fn local_features(
    tokens: &[Token],
    position: usize,
    previous: Option<BioTag>,
    config: &OteFeatureConfig,
) -> Vec<String> {
    let mut out = static_local_features(tokens, position, config);
    out.push(prev_feature(previous));
    out
}

/// Word-class features from the configured cluster lexicons. Brown classes
/// add one feature per path prefix plus a copy of the token window features
/// with each token replaced by its path prefixes.
pub fn cluster_features(tokens: &[Token], position: usize, config: &OteFeatureConfig) -> Vec<String> {
    let mut out = Vec::new();
    if config.constrained {
        return out;
    }
    let w = config.window as isize;
    for NamedClusterLexicon { name, lexicon } in &config.cluster_lexicons {
        let class_of = |t: &Token| lexicon.lookup(&t.surface);
        if lexicon.kind == ClusterKind::Brown {
            if let Some(path) = class_of(&tokens[position]) {
                for p in brown_prefixes(path) {
                    out.push(format!("{name}={p}"));
                }
            }
            for d in -w..=w {
                if let Some(path) = at(tokens, position, d).and_then(class_of) {
                    for p in brown_prefixes(path) {
                        out.push(format!("{name}w{d}={p}"));
                    }
                }
            }
        } else if let Some(class) = class_of(&tokens[position]) {
            out.push(format!("{name}={}", clean(class)));
        }
    }
    out
}

/// Every label-independent feature of a position.
pub(crate) fn position_features(tokens: &[Token], position: usize, config: &OteFeatureConfig) -> Vec<String> {
    let mut f = static_local_features(tokens, position, config);
    f.extend(cluster_features(tokens, position, config));
    f
}

pub(crate) fn previous_label_features() -> [String; 4] {
    [
        prev_feature(None),
        prev_feature(Some(BioTag::O)),
        prev_feature(Some(BioTag::B)),
        prev_feature(Some(BioTag::I)),
    ]
}

pub(crate) fn previous_slot(previous: Option<BioTag>) -> usize {
    previous.map_or(0, |t| t.index() + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tokenize;

    fn brown(entries: &[(&str, &str)]) -> NamedClusterLexicon {
        let mut lexicon = ClusterLexicon::new(ClusterKind::Brown);
        for (w, p) in entries {
            lexicon.insert(*w, *p).unwrap();
        }
        NamedClusterLexicon {
            name: "brown".into(),
            lexicon,
        }
    }

    #[test]
    fn first_position_features() {
        let toks = tokenize("Tasty Dog!");
        let f = local_features(&toks, 0, None, &OteFeatureConfig::default());
        for expected in ["bos", "w0=tasty", "sh0=Aa", "prev=∅", "w1=dog", "w2=!", "sh2=x"] {
            assert!(f.iter().any(|x| x == expected), "missing {expected} in {f:?}");
        }
        assert!(f.iter().any(|x| x == "wb0=tasty|dog"));
        assert!(f.iter().any(|x| x == "wt0=tasty|dog|!"));
        assert!(!f.iter().any(|x| x.starts_with("w-1")));
    }

    #[test]
    fn single_token_has_no_ngrams() {
        let toks = tokenize("Tasty");
        let f = local_features(&toks, 0, None, &OteFeatureConfig::default());
        assert!(!f.iter().any(|x| x.starts_with("wb") || x.starts_with("wt")));
        assert!(!f.iter().any(|x| x.starts_with("sb") || x.starts_with("st")));
    }

    #[test]
    fn short_token_prefixes() {
        let toks = tokenize("a");
        let f = local_features(&toks, 0, None, &OteFeatureConfig::default());
        let pre: Vec<_> = f
            .iter()
            .filter(|x| x.starts_with("pre") && !x.starts_with("prev"))
            .collect();
        assert_eq!(pre, vec!["pre1=a"]);
    }

    #[test]
    fn previous_label_feature() {
        let toks = tokenize("the wine list");
        let f = local_features(&toks, 2, Some(BioTag::B), &OteFeatureConfig::default());
        assert!(f.iter().any(|x| x == "prev=B"));
        assert!(!f.iter().any(|x| x == "bos"));
    }

    #[test]
    fn cluster_feature_examples() {
        let toks = tokenize("pizza");
        let mut clark = ClusterLexicon::new(ClusterKind::Clark);
        clark.insert("pizza", "137").unwrap();
        let config = OteFeatureConfig {
            cluster_lexicons: vec![NamedClusterLexicon {
                name: "clark".into(),
                lexicon: clark,
            }],
            ..Default::default()
        };
        assert_eq!(cluster_features(&toks, 0, &config), vec!["clark=137"]);
        assert!(cluster_features(&tokenize("sushi"), 0, &config).is_empty());

        let constrained = OteFeatureConfig {
            constrained: true,
            ..config
        };
        assert!(cluster_features(&toks, 0, &constrained).is_empty());
    }

    #[test]
    fn brown_prefix_and_duplicated_window_features() {
        let toks = tokenize("great pizza");
        let config = OteFeatureConfig {
            cluster_lexicons: vec![brown(&[("pizza", "001011010101"), ("great", "11")])],
            ..Default::default()
        };
        let f = cluster_features(&toks, 1, &config);
        let prefixes: Vec<_> = f.iter().filter(|x| x.starts_with("brown=")).collect();
        assert_eq!(prefixes, vec!["brown=0010", "brown=00101101", "brown=001011010101"]);
        assert!(f.contains(&"brownw0=00101101".to_string()));
        assert!(f.contains(&"brownw-1=11".to_string()));
        assert_eq!(f.len(), 3 + 3 + 1);
    }

    #[test]
    fn duplicate_names_are_rejected() {
        let config = OteFeatureConfig {
            cluster_lexicons: vec![brown(&[]), brown(&[])],
            ..Default::default()
        };
        assert!(config.validate().is_err());
    }
}
