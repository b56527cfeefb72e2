use std::collections::BTreeMap;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::corpus::{Opinion, Sentence, Token};
use crate::error::{Error, Result};
use crate::lexicon::{normalize_key, PolarityLexicon};
use crate::ote::NamedClusterLexicon;

/// Feature families for opinion polarity classification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PolarityFeatureConfig {
    /// Lemma n-grams of every order from 1 to `ngram_max`.
    pub ngram_max: usize,
    pub use_pos: bool,
    /// Restricts n-gram and cluster features to `window` tokens on each
    /// side of the target.
    pub window: Option<usize>,
    pub lexicons: Vec<PolarityLexicon>,
    pub cluster_lexicons: Vec<NamedClusterLexicon>,
    /// Adds the opinion's `ENTITY#ATTRIBUTE` category as a feature.
    pub use_category: bool,
    /// Min-max scales every dimension to [0, 1] on the training data.
    pub scale_features: bool,
}

impl Default for PolarityFeatureConfig {
    fn default() -> Self {
        PolarityFeatureConfig {
            ngram_max: 1,
            use_pos: false,
            window: None,
            lexicons: Vec::new(),
            cluster_lexicons: Vec::new(),
            use_category: false,
            scale_features: true,
        }
    }
}

impl PolarityFeatureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1..=4).contains(&self.ngram_max) {
            return Err(Error::invalid(format!(
                "ngram_max must be between 1 and 4, got {}",
                self.ngram_max
            )));
        }
        if self.window == Some(0) {
            return Err(Error::invalid("window must be positive"));
        }
        let mut seen = std::collections::HashSet::new();
        let names = self
            .lexicons
            .iter()
            .map(|l| l.name.as_str())
            .chain(self.cluster_lexicons.iter().map(|c| c.name.as_str()));
        for name in names {
            crate::ote::validate_name(name)?;
            if !seen.insert(name) {
                return Err(Error::invalid(format!("lexicon name `{name}` is used twice")));
            }
        }
        Ok(())
    }
}

/// Named feature values before indexing.
pub type NamedFeatures = BTreeMap<String, f64>;

/// Token range the n-gram and cluster features are drawn from: the target
/// tokens plus `window` tokens on each side, or the whole sentence when no
/// window is set or the target is null.
pub fn feature_scope(sentence: &Sentence, opinion: &Opinion, window: Option<usize>) -> Range<usize> {
    let all = 0..sentence.tokens.len();
    let (Some(w), Some((start, end))) = (window, opinion.target) else {
        return all;
    };
    let target = sentence.tokens_in_span(start, end);
    if target.is_empty() {
        return all;
    }
    target.start.saturating_sub(w)..(target.end + w).min(sentence.tokens.len())
}

fn lemma_key(t: &Token) -> String {
    let lemma = if t.lemma.is_empty() { &t.surface } else { &t.lemma };
    lemma
        .to_lowercase()
        .chars()
        .map(|c| if c.is_whitespace() { '_' } else { c })
        .collect()
}

/// Weight of a token: lemma first, then the lowercased surface form.
fn lexicon_weight(lexicon: &PolarityLexicon, t: &Token) -> Option<f64> {
    lexicon
        .weight(&normalize_key(&t.lemma))
        .or_else(|| lexicon.weight(&normalize_key(&t.surface)))
}

/// `(positive, negative)` lexicon scores: the sum of positive weights and
/// the sum of absolute negative weights over the whole sentence, each
/// divided by the sentence length in tokens.
pub fn lexicon_scores(lexicon: &PolarityLexicon, tokens: &[Token]) -> (f64, f64) {
    if tokens.is_empty() {
        return (0.0, 0.0);
    }
    let (mut pos, mut neg) = (0.0, 0.0);
    for t in tokens {
        match lexicon_weight(lexicon, t) {
            Some(w) if w > 0.0 => pos += w,
            Some(w) => neg += -w,
            None => {}
        }
    }
    let n = tokens.len() as f64;
    (pos / n, neg / n)
}

/// Named features of one opinion.
pub fn extract_features(sentence: &Sentence, opinion: &Opinion, config: &PolarityFeatureConfig) -> NamedFeatures {
    let mut out = NamedFeatures::new();
    let scope = &sentence.tokens[feature_scope(sentence, opinion, config.window)];

    let lemmas: Vec<String> = scope.iter().map(lemma_key).collect();
    for n in 1..=config.ngram_max {
        for gram in lemmas.windows(n) {
            *out.entry(format!("lg{n}={}", gram.join("|"))).or_default() += 1.0;
        }
    }

    if config.use_pos {
        for t in &sentence.tokens {
            *out.entry(format!("pos={}", t.pos)).or_default() += 1.0;
        }
    }

    for lexicon in &config.lexicons {
        let (pos, neg) = lexicon_scores(lexicon, &sentence.tokens);
        out.insert(format!("{}_pos", lexicon.name), pos);
        out.insert(format!("{}_neg", lexicon.name), neg);
    }

    for NamedClusterLexicon { name, lexicon } in &config.cluster_lexicons {
        for t in scope {
            if let Some(class) = lexicon.lookup(&t.surface) {
                out.insert(format!("{name}={class}"), 1.0);
            }
        }
    }

    if config.use_category && !opinion.category.is_empty() {
        out.insert(format!("cat={}", opinion.category), 1.0);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clusters::{ClusterKind, ClusterLexicon};
    use crate::lexicon::Origin;
    use proptest::prelude::*;

    fn lexicon(entries: &[(&str, f64)]) -> PolarityLexicon {
        let mut l = PolarityLexicon::new("lex");
        for (w, v) in entries {
            l.insert(w, *v, Origin::Liu).unwrap();
        }
        l
    }

    fn with_lexicon(l: PolarityLexicon) -> PolarityFeatureConfig {
        PolarityFeatureConfig {
            lexicons: vec![l],
            ..Default::default()
        }
    }

    #[test]
    fn single_token_lexicon_score() {
        let s = Sentence::from_text("1", "good");
        let f = extract_features(&s, &Opinion::default(), &with_lexicon(lexicon(&[("good", 0.7)])));
        assert_eq!(f["lex_pos"], 0.7);
        assert_eq!(f["lex_neg"], 0.0);
    }

    #[test]
    fn negation_example_lexicon_score() {
        let s = Sentence::from_text("1", "not good food");
        let config = with_lexicon(lexicon(&[("good", 0.7), ("not", -0.7)]));
        let f = extract_features(&s, &Opinion::default(), &config);
        assert_eq!(f["lex_pos"], 0.7 / 3.0);
        assert_eq!(f["lex_neg"], 0.7 / 3.0);
    }

    #[test]
    fn no_lexicons_still_has_ngrams() {
        let s = Sentence::from_text("1", "good food");
        let f = extract_features(&s, &Opinion::default(), &PolarityFeatureConfig::default());
        assert!(f.keys().all(|k| !k.ends_with("_pos") && !k.ends_with("_neg")));
        assert_eq!(f["lg1=good"], 1.0);
        assert_eq!(f["lg1=food"], 1.0);
    }

    #[test]
    fn lemma_is_tried_before_surface() {
        let mut s = Sentence::from_text("1", "loved it");
        s.tokens[0].lemma = "love".into();
        let f = extract_features(
            &s,
            &Opinion::default(),
            &with_lexicon(lexicon(&[("love", 0.5), ("loved", -0.5)])),
        );
        assert_eq!(f["lex_pos"], 0.25);
        assert_eq!(f["lex_neg"], 0.0);
        let mut s = Sentence::from_text("1", "Loved it");
        s.tokens[0].lemma = "unknownlemma".into();
        let f = extract_features(&s, &Opinion::default(), &with_lexicon(lexicon(&[("loved", -0.5)])));
        assert_eq!(f["lex_neg"], 0.25);
    }

    #[test]
    fn ngram_frequencies_and_orders() {
        let s = Sentence::from_text("1", "very very good");
        let config = PolarityFeatureConfig {
            ngram_max: 2,
            ..Default::default()
        };
        let f = extract_features(&s, &Opinion::default(), &config);
        assert_eq!(f["lg1=very"], 2.0);
        assert_eq!(f["lg2=very|very"], 1.0);
        assert_eq!(f["lg2=very|good"], 1.0);
        assert_eq!(f.len(), 4);
    }

    #[test]
    fn pos_counts_cover_sentence() {
        let mut s = Sentence::from_text("1", "a b c d e f g h i j k l m");
        for (i, t) in s.tokens.iter_mut().enumerate() {
            t.pos = if i % 2 == 0 { "NN".into() } else { "JJ".into() };
        }
        let config = PolarityFeatureConfig {
            use_pos: true,
            window: Some(1),
            ..Default::default()
        };
        let o = Opinion::with_target(0, 1);
        let f = extract_features(&s, &o, &config);
        assert_eq!(f["pos=NN"], 7.0);
        assert_eq!(f["pos=JJ"], 6.0);
        assert_eq!(f.keys().filter(|k| k.starts_with("lg1=")).count(), 2);
    }

    #[test]
    fn category_and_cluster_features() {
        let s = Sentence::from_text("1", "great pizza");
        let mut clark = ClusterLexicon::new(ClusterKind::Kmeans);
        clark.insert("pizza", "12").unwrap();
        let config = PolarityFeatureConfig {
            use_category: true,
            cluster_lexicons: vec![NamedClusterLexicon {
                name: "w2v".into(),
                lexicon: clark,
            }],
            ..Default::default()
        };
        let o = Opinion {
            target: Some((6, 11)),
            category: "FOOD#QUALITY".into(),
            polarity: None,
        };
        let f = extract_features(&s, &o, &config);
        assert_eq!(f["cat=FOOD#QUALITY"], 1.0);
        assert_eq!(f["w2v=12"], 1.0);
    }

    #[test]
    fn config_validation() {
        assert!(PolarityFeatureConfig {
            ngram_max: 5,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(PolarityFeatureConfig {
            window: Some(0),
            ..Default::default()
        }
        .validate()
        .is_err());
        let twice = PolarityFeatureConfig {
            lexicons: vec![lexicon(&[]), lexicon(&[])],
            ..Default::default()
        };
        assert!(twice.validate().is_err());
        assert!(PolarityFeatureConfig::default().validate().is_ok());
    }

    proptest! {
        #[test]
        fn window_scope_size(len in 1usize..30, a in 0usize..30, span in 1usize..4, w in 1usize..8) {
            let start = a % len;
            let end = (start + span).min(len);
            let text = vec!["t"; len].join(" ");
            let s = Sentence::from_text("1", text);
            let o = Opinion::with_target(s.tokens[start].start, s.tokens[end - 1].end);
            let scope = feature_scope(&s, &o, Some(w));
            let expected = w.min(start) + (end - start) + w.min(len - end);
            prop_assert_eq!(scope.len(), expected);
        }

        #[test]
        fn duplicating_a_sentence_keeps_lexicon_scores(words in prop::collection::vec(0usize..4, 1..12)) {
            let vocab = ["good", "bad", "food", "not"];
            let text: Vec<&str> = words.iter().map(|&i| vocab[i]).collect();
            let once = Sentence::from_text("1", text.join(" "));
            let twice = Sentence::from_text("2", format!("{} {}", text.join(" "), text.join(" ")));
            let l = lexicon(&[("good", 0.7), ("bad", -0.6), ("not", -0.7)]);
            let (p1, n1) = lexicon_scores(&l, &once.tokens);
            let (p2, n2) = lexicon_scores(&l, &twice.tokens);
            prop_assert!((p1 - p2).abs() < 1e-12);
            prop_assert!((n1 - n2).abs() < 1e-12);
        }
    }
}
