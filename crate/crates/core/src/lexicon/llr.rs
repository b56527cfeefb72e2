use std::cmp::Ordering;
use std::collections::HashMap;

use super::{Origin, PolarityLexicon};
use crate::corpus::{tokenize, RatedReview};
use crate::error::{Error, Result};

/// 2x2 word/corpus contingency table.
///
/// `a`: occurrences of the word in the positive corpus, `b`: in the negative
/// corpus, `c` and `d`: all other tokens of the positive and negative corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContingencyCell {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
}

impl ContingencyCell {
    pub fn new(a: u64, b: u64, c: u64, d: u64) -> Self {
        ContingencyCell { a, b, c, d }
    }
}

fn g_term(observed: f64, expected: f64) -> f64 {
    if observed == 0.0 {
        0.0
    } else {
        observed * (observed / expected).ln()
    }
}

/// Signed log-likelihood ratio (G²). Positive when the word is relatively
/// more frequent in the positive corpus, negative when less, zero when the
/// proportions are equal.
pub fn llr_score(cell: &ContingencyCell) -> Result<f64> {
    let ContingencyCell { a, b, c, d } = *cell;
    if a + b == 0 {
        return Err(Error::invalid("contingency table has no word occurrences"));
    }
    // a·(b+d) vs b·(a+c) compares a/(a+c) with b/(b+d) without dividing.
    let sign = (a as u128 * (b + d) as u128).cmp(&(b as u128 * (a + c) as u128));
    if sign == Ordering::Equal {
        return Ok(0.0);
    }

    let n = (a + b + c + d) as f64;
    let (a, b, c, d) = (a as f64, b as f64, c as f64, d as f64);
    let word = a + b;
    let rest = c + d;
    let pos = a + c;
    let neg = b + d;
    // grouped so that swapping the two corpora gives a bit-identical sum
    let word_terms = g_term(a, word * pos / n) + g_term(b, word * neg / n);
    let rest_terms = g_term(c, rest * pos / n) + g_term(d, rest * neg / n);
    let g2 = 2.0 * (word_terms + rest_terms);
    let g2 = g2.max(0.0);
    Ok(match sign {
        Ordering::Greater => g2,
        _ => -g2,
    })
}

#[derive(Debug, Clone)]
pub struct DomainLexiconOptions {
    pub name: String,
    /// Minimum total occurrences of a word across both sides.
    pub min_freq: u64,
    /// Entries kept per polarity sign.
    pub top_k: usize,
}

impl Default for DomainLexiconOptions {
    fn default() -> Self {
        DomainLexiconOptions {
            name: "domain".to_string(),
            min_freq: 5,
            top_k: 2500,
        }
    }
}

/// Word counts over the positive (rating 4-5) and negative (rating 1-2)
/// sides of a review corpus. Rating 3 reviews are ignored.
#[derive(Debug, Clone, Default)]
pub struct DomainCounts {
    counts: HashMap<String, (u64, u64)>,
    positive_total: u64,
    negative_total: u64,
}

impl DomainCounts {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, review: &RatedReview) {
        let positive = match review.rating {
            1 | 2 => false,
            4 | 5 => true,
            _ => return,
        };
        for token in tokenize(&review.text) {
            // punctuation-only tokens carry no lexical entry
            if !token.surface.chars().any(char::is_alphanumeric) {
                continue;
            }
            let entry = self.counts.entry(token.surface.to_lowercase()).or_default();
            if positive {
                entry.0 += 1;
                self.positive_total += 1;
            } else {
                entry.1 += 1;
                self.negative_total += 1;
            }
        }
    }

    pub fn cell(&self, word: &str) -> Option<ContingencyCell> {
        self.counts
            .get(word)
            .map(|&(a, b)| ContingencyCell::new(a, b, self.positive_total - a, self.negative_total - b))
    }

    pub fn vocabulary_size(&self) -> usize {
        self.counts.len()
    }

    pub fn into_lexicon(self, opts: &DomainLexiconOptions) -> Result<PolarityLexicon> {
        if self.positive_total == 0 || self.negative_total == 0 {
            return Err(Error::OneSidedCorpus(format!(
                "{} positive and {} negative tokens",
                self.positive_total, self.negative_total
            )));
        }
        let mut positive = Vec::new();
        let mut negative = Vec::new();
        for (word, &(a, b)) in &self.counts {
            if a + b < opts.min_freq {
                continue;
            }
            let cell = ContingencyCell::new(a, b, self.positive_total - a, self.negative_total - b);
            let score = llr_score(&cell)?;
            if score > 0.0 {
                positive.push((word.as_str(), score));
            } else if score < 0.0 {
                negative.push((word.as_str(), score));
            }
        }
        let by_strength = |x: &(&str, f64), y: &(&str, f64)| y.1.abs().total_cmp(&x.1.abs()).then_with(|| x.0.cmp(y.0));
        positive.sort_by(by_strength);
        negative.sort_by(by_strength);
        positive.truncate(opts.top_k);
        negative.truncate(opts.top_k);

        let max = positive
            .iter()
            .chain(&negative)
            .map(|(_, s)| s.abs())
            .fold(0.0f64, f64::max);
        let mut lex = PolarityLexicon::new(opts.name.clone());
        for (word, score) in positive.into_iter().chain(negative) {
            let weight = (score / max).clamp(-1.0, 1.0);
            lex.insert(word, weight, Origin::LLR)?;
        }
        Ok(lex)
    }
}

/// Induces a domain polarity lexicon from rated reviews.
pub fn build_domain_lexicon<I>(reviews: I, opts: &DomainLexiconOptions) -> Result<PolarityLexicon>
where
    I: IntoIterator<Item = RatedReview>,
{
    let mut counts = DomainCounts::new();
    for r in reviews {
        counts.add(&r);
    }
    counts.into_lexicon(opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn xlogx(x: f64) -> f64 {
        if x == 0.0 {
            0.0
        } else {
            x * x.ln()
        }
    }

    /// G² through the entropy decomposition, independent of the
    /// observed/expected form used by `llr_score`.
    fn entropy_g2(a: u64, b: u64, c: u64, d: u64) -> f64 {
        let (a, b, c, d) = (a as f64, b as f64, c as f64, d as f64);
        let n = a + b + c + d;
        2.0 * (xlogx(a) + xlogx(b) + xlogx(c) + xlogx(d) - xlogx(a + b) - xlogx(c + d) - xlogx(a + c) - xlogx(b + d)
            + xlogx(n))
    }

    fn review(id: &str, rating: u8, text: &str) -> RatedReview {
        RatedReview {
            id: id.into(),
            rating,
            text: text.into(),
        }
    }

    #[test]
    fn equal_proportions_score_zero() {
        assert_eq!(llr_score(&ContingencyCell::new(10, 10, 90, 90)).unwrap(), 0.0);
    }

    #[test]
    fn golden_value() {
        // 2·Σ x ln x decomposition, evaluated offline in double precision
        let s = llr_score(&ContingencyCell::new(20, 5, 80, 95)).unwrap();
        assert!((s - 10.924531125762314).abs() < 1e-9, "{s}");
    }

    #[test]
    fn absent_word_on_positive_side_is_negative() {
        assert!(llr_score(&ContingencyCell::new(0, 10, 100, 90)).unwrap() < 0.0);
    }

    #[test]
    fn empty_word_row_is_an_error() {
        assert!(llr_score(&ContingencyCell::new(0, 0, 10, 10)).is_err());
    }

    #[test]
    fn domain_lexicon_normalizes_to_unit_max() {
        let mut reviews = Vec::new();
        for i in 0..10 {
            reviews.push(review(&format!("p{i}"), 5, "great food and great staff"));
            reviews.push(review(&format!("n{i}"), 1, "awful food and rude staff"));
            reviews.push(review(&format!("m{i}"), 3, "great awful mixed"));
        }
        let opts = DomainLexiconOptions {
            min_freq: 5,
            top_k: 10,
            ..Default::default()
        };
        let lex = build_domain_lexicon(reviews, &opts).unwrap();
        assert_eq!(lex.weight("great"), Some(1.0));
        assert!(lex.weight("awful").unwrap() < 0.0);
        assert!(lex.weight("food").is_none());
        assert!(lex.weight("mixed").is_none());
        let max = lex.iter().map(|(_, e)| e.weight.abs()).fold(0.0, f64::max);
        assert_eq!(max, 1.0);
        assert!(lex.len() <= 2 * opts.top_k);
    }

    #[test]
    fn top_k_and_min_freq_are_applied() {
        let reviews = vec![
            review("a", 5, "alpha alpha alpha beta beta rare"),
            review("b", 1, "gamma gamma gamma delta delta"),
        ];
        let opts = DomainLexiconOptions {
            min_freq: 2,
            top_k: 1,
            ..Default::default()
        };
        let lex = build_domain_lexicon(reviews, &opts).unwrap();
        assert_eq!(lex.len(), 2);
        assert!(lex.weight("alpha").unwrap() > 0.0);
        assert!(lex.weight("gamma").unwrap() < 0.0);
    }

    #[test]
    fn one_sided_corpus_is_an_error() {
        let reviews = vec![review("a", 3, "fine"), review("b", 3, "ok")];
        let err = build_domain_lexicon(reviews, &DomainLexiconOptions::default()).unwrap_err();
        assert!(matches!(err, Error::OneSidedCorpus(_)));
    }

    proptest! {
        #[test]
        fn matches_entropy_oracle(a in 0u64..500, b in 0u64..500, c in 0u64..5000, d in 0u64..5000) {
            prop_assume!(a + b > 0);
            let s = llr_score(&ContingencyCell::new(a, b, c, d)).unwrap();
            let g = entropy_g2(a, b, c, d);
            prop_assert!((s.abs() - g.max(0.0)).abs() <= 1e-9 * g.abs().max(1.0), "{} vs {}", s, g);
        }

        #[test]
        fn swapping_sides_flips_sign(a in 0u64..500, b in 0u64..500, c in 0u64..5000, d in 0u64..5000) {
            prop_assume!(a + b > 0);
            let s = llr_score(&ContingencyCell::new(a, b, c, d)).unwrap();
            let t = llr_score(&ContingencyCell::new(b, a, d, c)).unwrap();
            prop_assert_eq!(s, -t);
        }

        #[test]
        fn sign_is_scale_invariant(a in 0u64..200, b in 0u64..200, c in 0u64..2000, d in 0u64..2000, k in 1u64..50) {
            prop_assume!(a + b > 0);
            let s = llr_score(&ContingencyCell::new(a, b, c, d)).unwrap();
            let t = llr_score(&ContingencyCell::new(k * a, k * b, k * c, k * d)).unwrap();
            prop_assert_eq!(s.signum() * (s != 0.0) as i32 as f64, t.signum() * (t != 0.0) as i32 as f64);
        }
    }
}
