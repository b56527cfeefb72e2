use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Sentence, Token};
use crate::error::{Error, Result};

/// Sequence label. Variant order (`O < B < I`) is the decoder tie-break order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BioTag {
    O,
    B,
    I,
}

impl BioTag {
    pub const ALL: [BioTag; 3] = [BioTag::O, BioTag::B, BioTag::I];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> BioTag {
        BioTag::ALL[i]
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BioTag::O => "O",
            BioTag::B => "B",
            BioTag::I => "I",
        }
    }

    /// `I` may only continue a `B` or another `I`.
    pub fn may_follow(self, previous: Option<BioTag>) -> bool {
        self != BioTag::I || matches!(previous, Some(BioTag::B) | Some(BioTag::I))
    }
}

impl fmt::Display for BioTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BioTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "O" => Ok(BioTag::O),
            "B" => Ok(BioTag::B),
            "I" => Ok(BioTag::I),
            other => Err(Error::invalid(format!("unknown BIO tag `{other}`"))),
        }
    }
}

/// Merges overlapping spans into their union. Touching spans stay separate.
pub(crate) fn merge_spans(mut spans: Vec<(usize, usize)>) -> Vec<(usize, usize)> {
    spans.sort_unstable();
    let mut merged: Vec<(usize, usize)> = Vec::with_capacity(spans.len());
    for (s, e) in spans {
        match merged.last_mut() {
            Some(last) if s < last.1 => last.1 = last.1.max(e),
            _ => merged.push((s, e)),
        }
    }
    merged
}

pub fn bio_encode(sentence: &Sentence) -> Vec<BioTag> {
    let mut tags = vec![BioTag::O; sentence.tokens.len()];
    for (start, end) in merge_spans(sentence.target_spans().collect()) {
        let range = sentence.tokens_in_span(start, end);
        for (k, i) in range.enumerate() {
            tags[i] = if k == 0 { BioTag::B } else { BioTag::I };
        }
    }
    tags
}

/// Converts tags back to character spans. A stray `I` opens a new span.
pub fn bio_decode(tags: &[BioTag], tokens: &[Token]) -> Vec<(usize, usize)> {
    debug_assert_eq!(tags.len(), tokens.len());
    let mut spans = Vec::new();
    let mut open: Option<(usize, usize)> = None;
    for (tag, token) in tags.iter().zip(tokens) {
        match tag {
            BioTag::I if open.is_some() => {
                if let Some(span) = open.as_mut() {
                    span.1 = token.end;
                }
            }
            BioTag::O => spans.extend(open.take()),
            BioTag::B | BioTag::I => {
                spans.extend(open.take());
                open = Some((token.start, token.end));
            }
        }
    }
    spans.extend(open);
    spans
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Opinion;
    use proptest::prelude::*;
    use BioTag::*;

    fn sentence(text: &str, targets: &[(usize, usize)]) -> Sentence {
        let mut s = Sentence::from_text("s", text);
        s.opinions = targets.iter().map(|&(a, b)| Opinion::with_target(a, b)).collect();
        s
    }

    #[test]
    fn encode_examples() {
        assert_eq!(bio_encode(&sentence("Tasty Dog!", &[])), vec![O, O, O]);
        assert_eq!(bio_encode(&sentence("Tasty Dog!", &[(6, 9)])), vec![O, B, O]);
        assert_eq!(bio_encode(&sentence("Tasty Dog!", &[(0, 9)])), vec![B, I, O]);
    }

    #[test]
    fn encode_merges_overlapping_targets() {
        let s = sentence("the wine list here", &[(4, 8), (4, 13), (9, 13)]);
        assert_eq!(bio_encode(&s), vec![O, B, I, O]);
    }

    #[test]
    fn adjacent_targets_stay_separate() {
        let s = sentence("wine list", &[(0, 4), (5, 9)]);
        assert_eq!(bio_encode(&s), vec![B, B]);
    }

    #[test]
    fn decode_examples() {
        let toks = Sentence::from_text("s", "Tasty Dog!").tokens;
        assert!(bio_decode(&[O, O, O], &toks).is_empty());
        assert_eq!(bio_decode(&[B, I, O], &toks), vec![(0, 9)]);
        assert_eq!(bio_decode(&[I, O, B], &toks), vec![(0, 5), (9, 10)]);
    }

    fn word_strategy() -> impl Strategy<Value = Vec<(String, bool, bool)>> {
        // (word, is-target, continues-previous-target)
        prop::collection::vec(("[a-z]{1,6}", any::<bool>(), any::<bool>()), 0..12)
    }

    proptest! {
        #[test]
        fn decode_inverts_encode(words in word_strategy()) {
            let mut text = String::new();
            let mut targets: Vec<(usize, usize)> = Vec::new();
            let mut offset = 0;
            let mut prev_target = false;
            for (w, is_target, cont) in &words {
                if !text.is_empty() {
                    text.push(' ');
                    offset += 1;
                }
                let (s, e) = (offset, offset + w.len());
                text.push_str(w);
                offset = e;
                if *is_target {
                    match targets.last_mut() {
                        Some(last) if prev_target && *cont => last.1 = e,
                        _ => targets.push((s, e)),
                    }
                }
                prev_target = *is_target;
            }
            let s = sentence(&text, &targets);
            let decoded = bio_decode(&bio_encode(&s), &s.tokens);
            prop_assert_eq!(decoded, targets);
        }
    }
}
