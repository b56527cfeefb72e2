//! ABSA data model: sentences, tokens, opinions and rated reviews.
//!
//! All offsets are character (Unicode scalar) offsets into the sentence text,
//! end-exclusive, matching the SemEval annotation convention.

mod bio;
mod io;
pub mod semeval;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use bio::{bio_decode, bio_encode, BioTag};
pub use io::{load_absa_jsonl, load_rated_reviews, parse_absa_jsonl, write_absa_jsonl, RatedReviews};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub lemma: String,
    pub pos: String,
    pub start: usize,
    pub end: usize,
}

impl Token {
    /// Token with the fallback annotations: lowercased lemma and `UNK` tag.
    pub fn new(surface: impl Into<String>, start: usize) -> Self {
        let surface = surface.into();
        let end = start + surface.chars().count();
        Token {
            lemma: surface.to_lowercase(),
            pos: "UNK".to_string(),
            surface,
            start,
            end,
        }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Negative,
    Neutral,
}

impl Polarity {
    pub const ALL: [Polarity; 3] = [Polarity::Positive, Polarity::Negative, Polarity::Neutral];

    pub fn as_str(self) -> &'static str {
        match self {
            Polarity::Positive => "positive",
            Polarity::Negative => "negative",
            Polarity::Neutral => "neutral",
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Polarity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "positive" => Ok(Polarity::Positive),
            "negative" => Ok(Polarity::Negative),
            "neutral" => Ok(Polarity::Neutral),
            other => Err(Error::invalid(format!("unknown polarity `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Opinion {
    /// Character span of the target, `None` for a null (implicit) target.
    pub target: Option<(usize, usize)>,
    /// `ENTITY#ATTRIBUTE`, or empty when unannotated.
    pub category: String,
    pub polarity: Option<Polarity>,
}

impl Opinion {
    pub fn with_target(start: usize, end: usize) -> Self {
        Opinion {
            target: Some((start, end)),
            ..Opinion::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub id: String,
    pub text: String,
    pub tokens: Vec<Token>,
    pub opinions: Vec<Opinion>,
}

impl Sentence {
    /// Builds a sentence with fallback tokenization and no opinions.
    pub fn from_text(id: impl Into<String>, text: impl Into<String>) -> Self {
        let text = text.into();
        Sentence {
            id: id.into(),
            tokens: tokenize(&text),
            text,
            opinions: Vec::new(),
        }
    }

    pub fn char_len(&self) -> usize {
        self.text.chars().count()
    }

    /// Indices of the tokens overlapping the character span.
    pub fn tokens_in_span(&self, start: usize, end: usize) -> std::ops::Range<usize> {
        token_range(&self.tokens, start, end)
    }

    /// Non-null target spans, in opinion order.
    pub fn target_spans(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.opinions.iter().filter_map(|o| o.target)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatedReview {
    pub id: String,
    pub rating: u8,
    pub text: String,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum CharClass {
    Letter,
    Digit,
    Space,
    Other,
}

fn char_class(c: char) -> CharClass {
    if c.is_alphabetic() {
        CharClass::Letter
    } else if c.is_numeric() {
        CharClass::Digit
    } else if c.is_whitespace() {
        CharClass::Space
    } else {
        CharClass::Other
    }
}

/// Fallback tokenizer: maximal letter runs, maximal digit runs, and every
/// other non-space character on its own.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut current_class = CharClass::Space;
    let mut current_start = 0;

    for (offset, c) in text.chars().enumerate() {
        let class = char_class(c);
        let extends =
            !current.is_empty() && class == current_class && matches!(class, CharClass::Letter | CharClass::Digit);
        if !extends && !current.is_empty() {
            tokens.push(Token::new(std::mem::take(&mut current), current_start));
        }
        if class != CharClass::Space {
            if current.is_empty() {
                current_start = offset;
            }
            current.push(c);
        }
        current_class = class;
    }
    if !current.is_empty() {
        tokens.push(Token::new(current, current_start));
    }
    tokens
}

/// Collapsed character-class shape: `A` upper, `a` lower, `0` digit, `x` other.
pub fn shape_of(surface: &str) -> Result<String> {
    if surface.is_empty() {
        return Err(Error::EmptyToken);
    }
    let mut shape = String::new();
    for c in surface.chars() {
        let s = if c.is_uppercase() {
            'A'
        } else if c.is_lowercase() {
            'a'
        } else if c.is_numeric() {
            '0'
        } else {
            'x'
        };
        if !shape.ends_with(s) {
            shape.push(s);
        }
    }
    Ok(shape)
}

fn token_range(tokens: &[Token], start: usize, end: usize) -> std::ops::Range<usize> {
    let first = tokens.partition_point(|t| t.end <= start);
    let last = tokens.partition_point(|t| t.start < end);
    first..last.max(first)
}

/// Expands a character span outward to the boundaries of the tokens it
/// overlaps. Returns `None` when the span touches no token.
pub fn snap_span(tokens: &[Token], start: usize, end: usize) -> Option<(usize, usize)> {
    let range = token_range(tokens, start, end);
    if range.is_empty() {
        return None;
    }
    Some((tokens[range.start].start, tokens[range.end - 1].end))
}

/// Substring by character offsets.
pub fn char_slice(text: &str, start: usize, end: usize) -> &str {
    let mut indices = text.char_indices().map(|(i, _)| i).chain(Some(text.len()));
    let from = indices.nth(start).unwrap_or(text.len());
    let to = if end > start {
        indices.nth(end - start - 1).unwrap_or(text.len())
    } else {
        from
    };
    &text[from..to]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn surfaces(tokens: &[Token]) -> Vec<(&str, usize, usize)> {
        tokens.iter().map(|t| (t.surface.as_str(), t.start, t.end)).collect()
    }

    #[test]
    fn tokenize_examples() {
        assert!(tokenize("").is_empty());
        assert_eq!(
            surfaces(&tokenize("Tasty Dog!")),
            vec![("Tasty", 0, 5), ("Dog", 6, 9), ("!", 9, 10)]
        );
        let wifi: Vec<_> = tokenize("Wi-Fi 5").into_iter().map(|t| t.surface).collect();
        assert_eq!(wifi, vec!["Wi", "-", "Fi", "5"]);
    }

    #[test]
    fn tokenize_fallback_annotations() {
        let t = &tokenize("Tasty")[0];
        assert_eq!(t.lemma, "tasty");
        assert_eq!(t.pos, "UNK");
    }

    #[test]
    fn tokenize_splits_letters_from_digits_and_repeats_punct() {
        let t: Vec<_> = tokenize("abc123!!").into_iter().map(|t| t.surface).collect();
        assert_eq!(t, vec!["abc", "123", "!", "!"]);
    }

    #[test]
    fn tokenize_uses_char_offsets() {
        let toks = tokenize("café ok");
        assert_eq!(surfaces(&toks), vec![("café", 0, 4), ("ok", 5, 7)]);
    }

    #[test]
    fn shape_examples() {
        assert_eq!(shape_of("Tasty").unwrap(), "Aa");
        assert_eq!(shape_of("2015").unwrap(), "0");
        assert_eq!(shape_of("Wi-Fi").unwrap(), "AaxAa");
        assert!(matches!(shape_of(""), Err(Error::EmptyToken)));
    }

    #[test]
    fn snap_expands_to_token_boundaries() {
        let toks = tokenize("Tasty Dog!");
        assert_eq!(snap_span(&toks, 0, 4), Some((0, 5)));
        assert_eq!(snap_span(&toks, 2, 7), Some((0, 9)));
        assert_eq!(snap_span(&toks, 6, 9), Some((6, 9)));
        assert_eq!(snap_span(&toks, 5, 6), None);
    }

    #[test]
    fn char_slice_handles_multibyte() {
        assert_eq!(char_slice("café ok", 0, 4), "café");
        assert_eq!(char_slice("café ok", 5, 7), "ok");
        assert_eq!(char_slice("abc", 1, 1), "");
    }
}
