use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use super::{snap_span, tokenize, Opinion, RatedReview, Sentence, Token};
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
struct SentenceRecord {
    id: String,
    text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tokens: Option<Vec<Token>>,
    #[serde(default)]
    opinions: Vec<OpinionRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
struct OpinionRecord {
    target: Option<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    category: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    polarity: Option<String>,
}

pub fn load_absa_jsonl(path: impl AsRef<Path>) -> Result<Vec<Sentence>> {
    let path = path.as_ref();
    parse_absa_jsonl(crate::open_file(path)?, &path.display().to_string())
}

/// Parses ABSA JSON lines. `origin` is used in error messages.
pub fn parse_absa_jsonl<R: BufRead>(reader: R, origin: &str) -> Result<Vec<Sentence>> {
    let mut sentences = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line_no = n + 1;
        let line = line.map_err(|e| Error::io(origin, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: SentenceRecord =
            serde_json::from_str(&line).map_err(|e| Error::parse(origin, line_no, e.to_string()))?;
        let sentence = build_sentence(record).map_err(|e| Error::parse(origin, line_no, e.to_string()))?;
        sentences.push(sentence);
    }
    Ok(sentences)
}

fn validate_tokens(tokens: &[Token], text_len: usize) -> Result<()> {
    let mut previous_end = 0;
    for t in tokens {
        if t.start >= t.end || t.surface.chars().count() != t.end - t.start {
            return Err(Error::invalid(format!(
                "token `{}` has inconsistent offsets ({}, {})",
                t.surface, t.start, t.end
            )));
        }
        if t.start < previous_end || t.end > text_len {
            return Err(Error::invalid(format!(
                "token `{}` at ({}, {}) overlaps its predecessor or leaves the text",
                t.surface, t.start, t.end
            )));
        }
        previous_end = t.end;
    }
    Ok(())
}

fn build_sentence(record: SentenceRecord) -> Result<Sentence> {
    let len = record.text.chars().count();
    let tokens = match record.tokens {
        Some(tokens) => {
            validate_tokens(&tokens, len)?;
            tokens
        }
        None => tokenize(&record.text),
    };

    let mut opinions = Vec::with_capacity(record.opinions.len());
    for op in record.opinions {
        let target = match op.target {
            None => None,
            Some([start, end]) => {
                if start >= end || end > len {
                    return Err(Error::SpanOutOfBounds { start, end, len });
                }
                let snapped = snap_span(&tokens, start, end)
                    .ok_or_else(|| Error::invalid(format!("target ({start}, {end}) covers no token")))?;
                if snapped != (start, end) {
                    warn!(
                        "sentence {}: target ({start}, {end}) snapped to ({}, {})",
                        record.id, snapped.0, snapped.1
                    );
                }
                Some(snapped)
            }
        };
        let polarity = op.polarity.as_deref().map(str::parse).transpose()?;
        opinions.push(Opinion {
            target,
            category: op.category.unwrap_or_default(),
            polarity,
        });
    }

    Ok(Sentence {
        id: record.id,
        text: record.text,
        tokens,
        opinions,
    })
}

/// Writes sentences as ABSA JSON lines. Tokens are written only when they
/// differ from the fallback tokenization of the text.
pub fn write_absa_jsonl<W: Write>(mut out: W, sentences: &[Sentence]) -> Result<()> {
    for s in sentences {
        let tokens = (s.tokens != tokenize(&s.text)).then(|| s.tokens.clone());
        let record = SentenceRecord {
            id: s.id.clone(),
            text: s.text.clone(),
            tokens,
            opinions: s
                .opinions
                .iter()
                .map(|o| OpinionRecord {
                    target: o.target.map(|(a, b)| [a, b]),
                    category: (!o.category.is_empty()).then(|| o.category.clone()),
                    polarity: o.polarity.map(|p| p.as_str().to_string()),
                })
                .collect(),
        };
        let line = serde_json::to_string(&record).map_err(|e| Error::invalid(e.to_string()))?;
        writeln!(out, "{line}").map_err(|e| Error::io("<output>", e))?;
    }
    Ok(())
}

#[derive(Deserialize)]
struct ReviewRecord {
    id: String,
    rating: i64,
    text: String,
}

/// Streaming reader over rated-review JSON lines. Reviews whose rating is
/// outside 1..=5 are skipped and counted.
pub struct RatedReviews<R> {
    lines: std::io::Lines<R>,
    origin: String,
    line_no: usize,
    skipped: usize,
}

impl<R: BufRead> RatedReviews<R> {
    pub fn new(reader: R, origin: impl Into<String>) -> Self {
        RatedReviews {
            lines: reader.lines(),
            origin: origin.into(),
            line_no: 0,
            skipped: 0,
        }
    }

    /// Number of reviews skipped so far for an out-of-range rating.
    pub fn skipped(&self) -> usize {
        self.skipped
    }
}

impl<R: BufRead> Iterator for RatedReviews<R> {
    type Item = Result<RatedReview>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = self.lines.next()?;
            self.line_no += 1;
            let line = match line {
                Ok(l) => l,
                Err(e) => return Some(Err(Error::io(self.origin.clone(), e))),
            };
            if line.trim().is_empty() {
                continue;
            }
            let record: ReviewRecord = match serde_json::from_str(&line) {
                Ok(r) => r,
                Err(e) => return Some(Err(Error::parse(&self.origin, self.line_no, e.to_string()))),
            };
            if !(1..=5).contains(&record.rating) {
                self.skipped += 1;
                warn!(
                    "{}:{}: review {} has rating {} outside 1..5, skipped",
                    self.origin, self.line_no, record.id, record.rating
                );
                continue;
            }
            return Some(Ok(RatedReview {
                id: record.id,
                rating: record.rating as u8,
                text: record.text,
            }));
        }
    }
}

pub fn load_rated_reviews(path: impl AsRef<Path>) -> Result<RatedReviews<BufReader<File>>> {
    let path = path.as_ref();
    Ok(RatedReviews::new(crate::open_file(path)?, path.display().to_string()))
}
