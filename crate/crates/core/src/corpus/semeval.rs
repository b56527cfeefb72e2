//! Converter from SemEval-2015 ABSA XML to the JSON-lines format.
//!
//! Only `sentence`, `text` and `Opinion` elements are read. A `target` of
//! `NULL` (or a `from == to` span) becomes a null target.

use std::io::BufRead;

use log::warn;
use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use super::{snap_span, tokenize, Opinion, Sentence};
use crate::error::{Error, Result};

struct PendingOpinion {
    target: Option<(usize, usize)>,
    category: String,
    polarity: Option<String>,
}

fn attr(e: &BytesStart<'_>, name: &[u8]) -> Result<Option<String>> {
    for a in e.attributes() {
        let a = a.map_err(|err| Error::invalid(format!("bad XML attribute: {err}")))?;
        if a.key.as_ref() == name {
            let v = a
                .unescape_value()
                .map_err(|err| Error::invalid(format!("bad XML attribute value: {err}")))?;
            return Ok(Some(v.into_owned()));
        }
    }
    Ok(None)
}

fn parse_offset(v: Option<String>, what: &str) -> Result<Option<usize>> {
    v.map(|s| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| Error::invalid(format!("bad `{what}` offset `{s}`")))
    })
    .transpose()
}

fn read_opinion(e: &BytesStart<'_>) -> Result<PendingOpinion> {
    let target_text = attr(e, b"target")?;
    let from = parse_offset(attr(e, b"from")?, "from")?;
    let to = parse_offset(attr(e, b"to")?, "to")?;
    let target = match (target_text.as_deref(), from, to) {
        (Some("NULL"), _, _) | (None, _, _) => None,
        (_, Some(a), Some(b)) if a < b => Some((a, b)),
        _ => None,
    };
    Ok(PendingOpinion {
        target,
        category: attr(e, b"category")?.unwrap_or_default(),
        polarity: attr(e, b"polarity")?,
    })
}

/// Reads every annotated sentence from a SemEval-2015 XML document.
pub fn read_semeval_xml<R: BufRead>(input: R) -> Result<Vec<Sentence>> {
    let mut reader = Reader::from_reader(input);
    let mut buf = Vec::new();
    let mut sentences = Vec::new();

    let mut id: Option<String> = None;
    let mut text = String::new();
    let mut in_text = false;
    let mut opinions: Vec<PendingOpinion> = Vec::new();

    loop {
        let event = reader
            .read_event_into(&mut buf)
            .map_err(|e| Error::invalid(format!("XML error at byte {}: {e}", reader.buffer_position())))?;
        match event {
            Event::Start(e) => match e.name().as_ref() {
                b"sentence" => {
                    id = attr(&e, b"id")?;
                    text.clear();
                    opinions.clear();
                }
                b"text" => in_text = true,
                b"Opinion" => opinions.push(read_opinion(&e)?),
                _ => {}
            },
            Event::Empty(e) => {
                if e.name().as_ref() == b"Opinion" {
                    opinions.push(read_opinion(&e)?);
                }
            }
            Event::Text(t) if in_text => {
                let s = t.unescape().map_err(|e| Error::invalid(format!("bad XML text: {e}")))?;
                text.push_str(&s);
            }
            Event::CData(t) if in_text => {
                text.push_str(&String::from_utf8_lossy(&t));
            }
            Event::End(e) => match e.name().as_ref() {
                b"text" => in_text = false,
                b"sentence" => {
                    let sid = id.take().unwrap_or_else(|| format!("s{}", sentences.len()));
                    sentences.push(finish_sentence(sid, &text, opinions.drain(..))?);
                }
                _ => {}
            },
            Event::Eof => break,
            _ => {}
        }
        buf.clear();
    }
    Ok(sentences)
}

fn finish_sentence(id: String, text: &str, pending: impl Iterator<Item = PendingOpinion>) -> Result<Sentence> {
    let tokens = tokenize(text);
    let len = text.chars().count();
    let mut opinions = Vec::new();
    for p in pending {
        let target = match p.target {
            Some((a, b)) if b > len => {
                return Err(Error::SpanOutOfBounds { start: a, end: b, len });
            }
            Some((a, b)) => {
                let snapped = snap_span(&tokens, a, b);
                if snapped.is_none() {
                    warn!("sentence {id}: target ({a}, {b}) covers no token, treated as null");
                }
                snapped
            }
            None => None,
        };
        opinions.push(Opinion {
            target,
            category: p.category,
            polarity: p.polarity.as_deref().map(str::parse).transpose()?,
        });
    }
    Ok(Sentence {
        id,
        text: text.to_string(),
        tokens,
        opinions,
    })
}
