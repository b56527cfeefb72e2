use std::cmp::Ordering;
use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::features::{position_features, previous_label_features, previous_slot, OteFeatureConfig};
use crate::corpus::{BioTag, Token};
use crate::error::{Error, Result};

pub const MODEL_HEADER: &str = "elixa-ote v1";

/// Per-label scores, indexed by `BioTag::index`.
pub type LabelScores = [f64; 3];

/// Averaged-perceptron sequence model over BIO labels.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceModel {
    weights: HashMap<String, LabelScores>,
    pub config: OteFeatureConfig,
    pub beam: usize,
    pub epochs: usize,
}

#[derive(Serialize, Deserialize)]
struct ModelTrailer {
    beam: usize,
    epochs: usize,
    config: OteFeatureConfig,
}

impl SequenceModel {
    pub fn new(config: OteFeatureConfig, beam: usize) -> Self {
        SequenceModel {
            weights: HashMap::new(),
            config,
            beam: beam.max(1),
            epochs: 0,
        }
    }

    pub(crate) fn from_weights(
        weights: HashMap<String, LabelScores>,
        config: OteFeatureConfig,
        beam: usize,
        epochs: usize,
    ) -> Self {
        SequenceModel {
            weights,
            config,
            beam: beam.max(1),
            epochs,
        }
    }

    pub fn weight(&self, feature: &str, label: BioTag) -> f64 {
        self.weights.get(feature).map_or(0.0, |w| w[label.index()])
    }

    pub fn set_weight(&mut self, feature: impl Into<String>, label: BioTag, value: f64) {
        self.weights.entry(feature.into()).or_insert([0.0; 3])[label.index()] = value;
    }

    pub fn num_features(&self) -> usize {
        self.weights.len()
    }

    /// Every feature with at least one stored weight, in arbitrary order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &LabelScores)> {
        self.weights.iter().map(|(f, w)| (f.as_str(), w))
    }

    fn score(&self, features: &[String]) -> LabelScores {
        let mut s = [0.0; 3];
        for f in features {
            if let Some(w) = self.weights.get(f) {
                for l in 0..3 {
                    s[l] += w[l];
                }
            }
        }
        s
    }

    pub fn decode(&self, tokens: &[Token]) -> Vec<BioTag> {
        decode(self, tokens)
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        let io = |e| Error::io("<output>", e);
        writeln!(out, "{MODEL_HEADER}").map_err(io)?;
        let mut features: Vec<(&String, &LabelScores)> = self.weights.iter().collect();
        features.sort_by(|a, b| a.0.cmp(b.0));
        for (f, w) in features {
            for label in BioTag::ALL {
                let v = w[label.index()];
                if v != 0.0 {
                    writeln!(out, "{f}\t{label}\t{v}").map_err(io)?;
                }
            }
        }
        let trailer = ModelTrailer {
            beam: self.beam,
            epochs: self.epochs,
            config: self.config.clone(),
        };
        let json = serde_json::to_string(&trailer).map_err(|e| Error::invalid(e.to_string()))?;
        writeln!(out, "{json}").map_err(io)?;
        Ok(())
    }

    pub fn read<R: BufRead>(reader: R, origin: &str) -> Result<Self> {
        let mut lines = reader.lines();
        let header = lines
            .next()
            .transpose()
            .map_err(|e| Error::io(origin, e))?
            .unwrap_or_default();
        if header.trim() != MODEL_HEADER {
            return Err(Error::InvalidModel(format!(
                "{origin}: expected header `{MODEL_HEADER}`, found `{header}`"
            )));
        }
        let mut weights: HashMap<String, LabelScores> = HashMap::new();
        let mut trailer: Option<ModelTrailer> = None;
        for (n, line) in lines.enumerate() {
            let line_no = n + 2;
            let line = line.map_err(|e| Error::io(origin, e))?;
            if line.is_empty() {
                continue;
            }
            if trailer.is_some() {
                return Err(Error::parse(origin, line_no, "content after the config line"));
            }
            if line.starts_with('{') {
                trailer = Some(serde_json::from_str(&line).map_err(|e| Error::parse(origin, line_no, e.to_string()))?);
                continue;
            }
            let mut parts = line.rsplitn(3, '\t');
            let (Some(value), Some(label), Some(feature)) = (parts.next(), parts.next(), parts.next()) else {
                return Err(Error::parse(origin, line_no, "expected feature<TAB>label<TAB>weight"));
            };
            let label: BioTag = label
                .parse()
                .map_err(|e: Error| Error::parse(origin, line_no, e.to_string()))?;
            let value: f64 = value
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| Error::parse(origin, line_no, format!("bad weight `{value}`")))?;
            weights.entry(feature.to_string()).or_insert([0.0; 3])[label.index()] = value;
        }
        let trailer = trailer.ok_or_else(|| Error::InvalidModel(format!("{origin}: missing config line")))?;
        trailer.config.validate()?;
        Ok(SequenceModel::from_weights(
            weights,
            trailer.config,
            trailer.beam,
            trailer.epochs,
        ))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write(&mut w)?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::read(crate::open_file(path)?, &path.display().to_string())
    }
}

#[derive(Clone)]
struct Hypothesis {
    score: f64,
    tags: Vec<BioTag>,
}

fn rank(a: &Hypothesis, b: &Hypothesis) -> Ordering {
    b.score.total_cmp(&a.score).then_with(|| a.tags.cmp(&b.tags))
}

/// Beam search over BIO sequences. `scores(i, previous)` gives the label
/// scores of position `i` when the preceding label is `previous`. `I` is
/// never proposed at the start or after `O`. Equal scores prefer the
/// sequence that is smaller under `O < B < I`.
pub fn beam_search<F>(len: usize, beam: usize, mut scores: F) -> Vec<BioTag>
where
    F: FnMut(usize, Option<BioTag>) -> LabelScores,
{
    let beam = beam.max(1);
    let mut hyps = vec![Hypothesis {
        score: 0.0,
        tags: Vec::with_capacity(len),
    }];
    for i in 0..len {
        let mut candidates = Vec::with_capacity(hyps.len() * 3);
        for h in &hyps {
            let previous = h.tags.last().copied();
            let s = scores(i, previous);
            for label in BioTag::ALL {
                if !label.may_follow(previous) {
                    continue;
                }
                let mut tags = h.tags.clone();
                tags.push(label);
                candidates.push(Hypothesis {
                    score: h.score + s[label.index()],
                    tags,
                });
            }
        }
        candidates.sort_by(rank);
        candidates.truncate(beam);
        hyps = candidates;
    }
    hyps.swap_remove(0).tags
}

/// Tags a token sequence with the model's beam width.
pub fn decode(model: &SequenceModel, tokens: &[Token]) -> Vec<BioTag> {
    let statics: Vec<LabelScores> = (0..tokens.len())
        .map(|i| model.score(&position_features(tokens, i, &model.config)))
        .collect();
    let prev: Vec<LabelScores> = previous_label_features()
        .iter()
        .map(|f| model.score(std::slice::from_ref(f)))
        .collect();
    beam_search(tokens.len(), model.beam, |i, previous| {
        let p = prev[previous_slot(previous)];
        let s = statics[i];
        [s[0] + p[0], s[1] + p[1], s[2] + p[2]]
    })
}
