use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::features::{position_features, previous_label_features, previous_slot, OteFeatureConfig};
use super::model::{beam_search, LabelScores, SequenceModel};
use crate::corpus::{bio_decode, bio_encode, BioTag, Sentence};
use crate::error::{Error, Result};
use crate::eval::{make_folds, span_prf, Prf, SpanPrediction};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainOptions {
    pub epochs: usize,
    pub beam: usize,
    pub seed: u64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            epochs: 10,
            beam: 3,
            seed: 7,
        }
    }
}

struct Example {
    /// Interned label-independent features per position.
    features: Vec<Vec<usize>>,
    gold: Vec<BioTag>,
}

/// Structured perceptron with lazily maintained weight averages.
///
/// One step processes one training sentence. The averaged weights are the
/// mean of the raw weights over the snapshots taken after every step.
pub struct PerceptronTrainer {
    config: OteFeatureConfig,
    beam: usize,
    names: Vec<String>,
    examples: Vec<Example>,
    /// Ids of `prev=∅`, `prev=O`, `prev=B`, `prev=I`.
    prev_ids: [usize; 4],
    weights: Vec<LabelScores>,
    totals: Vec<LabelScores>,
    /// Step from which the current raw weight has been in effect.
    since: Vec<[u64; 3]>,
    steps: u64,
    epochs: usize,
    order: Vec<usize>,
    rng: ChaCha8Rng,
}

impl PerceptronTrainer {
    pub fn new(sentences: &[Sentence], config: OteFeatureConfig, beam: usize, seed: u64) -> Result<Self> {
        if sentences.is_empty() {
            return Err(Error::invalid("empty training set"));
        }
        config.validate()?;

        let raw: Vec<(Vec<Vec<String>>, Vec<BioTag>)> = sentences
            .par_iter()
            .map(|s| {
                let feats = (0..s.tokens.len())
                    .map(|i| position_features(&s.tokens, i, &config))
                    .collect();
                (feats, bio_encode(s))
            })
            .collect();

        let mut counts: HashMap<&str, usize> = HashMap::new();
        for (feats, _) in &raw {
            for f in feats.iter().flatten() {
                *counts.entry(f.as_str()).or_default() += 1;
            }
        }
        let mut names: Vec<String> = Vec::new();
        let mut ids: HashMap<String, usize> = HashMap::new();
        for (feats, _) in &raw {
            for f in feats.iter().flatten() {
                if counts[f.as_str()] >= config.feature_cutoff && !ids.contains_key(f) {
                    ids.insert(f.clone(), names.len());
                    names.push(f.clone());
                }
            }
        }
        let prev_ids = previous_label_features().map(|f| {
            *ids.entry(f.clone()).or_insert_with(|| {
                names.push(f);
                names.len() - 1
            })
        });
        let examples = raw
            .into_iter()
            .map(|(feats, gold)| Example {
                features: feats
                    .into_iter()
                    .map(|fs| fs.iter().filter_map(|f| ids.get(f).copied()).collect())
                    .collect(),
                gold,
            })
            .collect();

        let n = names.len();
        Ok(PerceptronTrainer {
            config,
            beam: beam.max(1),
            names,
            examples,
            prev_ids,
            weights: vec![[0.0; 3]; n],
            totals: vec![[0.0; 3]; n],
            since: vec![[1; 3]; n],
            steps: 0,
            epochs: 0,
            order: (0..sentences.len()).collect(),
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    fn decode_example(&self, ex: &Example) -> Vec<BioTag> {
        let statics: Vec<LabelScores> = ex
            .features
            .iter()
            .map(|fs| {
                let mut s = [0.0; 3];
                for &f in fs {
                    for (total, w) in s.iter_mut().zip(self.weights[f]) {
                        *total += w;
                    }
                }
                s
            })
            .collect();
        beam_search(ex.features.len(), self.beam, |i, previous| {
            let p = self.weights[self.prev_ids[previous_slot(previous)]];
            let s = statics[i];
            [s[0] + p[0], s[1] + p[1], s[2] + p[2]]
        })
    }

    fn bump(&mut self, feature: usize, label: BioTag, delta: f64) {
        let l = label.index();
        // current step counts as the first step of the new value
        let step = self.steps;
        let held = (step - self.since[feature][l]) as f64;
        self.totals[feature][l] += self.weights[feature][l] * held;
        self.since[feature][l] = step;
        self.weights[feature][l] += delta;
    }

    fn update_sequence(&mut self, index: usize, tags: &[BioTag], delta: f64) {
        let gold_len = self.examples[index].gold.len();
        for i in 0..gold_len {
            let ex = &self.examples[index];
            let same_here = ex.gold[i] == tags[i];
            let same_before = i == 0 || ex.gold[i - 1] == tags[i - 1];
            if same_here && same_before {
                continue;
            }
            let label = tags[i];
            let prev = self.prev_ids[previous_slot(i.checked_sub(1).map(|j| tags[j]))];
            let feats = self.examples[index].features[i].clone();
            for f in feats {
                self.bump(f, label, delta);
            }
            self.bump(prev, label, delta);
        }
    }

    /// Processes one sentence: decode, and on a mistake add the gold
    /// features and subtract the predicted ones. Returns whether the
    /// prediction was wrong.
    pub fn step(&mut self, index: usize) -> bool {
        self.steps += 1;
        let predicted = self.decode_example(&self.examples[index]);
        let gold = self.examples[index].gold.clone();
        if predicted == gold {
            return false;
        }
        self.update_sequence(index, &gold, 1.0);
        self.update_sequence(index, &predicted, -1.0);
        true
    }

    /// One shuffled pass over the data. Returns the number of mistakes.
    pub fn epoch(&mut self) -> usize {
        let mut order = std::mem::take(&mut self.order);
        order.shuffle(&mut self.rng);
        let mistakes = order.iter().filter(|&&i| self.step(i)).count();
        self.order = order;
        self.epochs += 1;
        mistakes
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    fn to_model(&self, weights: Vec<LabelScores>) -> SequenceModel {
        let map = self
            .names
            .iter()
            .cloned()
            .zip(weights)
            .filter(|(_, w)| w.iter().any(|&v| v != 0.0))
            .collect();
        SequenceModel::from_weights(map, self.config.clone(), self.beam, self.epochs)
    }

    /// Model with the current raw (non-averaged) weights.
    pub fn raw_model(&self) -> SequenceModel {
        self.to_model(self.weights.clone())
    }

    /// Model whose weights are the mean of the raw weights after every step.
    pub fn averaged_model(&self) -> SequenceModel {
        if self.steps == 0 {
            return self.to_model(vec![[0.0; 3]; self.weights.len()]);
        }
        let end = self.steps + 1;
        let t = self.steps as f64;
        let avg = self
            .weights
            .iter()
            .zip(&self.totals)
            .zip(&self.since)
            .map(|((w, tot), since)| {
                let mut a = [0.0; 3];
                for l in 0..3 {
                    a[l] = (tot[l] + w[l] * (end - since[l]) as f64) / t;
                }
                a
            })
            .collect();
        self.to_model(avg)
    }
}

/// Trains an averaged structured perceptron tagger.
pub fn train_perceptron(
    sentences: &[Sentence],
    config: &OteFeatureConfig,
    opts: &TrainOptions,
) -> Result<SequenceModel> {
    let mut trainer = PerceptronTrainer::new(sentences, config.clone(), opts.beam, opts.seed)?;
    for e in 0..opts.epochs {
        let mistakes = trainer.epoch();
        log::debug!("epoch {}: {mistakes} mistakes", e + 1);
    }
    Ok(trainer.averaged_model())
}

/// Replaces each sentence's opinions with the predicted target spans.
pub fn tag_sentences(model: &SequenceModel, sentences: &[Sentence]) -> Vec<Sentence> {
    sentences
        .par_iter()
        .map(|s| {
            let tags = model.decode(&s.tokens);
            let mut out = s.clone();
            out.opinions = bio_decode(&tags, &s.tokens)
                .into_iter()
                .map(|(a, b)| crate::corpus::Opinion::with_target(a, b))
                .collect();
            out
        })
        .collect()
}

/// Gold spans after overlap merging, as scored by the tagger.
pub fn gold_spans(sentence: &Sentence) -> SpanPrediction {
    SpanPrediction::new(sentence.id.clone(), bio_decode(&bio_encode(sentence), &sentence.tokens))
}

pub fn evaluate_tagger(model: &SequenceModel, sentences: &[Sentence]) -> Result<Prf> {
    let gold: Vec<SpanPrediction> = sentences.iter().map(gold_spans).collect();
    let pred: Vec<SpanPrediction> = sentences
        .par_iter()
        .map(|s| SpanPrediction::new(s.id.clone(), bio_decode(&model.decode(&s.tokens), &s.tokens)))
        .collect();
    span_prf(&gold, &pred)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OteCvReport {
    pub folds: Vec<Prf>,
    pub mean: Prf,
}

/// k-fold cross-validation of the tagger; the mean is the unweighted mean
/// of the per-fold scores.
pub fn cross_validate_ote(
    sentences: &[Sentence],
    config: &OteFeatureConfig,
    opts: &TrainOptions,
    folds: usize,
) -> Result<OteCvReport> {
    if sentences.len() < folds {
        return Err(Error::invalid(format!(
            "{} sentences cannot be split into {folds} folds",
            sentences.len()
        )));
    }
    let plan = make_folds::<u8>(sentences.len(), folds, opts.seed, None)?;
    let mut scores = Vec::with_capacity(folds);
    for f in 0..folds {
        let train: Vec<Sentence> = plan
            .train_indices(f)
            .into_iter()
            .map(|i| sentences[i].clone())
            .collect();
        let test: Vec<Sentence> = plan.test_indices(f).into_iter().map(|i| sentences[i].clone()).collect();
        let model = train_perceptron(&train, config, opts)?;
        let prf = evaluate_tagger(&model, &test)?;
        log::info!(
            "fold {}: P={:.4} R={:.4} F1={:.4}",
            f + 1,
            prf.precision,
            prf.recall,
            prf.f1
        );
        scores.push(prf);
    }
    Ok(OteCvReport {
        mean: Prf::mean(&scores),
        folds: scores,
    })
}
