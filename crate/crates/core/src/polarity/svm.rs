use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::features::{extract_features, NamedFeatures, PolarityFeatureConfig};
use super::smo::{smo_train_binary, BinarySvm, SmoOptions, SparseVector};
use crate::corpus::{Opinion, Polarity, Sentence};
use crate::error::{Error, Result};

pub const MODEL_HEADER: &str = "elixa-pol v1";

/// An opinion with a gold polarity, borrowed from its sentence.
#[derive(Debug, Clone, Copy)]
pub struct LabeledOpinion<'a> {
    pub sentence: &'a Sentence,
    pub opinion: &'a Opinion,
    pub label: Polarity,
}

/// Every opinion that carries a polarity label; unlabeled ones are skipped.
pub fn labeled_opinions(sentences: &[Sentence]) -> Vec<LabeledOpinion<'_>> {
    sentences
        .iter()
        .flat_map(|s| {
            s.opinions.iter().filter_map(move |o| {
                o.polarity.map(|label| LabeledOpinion {
                    sentence: s,
                    opinion: o,
                    label,
                })
            })
        })
        .collect()
}

/// Feature name to dimension, in name order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureIndex {
    names: Vec<String>,
    ids: BTreeMap<String, u32>,
}

impl FeatureIndex {
    pub fn fit<'a>(vectors: impl IntoIterator<Item = &'a NamedFeatures>) -> Self {
        let names: BTreeSet<&String> = vectors
            .into_iter()
            .flat_map(|v| v.iter().filter(|(_, &x)| x != 0.0).map(|(k, _)| k))
            .collect();
        Self::from_names(names.into_iter().cloned().collect())
    }

    fn from_names(names: Vec<String>) -> Self {
        let ids = names.iter().enumerate().map(|(i, n)| (n.clone(), i as u32)).collect();
        FeatureIndex { names, ids }
    }

    pub fn get(&self, name: &str) -> Option<u32> {
        self.ids.get(name).copied()
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, id: u32) -> &str {
        &self.names[id as usize]
    }

    /// Indexes named features, dropping names not in the index.
    pub fn vectorize(&self, features: &NamedFeatures) -> Result<SparseVector> {
        SparseVector::from_pairs(features.iter().filter_map(|(k, &v)| self.get(k).map(|i| (i, v))))
    }
}

/// Per-dimension `(min, max)` over the training vectors, where the minimum
/// includes the implicit zero of every vector lacking the dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaling {
    pub ranges: Vec<(f64, f64)>,
}

impl MinMaxScaling {
    pub fn fit(vectors: &[SparseVector], dim: usize) -> Result<Self> {
        let mut ranges = vec![(f64::INFINITY, f64::NEG_INFINITY); dim];
        let mut present = vec![0usize; dim];
        for v in vectors {
            for (i, x) in v.iter() {
                if x < 0.0 {
                    return Err(Error::invalid(format!(
                        "feature value {x} is negative; scaling expects non-negative features"
                    )));
                }
                let r = &mut ranges[i as usize];
                r.0 = r.0.min(x);
                r.1 = r.1.max(x);
                present[i as usize] += 1;
            }
        }
        for (r, &count) in ranges.iter_mut().zip(&present) {
            if count < vectors.len() {
                r.0 = r.0.min(0.0);
            }
            if count == 0 {
                *r = (0.0, 0.0);
            }
        }
        Ok(MinMaxScaling { ranges })
    }

    /// Maps each value to `(x - min) / (max - min)` clamped to [0, 1];
    /// constant dimensions map to 0.
    pub fn apply(&self, v: &SparseVector) -> SparseVector {
        let scaled = v.iter().filter_map(|(i, x)| {
            let &(lo, hi) = self.ranges.get(i as usize)?;
            let y = if hi > lo {
                ((x - lo) / (hi - lo)).clamp(0.0, 1.0)
            } else {
                0.0
            };
            Some((i, y))
        });
        SparseVector::from_pairs(scaled).expect("scaled values are finite")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmOptions {
    pub c: f64,
    pub tol: f64,
}

impl Default for SvmOptions {
    fn default() -> Self {
        SvmOptions { c: 1.0, tol: 1e-3 }
    }
}

/// Binary machine separating `classes[first]` (positive side) from
/// `classes[second]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseMachine {
    pub first: usize,
    pub second: usize,
    pub weights: SparseVector,
    pub bias: f64,
}

impl PairwiseMachine {
    pub fn decision(&self, x: &SparseVector) -> f64 {
        self.weights.dot(x) + self.bias
    }
}

/// One-vs-one linear SVM over opinion polarity labels.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub classes: Vec<Polarity>,
    pub machines: Vec<PairwiseMachine>,
    pub index: FeatureIndex,
    pub scaling: Option<MinMaxScaling>,
    pub c: f64,
    pub config: PolarityFeatureConfig,
}

fn warn_if_window_unused(data: &[LabeledOpinion<'_>], config: &PolarityFeatureConfig) {
    if config.window.is_some() && data.iter().all(|d| d.opinion.target.is_none()) {
        log::warn!("window is set but no opinion has a target; using whole sentences");
    }
}

/// Fits the feature index, optional scaling and one binary machine per
/// class pair.
pub fn train_multiclass(
    data: &[LabeledOpinion<'_>],
    config: &PolarityFeatureConfig,
    opts: &SvmOptions,
) -> Result<SvmModel> {
    config.validate()?;
    warn_if_window_unused(data, config);
    let named: Vec<NamedFeatures> = data
        .par_iter()
        .map(|d| extract_features(d.sentence, d.opinion, config))
        .collect();
    let index = FeatureIndex::fit(&named);
    let mut vectors = named.iter().map(|f| index.vectorize(f)).collect::<Result<Vec<_>>>()?;
    let scaling = if config.scale_features {
        let s = MinMaxScaling::fit(&vectors, index.len())?;
        vectors = vectors.iter().map(|v| s.apply(v)).collect();
        Some(s)
    } else {
        None
    };

    let labels: Vec<Polarity> = data.iter().map(|d| d.label).collect();
    let (classes, machines) = train_one_vs_one(&vectors, &labels, opts)?;

    Ok(SvmModel {
        classes,
        machines,
        index,
        scaling,
        c: opts.c,
        config: config.clone(),
    })
}

/// Trains one binary machine per pair of the labels present, in label
/// order. Machines train in parallel.
pub fn train_one_vs_one(
    vectors: &[SparseVector],
    labels: &[Polarity],
    opts: &SvmOptions,
) -> Result<(Vec<Polarity>, Vec<PairwiseMachine>)> {
    if vectors.len() != labels.len() {
        return Err(Error::invalid("vector and label counts differ"));
    }
    let classes: Vec<Polarity> = labels.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    if classes.len() < 2 {
        return Err(Error::invalid(format!(
            "polarity training needs at least 2 classes, found {}",
            classes.len()
        )));
    }
    let pairs: Vec<(usize, usize)> = (0..classes.len())
        .flat_map(|i| (i + 1..classes.len()).map(move |j| (i, j)))
        .collect();
    let smo = SmoOptions {
        c: opts.c,
        tol: opts.tol,
        ..Default::default()
    };
    let machines = pairs
        .par_iter()
        .map(|&(i, j)| {
            let samples: Vec<(SparseVector, f64)> = labels
                .iter()
                .zip(vectors)
                .filter_map(|(&l, v)| {
                    if l == classes[i] {
                        Some((v.clone(), 1.0))
                    } else if l == classes[j] {
                        Some((v.clone(), -1.0))
                    } else {
                        None
                    }
                })
                .collect();
            let BinarySvm { w, bias, .. } = smo_train_binary(&samples, &smo)?;
            Ok(PairwiseMachine {
                first: i,
                second: j,
                weights: SparseVector::dense(&w)?,
                bias,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((classes, machines))
}

/// Majority vote; a non-negative decision is a vote for the machine's
/// first class. Ties go to the larger sum of absolute decision values
/// over the machines each tied class won, then to class order.
pub fn vote(classes: &[Polarity], machines: &[PairwiseMachine], x: &SparseVector) -> Polarity {
    let k = classes.len();
    let mut votes = vec![0usize; k];
    let mut strength = vec![0.0f64; k];
    for m in machines {
        let d = m.decision(x);
        let winner = if d >= 0.0 { m.first } else { m.second };
        votes[winner] += 1;
        strength[winner] += d.abs();
    }
    let best = (0..k)
        .max_by(|&a, &b| {
            votes[a]
                .cmp(&votes[b])
                .then(strength[a].total_cmp(&strength[b]))
                .then(b.cmp(&a))
        })
        .expect("at least one class");
    classes[best]
}

impl SvmModel {
    /// Indexed and scaled feature vector of an opinion.
    pub fn vectorize(&self, sentence: &Sentence, opinion: &Opinion) -> SparseVector {
        let named = extract_features(sentence, opinion, &self.config);
        let v = self.index.vectorize(&named).expect("extracted features are finite");
        match &self.scaling {
            Some(s) => s.apply(&v),
            None => v,
        }
    }

    /// Decision value of every machine, in machine order.
    pub fn decisions(&self, x: &SparseVector) -> Vec<f64> {
        self.machines.iter().map(|m| m.decision(x)).collect()
    }

    /// Class chosen by [`vote`].
    pub fn vote(&self, x: &SparseVector) -> Polarity {
        vote(&self.classes, &self.machines, x)
    }

    pub fn predict(&self, sentence: &Sentence, opinion: &Opinion) -> Polarity {
        self.vote(&self.vectorize(sentence, opinion))
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        let io = |e| Error::io("<output>", e);
        writeln!(out, "{MODEL_HEADER}").map_err(io)?;
        let header = HeaderLine {
            classes: self.classes.clone(),
            c: self.c,
            config: self.config.clone(),
        };
        writeln!(out, "{}", json_line(&header)?).map_err(io)?;
        writeln!(
            out,
            "{}",
            json_line(&FeaturesLine {
                features: self.index.names.clone()
            })?
        )
        .map_err(io)?;
        writeln!(
            out,
            "{}",
            json_line(&ScalingLine {
                scaling: self.scaling.clone()
            })?
        )
        .map_err(io)?;
        for m in &self.machines {
            let line = MachineLine {
                pair: (m.first, m.second),
                bias: m.bias,
                weights: m.weights.iter().collect(),
            };
            writeln!(out, "{}", json_line(&line)?).map_err(io)?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(reader: R, origin: &str) -> Result<Self> {
        let mut lines = reader
            .lines()
            .enumerate()
            .map(|(n, l)| l.map(|l| (n + 1, l)).map_err(|e| Error::io(origin, e)));
        let mut next = |what: &str| -> Result<(usize, String)> {
            lines
                .next()
                .transpose()?
                .ok_or_else(|| Error::InvalidModel(format!("{origin}: missing {what} line")))
        };
        let (_, header) = next("header")?;
        if header.trim() != MODEL_HEADER {
            return Err(Error::InvalidModel(format!(
                "{origin}: expected header `{MODEL_HEADER}`, found `{header}`"
            )));
        }
        fn parse<T: for<'de> Deserialize<'de>>(origin: &str, (n, line): (usize, String)) -> Result<T> {
            serde_json::from_str(&line).map_err(|e| Error::parse(origin, n, e.to_string()))
        }
        let head: HeaderLine = parse(origin, next("classes")?)?;
        let features: FeaturesLine = parse(origin, next("features")?)?;
        let scaling: ScalingLine = parse(origin, next("scaling")?)?;
        head.config.validate()?;

        let k = head.classes.len();
        let dim = features.features.len();
        let mut machines = Vec::new();
        for item in lines {
            let (n, line) = item?;
            if line.trim().is_empty() {
                continue;
            }
            let m: MachineLine = parse(origin, (n, line))?;
            if m.pair.0 >= m.pair.1 || m.pair.1 >= k {
                return Err(Error::parse(origin, n, format!("bad class pair {:?}", m.pair)));
            }
            if m.weights.iter().any(|&(i, _)| i as usize >= dim) {
                return Err(Error::parse(origin, n, "weight index out of range"));
            }
            machines.push(PairwiseMachine {
                first: m.pair.0,
                second: m.pair.1,
                weights: SparseVector::from_pairs(m.weights)?,
                bias: m.bias,
            });
        }
        if k < 2 || machines.len() != k * (k - 1) / 2 {
            return Err(Error::InvalidModel(format!(
                "{origin}: {} machines for {k} classes",
                machines.len()
            )));
        }
        if let Some(s) = &scaling.scaling {
            if s.ranges.len() != dim || s.ranges.iter().any(|(lo, hi)| lo > hi) {
                return Err(Error::InvalidModel(format!("{origin}: inconsistent scaling")));
            }
        }
        Ok(SvmModel {
            classes: head.classes,
            machines,
            index: FeatureIndex::from_names(features.features),
            scaling: scaling.scaling,
            c: head.c,
            config: head.config,
        })
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

#[derive(Serialize, Deserialize)]
struct HeaderLine {
    classes: Vec<Polarity>,
    c: f64,
    config: PolarityFeatureConfig,
}

#[derive(Serialize, Deserialize)]
struct FeaturesLine {
    features: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct ScalingLine {
    scaling: Option<MinMaxScaling>,
}

#[derive(Serialize, Deserialize)]
struct MachineLine {
    pair: (usize, usize),
    bias: f64,
    weights: Vec<(u32, f64)>,
}

fn json_line<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string(value).map_err(|e| Error::invalid(e.to_string()))
}

/// Always answers the most frequent training label, ties to label order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MajorityBaseline {
    pub label: Polarity,
}

impl MajorityBaseline {
    pub fn fit(labels: &[Polarity]) -> Result<Self> {
        let mut counts: BTreeMap<Polarity, usize> = BTreeMap::new();
        for &l in labels {
            *counts.entry(l).or_default() += 1;
        }
        counts
            .into_iter()
            .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
            .map(|(label, _)| MajorityBaseline { label })
            .ok_or_else(|| Error::invalid("no labels to fit a baseline on"))
    }

    pub fn predict(&self) -> Polarity {
        self.label
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polarity::smo::tests::assert_kkt;
    use Polarity::*;

    fn labeled(text: &str, p: Polarity) -> Sentence {
        let mut s = Sentence::from_text(text, text);
        s.opinions.push(Opinion {
            target: None,
            category: String::new(),
            polarity: Some(p),
        });
        s
    }

    fn toy() -> Vec<Sentence> {
        vec![
            labeled("great food", Positive),
            labeled("great staff", Positive),
            labeled("awful food", Negative),
            labeled("awful staff", Negative),
            labeled("ok food", Neutral),
            labeled("ok staff", Neutral),
        ]
    }

    #[test]
    fn three_classes_three_machines_and_perfect_training_accuracy() {
        let sentences = toy();
        let data = labeled_opinions(&sentences);
        let m = train_multiclass(&data, &PolarityFeatureConfig::default(), &SvmOptions::default()).unwrap();
        assert_eq!(m.classes, vec![Positive, Negative, Neutral]);
        assert_eq!(m.machines.len(), 3);
        for d in &data {
            assert_eq!(m.predict(d.sentence, d.opinion), d.label);
        }
    }

    #[test]
    fn single_class_is_an_error() {
        let sentences = vec![labeled("good", Positive), labeled("nice", Positive)];
        let data = labeled_opinions(&sentences);
        assert!(train_multiclass(&data, &PolarityFeatureConfig::default(), &SvmOptions::default()).is_err());
    }

    #[test]
    fn unlabeled_opinions_are_skipped() {
        let mut s = labeled("good", Positive);
        s.opinions.push(Opinion::default());
        assert_eq!(labeled_opinions(&[s]).len(), 1);
    }

    #[test]
    fn scaling_maps_into_unit_interval() {
        let v = vec![
            SparseVector::from_pairs([(0, 2.0), (1, 3.0), (2, 5.0)]).unwrap(),
            SparseVector::from_pairs([(0, 4.0), (2, 5.0)]).unwrap(),
            SparseVector::from_pairs([(0, 6.0), (1, 1.0), (2, 5.0)]).unwrap(),
        ];
        let s = MinMaxScaling::fit(&v, 3).unwrap();
        assert_eq!(s.ranges, vec![(2.0, 6.0), (0.0, 3.0), (5.0, 5.0)]);
        let scaled: Vec<SparseVector> = v.iter().map(|x| s.apply(x)).collect();
        for x in &scaled {
            assert!(x.iter().all(|(_, y)| (0.0..=1.0).contains(&y)));
            assert_eq!(x.get(2), 0.0);
        }
        assert_eq!(scaled[0].get(0), 0.0);
        assert_eq!(scaled[2].get(0), 1.0);
        let unseen = SparseVector::from_pairs([(0, 100.0), (7, 1.0)]).unwrap();
        assert_eq!(s.apply(&unseen).iter().collect::<Vec<_>>(), vec![(0, 1.0)]);
        let negative = vec![SparseVector::from_pairs([(0, -1.0)]).unwrap()];
        assert!(MinMaxScaling::fit(&negative, 1).is_err());
    }

    fn zero_model(classes: Vec<Polarity>) -> SvmModel {
        let k = classes.len();
        let machines = (0..k)
            .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
            .map(|(first, second)| PairwiseMachine {
                first,
                second,
                weights: SparseVector::default(),
                bias: 0.0,
            })
            .collect();
        SvmModel {
            classes,
            machines,
            index: FeatureIndex::default(),
            scaling: None,
            c: 1.0,
            config: PolarityFeatureConfig::default(),
        }
    }

    #[test]
    fn all_zero_machines_pick_first_class() {
        let m = zero_model(vec![Positive, Negative, Neutral]);
        assert_eq!(m.vote(&SparseVector::default()), Positive);
    }

    #[test]
    fn cyclic_tie_breaks_by_decision_strength() {
        let mut m = zero_model(vec![Positive, Negative, Neutral]);
        // one vote each: pos over neg by 0.1, neu over pos by 0.2, neg over neu by 2.0
        m.machines[0].bias = 0.1;
        m.machines[1].bias = -0.2;
        m.machines[2].bias = 2.0;
        assert_eq!(m.vote(&SparseVector::default()), Negative);
    }

    #[test]
    fn binary_model_follows_sign() {
        let mut m = zero_model(vec![Positive, Negative]);
        m.machines[0].weights = SparseVector::from_pairs([(0, 1.0)]).unwrap();
        m.machines[0].bias = -0.5;
        assert_eq!(m.vote(&SparseVector::from_pairs([(0, 1.0)]).unwrap()), Positive);
        assert_eq!(m.vote(&SparseVector::default()), Negative);
    }

    #[test]
    fn model_file_round_trip_is_exact() {
        let sentences = toy();
        let data = labeled_opinions(&sentences);
        let m = train_multiclass(&data, &PolarityFeatureConfig::default(), &SvmOptions::default()).unwrap();
        let mut buf = Vec::new();
        m.write(&mut buf).unwrap();
        assert!(buf.starts_with(b"elixa-pol v1\n"));
        let back = SvmModel::read(buf.as_slice(), "t").unwrap();
        assert_eq!(back, m);
        let mut again = Vec::new();
        back.write(&mut again).unwrap();
        assert_eq!(again, buf);
    }

    #[test]
    fn training_is_deterministic() {
        let sentences = toy();
        let data = labeled_opinions(&sentences);
        let write = || {
            let m = train_multiclass(&data, &PolarityFeatureConfig::default(), &SvmOptions::default()).unwrap();
            let mut buf = Vec::new();
            m.write(&mut buf).unwrap();
            buf
        };
        assert_eq!(write(), write());
    }

    #[test]
    fn two_class_model_matches_its_binary_machine() {
        let sentences: Vec<Sentence> = toy()
            .into_iter()
            .filter(|s| s.opinions[0].polarity != Some(Neutral))
            .collect();
        let data = labeled_opinions(&sentences);
        let m = train_multiclass(&data, &PolarityFeatureConfig::default(), &SvmOptions::default()).unwrap();
        let samples: Vec<(SparseVector, f64)> = data
            .iter()
            .map(|d| {
                let y = if d.label == m.classes[0] { 1.0 } else { -1.0 };
                (m.vectorize(d.sentence, d.opinion), y)
            })
            .collect();
        let binary = smo_train_binary(&samples, &SmoOptions::default()).unwrap();
        assert_kkt(&samples, &binary, 1.0, 1e-3);
        for (x, _) in &samples {
            let expected = if binary.decision(x) >= 0.0 {
                m.classes[0]
            } else {
                m.classes[1]
            };
            assert_eq!(m.vote(x), expected);
        }
    }

    #[test]
    fn majority_baseline() {
        assert_eq!(
            MajorityBaseline::fit(&[Negative, Neutral, Negative]).unwrap().predict(),
            Negative
        );
        assert_eq!(MajorityBaseline::fit(&[Neutral, Positive]).unwrap().predict(), Positive);
        assert!(MajorityBaseline::fit(&[]).is_err());
    }
}
