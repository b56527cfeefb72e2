use std::collections::BTreeMap;

use rayon::prelude::*;

use super::features::PolarityFeatureConfig;
use super::svm::{labeled_opinions, train_multiclass, LabeledOpinion, MajorityBaseline, SvmOptions};
use crate::corpus::{Polarity, Sentence};
use crate::error::{Error, Result};
use crate::eval::{accuracy, make_folds, FoldPlan, Table};

#[derive(Debug, Clone, PartialEq)]
pub struct PolarityCvReport {
    pub folds: Vec<f64>,
    /// Unweighted mean of the per-fold accuracies.
    pub mean: f64,
    pub stratified: bool,
}

/// Folds over labeled opinions, stratified by label unless some label has
/// fewer opinions than there are folds.
pub fn polarity_folds(labels: &[Polarity], folds: usize, seed: u64) -> Result<(FoldPlan, bool)> {
    let mut counts: BTreeMap<Polarity, usize> = BTreeMap::new();
    for &l in labels {
        *counts.entry(l).or_default() += 1;
    }
    if let Some((label, n)) = counts.iter().find(|(_, &n)| n < folds) {
        log::warn!("label {label} has {n} opinions for {folds} folds; using unstratified folds");
        return Ok((make_folds::<Polarity>(labels.len(), folds, seed, None)?, false));
    }
    Ok((make_folds(labels.len(), folds, seed, Some(labels))?, true))
}

fn subset<'a>(data: &[LabeledOpinion<'a>], indices: &[usize]) -> Vec<LabeledOpinion<'a>> {
    indices.iter().map(|&i| data[i]).collect()
}

/// k-fold cross-validated accuracy over every labeled opinion.
pub fn cross_validate_polarity(
    sentences: &[Sentence],
    config: &PolarityFeatureConfig,
    opts: &SvmOptions,
    folds: usize,
    seed: u64,
) -> Result<PolarityCvReport> {
    let data = labeled_opinions(sentences);
    if data.len() < folds {
        return Err(Error::invalid(format!(
            "{} labeled opinions cannot be split into {folds} folds",
            data.len()
        )));
    }
    let labels: Vec<Polarity> = data.iter().map(|d| d.label).collect();
    let (plan, stratified) = polarity_folds(&labels, folds, seed)?;
    let scores = (0..folds)
        .into_par_iter()
        .map(|f| {
            let model = train_multiclass(&subset(&data, &plan.train_indices(f)), config, opts)?;
            let test = subset(&data, &plan.test_indices(f));
            let gold: Vec<Polarity> = test.iter().map(|d| d.label).collect();
            let pred: Vec<Polarity> = test.iter().map(|d| model.predict(d.sentence, d.opinion)).collect();
            accuracy(&gold, &pred)
        })
        .collect::<Result<Vec<f64>>>()?;
    for (f, a) in scores.iter().enumerate() {
        log::info!("fold {}: accuracy {:.4}", f + 1, a);
    }
    Ok(PolarityCvReport {
        mean: scores.iter().sum::<f64>() / scores.len() as f64,
        folds: scores,
        stratified,
    })
}

/// Cross-validated accuracy of the majority-class baseline, on the same
/// folds [`cross_validate_polarity`] uses.
pub fn cross_validate_majority(sentences: &[Sentence], folds: usize, seed: u64) -> Result<PolarityCvReport> {
    let labels: Vec<Polarity> = labeled_opinions(sentences).iter().map(|d| d.label).collect();
    if labels.len() < folds {
        return Err(Error::invalid(format!(
            "{} labeled opinions cannot be split into {folds} folds",
            labels.len()
        )));
    }
    let (plan, stratified) = polarity_folds(&labels, folds, seed)?;
    let mut scores = Vec::with_capacity(folds);
    for f in 0..folds {
        let train: Vec<Polarity> = plan.train_indices(f).iter().map(|&i| labels[i]).collect();
        let gold: Vec<Polarity> = plan.test_indices(f).iter().map(|&i| labels[i]).collect();
        let baseline = MajorityBaseline::fit(&train)?;
        scores.push(accuracy(&gold, &vec![baseline.predict(); gold.len()])?);
    }
    Ok(PolarityCvReport {
        mean: scores.iter().sum::<f64>() / scores.len() as f64,
        folds: scores,
        stratified,
    })
}

/// Cross-validates every named configuration in order and tabulates mean
/// accuracy as a percentage.
pub fn ablation_run(
    sentences: &[Sentence],
    configs: &[(String, PolarityFeatureConfig)],
    opts: &SvmOptions,
    folds: usize,
    seed: u64,
) -> Result<Table> {
    let mut table = Table::new(["Features", "Accuracy"]);
    for (name, config) in configs {
        let report = cross_validate_polarity(sentences, config, opts, folds, seed)?;
        log::info!("{name}: {:.4}", report.mean);
        table.push_row([name.clone(), format!("{:.2}", 100.0 * report.mean)]);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Opinion;
    use Polarity::*;

    fn dataset() -> Vec<Sentence> {
        let fillers = [
            "the", "food", "was", "staff", "place", "really", "today", "our", "meal", "service",
        ];
        let mut out = Vec::new();
        for i in 0..60 {
            let (cue, label) = match i % 3 {
                0 => ("delicious", Positive),
                1 => ("horrible", Negative),
                _ => ("average", Neutral),
            };
            let text = format!(
                "{} {} {cue} {}",
                fillers[i % 10],
                fillers[(i / 3) % 10],
                fillers[(i * 7) % 10]
            );
            let mut s = Sentence::from_text(format!("s{i}"), text);
            s.opinions.push(Opinion {
                target: None,
                category: String::new(),
                polarity: Some(label),
            });
            out.push(s);
        }
        out
    }

    #[test]
    fn learnable_dataset_scores_high() {
        let r = cross_validate_polarity(
            &dataset(),
            &PolarityFeatureConfig::default(),
            &SvmOptions::default(),
            10,
            7,
        )
        .unwrap();
        assert!(r.stratified);
        assert_eq!(r.folds.len(), 10);
        assert!(r.mean >= 0.95, "{}", r.mean);
    }

    #[test]
    fn folds_are_reproducible() {
        let labels: Vec<Polarity> = labeled_opinions(&dataset()).iter().map(|d| d.label).collect();
        let (a, _) = polarity_folds(&labels, 10, 3).unwrap();
        let (b, _) = polarity_folds(&labels, 10, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rare_label_falls_back_to_unstratified() {
        let labels = [Positive, Positive, Positive, Negative, Positive, Positive];
        let (plan, stratified) = polarity_folds(&labels, 3, 7).unwrap();
        assert!(!stratified);
        assert_eq!(plan.fold_sizes(), vec![2, 2, 2]);
    }

    #[test]
    fn majority_baseline_matches_class_share() {
        let mut data = dataset();
        for s in data.iter_mut().skip(1).step_by(3) {
            s.opinions[0].polarity = Some(Positive);
        }
        // 40 positive, 20 neutral: every stratified test fold is two-thirds positive
        let r = cross_validate_majority(&data, 10, 7).unwrap();
        assert!((r.mean - 40.0 / 60.0).abs() < 1e-12);
    }

    #[test]
    fn ablation_keeps_order_and_identical_configs_agree() {
        let configs = vec![
            ("1lgram".to_string(), PolarityFeatureConfig::default()),
            (
                "2lgram".to_string(),
                PolarityFeatureConfig {
                    ngram_max: 2,
                    ..Default::default()
                },
            ),
            ("1lgram again".to_string(), PolarityFeatureConfig::default()),
        ];
        let t = ablation_run(&dataset(), &configs, &SvmOptions::default(), 5, 7).unwrap();
        let names: Vec<&str> = t.rows.iter().map(|r| r[0].as_str()).collect();
        assert_eq!(names, vec!["1lgram", "2lgram", "1lgram again"]);
        assert_eq!(t.rows[0][1], t.rows[2][1]);
    }
}
