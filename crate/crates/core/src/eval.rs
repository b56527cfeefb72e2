//! Span precision/recall/F1, accuracy, cross-validation fold plans and
//! report tables.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::Hash;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanPrediction {
    pub sentence_id: String,
    pub spans: BTreeSet<(usize, usize)>,
}

impl SpanPrediction {
    pub fn new(sentence_id: impl Into<String>, spans: impl IntoIterator<Item = (usize, usize)>) -> Self {
        SpanPrediction {
            sentence_id: sentence_id.into(),
            spans: spans.into_iter().collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    /// Builds P/R/F1 from counts with 0/0 := 0.
    pub fn from_counts(matched: usize, predicted: usize, gold: usize) -> Self {
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let precision = ratio(matched, predicted);
        let recall = ratio(matched, gold);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Prf { precision, recall, f1 }
    }

    pub fn mean(values: &[Prf]) -> Prf {
        if values.is_empty() {
            return Prf::default();
        }
        let n = values.len() as f64;
        Prf {
            precision: values.iter().map(|p| p.precision).sum::<f64>() / n,
            recall: values.iter().map(|p| p.recall).sum::<f64>() / n,
            f1: values.iter().map(|p| p.f1).sum::<f64>() / n,
        }
    }
}

/// Exact-match span precision, recall and F1 over a set of sentences.
pub fn span_prf(gold: &[SpanPrediction], pred: &[SpanPrediction]) -> Result<Prf> {
    let index = |items: &[SpanPrediction]| -> Result<BTreeMap<String, BTreeSet<(usize, usize)>>> {
        let mut map = BTreeMap::new();
        for item in items {
            if map.insert(item.sentence_id.clone(), item.spans.clone()).is_some() {
                return Err(Error::invalid(format!("duplicate sentence id `{}`", item.sentence_id)));
            }
        }
        Ok(map)
    };
    let gold = index(gold)?;
    let pred = index(pred)?;
    if !gold.keys().eq(pred.keys()) {
        let missing = gold
            .keys()
            .find(|k| !pred.contains_key(*k))
            .or_else(|| pred.keys().find(|k| !gold.contains_key(*k)));
        return Err(Error::invalid(format!(
            "gold and predicted sentence ids differ (e.g. `{}`)",
            missing.map(String::as_str).unwrap_or("")
        )));
    }
    let mut matched = 0;
    let mut n_pred = 0;
    let mut n_gold = 0;
    for (id, g) in &gold {
        let p = &pred[id];
        matched += g.intersection(p).count();
        n_pred += p.len();
        n_gold += g.len();
    }
    Ok(Prf::from_counts(matched, n_pred, n_gold))
}

pub fn accuracy<T: PartialEq>(gold: &[T], pred: &[T]) -> Result<f64> {
    if gold.len() != pred.len() {
        return Err(Error::invalid(format!(
            "{} gold labels but {} predictions",
            gold.len(),
            pred.len()
        )));
    }
    if gold.is_empty() {
        return Err(Error::invalid("accuracy of an empty label set"));
    }
    let correct = gold.iter().zip(pred).filter(|(g, p)| g == p).count();
    Ok(correct as f64 / gold.len() as f64)
}

/// Assignment of items to cross-validation folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    pub folds: usize,
    pub seed: u64,
    pub assignment: Vec<usize>,
}

impl FoldPlan {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&i| self.assignment[i] == fold)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&i| self.assignment[i] != fold)
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.folds];
        for &f in &self.assignment {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Seeded shuffle followed by round-robin assignment. With `strata`, items
/// are grouped by label (in label order) before the round-robin so every
/// label is spread evenly across folds.
pub fn make_folds<L: Ord + Hash + Clone>(n: usize, folds: usize, seed: u64, strata: Option<&[L]>) -> Result<FoldPlan> {
    if folds < 2 {
        return Err(Error::invalid(format!("need at least 2 folds, got {folds}")));
    }
    if folds > n {
        return Err(Error::invalid(format!("{folds} folds requested for {n} items")));
    }
    if let Some(labels) = strata {
        if labels.len() != n {
            return Err(Error::invalid("strata length differs from item count"));
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    if let Some(labels) = strata {
        // stable sort keeps the shuffled order inside each label group
        order.sort_by(|&a, &b| labels[a].cmp(&labels[b]));
    }
    let mut assignment = vec![0; n];
    for (position, &item) in order.iter().enumerate() {
        assignment[item] = position % folds;
    }
    Ok(FoldPlan {
        folds,
        seed,
        assignment,
    })
}

/// A small text table that renders aligned text or CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(headers: impl IntoIterator<Item = S>) -> Self {
        Table {
            headers: headers.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_row<S: Into<String>>(&mut self, row: impl IntoIterator<Item = S>) {
        self.rows.push(row.into_iter().map(Into::into).collect());
    }

    /// Precision/recall/F1 table, values as percentages with two decimals.
    pub fn prf(rows: &[(String, Prf)]) -> Table {
        let mut t = Table::new(["System", "Precision", "Recall", "F1"]);
        for (name, p) in rows {
            t.push_row([
                name.clone(),
                format!("{:.2}", 100.0 * p.precision),
                format!("{:.2}", 100.0 * p.recall),
                format!("{:.2}", 100.0 * p.f1),
            ]);
        }
        t
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        // writing to a Vec cannot fail
        w.write_record(&self.headers).expect("in-memory CSV");
        for r in &self.rows {
            w.write_record(r).expect("in-memory CSV");
        }
        String::from_utf8(w.into_inner().expect("in-memory CSV")).expect("CSV is UTF-8")
    }
}

impl fmt::Display for Table {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cols = self.headers.len();
        let mut widths: Vec<usize> = self.headers.iter().map(|h| h.chars().count()).collect();
        for r in &self.rows {
            for (i, cell) in r.iter().enumerate().take(cols) {
                widths[i] = widths[i].max(cell.chars().count());
            }
        }
        let line = |f: &mut fmt::Formatter<'_>, cells: &[String]| -> fmt::Result {
            for (i, cell) in cells.iter().enumerate().take(cols) {
                if i == 0 {
                    write!(f, "{:<w$}", cell, w = widths[i])?;
                } else {
                    write!(f, "  {:>w$}", cell, w = widths[i])?;
                }
            }
            writeln!(f)
        };
        line(f, &self.headers)?;
        let total: usize = widths.iter().sum::<usize>() + 2 * cols.saturating_sub(1);
        writeln!(f, "{}", "-".repeat(total))?;
        for r in &self.rows {
            line(f, r)?;
        }
        Ok(())
    }
}
