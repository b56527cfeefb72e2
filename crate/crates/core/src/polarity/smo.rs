use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sparse vector as `(index, value)` pairs sorted by index, zeros omitted.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SparseVector {
    entries: Vec<(u32, f64)>,
}

impl SparseVector {
    /// Builds a vector from unordered pairs; duplicate indices are summed
    /// and zeros dropped. Non-finite values are an error.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u32, f64)>) -> Result<Self> {
        let mut entries: Vec<(u32, f64)> = pairs.into_iter().collect();
        if let Some((i, v)) = entries.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite value {v} at index {i}")));
        }
        entries.sort_by_key(|&(i, _)| i);
        let mut merged: Vec<(u32, f64)> = Vec::with_capacity(entries.len());
        for (i, v) in entries {
            match merged.last_mut() {
                Some((j, acc)) if *j == i => *acc += v,
                _ => merged.push((i, v)),
            }
        }
        merged.retain(|&(_, v)| v != 0.0);
        Ok(SparseVector { entries: merged })
    }

    pub fn dense(values: &[f64]) -> Result<Self> {
        Self::from_pairs(values.iter().enumerate().map(|(i, &v)| (i as u32, v)))
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, index: u32) -> f64 {
        self.entries
            .binary_search_by_key(&index, |&(i, _)| i)
            .map_or(0.0, |k| self.entries[k].1)
    }

    /// One past the largest index, or 0 when empty.
    pub fn dim(&self) -> usize {
        self.entries.last().map_or(0, |&(i, _)| i as usize + 1)
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (mut a, mut b) = (self.entries.iter().peekable(), other.entries.iter().peekable());
        let mut sum = 0.0;
        while let (Some(&&(i, x)), Some(&&(j, y))) = (a.peek(), b.peek()) {
            match i.cmp(&j) {
                std::cmp::Ordering::Less => {
                    a.next();
                }
                std::cmp::Ordering::Greater => {
                    b.next();
                }
                std::cmp::Ordering::Equal => {
                    sum += x * y;
                    a.next();
                    b.next();
                }
            }
        }
        sum
    }

    pub fn dot_dense(&self, w: &[f64]) -> f64 {
        self.entries
            .iter()
            .map(|&(i, v)| w.get(i as usize).map_or(0.0, |wi| wi * v))
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoOptions {
    /// Box constraint on every multiplier.
    pub c: f64,
    /// KKT tolerance.
    pub tol: f64,
    /// Smallest curvature and step treated as nonzero.
    pub eps: f64,
    pub max_iterations: usize,
}

impl Default for SmoOptions {
    fn default() -> Self {
        SmoOptions {
            c: 1.0,
            tol: 1e-3,
            eps: 1e-12,
            max_iterations: 10_000_000,
        }
    }
}

/// Solution of one binary soft-margin problem; the decision value of `x`
/// is `w·x + bias`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinarySvm {
    pub w: Vec<f64>,
    pub bias: f64,
    pub alphas: Vec<f64>,
    pub iterations: usize,
}

impl BinarySvm {
    pub fn decision(&self, x: &SparseVector) -> f64 {
        x.dot_dense(&self.w) + self.bias
    }
}

/// Dual objective `Σα − ½ΣΣ αᵢαⱼyᵢyⱼ xᵢ·xⱼ`.
pub fn dual_objective(samples: &[(SparseVector, f64)], alphas: &[f64]) -> f64 {
    let mut quad = 0.0;
    for (i, (xi, yi)) in samples.iter().enumerate() {
        for (j, (xj, yj)) in samples.iter().enumerate() {
            quad += alphas[i] * alphas[j] * yi * yj * xi.dot(xj);
        }
    }
    alphas.iter().sum::<f64>() - 0.5 * quad
}

struct Solver<'a> {
    x: &'a [(SparseVector, f64)],
    c: f64,
    eps: f64,
    alpha: Vec<f64>,
    /// `w·xᵢ − yᵢ` for the current multipliers.
    f: Vec<f64>,
    w: Vec<f64>,
    norms: Vec<f64>,
    /// Feature index to `(sample, value)` postings.
    columns: Vec<Vec<(usize, f64)>>,
}

impl Solver<'_> {
    fn y(&self, i: usize) -> f64 {
        self.x[i].1
    }

    /// Multiplier may move so that `yᵢαᵢ` increases.
    fn in_up(&self, i: usize) -> bool {
        let (a, y) = (self.alpha[i], self.y(i));
        if y > 0.0 {
            a < self.c
        } else {
            a > 0.0
        }
    }

    /// Multiplier may move so that `yᵢαᵢ` decreases.
    fn in_low(&self, i: usize) -> bool {
        let (a, y) = (self.alpha[i], self.y(i));
        if y > 0.0 {
            a > 0.0
        } else {
            a < self.c
        }
    }

    /// `(i_up, b_up, i_low, b_low)`: the smallest `F` over the up set and
    /// the largest over the low set, first index on ties.
    fn extremes(&self) -> (usize, f64, usize, f64) {
        let (mut iu, mut bu) = (usize::MAX, f64::INFINITY);
        let (mut il, mut bl) = (usize::MAX, f64::NEG_INFINITY);
        for i in 0..self.x.len() {
            if self.in_up(i) && self.f[i] < bu {
                iu = i;
                bu = self.f[i];
            }
            if self.in_low(i) && self.f[i] > bl {
                il = i;
                bl = self.f[i];
            }
        }
        (iu, bu, il, bl)
    }

    /// Jointly optimises `α[i1]` and `α[i2]`. Returns whether either moved.
    fn take_step(&mut self, i1: usize, i2: usize) -> bool {
        if i1 == i2 {
            return false;
        }
        let c = self.c;
        let (a1, a2) = (self.alpha[i1], self.alpha[i2]);
        let (y1, y2) = (self.y(i1), self.y(i2));
        let (e1, e2) = (self.f[i1], self.f[i2]);
        let s = y1 * y2;
        let (lo, hi) = if s < 0.0 {
            ((a2 - a1).max(0.0), (c + a2 - a1).min(c))
        } else {
            ((a1 + a2 - c).max(0.0), (a1 + a2).min(c))
        };
        if lo >= hi {
            return false;
        }
        let k11 = self.norms[i1];
        let k22 = self.norms[i2];
        let k12 = self.x[i1].0.dot(&self.x[i2].0);
        let eta = k11 + k22 - 2.0 * k12;

        let mut new_a2 = if eta > self.eps {
            (a2 + y2 * (e1 - e2) / eta).clamp(lo, hi)
        } else {
            // flat direction: take the better end point
            let f1 = y1 * e1 - a1 * k11 - s * a2 * k12;
            let f2 = y2 * e2 - s * a1 * k12 - a2 * k22;
            let objective = |a2_end: f64| {
                let a1_end = a1 + s * (a2 - a2_end);
                a1_end * f1
                    + a2_end * f2
                    + 0.5 * a1_end * a1_end * k11
                    + 0.5 * a2_end * a2_end * k22
                    + s * a2_end * a1_end * k12
            };
            let (obj_lo, obj_hi) = (objective(lo), objective(hi));
            if obj_lo < obj_hi - self.eps {
                lo
            } else if obj_lo > obj_hi + self.eps {
                hi
            } else {
                a2
            }
        };
        if new_a2 < self.eps * c {
            new_a2 = 0.0;
        } else if new_a2 > c - self.eps * c {
            new_a2 = c;
        }
        let mut new_a1 = a1 + s * (a2 - new_a2);
        // a multiplier within rounding of a bound goes to the bound, with its
        // partner moved to keep Σ αy unchanged
        let snapped = if new_a1 < self.eps * c {
            Some(0.0)
        } else if new_a1 > c - self.eps * c {
            Some(c)
        } else {
            None
        };
        if let Some(bound) = snapped {
            new_a2 = (a2 + s * (a1 - bound)).clamp(0.0, c);
            new_a1 = bound;
        }
        if new_a1 == a1 && new_a2 == a2 {
            return false;
        }

        let d1 = y1 * (new_a1 - a1);
        let d2 = y2 * (new_a2 - a2);
        self.alpha[i1] = new_a1;
        self.alpha[i2] = new_a2;
        let mut delta: Vec<(u32, f64)> = self.x[i1]
            .0
            .iter()
            .map(|(k, v)| (k, d1 * v))
            .chain(self.x[i2].0.iter().map(|(k, v)| (k, d2 * v)))
            .collect();
        delta.sort_by_key(|&(k, _)| k);
        for (k, dv) in delta {
            let k = k as usize;
            self.w[k] += dv;
            for &(j, v) in &self.columns[k] {
                self.f[j] += dv * v;
            }
        }
        debug_assert!(self.feasible(), "dual feasibility violated");
        true
    }

    fn feasible(&self) -> bool {
        let tol = 1e-9 * (1.0 + self.c * self.x.len() as f64);
        let balance: f64 = self.alpha.iter().zip(self.x).map(|(a, (_, y))| a * y).sum();
        balance.abs() <= tol && self.alpha.iter().all(|&a| (0.0..=self.c).contains(&a))
    }
}

/// Trains a linear soft-margin SVM with sequential minimal optimisation.
/// Each step optimises the maximal violating pair of multipliers; training
/// stops once `b_low ≤ b_up + 2·tol`, which bounds every KKT violation of
/// the returned decision function by `tol`. Labels must be `+1` or `-1`
/// and both must occur.
pub fn smo_train_binary(samples: &[(SparseVector, f64)], opts: &SmoOptions) -> Result<BinarySvm> {
    if !(opts.c > 0.0 && opts.c.is_finite()) {
        return Err(Error::invalid(format!("C must be positive, got {}", opts.c)));
    }
    if let Some((_, y)) = samples.iter().find(|(_, y)| *y != 1.0 && *y != -1.0) {
        return Err(Error::invalid(format!("binary labels must be +1 or -1, got {y}")));
    }
    let positives = samples.iter().filter(|(_, y)| *y > 0.0).count();
    if positives == 0 || positives == samples.len() {
        return Err(Error::invalid("binary SVM training needs both classes"));
    }

    let dim = samples.iter().map(|(x, _)| x.dim()).max().unwrap_or(0);
    let mut columns = vec![Vec::new(); dim];
    for (j, (x, _)) in samples.iter().enumerate() {
        for (k, v) in x.iter() {
            columns[k as usize].push((j, v));
        }
    }
    let mut solver = Solver {
        x: samples,
        c: opts.c,
        eps: opts.eps,
        alpha: vec![0.0; samples.len()],
        f: samples.iter().map(|(_, y)| -y).collect(),
        w: vec![0.0; dim],
        norms: samples.iter().map(|(x, _)| x.dot(x)).collect(),
        columns,
    };

    let mut iterations = 0;
    loop {
        let (i_up, b_up, i_low, b_low) = solver.extremes();
        if b_low <= b_up + 2.0 * opts.tol {
            break;
        }
        if iterations >= opts.max_iterations {
            log::warn!("SMO stopped after {iterations} iterations with gap {}", b_low - b_up);
            break;
        }
        if !solver.take_step(i_low, i_up) {
            log::warn!("SMO made no progress on the maximal violating pair; stopping");
            break;
        }
        iterations += 1;
    }

    // recompute w and F from the multipliers to shed accumulated rounding
    let mut w = vec![0.0; dim];
    for ((x, y), &a) in samples.iter().zip(&solver.alpha) {
        if a != 0.0 {
            for (k, v) in x.iter() {
                w[k as usize] += a * y * v;
            }
        }
    }
    solver.f = samples.iter().map(|(x, y)| x.dot_dense(&w) - y).collect();
    let (_, b_up, _, b_low) = solver.extremes();
    Ok(BinarySvm {
        w,
        bias: -(b_up + b_low) / 2.0,
        alphas: solver.alpha,
        iterations,
    })
}
