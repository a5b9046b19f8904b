//! Pixel-level binary classification metrics with dataset-level pooling and
//! threshold sweeps.

use std::io::Write;
use std::ops::{Add, AddAssign};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::GroundTruth;
use crate::num::Real;

/// Per-pixel foreground probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityMap<T> {
    width: usize,
    height: usize,
    values: Vec<T>,
}

impl<T: Real> ProbabilityMap<T> {
    pub fn new(width: usize, height: usize, values: Vec<T>) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::ShapeMismatch(format!(
                "{width}x{height} map needs {} values, got {}",
                width * height,
                values.len()
            )));
        }
        if let Some(v) = values
            .iter()
            .find(|v| !(**v >= T::zero() && **v <= T::one()))
        {
            return Err(Error::Invalid(format!("probability {v} outside [0, 1]")));
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    /// Hard 0/1 map from labels.
    pub fn from_ground_truth(gt: &GroundTruth) -> Self {
        Self {
            width: gt.width(),
            height: gt.height(),
            values: gt
                .labels()
                .iter()
                .map(|&b| if b { T::one() } else { T::zero() })
                .collect(),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> T {
        self.values[y * self.width + x]
    }
}

/// Pixel tallies of one or more frames.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionCounts {
    pub fn new(tp: u64, fp: u64, fn_: u64, tn: u64) -> Self {
        Self { tp, fp, fn_, tn }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    #[inline]
    pub fn record(&mut self, predicted: bool, actual: bool) {
        match (predicted, actual) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, true) => self.fn_ += 1,
            (false, false) => self.tn += 1,
        }
    }
}

impl Add for ConfusionCounts {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self {
            tp: self.tp + o.tp,
            fp: self.fp + o.fp,
            fn_: self.fn_ + o.fn_,
            tn: self.tn + o.tn,
        }
    }
}

impl AddAssign for ConfusionCounts {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl std::iter::Sum for ConfusionCounts {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::default(), Add::add)
    }
}

/// The nine reported metrics, in report column order.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport<T> {
    pub recall: T,
    pub specificity: T,
    pub fpr: T,
    pub fnr: T,
    pub pwc: T,
    pub fm: T,
    pub precision: T,
    pub iou: T,
    pub matthews: T,
}

/// Column names in report order.
pub const METRIC_COLUMNS: [&str; 9] = [
    "recall",
    "specificity",
    "fpr",
    "fnr",
    "pwc",
    "fm",
    "precision",
    "iou",
    "matthews",
];

impl<T: Real> MetricsReport<T> {
    pub fn values(&self) -> [T; 9] {
        [
            self.recall,
            self.specificity,
            self.fpr,
            self.fnr,
            self.pwc,
            self.fm,
            self.precision,
            self.iou,
            self.matthews,
        ]
    }
}

/// One row of a threshold sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport<T> {
    pub threshold: T,
    #[serde(flatten)]
    pub metrics: MetricsReport<T>,
}

/// Tallies `pred >= threshold` against the labels.
pub fn accumulate<T: Real>(
    pred: &ProbabilityMap<T>,
    gt: &GroundTruth,
    threshold: T,
) -> Result<ConfusionCounts> {
    if pred.dims() != gt.dims() {
        return Err(Error::dims(gt.dims(), pred.dims()));
    }
    check_threshold(threshold)?;
    let mut counts = ConfusionCounts::default();
    for (&p, &t) in pred.values().iter().zip(gt.labels()) {
        counts.record(p >= threshold, t);
    }
    Ok(counts)
}

fn check_threshold<T: Real>(threshold: T) -> Result<()> {
    if !(threshold >= T::zero() && threshold <= T::one()) {
        return Err(Error::Invalid(format!(
            "threshold {threshold} outside [0, 1]"
        )));
    }
    Ok(())
}

fn ratio<T: Real>(num: u64, den: u64, fallback: T) -> T {
    if den == 0 {
        fallback
    } else {
        T::of_u64(num) / T::of_u64(den)
    }
}

/// F-measure from precision and recall; zero when both are zero.
pub fn fm_from_pr<T: Real>(precision: T, recall: T) -> T {
    let sum = precision + recall;
    if sum == T::zero() {
        T::zero()
    } else {
        T::of(2.0) * precision * recall / sum
    }
}

/// Evaluates all metrics. Undefined ratios fall back to 0, except
/// specificity (1 when there are no negatives) and FNR (`1 - recall`).
pub fn compute_metrics<T: Real>(c: &ConfusionCounts) -> Result<MetricsReport<T>> {
    let total = c.total();
    if total == 0 {
        return Err(Error::EmptyCounts);
    }
    let precision = ratio(c.tp, c.tp + c.fp, T::zero());
    let recall = ratio(c.tp, c.tp + c.fn_, T::zero());
    let specificity = ratio(c.tn, c.tn + c.fp, T::one());
    let fpr = ratio(c.fp, c.fp + c.tn, T::zero());
    let fnr = ratio(c.fn_, c.fn_ + c.tp, T::one());
    let fm = fm_from_pr(precision, recall);
    let iou = ratio(c.tp, c.tp + c.fp + c.fn_, T::zero());
    let pwc = T::of(100.0) * T::of_u64(c.fp + c.fn_) / T::of_u64(total);

    let factors = [c.tp + c.fp, c.tp + c.fn_, c.tn + c.fp, c.tn + c.fn_];
    let matthews = if factors.contains(&0) {
        T::zero()
    } else {
        let num = c.tp as i128 * c.tn as i128 - c.fp as i128 * c.fn_ as i128;
        let num = T::from_i128(num).expect("i128 converts to real");
        let left = (T::of_u64(factors[0]) * T::of_u64(factors[1])).sqrt();
        let right = (T::of_u64(factors[2]) * T::of_u64(factors[3])).sqrt();
        (num / left / right).max(-T::one()).min(T::one())
    };

    Ok(MetricsReport {
        recall,
        specificity,
        fpr,
        fnr,
        pwc,
        fm,
        precision,
        iou,
        matthews,
    })
}

/// `0.05, 0.10, ..., 0.95`.
pub fn default_thresholds<T: Real>() -> Vec<T> {
    (1..=19).map(|i| T::of(i as f64 / 20.0)).collect()
}

/// Pools counts over all frames for each threshold and reports one row per
/// threshold, in input order.
pub fn sweep_thresholds<T: Real>(
    preds: &[ProbabilityMap<T>],
    gts: &[GroundTruth],
    thresholds: &[T],
) -> Result<Vec<ThresholdReport<T>>> {
    if preds.is_empty() || preds.len() != gts.len() {
        return Err(Error::Invalid(format!(
            "need matching non-empty sequences, got {} predictions and {} labels",
            preds.len(),
            gts.len()
        )));
    }
    if thresholds.is_empty() {
        return Err(Error::Invalid("no thresholds given".into()));
    }
    for &t in thresholds {
        check_threshold(t)?;
    }
    let per_frame: Vec<Vec<ConfusionCounts>> = preds
        .par_iter()
        .zip(gts.par_iter())
        .map(|(p, g)| {
            thresholds
                .iter()
                .map(|&t| accumulate(p, g, t))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    thresholds
        .iter()
        .enumerate()
        .map(|(i, &threshold)| {
            let pooled: ConfusionCounts = per_frame.iter().map(|f| f[i]).sum();
            Ok(ThresholdReport {
                threshold,
                metrics: compute_metrics(&pooled)?,
            })
        })
        .collect()
}

/// Row with the highest F-measure; ties go to the smaller threshold.
pub fn best_threshold<T: Real>(sweep: &[ThresholdReport<T>]) -> Option<ThresholdReport<T>> {
    sweep.iter().copied().reduce(|best, row| {
        let better = row.metrics.fm > best.metrics.fm
            || (row.metrics.fm == best.metrics.fm && row.threshold < best.threshold);
        if better {
            row
        } else {
            best
        }
    })
}

/// Writes a sweep as CSV with a `threshold` column followed by the metric columns.
pub fn write_sweep_csv<T: Real, W: Write>(sweep: &[ThresholdReport<T>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let to_io = |e: csv::Error| Error::Format(format!("csv: {e}"));
    let mut header = vec!["threshold"];
    header.extend(METRIC_COLUMNS);
    w.write_record(&header).map_err(to_io)?;
    for row in sweep {
        let mut fields = vec![row.threshold.to_string()];
        fields.extend(row.metrics.values().iter().map(|v| v.to_string()));
        w.write_record(&fields).map_err(to_io)?;
    }
    w.flush().map_err(|e| Error::io("<csv output>", e))
}
