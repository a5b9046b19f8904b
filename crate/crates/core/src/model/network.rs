//! One-hidden-layer per-pixel segmenter: 8 inputs, 16 rectified hidden
//! units, one sigmoid output.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::imaging::Image;
use crate::metrics::ProbabilityMap;
use crate::num::Real;
use crate::rng::RngStream;

use super::features::{extract_features, FeatureVector, Reference, FEATURE_DIM};
use super::loss::{sigmoid, weighted_bce, ClassWeights};

pub const HIDDEN: usize = 16;

const W1: usize = 0;
const B1: usize = W1 + FEATURE_DIM * HIDDEN;
const W2: usize = B1 + HIDDEN;
const B2: usize = W2 + HIDDEN;
/// Total number of trainable scalars.
pub const PARAM_COUNT: usize = B2 + 1;

/// Pixels per block in the fixed-order gradient reduction.
const BLOCK: usize = 1024;

/// Network weights stored in one flat vector:
/// hidden weights (input-major), hidden bias, output weights, output bias.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams<T> {
    flat: Vec<T>,
}

impl<T: Real> ModelParams<T> {
    pub fn zeros() -> Self {
        Self {
            flat: vec![T::zero(); PARAM_COUNT],
        }
    }

    /// Weights uniform in `[-0.1, 0.1]`, biases zero.
    pub fn init(rng: &mut RngStream) -> Self {
        let mut p = Self::zeros();
        for i in (W1..B1).chain(W2..B2) {
            p.flat[i] = T::of(rng.real_in(-0.1, 0.1));
        }
        p
    }

    pub fn from_flat(flat: Vec<T>) -> Result<Self> {
        if flat.len() != PARAM_COUNT {
            return Err(Error::ShapeMismatch(format!(
                "expected {PARAM_COUNT} parameters, got {}",
                flat.len()
            )));
        }
        if flat.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("non-finite parameter".into()));
        }
        Ok(Self { flat })
    }

    pub fn as_flat(&self) -> &[T] {
        &self.flat
    }

    pub fn as_flat_mut(&mut self) -> &mut [T] {
        &mut self.flat
    }

    #[inline]
    pub fn hidden_weight(&self, input: usize, unit: usize) -> T {
        self.flat[W1 + input * HIDDEN + unit]
    }

    pub fn hidden_weights(&self) -> &[T] {
        &self.flat[W1..B1]
    }

    pub fn hidden_bias(&self) -> &[T] {
        &self.flat[B1..W2]
    }

    pub fn output_weights(&self) -> &[T] {
        &self.flat[W2..B2]
    }

    pub fn output_bias(&self) -> T {
        self.flat[B2]
    }

    pub fn set_output_bias(&mut self, v: T) {
        self.flat[B2] = v;
    }

    pub fn set_hidden_weight(&mut self, input: usize, unit: usize, v: T) {
        self.flat[W1 + input * HIDDEN + unit] = v;
    }

    pub fn set_hidden_bias(&mut self, unit: usize, v: T) {
        self.flat[B1 + unit] = v;
    }

    pub fn set_output_weight(&mut self, unit: usize, v: T) {
        self.flat[W2 + unit] = v;
    }

    fn hidden(&self, f: &FeatureVector<T>) -> [T; HIDDEN] {
        let mut a: [T; HIDDEN] = self.flat[B1..W2].try_into().expect("hidden bias");
        for (i, &fi) in f.iter().enumerate() {
            if fi == T::zero() {
                continue;
            }
            let row = &self.flat[W1 + i * HIDDEN..W1 + (i + 1) * HIDDEN];
            for (aj, &wij) in a.iter_mut().zip(row) {
                *aj = *aj + fi * wij;
            }
        }
        a
    }

    /// Output logit for one feature vector.
    #[inline]
    pub fn logit(&self, f: &FeatureVector<T>) -> T {
        let a = self.hidden(f);
        let w2 = &self.flat[W2..B2];
        a.iter().zip(w2).fold(self.flat[B2], |acc, (&aj, &wj)| {
            acc + aj.max(T::zero()) * wj
        })
    }

    /// Accumulates loss and parameter gradient of one pixel into `grad`.
    fn backprop(
        &self,
        f: &FeatureVector<T>,
        target: bool,
        w: &ClassWeights<T>,
        grad: &mut [T],
    ) -> T {
        let a = self.hidden(f);
        let w2 = &self.flat[W2..B2];
        let mut x = self.flat[B2];
        for (&aj, &wj) in a.iter().zip(w2) {
            x = x + aj.max(T::zero()) * wj;
        }
        let (loss, dx) = weighted_bce(x, target, w);
        grad[B2] = grad[B2] + dx;
        for j in 0..HIDDEN {
            if a[j] <= T::zero() {
                continue;
            }
            grad[W2 + j] = grad[W2 + j] + dx * a[j];
            let da = dx * w2[j];
            grad[B1 + j] = grad[B1 + j] + da;
            for (i, &fi) in f.iter().enumerate() {
                grad[W1 + i * HIDDEN + j] = grad[W1 + i * HIDDEN + j] + da * fi;
            }
        }
        loss
    }
}

/// Mean weighted cross-entropy over a batch of pixels.
pub fn batch_loss<T: Real>(
    params: &ModelParams<T>,
    features: &[FeatureVector<T>],
    targets: &[bool],
    weights: &ClassWeights<T>,
) -> T {
    let sum = features
        .iter()
        .zip(targets)
        .fold(T::zero(), |acc, (f, &t)| {
            acc + weighted_bce(params.logit(f), t, weights).0
        });
    sum / T::of_usize(features.len())
}

/// Mean weighted cross-entropy and its gradient with respect to every
/// parameter.
///
/// Pixels are split into fixed blocks whose partial sums are combined in
/// block order, so the result is identical for any thread count.
pub fn batch_loss_and_gradient<T: Real>(
    params: &ModelParams<T>,
    features: &[FeatureVector<T>],
    targets: &[bool],
    weights: &ClassWeights<T>,
) -> Result<(T, Vec<T>)> {
    if features.len() != targets.len() || features.is_empty() {
        return Err(Error::ShapeMismatch(format!(
            "{} feature vectors for {} targets",
            features.len(),
            targets.len()
        )));
    }
    let partials: Vec<(T, Vec<T>)> = features
        .par_chunks(BLOCK)
        .zip(targets.par_chunks(BLOCK))
        .map(|(fs, ts)| {
            let mut grad = vec![T::zero(); PARAM_COUNT];
            let mut loss = T::zero();
            for (f, &t) in fs.iter().zip(ts) {
                loss = loss + params.backprop(f, t, weights, &mut grad);
            }
            (loss, grad)
        })
        .collect();
    let mut loss = T::zero();
    let mut grad = vec![T::zero(); PARAM_COUNT];
    for (l, g) in partials {
        loss = loss + l;
        for (a, b) in grad.iter_mut().zip(g) {
            *a = *a + b;
        }
    }
    let n = T::of_usize(features.len());
    grad.iter_mut().for_each(|g| *g = *g / n);
    Ok((loss / n, grad))
}

/// Foreground probability of every pixel of `frame`.
pub fn predict<T: Real>(
    params: &ModelParams<T>,
    frame: &Image,
    reference: &Reference<T>,
) -> Result<ProbabilityMap<T>> {
    let features = extract_features(frame, reference)?;
    let values = features
        .par_iter()
        .map(|f| sigmoid(params.logit(f)))
        .collect();
    let (w, h) = frame.dims();
    ProbabilityMap::new(w, h, values)
}
