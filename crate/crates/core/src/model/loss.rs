use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::GroundTruth;
use crate::num::Real;

/// Per-class loss weights `N / (2 N_f)` and `N / (2 N_b)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassWeights<T> {
    pub foreground: T,
    pub background: T,
}

pub fn class_weights<T: Real>(gts: &[GroundTruth]) -> Result<ClassWeights<T>> {
    let total: u64 = gts.iter().map(|g| g.labels().len() as u64).sum();
    let fg: u64 = gts.iter().map(|g| g.foreground_count() as u64).sum();
    let bg = total - fg;
    if fg == 0 || bg == 0 {
        return Err(Error::DegenerateLabels);
    }
    let n = T::of_u64(total);
    let two = T::of(2.0);
    Ok(ClassWeights {
        foreground: n / (two * T::of_u64(fg)),
        background: n / (two * T::of_u64(bg)),
    })
}

/// `log(1 + e^x)` without overflow.
#[inline]
fn softplus<T: Real>(x: T) -> T {
    x.max(T::zero()) + (-x.abs()).exp().ln_1p()
}

#[inline]
pub fn sigmoid<T: Real>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

/// Weighted binary cross-entropy of logit `x` against `target`, and its
/// derivative with respect to `x`.
#[inline]
pub fn weighted_bce<T: Real>(x: T, target: bool, w: &ClassWeights<T>) -> (T, T) {
    if target {
        // -log(sigmoid(x)) = softplus(-x)
        (
            w.foreground * softplus(-x),
            w.foreground * (sigmoid(x) - T::one()),
        )
    } else {
        // -log(1 - sigmoid(x)) = softplus(x)
        (w.background * softplus(x), w.background * sigmoid(x))
    }
}
