use crate::error::{Error, Result};
use crate::num::Real;

/// First and second moment estimates.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState<T> {
    pub m: Vec<T>,
    pub v: Vec<T>,
}

impl<T: Real> AdamState<T> {
    pub fn new(n: usize) -> Self {
        Self {
            m: vec![T::zero(); n],
            v: vec![T::zero(); n],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamHyper {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

/// Bias-corrected Adam update for step `t` (1-based).
pub fn adam_step<T: Real>(
    params: &mut [T],
    grads: &[T],
    state: &mut AdamState<T>,
    hyper: &AdamHyper,
    t: u64,
) -> Result<()> {
    let n = params.len();
    if grads.len() != n || state.m.len() != n || state.v.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "{} params, {} grads, {}/{} moments",
            n,
            grads.len(),
            state.m.len(),
            state.v.len()
        )));
    }
    if t == 0 {
        return Err(Error::Invalid("adam step index starts at 1".into()));
    }
    let b1 = T::of(hyper.beta1);
    let b2 = T::of(hyper.beta2);
    let lr = T::of(hyper.lr);
    let eps = T::of(hyper.eps);
    let step = t.min(i32::MAX as u64) as i32;
    let c1 = T::one() - b1.powi(step);
    let c2 = T::one() - b2.powi(step);
    for i in 0..n {
        let g = grads[i];
        state.m[i] = b1 * state.m[i] + (T::one() - b1) * g;
        state.v[i] = b2 * state.v[i] + (T::one() - b2) * g * g;
        let m_hat = state.m[i] / c1;
        let v_hat = state.v[i] / c2;
        params[i] = params[i] - lr * m_hat / (v_hat.sqrt() + eps);
    }
    Ok(())
}
