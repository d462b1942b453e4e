use super::matrix::Scalar;
use crate::error::{Error, Result};

/// Softmax cross-entropy against a single target class.
///
/// Returns the negative log-likelihood and the gradient with respect to the
/// logits, which is `softmax(logits) - one_hot(target)`. The max logit is
/// subtracted before exponentiation so large scores cannot overflow.
pub fn softmax_nll<F: Scalar>(logits: &[F], target: usize) -> Result<(f64, Vec<F>)> {
    if logits.is_empty() {
        return Err(Error::InvalidArg("softmax over zero classes".into()));
    }
    if target >= logits.len() {
        return Err(Error::InvalidArg(format!(
            "target class {target} out of range for {} logits",
            logits.len()
        )));
    }
    let max = logits
        .iter()
        .copied()
        .fold(F::neg_infinity(), |a, b| if b > a { b } else { a });
    let mut dlogits: Vec<F> = logits.iter().map(|v| (*v - max).exp()).collect();
    let total: F = dlogits.iter().copied().sum();
    for v in dlogits.iter_mut() {
        *v /= total;
    }
    // log p_target = (logit_t - max) - ln(sum exp)
    let loss = -((logits[target] - max).to_f64() - total.to_f64().ln());
    dlogits[target] -= F::one();
    Ok((loss, dlogits))
}
