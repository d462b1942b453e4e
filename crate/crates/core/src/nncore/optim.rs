use serde::{Deserialize, Serialize};

use super::matrix::Scalar;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd,
    Adam,
}

impl OptimizerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OptimizerKind::Sgd => "sgd",
            OptimizerKind::Adam => "adam",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sgd" => Ok(OptimizerKind::Sgd),
            "adam" => Ok(OptimizerKind::Adam),
            other => Err(Error::InvalidArg(format!("unknown optimizer {other:?}"))),
        }
    }
}

/// Optimizer state over a fixed list of parameter tensors, addressed by
/// position. SGD keeps one velocity buffer per tensor in `m`; Adam keeps
/// first moments in `m` and second moments in `v`.
#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerState<F> {
    pub kind: OptimizerKind,
    pub learning_rate: f64,
    pub momentum: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub step_count: u64,
    pub m: Vec<Vec<F>>,
    pub v: Vec<Vec<F>>,
}

impl<F: Scalar> OptimizerState<F> {
    pub fn sgd(learning_rate: f64, momentum: f64, shapes: &[usize]) -> Self {
        OptimizerState {
            kind: OptimizerKind::Sgd,
            learning_rate,
            momentum,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            step_count: 0,
            m: shapes.iter().map(|&n| vec![F::zero(); n]).collect(),
            v: Vec::new(),
        }
    }

    pub fn adam(learning_rate: f64, shapes: &[usize]) -> Self {
        OptimizerState {
            kind: OptimizerKind::Adam,
            learning_rate,
            momentum: 0.0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            step_count: 0,
            m: shapes.iter().map(|&n| vec![F::zero(); n]).collect(),
            v: shapes.iter().map(|&n| vec![F::zero(); n]).collect(),
        }
    }

    pub fn step(&mut self, pairs: &mut [(&mut [F], &[F])]) -> Result<()> {
        match self.kind {
            OptimizerKind::Sgd => sgd_momentum_step(self, pairs),
            OptimizerKind::Adam => adam_step(self, pairs),
        }
    }

    fn check_slots(&self, pairs: &[(&mut [F], &[F])]) -> Result<()> {
        if pairs.len() != self.m.len() {
            return Err(Error::Shape {
                context: "optimizer tensor count",
                expected: self.m.len(),
                got: pairs.len(),
            });
        }
        for (i, (p, g)) in pairs.iter().enumerate() {
            if p.len() != self.m[i].len() || g.len() != self.m[i].len() {
                return Err(Error::Shape {
                    context: "optimizer tensor length",
                    expected: self.m[i].len(),
                    got: if p.len() != self.m[i].len() { p.len() } else { g.len() },
                });
            }
        }
        Ok(())
    }
}

/// Classical momentum: v ← μ·v + g, then p ← p − lr·v.
pub fn sgd_momentum_step<F: Scalar>(
    state: &mut OptimizerState<F>,
    pairs: &mut [(&mut [F], &[F])],
) -> Result<()> {
    if state.kind != OptimizerKind::Sgd {
        return Err(Error::OptimizerKind {
            state: state.kind.as_str(),
            wanted: "sgd",
        });
    }
    state.check_slots(pairs)?;
    let lr = F::from_f64(state.learning_rate);
    let mu = F::from_f64(state.momentum);
    state.step_count += 1;
    for ((params, grads), vel) in pairs.iter_mut().zip(state.m.iter_mut()) {
        for ((p, g), v) in params.iter_mut().zip(grads.iter()).zip(vel.iter_mut()) {
            *v = mu * *v + *g;
            *p -= lr * *v;
        }
    }
    Ok(())
}

/// Adam with bias correction (Kingma & Ba).
pub fn adam_step<F: Scalar>(
    state: &mut OptimizerState<F>,
    pairs: &mut [(&mut [F], &[F])],
) -> Result<()> {
    if state.kind != OptimizerKind::Adam {
        return Err(Error::OptimizerKind {
            state: state.kind.as_str(),
            wanted: "adam",
        });
    }
    state.check_slots(pairs)?;
    state.step_count += 1;
    let t = state.step_count as i32;
    let lr = F::from_f64(state.learning_rate);
    let b1 = F::from_f64(state.beta1);
    let b2 = F::from_f64(state.beta2);
    let eps = F::from_f64(state.epsilon);
    let bc1 = F::from_f64(1.0 - state.beta1.powi(t));
    let bc2 = F::from_f64(1.0 - state.beta2.powi(t));
    let one = F::one();
    for (i, (params, grads)) in pairs.iter_mut().enumerate() {
        let (ms, vs) = (&mut state.m[i], &mut state.v[i]);
        for (((p, g), m), v) in params
            .iter_mut()
            .zip(grads.iter())
            .zip(ms.iter_mut())
            .zip(vs.iter_mut())
        {
            *m = b1 * *m + (one - b1) * *g;
            *v = b2 * *v + (one - b2) * *g * *g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *p -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
    Ok(())
}
