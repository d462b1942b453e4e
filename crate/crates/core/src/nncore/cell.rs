use rand::Rng;
use serde::{Deserialize, Serialize};

use super::matrix::{Matrix, Scalar};
use crate::error::{Error, Result};

/// Recurrent cell architecture.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellKind {
    Rnn,
    Lstm,
    Gru,
}

impl CellKind {
    pub fn gate_count(self) -> usize {
        match self {
            CellKind::Rnn => 1,
            CellKind::Gru => 3,
            CellKind::Lstm => 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CellKind::Rnn => "rnn",
            CellKind::Lstm => "lstm",
            CellKind::Gru => "gru",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rnn" => Ok(CellKind::Rnn),
            "lstm" => Ok(CellKind::Lstm),
            "gru" => Ok(CellKind::Gru),
            other => Err(Error::InvalidArg(format!("unknown cell kind {other:?}"))),
        }
    }
}

// Gate indices. GRU order: update, reset, candidate.
// LSTM order: input, forget, output, candidate.
pub(crate) const GRU_UPDATE: usize = 0;
pub(crate) const GRU_RESET: usize = 1;
pub(crate) const GRU_CAND: usize = 2;
pub(crate) const LSTM_INPUT: usize = 0;
pub(crate) const LSTM_FORGET: usize = 1;
pub(crate) const LSTM_OUTPUT: usize = 2;
pub(crate) const LSTM_CAND: usize = 3;

/// One gate's parameters: input and hidden weight matrices plus the two
/// bias vectors (input-side and hidden-side).
#[derive(Clone, Debug, PartialEq)]
pub struct Gate<F> {
    pub w_x: Matrix<F>,
    pub w_h: Matrix<F>,
    pub b_x: Vec<F>,
    pub b_h: Vec<F>,
}

impl<F: Scalar> Gate<F> {
    fn zeros(input_dim: usize, hidden_dim: usize) -> Self {
        Gate {
            w_x: Matrix::zeros(hidden_dim, input_dim),
            w_h: Matrix::zeros(hidden_dim, hidden_dim),
            b_x: vec![F::zero(); hidden_dim],
            b_h: vec![F::zero(); hidden_dim],
        }
    }

    fn random(input_dim: usize, hidden_dim: usize, rng: &mut impl Rng) -> Self {
        // Weights uniform in ±1/sqrt(hidden_dim); biases start at zero.
        let bound = 1.0 / (hidden_dim as f64).sqrt();
        Gate {
            w_x: Matrix::random_uniform(hidden_dim, input_dim, bound, rng),
            w_h: Matrix::random_uniform(hidden_dim, hidden_dim, bound, rng),
            b_x: vec![F::zero(); hidden_dim],
            b_h: vec![F::zero(); hidden_dim],
        }
    }

    fn zero_out(&mut self) {
        self.w_x.fill(F::zero());
        self.w_h.fill(F::zero());
        self.b_x.iter_mut().for_each(|v| *v = F::zero());
        self.b_h.iter_mut().for_each(|v| *v = F::zero());
    }
}

/// Parameters of one recurrent layer together with matching gradient
/// buffers. Gradients accumulate across `backward` calls until
/// [`CellParams::zero_grads`] resets them.
#[derive(Clone, Debug, PartialEq)]
pub struct CellParams<F> {
    pub kind: CellKind,
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub gates: Vec<Gate<F>>,
    pub grads: Vec<Gate<F>>,
}

/// Every intermediate value the backward pass needs for one time step.
#[derive(Clone, Debug)]
pub struct CellCache<F> {
    x: Vec<F>,
    h_prev: Vec<F>,
    c_prev: Option<Vec<F>>,
    pub h_t: Vec<F>,
    pub c_t: Option<Vec<F>>,
    acts: CacheActs<F>,
}

#[derive(Clone, Debug)]
enum CacheActs<F> {
    Rnn,
    Gru {
        update: Vec<F>,
        reset: Vec<F>,
        cand: Vec<F>,
        hidden_cand: Vec<F>,
    },
    Lstm {
        input: Vec<F>,
        forget: Vec<F>,
        output: Vec<F>,
        cand: Vec<F>,
    },
}

#[inline]
fn sigmoid<F: Scalar>(x: F) -> F {
    F::one() / (F::one() + (-x).exp())
}

impl<F: Scalar> CellParams<F> {
    pub fn new(kind: CellKind, input_dim: usize, hidden_dim: usize, rng: &mut impl Rng) -> Self {
        assert!(input_dim > 0 && hidden_dim > 0);
        let gates = (0..kind.gate_count())
            .map(|_| Gate::random(input_dim, hidden_dim, rng))
            .collect::<Vec<_>>();
        let grads = (0..kind.gate_count())
            .map(|_| Gate::zeros(input_dim, hidden_dim))
            .collect();
        let mut cell = CellParams {
            kind,
            input_dim,
            hidden_dim,
            gates,
            grads,
        };
        if kind == CellKind::Lstm {
            // Forget gate starts open so early training keeps cell state.
            cell.gates[LSTM_FORGET]
                .b_x
                .iter_mut()
                .for_each(|b| *b = F::one());
        }
        cell
    }

    pub fn zeros(kind: CellKind, input_dim: usize, hidden_dim: usize) -> Self {
        assert!(input_dim > 0 && hidden_dim > 0);
        CellParams {
            kind,
            input_dim,
            hidden_dim,
            gates: (0..kind.gate_count())
                .map(|_| Gate::zeros(input_dim, hidden_dim))
                .collect(),
            grads: (0..kind.gate_count())
                .map(|_| Gate::zeros(input_dim, hidden_dim))
                .collect(),
        }
    }

    pub fn zero_grads(&mut self) {
        self.grads.iter_mut().for_each(Gate::zero_out);
    }

    /// Gate preactivation: b_x + b_h + W_x·x + W_h·h.
    fn preactivation(&self, gate: usize, x: &[F], h: &[F]) -> Vec<F> {
        let g = &self.gates[gate];
        let mut a: Vec<F> = g.b_x.iter().zip(&g.b_h).map(|(bx, bh)| *bx + *bh).collect();
        g.w_x.matvec_acc(x, &mut a);
        g.w_h.matvec_acc(h, &mut a);
        a
    }

    fn check_forward_shapes(&self, x: &[F], h_prev: &[F], c_prev: Option<&[F]>) -> Result<()> {
        if x.len() != self.input_dim {
            return Err(Error::Shape {
                context: "x_t",
                expected: self.input_dim,
                got: x.len(),
            });
        }
        if h_prev.len() != self.hidden_dim {
            return Err(Error::Shape {
                context: "h_prev",
                expected: self.hidden_dim,
                got: h_prev.len(),
            });
        }
        match (self.kind, c_prev) {
            (CellKind::Lstm, Some(c)) if c.len() == self.hidden_dim => Ok(()),
            (CellKind::Lstm, Some(c)) => Err(Error::Shape {
                context: "c_prev",
                expected: self.hidden_dim,
                got: c.len(),
            }),
            (CellKind::Lstm, None) => Err(Error::Shape {
                context: "c_prev",
                expected: self.hidden_dim,
                got: 0,
            }),
            (_, Some(_)) => Err(Error::InvalidArg(
                "c_prev is only meaningful for LSTM cells".into(),
            )),
            (_, None) => Ok(()),
        }
    }

    /// One time step. Returns the new hidden state, the new cell state for
    /// LSTM, and a cache holding everything `backward` needs.
    pub fn forward(
        &self,
        x: &[F],
        h_prev: &[F],
        c_prev: Option<&[F]>,
    ) -> Result<(Vec<F>, Option<Vec<F>>, CellCache<F>)> {
        self.check_forward_shapes(x, h_prev, c_prev)?;
        match self.kind {
            CellKind::Rnn => {
                let a = self.preactivation(0, x, h_prev);
                let h_t: Vec<F> = a.iter().map(|v| v.tanh()).collect();
                let cache = CellCache {
                    x: x.to_vec(),
                    h_prev: h_prev.to_vec(),
                    c_prev: None,
                    h_t: h_t.clone(),
                    c_t: None,
                    acts: CacheActs::Rnn,
                };
                Ok((h_t, None, cache))
            }
            CellKind::Gru => {
                let update: Vec<F> = self
                    .preactivation(GRU_UPDATE, x, h_prev)
                    .into_iter()
                    .map(sigmoid)
                    .collect();
                let reset: Vec<F> = self
                    .preactivation(GRU_RESET, x, h_prev)
                    .into_iter()
                    .map(sigmoid)
                    .collect();
                // Hidden-side candidate term, gated by reset after the matmul.
                let g = &self.gates[GRU_CAND];
                let mut hidden_cand = g.b_h.clone();
                g.w_h.matvec_acc(h_prev, &mut hidden_cand);
                let mut a_cand = g.b_x.clone();
                g.w_x.matvec_acc(x, &mut a_cand);
                let cand: Vec<F> = a_cand
                    .iter()
                    .zip(&reset)
                    .zip(&hidden_cand)
                    .map(|((a, r), hc)| (*a + *r * *hc).tanh())
                    .collect();
                let h_t: Vec<F> = update
                    .iter()
                    .zip(h_prev)
                    .zip(&cand)
                    .map(|((z, h), n)| *z * *h + (F::one() - *z) * *n)
                    .collect();
                let cache = CellCache {
                    x: x.to_vec(),
                    h_prev: h_prev.to_vec(),
                    c_prev: None,
                    h_t: h_t.clone(),
                    c_t: None,
                    acts: CacheActs::Gru {
                        update,
                        reset,
                        cand,
                        hidden_cand,
                    },
                };
                Ok((h_t, None, cache))
            }
            CellKind::Lstm => {
                let c_prev = c_prev.expect("checked above");
                let input: Vec<F> = self
                    .preactivation(LSTM_INPUT, x, h_prev)
                    .into_iter()
                    .map(sigmoid)
                    .collect();
                let forget: Vec<F> = self
                    .preactivation(LSTM_FORGET, x, h_prev)
                    .into_iter()
                    .map(sigmoid)
                    .collect();
                let output: Vec<F> = self
                    .preactivation(LSTM_OUTPUT, x, h_prev)
                    .into_iter()
                    .map(sigmoid)
                    .collect();
                let cand: Vec<F> = self
                    .preactivation(LSTM_CAND, x, h_prev)
                    .into_iter()
                    .map(|v| v.tanh())
                    .collect();
                let c_t: Vec<F> = forget
                    .iter()
                    .zip(c_prev)
                    .zip(input.iter().zip(&cand))
                    .map(|((f, c), (i, g))| *f * *c + *i * *g)
                    .collect();
                let h_t: Vec<F> = output.iter().zip(&c_t).map(|(o, c)| *o * c.tanh()).collect();
                let cache = CellCache {
                    x: x.to_vec(),
                    h_prev: h_prev.to_vec(),
                    c_prev: Some(c_prev.to_vec()),
                    h_t: h_t.clone(),
                    c_t: Some(c_t.clone()),
                    acts: CacheActs::Lstm {
                        input,
                        forget,
                        output,
                        cand,
                    },
                };
                Ok((h_t, Some(c_t), cache))
            }
        }
    }

    fn check_backward_shapes(
        &self,
        cache: &CellCache<F>,
        dh: &[F],
        dc: Option<&[F]>,
    ) -> Result<()> {
        if cache.x.len() != self.input_dim || cache.h_prev.len() != self.hidden_dim {
            return Err(Error::CacheMismatch("cache dimensions"));
        }
        let cache_kind_ok = matches!(
            (&cache.acts, self.kind),
            (CacheActs::Rnn, CellKind::Rnn)
                | (CacheActs::Gru { .. }, CellKind::Gru)
                | (CacheActs::Lstm { .. }, CellKind::Lstm)
        );
        if !cache_kind_ok {
            return Err(Error::CacheMismatch("cell kind"));
        }
        if dh.len() != self.hidden_dim {
            return Err(Error::Shape {
                context: "dh_t",
                expected: self.hidden_dim,
                got: dh.len(),
            });
        }
        if let Some(dc) = dc {
            if self.kind != CellKind::Lstm {
                return Err(Error::InvalidArg(
                    "dc_t is only meaningful for LSTM cells".into(),
                ));
            }
            if dc.len() != self.hidden_dim {
                return Err(Error::Shape {
                    context: "dc_t",
                    expected: self.hidden_dim,
                    got: dc.len(),
                });
            }
        }
        Ok(())
    }

    /// Gradient accumulation shared by every gate whose preactivation is
    /// b_x + b_h + W_x·x + W_h·h: given da = dL/d(preactivation), updates
    /// the gate's gradient buffers and adds the input/hidden contributions
    /// to dx and dh_prev.
    fn backprop_gate(
        gates: &[Gate<F>],
        grads: &mut [Gate<F>],
        gate: usize,
        da: &[F],
        x: &[F],
        h_prev: &[F],
        dx: &mut [F],
        dh_prev: &mut [F],
    ) {
        let gr = &mut grads[gate];
        gr.w_x.add_outer(da, x);
        gr.w_h.add_outer(da, h_prev);
        for ((bx, bh), d) in gr.b_x.iter_mut().zip(gr.b_h.iter_mut()).zip(da) {
            *bx += *d;
            *bh += *d;
        }
        let g = &gates[gate];
        g.w_x.matvec_t_acc(da, dx);
        g.w_h.matvec_t_acc(da, dh_prev);
    }

    /// One backward time step. Accumulates parameter gradients into the
    /// gradient buffers and returns (dx_t, dh_prev, dc_prev).
    pub fn backward(
        &mut self,
        cache: &CellCache<F>,
        dh: &[F],
        dc: Option<&[F]>,
    ) -> Result<(Vec<F>, Vec<F>, Option<Vec<F>>)> {
        self.check_backward_shapes(cache, dh, dc)?;
        let mut dx = vec![F::zero(); self.input_dim];
        let mut dh_prev = vec![F::zero(); self.hidden_dim];
        let CellParams { gates, grads, .. } = self;
        match &cache.acts {
            CacheActs::Rnn => {
                let da: Vec<F> = dh
                    .iter()
                    .zip(&cache.h_t)
                    .map(|(d, h)| *d * (F::one() - *h * *h))
                    .collect();
                Self::backprop_gate(
                    gates,
                    grads,
                    0,
                    &da,
                    &cache.x,
                    &cache.h_prev,
                    &mut dx,
                    &mut dh_prev,
                );
                Ok((dx, dh_prev, None))
            }
            CacheActs::Gru {
                update,
                reset,
                cand,
                hidden_cand,
            } => {
                // h_t = z·h_prev + (1−z)·n
                let dz: Vec<F> = dh
                    .iter()
                    .zip(&cache.h_prev)
                    .zip(cand)
                    .map(|((d, h), n)| *d * (*h - *n))
                    .collect();
                let dn: Vec<F> = dh
                    .iter()
                    .zip(update)
                    .map(|(d, z)| *d * (F::one() - *z))
                    .collect();
                for ((dp, d), z) in dh_prev.iter_mut().zip(dh).zip(update) {
                    *dp += *d * *z;
                }

                // Candidate: n = tanh(b_x + W_x·x + r ⊙ (b_h + W_h·h))
                let dan: Vec<F> = dn
                    .iter()
                    .zip(cand)
                    .map(|(d, n)| *d * (F::one() - *n * *n))
                    .collect();
                let dr: Vec<F> = dan.iter().zip(hidden_cand).map(|(d, hc)| *d * *hc).collect();
                let dhc: Vec<F> = dan.iter().zip(reset).map(|(d, r)| *d * *r).collect();
                {
                    let gr = &mut grads[GRU_CAND];
                    gr.w_x.add_outer(&dan, &cache.x);
                    gr.w_h.add_outer(&dhc, &cache.h_prev);
                    for (b, d) in gr.b_x.iter_mut().zip(&dan) {
                        *b += *d;
                    }
                    for (b, d) in gr.b_h.iter_mut().zip(&dhc) {
                        *b += *d;
                    }
                    let g = &gates[GRU_CAND];
                    g.w_x.matvec_t_acc(&dan, &mut dx);
                    g.w_h.matvec_t_acc(&dhc, &mut dh_prev);
                }

                let dar: Vec<F> = dr
                    .iter()
                    .zip(reset)
                    .map(|(d, r)| *d * *r * (F::one() - *r))
                    .collect();
                Self::backprop_gate(
                    gates,
                    grads,
                    GRU_RESET,
                    &dar,
                    &cache.x,
                    &cache.h_prev,
                    &mut dx,
                    &mut dh_prev,
                );

                let daz: Vec<F> = dz
                    .iter()
                    .zip(update)
                    .map(|(d, z)| *d * *z * (F::one() - *z))
                    .collect();
                Self::backprop_gate(
                    gates,
                    grads,
                    GRU_UPDATE,
                    &daz,
                    &cache.x,
                    &cache.h_prev,
                    &mut dx,
                    &mut dh_prev,
                );
                Ok((dx, dh_prev, None))
            }
            CacheActs::Lstm {
                input,
                forget,
                output,
                cand,
            } => {
                let c_t = cache.c_t.as_ref().ok_or(Error::CacheMismatch("c_t"))?;
                let c_prev = cache.c_prev.as_ref().ok_or(Error::CacheMismatch("c_prev"))?;
                let tanh_c: Vec<F> = c_t.iter().map(|c| c.tanh()).collect();

                let do_: Vec<F> = dh.iter().zip(&tanh_c).map(|(d, t)| *d * *t).collect();
                let mut dcell: Vec<F> = dh
                    .iter()
                    .zip(output)
                    .zip(&tanh_c)
                    .map(|((d, o), t)| *d * *o * (F::one() - *t * *t))
                    .collect();
                if let Some(dc) = dc {
                    for (a, b) in dcell.iter_mut().zip(dc) {
                        *a += *b;
                    }
                }
                let di: Vec<F> = dcell.iter().zip(cand).map(|(d, g)| *d * *g).collect();
                let df: Vec<F> = dcell.iter().zip(c_prev).map(|(d, c)| *d * *c).collect();
                let dg: Vec<F> = dcell.iter().zip(input).map(|(d, i)| *d * *i).collect();
                let dc_prev: Vec<F> = dcell.iter().zip(forget).map(|(d, f)| *d * *f).collect();

                let dai: Vec<F> = di
                    .iter()
                    .zip(input)
                    .map(|(d, i)| *d * *i * (F::one() - *i))
                    .collect();
                let daf: Vec<F> = df
                    .iter()
                    .zip(forget)
                    .map(|(d, f)| *d * *f * (F::one() - *f))
                    .collect();
                let dao: Vec<F> = do_
                    .iter()
                    .zip(output)
                    .map(|(d, o)| *d * *o * (F::one() - *o))
                    .collect();
                let dag: Vec<F> = dg
                    .iter()
                    .zip(cand)
                    .map(|(d, g)| *d * (F::one() - *g * *g))
                    .collect();

                for (gate, da) in [
                    (LSTM_INPUT, &dai),
                    (LSTM_FORGET, &daf),
                    (LSTM_OUTPUT, &dao),
                    (LSTM_CAND, &dag),
                ] {
                    Self::backprop_gate(
                        gates,
                        grads,
                        gate,
                        da,
                        &cache.x,
                        &cache.h_prev,
                        &mut dx,
                        &mut dh_prev,
                    );
                }
                Ok((dx, dh_prev, Some(dc_prev)))
            }
        }
    }
}
