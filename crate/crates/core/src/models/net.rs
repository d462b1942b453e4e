use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::registry::StateRegistry;
use super::vocab::{Vocabulary, VOCAB_SIZE};
use crate::error::{Error, Result};
use crate::nncore::{softmax_nll, CellCache, CellKind, CellParams, Matrix, Scalar};

/// Descriptive fields carried alongside the weights so a model file is
/// self-contained: how it was initialized, how the corpus was split, and —
/// for checkpoints — how far training got.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelMeta {
    pub kind: CellKind,
    pub hidden_dim: usize,
    pub init_seed: u64,
    pub config_digest: String,
    pub split_seed: Option<u64>,
    pub train_fraction: Option<f64>,
    pub completed_epochs: Option<usize>,
}

/// Everything one forward pass produces: per-step caches for both layers,
/// the final layer-2 hidden state, and the class logits.
pub struct NameForward<F> {
    pub caches1: Vec<CellCache<F>>,
    pub caches2: Vec<CellCache<F>>,
    pub h2_final: Vec<F>,
    pub logits: Vec<F>,
}

/// A 2-layer character-level recurrent classifier with a linear projection
/// head. Layer 1 reads one-hot characters; layer 2 reads layer 1's hidden
/// states; the head maps the final layer-2 hidden state to state logits.
///
/// `proj_w` is hidden_dim × |states|: logits = proj_wᵀ·h + proj_b.
#[derive(Clone, Debug, PartialEq)]
pub struct RecurrentModel<F> {
    pub vocab: Vocabulary,
    pub states: StateRegistry,
    pub layer1: CellParams<F>,
    pub layer2: CellParams<F>,
    pub proj_w: Matrix<F>,
    pub proj_b: Vec<F>,
    pub proj_gw: Matrix<F>,
    pub proj_gb: Vec<F>,
    pub meta: ModelMeta,
}

impl<F: Scalar> RecurrentModel<F> {
    pub fn new(kind: CellKind, hidden_dim: usize, states: StateRegistry, init_seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(init_seed);
        let layer1 = CellParams::new(kind, VOCAB_SIZE, hidden_dim, &mut rng);
        let layer2 = CellParams::new(kind, hidden_dim, hidden_dim, &mut rng);
        let bound = 1.0 / (hidden_dim as f64).sqrt();
        let proj_w = Matrix::random_uniform(hidden_dim, states.len(), bound, &mut rng);
        let proj_b = vec![F::zero(); states.len()];
        let proj_gw = Matrix::zeros(hidden_dim, states.len());
        let proj_gb = vec![F::zero(); states.len()];
        RecurrentModel {
            vocab: Vocabulary::standard(),
            states,
            layer1,
            layer2,
            proj_w,
            proj_b,
            proj_gw,
            proj_gb,
            meta: ModelMeta {
                kind,
                hidden_dim,
                init_seed,
                config_digest: String::new(),
                split_seed: None,
                train_fraction: None,
                completed_epochs: None,
            },
        }
    }

    pub fn kind(&self) -> CellKind {
        self.meta.kind
    }

    pub fn hidden_dim(&self) -> usize {
        self.meta.hidden_dim
    }

    fn is_lstm(&self) -> bool {
        self.meta.kind == CellKind::Lstm
    }

    /// Runs the whole name through both layers from zero initial state.
    pub fn forward_name(&self, name: &str) -> Result<NameForward<F>> {
        let tokens = self.vocab.encode(name)?;
        let hidden = self.meta.hidden_dim;
        let zero_cell = || self.is_lstm().then(|| vec![F::zero(); hidden]);

        let mut h1 = vec![F::zero(); hidden];
        let mut c1 = zero_cell();
        let mut h2 = vec![F::zero(); hidden];
        let mut c2 = zero_cell();
        let mut caches1 = Vec::with_capacity(tokens.len());
        let mut caches2 = Vec::with_capacity(tokens.len());
        for token in tokens {
            let x = self.vocab.one_hot::<F>(token);
            let (h, c, cache) = self.layer1.forward(&x, &h1, c1.as_deref())?;
            h1 = h;
            c1 = c;
            caches1.push(cache);
            let (h, c, cache) = self.layer2.forward(&h1, &h2, c2.as_deref())?;
            h2 = h;
            c2 = c;
            caches2.push(cache);
        }
        let mut logits = self.proj_b.clone();
        self.proj_w.matvec_t_acc(&h2, &mut logits);
        Ok(NameForward {
            caches1,
            caches2,
            h2_final: h2,
            logits,
        })
    }

    /// Loss for one (name, state) example plus a full backward pass.
    /// Gradients accumulate into the buffers; callers zero and scale them.
    pub fn loss_and_backward(&mut self, name: &str, target: usize) -> Result<f64> {
        let fwd = self.forward_name(name)?;
        let (loss, dlogits) = softmax_nll(&fwd.logits, target)?;
        let hidden = self.meta.hidden_dim;

        self.proj_gw.add_outer(&fwd.h2_final, &dlogits);
        for (b, d) in self.proj_gb.iter_mut().zip(&dlogits) {
            *b += *d;
        }
        let mut dh2 = vec![F::zero(); hidden];
        self.proj_w.matvec_acc(&dlogits, &mut dh2);

        // Layer 2 backward through time, collecting the gradient each step
        // passes down to layer 1's hidden state.
        let steps = fwd.caches2.len();
        let mut dc2 = self.is_lstm().then(|| vec![F::zero(); hidden]);
        let mut dx2: Vec<Vec<F>> = vec![Vec::new(); steps];
        for t in (0..steps).rev() {
            let (dx, dh_prev, dc_prev) = self.layer2.backward(&fwd.caches2[t], &dh2, dc2.as_deref())?;
            dx2[t] = dx;
            dh2 = dh_prev;
            dc2 = dc_prev;
        }

        // Layer 1 backward: at each step the upstream gradient is what
        // layer 2 sent down plus the recurrent carry.
        let mut dh1 = vec![F::zero(); hidden];
        let mut dc1 = self.is_lstm().then(|| vec![F::zero(); hidden]);
        for t in (0..steps).rev() {
            for (a, b) in dx2[t].iter_mut().zip(&dh1) {
                *a += *b;
            }
            let (_, dh_prev, dc_prev) = self.layer1.backward(&fwd.caches1[t], &dx2[t], dc1.as_deref())?;
            dh1 = dh_prev;
            dc1 = dc_prev;
        }
        Ok(loss)
    }

    /// One mini-batch: walks examples grouped by name length (stable, so
    /// order is reproducible), leaves the mean gradient in the gradient
    /// buffers, and returns the mean loss.
    ///
    /// Each example's gradient is computed in freshly zeroed buffers and
    /// added to the batch sum in one pass, so an example repeated in a
    /// batch contributes bit-identical addends — a batch of the same pair
    /// twice reproduces the single-pair gradient exactly.
    pub fn batch_step<S: AsRef<str>>(&mut self, batch: &[(S, usize)]) -> Result<f64> {
        if batch.is_empty() {
            return Err(Error::InvalidArg("empty batch".into()));
        }
        let mut order: Vec<usize> = (0..batch.len()).collect();
        order.sort_by_key(|&i| batch[i].0.as_ref().chars().count());
        let mut acc: Vec<Vec<F>> = self
            .param_shapes()
            .iter()
            .map(|&n| vec![F::zero(); n])
            .collect();
        let mut total = 0.0;
        for i in order {
            let (name, target) = &batch[i];
            self.zero_grads();
            total += self.loss_and_backward(name.as_ref(), *target)?;
            let mut slot = 0;
            self.for_each_grad(|g| {
                for (a, v) in acc[slot].iter_mut().zip(g) {
                    *a += *v;
                }
                slot += 1;
            });
        }
        let scale = F::from_f64(1.0 / batch.len() as f64);
        let mut slot = 0;
        self.for_each_grad_mut(|g| {
            for (dst, a) in g.iter_mut().zip(&acc[slot]) {
                *dst = *a * scale;
            }
            slot += 1;
        });
        Ok(total / batch.len() as f64)
    }

    pub fn zero_grads(&mut self) {
        self.layer1.zero_grads();
        self.layer2.zero_grads();
        self.proj_gw.fill(F::zero());
        self.proj_gb.iter_mut().for_each(|v| *v = F::zero());
    }

    pub fn scale_grads(&mut self, factor: F) {
        self.for_each_grad_mut(|g| g.iter_mut().for_each(|v| *v *= factor));
    }

    pub fn grad_l2_norm(&self) -> f64 {
        let mut sum = 0.0;
        self.for_each_grad(|g| sum += g.iter().map(|v| (*v).to_f64().powi(2)).sum::<f64>());
        sum.sqrt()
    }

    fn for_each_grad(&self, mut f: impl FnMut(&[F])) {
        for layer in [&self.layer1, &self.layer2] {
            for g in &layer.grads {
                f(g.w_x.data());
                f(g.w_h.data());
                f(&g.b_x);
                f(&g.b_h);
            }
        }
        f(self.proj_gw.data());
        f(&self.proj_gb);
    }

    fn for_each_grad_mut(&mut self, mut f: impl FnMut(&mut [F])) {
        for layer in [&mut self.layer1, &mut self.layer2] {
            for g in &mut layer.grads {
                f(g.w_x.data_mut());
                f(g.w_h.data_mut());
                f(&mut g.b_x);
                f(&mut g.b_h);
            }
        }
        f(self.proj_gw.data_mut());
        f(&mut self.proj_gb);
    }

    /// Flat tensor lengths in canonical order: layer 1 then layer 2 (per
    /// gate: w_x, w_h, b_x, b_h), then the projection weights and bias.
    pub fn param_shapes(&self) -> Vec<usize> {
        let mut shapes = Vec::new();
        for layer in [&self.layer1, &self.layer2] {
            for g in &layer.gates {
                shapes.push(g.w_x.data().len());
                shapes.push(g.w_h.data().len());
                shapes.push(g.b_x.len());
                shapes.push(g.b_h.len());
            }
        }
        shapes.push(self.proj_w.data().len());
        shapes.push(self.proj_b.len());
        shapes
    }

    /// (parameter, gradient) slice pairs in canonical order, for optimizers.
    pub fn param_grad_pairs_mut(&mut self) -> Vec<(&mut [F], &[F])> {
        let mut out = Vec::new();
        for layer in [&mut self.layer1, &mut self.layer2] {
            let CellParams { gates, grads, .. } = layer;
            for (g, gr) in gates.iter_mut().zip(grads.iter()) {
                out.push((g.w_x.data_mut(), gr.w_x.data()));
                out.push((g.w_h.data_mut(), gr.w_h.data()));
                out.push((&mut g.b_x[..], &gr.b_x[..]));
                out.push((&mut g.b_h[..], &gr.b_h[..]));
            }
        }
        out.push((self.proj_w.data_mut(), self.proj_gw.data()));
        out.push((&mut self.proj_b[..], &self.proj_gb[..]));
        out
    }

    /// Visits parameter tensors in canonical order (for serialization).
    pub fn visit_params(&self, mut f: impl FnMut(&[F])) {
        for layer in [&self.layer1, &self.layer2] {
            for g in &layer.gates {
                f(g.w_x.data());
                f(g.w_h.data());
                f(&g.b_x);
                f(&g.b_h);
            }
        }
        f(self.proj_w.data());
        f(&self.proj_b);
    }

    pub fn visit_params_mut(&mut self, mut f: impl FnMut(&mut [F])) {
        for layer in [&mut self.layer1, &mut self.layer2] {
            for g in &mut layer.gates {
                f(g.w_x.data_mut());
                f(g.w_h.data_mut());
                f(&mut g.b_x);
                f(&mut g.b_h);
            }
        }
        f(self.proj_w.data_mut());
        f(&mut self.proj_b);
    }

    /// Posterior over states for one name, aligned with the registry.
    pub fn state_distribution(&self, name: &str) -> Result<Vec<f64>> {
        let fwd = self.forward_name(name)?;
        let max = fwd
            .logits
            .iter()
            .map(|v| (*v).to_f64())
            .fold(f64::NEG_INFINITY, f64::max);
        let mut probs: Vec<f64> = fwd
            .logits
            .iter()
            .map(|v| ((*v).to_f64() - max).exp())
            .collect();
        let total: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= total);
        Ok(probs)
    }

    /// Top-k states by probability; ties broken by state name ascending.
    pub fn predict_top_k(&self, name: &str, k: usize) -> Result<Vec<(String, f64)>> {
        let probs = self.state_distribution(name)?;
        let mut ranked: Vec<(String, f64)> = self
            .states
            .names()
            .iter()
            .cloned()
            .zip(probs)
            .collect();
        ranked.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .expect("probabilities are finite")
                .then_with(|| a.0.cmp(&b.0))
        });
        ranked.truncate(k.min(self.states.len()));
        Ok(ranked)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_states() -> StateRegistry {
        StateRegistry::new(vec!["Bihar".into(), "Goa".into(), "Kerala".into()]).unwrap()
    }

    fn grads_snapshot(m: &RecurrentModel<f64>) -> Vec<f64> {
        let mut out = Vec::new();
        for layer in [&m.layer1, &m.layer2] {
            for g in &layer.grads {
                out.extend(g.w_x.data());
                out.extend(g.w_h.data());
                out.extend(&g.b_x);
                out.extend(&g.b_h);
            }
        }
        out.extend(m.proj_gw.data());
        out.extend(&m.proj_gb);
        out
    }

    #[test]
    fn construction_is_seed_deterministic() {
        for kind in [CellKind::Rnn, CellKind::Gru, CellKind::Lstm] {
            let a = RecurrentModel::<f32>::new(kind, 8, toy_states(), 42);
            let b = RecurrentModel::<f32>::new(kind, 8, toy_states(), 42);
            let c = RecurrentModel::<f32>::new(kind, 8, toy_states(), 43);
            assert_eq!(a, b);
            assert_ne!(a, c);
        }
    }

    #[test]
    fn zeroed_model_scores_every_state_equally() {
        let mut m = RecurrentModel::<f64>::new(CellKind::Gru, 6, toy_states(), 1);
        m.visit_params_mut(|p| p.iter_mut().for_each(|v| *v = 0.0));
        let top = m.predict_top_k("sharma", 3).unwrap();
        // Uniform probabilities; ties resolve alphabetically.
        let names: Vec<&str> = top.iter().map(|(n, _)| n.as_str()).collect();
        assert_eq!(names, ["Bihar", "Goa", "Kerala"]);
        for (_, p) in &top {
            assert!((p - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn forward_matches_manual_layer_chaining() {
        let m = RecurrentModel::<f64>::new(CellKind::Lstm, 5, toy_states(), 9);
        let fwd = m.forward_name("abz").unwrap();

        let hidden = 5;
        let mut h1 = vec![0.0; hidden];
        let mut c1 = Some(vec![0.0; hidden]);
        let mut h2 = vec![0.0; hidden];
        let mut c2 = Some(vec![0.0; hidden]);
        for token in m.vocab.encode("abz").unwrap() {
            let x = m.vocab.one_hot::<f64>(token);
            let (h, c, _) = m.layer1.forward(&x, &h1, c1.as_deref()).unwrap();
            h1 = h;
            c1 = c;
            let (h, c, _) = m.layer2.forward(&h1, &h2, c2.as_deref()).unwrap();
            h2 = h;
            c2 = c;
        }
        let mut logits = m.proj_b.clone();
        m.proj_w.matvec_t_acc(&h2, &mut logits);
        assert_eq!(fwd.logits, logits);
        assert_eq!(fwd.h2_final, h2);
    }

    #[test]
    fn duplicated_batch_reproduces_single_example_gradient() {
        let mut m = RecurrentModel::<f64>::new(CellKind::Gru, 4, toy_states(), 3);
        let single = {
            let mut m = m.clone();
            m.batch_step(&[("patel", 1)]).unwrap();
            grads_snapshot(&m)
        };
        m.batch_step(&[("patel", 1), ("patel", 1)]).unwrap();
        let doubled = grads_snapshot(&m);
        for (i, (a, b)) in doubled.iter().zip(&single).enumerate() {
            assert!(a == b, "elem {i}: doubled {a} vs single {b}");
        }
        assert_eq!(doubled.len(), single.len());
    }

    #[test]
    fn batch_loss_is_mean_of_example_losses() {
        let mut m = RecurrentModel::<f64>::new(CellKind::Rnn, 4, toy_states(), 5);
        let l1 = m.batch_step(&[("iyer", 2)]).unwrap();
        let l2 = m.batch_step(&[("rao", 0)]).unwrap();
        let both = m.batch_step(&[("iyer", 2), ("rao", 0)]).unwrap();
        assert!((both - (l1 + l2) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn batch_order_does_not_change_gradients() {
        // Length grouping sorts examples, so permuting a batch is a no-op.
        let mut a = RecurrentModel::<f64>::new(CellKind::Gru, 4, toy_states(), 7);
        let mut b = a.clone();
        a.batch_step(&[("rao", 0), ("patel", 1), ("iyer", 2)]).unwrap();
        b.batch_step(&[("patel", 1), ("iyer", 2), ("rao", 0)]).unwrap();
        assert_eq!(grads_snapshot(&a), grads_snapshot(&b));
    }

    #[test]
    fn gradients_match_finite_differences_end_to_end() {
        // Whole-model check in f64: every parameter tensor, short name.
        for kind in [CellKind::Rnn, CellKind::Gru, CellKind::Lstm] {
            let base = RecurrentModel::<f64>::new(kind, 3, toy_states(), 11);
            let name = "abu";
            let target = 2;

            let mut m = base.clone();
            m.zero_grads();
            m.loss_and_backward(name, target).unwrap();

            let loss_of = |model: &RecurrentModel<f64>| -> f64 {
                let fwd = model.forward_name(name).unwrap();
                softmax_nll(&fwd.logits, target).unwrap().0
            };
            let eps = 1e-5;
            let shapes = base.param_shapes();
            for (tensor_idx, &len) in shapes.iter().enumerate() {
                for elem in (0..len).step_by(len.max(1) / 3 + 1) {
                    let mut plus = base.clone();
                    let mut minus = base.clone();
                    let bump = |model: &mut RecurrentModel<f64>, delta: f64| {
                        let mut i = 0;
                        model.visit_params_mut(|p| {
                            if i == tensor_idx {
                                p[elem] += delta;
                            }
                            i += 1;
                        });
                    };
                    bump(&mut plus, eps);
                    bump(&mut minus, -eps);
                    let numeric = (loss_of(&plus) - loss_of(&minus)) / (2.0 * eps);
                    let mut analytic = f64::NAN;
                    let mut i = 0;
                    m.for_each_grad(|g| {
                        if i == tensor_idx {
                            analytic = g[elem];
                        }
                        i += 1;
                    });
                    let denom = analytic.abs().max(numeric.abs()).max(1e-6);
                    assert!(
                        ((analytic - numeric).abs() / denom) < 1e-4,
                        "{kind:?} tensor {tensor_idx} elem {elem}: {analytic} vs {numeric}"
                    );
                }
            }
        }
    }

    #[test]
    fn predict_clamps_k_to_state_count() {
        let m = RecurrentModel::<f64>::new(CellKind::Rnn, 4, toy_states(), 2);
        assert_eq!(m.predict_top_k("das", 10).unwrap().len(), 3);
        assert_eq!(m.predict_top_k("das", 2).unwrap().len(), 2);
    }

    #[test]
    fn distribution_sums_to_one() {
        let m = RecurrentModel::<f64>::new(CellKind::Lstm, 4, toy_states(), 2);
        let p = m.state_distribution("singh").unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p.iter().all(|v| *v > 0.0));
    }

    #[test]
    fn empty_name_is_rejected() {
        let m = RecurrentModel::<f64>::new(CellKind::Rnn, 4, toy_states(), 2);
        assert!(matches!(m.forward_name(""), Err(Error::EmptyName)));
    }

    #[test]
    fn shapes_cover_every_parameter() {
        let m = RecurrentModel::<f32>::new(CellKind::Lstm, 6, toy_states(), 4);
        let total: usize = m.param_shapes().iter().sum();
        let mut seen = 0;
        m.visit_params(|p| seen += p.len());
        assert_eq!(total, seen);
        // 2 layers × 4 gates × (w_x + w_h + 2 biases) + head.
        let l1 = 4 * (6 * 38 + 6 * 6 + 6 + 6);
        let l2 = 4 * (6 * 6 + 6 * 6 + 6 + 6);
        assert_eq!(total, l1 + l2 + 3 * 6 + 3);
    }
}
