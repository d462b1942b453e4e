//! Training loop: per-architecture presets, seeded epoch shuffling,
//! metrics logging, checkpoint/resume.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::models::{load_checkpoint, save_checkpoint, save_model, RecurrentModel, StateRegistry};
use crate::nncore::{CellKind, OptimizerKind, OptimizerState};

/// Hyperparameters for one training run.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub kind: CellKind,
    pub hidden_dim: usize,
    pub batch_size: usize,
    pub optimizer: OptimizerKind,
    pub learning_rate: f64,
    /// SGD only; ignored by Adam.
    pub momentum: f64,
    pub epochs: usize,
    /// Epoch e shuffles with seed `shuffle_seed + e`.
    pub shuffle_seed: u64,
    /// Checkpoint every this many epochs; 0 = only at the end.
    pub checkpoint_interval: usize,
    /// Optional global gradient-norm ceiling.
    pub clip_norm: Option<f64>,
}

impl TrainConfig {
    /// Published defaults per architecture; epoch count defaults to 10 and
    /// is expected to be overridden from the command line.
    pub fn preset(kind: CellKind) -> Self {
        let (hidden_dim, batch_size, optimizer, learning_rate, momentum) = match kind {
            CellKind::Rnn => (512, 256, OptimizerKind::Sgd, 0.005, 0.9),
            CellKind::Lstm => (512, 256, OptimizerKind::Adam, 3e-4, 0.0),
            CellKind::Gru => (2048, 1024, OptimizerKind::Adam, 3e-4, 0.0),
        };
        TrainConfig {
            kind,
            hidden_dim,
            batch_size,
            optimizer,
            learning_rate,
            momentum,
            epochs: 10,
            shuffle_seed: 42,
            checkpoint_interval: 0,
            clip_norm: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.hidden_dim == 0 || self.batch_size == 0 || self.epochs == 0 {
            return Err(Error::InvalidArg(
                "hidden_dim, batch_size, and epochs must be positive".into(),
            ));
        }
        if !(self.learning_rate >= 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::InvalidArg(format!(
                "learning rate must be finite and non-negative, got {}",
                self.learning_rate
            )));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::InvalidArg(format!(
                "momentum must be inside [0, 1), got {}",
                self.momentum
            )));
        }
        if let Some(clip) = self.clip_norm {
            if !(clip > 0.0) || !clip.is_finite() {
                return Err(Error::InvalidArg(format!(
                    "clip norm must be positive and finite, got {clip}"
                )));
            }
        }
        Ok(())
    }

    /// Hex digest of every hyperparameter; stored in model metadata and
    /// matched on resume so a checkpoint can't silently continue under a
    /// different configuration.
    pub fn digest(&self) -> String {
        let canonical = format!(
            "kind={};hidden={};batch={};opt={};lr={};momentum={};epochs={};shuffle={};interval={};clip={:?}",
            self.kind.as_str(),
            self.hidden_dim,
            self.batch_size,
            self.optimizer.as_str(),
            self.learning_rate,
            self.momentum,
            self.epochs,
            self.shuffle_seed,
            self.checkpoint_interval,
            self.clip_norm,
        );
        let hash = Sha256::digest(canonical.as_bytes());
        let mut hex = String::with_capacity(64);
        for byte in hash {
            hex.push_str(&format!("{byte:02x}"));
        }
        hex
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochMetric {
    pub epoch: usize,
    pub mean_loss: f64,
    pub wall_seconds: f64,
}

/// Everything one training run needs.
pub struct TrainJob<'a> {
    /// (last name, state name) training pairs.
    pub pairs: &'a [(String, String)],
    pub registry: &'a StateRegistry,
    pub config: TrainConfig,
    pub init_seed: u64,
    /// Split provenance recorded in model metadata.
    pub split_seed: Option<u64>,
    pub train_fraction: Option<f64>,
    pub model_out: &'a Path,
    pub metrics_out: &'a Path,
    pub checkpoint_out: &'a Path,
    pub resume_from: Option<&'a Path>,
}

#[derive(Debug)]
pub struct TrainOutput {
    pub model: RecurrentModel<f32>,
    pub metrics: Vec<EpochMetric>,
}

pub const METRICS_HEADER: &str = "epoch,mean_loss,wall_seconds";

/// Runs the configured number of epochs (or the remainder, when resuming
/// from a checkpoint), logging per-epoch mean loss and writing checkpoints
/// at the configured interval and at the end. Deterministic resume assumes
/// the caller passes the same pairs in the same order as the original run.
pub fn run(job: &TrainJob) -> Result<TrainOutput> {
    job.config.validate()?;
    if job.pairs.is_empty() {
        return Err(Error::InvalidArg(
            "training needs at least one (name, state) pair".into(),
        ));
    }
    let digest = job.config.digest();
    let indexed: Vec<(String, usize)> = job
        .pairs
        .iter()
        .map(|(name, state)| Ok((name.clone(), job.registry.index(state)?)))
        .collect::<Result<_>>()?;

    let (mut model, mut optimizer, start_epoch) = match job.resume_from {
        Some(path) => {
            let (model, optimizer) = load_checkpoint(path)?;
            if model.meta.config_digest != digest {
                return Err(Error::InvalidArg(format!(
                    "checkpoint {} was produced under a different configuration",
                    path.display()
                )));
            }
            if model.states.names() != job.registry.names() {
                return Err(Error::InvalidArg(format!(
                    "checkpoint {} covers a different state registry",
                    path.display()
                )));
            }
            let start = model.meta.completed_epochs.unwrap_or(0);
            (model, optimizer, start)
        }
        None => {
            let mut model = RecurrentModel::<f32>::new(
                job.config.kind,
                job.config.hidden_dim,
                job.registry.clone(),
                job.init_seed,
            );
            model.meta.config_digest = digest.clone();
            model.meta.split_seed = job.split_seed;
            model.meta.train_fraction = job.train_fraction;
            let shapes = model.param_shapes();
            let optimizer = match job.config.optimizer {
                OptimizerKind::Sgd => OptimizerState::sgd(
                    job.config.learning_rate,
                    job.config.momentum,
                    &shapes,
                ),
                OptimizerKind::Adam => OptimizerState::adam(job.config.learning_rate, &shapes),
            };
            (model, optimizer, 0)
        }
    };

    let metrics_file = File::create(job.metrics_out).map_err(|e| Error::io(job.metrics_out, e))?;
    let mut metrics_w = BufWriter::new(metrics_file);
    let log_io = |e: std::io::Error| Error::io(job.metrics_out, e);
    writeln!(metrics_w, "# shuffle_seed_base: {}", job.config.shuffle_seed).map_err(log_io)?;
    writeln!(metrics_w, "{METRICS_HEADER}").map_err(log_io)?;
    metrics_w.flush().map_err(log_io)?;

    let mut metrics = Vec::new();
    for epoch in start_epoch..job.config.epochs {
        let started = Instant::now();
        // The permutation depends only on (seed, epoch, pair order), never
        // on earlier epochs, so a resumed run replays the same batches.
        let mut order: Vec<usize> = (0..indexed.len()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(job.config.shuffle_seed.wrapping_add(epoch as u64));
        order.shuffle(&mut rng);
        let mut total = 0.0;
        let mut batches = 0usize;
        for (b, chunk) in order.chunks(job.config.batch_size).enumerate() {
            let batch: Vec<(&str, usize)> = chunk
                .iter()
                .map(|&i| (indexed[i].0.as_str(), indexed[i].1))
                .collect();
            let loss = model.batch_step(&batch)?;
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss {
                    epoch: epoch + 1,
                    batch: b + 1,
                });
            }
            if let Some(clip) = job.config.clip_norm {
                let norm = model.grad_l2_norm();
                if norm > clip {
                    model.scale_grads((clip / norm) as f32);
                }
            }
            optimizer.step(&mut model.param_grad_pairs_mut())?;
            total += loss;
            batches += 1;
        }
        let mean_loss = total / batches as f64;
        let wall_seconds = started.elapsed().as_secs_f64();
        writeln!(metrics_w, "{},{},{:.3}", epoch + 1, mean_loss, wall_seconds).map_err(log_io)?;
        metrics_w.flush().map_err(log_io)?;
        metrics.push(EpochMetric {
            epoch: epoch + 1,
            mean_loss,
            wall_seconds,
        });

        let done = epoch + 1;
        if job.config.checkpoint_interval > 0
            && done % job.config.checkpoint_interval == 0
            && done != job.config.epochs
        {
            model.meta.completed_epochs = Some(done);
            save_checkpoint(job.checkpoint_out, &model, &optimizer)?;
        }
    }

    model.meta.completed_epochs = Some(job.config.epochs);
    save_checkpoint(job.checkpoint_out, &model, &optimizer)?;
    save_model(job.model_out, &model)?;
    Ok(TrainOutput { model, metrics })
}
