//! Binary model container.
//!
//! Layout: magic `NST1`, format version (u32 LE), a u32-length-prefixed
//! UTF-8 JSON header (architecture, vocabulary symbols, state registry,
//! seeds, config digest, optimizer hyperparameters for checkpoints), every
//! parameter tensor as f32 little-endian in canonical order, an optional
//! `OPT1` section (step count u64 LE followed by optimizer moment tensors),
//! and a trailing 8-byte checksum — the first 8 bytes of the SHA-256 of
//! everything before it.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::net::{ModelMeta, RecurrentModel};
use super::registry::StateRegistry;
use super::vocab::{Vocabulary, VOCAB_SIZE};
use crate::error::{Error, Result};
use crate::nncore::{CellKind, CellParams, Matrix, OptimizerKind, OptimizerState, Scalar};

const MAGIC: &[u8; 4] = b"NST1";
const OPT_TAG: &[u8; 4] = b"OPT1";
const VERSION: u32 = 1;
const CHECKSUM_LEN: usize = 8;

#[derive(Serialize, Deserialize)]
struct OptimizerMeta {
    kind: OptimizerKind,
    learning_rate: f64,
    momentum: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
}

#[derive(Serialize, Deserialize)]
struct Header {
    kind: CellKind,
    input_dim: usize,
    hidden_dim: usize,
    vocab: Vec<String>,
    states: Vec<String>,
    init_seed: u64,
    config_digest: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    split_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    train_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    completed_epochs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    optimizer: Option<OptimizerMeta>,
}

fn checksum(bytes: &[u8]) -> [u8; CHECKSUM_LEN] {
    let digest = Sha256::digest(bytes);
    let mut out = [0u8; CHECKSUM_LEN];
    out.copy_from_slice(&digest[..CHECKSUM_LEN]);
    out
}

/// Writes via a temporary sibling file and an atomic rename, so readers
/// never observe a half-written file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_file_name(format!(
        "{}.tmp",
        path.file_name().and_then(|n| n.to_str()).unwrap_or("out")
    ));
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn push_f32s<F: Scalar>(out: &mut Vec<u8>, values: &[F]) {
    for v in values {
        out.extend_from_slice(&((*v).to_f64() as f32).to_le_bytes());
    }
}

fn container_bytes<F: Scalar>(
    model: &RecurrentModel<F>,
    optimizer: Option<&OptimizerState<F>>,
) -> Result<Vec<u8>> {
    let header = Header {
        kind: model.meta.kind,
        input_dim: VOCAB_SIZE,
        hidden_dim: model.meta.hidden_dim,
        vocab: model.vocab.symbols().to_vec(),
        states: model.states.names().to_vec(),
        init_seed: model.meta.init_seed,
        config_digest: model.meta.config_digest.clone(),
        split_seed: model.meta.split_seed,
        train_fraction: model.meta.train_fraction,
        completed_epochs: model.meta.completed_epochs,
        optimizer: optimizer.map(|o| OptimizerMeta {
            kind: o.kind,
            learning_rate: o.learning_rate,
            momentum: o.momentum,
            beta1: o.beta1,
            beta2: o.beta2,
            epsilon: o.epsilon,
        }),
    };
    let json = serde_json::to_vec(&header)
        .map_err(|e| Error::ModelFormat(format!("header serialization: {e}")))?;

    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(json.len() as u32).to_le_bytes());
    out.extend_from_slice(&json);
    model.visit_params(|p| push_f32s(&mut out, p));
    if let Some(opt) = optimizer {
        out.extend_from_slice(OPT_TAG);
        out.extend_from_slice(&opt.step_count.to_le_bytes());
        for tensor in opt.m.iter().chain(&opt.v) {
            push_f32s(&mut out, tensor);
        }
    }
    let sum = checksum(&out);
    out.extend_from_slice(&sum);
    Ok(out)
}

pub fn save_model<F: Scalar>(path: &Path, model: &RecurrentModel<F>) -> Result<()> {
    write_atomic(path, &container_bytes(model, None)?)
}

pub fn save_checkpoint<F: Scalar>(
    path: &Path,
    model: &RecurrentModel<F>,
    optimizer: &OptimizerState<F>,
) -> Result<()> {
    write_atomic(path, &container_bytes(model, Some(optimizer))?)
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(Error::ModelFormat("unexpected end of file".into()));
        }
        let slice = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn u32_le(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64_le(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f32_slice_into(&mut self, out: &mut [f32]) -> Result<()> {
        let raw = self.take(out.len() * 4)?;
        for (v, chunk) in out.iter_mut().zip(raw.chunks_exact(4)) {
            *v = f32::from_le_bytes(chunk.try_into().unwrap());
        }
        Ok(())
    }

    fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }
}

fn parse_container(bytes: &[u8]) -> Result<(RecurrentModel<f32>, Option<OptimizerState<f32>>)> {
    if bytes.len() < MAGIC.len() + 8 + CHECKSUM_LEN {
        return Err(Error::ChecksumMismatch);
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::BadMagic);
    }
    let body = &bytes[..bytes.len() - CHECKSUM_LEN];
    if checksum(body) != bytes[bytes.len() - CHECKSUM_LEN..] {
        return Err(Error::ChecksumMismatch);
    }

    let mut r = Reader { buf: body, pos: 4 };
    let version = r.u32_le()?;
    if version != VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let json_len = r.u32_le()? as usize;
    let header: Header = serde_json::from_slice(r.take(json_len)?)
        .map_err(|e| Error::ModelFormat(format!("header: {e}")))?;

    if header.input_dim != VOCAB_SIZE
        || header.vocab != Vocabulary::standard().symbols()
    {
        return Err(Error::ModelFormat("unrecognized vocabulary layout".into()));
    }
    if header.hidden_dim == 0 {
        return Err(Error::ModelFormat("hidden_dim must be positive".into()));
    }
    let states = StateRegistry::new(header.states.clone())
        .map_err(|e| Error::ModelFormat(format!("state registry: {e}")))?;

    let hidden = header.hidden_dim;
    let mut model = RecurrentModel {
        vocab: Vocabulary::standard(),
        states,
        layer1: CellParams::zeros(header.kind, VOCAB_SIZE, hidden),
        layer2: CellParams::zeros(header.kind, hidden, hidden),
        proj_w: Matrix::zeros(hidden, header.states.len()),
        proj_b: vec![0.0; header.states.len()],
        proj_gw: Matrix::zeros(hidden, header.states.len()),
        proj_gb: vec![0.0; header.states.len()],
        meta: ModelMeta {
            kind: header.kind,
            hidden_dim: hidden,
            init_seed: header.init_seed,
            config_digest: header.config_digest,
            split_seed: header.split_seed,
            train_fraction: header.train_fraction,
            completed_epochs: header.completed_epochs,
        },
    };
    let mut fill_err = None;
    model.visit_params_mut(|p| {
        if fill_err.is_none() {
            if let Err(e) = r.f32_slice_into(p) {
                fill_err = Some(e);
            }
        }
    });
    if let Some(e) = fill_err {
        return Err(e);
    }

    let optimizer = if r.remaining() > 0 {
        if r.take(4)? != OPT_TAG {
            return Err(Error::ModelFormat("unrecognized trailing section".into()));
        }
        let meta = header
            .optimizer
            .ok_or_else(|| Error::ModelFormat("optimizer section without hyperparameters".into()))?;
        let step_count = r.u64_le()?;
        let shapes = model.param_shapes();
        let mut read_tensors = || -> Result<Vec<Vec<f32>>> {
            shapes
                .iter()
                .map(|&n| {
                    let mut t = vec![0.0; n];
                    r.f32_slice_into(&mut t)?;
                    Ok(t)
                })
                .collect()
        };
        let m = read_tensors()?;
        let v = match meta.kind {
            OptimizerKind::Sgd => Vec::new(),
            OptimizerKind::Adam => read_tensors()?,
        };
        Some(OptimizerState {
            kind: meta.kind,
            learning_rate: meta.learning_rate,
            momentum: meta.momentum,
            beta1: meta.beta1,
            beta2: meta.beta2,
            epsilon: meta.epsilon,
            step_count,
            m,
            v,
        })
    } else {
        None
    };
    if r.remaining() > 0 {
        return Err(Error::ModelFormat(format!(
            "{} trailing bytes after last section",
            r.remaining()
        )));
    }
    Ok((model, optimizer))
}

/// Loads the weights from a model file or checkpoint.
pub fn load_model(path: &Path) -> Result<RecurrentModel<f32>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_container(&bytes).map(|(model, _)| model)
}

/// Loads a checkpoint: weights plus optimizer state for resuming.
pub fn load_checkpoint(path: &Path) -> Result<(RecurrentModel<f32>, OptimizerState<f32>)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let (model, optimizer) = parse_container(&bytes)?;
    optimizer
        .map(|o| (model, o))
        .ok_or(Error::MissingOptimizerSection)
}
