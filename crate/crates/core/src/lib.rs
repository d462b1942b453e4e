//! Predict an Indian state of residence from a last name, then map states to
//! the languages a person is likely to understand.
//!
//! The pipeline: electoral-roll-shaped rows are filtered into clean
//! (last name, sex, state) records ([`ingest`]), aggregated into per-name
//! state histograms and split by name into train/test sides ([`corpus`]),
//! used to train 2-layer character-level recurrent classifiers built on
//! hand-written cells and optimizers ([`nncore`], [`models`], [`train`]),
//! scored with top-3 and modal-state metrics plus slice analyses and lowess
//! curves ([`eval`]), and finally mapped from states to languages through an
//! editable table ([`langmap`]). [`synth`] generates desk-scale corpora with
//! a controllable name-suffix/state signal so the whole pipeline is testable
//! without the real rolls.

pub mod cli;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod ingest;
pub mod langmap;
pub mod manifest;
pub mod models;
pub mod nncore;
pub mod synth;
pub mod train;

pub use error::{Error, Result};
