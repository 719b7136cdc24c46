//! Two-layered multi-task attention network for joint sentiment and
//! emotion classification of short texts.
//!
//! The crate is organised bottom-up:
//!
//! * [`ndcore`]: dense `f64` tensors, a reverse-mode tape, Adam, dropout
//!   masks and a finite-difference gradient checker.
//! * [`preprocess`]: tweet normalisation (placeholders, hashtag
//!   segmentation, contraction expansion).
//! * [`resources`]: word2vec-text embeddings, thesaurus expansion lists,
//!   the labelled corpus and vocabulary construction.
//! * [`model`]: the shared BiLSTM encoder, per-task word and sentence
//!   attention, output heads and checkpoints.
//! * [`train`]: joint loss, the training loop, metrics, confusion matrices,
//!   significance testing and report rendering.

pub mod error;
pub mod model;
pub mod ndcore;
pub mod preprocess;
pub mod resources;
pub mod seed;
pub mod train;

#[cfg(test)]
mod test_support;

pub use error::{Error, Result};
