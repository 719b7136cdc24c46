//! The two-layered multi-task attention network.
//!
//! A shared BiLSTM encodes the token embeddings. Each active task then has
//! its own word attention over thesaurus candidates (modes `*2`), its own
//! sentence attention with a context vector, and an affine output head.

mod checkpoint;
mod config;
mod forward;
pub mod layers;
mod params;

pub use checkpoint::{
    load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, CHECKPOINT_MAGIC,
};
pub use config::{Mode, ModelConfig, Task};
pub use forward::{
    decide_emotions, decide_sentiment, ForwardGraph, ForwardTrace, Network, Phase, Prediction,
    TaskGraph, TaskTrace,
};
pub use params::{parameter_shapes, ModelParameters, EMBEDDING};
