use rand::Rng;

use super::{ModelConfig, Task};
use crate::error::{Error, Result};
use crate::ndcore::{truncated_normal, Tensor};
use crate::seed::stage_rng;

pub const EMBEDDING: &str = "embedding";

/// Every learnable tensor, in a fixed order, addressed by name.
///
/// Names: `embedding`; `lstm.{fwd,bwd}.{w_x,w_h,b}`;
/// `{sent,emo}.word_attn.{w,b}` (word attention only);
/// `{sent,emo}.sent_attn.{w,b,u}`; `{sent,emo}.head.{w,b}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParameters {
    names: Vec<String>,
    tensors: Vec<Tensor>,
}

/// Expected `(name, shape)` list for a configuration over `vocab_size` rows.
pub fn parameter_shapes(config: &ModelConfig, vocab_size: usize) -> Vec<(String, Vec<usize>)> {
    let e = config.embed_dim;
    let h = config.lstm_hidden;
    let d = config.word_repr_dim();
    let c = config.context_dim;
    let mut out = vec![(EMBEDDING.to_string(), vec![vocab_size, e])];
    for dir in ["fwd", "bwd"] {
        out.push((format!("lstm.{dir}.w_x"), vec![e, 4 * h]));
        out.push((format!("lstm.{dir}.w_h"), vec![h, 4 * h]));
        out.push((format!("lstm.{dir}.b"), vec![4 * h]));
    }
    for task in config.mode.tasks() {
        let p = task.prefix();
        if config.mode.primary_attention() {
            out.push((format!("{p}.word_attn.w"), vec![2 * h, e]));
            out.push((format!("{p}.word_attn.b"), vec![e]));
        }
        out.push((format!("{p}.sent_attn.w"), vec![d, c]));
        out.push((format!("{p}.sent_attn.b"), vec![c]));
        out.push((format!("{p}.sent_attn.u"), vec![c]));
        out.push((format!("{p}.head.w"), vec![d, task.outputs()]));
        out.push((format!("{p}.head.b"), vec![task.outputs()]));
    }
    out
}

impl ModelParameters {
    /// Truncated-normal initialisation; matrices use `std = 1/√fan_in`,
    /// vectors `std = 0.1`. The embedding table is copied from `embeddings`.
    pub fn init(config: &ModelConfig, embeddings: &Tensor, seed: u64) -> Result<Self> {
        config.validate()?;
        if embeddings.rank() != 2 || embeddings.shape()[1] != config.embed_dim {
            return Err(Error::shape(
                "embedding table",
                embeddings.shape(),
                &[config.embed_dim],
            ));
        }
        let mut rng = stage_rng(seed, "init");
        let mut names = Vec::new();
        let mut tensors = Vec::new();
        for (name, shape) in parameter_shapes(config, embeddings.shape()[0]) {
            let t = if name == EMBEDDING {
                embeddings.clone()
            } else {
                init_tensor(&shape, &mut rng)
            };
            names.push(name);
            tensors.push(t);
        }
        Ok(Self { names, tensors })
    }

    /// Assembles parameters from named tensors, checking them against
    /// `config`.
    pub fn from_named(config: &ModelConfig, named: Vec<(String, Tensor)>) -> Result<Self> {
        let vocab = named
            .iter()
            .find(|(n, _)| n == EMBEDDING)
            .map(|(_, t)| t.shape()[0])
            .ok_or_else(|| Error::Checkpoint("missing embedding tensor".into()))?;
        let expected = parameter_shapes(config, vocab);
        if expected.len() != named.len() {
            return Err(Error::Checkpoint(format!(
                "expected {} tensors for mode {}, found {}",
                expected.len(),
                config.mode,
                named.len()
            )));
        }
        for ((en, es), (n, t)) in expected.iter().zip(&named) {
            if en != n || es.as_slice() != t.shape() {
                return Err(Error::Checkpoint(format!(
                    "tensor {n} {:?} does not match expected {en} {es:?}",
                    t.shape()
                )));
            }
        }
        let (names, tensors) = named.into_iter().unzip();
        Ok(Self { names, tensors })
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn tensors(&self) -> &[Tensor] {
        &self.tensors
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.names.iter().map(String::as_str).zip(&self.tensors)
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.position(name).map(|i| &self.tensors[i])
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Tensor> {
        self.position(name).map(|i| &mut self.tensors[i])
    }

    /// Indices of tensors the optimiser updates.
    pub fn trainable(&self, config: &ModelConfig) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| !(config.freeze_embeddings && self.names[i] == EMBEDDING))
            .collect()
    }

    pub(crate) fn tensors_mut(&mut self) -> &mut [Tensor] {
        &mut self.tensors
    }

    pub fn total_scalars(&self) -> usize {
        self.tensors.iter().map(Tensor::len).sum()
    }

    pub fn has_task(&self, task: Task) -> bool {
        self.position(&format!("{}.head.w", task.prefix()))
            .is_some()
    }
}

fn init_tensor<R: Rng + ?Sized>(shape: &[usize], rng: &mut R) -> Tensor {
    let std = match shape {
        [fan_in, _] => 1.0 / (*fan_in as f64).sqrt(),
        _ => 0.1,
    };
    truncated_normal(shape, std, rng)
}
