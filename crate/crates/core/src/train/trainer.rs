use rand::seq::SliceRandom;

use super::loss::{joint_loss, LossWeights};
use crate::error::{Error, Result};
use crate::model::{Network, Phase};
use crate::ndcore::{adam_step, AdamConfig, AdamState, Tape, Tensor};
use crate::resources::{Corpus, EncodedInput, Example, Sentiment};
use crate::seed::stage_rng;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub adam: AdamConfig,
    pub epochs: usize,
    pub seed: u64,
    pub weights: LossWeights,
    /// Stop after this many epochs without a lower mean loss.
    pub patience: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 64,
            adam: AdamConfig::default(),
            epochs: 10,
            seed: 0,
            weights: LossWeights::default(),
            patience: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::InvalidHyperparameter(
                "batch_size must be ≥ 1".into(),
            ));
        }
        if self.epochs == 0 {
            return Err(Error::InvalidHyperparameter("epochs must be ≥ 1".into()));
        }
        if self.adam.lr.is_nan() || self.adam.lr < 0.0 {
            return Err(Error::InvalidHyperparameter("lr must be ≥ 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainLog {
    /// Mean per-example loss of each epoch run.
    pub epoch_losses: Vec<f64>,
}

impl TrainLog {
    pub fn epochs_run(&self) -> usize {
        self.epoch_losses.len()
    }
}

/// Examples that contribute a loss term under the network's mode.
/// Sentiment-only modes drop `other` examples.
pub fn training_examples<'c>(corpus: &'c Corpus, net: &Network) -> Vec<&'c Example> {
    let mode = net.config.mode;
    corpus
        .examples
        .iter()
        .filter(|ex| mode.has_emotion() || ex.sentiment != Sentiment::Other)
        .collect()
}

/// Mini-batch Adam over `corpus`. Per-example gradients are averaged over
/// each batch before a single optimiser step. Shuffling and dropout draw
/// from streams derived from `cfg.seed`.
pub fn train(corpus: &Corpus, net: &mut Network, cfg: &TrainConfig) -> Result<TrainLog> {
    cfg.validate()?;
    net.config.validate()?;
    let examples = training_examples(corpus, net);
    if examples.is_empty() {
        return Err(Error::contract("no training examples for this mode"));
    }
    let encoded: Vec<EncodedInput> = examples
        .iter()
        .map(|ex| net.encode(ex.tokens.tokens()))
        .collect();

    let trainable = net.params.trainable(&net.config);
    let mut state = AdamState::new(
        cfg.adam,
        trainable.iter().map(|&i| &net.params.tensors()[i]),
    );
    let mut shuffle_rng = stage_rng(cfg.seed, "shuffle");
    let mut dropout_rng = stage_rng(cfg.seed, "dropout");

    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut log = TrainLog {
        epoch_losses: Vec::new(),
    };
    let mut best = f64::INFINITY;
    let mut stale = 0;
    for _epoch in 0..cfg.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut epoch_loss = 0.0;
        let mut epoch_count = 0usize;
        for batch in order.chunks(cfg.batch_size) {
            let mut grads: Vec<Tensor> = trainable
                .iter()
                .map(|&i| Tensor::zeros(net.params.tensors()[i].shape()))
                .collect();
            let mut count = 0usize;
            for &idx in batch {
                let mut tape = Tape::new();
                let graph =
                    net.forward(&mut tape, &encoded[idx], Phase::Train(&mut dropout_rng))?;
                let Some(loss) = joint_loss(&mut tape, &graph, examples[idx], cfg.weights)? else {
                    continue;
                };
                epoch_loss += tape.value(loss).item();
                count += 1;
                let g = tape.backward(loss)?;
                for (acc, &pi) in grads.iter_mut().zip(&trainable) {
                    if let Some(gi) = g.get(graph.params[pi]) {
                        acc.add_assign(gi);
                    }
                }
            }
            if count == 0 {
                continue;
            }
            let scale = 1.0 / count as f64;
            for g in &mut grads {
                g.data_mut().iter_mut().for_each(|x| *x *= scale);
            }
            epoch_count += count;
            let tensors = net.params.tensors_mut();
            let mut targets: Vec<&mut Tensor> = tensors
                .iter_mut()
                .enumerate()
                .filter(|(i, _)| trainable.contains(i))
                .map(|(_, t)| t)
                .collect();
            adam_step(&mut targets, &grads, &mut state)?;
        }
        let mean = epoch_loss / epoch_count.max(1) as f64;
        log.epoch_losses.push(mean);

        if let Some(patience) = cfg.patience {
            if mean < best {
                best = mean;
                stale = 0;
            } else {
                stale += 1;
                if stale >= patience {
                    break;
                }
            }
        }
    }
    // the embedding table in the vocabulary mirrors the trained one
    if !net.config.freeze_embeddings {
        if let Some(e) = net.params.get(crate::model::EMBEDDING).cloned() {
            net.vocab = crate::resources::Vocabulary::from_parts(
                net.vocab.words().to_vec(),
                net.vocab.all_candidates().to_vec(),
                e,
            )?;
        }
    }
    Ok(log)
}
