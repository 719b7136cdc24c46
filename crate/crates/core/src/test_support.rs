//! Small networks and examples shared by unit tests.

use rand::Rng;

use crate::model::{Mode, ModelConfig, Network};
use crate::ndcore::Tensor;
use crate::preprocess::TokenSequence;
use crate::resources::{EmotionSet, Example, Sentiment, Vocabulary};
use crate::seed::stage_rng;

pub const WORDS: [&str; 10] = [
    "<pad>", "<oov>", "<user>", "<number>", "<url>", "happy", "glad", "sad", "angry", "day",
];

pub fn tiny_config(mode: Mode) -> ModelConfig {
    ModelConfig {
        embed_dim: 4,
        lstm_hidden: 3,
        context_dim: 5,
        dt_k: 2,
        dropout_rate: 0.5,
        mode,
        freeze_embeddings: true,
        threshold: 0.5,
    }
}

pub fn tiny_vocab(dim: usize) -> Vocabulary {
    let mut rng = stage_rng(11, "test.embeddings");
    let mut emb = Tensor::zeros(&[WORDS.len(), dim]);
    for x in emb.data_mut()[dim..].iter_mut() {
        *x = rng.random_range(-1.0..1.0);
    }
    let id = |w: &str| WORDS.iter().position(|x| *x == w).unwrap();
    let mut candidates = vec![Vec::new(); WORDS.len()];
    candidates[id("happy")] = vec![id("glad")];
    candidates[id("glad")] = vec![id("happy")];
    candidates[id("sad")] = vec![id("angry"), id("happy")];
    candidates[id("angry")] = vec![id("sad"), id("glad"), id("happy")];
    Vocabulary::from_parts(
        WORDS.iter().map(|w| w.to_string()).collect(),
        candidates,
        emb,
    )
    .unwrap()
}

pub fn tiny_network(mode: Mode, seed: u64) -> Network {
    let config = tiny_config(mode);
    let vocab = tiny_vocab(config.embed_dim);
    Network::new(config, vocab, seed).unwrap()
}

pub fn tokens(text: &str) -> Vec<String> {
    text.split_whitespace().map(str::to_string).collect()
}

pub fn example(id: &str, text: &str, sentiment: Sentiment, bits: [bool; 8]) -> Example {
    Example {
        id: id.to_string(),
        text: text.to_string(),
        tokens: TokenSequence::from_tokens(tokens(text)),
        sentiment,
        emotions: EmotionSet(bits),
    }
}
