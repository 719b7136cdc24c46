//! External resources: embeddings, thesaurus expansions, the labelled corpus
//! and vocabulary construction.

mod corpus;
mod embeddings;
mod thesaurus;
mod vocab;

pub use corpus::{Corpus, Emotion, EmotionSet, Example, Sentiment};
pub use embeddings::{special_tokens, EmbeddingMatrix, OOV, PAD};
pub use thesaurus::{Thesaurus, DEFAULT_K};
pub use vocab::{EncodedInput, Vocabulary};
