use std::collections::{HashMap, HashSet};

use super::{Corpus, EmbeddingMatrix, Thesaurus, OOV};
use crate::error::{Error, Result};
use crate::ndcore::Tensor;

/// Compact vocabulary over the words a run can see: corpus tokens and their
/// thesaurus candidates, restricted to embedding coverage, plus the special
/// rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    words: Vec<String>,
    index: HashMap<String, usize>,
    /// Candidate ids per word id.
    candidates: Vec<Vec<usize>>,
    embeddings: Tensor,
}

/// Token ids and per-position candidate ids for one example.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedInput {
    pub ids: Vec<usize>,
    pub candidates: Vec<Vec<usize>>,
}

impl Vocabulary {
    pub fn build(
        corpora: &[&Corpus],
        embeddings: &EmbeddingMatrix,
        thesaurus: &Thesaurus,
        k: usize,
    ) -> Result<Self> {
        if corpora.iter().all(|c| c.is_empty()) {
            return Err(Error::contract(
                "cannot build a vocabulary from an empty corpus",
            ));
        }
        let mut words: Vec<String> = super::special_tokens().map(str::to_string).collect();
        let mut index: HashMap<String, usize> = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        let mut insert = |w: &str| {
            if !index.contains_key(w) {
                index.insert(w.to_string(), words.len());
                words.push(w.to_string());
            }
        };

        let mut seen = HashSet::new();
        let mut tokens: Vec<&str> = Vec::new();
        for corpus in corpora {
            for tok in corpus.examples.iter().flat_map(|ex| ex.tokens.tokens()) {
                if embeddings.contains(tok) && seen.insert(tok.as_str()) {
                    tokens.push(tok);
                }
            }
        }
        tokens.iter().for_each(|t| insert(t));
        for tok in &tokens {
            for cand in thesaurus.expand(tok, k) {
                if embeddings.contains(cand) {
                    insert(cand);
                }
            }
        }

        let candidates = words
            .iter()
            .map(|w| {
                thesaurus
                    .expand(w, k)
                    .into_iter()
                    .filter(|c| embeddings.contains(c))
                    .filter_map(|c| index.get(c).copied())
                    .collect()
            })
            .collect();
        let dim = embeddings.dim();
        let data = words
            .iter()
            .flat_map(|w| embeddings.lookup(w).iter().copied())
            .collect();
        let embeddings = Tensor::new(vec![words.len(), dim], data)?;
        Ok(Self {
            words,
            index,
            candidates,
            embeddings,
        })
    }

    /// Reassembles a vocabulary from stored parts (checkpoint loading).
    pub fn from_parts(
        words: Vec<String>,
        candidates: Vec<Vec<usize>>,
        embeddings: Tensor,
    ) -> Result<Self> {
        let n = words.len();
        if candidates.len() != n || embeddings.rank() != 2 || embeddings.shape()[0] != n {
            return Err(Error::shape(
                "vocabulary",
                &[n, candidates.len()],
                embeddings.shape(),
            ));
        }
        if candidates.iter().flatten().any(|&c| c >= n) {
            return Err(Error::contract("candidate id out of range"));
        }
        let index: HashMap<String, usize> = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        if index.len() != n || !index.contains_key(OOV) {
            return Err(Error::contract(
                "vocabulary words must be unique and include <oov>",
            ));
        }
        Ok(Self {
            words,
            index,
            candidates,
            embeddings,
        })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn oov_id(&self) -> usize {
        self.index[OOV]
    }

    /// Id of `word`, or the `<oov>` id.
    pub fn id(&self, word: &str) -> usize {
        self.index
            .get(word)
            .copied()
            .unwrap_or_else(|| self.oov_id())
    }

    pub fn word(&self, id: usize) -> &str {
        &self.words[id]
    }

    pub fn candidates(&self, id: usize) -> &[usize] {
        &self.candidates[id]
    }

    pub fn all_candidates(&self) -> &[Vec<usize>] {
        &self.candidates
    }

    pub fn row(&self, id: usize) -> &[f64] {
        self.embeddings.row(id)
    }

    pub fn embeddings(&self) -> &Tensor {
        &self.embeddings
    }

    pub fn dim(&self) -> usize {
        self.embeddings.shape()[1]
    }

    pub fn encode(&self, tokens: &[String]) -> EncodedInput {
        let ids: Vec<usize> = tokens.iter().map(|t| self.id(t)).collect();
        let candidates = ids.iter().map(|&i| self.candidates[i].clone()).collect();
        EncodedInput { ids, candidates }
    }
}
