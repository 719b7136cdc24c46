use std::collections::HashMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Unigram word-frequency table used for hashtag segmentation.
#[derive(Debug, Clone, Default)]
pub struct SegmentationLexicon {
    counts: HashMap<String, u64>,
    total: u64,
    max_len: usize,
}

impl SegmentationLexicon {
    pub fn from_counts<S: AsRef<str>>(entries: impl IntoIterator<Item = (S, u64)>) -> Self {
        let mut lex = Self::default();
        for (w, c) in entries {
            lex.insert(w.as_ref(), c);
        }
        lex
    }

    fn insert(&mut self, word: &str, count: u64) {
        if count == 0 || word.is_empty() {
            return;
        }
        let word = word.to_lowercase();
        self.max_len = self.max_len.max(word.chars().count());
        *self.counts.entry(word).or_insert(0) += count;
        self.total += count;
    }

    /// Reads `word<TAB>count` lines. Blank lines and `#` comments are skipped.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut lex = Self::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (word, count) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(origin, i + 1, "expected word<TAB>count"))?;
            let count: u64 = count
                .trim()
                .parse()
                .map_err(|_| Error::parse(origin, i + 1, format!("bad count {count:?}")))?;
            lex.insert(word.trim(), count);
        }
        Ok(lex)
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.counts.contains_key(word)
    }

    /// Longest entry, in characters.
    pub fn max_word_len(&self) -> usize {
        self.max_len
    }

    /// `ln P(word)` under the unigram model, `None` for unknown words.
    pub fn log_prob(&self, word: &str) -> Option<f64> {
        self.counts
            .get(word)
            .map(|&c| (c as f64).ln() - (self.total as f64).ln())
    }
}
