use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Default number of candidate terms taken per word.
pub const DEFAULT_K: usize = 4;

/// Ranked expansion lists, most similar first. Lists are deduplicated and
/// never contain their headword.
#[derive(Debug, Clone, Default)]
pub struct Thesaurus {
    entries: HashMap<String, Vec<String>>,
}

impl Thesaurus {
    pub fn from_entries<W, C>(entries: impl IntoIterator<Item = (W, Vec<C>)>) -> Self
    where
        W: Into<String>,
        C: Into<String>,
    {
        let mut t = Self::default();
        for (w, cands) in entries {
            t.insert(w.into(), cands.into_iter().map(Into::into));
        }
        t
    }

    fn insert(&mut self, head: String, cands: impl Iterator<Item = String>) {
        let list = self.entries.entry(head.clone()).or_default();
        let mut seen: HashSet<String> = list.iter().cloned().collect();
        for c in cands {
            if c.is_empty() || c == head || !seen.insert(c.clone()) {
                continue;
            }
            list.push(c);
        }
    }

    /// Reads `word<TAB>cand1,cand2,…` lines. Repeated headwords append.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut t = Self::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (head, cands) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(origin, i + 1, "expected word<TAB>candidates"))?;
            let head = head.trim();
            if head.is_empty() {
                return Err(Error::parse(origin, i + 1, "empty headword"));
            }
            t.insert(
                head.to_string(),
                cands.split(',').map(|c| c.trim().to_string()),
            );
        }
        Ok(t)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The first `min(k, available)` candidates for `word`, in rank order.
    pub fn expand(&self, word: &str, k: usize) -> Vec<&str> {
        self.entries
            .get(word)
            .map(|c| c.iter().take(k).map(String::as_str).collect())
            .unwrap_or_default()
    }
}
