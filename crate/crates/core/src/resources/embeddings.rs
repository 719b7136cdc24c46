use std::collections::HashMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::ndcore::{truncated_normal, Tensor};
use crate::preprocess::PLACEHOLDERS;
use crate::seed::stage_rng;

pub const PAD: &str = "<pad>";
pub const OOV: &str = "<oov>";

/// Special rows present in every matrix, in row order.
pub fn special_tokens() -> impl Iterator<Item = &'static str> {
    [PAD, OOV].into_iter().chain(PLACEHOLDERS)
}

/// Word-indexed embedding rows.
///
/// Row 0 is `<pad>` (zeros) and row 1 is `<oov>`. Placeholder tokens take
/// their vector from the file when present, otherwise a seeded draw.
#[derive(Debug, Clone)]
pub struct EmbeddingMatrix {
    words: Vec<String>,
    index: HashMap<String, usize>,
    rows: Vec<Vec<f64>>,
    dim: usize,
}

impl EmbeddingMatrix {
    /// Reads word2vec text format. A leading `count dim` header is accepted.
    pub fn load(path: impl AsRef<Path>, expected_dim: usize, seed: u64) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string(), expected_dim, seed)
    }

    pub fn parse(text: &str, origin: &str, expected_dim: usize, seed: u64) -> Result<Self> {
        if expected_dim == 0 {
            return Err(Error::InvalidHyperparameter(
                "embedding dim must be positive".into(),
            ));
        }
        let mut parsed: Vec<(String, Vec<f64>)> = Vec::new();
        let mut seen: HashMap<String, ()> = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            if i == 0 && fields.len() == 2 && fields.iter().all(|f| f.parse::<u64>().is_ok()) {
                let dim: usize = fields[1].parse().unwrap_or(0);
                if dim != expected_dim {
                    return Err(Error::parse(
                        origin,
                        1,
                        format!("header declares dim {dim}, expected {expected_dim}"),
                    ));
                }
                continue;
            }
            if fields.len() != expected_dim + 1 {
                return Err(Error::parse(
                    origin,
                    i + 1,
                    format!("expected {expected_dim} values, found {}", fields.len() - 1),
                ));
            }
            let values = fields[1..]
                .iter()
                .map(|v| v.parse::<f64>())
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map_err(|e| Error::parse(origin, i + 1, format!("bad value: {e}")))?;
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Error::parse(origin, i + 1, "non-finite value"));
            }
            // first occurrence wins
            if seen.insert(fields[0].to_string(), ()).is_none() {
                parsed.push((fields[0].to_string(), values));
            }
        }
        if parsed.is_empty() {
            return Err(Error::Resource(format!(
                "embeddings file {origin} has no vectors"
            )));
        }

        let std = empirical_std(parsed.iter().flat_map(|(_, v)| v.iter().copied()));
        let mut rng = stage_rng(seed, "embeddings.specials");
        let mut m = Self {
            words: Vec::new(),
            index: HashMap::new(),
            rows: Vec::new(),
            dim: expected_dim,
        };
        let from_file: HashMap<&str, &Vec<f64>> =
            parsed.iter().map(|(w, v)| (w.as_str(), v)).collect();
        for special in special_tokens() {
            let row = if special == PAD {
                vec![0.0; expected_dim]
            } else if let Some(v) = from_file.get(special) {
                (*v).clone()
            } else {
                truncated_normal(&[expected_dim], std, &mut rng).into_data()
            };
            m.push(special, row);
        }
        for (w, v) in parsed {
            if !m.index.contains_key(&w) {
                m.push(&w, v);
            }
        }
        Ok(m)
    }

    fn push(&mut self, word: &str, row: Vec<f64>) {
        self.index.insert(word.to_string(), self.words.len());
        self.words.push(word.to_string());
        self.rows.push(row);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn id(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    /// Vector for `word`, falling back to the `<oov>` row.
    pub fn lookup(&self, word: &str) -> &[f64] {
        let id = self.id(word).unwrap_or(self.index[OOV]);
        &self.rows[id]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    /// Copies all rows into a `[len × dim]` tensor.
    pub fn to_tensor(&self) -> Tensor {
        let data = self.rows.iter().flatten().copied().collect();
        Tensor::new(vec![self.rows.len(), self.dim], data).expect("rows have uniform dim")
    }
}

fn empirical_std(values: impl Iterator<Item = f64>) -> f64 {
    let (mut n, mut sum, mut sq) = (0.0, 0.0, 0.0);
    for v in values {
        n += 1.0;
        sum += v;
        sq += v * v;
    }
    let mean = sum / n;
    let var = (sq / n - mean * mean).max(0.0);
    if var > 0.0 {
        var.sqrt()
    } else {
        0.1
    }
}
