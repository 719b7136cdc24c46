//! Flat `key = value` run configuration.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use mtan_core::model::ModelConfig;
use mtan_core::ndcore::AdamConfig;
use mtan_core::train::TrainConfig;

/// Everything a command may need. Relative paths resolve against the
/// directory holding the config file.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub train_corpus: Option<PathBuf>,
    pub test_corpus: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub thesaurus: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub model: ModelConfig,
    pub train: TrainConfig,
    /// Model keys the file set explicitly.
    pub model_keys: Vec<String>,
}

const MODEL_KEYS: [&str; 8] = [
    "mode",
    "embed_dim",
    "lstm_hidden",
    "context_dim",
    "dt_k",
    "dropout",
    "freeze_embeddings",
    "threshold",
];

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            train_corpus: None,
            test_corpus: None,
            embeddings: None,
            thesaurus: None,
            lexicon: None,
            out_dir: PathBuf::from("out"),
            model: ModelConfig::default(),
            train: TrainConfig::default(),
            model_keys: Vec::new(),
        }
    }
}

fn number<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .ok()
        .with_context(|| format!("{key}: cannot parse {value:?}"))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base).with_context(|| format!("config {}", path.display()))
    }

    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split_once('#').map_or(raw, |(l, _)| l).trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("line {}: expected key = value", i + 1);
            };
            cfg.set(key.trim(), value.trim(), base)
                .with_context(|| format!("line {}", i + 1))?;
        }
        cfg.model.validate()?;
        cfg.train.validate()?;
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str, base: &Path) -> Result<()> {
        let path = || base.join(value);
        match key {
            "corpus.train" => self.train_corpus = Some(path()),
            "corpus.test" => self.test_corpus = Some(path()),
            "embeddings" => self.embeddings = Some(path()),
            "thesaurus" => self.thesaurus = Some(path()),
            "lexicon" => self.lexicon = Some(path()),
            "out_dir" => self.out_dir = path(),
            "batch_size" => self.train.batch_size = number(key, value)?,
            "lr" => {
                self.train.adam = AdamConfig {
                    lr: number(key, value)?,
                    ..self.train.adam
                }
            }
            "epochs" => self.train.epochs = number(key, value)?,
            "seed" => self.train.seed = number(key, value)?,
            "patience" => self.train.patience = Some(number(key, value)?),
            "loss.sentiment_weight" => self.train.weights.sentiment = number(key, value)?,
            "loss.emotion_weight" => self.train.weights.emotion = number(key, value)?,
            k if MODEL_KEYS.contains(&k) => {
                self.model.set(k, value)?;
                self.model_keys.push(k.to_string());
            }
            other => bail!("unknown config key {other:?}"),
        }
        Ok(())
    }

    /// Fails on the first configured path that does not exist.
    pub fn check_paths(&self) -> Result<()> {
        for (name, p) in self.paths() {
            if let Some(p) = p {
                if !p.is_file() {
                    bail!("{name} file not found: {}", p.display());
                }
            }
        }
        Ok(())
    }

    fn paths(&self) -> [(&'static str, Option<&PathBuf>); 5] {
        [
            ("corpus.train", self.train_corpus.as_ref()),
            ("corpus.test", self.test_corpus.as_ref()),
            ("embeddings", self.embeddings.as_ref()),
            ("thesaurus", self.thesaurus.as_ref()),
            ("lexicon", self.lexicon.as_ref()),
        ]
    }

    pub fn require<'a>(&self, name: &str, p: &'a Option<PathBuf>) -> Result<&'a Path> {
        p.as_deref()
            .with_context(|| format!("config key {name} is required for this command"))
    }
}
