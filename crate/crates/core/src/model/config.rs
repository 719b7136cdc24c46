use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// The six architectures: `S` sentiment only, `E` emotion only, `M` joint;
/// suffix `2` adds thesaurus-driven word attention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    S1,
    S2,
    E1,
    E2,
    M1,
    M2,
}

impl Mode {
    pub const ALL: [Mode; 6] = [Mode::S1, Mode::S2, Mode::E1, Mode::E2, Mode::M1, Mode::M2];

    pub fn primary_attention(self) -> bool {
        matches!(self, Mode::S2 | Mode::E2 | Mode::M2)
    }

    pub fn has_sentiment(self) -> bool {
        !matches!(self, Mode::E1 | Mode::E2)
    }

    pub fn has_emotion(self) -> bool {
        !matches!(self, Mode::S1 | Mode::S2)
    }

    pub fn tasks(self) -> impl Iterator<Item = Task> {
        [
            (self.has_sentiment(), Task::Sentiment),
            (self.has_emotion(), Task::Emotion),
        ]
        .into_iter()
        .filter_map(|(on, t)| on.then_some(t))
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::S1 => "S1",
            Mode::S2 => "S2",
            Mode::E1 => "E1",
            Mode::E2 => "E2",
            Mode::M1 => "M1",
            Mode::M2 => "M2",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidHyperparameter(format!("unknown mode {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Task {
    Sentiment,
    Emotion,
}

impl Task {
    pub fn prefix(self) -> &'static str {
        match self {
            Task::Sentiment => "sent",
            Task::Emotion => "emo",
        }
    }

    pub fn outputs(self) -> usize {
        match self {
            Task::Sentiment => 2,
            Task::Emotion => 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub embed_dim: usize,
    /// Hidden size of each LSTM direction.
    pub lstm_hidden: usize,
    /// Width of the sentence-attention context vector.
    pub context_dim: usize,
    pub dt_k: usize,
    pub dropout_rate: f64,
    pub mode: Mode,
    pub freeze_embeddings: bool,
    /// Emotion decision threshold on sigmoid outputs.
    pub threshold: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            embed_dim: 300,
            lstm_hidden: 300,
            context_dim: 150,
            dt_k: 4,
            dropout_rate: 0.6,
            mode: Mode::M2,
            freeze_embeddings: true,
            threshold: 0.5,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.embed_dim == 0 || self.lstm_hidden == 0 || self.context_dim == 0 || self.dt_k == 0 {
            return Err(Error::InvalidHyperparameter(
                "model dimensions must be positive".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::InvalidHyperparameter(format!(
                "dropout must be in [0, 1), got {}",
                self.dropout_rate
            )));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::InvalidHyperparameter(format!(
                "threshold must be in [0, 1], got {}",
                self.threshold
            )));
        }
        Ok(())
    }

    /// Width of `h_t`, both directions concatenated.
    pub fn encoder_dim(&self) -> usize {
        2 * self.lstm_hidden
    }

    /// Width of the word representation fed to sentence attention.
    pub fn word_repr_dim(&self) -> usize {
        if self.mode.primary_attention() {
            self.embed_dim + self.encoder_dim()
        } else {
            self.encoder_dim()
        }
    }

    /// Flat `key=value` echo stored in checkpoints.
    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        vec![
            ("mode", self.mode.to_string()),
            ("embed_dim", self.embed_dim.to_string()),
            ("lstm_hidden", self.lstm_hidden.to_string()),
            ("context_dim", self.context_dim.to_string()),
            ("dt_k", self.dt_k.to_string()),
            ("dropout", self.dropout_rate.to_string()),
            ("freeze_embeddings", self.freeze_embeddings.to_string()),
            ("threshold", self.threshold.to_string()),
        ]
    }

    /// Applies one echoed key; unknown keys are rejected.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad =
            |e: &dyn fmt::Display| Error::InvalidHyperparameter(format!("{key} = {value:?}: {e}"));
        match key {
            "mode" => self.mode = value.parse()?,
            "embed_dim" => self.embed_dim = value.parse().map_err(|e| bad(&e))?,
            "lstm_hidden" => self.lstm_hidden = value.parse().map_err(|e| bad(&e))?,
            "context_dim" => self.context_dim = value.parse().map_err(|e| bad(&e))?,
            "dt_k" => self.dt_k = value.parse().map_err(|e| bad(&e))?,
            "dropout" => self.dropout_rate = value.parse().map_err(|e| bad(&e))?,
            "freeze_embeddings" => self.freeze_embeddings = value.parse().map_err(|e| bad(&e))?,
            "threshold" => self.threshold = value.parse().map_err(|e| bad(&e))?,
            _ => {
                return Err(Error::InvalidHyperparameter(format!(
                    "unknown model key {key:?}"
                )))
            }
        }
        Ok(())
    }
}
