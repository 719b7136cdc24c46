use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::preprocess::{normalize, SegmentationLexicon, TokenSequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sentiment {
    Negative,
    Positive,
    Other,
}

impl Sentiment {
    /// Index into the two-unit sentiment head, `None` for `Other`.
    pub fn class_index(self) -> Option<usize> {
        match self {
            Sentiment::Negative => Some(0),
            Sentiment::Positive => Some(1),
            Sentiment::Other => None,
        }
    }

    pub fn from_class_index(i: usize) -> Self {
        if i == 0 {
            Sentiment::Negative
        } else {
            Sentiment::Positive
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Sentiment::Negative => "negative",
            Sentiment::Positive => "positive",
            Sentiment::Other => "other",
        }
    }
}

impl fmt::Display for Sentiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Sentiment {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "negative" => Ok(Sentiment::Negative),
            "positive" => Ok(Sentiment::Positive),
            "other" => Ok(Sentiment::Other),
            _ => Err(format!("unknown sentiment label {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Emotion {
    Anger,
    Anticipation,
    Disgust,
    Fear,
    Joy,
    Sadness,
    Surprise,
    Trust,
}

impl Emotion {
    pub const ALL: [Emotion; 8] = [
        Emotion::Anger,
        Emotion::Anticipation,
        Emotion::Disgust,
        Emotion::Fear,
        Emotion::Joy,
        Emotion::Sadness,
        Emotion::Surprise,
        Emotion::Trust,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Emotion::Anger => "anger",
            Emotion::Anticipation => "anticipation",
            Emotion::Disgust => "disgust",
            Emotion::Fear => "fear",
            Emotion::Joy => "joy",
            Emotion::Sadness => "sadness",
            Emotion::Surprise => "surprise",
            Emotion::Trust => "trust",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Emotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Eight emotion bits in [`Emotion::ALL`] order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct EmotionSet(pub [bool; 8]);

impl EmotionSet {
    pub fn contains(&self, e: Emotion) -> bool {
        self.0[e.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = Emotion> + '_ {
        Emotion::ALL.into_iter().filter(|e| self.contains(*e))
    }

    pub fn as_targets(&self) -> [f64; 8] {
        self.0.map(|b| if b { 1.0 } else { 0.0 })
    }

    fn to_bits(self) -> String {
        self.0
            .iter()
            .map(|&b| if b { "1" } else { "0" })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub id: String,
    pub text: String,
    pub tokens: TokenSequence,
    pub sentiment: Sentiment,
    pub emotions: EmotionSet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub split: String,
    pub examples: Vec<Example>,
}

impl Corpus {
    /// Loads `id<TAB>text<TAB>sentiment<TAB>b1 … b8`; `#` lines are comments.
    pub fn load(path: impl AsRef<Path>, lexicon: &SegmentationLexicon) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let split = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Self::parse(&text, &path.display().to_string(), &split, lexicon)
    }

    pub fn parse(
        text: &str,
        origin: &str,
        split: &str,
        lexicon: &SegmentationLexicon,
    ) -> Result<Self> {
        let mut examples = Vec::new();
        let mut ids = HashSet::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            let lineno = i + 1;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 4 {
                return Err(Error::parse(
                    origin,
                    lineno,
                    format!("expected 4 tab-separated fields, found {}", fields.len()),
                ));
            }
            let id = fields[0].trim();
            if id.is_empty() {
                return Err(Error::parse(origin, lineno, "empty id"));
            }
            let raw = fields[1];
            if raw.trim().is_empty() {
                return Err(Error::parse(origin, lineno, "empty text"));
            }
            let sentiment: Sentiment = fields[2]
                .trim()
                .parse()
                .map_err(|e: String| Error::parse(origin, lineno, e))?;
            let emotions = parse_bits(fields[3]).map_err(|e| Error::parse(origin, lineno, e))?;
            if !ids.insert(id.to_string()) {
                return Err(Error::CorpusIntegrity(format!(
                    "{origin}:{lineno}: duplicate id {id:?}"
                )));
            }
            examples.push(Example {
                id: id.to_string(),
                text: raw.to_string(),
                tokens: normalize(raw, lexicon),
                sentiment,
                emotions,
            });
        }
        Ok(Self {
            split: split.to_string(),
            examples,
        })
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    /// Renders the corpus back to its TSV form.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for ex in &self.examples {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                ex.id,
                ex.text,
                ex.sentiment,
                ex.emotions.to_bits()
            ));
        }
        out
    }
}

fn parse_bits(field: &str) -> std::result::Result<EmotionSet, String> {
    let bits: Vec<&str> = field.split_whitespace().collect();
    if bits.len() != 8 {
        return Err(format!("expected 8 emotion bits, found {}", bits.len()));
    }
    let mut set = [false; 8];
    for (slot, b) in set.iter_mut().zip(bits) {
        *slot = match b {
            "0" => false,
            "1" => true,
            other => return Err(format!("bad emotion bit {other:?}")),
        };
    }
    Ok(EmotionSet(set))
}
