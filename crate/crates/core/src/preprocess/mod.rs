//! Tweet normalisation: URL, mention and number placeholders, hashtag
//! segmentation and contraction expansion.

mod contractions;
mod lexicon;
mod segment;

pub use contractions::expand_contraction;
pub use lexicon::SegmentationLexicon;
pub use segment::segment_hashtag;

use crate::error::{Error, Result};

pub const USER: &str = "<user>";
pub const URL: &str = "<url>";
pub const NUMBER: &str = "<number>";
pub const PLACEHOLDERS: [&str; 3] = [USER, NUMBER, URL];

/// Input text, guaranteed non-blank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawText(String);

impl RawText {
    pub fn new(text: impl Into<String>) -> Result<Self> {
        let text = text.into();
        if text.trim().is_empty() {
            return Err(Error::contract("raw text is blank"));
        }
        Ok(Self(text))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

/// Lowercase, whitespace-free tokens with placeholders substituted.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenSequence(Vec<String>);

impl TokenSequence {
    pub fn from_tokens(tokens: Vec<String>) -> Self {
        Self(tokens)
    }

    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn join(&self) -> String {
        self.0.join(" ")
    }

    pub fn into_tokens(self) -> Vec<String> {
        self.0
    }
}

const EDGE_PUNCT: &[char] = &[
    '.', ',', '!', '?', ';', ':', '"', '(', ')', '[', ']', '{', '}', '…', '“', '”',
];

/// Normalises one tweet. Never fails: unrecognised material passes through
/// as lowercase tokens.
pub fn normalize(raw: &str, lexicon: &SegmentationLexicon) -> TokenSequence {
    let mut out = Vec::new();
    for chunk in raw.split_whitespace() {
        normalize_chunk(chunk, lexicon, &mut out);
    }
    TokenSequence(out)
}

fn normalize_chunk(chunk: &str, lexicon: &SegmentationLexicon, out: &mut Vec<String>) {
    if is_url(chunk) {
        out.push(URL.to_string());
        return;
    }
    let (lead, core, trail) = peel_punctuation(chunk);
    push_punct(out, lead);
    if !core.is_empty() {
        normalize_core(core, lexicon, out);
    }
    push_punct(out, trail);
}

fn push_punct(out: &mut Vec<String>, p: &str) {
    if !p.is_empty() {
        out.push(p.to_string());
    }
}

/// Splits leading and trailing punctuation runs off `chunk`. A chunk made
/// only of punctuation is returned whole as the core.
fn peel_punctuation(chunk: &str) -> (&str, &str, &str) {
    let core = chunk.trim_matches(EDGE_PUNCT);
    if core.is_empty() {
        return ("", chunk, "");
    }
    let start = chunk.len() - chunk.trim_start_matches(EDGE_PUNCT).len();
    let end = start + core.len();
    (&chunk[..start], core, &chunk[end..])
}

fn normalize_core(token: &str, lexicon: &SegmentationLexicon, out: &mut Vec<String>) {
    if is_url(token) {
        out.push(URL.to_string());
    } else if token.starts_with('@') {
        out.push(USER.to_string());
    } else if token.starts_with('#') {
        out.push("#".to_string());
        let body = token.trim_start_matches('#');
        // segment words are strictly shorter than `token`, so this terminates
        for word in segment_hashtag(body, lexicon) {
            normalize_chunk(&word, lexicon, out);
        }
    } else {
        finalize_word(token, out);
    }
}

fn finalize_word(word: &str, out: &mut Vec<String>) {
    if PLACEHOLDERS.contains(&word) {
        out.push(word.to_string());
    } else if is_url(word) {
        out.push(URL.to_string());
    } else if word.starts_with('@') {
        out.push(USER.to_string());
    } else if is_number(word) {
        out.push(NUMBER.to_string());
    } else {
        out.extend(expand_contraction(&word.to_lowercase()));
    }
}

fn is_url(token: &str) -> bool {
    let t = token.to_ascii_lowercase();
    t.starts_with("http://") || t.starts_with("https://") || t.starts_with("www.")
}

/// Digits with optional sign and `.`/`,` group separators.
fn is_number(token: &str) -> bool {
    let t = token.strip_prefix(['+', '-']).unwrap_or(token);
    !t.is_empty()
        && t.starts_with(|c: char| c.is_ascii_digit())
        && t.ends_with(|c: char| c.is_ascii_digit())
        && t.chars()
            .all(|c| c.is_ascii_digit() || c == '.' || c == ',')
        && !t.contains("..")
        && !t.contains(",,")
}
