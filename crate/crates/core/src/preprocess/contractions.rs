//! Contraction table. `'s` is always read as "is".

const WHOLE: &[(&str, &[&str])] = &[
    ("won't", &["will", "not"]),
    ("can't", &["can", "not"]),
    ("cannot", &["can", "not"]),
    ("shan't", &["shall", "not"]),
    ("ain't", &["is", "not"]),
    ("let's", &["let", "us"]),
    ("y'all", &["you", "all"]),
];

const SUFFIXES: &[(&str, &str)] = &[
    ("n't", "not"),
    ("'ve", "have"),
    ("'ll", "will"),
    ("'re", "are"),
    ("'m", "am"),
    ("'d", "would"),
    ("'s", "is"),
];

/// Expands a lowercase token; anything not in the table passes through.
pub fn expand_contraction(token: &str) -> Vec<String> {
    let normalized;
    let token = if token.contains('\u{2019}') {
        normalized = token.replace('\u{2019}', "'");
        normalized.as_str()
    } else {
        token
    };
    if let Some((_, words)) = WHOLE.iter().find(|(w, _)| *w == token) {
        return words.iter().map(|w| w.to_string()).collect();
    }
    for (suffix, expansion) in SUFFIXES {
        if let Some(stem) = token.strip_suffix(suffix) {
            if !stem.is_empty() && stem.chars().all(char::is_alphabetic) {
                return vec![stem.to_string(), expansion.to_string()];
            }
        }
    }
    vec![token.to_string()]
}
