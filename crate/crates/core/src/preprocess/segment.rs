use super::SegmentationLexicon;

/// Splits a hashtag body into lowercase words.
///
/// Camel-case and letter/digit boundaries are taken as fixed split points.
/// Each resulting chunk is then segmented into lexicon words by maximising
/// the summed unigram log-probability; a chunk with no full cover is kept
/// whole.
pub fn segment_hashtag(body: &str, lexicon: &SegmentationLexicon) -> Vec<String> {
    if body.is_empty() {
        return Vec::new();
    }
    let mut out = Vec::new();
    for chunk in camel_chunks(body) {
        let lower = chunk.to_lowercase();
        match viterbi(&lower, lexicon) {
            Some(words) => out.extend(words),
            None => out.push(lower),
        }
    }
    out
}

/// Chunks at lower→upper, `ABc`-style acronym ends and letter↔digit changes.
fn camel_chunks(body: &str) -> Vec<&str> {
    let chars: Vec<(usize, char)> = body.char_indices().collect();
    let mut cuts = vec![0];
    for w in 1..chars.len() {
        let (prev, cur) = (chars[w - 1].1, chars[w].1);
        let next = chars.get(w + 1).map(|&(_, c)| c);
        let boundary = (prev.is_lowercase() && cur.is_uppercase())
            || (prev.is_uppercase() && cur.is_uppercase() && next.is_some_and(char::is_lowercase))
            || (prev.is_alphabetic() && cur.is_ascii_digit())
            || (prev.is_ascii_digit() && cur.is_alphabetic());
        if boundary {
            cuts.push(chars[w].0);
        }
    }
    cuts.push(body.len());
    cuts.windows(2).map(|w| &body[w[0]..w[1]]).collect()
}

/// Best-scoring cover of `text` by lexicon words, or `None`.
pub(crate) fn viterbi(text: &str, lexicon: &SegmentationLexicon) -> Option<Vec<String>> {
    let bounds: Vec<usize> = text
        .char_indices()
        .map(|(i, _)| i)
        .chain(std::iter::once(text.len()))
        .collect();
    let n = bounds.len() - 1;
    if n == 0 {
        return None;
    }
    let max_len = lexicon.max_word_len();
    // best[i]: (score, start of last word) for the prefix of i chars
    let mut best: Vec<Option<(f64, usize)>> = vec![None; n + 1];
    best[0] = Some((0.0, 0));
    for end in 1..=n {
        let lo = end.saturating_sub(max_len);
        for start in lo..end {
            let Some((prefix, _)) = best[start] else {
                continue;
            };
            let Some(lp) = lexicon.log_prob(&text[bounds[start]..bounds[end]]) else {
                continue;
            };
            let score = prefix + lp;
            if best[end].is_none_or(|(s, _)| score > s) {
                best[end] = Some((score, start));
            }
        }
    }
    best[n]?;
    let mut words = Vec::new();
    let mut end = n;
    while end > 0 {
        let (_, start) = best[end].expect("back-pointer on a reachable prefix");
        words.push(text[bounds[start]..bounds[end]].to_string());
        end = start;
    }
    words.reverse();
    Some(words)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lex(words: &[(&str, u64)]) -> SegmentationLexicon {
        SegmentationLexicon::from_counts(words.iter().copied())
    }

    #[test]
    fn camel_case_without_lexicon() {
        let empty = SegmentationLexicon::default();
        assert_eq!(
            segment_hashtag("BeautifulDay", &empty),
            ["beautiful", "day"]
        );
        assert_eq!(segment_hashtag("HTMLParser", &empty), ["html", "parser"]);
        assert_eq!(segment_hashtag("Top10", &empty), ["top", "10"]);
    }

    #[test]
    fn single_word_and_fallback() {
        let l = lex(&[("cat", 5), ("dog", 5)]);
        assert_eq!(segment_hashtag("cat", &l), ["cat"]);
        assert_eq!(segment_hashtag("catdog", &l), ["cat", "dog"]);
        assert_eq!(segment_hashtag("xyzzy", &l), ["xyzzy"]);
    }

    #[test]
    fn prefers_more_probable_split() {
        let l = lex(&[("now", 100), ("here", 100), ("no", 10), ("where", 5)]);
        assert_eq!(segment_hashtag("nowhere", &l), ["now", "here"]);
        let l = lex(&[("now", 1), ("here", 1), ("no", 100), ("where", 100)]);
        assert_eq!(segment_hashtag("nowhere", &l), ["no", "where"]);
    }

    #[test]
    fn non_ascii_bodies_do_not_split_inside_a_char() {
        let l = lex(&[("café", 3), ("olé", 2)]);
        assert_eq!(segment_hashtag("caféolé", &l), ["café", "olé"]);
    }
}
