//! Reference implementations written as plain loops over `f64` slices,
//! independent of the tape, plus fixture loaders.

#![allow(dead_code, clippy::needless_range_loop)]

use std::path::PathBuf;

use mtan_core::model::{Mode, ModelConfig, Network, Task};
use mtan_core::ndcore::Tensor;
use mtan_core::preprocess::SegmentationLexicon;
use mtan_core::resources::{Corpus, EmbeddingMatrix, Thesaurus, Vocabulary};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

pub const FIXTURE_DIM: usize = 16;

pub struct Fixture {
    pub lexicon: SegmentationLexicon,
    pub train: Corpus,
    pub test: Corpus,
    pub embeddings: EmbeddingMatrix,
    pub thesaurus: Thesaurus,
}

pub fn load_fixture() -> Fixture {
    let lexicon = SegmentationLexicon::load(fixture("lexicon.tsv")).unwrap();
    let train = Corpus::load(fixture("train.tsv"), &lexicon).unwrap();
    let test = Corpus::load(fixture("test.tsv"), &lexicon).unwrap();
    let embeddings = EmbeddingMatrix::load(fixture("embeddings.txt"), FIXTURE_DIM, 0).unwrap();
    let thesaurus = Thesaurus::load(fixture("thesaurus.tsv")).unwrap();
    Fixture {
        lexicon,
        train,
        test,
        embeddings,
        thesaurus,
    }
}

impl Fixture {
    pub fn vocab(&self, k: usize) -> Vocabulary {
        Vocabulary::build(
            &[&self.train, &self.test],
            &self.embeddings,
            &self.thesaurus,
            k,
        )
        .unwrap()
    }
}

pub fn small_config(mode: Mode) -> ModelConfig {
    ModelConfig {
        embed_dim: FIXTURE_DIM,
        lstm_hidden: 8,
        context_dim: 8,
        dt_k: 4,
        dropout_rate: 0.1,
        mode,
        freeze_embeddings: true,
        threshold: 0.5,
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn at(t: &Tensor, r: usize, c: usize) -> f64 {
    t.data()[r * t.shape()[1] + c]
}

/// `x · W + b` with `W` stored row-major as `[len(x) × cols]`.
pub fn affine(x: &[f64], w: &Tensor, b: Option<&Tensor>) -> Vec<f64> {
    let cols = w.shape()[1];
    let mut out = vec![0.0; cols];
    for j in 0..cols {
        let mut acc = 0.0;
        for i in 0..x.len() {
            acc += x[i] * at(w, i, j);
        }
        out[j] = acc + b.map_or(0.0, |b| b.data()[j]);
    }
    out
}

pub fn softmax(x: &[f64]) -> Vec<f64> {
    let m = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = x.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.iter().map(|v| v / s).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// One LSTM direction, gates in the order input, forget, cell, output.
pub fn lstm(xs: &[Vec<f64>], wx: &Tensor, wh: &Tensor, b: &Tensor, reverse: bool) -> Vec<Vec<f64>> {
    let hidden = wh.shape()[0];
    let n = xs.len();
    let mut h = vec![0.0; hidden];
    let mut c = vec![0.0; hidden];
    let mut out = vec![Vec::new(); n];
    for step in 0..n {
        let t = if reverse { n - 1 - step } else { step };
        let mut z = vec![0.0; 4 * hidden];
        for j in 0..4 * hidden {
            let mut acc = b.data()[j];
            for i in 0..xs[t].len() {
                acc += xs[t][i] * at(wx, i, j);
            }
            for i in 0..hidden {
                acc += h[i] * at(wh, i, j);
            }
            z[j] = acc;
        }
        for k in 0..hidden {
            let ig = sigmoid(z[k]);
            let fg = sigmoid(z[hidden + k]);
            let gg = z[2 * hidden + k].tanh();
            let og = sigmoid(z[3 * hidden + k]);
            c[k] = fg * c[k] + ig * gg;
            h[k] = og * c[k].tanh();
        }
        out[t] = h.clone();
    }
    out
}

pub fn bilstm(xs: &[Vec<f64>], fwd: [&Tensor; 3], bwd: [&Tensor; 3]) -> Vec<Vec<f64>> {
    let f = lstm(xs, fwd[0], fwd[1], fwd[2], false);
    let b = lstm(xs, bwd[0], bwd[1], bwd[2], true);
    f.into_iter()
        .zip(b)
        .map(|(mut a, b)| {
            a.extend(b);
            a
        })
        .collect()
}

/// Returns `(α, m)`; `α` is empty and `m` zero without candidates.
pub fn word_attention(
    h: &[f64],
    cands: &[Vec<f64>],
    w: &Tensor,
    b: &Tensor,
) -> (Vec<f64>, Vec<f64>) {
    let e = b.len();
    if cands.is_empty() {
        return (Vec::new(), vec![0.0; e]);
    }
    let q = affine(h, w, Some(b));
    let scores: Vec<f64> = cands.iter().map(|v| dot(&q, v)).collect();
    let alpha = softmax(&scores);
    let mut m = vec![0.0; e];
    for (a, v) in alpha.iter().zip(cands) {
        for k in 0..e {
            m[k] += a * v[k];
        }
    }
    (alpha, m)
}

pub fn sentence_attention(
    words: &[Vec<f64>],
    w: &Tensor,
    b: &Tensor,
    u: &Tensor,
) -> (Vec<f64>, Vec<f64>) {
    let scores: Vec<f64> = words
        .iter()
        .map(|x| {
            let p: Vec<f64> = affine(x, w, Some(b)).into_iter().map(f64::tanh).collect();
            dot(&p, u.data())
        })
        .collect();
    let alpha = softmax(&scores);
    let mut out = vec![0.0; words[0].len()];
    for (a, x) in alpha.iter().zip(words) {
        for k in 0..x.len() {
            out[k] += a * x[k];
        }
    }
    (alpha, out)
}

pub fn head(s: &[f64], w: &Tensor, b: &Tensor) -> Vec<f64> {
    affine(s, w, Some(b))
}

pub struct OracleTask {
    pub word_alpha: Vec<Vec<f64>>,
    pub words: Vec<Vec<f64>>,
    pub sentence_alpha: Vec<f64>,
    pub sentence: Vec<f64>,
    pub logits: Vec<f64>,
}

pub struct OracleTrace {
    pub encoder: Vec<Vec<f64>>,
    pub tasks: Vec<(Task, OracleTask)>,
}

/// Evaluation-mode forward pass of `net` computed with the loops above.
pub fn network(net: &Network, tokens: &[String]) -> OracleTrace {
    let p = |name: &str| net.params.get(name).unwrap_or_else(|| panic!("{name}"));
    let ids: Vec<usize> = tokens.iter().map(|t| net.vocab.id(t)).collect();
    let emb = p("embedding");
    let row = |i: usize| emb.row(i).to_vec();
    let xs: Vec<Vec<f64>> = ids.iter().map(|&i| row(i)).collect();
    let encoder = bilstm(
        &xs,
        [p("lstm.fwd.w_x"), p("lstm.fwd.w_h"), p("lstm.fwd.b")],
        [p("lstm.bwd.w_x"), p("lstm.bwd.w_h"), p("lstm.bwd.b")],
    );
    let mode = net.config.mode;
    let mut tasks = Vec::new();
    for task in mode.tasks() {
        let pre = task.prefix();
        let mut word_alpha = Vec::new();
        let mut words = Vec::new();
        for (t, h) in encoder.iter().enumerate() {
            if mode.primary_attention() {
                let cands: Vec<Vec<f64>> = net
                    .vocab
                    .candidates(ids[t])
                    .iter()
                    .map(|&c| row(c))
                    .collect();
                let (a, mut m) = word_attention(
                    h,
                    &cands,
                    p(&format!("{pre}.word_attn.w")),
                    p(&format!("{pre}.word_attn.b")),
                );
                m.extend_from_slice(h);
                word_alpha.push(a);
                words.push(m);
            } else {
                word_alpha.push(Vec::new());
                words.push(h.clone());
            }
        }
        let (sentence_alpha, sentence) = sentence_attention(
            &words,
            p(&format!("{pre}.sent_attn.w")),
            p(&format!("{pre}.sent_attn.b")),
            p(&format!("{pre}.sent_attn.u")),
        );
        let logits = head(
            &sentence,
            p(&format!("{pre}.head.w")),
            p(&format!("{pre}.head.b")),
        );
        tasks.push((
            task,
            OracleTask {
                word_alpha,
                words,
                sentence_alpha,
                sentence,
                logits,
            },
        ));
    }
    OracleTrace { encoder, tasks }
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Binary counts by explicit case analysis: `(tn, fp, fn, tp)`.
pub fn count_confusion(gold: &[bool], pred: &[bool]) -> (u64, u64, u64, u64) {
    let (mut tn, mut fp, mut fn_, mut tp) = (0, 0, 0, 0);
    for i in 0..gold.len() {
        if gold[i] && pred[i] {
            tp += 1;
        } else if gold[i] {
            fn_ += 1;
        } else if pred[i] {
            fp += 1;
        } else {
            tn += 1;
        }
    }
    (tn, fp, fn_, tp)
}
