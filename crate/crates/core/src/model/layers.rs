//! Network building blocks recorded on a [`Tape`].

use crate::error::{Error, Result};
use crate::ndcore::{Tape, Tensor, Var};

/// One LSTM direction: input weights `[E × 4H]`, recurrent weights
/// `[H × 4H]` and bias `[4H]`, gates packed as input, forget, cell, output.
#[derive(Debug, Clone, Copy)]
pub struct LstmVars {
    pub w_x: Var,
    pub w_h: Var,
    pub b: Var,
}

/// Runs one direction over `inputs` (`[T × E]`), returning `h_t` in time
/// order regardless of direction.
pub fn lstm_direction(
    tape: &mut Tape<'_>,
    inputs: Var,
    p: LstmVars,
    reverse: bool,
) -> Result<Vec<Var>> {
    let steps = tape.shape(inputs)[0];
    let hidden = tape.shape(p.w_h)[0];
    let proj = tape.matmul(inputs, p.w_x)?;
    let proj = tape.add_bias(proj, p.b)?;

    let mut out: Vec<Option<Var>> = vec![None; steps];
    let mut state: Option<(Var, Var)> = None;
    let order: Vec<usize> = if reverse {
        (0..steps).rev().collect()
    } else {
        (0..steps).collect()
    };
    for t in order {
        let mut z = tape.row(proj, t)?;
        if let Some((h_prev, _)) = state {
            let rec = tape.matmul(h_prev, p.w_h)?;
            z = tape.add(z, rec)?;
        }
        let i = tape.slice(z, 0, hidden)?;
        let f = tape.slice(z, hidden, hidden)?;
        let g = tape.slice(z, 2 * hidden, hidden)?;
        let o = tape.slice(z, 3 * hidden, hidden)?;
        let i = tape.sigmoid(i);
        let f = tape.sigmoid(f);
        let g = tape.tanh(g);
        let o = tape.sigmoid(o);

        let mut c = tape.mul(i, g)?;
        if let Some((_, c_prev)) = state {
            let keep = tape.mul(f, c_prev)?;
            c = tape.add(c, keep)?;
        }
        let c_act = tape.tanh(c);
        let h = tape.mul(o, c_act)?;
        out[t] = Some(h);
        state = Some((h, c));
    }
    Ok(out
        .into_iter()
        .map(|h| h.expect("every step visited"))
        .collect())
}

/// Bidirectional encoder: `h_t = [→h_t, ←h_t]` for each row of `inputs`.
pub fn bilstm_forward(
    tape: &mut Tape<'_>,
    inputs: Var,
    fwd: LstmVars,
    bwd: LstmVars,
) -> Result<Vec<Var>> {
    if tape.value(inputs).rank() != 2 {
        return Err(Error::contract("bilstm input must be a [T × E] matrix"));
    }
    let forward = lstm_direction(tape, inputs, fwd, false)?;
    let backward = lstm_direction(tape, inputs, bwd, true)?;
    forward
        .into_iter()
        .zip(backward)
        .map(|(f, b)| tape.concat(&[f, b]))
        .collect()
}

#[derive(Debug, Clone, Copy)]
pub struct WordAttentionVars {
    /// `[2H × E]`
    pub w: Var,
    /// `[E]`
    pub b: Var,
}

#[derive(Debug, Clone, Copy)]
pub struct WordAttention {
    /// Coefficients over candidates; `None` when the candidate set is empty.
    pub alpha: Option<Var>,
    /// Attention-weighted candidate embedding `m_t`.
    pub summary: Var,
    /// `[m_t, h_t]`
    pub output: Var,
}

/// Word attention over thesaurus candidates.
///
/// Scores are `(h_tᵀ W + b) · v_i`; the coefficients are their softmax and
/// `m_t = Σ α_i v_i`. With no candidates `m_t` is zero.
pub fn primary_attention(
    tape: &mut Tape<'_>,
    h: Var,
    candidates: Option<Var>,
    p: WordAttentionVars,
) -> Result<WordAttention> {
    let embed_dim = tape.shape(p.b)[0];
    let (alpha, summary) = match candidates {
        Some(cands) => {
            if tape.shape(cands).len() != 2 || tape.shape(cands)[1] != embed_dim {
                return Err(Error::shape(
                    "primary_attention",
                    tape.shape(cands),
                    &[embed_dim],
                ));
            }
            let query = tape.matmul(h, p.w)?;
            let query = tape.add(query, p.b)?;
            let scores = tape.matmul(cands, query)?;
            let alpha = tape.softmax(scores)?;
            let summary = tape.matmul(alpha, cands)?;
            (Some(alpha), summary)
        }
        None => (None, tape.constant(Tensor::zeros(&[embed_dim]))),
    };
    let output = tape.concat(&[summary, h])?;
    Ok(WordAttention {
        alpha,
        summary,
        output,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct SentenceAttentionVars {
    /// `[D × C]`
    pub w: Var,
    /// `[C]`
    pub b: Var,
    /// Context vector `[C]`.
    pub u: Var,
}

#[derive(Debug, Clone, Copy)]
pub struct SentenceAttention {
    pub alpha: Var,
    pub output: Var,
}

/// Sentence attention: `e_t = u · tanh(Wᵀ ĥ_t + b)`, `α = softmax(e)`,
/// output `Σ_t α_t ĥ_t`.
pub fn secondary_attention(
    tape: &mut Tape<'_>,
    words: &[Var],
    p: SentenceAttentionVars,
) -> Result<SentenceAttention> {
    if words.is_empty() {
        return Err(Error::contract("sentence attention over an empty sequence"));
    }
    let stacked = tape.stack_rows(words)?;
    let proj = tape.matmul(stacked, p.w)?;
    let proj = tape.add_bias(proj, p.b)?;
    let proj = tape.tanh(proj);
    let scores = tape.matmul(proj, p.u)?;
    let alpha = tape.softmax(scores)?;
    let output = tape.matmul(alpha, stacked)?;
    Ok(SentenceAttention { alpha, output })
}

#[derive(Debug, Clone, Copy)]
pub struct HeadVars {
    pub w: Var,
    pub b: Var,
}

/// One affine output layer producing logits.
pub fn task_head(tape: &mut Tape<'_>, sentence: Var, p: HeadVars) -> Result<Var> {
    let z = tape.matmul(sentence, p.w)?;
    tape.add(z, p.b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ndcore::truncated_normal;
    use crate::seed::stage_rng;

    fn random(shape: &[usize], stage: &str) -> Tensor {
        truncated_normal(shape, 0.7, &mut stage_rng(3, stage))
    }

    fn lstm_params(e: usize, h: usize, stage: &str) -> [Tensor; 3] {
        [
            random(&[e, 4 * h], &format!("{stage}.wx")),
            random(&[h, 4 * h], &format!("{stage}.wh")),
            random(&[4 * h], &format!("{stage}.b")),
        ]
    }

    #[test]
    fn zero_weight_lstm_outputs_zero() {
        let x = random(&[4, 3], "x");
        let (wx, wh, b) = (
            Tensor::zeros(&[3, 8]),
            Tensor::zeros(&[2, 8]),
            Tensor::zeros(&[8]),
        );
        let mut tape = Tape::new();
        let inputs = tape.constant_ref(&x);
        let p = LstmVars {
            w_x: tape.param(&wx),
            w_h: tape.param(&wh),
            b: tape.param(&b),
        };
        for h in bilstm_forward(&mut tape, inputs, p, p).unwrap() {
            assert_eq!(tape.value(h).data(), &[0.0; 4]);
        }
    }

    #[test]
    fn backward_direction_reads_the_reversed_sequence() {
        let x = random(&[5, 3], "x");
        let mut reversed = Tensor::zeros(&[5, 3]);
        for t in 0..5 {
            reversed.data_mut()[t * 3..t * 3 + 3].copy_from_slice(x.row(4 - t));
        }
        let [wx, wh, b] = lstm_params(3, 2, "dir");
        let mut tape = Tape::new();
        let p = LstmVars {
            w_x: tape.param(&wx),
            w_h: tape.param(&wh),
            b: tape.param(&b),
        };
        let xs = tape.constant_ref(&x);
        let xr = tape.constant_ref(&reversed);
        let back = lstm_direction(&mut tape, xs, p, true).unwrap();
        let fwd = lstm_direction(&mut tape, xr, p, false).unwrap();
        for t in 0..5 {
            assert_eq!(tape.value(back[t]), tape.value(fwd[4 - t]));
        }
    }

    #[test]
    fn identical_candidates_get_uniform_weights() {
        let row = [0.3, -1.2, 0.8];
        let mut cands = Tensor::zeros(&[4, 3]);
        for r in 0..4 {
            cands.data_mut()[r * 3..r * 3 + 3].copy_from_slice(&row);
        }
        let h = random(&[4], "h");
        let (w, b) = (random(&[4, 3], "w"), random(&[3], "b"));
        let mut tape = Tape::new();
        let hv = tape.constant_ref(&h);
        let cv = tape.constant_ref(&cands);
        let p = WordAttentionVars {
            w: tape.param(&w),
            b: tape.param(&b),
        };
        let out = primary_attention(&mut tape, hv, Some(cv), p).unwrap();
        for &a in tape.value(out.alpha.unwrap()).data() {
            assert!((a - 0.25).abs() < 1e-15);
        }
        for (m, r) in tape.value(out.summary).data().iter().zip(row) {
            assert!((m - r).abs() < 1e-15);
        }
        assert_eq!(tape.value(out.output).len(), 7);
    }

    #[test]
    fn singleton_sentence_attention_returns_the_word() {
        let word = random(&[6], "word");
        let (w, b, u) = (random(&[6, 2], "w"), random(&[2], "b"), random(&[2], "u"));
        let mut tape = Tape::new();
        let wv = tape.constant_ref(&word);
        let p = SentenceAttentionVars {
            w: tape.param(&w),
            b: tape.param(&b),
            u: tape.param(&u),
        };
        let out = secondary_attention(&mut tape, &[wv], p).unwrap();
        assert_eq!(tape.value(out.alpha).data(), &[1.0]);
        assert_eq!(tape.value(out.output), &word);
        assert!(secondary_attention(&mut tape, &[], p).is_err());
    }

    #[test]
    fn sentence_attention_is_permutation_invariant() {
        let words: Vec<Tensor> = (0..4).map(|i| random(&[5], &format!("w{i}"))).collect();
        let (w, b, u) = (random(&[5, 3], "w"), random(&[3], "b"), random(&[3], "u"));
        let run = |order: &[usize]| {
            let mut tape = Tape::new();
            let vs: Vec<Var> = order
                .iter()
                .map(|&i| tape.constant_ref(&words[i]))
                .collect();
            let p = SentenceAttentionVars {
                w: tape.param(&w),
                b: tape.param(&b),
                u: tape.param(&u),
            };
            let out = secondary_attention(&mut tape, &vs, p).unwrap();
            (
                tape.value(out.output).clone(),
                tape.value(out.alpha).clone(),
            )
        };
        let (a, alpha_a) = run(&[0, 1, 2, 3]);
        let (b2, alpha_b) = run(&[2, 0, 3, 1]);
        assert!(a.max_abs_diff(&b2) < 1e-14);
        for (pos, &orig) in [2, 0, 3, 1].iter().enumerate() {
            assert!((alpha_b.data()[pos] - alpha_a.data()[orig]).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_context_vector_averages_words() {
        let words: Vec<Tensor> = (0..3).map(|i| random(&[2], &format!("v{i}"))).collect();
        let (w, b, u) = (random(&[2, 2], "w"), random(&[2], "b"), Tensor::zeros(&[2]));
        let mut tape = Tape::new();
        let vs: Vec<Var> = words.iter().map(|t| tape.constant_ref(t)).collect();
        let p = SentenceAttentionVars {
            w: tape.param(&w),
            b: tape.param(&b),
            u: tape.param(&u),
        };
        let out = secondary_attention(&mut tape, &vs, p).unwrap();
        for k in 0..2 {
            let mean = words.iter().map(|t| t.data()[k]).sum::<f64>() / 3.0;
            assert!((tape.value(out.output).data()[k] - mean).abs() < 1e-15);
        }
    }
}
