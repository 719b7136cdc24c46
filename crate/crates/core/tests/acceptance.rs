//! Acceptance suite. Each criterion prints one `PASS`/`FAIL` line; the
//! process exits non-zero if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use common::*;
use mtan_core::model::layers::{
    primary_attention, secondary_attention, SentenceAttentionVars, WordAttentionVars,
};
use mtan_core::model::{read_checkpoint, write_checkpoint, Mode, ModelConfig, Network, Phase};
use mtan_core::ndcore::{grad_check, truncated_normal, AdamConfig, Tape, Tensor, DEFAULT_EPS};
use mtan_core::preprocess::{normalize, TokenSequence};
use mtan_core::resources::{Corpus, Emotion, EmotionSet, Example, Sentiment, Vocabulary};
use mtan_core::seed::stage_rng;
use mtan_core::train::{
    evaluate, joint_loss, render_metrics, train, LossWeights, RunMeta, TrainConfig,
};
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = fn() -> Outcome;

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn gradient_suite() -> Outcome {
    let start = Instant::now();
    let fx = load_fixture();
    let vocab = fx.vocab(4);
    let tokens: Vec<String> = ["joyword", "day", "angerword"].map(String::from).to_vec();
    let ex = Example {
        id: "g".into(),
        text: tokens.join(" "),
        tokens: TokenSequence::from_tokens(tokens.clone()),
        sentiment: Sentiment::Positive,
        emotions: EmotionSet([true, false, false, false, true, false, false, false]),
    };
    let mut worst = Vec::new();
    for mode in Mode::ALL {
        let config = ModelConfig {
            lstm_hidden: 3,
            context_dim: 4,
            dropout_rate: 0.3,
            ..small_config(mode)
        };
        let net = Network::new(config, vocab.clone(), 13).unwrap();
        let input = net.encode(&tokens);
        let report = grad_check(
            |tape, vars| {
                // same mask on every evaluation
                let mut rng = stage_rng(2, "gradcheck.dropout");
                let graph = net.forward_with(tape, vars, &input, Phase::Train(&mut rng))?;
                Ok(joint_loss(tape, &graph, &ex, LossWeights::default())?
                    .expect("labelled example"))
            },
            net.params.tensors(),
            DEFAULT_EPS,
            None,
        )
        .map_err(|e| e.to_string())?;
        worst.push((mode, report.max_rel_error));
    }
    let elapsed = start.elapsed();
    let max = worst.iter().map(|w| w.1).fold(0.0, f64::max);
    let detail = format!(
        "max rel error {max:.2e} ({}) in {:.1}s",
        worst
            .iter()
            .map(|(m, e)| format!("{m} {e:.1e}"))
            .collect::<Vec<_>>()
            .join(", "),
        elapsed.as_secs_f64()
    );
    check(max < 1e-3 && elapsed < Duration::from_secs(120), detail)
}

fn attention_invariants() -> Outcome {
    let fx = load_fixture();
    let vocab = fx.vocab(4);
    let mut rng = stage_rng(21, "acceptance.attention");
    let mut worst: f64 = 0.0;
    let mut word_vectors = 0usize;
    for pass in 0..1000 {
        let mode = Mode::ALL[pass % 6];
        let net = Network::new(small_config(mode), vocab.clone(), pass as u64).unwrap();
        let len = rng.random_range(1..10);
        let tokens: Vec<String> = (0..len)
            .map(|_| vocab.words()[rng.random_range(0..vocab.len())].clone())
            .collect();
        let trace = net.run(&net.encode(&tokens)).map_err(|e| e.to_string())?;
        for task in mode.tasks() {
            let t = trace.task(task).unwrap();
            worst = worst.max((t.sentence_alpha.sum() - 1.0).abs());
            for a in t.word_alpha.iter().flatten() {
                worst = worst.max((a.sum() - 1.0).abs());
                word_vectors += 1;
            }
        }
    }

    let h = truncated_normal(&[6], 1.0, &mut rng);
    let w = truncated_normal(&[6, 4], 1.0, &mut rng);
    let b = truncated_normal(&[4], 1.0, &mut rng);
    let v = truncated_normal(&[1, 4], 1.0, &mut rng);
    let mut twin = Tensor::zeros(&[2, 4]);
    twin.data_mut()[..4].copy_from_slice(v.data());
    twin.data_mut()[4..].copy_from_slice(v.data());
    let sw = truncated_normal(&[4, 3], 1.0, &mut rng);
    let sb = truncated_normal(&[3], 1.0, &mut rng);
    let su = truncated_normal(&[3], 1.0, &mut rng);
    let word = Tensor::vector(v.data());

    let mut tape = Tape::new();
    let hv = tape.constant_ref(&h);
    let wa = WordAttentionVars {
        w: tape.param(&w),
        b: tape.param(&b),
    };
    let single = tape.constant_ref(&v);
    let pair = tape.constant_ref(&twin);
    let a1 = primary_attention(&mut tape, hv, Some(single), wa)
        .unwrap()
        .alpha
        .unwrap();
    let a2 = primary_attention(&mut tape, hv, Some(pair), wa)
        .unwrap()
        .alpha
        .unwrap();
    let sa = SentenceAttentionVars {
        w: tape.param(&sw),
        b: tape.param(&sb),
        u: tape.param(&su),
    };
    let wv = tape.constant_ref(&word);
    let s1 = secondary_attention(&mut tape, &[wv], sa).unwrap().alpha;
    let s2 = secondary_attention(&mut tape, &[wv, wv], sa).unwrap().alpha;
    let exact = tape.value(a1).data() == [1.0]
        && tape.value(a2).data() == [0.5, 0.5]
        && tape.value(s1).data() == [1.0]
        && tape.value(s2).data() == [0.5, 0.5];
    check(
        worst <= 1e-9 && exact && word_vectors >= 500,
        format!("max |Σα − 1| = {worst:.1e} over 1000 passes ({word_vectors} word vectors); singleton/symmetric exact: {exact}"),
    )
}

fn rows(t: &Tensor) -> Vec<Vec<f64>> {
    (0..t.shape()[0]).map(|r| t.row(r).to_vec()).collect()
}

fn oracle_equivalence() -> Outcome {
    use mtan_core::model::layers::{bilstm_forward, task_head, HeadVars, LstmVars};
    let mut rng = stage_rng(8, "acceptance.oracle");
    let mut worst = [0.0f64; 4];
    for _ in 0..200 {
        let (t_len, e, h, c) = (
            rng.random_range(1..7),
            rng.random_range(1..6),
            rng.random_range(1..5),
            rng.random_range(1..5),
        );
        let mut r = |s: &[usize]| truncated_normal(s, 0.8, &mut rng);
        let x = r(&[t_len, e]);
        let f = [r(&[e, 4 * h]), r(&[h, 4 * h]), r(&[4 * h])];
        let bk = [r(&[e, 4 * h]), r(&[h, 4 * h]), r(&[4 * h])];
        let n_c = rng.random_range(0..5);
        let mut r = |s: &[usize]| truncated_normal(s, 0.8, &mut rng);
        let cands = (n_c > 0).then(|| r(&[n_c, e]));
        let (ww, wb) = (r(&[2 * h, e]), r(&[e]));
        let d = e + 2 * h;
        let (sw, sb, su) = (r(&[d, c]), r(&[c]), r(&[c]));
        let (hw, hb) = (r(&[d, 8]), r(&[8]));

        let mut tape = Tape::new();
        let xv = tape.constant_ref(&x);
        let pf = LstmVars {
            w_x: tape.param(&f[0]),
            w_h: tape.param(&f[1]),
            b: tape.param(&f[2]),
        };
        let pb = LstmVars {
            w_x: tape.param(&bk[0]),
            w_h: tape.param(&bk[1]),
            b: tape.param(&bk[2]),
        };
        let enc = bilstm_forward(&mut tape, xv, pf, pb).unwrap();
        let want_enc = bilstm(&rows(&x), [&f[0], &f[1], &f[2]], [&bk[0], &bk[1], &bk[2]]);
        for (g, w) in enc.iter().zip(&want_enc) {
            worst[0] = worst[0].max(max_abs_diff(tape.value(*g).data(), w));
        }

        let cv = cands.as_ref().map(|t| tape.constant_ref(t));
        let wa = WordAttentionVars {
            w: tape.param(&ww),
            b: tape.param(&wb),
        };
        let mut words = Vec::new();
        let mut want_words = Vec::new();
        for (g, h_t) in enc.iter().zip(&want_enc) {
            let out = primary_attention(&mut tape, *g, cv, wa).unwrap();
            let (_, mut m) =
                word_attention(h_t, &cands.as_ref().map(rows).unwrap_or_default(), &ww, &wb);
            m.extend_from_slice(h_t);
            worst[1] = worst[1].max(max_abs_diff(tape.value(out.output).data(), &m));
            words.push(out.output);
            want_words.push(m);
        }

        let sa = SentenceAttentionVars {
            w: tape.param(&sw),
            b: tape.param(&sb),
            u: tape.param(&su),
        };
        let s = secondary_attention(&mut tape, &words, sa).unwrap();
        let (_, want_s) = sentence_attention(&want_words, &sw, &sb, &su);
        worst[2] = worst[2].max(max_abs_diff(tape.value(s.output).data(), &want_s));

        let hp = HeadVars {
            w: tape.param(&hw),
            b: tape.param(&hb),
        };
        let z = task_head(&mut tape, s.output, hp).unwrap();
        worst[3] = worst[3].max(max_abs_diff(tape.value(z).data(), &head(&want_s, &hw, &hb)));
    }
    check(
        worst.iter().all(|&w| w < 1e-12),
        format!(
            "max abs diff bilstm {:.1e}, word attention {:.1e}, sentence attention {:.1e}, heads {:.1e}",
            worst[0], worst[1], worst[2], worst[3]
        ),
    )
}

fn overfit_config() -> TrainConfig {
    TrainConfig {
        batch_size: 4,
        adam: AdamConfig {
            lr: 0.01,
            ..AdamConfig::default()
        },
        epochs: 200,
        seed: 1,
        weights: LossWeights::default(),
        patience: None,
    }
}

fn overfit() -> Outcome {
    let start = Instant::now();
    let fx = load_fixture();
    let mut net = Network::new(small_config(Mode::M2), fx.vocab(4), 1).unwrap();
    let log = train(&fx.train, &mut net, &overfit_config()).map_err(|e| e.to_string())?;
    let m = evaluate(
        &fx.train,
        &net,
        RunMeta {
            mode: Mode::M2,
            seed: 1,
            epoch: log.epochs_run(),
        },
    )
    .unwrap();
    let (s, e) = (m.sentiment.unwrap().macro_f1, m.emotion.unwrap().micro.f1);
    let elapsed = start.elapsed();
    let progress = log.epoch_losses[49] < log.epoch_losses[0];
    check(
        s >= 0.95 && e >= 0.95 && progress && elapsed < Duration::from_secs(300),
        format!(
            "train sentiment macro-F1 {s:.4}, emotion micro-F1 {e:.4} after {} epochs in {:.1}s; loss {:.4} → {:.4} (epoch 50 {:.4})",
            log.epochs_run(),
            elapsed.as_secs_f64(),
            log.epoch_losses[0],
            log.epoch_losses.last().unwrap(),
            log.epoch_losses[49]
        ),
    )
}

/// Sentiment is positive iff more positive-leaning emotions than negative
/// ones are present.
fn synthetic_corpus(n: usize, seed: u64, split: &str) -> Corpus {
    let positive = [
        Emotion::Anticipation,
        Emotion::Joy,
        Emotion::Surprise,
        Emotion::Trust,
    ];
    let fillers = [
        "the", "a", "day", "today", "is", "it", "really", "so", "this", "we", "game", "team",
    ];
    let mut rng = stage_rng(seed, split);
    let mut examples = Vec::new();
    while examples.len() < n {
        let mut bits = [false; 8];
        for _ in 0..rng.random_range(1..3) {
            bits[rng.random_range(0..8)] = true;
        }
        let mut tokens: Vec<String> = Emotion::ALL
            .iter()
            .filter(|e| bits[e.index()])
            .map(|e| format!("{}word", e.as_str()))
            .collect();
        for _ in 0..rng.random_range(1..4) {
            let at = rng.random_range(0..=tokens.len());
            tokens.insert(at, fillers[rng.random_range(0..fillers.len())].to_string());
        }
        let pos = Emotion::ALL
            .iter()
            .filter(|e| bits[e.index()] && positive.contains(e))
            .count();
        let neg = bits.iter().filter(|&&b| b).count() - pos;
        examples.push(Example {
            id: format!("{split}{}", examples.len()),
            text: tokens.join(" "),
            tokens: TokenSequence::from_tokens(tokens),
            sentiment: if pos > neg {
                Sentiment::Positive
            } else {
                Sentiment::Negative
            },
            emotions: EmotionSet(bits),
        });
    }
    Corpus {
        split: split.into(),
        examples,
    }
}

fn multitask() -> Outcome {
    let fx = load_fixture();
    let train_c = synthetic_corpus(96, 3, "train");
    let test_c = synthetic_corpus(48, 4, "test");
    let vocab = Vocabulary::build(&[&train_c, &test_c], &fx.embeddings, &fx.thesaurus, 4).unwrap();
    let mut scores = Vec::new();
    for seed in 0..5 {
        let mut pair = [0.0; 2];
        for (slot, mode) in [Mode::S2, Mode::M2].into_iter().enumerate() {
            let mut net = Network::new(small_config(mode), vocab.clone(), seed).unwrap();
            let cfg = TrainConfig {
                epochs: 40,
                seed,
                batch_size: 8,
                ..overfit_config()
            };
            train(&train_c, &mut net, &cfg).map_err(|e| e.to_string())?;
            let m = evaluate(
                &test_c,
                &net,
                RunMeta {
                    mode,
                    seed,
                    epoch: 40,
                },
            )
            .unwrap();
            pair[slot] = m.sentiment.unwrap().macro_f1;
        }
        scores.push(pair);
    }
    let mean = |i: usize| scores.iter().map(|p| p[i]).sum::<f64>() / scores.len() as f64;
    let (s2, m2) = (mean(0), mean(1));
    let per_seed = scores
        .iter()
        .map(|p| format!("{:.3}/{:.3}", p[0], p[1]))
        .collect::<Vec<_>>()
        .join(" ");
    check(
        m2 >= s2 - 0.02,
        format!(
            "mean test sentiment macro-F1 S2 {s2:.4}, M2 {m2:.4} over 5 seeds (S2/M2: {per_seed})"
        ),
    )
}

fn preprocessing() -> Outcome {
    let fx = load_fixture();
    let cases: [(&str, &[&str]); 8] = [
        ("#BeautifulDay", &["#", "beautiful", "day"]),
        ("we've", &["we", "have"]),
        ("@John", &["<user>"]),
        ("http://t.co/abc123", &["<url>"]),
        ("see www.example.com now", &["see", "<url>", "now"]),
        (
            "1,000 fans and 3.5 goals",
            &["<number>", "fans", "and", "<number>", "goals"],
        ),
        (
            "@realMessi he is a real sportsman",
            &["<user>", "he", "is", "a", "real", "sportsman"],
        ),
        (
            "Can't wait for #GameDay!",
            &["can", "not", "wait", "for", "#", "game", "day", "!"],
        ),
    ];
    let mut failures = Vec::new();
    for (input, want) in cases {
        let got = normalize(input, &fx.lexicon);
        if got.tokens() != want {
            failures.push(format!("{input:?} → {:?}", got.tokens()));
        }
    }
    check(
        failures.is_empty(),
        if failures.is_empty() {
            format!("{} golden cases", cases.len())
        } else {
            failures.join("; ")
        },
    )
}

fn thesaurus() -> Outcome {
    let fx = load_fixture();
    let got = fx.thesaurus.expand("good", 4);
    check(
        got == ["great", "nice", "awesome", "superb"],
        format!("expand(\"good\", 4) = {got:?}"),
    )
}

/// S1 network whose prediction is the sign of the first embedding
/// coordinate; the forward LSTM sees it only through the cell gate.
fn sign_network() -> Network {
    let words = ["<pad>", "<oov>", "n", "p"].map(String::from).to_vec();
    let emb = Tensor::matrix(&[
        vec![0.0, 0.0],
        vec![0.0, 0.0],
        vec![-1.0, 0.0],
        vec![1.0, 0.0],
    ]);
    let vocab = Vocabulary::from_parts(words, vec![Vec::new(); 4], emb).unwrap();
    let config = ModelConfig {
        embed_dim: 2,
        lstm_hidden: 1,
        context_dim: 1,
        dropout_rate: 0.0,
        mode: Mode::S1,
        ..ModelConfig::default()
    };
    let mut net = Network::new(config, vocab, 0).unwrap();
    for (name, t) in net
        .params
        .names()
        .to_vec()
        .iter()
        .zip(net.params.tensors().to_vec())
    {
        if name != "embedding" {
            *net.params.get_mut(name).unwrap() = Tensor::zeros(t.shape());
        }
    }
    net.params.get_mut("lstm.fwd.w_x").unwrap().data_mut()[2] = 1.0;
    let hw = net.params.get_mut("sent.head.w").unwrap();
    hw.data_mut()[0] = -10.0;
    hw.data_mut()[1] = 10.0;
    net
}

fn metric_oracle() -> Outcome {
    let net = sign_network();
    // (gold, predicted token, count): rows actual, columns predicted
    let cells = [
        (Sentiment::Negative, "n", 1184),
        (Sentiment::Negative, "p", 88),
        (Sentiment::Positive, "n", 236),
        (Sentiment::Positive, "p", 325),
    ];
    let mut examples = Vec::new();
    for (gold, tok, count) in cells {
        for _ in 0..count {
            examples.push(Example {
                id: examples.len().to_string(),
                text: tok.into(),
                tokens: TokenSequence::from_tokens(vec![tok.into()]),
                sentiment: gold,
                emotions: EmotionSet::default(),
            });
        }
    }
    let corpus = Corpus {
        split: "table".into(),
        examples,
    };
    let m = evaluate(
        &corpus,
        &net,
        RunMeta {
            mode: Mode::S1,
            seed: 0,
            epoch: 0,
        },
    )
    .unwrap();
    let s = m.sentiment.unwrap();
    let c = s.confusion;
    let counts_ok = (c.tn, c.fp, c.fn_, c.tp) == (1184, 88, 236, 325);
    check(
        counts_ok
            && (s.negative.f1 - 0.8797).abs() <= 5e-4
            && (s.positive.f1 - 0.6674).abs() <= 5e-4,
        format!(
            "F_neg {:.4}, F_pos {:.4} (confusion tn {} fp {} fn {} tp {})",
            s.negative.f1, s.positive.f1, c.tn, c.fp, c.fn_, c.tp
        ),
    )
}

fn trained_artifacts(seed: u64) -> (Vec<u8>, String) {
    let fx = load_fixture();
    let mut net = Network::new(small_config(Mode::M2), fx.vocab(4), seed).unwrap();
    let cfg = TrainConfig {
        epochs: 5,
        seed,
        ..overfit_config()
    };
    let log = train(&fx.train, &mut net, &cfg).unwrap();
    let mut bytes = Vec::new();
    write_checkpoint(&net, &mut bytes).unwrap();
    let m = evaluate(
        &fx.test,
        &net,
        RunMeta {
            mode: Mode::M2,
            seed,
            epoch: log.epochs_run(),
        },
    )
    .unwrap();
    (bytes, render_metrics(&m))
}

fn determinism() -> Outcome {
    let (c1, m1) = trained_artifacts(7);
    let (c2, m2) = trained_artifacts(7);
    let (c3, _) = trained_artifacts(8);
    check(
        c1 == c2 && m1 == m2 && c1 != c3,
        format!(
            "checkpoints {} bytes identical: {}, metrics identical: {}, other seed differs: {}",
            c1.len(),
            c1 == c2,
            m1 == m2,
            c1 != c3
        ),
    )
}

fn checkpoint_round_trip() -> Outcome {
    let (bytes, _) = trained_artifacts(3);
    let net = read_checkpoint(&mut bytes.as_slice()).map_err(|e| e.to_string())?;
    let again = read_checkpoint(&mut bytes.as_slice()).unwrap();
    let fx = load_fixture();
    let mut compared = 0;
    for ex in fx.test.examples.iter().chain(&fx.train.examples) {
        let a = net.run(&net.encode(ex.tokens.tokens())).unwrap();
        let b = again.run(&again.encode(ex.tokens.tokens())).unwrap();
        for task in Mode::M2.tasks() {
            let (x, y) = (&a.task(task).unwrap().logits, &b.task(task).unwrap().logits);
            if x.data()
                .iter()
                .zip(y.data())
                .any(|(p, q)| p.to_bits() != q.to_bits())
            {
                return Err(format!("logits differ on {}", ex.id));
            }
            compared += 1;
        }
    }
    let mut rewritten = Vec::new();
    write_checkpoint(&net, &mut rewritten).unwrap();
    check(
        rewritten == bytes,
        format!(
            "{compared} logit vectors bit-identical after reload; re-save identical: {}",
            rewritten == bytes
        ),
    )
}

fn main() {
    let criteria: [(&str, Criterion); 10] = [
        ("gradient suite", gradient_suite),
        ("attention invariants", attention_invariants),
        ("oracle equivalence", oracle_equivalence),
        ("overfit check", overfit),
        ("multi-task plumbing", multitask),
        ("preprocessing golden cases", preprocessing),
        ("thesaurus contract", thesaurus),
        ("metric oracle", metric_oracle),
        ("determinism", determinism),
        ("checkpoint round-trip", checkpoint_round_trip),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
