use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use mtan_core::model::{load_checkpoint, save_checkpoint, Mode, ModelConfig, Network, Phase};
use mtan_core::ndcore::{grad_check, truncated_normal, Fault, DEFAULT_EPS};
use mtan_core::preprocess::{normalize, SegmentationLexicon, TokenSequence};
use mtan_core::resources::{
    Corpus, EmbeddingMatrix, Emotion, EmotionSet, Example, Sentiment, Thesaurus, Vocabulary,
};
use mtan_core::seed::stage_rng;
use mtan_core::train::{
    self, evaluate as score, joint_loss, parse_metrics, render_summary, render_table,
    significance_test, MetricsReport, RunMeta,
};

use crate::config::RunConfig;
use crate::Global;

const GRAD_TOL: f64 = 1e-3;

pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

pub type Outcome = Result<(), Failure>;

trait Exit<T> {
    /// Configuration, input or usage problem: exit 2.
    fn usage(self) -> Result<T, Failure>;
    /// Anything else: exit 1.
    fn failed(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Exit<T> for Result<T, E> {
    fn usage(self) -> Result<T, Failure> {
        self.map_err(|e| Failure {
            code: 2,
            error: e.into(),
        })
    }

    fn failed(self) -> Result<T, Failure> {
        self.map_err(|e| Failure {
            code: 1,
            error: e.into(),
        })
    }
}

fn load_config(g: &Global) -> Result<RunConfig, Failure> {
    let mut cfg = match &g.config {
        Some(p) => RunConfig::load(p).usage()?,
        None => RunConfig::default(),
    };
    if let Some(seed) = g.seed {
        cfg.train.seed = seed;
    }
    if let Some(out) = &g.out {
        cfg.out_dir = out.clone();
    }
    cfg.check_paths().usage()?;
    Ok(cfg)
}

fn out_dir(cfg: &RunConfig) -> Result<&Path, Failure> {
    fs::create_dir_all(&cfg.out_dir)
        .with_context(|| format!("creating output directory {}", cfg.out_dir.display()))
        .usage()?;
    Ok(&cfg.out_dir)
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Outcome {
    fs::write(path, contents)
        .with_context(|| format!("writing {}", path.display()))
        .failed()
}

fn lexicon(cfg: &RunConfig) -> Result<SegmentationLexicon, Failure> {
    match &cfg.lexicon {
        Some(p) => SegmentationLexicon::load(p)
            .context("loading lexicon")
            .usage(),
        None => Ok(SegmentationLexicon::default()),
    }
}

fn corpus(path: &Path, lex: &SegmentationLexicon, what: &str) -> Result<Corpus, Failure> {
    Corpus::load(path, lex)
        .with_context(|| format!("loading {what}"))
        .usage()
}

struct Resources {
    train: Corpus,
    test: Option<Corpus>,
    vocab: Vocabulary,
}

fn resources(cfg: &RunConfig) -> Result<Resources, Failure> {
    let train_path = cfg.require("corpus.train", &cfg.train_corpus).usage()?;
    let emb_path = cfg.require("embeddings", &cfg.embeddings).usage()?;
    let lex = lexicon(cfg)?;
    let train = corpus(train_path, &lex, "corpus.train")?;
    let test = cfg
        .test_corpus
        .as_deref()
        .map(|p| corpus(p, &lex, "corpus.test"))
        .transpose()?;
    let emb = EmbeddingMatrix::load(emb_path, cfg.model.embed_dim, cfg.train.seed)
        .context("loading embeddings")
        .usage()?;
    let thes = match &cfg.thesaurus {
        Some(p) => Thesaurus::load(p).context("loading thesaurus").usage()?,
        None if cfg.model.mode.primary_attention() => {
            return Err(anyhow!(
                "config key thesaurus is required for mode {}",
                cfg.model.mode
            ))
            .usage()
        }
        None => Thesaurus::default(),
    };
    let mut corpora = vec![&train];
    corpora.extend(test.as_ref());
    let vocab = Vocabulary::build(&corpora, &emb, &thes, cfg.model.dt_k)
        .context("building vocabulary")
        .usage()?;
    Ok(Resources { train, test, vocab })
}

pub fn preprocess(g: &Global, text: &[String]) -> Outcome {
    let cfg = load_config(g)?;
    let lex = lexicon(&cfg)?;
    if !text.is_empty() {
        for t in text {
            println!("{}", normalize(t, &lex).join());
        }
        return Ok(());
    }
    let train_path = cfg.require("corpus.train", &cfg.train_corpus).usage()?;
    let dir = out_dir(&cfg)?;
    for path in std::iter::once(train_path).chain(cfg.test_corpus.as_deref()) {
        let c = corpus(path, &lex, "corpus")?;
        let mut out = String::new();
        for ex in &c.examples {
            let _ = writeln!(out, "{}\t{}", ex.id, ex.tokens.join());
        }
        let target = dir.join(format!("{}.tokens.tsv", c.split));
        write(&target, out)?;
        println!("{} examples → {}", c.len(), target.display());
    }
    Ok(())
}

pub fn build_vocab(g: &Global) -> Outcome {
    let cfg = load_config(g)?;
    let res = resources(&cfg)?;
    let dir = out_dir(&cfg)?;
    let v = &res.vocab;
    let mut out = String::new();
    for (i, w) in v.words().iter().enumerate() {
        let cands: Vec<&str> = v.candidates(i).iter().map(|&c| v.word(c)).collect();
        let _ = writeln!(out, "{w}\t{}", cands.join(","));
    }
    let target = dir.join("vocab.tsv");
    write(&target, out)?;
    let with = v.all_candidates().iter().filter(|c| !c.is_empty()).count();
    println!(
        "{} words, {with} with candidates → {}",
        v.len(),
        target.display()
    );
    Ok(())
}

pub fn train(g: &Global) -> Outcome {
    let cfg = load_config(g)?;
    let res = resources(&cfg)?;
    let dir = out_dir(&cfg)?.to_path_buf();
    let seed = cfg.train.seed;
    let mut net = Network::new(cfg.model.clone(), res.vocab, seed)
        .context("initialising model")
        .usage()?;
    let log = train::train(&res.train, &mut net, &cfg.train)
        .context("training")
        .failed()?;

    let mut epochs = String::from("epoch\tloss\n");
    for (i, l) in log.epoch_losses.iter().enumerate() {
        let _ = writeln!(epochs, "{}\t{l}", i + 1);
    }
    write(&dir.join("epoch_log.tsv"), epochs)?;
    save_checkpoint(&net, dir.join("checkpoint.bin"))
        .context("saving checkpoint")
        .failed()?;

    let eval_on = res.test.as_ref().unwrap_or(&res.train);
    let meta = RunMeta {
        mode: net.config.mode,
        seed,
        epoch: log.epochs_run(),
    };
    let metrics = score(eval_on, &net, meta).context("evaluating").failed()?;
    let table = train::report(&metrics, dir.join("metrics.txt"))
        .context("writing report")
        .failed()?;
    println!(
        "evaluated on {} ({} examples)\n",
        eval_on.split,
        eval_on.len()
    );
    print!("{table}");
    Ok(())
}

fn checkpoint(cfg: &RunConfig, path: Option<PathBuf>) -> Result<Network, Failure> {
    let path = path.unwrap_or_else(|| cfg.out_dir.join("checkpoint.bin"));
    let net = load_checkpoint(&path)
        .with_context(|| format!("loading checkpoint {}", path.display()))
        .usage()?;
    let stored = net.config.to_pairs();
    let wanted = cfg.model.to_pairs();
    for key in &cfg.model_keys {
        let find =
            |pairs: &[(&str, String)]| pairs.iter().find(|(k, _)| k == key).map(|(_, v)| v.clone());
        if find(&stored) != find(&wanted) {
            return Err(anyhow!(
                "config sets {key} = {} but the checkpoint has {}",
                find(&wanted).unwrap_or_default(),
                find(&stored).unwrap_or_default()
            ))
            .usage();
        }
    }
    Ok(net)
}

pub fn evaluate(g: &Global, ckpt: Option<PathBuf>, corpus_path: Option<PathBuf>) -> Outcome {
    let cfg = load_config(g)?;
    let net = checkpoint(&cfg, ckpt)?;
    let path = corpus_path
        .or_else(|| cfg.test_corpus.clone())
        .or_else(|| cfg.train_corpus.clone())
        .context("no corpus: pass --corpus or set corpus.test")
        .usage()?;
    let lex = lexicon(&cfg)?;
    let c = corpus(&path, &lex, "evaluation corpus")?;
    let meta = RunMeta {
        mode: net.config.mode,
        seed: cfg.train.seed,
        epoch: 0,
    };
    let metrics = score(&c, &net, meta).context("evaluating").usage()?;
    let dir = out_dir(&cfg)?;
    let table = train::report(&metrics, dir.join("eval_metrics.txt"))
        .context("writing report")
        .failed()?;
    print!("{table}");
    Ok(())
}

pub fn predict(g: &Global, ckpt: Option<PathBuf>, text: &[String]) -> Outcome {
    let joined = text.join(" ");
    if joined.trim().is_empty() {
        return Err(anyhow!(
            "empty input text\n\nUsage: mtan predict [--checkpoint PATH] <TEXT>..."
        ))
        .usage();
    }
    let cfg = load_config(g)?;
    let net = checkpoint(&cfg, ckpt)?;
    let lex = lexicon(&cfg)?;
    let tokens = normalize(&joined, &lex);
    if tokens.is_empty() {
        return Err(anyhow!("input text has no tokens")).usage();
    }
    let pred = net
        .predict(tokens.tokens())
        .context("forward pass")
        .failed()?;
    println!("tokens: {}", tokens.join());
    if let Some((s, p)) = pred.sentiment {
        println!(
            "sentiment: {s} (negative {:.4}, positive {:.4})",
            p[0], p[1]
        );
    }
    if let Some((set, probs)) = pred.emotions {
        let names: Vec<&str> = set.iter().map(Emotion::as_str).collect();
        println!(
            "emotions: {}",
            if names.is_empty() {
                "none".to_string()
            } else {
                names.join(", ")
            }
        );
        for e in Emotion::ALL {
            println!("  {:<12} {:.4}", e.as_str(), probs[e.index()]);
        }
    }
    Ok(())
}

/// Random ten-word vocabulary with a few candidate lists.
fn gradcheck_vocab(dim: usize, seed: u64) -> Vocabulary {
    let words: Vec<String> = [
        "<pad>", "<oov>", "<user>", "<number>", "<url>", "good", "great", "nice", "bad", "day",
    ]
    .map(String::from)
    .to_vec();
    let mut rng = stage_rng(seed, "gradcheck.embeddings");
    let mut emb = truncated_normal(&[words.len(), dim], 0.5, &mut rng);
    emb.data_mut()[..dim].iter_mut().for_each(|x| *x = 0.0);
    let mut cands = vec![Vec::new(); words.len()];
    cands[5] = vec![6, 7];
    cands[8] = vec![5];
    cands[9] = vec![6, 7, 8];
    Vocabulary::from_parts(words, cands, emb).expect("consistent gradcheck vocabulary")
}

pub fn gradcheck(g: &Global, modes: &[String], inject_fault: bool) -> Outcome {
    let cfg = load_config(g)?;
    let modes: Vec<Mode> = if modes.is_empty() {
        Mode::ALL.to_vec()
    } else {
        modes
            .iter()
            .map(|m| m.trim().parse::<Mode>())
            .collect::<Result<_, _>>()
            .usage()?
    };
    let seed = cfg.train.seed;
    let base = ModelConfig {
        embed_dim: 4,
        lstm_hidden: 3,
        context_dim: 4,
        ..cfg.model.clone()
    };
    let vocab = gradcheck_vocab(base.embed_dim, seed);
    let tokens: Vec<String> = ["good", "day", "bad"].map(String::from).to_vec();
    let bits = EmotionSet([true, false, false, true, false, false, false, true]);
    let example = Example {
        id: "gradcheck".into(),
        text: tokens.join(" "),
        tokens: TokenSequence::from_tokens(tokens.clone()),
        sentiment: Sentiment::Positive,
        emotions: bits,
    };
    let fault = inject_fault.then_some(Fault::TanhBackward);

    let mut failing = Vec::new();
    for mode in modes {
        let net = Network::new(
            ModelConfig {
                mode,
                ..base.clone()
            },
            vocab.clone(),
            seed,
        )
        .usage()?;
        let input = net.encode(&tokens);
        let report = grad_check(
            |tape, vars| {
                let mut rng = stage_rng(seed, "gradcheck.dropout");
                let graph = net.forward_with(tape, vars, &input, Phase::Train(&mut rng))?;
                Ok(joint_loss(tape, &graph, &example, cfg.train.weights)?
                    .expect("labelled example"))
            },
            net.params.tensors(),
            DEFAULT_EPS,
            fault,
        )
        .context("gradient check")
        .failed()?;
        let mut ranked: Vec<(&str, f64)> = net
            .params
            .names()
            .iter()
            .map(String::as_str)
            .zip(report.per_tensor.iter().copied())
            .collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
        let verdict = if report.passes(GRAD_TOL) {
            "ok"
        } else {
            "FAIL"
        };
        println!(
            "{mode}: max relative error {:.3e} {verdict}",
            report.max_rel_error
        );
        for (name, err) in ranked.iter().take(5) {
            println!("  {name:<24} {err:.3e}");
        }
        failing.extend(
            ranked
                .iter()
                .filter(|(_, e)| *e >= GRAD_TOL)
                .map(|(n, e)| format!("{mode} {n} ({e:.2e})")),
        );
    }
    if failing.is_empty() {
        Ok(())
    } else {
        Err(anyhow!("gradient check failed for: {}", failing.join(", "))).failed()
    }
}

pub fn report(g: &Global, files: &[PathBuf]) -> Outcome {
    let cfg = load_config(g)?;
    let mut reports: Vec<MetricsReport> = Vec::new();
    for f in files {
        let text = fs::read_to_string(f)
            .with_context(|| format!("reading {}", f.display()))
            .usage()?;
        reports.push(
            parse_metrics(&text)
                .with_context(|| format!("parsing {}", f.display()))
                .usage()?,
        );
    }
    let mut out = String::new();
    if let [one] = reports.as_slice() {
        out.push_str(&render_table(one));
    } else {
        out.push_str(&render_summary(&reports));
        if let Some(sig) = paired_tests(&reports).usage()? {
            out.push('\n');
            out.push_str(&sig);
        }
    }
    let target = out_dir(&cfg)?.join("report.txt");
    write(&target, &out)?;
    print!("{out}");
    Ok(())
}

type MetricOf = fn(&MetricsReport) -> Option<f64>;

/// With exactly two modes sharing seeds, t-tests on each shared task metric.
fn paired_tests(reports: &[MetricsReport]) -> anyhow::Result<Option<String>> {
    let mut modes: Vec<Mode> = reports.iter().map(|r| r.meta.mode).collect();
    modes.sort_by_key(|m| m.as_str());
    modes.dedup();
    let [a, b] = modes[..] else {
        return Ok(None);
    };
    let by =
        |m: Mode| -> Vec<&MetricsReport> { reports.iter().filter(|r| r.meta.mode == m).collect() };
    let (ra, rb) = (by(a), by(b));
    let mut out = String::new();
    let metrics: [(&str, MetricOf); 2] = [
        ("sentiment macro-F1", |r| {
            r.sentiment.as_ref().map(|s| s.macro_f1)
        }),
        ("emotion micro-F1", |r| {
            r.emotion.as_ref().map(|e| e.micro.f1)
        }),
    ];
    for (name, get) in metrics {
        let pairs: Vec<(f64, f64)> = ra
            .iter()
            .filter_map(|x| {
                let y = rb.iter().find(|y| y.meta.seed == x.meta.seed)?;
                Some((get(x)?, get(y)?))
            })
            .collect();
        if pairs.len() < 2 {
            continue;
        }
        let r = significance_test(name, &pairs)?;
        let _ = writeln!(
            out,
            "{a} vs {b} {name}: n = {}, t = {:.4}, p = {:.6}{}",
            r.n,
            r.t,
            r.p,
            if r.degenerate {
                " (zero-variance differences)"
            } else {
                ""
            }
        );
    }
    Ok((!out.is_empty()).then_some(out))
}
