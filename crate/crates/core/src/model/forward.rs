use rand::RngCore;

use super::layers::{
    bilstm_forward, primary_attention, secondary_attention, task_head, HeadVars, LstmVars,
    SentenceAttentionVars, WordAttentionVars,
};
use super::params::EMBEDDING;
use super::{ModelConfig, ModelParameters, Task};
use crate::error::{Error, Result};
use crate::ndcore::{dropout_mask_with, sigmoid, Tape, Tensor, Var};
use crate::resources::{EmotionSet, EncodedInput, Sentiment, Vocabulary};

/// Train mode draws dropout masks from the supplied generator.
pub enum Phase<'r> {
    Eval,
    Train(&'r mut dyn RngCore),
}

/// Trained (or freshly initialised) network: configuration, vocabulary and
/// parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub config: ModelConfig,
    pub vocab: Vocabulary,
    pub params: ModelParameters,
}

/// Tape handles for one task branch.
#[derive(Debug, Clone)]
pub struct TaskGraph {
    pub task: Task,
    pub word_alpha: Vec<Option<Var>>,
    pub word_summary: Vec<Option<Var>>,
    pub words: Vec<Var>,
    pub sentence_alpha: Var,
    pub sentence: Var,
    pub logits: Var,
}

/// Tape handles for a whole forward pass.
#[derive(Debug, Clone)]
pub struct ForwardGraph {
    pub params: Vec<Var>,
    pub encoder: Vec<Var>,
    pub sentiment: Option<TaskGraph>,
    pub emotion: Option<TaskGraph>,
}

impl ForwardGraph {
    pub fn task(&self, task: Task) -> Option<&TaskGraph> {
        match task {
            Task::Sentiment => self.sentiment.as_ref(),
            Task::Emotion => self.emotion.as_ref(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskTrace {
    /// Word-attention coefficients per step; `None` where no candidates.
    pub word_alpha: Vec<Option<Tensor>>,
    /// `m_t` per step; `None` when word attention is disabled.
    pub word_summary: Vec<Option<Tensor>>,
    /// `ĥ_t` per step.
    pub words: Vec<Tensor>,
    pub sentence_alpha: Tensor,
    pub sentence: Tensor,
    pub logits: Tensor,
}

/// Concrete values of every intermediate of a forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace {
    pub encoder: Vec<Tensor>,
    pub candidates: Vec<Vec<usize>>,
    pub sentiment: Option<TaskTrace>,
    pub emotion: Option<TaskTrace>,
}

impl ForwardTrace {
    pub fn task(&self, task: Task) -> Option<&TaskTrace> {
        match task {
            Task::Sentiment => self.sentiment.as_ref(),
            Task::Emotion => self.emotion.as_ref(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub sentiment: Option<(Sentiment, [f64; 2])>,
    pub emotions: Option<(EmotionSet, [f64; 8])>,
}

/// Argmax over the two sigmoid units; ties go to negative.
pub fn decide_sentiment(logits: &[f64]) -> (Sentiment, [f64; 2]) {
    let probs = [sigmoid(logits[0]), sigmoid(logits[1])];
    let class = if probs[1] > probs[0] { 1 } else { 0 };
    (Sentiment::from_class_index(class), probs)
}

/// Per-label `p ≥ threshold`.
pub fn decide_emotions(logits: &[f64], threshold: f64) -> (EmotionSet, [f64; 8]) {
    let mut probs = [0.0; 8];
    let mut set = [false; 8];
    for i in 0..8 {
        probs[i] = sigmoid(logits[i]);
        set[i] = probs[i] >= threshold;
    }
    (EmotionSet(set), probs)
}

impl Network {
    pub fn new(config: ModelConfig, vocab: Vocabulary, seed: u64) -> Result<Self> {
        let params = ModelParameters::init(&config, vocab.embeddings(), seed)?;
        Ok(Self {
            config,
            vocab,
            params,
        })
    }

    /// Records every parameter on `tape`; frozen embeddings as constants.
    pub fn register<'t>(&'t self, tape: &mut Tape<'t>) -> Vec<Var> {
        self.params
            .iter()
            .map(|(name, t)| {
                if name == EMBEDDING && self.config.freeze_embeddings {
                    tape.constant_ref(t)
                } else {
                    tape.param(t)
                }
            })
            .collect()
    }

    pub fn forward<'t>(
        &'t self,
        tape: &mut Tape<'t>,
        input: &EncodedInput,
        phase: Phase<'_>,
    ) -> Result<ForwardGraph> {
        let vars = self.register(tape);
        self.forward_with(tape, &vars, input, phase)
    }

    /// Forward pass using caller-registered parameter handles, aligned with
    /// `self.params`.
    pub fn forward_with(
        &self,
        tape: &mut Tape<'_>,
        vars: &[Var],
        input: &EncodedInput,
        mut phase: Phase<'_>,
    ) -> Result<ForwardGraph> {
        if input.ids.is_empty() {
            return Err(Error::contract("forward on an empty token sequence"));
        }
        if vars.len() != self.params.len() {
            return Err(Error::shape(
                "forward_with",
                &[vars.len()],
                &[self.params.len()],
            ));
        }
        let var = |name: &str| -> Result<Var> {
            self.params
                .position(name)
                .map(|i| vars[i])
                .ok_or_else(|| Error::contract(format!("missing parameter {name}")))
        };
        let lstm = |dir: &str| -> Result<LstmVars> {
            Ok(LstmVars {
                w_x: var(&format!("lstm.{dir}.w_x"))?,
                w_h: var(&format!("lstm.{dir}.w_h"))?,
                b: var(&format!("lstm.{dir}.b"))?,
            })
        };

        let embedding = var(EMBEDDING)?;
        let inputs = tape.gather(embedding, &input.ids)?;
        let encoder = bilstm_forward(tape, inputs, lstm("fwd")?, lstm("bwd")?)?;

        let rate = self.config.dropout_rate;
        let encoded: Vec<Var> = match &mut phase {
            Phase::Train(rng) if rate > 0.0 => {
                let mut out = Vec::with_capacity(encoder.len());
                for &h in &encoder {
                    let mask = dropout_mask_with(tape.shape(h), rate, &mut **rng)?;
                    let m = tape.constant(mask);
                    out.push(tape.mul(h, m)?);
                }
                out
            }
            _ => encoder.clone(),
        };

        let candidates: Vec<Option<Var>> = if self.config.mode.primary_attention() {
            input
                .candidates
                .iter()
                .map(|c| {
                    if c.is_empty() {
                        Ok(None)
                    } else {
                        tape.gather(embedding, c).map(Some)
                    }
                })
                .collect::<Result<_>>()?
        } else {
            vec![None; encoded.len()]
        };

        let mut graph = ForwardGraph {
            params: vars.to_vec(),
            encoder,
            sentiment: None,
            emotion: None,
        };
        for task in self.config.mode.tasks() {
            let p = task.prefix();
            let mut word_alpha = Vec::new();
            let mut word_summary = Vec::new();
            let mut words = Vec::new();
            if self.config.mode.primary_attention() {
                let wa = WordAttentionVars {
                    w: var(&format!("{p}.word_attn.w"))?,
                    b: var(&format!("{p}.word_attn.b"))?,
                };
                for (&h, &c) in encoded.iter().zip(&candidates) {
                    let out = primary_attention(tape, h, c, wa)?;
                    word_alpha.push(out.alpha);
                    word_summary.push(Some(out.summary));
                    words.push(out.output);
                }
            } else {
                word_alpha = vec![None; encoded.len()];
                word_summary = vec![None; encoded.len()];
                words = encoded.clone();
            }
            let sa = secondary_attention(
                tape,
                &words,
                SentenceAttentionVars {
                    w: var(&format!("{p}.sent_attn.w"))?,
                    b: var(&format!("{p}.sent_attn.b"))?,
                    u: var(&format!("{p}.sent_attn.u"))?,
                },
            )?;
            let mut sentence = sa.output;
            if let Phase::Train(rng) = &mut phase {
                if rate > 0.0 {
                    let mask = dropout_mask_with(tape.shape(sentence), rate, &mut **rng)?;
                    let m = tape.constant(mask);
                    sentence = tape.mul(sentence, m)?;
                }
            }
            let logits = task_head(
                tape,
                sentence,
                HeadVars {
                    w: var(&format!("{p}.head.w"))?,
                    b: var(&format!("{p}.head.b"))?,
                },
            )?;
            let tg = TaskGraph {
                task,
                word_alpha,
                word_summary,
                words,
                sentence_alpha: sa.alpha,
                sentence: sa.output,
                logits,
            };
            match task {
                Task::Sentiment => graph.sentiment = Some(tg),
                Task::Emotion => graph.emotion = Some(tg),
            }
        }
        Ok(graph)
    }

    /// Copies the values behind `graph` out of `tape`.
    pub fn trace(
        &self,
        tape: &Tape<'_>,
        graph: &ForwardGraph,
        input: &EncodedInput,
    ) -> ForwardTrace {
        let value = |v: Var| tape.value(v).clone();
        let task_trace = |g: &TaskGraph| TaskTrace {
            word_alpha: g.word_alpha.iter().map(|a| a.map(value)).collect(),
            word_summary: g.word_summary.iter().map(|a| a.map(value)).collect(),
            words: g.words.iter().map(|&v| value(v)).collect(),
            sentence_alpha: value(g.sentence_alpha),
            sentence: value(g.sentence),
            logits: value(g.logits),
        };
        ForwardTrace {
            encoder: graph.encoder.iter().map(|&v| value(v)).collect(),
            candidates: input.candidates.clone(),
            sentiment: graph.sentiment.as_ref().map(task_trace),
            emotion: graph.emotion.as_ref().map(task_trace),
        }
    }

    /// Evaluation-mode forward returning the full trace.
    pub fn run(&self, input: &EncodedInput) -> Result<ForwardTrace> {
        let mut tape = Tape::new();
        let graph = self.forward(&mut tape, input, Phase::Eval)?;
        Ok(self.trace(&tape, &graph, input))
    }

    pub fn encode(&self, tokens: &[String]) -> EncodedInput {
        self.vocab.encode(tokens)
    }

    pub fn predict(&self, tokens: &[String]) -> Result<Prediction> {
        let trace = self.run(&self.encode(tokens))?;
        Ok(self.decide(&trace))
    }

    pub fn decide(&self, trace: &ForwardTrace) -> Prediction {
        Prediction {
            sentiment: trace
                .sentiment
                .as_ref()
                .map(|t| decide_sentiment(t.logits.data())),
            emotions: trace
                .emotion
                .as_ref()
                .map(|t| decide_emotions(t.logits.data(), self.config.threshold)),
        }
    }
}
