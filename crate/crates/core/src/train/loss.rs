use crate::error::Result;
use crate::model::{ForwardGraph, ForwardTrace, Task};
use crate::ndcore::{sigmoid_xent, Tape, Tensor, Var};
use crate::resources::Example;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    pub sentiment: f64,
    pub emotion: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            sentiment: 1.0,
            emotion: 1.0,
        }
    }
}

/// One-hot `[negative, positive]`, `None` for `other`.
pub fn sentiment_targets(example: &Example) -> Option<Tensor> {
    example.sentiment.class_index().map(|c| {
        let mut t = Tensor::zeros(&[2]);
        t.data_mut()[c] = 1.0;
        t
    })
}

pub fn emotion_targets(example: &Example) -> Tensor {
    Tensor::vector(&example.emotions.as_targets())
}

/// Weighted sum of the active tasks' sigmoid cross-entropies recorded on
/// `tape`. The sentiment term is skipped for `other` examples; `None` when
/// no term applies.
pub fn joint_loss(
    tape: &mut Tape<'_>,
    graph: &ForwardGraph,
    example: &Example,
    weights: LossWeights,
) -> Result<Option<Var>> {
    let mut terms = Vec::new();
    if let (Some(g), Some(y)) = (graph.task(Task::Sentiment), sentiment_targets(example)) {
        let l = tape.sigmoid_xent(g.logits, &y)?;
        terms.push(tape.scale(l, weights.sentiment));
    }
    if let Some(g) = graph.task(Task::Emotion) {
        let l = tape.sigmoid_xent(g.logits, &emotion_targets(example))?;
        terms.push(tape.scale(l, weights.emotion));
    }
    let mut iter = terms.into_iter();
    let Some(mut total) = iter.next() else {
        return Ok(None);
    };
    for t in iter {
        total = tape.add(total, t)?;
    }
    Ok(Some(total))
}

/// The same loss evaluated from a trace, without a tape.
pub fn joint_loss_value(
    trace: &ForwardTrace,
    example: &Example,
    weights: LossWeights,
) -> Result<Option<f64>> {
    let mut total = None;
    if let (Some(t), Some(y)) = (trace.task(Task::Sentiment), sentiment_targets(example)) {
        total = Some(weights.sentiment * sigmoid_xent(&t.logits, &y)?);
    }
    if let Some(t) = trace.task(Task::Emotion) {
        let l = weights.emotion * sigmoid_xent(&t.logits, &emotion_targets(example))?;
        total = Some(total.map_or(l, |s| s + l));
    }
    Ok(total)
}
