use crate::error::{Error, Result};
use crate::model::{Mode, Network};
use crate::resources::{Corpus, Emotion, Sentiment};

/// 2×2 counts, rows actual and columns predicted, negative first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BinaryConfusion {
    pub tn: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tp: u64,
}

impl BinaryConfusion {
    pub fn matrix(&self) -> [[u64; 2]; 2] {
        [[self.tn, self.fp], [self.fn_, self.tp]]
    }

    pub fn record(&mut self, gold: bool, predicted: bool) {
        match (gold, predicted) {
            (false, false) => self.tn += 1,
            (false, true) => self.fp += 1,
            (true, false) => self.fn_ += 1,
            (true, true) => self.tp += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.tn + self.fp + self.fn_ + self.tp
    }

    pub fn positive(&self) -> Prf {
        Prf::from_counts(self.tp, self.fp, self.fn_)
    }

    /// Scores with the negative class treated as the target.
    pub fn negative(&self) -> Prf {
        Prf::from_counts(self.tn, self.fn_, self.fp)
    }
}

/// Counts gold/predicted pairs into a confusion matrix.
pub fn confusion_matrix(gold: &[bool], predicted: &[bool]) -> Result<BinaryConfusion> {
    if gold.len() != predicted.len() {
        return Err(Error::contract(format!(
            "confusion matrix over {} gold and {} predicted labels",
            gold.len(),
            predicted.len()
        )));
    }
    let mut c = BinaryConfusion::default();
    for (&g, &p) in gold.iter().zip(predicted) {
        c.record(g, p);
    }
    Ok(c)
}

/// One confusion matrix per label column.
pub fn confusion_matrices<const N: usize>(
    gold: &[[bool; N]],
    predicted: &[[bool; N]],
) -> Result<[BinaryConfusion; N]> {
    if gold.len() != predicted.len() {
        return Err(Error::contract(format!(
            "confusion matrices over {} gold and {} predicted rows",
            gold.len(),
            predicted.len()
        )));
    }
    let mut out = [BinaryConfusion::default(); N];
    for (g, p) in gold.iter().zip(predicted) {
        for j in 0..N {
            out[j].record(g[j], p[j]);
        }
    }
    Ok(out)
}

/// Precision, recall and F1; each is 0 when its denominator is 0.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    pub fn from_counts(tp: u64, fp: u64, fn_: u64) -> Self {
        let ratio = |num: u64, den: u64| {
            if den == 0 {
                0.0
            } else {
                num as f64 / den as f64
            }
        };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Self {
            precision,
            recall,
            f1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SentimentMetrics {
    pub confusion: BinaryConfusion,
    pub negative: Prf,
    pub positive: Prf,
    /// Mean of the negative and positive F1.
    pub macro_f1: f64,
    /// F1 over both classes' pooled counts (equals accuracy).
    pub micro_f1: f64,
}

impl SentimentMetrics {
    pub fn from_confusion(confusion: BinaryConfusion) -> Self {
        let negative = confusion.negative();
        let positive = confusion.positive();
        let c = confusion;
        let micro = Prf::from_counts(c.tn + c.tp, c.fn_ + c.fp, c.fp + c.fn_);
        Self {
            confusion,
            negative,
            positive,
            macro_f1: (negative.f1 + positive.f1) / 2.0,
            micro_f1: micro.f1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabelMetrics {
    pub label: Emotion,
    pub confusion: BinaryConfusion,
    pub prf: Prf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmotionMetrics {
    pub labels: Vec<LabelMetrics>,
    /// From TP/FP/FN summed over all labels.
    pub micro: Prf,
}

impl EmotionMetrics {
    pub fn from_confusions(confusions: [BinaryConfusion; 8]) -> Self {
        let labels = Emotion::ALL
            .into_iter()
            .zip(confusions)
            .map(|(label, confusion)| LabelMetrics {
                label,
                confusion,
                prf: confusion.positive(),
            })
            .collect();
        let (tp, fp, fn_) = confusions
            .iter()
            .fold((0, 0, 0), |(a, b, c), m| (a + m.tp, b + m.fp, c + m.fn_));
        Self {
            labels,
            micro: Prf::from_counts(tp, fp, fn_),
        }
    }

    pub fn confusions(&self) -> [BinaryConfusion; 8] {
        let mut out = [BinaryConfusion::default(); 8];
        for (o, l) in out.iter_mut().zip(&self.labels) {
            *o = l.confusion;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunMeta {
    pub mode: Mode,
    pub seed: u64,
    pub epoch: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub meta: RunMeta,
    pub sentiment: Option<SentimentMetrics>,
    pub emotion: Option<EmotionMetrics>,
}

/// Scores `net` on `corpus` in evaluation mode.
///
/// Sentiment metrics cover only examples whose gold label is positive or
/// negative; emotion metrics cover every example.
pub fn evaluate(corpus: &Corpus, net: &Network, meta: RunMeta) -> Result<MetricsReport> {
    if corpus.is_empty() {
        return Err(Error::contract("evaluate on an empty corpus"));
    }
    let mut sentiment = BinaryConfusion::default();
    let mut emotion = [BinaryConfusion::default(); 8];
    for ex in &corpus.examples {
        let pred = net.predict(ex.tokens.tokens())?;
        if let (Some((s, _)), Some(gold)) = (pred.sentiment, ex.sentiment.class_index()) {
            sentiment.record(gold == 1, s == Sentiment::Positive);
        }
        if let Some((set, _)) = pred.emotions {
            for (j, c) in emotion.iter_mut().enumerate() {
                c.record(ex.emotions.0[j], set.0[j]);
            }
        }
    }
    Ok(MetricsReport {
        meta,
        sentiment: net
            .config
            .mode
            .has_sentiment()
            .then(|| SentimentMetrics::from_confusion(sentiment)),
        emotion: net
            .config
            .mode
            .has_emotion()
            .then(|| EmotionMetrics::from_confusions(emotion)),
    })
}
