//! Experimental harness: joint loss, training loop, metrics, significance
//! testing and report rendering.

mod loss;
mod metrics;
mod report;
mod significance;
mod trainer;

pub use loss::{emotion_targets, joint_loss, joint_loss_value, sentiment_targets, LossWeights};
pub use metrics::{
    confusion_matrices, confusion_matrix, evaluate, BinaryConfusion, EmotionMetrics, LabelMetrics,
    MetricsReport, Prf, RunMeta, SentimentMetrics,
};
pub use report::{parse_metrics, render_metrics, render_summary, render_table, report};
pub use significance::{significance_test, SignificanceResult};
pub use trainer::{train, training_examples, TrainConfig, TrainLog};
