use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SignificanceResult {
    pub metric: String,
    pub n: usize,
    pub t: f64,
    /// Two-tailed.
    pub p: f64,
    /// The paired differences have zero variance; `t` is then 0 or ±∞ and
    /// `p` is 1 or 0.
    pub degenerate: bool,
    pub pairs: Vec<(f64, f64)>,
}

/// Paired two-tailed t-test on `(a, b)` score pairs, testing mean(a − b) = 0.
pub fn significance_test(metric: &str, pairs: &[(f64, f64)]) -> Result<SignificanceResult> {
    let n = pairs.len();
    if n < 2 {
        return Err(Error::contract(format!(
            "paired t-test needs at least 2 pairs, got {n}"
        )));
    }
    let diffs: Vec<f64> = pairs.iter().map(|(a, b)| a - b).collect();
    let mean = diffs.iter().sum::<f64>() / n as f64;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);

    let max_abs = diffs.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let degenerate = var <= (f64::EPSILON * max_abs).powi(2);
    let (t, p) = if degenerate {
        if mean == 0.0 {
            (0.0, 1.0)
        } else {
            (mean.signum() * f64::INFINITY, 0.0)
        }
    } else {
        let t = mean / (var / n as f64).sqrt();
        let dist = StudentsT::new(0.0, 1.0, n as f64 - 1.0)
            .map_err(|e| Error::contract(format!("t distribution: {e}")))?;
        (t, (2.0 * dist.sf(t.abs())).clamp(0.0, 1.0))
    };
    Ok(SignificanceResult {
        metric: metric.to_string(),
        n,
        t,
        p,
        degenerate,
        pairs: pairs.to_vec(),
    })
}
