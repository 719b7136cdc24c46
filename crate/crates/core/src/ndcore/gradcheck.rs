use super::{Fault, Tape, Tensor, Var};
use crate::error::Result;

pub const DEFAULT_EPS: f64 = 1e-5;

/// Per-tensor worst relative error between reverse-mode and central
/// finite-difference gradients.
#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub per_tensor: Vec<f64>,
    pub max_rel_error: f64,
}

impl GradCheckReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_rel_error < tol
    }
}

/// Compares `backward` against central differences for every coordinate of
/// every tensor in `params`. `f` must be deterministic and return a scalar.
///
/// The relative error per coordinate is
/// `|g_ad − g_fd| / max(1e-8, |g_ad| + |g_fd|)`.
pub fn grad_check<F>(
    f: F,
    params: &[Tensor],
    eps: f64,
    fault: Option<Fault>,
) -> Result<GradCheckReport>
where
    F: Fn(&mut Tape<'_>, &[Var]) -> Result<Var>,
{
    let analytic: Vec<Tensor> = {
        let mut tape = match fault {
            Some(fl) => Tape::with_fault(fl),
            None => Tape::new(),
        };
        let vars: Vec<Var> = params.iter().map(|p| tape.param(p)).collect();
        let loss = f(&mut tape, &vars)?;
        let grads = tape.backward(loss)?;
        vars.iter().map(|&v| grads.wrt(v)).collect()
    };

    let eval = |ps: &[Tensor]| -> Result<f64> {
        let mut tape = Tape::new();
        let vars: Vec<Var> = ps.iter().map(|p| tape.constant_ref(p)).collect();
        let loss = f(&mut tape, &vars)?;
        Ok(tape.value(loss).item())
    };

    let mut work: Vec<Tensor> = params.to_vec();
    let mut per_tensor = Vec::with_capacity(params.len());
    for ti in 0..params.len() {
        let mut worst: f64 = 0.0;
        for ci in 0..params[ti].len() {
            let orig = params[ti].data()[ci];
            work[ti].data_mut()[ci] = orig + eps;
            let up = eval(&work)?;
            work[ti].data_mut()[ci] = orig - eps;
            let down = eval(&work)?;
            work[ti].data_mut()[ci] = orig;

            let fd = (up - down) / (2.0 * eps);
            let ad = analytic[ti].data()[ci];
            let rel = (ad - fd).abs() / (ad.abs() + fd.abs()).max(1e-8);
            worst = worst.max(rel);
        }
        per_tensor.push(worst);
    }
    let max_rel_error = per_tensor.iter().copied().fold(0.0, f64::max);
    Ok(GradCheckReport {
        per_tensor,
        max_rel_error,
    })
}
