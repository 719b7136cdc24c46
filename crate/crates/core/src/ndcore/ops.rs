//! Tape-free numeric kernels. The tape's forward rules call into these, so
//! recorded and unrecorded evaluation agree bit for bit.

use super::Tensor;
use crate::error::{Error, Result};

/// Resolved matrix-product geometry. Rank-1 operands act as a row vector on
/// the left and a column vector on the right; the unit axis is dropped from
/// the output shape.
#[derive(Debug, Clone, Copy)]
pub(crate) struct MatMulDims {
    pub m: usize,
    pub k: usize,
    pub n: usize,
}

pub(crate) fn matmul_dims(a: &[usize], b: &[usize]) -> Result<(MatMulDims, Vec<usize>)> {
    let (m, ka, a_vec) = match a {
        [k] => (1, *k, true),
        [m, k] => (*m, *k, false),
        _ => return Err(Error::shape("matmul", a, b)),
    };
    let (kb, n, b_vec) = match b {
        [k] => (*k, 1, true),
        [k, n] => (*k, *n, false),
        _ => return Err(Error::shape("matmul", a, b)),
    };
    if ka != kb {
        return Err(Error::shape("matmul", a, b));
    }
    let out = match (a_vec, b_vec) {
        (false, false) => vec![m, n],
        (true, false) => vec![n],
        (false, true) => vec![m],
        (true, true) => vec![1],
    };
    Ok((MatMulDims { m, k: ka, n }, out))
}

/// `out[m×n] += a[m×k] · b[k×n]`
pub(crate) fn gemm_acc(a: &[f64], b: &[f64], d: MatMulDims, out: &mut [f64]) {
    let MatMulDims { m, k, n } = d;
    for i in 0..m {
        let orow = &mut out[i * n..(i + 1) * n];
        for p in 0..k {
            let aip = a[i * k + p];
            if aip == 0.0 {
                continue;
            }
            let brow = &b[p * n..(p + 1) * n];
            for (o, &bv) in orow.iter_mut().zip(brow) {
                *o += aip * bv;
            }
        }
    }
}

/// `out[m×k] += g[m×n] · bᵀ` where `b` is `[k×n]`.
pub(crate) fn gemm_bt_acc(g: &[f64], b: &[f64], d: MatMulDims, out: &mut [f64]) {
    let MatMulDims { m, k, n } = d;
    for i in 0..m {
        let grow = &g[i * n..(i + 1) * n];
        for p in 0..k {
            let brow = &b[p * n..(p + 1) * n];
            let dot: f64 = grow.iter().zip(brow).map(|(x, y)| x * y).sum();
            out[i * k + p] += dot;
        }
    }
}

/// `out[k×n] += aᵀ · g` where `a` is `[m×k]` and `g` is `[m×n]`.
pub(crate) fn gemm_at_acc(a: &[f64], g: &[f64], d: MatMulDims, out: &mut [f64]) {
    let MatMulDims { m, k, n } = d;
    for i in 0..m {
        let grow = &g[i * n..(i + 1) * n];
        for p in 0..k {
            let aip = a[i * k + p];
            if aip == 0.0 {
                continue;
            }
            let orow = &mut out[p * n..(p + 1) * n];
            for (o, &gv) in orow.iter_mut().zip(grow) {
                *o += aip * gv;
            }
        }
    }
}

pub fn matmul(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    let (d, shape) = matmul_dims(a.shape(), b.shape())?;
    let mut out = vec![0.0; d.m * d.n];
    gemm_acc(a.data(), b.data(), d, &mut out);
    Tensor::new(shape, out)
}

/// Softmax over a rank-1 tensor with max subtraction.
pub fn softmax(scores: &Tensor) -> Result<Tensor> {
    if scores.rank() != 1 {
        return Err(Error::shape("softmax", scores.shape(), &[]));
    }
    Ok(Tensor::vector(&softmax_slice(scores.data())))
}

pub(crate) fn softmax_slice(x: &[f64]) -> Vec<f64> {
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = x.iter().map(|&v| (v - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln σ(x)` without overflow.
pub fn log_sigmoid(x: f64) -> f64 {
    -softplus(-x)
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Mean sigmoid cross-entropy, `max(z,0) − z·y + ln(1 + e^{−|z|})` per unit.
pub fn sigmoid_xent(logits: &Tensor, targets: &Tensor) -> Result<f64> {
    if logits.shape() != targets.shape() {
        return Err(Error::shape(
            "sigmoid_xent",
            logits.shape(),
            targets.shape(),
        ));
    }
    if targets.data().iter().any(|&y| y != 0.0 && y != 1.0) {
        return Err(Error::contract("sigmoid_xent targets must be 0 or 1"));
    }
    Ok(sigmoid_xent_slice(logits.data(), targets.data()))
}

pub(crate) fn sigmoid_xent_slice(z: &[f64], y: &[f64]) -> f64 {
    let total: f64 = z
        .iter()
        .zip(y)
        .map(|(&z, &y)| z.max(0.0) - z * y + (-z.abs()).exp().ln_1p())
        .sum();
    total / z.len() as f64
}
