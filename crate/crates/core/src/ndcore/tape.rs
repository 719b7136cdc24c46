//! Reverse-mode differentiation over a linear tape.
//!
//! Every primitive appends one node holding its forward value and the ids of
//! its inputs. Node ids are allocated in execution order, so inputs always
//! precede their consumers and a single reverse sweep visits each node once.
//! Parameters are recorded by reference; nothing is copied into the tape.

use std::borrow::Cow;

use super::ops::{self, gemm_acc, gemm_at_acc, gemm_bt_acc, matmul_dims, MatMulDims};
use super::Tensor;
use crate::error::{Error, Result};

/// Handle to a node on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Deliberate corruption of one backward rule, used to prove the gradient
/// checker catches broken derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Scales the tanh local derivative by 1.25.
    TanhBackward,
}

#[derive(Debug)]
enum Op {
    Leaf,
    MatMul { a: Var, b: Var, dims: MatMulDims },
    Add(Var, Var),
    AddBias { input: Var, bias: Var },
    Mul(Var, Var),
    Scale(Var, f64),
    Sigmoid(Var),
    Tanh(Var),
    Slice { src: Var, start: usize },
    Row { src: Var, row: usize },
    Concat(Vec<Var>),
    StackRows(Vec<Var>),
    Gather { src: Var, rows: Vec<usize> },
    Softmax(Var),
    Sum(Var),
    SigmoidXent { logits: Var, targets: Vec<f64> },
}

#[derive(Debug)]
struct Node<'a> {
    value: Cow<'a, Tensor>,
    op: Op,
    requires_grad: bool,
}

#[derive(Debug, Default)]
pub struct Tape<'a> {
    nodes: Vec<Node<'a>>,
    fault: Option<Fault>,
}

impl<'a> Tape<'a> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_fault(fault: Fault) -> Self {
        Self {
            nodes: Vec::new(),
            fault: Some(fault),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    pub fn shape(&self, v: Var) -> &[usize] {
        self.nodes[v.0].value.shape()
    }

    fn push(&mut self, value: Tensor, op: Op, inputs: &[Var]) -> Var {
        let requires_grad = inputs.iter().any(|v| self.nodes[v.0].requires_grad);
        self.nodes.push(Node {
            value: Cow::Owned(value),
            op,
            requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    /// Records a differentiable leaf that borrows `t`.
    pub fn param(&mut self, t: &'a Tensor) -> Var {
        self.nodes.push(Node {
            value: Cow::Borrowed(t),
            op: Op::Leaf,
            requires_grad: true,
        });
        Var(self.nodes.len() - 1)
    }

    /// Records a constant leaf borrowing `t`; no gradient flows into it.
    pub fn constant_ref(&mut self, t: &'a Tensor) -> Var {
        self.nodes.push(Node {
            value: Cow::Borrowed(t),
            op: Op::Leaf,
            requires_grad: false,
        });
        Var(self.nodes.len() - 1)
    }

    pub fn constant(&mut self, t: Tensor) -> Var {
        self.nodes.push(Node {
            value: Cow::Owned(t),
            op: Op::Leaf,
            requires_grad: false,
        });
        Var(self.nodes.len() - 1)
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (dims, shape) = matmul_dims(self.shape(a), self.shape(b))?;
        let mut out = vec![0.0; dims.m * dims.n];
        gemm_acc(self.value(a).data(), self.value(b).data(), dims, &mut out);
        let value = Tensor::new(shape, out)?;
        Ok(self.push(value, Op::MatMul { a, b, dims }, &[a, b]))
    }

    fn same_shape(&self, op: &'static str, a: Var, b: Var) -> Result<()> {
        if self.shape(a) != self.shape(b) {
            return Err(Error::shape(op, self.shape(a), self.shape(b)));
        }
        Ok(())
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape("add", a, b)?;
        let mut value = self.value(a).clone();
        value.add_assign(self.value(b));
        Ok(self.push(value, Op::Add(a, b), &[a, b]))
    }

    /// Adds a rank-1 `bias` to every row of `input`.
    pub fn add_bias(&mut self, input: Var, bias: Var) -> Result<Var> {
        let (_, cols) = self.value(input).rows_cols();
        if self.value(bias).rank() != 1 || self.value(bias).len() != cols {
            return Err(Error::shape(
                "add_bias",
                self.shape(input),
                self.shape(bias),
            ));
        }
        let b = self.value(bias).data();
        let mut value = self.value(input).clone();
        for row in value.data_mut().chunks_mut(cols) {
            for (x, bv) in row.iter_mut().zip(b) {
                *x += bv;
            }
        }
        Ok(self.push(value, Op::AddBias { input, bias }, &[input, bias]))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape("mul", a, b)?;
        let bv = self.value(b).data();
        let mut value = self.value(a).clone();
        for (x, y) in value.data_mut().iter_mut().zip(bv) {
            *x *= y;
        }
        Ok(self.push(value, Op::Mul(a, b), &[a, b]))
    }

    pub fn scale(&mut self, a: Var, c: f64) -> Var {
        let value = self.value(a).map(|x| x * c);
        self.push(value, Op::Scale(a, c), &[a])
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let value = self.value(a).map(ops::sigmoid);
        self.push(value, Op::Sigmoid(a), &[a])
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let value = self.value(a).map(f64::tanh);
        self.push(value, Op::Tanh(a), &[a])
    }

    /// Contiguous sub-vector `[start, start + len)` of a rank-1 tensor.
    pub fn slice(&mut self, src: Var, start: usize, len: usize) -> Result<Var> {
        let t = self.value(src);
        if t.rank() != 1 || len == 0 || start + len > t.len() {
            return Err(Error::shape("slice", t.shape(), &[start, len]));
        }
        let value = Tensor::vector(&t.data()[start..start + len]);
        Ok(self.push(value, Op::Slice { src, start }, &[src]))
    }

    /// Row `row` of a rank-2 tensor as a vector.
    pub fn row(&mut self, src: Var, row: usize) -> Result<Var> {
        let t = self.value(src);
        if t.rank() != 2 || row >= t.shape()[0] {
            return Err(Error::shape("row", t.shape(), &[row]));
        }
        let value = Tensor::vector(t.row(row));
        Ok(self.push(value, Op::Row { src, row }, &[src]))
    }

    pub fn concat(&mut self, parts: &[Var]) -> Result<Var> {
        if parts.is_empty() {
            return Err(Error::contract("concat of zero tensors"));
        }
        let mut data = Vec::new();
        for &p in parts {
            let t = self.value(p);
            if t.rank() != 1 {
                return Err(Error::shape("concat", t.shape(), &[]));
            }
            data.extend_from_slice(t.data());
        }
        let value = Tensor::vector(&data);
        Ok(self.push(value, Op::Concat(parts.to_vec()), parts))
    }

    /// Stacks equal-length vectors into a `[rows.len() × n]` matrix.
    pub fn stack_rows(&mut self, rows: &[Var]) -> Result<Var> {
        if rows.is_empty() {
            return Err(Error::contract("stack of zero rows"));
        }
        let first = self.shape(rows[0]).to_vec();
        if first.len() != 1 {
            return Err(Error::shape("stack_rows", &first, &[]));
        }
        let mut data = Vec::with_capacity(rows.len() * first[0]);
        for &r in rows {
            if self.shape(r) != first.as_slice() {
                return Err(Error::shape("stack_rows", &first, self.shape(r)));
            }
            data.extend_from_slice(self.value(r).data());
        }
        let value = Tensor::new(vec![rows.len(), first[0]], data)?;
        Ok(self.push(value, Op::StackRows(rows.to_vec()), rows))
    }

    /// Selects rows of a rank-2 tensor, producing `[rows.len() × cols]`.
    pub fn gather(&mut self, src: Var, rows: &[usize]) -> Result<Var> {
        let t = self.value(src);
        if t.rank() != 2 || rows.is_empty() || rows.iter().any(|&r| r >= t.shape()[0]) {
            return Err(Error::shape("gather", t.shape(), &[rows.len()]));
        }
        let cols = t.shape()[1];
        let mut data = Vec::with_capacity(rows.len() * cols);
        for &r in rows {
            data.extend_from_slice(t.row(r));
        }
        let value = Tensor::new(vec![rows.len(), cols], data)?;
        Ok(self.push(
            value,
            Op::Gather {
                src,
                rows: rows.to_vec(),
            },
            &[src],
        ))
    }

    pub fn softmax(&mut self, a: Var) -> Result<Var> {
        let value = ops::softmax(self.value(a))?;
        Ok(self.push(value, Op::Softmax(a), &[a]))
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let value = Tensor::scalar(self.value(a).sum());
        self.push(value, Op::Sum(a), &[a])
    }

    /// Mean sigmoid cross-entropy against constant binary targets.
    pub fn sigmoid_xent(&mut self, logits: Var, targets: &Tensor) -> Result<Var> {
        let loss = ops::sigmoid_xent(self.value(logits), targets)?;
        Ok(self.push(
            Tensor::scalar(loss),
            Op::SigmoidXent {
                logits,
                targets: targets.data().to_vec(),
            },
            &[logits],
        ))
    }

    /// Reverse sweep from a scalar `loss`. Nodes that do not depend on any
    /// parameter are skipped.
    pub fn backward(&self, loss: Var) -> Result<Gradients> {
        if !self.value(loss).is_scalar() {
            return Err(Error::contract(format!(
                "backward needs a scalar loss, got shape {:?}",
                self.shape(loss)
            )));
        }
        let mut grads: Vec<Option<Tensor>> = vec![None; self.nodes.len()];
        grads[loss.0] = Some(Tensor::filled(self.shape(loss), 1.0));

        for id in (0..=loss.0).rev() {
            let node = &self.nodes[id];
            if !node.requires_grad {
                continue;
            }
            let Some(g) = grads[id].take() else {
                continue;
            };
            self.propagate(node, &g, &mut grads);
            grads[id] = Some(g);
        }

        Ok(Gradients {
            shapes: self
                .nodes
                .iter()
                .map(|n| n.value.shape().to_vec())
                .collect(),
            grads,
        })
    }

    fn propagate(&self, node: &Node<'a>, g: &Tensor, grads: &mut [Option<Tensor>]) {
        let mut acc = |v: Var, f: &mut dyn FnMut(&mut [f64])| {
            if !self.nodes[v.0].requires_grad {
                return;
            }
            let slot = grads[v.0].get_or_insert_with(|| Tensor::zeros(self.shape(v)));
            f(slot.data_mut());
        };
        let gd = g.data();
        match &node.op {
            Op::Leaf => {}
            Op::MatMul { a, b, dims } => {
                let (av, bv) = (self.value(*a).data(), self.value(*b).data());
                acc(*a, &mut |da| gemm_bt_acc(gd, bv, *dims, da));
                acc(*b, &mut |db| gemm_at_acc(av, gd, *dims, db));
            }
            Op::Add(a, b) => {
                acc(*a, &mut |d| add_into(d, gd));
                acc(*b, &mut |d| add_into(d, gd));
            }
            Op::AddBias { input, bias } => {
                acc(*input, &mut |d| add_into(d, gd));
                let cols = self.value(*bias).len();
                acc(*bias, &mut |d| {
                    for row in gd.chunks(cols) {
                        add_into(d, row);
                    }
                });
            }
            Op::Mul(a, b) => {
                let (av, bv) = (self.value(*a).data(), self.value(*b).data());
                acc(*a, &mut |d| {
                    for ((x, gi), bi) in d.iter_mut().zip(gd).zip(bv) {
                        *x += gi * bi;
                    }
                });
                acc(*b, &mut |d| {
                    for ((x, gi), ai) in d.iter_mut().zip(gd).zip(av) {
                        *x += gi * ai;
                    }
                });
            }
            Op::Scale(a, c) => acc(*a, &mut |d| {
                for (x, gi) in d.iter_mut().zip(gd) {
                    *x += gi * c;
                }
            }),
            Op::Sigmoid(a) => {
                let y = node.value.data();
                acc(*a, &mut |d| {
                    for ((x, gi), yi) in d.iter_mut().zip(gd).zip(y) {
                        *x += gi * yi * (1.0 - yi);
                    }
                });
            }
            Op::Tanh(a) => {
                let y = node.value.data();
                let k = match self.fault {
                    Some(Fault::TanhBackward) => 1.25,
                    None => 1.0,
                };
                acc(*a, &mut |d| {
                    for ((x, gi), yi) in d.iter_mut().zip(gd).zip(y) {
                        *x += k * gi * (1.0 - yi * yi);
                    }
                });
            }
            Op::Slice { src, start } => acc(*src, &mut |d| {
                add_into(&mut d[*start..*start + gd.len()], gd);
            }),
            Op::Row { src, row } => acc(*src, &mut |d| {
                let n = gd.len();
                add_into(&mut d[row * n..(row + 1) * n], gd);
            }),
            Op::Concat(parts) => {
                let mut offset = 0;
                for p in parts {
                    let n = self.value(*p).len();
                    acc(*p, &mut |d| add_into(d, &gd[offset..offset + n]));
                    offset += n;
                }
            }
            Op::StackRows(rows) => {
                let n = g.rows_cols().1;
                for (i, r) in rows.iter().enumerate() {
                    acc(*r, &mut |d| add_into(d, &gd[i * n..(i + 1) * n]));
                }
            }
            Op::Gather { src, rows } => {
                let n = g.rows_cols().1;
                acc(*src, &mut |d| {
                    for (i, &r) in rows.iter().enumerate() {
                        add_into(&mut d[r * n..(r + 1) * n], &gd[i * n..(i + 1) * n]);
                    }
                });
            }
            Op::Softmax(a) => {
                let y = node.value.data();
                let dot: f64 = gd.iter().zip(y).map(|(gi, yi)| gi * yi).sum();
                acc(*a, &mut |d| {
                    for ((x, gi), yi) in d.iter_mut().zip(gd).zip(y) {
                        *x += yi * (gi - dot);
                    }
                });
            }
            Op::Sum(a) => {
                let g0 = gd[0];
                acc(*a, &mut |d| d.iter_mut().for_each(|x| *x += g0));
            }
            Op::SigmoidXent { logits, targets } => {
                let z = self.value(*logits).data();
                let scale = gd[0] / z.len() as f64;
                acc(*logits, &mut |d| {
                    for ((x, zi), yi) in d.iter_mut().zip(z).zip(targets) {
                        *x += scale * (ops::sigmoid(*zi) - yi);
                    }
                });
            }
        }
    }
}

fn add_into(dst: &mut [f64], src: &[f64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += s;
    }
}

/// Result of [`Tape::backward`]: one optional gradient per tape node.
#[derive(Debug)]
pub struct Gradients {
    shapes: Vec<Vec<usize>>,
    grads: Vec<Option<Tensor>>,
}

impl Gradients {
    pub fn get(&self, v: Var) -> Option<&Tensor> {
        self.grads[v.0].as_ref()
    }

    /// Gradient of `v`, or zeros of its shape when the loss does not reach it.
    pub fn wrt(&self, v: Var) -> Tensor {
        self.grads[v.0]
            .clone()
            .unwrap_or_else(|| Tensor::zeros(&self.shapes[v.0]))
    }

    pub fn take(&mut self, v: Var) -> Tensor {
        self.grads[v.0]
            .take()
            .unwrap_or_else(|| Tensor::zeros(&self.shapes[v.0]))
    }
}
