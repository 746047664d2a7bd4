//! Reverse-mode automatic differentiation over dense real tensors.
//!
//! A [`Graph`] is an append-only tape: every operation pushes a [`Node`]
//! whose inputs strictly precede it, so insertion order is a topological
//! order. Values are computed eagerly at insertion; [`Graph::forward`]
//! recomputes the whole tape (used by the finite-difference checker after
//! perturbing a parameter), and [`Graph::backward`] propagates adjoints
//! from a scalar seed back to every parameter node.
//!
//! Everything is `f64`. Truth values near 0 and 1 get combined with
//! `-log`, which needs the headroom.
//!
//! Subgradient conventions at kinks: `min`/`max` route the whole gradient
//! to the attained argument, ties to the first; `abs` at 0 has gradient 0;
//! `relu` at 0 has gradient 0; `clamp` passes gradient only strictly
//! inside its interval. `log` is the protected `ln(max(x, 1e-12))`; the
//! raw argument is still recorded in the graph diagnostics when the clamp
//! engages.

mod gradcheck;

pub use gradcheck::{check_gradients, GradCheckReport};

use crate::tensor::Tensor;
use std::collections::HashMap;
use thiserror::Error;

/// Floor for the protected logarithm.
pub const LOG_EPS: f64 = 1e-12;

/// Default cap on the number of nodes a graph may hold.
pub const DEFAULT_NODE_BUDGET: usize = 1 << 24;

/// Identifier of a node within one [`Graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeId(pub usize);

/// Identifier of a parameter tensor in the external parameter store.
///
/// The same `ParamId` inserted twice into one graph maps to a single node,
/// which is what makes parameter sharing between models work.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParamId(pub usize);

#[derive(Debug, Clone, PartialEq)]
pub enum Op {
    Const,
    Param(ParamId),
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Min,
    Max,
    Log,
    Exp,
    Tanh,
    Abs,
    Sum,
    Mean,
    Matmul,
    Relu,
    LeakyRelu { slope: f64 },
    Sigmoid,
    Softmax,
    Clamp { lo: f64, hi: f64 },
}

#[derive(Debug, Clone)]
pub struct Node {
    pub op: Op,
    pub inputs: Vec<NodeId>,
    pub value: Tensor,
    /// Hash of the branch choices (attained min/max argument, relu side,
    /// clamp region, ...) made while computing this node. The gradient
    /// checker compares these between perturbed evaluations to detect
    /// non-smooth points.
    pub sig: u64,
}

#[derive(Debug, Clone)]
pub enum Diagnostic {
    /// The protected log clamped at least one component; `raw_min` is the
    /// unprotected logarithm of the smallest offending input.
    ClampedLog { node: NodeId, raw_min: f64 },
}

#[derive(Debug, Error)]
pub enum AutodiffError {
    #[error("shape mismatch at node {node}: {detail}")]
    ShapeMismatch { node: usize, detail: String },
    #[error("non-finite value produced at node {node}")]
    NonFiniteValue { node: usize },
    #[error("backward seed node {node} is not a scalar")]
    SeedNotScalar { node: usize },
    #[error("graph node budget of {budget} exceeded")]
    BudgetExceeded { budget: usize },
}

pub type Result<T> = std::result::Result<T, AutodiffError>;

/// Append-only computation tape.
pub struct Graph {
    nodes: Vec<Node>,
    grads: Vec<Tensor>,
    param_nodes: HashMap<ParamId, NodeId>,
    const_cache: HashMap<u64, NodeId>,
    diagnostics: Vec<Diagnostic>,
    budget: usize,
}

impl Default for Graph {
    fn default() -> Self {
        Self::new()
    }
}

impl Graph {
    pub fn new() -> Self {
        Self::with_budget(DEFAULT_NODE_BUDGET)
    }

    pub fn with_budget(budget: usize) -> Self {
        Self {
            nodes: Vec::new(),
            grads: Vec::new(),
            param_nodes: HashMap::new(),
            const_cache: HashMap::new(),
            diagnostics: Vec::new(),
            budget,
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn diagnostics(&self) -> &[Diagnostic] {
        &self.diagnostics
    }

    pub fn value(&self, id: NodeId) -> &Tensor {
        &self.nodes[id.0].value
    }

    pub fn scalar_value(&self, id: NodeId) -> f64 {
        self.nodes[id.0].value.as_scalar()
    }

    pub fn grad(&self, id: NodeId) -> &Tensor {
        &self.grads[id.0]
    }

    /// Inserts a constant tensor. Scalar constants are cached by bit
    /// pattern so repeated truth constants don't grow the tape.
    pub fn constant(&mut self, value: Tensor) -> Result<NodeId> {
        if value.is_scalar() {
            let key = value.as_scalar().to_bits();
            if let Some(&id) = self.const_cache.get(&key) {
                return Ok(id);
            }
            let id = self.push(Op::Const, vec![], value)?;
            self.const_cache.insert(key, id);
            return Ok(id);
        }
        self.push(Op::Const, vec![], value)
    }

    pub fn scalar(&mut self, value: f64) -> Result<NodeId> {
        self.constant(Tensor::scalar(value))
    }

    /// Inserts (or reuses) the node for a named parameter.
    pub fn param(&mut self, id: ParamId, value: Tensor) -> Result<NodeId> {
        if let Some(&node) = self.param_nodes.get(&id) {
            return Ok(node);
        }
        let node = self.push(Op::Param(id), vec![], value)?;
        self.param_nodes.insert(id, node);
        Ok(node)
    }

    pub fn is_const(&self, id: NodeId) -> bool {
        matches!(self.nodes[id.0].op, Op::Const)
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.insert(Op::Add, vec![a, b])
    }
    pub fn sub(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.insert(Op::Sub, vec![a, b])
    }
    pub fn mul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.insert(Op::Mul, vec![a, b])
    }
    pub fn div(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.insert(Op::Div, vec![a, b])
    }
    pub fn neg(&mut self, a: NodeId) -> Result<NodeId> {
        self.insert(Op::Neg, vec![a])
    }
    pub fn min(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.insert(Op::Min, vec![a, b])
    }
    pub fn max(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.insert(Op::Max, vec![a, b])
    }
    pub fn log(&mut self, a: NodeId) -> Result<NodeId> {
        self.insert(Op::Log, vec![a])
    }
    pub fn exp(&mut self, a: NodeId) -> Result<NodeId> {
        self.insert(Op::Exp, vec![a])
    }
    pub fn tanh(&mut self, a: NodeId) -> Result<NodeId> {
        self.insert(Op::Tanh, vec![a])
    }
    pub fn abs(&mut self, a: NodeId) -> Result<NodeId> {
        self.insert(Op::Abs, vec![a])
    }
    pub fn sum(&mut self, a: NodeId) -> Result<NodeId> {
        self.insert(Op::Sum, vec![a])
    }
    pub fn mean(&mut self, a: NodeId) -> Result<NodeId> {
        self.insert(Op::Mean, vec![a])
    }
    pub fn matmul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.insert(Op::Matmul, vec![a, b])
    }
    pub fn relu(&mut self, a: NodeId) -> Result<NodeId> {
        self.insert(Op::Relu, vec![a])
    }
    pub fn leaky_relu(&mut self, a: NodeId, slope: f64) -> Result<NodeId> {
        self.insert(Op::LeakyRelu { slope }, vec![a])
    }
    pub fn sigmoid(&mut self, a: NodeId) -> Result<NodeId> {
        self.insert(Op::Sigmoid, vec![a])
    }
    pub fn softmax(&mut self, a: NodeId) -> Result<NodeId> {
        self.insert(Op::Softmax, vec![a])
    }
    pub fn clamp(&mut self, a: NodeId, lo: f64, hi: f64) -> Result<NodeId> {
        self.insert(Op::Clamp { lo, hi }, vec![a])
    }

    fn insert(&mut self, op: Op, inputs: Vec<NodeId>) -> Result<NodeId> {
        let node = self.nodes.len();
        let vals: Vec<&Tensor> = inputs.iter().map(|&i| &self.nodes[i.0].value).collect();
        let out = compute(&op, &vals, node)?;
        if let Some(d) = out.diagnostic {
            self.diagnostics.push(d);
        }
        self.push_computed(op, inputs, out.value, out.sig)
    }

    fn push(&mut self, op: Op, inputs: Vec<NodeId>, value: Tensor) -> Result<NodeId> {
        self.push_computed(op, inputs, value, 0)
    }

    fn push_computed(
        &mut self,
        op: Op,
        inputs: Vec<NodeId>,
        value: Tensor,
        sig: u64,
    ) -> Result<NodeId> {
        if self.nodes.len() >= self.budget {
            return Err(AutodiffError::BudgetExceeded {
                budget: self.budget,
            });
        }
        if !value.all_finite() {
            return Err(AutodiffError::NonFiniteValue {
                node: self.nodes.len(),
            });
        }
        let id = NodeId(self.nodes.len());
        self.nodes.push(Node {
            op,
            inputs,
            value,
            sig,
        });
        Ok(id)
    }

    /// Overwrites the stored value of a const or param node. Downstream
    /// values are stale until [`Graph::forward`] runs.
    pub fn set_leaf_value(&mut self, id: NodeId, value: Tensor) {
        debug_assert!(matches!(self.nodes[id.0].op, Op::Const | Op::Param(_)));
        debug_assert_eq!(self.nodes[id.0].value.shape(), value.shape());
        self.nodes[id.0].value = value;
    }

    /// Recomputes every node value in insertion order. Deterministic:
    /// identical graphs produce bit-identical values.
    pub fn forward(&mut self) -> Result<()> {
        self.diagnostics.clear();
        for i in 0..self.nodes.len() {
            let (done, rest) = self.nodes.split_at_mut(i);
            let node = &mut rest[0];
            if matches!(node.op, Op::Const | Op::Param(_)) {
                continue;
            }
            let vals: Vec<&Tensor> = node.inputs.iter().map(|&j| &done[j.0].value).collect();
            let out = compute(&node.op, &vals, i)?;
            node.value = out.value;
            node.sig = out.sig;
            if let Some(d) = out.diagnostic {
                self.diagnostics.push(d);
            }
        }
        Ok(())
    }

    /// One order-stable hash over every node's branch signature.
    pub fn branch_hash(&self) -> u64 {
        let mut h: u64 = 0xcbf29ce484222325;
        for n in &self.nodes {
            h ^= n.sig;
            h = h.wrapping_mul(0x100000001b3);
        }
        h
    }

    /// Reverse-mode sweep from a scalar seed. Fills the gradient of every
    /// node; parameter gradients are then available via [`Graph::param_grads`].
    pub fn backward(&mut self, seed: NodeId) -> Result<()> {
        if !self.nodes[seed.0].value.is_scalar() {
            return Err(AutodiffError::SeedNotScalar { node: seed.0 });
        }
        self.grads = self
            .nodes
            .iter()
            .map(|n| Tensor::zeros(n.value.shape()))
            .collect();
        self.grads[seed.0] = Tensor::scalar(1.0);
        for i in (0..self.nodes.len()).rev() {
            let (gdone, grest) = self.grads.split_at_mut(i);
            let g = &grest[0];
            if g.iter().all(|&v| v == 0.0) {
                continue;
            }
            let node = &self.nodes[i];
            if matches!(node.op, Op::Const | Op::Param(_)) {
                continue;
            }
            let values: Vec<&Tensor> = node
                .inputs
                .iter()
                .map(|&j| &self.nodes[j.0].value)
                .collect();
            distribute(&node.op, &node.inputs, &values, &node.value, g, gdone);
        }
        Ok(())
    }

    /// Gradients of all parameter nodes, sorted by parameter id for
    /// deterministic consumption.
    pub fn param_grads(&self) -> Vec<(ParamId, Tensor)> {
        let mut out: Vec<(ParamId, Tensor)> = self
            .param_nodes
            .iter()
            .map(|(&pid, &node)| (pid, self.grads[node.0].clone()))
            .collect();
        out.sort_by_key(|(pid, _)| *pid);
        out
    }

    pub fn param_node(&self, id: ParamId) -> Option<NodeId> {
        self.param_nodes.get(&id).copied()
    }

    pub fn param_ids(&self) -> Vec<ParamId> {
        let mut ids: Vec<ParamId> = self.param_nodes.keys().copied().collect();
        ids.sort();
        ids
    }
}

struct Computed {
    value: Tensor,
    sig: u64,
    diagnostic: Option<Diagnostic>,
}

impl Computed {
    fn plain(value: Tensor) -> Self {
        Self {
            value,
            sig: 0,
            diagnostic: None,
        }
    }
}

fn shape_err(node: usize, detail: impl Into<String>) -> AutodiffError {
    AutodiffError::ShapeMismatch {
        node,
        detail: detail.into(),
    }
}

struct SigHash(u64);

impl SigHash {
    fn new() -> Self {
        SigHash(0xcbf29ce484222325)
    }
    fn push(&mut self, byte: u8) {
        self.0 ^= byte as u64;
        self.0 = self.0.wrapping_mul(0x100000001b3);
    }
}

/// Elementwise binary with scalar broadcast on either side.
fn zip_broadcast(
    a: &Tensor,
    b: &Tensor,
    node: usize,
    f: impl Fn(f64, f64) -> f64,
) -> Result<Tensor> {
    if a.shape() == b.shape() {
        let data = a.iter().zip(b.iter()).map(|(&x, &y)| f(x, y)).collect();
        Ok(Tensor::new(a.shape().to_vec(), data))
    } else if a.is_scalar() {
        let x = a.as_scalar();
        Ok(b.map(|y| f(x, y)))
    } else if b.is_scalar() {
        let y = b.as_scalar();
        Ok(a.map(|x| f(x, y)))
    } else {
        Err(shape_err(
            node,
            format!("incompatible shapes {:?} and {:?}", a.shape(), b.shape()),
        ))
    }
}

fn compute(op: &Op, v: &[&Tensor], node: usize) -> Result<Computed> {
    match op {
        Op::Const | Op::Param(_) => unreachable!("leaves are not recomputed"),
        Op::Add => Ok(Computed::plain(zip_broadcast(v[0], v[1], node, |a, b| {
            a + b
        })?)),
        Op::Sub => Ok(Computed::plain(zip_broadcast(v[0], v[1], node, |a, b| {
            a - b
        })?)),
        Op::Mul => Ok(Computed::plain(zip_broadcast(v[0], v[1], node, |a, b| {
            a * b
        })?)),
        Op::Div => Ok(Computed::plain(zip_broadcast(v[0], v[1], node, |a, b| {
            a / b
        })?)),
        Op::Neg => Ok(Computed::plain(v[0].map(|x| -x))),
        Op::Min | Op::Max => {
            let take_min = matches!(op, Op::Min);
            let value = zip_broadcast(v[0], v[1], node, |a, b| {
                if take_min {
                    if a <= b {
                        a
                    } else {
                        b
                    }
                } else if a >= b {
                    a
                } else {
                    b
                }
            })?;
            // Signature records which argument was attained per component.
            let mut sig = SigHash::new();
            let n = value.len();
            for i in 0..n {
                let a = if v[0].is_scalar() {
                    v[0].as_scalar()
                } else {
                    v[0][i]
                };
                let b = if v[1].is_scalar() {
                    v[1].as_scalar()
                } else {
                    v[1][i]
                };
                let first = if take_min { a <= b } else { a >= b };
                sig.push(first as u8);
            }
            Ok(Computed {
                value,
                sig: sig.0,
                diagnostic: None,
            })
        }
        Op::Log => {
            let mut raw_min = f64::INFINITY;
            let mut clamped = false;
            let mut sig = SigHash::new();
            let value = v[0].map(|x| {
                if x < LOG_EPS {
                    clamped = true;
                    raw_min = raw_min.min(x.ln());
                }
                (x.max(LOG_EPS)).ln()
            });
            for &x in v[0].iter() {
                sig.push((x < LOG_EPS) as u8);
            }
            let diagnostic = clamped.then_some(Diagnostic::ClampedLog {
                node: NodeId(node),
                raw_min,
            });
            Ok(Computed {
                value,
                sig: sig.0,
                diagnostic,
            })
        }
        Op::Exp => Ok(Computed::plain(v[0].map(f64::exp))),
        Op::Tanh => Ok(Computed::plain(v[0].map(f64::tanh))),
        Op::Abs => {
            let mut sig = SigHash::new();
            for &x in v[0].iter() {
                sig.push((x < 0.0) as u8);
            }
            Ok(Computed {
                value: v[0].map(f64::abs),
                sig: sig.0,
                diagnostic: None,
            })
        }
        Op::Sum => Ok(Computed::plain(Tensor::scalar(v[0].iter().sum()))),
        Op::Mean => {
            let n = v[0].len().max(1) as f64;
            Ok(Computed::plain(Tensor::scalar(
                v[0].iter().sum::<f64>() / n,
            )))
        }
        Op::Matmul => matmul_value(v[0], v[1], node).map(Computed::plain),
        Op::Relu => {
            let mut sig = SigHash::new();
            for &x in v[0].iter() {
                sig.push((x > 0.0) as u8);
            }
            Ok(Computed {
                value: v[0].map(|x| x.max(0.0)),
                sig: sig.0,
                diagnostic: None,
            })
        }
        Op::LeakyRelu { slope } => {
            let s = *slope;
            let mut sig = SigHash::new();
            for &x in v[0].iter() {
                sig.push((x > 0.0) as u8);
            }
            Ok(Computed {
                value: v[0].map(|x| if x > 0.0 { x } else { s * x }),
                sig: sig.0,
                diagnostic: None,
            })
        }
        Op::Sigmoid => Ok(Computed::plain(v[0].map(stable_sigmoid))),
        Op::Softmax => {
            if v[0].shape().len() != 1 {
                return Err(shape_err(node, "softmax expects a vector"));
            }
            let max = v[0].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let exps: Vec<f64> = v[0].iter().map(|&x| (x - max).exp()).collect();
            let total: f64 = exps.iter().sum();
            Ok(Computed::plain(Tensor::vector(
                exps.into_iter().map(|e| e / total).collect(),
            )))
        }
        Op::Clamp { lo, hi } => {
            let (lo, hi) = (*lo, *hi);
            let mut sig = SigHash::new();
            for &x in v[0].iter() {
                let region = if x < lo {
                    0u8
                } else if x > hi {
                    2
                } else {
                    1
                };
                sig.push(region);
            }
            Ok(Computed {
                value: v[0].map(|x| x.clamp(lo, hi)),
                sig: sig.0,
                diagnostic: None,
            })
        }
    }
}

fn stable_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn matmul_value(a: &Tensor, b: &Tensor, node: usize) -> Result<Tensor> {
    match (a.shape(), b.shape()) {
        ([m, k], [k2]) if k == k2 => {
            let (m, k) = (*m, *k);
            let mut out = vec![0.0; m];
            for i in 0..m {
                let mut acc = 0.0;
                for j in 0..k {
                    acc += a[i * k + j] * b[j];
                }
                out[i] = acc;
            }
            Ok(Tensor::vector(out))
        }
        ([m, k], [k2, n]) if k == k2 => {
            let (m, k, n) = (*m, *k, *n);
            let mut out = vec![0.0; m * n];
            for i in 0..m {
                for j in 0..k {
                    let aij = a[i * k + j];
                    for c in 0..n {
                        out[i * n + c] += aij * b[j * n + c];
                    }
                }
            }
            Ok(Tensor::matrix(m, n, out))
        }
        (sa, sb) => Err(shape_err(
            node,
            format!("matmul on shapes {:?} and {:?}", sa, sb),
        )),
    }
}

/// Adds `g(out_i)`-weighted contributions into the gradients of a binary
/// elementwise op, reducing over the output when an input is scalar.
fn accumulate_binary(
    inputs: &[NodeId],
    values: &[&Tensor],
    g: &Tensor,
    gdone: &mut [Tensor],
    contrib: impl Fn(usize, f64, f64) -> (f64, f64),
) {
    let n = g.len();
    for i in 0..n {
        let a = if values[0].is_scalar() {
            values[0].as_scalar()
        } else {
            values[0][i]
        };
        let b = if values[1].is_scalar() {
            values[1].as_scalar()
        } else {
            values[1][i]
        };
        let (da, db) = contrib(i, a, b);
        let gi = g[i];
        if values[0].is_scalar() {
            gdone[inputs[0].0][0] += gi * da;
        } else {
            gdone[inputs[0].0][i] += gi * da;
        }
        if values[1].is_scalar() {
            gdone[inputs[1].0][0] += gi * db;
        } else {
            gdone[inputs[1].0][i] += gi * db;
        }
    }
}

fn distribute(
    op: &Op,
    inputs: &[NodeId],
    values: &[&Tensor],
    out_value: &Tensor,
    g: &Tensor,
    gdone: &mut [Tensor],
) {
    match op {
        Op::Const | Op::Param(_) => {}
        Op::Add => accumulate_binary(inputs, values, g, gdone, |_, _, _| (1.0, 1.0)),
        Op::Sub => accumulate_binary(inputs, values, g, gdone, |_, _, _| (1.0, -1.0)),
        Op::Mul => accumulate_binary(inputs, values, g, gdone, |_, a, b| (b, a)),
        Op::Div => accumulate_binary(inputs, values, g, gdone, |_, a, b| (1.0 / b, -a / (b * b))),
        Op::Neg => {
            for i in 0..g.len() {
                gdone[inputs[0].0][i] -= g[i];
            }
        }
        Op::Min => accumulate_binary(inputs, values, g, gdone, |_, a, b| {
            if a <= b {
                (1.0, 0.0)
            } else {
                (0.0, 1.0)
            }
        }),
        Op::Max => accumulate_binary(inputs, values, g, gdone, |_, a, b| {
            if a >= b {
                (1.0, 0.0)
            } else {
                (0.0, 1.0)
            }
        }),
        Op::Log => {
            let x = values[0];
            for i in 0..g.len() {
                if x[i] > LOG_EPS {
                    gdone[inputs[0].0][i] += g[i] / x[i];
                }
            }
        }
        Op::Exp => {
            for i in 0..g.len() {
                gdone[inputs[0].0][i] += g[i] * out_value[i];
            }
        }
        Op::Tanh => {
            for i in 0..g.len() {
                let t = out_value[i];
                gdone[inputs[0].0][i] += g[i] * (1.0 - t * t);
            }
        }
        Op::Abs => {
            let x = values[0];
            for i in 0..g.len() {
                let s = if x[i] > 0.0 {
                    1.0
                } else if x[i] < 0.0 {
                    -1.0
                } else {
                    0.0
                };
                gdone[inputs[0].0][i] += g[i] * s;
            }
        }
        Op::Sum => {
            let gs = g.as_scalar();
            let target = &mut gdone[inputs[0].0];
            for i in 0..target.len() {
                target[i] += gs;
            }
        }
        Op::Mean => {
            let n = values[0].len().max(1) as f64;
            let gs = g.as_scalar() / n;
            let target = &mut gdone[inputs[0].0];
            for i in 0..target.len() {
                target[i] += gs;
            }
        }
        Op::Matmul => {
            let a = values[0];
            let b = values[1];
            match (a.shape(), b.shape()) {
                ([m, k], [_]) => {
                    let (m, k) = (*m, *k);
                    for i in 0..m {
                        let gi = g[i];
                        for j in 0..k {
                            gdone[inputs[0].0][i * k + j] += gi * b[j];
                            gdone[inputs[1].0][j] += gi * a[i * k + j];
                        }
                    }
                }
                ([m, k], [_, n]) => {
                    let (m, k, n) = (*m, *k, *n);
                    for i in 0..m {
                        for c in 0..n {
                            let gic = g[i * n + c];
                            for j in 0..k {
                                gdone[inputs[0].0][i * k + j] += gic * b[j * n + c];
                                gdone[inputs[1].0][j * n + c] += gic * a[i * k + j];
                            }
                        }
                    }
                }
                _ => unreachable!("matmul forward validated shapes"),
            }
        }
        Op::Relu => {
            let x = values[0];
            for i in 0..g.len() {
                if x[i] > 0.0 {
                    gdone[inputs[0].0][i] += g[i];
                }
            }
        }
        Op::LeakyRelu { slope } => {
            let x = values[0];
            for i in 0..g.len() {
                let d = if x[i] > 0.0 { 1.0 } else { *slope };
                gdone[inputs[0].0][i] += g[i] * d;
            }
        }
        Op::Sigmoid => {
            for i in 0..g.len() {
                let s = out_value[i];
                gdone[inputs[0].0][i] += g[i] * s * (1.0 - s);
            }
        }
        Op::Softmax => {
            let s = out_value;
            let dot: f64 = (0..g.len()).map(|j| g[j] * s[j]).sum();
            for i in 0..g.len() {
                gdone[inputs[0].0][i] += s[i] * (g[i] - dot);
            }
        }
        Op::Clamp { lo, hi } => {
            let x = values[0];
            for i in 0..g.len() {
                if x[i] > *lo && x[i] < *hi {
                    gdone[inputs[0].0][i] += g[i];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_value_and_gradient() {
        let mut g = Graph::new();
        let x = g.param(ParamId(0), Tensor::scalar(0.5)).unwrap();
        let y = g.param(ParamId(1), Tensor::scalar(0.4)).unwrap();
        let p = g.mul(x, y).unwrap();
        assert_eq!(g.scalar_value(p), 0.2);
        g.backward(p).unwrap();
        assert_eq!(g.grad(x).as_scalar(), 0.4);
        assert_eq!(g.grad(y).as_scalar(), 0.5);
    }

    #[test]
    fn neg_log_of_one_is_zero() {
        let mut g = Graph::new();
        let x = g.scalar(1.0).unwrap();
        let l = g.log(x).unwrap();
        let n = g.neg(l).unwrap();
        assert_eq!(g.scalar_value(n), 0.0);
    }

    #[test]
    fn neg_log_gradient() {
        let mut g = Graph::new();
        let x = g.param(ParamId(0), Tensor::scalar(0.25)).unwrap();
        let l = g.log(x).unwrap();
        let n = g.neg(l).unwrap();
        g.backward(n).unwrap();
        assert_eq!(g.grad(x).as_scalar(), -4.0);
    }

    #[test]
    fn lukasiewicz_implication_shape() {
        // min(1, 1 - 0.9 + 0.3)
        let mut g = Graph::new();
        let one = g.scalar(1.0).unwrap();
        let x = g.scalar(0.9).unwrap();
        let y = g.scalar(0.3).unwrap();
        let d = g.sub(one, x).unwrap();
        let s = g.add(d, y).unwrap();
        let m = g.min(one, s).unwrap();
        assert!((g.scalar_value(m) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn forward_is_reproducible() {
        let mut g = Graph::new();
        let x = g
            .param(ParamId(0), Tensor::vector(vec![0.3, -1.2, 2.0]))
            .unwrap();
        let s = g.sigmoid(x).unwrap();
        let t = g.sum(s).unwrap();
        let v1 = g.scalar_value(t);
        g.forward().unwrap();
        let v2 = g.scalar_value(t);
        assert_eq!(v1.to_bits(), v2.to_bits());
    }

    #[test]
    fn seed_must_be_scalar() {
        let mut g = Graph::new();
        let x = g.param(ParamId(0), Tensor::vector(vec![1.0, 2.0])).unwrap();
        let y = g.relu(x).unwrap();
        assert!(matches!(
            g.backward(y),
            Err(AutodiffError::SeedNotScalar { .. })
        ));
    }

    #[test]
    fn param_nodes_are_deduplicated() {
        let mut g = Graph::new();
        let a = g.param(ParamId(3), Tensor::scalar(2.0)).unwrap();
        let b = g.param(ParamId(3), Tensor::scalar(2.0)).unwrap();
        assert_eq!(a, b);
        // x*x with the shared node accumulates both product-rule terms.
        let p = g.mul(a, b).unwrap();
        g.backward(p).unwrap();
        assert_eq!(g.grad(a).as_scalar(), 4.0);
    }

    #[test]
    fn budget_is_enforced() {
        let mut g = Graph::with_budget(2);
        let a = g.scalar(1.0).unwrap();
        let b = g.scalar(2.0).unwrap();
        assert!(matches!(
            g.add(a, b),
            Err(AutodiffError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn shape_mismatch_reported() {
        let mut g = Graph::new();
        let a = g.constant(Tensor::vector(vec![1.0, 2.0])).unwrap();
        let b = g.constant(Tensor::vector(vec![1.0, 2.0, 3.0])).unwrap();
        assert!(matches!(
            g.add(a, b),
            Err(AutodiffError::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn division_by_zero_is_caught() {
        let mut g = Graph::new();
        let a = g.scalar(1.0).unwrap();
        let b = g.scalar(0.0).unwrap();
        assert!(matches!(
            g.div(a, b),
            Err(AutodiffError::NonFiniteValue { .. })
        ));
    }

    #[test]
    fn matmul_matrix_vector() {
        let mut g = Graph::new();
        let m = g
            .constant(Tensor::matrix(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]))
            .unwrap();
        let v = g.constant(Tensor::vector(vec![1.0, 0.0, -1.0])).unwrap();
        let out = g.matmul(m, v).unwrap();
        assert_eq!(g.value(out).data(), &[-2.0, -2.0]);
    }

    #[test]
    fn gradient_linearity() {
        // grad(l1 + l2) == grad(l1) + grad(l2) on the same parameter.
        let p = Tensor::vector(vec![0.4, -0.7, 1.1]);
        let grad_of = |combine: bool| -> Vec<f64> {
            let mut g = Graph::new();
            let x = g.param(ParamId(0), p.clone()).unwrap();
            let s = g.sigmoid(x).unwrap();
            let l1 = g.sum(s).unwrap();
            let t = g.tanh(x).unwrap();
            let l2 = g.mean(t).unwrap();
            if combine {
                let total = g.add(l1, l2).unwrap();
                g.backward(total).unwrap();
                g.grad(x).data().to_vec()
            } else {
                g.backward(l1).unwrap();
                let g1 = g.grad(x).data().to_vec();
                g.backward(l2).unwrap();
                let g2 = g.grad(x).data().to_vec();
                g1.iter().zip(&g2).map(|(a, b)| a + b).collect()
            }
        };
        let combined = grad_of(true);
        let summed = grad_of(false);
        for (a, b) in combined.iter().zip(&summed) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn protected_log_reports_raw_value() {
        let mut g = Graph::new();
        let x = g.scalar(0.0).unwrap();
        let _ = g.log(x).unwrap();
        assert!(matches!(
            g.diagnostics().first(),
            Some(Diagnostic::ClampedLog { raw_min, .. }) if raw_min.is_infinite()
        ));
    }
}
