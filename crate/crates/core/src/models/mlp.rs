//! Feedforward networks with one hidden layer (default width 50) and a
//! leaky-ReLU activation. Predicate heads and image-codomain heads apply
//! a sigmoid; latent-codomain heads stay linear.
//!
//! A network may take several arguments (a binary predicate gets two);
//! each argument contributes through its own first-layer matrix, which is
//! the block form of concatenating the inputs.

use super::{glorot_uniform, ModelError, ParamStore};
use crate::autodiff::{Graph, NodeId, ParamId};
use crate::tensor::Tensor;

pub const DEFAULT_HIDDEN: usize = 50;
const LEAKY_SLOPE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Head {
    /// Squashes every output into (0,1): predicates and image pixels.
    Sigmoid,
    /// Raw affine output: latent codomains.
    Linear,
}

#[derive(Debug, Clone)]
pub struct Mlp {
    /// One first-layer matrix per argument.
    pub w1: Vec<ParamId>,
    pub b1: ParamId,
    pub w2: ParamId,
    pub b2: ParamId,
    pub in_dims: Vec<usize>,
    pub hidden: usize,
    pub out_dim: usize,
    pub head: Head,
}

impl Mlp {
    pub fn init(
        store: &mut ParamStore,
        prefix: &str,
        in_dims: &[usize],
        hidden: usize,
        out_dim: usize,
        head: Head,
        rng: &mut impl rand::RngExt,
    ) -> Mlp {
        assert!(!in_dims.is_empty());
        let total_in: usize = in_dims.iter().sum();
        let w1 = in_dims
            .iter()
            .enumerate()
            .map(|(i, &d)| {
                // Fan-in counts the whole (conceptually concatenated) input.
                let bound = (6.0 / (total_in + hidden) as f64).sqrt();
                let data = (0..hidden * d)
                    .map(|_| rng.random_range(-bound..bound))
                    .collect();
                store.insert(&format!("{prefix}.w1_{i}"), Tensor::matrix(hidden, d, data))
            })
            .collect();
        let b1 = store.insert(&format!("{prefix}.b1"), Tensor::zeros(&[hidden]));
        let w2 = store.insert(
            &format!("{prefix}.w2"),
            glorot_uniform(rng, out_dim, hidden),
        );
        let b2 = store.insert(&format!("{prefix}.b2"), Tensor::zeros(&[out_dim]));
        Mlp {
            w1,
            b1,
            w2,
            b2,
            in_dims: in_dims.to_vec(),
            hidden,
            out_dim,
            head,
        }
    }

    /// Like [`Mlp::init`] but reusing another network's first layer, the
    /// shared-latent mechanism for paired generators.
    pub fn init_sharing_first_layer(
        store: &mut ParamStore,
        prefix: &str,
        shared_with: &Mlp,
        out_dim: usize,
        head: Head,
        rng: &mut impl rand::RngExt,
    ) -> Mlp {
        let w2 = store.insert(
            &format!("{prefix}.w2"),
            glorot_uniform(rng, out_dim, shared_with.hidden),
        );
        let b2 = store.insert(&format!("{prefix}.b2"), Tensor::zeros(&[out_dim]));
        Mlp {
            w1: shared_with.w1.clone(),
            b1: shared_with.b1,
            w2,
            b2,
            in_dims: shared_with.in_dims.clone(),
            hidden: shared_with.hidden,
            out_dim,
            head,
        }
    }

    pub fn params(&self) -> Vec<ParamId> {
        let mut p = self.w1.clone();
        p.push(self.b1);
        p.push(self.w2);
        p.push(self.b2);
        p
    }

    pub fn forward(
        &self,
        graph: &mut Graph,
        store: &ParamStore,
        inputs: &[NodeId],
    ) -> Result<NodeId, ModelError> {
        if inputs.len() != self.in_dims.len() {
            return Err(ModelError::ShapeMismatch {
                expected: vec![self.in_dims.len()],
                got: vec![inputs.len()],
            });
        }
        for (&node, &dim) in inputs.iter().zip(&self.in_dims) {
            let got = graph.value(node).shape().to_vec();
            if got != [dim] {
                return Err(ModelError::ShapeMismatch {
                    expected: vec![dim],
                    got,
                });
            }
        }
        let b1 = graph.param(self.b1, store.get(self.b1).clone())?;
        let mut z1 = b1;
        for (&w_id, &x) in self.w1.iter().zip(inputs) {
            let w = graph.param(w_id, store.get(w_id).clone())?;
            let contrib = graph.matmul(w, x)?;
            z1 = graph.add(z1, contrib)?;
        }
        let h = graph.leaky_relu(z1, LEAKY_SLOPE)?;
        let w2 = graph.param(self.w2, store.get(self.w2).clone())?;
        let b2 = graph.param(self.b2, store.get(self.b2).clone())?;
        let z2 = graph.matmul(w2, h)?;
        let z2 = graph.add(z2, b2)?;
        match self.head {
            Head::Sigmoid => Ok(graph.sigmoid(z2)?),
            Head::Linear => Ok(z2),
        }
    }

    /// Scalar truth of a predicate-bound network (out_dim 1).
    pub fn forward_scalar(
        &self,
        graph: &mut Graph,
        store: &ParamStore,
        inputs: &[NodeId],
    ) -> Result<NodeId, ModelError> {
        debug_assert_eq!(self.out_dim, 1);
        let out = self.forward(graph, store, inputs)?;
        Ok(graph.sum(out)?)
    }

    /// Forward pass on a plain tensor, outside any caller-owned graph.
    pub fn apply(&self, store: &ParamStore, inputs: &[&Tensor]) -> Result<Tensor, ModelError> {
        let mut g = Graph::new();
        let nodes = inputs
            .iter()
            .map(|t| g.constant((*t).clone()))
            .collect::<Result<Vec<_>, _>>()?;
        let out = self.forward(&mut g, store, &nodes)?;
        Ok(g.value(out).clone())
    }
}
