//! RBF classifier: Gaussian units `exp(−‖x−c_k‖²/σ_k²)` feeding a linear
//! layer and a softmax. There is no output bias, so activations (and with
//! them the class memberships) collapse to the uniform distribution far
//! from every center — the closed decision boundaries the toy task relies
//! on.

use super::{glorot_uniform, ModelError, ParamStore};
use crate::autodiff::{Graph, NodeId, ParamId};
use crate::tensor::Tensor;

pub const DEFAULT_CENTERS_PER_CLASS: usize = 30;

/// Graph nodes of the input-independent RBF pieces, emitted once per
/// graph by [`RbfClassifier::prepare`].
#[derive(Debug, Clone, Copy)]
pub struct RbfStatic {
    pub centers: NodeId,
    pub row_sq: NodeId,
    pub sigma_sq: NodeId,
    pub weights: NodeId,
}

#[derive(Debug, Clone)]
pub struct RbfClassifier {
    pub centers: ParamId,
    pub widths: ParamId,
    pub weights: ParamId,
    pub in_dim: usize,
    pub units: usize,
    pub classes: usize,
}

impl RbfClassifier {
    /// Centers are sampled from `samples`; widths start at the median
    /// pairwise distance between the chosen centers.
    pub fn init(
        store: &mut ParamStore,
        prefix: &str,
        in_dim: usize,
        classes: usize,
        units: usize,
        samples: &[Tensor],
        rng: &mut impl rand::RngExt,
    ) -> Result<RbfClassifier, ModelError> {
        assert!(!samples.is_empty(), "rbf init needs sample inputs");
        let mut center_rows = Vec::with_capacity(units * in_dim);
        let mut chosen = Vec::with_capacity(units);
        for _ in 0..units {
            let s = &samples[rng.random_range(0..samples.len())];
            if s.shape() != [in_dim] {
                return Err(ModelError::ShapeMismatch {
                    expected: vec![in_dim],
                    got: s.shape().to_vec(),
                });
            }
            center_rows.extend_from_slice(s.data());
            chosen.push(s.clone());
        }
        let sigma = median_pairwise_distance(&chosen).max(1e-3);
        let centers = store.insert(
            &format!("{prefix}.centers"),
            Tensor::matrix(units, in_dim, center_rows),
        );
        let widths = store.insert(&format!("{prefix}.widths"), Tensor::filled(&[units], sigma));
        let weights = store.insert(
            &format!("{prefix}.weights"),
            glorot_uniform(rng, classes, units),
        );
        Ok(RbfClassifier {
            centers,
            widths,
            weights,
            in_dim,
            units,
            classes,
        })
    }

    pub fn params(&self) -> Vec<ParamId> {
        vec![self.centers, self.widths, self.weights]
    }

    /// Emits the input-independent part once: parameter nodes, row norms
    /// of the centers and squared widths. Reusable for every input in the
    /// same graph.
    pub fn prepare(&self, graph: &mut Graph, store: &ParamStore) -> Result<RbfStatic, ModelError> {
        let c = graph.param(self.centers, store.get(self.centers).clone())?;
        let w = graph.param(self.widths, store.get(self.widths).clone())?;
        let weights = graph.param(self.weights, store.get(self.weights).clone())?;
        let cc = graph.mul(c, c)?;
        let ones = graph.constant(Tensor::filled(&[self.in_dim], 1.0))?;
        let row_sq = graph.matmul(cc, ones)?;
        let sigma_sq = graph.mul(w, w)?;
        Ok(RbfStatic {
            centers: c,
            row_sq,
            sigma_sq,
            weights,
        })
    }

    /// Gaussian unit activations, shape `[units]`.
    pub fn unit_activations(
        &self,
        graph: &mut Graph,
        prepared: &RbfStatic,
        input: NodeId,
    ) -> Result<NodeId, ModelError> {
        let got = graph.value(input).shape().to_vec();
        if got != [self.in_dim] {
            return Err(ModelError::ShapeMismatch {
                expected: vec![self.in_dim],
                got,
            });
        }
        // ‖x−c_k‖² = rowsum(c∘c) − 2·c·x + ‖x‖², all rows at once.
        let cx = graph.matmul(prepared.centers, input)?;
        let two = graph.scalar(2.0)?;
        let twice_cx = graph.mul(two, cx)?;
        let xx_elem = graph.mul(input, input)?;
        let xx = graph.sum(xx_elem)?;
        let partial = graph.sub(prepared.row_sq, twice_cx)?;
        let dist_sq = graph.add(partial, xx)?;
        let scaled = graph.div(dist_sq, prepared.sigma_sq)?;
        let neg = graph.neg(scaled)?;
        Ok(graph.exp(neg)?)
    }

    /// Class memberships, shape `[classes]`, summing to one.
    pub fn forward_prepared(
        &self,
        graph: &mut Graph,
        prepared: &RbfStatic,
        input: NodeId,
    ) -> Result<NodeId, ModelError> {
        let units = self.unit_activations(graph, prepared, input)?;
        let logits = graph.matmul(prepared.weights, units)?;
        Ok(graph.softmax(logits)?)
    }

    /// Class memberships without caller-managed reuse.
    pub fn forward(
        &self,
        graph: &mut Graph,
        store: &ParamStore,
        input: NodeId,
    ) -> Result<NodeId, ModelError> {
        let prepared = self.prepare(graph, store)?;
        self.forward_prepared(graph, &prepared, input)
    }

    /// One class membership picked out of a softmax node.
    pub fn pick_class(
        &self,
        graph: &mut Graph,
        softmax: NodeId,
        class: usize,
    ) -> Result<NodeId, ModelError> {
        assert!(class < self.classes);
        let mut onehot = vec![0.0; self.classes];
        onehot[class] = 1.0;
        let mask = graph.constant(Tensor::vector(onehot))?;
        let picked = graph.mul(softmax, mask)?;
        Ok(graph.sum(picked)?)
    }

    /// Truth of one class output as a scalar node.
    pub fn class_output(
        &self,
        graph: &mut Graph,
        store: &ParamStore,
        input: NodeId,
        class: usize,
    ) -> Result<NodeId, ModelError> {
        let soft = self.forward(graph, store, input)?;
        self.pick_class(graph, soft, class)
    }

    /// Argmax class for a plain tensor input, without touching a graph.
    pub fn classify(&self, store: &ParamStore, input: &Tensor) -> Result<usize, ModelError> {
        let mut g = Graph::new();
        let x = g.constant(input.clone())?;
        let out = self.forward(&mut g, store, x)?;
        let probs = g.value(out);
        let mut best = 0;
        for i in 1..probs.len() {
            if probs[i] > probs[best] {
                best = i;
            }
        }
        Ok(best)
    }
}

fn median_pairwise_distance(points: &[Tensor]) -> f64 {
    let mut dists = Vec::new();
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            dists.push(points[i].sq_distance(&points[j]).sqrt());
        }
    }
    if dists.is_empty() {
        return 1.0;
    }
    dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
    dists[dists.len() / 2]
}
