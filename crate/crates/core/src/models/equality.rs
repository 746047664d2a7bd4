//! Fuzzy equality operators bound to `=` atoms.

use super::ModelError;
use crate::autodiff::{Graph, NodeId};
use crate::semantics::EqualityKind;
use crate::tensor::Tensor;

/// `1 − tanh(mean_p |x_p − y_p|)`: 1 for identical images, decaying with
/// the mean absolute pixel difference.
pub fn pixel_similarity(x: &Tensor, y: &Tensor) -> Result<f64, ModelError> {
    check_shapes(x, y)?;
    let n = x.len() as f64;
    let mad = x
        .iter()
        .zip(y.iter())
        .map(|(a, b)| (a - b).abs())
        .sum::<f64>()
        / n;
    Ok(1.0 - mad.tanh())
}

/// `exp(−‖x−y‖²)`: similarity for latent vectors.
pub fn squared_exponential(x: &Tensor, y: &Tensor) -> Result<f64, ModelError> {
    check_shapes(x, y)?;
    Ok((-x.sq_distance(y)).exp())
}

pub fn emit_pixel_similarity(
    graph: &mut Graph,
    x: NodeId,
    y: NodeId,
) -> Result<NodeId, ModelError> {
    check_node_shapes(graph, x, y)?;
    let d = graph.sub(x, y)?;
    let a = graph.abs(d)?;
    let m = graph.mean(a)?;
    let t = graph.tanh(m)?;
    let one = graph.scalar(1.0)?;
    Ok(graph.sub(one, t)?)
}

pub fn emit_squared_exponential(
    graph: &mut Graph,
    x: NodeId,
    y: NodeId,
) -> Result<NodeId, ModelError> {
    check_node_shapes(graph, x, y)?;
    let d = graph.sub(x, y)?;
    let sq = graph.mul(d, d)?;
    let s = graph.sum(sq)?;
    let n = graph.neg(s)?;
    Ok(graph.exp(n)?)
}

pub fn emit_equality(
    graph: &mut Graph,
    kind: EqualityKind,
    x: NodeId,
    y: NodeId,
) -> Result<NodeId, ModelError> {
    match kind {
        EqualityKind::PixelSimilarity => emit_pixel_similarity(graph, x, y),
        EqualityKind::SquaredExponential => emit_squared_exponential(graph, x, y),
    }
}

fn check_shapes(x: &Tensor, y: &Tensor) -> Result<(), ModelError> {
    if x.shape() != y.shape() {
        return Err(ModelError::ShapeMismatch {
            expected: x.shape().to_vec(),
            got: y.shape().to_vec(),
        });
    }
    Ok(())
}

fn check_node_shapes(graph: &Graph, x: NodeId, y: NodeId) -> Result<(), ModelError> {
    if graph.value(x).shape() != graph.value(y).shape() {
        return Err(ModelError::ShapeMismatch {
            expected: graph.value(x).shape().to_vec(),
            got: graph.value(y).shape().to_vec(),
        });
    }
    Ok(())
}
