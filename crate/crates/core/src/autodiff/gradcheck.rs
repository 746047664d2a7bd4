//! Central finite-difference verification of reverse-mode gradients.

use super::{Graph, NodeId, ParamId, Result};
use crate::tensor::Tensor;

/// Outcome of one [`check_gradients`] run.
#[derive(Debug, Clone)]
pub struct GradCheckReport {
    /// Worst protected relative error over all checked entries.
    pub max_rel_error: f64,
    /// Parameter and flat index of the worst entry, with both derivative
    /// estimates, if anything was checked.
    pub worst: Option<WorstEntry>,
    /// Number of parameter entries compared.
    pub checked: usize,
    /// Entries skipped because a branch (min/max tie, relu side, clamp
    /// region, log floor) flipped between the two perturbed evaluations.
    pub skipped: usize,
    /// Tolerance the report was evaluated against.
    pub tolerance: f64,
}

#[derive(Debug, Clone)]
pub struct WorstEntry {
    pub param: ParamId,
    pub index: usize,
    pub analytic: f64,
    pub numeric: f64,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.max_rel_error < self.tolerance
    }
}

/// Compares backward-pass gradients at `seed` against central differences
/// with step `h`, for every entry of every parameter node in the graph.
///
/// Entries whose perturbation crosses a non-smooth point are skipped and
/// counted, not failed: at such points the two-sided difference does not
/// estimate the one-sided derivative the backward pass reports.
///
/// Relative error is `|a - n| / max(|a|, |n|, 1)`, so near-zero gradients
/// are compared absolutely.
pub fn check_gradients(
    graph: &mut Graph,
    seed: NodeId,
    h: f64,
    tolerance: f64,
) -> Result<GradCheckReport> {
    graph.forward()?;
    graph.backward(seed)?;

    let params = graph.param_ids();
    let analytic: Vec<(ParamId, Tensor)> = params
        .iter()
        .map(|&pid| {
            let node = graph.param_node(pid).expect("listed param");
            (pid, graph.grad(node).clone())
        })
        .collect();

    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        worst: None,
        checked: 0,
        skipped: 0,
        tolerance,
    };

    for (pid, grads) in &analytic {
        let node = graph.param_node(*pid).expect("listed param");
        for index in 0..grads.len() {
            let base = graph.value(node)[index];

            let (f_plus, sig_plus) = eval_at(graph, node, index, base + h, seed)?;
            let (f_minus, sig_minus) = eval_at(graph, node, index, base - h, seed)?;
            restore(graph, node, index, base);

            if sig_plus != sig_minus {
                report.skipped += 1;
                continue;
            }
            let numeric = (f_plus - f_minus) / (2.0 * h);
            let a = grads[index];
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1.0);
            report.checked += 1;
            if rel > report.max_rel_error {
                report.max_rel_error = rel;
                report.worst = Some(WorstEntry {
                    param: *pid,
                    index,
                    analytic: a,
                    numeric,
                });
            }
        }
    }

    // Leave the graph at its unperturbed state.
    graph.forward()?;
    Ok(report)
}

fn eval_at(
    graph: &mut Graph,
    node: NodeId,
    index: usize,
    value: f64,
    seed: NodeId,
) -> Result<(f64, u64)> {
    restore(graph, node, index, value);
    graph.forward()?;
    Ok((graph.scalar_value(seed), graph.branch_hash()))
}

fn restore(graph: &mut Graph, node: NodeId, index: usize, value: f64) {
    let mut t = graph.value(node).clone();
    t[index] = value;
    graph.set_leaf_value(node, t);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::Graph;
    use crate::tensor::Tensor;

    #[test]
    fn mlp_like_loss_passes() {
        let mut g = Graph::new();
        let w = g
            .param(
                ParamId(0),
                Tensor::matrix(3, 2, vec![0.3, -0.2, 0.5, 0.1, -0.4, 0.7]),
            )
            .unwrap();
        let b = g
            .param(ParamId(1), Tensor::vector(vec![0.1, -0.1, 0.2]))
            .unwrap();
        let x = g.constant(Tensor::vector(vec![0.8, -1.3])).unwrap();
        let h0 = g.matmul(w, x).unwrap();
        let h1 = g.add(h0, b).unwrap();
        let h2 = g.leaky_relu(h1, 0.01).unwrap();
        let s = g.sigmoid(h2).unwrap();
        let l0 = g.log(s).unwrap();
        let l1 = g.sum(l0).unwrap();
        let loss = g.neg(l1).unwrap();
        let report = check_gradients(&mut g, loss, 1e-5, 1e-4).unwrap();
        assert!(report.passed(), "max rel error {}", report.max_rel_error);
        assert!(report.checked > 0);
    }

    #[test]
    fn tie_points_are_skipped() {
        let mut g = Graph::new();
        let a = g.param(ParamId(0), Tensor::scalar(0.5)).unwrap();
        let b = g.param(ParamId(1), Tensor::scalar(0.5)).unwrap();
        let m = g.max(a, b).unwrap();
        let report = check_gradients(&mut g, m, 1e-5, 1e-4).unwrap();
        // Both entries sit exactly at the tie; both perturbations flip it.
        assert_eq!(report.skipped, 2);
        assert_eq!(report.checked, 0);
    }

    #[test]
    fn constant_graph_reports_zero_error() {
        let mut g = Graph::new();
        let a = g.scalar(0.3).unwrap();
        let b = g.scalar(0.9).unwrap();
        let m = g.mul(a, b).unwrap();
        let report = check_gradients(&mut g, m, 1e-5, 1e-4).unwrap();
        assert_eq!(report.max_rel_error, 0.0);
        assert_eq!(report.checked, 0);
        assert!(report.worst.is_none());
    }
}
