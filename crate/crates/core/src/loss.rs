//! Truth-to-loss mappings, the weighted total cost, and the partition of
//! constraints into per-player objectives for adversarial schemes.

use crate::autodiff::{Graph, NodeId, Result as AdResult, LOG_EPS};
use crate::semantics::CompiledConstraint;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

/// Monotone decreasing map from constraint truth to penalty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossMapping {
    /// `1 − Φ`
    Linear,
    /// `−log Φ`, with the protected log flooring Φ at 1e-12.
    NegLog,
}

impl LossMapping {
    pub fn from_name(name: &str) -> Option<LossMapping> {
        match name.to_ascii_lowercase().as_str() {
            "linear" => Some(LossMapping::Linear),
            "neglog" | "neg-log" | "log" => Some(LossMapping::NegLog),
            _ => None,
        }
    }
}

pub fn map_loss(truth: f64, mapping: LossMapping) -> f64 {
    let t = truth.clamp(0.0, 1.0);
    match mapping {
        LossMapping::Linear => 1.0 - t,
        LossMapping::NegLog => -(t.max(LOG_EPS)).ln(),
    }
}

pub fn emit_map_loss(graph: &mut Graph, phi: NodeId, mapping: LossMapping) -> AdResult<NodeId> {
    match mapping {
        LossMapping::Linear => {
            let one = graph.scalar(1.0)?;
            graph.sub(one, phi)
        }
        LossMapping::NegLog => {
            let l = graph.log(phi)?;
            graph.neg(l)
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum LossError {
    #[error("constraint weight {weight} is negative")]
    NegativeWeight { weight: f64 },
    #[error("constraint group '{group}' is not claimed by any objective")]
    UnknownGroup { group: String },
    #[error("objective '{name}' matches no constraints")]
    EmptyObjective { name: String },
}

/// Weighted sum `Σ_h λ_h · loss_h` over scalar losses.
pub fn total_cost(losses: &[(f64, f64)]) -> Result<f64, LossError> {
    let mut acc = 0.0;
    for &(weight, loss) in losses {
        if weight < 0.0 {
            return Err(LossError::NegativeWeight { weight });
        }
        acc += weight * loss;
    }
    Ok(acc)
}

/// Graph form of [`total_cost`]; gradient flows into every constituent
/// constraint graph.
pub fn emit_total_cost(
    graph: &mut Graph,
    losses: &[(f64, NodeId)],
) -> Result<NodeId, CostEmitError> {
    let mut acc: Option<NodeId> = None;
    for &(weight, loss) in losses {
        if weight < 0.0 {
            return Err(CostEmitError::Loss(LossError::NegativeWeight { weight }));
        }
        let w = graph.scalar(weight)?;
        let term = graph.mul(w, loss)?;
        acc = Some(match acc {
            None => term,
            Some(a) => graph.add(a, term)?,
        });
    }
    match acc {
        Some(node) => Ok(node),
        None => Ok(graph.scalar(0.0)?),
    }
}

#[derive(Debug, Error)]
pub enum CostEmitError {
    #[error(transparent)]
    Loss(#[from] LossError),
    #[error(transparent)]
    Autodiff(#[from] crate::autodiff::AutodiffError),
}

/// The name an untagged constraint is grouped under.
pub const DEFAULT_GROUP: &str = "main";

/// Declares one training player: which constraint groups it minimizes,
/// which symbols its optimizer step may move, and optionally its own
/// learning rate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    pub name: String,
    pub groups: Vec<String>,
    pub trainable: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub learning_rate: Option<f64>,
}

/// Resolved objective: constraint indices plus the trainable symbol set.
/// During this objective's step every other symbol's parameters receive
/// no update; gradients still flow through them for the chain rule.
#[derive(Debug, Clone)]
pub struct Objective {
    pub name: String,
    pub constraints: Vec<usize>,
    pub trainable: BTreeSet<String>,
    pub learning_rate: Option<f64>,
}

pub fn partition(
    constraints: &[CompiledConstraint],
    specs: &[ObjectiveSpec],
) -> Result<Vec<Objective>, LossError> {
    let mut objectives: Vec<Objective> = specs
        .iter()
        .map(|s| Objective {
            name: s.name.clone(),
            constraints: Vec::new(),
            trainable: s.trainable.iter().cloned().collect(),
            learning_rate: s.learning_rate,
        })
        .collect();
    for (idx, c) in constraints.iter().enumerate() {
        let group = c.group.as_deref().unwrap_or(DEFAULT_GROUP);
        let mut claimed = false;
        for (spec, obj) in specs.iter().zip(&mut objectives) {
            if spec.groups.iter().any(|g| g == group) {
                obj.constraints.push(idx);
                claimed = true;
            }
        }
        if !claimed {
            return Err(LossError::UnknownGroup {
                group: group.to_string(),
            });
        }
    }
    for obj in &objectives {
        if obj.constraints.is_empty() {
            return Err(LossError::EmptyObjective {
                name: obj.name.clone(),
            });
        }
    }
    Ok(objectives)
}
