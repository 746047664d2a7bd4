//! Training trajectory records. The serialized report is deterministic
//! for a fixed master seed; wall time is kept on the struct but out of
//! the serialized payload so two identical runs produce identical bytes.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstraintRecord {
    pub epoch: usize,
    pub constraint: String,
    /// Raw truth degree Φ of the epoch's grounding (may underflow toward
    /// zero for long products).
    pub phi: f64,
    /// Mean per-row truth; the quantity early stopping watches.
    pub mean_truth: f64,
    /// Unweighted loss L(Φ).
    pub loss: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObjectiveRecord {
    pub epoch: usize,
    pub objective: String,
    pub cost: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TrainReport {
    pub epochs_run: usize,
    pub per_constraint: Vec<ConstraintRecord>,
    pub per_objective: Vec<ObjectiveRecord>,
    pub final_metrics: BTreeMap<String, f64>,
    #[serde(skip)]
    pub wall_time_secs: f64,
}

impl TrainReport {
    /// Constraint records of the last recorded epoch.
    pub fn last_epoch(&self) -> Vec<&ConstraintRecord> {
        let Some(last) = self.per_constraint.iter().map(|r| r.epoch).max() else {
            return Vec::new();
        };
        self.per_constraint
            .iter()
            .filter(|r| r.epoch == last)
            .collect()
    }

    /// Mean-truth trajectory of one constraint across epochs.
    pub fn truth_trajectory(&self, constraint: &str) -> Vec<(usize, f64)> {
        self.per_constraint
            .iter()
            .filter(|r| r.constraint == constraint)
            .map(|r| (r.epoch, r.mean_truth))
            .collect()
    }

    /// Cost trajectory of one objective across epochs.
    pub fn cost_trajectory(&self, objective: &str) -> Vec<f64> {
        self.per_objective
            .iter()
            .filter(|r| r.objective == objective)
            .map(|r| r.cost)
            .collect()
    }

    /// Seed-deterministic serialization (wall time excluded).
    pub fn deterministic_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes") + "\n"
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.deterministic_json())
    }
}
