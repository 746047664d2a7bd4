//! Training configuration: a TOML file naming domains, data files,
//! signature, bindings, objectives and optimizer settings.

use crate::fol::{ElemShape, FunctionDecl, PredicateDecl};
use crate::loss::{LossMapping, ObjectiveSpec};
use crate::semantics::{EqualityKind, TNorm};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const DEFAULT_LEARNING_RATE: f64 = 0.0001;
pub const DEFAULT_BATCH_SIZE: usize = 64;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    /// Every sampler and initializer seed derives from this one.
    pub master_seed: u64,
    pub tnorm: TNorm,
    /// Defaults to neg-log under Product and linear otherwise.
    #[serde(default)]
    pub mapping: Option<LossMapping>,
    /// Aggregation for existentials; defaults to the global t-norm.
    #[serde(default)]
    pub exists_tnorm: Option<TNorm>,
    #[serde(default)]
    pub equality: Option<EqualityKind>,
    pub epochs: usize,
    #[serde(default = "default_lr")]
    pub learning_rate: f64,
    /// Minibatch rows sampled per universal variable each epoch.
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    /// Ground every universal exhaustively instead of minibatching.
    #[serde(default)]
    pub exhaustive: bool,
    /// Stop once every constraint's mean row truth exceeds this.
    #[serde(default)]
    pub early_stop_truth: Option<f64>,
    /// Write a checkpoint every this many epochs (0 = only final).
    #[serde(default)]
    pub checkpoint_every: usize,
    #[serde(default = "default_row_cap")]
    pub row_cap: u64,
    /// Constraint file path, relative to the config file.
    pub constraints: String,
    #[serde(default)]
    pub output_dir: Option<String>,
    pub domains: BTreeMap<String, DomainConfig>,
    #[serde(default)]
    pub predicates: BTreeMap<String, PredicateDecl>,
    #[serde(default)]
    pub functions: BTreeMap<String, FunctionDecl>,
    #[serde(default)]
    pub bindings: BTreeMap<String, BindingConfig>,
    /// CSV of `element,predicate,value` rows backing given predicates.
    #[serde(default)]
    pub givens_file: Option<String>,
    pub objectives: Vec<ObjectiveSpec>,
}

fn default_lr() -> f64 {
    DEFAULT_LEARNING_RATE
}

fn default_batch() -> usize {
    DEFAULT_BATCH_SIZE
}

fn default_row_cap() -> u64 {
    crate::grounding::DEFAULT_ROW_CAP
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub shape: ElemShape,
    /// Data file, relative to the config file. Evaluating on held-out
    /// data means pointing a second config at other files and restoring a
    /// checkpoint into it.
    pub file: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase", deny_unknown_fields)]
pub enum BindingConfig {
    Mlp {
        #[serde(default)]
        hidden: Option<usize>,
        /// Name of another mlp-bound symbol whose first layer this one
        /// reuses (the shared-latent device for paired generators).
        #[serde(default)]
        share_first_layer_with: Option<String>,
    },
    Rbf {
        /// Symbols with the same group share one classifier; each binds
        /// to one softmax output.
        group: String,
        class_index: usize,
        #[serde(default)]
        centers_per_class: Option<usize>,
    },
    Given {},
    Fixed {},
}

impl TrainConfig {
    pub fn resolved_mapping(&self) -> LossMapping {
        self.mapping.unwrap_or(match self.tnorm {
            TNorm::Product => LossMapping::NegLog,
            _ => LossMapping::Linear,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}

/// Splitmix-style seed derivation so every consumer of randomness gets an
/// independent, reproducible stream keyed off the master seed.
pub fn derive_seed(master: u64, tag: u64, a: u64, b: u64) -> u64 {
    let mut z = master
        ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ a.wrapping_mul(0xBF58_476D_1CE4_E5B9)
        ^ b.wrapping_mul(0x94D0_49BB_1331_11EB);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub mod seed_tags {
    pub const INIT: u64 = 1;
    pub const MINIBATCH: u64 = 2;
    pub const DATA: u64 = 3;
    pub const GRADCHECK: u64 = 4;
}
