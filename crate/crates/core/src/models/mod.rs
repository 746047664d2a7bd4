//! The model zoo bound to logic symbols: learnable MLPs and RBF
//! classifiers, data-backed given predicates, and the fuzzy equality
//! operators.
//!
//! Element tensors are kept flat (a h×w×c image domain stores vectors of
//! length h·w·c); the logical shape only matters for data files and image
//! output. Predicate-bound models end in a sigmoid or softmax so their
//! truth values stay in `[0,1]`; function-bound models apply a sigmoid
//! head exactly when their codomain is an image domain.

pub mod equality;
pub mod given;
pub mod mlp;
pub mod rbf;

pub use equality::{
    emit_equality, emit_pixel_similarity, emit_squared_exponential, pixel_similarity,
    squared_exponential,
};
pub use given::GivenTable;
pub use mlp::{Head, Mlp};
pub use rbf::RbfClassifier;

use crate::autodiff::{AutodiffError, ParamId};
use crate::tensor::Tensor;
use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("shape mismatch: expected {expected:?}, got {got:?}")]
    ShapeMismatch {
        expected: Vec<usize>,
        got: Vec<usize>,
    },
    #[error("element {index:?} is outside the given table")]
    UnknownElement { index: Vec<usize> },
    #[error("given tables hold crisp truth values; got {value}")]
    NotCrisp { value: f64 },
    #[error("truth table entry {value} is outside [0,1]")]
    OutOfRange { value: f64 },
    #[error(transparent)]
    Autodiff(#[from] AutodiffError),
}

/// Named parameter tensors. Models hold [`ParamId`]s into this store;
/// sharing an id between two models shares the parameter.
#[derive(Debug, Clone, Default)]
pub struct ParamStore {
    tensors: Vec<Tensor>,
    names: Vec<String>,
    by_name: HashMap<String, ParamId>,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: &str, tensor: Tensor) -> ParamId {
        assert!(
            !self.by_name.contains_key(name),
            "duplicate parameter name '{name}'"
        );
        let id = ParamId(self.tensors.len());
        self.tensors.push(tensor);
        self.names.push(name.to_string());
        self.by_name.insert(name.to_string(), id);
        id
    }

    pub fn get(&self, id: ParamId) -> &Tensor {
        &self.tensors[id.0]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Tensor {
        &mut self.tensors[id.0]
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.names[id.0]
    }

    pub fn id(&self, name: &str) -> Option<ParamId> {
        self.by_name.get(name).copied()
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (ParamId, &str, &Tensor)> {
        self.tensors
            .iter()
            .enumerate()
            .map(|(i, t)| (ParamId(i), self.names[i].as_str(), t))
    }

    /// Parameters as a name-sorted map, the canonical checkpoint order.
    pub fn sorted(&self) -> BTreeMap<String, Tensor> {
        self.names
            .iter()
            .cloned()
            .zip(self.tensors.iter().cloned())
            .collect()
    }
}

/// What a logic symbol is bound to.
#[derive(Debug, Clone)]
pub enum ModelBinding {
    /// Learnable feedforward network (predicate or function symbol).
    Mlp(Mlp),
    /// One softmax output of a shared RBF classifier.
    Rbf {
        model: Arc<RbfClassifier>,
        output: usize,
    },
    /// Crisp data-backed predicate; constant during training.
    Given(GivenTable),
    /// Like `Given` but with arbitrary fixed truth values in `[0,1]`.
    Fixed(GivenTable),
}

impl ModelBinding {
    /// Parameter ids this binding trains, in deterministic order.
    pub fn params(&self) -> Vec<ParamId> {
        match self {
            ModelBinding::Mlp(m) => m.params(),
            ModelBinding::Rbf { model, .. } => model.params(),
            ModelBinding::Given(_) | ModelBinding::Fixed(_) => Vec::new(),
        }
    }

    pub fn is_table(&self) -> bool {
        matches!(self, ModelBinding::Given(_) | ModelBinding::Fixed(_))
    }
}

/// Symbol-to-model map plus the parameter store backing the models.
#[derive(Debug, Default)]
pub struct Bindings {
    pub store: ParamStore,
    map: BTreeMap<String, ModelBinding>,
}

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bind(&mut self, symbol: &str, binding: ModelBinding) {
        self.map.insert(symbol.to_string(), binding);
    }

    pub fn get(&self, symbol: &str) -> Option<&ModelBinding> {
        self.map.get(symbol)
    }

    pub fn symbols(&self) -> impl Iterator<Item = &str> {
        self.map.keys().map(|s| s.as_str())
    }

    pub fn params_of(&self, symbol: &str) -> Vec<ParamId> {
        self.map.get(symbol).map(|b| b.params()).unwrap_or_default()
    }
}

/// Uniform init in `±sqrt(6 / (fan_in + fan_out))`.
pub(crate) fn glorot_uniform(rng: &mut impl rand::RngExt, rows: usize, cols: usize) -> Tensor {
    let bound = (6.0 / (rows + cols) as f64).sqrt();
    let data = (0..rows * cols)
        .map(|_| rng.random_range(-bound..bound))
        .collect();
    Tensor::matrix(rows, cols, data)
}
