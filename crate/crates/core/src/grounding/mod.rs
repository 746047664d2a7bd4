//! Variable grounding: binding quantified variables to domain elements
//! and evaluating a compiled constraint to a truth degree.

mod emit;

pub use emit::{emit_loss, emit_truth, evaluate_constraint, EmitContext, EmittedConstraint};

use crate::autodiff::AutodiffError;
use crate::fol::{ElemShape, Quantifier};
use crate::models::ModelError;
use crate::semantics::{CompiledConstraint, SemanticsError};
use crate::tensor::Tensor;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use thiserror::Error;

/// Default cap on grounding rows per constraint evaluation.
pub const DEFAULT_ROW_CAP: u64 = 1_000_000;

#[derive(Debug, Error)]
pub enum GroundError {
    #[error("domain '{0}' has no elements")]
    EmptyDomain(String),
    #[error("variable '{var}' needs domain '{domain}', which is not loaded")]
    MissingDomain { var: String, domain: String },
    #[error("grounding would produce {rows} rows, over the cap of {cap}")]
    BudgetExceeded { rows: u128, cap: u64 },
    #[error("no model bound to symbol '{0}'")]
    UnboundSymbol(String),
    #[error("given predicate '{0}' applied to a computed term; tables index plain variables")]
    GivenOverComputedTerm(String),
    #[error("symbol '{symbol}' is bound to a model that cannot serve as a {role}")]
    WrongBindingRole { symbol: String, role: &'static str },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Autodiff(#[from] AutodiffError),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
}

/// A named, ordered sample of element tensors (stored flat).
#[derive(Debug, Clone)]
pub struct Domain {
    pub name: String,
    pub shape: ElemShape,
    elements: Vec<Tensor>,
}

impl Domain {
    pub fn new(name: &str, shape: ElemShape, elements: Vec<Tensor>) -> Result<Self, ModelError> {
        let volume = shape.volume();
        for e in &elements {
            if e.shape() != [volume] {
                return Err(ModelError::ShapeMismatch {
                    expected: vec![volume],
                    got: e.shape().to_vec(),
                });
            }
        }
        Ok(Self {
            name: name.to_string(),
            shape,
            elements,
        })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element(&self, i: usize) -> &Tensor {
        &self.elements[i]
    }

    pub fn elements(&self) -> &[Tensor] {
        &self.elements
    }
}

#[derive(Debug, Clone, Default)]
pub struct DomainSet {
    map: BTreeMap<String, Domain>,
}

impl DomainSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, domain: Domain) {
        self.map.insert(domain.name.clone(), domain);
    }

    pub fn get(&self, name: &str) -> Option<&Domain> {
        self.map.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Domain)> {
        self.map.iter()
    }

    /// Stable small index per domain name, used in cache keys.
    pub fn slot(&self, name: &str) -> Option<u32> {
        self.map.keys().position(|k| k == name).map(|p| p as u32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroundingMode {
    /// Full cartesian product, lexicographic in element indices.
    Exhaustive,
    /// Universal variables are sampled `size` times with replacement,
    /// seeded; existential variables still range over their whole domain.
    Minibatch { size: usize, seed: u64 },
}

/// The assignment of quantified variables to element indices for one
/// constraint evaluation.
///
/// Rows are stored factored: one index list per quantifier level, with the
/// row set being their cartesian product in lexicographic (odometer)
/// order, last level fastest. `row(r)` materializes one assignment row.
#[derive(Debug, Clone)]
pub struct GroundingTable {
    /// Variable names in plan order.
    pub vars: Vec<String>,
    /// Domain name per variable.
    pub domains: Vec<String>,
    pub quantifiers: Vec<Quantifier>,
    /// Element indices each level iterates over, in evaluation order.
    pub level_indices: Vec<Vec<usize>>,
    pub mode: GroundingMode,
}

impl GroundingTable {
    pub fn row_count(&self) -> usize {
        self.level_indices.iter().map(|l| l.len()).product()
    }

    /// The `r`-th assignment row (element index per variable).
    pub fn row(&self, r: usize) -> Vec<usize> {
        let mut digits = vec![0usize; self.level_indices.len()];
        let mut rem = r;
        for l in (0..self.level_indices.len()).rev() {
            let n = self.level_indices[l].len();
            digits[l] = self.level_indices[l][rem % n];
            rem /= n;
        }
        digits
    }

    pub fn rows(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.row_count()).map(|r| self.row(r))
    }
}

/// Builds the grounding table for a compiled constraint.
///
/// Exhaustive mode enumerates the full cartesian product. Minibatch mode
/// samples each universal level uniformly with replacement from the
/// stated seed; an existential nested under a universal keeps its full
/// domain within every outer row, because its fold needs all of it.
pub fn ground(
    constraint: &CompiledConstraint,
    domains: &DomainSet,
    mode: GroundingMode,
    row_cap: u64,
) -> Result<GroundingTable, GroundError> {
    let mut vars = Vec::new();
    let mut names = Vec::new();
    let mut quantifiers = Vec::new();
    let mut level_indices = Vec::new();
    let mut rng = match mode {
        GroundingMode::Minibatch { seed, .. } => Some(ChaCha8Rng::seed_from_u64(seed)),
        GroundingMode::Exhaustive => None,
    };
    let mut rows: u128 = 1;
    for step in &constraint.plan {
        let domain = domains
            .get(&step.domain)
            .ok_or_else(|| GroundError::MissingDomain {
                var: step.var.clone(),
                domain: step.domain.clone(),
            })?;
        if domain.is_empty() {
            return Err(GroundError::EmptyDomain(domain.name.clone()));
        }
        let indices = match (&mode, step.quantifier) {
            (GroundingMode::Minibatch { size, .. }, Quantifier::Forall) => {
                let rng = rng.as_mut().expect("minibatch rng");
                let n = domain.len();
                let take = (*size).max(1);
                (0..take).map(|_| rng.random_range(0..n)).collect()
            }
            _ => (0..domain.len()).collect::<Vec<usize>>(),
        };
        rows = rows.saturating_mul(indices.len() as u128);
        vars.push(step.var.clone());
        names.push(step.domain.clone());
        quantifiers.push(step.quantifier);
        level_indices.push(indices);
    }
    if rows > row_cap as u128 {
        return Err(GroundError::BudgetExceeded { rows, cap: row_cap });
    }
    Ok(GroundingTable {
        vars,
        domains: names,
        quantifiers,
        level_indices,
        mode,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fol::{parse_source, validate, PredicateKind, Signature};
    use crate::semantics::{compile, TNorm};

    fn domain(name: &str, n: usize) -> Domain {
        let elems = (0..n)
            .map(|i| Tensor::vector(vec![i as f64, 0.0]))
            .collect();
        Domain::new(name, ElemShape::Vector { len: 2 }, elems).unwrap()
    }

    fn sig() -> Signature {
        Signature::new()
            .domain("d", ElemShape::Vector { len: 2 })
            .domain("e", ElemShape::Vector { len: 2 })
            .predicate("p", &["d"], PredicateKind::Learnable)
            .predicate("q", &["d", "d"], PredicateKind::Learnable)
            .predicate("w", &["e"], PredicateKind::Learnable)
            .predicate("pq", &["d", "e"], PredicateKind::Learnable)
    }

    fn compiled(src: &str) -> CompiledConstraint {
        let f = validate(&parse_source(src).unwrap(), &sig()).unwrap();
        compile(&f, TNorm::Product, None).unwrap()
    }

    #[test]
    fn forall_counts_rows() {
        let c = compiled("forall x: p(x)");
        let mut ds = DomainSet::new();
        ds.insert(domain("d", 5));
        let t = ground(&c, &ds, GroundingMode::Exhaustive, DEFAULT_ROW_CAP).unwrap();
        assert_eq!(t.row_count(), 5);
    }

    #[test]
    fn double_forall_is_lexicographic() {
        let c = compiled("forall x: forall y: q(x, y)");
        let mut ds = DomainSet::new();
        ds.insert(domain("d", 4));
        let t = ground(&c, &ds, GroundingMode::Exhaustive, DEFAULT_ROW_CAP).unwrap();
        assert_eq!(t.row_count(), 16);
        let rows: Vec<Vec<usize>> = t.rows().collect();
        assert_eq!(rows[0], vec![0, 0]);
        assert_eq!(rows[1], vec![0, 1]);
        assert_eq!(rows[4], vec![1, 0]);
        assert_eq!(rows[15], vec![3, 3]);
    }

    #[test]
    fn minibatch_outer_keeps_full_inner_domain() {
        let c = compiled("forall x: exists y in e: pq(x, y)");
        let mut ds = DomainSet::new();
        ds.insert(domain("d", 3));
        ds.insert(domain("e", 4));
        let t = ground(
            &c,
            &ds,
            GroundingMode::Minibatch { size: 2, seed: 7 },
            DEFAULT_ROW_CAP,
        )
        .unwrap();
        assert_eq!(t.level_indices[0].len(), 2);
        assert_eq!(t.level_indices[1], vec![0, 1, 2, 3]);
        assert_eq!(t.row_count(), 8);
    }

    #[test]
    fn minibatch_is_seed_deterministic() {
        let c = compiled("forall x: p(x)");
        let mut ds = DomainSet::new();
        ds.insert(domain("d", 50));
        let a = ground(&c, &ds, GroundingMode::Minibatch { size: 8, seed: 9 }, 1000).unwrap();
        let b = ground(&c, &ds, GroundingMode::Minibatch { size: 8, seed: 9 }, 1000).unwrap();
        assert_eq!(a.level_indices, b.level_indices);
    }

    #[test]
    fn empty_domain_rejected() {
        let c = compiled("forall x: p(x)");
        let mut ds = DomainSet::new();
        ds.insert(Domain::new("d", ElemShape::Vector { len: 2 }, vec![]).unwrap());
        assert!(matches!(
            ground(&c, &ds, GroundingMode::Exhaustive, DEFAULT_ROW_CAP),
            Err(GroundError::EmptyDomain(_))
        ));
    }

    #[test]
    fn row_cap_enforced() {
        let c = compiled("forall x: forall y: q(x, y)");
        let mut ds = DomainSet::new();
        ds.insert(domain("d", 100));
        assert!(matches!(
            ground(&c, &ds, GroundingMode::Exhaustive, 100),
            Err(GroundError::BudgetExceeded { .. })
        ));
    }
}
