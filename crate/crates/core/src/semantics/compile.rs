//! Compilation of a typed formula into a differentiable constraint
//! template: a quantifier plan plus a connective tree whose leaves are
//! slots, one per grounded atom.

use super::{eval_connective, SemanticsError, TNorm};
use crate::fol::{Connective, Formula, Quantifier, Term, TypedFormula};
use serde::{Deserialize, Serialize};

/// How an `=` atom is scored as a fuzzy truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EqualityKind {
    /// `1 − tanh(mean |a_p − b_p|)` over all components; the image
    /// comparison operator.
    PixelSimilarity,
    /// `exp(−‖a−b‖²)`; suited to latent vectors.
    SquaredExponential,
}

/// One level of the quantifier prefix, outermost first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantifierStep {
    pub var: String,
    pub domain: String,
    pub quantifier: Quantifier,
    /// T-norm family whose fold aggregates this level.
    pub tnorm: TNorm,
}

/// Quantifier-free part of the template. Isomorphic to the formula below
/// its quantifier prefix, with every atom replaced by a slot index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Template {
    Slot(usize),
    Conn {
        op: Connective,
        children: Vec<Template>,
    },
}

/// What fills one slot at grounding time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AtomSpec {
    Predicate { symbol: String, args: Vec<Term> },
    Equality { left: Term, right: Term },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompiledConstraint {
    pub name: String,
    pub plan: Vec<QuantifierStep>,
    pub matrix: Template,
    pub slots: Vec<AtomSpec>,
    pub tnorm: TNorm,
    pub equality: Option<EqualityKind>,
    /// λ weight in the total cost; non-negative.
    pub weight: f64,
    /// Training partition this constraint belongs to.
    pub group: Option<String>,
}

#[derive(Debug, Clone, Copy)]
pub struct CompileOptions {
    pub tnorm: TNorm,
    /// Aggregation family for existential levels; defaults to `tnorm`.
    /// Mixing (e.g. Product connectives with a Gödel `exists`) is allowed.
    pub exists_tnorm: Option<TNorm>,
    pub equality: Option<EqualityKind>,
}

impl CompileOptions {
    pub fn new(tnorm: TNorm) -> Self {
        Self {
            tnorm,
            exists_tnorm: None,
            equality: None,
        }
    }

    pub fn equality(mut self, kind: EqualityKind) -> Self {
        self.equality = Some(kind);
        self
    }

    pub fn exists_tnorm(mut self, tnorm: TNorm) -> Self {
        self.exists_tnorm = Some(tnorm);
        self
    }
}

/// Compiles a validated formula under one t-norm. Convenience wrapper
/// over [`compile_with_options`].
pub fn compile(
    ast: &TypedFormula,
    tnorm: TNorm,
    equality: Option<EqualityKind>,
) -> Result<CompiledConstraint, SemanticsError> {
    let mut opts = CompileOptions::new(tnorm);
    opts.equality = equality;
    compile_with_options(ast, &opts)
}

pub fn compile_with_options(
    ast: &TypedFormula,
    opts: &CompileOptions,
) -> Result<CompiledConstraint, SemanticsError> {
    let mut plan = Vec::new();
    let mut formula = ast.ast();
    while let Formula::Quantified {
        quantifier,
        var,
        domain,
        body,
    } = formula
    {
        let agg = match quantifier {
            Quantifier::Forall => opts.tnorm,
            Quantifier::Exists => opts.exists_tnorm.unwrap_or(opts.tnorm),
        };
        plan.push(QuantifierStep {
            var: var.clone(),
            domain: domain
                .clone()
                .expect("validated quantifier carries its domain"),
            quantifier: *quantifier,
            tnorm: agg,
        });
        formula = body;
    }

    let mut slots = Vec::new();
    let matrix = build_template(formula, &mut slots)?;
    if opts.equality.is_none() && slots.iter().any(|s| matches!(s, AtomSpec::Equality { .. })) {
        return Err(SemanticsError::MissingEqualityBinding);
    }
    Ok(CompiledConstraint {
        name: String::new(),
        plan,
        matrix,
        slots,
        tnorm: opts.tnorm,
        equality: opts.equality,
        weight: 1.0,
        group: None,
    })
}

fn build_template(f: &Formula, slots: &mut Vec<AtomSpec>) -> Result<Template, SemanticsError> {
    match f {
        Formula::Quantified { var, .. } => {
            Err(SemanticsError::NonPrefixQuantifier { var: var.clone() })
        }
        Formula::Connective { op, children } => {
            let children = children
                .iter()
                .map(|c| build_template(c, slots))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Template::Conn { op: *op, children })
        }
        Formula::Predicate { symbol, args } => {
            slots.push(AtomSpec::Predicate {
                symbol: symbol.clone(),
                args: args.clone(),
            });
            Ok(Template::Slot(slots.len() - 1))
        }
        Formula::Equality { left, right } => {
            slots.push(AtomSpec::Equality {
                left: left.clone(),
                right: right.clone(),
            });
            Ok(Template::Slot(slots.len() - 1))
        }
    }
}

impl CompiledConstraint {
    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn weighted(mut self, weight: f64) -> Self {
        self.weight = weight;
        self
    }

    pub fn grouped(mut self, group: impl Into<String>) -> Self {
        self.group = Some(group.into());
        self
    }

    /// Scalar evaluation of the matrix on one grounding's slot truths.
    pub fn eval_matrix(&self, slot_values: &[f64]) -> Result<f64, SemanticsError> {
        eval_template(&self.matrix, slot_values, self.tnorm)
    }

    /// Checks the template tree is isomorphic to the quantifier-free part
    /// of a formula: same connective spine, atoms in the same positions.
    pub fn matches_shape(&self, formula: &Formula) -> bool {
        let mut body = formula;
        for _ in &self.plan {
            match body {
                Formula::Quantified { body: inner, .. } => body = inner,
                _ => return false,
            }
        }
        shape_eq(&self.matrix, body, &self.slots)
    }
}

fn shape_eq(t: &Template, f: &Formula, slots: &[AtomSpec]) -> bool {
    match (t, f) {
        (
            Template::Conn { op, children },
            Formula::Connective {
                op: fop,
                children: fch,
            },
        ) => {
            op == fop
                && children.len() == fch.len()
                && children.iter().zip(fch).all(|(a, b)| shape_eq(a, b, slots))
        }
        (Template::Slot(i), Formula::Predicate { symbol, args }) => matches!(
            &slots[*i],
            AtomSpec::Predicate { symbol: s, args: a } if s == symbol && a == args
        ),
        (Template::Slot(i), Formula::Equality { left, right }) => matches!(
            &slots[*i],
            AtomSpec::Equality { left: l, right: r } if l == left && r == right
        ),
        _ => false,
    }
}

fn eval_template(t: &Template, slot_values: &[f64], tnorm: TNorm) -> Result<f64, SemanticsError> {
    match t {
        Template::Slot(i) => Ok(slot_values[*i].clamp(0.0, 1.0)),
        Template::Conn { op, children } => {
            let vals = children
                .iter()
                .map(|c| eval_template(c, slot_values, tnorm))
                .collect::<Result<Vec<_>, _>>()?;
            eval_connective(*op, &vals, tnorm)
        }
    }
}
