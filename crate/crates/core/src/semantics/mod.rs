//! Fuzzy-logic semantics: connectives and quantifier aggregations for the
//! three fundamental continuous t-norms, and compilation of typed formulas
//! into differentiable constraint templates.
//!
//! Connective algebra, with `x` and `y` in `[0,1]`:
//!
//! | formula | Gödel            | Łukasiewicz      | Product            |
//! |---------|------------------|------------------|--------------------|
//! | ¬x      | 1−x              | 1−x              | 1−x                |
//! | x∧y     | min{x,y}         | max{0,x+y−1}     | x·y                |
//! | x∨y     | max{x,y}         | min{1,x+y}       | x+y−x·y            |
//! | x⇒y     | x≤y ? 1 : y      | min{1,1−x+y}     | x≤y ? 1 : y/x      |
//! | x⇔y     | x=y ? 1 : min    | 1−|x−y|          | x=y ? 1 : min ratio|
//!
//! Disjunction for Łukasiewicz and Product is computed literally as the
//! De Morgan dual `1 − (¬x ∧ ¬y)`, so that identity holds bit-exactly.
//! The Product implication guards its division with `ε = 1e-7`; the
//! guarded form is exact whenever `x ≤ y` or `x ≥ ε`, which covers every
//! representable truth outside a sliver of width ε at zero.

mod compile;

pub use compile::{
    compile, compile_with_options, AtomSpec, CompileOptions, CompiledConstraint, EqualityKind,
    QuantifierStep, Template,
};

use crate::fol::{Connective, Quantifier};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Division guard for the Product implication.
pub const PRODUCT_IMPL_EPS: f64 = 1e-7;

/// Slack allowed on truth inputs before they count as out of domain.
pub const DOMAIN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TNorm {
    Goedel,
    Lukasiewicz,
    Product,
}

impl TNorm {
    pub const ALL: [TNorm; 3] = [TNorm::Goedel, TNorm::Lukasiewicz, TNorm::Product];

    pub fn from_name(name: &str) -> Option<TNorm> {
        match name.to_ascii_lowercase().as_str() {
            "goedel" | "godel" => Some(TNorm::Goedel),
            "lukasiewicz" => Some(TNorm::Lukasiewicz),
            "product" => Some(TNorm::Product),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            TNorm::Goedel => "goedel",
            TNorm::Lukasiewicz => "lukasiewicz",
            TNorm::Product => "product",
        }
    }
}

impl std::fmt::Display for TNorm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.name())
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SemanticsError {
    #[error("truth value {value} lies outside [0,1] beyond tolerance")]
    DomainError { value: f64 },
    #[error("formula contains '=' but no equality binding was supplied")]
    MissingEqualityBinding,
    #[error(
        "quantifier on '{var}' is nested under a connective; only formulas \
         with a quantifier prefix compile"
    )]
    NonPrefixQuantifier { var: String },
}

fn clamp_truth(v: f64) -> Result<f64, SemanticsError> {
    if !(-DOMAIN_TOL..=1.0 + DOMAIN_TOL).contains(&v) {
        return Err(SemanticsError::DomainError { value: v });
    }
    Ok(v.clamp(0.0, 1.0))
}

pub fn negate(x: f64) -> f64 {
    1.0 - x
}

pub fn t_and(tnorm: TNorm, x: f64, y: f64) -> f64 {
    match tnorm {
        TNorm::Goedel => {
            if x <= y {
                x
            } else {
                y
            }
        }
        TNorm::Lukasiewicz => {
            // Branch at the identity: `(x + 1) − 1` loses bits for most
            // x, and T(x,1) = x must hold exactly.
            if x == 1.0 {
                y
            } else if y == 1.0 {
                x
            } else {
                (x + y - 1.0).max(0.0)
            }
        }
        TNorm::Product => x * y,
    }
}

/// Disjunction as the literal De Morgan dual of [`t_and`] for Łukasiewicz
/// and Product; `max` for Gödel.
pub fn t_or(tnorm: TNorm, x: f64, y: f64) -> f64 {
    match tnorm {
        TNorm::Goedel => {
            if x >= y {
                x
            } else {
                y
            }
        }
        _ => 1.0 - t_and(tnorm, 1.0 - x, 1.0 - y),
    }
}

/// Residual implication. The Product case is the guarded
/// `min(1, (y + max(ε−x, 0)) / max(x, ε))`, which equals the exact
/// `x≤y ? 1 : y/x` whenever `x ≤ y` or `x ≥ ε`.
pub fn t_implies(tnorm: TNorm, x: f64, y: f64) -> f64 {
    match tnorm {
        TNorm::Goedel => {
            if x <= y {
                1.0
            } else {
                y
            }
        }
        TNorm::Lukasiewicz => (1.0 - x + y).min(1.0),
        TNorm::Product => {
            let num = y + (PRODUCT_IMPL_EPS - x).max(0.0);
            let den = x.max(PRODUCT_IMPL_EPS);
            (num / den).min(1.0)
        }
    }
}

/// Biconditional. Gödel branches on exact equality; Łukasiewicz is
/// `1−|x−y|`; Product is the product of the two directed implications,
/// which reproduces `x=y ? 1 : min{x/y, y/x}` away from the ε-guard.
pub fn t_iff(tnorm: TNorm, x: f64, y: f64) -> f64 {
    match tnorm {
        TNorm::Goedel => {
            if x == y {
                1.0
            } else if x <= y {
                x
            } else {
                y
            }
        }
        TNorm::Lukasiewicz => 1.0 - (x - y).abs(),
        TNorm::Product => t_implies(TNorm::Product, x, y) * t_implies(TNorm::Product, y, x),
    }
}

/// Evaluates one connective on clamped truth values.
pub fn eval_connective(op: Connective, args: &[f64], tnorm: TNorm) -> Result<f64, SemanticsError> {
    assert_eq!(args.len(), op.arity(), "connective arity");
    let a: Vec<f64> = args
        .iter()
        .map(|&v| clamp_truth(v))
        .collect::<Result<_, _>>()?;
    Ok(match op {
        Connective::Not => negate(a[0]),
        Connective::And => t_and(tnorm, a[0], a[1]),
        Connective::Or => t_or(tnorm, a[0], a[1]),
        Connective::Implies => t_implies(tnorm, a[0], a[1]),
        Connective::Iff => t_iff(tnorm, a[0], a[1]),
    })
}

/// Folds grounded truth values through a quantifier.
///
/// `forall` is the t-norm fold: product, min, or `max{0, Σv − (n−1)}`.
/// `exists` is the dual t-conorm fold: `1−∏(1−v)`, max, or `min{1, Σv}`.
/// An empty universal is vacuously 1; an empty existential is 0. Inputs
/// are clamped to `[0,1]`.
pub fn eval_quantifier(kind: Quantifier, values: &[f64], tnorm: TNorm) -> f64 {
    let vals: Vec<f64> = values.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    match kind {
        Quantifier::Forall => {
            if vals.is_empty() {
                return 1.0;
            }
            match tnorm {
                TNorm::Goedel => vals.iter().copied().fold(f64::INFINITY, f64::min).min(1.0),
                TNorm::Product => {
                    let mut acc = vals[0];
                    for v in &vals[1..] {
                        acc *= v;
                    }
                    acc
                }
                TNorm::Lukasiewicz => {
                    let mut sum = vals[0];
                    for v in &vals[1..] {
                        sum += v;
                    }
                    (sum - (vals.len() as f64 - 1.0)).max(0.0)
                }
            }
        }
        Quantifier::Exists => {
            if vals.is_empty() {
                return 0.0;
            }
            match tnorm {
                TNorm::Goedel => vals.iter().copied().fold(0.0, f64::max),
                TNorm::Product => {
                    let mut acc = 1.0 - vals[0];
                    for v in &vals[1..] {
                        acc *= 1.0 - v;
                    }
                    1.0 - acc
                }
                TNorm::Lukasiewicz => {
                    let mut sum = vals[0];
                    for v in &vals[1..] {
                        sum += v;
                    }
                    sum.min(1.0)
                }
            }
        }
    }
}
