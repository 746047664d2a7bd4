//! The declarative first-order constraint language.
//!
//! Surface syntax, by example:
//!
//! ```text
//! forall x: forall y: Married(x,y) implies (Republican(x) iff Republican(y))
//! forall x: zero(x) implies one(next(x)) and two(previous(x))
//! forall x: exists y: (isZero(x) and isOne(y)) implies next(x) = y
//! ```
//!
//! Keywords `forall exists not and or implies iff` are reserved; `=>`,
//! `<=>`, `&`, `|`, `~`, `=` are operator aliases. Precedence from
//! tightest to loosest is `not > and > or > implies > iff`, implication is
//! right-associative, and a quantifier's scope extends maximally to the
//! right. Quantified variables take their domain from the signature of the
//! first atom using them; `forall x in D:` overrides the inference.
//!
//! Formulas must be closed: every variable is bound by exactly one
//! enclosing quantifier and quantifiers never shadow an outer variable.

mod file;
mod infer;
mod lexer;
mod parser;
mod pretty;
mod validate;

pub mod gen;

pub use file::{parse_constraint_file, ConstraintLine};
pub use infer::infer_signature;
pub use lexer::{tokenize, Token, TokenKind};
pub use parser::{parse_formula, parse_source};
pub use pretty::{pretty, pretty_full_parens};
pub use validate::{validate, TypedFormula};

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl std::fmt::Display for Position {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quantifier {
    Forall,
    Exists,
}

impl std::fmt::Display for Quantifier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Quantifier::Forall => write!(f, "forall"),
            Quantifier::Exists => write!(f, "exists"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Connective {
    Not,
    And,
    Or,
    Implies,
    Iff,
}

impl Connective {
    pub fn arity(self) -> usize {
        match self {
            Connective::Not => 1,
            _ => 2,
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            Connective::Not => "not",
            Connective::And => "and",
            Connective::Or => "or",
            Connective::Implies => "implies",
            Connective::Iff => "iff",
        }
    }
}

/// A term: a bound variable or a (possibly nested) function application
/// such as `next(x)` or `g_M(e(g_F(e(x))))`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Term {
    Var(String),
    App { symbol: String, args: Vec<Term> },
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn app(symbol: impl Into<String>, args: Vec<Term>) -> Self {
        Term::App {
            symbol: symbol.into(),
            args,
        }
    }

    pub fn contains_var(&self, var: &str) -> bool {
        match self {
            Term::Var(v) => v == var,
            Term::App { args, .. } => args.iter().any(|a| a.contains_var(var)),
        }
    }

    /// Variables referenced by this term, in first-occurrence order.
    pub fn vars(&self, out: &mut Vec<String>) {
        match self {
            Term::Var(v) => {
                if !out.iter().any(|o| o == v) {
                    out.push(v.clone());
                }
            }
            Term::App { args, .. } => {
                for a in args {
                    a.vars(out);
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Formula {
    Quantified {
        quantifier: Quantifier,
        var: String,
        /// `None` until validation resolves it (or the source used `in D`).
        domain: Option<String>,
        body: Box<Formula>,
    },
    Connective {
        op: Connective,
        children: Vec<Formula>,
    },
    Predicate {
        symbol: String,
        args: Vec<Term>,
    },
    Equality {
        left: Term,
        right: Term,
    },
}

impl Formula {
    pub fn negated(f: Formula) -> Formula {
        Formula::Connective {
            op: Connective::Not,
            children: vec![f],
        }
    }

    pub fn binary(op: Connective, a: Formula, b: Formula) -> Formula {
        Formula::Connective {
            op,
            children: vec![a, b],
        }
    }

    pub fn forall(var: impl Into<String>, body: Formula) -> Formula {
        Formula::Quantified {
            quantifier: Quantifier::Forall,
            var: var.into(),
            domain: None,
            body: Box::new(body),
        }
    }

    pub fn exists(var: impl Into<String>, body: Formula) -> Formula {
        Formula::Quantified {
            quantifier: Quantifier::Exists,
            var: var.into(),
            domain: None,
            body: Box::new(body),
        }
    }

    /// Structural equality ignoring resolved quantifier domains, so a
    /// pretty-printed/reparsed formula compares equal to its validated
    /// original.
    pub fn same_shape(&self, other: &Formula) -> bool {
        match (self, other) {
            (
                Formula::Quantified {
                    quantifier: q1,
                    var: v1,
                    body: b1,
                    ..
                },
                Formula::Quantified {
                    quantifier: q2,
                    var: v2,
                    body: b2,
                    ..
                },
            ) => q1 == q2 && v1 == v2 && b1.same_shape(b2),
            (
                Formula::Connective {
                    op: o1,
                    children: c1,
                },
                Formula::Connective {
                    op: o2,
                    children: c2,
                },
            ) => {
                o1 == o2 && c1.len() == c2.len() && c1.iter().zip(c2).all(|(a, b)| a.same_shape(b))
            }
            (
                Formula::Predicate {
                    symbol: s1,
                    args: a1,
                },
                Formula::Predicate {
                    symbol: s2,
                    args: a2,
                },
            ) => s1 == s2 && a1 == a2,
            (
                Formula::Equality {
                    left: l1,
                    right: r1,
                },
                Formula::Equality {
                    left: l2,
                    right: r2,
                },
            ) => l1 == l2 && r1 == r2,
            _ => false,
        }
    }
}

/// Whether a predicate is backed by a learnable model or by given data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PredicateKind {
    Learnable,
    Given,
}

/// Shape of one element of a data domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ElemShape {
    Vector {
        len: usize,
    },
    Image {
        height: usize,
        width: usize,
        channels: usize,
    },
}

impl ElemShape {
    pub fn dims(&self) -> Vec<usize> {
        match self {
            ElemShape::Vector { len } => vec![*len],
            ElemShape::Image {
                height,
                width,
                channels,
            } => vec![*height, *width, *channels],
        }
    }

    pub fn volume(&self) -> usize {
        self.dims().iter().product()
    }

    pub fn is_image(&self) -> bool {
        matches!(self, ElemShape::Image { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredicateDecl {
    /// Input domain name per argument; the length is the arity.
    pub domains: Vec<String>,
    pub kind: PredicateKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionDecl {
    pub inputs: Vec<String>,
    pub output: String,
}

/// Declares every symbol a set of constraints may reference.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Signature {
    pub predicates: BTreeMap<String, PredicateDecl>,
    pub functions: BTreeMap<String, FunctionDecl>,
    pub domains: BTreeMap<String, ElemShape>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn domain(mut self, name: &str, shape: ElemShape) -> Self {
        self.domains.insert(name.to_string(), shape);
        self
    }

    pub fn predicate(mut self, name: &str, domains: &[&str], kind: PredicateKind) -> Self {
        self.predicates.insert(
            name.to_string(),
            PredicateDecl {
                domains: domains.iter().map(|s| s.to_string()).collect(),
                kind,
            },
        );
        self
    }

    pub fn function(mut self, name: &str, inputs: &[&str], output: &str) -> Self {
        self.functions.insert(
            name.to_string(),
            FunctionDecl {
                inputs: inputs.iter().map(|s| s.to_string()).collect(),
                output: output.to_string(),
            },
        );
        self
    }

    /// Internal consistency: arities at least one, shapes positive, all
    /// referenced domain names declared.
    pub fn check(&self) -> Result<(), FolError> {
        for (name, shape) in &self.domains {
            if shape.volume() == 0 {
                return Err(FolError::EmptyDomainShape {
                    domain: name.clone(),
                });
            }
        }
        for (name, decl) in &self.predicates {
            if decl.domains.is_empty() {
                return Err(FolError::ZeroArity {
                    symbol: name.clone(),
                });
            }
            for d in &decl.domains {
                if !self.domains.contains_key(d) {
                    return Err(FolError::UnknownDomain { domain: d.clone() });
                }
            }
        }
        for (name, decl) in &self.functions {
            if decl.inputs.is_empty() {
                return Err(FolError::ZeroArity {
                    symbol: name.clone(),
                });
            }
            for d in decl.inputs.iter().chain(std::iter::once(&decl.output)) {
                if !self.domains.contains_key(d) {
                    return Err(FolError::UnknownDomain { domain: d.clone() });
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum FolError {
    #[error("illegal character '{ch}' at {position}")]
    IllegalCharacter { ch: char, position: Position },
    #[error("unterminated identifier at {position}")]
    UnterminatedIdentifier { position: Position },
    #[error("expected {expected} but got {got} at {position}")]
    UnexpectedToken {
        expected: String,
        got: String,
        position: Position,
    },
    #[error("quantifier at {position} has no body")]
    DanglingQuantifier { position: Position },
    #[error("unbound variable '{name}'")]
    UnboundVariable { name: String },
    #[error("quantifier shadows outer variable '{name}'")]
    ShadowedVariable { name: String },
    #[error(
        "quantified variable '{name}' is never used in a position that determines \
         its domain, and no domain was declared"
    )]
    UndeterminedDomain { name: String },
    #[error("unknown symbol '{name}'")]
    UnknownSymbol { name: String },
    #[error("unknown domain '{domain}'")]
    UnknownDomain { domain: String },
    #[error("'{symbol}' expects {expected} argument(s) but got {got}")]
    ArityMismatch {
        symbol: String,
        expected: usize,
        got: usize,
    },
    #[error("domain mismatch at '{at}': expected {expected}, found {found}")]
    DomainMismatch {
        at: String,
        expected: String,
        found: String,
    },
    #[error("declared symbol '{symbol}' has arity zero")]
    ZeroArity { symbol: String },
    #[error("domain '{domain}' has an empty element shape")]
    EmptyDomainShape { domain: String },
    #[error("a bare term is not a formula at {position}")]
    TermAsFormula { position: Position },
    #[error("line {line}: bad constraint prefix: {detail}")]
    BadLinePrefix { line: usize, detail: String },
}
