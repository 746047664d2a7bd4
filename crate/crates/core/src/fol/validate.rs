//! Signature checking and domain resolution.
//!
//! Validation confirms that a parsed formula is closed, arity-correct and
//! domain-correct against a [`Signature`], and annotates every quantifier
//! with its variable's domain. Without an explicit `in D` annotation, a
//! variable's domain is inferred from the first atom that uses it in a
//! determining position (depth-first, left to right).

use super::pretty::term_to_string;
use super::{FolError, Formula, Signature, Term};

/// A formula that passed [`validate`]: closed, consistent with its
/// signature, and with every quantifier's domain resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct TypedFormula {
    formula: Formula,
}

impl TypedFormula {
    pub fn ast(&self) -> &Formula {
        &self.formula
    }

    pub fn into_formula(self) -> Formula {
        self.formula
    }
}

pub fn validate(ast: &Formula, sig: &Signature) -> Result<TypedFormula, FolError> {
    sig.check()?;
    let mut scope: Vec<(String, String)> = Vec::new();
    let formula = walk(ast, sig, &mut scope)?;
    Ok(TypedFormula { formula })
}

fn walk(
    f: &Formula,
    sig: &Signature,
    scope: &mut Vec<(String, String)>,
) -> Result<Formula, FolError> {
    match f {
        Formula::Quantified {
            quantifier,
            var,
            domain,
            body,
        } => {
            if scope.iter().any(|(v, _)| v == var) {
                return Err(FolError::ShadowedVariable { name: var.clone() });
            }
            let resolved = match domain {
                Some(d) => {
                    if !sig.domains.contains_key(d) {
                        return Err(FolError::UnknownDomain { domain: d.clone() });
                    }
                    d.clone()
                }
                None => match infer_domain(var, body, sig)? {
                    Some(d) => d,
                    None => {
                        // An unbound variable in the body is the primary
                        // problem; report it ahead of the failed inference.
                        let mut bound: Vec<&str> = scope.iter().map(|(v, _)| v.as_str()).collect();
                        bound.push(var);
                        if let Some(name) = first_unbound(body, &mut bound) {
                            return Err(FolError::UnboundVariable { name });
                        }
                        return Err(FolError::UndeterminedDomain { name: var.clone() });
                    }
                },
            };
            scope.push((var.clone(), resolved.clone()));
            let body = walk(body, sig, scope)?;
            scope.pop();
            Ok(Formula::Quantified {
                quantifier: *quantifier,
                var: var.clone(),
                domain: Some(resolved),
                body: Box::new(body),
            })
        }
        Formula::Connective { op, children } => {
            debug_assert_eq!(children.len(), op.arity());
            let children = children
                .iter()
                .map(|c| walk(c, sig, scope))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Formula::Connective { op: *op, children })
        }
        Formula::Predicate { symbol, args } => {
            let decl = sig
                .predicates
                .get(symbol)
                .ok_or_else(|| FolError::UnknownSymbol {
                    name: symbol.clone(),
                })?;
            if args.len() != decl.domains.len() {
                return Err(FolError::ArityMismatch {
                    symbol: symbol.clone(),
                    expected: decl.domains.len(),
                    got: args.len(),
                });
            }
            for (arg, expected) in args.iter().zip(&decl.domains) {
                check_term(arg, expected, sig, scope)?;
            }
            Ok(f.clone())
        }
        Formula::Equality { left, right } => {
            let ld = term_domain(left, sig, scope)?;
            let rd = term_domain(right, sig, scope)?;
            check_term(left, &ld, sig, scope)?;
            check_term(right, &rd, sig, scope)?;
            if ld != rd {
                return Err(FolError::DomainMismatch {
                    at: format!("{} = {}", term_to_string(left), term_to_string(right)),
                    expected: ld,
                    found: rd,
                });
            }
            Ok(f.clone())
        }
    }
}

/// The domain a term's value lives in, without checking its arguments.
fn term_domain(t: &Term, sig: &Signature, scope: &[(String, String)]) -> Result<String, FolError> {
    match t {
        Term::Var(v) => scope
            .iter()
            .rev()
            .find(|(name, _)| name == v)
            .map(|(_, d)| d.clone())
            .ok_or_else(|| FolError::UnboundVariable { name: v.clone() }),
        Term::App { symbol, .. } => sig
            .functions
            .get(symbol)
            .map(|d| d.output.clone())
            .ok_or_else(|| FolError::UnknownSymbol {
                name: symbol.clone(),
            }),
    }
}

fn check_term(
    t: &Term,
    expected: &str,
    sig: &Signature,
    scope: &[(String, String)],
) -> Result<(), FolError> {
    match t {
        Term::Var(v) => {
            let domain = scope
                .iter()
                .rev()
                .find(|(name, _)| name == v)
                .map(|(_, d)| d.clone())
                .ok_or_else(|| FolError::UnboundVariable { name: v.clone() })?;
            if domain != expected {
                return Err(FolError::DomainMismatch {
                    at: v.clone(),
                    expected: expected.to_string(),
                    found: domain,
                });
            }
            Ok(())
        }
        Term::App { symbol, args } => {
            let decl = sig
                .functions
                .get(symbol)
                .ok_or_else(|| FolError::UnknownSymbol {
                    name: symbol.clone(),
                })?;
            if args.len() != decl.inputs.len() {
                return Err(FolError::ArityMismatch {
                    symbol: symbol.clone(),
                    expected: decl.inputs.len(),
                    got: args.len(),
                });
            }
            if decl.output != expected {
                return Err(FolError::DomainMismatch {
                    at: term_to_string(t),
                    expected: expected.to_string(),
                    found: decl.output.clone(),
                });
            }
            for (arg, input) in args.iter().zip(&decl.inputs) {
                check_term(arg, input, sig, scope)?;
            }
            Ok(())
        }
    }
}

/// First determining use of `var`, depth-first. Unknown symbols on the
/// way surface as errors so the primary diagnostic stays accurate.
fn infer_domain(var: &str, f: &Formula, sig: &Signature) -> Result<Option<String>, FolError> {
    match f {
        Formula::Quantified { body, .. } => infer_domain(var, body, sig),
        Formula::Connective { children, .. } => {
            for c in children {
                if let Some(d) = infer_domain(var, c, sig)? {
                    return Ok(Some(d));
                }
            }
            Ok(None)
        }
        Formula::Predicate { symbol, args } => {
            let decl = sig
                .predicates
                .get(symbol)
                .ok_or_else(|| FolError::UnknownSymbol {
                    name: symbol.clone(),
                })?;
            if args.len() != decl.domains.len() {
                return Err(FolError::ArityMismatch {
                    symbol: symbol.clone(),
                    expected: decl.domains.len(),
                    got: args.len(),
                });
            }
            for (arg, expected) in args.iter().zip(&decl.domains) {
                if let Some(d) = var_domain_in_term(var, arg, expected, sig)? {
                    return Ok(Some(d));
                }
            }
            Ok(None)
        }
        Formula::Equality { left, right } => {
            // A function application fixes the domain of variables inside
            // it; a bare variable opposite an application takes the
            // application's output domain.
            for (term, other) in [(left, right), (right, left)] {
                if let Term::App { .. } = term {
                    let out = term_domain(term, sig, &[])?;
                    if let Term::Var(v) = other {
                        if v == var {
                            return Ok(Some(out));
                        }
                    }
                    if let Some(d) = app_arg_domain(var, term, sig)? {
                        return Ok(Some(d));
                    }
                }
            }
            Ok(None)
        }
    }
}

fn app_arg_domain(var: &str, t: &Term, sig: &Signature) -> Result<Option<String>, FolError> {
    if let Term::App { symbol, args } = t {
        let decl = sig
            .functions
            .get(symbol)
            .ok_or_else(|| FolError::UnknownSymbol {
                name: symbol.clone(),
            })?;
        if args.len() != decl.inputs.len() {
            return Err(FolError::ArityMismatch {
                symbol: symbol.clone(),
                expected: decl.inputs.len(),
                got: args.len(),
            });
        }
        for (arg, input) in args.iter().zip(&decl.inputs) {
            if let Some(d) = var_domain_in_term(var, arg, input, sig)? {
                return Ok(Some(d));
            }
        }
    }
    Ok(None)
}

fn var_domain_in_term(
    var: &str,
    t: &Term,
    expected: &str,
    sig: &Signature,
) -> Result<Option<String>, FolError> {
    match t {
        Term::Var(v) if v == var => Ok(Some(expected.to_string())),
        Term::Var(_) => Ok(None),
        Term::App { .. } => app_arg_domain(var, t, sig),
    }
}

/// First variable in `f` that is not in `bound`, depth-first.
fn first_unbound<'f>(f: &'f Formula, bound: &mut Vec<&'f str>) -> Option<String> {
    match f {
        Formula::Quantified { var, body, .. } => {
            bound.push(var);
            let r = first_unbound(body, bound);
            bound.pop();
            r
        }
        Formula::Connective { children, .. } => {
            children.iter().find_map(|c| first_unbound(c, bound))
        }
        Formula::Predicate { args, .. } => args.iter().find_map(|t| term_unbound(t, bound)),
        Formula::Equality { left, right } => {
            term_unbound(left, bound).or_else(|| term_unbound(right, bound))
        }
    }
}

fn term_unbound(t: &Term, bound: &[&str]) -> Option<String> {
    match t {
        Term::Var(v) => (!bound.contains(&v.as_str())).then(|| v.clone()),
        Term::App { args, .. } => args.iter().find_map(|a| term_unbound(a, bound)),
    }
}
