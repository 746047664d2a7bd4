//! Direct recursive interpreter for validated formulas.
//!
//! This is the reference route the compiled evaluation is checked
//! against: it walks the formula tree, grounds quantifiers by looping
//! over whole domains, and applies the scalar connective and quantifier
//! functions directly. No templates, no constant folding, no fold
//! short-circuits, no subexpression sharing.
//!
//! Model-backed atoms are evaluated on throwaway graphs; forward
//! evaluation is referentially transparent, so both routes see identical
//! atom truths and any disagreement is the compiler's fault.

use crate::fol::{Formula, Quantifier, Term, TypedFormula};
use crate::grounding::{DomainSet, GroundError};
use crate::models::{pixel_similarity, squared_exponential, Bindings, ModelBinding};
use crate::semantics::{eval_connective, eval_quantifier, EqualityKind, SemanticsError, TNorm};
use crate::tensor::Tensor;

pub struct Interpreter<'a> {
    pub domains: &'a DomainSet,
    pub bindings: &'a Bindings,
    pub tnorm: TNorm,
    pub exists_tnorm: TNorm,
    pub equality: Option<EqualityKind>,
}

/// Evaluates a validated formula to its truth degree by brute force.
pub fn interpret(
    formula: &TypedFormula,
    domains: &DomainSet,
    bindings: &Bindings,
    tnorm: TNorm,
    exists_tnorm: Option<TNorm>,
    equality: Option<EqualityKind>,
) -> Result<f64, GroundError> {
    let interp = Interpreter {
        domains,
        bindings,
        tnorm,
        exists_tnorm: exists_tnorm.unwrap_or(tnorm),
        equality,
    };
    let mut env = Vec::new();
    interp.eval(formula.ast(), &mut env)
}

type Env = Vec<(String, String, usize)>; // (var, domain, element index)

impl<'a> Interpreter<'a> {
    fn eval(&self, f: &Formula, env: &mut Env) -> Result<f64, GroundError> {
        match f {
            Formula::Quantified {
                quantifier,
                var,
                domain,
                body,
            } => {
                let dname = domain.as_ref().expect("validated formula");
                let d = self
                    .domains
                    .get(dname)
                    .ok_or_else(|| GroundError::MissingDomain {
                        var: var.clone(),
                        domain: dname.clone(),
                    })?;
                if d.is_empty() {
                    return Err(GroundError::EmptyDomain(dname.clone()));
                }
                let mut values = Vec::with_capacity(d.len());
                for i in 0..d.len() {
                    env.push((var.clone(), dname.clone(), i));
                    values.push(self.eval(body, env)?);
                    env.pop();
                }
                let agg = match quantifier {
                    Quantifier::Forall => self.tnorm,
                    Quantifier::Exists => self.exists_tnorm,
                };
                Ok(eval_quantifier(*quantifier, &values, agg))
            }
            Formula::Connective { op, children } => {
                let vals = children
                    .iter()
                    .map(|c| self.eval(c, env))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(eval_connective(*op, &vals, self.tnorm)?)
            }
            Formula::Predicate { symbol, args } => self.atom(symbol, args, env),
            Formula::Equality { left, right } => {
                let kind = self.equality.ok_or(GroundError::Semantics(
                    SemanticsError::MissingEqualityBinding,
                ))?;
                let l = self.term_value(left, env)?;
                let r = self.term_value(right, env)?;
                Ok(match kind {
                    EqualityKind::PixelSimilarity => pixel_similarity(&l, &r)?,
                    EqualityKind::SquaredExponential => squared_exponential(&l, &r)?,
                })
            }
        }
    }

    fn atom(&self, symbol: &str, args: &[Term], env: &Env) -> Result<f64, GroundError> {
        let binding = self
            .bindings
            .get(symbol)
            .ok_or_else(|| GroundError::UnboundSymbol(symbol.to_string()))?;
        match binding {
            ModelBinding::Given(table) | ModelBinding::Fixed(table) => {
                let mut indices = Vec::with_capacity(args.len());
                for arg in args {
                    match arg {
                        Term::Var(v) => indices.push(lookup(env, v).2),
                        Term::App { .. } => {
                            return Err(GroundError::GivenOverComputedTerm(symbol.to_string()))
                        }
                    }
                }
                Ok(table.eval(&indices)?)
            }
            ModelBinding::Mlp(m) => {
                let inputs = args
                    .iter()
                    .map(|a| self.term_value(a, env))
                    .collect::<Result<Vec<_>, _>>()?;
                let refs: Vec<&Tensor> = inputs.iter().collect();
                let out = m.apply(&self.bindings.store, &refs)?;
                Ok(out.data().iter().sum())
            }
            ModelBinding::Rbf { model, output } => {
                let input = self.term_value(&args[0], env)?;
                let mut g = crate::autodiff::Graph::new();
                let x = g.constant(input)?;
                let node = model.class_output(&mut g, &self.bindings.store, x, *output)?;
                Ok(g.scalar_value(node))
            }
        }
    }

    fn term_value(&self, t: &Term, env: &Env) -> Result<Tensor, GroundError> {
        match t {
            Term::Var(v) => {
                let (_, dname, idx) = lookup(env, v);
                let d = self
                    .domains
                    .get(&dname)
                    .ok_or_else(|| GroundError::MissingDomain {
                        var: v.clone(),
                        domain: dname.clone(),
                    })?;
                Ok(d.element(idx).clone())
            }
            Term::App { symbol, args } => {
                let inputs = args
                    .iter()
                    .map(|a| self.term_value(a, env))
                    .collect::<Result<Vec<_>, _>>()?;
                match self
                    .bindings
                    .get(symbol)
                    .ok_or_else(|| GroundError::UnboundSymbol(symbol.clone()))?
                {
                    ModelBinding::Mlp(m) => {
                        let refs: Vec<&Tensor> = inputs.iter().collect();
                        Ok(m.apply(&self.bindings.store, &refs)?)
                    }
                    _ => Err(GroundError::WrongBindingRole {
                        symbol: symbol.clone(),
                        role: "function",
                    }),
                }
            }
        }
    }
}

fn lookup(env: &Env, var: &str) -> (String, String, usize) {
    env.iter()
        .rev()
        .find(|(v, _, _)| v == var)
        .cloned()
        .expect("validated formulas are closed")
}
