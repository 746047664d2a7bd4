//! Signature inference from bare constraint files.
//!
//! When no signature is declared, symbols and arities are discovered
//! from use and domains are the union-find classes of argument slots:
//! two slots share a domain when a variable, a function output or an
//! equality links them. Explicit `forall x in D:` annotations name their
//! class; anonymous classes get generated names. Every inferred domain
//! defaults to a small vector shape, which is enough to type-check and
//! compile.

use super::{
    ElemShape, FolError, Formula, FunctionDecl, PredicateDecl, PredicateKind, Signature, Term,
};
use std::collections::{BTreeMap, HashMap};

const INFERRED_SHAPE: ElemShape = ElemShape::Vector { len: 4 };

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Slot {
    PredArg(String, usize),
    FunArg(String, usize),
    FunOut(String),
    Var(usize, String),
    Named(String),
}

struct UnionFind {
    parent: Vec<usize>,
    keys: HashMap<Slot, usize>,
    slots: Vec<Slot>,
}

impl UnionFind {
    fn new() -> Self {
        Self {
            parent: Vec::new(),
            keys: HashMap::new(),
            slots: Vec::new(),
        }
    }

    fn node(&mut self, slot: Slot) -> usize {
        if let Some(&i) = self.keys.get(&slot) {
            return i;
        }
        let i = self.parent.len();
        self.parent.push(i);
        self.keys.insert(slot.clone(), i);
        self.slots.push(slot);
        i
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: Slot, b: Slot) {
        let (a, b) = (self.node(a), self.node(b));
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Stable choice: smaller root wins, keeping names from the
            // first-encountered slot.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Builds a permissive signature under which all the formulas validate:
/// every predicate learnable, every domain a default vector shape,
/// arities and domain links taken from usage.
pub fn infer_signature(formulas: &[&Formula]) -> Result<Signature, FolError> {
    let mut predicates: BTreeMap<String, usize> = BTreeMap::new();
    let mut functions: BTreeMap<String, usize> = BTreeMap::new();
    let mut uf = UnionFind::new();

    for (fid, formula) in formulas.iter().enumerate() {
        walk(formula, fid, &mut predicates, &mut functions, &mut uf)?;
    }

    // Name every class: explicit names win, the rest get D1, D2, ...
    let mut class_name: HashMap<usize, String> = HashMap::new();
    for i in 0..uf.parent.len() {
        if let Slot::Named(name) = uf.slots[i].clone() {
            let root = uf.find(i);
            class_name.entry(root).or_insert(name);
        }
    }
    let mut fresh = 0usize;
    let mut name_of = |uf: &mut UnionFind, slot: Slot| -> String {
        let node = uf.node(slot);
        let root = uf.find(node);
        class_name
            .entry(root)
            .or_insert_with(|| {
                fresh += 1;
                format!("D{fresh}")
            })
            .clone()
    };

    let mut sig = Signature::new();
    for (name, arity) in &predicates {
        let domains: Vec<String> = (0..*arity)
            .map(|i| name_of(&mut uf, Slot::PredArg(name.clone(), i)))
            .collect();
        sig.predicates.insert(
            name.clone(),
            PredicateDecl {
                domains,
                kind: PredicateKind::Learnable,
            },
        );
    }
    for (name, arity) in &functions {
        let inputs: Vec<String> = (0..*arity)
            .map(|i| name_of(&mut uf, Slot::FunArg(name.clone(), i)))
            .collect();
        let output = name_of(&mut uf, Slot::FunOut(name.clone()));
        sig.functions
            .insert(name.clone(), FunctionDecl { inputs, output });
    }
    let mut domains: BTreeMap<String, ElemShape> = BTreeMap::new();
    for decl in sig.predicates.values() {
        for d in &decl.domains {
            domains.insert(d.clone(), INFERRED_SHAPE);
        }
    }
    for decl in sig.functions.values() {
        for d in decl.inputs.iter().chain(std::iter::once(&decl.output)) {
            domains.insert(d.clone(), INFERRED_SHAPE);
        }
    }
    sig.domains = domains;
    Ok(sig)
}

fn arity_check(
    map: &mut BTreeMap<String, usize>,
    symbol: &str,
    got: usize,
) -> Result<(), FolError> {
    match map.get(symbol) {
        Some(&expected) if expected != got => Err(FolError::ArityMismatch {
            symbol: symbol.to_string(),
            expected,
            got,
        }),
        Some(_) => Ok(()),
        None => {
            map.insert(symbol.to_string(), got);
            Ok(())
        }
    }
}

fn walk(
    f: &Formula,
    fid: usize,
    predicates: &mut BTreeMap<String, usize>,
    functions: &mut BTreeMap<String, usize>,
    uf: &mut UnionFind,
) -> Result<(), FolError> {
    match f {
        Formula::Quantified {
            var, domain, body, ..
        } => {
            if let Some(d) = domain {
                uf.union(Slot::Var(fid, var.clone()), Slot::Named(d.clone()));
            }
            walk(body, fid, predicates, functions, uf)
        }
        Formula::Connective { children, .. } => {
            for c in children {
                walk(c, fid, predicates, functions, uf)?;
            }
            Ok(())
        }
        Formula::Predicate { symbol, args } => {
            arity_check(predicates, symbol, args.len())?;
            for (i, arg) in args.iter().enumerate() {
                link_term(arg, Slot::PredArg(symbol.clone(), i), fid, functions, uf)?;
            }
            Ok(())
        }
        Formula::Equality { left, right } => {
            let ls = term_slot(left, fid);
            let rs = term_slot(right, fid);
            uf.union(ls.clone(), rs);
            link_term(left, ls.clone(), fid, functions, uf)?;
            let rslot = term_slot(right, fid);
            link_term(right, rslot, fid, functions, uf)
        }
    }
}

fn term_slot(t: &Term, fid: usize) -> Slot {
    match t {
        Term::Var(v) => Slot::Var(fid, v.clone()),
        Term::App { symbol, .. } => Slot::FunOut(symbol.clone()),
    }
}

fn link_term(
    t: &Term,
    expected: Slot,
    fid: usize,
    functions: &mut BTreeMap<String, usize>,
    uf: &mut UnionFind,
) -> Result<(), FolError> {
    match t {
        Term::Var(v) => {
            uf.union(expected, Slot::Var(fid, v.clone()));
            Ok(())
        }
        Term::App { symbol, args } => {
            arity_check(functions, symbol, args.len())?;
            uf.union(expected, Slot::FunOut(symbol.clone()));
            for (i, arg) in args.iter().enumerate() {
                link_term(arg, Slot::FunArg(symbol.clone(), i), fid, functions, uf)?;
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fol::{parse_source, validate};

    #[test]
    fn toy_constraints_validate_under_inferred_signature() {
        let sources = [
            "forall x: isZero(x) implies zero(x)",
            "forall x: zero(x) implies one(next(x)) and two(previous(x))",
            "forall x: exists y: (isZero(x) and isOne(y)) implies next(x) = y",
            "forall x: next(previous(x)) = x",
        ];
        let formulas: Vec<_> = sources.iter().map(|s| parse_source(s).unwrap()).collect();
        let refs: Vec<&Formula> = formulas.iter().collect();
        let sig = infer_signature(&refs).unwrap();
        for f in &formulas {
            validate(f, &sig).unwrap();
        }
        // Everything links into a single image-like domain.
        assert_eq!(sig.domains.len(), 1);
    }

    #[test]
    fn chained_functions_split_domains() {
        let f = parse_source("forall x: S_M(x) implies g_M(e(x)) = x").unwrap();
        let sig = infer_signature(&[&f]).unwrap();
        // e: faces -> latent, g_M: latent -> faces.
        assert_eq!(sig.domains.len(), 2);
        let e = &sig.functions["e"];
        let g = &sig.functions["g_M"];
        assert_eq!(e.inputs[0], g.output);
        assert_eq!(e.output, g.inputs[0]);
        validate(&f, &sig).unwrap();
    }

    #[test]
    fn inconsistent_arity_detected() {
        let a = parse_source("forall x: p(x)").unwrap();
        let b = parse_source("forall x: forall y: p(x, y)").unwrap();
        assert!(matches!(
            infer_signature(&[&a, &b]),
            Err(FolError::ArityMismatch { .. })
        ));
    }

    #[test]
    fn explicit_domain_names_survive() {
        let f = parse_source("forall x in People: p(x)").unwrap();
        let sig = infer_signature(&[&f]).unwrap();
        assert!(sig.domains.contains_key("People"));
        assert_eq!(sig.predicates["p"].domains[0], "People");
    }
}
