//! Emission of a grounded constraint into an autodiff graph.
//!
//! Per grounding row, every atom slot becomes a model forward pass (terms
//! composed innermost-first) and the template's connectives become the
//! t-norm operations; the quantifier plan then folds row truths level by
//! level, innermost fastest.
//!
//! Three things keep the graphs small and the arithmetic identical to the
//! scalar reference semantics:
//!
//! - ground-term and atom caches share identical subterms within a graph,
//!   so `g_F(e(x))` is computed once per element no matter how many slots
//!   or constraints mention it;
//! - truths that are compile-time constants (given predicates) fold
//!   through connectives without emitting nodes, using the exact scalar
//!   connective functions;
//! - a fold short-circuits when a constant absorbing element appears (0
//!   under any universal, 1 under any existential) — the skipped siblings
//!   are gradient-dead in every t-norm, so nothing is lost.
//!
//! The loss path additionally fuses `−log` into leading Product-forall
//! levels: `−log ∏ φ = Σ −log φ`, evaluated without ever materializing
//! the underflowing product.

use super::{Domain, DomainSet, GroundError, GroundingTable};
use crate::autodiff::{Graph, NodeId};
use crate::fol::{Connective, Quantifier, Term};
use crate::loss::{emit_map_loss, map_loss, LossMapping};
use crate::models::{emit_equality, Bindings, ModelBinding};
use crate::semantics::{
    eval_connective, eval_quantifier, AtomSpec, CompiledConstraint, SemanticsError, TNorm,
    Template, PRODUCT_IMPL_EPS,
};
use std::collections::HashMap;

/// A truth during emission: compile-time constant or graph node.
#[derive(Debug, Clone, Copy)]
enum Tv {
    Const(f64),
    Node(NodeId),
}

impl Tv {
    fn value(&self, g: &Graph) -> f64 {
        match self {
            Tv::Const(v) => *v,
            Tv::Node(n) => g.scalar_value(*n),
        }
    }

    fn as_const(&self) -> Option<f64> {
        match self {
            Tv::Const(v) => Some(*v),
            Tv::Node(_) => None,
        }
    }
}

/// Structural identity of a fully grounded term, over interned symbols.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum GroundTerm {
    Elem(u32, usize),
    App(u32, Vec<GroundTerm>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum AtomKey {
    Pred(u32, Vec<GroundTerm>),
    Eq(u8, GroundTerm, GroundTerm),
}

/// Caches shared across every constraint emitted into one graph.
#[derive(Default)]
pub struct EmitContext {
    term_nodes: HashMap<GroundTerm, NodeId>,
    atom_truth: HashMap<AtomKey, Tv>,
    symbols: HashMap<String, u32>,
    /// Input-independent RBF subgraphs, keyed by the centers parameter.
    rbf_static: HashMap<usize, crate::models::rbf::RbfStatic>,
    /// Full softmax per (classifier, input); the class predicates bound
    /// to one classifier pick different components of the same node.
    rbf_softmax: HashMap<(usize, NodeId), NodeId>,
}

impl EmitContext {
    pub fn new() -> Self {
        Self::default()
    }

    fn intern(&mut self, symbol: &str) -> u32 {
        if let Some(&id) = self.symbols.get(symbol) {
            return id;
        }
        let id = self.symbols.len() as u32;
        self.symbols.insert(symbol.to_string(), id);
        id
    }
}

/// Result of emitting one constraint's loss.
#[derive(Debug, Clone)]
pub struct EmittedConstraint {
    /// Unweighted loss node `L(Φ)`.
    pub loss: NodeId,
    /// Φ as a node, when the loss was not log-space fused.
    pub phi_node: Option<NodeId>,
    /// The raw truth degree Φ (recovered as `exp(−loss)` when fused; may
    /// underflow to 0 for large exhaustive products).
    pub phi: f64,
    /// Arithmetic mean of the per-row truths at the outermost data level;
    /// the quantity training reports track.
    pub mean_row_truth: f64,
    /// Number of rows contributing to `mean_row_truth`.
    pub rows: usize,
}

/// Evaluates a constraint over a grounding table into a
/// fresh graph, returning the scalar truth node.
pub fn evaluate_constraint(
    constraint: &CompiledConstraint,
    table: &GroundingTable,
    domains: &DomainSet,
    bindings: &Bindings,
) -> Result<(NodeId, Graph), GroundError> {
    let mut graph = Graph::new();
    let mut ctx = EmitContext::new();
    let node = emit_truth(&mut graph, &mut ctx, constraint, table, domains, bindings)?;
    Ok((node, graph))
}

/// Emits the truth degree Φ of one constraint into an existing graph.
pub fn emit_truth(
    graph: &mut Graph,
    ctx: &mut EmitContext,
    constraint: &CompiledConstraint,
    table: &GroundingTable,
    domains: &DomainSet,
    bindings: &Bindings,
) -> Result<NodeId, GroundError> {
    let mut em = Emitter::new(graph, ctx, constraint, table, domains, bindings)?;
    let mut env = vec![0usize; constraint.plan.len()];
    let tv = em.emit_level(0, &mut env)?;
    em.node_of(tv)
}

/// Emits the loss `L(Φ)` of one constraint, fusing `−log` into leading
/// Product-forall levels when the mapping is NegLog.
pub fn emit_loss(
    graph: &mut Graph,
    ctx: &mut EmitContext,
    constraint: &CompiledConstraint,
    table: &GroundingTable,
    domains: &DomainSet,
    bindings: &Bindings,
    mapping: LossMapping,
) -> Result<EmittedConstraint, GroundError> {
    let mut em = Emitter::new(graph, ctx, constraint, table, domains, bindings)?;
    let plan = &constraint.plan;

    let fuse = if mapping == LossMapping::NegLog {
        plan.iter()
            .take_while(|s| s.quantifier == Quantifier::Forall && s.tnorm == TNorm::Product)
            .count()
    } else {
        0
    };

    let mut env = vec![0usize; plan.len()];
    if fuse >= 1 {
        // Σ over the fused prefix rows of −log(inner fold).
        let mut truths = Vec::new();
        let mut loss_terms: Vec<Tv> = Vec::new();
        let mut combo = vec![0usize; fuse];
        loop {
            for l in 0..fuse {
                env[l] = em.level_index(l, combo[l]);
            }
            let v = em.emit_level(fuse, &mut env)?;
            truths.push(v.value(em.graph));
            let term = match v {
                Tv::Const(c) => Tv::Const(map_loss(c, LossMapping::NegLog)),
                Tv::Node(n) => {
                    let l = em.graph.log(n)?;
                    Tv::Node(em.graph.neg(l)?)
                }
            };
            loss_terms.push(term);
            if !em.advance(&mut combo, fuse) {
                break;
            }
        }
        let loss = em.sum_terms(&loss_terms)?;
        let loss_value = em.graph.scalar_value(loss);
        let mean = truths.iter().sum::<f64>() / truths.len() as f64;
        Ok(EmittedConstraint {
            loss,
            phi_node: None,
            phi: (-loss_value).exp(),
            mean_row_truth: mean,
            rows: truths.len(),
        })
    } else {
        // Plain fold to Φ, then the mapping. Stats still come from the
        // outermost level's child values.
        let (values, rows) = if plan.is_empty() {
            (vec![em.emit_level(0, &mut env)?], 1)
        } else {
            let n = em.level_len(0);
            let mut values = Vec::with_capacity(n);
            for i in 0..n {
                env[0] = em.level_index(0, i);
                values.push(em.emit_level(1, &mut env)?);
            }
            (values, n)
        };
        let mean = values.iter().map(|v| v.value(em.graph)).sum::<f64>() / values.len() as f64;
        let phi_tv = if plan.is_empty() {
            values[0]
        } else {
            em.fold(plan[0].quantifier, plan[0].tnorm, &values)?
        };
        let phi_node = em.node_of(phi_tv)?;
        let phi = em.graph.scalar_value(phi_node);
        let loss = emit_map_loss(em.graph, phi_node, mapping)?;
        Ok(EmittedConstraint {
            loss,
            phi_node: Some(phi_node),
            phi,
            mean_row_truth: mean,
            rows,
        })
    }
}

struct Emitter<'a> {
    graph: &'a mut Graph,
    ctx: &'a mut EmitContext,
    constraint: &'a CompiledConstraint,
    table: &'a GroundingTable,
    bindings: &'a Bindings,
    /// Per plan level: the domain and its cache slot.
    level_domains: Vec<(&'a Domain, u32)>,
}

impl<'a> Emitter<'a> {
    fn new(
        graph: &'a mut Graph,
        ctx: &'a mut EmitContext,
        constraint: &'a CompiledConstraint,
        table: &'a GroundingTable,
        domains: &'a DomainSet,
        bindings: &'a Bindings,
    ) -> Result<Self, GroundError> {
        debug_assert_eq!(table.vars.len(), constraint.plan.len());
        let mut level_domains = Vec::with_capacity(constraint.plan.len());
        for step in &constraint.plan {
            let d = domains
                .get(&step.domain)
                .ok_or_else(|| GroundError::MissingDomain {
                    var: step.var.clone(),
                    domain: step.domain.clone(),
                })?;
            if d.is_empty() {
                return Err(GroundError::EmptyDomain(d.name.clone()));
            }
            let slot = domains.slot(&step.domain).expect("domain present");
            level_domains.push((d, slot));
        }
        let em = Self {
            graph,
            ctx,
            constraint,
            table,
            bindings,
            level_domains,
        };
        em.check_bindings()?;
        Ok(em)
    }

    /// Validation-first: every symbol bound, tables only over variables,
    /// functions backed by function-capable models.
    fn check_bindings(&self) -> Result<(), GroundError> {
        for spec in &self.constraint.slots {
            match spec {
                AtomSpec::Predicate { symbol, args } => {
                    let binding = self
                        .bindings
                        .get(symbol)
                        .ok_or_else(|| GroundError::UnboundSymbol(symbol.clone()))?;
                    if binding.is_table() && args.iter().any(|a| matches!(a, Term::App { .. })) {
                        return Err(GroundError::GivenOverComputedTerm(symbol.clone()));
                    }
                    for arg in args {
                        self.check_term(arg)?;
                    }
                }
                AtomSpec::Equality { left, right } => {
                    if self.constraint.equality.is_none() {
                        return Err(SemanticsError::MissingEqualityBinding.into());
                    }
                    self.check_term(left)?;
                    self.check_term(right)?;
                }
            }
        }
        Ok(())
    }

    fn check_term(&self, t: &Term) -> Result<(), GroundError> {
        if let Term::App { symbol, args } = t {
            match self.bindings.get(symbol) {
                None => return Err(GroundError::UnboundSymbol(symbol.clone())),
                Some(ModelBinding::Mlp(_)) => {}
                Some(_) => {
                    return Err(GroundError::WrongBindingRole {
                        symbol: symbol.clone(),
                        role: "function",
                    })
                }
            }
            for a in args {
                self.check_term(a)?;
            }
        }
        Ok(())
    }

    fn level_len(&self, level: usize) -> usize {
        self.table.level_indices[level].len()
    }

    fn level_index(&self, level: usize, i: usize) -> usize {
        self.table.level_indices[level][i]
    }

    /// Odometer step over the first `k` levels; false when wrapped.
    fn advance(&self, combo: &mut [usize], k: usize) -> bool {
        for l in (0..k).rev() {
            combo[l] += 1;
            if combo[l] < self.level_len(l) {
                return true;
            }
            combo[l] = 0;
        }
        false
    }

    fn node_of(&mut self, tv: Tv) -> Result<NodeId, GroundError> {
        match tv {
            Tv::Const(v) => Ok(self.graph.scalar(v)?),
            Tv::Node(n) => Ok(n),
        }
    }

    fn sum_terms(&mut self, terms: &[Tv]) -> Result<NodeId, GroundError> {
        if terms.iter().all(|t| t.as_const().is_some()) {
            let total: f64 = terms.iter().map(|t| t.as_const().unwrap()).sum();
            return Ok(self.graph.scalar(total)?);
        }
        let mut acc = self.node_of(terms[0])?;
        for t in &terms[1..] {
            let n = self.node_of(*t)?;
            acc = self.graph.add(acc, n)?;
        }
        Ok(acc)
    }

    /// Folds quantifier levels `level..` for the fixed outer assignment in
    /// `env`, short-circuiting on constant absorbing elements.
    fn emit_level(&mut self, level: usize, env: &mut Vec<usize>) -> Result<Tv, GroundError> {
        let constraint = self.constraint;
        if level == constraint.plan.len() {
            return self.emit_template(&constraint.matrix, env);
        }
        let step = &constraint.plan[level];
        let n = self.level_len(level);
        let mut values = Vec::with_capacity(n);
        for i in 0..n {
            env[level] = self.level_index(level, i);
            let v = self.emit_level(level + 1, env)?;
            match step.quantifier {
                Quantifier::Forall if v.as_const() == Some(0.0) => {
                    return Ok(Tv::Const(0.0))
                }
                Quantifier::Exists if v.as_const() == Some(1.0) => {
                    return Ok(Tv::Const(1.0))
                }
                _ => {}
            }
            values.push(v);
        }
        self.fold(step.quantifier, step.tnorm, &values)
    }

    /// Graph (or constant) fold matching `eval_quantifier` operation for
    /// operation, so the two routes agree to the last bit.
    fn fold(
        &mut self,
        quantifier: Quantifier,
        tnorm: TNorm,
        values: &[Tv],
    ) -> Result<Tv, GroundError> {
        if values.is_empty() {
            return Ok(Tv::Const(match quantifier {
                Quantifier::Forall => 1.0,
                Quantifier::Exists => 0.0,
            }));
        }
        if values.iter().all(|v| v.as_const().is_some()) {
            let vals: Vec<f64> = values.iter().map(|v| v.as_const().unwrap()).collect();
            return Ok(Tv::Const(eval_quantifier(quantifier, &vals, tnorm)));
        }
        let nodes: Vec<NodeId> = values
            .iter()
            .map(|v| self.node_of(*v))
            .collect::<Result<_, _>>()?;
        let g = &mut self.graph;
        let out = match (quantifier, tnorm) {
            (Quantifier::Forall, TNorm::Goedel) => {
                let mut acc = nodes[0];
                for &n in &nodes[1..] {
                    acc = g.min(acc, n)?;
                }
                acc
            }
            (Quantifier::Forall, TNorm::Product) => {
                let mut acc = nodes[0];
                for &n in &nodes[1..] {
                    acc = g.mul(acc, n)?;
                }
                acc
            }
            (Quantifier::Forall, TNorm::Lukasiewicz) => {
                let mut sum = nodes[0];
                for &n in &nodes[1..] {
                    sum = g.add(sum, n)?;
                }
                let c = g.scalar(nodes.len() as f64 - 1.0)?;
                let d = g.sub(sum, c)?;
                g.relu(d)?
            }
            (Quantifier::Exists, TNorm::Goedel) => {
                let mut acc = nodes[0];
                for &n in &nodes[1..] {
                    acc = g.max(acc, n)?;
                }
                acc
            }
            (Quantifier::Exists, TNorm::Product) => {
                let one = g.scalar(1.0)?;
                let mut acc = g.sub(one, nodes[0])?;
                for &n in &nodes[1..] {
                    let t = g.sub(one, n)?;
                    acc = g.mul(acc, t)?;
                }
                g.sub(one, acc)?
            }
            (Quantifier::Exists, TNorm::Lukasiewicz) => {
                let mut sum = nodes[0];
                for &n in &nodes[1..] {
                    sum = g.add(sum, n)?;
                }
                let one = g.scalar(1.0)?;
                g.min(sum, one)?
            }
        };
        Ok(Tv::Node(out))
    }

    fn emit_template(&mut self, t: &Template, env: &[usize]) -> Result<Tv, GroundError> {
        match t {
            Template::Slot(i) => self.emit_slot(*i, env),
            Template::Conn { op, children } => match op {
                Connective::Not => {
                    let a = self.emit_template(&children[0], env)?;
                    self.emit_not(a)
                }
                Connective::And => {
                    let a = self.emit_template(&children[0], env)?;
                    // 0 annihilates conjunction in every t-norm.
                    if a.as_const() == Some(0.0) {
                        return Ok(Tv::Const(0.0));
                    }
                    let b = self.emit_template(&children[1], env)?;
                    self.emit_and(a, b)
                }
                Connective::Or => {
                    let a = self.emit_template(&children[0], env)?;
                    // 1 saturates disjunction in every t-norm.
                    if a.as_const() == Some(1.0) {
                        return Ok(Tv::Const(1.0));
                    }
                    let b = self.emit_template(&children[1], env)?;
                    self.emit_or(a, b)
                }
                Connective::Implies => {
                    let a = self.emit_template(&children[0], env)?;
                    // A false premise satisfies the implication in every
                    // t-norm; the consequent is never built.
                    if a.as_const() == Some(0.0) {
                        return Ok(Tv::Const(1.0));
                    }
                    let b = self.emit_template(&children[1], env)?;
                    self.emit_implies(a, b)
                }
                Connective::Iff => {
                    let a = self.emit_template(&children[0], env)?;
                    let b = self.emit_template(&children[1], env)?;
                    self.emit_iff(a, b)
                }
            },
        }
    }

    fn emit_not(&mut self, a: Tv) -> Result<Tv, GroundError> {
        match a {
            Tv::Const(v) => Ok(Tv::Const(scalar_conn(
                Connective::Not,
                &[v],
                self.constraint.tnorm,
            )?)),
            Tv::Node(n) => {
                let one = self.graph.scalar(1.0)?;
                Ok(Tv::Node(self.graph.sub(one, n)?))
            }
        }
    }

    fn emit_and(&mut self, a: Tv, b: Tv) -> Result<Tv, GroundError> {
        if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
            return Ok(Tv::Const(scalar_conn(
                Connective::And,
                &[x, y],
                self.constraint.tnorm,
            )?));
        }
        // Mirror the scalar identity branch so both routes agree on the
        // last bit; a frozen pass-through at the boundary is the same
        // subgradient treatment the Gödel residuum gets.
        if self.constraint.tnorm == TNorm::Lukasiewicz {
            if a.value(self.graph) == 1.0 {
                return Ok(b);
            }
            if b.value(self.graph) == 1.0 {
                return Ok(a);
            }
        }
        let an = self.node_of(a)?;
        let bn = self.node_of(b)?;
        let g = &mut self.graph;
        let out = match self.constraint.tnorm {
            TNorm::Goedel => g.min(an, bn)?,
            TNorm::Product => g.mul(an, bn)?,
            TNorm::Lukasiewicz => {
                let s = g.add(an, bn)?;
                let one = g.scalar(1.0)?;
                let d = g.sub(s, one)?;
                g.relu(d)?
            }
        };
        Ok(Tv::Node(out))
    }

    fn emit_or(&mut self, a: Tv, b: Tv) -> Result<Tv, GroundError> {
        if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
            return Ok(Tv::Const(scalar_conn(
                Connective::Or,
                &[x, y],
                self.constraint.tnorm,
            )?));
        }
        match self.constraint.tnorm {
            TNorm::Goedel => {
                let an = self.node_of(a)?;
                let bn = self.node_of(b)?;
                Ok(Tv::Node(self.graph.max(an, bn)?))
            }
            // Literal De Morgan dual, like the scalar definition.
            _ => {
                let na = self.emit_not(a)?;
                let nb = self.emit_not(b)?;
                let both = self.emit_and(na, nb)?;
                self.emit_not(both)
            }
        }
    }

    fn emit_implies(&mut self, a: Tv, b: Tv) -> Result<Tv, GroundError> {
        if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
            return Ok(Tv::Const(scalar_conn(
                Connective::Implies,
                &[x, y],
                self.constraint.tnorm,
            )?));
        }
        match self.constraint.tnorm {
            TNorm::Goedel => {
                // Discontinuous residuum: freeze the branch chosen at the
                // current values; the gradient of the selected branch is
                // the standard subgradient treatment.
                let (av, bv) = (a.value(self.graph), b.value(self.graph));
                if av <= bv {
                    Ok(Tv::Const(1.0))
                } else {
                    Ok(b)
                }
            }
            TNorm::Lukasiewicz => {
                let an = self.node_of(a)?;
                let bn = self.node_of(b)?;
                let g = &mut self.graph;
                let one = g.scalar(1.0)?;
                let nx = g.sub(one, an)?;
                let s = g.add(nx, bn)?;
                Ok(Tv::Node(g.min(s, one)?))
            }
            TNorm::Product => {
                let an = self.node_of(a)?;
                let bn = self.node_of(b)?;
                let g = &mut self.graph;
                let eps = g.scalar(PRODUCT_IMPL_EPS)?;
                let guard = g.sub(eps, an)?;
                let r = g.relu(guard)?;
                let num = g.add(bn, r)?;
                let den = g.max(an, eps)?;
                let q = g.div(num, den)?;
                let one = g.scalar(1.0)?;
                Ok(Tv::Node(g.min(q, one)?))
            }
        }
    }

    fn emit_iff(&mut self, a: Tv, b: Tv) -> Result<Tv, GroundError> {
        if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
            return Ok(Tv::Const(scalar_conn(
                Connective::Iff,
                &[x, y],
                self.constraint.tnorm,
            )?));
        }
        match self.constraint.tnorm {
            TNorm::Goedel => {
                let (av, bv) = (a.value(self.graph), b.value(self.graph));
                if av == bv {
                    Ok(Tv::Const(1.0))
                } else {
                    let an = self.node_of(a)?;
                    let bn = self.node_of(b)?;
                    Ok(Tv::Node(self.graph.min(an, bn)?))
                }
            }
            TNorm::Lukasiewicz => {
                let an = self.node_of(a)?;
                let bn = self.node_of(b)?;
                let g = &mut self.graph;
                let d = g.sub(an, bn)?;
                let ad = g.abs(d)?;
                let one = g.scalar(1.0)?;
                Ok(Tv::Node(g.sub(one, ad)?))
            }
            TNorm::Product => {
                let fwd = self.emit_implies(a, b)?;
                let bwd = self.emit_implies(b, a)?;
                self.emit_and(fwd, bwd)
            }
        }
    }

    fn emit_slot(&mut self, slot: usize, env: &[usize]) -> Result<Tv, GroundError> {
        let constraint = self.constraint;
        let bindings = self.bindings;
        let spec = &constraint.slots[slot];
        let key = self.atom_key(spec, env)?;
        if let Some(tv) = self.ctx.atom_truth.get(&key) {
            return Ok(*tv);
        }
        let tv = match spec {
            AtomSpec::Predicate { symbol, args } => {
                let binding = bindings
                    .get(symbol)
                    .ok_or_else(|| GroundError::UnboundSymbol(symbol.clone()))?;
                match binding {
                    ModelBinding::Given(table) | ModelBinding::Fixed(table) => {
                        let mut indices = Vec::with_capacity(args.len());
                        for arg in args {
                            match arg {
                                Term::Var(v) => indices.push(env[self.var_level(v)]),
                                Term::App { .. } => {
                                    return Err(GroundError::GivenOverComputedTerm(symbol.clone()))
                                }
                            }
                        }
                        Tv::Const(table.eval(&indices)?)
                    }
                    ModelBinding::Mlp(m) => {
                        let inputs = self.resolve_args(args, env)?;
                        Tv::Node(m.forward_scalar(self.graph, &bindings.store, &inputs)?)
                    }
                    ModelBinding::Rbf { model, output } => {
                        let inputs = self.resolve_args(args, env)?;
                        let softmax = self.rbf_softmax(model, inputs[0])?;
                        Tv::Node(model.pick_class(self.graph, softmax, *output)?)
                    }
                }
            }
            AtomSpec::Equality { left, right } => {
                let kind = constraint.equality.ok_or(GroundError::Semantics(
                    SemanticsError::MissingEqualityBinding,
                ))?;
                let l = self.resolve_term(left, env)?;
                let r = self.resolve_term(right, env)?;
                Tv::Node(emit_equality(self.graph, kind, l, r)?)
            }
        };
        self.ctx.atom_truth.insert(key, tv);
        Ok(tv)
    }

    fn resolve_args(&mut self, args: &[Term], env: &[usize]) -> Result<Vec<NodeId>, GroundError> {
        args.iter().map(|a| self.resolve_term(a, env)).collect()
    }

    fn rbf_softmax(
        &mut self,
        model: &crate::models::RbfClassifier,
        input: NodeId,
    ) -> Result<NodeId, GroundError> {
        let key = model.centers.0;
        if let Some(&s) = self.ctx.rbf_softmax.get(&(key, input)) {
            return Ok(s);
        }
        if !self.ctx.rbf_static.contains_key(&key) {
            let prepared = model.prepare(self.graph, &self.bindings.store)?;
            self.ctx.rbf_static.insert(key, prepared);
        }
        let prepared = self.ctx.rbf_static[&key];
        let softmax = model.forward_prepared(self.graph, &prepared, input)?;
        self.ctx.rbf_softmax.insert((key, input), softmax);
        Ok(softmax)
    }

    fn resolve_term(&mut self, t: &Term, env: &[usize]) -> Result<NodeId, GroundError> {
        let key = self.term_key(t, env)?;
        if let Some(&node) = self.ctx.term_nodes.get(&key) {
            return Ok(node);
        }
        let bindings = self.bindings;
        let node = match t {
            Term::Var(v) => {
                let level = self.var_level(v);
                let (domain, _) = self.level_domains[level];
                self.graph.constant(domain.element(env[level]).clone())?
            }
            Term::App { symbol, args } => {
                let inputs = self.resolve_args(args, env)?;
                match bindings
                    .get(symbol)
                    .ok_or_else(|| GroundError::UnboundSymbol(symbol.clone()))?
                {
                    ModelBinding::Mlp(m) => m.forward(self.graph, &bindings.store, &inputs)?,
                    _ => {
                        return Err(GroundError::WrongBindingRole {
                            symbol: symbol.clone(),
                            role: "function",
                        })
                    }
                }
            }
        };
        self.ctx.term_nodes.insert(key, node);
        Ok(node)
    }

    fn var_level(&self, var: &str) -> usize {
        self.table
            .vars
            .iter()
            .position(|v| v == var)
            .expect("slot variable bound by the plan")
    }

    fn term_key(&mut self, t: &Term, env: &[usize]) -> Result<GroundTerm, GroundError> {
        Ok(match t {
            Term::Var(v) => {
                let level = self.var_level(v);
                let (_, slot) = self.level_domains[level];
                GroundTerm::Elem(slot, env[level])
            }
            Term::App { symbol, args } => {
                let sym = self.ctx.intern(symbol);
                GroundTerm::App(
                    sym,
                    args.iter()
                        .map(|a| self.term_key(a, env))
                        .collect::<Result<Vec<_>, _>>()?,
                )
            }
        })
    }

    fn atom_key(&mut self, spec: &AtomSpec, env: &[usize]) -> Result<AtomKey, GroundError> {
        Ok(match spec {
            AtomSpec::Predicate { symbol, args } => {
                let sym = self.ctx.intern(symbol);
                AtomKey::Pred(
                    sym,
                    args.iter()
                        .map(|a| self.term_key(a, env))
                        .collect::<Result<Vec<_>, _>>()?,
                )
            }
            AtomSpec::Equality { left, right } => {
                let kind = self.constraint.equality.map(|k| k as u8).unwrap_or(u8::MAX);
                AtomKey::Eq(kind, self.term_key(left, env)?, self.term_key(right, env)?)
            }
        })
    }
}

fn scalar_conn(op: Connective, args: &[f64], tnorm: TNorm) -> Result<f64, GroundError> {
    eval_connective(op, args, tnorm).map_err(GroundError::from)
}
