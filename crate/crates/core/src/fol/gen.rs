//! Seeded random formula generation over a small fixed signature.
//!
//! Used by the property tests (pretty-print round trips, precedence
//! checks) and by the compiled-vs-interpreted equivalence suite. Every
//! produced formula is closed, prenex, and valid under [`test_signature`].

use super::{Connective, ElemShape, Formula, PredicateKind, Quantifier, Signature, Term};
use rand::{Rng, RngExt};

/// Two vector domains, unary/binary predicates over them, and unary
/// functions that map between them so chained terms come up.
pub fn test_signature() -> Signature {
    Signature::new()
        .domain("da", ElemShape::Vector { len: 3 })
        .domain("db", ElemShape::Vector { len: 2 })
        .predicate("p", &["da"], PredicateKind::Learnable)
        .predicate("q", &["db"], PredicateKind::Learnable)
        .predicate("r", &["da", "da"], PredicateKind::Learnable)
        .predicate("s", &["da"], PredicateKind::Given)
        .function("f", &["da"], "da")
        .function("g", &["da"], "db")
        .function("h", &["db"], "da")
}

#[derive(Debug, Clone)]
pub struct GenConfig {
    pub max_connective_depth: usize,
    pub max_quantifiers: usize,
    pub max_term_depth: usize,
    pub allow_exists: bool,
    pub allow_equality: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            max_connective_depth: 4,
            max_quantifiers: 2,
            max_term_depth: 2,
            allow_exists: true,
            allow_equality: true,
        }
    }
}

/// Draws a random closed prenex formula. Retries internally until every
/// quantified variable is used, so the result always validates.
pub fn random_formula<R: Rng>(rng: &mut R, cfg: &GenConfig) -> Formula {
    loop {
        let n_q = rng.random_range(1..=cfg.max_quantifiers.max(1));
        let vars: Vec<(String, String)> = (0..n_q)
            .map(|i| {
                let name = format!("v{i}");
                let domain = if rng.random_bool(0.7) { "da" } else { "db" };
                (name, domain.to_string())
            })
            .collect();
        let body = gen_body(rng, cfg, &vars, cfg.max_connective_depth);
        if vars.iter().all(|(v, _)| formula_uses_var(&body, v)) {
            let mut out = body;
            for (i, (name, _)) in vars.iter().enumerate().rev() {
                let quantifier = if i > 0 && cfg.allow_exists && rng.random_bool(0.3) {
                    Quantifier::Exists
                } else {
                    Quantifier::Forall
                };
                out = Formula::Quantified {
                    quantifier,
                    var: name.clone(),
                    // Annotated so generated formulas stay valid even when a
                    // variable's first use would not determine its domain.
                    domain: Some(vars[i].1.clone()),
                    body: Box::new(out),
                };
            }
            return out;
        }
    }
}

fn gen_body<R: Rng>(
    rng: &mut R,
    cfg: &GenConfig,
    vars: &[(String, String)],
    depth: usize,
) -> Formula {
    if depth == 0 || rng.random_bool(0.35) {
        return gen_atom(rng, cfg, vars);
    }
    match rng.random_range(0..5) {
        0 => Formula::negated(gen_body(rng, cfg, vars, depth - 1)),
        1 => Formula::binary(
            Connective::And,
            gen_body(rng, cfg, vars, depth - 1),
            gen_body(rng, cfg, vars, depth - 1),
        ),
        2 => Formula::binary(
            Connective::Or,
            gen_body(rng, cfg, vars, depth - 1),
            gen_body(rng, cfg, vars, depth - 1),
        ),
        3 => Formula::binary(
            Connective::Implies,
            gen_body(rng, cfg, vars, depth - 1),
            gen_body(rng, cfg, vars, depth - 1),
        ),
        _ => Formula::binary(
            Connective::Iff,
            gen_body(rng, cfg, vars, depth - 1),
            gen_body(rng, cfg, vars, depth - 1),
        ),
    }
}

fn gen_atom<R: Rng>(rng: &mut R, cfg: &GenConfig, vars: &[(String, String)]) -> Formula {
    if cfg.allow_equality && rng.random_bool(0.15) {
        // Equality over domain `da`: at least one side is an application so
        // the validator can type it.
        let left = gen_app(rng, cfg, vars, "da", cfg.max_term_depth);
        let right = gen_term(rng, cfg, vars, "da", cfg.max_term_depth);
        return Formula::Equality { left, right };
    }
    match rng.random_range(0..4) {
        0 => Formula::Predicate {
            symbol: "p".into(),
            args: vec![gen_term(rng, cfg, vars, "da", cfg.max_term_depth)],
        },
        1 => Formula::Predicate {
            symbol: "q".into(),
            args: vec![gen_term(rng, cfg, vars, "db", cfg.max_term_depth)],
        },
        2 => Formula::Predicate {
            symbol: "r".into(),
            args: vec![
                gen_term(rng, cfg, vars, "da", cfg.max_term_depth),
                gen_term(rng, cfg, vars, "da", cfg.max_term_depth),
            ],
        },
        _ => {
            // `s` plays the role of a given predicate, and given tables
            // index plain variables only.
            let candidates: Vec<&(String, String)> =
                vars.iter().filter(|(_, d)| d == "da").collect();
            match candidates.is_empty() {
                false => Formula::Predicate {
                    symbol: "s".into(),
                    args: vec![Term::var(
                        candidates[rng.random_range(0..candidates.len())].0.clone(),
                    )],
                },
                true => Formula::Predicate {
                    symbol: "p".into(),
                    args: vec![gen_term(rng, cfg, vars, "da", cfg.max_term_depth)],
                },
            }
        }
    }
}

/// A term of the requested domain built from the variables in scope and
/// the f/g/h function chains.
fn gen_term<R: Rng>(
    rng: &mut R,
    cfg: &GenConfig,
    vars: &[(String, String)],
    domain: &str,
    depth: usize,
) -> Term {
    let candidates: Vec<&(String, String)> = vars.iter().filter(|(_, d)| d == domain).collect();
    let can_stop = !candidates.is_empty();
    if depth == 0 && can_stop {
        let (v, _) = candidates[rng.random_range(0..candidates.len())];
        return Term::var(v.clone());
    }
    if can_stop && rng.random_bool(0.5) {
        let (v, _) = candidates[rng.random_range(0..candidates.len())];
        return Term::var(v.clone());
    }
    gen_app(rng, cfg, vars, domain, depth.max(1))
}

fn gen_app<R: Rng>(
    rng: &mut R,
    cfg: &GenConfig,
    vars: &[(String, String)],
    domain: &str,
    depth: usize,
) -> Term {
    match domain {
        "da" => {
            if rng.random_bool(0.5) {
                Term::app("f", vec![gen_term(rng, cfg, vars, "da", depth - 1)])
            } else {
                Term::app("h", vec![gen_term(rng, cfg, vars, "db", depth - 1)])
            }
        }
        _ => Term::app("g", vec![gen_term(rng, cfg, vars, "da", depth - 1)]),
    }
}

fn formula_uses_var(f: &Formula, var: &str) -> bool {
    match f {
        Formula::Quantified { body, .. } => formula_uses_var(body, var),
        Formula::Connective { children, .. } => children.iter().any(|c| formula_uses_var(c, var)),
        Formula::Predicate { args, .. } => args.iter().any(|t| t.contains_var(var)),
        Formula::Equality { left, right } => left.contains_var(var) || right.contains_var(var),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fol::validate;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_formulas_validate() {
        let sig = test_signature();
        let cfg = GenConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let f = random_formula(&mut rng, &cfg);
            validate(&f, &sig).unwrap_or_else(|e| panic!("invalid generated formula: {e}"));
        }
    }
}
