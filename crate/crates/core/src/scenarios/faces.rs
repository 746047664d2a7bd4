//! The face-translation constraint set, shipped as a compile-only
//! artifact: it parses, validates and compiles under every t-norm, but
//! training it is out of scope at this scale.

use crate::fol::{ElemShape, PredicateKind, Signature};
use crate::semantics::{CompiledConstraint, EqualityKind, TNorm};
use crate::trainer::TrainError;

pub const CONSTRAINTS: &str = include_str!("../../../../scenarios/faces/constraints.fol");

/// Desk-scale stand-in shapes; the constraint structure is what matters.
pub fn signature() -> Signature {
    Signature::new()
        .domain(
            "faces",
            ElemShape::Image {
                height: 16,
                width: 16,
                channels: 3,
            },
        )
        .domain("latent", ElemShape::Vector { len: 16 })
        .predicate("S_M", &["faces"], PredicateKind::Given)
        .predicate("S_F", &["faces"], PredicateKind::Given)
        .predicate("S_E", &["faces"], PredicateKind::Given)
        .predicate("d_M", &["faces"], PredicateKind::Learnable)
        .predicate("d_F", &["faces"], PredicateKind::Learnable)
        .predicate("d_E", &["faces"], PredicateKind::Learnable)
        .function("e", &["faces"], "latent")
        .function("g_M", &["latent"], "faces")
        .function("g_F", &["latent"], "faces")
        .function("g_E", &["latent"], "faces")
}

/// Parses, validates and compiles the whole file under one t-norm.
pub fn compile_faces(tnorm: TNorm) -> Result<Vec<CompiledConstraint>, TrainError> {
    let (_, compiled) = crate::trainer::compile_constraint_text(
        CONSTRAINTS,
        &signature(),
        tnorm,
        None,
        Some(EqualityKind::PixelSimilarity),
    )?;
    Ok(compiled)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fol::Term;
    use crate::semantics::AtomSpec;

    #[test]
    fn compiles_under_every_tnorm() {
        for t in TNorm::ALL {
            let compiled = compile_faces(t).unwrap_or_else(|e| panic!("{t}: {e}"));
            assert_eq!(compiled.len(), 20);
        }
    }

    #[test]
    fn groups_split_generator_and_discriminator() {
        let compiled = compile_faces(TNorm::Product).unwrap();
        let gens = compiled
            .iter()
            .filter(|c| c.group.as_deref() == Some("generator"))
            .count();
        let discs = compiled
            .iter()
            .filter(|c| c.group.as_deref() == Some("discriminator"))
            .count();
        assert_eq!((gens, discs), (15, 5));
    }

    #[test]
    fn cycle_rule_has_four_deep_term_chain() {
        let compiled = compile_faces(TNorm::Product).unwrap();
        let cycle = compiled
            .iter()
            .find(|c| c.name.contains("g_M(e(g_F(e(x)))) = x"))
            .expect("cycle constraint present");
        let eq = cycle
            .slots
            .iter()
            .find_map(|s| match s {
                AtomSpec::Equality { left, right } => Some((left, right)),
                _ => None,
            })
            .expect("equality slot");
        fn depth(t: &Term) -> usize {
            match t {
                Term::Var(_) => 0,
                Term::App { args, .. } => 1 + args.iter().map(depth).max().unwrap_or(0),
            }
        }
        assert_eq!(depth(eq.0), 4);
        assert_eq!(depth(eq.1), 0);
    }

    #[test]
    fn eyeglasses_rules_use_conjunctive_premises() {
        let compiled = compile_faces(TNorm::Product).unwrap();
        let rule = compiled
            .iter()
            .find(|c| c.name.contains("S_M(x) and S_E(x) implies d_E(g_F(e(x)))"))
            .expect("eyeglasses conjunction rule");
        // Premise is a conjunction of two non-mutually-exclusive givens.
        assert!(rule.slots.len() >= 3);
    }
}
