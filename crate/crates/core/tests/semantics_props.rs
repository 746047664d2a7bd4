//! Algebraic properties of the three t-norm semantics: axioms on a grid,
//! De Morgan duality, classical boundary behavior, and the template range
//! invariant.

use fuzzyc_core::fol::Connective::{self, *};
use fuzzyc_core::fol::Quantifier;
use fuzzyc_core::semantics::{compile, eval_connective, eval_quantifier, t_and, t_or, TNorm};
use proptest::prelude::*;

fn grid() -> Vec<f64> {
    (0..=10).map(|i| i as f64 / 10.0).collect()
}

fn c2(op: Connective, t: TNorm, x: f64, y: f64) -> f64 {
    eval_connective(op, &[x, y], t).unwrap()
}

#[test]
fn and_is_commutative_and_associative_with_identity_and_annihilator() {
    for t in TNorm::ALL {
        for &x in &grid() {
            // Identity and annihilator, exactly.
            assert_eq!(c2(And, t, x, 1.0), x, "{t} and(x,1)");
            assert_eq!(c2(And, t, 1.0, x), x, "{t} and(1,x)");
            assert_eq!(c2(And, t, x, 0.0), 0.0, "{t} and(x,0)");
            assert_eq!(c2(And, t, 0.0, x), 0.0, "{t} and(0,x)");
            for &y in &grid() {
                assert_eq!(c2(And, t, x, y), c2(And, t, y, x), "{t} commutativity");
                for &z in &grid() {
                    let left = c2(And, t, c2(And, t, x, y), z);
                    let right = c2(And, t, x, c2(And, t, y, z));
                    assert!(
                        (left - right).abs() < 1e-12,
                        "{t} associativity at ({x},{y},{z}): {left} vs {right}"
                    );
                }
            }
        }
    }
}

#[test]
fn and_is_monotone_in_each_argument() {
    for t in TNorm::ALL {
        let g = grid();
        for &fixed in &g {
            for w in g.windows(2) {
                assert!(
                    c2(And, t, w[0], fixed) <= c2(And, t, w[1], fixed),
                    "{t} monotone first arg"
                );
                assert!(
                    c2(And, t, fixed, w[0]) <= c2(And, t, fixed, w[1]),
                    "{t} monotone second arg"
                );
            }
        }
    }
}

/// or(x,y) = 1 − and(1−x, 1−y), bit-exactly, for Łukasiewicz and Product.
#[test]
fn de_morgan_exact_for_lukasiewicz_and_product() {
    for t in [TNorm::Lukasiewicz, TNorm::Product] {
        for &x in &grid() {
            for &y in &grid() {
                let lhs = t_or(t, x, y);
                let rhs = 1.0 - t_and(t, 1.0 - x, 1.0 - y);
                assert_eq!(lhs.to_bits(), rhs.to_bits(), "{t} at ({x},{y})");
            }
        }
    }
}

/// On {0,1} inputs every connective reproduces the Boolean tables in
/// every logic: 3 logics × (4 binary connectives × 4 cases + negation ×
/// 2 cases) + quantifier boundary cases.
#[test]
fn classical_boundary_soundness() {
    let bools = [0.0, 1.0];
    for t in TNorm::ALL {
        for &x in &bools {
            let not = eval_connective(Not, &[x], t).unwrap();
            assert_eq!(not, 1.0 - x, "{t} not({x})");
            for &y in &bools {
                let cases = [
                    (And, (x == 1.0 && y == 1.0) as u8 as f64),
                    (Or, (x == 1.0 || y == 1.0) as u8 as f64),
                    (Implies, (x == 0.0 || y == 1.0) as u8 as f64),
                    (Iff, (x == y) as u8 as f64),
                ];
                for (op, expected) in cases {
                    assert_eq!(c2(op, t, x, y), expected, "{t} {op:?}({x},{y})");
                }
            }
        }
    }
}

#[test]
fn quantifiers_on_boolean_vectors() {
    for t in TNorm::ALL {
        assert_eq!(
            eval_quantifier(Quantifier::Forall, &[1.0, 1.0, 1.0], t),
            1.0
        );
        assert_eq!(
            eval_quantifier(Quantifier::Forall, &[1.0, 0.0, 1.0], t),
            0.0
        );
        assert_eq!(
            eval_quantifier(Quantifier::Exists, &[0.0, 0.0, 1.0], t),
            1.0
        );
        assert_eq!(
            eval_quantifier(Quantifier::Exists, &[0.0, 0.0, 0.0], t),
            0.0
        );
    }
}

proptest! {
    /// A compiled template maps slot truths in [0,1] to a truth in [0,1].
    #[test]
    fn template_preserves_unit_interval(
        seed in any::<u64>(),
        slots in prop::collection::vec(0.0f64..=1.0, 16),
    ) {
        use fuzzyc_core::fol::gen::{random_formula, test_signature, GenConfig};
        use fuzzyc_core::fol::validate;
        use fuzzyc_core::semantics::EqualityKind;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let f = random_formula(&mut rng, &GenConfig::default());
        let typed = validate(&f, &test_signature()).unwrap();
        for t in TNorm::ALL {
            let c = compile(&typed, t, Some(EqualityKind::PixelSimilarity)).unwrap();
            let values: Vec<f64> =
                c.slots.iter().enumerate().map(|(i, _)| slots[i % slots.len()]).collect();
            let phi = c.eval_matrix(&values).unwrap();
            prop_assert!((0.0..=1.0).contains(&phi), "{t}: {phi}");
        }
    }

    /// Quantifier folds stay inside [0,1] and respect the empty cases.
    #[test]
    fn quantifier_folds_bounded(
        values in prop::collection::vec(0.0f64..=1.0, 0..12),
    ) {
        for t in TNorm::ALL {
            for q in [Quantifier::Forall, Quantifier::Exists] {
                let v = eval_quantifier(q, &values, t);
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }
    }

    /// Forall folds never increase when another conjunct arrives.
    #[test]
    fn forall_monotone_in_added_conjuncts(
        values in prop::collection::vec(0.0f64..=1.0, 1..12),
        extra in 0.0f64..=1.0,
    ) {
        for t in TNorm::ALL {
            let base = eval_quantifier(Quantifier::Forall, &values, t);
            let mut more = values.clone();
            more.push(extra);
            let bigger = eval_quantifier(Quantifier::Forall, &more, t);
            prop_assert!(bigger <= base + 1e-15, "{t}: {base} -> {bigger}");
        }
    }
}
