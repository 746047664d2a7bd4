//! Shared setup for the engine benchmarks: a small glyph domain with
//! bound models and a compiled constraint set.

use fuzzyc_core::fol::{parse_source, validate, ElemShape, PredicateKind, Signature};
use fuzzyc_core::grounding::{Domain, DomainSet};
use fuzzyc_core::models::{Bindings, GivenTable, Head, Mlp, ModelBinding};
use fuzzyc_core::scenarios::glyphs::{glyph_dataset, GLYPH_PIXELS};
use fuzzyc_core::semantics::{compile, CompiledConstraint, EqualityKind, TNorm};

pub struct BenchSetup {
    pub domains: DomainSet,
    pub bindings: Bindings,
    pub supervision: CompiledConstraint,
    pub generation: CompiledConstraint,
    pub cycle: CompiledConstraint,
}

pub fn setup(n: usize) -> BenchSetup {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);

    let sig = Signature::new()
        .domain(
            "images",
            ElemShape::Image {
                height: 8,
                width: 8,
                channels: 1,
            },
        )
        .predicate("isZero", &["images"], PredicateKind::Given)
        .predicate("zero", &["images"], PredicateKind::Learnable)
        .function("next", &["images"], "images")
        .function("previous", &["images"], "images");

    let data = glyph_dataset(n / 3 + 1, 3);
    let elements: Vec<_> = data.iter().take(n).map(|(t, _)| t.clone()).collect();
    let labels: Vec<usize> = data.iter().take(n).map(|(_, c)| *c).collect();
    let mut domains = DomainSet::new();
    domains.insert(
        Domain::new(
            "images",
            ElemShape::Image {
                height: 8,
                width: 8,
                channels: 1,
            },
            elements,
        )
        .unwrap(),
    );

    let mut bindings = Bindings::new();
    let zero = Mlp::init(
        &mut bindings.store,
        "zero",
        &[GLYPH_PIXELS],
        50,
        1,
        Head::Sigmoid,
        &mut rng,
    );
    let next = Mlp::init(
        &mut bindings.store,
        "next",
        &[GLYPH_PIXELS],
        50,
        GLYPH_PIXELS,
        Head::Sigmoid,
        &mut rng,
    );
    let previous = Mlp::init(
        &mut bindings.store,
        "previous",
        &[GLYPH_PIXELS],
        50,
        GLYPH_PIXELS,
        Head::Sigmoid,
        &mut rng,
    );
    bindings.bind("zero", ModelBinding::Mlp(zero));
    bindings.bind("next", ModelBinding::Mlp(next));
    bindings.bind("previous", ModelBinding::Mlp(previous));
    bindings.bind(
        "isZero",
        ModelBinding::Given(GivenTable::unary_from(n, |i| labels[i] == 0)),
    );

    let compile_src = |src: &str| {
        let typed = validate(&parse_source(src).unwrap(), &sig).unwrap();
        compile(&typed, TNorm::Product, Some(EqualityKind::PixelSimilarity)).unwrap()
    };
    BenchSetup {
        domains,
        bindings,
        supervision: compile_src("forall x: isZero(x) implies zero(x)"),
        generation: compile_src("forall x: zero(x) implies zero(next(x))"),
        cycle: compile_src("forall x: previous(next(x)) = x"),
    }
}
