//! Fixtures shared by the integration suites: model bindings and domains
//! for the generator signature, and hand-built training sessions.

#![allow(dead_code)]

use fuzzyc_core::fol::gen::test_signature;
use fuzzyc_core::fol::{ElemShape, Signature};
use fuzzyc_core::grounding::{Domain, DomainSet};
use fuzzyc_core::loss::{partition, ObjectiveSpec};
use fuzzyc_core::models::{Bindings, GivenTable, Head, Mlp, ModelBinding};
use fuzzyc_core::semantics::{EqualityKind, TNorm};
use fuzzyc_core::tensor::Tensor;
use fuzzyc_core::trainer::{
    compile_constraint_text, DomainConfig, Session, TrainConfig, TrainError,
};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

/// Domains `da`/`db` from the generator signature, with random elements.
pub fn gen_domains(n_a: usize, n_b: usize, seed: u64) -> DomainSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut random_domain = |name: &str, n: usize, dim: usize| {
        let elements = (0..n)
            .map(|_| Tensor::vector((0..dim).map(|_| rng.random_range(0.0..1.0)).collect()))
            .collect();
        Domain::new(name, ElemShape::Vector { len: dim }, elements).unwrap()
    };
    let mut ds = DomainSet::new();
    ds.insert(random_domain("da", n_a, 3));
    ds.insert(random_domain("db", n_b, 2));
    ds
}

/// Random small models for every symbol of the generator signature.
pub fn gen_bindings(n_a: usize, seed: u64) -> Bindings {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut b = Bindings::new();
    let p = Mlp::init(&mut b.store, "p", &[3], 6, 1, Head::Sigmoid, &mut rng);
    let q = Mlp::init(&mut b.store, "q", &[2], 6, 1, Head::Sigmoid, &mut rng);
    let r = Mlp::init(&mut b.store, "r", &[3, 3], 6, 1, Head::Sigmoid, &mut rng);
    let f = Mlp::init(&mut b.store, "f", &[3], 5, 3, Head::Sigmoid, &mut rng);
    let g = Mlp::init(&mut b.store, "g", &[3], 5, 2, Head::Sigmoid, &mut rng);
    let h = Mlp::init(&mut b.store, "h", &[2], 5, 3, Head::Sigmoid, &mut rng);
    b.bind("p", ModelBinding::Mlp(p));
    b.bind("q", ModelBinding::Mlp(q));
    b.bind("r", ModelBinding::Mlp(r));
    b.bind("f", ModelBinding::Mlp(f));
    b.bind("g", ModelBinding::Mlp(g));
    b.bind("h", ModelBinding::Mlp(h));
    let s_values: Vec<f64> = (0..n_a).map(|_| f64::from(rng.random_bool(0.5))).collect();
    b.bind(
        "s",
        ModelBinding::Given(GivenTable::crisp(vec![n_a], s_values).unwrap()),
    );
    b
}

pub fn gen_sig() -> Signature {
    test_signature()
}

/// Minimal config for hand-built sessions; the file paths are never read.
pub fn manual_config(seed: u64, tnorm: TNorm, epochs: usize, lr: f64) -> TrainConfig {
    TrainConfig {
        master_seed: seed,
        tnorm,
        mapping: None,
        exists_tnorm: None,
        equality: Some(EqualityKind::PixelSimilarity),
        epochs,
        learning_rate: lr,
        batch_size: 0,
        exhaustive: true,
        early_stop_truth: None,
        checkpoint_every: 0,
        row_cap: fuzzyc_core::grounding::DEFAULT_ROW_CAP,
        constraints: "unused.fol".into(),
        output_dir: None,
        domains: BTreeMap::from([(
            "unused".to_string(),
            DomainConfig {
                shape: ElemShape::Vector { len: 1 },
                file: "unused.csv".into(),
            },
        )]),
        predicates: BTreeMap::new(),
        functions: BTreeMap::new(),
        bindings: BTreeMap::new(),
        givens_file: None,
        objectives: Vec::new(),
    }
}

/// A session assembled from in-memory parts, bypassing the file layer.
pub fn manual_session(
    mut config: TrainConfig,
    signature: Signature,
    domains: DomainSet,
    bindings: Bindings,
    constraint_text: &str,
    objectives: Vec<ObjectiveSpec>,
) -> Result<Session, TrainError> {
    let (formulas, constraints) = compile_constraint_text(
        constraint_text,
        &signature,
        config.tnorm,
        config.exists_tnorm,
        config.equality,
    )?;
    let resolved = partition(&constraints, &objectives)?;
    config.objectives = objectives;
    Ok(Session {
        config,
        base_dir: std::env::temp_dir(),
        signature,
        domains,
        bindings,
        formulas,
        constraints,
        objectives: resolved,
    })
}

/// Scratch directory unique to a test, cleaned up by the caller if needed.
pub fn scratch_dir(tag: &str) -> std::path::PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("fuzzyc-test-{}-{}", std::process::id(), tag));
    std::fs::create_dir_all(&p).unwrap();
    p
}
