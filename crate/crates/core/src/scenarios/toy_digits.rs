//! The next/previous digit task: two generator networks trained with no
//! direct supervision, only through jointly learned classifiers, a
//! similarity requirement and cycle consistency, over a circular
//! class mapping (next of 2 is 0, previous of 0 is 2).

use super::glyphs::{glyph_dataset, GLYPH_CLASSES, GLYPH_PIXELS, GLYPH_SIDE};
use crate::data::{self, GivenRow};
use crate::fol::{ElemShape, FunctionDecl, PredicateDecl, PredicateKind};
use crate::loss::ObjectiveSpec;
use crate::models::ModelBinding;
use crate::semantics::TNorm;
use crate::tensor::Tensor;
use crate::trainer::{
    build_session, train_session, BindingConfig, DomainConfig, Session, TrainConfig, TrainError,
    TrainReport,
};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub const CONSTRAINTS: &str = include_str!("../../../../scenarios/toy_digits/constraints.fol");

/// Defaults sized for a few-minute CPU run.
pub const DEFAULT_PER_CLASS: usize = 1500;
const TRAIN_FRACTION: f64 = 0.8;

#[derive(Debug, Clone)]
pub struct ToyOutcome {
    pub report: TrainReport,
    /// Fraction of test inputs of class c whose next(x) the discriminator
    /// assigns class (c+1) mod 3.
    pub next_accuracy: f64,
    /// Same for previous(x) and (c−1) mod 3.
    pub prev_accuracy: f64,
    /// Mean absolute pixel error of previous(next(x)) against x.
    pub cycle_prev_next_err: f64,
    /// Mean absolute pixel error of next(previous(x)) against x.
    pub cycle_next_prev_err: f64,
    /// Fraction of test inputs with next³(x) classified as x's class.
    pub circular_accuracy: f64,
    pub grid_path: PathBuf,
    pub output_dir: PathBuf,
}

/// Writes the scenario assets (data, givens, constraints, config) into
/// `dir` and returns the config path.
pub fn write_scenario(
    dir: &Path,
    seed: u64,
    per_class: usize,
    epochs: usize,
) -> Result<(PathBuf, Vec<(Tensor, usize)>), TrainError> {
    std::fs::create_dir_all(dir)?;
    let data_all = glyph_dataset(per_class, seed);
    let split = (data_all.len() as f64 * TRAIN_FRACTION) as usize;
    let (train, test) = data_all.split_at(split);

    let train_tensors: Vec<Tensor> = train.iter().map(|(t, _)| t.clone()).collect();
    let test_tensors: Vec<Tensor> = test.iter().map(|(t, _)| t.clone()).collect();
    data::write_domain_csv(&dir.join("train.csv"), &train_tensors)?;
    data::write_domain_csv(&dir.join("test.csv"), &test_tensors)?;

    let mut givens: Vec<GivenRow> = Vec::new();
    for (i, (_, class)) in train.iter().enumerate() {
        let name = ["isZero", "isOne", "isTwo"][*class];
        givens.push((vec![i], name.to_string(), 1.0));
    }
    data::write_givens_csv(&dir.join("givens.csv"), &givens)?;
    std::fs::write(dir.join("constraints.fol"), CONSTRAINTS)?;

    let config = toy_config(seed, epochs);
    let config_path = dir.join("config.toml");
    std::fs::write(&config_path, config.to_toml())?;
    Ok((config_path, test.to_vec()))
}

fn toy_config(seed: u64, epochs: usize) -> TrainConfig {
    let image = ElemShape::Image {
        height: GLYPH_SIDE,
        width: GLYPH_SIDE,
        channels: 1,
    };
    let mut predicates = BTreeMap::new();
    for name in ["zero", "one", "two"] {
        predicates.insert(
            name.to_string(),
            PredicateDecl {
                domains: vec!["images".into()],
                kind: PredicateKind::Learnable,
            },
        );
    }
    for name in ["isZero", "isOne", "isTwo"] {
        predicates.insert(
            name.to_string(),
            PredicateDecl {
                domains: vec!["images".into()],
                kind: PredicateKind::Given,
            },
        );
    }
    let mut functions = BTreeMap::new();
    for name in ["next", "previous"] {
        functions.insert(
            name.to_string(),
            FunctionDecl {
                inputs: vec!["images".into()],
                output: "images".into(),
            },
        );
    }
    let mut bindings = BTreeMap::new();
    for (i, name) in ["zero", "one", "two"].iter().enumerate() {
        bindings.insert(
            name.to_string(),
            BindingConfig::Rbf {
                group: "digits".into(),
                class_index: i,
                centers_per_class: Some(30),
            },
        );
    }
    for name in ["isZero", "isOne", "isTwo"] {
        bindings.insert(name.to_string(), BindingConfig::Given {});
    }
    for name in ["next", "previous"] {
        bindings.insert(
            name.to_string(),
            BindingConfig::Mlp {
                hidden: Some(50),
                share_first_layer_with: None,
            },
        );
    }
    TrainConfig {
        master_seed: seed,
        tnorm: TNorm::Product,
        mapping: None,
        exists_tnorm: None,
        equality: Some(crate::semantics::EqualityKind::PixelSimilarity),
        epochs,
        learning_rate: 0.002,
        batch_size: 64,
        exhaustive: false,
        early_stop_truth: Some(0.93),
        checkpoint_every: 0,
        row_cap: crate::grounding::DEFAULT_ROW_CAP,
        constraints: "constraints.fol".into(),
        output_dir: Some("out".into()),
        domains: BTreeMap::from([(
            "images".to_string(),
            DomainConfig {
                shape: image,
                file: "train.csv".into(),
            },
        )]),
        predicates,
        functions,
        bindings,
        givens_file: Some("givens.csv".into()),
        objectives: vec![ObjectiveSpec {
            name: "models".into(),
            groups: vec!["main".into()],
            trainable: vec![
                "next".into(),
                "previous".into(),
                "zero".into(),
                "one".into(),
                "two".into(),
            ],
            learning_rate: None,
        }],
    }
}

/// Trains the full constraint set and measures the generators on held-out
/// glyphs; writes an image grid of (input, next, previous) rows.
pub fn run_toy_digits(dir: &Path, seed: u64) -> Result<ToyOutcome, TrainError> {
    run_toy_digits_sized(dir, seed, DEFAULT_PER_CLASS, 5000)
}

pub fn run_toy_digits_sized(
    dir: &Path,
    seed: u64,
    per_class: usize,
    epochs: usize,
) -> Result<ToyOutcome, TrainError> {
    let (config_path, test) = write_scenario(dir, seed, per_class, epochs)?;
    let config = crate::trainer::load_config(&config_path)?;
    let mut session = build_session(config, dir)?;
    let report = train_session(&mut session)?;
    let metrics = measure(&session, &test, dir)?;
    Ok(ToyOutcome {
        report,
        next_accuracy: metrics.0,
        prev_accuracy: metrics.1,
        cycle_prev_next_err: metrics.2,
        cycle_next_prev_err: metrics.3,
        circular_accuracy: metrics.4,
        grid_path: dir.join("out").join("generation_grid.pgm"),
        output_dir: dir.join("out"),
    })
}

fn model<'s>(session: &'s Session, symbol: &str) -> Result<&'s ModelBinding, TrainError> {
    session
        .bindings
        .get(symbol)
        .ok_or_else(|| TrainError::UnknownSymbol {
            symbol: symbol.to_string(),
            site: "toy metrics".into(),
        })
}

fn measure(
    session: &Session,
    test: &[(Tensor, usize)],
    dir: &Path,
) -> Result<(f64, f64, f64, f64, f64), TrainError> {
    let next = match model(session, "next")? {
        ModelBinding::Mlp(m) => m.clone(),
        _ => unreachable!("toy config binds next to an mlp"),
    };
    let prev = match model(session, "previous")? {
        ModelBinding::Mlp(m) => m.clone(),
        _ => unreachable!(),
    };
    let rbf = match model(session, "zero")? {
        ModelBinding::Rbf { model, .. } => model.clone(),
        _ => unreachable!("toy config binds digits to a shared rbf"),
    };
    let store = &session.bindings.store;

    let mut next_hits = 0usize;
    let mut prev_hits = 0usize;
    let mut circ_hits = 0usize;
    let mut cycle_pn = 0.0;
    let mut cycle_np = 0.0;
    for (img, class) in test {
        let n = next.apply(store, &[img])?;
        let p = prev.apply(store, &[img])?;
        if rbf.classify(store, &n)? == (class + 1) % GLYPH_CLASSES {
            next_hits += 1;
        }
        if rbf.classify(store, &p)? == (class + 2) % GLYPH_CLASSES {
            prev_hits += 1;
        }
        let pn = prev.apply(store, &[&n])?;
        let np = next.apply(store, &[&p])?;
        cycle_pn += mean_abs_err(&pn, img);
        cycle_np += mean_abs_err(&np, img);
        let n3 = next.apply(store, &[&next.apply(store, &[&n])?])?;
        if rbf.classify(store, &n3)? == *class {
            circ_hits += 1;
        }
    }
    let count = test.len() as f64;

    // Fig-style grid: one row per class, columns input | next | previous.
    let mut rows = Vec::new();
    let mut tiles_store: Vec<(Tensor, Tensor, Tensor)> = Vec::new();
    for class in 0..GLYPH_CLASSES {
        if let Some((img, _)) = test.iter().find(|(_, c)| *c == class) {
            let n = next.apply(store, &[img])?;
            let p = prev.apply(store, &[img])?;
            tiles_store.push((img.clone(), n, p));
        }
    }
    for (i, n, p) in &tiles_store {
        rows.push(vec![i, n, p]);
    }
    let (w, h, pixels) = data::compose_grid(&rows, GLYPH_SIDE, GLYPH_SIDE);
    let out_dir = dir.join("out");
    std::fs::create_dir_all(&out_dir)?;
    data::write_pgm(&out_dir.join("generation_grid.pgm"), w, h, &pixels)?;

    Ok((
        next_hits as f64 / count,
        prev_hits as f64 / count,
        cycle_pn / count,
        cycle_np / count,
        circ_hits as f64 / count,
    ))
}

fn mean_abs_err(a: &Tensor, b: &Tensor) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .sum::<f64>()
        / GLYPH_PIXELS as f64
}
