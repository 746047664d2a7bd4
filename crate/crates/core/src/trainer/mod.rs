//! Optimization loop: builds a training session from a config file,
//! minimizes the weighted constraint cost with Adam, and writes
//! checkpoints and reports.
//!
//! One epoch runs every objective once, in declared order. Per objective:
//! sample groundings, build one graph for all of its constraints (shared
//! subterms are emitted once), backpropagate from the weighted cost, and
//! update only that objective's trainable symbols. Gradients still flow
//! through frozen symbols for the chain rule; their parameters and their
//! optimizer state stay untouched.

mod adam;
mod config;
mod report;

pub use adam::{AdamState, ADAM_EPS, BETA1, BETA2};
pub use config::{
    derive_seed, seed_tags, BindingConfig, DomainConfig, TrainConfig, DEFAULT_BATCH_SIZE,
    DEFAULT_LEARNING_RATE,
};
pub use report::{ConstraintRecord, ObjectiveRecord, TrainReport};

use crate::autodiff::{AutodiffError, Graph, ParamId};
use crate::data::{self, DataError};
use crate::fol::{
    parse_constraint_file, validate, FolError, PredicateKind, Signature, TypedFormula,
};
use crate::grounding::{
    emit_loss, ground, Domain, DomainSet, EmitContext, GroundError, GroundingMode,
};
use crate::loss::{emit_total_cost, CostEmitError, LossError, Objective};
use crate::models::{Bindings, GivenTable, Head, Mlp, ModelBinding, ModelError, RbfClassifier};
use crate::semantics::{compile_with_options, CompileOptions, CompiledConstraint, SemanticsError};
use crate::tensor::Tensor;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("constraint language: {0}")]
    Fol(#[from] FolError),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error(transparent)]
    Ground(#[from] GroundError),
    #[error(transparent)]
    Loss(#[from] LossError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Autodiff(#[from] AutodiffError),
    #[error("unknown symbol '{symbol}' referenced by {site}")]
    UnknownSymbol { symbol: String, site: String },
    #[error("constraint '{name}': {source}")]
    Constraint {
        name: String,
        source: Box<TrainError>,
    },
}

impl From<CostEmitError> for TrainError {
    fn from(e: CostEmitError) -> Self {
        match e {
            CostEmitError::Loss(l) => TrainError::Loss(l),
            CostEmitError::Autodiff(a) => TrainError::Autodiff(a),
        }
    }
}

/// Everything needed to train or evaluate: loaded data, initialized
/// models, compiled constraints, resolved objectives.
pub struct Session {
    pub config: TrainConfig,
    pub base_dir: PathBuf,
    pub signature: Signature,
    pub domains: DomainSet,
    pub bindings: Bindings,
    pub formulas: Vec<TypedFormula>,
    pub constraints: Vec<CompiledConstraint>,
    pub objectives: Vec<Objective>,
}

pub fn load_config(path: &Path) -> Result<TrainConfig, TrainError> {
    let text = std::fs::read_to_string(path)?;
    toml::from_str(&text).map_err(|e| TrainError::Config(format!("{}: {e}", path.display())))
}

/// Parses, validates and compiles everything up front; any unknown
/// symbol, arity error or missing file aborts before training starts.
pub fn build_session(config: TrainConfig, base_dir: &Path) -> Result<Session, TrainError> {
    let signature = Signature {
        predicates: config.predicates.clone(),
        functions: config.functions.clone(),
        domains: config
            .domains
            .iter()
            .map(|(name, d)| (name.clone(), d.shape))
            .collect(),
    };
    signature.check()?;

    let mut domains = DomainSet::new();
    for (name, dcfg) in &config.domains {
        domains.insert(data::load_domain(
            &base_dir.join(&dcfg.file),
            name,
            dcfg.shape,
        )?);
    }

    let bindings = build_bindings(&config, &signature, &domains, base_dir)?;

    // Every declared symbol must be bound before any training.
    for name in signature
        .predicates
        .keys()
        .chain(signature.functions.keys())
    {
        if bindings.get(name).is_none() {
            return Err(TrainError::UnknownSymbol {
                symbol: name.clone(),
                site: "signature (no binding configured)".into(),
            });
        }
    }
    for obj in &config.objectives {
        for symbol in &obj.trainable {
            if bindings.get(symbol).is_none() {
                return Err(TrainError::UnknownSymbol {
                    symbol: symbol.clone(),
                    site: format!("objective '{}'", obj.name),
                });
            }
        }
    }

    let constraints_path = base_dir.join(&config.constraints);
    let text = std::fs::read_to_string(&constraints_path).map_err(|e| {
        TrainError::Config(format!("reading {}: {e}", constraints_path.display()))
    })?;
    let (formulas, constraints) = compile_constraint_text(
        &text,
        &signature,
        config.tnorm,
        config.exists_tnorm,
        config.equality,
    )?;

    let objectives = crate::loss::partition(&constraints, &config.objectives)?;

    Ok(Session {
        config,
        base_dir: base_dir.to_path_buf(),
        signature,
        domains,
        bindings,
        formulas,
        constraints,
        objectives,
    })
}

/// Validates and compiles a whole constraint file against a signature,
/// honoring per-line weight, group and t-norm tags.
pub fn compile_constraint_text(
    text: &str,
    signature: &Signature,
    tnorm: crate::semantics::TNorm,
    exists_tnorm: Option<crate::semantics::TNorm>,
    equality: Option<crate::semantics::EqualityKind>,
) -> Result<(Vec<TypedFormula>, Vec<CompiledConstraint>), TrainError> {
    let lines = parse_constraint_file(text)?;
    let mut formulas = Vec::new();
    let mut constraints = Vec::new();
    for line in &lines {
        let typed = validate(&line.formula, signature)?;
        let mut opts = CompileOptions::new(line.tnorm_override.unwrap_or(tnorm));
        opts.exists_tnorm = exists_tnorm;
        opts.equality = equality;
        let mut compiled = compile_with_options(&typed, &opts)?
            .named(format!("L{:03} {}", line.line_no, line.source))
            .weighted(line.weight);
        compiled.group = line.group.clone();
        formulas.push(typed);
        constraints.push(compiled);
    }
    Ok((formulas, constraints))
}

fn build_bindings(
    config: &TrainConfig,
    signature: &Signature,
    domains: &DomainSet,
    base_dir: &Path,
) -> Result<Bindings, TrainError> {
    let mut bindings = Bindings::new();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.master_seed, seed_tags::INIT, 0, 0));

    let given_rows = match &config.givens_file {
        Some(f) => data::read_givens_csv(&base_dir.join(f))?,
        None => Vec::new(),
    };

    // Shared RBF groups first: classes and membership collected across
    // bindings, then one classifier per group.
    let mut rbf_groups: BTreeMap<String, Vec<(String, usize, Option<usize>)>> = BTreeMap::new();
    for (symbol, bcfg) in &config.bindings {
        if let BindingConfig::Rbf {
            group,
            class_index,
            centers_per_class,
        } = bcfg
        {
            rbf_groups.entry(group.clone()).or_default().push((
                symbol.clone(),
                *class_index,
                *centers_per_class,
            ));
        }
    }
    let mut rbf_models: BTreeMap<String, std::sync::Arc<RbfClassifier>> = BTreeMap::new();
    for (group, members) in &rbf_groups {
        let classes = members.iter().map(|(_, c, _)| c + 1).max().unwrap_or(1);
        let per_class = members
            .iter()
            .filter_map(|(_, _, c)| *c)
            .next()
            .unwrap_or(crate::models::rbf::DEFAULT_CENTERS_PER_CLASS);
        let (symbol, _, _) = &members[0];
        let decl = signature
            .predicates
            .get(symbol)
            .ok_or_else(|| TrainError::UnknownSymbol {
                symbol: symbol.clone(),
                site: "bindings".into(),
            })?;
        if decl.domains.len() != 1 {
            return Err(TrainError::Config(format!(
                "rbf-bound predicate '{symbol}' must be unary"
            )));
        }
        let domain = domains.get(&decl.domains[0]).expect("validated signature");
        let model = RbfClassifier::init(
            &mut bindings.store,
            &format!("rbf.{group}"),
            domain.shape.volume(),
            classes,
            classes * per_class,
            domain.elements(),
            &mut rng,
        )?;
        rbf_models.insert(group.clone(), std::sync::Arc::new(model));
    }

    // MLPs that donate a first layer must exist before their sharers.
    let mut deferred: Vec<(&String, &String)> = Vec::new();
    for (symbol, bcfg) in &config.bindings {
        match bcfg {
            BindingConfig::Mlp {
                hidden,
                share_first_layer_with,
            } => {
                if let Some(donor) = share_first_layer_with {
                    deferred.push((symbol, donor));
                    continue;
                }
                let mlp = init_mlp(
                    symbol,
                    hidden.unwrap_or(crate::models::mlp::DEFAULT_HIDDEN),
                    signature,
                    &mut bindings,
                    &mut rng,
                )?;
                bindings.bind(symbol, ModelBinding::Mlp(mlp));
            }
            BindingConfig::Rbf {
                group, class_index, ..
            } => {
                let model = rbf_models.get(group).expect("group collected").clone();
                bindings.bind(
                    symbol,
                    ModelBinding::Rbf {
                        model,
                        output: *class_index,
                    },
                );
            }
            BindingConfig::Given {} | BindingConfig::Fixed {} => {
                let table = build_table(symbol, bcfg, signature, domains, &given_rows)?;
                let binding = match bcfg {
                    BindingConfig::Given {} => ModelBinding::Given(table),
                    _ => ModelBinding::Fixed(table),
                };
                bindings.bind(symbol, binding);
            }
        }
    }
    for (symbol, donor) in deferred {
        let donor_mlp = match bindings.get(donor) {
            Some(ModelBinding::Mlp(m)) => m.clone(),
            _ => {
                return Err(TrainError::Config(format!(
                    "'{symbol}' shares its first layer with '{donor}', which is not an mlp binding"
                )))
            }
        };
        let (out_dim, head) = mlp_output(symbol, signature)?;
        let mlp = Mlp::init_sharing_first_layer(
            &mut bindings.store,
            symbol,
            &donor_mlp,
            out_dim,
            head,
            &mut rng,
        );
        bindings.bind(symbol, ModelBinding::Mlp(mlp));
    }
    Ok(bindings)
}

fn mlp_output(symbol: &str, signature: &Signature) -> Result<(usize, Head), TrainError> {
    if signature.predicates.contains_key(symbol) {
        return Ok((1, Head::Sigmoid));
    }
    let decl = signature
        .functions
        .get(symbol)
        .ok_or_else(|| TrainError::UnknownSymbol {
            symbol: symbol.to_string(),
            site: "bindings".into(),
        })?;
    let out_shape = signature.domains[&decl.output];
    let head = if out_shape.is_image() {
        Head::Sigmoid
    } else {
        Head::Linear
    };
    Ok((out_shape.volume(), head))
}

fn init_mlp(
    symbol: &str,
    hidden: usize,
    signature: &Signature,
    bindings: &mut Bindings,
    rng: &mut ChaCha8Rng,
) -> Result<Mlp, TrainError> {
    let in_dims: Vec<usize> = if let Some(p) = signature.predicates.get(symbol) {
        p.domains
            .iter()
            .map(|d| signature.domains[d].volume())
            .collect()
    } else if let Some(f) = signature.functions.get(symbol) {
        f.inputs
            .iter()
            .map(|d| signature.domains[d].volume())
            .collect()
    } else {
        return Err(TrainError::UnknownSymbol {
            symbol: symbol.to_string(),
            site: "bindings".into(),
        });
    };
    let (out_dim, head) = mlp_output(symbol, signature)?;
    Ok(Mlp::init(
        &mut bindings.store,
        symbol,
        &in_dims,
        hidden,
        out_dim,
        head,
        rng,
    ))
}

fn build_table(
    symbol: &str,
    bcfg: &BindingConfig,
    signature: &Signature,
    domains: &DomainSet,
    rows: &[data::GivenRow],
) -> Result<GivenTable, TrainError> {
    let decl = signature
        .predicates
        .get(symbol)
        .ok_or_else(|| TrainError::UnknownSymbol {
            symbol: symbol.to_string(),
            site: "bindings (given tables back predicates)".into(),
        })?;
    if decl.kind != PredicateKind::Given {
        return Err(TrainError::Config(format!(
            "'{symbol}' is bound to a table but declared learnable"
        )));
    }
    let dims: Vec<usize> = decl
        .domains
        .iter()
        .map(|d| domains.get(d).map(|dom| dom.len()).unwrap_or(0))
        .collect();
    let volume: usize = dims.iter().product();
    let mut values = vec![0.0; volume];
    for (element, predicate, value) in rows {
        if predicate != symbol {
            continue;
        }
        if element.len() != dims.len() {
            return Err(TrainError::Config(format!(
                "given row for '{symbol}' has {} indices, predicate takes {}",
                element.len(),
                dims.len()
            )));
        }
        let mut flat = 0usize;
        for (&idx, &dim) in element.iter().zip(&dims) {
            if idx >= dim {
                return Err(TrainError::Config(format!(
                    "given row for '{symbol}' indexes element {idx} of a {dim}-element domain"
                )));
            }
            flat = flat * dim + idx;
        }
        values[flat] = *value;
    }
    let table = match bcfg {
        BindingConfig::Fixed {} => GivenTable::fuzzy(dims, values)?,
        _ => GivenTable::crisp(dims, values)?,
    };
    Ok(table)
}

/// One objective's optimizer step on one epoch's groundings.
struct StepOutcome {
    cost: f64,
    records: Vec<ConstraintRecord>,
}

fn objective_step(
    session: &mut Session,
    objective_index: usize,
    epoch: usize,
    adam: &mut AdamState,
) -> Result<StepOutcome, TrainError> {
    let mapping = session.config.resolved_mapping();
    let mut graph = Graph::new();
    let mut ctx = EmitContext::new();
    let mut items = Vec::new();
    let mut records = Vec::new();
    let objective = &session.objectives[objective_index];
    for &ci in &objective.constraints {
        let constraint = &session.constraints[ci];
        let mode = grounding_mode(&session.config, epoch);
        let emitted = (|| -> Result<_, TrainError> {
            let table = ground(constraint, &session.domains, mode, session.config.row_cap)?;
            Ok(emit_loss(
                &mut graph,
                &mut ctx,
                constraint,
                &table,
                &session.domains,
                &session.bindings,
                mapping,
            )?)
        })()
        .map_err(|e| TrainError::Constraint {
            name: constraint.name.clone(),
            source: Box::new(e),
        })?;
        items.push((constraint.weight, emitted.loss));
        records.push(ConstraintRecord {
            epoch,
            constraint: constraint.name.clone(),
            phi: emitted.phi,
            mean_truth: emitted.mean_row_truth,
            loss: graph.scalar_value(emitted.loss),
        });
    }
    let cost = emit_total_cost(&mut graph, &items)?;
    let cost_value = graph.scalar_value(cost);
    graph.backward(cost)?;

    let trainable: BTreeSet<ParamId> = objective
        .trainable
        .iter()
        .flat_map(|s| session.bindings.params_of(s))
        .collect();
    let grads: Vec<(ParamId, Tensor)> = graph
        .param_grads()
        .into_iter()
        .filter(|(id, _)| trainable.contains(id))
        .collect();
    adam.step(&mut session.bindings.store, &grads)?;
    Ok(StepOutcome {
        cost: cost_value,
        records,
    })
}

/// All constraints of an epoch share one sampler seed, so universals over
/// the same domain draw the same elements and the emitter's caches share
/// model forwards across constraints.
fn grounding_mode(config: &TrainConfig, epoch: usize) -> GroundingMode {
    if config.exhaustive || config.batch_size == 0 {
        GroundingMode::Exhaustive
    } else {
        GroundingMode::Minibatch {
            size: config.batch_size,
            seed: derive_seed(config.master_seed, seed_tags::MINIBATCH, epoch as u64, 0),
        }
    }
}

/// Runs the configured number of epochs (or stops early once every
/// constraint's mean truth clears the threshold), checkpointing along the
/// way when an output directory is set.
pub fn train_session(session: &mut Session) -> Result<TrainReport, TrainError> {
    let started = std::time::Instant::now();
    // One optimizer per objective: adversarial players keep separate
    // moments and may declare their own learning rate.
    let mut optimizers: Vec<AdamState> = session
        .objectives
        .iter()
        .map(|o| AdamState::new(o.learning_rate.unwrap_or(session.config.learning_rate)))
        .collect();
    let mut report = TrainReport::default();
    let out_dir = session
        .config
        .output_dir
        .clone()
        .map(|d| session.base_dir.join(d));
    if let Some(dir) = &out_dir {
        std::fs::create_dir_all(dir)?;
    }

    for epoch in 0..session.config.epochs {
        let mut epoch_min_truth = f64::INFINITY;
        for (oi, optimizer) in optimizers.iter_mut().enumerate() {
            let outcome = objective_step(session, oi, epoch, optimizer)?;
            for r in &outcome.records {
                epoch_min_truth = epoch_min_truth.min(r.mean_truth);
            }
            report.per_objective.push(ObjectiveRecord {
                epoch,
                objective: session.objectives[oi].name.clone(),
                cost: outcome.cost,
            });
            report.per_constraint.extend(outcome.records);
        }
        report.epochs_run = epoch + 1;

        if let Some(dir) = &out_dir {
            let every = session.config.checkpoint_every;
            if every > 0 && (epoch + 1) % every == 0 {
                data::save_checkpoint(
                    &dir.join(format!("checkpoint_{:05}.json", epoch + 1)),
                    &session.bindings.store,
                    session.config.master_seed,
                    epoch + 1,
                )?;
            }
        }
        if let Some(threshold) = session.config.early_stop_truth {
            if epoch_min_truth > threshold {
                break;
            }
        }
    }

    report.wall_time_secs = started.elapsed().as_secs_f64();
    if let Some(dir) = &out_dir {
        data::save_checkpoint(
            &dir.join("checkpoint_final.json"),
            &session.bindings.store,
            session.config.master_seed,
            report.epochs_run,
        )?;
        report.save(&dir.join("report.json"))?;
        std::fs::write(
            dir.join("timing.log"),
            format!("wall_time_secs={}\n", report.wall_time_secs),
        )?;
    }
    Ok(report)
}

/// Convenience: load config, build the session, train.
pub fn train_from_file(config_path: &Path) -> Result<(Session, TrainReport), TrainError> {
    let config = load_config(config_path)?;
    let base = config_path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let mut session = build_session(config, &base)?;
    let report = train_session(&mut session)?;
    Ok((session, report))
}

/// Truth degrees of every constraint over the session's data, ground
/// exhaustively.
pub fn evaluate_constraints(session: &Session) -> Result<Vec<ConstraintRecord>, TrainError> {
    let domains = &session.domains;
    let mapping = session.config.resolved_mapping();
    let mut out = Vec::new();
    for constraint in &session.constraints {
        let mut graph = Graph::new();
        let mut ctx = EmitContext::new();
        let table = ground(
            constraint,
            domains,
            GroundingMode::Exhaustive,
            session.config.row_cap,
        )
        .map_err(|e| TrainError::Constraint {
            name: constraint.name.clone(),
            source: Box::new(e.into()),
        })?;
        let emitted = emit_loss(
            &mut graph,
            &mut ctx,
            constraint,
            &table,
            domains,
            &session.bindings,
            mapping,
        )
        .map_err(|e| TrainError::Constraint {
            name: constraint.name.clone(),
            source: Box::new(e.into()),
        })?;
        out.push(ConstraintRecord {
            epoch: 0,
            constraint: constraint.name.clone(),
            phi: emitted.phi,
            mean_truth: emitted.mean_row_truth,
            loss: graph.scalar_value(emitted.loss),
        });
    }
    Ok(out)
}

/// Finite-difference gradient verification of every constraint on a small
/// seeded grounding. When a sampled grounding constant-folds away (all
/// premises false in the batch, say), the check escalates to an
/// exhaustive grounding so every constraint actually exercises its
/// models.
pub fn gradcheck_session(
    session: &Session,
    batch: usize,
    h: f64,
    tolerance: f64,
) -> Result<Vec<(String, crate::autodiff::GradCheckReport)>, TrainError> {
    let mut out = Vec::new();
    for (ci, constraint) in session.constraints.iter().enumerate() {
        let modes = [
            GroundingMode::Minibatch {
                size: batch,
                seed: derive_seed(
                    session.config.master_seed,
                    seed_tags::GRADCHECK,
                    ci as u64,
                    0,
                ),
            },
            GroundingMode::Exhaustive,
        ];
        let mut last = None;
        for mode in modes {
            let table = ground(constraint, &session.domains, mode, session.config.row_cap)?;
            let mut graph = Graph::new();
            let mut ctx = EmitContext::new();
            let emitted = emit_loss(
                &mut graph,
                &mut ctx,
                constraint,
                &table,
                &session.domains,
                &session.bindings,
                session.config.resolved_mapping(),
            )?;
            let report = crate::autodiff::check_gradients(&mut graph, emitted.loss, h, tolerance)?;
            let done = report.checked > 0;
            last = Some(report);
            if done {
                break;
            }
        }
        out.push((
            constraint.name.clone(),
            last.expect("at least one mode ran"),
        ));
    }
    Ok(out)
}

/// Loads checkpoint parameters into the session's store.
pub fn restore_session(session: &mut Session, checkpoint: &Path) -> Result<(), TrainError> {
    let ckpt = data::load_checkpoint(checkpoint)?;
    data::restore_params(&mut session.bindings.store, &ckpt)?;
    Ok(())
}

/// Rebuilds domains needed when constructing sessions outside configs.
pub fn domain_from_tensors(
    name: &str,
    shape: crate::fol::ElemShape,
    elements: Vec<Tensor>,
) -> Result<Domain, TrainError> {
    Ok(Domain::new(name, shape, elements)?)
}
