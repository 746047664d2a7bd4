//! fuzzyc: compile first-order constraint files into differentiable
//! templates, train the bound models, evaluate truth degrees, check
//! gradients, and materialize the shipped scenarios.

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use fuzzyc_core::fol::{
    infer_signature, parse_constraint_file, ElemShape, Formula, FunctionDecl, PredicateDecl,
    Signature,
};
use fuzzyc_core::scenarios;
use fuzzyc_core::semantics::{EqualityKind, TNorm};
use fuzzyc_core::trainer::{
    build_session, compile_constraint_text, evaluate_constraints, gradcheck_session, load_config,
    restore_session, train_session,
};
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "fuzzyc", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse, validate and compile a constraint file; print a template
    /// summary per constraint.
    Compile {
        /// Constraint file (one formula per line).
        constraints: PathBuf,
        /// T-norm: goedel, lukasiewicz or product.
        #[arg(long, default_value = "product")]
        tnorm: String,
        /// Validate and report, exit non-zero on the first error.
        #[arg(long)]
        check: bool,
        /// Signature file (TOML with [domains], [predicates],
        /// [functions]); inferred from usage when omitted.
        #[arg(long)]
        signature: Option<PathBuf>,
    },
    /// Train the models named in a config file.
    Train {
        #[arg(long)]
        config: PathBuf,
    },
    /// Report per-constraint truth degrees under a trained checkpoint.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        /// Constraint file overriding the one in the config.
        #[arg(long)]
        constraints: Option<PathBuf>,
        #[arg(long)]
        config: PathBuf,
    },
    /// Compare backward-pass gradients against central finite
    /// differences for every configured constraint.
    Gradcheck {
        #[arg(long)]
        config: PathBuf,
        /// Minibatch rows per universal variable.
        #[arg(long, default_value_t = 4)]
        batch: usize,
    },
    /// Write a shipped scenario's data, constraints and config to a
    /// directory (optionally training it right away).
    Scenario {
        /// One of: married-republican, toy-digits, faces.
        name: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Also run the scenario's training and print its metrics.
        #[arg(long)]
        run: bool,
    },
}

#[derive(Deserialize, Default)]
struct SignatureFile {
    #[serde(default)]
    domains: BTreeMap<String, ElemShape>,
    #[serde(default)]
    predicates: BTreeMap<String, PredicateDecl>,
    #[serde(default)]
    functions: BTreeMap<String, FunctionDecl>,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Compile {
            constraints,
            tnorm,
            check,
            signature,
        } => compile_cmd(&constraints, &tnorm, check, signature.as_deref()),
        Command::Train { config } => train_cmd(&config),
        Command::Eval {
            checkpoint,
            constraints,
            config,
        } => eval_cmd(&checkpoint, constraints.as_deref(), &config),
        Command::Gradcheck { config, batch } => gradcheck_cmd(&config, batch),
        Command::Scenario {
            name,
            out,
            seed,
            run,
        } => scenario_cmd(&name, &out, seed, run),
    }
}

fn parse_tnorm(name: &str) -> Result<TNorm> {
    TNorm::from_name(name)
        .with_context(|| format!("unknown t-norm '{name}' (goedel, lukasiewicz, product)"))
}

fn compile_cmd(
    constraints: &Path,
    tnorm: &str,
    check: bool,
    signature: Option<&Path>,
) -> Result<()> {
    let tnorm = parse_tnorm(tnorm)?;
    let text = std::fs::read_to_string(constraints)
        .with_context(|| format!("reading {}", constraints.display()))?;
    let lines = parse_constraint_file(&text)?;
    if lines.is_empty() {
        bail!("{} contains no constraints", constraints.display());
    }

    let sig = match signature {
        Some(path) => {
            let raw = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let file: SignatureFile = toml::from_str(&raw)?;
            Signature {
                domains: file.domains,
                predicates: file.predicates,
                functions: file.functions,
            }
        }
        None => {
            let formulas: Vec<&Formula> = lines.iter().map(|l| &l.formula).collect();
            let sig = infer_signature(&formulas)?;
            println!("signature inferred from usage:");
            for (name, decl) in &sig.predicates {
                println!("  predicate {name}({})", decl.domains.join(", "));
            }
            for (name, decl) in &sig.functions {
                println!(
                    "  function  {name}({}) -> {}",
                    decl.inputs.join(", "),
                    decl.output
                );
            }
            println!();
            sig
        }
    };

    let (_, compiled) = compile_constraint_text(
        &text,
        &sig,
        tnorm,
        None,
        Some(EqualityKind::PixelSimilarity),
    )?;
    for c in &compiled {
        let plan: Vec<String> = c
            .plan
            .iter()
            .map(|s| format!("{} {} in {}", s.quantifier, s.var, s.domain))
            .collect();
        println!("{}", c.name);
        println!(
            "  tnorm={} weight={} group={} slots={} plan=[{}]",
            c.tnorm,
            c.weight,
            c.group.as_deref().unwrap_or("main"),
            c.slots.len(),
            plan.join(", ")
        );
    }
    println!(
        "{} constraint(s) compiled under {}{}",
        compiled.len(),
        tnorm,
        if check { "; all checks passed" } else { "" }
    );
    Ok(())
}

fn train_cmd(config_path: &Path) -> Result<()> {
    let config = load_config(config_path)?;
    let base = config_path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let epochs = config.epochs;
    let mut session = build_session(config, &base)?;
    println!(
        "training {} constraint(s), {} objective(s), {} epochs",
        session.constraints.len(),
        session.objectives.len(),
        epochs
    );
    let report = train_session(&mut session)?;
    let stride = (report.epochs_run / 20).max(1);
    for rec in report
        .per_objective
        .iter()
        .filter(|r| r.epoch % stride == 0 || r.epoch + 1 == report.epochs_run)
    {
        println!(
            "epoch {:>5}  objective {:<14} cost {:.6}",
            rec.epoch, rec.objective, rec.cost
        );
    }
    println!(
        "finished after {} epoch(s) in {:.1}s",
        report.epochs_run, report.wall_time_secs
    );
    for rec in report.last_epoch() {
        println!("  {:<60} truth {:.4}", rec.constraint, rec.mean_truth);
    }
    if let Some(dir) = &session.config.output_dir {
        println!(
            "checkpoint and report written under {}",
            session.base_dir.join(dir).display()
        );
    }
    Ok(())
}

fn eval_cmd(checkpoint: &Path, constraints: Option<&Path>, config_path: &Path) -> Result<()> {
    let mut config = load_config(config_path)?;
    let base = config_path.parent().unwrap_or(Path::new(".")).to_path_buf();
    if let Some(file) = constraints {
        // The config's own paths resolve against the config directory; an
        // override given on the command line resolves against the caller.
        let absolute = std::path::absolute(file)
            .with_context(|| format!("resolving {}", file.display()))?;
        config.constraints = absolute
            .to_str()
            .context("constraint path is not valid UTF-8")?
            .to_string();
        // Evaluation needs no training partition; claim every group the
        // override file mentions so it builds regardless of the config's
        // objectives.
        let text = std::fs::read_to_string(&absolute)
            .with_context(|| format!("reading {}", absolute.display()))?;
        let mut groups: Vec<String> = parse_constraint_file(&text)?
            .into_iter()
            .map(|l| l.group.unwrap_or_else(|| "main".into()))
            .collect();
        groups.sort();
        groups.dedup();
        config.objectives = vec![fuzzyc_core::loss::ObjectiveSpec {
            name: "eval".into(),
            groups,
            trainable: Vec::new(),
            learning_rate: None,
        }];
    }
    let mut session = build_session(config, &base)?;
    restore_session(&mut session, checkpoint)?;
    println!(
        "constraint truth on {} (exhaustive grounding):",
        config_path.display()
    );
    for rec in evaluate_constraints(&session)? {
        println!(
            "  {:<60} phi {:.6}  mean row truth {:.4}  loss {:.4}",
            rec.constraint, rec.phi, rec.mean_truth, rec.loss
        );
    }
    Ok(())
}

fn gradcheck_cmd(config_path: &Path, batch: usize) -> Result<()> {
    let config = load_config(config_path)?;
    let base = config_path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let session = build_session(config, &base)?;
    let reports = gradcheck_session(&session, batch, 1e-5, 1e-4)?;
    let mut failed = 0usize;
    for (name, report) in &reports {
        let status = if report.passed() { "ok  " } else { "FAIL" };
        if !report.passed() {
            failed += 1;
        }
        println!(
            "{status} {:<60} max rel err {:.2e} ({} checked, {} skipped at kinks)",
            name, report.max_rel_error, report.checked, report.skipped
        );
    }
    if failed > 0 {
        bail!("{failed} constraint(s) failed the gradient check");
    }
    println!(
        "all {} constraint(s) passed (h=1e-5, tolerance 1e-4)",
        reports.len()
    );
    Ok(())
}

fn scenario_cmd(name: &str, out: &Path, seed: u64, run: bool) -> Result<()> {
    match name {
        "married-republican" => {
            if run {
                let outcome = scenarios::run_married_republican(out, seed)?;
                println!(
                    "held-out accuracy: {:.3} with the couples rule, {:.3} without",
                    outcome.with_rule.heldout_accuracy, outcome.without_rule.heldout_accuracy
                );
                println!(
                    "married pairs within 0.2: {:.0}% vs {:.0}%",
                    outcome.with_rule.close_pair_fraction * 100.0,
                    outcome.without_rule.close_pair_fraction * 100.0
                );
            } else {
                scenarios::married::write_scenario(out, seed)?;
                println!(
                    "married-republican scenario written; train with:\n  fuzzyc train --config {}",
                    out.join("config.toml").display()
                );
            }
        }
        "toy-digits" => {
            if run {
                let outcome = scenarios::run_toy_digits(out, seed)?;
                println!(
                    "next / previous classified correctly: {:.1}% / {:.1}%",
                    outcome.next_accuracy * 100.0,
                    outcome.prev_accuracy * 100.0
                );
                println!(
                    "cycle pixel error: previous(next(x)) {:.4}, next(previous(x)) {:.4}",
                    outcome.cycle_prev_next_err, outcome.cycle_next_prev_err
                );
                println!("image grid: {}", outcome.grid_path.display());
            } else {
                scenarios::toy_digits::write_scenario(out, seed, 1500, 5000)?;
                println!(
                    "toy-digits scenario written; train with:\n  fuzzyc train --config {}",
                    out.join("config.toml").display()
                );
            }
        }
        "faces" => {
            std::fs::create_dir_all(out)?;
            std::fs::write(out.join("constraints.fol"), scenarios::faces::CONSTRAINTS)?;
            for t in TNorm::ALL {
                let compiled = scenarios::compile_faces(t)?;
                println!("compiles under {t}: {} constraints", compiled.len());
            }
            println!(
                "face constraint file written to {} (compile-only artifact)",
                out.join("constraints.fol").display()
            );
        }
        other => bail!("unknown scenario '{other}' (married-republican, toy-digits, faces)"),
    }
    Ok(())
}
