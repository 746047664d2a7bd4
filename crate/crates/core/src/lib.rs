//! fuzzyc-core: a compiler and training runtime that turns first-order
//! logic constraints into differentiable losses.
//!
//! The pipeline: [`fol`] parses and validates a declarative constraint
//! language into typed formulas; [`semantics`] compiles each formula into
//! a differentiable template under a chosen t-norm (Gödel, Łukasiewicz or
//! Product); [`grounding`] binds quantified variables to data and
//! evaluates templates into [`autodiff`] graphs; [`loss`] maps constraint
//! truths to penalties and splits constraints into adversarial
//! objectives; [`trainer`] minimizes the weighted cost with Adam;
//! [`scenarios`] ships the canonical constraint sets and synthetic
//! datasets; [`oracle`] is the brute-force reference interpreter the
//! compiled route is tested against.

pub mod autodiff;
pub mod data;
pub mod fol;
pub mod grounding;
pub mod loss;
pub mod models;
pub mod oracle;
pub mod scenarios;
pub mod semantics;
pub mod tensor;
pub mod trainer;

pub use tensor::Tensor;
