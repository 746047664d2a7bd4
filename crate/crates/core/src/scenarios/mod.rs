//! Canonical constraint files and synthetic datasets shipped with the
//! repository, plus runners that train and measure them.

pub mod faces;
pub mod glyphs;
pub mod married;
pub mod toy_digits;

pub use faces::compile_faces;
pub use married::{run_married_republican, MarriedOutcome};
pub use toy_digits::{run_toy_digits, run_toy_digits_sized, ToyOutcome};
