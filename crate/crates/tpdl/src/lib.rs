//! Satisfiability solver for Type PDL: propositional dynamic logic extended
//! with precondition-effect process types `(φ => ψ)` and agent capability
//! statements `cap(i, A)`.
//!
//! The crate is organised as a pipeline:
//!
//! * [`syntax`] — hash-consed formula/program terms, sizes, the α/β
//!   classification, closure and capability-refutation sets;
//! * [`parser`] — concrete textual syntax (parse and print);
//! * [`reduction`] — decomposition of eventualities into reduction sets;
//! * [`tableau`] — labels, the tableau graph, and the fulfillment relation;
//! * [`engine`] — the decision procedure itself (global caching, dependency
//!   tracking, or-branch short-circuiting);
//! * [`witness`] — extraction of a Hintikka structure from a satisfiable
//!   tableau, structural checks, model construction and model checking;
//! * [`oracle`] — independent verification: bounded structure search, random
//!   formula generation, differential testing.

pub mod engine;
pub mod oracle;
pub mod parser;
pub mod reduction;
pub mod syntax;
pub mod tableau;
pub mod witness;

pub use engine::{solve, Answer, Config, SolveError, Verdict};
pub use syntax::{FId, PId, Sym};
