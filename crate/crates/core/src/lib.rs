//! Declarative skill library with guarded execution graphs, a simulated
//! desktop for verification, hybrid skill retrieval, and a
//! retrieval-augmented agent loop.
//!
//! The crate is organized around one data model: a [`skill::SkillLibrary`]
//! of parameterized skills whose execution graphs encode every valid way to
//! realize an intent. On top of it sit:
//!
//! - [`args`]: feasible domains, seeded sampling, binding validation, and
//!   placeholder instantiation;
//! - [`sim`]: a deterministic desktop simulator (calculator, file manager,
//!   text editor) used as the execution environment in tests and tasks;
//! - [`executor`]: guard-aware depth-first traversal of execution graphs
//!   against any [`env::Environment`];
//! - [`synth`]: composition-graph walks turned into natural-language tasks
//!   with goal checks, exported as JSON lines;
//! - [`retrieval`]: lexical + embedding skill search with rank interleaving;
//! - [`agent`]: the retrieve, rerank, configure, execute, remember loop.

pub mod agent;
pub mod args;
pub mod env;
pub mod executor;
pub mod retrieval;
pub mod rng;
pub mod sim;
pub mod skill;
pub mod synth;
