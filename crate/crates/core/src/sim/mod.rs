//! Simulated desktop: deterministic UI state, three bundled applications,
//! guard and goal evaluation, and an `Environment` implementation with
//! snapshot rollback and fault injection.

mod action;
mod calculator;
mod editor;
mod files;
mod goal;
mod guard;
mod simulator;
mod state;

pub use action::apply_action;
pub use calculator::{eval_expression, format_number};
pub use goal::{check_goal, AssertionResult, GoalAssertion, GoalCheck, GoalReport};
pub use guard::evaluate_guard;
pub use simulator::{FaultRule, Simulator};
pub use state::{AppState, Element, ElementKind, UiState, Window};
