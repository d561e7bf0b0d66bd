//! Guard evaluation against the symbolic desktop state. Total and
//! side-effect free: unresolvable queries evaluate false, never fault.

use crate::sim::state::UiState;
use crate::skill::Guard;

pub fn evaluate_guard(guard: &Guard, state: &UiState) -> bool {
    match guard {
        Guard::Exists(query) => state
            .apps
            .get(&query.app)
            .and_then(|app| app.window(&query.window))
            .is_some_and(|w| w.elements.iter().any(|e| e.name == query.element)),
        Guard::Equals { path, value } => {
            state.resolve_path(path).as_deref() == Some(value.as_str())
        }
        Guard::FocusedApp(name) => state.focused_app.as_deref() == Some(name.as_str()),
        Guard::Not(inner) => !evaluate_guard(inner, state),
    }
}
