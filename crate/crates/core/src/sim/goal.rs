//! Goal checks: mechanical equality assertions over the final state.

use crate::sim::state::UiState;

/// One `equals(state_path, expected)` assertion.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct GoalAssertion {
    pub path: String,
    pub expected: String,
}

/// A task's goal: every assertion must hold in the final state.
#[derive(Debug, Clone, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub struct GoalCheck {
    pub assertions: Vec<GoalAssertion>,
}

impl GoalCheck {
    pub fn single(path: impl Into<String>, expected: impl Into<String>) -> Self {
        GoalCheck {
            assertions: vec![GoalAssertion {
                path: path.into(),
                expected: expected.into(),
            }],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssertionResult {
    pub path: String,
    pub expected: String,
    /// `None` means the path did not resolve (`path_unresolved`).
    pub actual: Option<String>,
    pub pass: bool,
}

impl AssertionResult {
    pub fn detail(&self) -> String {
        match (&self.actual, self.pass) {
            (None, _) => format!("{}: path_unresolved", self.path),
            (Some(actual), false) => {
                format!("{}: expected `{}`, got `{actual}`", self.path, self.expected)
            }
            (Some(_), true) => format!("{}: ok", self.path),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoalReport {
    pub pass: bool,
    pub results: Vec<AssertionResult>,
}

impl GoalReport {
    pub fn failures(&self) -> impl Iterator<Item = &AssertionResult> {
        self.results.iter().filter(|r| !r.pass)
    }
}

/// Evaluate every assertion; the report passes iff all do.
pub fn check_goal(goal: &GoalCheck, state: &UiState) -> GoalReport {
    let results: Vec<AssertionResult> = goal
        .assertions
        .iter()
        .map(|a| {
            let actual = state.resolve_path(&a.path);
            let pass = actual.as_deref() == Some(a.expected.as_str());
            AssertionResult {
                path: a.path.clone(),
                expected: a.expected.clone(),
                actual,
                pass,
            }
        })
        .collect();
    GoalReport {
        pass: results.iter().all(|r| r.pass),
        results,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::state::AppState;

    fn editor_state(buffer: &str) -> UiState {
        let mut state = UiState::default();
        let mut editor = AppState::default();
        editor.set_var("buffer", buffer);
        state.apps.insert("SimEditor".to_string(), editor);
        state
    }

    #[test]
    fn passing_assertion() {
        let report = check_goal(
            &GoalCheck::single("SimEditor.vars.buffer", "Logs"),
            &editor_state("Logs"),
        );
        assert!(report.pass);
        assert_eq!(report.results[0].detail(), "SimEditor.vars.buffer: ok");
    }

    #[test]
    fn failing_assertion_reports_actual() {
        let report = check_goal(
            &GoalCheck::single("SimEditor.vars.buffer", "Logs"),
            &editor_state("logs"),
        );
        assert!(!report.pass);
        assert!(report.results[0].detail().contains("expected `Logs`"));
    }

    #[test]
    fn unresolved_path_fails_with_marker() {
        let report = check_goal(
            &GoalCheck::single("SimEditor.vars.ghost", "x"),
            &editor_state(""),
        );
        assert!(!report.pass);
        assert!(report.results[0].detail().contains("path_unresolved"));
        assert_eq!(report.failures().count(), 1);
    }

    #[test]
    fn empty_goal_passes() {
        let report = check_goal(&GoalCheck::default(), &editor_state(""));
        assert!(report.pass);
    }
}
