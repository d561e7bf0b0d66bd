//! In-process desktop environment: deterministic state, epoch-scoped
//! snapshots, and rule-based fault injection for recovery testing.

use crate::env::{
    ActionError, Environment, Observation, PrimitiveAction, SnapshotError, SnapshotToken,
};
use crate::sim::action::apply_action;
use crate::sim::state::UiState;
use crate::skill::ActionKind;

/// Injects `ActionError::InjectedFault` when a matching action is applied.
///
/// A rule matches when the action has `kind` and, if `param_contains` is
/// set, some parameter value contains that substring. Each match consumes
/// one charge; a rule with no remaining charges is inert.
#[derive(Debug, Clone)]
pub struct FaultRule {
    pub kind: ActionKind,
    pub param_contains: Option<String>,
    pub remaining: u32,
}

impl FaultRule {
    pub fn new(kind: ActionKind, param_contains: Option<&str>, remaining: u32) -> Self {
        FaultRule {
            kind,
            param_contains: param_contains.map(|s| s.to_string()),
            remaining,
        }
    }

    fn matches(&self, action: &PrimitiveAction) -> bool {
        if self.remaining == 0 || action.kind() != self.kind {
            return false;
        }
        match &self.param_contains {
            None => true,
            Some(needle) => action.param_text().contains(needle),
        }
    }
}

/// Simulated desktop. Applying an action mutates the state and re-renders
/// every launched app, so observations are always consistent with app vars.
#[derive(Debug, Default)]
pub struct Simulator {
    state: UiState,
    snapshots: Vec<UiState>,
    epoch: u64,
    faults: Vec<FaultRule>,
}

impl Simulator {
    pub fn new() -> Self {
        Simulator::default()
    }

    /// Arms a fault rule. Rules are checked in insertion order; the first
    /// match fires and is decremented.
    pub fn inject_fault(&mut self, rule: FaultRule) {
        self.faults.push(rule);
    }

    pub fn clear_faults(&mut self) {
        self.faults.clear();
    }

    pub fn state(&self) -> &UiState {
        &self.state
    }
}

impl Environment for Simulator {
    fn reset(&mut self) {
        self.state = UiState::default();
        self.snapshots.clear();
        self.epoch += 1;
    }

    fn observe(&self) -> Observation {
        Observation::of(&self.state)
    }

    fn apply(&mut self, action: &PrimitiveAction) -> Result<(), ActionError> {
        if let Some(rule) = self.faults.iter_mut().find(|r| r.matches(action)) {
            rule.remaining -= 1;
            return Err(ActionError::InjectedFault(action.to_string()));
        }
        apply_action(&mut self.state, action)
    }

    fn supports_rollback(&self) -> bool {
        true
    }

    fn snapshot(&mut self) -> Result<SnapshotToken, SnapshotError> {
        self.snapshots.push(self.state.clone());
        Ok(SnapshotToken {
            epoch: self.epoch,
            index: self.snapshots.len() - 1,
        })
    }

    fn restore(&mut self, token: SnapshotToken) -> Result<(), SnapshotError> {
        if token.epoch != self.epoch || token.index >= self.snapshots.len() {
            return Err(SnapshotError::Stale);
        }
        self.state = self.snapshots[token.index].clone();
        // Later snapshots describe futures that no longer exist.
        self.snapshots.truncate(token.index + 1);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::InputMode;
    use crate::rng::Lcg;

    fn launch(app: &str) -> PrimitiveAction {
        PrimitiveAction::LaunchApp { app: app.to_string() }
    }

    fn type_text(text: &str) -> PrimitiveAction {
        PrimitiveAction::TypeText {
            text: text.to_string(),
            input_mode: InputMode::Keyboard,
        }
    }

    #[test]
    fn launch_and_observe() {
        let mut sim = Simulator::new();
        sim.reset();
        let before = sim.observe();
        sim.apply(&launch("SimCalculator")).unwrap();
        let after = sim.observe();
        assert_ne!(before.digest, after.digest);
        assert_eq!(after.state.focused_app.as_deref(), Some("SimCalculator"));
        assert!(after.state.apps.contains_key("SimCalculator"));
    }

    #[test]
    fn snapshot_restore_round_trip() {
        let mut sim = Simulator::new();
        sim.reset();
        sim.apply(&launch("SimEditor")).unwrap();
        let saved = sim.observe();
        let token = sim.snapshot().unwrap();
        sim.apply(&type_text("scratch")).unwrap();
        assert_ne!(sim.observe().digest, saved.digest);
        sim.restore(token).unwrap();
        let restored = sim.observe();
        assert_eq!(restored.digest, saved.digest);
        assert_eq!(restored.state.canonical_text(), saved.state.canonical_text());
    }

    #[test]
    fn tokens_go_stale_on_reset() {
        let mut sim = Simulator::new();
        sim.reset();
        sim.apply(&launch("SimEditor")).unwrap();
        let token = sim.snapshot().unwrap();
        sim.reset();
        assert!(matches!(sim.restore(token), Err(SnapshotError::Stale)));
    }

    #[test]
    fn restore_discards_later_snapshots() {
        let mut sim = Simulator::new();
        sim.reset();
        sim.apply(&launch("SimEditor")).unwrap();
        let early = sim.snapshot().unwrap();
        sim.apply(&type_text("a")).unwrap();
        let late = sim.snapshot().unwrap();
        sim.restore(early).unwrap();
        assert!(matches!(sim.restore(late), Err(SnapshotError::Stale)));
    }

    #[test]
    fn fault_rule_fires_once_then_clears() {
        let mut sim = Simulator::new();
        sim.reset();
        sim.apply(&launch("SimEditor")).unwrap();
        sim.inject_fault(FaultRule::new(ActionKind::TypeText, Some("boom"), 1));
        let err = sim.apply(&type_text("boom town")).unwrap_err();
        assert!(matches!(err, ActionError::InjectedFault(_)));
        // Charge spent: the same action now succeeds.
        sim.apply(&type_text("boom town")).unwrap();
        // Non-matching text was never affected.
        sim.apply(&type_text("quiet")).unwrap();
    }

    #[test]
    fn fault_does_not_mutate_state() {
        let mut sim = Simulator::new();
        sim.reset();
        sim.apply(&launch("SimEditor")).unwrap();
        let before = sim.observe();
        sim.inject_fault(FaultRule::new(ActionKind::TypeText, None, 1));
        sim.apply(&type_text("x")).unwrap_err();
        assert_eq!(sim.observe().digest, before.digest);
    }

    #[test]
    fn apps_are_isolated() {
        let mut sim = Simulator::new();
        sim.reset();
        sim.apply(&launch("SimEditor")).unwrap();
        sim.apply(&type_text("draft")).unwrap();
        let editor_vars = sim.state().apps["SimEditor"].vars.clone();
        sim.apply(&launch("SimCalculator")).unwrap();
        sim.apply(&type_text("12")).unwrap();
        assert_eq!(sim.state().apps["SimEditor"].vars, editor_vars);
        assert_eq!(sim.state().apps["SimCalculator"].var("display"), "12");
    }

    /// Random interleavings across all three apps must never panic, and
    /// every observation digest must match an independent recomputation.
    #[test]
    fn random_walks_stay_consistent() {
        let mut rng = Lcg::new(0x5eed);
        let apps = ["SimCalculator", "SimFiles", "SimEditor"];
        let keys = ["enter", "escape", "backspace", "a", "1"];
        let hotkeys = ["ctrl+c", "ctrl+a", "ctrl+s", "ctrl+l", "ctrl+h"];
        for _ in 0..100 {
            let mut sim = Simulator::new();
            sim.reset();
            for _ in 0..30 {
                let action = match rng.next_range(6) {
                    0 => launch(apps[rng.next_range(3) as usize]),
                    1 => type_text(["7", "ab", "+", "."][rng.next_range(4) as usize]),
                    2 => PrimitiveAction::PressKey {
                        key: keys[rng.next_range(keys.len() as u64) as usize].to_string(),
                    },
                    3 => PrimitiveAction::Hotkey {
                        keys: hotkeys[rng.next_range(hotkeys.len() as u64) as usize].to_string(),
                    },
                    4 => PrimitiveAction::Wait { ms: 1 },
                    _ => PrimitiveAction::Script {
                        command: "word_count".to_string(),
                    },
                };
                // Errors are legal outcomes; panics and digest drift are not.
                let _ = sim.apply(&action);
                let obs = sim.observe();
                assert_eq!(obs.digest, Observation::of(sim.state()).digest);
                let reparsed = UiState::from_canonical_text(&obs.state.canonical_text()).unwrap();
                assert_eq!(reparsed.canonical_text(), obs.state.canonical_text());
            }
        }
    }
}
