//! Environment contract consumed by the executor: observations, resolved
//! primitive actions, and optional snapshot/rollback capability.

use crate::sim::UiState;

/// How `type_text` delivers its payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputMode {
    /// Character-by-character keystrokes.
    Keyboard,
    /// Set the clipboard, then paste the whole payload atomically.
    CopyPaste,
}

impl InputMode {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "keyboard" => Some(InputMode::Keyboard),
            "copy_paste" => Some(InputMode::CopyPaste),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            InputMode::Keyboard => "keyboard",
            InputMode::CopyPaste => "copy_paste",
        }
    }
}

/// A fully resolved action, ready for an environment to apply. Unlike
/// `BaseAction`, click targets are element ids, not semantic descriptors.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PrimitiveAction {
    LaunchApp { app: String },
    SingleClick { element: String },
    TypeText { text: String, input_mode: InputMode },
    Hotkey { keys: String },
    PressKey { key: String },
    Wait { ms: u64 },
    Script { command: String },
}

impl PrimitiveAction {
    pub fn kind(&self) -> crate::skill::ActionKind {
        use crate::skill::ActionKind;
        match self {
            PrimitiveAction::LaunchApp { .. } => ActionKind::LaunchApp,
            PrimitiveAction::SingleClick { .. } => ActionKind::SingleClick,
            PrimitiveAction::TypeText { .. } => ActionKind::TypeText,
            PrimitiveAction::Hotkey { .. } => ActionKind::Hotkey,
            PrimitiveAction::PressKey { .. } => ActionKind::PressKey,
            PrimitiveAction::Wait { .. } => ActionKind::Wait,
            PrimitiveAction::Script { .. } => ActionKind::Script,
        }
    }

    /// All string payloads, used for fault-rule matching and logging.
    pub fn param_text(&self) -> String {
        match self {
            PrimitiveAction::LaunchApp { app } => app.clone(),
            PrimitiveAction::SingleClick { element } => element.clone(),
            PrimitiveAction::TypeText { text, input_mode } => {
                format!("{text} {}", input_mode.as_str())
            }
            PrimitiveAction::Hotkey { keys } => keys.clone(),
            PrimitiveAction::PressKey { key } => key.clone(),
            PrimitiveAction::Wait { ms } => ms.to_string(),
            PrimitiveAction::Script { command } => command.clone(),
        }
    }
}

impl std::fmt::Display for PrimitiveAction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PrimitiveAction::LaunchApp { app } => write!(f, "launch_app({app})"),
            PrimitiveAction::SingleClick { element } => write!(f, "single_click({element})"),
            PrimitiveAction::TypeText { text, input_mode } => {
                write!(f, "type_text({text:?}, {})", input_mode.as_str())
            }
            PrimitiveAction::Hotkey { keys } => write!(f, "hotkey({keys})"),
            PrimitiveAction::PressKey { key } => write!(f, "press_key({key})"),
            PrimitiveAction::Wait { ms } => write!(f, "wait({ms})"),
            PrimitiveAction::Script { command } => write!(f, "script({command})"),
        }
    }
}

/// Why an action could not be applied.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ActionError {
    #[error("no application has focus")]
    NoFocusedApp,
    #[error("unknown application `{0}`")]
    UnknownApp(String),
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("element `{0}` is disabled")]
    DisabledElement(String),
    #[error("hotkey `{keys}` has no binding in {app}")]
    UnboundHotkey { app: String, keys: String },
    #[error("key `{key}` does nothing in {app}")]
    DeadKey { app: String, key: String },
    #[error("no text input has focus in {0}")]
    NoInputFocus(String),
    #[error("{app} rejected script: {reason}")]
    ScriptRejected { app: String, reason: String },
    #[error("injected fault on {0}")]
    InjectedFault(String),
    #[error("{0}")]
    Rejected(String),
}

/// Snapshot handle; valid until the next environment reset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SnapshotToken {
    pub epoch: u64,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SnapshotError {
    #[error("snapshot token is stale (from a previous episode)")]
    Stale,
    #[error("snapshots are not supported by this environment")]
    Unsupported,
}

/// One observation of the environment: the full symbolic state plus a
/// digest stable across platforms, used in traces and golden files.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub state: UiState,
    pub digest: String,
}

impl Observation {
    pub fn of(state: &UiState) -> Self {
        Observation {
            state: state.clone(),
            digest: state.digest(),
        }
    }
}

/// The contract the executor drives. `reset` returns the environment to its
/// initial state and invalidates snapshot tokens.
pub trait Environment {
    fn reset(&mut self);
    fn observe(&self) -> Observation;
    fn apply(&mut self, action: &PrimitiveAction) -> Result<(), ActionError>;

    /// Whether snapshot/restore round-trips are available for backtracking.
    fn supports_rollback(&self) -> bool {
        false
    }

    fn snapshot(&mut self) -> Result<SnapshotToken, SnapshotError> {
        Err(SnapshotError::Unsupported)
    }

    fn restore(&mut self, _token: SnapshotToken) -> Result<(), SnapshotError> {
        Err(SnapshotError::Unsupported)
    }
}

