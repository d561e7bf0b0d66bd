//! Action dispatch: routes primitive actions to the focused application
//! model and re-renders window trees after every mutation.

use std::collections::BTreeMap;

use crate::env::{ActionError, InputMode, PrimitiveAction};
use crate::sim::state::{Element, UiState, Window};

/// Mutable view handed to app handlers: the app's own variables plus the
/// global clipboard. Focus changes are the dispatcher's business only.
pub(crate) struct AppCtx<'a> {
    pub vars: &'a mut BTreeMap<String, String>,
    pub clipboard: &'a mut String,
}

impl AppCtx<'_> {
    pub fn var(&self, key: &str) -> &str {
        self.vars.get(key).map(|v| v.as_str()).unwrap_or("")
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.vars.insert(key.to_string(), value.into());
    }
}

/// One simulated application: initial variables, a deterministic rendering
/// of variables into windows, and handlers for each primitive kind.
pub(crate) trait AppModel: Sync {
    fn initial_vars(&self) -> BTreeMap<String, String>;
    fn render(&self, vars: &BTreeMap<String, String>) -> Vec<Window>;

    fn click(&self, ctx: &mut AppCtx, element: &Element) -> Result<(), ActionError>;
    fn type_char(&self, ctx: &mut AppCtx, c: char) -> Result<(), ActionError>;
    fn hotkey(&self, ctx: &mut AppCtx, keys: &str) -> Result<(), ActionError>;
    fn press_key(&self, ctx: &mut AppCtx, key: &str) -> Result<(), ActionError>;
    fn script(&self, ctx: &mut AppCtx, command: &str) -> Result<(), ActionError>;

    /// Paste the clipboard payload. Defaults to character-wise delivery,
    /// which every current app treats identically to an atomic insert.
    fn paste(&self, ctx: &mut AppCtx, text: &str) -> Result<(), ActionError> {
        for c in text.chars() {
            self.type_char(ctx, c)?;
        }
        Ok(())
    }
}

pub(crate) fn model_for(app: &str) -> Option<&'static dyn AppModel> {
    match app {
        "SimCalculator" => Some(&crate::sim::calculator::Calculator),
        "SimFiles" => Some(&crate::sim::files::FilesApp),
        "SimEditor" => Some(&crate::sim::editor::Editor),
        _ => None,
    }
}

/// Apply one primitive action to the state. Deterministic: identical
/// (state, action) pairs produce identical successors or identical errors.
pub fn apply_action(state: &mut UiState, action: &PrimitiveAction) -> Result<(), ActionError> {
    match action {
        PrimitiveAction::LaunchApp { app } => {
            let model =
                model_for(app).ok_or_else(|| ActionError::UnknownApp(app.clone()))?;
            state.apps.entry(app.clone()).or_insert_with(|| {
                crate::sim::state::AppState {
                    windows: Vec::new(),
                    vars: model.initial_vars(),
                }
            });
            state.focused_app = Some(app.clone());
        }
        PrimitiveAction::Wait { .. } => {}
        other => {
            let app_name = state
                .focused_app
                .clone()
                .ok_or(ActionError::NoFocusedApp)?;
            let model = model_for(&app_name)
                .ok_or_else(|| ActionError::UnknownApp(app_name.clone()))?;

            // Click targets are resolved against the currently rendered
            // windows before any mutation.
            let clicked: Option<Element> = match other {
                PrimitiveAction::SingleClick { element } => {
                    let app = state
                        .apps
                        .get(&app_name)
                        .ok_or_else(|| ActionError::UnknownApp(app_name.clone()))?;
                    let found = app
                        .windows
                        .iter()
                        .find_map(|w| w.element_by_id(element))
                        .ok_or_else(|| ActionError::UnknownElement(element.clone()))?;
                    if !found.enabled {
                        return Err(ActionError::DisabledElement(element.clone()));
                    }
                    Some(found.clone())
                }
                _ => None,
            };

            let app = state
                .apps
                .get_mut(&app_name)
                .ok_or_else(|| ActionError::UnknownApp(app_name.clone()))?;
            let mut ctx = AppCtx {
                vars: &mut app.vars,
                clipboard: &mut state.clipboard,
            };
            match other {
                PrimitiveAction::SingleClick { .. } => {
                    model.click(&mut ctx, clicked.as_ref().expect("resolved above"))?
                }
                PrimitiveAction::TypeText { text, input_mode } => {
                    if !text.is_empty() {
                        match input_mode {
                            InputMode::Keyboard => {
                                for c in text.chars() {
                                    model.type_char(&mut ctx, c)?;
                                }
                            }
                            InputMode::CopyPaste => {
                                *ctx.clipboard = text.clone();
                                model.paste(&mut ctx, text)?;
                            }
                        }
                        ctx.set("last_input", text.clone());
                    }
                }
                PrimitiveAction::Hotkey { keys } => {
                    model.hotkey(&mut ctx, &keys.to_ascii_lowercase())?
                }
                PrimitiveAction::PressKey { key } => model.press_key(&mut ctx, key)?,
                PrimitiveAction::Script { command } => model.script(&mut ctx, command)?,
                PrimitiveAction::LaunchApp { .. } | PrimitiveAction::Wait { .. } => {
                    unreachable!("handled above")
                }
            }
        }
    }
    render_all(state);
    Ok(())
}

/// Recompute every launched app's window tree from its variables.
pub(crate) fn render_all(state: &mut UiState) {
    for (name, app) in &mut state.apps {
        if let Some(model) = model_for(name) {
            app.windows = model.render(&app.vars);
        }
    }
}
