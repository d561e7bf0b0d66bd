//! Symbolic desktop state with a canonical, digest-stable text form.

use std::collections::BTreeMap;

use sha2::{Digest, Sha256};

/// Full observable desktop state.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct UiState {
    /// Name of the app with input focus; `None` before any launch.
    pub focused_app: Option<String>,
    pub apps: BTreeMap<String, AppState>,
    /// Global clipboard, shared across apps by design.
    pub clipboard: String,
}

/// One application's windows and variables. Windows are a deterministic
/// rendering of the variables, refreshed after every action.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AppState {
    pub windows: Vec<Window>,
    pub vars: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Window {
    pub name: String,
    pub elements: Vec<Element>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Element {
    pub id: String,
    pub name: String,
    pub kind: ElementKind,
    pub enabled: bool,
    pub value: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementKind {
    Button,
    Tab,
    Input,
    MenuItem,
    ListItem,
    Display,
}

impl ElementKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ElementKind::Button => "button",
            ElementKind::Tab => "tab",
            ElementKind::Input => "input",
            ElementKind::MenuItem => "menu_item",
            ElementKind::ListItem => "list_item",
            ElementKind::Display => "display",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "button" => ElementKind::Button,
            "tab" => ElementKind::Tab,
            "input" => ElementKind::Input,
            "menu_item" => ElementKind::MenuItem,
            "list_item" => ElementKind::ListItem,
            "display" => ElementKind::Display,
            _ => return None,
        })
    }
}

impl Window {
    pub fn element_by_id(&self, id: &str) -> Option<&Element> {
        self.elements.iter().find(|e| e.id == id)
    }
}

impl AppState {
    pub fn window(&self, name: &str) -> Option<&Window> {
        self.windows.iter().find(|w| w.name == name)
    }

    pub fn var(&self, key: &str) -> &str {
        self.vars.get(key).map(|v| v.as_str()).unwrap_or("")
    }

    pub fn set_var(&mut self, key: &str, value: impl Into<String>) {
        self.vars.insert(key.to_string(), value.into());
    }
}

impl UiState {
    pub fn focused(&self) -> Option<(&str, &AppState)> {
        let name = self.focused_app.as_deref()?;
        let app = self.apps.get(name)?;
        Some((name, app))
    }

    /// Resolve a dotted state path: `focused_app`, `clipboard`, or
    /// `<app>.vars.<key>` (the key may itself contain dots).
    pub fn resolve_path(&self, path: &str) -> Option<String> {
        match path {
            "focused_app" => Some(self.focused_app.clone().unwrap_or_default()),
            "clipboard" => Some(self.clipboard.clone()),
            _ => {
                let (app, rest) = path.split_once('.')?;
                let key = rest.strip_prefix("vars.")?;
                self.apps.get(app)?.vars.get(key).cloned()
            }
        }
    }

    /// Canonical serialization: sorted, escaped lines. Stable across
    /// platforms; parsing it back reproduces the state exactly.
    pub fn canonical_text(&self) -> String {
        let mut lines = Vec::new();
        lines.push(format!("clipboard={}", escape(&self.clipboard)));
        lines.push(format!(
            "focused={}",
            escape(self.focused_app.as_deref().unwrap_or(""))
        ));
        for (app_name, app) in &self.apps {
            let a = escape(app_name);
            for (key, value) in &app.vars {
                lines.push(format!("app:{a}|var:{}={}", escape(key), escape(value)));
            }
            for (wi, window) in app.windows.iter().enumerate() {
                let w = escape(&window.name);
                lines.push(format!("app:{a}|win:{wi:04}:{w}"));
                for (ei, element) in window.elements.iter().enumerate() {
                    lines.push(format!(
                        "app:{a}|win:{wi:04}:{w}|elem:{ei:04}:{}|name={}|kind={}|enabled={}|value={}",
                        escape(&element.id),
                        escape(&element.name),
                        element.kind.as_str(),
                        u8::from(element.enabled),
                        escape(&element.value)
                    ));
                }
            }
        }
        lines.sort();
        let mut out = lines.join("\n");
        out.push('\n');
        out
    }

    /// First 16 hex digits of the SHA-256 of the canonical text.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.canonical_text().as_bytes());
        let digest = hasher.finalize();
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Rebuild a state from its canonical text.
    pub fn from_canonical_text(text: &str) -> Result<Self, String> {
        let mut state = UiState::default();
        for line in text.lines() {
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("clipboard=") {
                state.clipboard = unescape(rest)?;
            } else if let Some(rest) = line.strip_prefix("focused=") {
                let name = unescape(rest)?;
                state.focused_app = if name.is_empty() { None } else { Some(name) };
            } else if let Some(rest) = line.strip_prefix("app:") {
                parse_app_line(&mut state, rest)?;
            } else {
                return Err(format!("unrecognized line `{line}`"));
            }
        }
        Ok(state)
    }
}

fn parse_app_line(state: &mut UiState, rest: &str) -> Result<(), String> {
    let fields = split_fields(rest);
    let mut fields = fields.into_iter();
    let app_name = unescape(&fields.next().ok_or("missing app name")?)?;
    let app = state.apps.entry(app_name).or_default();
    let second = fields.next().ok_or("missing app line payload")?;
    if let Some(var) = second.strip_prefix("var:") {
        let (key, value) = split_kv(var)?;
        app.vars.insert(unescape(key)?, unescape(value)?);
        return Ok(());
    }
    let win = second
        .strip_prefix("win:")
        .ok_or_else(|| format!("unrecognized app field `{second}`"))?;
    let (index, name) = win
        .split_once(':')
        .ok_or_else(|| format!("window field `{win}` lacks an ordinal"))?;
    let wi: usize = index.parse().map_err(|_| "bad window ordinal".to_string())?;
    let window_name = unescape(name)?;
    while app.windows.len() <= wi {
        app.windows.push(Window {
            name: String::new(),
            elements: Vec::new(),
        });
    }
    app.windows[wi].name = window_name;

    let Some(third) = fields.next() else {
        return Ok(());
    };
    let elem = third
        .strip_prefix("elem:")
        .ok_or_else(|| format!("unrecognized window field `{third}`"))?;
    let (ei_str, id) = elem
        .split_once(':')
        .ok_or_else(|| format!("element field `{elem}` lacks an ordinal"))?;
    let ei: usize = ei_str.parse().map_err(|_| "bad element ordinal".to_string())?;
    let mut element = Element {
        id: unescape(id)?,
        name: String::new(),
        kind: ElementKind::Button,
        enabled: true,
        value: String::new(),
    };
    for field in fields {
        let (key, value) = split_kv(&field)?;
        match key {
            "name" => element.name = unescape(value)?,
            "kind" => {
                element.kind = ElementKind::parse(value)
                    .ok_or_else(|| format!("unknown element kind `{value}`"))?
            }
            "enabled" => element.enabled = value == "1",
            "value" => element.value = unescape(value)?,
            other => return Err(format!("unknown element field `{other}`")),
        }
    }
    let elements = &mut app.windows[wi].elements;
    while elements.len() <= ei {
        elements.push(Element {
            id: String::new(),
            name: String::new(),
            kind: ElementKind::Button,
            enabled: true,
            value: String::new(),
        });
    }
    elements[ei] = element;
    Ok(())
}

/// Split on unescaped `|`.
fn split_fields(s: &str) -> Vec<String> {
    let mut fields = Vec::new();
    let mut current = String::new();
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        match c {
            '\\' => {
                current.push(c);
                if let Some(next) = chars.next() {
                    current.push(next);
                }
            }
            '|' => fields.push(std::mem::take(&mut current)),
            _ => current.push(c),
        }
    }
    fields.push(current);
    fields
}

/// Split `key=value` at the first unescaped `=`.
fn split_kv(s: &str) -> Result<(&str, &str), String> {
    let mut prev_backslash = false;
    for (i, c) in s.char_indices() {
        if c == '=' && !prev_backslash {
            return Ok((&s[..i], &s[i + 1..]));
        }
        prev_backslash = c == '\\' && !prev_backslash;
    }
    Err(format!("field `{s}` has no `=`"))
}

pub(crate) fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '|' => out.push_str("\\|"),
            '=' => out.push_str("\\="),
            _ => out.push(c),
        }
    }
    out
}

fn unescape(s: &str) -> Result<String, String> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next() {
                Some('\\') => out.push('\\'),
                Some('n') => out.push('\n'),
                Some('|') => out.push('|'),
                Some('=') => out.push('='),
                Some(other) => return Err(format!("unknown escape `\\{other}`")),
                None => return Err("dangling escape".to_string()),
            }
        } else {
            out.push(c);
        }
    }
    Ok(out)
}
