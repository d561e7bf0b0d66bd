//! SimFiles: a file manager over an in-memory tree with address-bar
//! navigation, folder/file creation, rename, delete, and a small script
//! interface. Also hosts the workbook sheet used by the rename fixture.

use std::collections::BTreeMap;

use crate::env::ActionError;
use crate::sim::action::{AppCtx, AppModel};
use crate::sim::state::{Element, ElementKind, Window};

pub(crate) struct FilesApp;

const APP: &str = "SimFiles";
const TREE_PREFIX: &str = "tree.";

impl AppModel for FilesApp {
    fn initial_vars(&self) -> BTreeMap<String, String> {
        let mut vars = BTreeMap::new();
        for (k, v) in [
            ("cwd", "/"),
            ("focus", "list"),
            ("address_entry", ""),
            ("editing", ""),
            ("edit_buffer", ""),
            ("selected", ""),
            ("show_hidden", "0"),
            ("sheet_name", "sheet1"),
            ("last_created", ""),
            ("last_create_request", ""),
            ("last_rename_request", ""),
            ("last_action", ""),
        ] {
            vars.insert(k.to_string(), v.to_string());
        }
        for dir in ["/Documents", "/Downloads", "/Pictures", "/.config"] {
            vars.insert(format!("{TREE_PREFIX}{dir}"), "dir".to_string());
        }
        vars.insert(format!("{TREE_PREFIX}/Documents/readme.txt"), "file".to_string());
        vars
    }

    fn render(&self, vars: &BTreeMap<String, String>) -> Vec<Window> {
        let get = |k: &str| vars.get(k).map(|v| v.as_str()).unwrap_or("");
        let mut elements = Vec::new();
        let push = |list: &mut Vec<Element>, name: &str, kind: ElementKind, value: &str| {
            list.push(Element {
                id: format!("main#{}", list.len()),
                name: name.to_string(),
                kind,
                enabled: true,
                value: value.to_string(),
            });
        };
        let address_value = if get("focus") == "address" {
            get("address_entry")
        } else {
            get("cwd")
        };
        push(&mut elements, "Address", ElementKind::Input, address_value);
        push(&mut elements, "Go Up", ElementKind::Button, "");
        let show_hidden = get("show_hidden") == "1";
        for (name, kind) in entries_of(vars, get("cwd")) {
            if !show_hidden && name.starts_with('.') {
                continue;
            }
            push(&mut elements, &name, ElementKind::ListItem, &kind);
        }
        match get("editing") {
            "" => {}
            "create_folder" | "create_file" => {
                let placeholder = if get("edit_buffer").is_empty() {
                    if get("editing") == "create_folder" {
                        "New Folder"
                    } else {
                        "New File"
                    }
                } else {
                    get("edit_buffer")
                };
                push(&mut elements, placeholder, ElementKind::ListItem, "editing");
                push(&mut elements, "New Name", ElementKind::Input, get("edit_buffer"));
            }
            _ => {
                push(&mut elements, "New Name", ElementKind::Input, get("edit_buffer"));
            }
        }
        vec![Window {
            name: "main".to_string(),
            elements,
        }]
    }

    fn click(&self, ctx: &mut AppCtx, element: &Element) -> Result<(), ActionError> {
        match (element.name.as_str(), element.kind) {
            ("Address", _) => {
                ctx.set("focus", "address");
                ctx.set("address_entry", "");
                Ok(())
            }
            ("Go Up", _) => {
                go_up(ctx);
                Ok(())
            }
            ("New Name", _) => Ok(()),
            (name, ElementKind::ListItem) => {
                if element.value == "editing" {
                    return Ok(());
                }
                ctx.set("selected", name);
                ctx.set("last_action", "select");
                Ok(())
            }
            (other, _) => Err(ActionError::UnknownElement(other.to_string())),
        }
    }

    fn type_char(&self, ctx: &mut AppCtx, c: char) -> Result<(), ActionError> {
        match ctx.var("focus") {
            "edit" => {
                let mut buf = ctx.var("edit_buffer").to_string();
                buf.push(c);
                ctx.set("edit_buffer", buf);
                Ok(())
            }
            "address" => {
                let mut buf = ctx.var("address_entry").to_string();
                buf.push(c);
                ctx.set("address_entry", buf);
                Ok(())
            }
            _ => Err(ActionError::NoInputFocus(APP.to_string())),
        }
    }

    fn hotkey(&self, ctx: &mut AppCtx, keys: &str) -> Result<(), ActionError> {
        match keys {
            "ctrl+l" => {
                ctx.set("focus", "address");
                ctx.set("address_entry", "");
                Ok(())
            }
            "ctrl+shift+n" => {
                start_editing(ctx, "create_folder");
                Ok(())
            }
            "ctrl+h" => {
                let flipped = if ctx.var("show_hidden") == "1" { "0" } else { "1" };
                ctx.set("show_hidden", flipped);
                ctx.set("last_action", "toggle_hidden");
                Ok(())
            }
            "ctrl+c" => {
                let path = if ctx.var("selected").is_empty() {
                    ctx.var("cwd").to_string()
                } else {
                    join(ctx.var("cwd"), ctx.var("selected"))
                };
                *ctx.clipboard = path;
                ctx.set("last_action", "copy_path");
                Ok(())
            }
            "alt+up" => {
                go_up(ctx);
                Ok(())
            }
            other => Err(ActionError::UnboundHotkey {
                app: APP.to_string(),
                keys: other.to_string(),
            }),
        }
    }

    fn press_key(&self, ctx: &mut AppCtx, key: &str) -> Result<(), ActionError> {
        if key.eq_ignore_ascii_case("enter") {
            return commit_enter(ctx);
        }
        if key.eq_ignore_ascii_case("escape") {
            ctx.set("editing", "");
            ctx.set("edit_buffer", "");
            ctx.set("address_entry", "");
            ctx.set("focus", "list");
            return Ok(());
        }
        if key.eq_ignore_ascii_case("f2") {
            if ctx.var("selected").is_empty() {
                return Err(ActionError::Rejected("nothing is selected to rename".to_string()));
            }
            start_editing(ctx, "rename");
            return Ok(());
        }
        if key.eq_ignore_ascii_case("delete") {
            return delete_selected(ctx);
        }
        if key.eq_ignore_ascii_case("backspace") {
            return match ctx.var("focus") {
                "edit" => {
                    let mut buf = ctx.var("edit_buffer").to_string();
                    buf.pop();
                    ctx.set("edit_buffer", buf);
                    Ok(())
                }
                "address" => {
                    let mut buf = ctx.var("address_entry").to_string();
                    buf.pop();
                    ctx.set("address_entry", buf);
                    Ok(())
                }
                _ => Err(ActionError::NoInputFocus(APP.to_string())),
            };
        }
        let mut chars = key.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => self.type_char(ctx, c),
            _ => Err(ActionError::DeadKey {
                app: APP.to_string(),
                key: key.to_string(),
            }),
        }
    }

    fn script(&self, ctx: &mut AppCtx, command: &str) -> Result<(), ActionError> {
        let mut parts = command.split_whitespace();
        match parts.next() {
            Some("mkdir") => {
                let name = parts.collect::<Vec<_>>().join(" ");
                create_entry(ctx, &name, "dir", "create_folder")
            }
            Some("touch") => {
                let name = parts.collect::<Vec<_>>().join(" ");
                create_entry(ctx, &name, "file", "create_file")
            }
            Some("rename_sheet") => {
                let old = parts.next().unwrap_or_default().to_string();
                let new = parts.collect::<Vec<_>>().join(" ");
                if old.is_empty() || new.is_empty() {
                    return Err(ActionError::ScriptRejected {
                        app: APP.to_string(),
                        reason: "rename_sheet needs an old and a new name".to_string(),
                    });
                }
                if ctx.var("sheet_name") != old {
                    return Err(ActionError::ScriptRejected {
                        app: APP.to_string(),
                        reason: format!("no sheet named `{old}`"),
                    });
                }
                ctx.set("sheet_name", new.clone());
                ctx.set("last_rename_request", new);
                ctx.set("last_action", "rename_sheet");
                Ok(())
            }
            _ => Err(ActionError::ScriptRejected {
                app: APP.to_string(),
                reason: format!("unknown command `{command}`"),
            }),
        }
    }
}

/// Directory entries directly under `cwd`, sorted by name.
fn entries_of(vars: &BTreeMap<String, String>, cwd: &str) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for (key, kind) in vars.range(TREE_PREFIX.to_string()..) {
        let Some(path) = key.strip_prefix(TREE_PREFIX) else {
            break;
        };
        if parent(path) == cwd {
            out.push((leaf(path).to_string(), kind.clone()));
        }
    }
    out.sort();
    out
}

fn parent(path: &str) -> &str {
    match path.rfind('/') {
        Some(0) => "/",
        Some(i) => &path[..i],
        None => "/",
    }
}

fn leaf(path: &str) -> &str {
    path.rsplit('/').next().unwrap_or(path)
}

fn join(cwd: &str, name: &str) -> String {
    if cwd == "/" {
        format!("/{name}")
    } else {
        format!("{cwd}/{name}")
    }
}

fn tree_key(path: &str) -> String {
    format!("{TREE_PREFIX}{path}")
}

fn go_up(ctx: &mut AppCtx) {
    let cwd = ctx.var("cwd").to_string();
    ctx.set("cwd", parent(&cwd));
    ctx.set("selected", "");
    ctx.set("last_action", "go_up");
}

fn start_editing(ctx: &mut AppCtx, mode: &str) {
    ctx.set("editing", mode);
    ctx.set("edit_buffer", "");
    ctx.set("focus", "edit");
}

fn commit_enter(ctx: &mut AppCtx) -> Result<(), ActionError> {
    match ctx.var("focus") {
        "address" => {
            let entered = ctx.var("address_entry").to_string();
            navigate(ctx, &entered)
        }
        "edit" => {
            let editing = ctx.var("editing").to_string();
            let name = ctx.var("edit_buffer").to_string();
            match editing.as_str() {
                "create_folder" => create_entry(ctx, &name, "dir", "create_folder"),
                "create_file" => create_entry(ctx, &name, "file", "create_file"),
                "rename" => rename_selected(ctx, &name),
                other => Err(ActionError::Rejected(format!("not editing (`{other}`)"))),
            }
        }
        _ => {
            let selected = ctx.var("selected").to_string();
            if selected.is_empty() {
                return Err(ActionError::DeadKey {
                    app: APP.to_string(),
                    key: "enter".to_string(),
                });
            }
            let path = join(ctx.var("cwd"), &selected);
            match ctx.var(&tree_key(&path)) {
                "dir" => {
                    ctx.set("cwd", path);
                    ctx.set("selected", "");
                    ctx.set("last_action", "navigate");
                    Ok(())
                }
                _ => {
                    ctx.set("last_action", format!("open:{selected}"));
                    Ok(())
                }
            }
        }
    }
}

fn navigate(ctx: &mut AppCtx, target: &str) -> Result<(), ActionError> {
    let path = if target.starts_with('/') {
        target.trim_end_matches('/').to_string()
    } else {
        join(ctx.var("cwd"), target.trim_end_matches('/'))
    };
    let path = if path.is_empty() { "/".to_string() } else { path };
    if path != "/" && ctx.var(&tree_key(&path)) != "dir" {
        return Err(ActionError::Rejected(format!("no such directory `{path}`")));
    }
    ctx.set("cwd", path);
    ctx.set("selected", "");
    ctx.set("focus", "list");
    ctx.set("address_entry", "");
    ctx.set("editing", "");
    ctx.set("edit_buffer", "");
    ctx.set("last_action", "navigate");
    Ok(())
}

/// Create a directory entry, suffixing " (2)", " (3)", ... on collision.
fn create_entry(ctx: &mut AppCtx, name: &str, kind: &str, action: &str) -> Result<(), ActionError> {
    if name.is_empty() {
        return Err(ActionError::Rejected("name is empty".to_string()));
    }
    if name.contains('/') {
        return Err(ActionError::Rejected("name must not contain `/`".to_string()));
    }
    let cwd = ctx.var("cwd").to_string();
    let actual = unique_name(ctx, &cwd, name)?;
    ctx.vars.insert(tree_key(&join(&cwd, &actual)), kind.to_string());
    ctx.set("last_create_request", name);
    ctx.set("last_created", actual.clone());
    ctx.set("selected", actual);
    ctx.set("editing", "");
    ctx.set("edit_buffer", "");
    ctx.set("focus", "list");
    ctx.set("last_action", action);
    Ok(())
}

fn unique_name(ctx: &AppCtx, cwd: &str, name: &str) -> Result<String, ActionError> {
    if !ctx.vars.contains_key(&tree_key(&join(cwd, name))) {
        return Ok(name.to_string());
    }
    for n in 2..100 {
        let candidate = format!("{name} ({n})");
        if !ctx.vars.contains_key(&tree_key(&join(cwd, &candidate))) {
            return Ok(candidate);
        }
    }
    Err(ActionError::Rejected(format!("too many entries named `{name}`")))
}

fn rename_selected(ctx: &mut AppCtx, new_name: &str) -> Result<(), ActionError> {
    let selected = ctx.var("selected").to_string();
    if selected.is_empty() {
        return Err(ActionError::Rejected("nothing is selected to rename".to_string()));
    }
    if new_name.is_empty() {
        return Err(ActionError::Rejected("name is empty".to_string()));
    }
    if new_name.contains('/') {
        return Err(ActionError::Rejected("name must not contain `/`".to_string()));
    }
    let cwd = ctx.var("cwd").to_string();
    let actual = if new_name == selected {
        selected.clone()
    } else {
        unique_name(ctx, &cwd, new_name)?
    };
    let old_path = join(&cwd, &selected);
    let new_path = join(&cwd, &actual);
    // Move the entry and everything beneath it.
    let old_prefix = format!("{}/", old_path);
    let moved: Vec<(String, String)> = ctx
        .vars
        .iter()
        .filter(|(k, _)| {
            k.strip_prefix(TREE_PREFIX).is_some_and(|p| {
                p == old_path || p.starts_with(&old_prefix)
            })
        })
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    for (key, value) in moved {
        let path = key.strip_prefix(TREE_PREFIX).expect("filtered above");
        let rebased = format!("{new_path}{}", &path[old_path.len()..]);
        ctx.vars.remove(&key);
        ctx.vars.insert(tree_key(&rebased), value);
    }
    ctx.set("selected", actual);
    ctx.set("last_rename_request", new_name);
    ctx.set("editing", "");
    ctx.set("edit_buffer", "");
    ctx.set("focus", "list");
    ctx.set("last_action", "rename");
    Ok(())
}

fn delete_selected(ctx: &mut AppCtx) -> Result<(), ActionError> {
    let selected = ctx.var("selected").to_string();
    if selected.is_empty() {
        return Err(ActionError::Rejected("nothing is selected to delete".to_string()));
    }
    let path = join(ctx.var("cwd"), &selected);
    let prefix = format!("{}/", path);
    let doomed: Vec<String> = ctx
        .vars
        .keys()
        .filter(|k| {
            k.strip_prefix(TREE_PREFIX)
                .is_some_and(|p| p == path || p.starts_with(&prefix))
        })
        .cloned()
        .collect();
    for key in doomed {
        ctx.vars.remove(&key);
    }
    ctx.set("selected", "");
    ctx.set("last_action", format!("delete:{selected}"));
    Ok(())
}
