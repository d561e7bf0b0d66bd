//! SimEditor: a single-buffer text editor with select-all/copy/paste, a
//! save dialog, a find box, and a word-count script.

use std::collections::BTreeMap;

use crate::env::ActionError;
use crate::sim::action::{AppCtx, AppModel};
use crate::sim::state::{Element, ElementKind, Window};

pub(crate) struct Editor;

const APP: &str = "SimEditor";

impl AppModel for Editor {
    fn initial_vars(&self) -> BTreeMap<String, String> {
        let mut vars = BTreeMap::new();
        for (k, v) in [
            ("buffer", ""),
            ("selection", "0"),
            ("saved_as", ""),
            ("dialog", ""),
            ("dialog_name", ""),
            ("focus", "buffer"),
            ("find_open", "0"),
            ("find_entry", ""),
            ("find_query", ""),
            ("find_count", "0"),
            ("word_count", ""),
            ("last_action", ""),
        ] {
            vars.insert(k.to_string(), v.to_string());
        }
        vars
    }

    fn render(&self, vars: &BTreeMap<String, String>) -> Vec<Window> {
        let get = |k: &str| vars.get(k).map(|v| v.as_str()).unwrap_or("");
        let mut main = Vec::new();
        let push = |list: &mut Vec<Element>, win: &str, name: &str, kind: ElementKind, value: &str| {
            list.push(Element {
                id: format!("{win}#{}", list.len()),
                name: name.to_string(),
                kind,
                enabled: true,
                value: value.to_string(),
            });
        };
        push(&mut main, "main", "Editor", ElementKind::Input, get("buffer"));
        push(&mut main, "main", "Save", ElementKind::Button, "");
        push(&mut main, "main", "Find", ElementKind::Button, "");
        push(&mut main, "main", "Status", ElementKind::Display, get("saved_as"));
        if get("find_open") == "1" {
            push(&mut main, "main", "Find Query", ElementKind::Input, get("find_entry"));
        }
        let mut windows = vec![Window {
            name: "main".to_string(),
            elements: main,
        }];
        if get("dialog") == "save" {
            let mut dialog = Vec::new();
            push(&mut dialog, "SaveDialog", "File Name", ElementKind::Input, get("dialog_name"));
            push(&mut dialog, "SaveDialog", "Save As", ElementKind::Button, "");
            push(&mut dialog, "SaveDialog", "Cancel", ElementKind::Button, "");
            windows.push(Window {
                name: "SaveDialog".to_string(),
                elements: dialog,
            });
        }
        windows
    }

    fn click(&self, ctx: &mut AppCtx, element: &Element) -> Result<(), ActionError> {
        match element.name.as_str() {
            "Editor" => {
                ctx.set("focus", "buffer");
                Ok(())
            }
            "Save" => save_requested(ctx),
            "Find" => {
                open_find(ctx);
                Ok(())
            }
            "Status" => Ok(()),
            "Find Query" => {
                ctx.set("focus", "find");
                Ok(())
            }
            "File Name" => {
                ctx.set("focus", "dialog");
                Ok(())
            }
            "Save As" => commit_save(ctx),
            "Cancel" => {
                close_dialog(ctx);
                Ok(())
            }
            other => Err(ActionError::UnknownElement(other.to_string())),
        }
    }

    fn type_char(&self, ctx: &mut AppCtx, c: char) -> Result<(), ActionError> {
        match ctx.var("focus") {
            "dialog" => {
                let mut name = ctx.var("dialog_name").to_string();
                name.push(c);
                ctx.set("dialog_name", name);
            }
            "find" => {
                let mut entry = ctx.var("find_entry").to_string();
                entry.push(c);
                ctx.set("find_entry", entry);
            }
            _ => {
                if ctx.var("selection") == "1" {
                    ctx.set("buffer", "");
                    ctx.set("selection", "0");
                }
                let mut buffer = ctx.var("buffer").to_string();
                buffer.push(c);
                ctx.set("buffer", buffer);
            }
        }
        Ok(())
    }

    fn hotkey(&self, ctx: &mut AppCtx, keys: &str) -> Result<(), ActionError> {
        match keys {
            "ctrl+a" => {
                ctx.set("selection", "1");
                ctx.set("last_action", "select_all");
                Ok(())
            }
            "ctrl+c" => {
                *ctx.clipboard = ctx.var("buffer").to_string();
                ctx.set("last_action", "copy");
                Ok(())
            }
            "ctrl+v" => {
                let payload = ctx.clipboard.clone();
                self.paste(ctx, &payload)?;
                ctx.set("last_action", "paste");
                Ok(())
            }
            "ctrl+s" => save_requested(ctx),
            "ctrl+f" => {
                open_find(ctx);
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
            return match ctx.var("focus") {
                "dialog" => commit_save(ctx),
                "find" => {
                    commit_find(ctx);
                    Ok(())
                }
                _ => {
                    self.type_char(ctx, '\n')?;
                    ctx.set("last_action", "newline");
                    Ok(())
                }
            };
        }
        if key.eq_ignore_ascii_case("escape") {
            match ctx.var("focus") {
                "dialog" => close_dialog(ctx),
                "find" => close_find(ctx),
                _ => {}
            }
            return Ok(());
        }
        if key.eq_ignore_ascii_case("backspace") {
            return match ctx.var("focus") {
                "dialog" => {
                    let mut name = ctx.var("dialog_name").to_string();
                    name.pop();
                    ctx.set("dialog_name", name);
                    Ok(())
                }
                "find" => {
                    let mut entry = ctx.var("find_entry").to_string();
                    entry.pop();
                    ctx.set("find_entry", entry);
                    Ok(())
                }
                _ => {
                    if ctx.var("selection") == "1" {
                        ctx.set("buffer", "");
                        ctx.set("selection", "0");
                    } else {
                        let mut buffer = ctx.var("buffer").to_string();
                        buffer.pop();
                        ctx.set("buffer", buffer);
                    }
                    Ok(())
                }
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
        match command.trim() {
            "word_count" => {
                let count = ctx.var("buffer").split_whitespace().count();
                ctx.set("word_count", count.to_string());
                ctx.set("last_action", "word_count");
                Ok(())
            }
            other => Err(ActionError::ScriptRejected {
                app: APP.to_string(),
                reason: format!("unknown command `{other}`"),
            }),
        }
    }
}

/// Ctrl+S / Save button: silent when a file name is known, dialog otherwise.
fn save_requested(ctx: &mut AppCtx) -> Result<(), ActionError> {
    let saved_as = ctx.var("saved_as").to_string();
    if saved_as.is_empty() {
        ctx.set("dialog", "save");
        ctx.set("dialog_name", "");
        ctx.set("focus", "dialog");
    } else {
        ctx.set("last_action", format!("saved:{saved_as}"));
    }
    Ok(())
}

fn commit_save(ctx: &mut AppCtx) -> Result<(), ActionError> {
    let name = ctx.var("dialog_name").to_string();
    if name.is_empty() {
        return Err(ActionError::Rejected("file name is empty".to_string()));
    }
    ctx.set("saved_as", name.clone());
    ctx.set("dialog", "");
    ctx.set("dialog_name", "");
    ctx.set("focus", "buffer");
    ctx.set("last_action", format!("saved:{name}"));
    Ok(())
}

fn close_dialog(ctx: &mut AppCtx) {
    ctx.set("dialog", "");
    ctx.set("dialog_name", "");
    ctx.set("focus", "buffer");
}

fn open_find(ctx: &mut AppCtx) {
    ctx.set("find_open", "1");
    ctx.set("find_entry", "");
    ctx.set("focus", "find");
}

fn close_find(ctx: &mut AppCtx) {
    ctx.set("find_open", "0");
    ctx.set("find_entry", "");
    ctx.set("focus", "buffer");
}

fn commit_find(ctx: &mut AppCtx) {
    let query = ctx.var("find_entry").to_string();
    let count = if query.is_empty() {
        0
    } else {
        ctx.var("buffer").matches(&query).count()
    };
    ctx.set("find_query", query);
    ctx.set("find_count", count.to_string());
    close_find(ctx);
    ctx.set("last_action", "find");
}
