//! SimCalculator: keypad entry, four operators, square root, and three
//! modes. Scientific mode honors operator precedence; standard and
//! programmer modes evaluate strictly left to right, programmer on integers.

use std::collections::BTreeMap;

use crate::env::ActionError;
use crate::sim::action::{AppCtx, AppModel};
use crate::sim::state::{Element, ElementKind, Window};

pub(crate) struct Calculator;

const APP: &str = "SimCalculator";
const MODES: [&str; 3] = ["standard", "scientific", "programmer"];

impl AppModel for Calculator {
    fn initial_vars(&self) -> BTreeMap<String, String> {
        let mut vars = BTreeMap::new();
        for (k, v) in [
            ("mode", "standard"),
            ("display", "0"),
            ("entry", ""),
            ("expr", ""),
            ("pending_sqrt", "0"),
            ("state", "ready"),
            ("menu", ""),
            ("last_op", ""),
            ("last_key", ""),
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
        push(&mut main, "main", "Display", ElementKind::Display, get("display"));
        for d in 0..10u8 {
            push(&mut main, "main", &d.to_string(), ElementKind::Button, "");
        }
        for name in [
            "Plus", "Minus", "Multiply", "Divide", "Equals", "Clear", "Square Root", "Negate",
            "Mode",
        ] {
            push(&mut main, "main", name, ElementKind::Button, "");
        }
        let mut windows = vec![Window {
            name: "main".to_string(),
            elements: main,
        }];
        if get("menu") == "open" {
            let mut items = Vec::new();
            for mode in MODES {
                push(&mut items, "ModeMenu", mode, ElementKind::MenuItem, "");
            }
            windows.push(Window {
                name: "ModeMenu".to_string(),
                elements: items,
            });
        }
        windows
    }

    fn click(&self, ctx: &mut AppCtx, element: &Element) -> Result<(), ActionError> {
        match element.name.as_str() {
            "Display" => Ok(()),
            d if d.len() == 1 && d.as_bytes()[0].is_ascii_digit() => {
                self.type_char(ctx, d.chars().next().expect("single digit"))
            }
            "Plus" => push_operator(ctx, '+'),
            "Minus" => push_operator(ctx, '-'),
            "Multiply" => push_operator(ctx, '*'),
            "Divide" => push_operator(ctx, '/'),
            "Equals" => evaluate(ctx),
            "Clear" => {
                clear(ctx);
                Ok(())
            }
            "Square Root" => {
                square_root(ctx);
                Ok(())
            }
            "Negate" => {
                negate(ctx);
                Ok(())
            }
            "Mode" => {
                ctx.set("menu", "open");
                Ok(())
            }
            mode if MODES.contains(&mode) => {
                ctx.set("mode", mode);
                ctx.set("menu", "");
                ctx.set("entry", "");
                ctx.set("expr", "");
                ctx.set("pending_sqrt", "0");
                ctx.set("display", "0");
                ctx.set("state", "ready");
                Ok(())
            }
            other => Err(ActionError::UnknownElement(other.to_string())),
        }
    }

    fn type_char(&self, ctx: &mut AppCtx, c: char) -> Result<(), ActionError> {
        match c {
            '0'..='9' => {
                if ctx.var("state") == "result" {
                    ctx.set("expr", "");
                }
                let mut entry = ctx.var("entry").to_string();
                entry.push(c);
                ctx.set("display", entry.clone());
                ctx.set("entry", entry);
                ctx.set("state", "typing");
                ctx.set("last_key", c.to_string());
                Ok(())
            }
            '.' => {
                let mut entry = ctx.var("entry").to_string();
                if !entry.contains('.') {
                    entry.push('.');
                    ctx.set("display", entry.clone());
                    ctx.set("entry", entry);
                }
                ctx.set("last_key", ".");
                Ok(())
            }
            '+' | '-' | '*' | '/' => push_operator(ctx, c),
            '=' => evaluate(ctx),
            other => Err(ActionError::DeadKey {
                app: APP.to_string(),
                key: other.to_string(),
            }),
        }
    }

    fn hotkey(&self, ctx: &mut AppCtx, keys: &str) -> Result<(), ActionError> {
        match keys {
            "ctrl+c" => {
                *ctx.clipboard = ctx.var("display").to_string();
                ctx.set("last_action", "copy");
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
            return evaluate(ctx);
        }
        if key.eq_ignore_ascii_case("escape") {
            clear(ctx);
            return Ok(());
        }
        if key.eq_ignore_ascii_case("backspace") {
            let mut entry = ctx.var("entry").to_string();
            entry.pop();
            ctx.set("display", if entry.is_empty() { "0".to_string() } else { entry.clone() });
            ctx.set("entry", entry);
            return Ok(());
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
        let _ = ctx;
        Err(ActionError::ScriptRejected {
            app: APP.to_string(),
            reason: format!("no script interface (`{command}`)"),
        })
    }
}

fn clear(ctx: &mut AppCtx) {
    ctx.set("entry", "");
    ctx.set("expr", "");
    ctx.set("pending_sqrt", "0");
    ctx.set("display", "0");
    ctx.set("state", "ready");
}

/// Move a finished entry into the expression token list.
fn flush_entry(ctx: &mut AppCtx) {
    let entry = ctx.var("entry").to_string();
    if entry.is_empty() {
        return;
    }
    let token = if ctx.var("pending_sqrt") == "1" {
        format!("sqrt({entry})")
    } else {
        entry
    };
    let mut expr = ctx.var("expr").to_string();
    if !expr.is_empty() {
        expr.push(' ');
    }
    expr.push_str(&token);
    ctx.set("expr", expr);
    ctx.set("entry", "");
    ctx.set("pending_sqrt", "0");
}

fn push_operator(ctx: &mut AppCtx, op: char) -> Result<(), ActionError> {
    flush_entry(ctx);
    let mut expr = ctx.var("expr").to_string();
    if expr.is_empty() {
        // Chaining off a previous result (or off the initial 0).
        expr = ctx.var("display").to_string();
    }
    // Pressing another operator immediately replaces the previous one.
    let mut tokens: Vec<&str> = expr.split_whitespace().collect();
    if tokens.last().is_some_and(|t| is_operator(t)) {
        tokens.pop();
    }
    let mut expr = tokens.join(" ");
    expr.push(' ');
    expr.push(op);
    ctx.set("expr", expr);
    ctx.set("state", "typing");
    ctx.set("last_op", op.to_string());
    Ok(())
}

fn square_root(ctx: &mut AppCtx) {
    let entry = ctx.var("entry").to_string();
    if entry.is_empty() {
        // Prefix form: the root applies to the number typed next.
        ctx.set("pending_sqrt", "1");
    } else if let Ok(v) = entry.parse::<f64>() {
        let mut rooted = v.sqrt();
        if ctx.var("mode") == "programmer" {
            rooted = rooted.trunc();
        }
        // Entry keeps full precision for later evaluation; only the
        // display is rounded for presentation.
        ctx.set("entry", rooted.to_string());
        ctx.set("display", format_number(rooted, ctx.var("mode")));
    }
    ctx.set("last_action", "sqrt");
}

fn negate(ctx: &mut AppCtx) {
    let entry = ctx.var("entry").to_string();
    if !entry.is_empty() {
        let negated = match entry.strip_prefix('-') {
            Some(rest) => rest.to_string(),
            None => format!("-{entry}"),
        };
        ctx.set("display", negated.clone());
        ctx.set("entry", negated);
    } else if let Ok(v) = ctx.var("display").parse::<f64>() {
        let mode = ctx.var("mode").to_string();
        ctx.set("display", format_number(-v, &mode));
    }
    ctx.set("last_action", "negate");
}

fn evaluate(ctx: &mut AppCtx) -> Result<(), ActionError> {
    flush_entry(ctx);
    let expr = ctx.var("expr").to_string();
    if expr.is_empty() {
        ctx.set("state", "result");
        return Ok(());
    }
    let mode = ctx.var("mode").to_string();
    let display = match eval_expression(&expr, &mode) {
        Ok(v) => format_number(v, &mode),
        Err(_) => "Error".to_string(),
    };
    let errored = display == "Error";
    ctx.set("display", display);
    ctx.set("expr", "");
    ctx.set("entry", "");
    ctx.set("state", if errored { "error" } else { "result" });
    ctx.set("last_action", "equals");
    Ok(())
}

fn is_operator(token: &str) -> bool {
    matches!(token, "+" | "-" | "*" | "/")
}

/// Evaluate a space-separated token expression. Scientific mode applies
/// multiplicative operators first; the other modes fold left to right,
/// programmer mode truncating to integers after every step.
pub fn eval_expression(expr: &str, mode: &str) -> Result<f64, String> {
    let mut values: Vec<f64> = Vec::new();
    let mut ops: Vec<char> = Vec::new();
    let mut expect_value = true;
    for token in expr.split_whitespace() {
        if expect_value {
            values.push(parse_operand(token, mode)?);
            expect_value = false;
        } else {
            if !is_operator(token) {
                return Err(format!("expected an operator, got `{token}`"));
            }
            ops.push(token.chars().next().expect("nonempty token"));
            expect_value = true;
        }
    }
    if values.is_empty() {
        return Err("empty expression".to_string());
    }
    // A trailing operator is dropped, as on a real keypad.
    ops.truncate(values.len() - 1);

    let result = match mode {
        "scientific" => {
            // First pass folds * and / into their left operand.
            let mut folded_values = vec![values[0]];
            let mut folded_ops: Vec<char> = Vec::new();
            for (op, value) in ops.iter().zip(values.iter().skip(1)) {
                match op {
                    '*' | '/' => {
                        let last = folded_values.last_mut().expect("nonempty");
                        *last = apply_op(*last, *op, *value, mode)?;
                    }
                    _ => {
                        folded_ops.push(*op);
                        folded_values.push(*value);
                    }
                }
            }
            let mut acc = folded_values[0];
            for (op, value) in folded_ops.iter().zip(folded_values.iter().skip(1)) {
                acc = apply_op(acc, *op, *value, mode)?;
            }
            acc
        }
        _ => {
            let mut acc = values[0];
            for (op, value) in ops.iter().zip(values.iter().skip(1)) {
                acc = apply_op(acc, *op, *value, mode)?;
            }
            acc
        }
    };
    Ok(result)
}

fn parse_operand(token: &str, mode: &str) -> Result<f64, String> {
    if let Some(inner) = token.strip_prefix("sqrt(").and_then(|t| t.strip_suffix(')')) {
        let v: f64 = inner
            .parse()
            .map_err(|_| format!("bad operand `{inner}`"))?;
        if v < 0.0 {
            return Err("square root of a negative number".to_string());
        }
        let root = v.sqrt();
        return Ok(if mode == "programmer" { root.trunc() } else { root });
    }
    token.parse().map_err(|_| format!("bad operand `{token}`"))
}

fn apply_op(lhs: f64, op: char, rhs: f64, mode: &str) -> Result<f64, String> {
    let raw = match op {
        '+' => lhs + rhs,
        '-' => lhs - rhs,
        '*' => lhs * rhs,
        '/' => {
            if rhs == 0.0 {
                return Err("division by zero".to_string());
            }
            lhs / rhs
        }
        other => return Err(format!("unknown operator `{other}`")),
    };
    Ok(if mode == "programmer" { raw.trunc() } else { raw })
}

/// Display formatting: integers render without a decimal point; everything
/// else rounds to four decimal places with trailing zeros trimmed.
pub fn format_number(v: f64, mode: &str) -> String {
    if !v.is_finite() {
        return "Error".to_string();
    }
    let v = if mode == "programmer" { v.trunc() } else { v };
    if v.fract() == 0.0 && v.abs() < 1e15 {
        return format!("{}", v as i64);
    }
    let mut s = format!("{v:.4}");
    while s.ends_with('0') {
        s.pop();
    }
    if s.ends_with('.') {
        s.pop();
    }
    s
}
