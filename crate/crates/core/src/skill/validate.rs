//! Structural validation of skills: graph shape, placeholder binding, and
//! action parameter schemas. Violations are report entries, not errors.

use std::collections::BTreeSet;

use crate::skill::{
    contains_placeholder, placeholders_in, ActionKind, Guard, SkillSpec,
};

/// One violated invariant. `code()` is the stable, machine-readable half.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NoStartNode,
    MultipleStartNodes { nodes: Vec<String> },
    NoTerminalNode,
    UnknownEdgeNode { edge: usize, node: String },
    EdgeFromTerminal { edge: usize, node: String },
    UnreachableTerminal { node: String },
    NonPositiveWeight { edge: usize, weight: f64 },
    UnboundPlaceholder { location: String, placeholder: String },
    MissingActionParam { edge: usize, kind: ActionKind, param: &'static str },
    InvalidActionParam { edge: usize, reason: String },
    GuardPlaceholder { edge: usize, placeholder: String },
}

impl Violation {
    pub fn code(&self) -> &'static str {
        match self {
            Violation::NoStartNode => "no_start_node",
            Violation::MultipleStartNodes { .. } => "multiple_start_nodes",
            Violation::NoTerminalNode => "no_terminal_node",
            Violation::UnknownEdgeNode { .. } => "unknown_edge_node",
            Violation::EdgeFromTerminal { .. } => "edge_from_terminal",
            Violation::UnreachableTerminal { .. } => "unreachable_terminal",
            Violation::NonPositiveWeight { .. } => "nonpositive_weight",
            Violation::UnboundPlaceholder { .. } => "unbound_placeholder",
            Violation::MissingActionParam { .. } => "missing_action_param",
            Violation::InvalidActionParam { .. } => "invalid_action_param",
            Violation::GuardPlaceholder { .. } => "guard_placeholder",
        }
    }
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::NoStartNode => write!(f, "no_start_node: no node is marked start"),
            Violation::MultipleStartNodes { nodes } => {
                write!(f, "multiple_start_nodes: {}", nodes.join(", "))
            }
            Violation::NoTerminalNode => {
                write!(f, "no_terminal_node: no node is marked terminal")
            }
            Violation::UnknownEdgeNode { edge, node } => {
                write!(f, "unknown_edge_node: edge {edge} references undeclared node `{node}`")
            }
            Violation::EdgeFromTerminal { edge, node } => {
                write!(f, "edge_from_terminal: edge {edge} leaves terminal node `{node}`")
            }
            Violation::UnreachableTerminal { node } => {
                write!(f, "unreachable_terminal: terminal `{node}` is unreachable from start")
            }
            Violation::NonPositiveWeight { edge, weight } => {
                write!(f, "nonpositive_weight: edge {edge} has weight {weight}")
            }
            Violation::UnboundPlaceholder { location, placeholder } => {
                write!(f, "unbound_placeholder: {location} references `{{{placeholder}}}` but no such argument is declared")
            }
            Violation::MissingActionParam { edge, kind, param } => {
                write!(f, "missing_action_param: edge {edge} {} needs `{param}`", kind.as_str())
            }
            Violation::InvalidActionParam { edge, reason } => {
                write!(f, "invalid_action_param: edge {edge}: {reason}")
            }
            Violation::GuardPlaceholder { edge, placeholder } => {
                write!(f, "guard_placeholder: edge {edge} guard contains `{{{placeholder}}}`")
            }
        }
    }
}

/// Check every SkillSpec and ExecutionGraph invariant; an empty report means
/// the skill is well-formed.
pub fn validate_skill(spec: &SkillSpec) -> Vec<Violation> {
    let mut report = Vec::new();
    let graph = &spec.graph;

    let starts: Vec<&str> = graph
        .nodes
        .iter()
        .filter(|n| n.is_start)
        .map(|n| n.id.as_str())
        .collect();
    match starts.len() {
        0 => report.push(Violation::NoStartNode),
        1 => {}
        _ => report.push(Violation::MultipleStartNodes {
            nodes: starts.iter().map(|s| s.to_string()).collect(),
        }),
    }
    let terminals: Vec<&str> = graph
        .nodes
        .iter()
        .filter(|n| n.is_terminal)
        .map(|n| n.id.as_str())
        .collect();
    if terminals.is_empty() {
        report.push(Violation::NoTerminalNode);
    }

    let declared: BTreeSet<&str> = spec.arguments.iter().map(|a| a.name.as_str()).collect();

    for (i, edge) in graph.edges.iter().enumerate() {
        for endpoint in [&edge.from, &edge.to] {
            if !graph.has_node(endpoint) {
                report.push(Violation::UnknownEdgeNode {
                    edge: i,
                    node: endpoint.clone(),
                });
            }
        }
        if graph.is_terminal(&edge.from) {
            report.push(Violation::EdgeFromTerminal {
                edge: i,
                node: edge.from.clone(),
            });
        }
        if let Some(w) = edge.weight {
            if !(w.is_finite() && w > 0.0) {
                report.push(Violation::NonPositiveWeight { edge: i, weight: w });
            }
        }
        for (key, value) in &edge.action.params {
            for placeholder in placeholders_in(value) {
                if !declared.contains(placeholder.as_str()) {
                    report.push(Violation::UnboundPlaceholder {
                        location: format!("edge {i} param `{key}`"),
                        placeholder,
                    });
                }
            }
        }
        if let Some(guard) = &edge.guard {
            for placeholder in guard_placeholders(guard) {
                report.push(Violation::GuardPlaceholder { edge: i, placeholder });
            }
        }
        check_action_params(i, edge, &mut report);
    }

    // Reachability over declared nodes only; unknown endpoints are already
    // reported above.
    if let Some(start) = graph.start() {
        let reachable = reachable_from(graph, start);
        for terminal in &terminals {
            if !reachable.contains(terminal) {
                report.push(Violation::UnreachableTerminal {
                    node: terminal.to_string(),
                });
            }
        }
    }

    for (location, text) in [
        ("intent".to_string(), Some(&spec.intent)),
        (
            "effect path".to_string(),
            spec.effect.as_ref().map(|e| &e.path),
        ),
        (
            "effect value".to_string(),
            spec.effect.as_ref().map(|e| &e.expected),
        ),
    ] {
        let Some(text) = text else { continue };
        for placeholder in placeholders_in(text) {
            if !declared.contains(placeholder.as_str()) {
                report.push(Violation::UnboundPlaceholder {
                    location: location.clone(),
                    placeholder,
                });
            }
        }
    }

    report
}

fn guard_placeholders(guard: &Guard) -> Vec<String> {
    match guard {
        Guard::Exists(query) => placeholders_in(&query.to_string()),
        Guard::Equals { path, value } => {
            let mut v = placeholders_in(path);
            v.extend(placeholders_in(value));
            v
        }
        Guard::FocusedApp(app) => placeholders_in(app),
        Guard::Not(inner) => guard_placeholders(inner),
    }
}

fn check_action_params(i: usize, edge: &crate::skill::GraphEdge, report: &mut Vec<Violation>) {
    let action = &edge.action;
    let require = |param: &'static str, report: &mut Vec<Violation>| {
        if action.param(param).map_or(true, |v| v.is_empty()) {
            report.push(Violation::MissingActionParam {
                edge: i,
                kind: action.kind,
                param,
            });
        }
    };
    match action.kind {
        ActionKind::LaunchApp => require("app", report),
        ActionKind::SingleClick => require("target", report),
        ActionKind::TypeText => {
            if action.param("text").is_none() {
                report.push(Violation::MissingActionParam {
                    edge: i,
                    kind: action.kind,
                    param: "text",
                });
            }
            match action.param("input_mode") {
                None => report.push(Violation::MissingActionParam {
                    edge: i,
                    kind: action.kind,
                    param: "input_mode",
                }),
                Some(mode) if contains_placeholder(mode) => {}
                Some("keyboard") | Some("copy_paste") => {}
                Some(other) => report.push(Violation::InvalidActionParam {
                    edge: i,
                    reason: format!(
                        "input_mode must be `keyboard` or `copy_paste`, got `{other}`"
                    ),
                }),
            }
        }
        ActionKind::Hotkey => require("keys", report),
        ActionKind::PressKey => require("key", report),
        ActionKind::Wait => {
            if let Some(ms) = action.param("ms") {
                if !contains_placeholder(ms) && ms.parse::<u64>().is_err() {
                    report.push(Violation::InvalidActionParam {
                        edge: i,
                        reason: format!("wait ms must be a nonnegative integer, got `{ms}`"),
                    });
                }
            }
        }
        ActionKind::Script => require("command", report),
    }
}

fn reachable_from<'a>(graph: &'a crate::skill::ExecutionGraph, start: &'a str) -> BTreeSet<&'a str> {
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    let mut stack = vec![start];
    while let Some(node) = stack.pop() {
        if !seen.insert(node) {
            continue;
        }
        for idx in graph.edges_from(node) {
            let to = graph.edges[idx].to.as_str();
            if graph.has_node(to) && !seen.contains(to) {
                stack.push(to);
            }
        }
    }
    seen
}
