//! Skill schema: parameterized skills, guarded execution graphs, and the
//! composition graph, with parsing, validation, and library loading.

mod library;
mod parse;
mod stats;
mod validate;

pub use library::{load_library, LibraryError, LibraryErrors};
pub use parse::{parse_composition, parse_skill, serialize_skill, ParseError};
pub use stats::{format_stats_table, library_stats, primitive_count, AppStats, LibraryStats};
pub use validate::{validate_skill, Violation};

use std::collections::BTreeMap;

use crate::args::GeneratorSpec;

/// One skill: an application-scoped unit of user intent with an argument
/// schema and an execution graph describing every valid realization.
#[derive(Debug, Clone, PartialEq)]
pub struct SkillSpec {
    /// Unique identifier within a library, e.g. `CalculatorEnterNumber`.
    pub id: String,
    /// Application tag the skill operates on.
    pub application: String,
    /// Natural-language intent; may reference arguments as `{name}`.
    pub intent: String,
    /// Marks a low-level skill that is always offered to the reranker as a
    /// fallback, independent of retrieval.
    pub basic: bool,
    /// Argument schema, in declaration order.
    pub arguments: Vec<ArgumentSlot>,
    /// Optional post-state assertion template; the final skill's effect
    /// becomes a synthesized task's goal check.
    pub effect: Option<EffectTemplate>,
    /// The guarded execution graph.
    pub graph: ExecutionGraph,
}

impl SkillSpec {
    pub fn argument(&self, name: &str) -> Option<&ArgumentSlot> {
        self.arguments.iter().find(|slot| slot.name == name)
    }
}

/// A state-path assertion template. Both the path and the expected value may
/// contain `{argument}` placeholders, resolved from a concrete binding.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectTemplate {
    pub path: String,
    pub expected: String,
}

/// One declared argument with its feasible domain.
#[derive(Debug, Clone, PartialEq)]
pub struct ArgumentSlot {
    pub name: String,
    pub domain: FeasibleDomain,
    pub description: String,
}

/// The set of values for which a skill stays well-defined: either an
/// enumerable finite set or an open domain backed by a generator.
#[derive(Debug, Clone, PartialEq)]
pub enum FeasibleDomain {
    Finite(Vec<String>),
    Open(GeneratorSpec),
}

/// Directed control-state graph; edges carry guarded, parameterized actions.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExecutionGraph {
    /// Nodes in declaration order.
    pub nodes: Vec<GraphNode>,
    /// Edges in declaration order; order determines guard-evaluation order.
    pub edges: Vec<GraphEdge>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphNode {
    pub id: String,
    pub is_start: bool,
    pub is_terminal: bool,
}

impl ExecutionGraph {
    pub fn start(&self) -> Option<&str> {
        self.nodes.iter().find(|n| n.is_start).map(|n| n.id.as_str())
    }

    pub fn is_terminal(&self, node: &str) -> bool {
        self.nodes.iter().any(|n| n.id == node && n.is_terminal)
    }

    pub fn has_node(&self, node: &str) -> bool {
        self.nodes.iter().any(|n| n.id == node)
    }

    /// Edge indices leaving `node`, in declaration order.
    pub fn edges_from<'a>(&'a self, node: &'a str) -> impl Iterator<Item = usize> + 'a {
        self.edges
            .iter()
            .enumerate()
            .filter(move |(_, e)| e.from == node)
            .map(|(i, _)| i)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphEdge {
    pub from: String,
    pub to: String,
    pub action: BaseAction,
    pub guard: Option<Guard>,
    pub weight: Option<f64>,
}

/// Action kinds understood by the executor and the simulated desktop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ActionKind {
    LaunchApp,
    SingleClick,
    TypeText,
    Hotkey,
    PressKey,
    Wait,
    Script,
}

impl ActionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ActionKind::LaunchApp => "launch_app",
            ActionKind::SingleClick => "single_click",
            ActionKind::TypeText => "type_text",
            ActionKind::Hotkey => "hotkey",
            ActionKind::PressKey => "press_key",
            ActionKind::Wait => "wait",
            ActionKind::Script => "script",
        }
    }

    pub fn from_str(s: &str) -> Option<Self> {
        Some(match s {
            "launch_app" => ActionKind::LaunchApp,
            "single_click" => ActionKind::SingleClick,
            "type_text" => ActionKind::TypeText,
            "hotkey" => ActionKind::Hotkey,
            "press_key" => ActionKind::PressKey,
            "wait" => ActionKind::Wait,
            "script" => ActionKind::Script,
            _ => return None,
        })
    }
}

/// A parameterized base action. Parameter values are literals that may embed
/// `{placeholder}` references to the skill's arguments.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BaseAction {
    pub kind: ActionKind,
    pub params: BTreeMap<String, String>,
}

impl BaseAction {
    pub fn param(&self, name: &str) -> Option<&str> {
        self.params.get(name).map(|s| s.as_str())
    }
}

/// UI predicate guarding an edge. Guards never carry placeholders; they are
/// evaluated against the observable state as written.
#[derive(Debug, Clone, PartialEq)]
pub enum Guard {
    /// True when the element query resolves to at least one element.
    Exists(ElementQuery),
    /// True when the state path resolves and equals the literal.
    Equals { path: String, value: String },
    /// True when the named application has focus.
    FocusedApp(String),
    /// Logical negation.
    Not(Box<Guard>),
}

/// `app.window.element-name` query; the element name may itself contain dots.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementQuery {
    pub app: String,
    pub window: String,
    pub element: String,
}

impl ElementQuery {
    /// Parse `app.<window>.<element-name>`. Only the first two dots split.
    pub fn parse(s: &str) -> Option<Self> {
        let (app, rest) = s.split_once('.')?;
        let (window, element) = rest.split_once('.')?;
        if app.is_empty() || window.is_empty() || element.is_empty() {
            return None;
        }
        Some(ElementQuery {
            app: app.to_string(),
            window: window.to_string(),
            element: element.to_string(),
        })
    }
}

impl std::fmt::Display for ElementQuery {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}.{}.{}", self.app, self.window, self.element)
    }
}

/// Immutable library of validated skills plus the composition graph.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SkillLibrary {
    pub skills: BTreeMap<String, SkillSpec>,
    pub composition: CompositionGraph,
}

impl SkillLibrary {
    pub fn skill(&self, id: &str) -> Option<&SkillSpec> {
        self.skills.get(id)
    }

    pub fn len(&self) -> usize {
        self.skills.len()
    }

    pub fn is_empty(&self) -> bool {
        self.skills.is_empty()
    }
}

/// Whether a composition edge stays within one application.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompositionScope {
    SingleApp,
    CrossApp,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompositionEdge {
    pub from: String,
    pub to: String,
    pub scope: CompositionScope,
}

/// Directed graph over skills; walks along its edges define multi-step tasks.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CompositionGraph {
    /// Skill ids participating in the graph (edge endpoints and entries).
    pub nodes: Vec<String>,
    pub edges: Vec<CompositionEdge>,
    /// Declared walk entry points. Empty means every node is a valid start.
    pub entries: Vec<String>,
}

impl CompositionGraph {
    pub fn successors<'a>(&'a self, skill: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.edges
            .iter()
            .filter(move |e| e.from == skill)
            .map(|e| e.to.as_str())
    }

    pub fn has_edge(&self, from: &str, to: &str) -> bool {
        self.edges.iter().any(|e| e.from == from && e.to == to)
    }

    /// Valid walk starts: declared entries, or every node when none declared.
    pub fn start_nodes(&self) -> Vec<String> {
        if self.entries.is_empty() {
            self.nodes.clone()
        } else {
            self.entries.clone()
        }
    }

    /// True when `path` is a walk along composition edges (repeats allowed)
    /// beginning at a valid start node.
    pub fn is_walk(&self, path: &[String]) -> bool {
        match path.first() {
            None => false,
            Some(first) => {
                self.start_nodes().iter().any(|n| n == first)
                    && path.windows(2).all(|w| self.has_edge(&w[0], &w[1]))
            }
        }
    }
}

/// Extract placeholder names referenced in `text`, in order of appearance.
/// `{{` and `}}` are escapes for literal braces.
pub fn placeholders_in(text: &str) -> Vec<String> {
    let mut found = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'{' if i + 1 < bytes.len() && bytes[i + 1] == b'{' => i += 2,
            b'{' => {
                if let Some(end) = text[i + 1..].find('}') {
                    let name = &text[i + 1..i + 1 + end];
                    if is_placeholder_name(name) {
                        found.push(name.to_string());
                    }
                    i += end + 2;
                } else {
                    i += 1;
                }
            }
            b'}' if i + 1 < bytes.len() && bytes[i + 1] == b'}' => i += 2,
            _ => i += 1,
        }
    }
    found
}

fn is_placeholder_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Substitute `{name}` placeholders from `values`; `{{`/`}}` unescape to
/// literal braces. Unknown placeholder names are reported, not passed through.
pub fn substitute_placeholders(
    text: &str,
    values: &BTreeMap<String, String>,
) -> Result<String, String> {
    let mut out = String::with_capacity(text.len());
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'{' if i + 1 < bytes.len() && bytes[i + 1] == b'{' => {
                out.push('{');
                i += 2;
            }
            b'{' => match text[i + 1..].find('}') {
                Some(end) => {
                    let name = &text[i + 1..i + 1 + end];
                    if is_placeholder_name(name) {
                        match values.get(name) {
                            Some(value) => out.push_str(value),
                            None => return Err(name.to_string()),
                        }
                    } else {
                        out.push_str(&text[i..i + end + 2]);
                    }
                    i += end + 2;
                }
                None => {
                    out.push('{');
                    i += 1;
                }
            },
            b'}' if i + 1 < bytes.len() && bytes[i + 1] == b'}' => {
                out.push('}');
                i += 2;
            }
            _ => {
                out.push(bytes[i] as char);
                i += 1;
            }
        }
    }
    Ok(out)
}

/// True when `text` still contains an unescaped `{name}` token.
pub fn contains_placeholder(text: &str) -> bool {
    !placeholders_in(text).is_empty()
}
