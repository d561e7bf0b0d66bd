//! Line-oriented skill file parser and the matching canonical serializer.
//!
//! Grammar, one declaration per line, `#` starts a comment:
//!
//! ```text
//! skill <id>
//! app <tag>
//! intent "<text>"
//! basic
//! arg <name> finite{v1,v2,...} ["description"]
//! arg <name> open <generator-spec> ["description"]
//! effect equals(<state-path>, "<value>")
//! node <id> [start] [terminal]
//! edge <from> -> <to> action <kind>(k=v,...) [guard <pred>] [weight <w>]
//! ```

use std::collections::BTreeSet;

use crate::args::{parse_generator, serialize_generator};
use crate::skill::{
    ActionKind, ArgumentSlot, BaseAction, CompositionGraph, EffectTemplate, ElementQuery,
    ExecutionGraph, FeasibleDomain, GraphEdge, GraphNode, Guard, SkillSpec,
};
use std::collections::BTreeMap;

/// Parse failure with a 1-based line number (0 = whole document).
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            message: message.into(),
        }
    }
}

/// Parse one skill document.
pub fn parse_skill(text: &str) -> Result<SkillSpec, ParseError> {
    let mut id: Option<String> = None;
    let mut app: Option<String> = None;
    let mut intent: Option<String> = None;
    let mut basic = false;
    let mut arguments: Vec<ArgumentSlot> = Vec::new();
    let mut effect: Option<EffectTemplate> = None;
    let mut nodes: Vec<GraphNode> = Vec::new();
    let mut edges: Vec<GraphEdge> = Vec::new();
    let mut seen_nodes: BTreeSet<String> = BTreeSet::new();

    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        last_line = lineno;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let (keyword, rest) = match line.split_once(char::is_whitespace) {
            Some((k, r)) => (k, r.trim()),
            None => (line, ""),
        };
        match keyword {
            "skill" => {
                if id.is_some() {
                    return Err(ParseError::at(lineno, "duplicate `skill` declaration"));
                }
                if rest.is_empty() {
                    return Err(ParseError::at(lineno, "`skill` needs an identifier"));
                }
                id = Some(rest.to_string());
            }
            "app" => {
                if rest.is_empty() {
                    return Err(ParseError::at(lineno, "`app` needs a tag"));
                }
                app = Some(rest.to_string());
            }
            "intent" => {
                let mut cursor = Cursor::new(rest, lineno);
                intent = Some(cursor.quoted_string()?);
                cursor.expect_end()?;
            }
            "basic" => {
                if !rest.is_empty() {
                    return Err(ParseError::at(lineno, "`basic` takes no parameters"));
                }
                basic = true;
            }
            "arg" => arguments.push(parse_arg_line(rest, lineno, &arguments)?),
            "effect" => {
                let mut cursor = Cursor::new(rest, lineno);
                effect = Some(parse_effect(&mut cursor)?);
                cursor.expect_end()?;
            }
            "node" => {
                let mut parts = rest.split_whitespace();
                let node_id = parts
                    .next()
                    .ok_or_else(|| ParseError::at(lineno, "`node` needs an identifier"))?
                    .to_string();
                if !seen_nodes.insert(node_id.clone()) {
                    return Err(ParseError::at(lineno, format!("duplicate node id `{node_id}`")));
                }
                let mut node = GraphNode {
                    id: node_id,
                    is_start: false,
                    is_terminal: false,
                };
                for flag in parts {
                    match flag {
                        "start" => node.is_start = true,
                        "terminal" => node.is_terminal = true,
                        other => {
                            return Err(ParseError::at(
                                lineno,
                                format!("unknown node flag `{other}`"),
                            ))
                        }
                    }
                }
                nodes.push(node);
            }
            "edge" => edges.push(parse_edge_line(rest, lineno)?),
            other => {
                return Err(ParseError::at(lineno, format!("unknown keyword `{other}`")));
            }
        }
    }

    let id = id.ok_or_else(|| ParseError::at(last_line, "missing `skill` declaration"))?;
    let app = app.ok_or_else(|| ParseError::at(last_line, "missing `app` declaration"))?;
    let intent = intent.ok_or_else(|| ParseError::at(last_line, "missing `intent` declaration"))?;
    if nodes.is_empty() {
        return Err(ParseError::at(last_line, "skill declares no nodes"));
    }
    Ok(SkillSpec {
        id,
        application: app,
        intent,
        basic,
        arguments,
        effect,
        graph: ExecutionGraph { nodes, edges },
    })
}

fn strip_comment(line: &str) -> &str {
    // A `#` outside quotes starts a comment.
    let mut in_quotes = false;
    let mut prev_backslash = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' if !prev_backslash => in_quotes = !in_quotes,
            '#' if !in_quotes => return &line[..i],
            _ => {}
        }
        prev_backslash = c == '\\' && !prev_backslash;
    }
    line
}

fn parse_arg_line(rest: &str, lineno: usize, existing: &[ArgumentSlot]) -> Result<ArgumentSlot, ParseError> {
    let (name, spec) = rest
        .split_once(char::is_whitespace)
        .ok_or_else(|| ParseError::at(lineno, "`arg` needs a name and a domain"))?;
    if existing.iter().any(|a| a.name == name) {
        return Err(ParseError::at(lineno, format!("duplicate argument `{name}`")));
    }
    let spec = spec.trim();
    let (domain, tail) = if let Some(body) = spec.strip_prefix("finite{") {
        let close = body
            .find('}')
            .ok_or_else(|| ParseError::at(lineno, "finite domain is missing `}`"))?;
        let values: Vec<String> = body[..close]
            .split(',')
            .map(|v| v.trim().to_string())
            .filter(|v| !v.is_empty())
            .collect();
        if values.is_empty() {
            return Err(ParseError::at(lineno, "finite domain has no values"));
        }
        (FeasibleDomain::Finite(values), body[close + 1..].trim())
    } else if let Some(gen_src) = spec.strip_prefix("open ") {
        let gen_src = gen_src.trim();
        // The generator spec ends at the closing paren that balances its
        // opening one; anything after is the optional description.
        let split = generator_end(gen_src)
            .ok_or_else(|| ParseError::at(lineno, "generator spec has unbalanced parentheses"))?;
        let gen = parse_generator(&gen_src[..split])
            .map_err(|e| ParseError::at(lineno, e))?;
        (FeasibleDomain::Open(gen), gen_src[split..].trim())
    } else {
        return Err(ParseError::at(
            lineno,
            format!("argument domain must start with `finite{{` or `open `, got `{spec}`"),
        ));
    };
    let description = if tail.is_empty() {
        String::new()
    } else {
        let mut cursor = Cursor::new(tail, lineno);
        let d = cursor.quoted_string()?;
        cursor.expect_end()?;
        d
    };
    Ok(ArgumentSlot {
        name: name.to_string(),
        domain,
        description,
    })
}

/// Byte offset just past the balanced `(...)` of a generator spec.
fn generator_end(s: &str) -> Option<usize> {
    let mut depth = 0usize;
    let mut in_quotes = false;
    let mut prev_backslash = false;
    for (i, c) in s.char_indices() {
        match c {
            '"' if !prev_backslash => in_quotes = !in_quotes,
            '(' if !in_quotes => depth += 1,
            ')' if !in_quotes => {
                depth = depth.checked_sub(1)?;
                if depth == 0 {
                    return Some(i + 1);
                }
            }
            _ => {}
        }
        prev_backslash = c == '\\' && !prev_backslash;
    }
    None
}

fn parse_effect(cursor: &mut Cursor) -> Result<EffectTemplate, ParseError> {
    let predicate = cursor.identifier()?;
    if predicate != "equals" {
        return Err(cursor.err(format!("effect predicate must be `equals`, got `{predicate}`")));
    }
    cursor.expect_char('(')?;
    let path = cursor.until_comma()?;
    let expected = cursor.value_until(')')?;
    cursor.expect_char(')')?;
    Ok(EffectTemplate { path, expected })
}

fn parse_edge_line(rest: &str, lineno: usize) -> Result<GraphEdge, ParseError> {
    let mut cursor = Cursor::new(rest, lineno);
    let from = cursor.word()?;
    cursor.expect_word("->")?;
    let to = cursor.word()?;
    cursor.expect_word("action")?;
    let kind_name = cursor.identifier()?;
    let kind = ActionKind::from_str(&kind_name)
        .ok_or_else(|| ParseError::at(lineno, format!("unknown action kind `{kind_name}`")))?;
    cursor.expect_char('(')?;
    let mut params = BTreeMap::new();
    cursor.skip_ws();
    if !cursor.peek_is(')') {
        loop {
            let key = cursor.param_key()?;
            cursor.expect_char('=')?;
            let value = cursor.value_until_any(&[',', ')'])?;
            if params.insert(key.clone(), value).is_some() {
                return Err(ParseError::at(lineno, format!("duplicate parameter `{key}`")));
            }
            cursor.skip_ws();
            if cursor.peek_is(',') {
                cursor.expect_char(',')?;
                cursor.skip_ws();
            } else {
                break;
            }
        }
    }
    cursor.expect_char(')')?;

    let mut guard = None;
    let mut weight = None;
    loop {
        cursor.skip_ws();
        if cursor.at_end() {
            break;
        }
        let word = cursor.word()?;
        match word.as_str() {
            "guard" => {
                if guard.is_some() {
                    return Err(ParseError::at(lineno, "duplicate `guard` clause"));
                }
                guard = Some(parse_guard(&mut cursor)?);
            }
            "weight" => {
                if weight.is_some() {
                    return Err(ParseError::at(lineno, "duplicate `weight` clause"));
                }
                let w_str = cursor.word()?;
                let w: f64 = w_str
                    .parse()
                    .map_err(|_| ParseError::at(lineno, format!("`{w_str}` is not a number")))?;
                weight = Some(w);
            }
            other => {
                return Err(ParseError::at(lineno, format!("unexpected token `{other}`")));
            }
        }
    }

    Ok(GraphEdge {
        from,
        to,
        action: BaseAction { kind, params },
        guard,
        weight,
    })
}

fn parse_guard(cursor: &mut Cursor) -> Result<Guard, ParseError> {
    let name = cursor.identifier()?;
    cursor.expect_char('(')?;
    let guard = match name.as_str() {
        "not" => {
            let inner = parse_guard(cursor)?;
            Guard::Not(Box::new(inner))
        }
        "exists" => {
            let query = cursor.value_until(')')?;
            let parsed = ElementQuery::parse(&query).ok_or_else(|| {
                ParseError::at(
                    cursor.line,
                    format!("`{query}` is not an `app.window.element` query"),
                )
            })?;
            Guard::Exists(parsed)
        }
        "equals" => {
            let path = cursor.until_comma()?;
            let value = cursor.value_until(')')?;
            Guard::Equals { path, value }
        }
        "focused_app" => {
            let app = cursor.value_until(')')?;
            Guard::FocusedApp(app)
        }
        other => {
            return Err(ParseError::at(
                cursor.line,
                format!("unknown guard predicate `{other}`"),
            ))
        }
    };
    cursor.expect_char(')')?;
    Ok(guard)
}

/// Character cursor over one line, tracking the line number for errors.
struct Cursor<'a> {
    text: &'a str,
    pos: usize,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str, line: usize) -> Self {
        Cursor { text, pos: 0, line }
    }

    fn err(&self, message: impl Into<String>) -> ParseError {
        ParseError::at(self.line, message)
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.text.len() - trimmed.len();
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos >= self.text.len()
    }

    fn peek_is(&mut self, c: char) -> bool {
        self.skip_ws();
        self.rest().starts_with(c)
    }

    fn expect_char(&mut self, c: char) -> Result<(), ParseError> {
        self.skip_ws();
        if self.rest().starts_with(c) {
            self.pos += c.len_utf8();
            Ok(())
        } else {
            Err(self.err(format!("expected `{c}`, found `{}`", head(self.rest()))))
        }
    }

    fn expect_end(&mut self) -> Result<(), ParseError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.err(format!("unexpected trailing `{}`", head(self.rest()))))
        }
    }

    /// Next whitespace-delimited word.
    fn word(&mut self) -> Result<String, ParseError> {
        self.skip_ws();
        let rest = self.rest();
        let end = rest
            .find(char::is_whitespace)
            .unwrap_or(rest.len());
        if end == 0 {
            return Err(self.err("expected a word, found end of line"));
        }
        self.pos += end;
        Ok(rest[..end].to_string())
    }

    fn expect_word(&mut self, expected: &str) -> Result<(), ParseError> {
        let got = self.word()?;
        if got == expected {
            Ok(())
        } else {
            Err(self.err(format!("expected `{expected}`, found `{got}`")))
        }
    }

    /// Identifier up to `(`, whitespace, or end.
    fn identifier(&mut self) -> Result<String, ParseError> {
        self.skip_ws();
        let rest = self.rest();
        let end = rest
            .find(|c: char| c == '(' || c.is_whitespace())
            .unwrap_or(rest.len());
        if end == 0 {
            return Err(self.err("expected an identifier"));
        }
        self.pos += end;
        Ok(rest[..end].to_string())
    }

    fn param_key(&mut self) -> Result<String, ParseError> {
        self.skip_ws();
        let rest = self.rest();
        let end = rest
            .find(|c: char| c == '=' || c.is_whitespace())
            .unwrap_or(rest.len());
        if end == 0 {
            return Err(self.err("expected a parameter name"));
        }
        self.pos += end;
        Ok(rest[..end].trim().to_string())
    }

    /// Raw or quoted value ending before an unquoted, paren-balanced `,`.
    fn until_comma(&mut self) -> Result<String, ParseError> {
        let v = self.value_until_any(&[','])?;
        self.expect_char(',')?;
        Ok(v)
    }

    fn value_until(&mut self, close: char) -> Result<String, ParseError> {
        self.value_until_any(&[close])
    }

    /// A parameter value: a double-quoted string, or raw text up to the first
    /// of `stops` at parenthesis depth zero. Raw text is trimmed.
    fn value_until_any(&mut self, stops: &[char]) -> Result<String, ParseError> {
        self.skip_ws();
        if self.rest().starts_with('"') {
            return self.quoted_string();
        }
        let rest = self.rest();
        let mut depth = 0usize;
        let mut end = rest.len();
        for (i, c) in rest.char_indices() {
            match c {
                '(' => depth += 1,
                ')' if depth > 0 => depth -= 1,
                c if depth == 0 && stops.contains(&c) => {
                    end = i;
                    break;
                }
                _ => {}
            }
        }
        let value = rest[..end].trim_end().to_string();
        self.pos += end;
        Ok(value)
    }

    /// A double-quoted string with `\"`, `\\`, and `\n` escapes.
    fn quoted_string(&mut self) -> Result<String, ParseError> {
        self.skip_ws();
        if !self.rest().starts_with('"') {
            return Err(self.err(format!("expected `\"`, found `{}`", head(self.rest()))));
        }
        self.pos += 1;
        let mut out = String::new();
        let mut chars = self.rest().char_indices();
        while let Some((i, c)) = chars.next() {
            match c {
                '"' => {
                    self.pos += i + 1;
                    return Ok(out);
                }
                '\\' => match chars.next() {
                    Some((_, '"')) => out.push('"'),
                    Some((_, '\\')) => out.push('\\'),
                    Some((_, 'n')) => out.push('\n'),
                    Some((_, other)) => {
                        return Err(self.err(format!("unknown escape `\\{other}`")))
                    }
                    None => return Err(self.err("dangling escape")),
                },
                c => out.push(c),
            }
        }
        Err(self.err("unterminated string"))
    }
}

fn head(s: &str) -> String {
    s.chars().take(12).collect()
}

// --- serialization -----------------------------------------------------

/// Render a skill back into its file form. Parsing the output yields a value
/// equal to the input.
pub fn serialize_skill(spec: &SkillSpec) -> String {
    let mut out = String::new();
    out.push_str(&format!("skill {}\n", spec.id));
    out.push_str(&format!("app {}\n", spec.application));
    out.push_str(&format!("intent \"{}\"\n", quote_escape(&spec.intent)));
    if spec.basic {
        out.push_str("basic\n");
    }
    for arg in &spec.arguments {
        let domain = match &arg.domain {
            FeasibleDomain::Finite(values) => format!("finite{{{}}}", values.join(",")),
            FeasibleDomain::Open(gen) => format!("open {}", serialize_generator(gen)),
        };
        if arg.description.is_empty() {
            out.push_str(&format!("arg {} {}\n", arg.name, domain));
        } else {
            out.push_str(&format!(
                "arg {} {} \"{}\"\n",
                arg.name,
                domain,
                quote_escape(&arg.description)
            ));
        }
    }
    if let Some(effect) = &spec.effect {
        out.push_str(&format!(
            "effect equals({}, {})\n",
            effect.path,
            value_literal(&effect.expected)
        ));
    }
    for node in &spec.graph.nodes {
        out.push_str(&format!("node {}", node.id));
        if node.is_start {
            out.push_str(" start");
        }
        if node.is_terminal {
            out.push_str(" terminal");
        }
        out.push('\n');
    }
    for edge in &spec.graph.edges {
        out.push_str(&format!(
            "edge {} -> {} action {}(",
            edge.from,
            edge.to,
            edge.action.kind.as_str()
        ));
        let mut first = true;
        for (key, value) in &edge.action.params {
            if !first {
                out.push_str(", ");
            }
            first = false;
            out.push_str(&format!("{key}={}", value_literal(value)));
        }
        out.push(')');
        if let Some(guard) = &edge.guard {
            out.push_str(&format!(" guard {}", serialize_guard(guard)));
        }
        if let Some(w) = edge.weight {
            out.push_str(&format!(" weight {w}"));
        }
        out.push('\n');
    }
    out
}

fn serialize_guard(guard: &Guard) -> String {
    match guard {
        Guard::Exists(query) => format!("exists({query})"),
        Guard::Equals { path, value } => {
            format!("equals({path}, {})", value_literal(value))
        }
        Guard::FocusedApp(app) => format!("focused_app({app})"),
        Guard::Not(inner) => format!("not({})", serialize_guard(inner)),
    }
}

/// Raw when safe under the value scanner; double-quoted otherwise.
fn value_literal(value: &str) -> String {
    let needs_quotes = value.is_empty()
        || value != value.trim()
        || value.starts_with('"')
        || value.contains([',', '\n', '#'])
        || !parens_balanced(value);
    if needs_quotes {
        format!("\"{}\"", quote_escape(value))
    } else {
        value.to_string()
    }
}

fn parens_balanced(value: &str) -> bool {
    let mut depth = 0i64;
    for c in value.chars() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return false;
                }
            }
            _ => {}
        }
    }
    depth == 0
}

fn quote_escape(s: &str) -> String {
    crate::args::escape_quoted(s)
}

// --- composition -------------------------------------------------------

/// Parsed composition file: edge endpoints plus declared entry skills.
/// Scope is inferred later, once application tags are known.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParsedComposition {
    pub edges: Vec<(String, String)>,
    pub entries: Vec<String>,
}

/// Parse a composition file: `compose <from> -> <to>` and `entry <skill>`
/// lines, with `#` comments.
pub fn parse_composition(text: &str) -> Result<ParsedComposition, ParseError> {
    let mut parsed = ParsedComposition::default();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let mut cursor = Cursor::new(line, lineno);
        let keyword = cursor.word()?;
        match keyword.as_str() {
            "compose" => {
                let from = cursor.word()?;
                cursor.expect_word("->")?;
                let to = cursor.word()?;
                cursor.expect_end()?;
                parsed.edges.push((from, to));
            }
            "entry" => {
                let skill = cursor.word()?;
                cursor.expect_end()?;
                parsed.entries.push(skill);
            }
            other => {
                return Err(ParseError::at(
                    lineno,
                    format!("unknown composition keyword `{other}`"),
                ))
            }
        }
    }
    Ok(parsed)
}

/// Build a composition graph from parsed edges and an app-tag lookup.
pub(crate) fn build_composition(
    parsed: &ParsedComposition,
    app_of: impl Fn(&str) -> Option<String>,
) -> CompositionGraph {
    use crate::skill::{CompositionEdge, CompositionScope};
    let mut nodes: Vec<String> = Vec::new();
    let push_node = |nodes: &mut Vec<String>, id: &str| {
        if !nodes.iter().any(|n| n == id) {
            nodes.push(id.to_string());
        }
    };
    let mut edges = Vec::new();
    for (from, to) in &parsed.edges {
        push_node(&mut nodes, from);
        push_node(&mut nodes, to);
        let scope = match (app_of(from), app_of(to)) {
            (Some(a), Some(b)) if a == b => CompositionScope::SingleApp,
            _ => CompositionScope::CrossApp,
        };
        edges.push(CompositionEdge {
            from: from.clone(),
            to: to.clone(),
            scope,
        });
    }
    for entry in &parsed.entries {
        push_node(&mut nodes, entry);
    }
    CompositionGraph {
        nodes,
        edges,
        entries: parsed.entries.clone(),
    }
}
