//! Per-application library statistics over action-primitive counts.
//!
//! A skill's primitive count is the length of its longest guard-free path
//! from start to a terminal. Skills whose every start-to-terminal path is
//! guarded fall back to the longest path overall.

use std::collections::BTreeMap;

use crate::skill::{ExecutionGraph, SkillLibrary};

#[derive(Debug, Clone, PartialEq)]
pub struct AppStats {
    pub application: String,
    pub skill_count: usize,
    pub mean: f64,
    pub std_dev: f64,
    pub min: usize,
    pub max: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LibraryStats {
    /// One row per application tag, sorted by tag.
    pub per_app: Vec<AppStats>,
    /// Aggregate over every skill in the library.
    pub total: AppStats,
}

/// Number of actions on the longest guard-free start-to-terminal simple
/// path; falls back to the longest guarded path when no guard-free path
/// reaches a terminal, and 0 when no path does.
pub fn primitive_count(graph: &ExecutionGraph) -> usize {
    match longest_path(graph, true) {
        Some(n) => n,
        None => longest_path(graph, false).unwrap_or(0),
    }
}

fn longest_path(graph: &ExecutionGraph, guard_free_only: bool) -> Option<usize> {
    let start = graph.start()?;
    if !graph.has_node(start) {
        return None;
    }
    let mut visited: Vec<&str> = Vec::new();
    dfs(graph, start, guard_free_only, &mut visited)
}

fn dfs<'a>(
    graph: &'a ExecutionGraph,
    node: &'a str,
    guard_free_only: bool,
    visited: &mut Vec<&'a str>,
) -> Option<usize> {
    visited.push(node);
    let mut best = if graph.is_terminal(node) { Some(0) } else { None };
    for idx in graph.edges_from(node) {
        let edge = &graph.edges[idx];
        if guard_free_only && edge.guard.is_some() {
            continue;
        }
        let to = edge.to.as_str();
        if !graph.has_node(to) || visited.contains(&to) {
            continue;
        }
        if let Some(tail) = dfs(graph, to, guard_free_only, visited) {
            let len = tail + 1;
            if best.map_or(true, |b| len > b) {
                best = Some(len);
            }
        }
    }
    visited.pop();
    best
}

/// Compute the per-application table plus the aggregate row.
pub fn library_stats(lib: &SkillLibrary) -> LibraryStats {
    let mut by_app: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    let mut all: Vec<usize> = Vec::new();
    for spec in lib.skills.values() {
        let count = primitive_count(&spec.graph);
        by_app.entry(spec.application.as_str()).or_default().push(count);
        all.push(count);
    }
    let per_app = by_app
        .into_iter()
        .map(|(app, counts)| summarize(app, &counts))
        .collect();
    LibraryStats {
        per_app,
        total: summarize("total", &all),
    }
}

/// Render the canonical aligned text table: one row per application in
/// tag order plus a total row; an empty library yields only the header.
pub fn format_stats_table(stats: &LibraryStats) -> String {
    fn row(app: &str, skills: &str, meanstd: &str, range: &str) -> String {
        format!("{app:<16}{skills:>6}  {meanstd:<13} {range}")
    }
    fn data_row(s: &AppStats) -> String {
        row(
            &s.application,
            &s.skill_count.to_string(),
            &format!("{:.2} \u{b1} {:.2}", s.mean, s.std_dev),
            &format!("[{}\u{2013}{}]", s.min, s.max),
        )
    }
    let mut lines = vec![row("application", "skills", "primitives", "range")];
    for app in &stats.per_app {
        lines.push(data_row(app));
    }
    if stats.total.skill_count > 0 {
        lines.push(data_row(&stats.total));
    }
    lines.join("\n") + "\n"
}

fn summarize(application: &str, counts: &[usize]) -> AppStats {
    if counts.is_empty() {
        return AppStats {
            application: application.to_string(),
            skill_count: 0,
            mean: 0.0,
            std_dev: 0.0,
            min: 0,
            max: 0,
        };
    }
    let n = counts.len() as f64;
    let mean = counts.iter().sum::<usize>() as f64 / n;
    let variance = counts
        .iter()
        .map(|&c| {
            let d = c as f64 - mean;
            d * d
        })
        .sum::<f64>()
        / n;
    AppStats {
        application: application.to_string(),
        skill_count: counts.len(),
        mean,
        std_dev: variance.sqrt(),
        min: *counts.iter().min().unwrap(),
        max: *counts.iter().max().unwrap(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skill::parse_skill;
    use std::collections::BTreeMap as Map;

    fn library_of(sources: &[&str]) -> SkillLibrary {
        let mut skills = Map::new();
        for src in sources {
            let spec = parse_skill(src).unwrap();
            skills.insert(spec.id.clone(), spec);
        }
        SkillLibrary {
            skills,
            composition: Default::default(),
        }
    }

    fn single_edge_skill(i: usize) -> String {
        format!(
            "skill BasicPrim{i}\napp System\nintent \"p{i}\"\nnode n0 start\nnode n1 terminal\nedge n0 -> n1 action press_key(key=enter)\n"
        )
    }

    #[test]
    fn single_edge_primitives_average_to_one() {
        let sources: Vec<String> = (0..29).map(single_edge_skill).collect();
        let refs: Vec<&str> = sources.iter().map(|s| s.as_str()).collect();
        let lib = library_of(&refs);
        let stats = library_stats(&lib);
        assert_eq!(stats.per_app.len(), 1);
        let row = &stats.per_app[0];
        assert_eq!(row.application, "System");
        assert_eq!(row.skill_count, 29);
        assert!((row.mean - 1.0).abs() < 1e-12);
        assert!(row.std_dev.abs() < 1e-12);
        assert_eq!((row.min, row.max), (1, 1));
        assert_eq!(stats.total.skill_count, 29);
    }

    #[test]
    fn linear_five_action_path_counts_five() {
        let src = "skill Long\napp A\nintent \"x\"\nnode a start\nnode b\nnode c\nnode d\nnode e\nnode f terminal\n\
edge a -> b action press_key(key=1)\nedge b -> c action press_key(key=2)\nedge c -> d action press_key(key=3)\n\
edge d -> e action press_key(key=4)\nedge e -> f action press_key(key=5)\n";
        let spec = parse_skill(src).unwrap();
        assert_eq!(primitive_count(&spec.graph), 5);
    }

    #[test]
    fn guarded_branches_are_skipped_when_a_guard_free_path_exists() {
        let src = "skill Branchy\napp A\nintent \"x\"\nnode a start\nnode b\nnode c terminal\n\
edge a -> b action press_key(key=1) guard focused_app(A)\nedge b -> c action press_key(key=2)\n\
edge a -> c action press_key(key=3)\n";
        let spec = parse_skill(src).unwrap();
        // The guarded two-step route does not count; the direct edge does.
        assert_eq!(primitive_count(&spec.graph), 1);
    }

    #[test]
    fn all_guarded_graph_falls_back_to_longest_path() {
        let src = "skill Gated\napp A\nintent \"x\"\nnode a start\nnode b\nnode c terminal\n\
edge a -> b action press_key(key=1) guard focused_app(A)\nedge b -> c action press_key(key=2) guard focused_app(A)\n";
        let spec = parse_skill(src).unwrap();
        assert_eq!(primitive_count(&spec.graph), 2);
    }

    #[test]
    fn longest_simple_path_ignores_cycles() {
        let src = "skill Loopy\napp A\nintent \"x\"\nnode a start\nnode b\nnode c terminal\n\
edge a -> b action press_key(key=1)\nedge b -> a action press_key(key=2)\nedge b -> c action press_key(key=3)\n";
        let spec = parse_skill(src).unwrap();
        assert_eq!(primitive_count(&spec.graph), 2);
    }

    #[test]
    fn empty_library_stats_are_zero() {
        let lib = SkillLibrary::default();
        let stats = library_stats(&lib);
        assert!(stats.per_app.is_empty());
        assert_eq!(stats.total.skill_count, 0);
        assert_eq!(stats.total.mean, 0.0);
    }
}
