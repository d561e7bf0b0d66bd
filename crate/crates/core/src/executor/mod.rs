//! Depth-first execution of configured skills against an environment.
//!
//! At each node the executor observes the environment, keeps the outgoing
//! edges whose guards hold, orders them by the traversal policy (uniform
//! shuffle or weight-proportional sampling), and applies the first edge's
//! action. Failed actions and guard dead-ends backtrack to the previous
//! choice point when the environment supports snapshot rollback; otherwise
//! the trace ends there.

use crate::args::{residual_placeholders, ConfiguredSkill};
use crate::env::{Environment, InputMode, Observation, PrimitiveAction, SnapshotToken};
use crate::rng::Lcg;
use crate::sim::evaluate_guard;
use crate::skill::{ActionKind, BaseAction, ExecutionGraph};

/// How the executor picks among eligible successor edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMode {
    /// Every eligible edge has equal probability.
    Uniform,
    /// Selection probability proportional to edge weight (default 1).
    Weighted,
}

impl SelectionMode {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "uniform" => Some(SelectionMode::Uniform),
            "weighted" => Some(SelectionMode::Weighted),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SelectionMode::Uniform => "uniform",
            SelectionMode::Weighted => "weighted",
        }
    }
}

/// Traversal parameters. `max_steps` bounds the number of applied actions
/// kept on the final path; it must be at least 1.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TraversalPolicy {
    pub mode: SelectionMode,
    pub seed: u64,
    pub max_steps: usize,
}

impl TraversalPolicy {
    pub fn uniform(seed: u64, max_steps: usize) -> Self {
        TraversalPolicy { mode: SelectionMode::Uniform, seed, max_steps }
    }

    pub fn weighted(seed: u64, max_steps: usize) -> Self {
        TraversalPolicy { mode: SelectionMode::Weighted, seed, max_steps }
    }
}

impl Default for TraversalPolicy {
    fn default() -> Self {
        TraversalPolicy::uniform(0, 64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeStatus {
    Success,
    DeadEnd,
    ActionError,
    StepBudgetExceeded,
}

impl OutcomeStatus {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "success" => Some(OutcomeStatus::Success),
            "dead_end" => Some(OutcomeStatus::DeadEnd),
            "action_error" => Some(OutcomeStatus::ActionError),
            "step_budget_exceeded" => Some(OutcomeStatus::StepBudgetExceeded),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            OutcomeStatus::Success => "success",
            OutcomeStatus::DeadEnd => "dead_end",
            OutcomeStatus::ActionError => "action_error",
            OutcomeStatus::StepBudgetExceeded => "step_budget_exceeded",
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ExecutionOutcome {
    pub status: OutcomeStatus,
    pub detail: String,
}

/// One applied edge: the trace records only actions that remain on the
/// final path, so consecutive steps are always edge-adjacent. Attempts
/// undone by backtracking are summarized in the outcome detail instead.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TraceStep {
    pub from: String,
    pub to: String,
    pub action: PrimitiveAction,
    /// `Some(true)` when the edge had a guard (only passing guards are
    /// applied); `None` for unguarded edges.
    pub guard_held: Option<bool>,
    /// Observation digest after the action was applied.
    pub digest: String,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ExecutionTrace {
    pub skill_id: String,
    pub steps: Vec<TraceStep>,
    pub outcome: ExecutionOutcome,
}

impl ExecutionTrace {
    pub fn succeeded(&self) -> bool {
        self.outcome.status == OutcomeStatus::Success
    }

    /// Node sequence of the final path, starting at the start node.
    pub fn node_path(&self, start: &str) -> Vec<String> {
        let mut nodes = vec![start.to_string()];
        nodes.extend(self.steps.iter().map(|s| s.to.clone()));
        nodes
    }
}

/// Why a semantic click target could not be resolved to an element.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ResolveError {
    #[error("no_match: no element matches `{0}`")]
    NoMatch(String),
    #[error("ambiguous_match: `{descriptor}` matches [{}]", candidates.join(", "))]
    AmbiguousMatch { descriptor: String, candidates: Vec<String> },
}

impl ResolveError {
    pub fn code(&self) -> &'static str {
        match self {
            ResolveError::NoMatch(_) => "no_match",
            ResolveError::AmbiguousMatch { .. } => "ambiguous_match",
        }
    }
}

/// Preconditions the executor refuses to run under.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExecutorError {
    #[error("resolved graph still contains placeholder `{{{0}}}`")]
    ResidualPlaceholder(String),
    #[error("graph has no start node")]
    NoStartNode,
}

/// Resolves a semantic target descriptor against the focused application.
///
/// Match tiers, in order: exact name, case-insensitive name, unique
/// case-insensitive substring. Two hits within the same tier are ambiguous.
pub fn resolve_target(descriptor: &str, obs: &Observation) -> Result<String, ResolveError> {
    let Some((_, app)) = obs.state.focused() else {
        return Err(ResolveError::NoMatch(descriptor.to_string()));
    };
    let all: Vec<(&str, &str)> = app
        .windows
        .iter()
        .flat_map(|w| w.elements.iter().map(|e| (e.id.as_str(), e.name.as_str())))
        .collect();
    let lower = descriptor.to_lowercase();
    let tiers: [&dyn Fn(&str) -> bool; 3] = [
        &|name: &str| name == descriptor,
        &|name: &str| name.to_lowercase() == lower,
        &|name: &str| name.to_lowercase().contains(&lower),
    ];
    for tier in tiers {
        let hits: Vec<&(&str, &str)> = all.iter().filter(|(_, name)| tier(name)).collect();
        match hits.len() {
            0 => continue,
            1 => return Ok(hits[0].0.to_string()),
            _ => {
                return Err(ResolveError::AmbiguousMatch {
                    descriptor: descriptor.to_string(),
                    candidates: hits.iter().map(|(_, name)| name.to_string()).collect(),
                })
            }
        }
    }
    Err(ResolveError::NoMatch(descriptor.to_string()))
}

/// Lowers a graph action to a primitive, resolving click targets against
/// the current observation. Errors are returned as display strings and
/// treated like action failures by the executor.
pub fn lower_action(action: &BaseAction, obs: &Observation) -> Result<PrimitiveAction, String> {
    let require = |key: &str| {
        action
            .param(key)
            .map(|v| v.to_string())
            .ok_or_else(|| format!("missing param `{key}` on {}", action.kind.as_str()))
    };
    match action.kind {
        ActionKind::LaunchApp => Ok(PrimitiveAction::LaunchApp { app: require("app")? }),
        ActionKind::SingleClick => {
            let target = require("target")?;
            let element = resolve_target(&target, obs).map_err(|e| e.to_string())?;
            Ok(PrimitiveAction::SingleClick { element })
        }
        ActionKind::TypeText => {
            let mode_str = require("input_mode")?;
            let input_mode = InputMode::parse(&mode_str)
                .ok_or_else(|| format!("invalid input_mode `{mode_str}`"))?;
            Ok(PrimitiveAction::TypeText { text: require("text")?, input_mode })
        }
        ActionKind::Hotkey => Ok(PrimitiveAction::Hotkey { keys: require("keys")? }),
        ActionKind::PressKey => Ok(PrimitiveAction::PressKey { key: require("key")? }),
        ActionKind::Wait => {
            let ms = match action.param("ms") {
                None => 0,
                Some(raw) => raw.parse::<u64>().map_err(|_| format!("invalid wait ms `{raw}`"))?,
            };
            Ok(PrimitiveAction::Wait { ms })
        }
        ActionKind::Script => Ok(PrimitiveAction::Script { command: require("command")? }),
    }
}

/// A start-to-terminal simple path through an execution graph.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphPath {
    pub nodes: Vec<String>,
    pub actions: Vec<BaseAction>,
}

/// Enumerates every simple path from the start node to any terminal with
/// at most `bound` edges, depth-first in edge declaration order.
pub fn enumerate_paths(g: &ExecutionGraph, bound: usize) -> Vec<GraphPath> {
    let Some(start) = g.start() else {
        return Vec::new();
    };
    let mut out = Vec::new();
    let mut nodes = vec![start.to_string()];
    let mut actions = Vec::new();
    walk(g, start, bound, &mut nodes, &mut actions, &mut out);
    out
}

fn walk(
    g: &ExecutionGraph,
    node: &str,
    bound: usize,
    nodes: &mut Vec<String>,
    actions: &mut Vec<BaseAction>,
    out: &mut Vec<GraphPath>,
) {
    if g.is_terminal(node) {
        out.push(GraphPath { nodes: nodes.clone(), actions: actions.clone() });
        return;
    }
    if actions.len() == bound {
        return;
    }
    for idx in g.edges_from(node) {
        let edge = &g.edges[idx];
        if nodes.iter().any(|n| n == &edge.to) {
            continue;
        }
        nodes.push(edge.to.clone());
        actions.push(edge.action.clone());
        walk(g, &edge.to, bound, nodes, actions, out);
        nodes.pop();
        actions.pop();
    }
}

struct Frame {
    node: String,
    alts: Vec<usize>,
    next: usize,
    token: Option<SnapshotToken>,
    steps_len: usize,
    path_len: usize,
}

/// Realizes a configured skill against the environment.
///
/// The environment is used as-is: callers decide whether to reset first.
/// Identical (skill, initial environment state, policy) triples produce
/// identical traces.
pub fn execute_skill(
    cs: &ConfiguredSkill,
    env: &mut dyn Environment,
    policy: &TraversalPolicy,
) -> Result<ExecutionTrace, ExecutorError> {
    assert!(policy.max_steps >= 1, "max_steps must be at least 1");
    if let Some(name) = residual_placeholders(&cs.resolved_graph).into_iter().next() {
        return Err(ExecutorError::ResidualPlaceholder(name));
    }
    let g = &cs.resolved_graph;
    let start = g.start().ok_or(ExecutorError::NoStartNode)?.to_string();

    let mut rng = Lcg::new(policy.seed);
    let rollback = env.supports_rollback();
    let mut frames: Vec<Frame> = Vec::new();
    let mut steps: Vec<TraceStep> = Vec::new();
    let mut path: Vec<String> = vec![start.clone()];
    // Most recent blocking condition; reported when alternatives run out.
    let mut block = ExecutionOutcome {
        status: OutcomeStatus::DeadEnd,
        detail: format!("no eligible edge at `{start}`"),
    };

    let mut node = start;
    'enter: loop {
        if g.is_terminal(&node) {
            return Ok(ExecutionTrace {
                skill_id: cs.spec.id.clone(),
                steps,
                outcome: ExecutionOutcome {
                    status: OutcomeStatus::Success,
                    detail: format!("reached terminal `{node}`"),
                },
            });
        }
        if steps.len() >= policy.max_steps {
            return Ok(ExecutionTrace {
                skill_id: cs.spec.id.clone(),
                steps,
                outcome: ExecutionOutcome {
                    status: OutcomeStatus::StepBudgetExceeded,
                    detail: format!("step budget {} exhausted at `{node}`", policy.max_steps),
                },
            });
        }

        let obs = env.observe();
        let mut alts: Vec<usize> = Vec::new();
        for idx in g.edges_from(&node) {
            let edge = &g.edges[idx];
            let guard_ok = edge
                .guard
                .as_ref()
                .map(|guard| evaluate_guard(guard, &obs.state))
                .unwrap_or(true);
            if guard_ok && !path.iter().any(|n| n == &edge.to) {
                alts.push(idx);
            }
        }
        if alts.is_empty() {
            block = ExecutionOutcome {
                status: OutcomeStatus::DeadEnd,
                detail: format!("no eligible edge at `{node}`"),
            };
        } else {
            order_alternatives(&mut alts, g, policy.mode, &mut rng);
            let token = if rollback && alts.len() > 1 { env.snapshot().ok() } else { None };
            frames.push(Frame {
                node: node.clone(),
                alts,
                next: 0,
                token,
                steps_len: steps.len(),
                path_len: path.len(),
            });
        }

        // Attempt driver: take the next untried alternative of the topmost
        // viable frame, restoring its snapshot when the frame is retried.
        'drive: loop {
            let frame_idx = loop {
                match frames.last() {
                    None => {
                        return Ok(ExecutionTrace {
                            skill_id: cs.spec.id.clone(),
                            steps,
                            outcome: block,
                        })
                    }
                    Some(f) if f.next < f.alts.len() => break frames.len() - 1,
                    Some(_) => {
                        frames.pop();
                    }
                }
            };
            // Frames below the top have already applied an action, so any
            // retry is a rewind and needs rollback support.
            let retried = frames[frame_idx].next > 0;
            if retried {
                if !rollback {
                    return Ok(ExecutionTrace {
                        skill_id: cs.spec.id.clone(),
                        steps,
                        outcome: block,
                    });
                }
                let frame = &mut frames[frame_idx];
                let Some(token) = frame.token else {
                    // No snapshot at this choice point: its entry state is
                    // unrecoverable, so its remaining alternatives are dead.
                    frame.next = frame.alts.len();
                    continue 'drive;
                };
                if env.restore(token).is_err() {
                    return Ok(ExecutionTrace {
                        skill_id: cs.spec.id.clone(),
                        steps,
                        outcome: block,
                    });
                }
                steps.truncate(frame.steps_len);
                path.truncate(frame.path_len);
            }

            let frame = &mut frames[frame_idx];
            let idx = frame.alts[frame.next];
            frame.next += 1;
            let edge = &g.edges[idx];
            let attempt = lower_action(&edge.action, &env.observe())
                .and_then(|prim| env.apply(&prim).map(|_| prim).map_err(|e| e.to_string()));
            match attempt {
                Ok(prim) => {
                    steps.push(TraceStep {
                        from: frame.node.clone(),
                        to: edge.to.clone(),
                        action: prim,
                        guard_held: edge.guard.as_ref().map(|_| true),
                        digest: env.observe().digest,
                    });
                    path.push(edge.to.clone());
                    node = edge.to.clone();
                    continue 'enter;
                }
                Err(detail) => {
                    block = ExecutionOutcome {
                        status: OutcomeStatus::ActionError,
                        detail: format!(
                            "{} at `{}`: {detail}",
                            edge.action.kind.as_str(),
                            frame.node
                        ),
                    };
                    continue 'drive;
                }
            }
        }
    }
}

/// Orders eligible edges per policy: the head is the selected edge and the
/// tail is the backtracking order. Uniform mode shuffles; weighted mode
/// repeatedly samples proportionally to weight without replacement.
fn order_alternatives(alts: &mut Vec<usize>, g: &ExecutionGraph, mode: SelectionMode, rng: &mut Lcg) {
    if alts.len() < 2 {
        return;
    }
    match mode {
        SelectionMode::Uniform => rng.shuffle(alts),
        SelectionMode::Weighted => {
            let mut remaining = std::mem::take(alts);
            while remaining.len() > 1 {
                let total: f64 = remaining.iter().map(|&i| g.edges[i].weight.unwrap_or(1.0)).sum();
                let mut x = rng.next_f64() * total;
                let mut chosen = remaining.len() - 1;
                for (pos, &idx) in remaining.iter().enumerate() {
                    x -= g.edges[idx].weight.unwrap_or(1.0);
                    if x <= 0.0 {
                        chosen = pos;
                        break;
                    }
                }
                alts.push(remaining.remove(chosen));
            }
            alts.push(remaining[0]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::args::{instantiate, ArgumentBinding};
    use crate::env::ActionError;
    use crate::rng::derive_seed;
    use crate::sim::Simulator;
    use crate::skill::parse_skill;

    fn configured(text: &str) -> ConfiguredSkill {
        let spec = parse_skill(text).unwrap();
        let binding = ArgumentBinding::new(spec.id.clone());
        instantiate(&spec, &binding).unwrap()
    }

    fn fresh_sim() -> Simulator {
        let mut sim = Simulator::new();
        sim.reset();
        sim
    }

    /// Simulator with snapshot support masked off.
    struct NoRollback(Simulator);

    impl Environment for NoRollback {
        fn reset(&mut self) {
            self.0.reset();
        }
        fn observe(&self) -> Observation {
            self.0.observe()
        }
        fn apply(&mut self, action: &PrimitiveAction) -> Result<(), ActionError> {
            self.0.apply(action)
        }
    }

    const LINEAR: &str = "\
skill LinearDemo
app SimEditor
intent \"Type and confirm\"
node n0 start
node n1
node n2
node t terminal
edge n0 -> n1 action launch_app(app=SimEditor)
edge n1 -> n2 action type_text(text=hi, input_mode=keyboard)
edge n2 -> t action press_key(key=enter)
";

    const TWO_KEYS: &str = "\
skill TwoKeys
app SimEditor
intent \"Press one of two keys\"
node n0 start
node n1
node t terminal
edge n0 -> n1 action launch_app(app=SimEditor)
edge n1 -> t action press_key(key=enter)
edge n1 -> t action press_key(key=escape)
";

    const RECOVER: &str = "\
skill Recover
app SimEditor
intent \"Press a key that works\"
node n0 start
node n1
node t terminal
edge n0 -> n1 action launch_app(app=SimEditor)
edge n1 -> t action press_key(key=nosuch)
edge n1 -> t action press_key(key=enter)
";

    #[test]
    fn linear_graph_runs_every_action() {
        let cs = configured(LINEAR);
        let mut sim = fresh_sim();
        let trace = execute_skill(&cs, &mut sim, &TraversalPolicy::uniform(1, 16)).unwrap();
        assert!(trace.succeeded(), "{:?}", trace.outcome);
        assert_eq!(trace.steps.len(), 3);
        assert_eq!(trace.node_path("n0"), ["n0", "n1", "n2", "t"]);
        assert_eq!(sim.state().apps["SimEditor"].var("buffer"), "hi\n");
    }

    #[test]
    fn terminal_start_node_succeeds_without_steps() {
        let cs = configured(
            "skill Nothing\napp SimEditor\nintent \"Do nothing\"\nnode only start terminal\n",
        );
        let mut sim = fresh_sim();
        let trace = execute_skill(&cs, &mut sim, &TraversalPolicy::uniform(0, 4)).unwrap();
        assert!(trace.succeeded());
        assert!(trace.steps.is_empty());
    }

    #[test]
    fn uniform_branch_frequencies_converge_to_half() {
        let cs = configured(TWO_KEYS);
        let runs = 10_000;
        let mut enters = 0usize;
        for i in 0..runs {
            let mut sim = fresh_sim();
            let policy = TraversalPolicy::uniform(derive_seed(0xA11CE, "uniform", i), 8);
            let trace = execute_skill(&cs, &mut sim, &policy).unwrap();
            assert!(trace.succeeded());
            if matches!(&trace.steps[1].action, PrimitiveAction::PressKey { key } if key == "enter") {
                enters += 1;
            }
        }
        let freq = enters as f64 / runs as f64;
        assert!((freq - 0.5).abs() <= 0.02, "enter frequency {freq}");
    }

    #[test]
    fn weighted_branch_frequencies_follow_weights() {
        let text = "\
skill WeightedKeys
app SimEditor
intent \"Prefer enter three to one\"
node n0 start
node n1
node t terminal
edge n0 -> n1 action launch_app(app=SimEditor)
edge n1 -> t action press_key(key=enter) weight 3
edge n1 -> t action press_key(key=escape) weight 1
";
        let cs = configured(text);
        let runs = 10_000;
        let mut enters = 0usize;
        for i in 0..runs {
            let mut sim = fresh_sim();
            let policy = TraversalPolicy::weighted(derive_seed(0xB0B, "weighted", i), 8);
            let trace = execute_skill(&cs, &mut sim, &policy).unwrap();
            assert!(trace.succeeded());
            if matches!(&trace.steps[1].action, PrimitiveAction::PressKey { key } if key == "enter") {
                enters += 1;
            }
        }
        let freq = enters as f64 / runs as f64;
        assert!((freq - 0.75).abs() <= 0.02, "enter frequency {freq}");
    }

    #[test]
    fn false_guard_excludes_edge_entirely() {
        let text = "\
skill GuardDemo
app SimEditor
intent \"Skip the dialog branch\"
node n0 start
node n1
node t terminal
edge n0 -> n1 action launch_app(app=SimEditor)
edge n1 -> t action single_click(target=Cancel) guard exists(SimEditor.SaveDialog.File Name)
edge n1 -> t action press_key(key=enter)
";
        let cs = configured(text);
        for i in 0..200 {
            let mut sim = fresh_sim();
            let trace = execute_skill(&cs, &mut sim, &TraversalPolicy::uniform(i, 8)).unwrap();
            assert!(trace.succeeded());
            assert!(
                matches!(&trace.steps[1].action, PrimitiveAction::PressKey { key } if key == "enter"),
                "guarded branch taken with no dialog open"
            );
            assert_eq!(trace.steps[1].guard_held, None);
        }
    }

    #[test]
    fn true_guard_admits_edge() {
        let text = "\
skill CancelDialog
app SimEditor
intent \"Open then cancel the save dialog\"
node n0 start
node n1
node n2
node t terminal
edge n0 -> n1 action launch_app(app=SimEditor)
edge n1 -> n2 action hotkey(keys=ctrl+s)
edge n2 -> t action single_click(target=Cancel) guard exists(SimEditor.SaveDialog.File Name)
";
        let cs = configured(text);
        let mut sim = fresh_sim();
        let trace = execute_skill(&cs, &mut sim, &TraversalPolicy::uniform(5, 8)).unwrap();
        assert!(trace.succeeded(), "{:?}", trace.outcome);
        assert_eq!(trace.steps[2].guard_held, Some(true));
        assert_eq!(sim.state().apps["SimEditor"].var("dialog"), "");
    }

    #[test]
    fn backtracking_recovers_from_action_failure() {
        let cs = configured(RECOVER);
        for i in 0..200 {
            let mut sim = fresh_sim();
            let trace = execute_skill(&cs, &mut sim, &TraversalPolicy::uniform(i, 8)).unwrap();
            assert!(trace.succeeded(), "seed {i}: {:?}", trace.outcome);
            assert_eq!(trace.steps.len(), 2, "failed attempt must not stay in the trace");
            assert!(
                matches!(&trace.steps[1].action, PrimitiveAction::PressKey { key } if key == "enter")
            );
        }
    }

    #[test]
    fn without_rollback_failure_ends_the_trace() {
        let cs = configured(RECOVER);
        let mut failures = 0usize;
        let mut successes = 0usize;
        for i in 0..200 {
            let mut env = NoRollback(fresh_sim());
            let trace = execute_skill(&cs, &mut env, &TraversalPolicy::uniform(i, 8)).unwrap();
            match trace.outcome.status {
                OutcomeStatus::Success => successes += 1,
                OutcomeStatus::ActionError => {
                    failures += 1;
                    assert_eq!(trace.steps.len(), 1);
                    assert!(trace.outcome.detail.contains("press_key"), "{}", trace.outcome.detail);
                }
                other => panic!("unexpected outcome {other:?}"),
            }
        }
        assert!(successes > 0 && failures > 0, "{successes} successes, {failures} failures");
    }

    #[test]
    fn all_guards_false_is_a_dead_end() {
        let text = "\
skill Stuck
app SimEditor
intent \"Wait for a dialog that never opens\"
node n0 start
node n1
node t terminal
edge n0 -> n1 action launch_app(app=SimEditor)
edge n1 -> t action press_key(key=enter) guard exists(SimEditor.SaveDialog.File Name)
";
        let cs = configured(text);
        let mut sim = fresh_sim();
        let trace = execute_skill(&cs, &mut sim, &TraversalPolicy::uniform(0, 8)).unwrap();
        assert_eq!(trace.outcome.status, OutcomeStatus::DeadEnd);
        assert!(trace.outcome.detail.contains("n1"), "{}", trace.outcome.detail);
        assert_eq!(trace.steps.len(), 1);
    }

    #[test]
    fn cycles_are_cut_by_the_simple_path_rule() {
        let text = "\
skill Loop
app SimEditor
intent \"Escape a cycle\"
node n0 start
node a
node b
node t terminal
edge n0 -> a action launch_app(app=SimEditor)
edge a -> b action press_key(key=enter)
edge b -> a action press_key(key=enter)
edge b -> t action press_key(key=escape)
";
        let cs = configured(text);
        for i in 0..50 {
            let mut sim = fresh_sim();
            let trace = execute_skill(&cs, &mut sim, &TraversalPolicy::uniform(i, 16)).unwrap();
            assert!(trace.succeeded());
            assert_eq!(trace.node_path("n0"), ["n0", "a", "b", "t"]);
        }
    }

    #[test]
    fn step_budget_caps_the_trace() {
        let cs = configured(LINEAR);
        let mut sim = fresh_sim();
        let trace = execute_skill(&cs, &mut sim, &TraversalPolicy::uniform(0, 2)).unwrap();
        assert_eq!(trace.outcome.status, OutcomeStatus::StepBudgetExceeded);
        assert_eq!(trace.steps.len(), 2);
    }

    #[test]
    fn identical_inputs_give_identical_traces() {
        let cs = configured(RECOVER);
        let policy = TraversalPolicy::uniform(42, 8);
        let mut a = fresh_sim();
        let mut b = fresh_sim();
        let ta = execute_skill(&cs, &mut a, &policy).unwrap();
        let tb = execute_skill(&cs, &mut b, &policy).unwrap();
        assert_eq!(ta, tb);
    }

    #[test]
    fn successful_traces_follow_enumerated_paths() {
        let text = "\
skill Diamond
app SimEditor
intent \"Two ways to the same place\"
node n0 start
node a
node b
node t terminal
edge n0 -> a action launch_app(app=SimEditor)
edge n0 -> b action launch_app(app=SimEditor)
edge a -> t action press_key(key=enter)
edge b -> t action press_key(key=escape)
";
        let cs = configured(text);
        let paths = enumerate_paths(&cs.resolved_graph, 8);
        assert_eq!(paths.len(), 2);
        let node_seqs: Vec<Vec<String>> = paths.iter().map(|p| p.nodes.clone()).collect();
        let mut seen = std::collections::BTreeSet::new();
        for i in 0..50 {
            let mut sim = fresh_sim();
            let trace = execute_skill(&cs, &mut sim, &TraversalPolicy::uniform(i, 8)).unwrap();
            assert!(trace.succeeded());
            let nodes = trace.node_path("n0");
            assert!(node_seqs.contains(&nodes), "trace path {nodes:?} not enumerated");
            seen.insert(nodes);
        }
        assert_eq!(seen.len(), 2, "both branches should occur across seeds");
    }

    #[test]
    fn enumerate_paths_respects_the_bound() {
        let text = "\
skill Five
app SimEditor
intent \"Five waits\"
node n0 start
node n1
node n2
node n3
node n4
node t terminal
edge n0 -> n1 action wait(ms=1)
edge n1 -> n2 action wait(ms=1)
edge n2 -> n3 action wait(ms=1)
edge n3 -> n4 action wait(ms=1)
edge n4 -> t action wait(ms=1)
";
        let g = &configured(text).resolved_graph;
        let full = enumerate_paths(g, 5);
        assert_eq!(full.len(), 1);
        assert_eq!(full[0].actions.len(), 5);
        assert!(enumerate_paths(g, 4).is_empty());
    }

    #[test]
    fn resolve_target_tiers_and_errors() {
        let mut sim = fresh_sim();
        sim.apply(&PrimitiveAction::LaunchApp { app: "SimFiles".to_string() }).unwrap();
        let obs = sim.observe();
        let exact = resolve_target("Address", &obs).unwrap();
        assert_eq!(resolve_target("address", &obs).unwrap(), exact);
        let go_up = resolve_target("go u", &obs).unwrap();
        assert_ne!(go_up, exact);
        match resolve_target("Do", &obs) {
            Err(ResolveError::AmbiguousMatch { candidates, .. }) => {
                assert_eq!(candidates.len(), 2, "{candidates:?}");
            }
            other => panic!("expected ambiguous_match, got {other:?}"),
        }
        let missing = resolve_target("Zebra", &obs).unwrap_err();
        assert_eq!(missing.code(), "no_match");
        let blank = Simulator::new().observe();
        assert!(resolve_target("Address", &blank).is_err());
    }

    #[test]
    fn residual_placeholders_are_refused() {
        let text = "\
skill Leaky
app SimEditor
intent \"Type {word}\"
arg word finite{a, b}
node n0 start
node t terminal
edge n0 -> t action type_text(text={word}, input_mode=keyboard)
";
        let spec = parse_skill(text).unwrap();
        let cs = ConfiguredSkill {
            resolved_graph: spec.graph.clone(),
            binding: ArgumentBinding::new(spec.id.clone()),
            spec,
        };
        let mut sim = fresh_sim();
        let err = execute_skill(&cs, &mut sim, &TraversalPolicy::uniform(0, 8)).unwrap_err();
        assert_eq!(err, ExecutorError::ResidualPlaceholder("word".to_string()));
    }
}
