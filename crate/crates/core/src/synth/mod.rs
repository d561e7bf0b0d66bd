//! Task synthesis: seeded walks over the composition graph become
//! executable tasks with rendered instructions, gold skill sequences,
//! and mechanical goal checks.
//!
//! Determinism contract: (library, seed) fully determines every sampled
//! walk, every argument value, and therefore the exported dataset bytes.

mod template;

pub use template::{matching_template, render, InstructionTemplate, TEMPLATES};

use std::collections::{BTreeMap, BTreeSet};
use std::ops::RangeInclusive;
use std::path::Path;

use crate::args::{instantiate, sample_value, validate_binding, ArgumentBinding};
use crate::env::Environment;
use crate::executor::{execute_skill, OutcomeStatus, TraversalPolicy};
use crate::rng::{derive_seed, Lcg};
use crate::sim::{check_goal, GoalCheck, GoalReport};
use crate::skill::{substitute_placeholders, CompositionGraph, SkillLibrary};

/// Longest sampleable walk, in skills.
pub const MAX_WALK_LEN: usize = 12;

/// One synthesized task: what to say, what to do, and how to judge it.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthTask {
    pub id: String,
    /// Application tags touched by the gold sequence, joined with `+`.
    pub domain: String,
    pub instruction: String,
    /// Gold sequence: each binding names its skill and carries its values.
    pub steps: Vec<ArgumentBinding>,
    /// Final-state assertion derived from the last skill's effect.
    pub goal: GoalCheck,
    pub seed: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error("length range {lo}..={hi} must lie within 1..={MAX_WALK_LEN}")]
    InvalidLengthRange { lo: usize, hi: usize },
    #[error("composition graph has no walk with length in {lo}..={hi}")]
    NoWalk { lo: usize, hi: usize },
    #[error("`{0}` is not a walk from a composition entry")]
    NotAWalk(String),
    #[error("unknown skill id `{0}`")]
    UnknownSkill(String),
    #[error("binding for `{skill}` is invalid: {}", codes.join(", "))]
    InvalidBinding { skill: String, codes: Vec<String> },
    #[error("final skill `{0}` has no effect annotation to derive a goal from")]
    MissingEffect(String),
    #[error("placeholder `{name}` in skill `{skill}` is unbound")]
    UnboundPlaceholder { skill: String, name: String },
    #[error("template reference `{{{token}}}`: {reason}")]
    Template { token: String, reason: String },
    #[error("task goal differs from the final skill's effect")]
    GoalMismatch,
    #[error("step {step} `{skill}` replayed to {status}: {detail}")]
    ReplayFailed {
        step: usize,
        skill: String,
        status: String,
        detail: String,
    },
}

/// Sample a seeded walk along composition edges with a length (in skills)
/// drawn from `lengths`. Dead ends are avoided by only stepping onto
/// nodes that can still complete the chosen length; if no start can,
/// the requested range is reported as unsatisfiable.
pub fn sample_path(
    cg: &CompositionGraph,
    lengths: RangeInclusive<usize>,
    seed: u64,
) -> Result<Vec<String>, SynthError> {
    let (lo, hi) = (*lengths.start(), *lengths.end());
    if lo < 1 || hi > MAX_WALK_LEN || lo > hi {
        return Err(SynthError::InvalidLengthRange { lo, hi });
    }

    // viable[k] = nodes from which a walk of exactly k nodes exists.
    let mut viable: Vec<BTreeSet<&str>> = vec![BTreeSet::new(); hi + 1];
    if hi >= 1 {
        viable[1] = cg.nodes.iter().map(String::as_str).collect();
    }
    for k in 2..=hi {
        viable[k] = cg
            .nodes
            .iter()
            .map(String::as_str)
            .filter(|n| cg.successors(n).any(|s| viable[k - 1].contains(s)))
            .collect();
    }

    let starts = cg.start_nodes();
    let feasible: Vec<usize> = (lo..=hi)
        .filter(|&k| starts.iter().any(|s| viable[k].contains(s.as_str())))
        .collect();
    if feasible.is_empty() {
        return Err(SynthError::NoWalk { lo, hi });
    }

    let mut rng = Lcg::new(seed);
    let length = feasible[rng.next_range(feasible.len() as u64) as usize];
    let viable_starts: Vec<&String> = starts
        .iter()
        .filter(|s| viable[length].contains(s.as_str()))
        .collect();
    let mut current = viable_starts[rng.next_range(viable_starts.len() as u64) as usize].clone();
    let mut walk = vec![current.clone()];
    for remaining in (1..length).rev() {
        let candidates: Vec<&str> = cg
            .successors(&current)
            .filter(|s| viable[remaining].contains(s))
            .collect();
        current = candidates[rng.next_range(candidates.len() as u64) as usize].to_string();
        walk.push(current.clone());
    }
    Ok(walk)
}

/// Instantiate every argument along `path` with seeded domain samples and
/// assemble the task. Argument seeds are derived per (skill, argument,
/// step index) so reordering or renaming never silently reuses a value.
pub fn synthesize_task(
    lib: &SkillLibrary,
    path: &[String],
    seed: u64,
) -> Result<SynthTask, SynthError> {
    let mut steps = Vec::with_capacity(path.len());
    for (index, skill_id) in path.iter().enumerate() {
        let spec = lib
            .skill(skill_id)
            .ok_or_else(|| SynthError::UnknownSkill(skill_id.clone()))?;
        let mut binding = ArgumentBinding::new(skill_id.clone());
        for slot in &spec.arguments {
            let sub = derive_seed(seed, &format!("{skill_id}.{}", slot.name), index as u64);
            binding = binding.with(slot.name.clone(), sample_value(slot, sub));
        }
        steps.push(binding);
    }
    synthesize_with_bindings(lib, &steps, seed)
}

/// Assemble a task from caller-chosen bindings: validates the walk and
/// every binding, renders the instruction, and derives the goal from the
/// final skill's effect.
pub fn synthesize_with_bindings(
    lib: &SkillLibrary,
    steps: &[ArgumentBinding],
    seed: u64,
) -> Result<SynthTask, SynthError> {
    let path: Vec<String> = steps.iter().map(|b| b.skill_id.clone()).collect();
    if !lib.composition.is_walk(&path) {
        return Err(SynthError::NotAWalk(path.join(" -> ")));
    }
    for binding in steps {
        let issues = validate_binding(lib, binding)
            .map_err(|_| SynthError::UnknownSkill(binding.skill_id.clone()))?;
        if !issues.is_empty() {
            return Err(SynthError::InvalidBinding {
                skill: binding.skill_id.clone(),
                codes: issues.iter().map(|i| i.code()).collect(),
            });
        }
    }

    let last = steps.last().expect("is_walk rejects empty paths");
    let final_spec = lib.skill(&last.skill_id).expect("validated above");
    let effect = final_spec
        .effect
        .as_ref()
        .ok_or_else(|| SynthError::MissingEffect(final_spec.id.clone()))?;
    let unbound = |name| SynthError::UnboundPlaceholder {
        skill: final_spec.id.clone(),
        name,
    };
    let goal = GoalCheck::single(
        substitute_placeholders(&effect.path, &last.values).map_err(unbound)?,
        substitute_placeholders(&effect.expected, &last.values).map_err(unbound)?,
    );

    Ok(SynthTask {
        id: format!("task-{:016x}", derive_seed(seed, &path.join(">"), path.len() as u64)),
        domain: domain_of(lib, &path),
        instruction: render_instruction(lib, steps)?,
        steps: steps.to_vec(),
        goal,
        seed,
    })
}

/// Synthesize `count` tasks deterministically from `seed`: task `i`
/// samples its walk with a "walk"-derived seed and its arguments with a
/// "task"-derived seed.
pub fn synthesize_dataset(
    lib: &SkillLibrary,
    count: usize,
    lengths: RangeInclusive<usize>,
    seed: u64,
) -> Result<Vec<SynthTask>, SynthError> {
    let mut tasks = Vec::with_capacity(count);
    for i in 0..count as u64 {
        let path = sample_path(&lib.composition, lengths.clone(), derive_seed(seed, "walk", i))?;
        tasks.push(synthesize_task(lib, &path, derive_seed(seed, "task", i))?);
    }
    Ok(tasks)
}

/// Best-matching template, else the enumerated fallback: the first
/// skill's rendered intent, then one "Then ..." sentence per later skill.
fn render_instruction(lib: &SkillLibrary, steps: &[ArgumentBinding]) -> Result<String, SynthError> {
    let path: Vec<&str> = steps.iter().map(|b| b.skill_id.as_str()).collect();
    if let Some(found) = matching_template(&path) {
        return render(found.pattern, steps);
    }
    let mut sentences = Vec::with_capacity(steps.len());
    for (index, binding) in steps.iter().enumerate() {
        let spec = lib
            .skill(&binding.skill_id)
            .ok_or_else(|| SynthError::UnknownSkill(binding.skill_id.clone()))?;
        let rendered = substitute_placeholders(&spec.intent, &binding.values).map_err(|name| {
            SynthError::UnboundPlaceholder {
                skill: spec.id.clone(),
                name,
            }
        })?;
        if index == 0 {
            sentences.push(rendered);
        } else {
            sentences.push(format!("Then {}", decapitalize(&rendered)));
        }
    }
    Ok(format!("{}.", sentences.join(". ")))
}

/// Lowercase a leading sentence-case letter; acronyms and names keep
/// their capital (second letter uppercase means it is not sentence case).
fn decapitalize(s: &str) -> String {
    let mut chars = s.chars();
    match (chars.next(), chars.next()) {
        (Some(first), second)
            if first.is_ascii_uppercase() && second.is_none_or(|c| c.is_ascii_lowercase()) =>
        {
            format!("{}{}", first.to_ascii_lowercase(), &s[1..])
        }
        _ => s.to_string(),
    }
}

/// Application tags along the path, deduplicated in first-appearance order.
fn domain_of(lib: &SkillLibrary, path: &[String]) -> String {
    let mut apps: Vec<String> = Vec::new();
    for id in path {
        if let Some(spec) = lib.skill(id) {
            if !apps.contains(&spec.application) {
                apps.push(spec.application.clone());
            }
        }
    }
    apps.join("+")
}

/// Re-check a constructed or imported task against the library: walk
/// membership, binding validity, and goal consistency with the final
/// skill's effect.
pub fn validate_task(lib: &SkillLibrary, task: &SynthTask) -> Result<(), SynthError> {
    let rebuilt = synthesize_with_bindings(lib, &task.steps, task.seed)?;
    if rebuilt.goal != task.goal {
        return Err(SynthError::GoalMismatch);
    }
    Ok(())
}

/// Execute the gold sequence on `env` (the caller resets it first) and
/// check the goal against the final state. Per-step traversal seeds
/// derive from the task seed, so replays are reproducible.
pub fn replay_task(
    lib: &SkillLibrary,
    task: &SynthTask,
    env: &mut dyn Environment,
) -> Result<GoalReport, SynthError> {
    for (step, binding) in task.steps.iter().enumerate() {
        let spec = lib
            .skill(&binding.skill_id)
            .ok_or_else(|| SynthError::UnknownSkill(binding.skill_id.clone()))?;
        let configured = instantiate(spec, binding).map_err(|e| SynthError::InvalidBinding {
            skill: binding.skill_id.clone(),
            codes: vec![e.to_string()],
        })?;
        let policy = TraversalPolicy::uniform(derive_seed(task.seed, &binding.skill_id, step as u64), 64);
        let trace = execute_skill(&configured, env, &policy).map_err(|e| SynthError::ReplayFailed {
            step,
            skill: binding.skill_id.clone(),
            status: "executor_error".to_string(),
            detail: e.to_string(),
        })?;
        if trace.outcome.status != OutcomeStatus::Success {
            return Err(SynthError::ReplayFailed {
                step,
                skill: binding.skill_id.clone(),
                status: trace.outcome.status.as_str().to_string(),
                detail: trace.outcome.detail,
            });
        }
    }
    Ok(check_goal(&task.goal, &env.observe().state))
}

/// Problems reading or writing a dataset file.
#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {reason}")]
    Malformed {
        path: String,
        line: usize,
        reason: String,
    },
}

#[derive(serde::Serialize, serde::Deserialize)]
struct StepRecord {
    skill: String,
    args: BTreeMap<String, String>,
}

/// Wire schema for one dataset line; field order is the file format.
#[derive(serde::Serialize, serde::Deserialize)]
struct TaskRecord {
    id: String,
    domain: String,
    instruction: String,
    steps: Vec<StepRecord>,
    goal: GoalCheck,
    seed: u64,
}

impl From<&SynthTask> for TaskRecord {
    fn from(task: &SynthTask) -> Self {
        TaskRecord {
            id: task.id.clone(),
            domain: task.domain.clone(),
            instruction: task.instruction.clone(),
            steps: task
                .steps
                .iter()
                .map(|b| StepRecord {
                    skill: b.skill_id.clone(),
                    args: b.values.clone(),
                })
                .collect(),
            goal: task.goal.clone(),
            seed: task.seed,
        }
    }
}

impl From<TaskRecord> for SynthTask {
    fn from(record: TaskRecord) -> Self {
        SynthTask {
            id: record.id,
            domain: record.domain,
            instruction: record.instruction,
            steps: record
                .steps
                .into_iter()
                .map(|s| ArgumentBinding {
                    skill_id: s.skill,
                    values: s.args,
                })
                .collect(),
            goal: record.goal,
            seed: record.seed,
        }
    }
}

/// Write one JSON record per line; returns the number written.
pub fn export_dataset(tasks: &[SynthTask], path: &Path) -> Result<usize, DatasetError> {
    let mut out = String::new();
    for task in tasks {
        out.push_str(&serde_json::to_string(&TaskRecord::from(task)).expect("task serializes"));
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(tasks.len())
}

/// Read a dataset written by `export_dataset`. Blank lines are skipped;
/// anything else that fails to parse is reported with its line number.
pub fn import_dataset(path: &Path) -> Result<Vec<SynthTask>, DatasetError> {
    let text = std::fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut tasks = Vec::new();
    for (number, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: TaskRecord =
            serde_json::from_str(line).map_err(|e| DatasetError::Malformed {
                path: path.display().to_string(),
                line: number + 1,
                reason: e.to_string(),
            })?;
        tasks.push(record.into());
    }
    Ok(tasks)
}
