//! Retrieval-augmented agent loop: observe, generate queries, retrieve,
//! rerank against the basic-skill fallback set, configure, execute, and
//! append the outcome to episode memory, until the planner stops or the
//! step budget runs out.

mod planners;
pub mod wire;

pub use planners::{GoldPlanner, LastRecord, ScriptedAction, ScriptedPlanner, ScriptedRule};

use std::path::Path;

use crate::args::{instantiate, ArgumentBinding, ConfiguredSkill};
use crate::env::{Environment, Observation};
use crate::executor::{execute_skill, ExecutionOutcome, ExecutionTrace, OutcomeStatus, SelectionMode, TraversalPolicy};
use crate::retrieval::SkillIndex;
use crate::rng::{derive_seed, fnv1a};
use crate::sim::{check_goal, GoalCheck};
use crate::skill::{SkillLibrary, SkillSpec};

/// Episode budgets and executor defaults.
#[derive(Debug, Clone)]
pub struct AgentConfig {
    /// Query budget K: most queries the planner may issue per step.
    pub query_budget: usize,
    /// Skill budget L: merged retrieval candidates kept per step.
    pub skill_budget: usize,
    /// Most skill steps per episode.
    pub max_steps: usize,
    /// Branch selection mode for skill-graph traversal.
    pub selection: SelectionMode,
    /// Base seed; per-step traversal seeds derive from it.
    pub policy_seed: u64,
    /// Step budget within one skill graph.
    pub graph_step_budget: usize,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig {
            query_budget: 3,
            skill_budget: 5,
            max_steps: 30,
            selection: SelectionMode::Uniform,
            policy_seed: 0,
            graph_step_budget: 64,
        }
    }
}

impl AgentConfig {
    pub fn new(query_budget: usize, skill_budget: usize) -> Self {
        assert!(query_budget >= 1, "query budget K must be positive");
        assert!(skill_budget >= 1, "skill budget L must be positive");
        AgentConfig {
            query_budget,
            skill_budget,
            ..AgentConfig::default()
        }
    }
}

/// One candidate presented to the reranker.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SkillCard {
    pub skill: String,
    pub intent: String,
    /// Merged retrieval rank; `None` for fallback-only candidates.
    pub rank: Option<usize>,
    /// Member of the always-offered basic subset.
    pub basic: bool,
}

/// The reranker's verdict for one step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlannerChoice {
    Skill(String),
    Done,
    Fail,
}

/// One remembered skill attempt.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct MemoryRecord {
    pub step: usize,
    pub skill: String,
    pub binding_digest: String,
    /// Outcome label: an executor status or `config_error`.
    pub outcome: String,
    pub summary: String,
    /// True iff the outcome is not `success`.
    pub failure: bool,
}

/// Append-only episode memory: the instruction plus one record per
/// attempted skill.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct EpisodeMemory {
    instruction: String,
    records: Vec<MemoryRecord>,
}

impl EpisodeMemory {
    pub fn new(instruction: impl Into<String>) -> Self {
        EpisodeMemory {
            instruction: instruction.into(),
            records: Vec::new(),
        }
    }

    pub fn instruction(&self) -> &str {
        &self.instruction
    }

    pub fn records(&self) -> &[MemoryRecord] {
        &self.records
    }

    /// Records plus the instruction entry.
    pub fn len(&self) -> usize {
        self.records.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn last(&self) -> Option<&MemoryRecord> {
        self.records.last()
    }

    fn push(&mut self, record: MemoryRecord) {
        self.records.push(record);
    }

    /// Rebuild memory shipped over the wire; not a mutation path.
    pub(crate) fn from_parts(instruction: String, records: Vec<MemoryRecord>) -> Self {
        EpisodeMemory { instruction, records }
    }
}

/// Stable short digest of a binding's values, for memory and transcripts.
pub fn binding_digest(binding: &ArgumentBinding) -> String {
    let mut parts: Vec<&[u8]> = vec![binding.skill_id.as_bytes()];
    for (name, value) in &binding.values {
        parts.push(name.as_bytes());
        parts.push(value.as_bytes());
    }
    format!("{:016x}", fnv1a(&parts))
}

/// Canonical summary format: skill id, outcome label, one-line detail.
pub fn default_summary(skill: &ConfiguredSkill, outcome: &ExecutionOutcome) -> String {
    format!(
        "{}: {} ({})",
        skill.spec.id,
        outcome.status.as_str(),
        outcome.detail
    )
}

/// Append the summarized outcome of one executed skill; never mutates
/// prior records.
pub fn update_memory(
    memory: &mut EpisodeMemory,
    skill: &ConfiguredSkill,
    outcome: &ExecutionOutcome,
    summary: String,
) {
    let step = memory.records.len();
    memory.push(MemoryRecord {
        step,
        skill: skill.spec.id.clone(),
        binding_digest: binding_digest(&skill.binding),
        outcome: outcome.status.as_str().to_string(),
        summary,
        failure: outcome.status != OutcomeStatus::Success,
    });
}

/// The decision-making contract the episode loop drives. Implementations
/// must be deterministic for reproducible episodes; the loop enforces the
/// budgets, so a planner may over-produce queries without breaking them.
pub trait Planner {
    fn generate_queries(
        &mut self,
        instruction: &str,
        obs: &Observation,
        memory: &EpisodeMemory,
        k: usize,
    ) -> Vec<String>;

    fn rerank(
        &mut self,
        candidates: &[SkillCard],
        obs: &Observation,
        memory: &EpisodeMemory,
    ) -> PlannerChoice;

    fn configure(
        &mut self,
        skill: &SkillSpec,
        obs: &Observation,
        memory: &EpisodeMemory,
    ) -> ArgumentBinding;

    fn summarize(&mut self, skill: &ConfiguredSkill, outcome: &ExecutionOutcome) -> String {
        default_summary(skill, outcome)
    }
}

/// The always-offered fallback subset: every skill tagged `basic`,
/// in id order.
pub fn basic_skill_set(lib: &SkillLibrary) -> Vec<&SkillSpec> {
    lib.skills.values().filter(|s| s.basic).collect()
}

/// How an episode ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpisodeStatus {
    Success,
    Fail,
    BudgetExhausted,
}

impl EpisodeStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            EpisodeStatus::Success => "success",
            EpisodeStatus::Fail => "fail",
            EpisodeStatus::BudgetExhausted => "budget_exhausted",
        }
    }
}

/// Everything an episode produced: verdict, memory, traces, and the
/// planner-call transcript for audit.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    pub status: EpisodeStatus,
    /// Skill attempts made (config errors included).
    pub steps: usize,
    pub memory: EpisodeMemory,
    pub traces: Vec<ExecutionTrace>,
    pub transcript: Vec<TranscriptEvent>,
}

/// One audit entry: every planner call and executor outcome, in order.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TranscriptEvent {
    Instruction { instruction: String },
    Queries { step: usize, queries: Vec<String> },
    Candidates { step: usize, cards: Vec<SkillCard> },
    Choice { step: usize, choice: String },
    ConfigError { step: usize, skill: String, detail: String },
    Executed { step: usize, trace: ExecutionTrace },
    Ended { status: EpisodeStatus, steps: usize },
}

/// Write one JSON record per transcript event.
pub fn write_transcript(events: &[TranscriptEvent], path: &Path) -> std::io::Result<()> {
    let mut out = String::new();
    for event in events {
        out.push_str(&serde_json::to_string(event).expect("transcript event serializes"));
        out.push('\n');
    }
    std::fs::write(path, out)
}

#[derive(Debug, thiserror::Error)]
pub enum EpisodeError {
    #[error("instruction is empty")]
    EmptyInstruction,
    #[error("planner chose `{choice}` outside the presented set at step {step}")]
    PlannerViolation { step: usize, choice: String },
    #[error("retrieval failed at step {step}: {detail}")]
    Retrieval { step: usize, detail: String },
    #[error("executor failed at step {step} on `{skill}`: {detail}")]
    Executor {
        step: usize,
        skill: String,
        detail: String,
    },
}

/// Drive one episode: per step the planner issues up to K queries, the
/// index returns merged candidates capped at L, the planner picks among
/// candidates plus the basic subset, the binding is validated and the
/// skill executed, and the summarized outcome lands in memory. The loop
/// ends on planner `done` (checked against `goal` when given), planner
/// `fail`, or `max_steps`.
pub fn run_episode(
    instruction: &str,
    goal: Option<&GoalCheck>,
    lib: &SkillLibrary,
    index: &SkillIndex,
    env: &mut dyn Environment,
    planner: &mut dyn Planner,
    config: &AgentConfig,
) -> Result<EpisodeResult, EpisodeError> {
    assert!(config.query_budget >= 1, "query budget K must be positive");
    assert!(config.skill_budget >= 1, "skill budget L must be positive");
    if instruction.trim().is_empty() {
        return Err(EpisodeError::EmptyInstruction);
    }

    let basics = basic_skill_set(lib);
    let mut memory = EpisodeMemory::new(instruction);
    let mut traces = Vec::new();
    let mut transcript = vec![TranscriptEvent::Instruction {
        instruction: instruction.to_string(),
    }];
    let finish = |status: EpisodeStatus,
                      steps: usize,
                      memory: EpisodeMemory,
                      traces: Vec<ExecutionTrace>,
                      mut transcript: Vec<TranscriptEvent>| {
        transcript.push(TranscriptEvent::Ended { status, steps });
        Ok(EpisodeResult {
            status,
            steps,
            memory,
            traces,
            transcript,
        })
    };

    for step in 0..config.max_steps {
        let obs = env.observe();

        let mut queries = planner.generate_queries(instruction, &obs, &memory, config.query_budget);
        queries.truncate(config.query_budget);
        transcript.push(TranscriptEvent::Queries {
            step,
            queries: queries.clone(),
        });

        let retrieved = if queries.is_empty() {
            Vec::new()
        } else {
            index
                .hybrid_retrieve(&queries, 5)
                .map_err(|e| EpisodeError::Retrieval {
                    step,
                    detail: e.to_string(),
                })?
        };

        let mut cards: Vec<SkillCard> = Vec::new();
        for hit in retrieved.iter().take(config.skill_budget) {
            let Some(spec) = lib.skill(&hit.skill) else { continue };
            cards.push(SkillCard {
                skill: spec.id.clone(),
                intent: spec.intent.clone(),
                rank: Some(hit.rank),
                basic: spec.basic,
            });
        }
        for spec in &basics {
            if !cards.iter().any(|c| c.skill == spec.id) {
                cards.push(SkillCard {
                    skill: spec.id.clone(),
                    intent: spec.intent.clone(),
                    rank: None,
                    basic: true,
                });
            }
        }
        transcript.push(TranscriptEvent::Candidates {
            step,
            cards: cards.clone(),
        });

        let choice = planner.rerank(&cards, &obs, &memory);
        transcript.push(TranscriptEvent::Choice {
            step,
            choice: match &choice {
                PlannerChoice::Skill(id) => id.clone(),
                PlannerChoice::Done => "done".to_string(),
                PlannerChoice::Fail => "fail".to_string(),
            },
        });

        let chosen = match choice {
            PlannerChoice::Done => {
                let passed = goal
                    .map(|g| check_goal(g, &env.observe().state).pass)
                    .unwrap_or(true);
                let status = if passed {
                    EpisodeStatus::Success
                } else {
                    EpisodeStatus::Fail
                };
                return finish(status, memory.records().len(), memory, traces, transcript);
            }
            PlannerChoice::Fail => {
                return finish(EpisodeStatus::Fail, memory.records().len(), memory, traces, transcript);
            }
            PlannerChoice::Skill(id) => {
                if !cards.iter().any(|c| c.skill == id) {
                    return Err(EpisodeError::PlannerViolation { step, choice: id });
                }
                id
            }
        };

        let spec = lib.skill(&chosen).expect("cards reference library skills");
        let binding = planner.configure(spec, &obs, &memory);
        match instantiate(spec, &binding) {
            Err(error) => {
                let detail = error.to_string();
                transcript.push(TranscriptEvent::ConfigError {
                    step,
                    skill: chosen.clone(),
                    detail: detail.clone(),
                });
                let record_step = memory.records().len();
                memory.push(MemoryRecord {
                    step: record_step,
                    skill: chosen.clone(),
                    binding_digest: binding_digest(&binding),
                    outcome: "config_error".to_string(),
                    summary: format!("{chosen}: config_error ({detail})"),
                    failure: true,
                });
            }
            Ok(configured) => {
                let policy = TraversalPolicy {
                    mode: config.selection,
                    seed: derive_seed(config.policy_seed, &chosen, step as u64),
                    max_steps: config.graph_step_budget,
                };
                let trace = execute_skill(&configured, env, &policy).map_err(|e| {
                    EpisodeError::Executor {
                        step,
                        skill: chosen.clone(),
                        detail: e.to_string(),
                    }
                })?;
                let summary = planner.summarize(&configured, &trace.outcome);
                update_memory(&mut memory, &configured, &trace.outcome, summary);
                transcript.push(TranscriptEvent::Executed {
                    step,
                    trace: trace.clone(),
                });
                traces.push(trace);
            }
        }
    }

    let steps = memory.records().len();
    finish(EpisodeStatus::BudgetExhausted, steps, memory, traces, transcript)
}
