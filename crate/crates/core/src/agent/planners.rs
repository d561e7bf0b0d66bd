//! Deterministic reference planners: `GoldPlanner` replays a known step
//! sequence, `ScriptedPlanner` reacts to episode memory through ordered
//! condition rules. Both exist to exercise the episode loop without any
//! model in the loop.

use crate::args::{ArgumentBinding, ConfiguredSkill};
use crate::env::Observation;
use crate::executor::{ExecutionOutcome, OutcomeStatus};
use crate::skill::SkillSpec;
use crate::synth::SynthTask;

use super::{default_summary, EpisodeMemory, Planner, PlannerChoice, SkillCard};

/// Replays a fixed binding sequence: each step queries the current skill
/// by id, picks it from the candidates, and applies the stored binding.
/// The cursor advances only on success, so a flaky skill is retried; once
/// the sequence is exhausted the planner reports done.
#[derive(Debug, Clone)]
pub struct GoldPlanner {
    steps: Vec<ArgumentBinding>,
    cursor: usize,
}

impl GoldPlanner {
    pub fn new(steps: Vec<ArgumentBinding>) -> Self {
        GoldPlanner { steps, cursor: 0 }
    }

    pub fn for_task(task: &SynthTask) -> Self {
        GoldPlanner::new(task.steps.clone())
    }

    pub fn remaining(&self) -> usize {
        self.steps.len() - self.cursor
    }

    fn current(&self) -> Option<&ArgumentBinding> {
        self.steps.get(self.cursor)
    }
}

impl Planner for GoldPlanner {
    fn generate_queries(
        &mut self,
        _instruction: &str,
        _obs: &Observation,
        _memory: &EpisodeMemory,
        _k: usize,
    ) -> Vec<String> {
        match self.current() {
            Some(binding) => vec![binding.skill_id.clone()],
            None => Vec::new(),
        }
    }

    fn rerank(
        &mut self,
        _candidates: &[SkillCard],
        _obs: &Observation,
        _memory: &EpisodeMemory,
    ) -> PlannerChoice {
        match self.current() {
            Some(binding) => PlannerChoice::Skill(binding.skill_id.clone()),
            None => PlannerChoice::Done,
        }
    }

    fn configure(
        &mut self,
        skill: &SkillSpec,
        _obs: &Observation,
        _memory: &EpisodeMemory,
    ) -> ArgumentBinding {
        match self.current() {
            Some(binding) if binding.skill_id == skill.id => binding.clone(),
            _ => ArgumentBinding::new(&skill.id),
        }
    }

    fn summarize(&mut self, skill: &ConfiguredSkill, outcome: &ExecutionOutcome) -> String {
        if outcome.status == OutcomeStatus::Success
            && self.current().is_some_and(|b| b.skill_id == skill.spec.id)
        {
            self.cursor += 1;
        }
        default_summary(skill, outcome)
    }
}

/// Shape of the newest memory record a rule requires.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LastRecord {
    /// No skill attempted yet.
    Empty,
    /// Newest record is a success of the named skill.
    Success(String),
    /// Newest record is a failure of the named skill.
    Failure(String),
    Any,
}

impl LastRecord {
    fn matches(&self, memory: &EpisodeMemory) -> bool {
        match self {
            LastRecord::Empty => memory.last().is_none(),
            LastRecord::Success(skill) => memory
                .last()
                .is_some_and(|r| r.skill == *skill && !r.failure),
            LastRecord::Failure(skill) => memory
                .last()
                .is_some_and(|r| r.skill == *skill && r.failure),
            LastRecord::Any => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScriptedAction {
    Run {
        skill: String,
        binding: ArgumentBinding,
    },
    Done,
    Fail,
}

/// When the instruction contains `instruction_contains` (empty matches
/// everything) and the newest memory record matches `last`, take `action`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScriptedRule {
    pub instruction_contains: String,
    pub last: LastRecord,
    pub action: ScriptedAction,
}

impl ScriptedRule {
    pub fn run(
        instruction_contains: &str,
        last: LastRecord,
        binding: ArgumentBinding,
    ) -> Self {
        ScriptedRule {
            instruction_contains: instruction_contains.to_string(),
            last,
            action: ScriptedAction::Run {
                skill: binding.skill_id.clone(),
                binding,
            },
        }
    }

    pub fn done(instruction_contains: &str, last: LastRecord) -> Self {
        ScriptedRule {
            instruction_contains: instruction_contains.to_string(),
            last,
            action: ScriptedAction::Done,
        }
    }
}

/// Rule-table planner: every call evaluates the rules in order and the
/// first match decides queries, choice, and binding for that step. No
/// matching rule means give up, so incomplete tables fail loudly rather
/// than loop.
#[derive(Debug, Clone, Default)]
pub struct ScriptedPlanner {
    rules: Vec<ScriptedRule>,
}

impl ScriptedPlanner {
    pub fn new(rules: Vec<ScriptedRule>) -> Self {
        ScriptedPlanner { rules }
    }

    fn active(&self, instruction: &str, memory: &EpisodeMemory) -> Option<&ScriptedRule> {
        self.rules.iter().find(|rule| {
            (rule.instruction_contains.is_empty()
                || instruction.contains(&rule.instruction_contains))
                && rule.last.matches(memory)
        })
    }
}

impl Planner for ScriptedPlanner {
    fn generate_queries(
        &mut self,
        instruction: &str,
        _obs: &Observation,
        memory: &EpisodeMemory,
        _k: usize,
    ) -> Vec<String> {
        match self.active(instruction, memory).map(|r| &r.action) {
            Some(ScriptedAction::Run { skill, .. }) => vec![skill.clone()],
            _ => Vec::new(),
        }
    }

    fn rerank(
        &mut self,
        _candidates: &[SkillCard],
        _obs: &Observation,
        memory: &EpisodeMemory,
    ) -> PlannerChoice {
        match self.active(memory.instruction(), memory).map(|r| &r.action) {
            Some(ScriptedAction::Run { skill, .. }) => PlannerChoice::Skill(skill.clone()),
            Some(ScriptedAction::Done) => PlannerChoice::Done,
            Some(ScriptedAction::Fail) | None => PlannerChoice::Fail,
        }
    }

    fn configure(
        &mut self,
        skill: &SkillSpec,
        _obs: &Observation,
        memory: &EpisodeMemory,
    ) -> ArgumentBinding {
        match self.active(memory.instruction(), memory).map(|r| &r.action) {
            Some(ScriptedAction::Run { skill: id, binding }) if *id == skill.id => binding.clone(),
            _ => ArgumentBinding::new(&skill.id),
        }
    }
}
