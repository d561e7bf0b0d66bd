//! Synthesis over the bundled library: the two hand-pinned gold tasks,
//! 1,000-task replay with full goal pass, and dataset round-trips.

use std::collections::BTreeSet;
use std::path::PathBuf;

use skillgraph::args::ArgumentBinding;
use skillgraph::env::Environment;
use skillgraph::sim::Simulator;
use skillgraph::skill::{load_library, SkillLibrary};
use skillgraph::synth::{
    export_dataset, import_dataset, replay_task, synthesize_dataset, synthesize_with_bindings,
    validate_task,
};

fn library() -> SkillLibrary {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/library");
    match load_library(&root) {
        Ok(lib) => lib,
        Err(errors) => panic!("fixture library failed to load:\n{errors}"),
    }
}

#[test]
fn calculator_gold_task_renders_and_replays() {
    let lib = library();
    let steps = vec![
        ArgumentBinding::new("CalculatorLaunch"),
        ArgumentBinding::new("CalculatorSwitchMode").with("mode_name", "scientific"),
        ArgumentBinding::new("CalculatorEnterNumber").with("number", "398"),
        ArgumentBinding::new("CalculatorSubtract"),
        ArgumentBinding::new("CalculatorEnterNumber").with("number", "174"),
        ArgumentBinding::new("CalculatorMultiply"),
        ArgumentBinding::new("CalculatorSquareRoot").with("operand", "505"),
        ArgumentBinding::new("CalculatorEquals"),
    ];
    let task = synthesize_with_bindings(&lib, &steps, 42).unwrap();
    assert_eq!(task.instruction, "Calculate 398\u{2212}174\u{00d7}\u{221a}505");
    assert_eq!(task.domain, "SimCalculator");

    let mut env = Simulator::default();
    env.reset();
    let report = replay_task(&lib, &task, &mut env).unwrap();
    assert!(report.pass, "{:?}", report.results);

    let display = env.observe().state.resolve_path("SimCalculator.vars.display").unwrap();
    let value: f64 = display.parse().unwrap_or_else(|_| panic!("display `{display}`"));
    let oracle = 398.0 - 174.0 * 505f64.sqrt();
    assert!(
        (value - oracle).abs() <= 1e-4,
        "display {value} vs oracle {oracle}"
    );
}

#[test]
fn rename_sheet_gold_task_passes_its_goal() {
    let lib = library();
    let steps = vec![
        ArgumentBinding::new("FilesLaunch"),
        ArgumentBinding::new("FilesRenameSheet")
            .with("old_name", "sheet1")
            .with("new_name", "company analysis"),
    ];
    let task = synthesize_with_bindings(&lib, &steps, 42).unwrap();
    assert_eq!(task.instruction, "Rename the sheet1 sheet as company analysis");
    assert_eq!(task.goal.assertions.len(), 1);
    assert_eq!(task.goal.assertions[0].path, "SimFiles.vars.sheet_name");
    assert_eq!(task.goal.assertions[0].expected, "company analysis");

    let mut env = Simulator::default();
    env.reset();
    let report = replay_task(&lib, &task, &mut env).unwrap();
    assert!(report.pass, "{:?}", report.results);
}

#[test]
fn thousand_tasks_replay_with_full_goal_pass() {
    let lib = library();
    let tasks = synthesize_dataset(&lib, 1000, 1..=8, 42).unwrap();
    assert_eq!(tasks.len(), 1000);

    let ids: BTreeSet<&str> = tasks.iter().map(|t| t.id.as_str()).collect();
    assert_eq!(ids.len(), 1000, "task ids must be unique");

    let mut passed = 0usize;
    for task in &tasks {
        validate_task(&lib, task).unwrap_or_else(|e| panic!("{}: {e}", task.id));
        let mut env = Simulator::default();
        env.reset();
        let report = replay_task(&lib, task, &mut env)
            .unwrap_or_else(|e| panic!("{} ({}): {e}", task.id, task.instruction));
        assert!(
            report.pass,
            "{} ({}): {:?}",
            task.id,
            task.instruction,
            report.results
        );
        passed += 1;
    }
    assert_eq!(passed, 1000);
}

#[test]
fn sampled_walks_cover_single_and_cross_app_domains() {
    let lib = library();
    let tasks = synthesize_dataset(&lib, 200, 1..=8, 42).unwrap();
    let domains: BTreeSet<&str> = tasks.iter().map(|t| t.domain.as_str()).collect();
    for domain in &domains {
        for app in domain.split('+') {
            assert!(
                ["SimCalculator", "SimFiles", "SimEditor"].contains(&app),
                "unexpected app tag in domain {domain}"
            );
        }
    }
    assert!(
        domains.iter().any(|d| d.contains('+')),
        "no cross-application walk sampled: {domains:?}"
    );
}

#[test]
fn fixture_dataset_export_import_round_trips() {
    let lib = library();
    let tasks = synthesize_dataset(&lib, 300, 1..=8, 42).unwrap();
    let dir = tempfile::tempdir().unwrap();

    let path_a = dir.path().join("a.jsonl");
    let path_b = dir.path().join("b.jsonl");
    assert_eq!(export_dataset(&tasks, &path_a).unwrap(), 300);
    export_dataset(&synthesize_dataset(&lib, 300, 1..=8, 42).unwrap(), &path_b).unwrap();
    assert_eq!(
        std::fs::read(&path_a).unwrap(),
        std::fs::read(&path_b).unwrap(),
        "regeneration from the same seed writes byte-identical datasets"
    );

    let imported = import_dataset(&path_a).unwrap();
    assert_eq!(imported, tasks);
    for task in &imported {
        validate_task(&lib, task).unwrap_or_else(|e| panic!("{}: {e}", task.id));
    }
}
