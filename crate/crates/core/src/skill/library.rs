//! Library loading: skill files plus one composition file, with all errors
//! aggregated rather than reported one at a time.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::skill::parse::{build_composition, parse_composition, parse_skill};
use crate::skill::{validate_skill, CompositionGraph, SkillLibrary, SkillSpec, Violation};

/// One problem found while loading a library directory.
#[derive(Debug, Clone, PartialEq)]
pub enum LibraryError {
    Io { path: PathBuf, message: String },
    Parse { file: PathBuf, line: usize, message: String },
    Invalid { file: PathBuf, skill: String, violation: Violation },
    DuplicateSkillId { id: String, first: PathBuf, second: PathBuf },
    UnknownCompositionSkill { file: PathBuf, skill: String },
}

impl std::fmt::Display for LibraryError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LibraryError::Io { path, message } => {
                write!(f, "{}: {message}", path.display())
            }
            LibraryError::Parse { file, line, message } => {
                write!(f, "{}:{line}: {message}", file.display())
            }
            LibraryError::Invalid { file, skill, violation } => {
                write!(f, "{}: skill `{skill}`: {violation}", file.display())
            }
            LibraryError::DuplicateSkillId { id, first, second } => {
                write!(
                    f,
                    "duplicate skill id `{id}` declared in {} and {}",
                    first.display(),
                    second.display()
                )
            }
            LibraryError::UnknownCompositionSkill { file, skill } => {
                write!(
                    f,
                    "{}: composition references unknown skill `{skill}`",
                    file.display()
                )
            }
        }
    }
}

/// Aggregate of every error found in one load pass.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct LibraryErrors {
    pub errors: Vec<LibraryError>,
}

impl std::fmt::Display for LibraryErrors {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "{} error(s) loading skill library:", self.errors.len())?;
        for e in &self.errors {
            writeln!(f, "  {e}")?;
        }
        Ok(())
    }
}

/// Load every `*.skill` file under `root` plus an optional `composition.txt`.
/// Returns the validated library, or every error found.
pub fn load_library(root: &Path) -> Result<SkillLibrary, LibraryErrors> {
    let mut errors = Vec::new();
    let mut skills: BTreeMap<String, SkillSpec> = BTreeMap::new();
    let mut sources: BTreeMap<String, PathBuf> = BTreeMap::new();

    let mut files: Vec<PathBuf> = Vec::new();
    match std::fs::read_dir(root) {
        Ok(entries) => {
            for entry in entries {
                match entry {
                    Ok(entry) => {
                        let path = entry.path();
                        if path.extension().is_some_and(|e| e == "skill") {
                            files.push(path);
                        }
                    }
                    Err(e) => errors.push(LibraryError::Io {
                        path: root.to_path_buf(),
                        message: e.to_string(),
                    }),
                }
            }
        }
        Err(e) => {
            errors.push(LibraryError::Io {
                path: root.to_path_buf(),
                message: e.to_string(),
            });
            return Err(LibraryErrors { errors });
        }
    }
    files.sort();

    for file in &files {
        let text = match std::fs::read_to_string(file) {
            Ok(t) => t,
            Err(e) => {
                errors.push(LibraryError::Io {
                    path: file.clone(),
                    message: e.to_string(),
                });
                continue;
            }
        };
        let spec = match parse_skill(&text) {
            Ok(s) => s,
            Err(e) => {
                errors.push(LibraryError::Parse {
                    file: file.clone(),
                    line: e.line,
                    message: e.message,
                });
                continue;
            }
        };
        for violation in validate_skill(&spec) {
            errors.push(LibraryError::Invalid {
                file: file.clone(),
                skill: spec.id.clone(),
                violation,
            });
        }
        if let Some(first) = sources.get(&spec.id) {
            errors.push(LibraryError::DuplicateSkillId {
                id: spec.id.clone(),
                first: first.clone(),
                second: file.clone(),
            });
            continue;
        }
        sources.insert(spec.id.clone(), file.clone());
        skills.insert(spec.id.clone(), spec);
    }

    let composition_path = root.join("composition.txt");
    let composition = if composition_path.exists() {
        match std::fs::read_to_string(&composition_path) {
            Ok(text) => match parse_composition(&text) {
                Ok(parsed) => {
                    for id in parsed
                        .edges
                        .iter()
                        .flat_map(|(a, b)| [a, b])
                        .chain(parsed.entries.iter())
                    {
                        if !skills.contains_key(id) {
                            errors.push(LibraryError::UnknownCompositionSkill {
                                file: composition_path.clone(),
                                skill: id.clone(),
                            });
                        }
                    }
                    build_composition(&parsed, |id| {
                        skills.get(id).map(|s| s.application.clone())
                    })
                }
                Err(e) => {
                    errors.push(LibraryError::Parse {
                        file: composition_path.clone(),
                        line: e.line,
                        message: e.message,
                    });
                    CompositionGraph::default()
                }
            },
            Err(e) => {
                errors.push(LibraryError::Io {
                    path: composition_path.clone(),
                    message: e.to_string(),
                });
                CompositionGraph::default()
            }
        }
    } else {
        CompositionGraph::default()
    };

    if errors.is_empty() {
        Ok(SkillLibrary { skills, composition })
    } else {
        Err(LibraryErrors { errors })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skill::CompositionScope;

    fn write(dir: &Path, name: &str, body: &str) {
        std::fs::write(dir.join(name), body).unwrap();
    }

    const CALC_LAUNCH: &str = "skill CalculatorLaunch\napp SimCalculator\nintent \"Open the calculator.\"\nnode n0 start\nnode n1 terminal\nedge n0 -> n1 action launch_app(app=SimCalculator)\n";
    const FILES_LAUNCH: &str = "skill FilesLaunch\napp SimFiles\nintent \"Open the file manager.\"\nnode n0 start\nnode n1 terminal\nedge n0 -> n1 action launch_app(app=SimFiles)\n";

    #[test]
    fn loads_a_small_library() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "calc_launch.skill", CALC_LAUNCH);
        write(dir.path(), "files_launch.skill", FILES_LAUNCH);
        write(
            dir.path(),
            "composition.txt",
            "compose CalculatorLaunch -> FilesLaunch\nentry CalculatorLaunch\n",
        );
        let lib = load_library(dir.path()).unwrap();
        assert_eq!(lib.len(), 2);
        assert_eq!(lib.composition.edges.len(), 1);
        assert_eq!(lib.composition.edges[0].scope, CompositionScope::CrossApp);
        assert_eq!(lib.composition.entries, vec!["CalculatorLaunch"]);
        assert!(lib.composition.is_walk(&[
            "CalculatorLaunch".to_string(),
            "FilesLaunch".to_string()
        ]));
    }

    #[test]
    fn empty_directory_yields_empty_library() {
        let dir = tempfile::tempdir().unwrap();
        let lib = load_library(dir.path()).unwrap();
        assert!(lib.is_empty());
        assert!(lib.composition.edges.is_empty());
    }

    #[test]
    fn duplicate_ids_name_both_files() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "a.skill", CALC_LAUNCH);
        write(dir.path(), "b.skill", CALC_LAUNCH);
        let errors = load_library(dir.path()).unwrap_err();
        let msg = errors.to_string();
        assert!(msg.contains("duplicate skill id `CalculatorLaunch`"));
        assert!(msg.contains("a.skill"));
        assert!(msg.contains("b.skill"));
    }

    #[test]
    fn errors_aggregate_across_files() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "bad_syntax.skill", "skill\n");
        write(
            dir.path(),
            "bad_graph.skill",
            "skill Broken\napp A\nintent \"x\"\nnode n0 start\nnode n1 terminal\nnode n2 terminal\nedge n0 -> n1 action press_key(key=a)\n",
        );
        write(dir.path(), "composition.txt", "compose Ghost -> Broken\n");
        let errors = load_library(dir.path()).unwrap_err();
        let codes: Vec<String> = errors.errors.iter().map(|e| e.to_string()).collect();
        assert!(codes.iter().any(|c| c.contains("bad_syntax.skill")));
        assert!(codes.iter().any(|c| c.contains("unreachable_terminal")));
        assert!(codes.iter().any(|c| c.contains("unknown skill `Ghost`")));
    }

    #[test]
    fn single_app_scope_is_inferred() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "calc_launch.skill", CALC_LAUNCH);
        write(
            dir.path(),
            "calc_clear.skill",
            "skill CalculatorClear\napp SimCalculator\nintent \"Clear.\"\nnode n0 start\nnode n1 terminal\nedge n0 -> n1 action press_key(key=escape)\n",
        );
        write(
            dir.path(),
            "composition.txt",
            "compose CalculatorLaunch -> CalculatorClear\n",
        );
        let lib = load_library(dir.path()).unwrap();
        assert_eq!(lib.composition.edges[0].scope, CompositionScope::SingleApp);
    }
}
