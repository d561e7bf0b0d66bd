//! Instruction templates: hand-written phrasings for known skill
//! sequences, rendered from the gold bindings.
//!
//! A template applies when its signature equals the task's skill-id
//! sequence. Patterns reference bindings as `{step.arg}` with a 0-based
//! step index; every reference must resolve, unresolved tokens are
//! reported as errors rather than passed through.

use crate::args::ArgumentBinding;

use super::SynthError;

/// One instruction phrasing tied to an exact skill sequence.
#[derive(Debug, Clone, Copy)]
pub struct InstructionTemplate {
    /// Skill-id sequence this template applies to.
    pub signature: &'static [&'static str],
    /// Pattern with `{step.arg}` references into the gold bindings.
    pub pattern: &'static str,
}

/// Built-in template bank, checked in order; first match wins.
pub const TEMPLATES: &[InstructionTemplate] = &[
    InstructionTemplate {
        signature: &[
            "CalculatorLaunch",
            "CalculatorSwitchMode",
            "CalculatorEnterNumber",
            "CalculatorSubtract",
            "CalculatorEnterNumber",
            "CalculatorMultiply",
            "CalculatorSquareRoot",
            "CalculatorEquals",
        ],
        pattern: "Calculate {2.number}\u{2212}{4.number}\u{00d7}\u{221a}{6.operand}",
    },
    InstructionTemplate {
        signature: &["FilesLaunch", "FilesRenameSheet"],
        pattern: "Rename the {1.old_name} sheet as {1.new_name}",
    },
    InstructionTemplate {
        signature: &["FilesLaunch", "FilesCreateFolder"],
        pattern: "Create a folder named {1.folder_name}",
    },
    InstructionTemplate {
        signature: &["EditorLaunch", "EditorTypeText", "EditorSave"],
        pattern: "Type {1.text} into a new document and save it as {2.file_name}",
    },
];

/// The first built-in template whose signature equals `path`, if any.
pub fn matching_template(path: &[&str]) -> Option<&'static InstructionTemplate> {
    TEMPLATES.iter().find(|t| t.signature == path)
}

/// Render `pattern`, resolving every `{step.arg}` reference from `steps`.
pub fn render(pattern: &str, steps: &[ArgumentBinding]) -> Result<String, SynthError> {
    let mut out = String::with_capacity(pattern.len());
    let mut rest = pattern;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let Some(close) = rest[open..].find('}') else {
            return Err(SynthError::Template {
                token: rest[open..].to_string(),
                reason: "unterminated reference".to_string(),
            });
        };
        let token = &rest[open + 1..open + close];
        out.push_str(&resolve(token, steps)?);
        rest = &rest[open + close + 1..];
    }
    out.push_str(rest);
    Ok(out)
}

fn resolve(token: &str, steps: &[ArgumentBinding]) -> Result<String, SynthError> {
    let err = |reason: &str| SynthError::Template {
        token: token.to_string(),
        reason: reason.to_string(),
    };
    let (index, arg) = token.split_once('.').ok_or_else(|| err("expected step.arg"))?;
    let index: usize = index.parse().map_err(|_| err("step index is not a number"))?;
    let step = steps.get(index).ok_or_else(|| err("step index out of range"))?;
    step.values
        .get(arg)
        .cloned()
        .ok_or_else(|| err("argument is not bound at that step"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binding(skill: &str, pairs: &[(&str, &str)]) -> ArgumentBinding {
        let mut b = ArgumentBinding::new(skill);
        for (name, value) in pairs {
            b = b.with(*name, *value);
        }
        b
    }

    #[test]
    fn renders_step_references() {
        let steps = vec![
            binding("A", &[("x", "hello")]),
            binding("B", &[("y", "world")]),
        ];
        assert_eq!(render("{0.x}, {1.y}!", &steps).unwrap(), "hello, world!");
    }

    #[test]
    fn literal_text_passes_through() {
        assert_eq!(render("no references here", &[]).unwrap(), "no references here");
    }

    #[test]
    fn unresolved_references_are_errors() {
        let steps = vec![binding("A", &[("x", "v")])];
        for pattern in ["{1.x}", "{0.y}", "{0}", "{zero.x}", "{0.x"] {
            let error = render(pattern, &steps).unwrap_err();
            assert!(
                matches!(error, SynthError::Template { .. }),
                "{pattern}: {error}"
            );
        }
    }

    #[test]
    fn matching_requires_the_exact_sequence() {
        let full: Vec<&str> = TEMPLATES[1].signature.to_vec();
        assert!(matching_template(&full).is_some());
        let prefix = &full[..1];
        assert!(matching_template(prefix).is_none());
    }
}
