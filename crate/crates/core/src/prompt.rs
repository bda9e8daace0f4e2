//! Logic-tree prompts: a role/task root with ordered, nested steps, rendered
//! as a numbered outline.
//!
//! Prompt files look like this:
//!
//! ```text
//! role: Verilog code reviewer
//! task: Find defects and report exact line numbers.
//! format: |
//!   DEFECT line=<n> ...
//!   NO_DEFECTS when clean
//! steps:
//! - Check ports
//!   - List each port
//!   - Flag inputs that are driven
//! - Check widths
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::category::Category;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogicTreeNode {
    pub label: String,
    #[serde(default)]
    pub children: Vec<LogicTreeNode>,
}

impl LogicTreeNode {
    pub fn leaf(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            children: Vec::new(),
        }
    }

    pub fn new(label: impl Into<String>, children: Vec<LogicTreeNode>) -> Self {
        Self {
            label: label.into(),
            children,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogicTreePrompt {
    pub role: String,
    pub task: String,
    pub steps: Vec<LogicTreeNode>,
    pub output_format_contract: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PromptError {
    #[error("prompt {0} must be non-empty")]
    Empty(&'static str),
    #[error("prompt {0} must fit on one line")]
    Multiline(&'static str),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

fn check_label(text: &str, what: &'static str) -> Result<(), PromptError> {
    if text.trim().is_empty() {
        return Err(PromptError::Empty(what));
    }
    if text.contains('\n') || text.contains('\r') {
        return Err(PromptError::Multiline(what));
    }
    Ok(())
}

impl LogicTreePrompt {
    pub fn new(
        role: impl Into<String>,
        task: impl Into<String>,
        steps: Vec<LogicTreeNode>,
        output_format_contract: impl Into<String>,
    ) -> Result<Self, PromptError> {
        let p = Self {
            role: role.into(),
            task: task.into(),
            steps,
            output_format_contract: output_format_contract.into(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), PromptError> {
        check_label(&self.role, "role")?;
        check_label(&self.task, "task")?;
        fn walk(nodes: &[LogicTreeNode]) -> Result<(), PromptError> {
            for n in nodes {
                check_label(&n.label, "step label")?;
                walk(&n.children)?;
            }
            Ok(())
        }
        walk(&self.steps)
    }

    pub fn render(&self) -> String {
        render(self)
    }

    /// Serializes into the prompt-file format read by [`parse_prompt_file`].
    pub fn to_file_text(&self) -> String {
        let mut out = format!("role: {}\ntask: {}\n", self.role, self.task);
        if !self.output_format_contract.is_empty() {
            out.push_str("format: |\n");
            for l in self.output_format_contract.lines() {
                if l.is_empty() {
                    out.push('\n');
                } else {
                    out.push_str("  ");
                    out.push_str(l);
                    out.push('\n');
                }
            }
        }
        if !self.steps.is_empty() {
            out.push_str("steps:\n");
            fn walk(out: &mut String, nodes: &[LogicTreeNode], depth: usize) {
                for n in nodes {
                    out.push_str(&"  ".repeat(depth));
                    out.push_str("- ");
                    out.push_str(&n.label);
                    out.push('\n');
                    walk(out, &n.children, depth + 1);
                }
            }
            walk(&mut out, &self.steps, 0);
        }
        out
    }
}

/// Pre-order outline: `1.` for main steps, `1.1`, `1.1.1` below, two spaces
/// of indent per level.
pub fn render(prompt: &LogicTreePrompt) -> String {
    let mut out = format!("Role: {}\nTask: {}\n", prompt.role, prompt.task);
    if !prompt.steps.is_empty() {
        out.push_str("Steps:\n");
        fn walk(out: &mut String, nodes: &[LogicTreeNode], prefix: &str, depth: usize) {
            for (i, n) in nodes.iter().enumerate() {
                let number = if prefix.is_empty() {
                    format!("{}", i + 1)
                } else {
                    format!("{prefix}.{}", i + 1)
                };
                out.push_str(&"  ".repeat(depth));
                if depth == 0 {
                    out.push_str(&format!("{number}. {}\n", n.label));
                } else {
                    out.push_str(&format!("{number} {}\n", n.label));
                }
                walk(out, &n.children, &number, depth + 1);
            }
        }
        walk(&mut out, &prompt.steps, "", 0);
    }
    if !prompt.output_format_contract.is_empty() {
        out.push_str("Output format:\n");
        out.push_str(&prompt.output_format_contract);
        if !prompt.output_format_contract.ends_with('\n') {
            out.push('\n');
        }
    }
    out
}

pub fn output_contract() -> String {
    let names: Vec<&str> = Category::ALL.iter().map(|c| c.name()).collect();
    format!(
        "Report one defect per line as:\n\
         DEFECT line=<n> type=<category> [deps=<n>,<n>] reason=<text> [fix=<corrected line>]\n\
         <n> is the number before `|` in the listing.\n\
         <category> is one of: {}.\n\
         deps lists the lines of other reported defects this one follows from.\n\
         fix, when given, is the complete corrected text of that single line.\n\
         If the design has no defects, reply with exactly NO_DEFECTS.",
        names.join(", ")
    )
}

pub fn build_default_lint_prompt() -> LogicTreePrompt {
    let n = LogicTreeNode::new;
    let l = LogicTreeNode::leaf;
    let steps = vec![
        n(
            "Parse the module structure [Syntax Structure, Reserved words]",
            vec![
                l("Match every begin with end, every case with endcase, and the module with endmodule."),
                l("Check that every keyword is spelled correctly and is a Verilog keyword (elif, switch and others are not)."),
            ],
        ),
        n(
            "Check the ports [Port Type]",
            vec![
                l("List every port with its direction and width."),
                l("Flag inputs that are assigned inside the module and outputs that nothing drives."),
            ],
        ),
        n(
            "Check declarations and signal usage [Signal Usage]",
            vec![
                l("Flag identifiers that are read or written but never declared."),
                l("Flag wires assigned in always blocks and regs driven by continuous assignments."),
            ],
        ),
        n(
            "Check bit widths [Bit width Usage]",
            vec![
                l("Work out the width of both sides of every assignment."),
                l("Flag truncation or zero extension, and report the declaration that causes it as well as the assignments it affects."),
            ],
        ),
        n(
            "Check operators [Operators]",
            vec![
                l("Flag `=` inside conditions and `==` used as an assignment."),
                l("Flag logical operators applied to vectors where a bitwise operator is meant, and the reverse."),
            ],
        ),
        n(
            "Check always-block discipline [Combinational or Sequential]",
            vec![
                l("Classify each always block as clocked or combinational from its event control."),
                l("Flag blocking assignments in clocked blocks and non-blocking assignments in combinational blocks."),
            ],
        ),
        n(
            "Check sensitivity lists [Sensitivity List]",
            vec![
                l("Check the clock edge and reset polarity against the signal names."),
                l("Flag `|` or `||` used to separate events, and signals missing from combinational lists."),
            ],
        ),
        n(
            "Check drivers and instances [Race or Hazard, Module Instances]",
            vec![
                l("Flag any signal driven from more than one always block or continuous assignment."),
                l("Check that every port of every instance is connected."),
            ],
        ),
        n(
            "Check synthesizability [Logic Synthesis]",
            vec![
                l("Flag x or z values assigned in synthesizable logic, and initial blocks."),
                l("Report every defect found in the steps above using the output format, one line each."),
            ],
        ),
    ];
    LogicTreePrompt::new(
        "You are an experienced Verilog code reviewer.",
        "Detect the code defects in the Verilog design below and report the exact line number of each one.",
        steps,
        output_contract(),
    )
    .expect("default prompt is valid")
}

pub fn parse_prompt_file(text: &str) -> Result<LogicTreePrompt, PromptError> {
    let mut role = None;
    let mut task = None;
    let mut format = String::new();
    let mut steps: Vec<LogicTreeNode> = Vec::new();
    let lines: Vec<&str> = text.lines().collect();
    let mut i = 0;
    while i < lines.len() {
        let raw = lines[i];
        let trimmed = raw.trim_end();
        let lineno = i + 1;
        i += 1;
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let err = |reason: &str| PromptError::Parse {
            line: lineno,
            reason: reason.to_string(),
        };
        if let Some(v) = trimmed.strip_prefix("role:") {
            role = Some(v.trim().to_string());
        } else if let Some(v) = trimmed.strip_prefix("task:") {
            task = Some(v.trim().to_string());
        } else if let Some(v) = trimmed.strip_prefix("format:") {
            let v = v.trim();
            if v == "|" {
                let mut block = Vec::new();
                while i < lines.len() && (lines[i].starts_with("  ") || lines[i].trim().is_empty()) {
                    block.push(lines[i].strip_prefix("  ").unwrap_or("").trim_end());
                    i += 1;
                }
                while block.last().is_some_and(|l| l.is_empty()) {
                    block.pop();
                }
                format = block.join("\n");
            } else {
                format = v.to_string();
            }
        } else if trimmed == "steps:" {
            while i < lines.len() {
                let l = lines[i].trim_end();
                if l.trim().is_empty() || l.trim_start().starts_with('#') {
                    i += 1;
                    continue;
                }
                let indent = l.len() - l.trim_start().len();
                let Some(label) = l.trim_start().strip_prefix("- ") else {
                    break;
                };
                if !indent.is_multiple_of(2) {
                    return Err(PromptError::Parse {
                        line: i + 1,
                        reason: "step indent must be a multiple of two spaces".into(),
                    });
                }
                let depth = indent / 2;
                let mut level = &mut steps;
                for d in 0..depth {
                    if level.is_empty() {
                        return Err(PromptError::Parse {
                            line: i + 1,
                            reason: format!("step nested {} levels with no parent at level {d}", depth),
                        });
                    }
                    level = &mut level.last_mut().unwrap().children;
                }
                level.push(LogicTreeNode::leaf(label.trim()));
                i += 1;
            }
        } else {
            return Err(err("expected `role:`, `task:`, `format:` or `steps:`"));
        }
    }
    let role = role.ok_or(PromptError::Empty("role"))?;
    let task = task.ok_or(PromptError::Empty("task"))?;
    LogicTreePrompt::new(role, task, steps, format)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bare(steps: Vec<LogicTreeNode>) -> LogicTreePrompt {
        LogicTreePrompt::new("R", "T", steps, "F").unwrap()
    }

    #[test]
    fn root_only_has_no_numbers() {
        let text = bare(vec![]).render();
        assert_eq!(text, "Role: R\nTask: T\nOutput format:\nF\n");
    }

    #[test]
    fn numbering_is_preorder() {
        let p = bare(vec![
            LogicTreeNode::new("A", vec![LogicTreeNode::leaf("a1"), LogicTreeNode::leaf("a2")]),
            LogicTreeNode::leaf("B"),
        ]);
        let text = p.render();
        assert!(text.contains("Steps:\n1. A\n  1.1 a1\n  1.2 a2\n2. B\n"), "{text}");
    }

    #[test]
    fn child_order_matters() {
        let a = bare(vec![LogicTreeNode::new("A", vec![LogicTreeNode::leaf("x"), LogicTreeNode::leaf("y")])]);
        let b = bare(vec![LogicTreeNode::new("A", vec![LogicTreeNode::leaf("y"), LogicTreeNode::leaf("x")])]);
        assert_ne!(a.render(), b.render());
    }

    #[test]
    fn default_prompt_shape() {
        let p = build_default_lint_prompt();
        let text = p.render();
        assert!(text.starts_with("Role: "));
        let role = text.find("Role:").unwrap();
        let task = text.find("Task:").unwrap();
        let steps = text.find("Steps:").unwrap();
        assert!(role < task && task < steps);
        assert_eq!(text, build_default_lint_prompt().render());
        assert_eq!(p.steps.len(), 9);
        for c in Category::ALL {
            let main = p.steps.iter().filter(|s| s.label.contains(c.name())).count();
            assert_eq!(main, 1, "{c}");
        }
        assert!(text.contains("NO_DEFECTS"));
    }

    #[test]
    fn invalid_labels_rejected() {
        assert_eq!(LogicTreePrompt::new("", "t", vec![], "").unwrap_err(), PromptError::Empty("role"));
        assert!(LogicTreePrompt::new("r", "t", vec![LogicTreeNode::leaf("a\nb")], "").is_err());
    }

    #[test]
    fn file_format_round_trips() {
        let p = build_default_lint_prompt();
        assert_eq!(parse_prompt_file(&p.to_file_text()).unwrap(), p);
    }

    #[test]
    fn file_parse_errors() {
        assert!(matches!(
            parse_prompt_file("role: r\ntask: t\nsteps:\n    - orphan\n"),
            Err(PromptError::Parse { line: 4, .. })
        ));
        assert!(matches!(parse_prompt_file("bogus\n"), Err(PromptError::Parse { line: 1, .. })));
        assert_eq!(parse_prompt_file("task: t\n").unwrap_err(), PromptError::Empty("role"));
    }
}
