//! Prints the built-in logic-tree prompt, then a custom two-step tree.

use lintllm::prompt::{build_default_lint_prompt, output_contract, LogicTreeNode, LogicTreePrompt};

fn main() -> anyhow::Result<()> {
    println!("{}", build_default_lint_prompt().render());

    let custom = LogicTreePrompt::new(
        "You are a Verilog reviewer.",
        "Check the clocking of the design below.",
        vec![
            LogicTreeNode::new(
                "Find every always block",
                vec![LogicTreeNode::leaf("Note its sensitivity list")],
            ),
            LogicTreeNode::leaf("Report edges that disagree with signal polarity"),
        ],
        output_contract(),
    )?;
    println!("----\n{}", custom.render());
    Ok(())
}
