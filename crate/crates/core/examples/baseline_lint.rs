//! Runs the rule-based detector on one file.
//!
//! cargo run --example baseline_lint -- data/fixtures/width_chain.v

use lintllm::detector::{baseline_detect, render_reports};
use lintllm::source::SourceUnit;

fn main() -> anyhow::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/fixtures/width_chain.v").into());
    let src = SourceUnit::load(&path)?;
    let reports = baseline_detect(&src);
    print!("{}", render_reports(&reports));
    for r in &reports {
        if let Some(fix) = &r.suggested_fix {
            println!("  line {:>3}: {}\n       -> {}", r.line, src.line(r.line).unwrap_or("").trim(), fix.trim());
        }
    }
    Ok(())
}
