//! Main-defect tracking on the width example, once with a scripted
//! detector and a ground-truth fix, once with the rule-based detector.

use lintllm::category::Category;
use lintllm::detector::{render_reports, BaselineDetector, DefectReport, DetectError, Detector, RawResponse};
use lintllm::mutation::DefectRecord;
use lintllm::prompt::{build_default_lint_prompt, LogicTreePrompt};
use lintllm::source::SourceUnit;
use lintllm::tracker::{track_main_defect, TrackConfig};

const WIDTH_CHAIN: &str = include_str!("../data/fixtures/width_chain.v");

/// Flags lines 6, 9 and 10 while `temp_reg` is 8 bits wide, and only the
/// lines that still exist after a blank.
struct Scripted;

impl Detector for Scripted {
    fn name(&self) -> &str {
        "scripted"
    }

    fn respond(&self, src: &SourceUnit, _: &LogicTreePrompt) -> Result<RawResponse, DetectError> {
        let narrow = src.lines().any(|l| l.contains("reg [7:0] temp_reg"));
        let reports: Vec<DefectReport> = if narrow {
            [6, 9, 10]
                .into_iter()
                .filter(|&l| src.line(l).is_some_and(|t| !t.trim().is_empty()))
                .map(|l| DefectReport::new(l, Category::BitWidthUsage, "width mismatch"))
                .collect()
        } else {
            Vec::new()
        };
        Ok(RawResponse {
            text: render_reports(&reports),
            ..RawResponse::default()
        })
    }
}

fn main() -> anyhow::Result<()> {
    let src = SourceUnit::new("complex_1", "width_chain.v", WIDTH_CHAIN);
    let prompt = build_default_lint_prompt();
    let record = DefectRecord {
        dut_id: "complex_1".into(),
        rule_id: 6,
        category: Category::BitWidthUsage,
        injected_line: 6,
        touched_lines: (6, 6),
        original_snippet: "    reg [15:0] temp_reg;".into(),
        mutated_snippet: src.line(6).unwrap().into(),
        seed: 0,
    };

    for (label, detector, cfg) in [
        ("scripted + oracle", &Scripted as &dyn Detector, TrackConfig::oracle(record)),
        ("baseline", &BaselineDetector as &dyn Detector, TrackConfig::default()),
    ] {
        let r = track_main_defect(detector, &src, &prompt, &cfg)?;
        println!("{label}:");
        for t in &r.trials {
            println!("  fix line {:>2} -> {} remaining ({})", t.line, t.remaining, t.strategy.as_deref().unwrap_or("-"));
        }
        println!("  main defect: line {}\n", r.main_line().unwrap_or(0));
    }
    Ok(())
}
