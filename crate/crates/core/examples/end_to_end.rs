//! Benchmark build, baseline detection and scoring in one run.

use lintllm::bench::{build_benchmark, load_corpus, load_entry_source, load_manifest, write_benchmark, Plan};
use lintllm::detector::{detect_all, BaselineDetector};
use lintllm::eval::{evaluate, render_report, LinePolicy, ReportFormat};
use lintllm::prompt::build_default_lint_prompt;

fn main() -> anyhow::Result<()> {
    let root = env!("CARGO_MANIFEST_DIR");
    let dir = tempfile_dir();
    let corpus = load_corpus(format!("{root}/data/corpus"))?;
    let plan = Plan::load(format!("{root}/data/demo_plan.toml"))?;
    let manifest_path = write_benchmark(&build_benchmark(&corpus, &plan, 7)?, &dir)?;

    let manifest = load_manifest(&manifest_path)?;
    let sources = manifest
        .entries
        .iter()
        .map(|e| load_entry_source(&dir, e, true))
        .collect::<Result<Vec<_>, _>>()?;
    let outcomes = detect_all(&BaselineDetector, &sources, &build_default_lint_prompt(), 4);
    let (summary, scores) = evaluate("baseline", &manifest.entries, &outcomes.reports_by_dut(), LinePolicy::Neutral)?;
    for s in &scores {
        println!("{}  correct={:<5} false_positives={}", s.dut_id, s.correct, s.false_positives);
    }
    print!("\n{}", render_report(&[summary], ReportFormat::Markdown)?);
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

fn tempfile_dir() -> std::path::PathBuf {
    std::env::temp_dir().join(format!("lintllm-e2e-{}", std::process::id()))
}
