//! Sends one file to a chat-completion endpoint.
//!
//! LINTLLM_API_KEY=... [LINTLLM_API_BASE=...] cargo run --example llm_detect -- file.v [model]

use lintllm::detector::{build_detector, detect, Backend, DetectorConfig};
use lintllm::eval::CostModel;
use lintllm::prompt::build_default_lint_prompt;
use lintllm::source::SourceUnit;

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/fixtures/width_chain.v").into());
    let model = args.next().unwrap_or_else(|| "gpt-4o".into());
    if std::env::var("LINTLLM_API_KEY").is_err() {
        eprintln!("LINTLLM_API_KEY is not set; nothing to do");
        return Ok(());
    }
    let cfg = DetectorConfig {
        backend: Backend::Llm,
        model_id: model,
        ..DetectorConfig::default()
    };
    let detector = build_detector(&cfg)?;
    let src = SourceUnit::load(&path)?;
    let out = detect(detector.as_ref(), &src, &build_default_lint_prompt())?;
    for r in &out.reports {
        println!("line {:>3} [{}] {}", r.line, r.category, r.rationale);
    }
    let (i, o) = out.token_usage;
    println!(
        "{i} in / {o} out tokens, ${:.4}, {:.1}s, {} anomalies",
        CostModel::default().token_cost(i, o),
        out.latency,
        out.anomalies
    );
    Ok(())
}
