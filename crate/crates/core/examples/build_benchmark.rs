//! Builds the small demo benchmark from the bundled corpus.
//!
//! cargo run --example build_benchmark -- [out_dir] [seed]

use lintllm::bench::{build_benchmark, load_corpus, write_benchmark, Plan};

fn main() -> anyhow::Result<()> {
    let root = env!("CARGO_MANIFEST_DIR");
    let mut args = std::env::args().skip(1);
    let out = args.next().unwrap_or_else(|| std::env::temp_dir().join("lintllm-demo").display().to_string());
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(7);

    let corpus = load_corpus(format!("{root}/data/corpus"))?;
    let plan = Plan::load(format!("{root}/data/demo_plan.toml"))?;
    let outcome = build_benchmark(&corpus, &plan, seed)?;
    for w in &outcome.warnings {
        println!("warning: {w}");
    }
    for e in &outcome.manifest.entries {
        println!(
            "{}  {:<28} {:<16} line {:>3}  {}",
            e.dut_id,
            e.category.to_string(),
            e.source_file,
            e.defect.injected_line,
            e.defect.mutated_snippet.trim()
        );
    }
    let path = write_benchmark(&outcome, &out)?;
    println!("manifest: {}", path.display());
    Ok(())
}
