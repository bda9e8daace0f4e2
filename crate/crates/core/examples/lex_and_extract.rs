//! Tokenizes a Verilog file and prints the recovered module structure.
//!
//! cargo run --example lex_and_extract -- data/fixtures/width_chain.v

use lintllm::lexer::{significant, tokenize};
use lintllm::source::{strip_comments, SourceUnit};
use lintllm::structure::extract_modules;

fn main() -> anyhow::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/fixtures/width_chain.v").into());
    let src = SourceUnit::load(&path)?;
    let stripped = strip_comments(&src)?;
    println!("{}: {} lines, sha256 {}", src.id(), src.line_count(), &src.sha256()[..12]);
    assert_eq!(stripped.line_count(), src.line_count());

    let tokens = tokenize(&src)?;
    println!("{} tokens, {} significant", tokens.len(), significant(&tokens).len());
    for m in extract_modules(&tokens)? {
        println!("\nmodule {} (lines {}-{})", m.name, m.start_line, m.end_line);
        for p in &m.ports {
            let dir = p.direction.map_or("?".to_string(), |d| format!("{d:?}").to_lowercase());
            println!("  port {:<10} {:<6} {}", p.name, dir, p.width);
        }
        for (name, s) in m.body.signals() {
            if s.direction.is_none() {
                println!("  signal {name:<8} {:?} {} (line {:?})", s.net, s.width, s.decl_lines);
            }
        }
        println!(
            "  {} always, {} assigns, {} instances, depth {}",
            m.body.always_blocks.len(),
            m.body.proc_assigns.len() + m.body.cont_assigns.len(),
            m.body.instances.len(),
            m.body.max_depth
        );
    }
    Ok(())
}
