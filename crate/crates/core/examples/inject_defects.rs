//! Lists every mutation site in a Verilog file and shows one applied defect.
//!
//! cargo run --example inject_defects -- data/corpus/counter8.v [rule] [seed]

use lintllm::mutation::{apply_mutation, enumerate_all, pick_site};
use lintllm::source::{strip_comments, SourceUnit};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| "data/corpus/counter8.v".into());
    let rule: Option<u8> = args.next().map(|s| s.parse()).transpose()?;
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0);

    let src = strip_comments(&SourceUnit::load(&path)?)?;
    let sites: Vec<_> = enumerate_all(&src)
        .into_iter()
        .filter(|s| rule.is_none_or(|r| s.rule_id == r))
        .collect();
    for s in &sites {
        if s.is_insert() {
            println!("rule {:>2} after line {:>3}: + {}", s.rule_id, s.line, s.replacement_text.trim());
        } else {
            println!(
                "rule {:>2} at {:>3}:{:<3} {:?} -> {:?}",
                s.rule_id, s.line, s.col, s.original_text, s.replacement_text
            );
        }
    }
    let site = pick_site(&sites, seed)?;
    let (_, rec) = apply_mutation(&src, site)?;
    println!("\npicked (seed {seed}): {} on line {}", rec.category, rec.injected_line);
    println!("--- original\n{}\n+++ mutated\n{}", rec.original_snippet, rec.mutated_snippet);
    Ok(())
}
