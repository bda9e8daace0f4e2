//! Hit rate of the rule-based detector for every mutation site in the
//! bundled corpus, grouped by rule.

use lintllm::bench::load_corpus;
use lintllm::detector::baseline_detect;
use lintllm::mutation::{apply_mutation, enumerate_all, rule};

fn main() -> anyhow::Result<()> {
    let corpus = load_corpus(concat!(env!("CARGO_MANIFEST_DIR"), "/data/corpus"))?;
    let mut hits = [0usize; 14];
    let mut total = [0usize; 14];
    let mut fps = [0usize; 14];
    for src in &corpus {
        for site in enumerate_all(src) {
            let (mutant, rec) = apply_mutation(src, &site)?;
            let reports = baseline_detect(&mutant);
            let r = rec.rule_id as usize;
            total[r] += 1;
            if reports.iter().any(|x| x.line == rec.injected_line) {
                hits[r] += 1;
            }
            let mut wrong: Vec<usize> = reports.iter().map(|x| x.line).filter(|&l| !rec.touches(l)).collect();
            wrong.dedup();
            fps[r] += wrong.len();
        }
    }
    println!("rule  hit/sites   false positives  category");
    for r in 1..=13u8 {
        let i = r as usize;
        println!(
            "{r:>4}  {:>4}/{:<5} {:>8}         {}",
            hits[i],
            total[i],
            fps[i],
            rule(r).unwrap().category
        );
    }
    Ok(())
}
