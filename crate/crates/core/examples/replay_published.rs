//! Recomputes the headline correct and false-positive rates from the
//! per-DUT cells and compares them with the published values.

use lintllm::eval::{published_rates, render_report, replay_published, ReportFormat, PUBLISHED_CELLS};

fn main() -> anyhow::Result<()> {
    let summaries = replay_published(PUBLISHED_CELLS)?;
    print!("{}", render_report(&summaries, ReportFormat::TableText)?);
    println!();
    for (s, p) in summaries.iter().zip(published_rates()) {
        let ok = (s.cr - p.cr).abs() <= 0.01 && (s.fr - p.fr).abs() <= 0.01;
        println!(
            "{:<24} CR {:>6.2} (published {:>6.2})  FR {:>6.2} (published {:>6.2})  {}",
            p.tool,
            s.cr,
            p.cr,
            s.fr,
            p.fr,
            if ok { "ok" } else { "MISMATCH" }
        );
    }
    Ok(())
}
