//! Break-even volume and per-detection cost under a few output ratios.

use lintllm::eval::CostModel;

fn main() {
    let base = CostModel::default();
    println!("{}\n", base.report(1e9, 1000.0, 1000.0));
    println!("ratio  per-80k  break-even (M lines)  1k-line detection");
    for ratio in [1.0, 1.4, 1.5, 2.0] {
        let m = CostModel { output_ratio: ratio, ..base };
        println!(
            "{ratio:>5.1}  {:>7.2}  {:>20.1}  {:>17.4}",
            m.cost_per_block(),
            m.break_even_lines() / 1e6,
            m.cost_for_lines(1000.0)
        );
    }
}
