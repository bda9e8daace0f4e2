//! LLM detection cost versus an annual EDA license.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CostModel {
    /// USD per million input tokens.
    pub input_per_mtok: f64,
    /// USD per million output tokens.
    pub output_per_mtok: f64,
    /// Output tokens per input token.
    pub output_ratio: f64,
    /// Lines of Verilog in one million input tokens.
    pub lines_per_mtok: f64,
    /// Annual EDA license, USD.
    pub license_per_year: f64,
}

impl Default for CostModel {
    fn default() -> Self {
        Self {
            input_per_mtok: 3.0,
            output_per_mtok: 12.0,
            output_ratio: 1.4,
            lines_per_mtok: 80_000.0,
            license_per_year: 1_200_000.0,
        }
    }
}

impl CostModel {
    /// Cost of linting `lines_per_mtok` lines.
    pub fn cost_per_block(&self) -> f64 {
        self.input_per_mtok + self.output_per_mtok * self.output_ratio
    }

    pub fn cost_for_lines(&self, lines: f64) -> f64 {
        lines / self.lines_per_mtok * self.cost_per_block()
    }

    /// Annual line volume at which the license becomes the cheaper option.
    pub fn break_even_lines(&self) -> f64 {
        self.license_per_year / self.cost_per_block() * self.lines_per_mtok
    }

    /// Cost of metered usage.
    pub fn token_cost(&self, input_tokens: u64, output_tokens: u64) -> f64 {
        (input_tokens as f64 * self.input_per_mtok + output_tokens as f64 * self.output_per_mtok) / 1e6
    }

    pub fn report(&self, annual_lines: f64, dut_lines: f64, runs_per_day: f64) -> CostReport {
        let per_detection = self.cost_for_lines(dut_lines);
        let annual_llm_cost = self.cost_for_lines(annual_lines);
        CostReport {
            cost_per_block: self.cost_per_block(),
            lines_per_block: self.lines_per_mtok,
            annual_lines,
            annual_llm_cost,
            license_per_year: self.license_per_year,
            break_even_lines: self.break_even_lines(),
            llm_cheaper: annual_llm_cost < self.license_per_year,
            dut_lines,
            runs_per_day,
            per_detection,
            annual_detection_cost: per_detection * runs_per_day * 365.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub cost_per_block: f64,
    pub lines_per_block: f64,
    pub annual_lines: f64,
    pub annual_llm_cost: f64,
    pub license_per_year: f64,
    pub break_even_lines: f64,
    pub llm_cheaper: bool,
    pub dut_lines: f64,
    pub runs_per_day: f64,
    pub per_detection: f64,
    pub annual_detection_cost: f64,
}

impl std::fmt::Display for CostReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "cost per {:.0} lines:     ${:.2}", self.lines_per_block, self.cost_per_block)?;
        writeln!(f, "annual lines:            {:.0}", self.annual_lines)?;
        writeln!(f, "annual LLM cost:         ${:.2}", self.annual_llm_cost)?;
        writeln!(f, "annual license:          ${:.2}", self.license_per_year)?;
        writeln!(f, "break-even lines/year:   {:.0} ({:.1}M)", self.break_even_lines, self.break_even_lines / 1e6)?;
        writeln!(f, "cheaper option:          {}", if self.llm_cheaper { "LLM" } else { "license" })?;
        writeln!(f, "per detection ({:.0} lines): ${:.4}", self.dut_lines, self.per_detection)?;
        write!(
            f,
            "annual at {:.0} runs/day:  ${:.2}",
            self.runs_per_day, self.annual_detection_cost
        )
    }
}
