//! Command-line front end.
//!
//! Exit codes: 0 success, 1 operational error, 2 usage error.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use crate::bench::{build_benchmark, load_corpus, load_entry_source, load_manifest, write_benchmark, Plan, MANIFEST_FILE};
use crate::detector::{build_detector, detect, detect_all, Backend, DetectorConfig, OutcomeSet};
use crate::eval::{evaluate, published_rates, render_report, replay_published, CostModel, LinePolicy, ReportFormat};
use crate::prompt::{build_default_lint_prompt, parse_prompt_file, LogicTreePrompt};
use crate::source::SourceUnit;
use crate::tracker::{track_main_defect, TrackConfig};

/// Bad arguments that clap cannot catch on its own.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(UsageError(msg.into()).into())
}

#[derive(Debug, Parser)]
#[command(name = "lintllm", version, about = "Verilog defect benchmark, LLM lint driver and scorer")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Benchmark construction.
    Bench {
        #[command(subcommand)]
        command: BenchCommand,
    },
    /// Prompt inspection.
    Prompt {
        #[command(subcommand)]
        command: PromptCommand,
    },
    /// Run a detector over a benchmark or a single file.
    Detect(DetectArgs),
    /// Locate the main defect of one file.
    Track(TrackArgs),
    /// Score detection outcomes against a benchmark.
    Eval(EvalArgs),
    /// Recompute the published headline rates from per-DUT cells.
    ReplayPaper(ReplayArgs),
    /// LLM cost against an annual license.
    Cost(CostArgs),
}

#[derive(Debug, Subcommand)]
pub enum BenchCommand {
    /// Inject defects into a corpus and write the benchmark.
    Build(BuildArgs),
}

#[derive(Debug, Subcommand)]
pub enum PromptCommand {
    /// Print the rendered prompt.
    Render {
        /// Prompt file; the built-in prompt when absent.
        #[arg(long)]
        file: Option<PathBuf>,
        /// Print the editable file form instead.
        #[arg(long)]
        source: bool,
    },
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// TOML injection plan; the 90-defect published plan when absent.
    #[arg(long)]
    pub plan: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DetectorArgs {
    #[arg(long, default_value = "baseline")]
    pub backend: Backend,
    #[arg(long, default_value = "gpt-4o")]
    pub model: String,
    /// Chat-completion base URL.
    #[arg(long)]
    pub endpoint: Option<String>,
    /// Replay fixture (JSON).
    #[arg(long)]
    pub fixture: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    pub max_parallel: usize,
    #[arg(long, default_value_t = 120)]
    pub timeout: u64,
    #[arg(long, default_value_t = 3)]
    pub retries: u32,
    /// Prompt file; the built-in prompt when absent.
    #[arg(long)]
    pub prompt: Option<PathBuf>,
}

impl DetectorArgs {
    fn config(&self) -> DetectorConfig {
        DetectorConfig {
            backend: self.backend,
            model_id: self.model.clone(),
            endpoint: self.endpoint.clone(),
            fixture: self.fixture.clone(),
            max_parallel: self.max_parallel,
            timeout_secs: self.timeout,
            retry_budget: self.retries,
            ..DetectorConfig::default()
        }
    }

    fn prompt(&self) -> Result<LogicTreePrompt> {
        load_prompt(self.prompt.as_deref())
    }
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    /// Benchmark directory (containing manifest.json).
    #[arg(long, conflicts_with = "file")]
    pub bench: Option<PathBuf>,
    /// Single Verilog file.
    #[arg(long)]
    pub file: Option<PathBuf>,
    #[command(flatten)]
    pub detector: DetectorArgs,
    /// Outcome file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrackArgs {
    #[arg(long, conflicts_with = "bench")]
    pub file: Option<PathBuf>,
    /// Benchmark directory; pair with --dut.
    #[arg(long, requires = "dut")]
    pub bench: Option<PathBuf>,
    #[arg(long)]
    pub dut: Option<String>,
    /// Fix trial lines with the recorded ground truth (benchmark only).
    #[arg(long, requires = "bench")]
    pub oracle: bool,
    #[command(flatten)]
    pub detector: DetectorArgs,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub bench: PathBuf,
    /// Outcome file written by `detect`.
    #[arg(long)]
    pub outcomes: PathBuf,
    /// Count reports on secondary injected lines as false positives.
    #[arg(long)]
    pub strict: bool,
    #[arg(long, default_value = "table-text")]
    pub format: String,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    /// Per-DUT cell CSV; the bundled table when absent.
    #[arg(long)]
    pub fixture: Option<PathBuf>,
    #[arg(long, default_value = "table-text")]
    pub format: String,
}

#[derive(Debug, Args)]
pub struct CostArgs {
    #[arg(long, default_value_t = 0.0)]
    pub annual_lines: f64,
    #[arg(long, default_value_t = 1000.0)]
    pub dut_lines: f64,
    #[arg(long, default_value_t = 1000.0)]
    pub runs_per_day: f64,
    /// Output tokens per input token.
    #[arg(long)]
    pub ratio: Option<f64>,
    #[arg(long)]
    pub license: Option<f64>,
    #[arg(long)]
    pub json: bool,
}

fn load_prompt(path: Option<&Path>) -> Result<LogicTreePrompt> {
    match path {
        None => Ok(build_default_lint_prompt()),
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            parse_prompt_file(&text).with_context(|| format!("parsing {}", p.display()))
        }
    }
}

fn manifest_path(bench: &Path) -> PathBuf {
    if bench.is_dir() {
        bench.join(MANIFEST_FILE)
    } else {
        bench.to_path_buf()
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Bench {
            command: BenchCommand::Build(a),
        } => bench_build(a),
        Command::Prompt {
            command: PromptCommand::Render { file, source },
        } => {
            let p = load_prompt(file.as_deref())?;
            emit(None, &if source { p.to_file_text() } else { p.render() })
        }
        Command::Detect(a) => detect_cmd(a),
        Command::Track(a) => track_cmd(a),
        Command::Eval(a) => eval_cmd(a),
        Command::ReplayPaper(a) => replay_cmd(a),
        Command::Cost(a) => cost_cmd(a),
    }
}

fn bench_build(a: BuildArgs) -> Result<()> {
    let plan = match &a.plan {
        Some(p) => Plan::load(p)?,
        None => Plan::published_plan(),
    };
    let corpus = load_corpus(&a.corpus)?;
    let outcome = build_benchmark(&corpus, &plan, a.seed)?;
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    for s in &outcome.shortfall {
        eprintln!("warning: rule {} built {} of {} requested", s.rule, s.built, s.requested);
    }
    let path = write_benchmark(&outcome, &a.out)?;
    let tiers = outcome.manifest.tier_counts();
    let tiers: Vec<String> = tiers.iter().map(|(d, n)| format!("{d}={n}")).collect();
    println!(
        "wrote {} DUTs to {} ({})",
        outcome.manifest.entries.len(),
        path.display(),
        tiers.join(", ")
    );
    Ok(())
}

fn detect_cmd(a: DetectArgs) -> Result<()> {
    let cfg = a.detector.config();
    let prompt = a.detector.prompt()?;
    let detector = build_detector(&cfg)?;
    let set = match (&a.bench, &a.file) {
        (Some(bench), None) => {
            let mpath = manifest_path(bench);
            let manifest = load_manifest(&mpath)?;
            let root = mpath.parent().unwrap_or(Path::new("."));
            let sources = manifest
                .entries
                .iter()
                .map(|e| load_entry_source(root, e, true))
                .collect::<Result<Vec<SourceUnit>, _>>()?;
            detect_all(detector.as_ref(), &sources, &prompt, cfg.max_parallel)
        }
        (None, Some(file)) => {
            let src = SourceUnit::load(file)?;
            let o = detect(detector.as_ref(), &src, &prompt)?;
            OutcomeSet {
                tool: detector.name().to_string(),
                outcomes: vec![o],
                failures: Vec::new(),
            }
        }
        _ => return usage("detect needs exactly one of --bench or --file"),
    };
    for (dut, err) in &set.failures {
        eprintln!("warning: {dut}: {err}");
    }
    let mut text = serde_json::to_string_pretty(&set)?;
    text.push('\n');
    emit(a.out.as_deref(), &text)?;
    if a.out.is_some() {
        let reports: usize = set.outcomes.iter().map(|o| o.reports.len()).sum();
        eprintln!(
            "{} DUTs, {} reports, {} failures",
            set.outcomes.len() + set.failures.len(),
            reports,
            set.failures.len()
        );
    }
    if set.outcomes.is_empty() && !set.failures.is_empty() {
        bail!("every detection failed");
    }
    Ok(())
}

fn track_cmd(a: TrackArgs) -> Result<()> {
    let cfg = a.detector.config();
    let prompt = a.detector.prompt()?;
    let detector = build_detector(&cfg)?;
    let mut tcfg = TrackConfig {
        max_parallel: cfg.max_parallel,
        ..TrackConfig::default()
    };
    let src = match (&a.file, &a.bench, &a.dut) {
        (Some(f), None, _) => SourceUnit::load(f)?,
        (None, Some(bench), Some(dut)) => {
            let mpath = manifest_path(bench);
            let manifest = load_manifest(&mpath)?;
            let entry = manifest
                .resolved_entries()
                .into_iter()
                .find(|e| &e.dut_id == dut)
                .with_context(|| format!("no DUT {dut} in {}", mpath.display()))?;
            if a.oracle {
                tcfg = TrackConfig {
                    max_parallel: cfg.max_parallel,
                    ..TrackConfig::oracle(entry.defect.clone())
                };
            }
            load_entry_source(mpath.parent().unwrap_or(Path::new(".")), &entry, true)?
        }
        _ => return usage("track needs --file, or --bench with --dut"),
    };
    let r = track_main_defect(detector.as_ref(), &src, &prompt, &tcfg)?;
    if a.json {
        let mut text = serde_json::to_string_pretty(&r)?;
        text.push('\n');
        return emit(None, &text);
    }
    let mut out = String::new();
    for t in &r.trials {
        out.push_str(&format!(
            "line {:>4}  remaining {:>3}  via {}\n",
            t.line,
            t.remaining,
            t.strategy.as_deref().unwrap_or("-")
        ));
    }
    match &r.main_defect {
        Some(m) => out.push_str(&format!("main defect: line {} [{}] {}\n", m.line, m.category, m.rationale)),
        None => out.push_str("no defects reported\n"),
    }
    emit(None, &out)
}

fn eval_cmd(a: EvalArgs) -> Result<()> {
    let format: ReportFormat = a.format.parse().map_err(|e: crate::eval::EvalError| UsageError(e.to_string()))?;
    let manifest = load_manifest(manifest_path(&a.bench))?;
    let text = std::fs::read_to_string(&a.outcomes).with_context(|| format!("reading {}", a.outcomes.display()))?;
    let set: OutcomeSet = serde_json::from_str(&text).with_context(|| format!("parsing {}", a.outcomes.display()))?;
    let policy = if a.strict { LinePolicy::Strict } else { LinePolicy::Neutral };
    let reports: BTreeMap<_, _> = set.reports_by_dut();
    let (summary, _) = evaluate(&set.tool, &manifest.resolved_entries(), &reports, policy)?;
    emit(None, &render_report(&[summary], format)?)
}

fn replay_cmd(a: ReplayArgs) -> Result<()> {
    let format: ReportFormat = a.format.parse().map_err(|e: crate::eval::EvalError| UsageError(e.to_string()))?;
    let text = match &a.fixture {
        Some(p) => std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        None => crate::eval::PUBLISHED_CELLS.to_string(),
    };
    let summaries = replay_published(&text)?;
    emit(None, &render_report(&summaries, format)?)?;
    if a.fixture.is_none() {
        let published = published_rates();
        let mismatched: Vec<&str> = summaries
            .iter()
            .zip(&published)
            .filter(|(s, p)| (s.cr - p.cr).abs() > 0.01 || (s.fr - p.fr).abs() > 0.01)
            .map(|(_, p)| p.tool)
            .collect();
        if !mismatched.is_empty() {
            bail!("recomputed rates differ from the published ones for {}", mismatched.join(", "));
        }
    }
    Ok(())
}

fn cost_cmd(a: CostArgs) -> Result<()> {
    let mut model = CostModel::default();
    if let Some(r) = a.ratio {
        model.output_ratio = r;
    }
    if let Some(l) = a.license {
        model.license_per_year = l;
    }
    if [a.annual_lines, a.dut_lines, a.runs_per_day, model.output_ratio, model.license_per_year]
        .iter()
        .any(|v| !v.is_finite() || *v < 0.0)
    {
        return usage("cost inputs must be non-negative numbers");
    }
    let report = model.report(a.annual_lines, a.dut_lines, a.runs_per_day);
    let text = if a.json {
        serde_json::to_string_pretty(&report)? + "\n"
    } else {
        format!("{report}\n")
    };
    emit(None, &text)
}

/// Maps an error to the process exit code.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<UsageError>().is_some() {
        2
    } else {
        1
    }
}
