//! Benchmark construction: corpus validation, one injected defect per file,
//! difficulty tiers, and the on-disk manifest.
//!
//! Layout under the output directory:
//!
//! ```text
//! manifest.json
//! originals/<dut_id>.v   comment-stripped corpus file
//! mutated/<dut_id>.v     the same file with one defect injected
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::category::Category;
use crate::lexer::tokenize;
use crate::mutation::{apply_mutation, enumerate_sites, pick_site, rule, DefectRecord, MutationSite};
use crate::parallel::par_map;
use crate::source::{sha256_hex, strip_comments, validate_corpus_file, SourceError, SourceUnit, Verdict};
use crate::structure::extract_modules;

pub const MANIFEST_VERSION: &str = "1";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Difficulty {
    Simple,
    Medium,
    Complex,
}

impl Difficulty {
    pub const ALL: [Difficulty; 3] = [Difficulty::Simple, Difficulty::Medium, Difficulty::Complex];

    pub fn prefix(self) -> char {
        match self {
            Difficulty::Simple => 's',
            Difficulty::Medium => 'm',
            Difficulty::Complex => 'c',
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Difficulty::Simple => "simple",
            Difficulty::Medium => "medium",
            Difficulty::Complex => "complex",
        }
    }
}

impl fmt::Display for Difficulty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub type TierMap = BTreeMap<Category, Difficulty>;

/// Category-to-tier map that follows the row grouping of the published
/// benchmark table. Tier sizes come out 38/30/22 rather than 30/30/30.
pub fn category_tier_map() -> TierMap {
    use Category::*;
    use Difficulty::*;
    [
        (SyntaxStructure, Simple),
        (SignalUsage, Simple),
        (SensitivityList, Simple),
        (ReservedWords, Simple),
        (RaceOrHazard, Medium),
        (PortType, Medium),
        (Operators, Medium),
        (ModuleInstances, Medium),
        (LogicSynthesis, Complex),
        (CombinationalOrSequential, Complex),
        (BitWidthUsage, Complex),
    ]
    .into_iter()
    .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TierQuota {
    pub simple: usize,
    pub medium: usize,
    pub complex: usize,
}

impl TierQuota {
    /// Even split; any remainder goes to the lower tiers.
    pub fn even(total: usize) -> Self {
        let base = total / 3;
        let rem = total % 3;
        Self {
            simple: base + usize::from(rem > 0),
            medium: base + usize::from(rem > 1),
            complex: base,
        }
    }

    pub fn total(&self) -> usize {
        self.simple + self.medium + self.complex
    }

    fn get(&self, d: Difficulty) -> usize {
        match d {
            Difficulty::Simple => self.simple,
            Difficulty::Medium => self.medium,
            Difficulty::Complex => self.complex,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanEntry {
    pub rule: u8,
    pub count: usize,
    /// Restricts rule 1 (the only multi-category rule) to one category.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<Category>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct Plan {
    pub rules: Vec<PlanEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tiers: Option<TierQuota>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tier_map: Option<TierMap>,
}

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("cannot read plan {path}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid plan: {0}")]
    Parse(String),
}

impl Plan {
    pub fn parse(text: &str) -> Result<Self, PlanError> {
        let plan: Plan = toml::from_str(text).map_err(|e| PlanError::Parse(e.to_string()))?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, PlanError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| PlanError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn from_counts(counts: &[(u8, usize)]) -> Self {
        Plan {
            rules: counts
                .iter()
                .map(|&(rule, count)| PlanEntry {
                    rule,
                    count,
                    category: None,
                })
                .collect(),
            ..Plan::default()
        }
    }

    /// 90 defects whose per-category counts match the published benchmark.
    pub fn published_plan() -> Self {
        let e = |rule, count, category| PlanEntry { rule, count, category };
        Plan {
            rules: vec![
                e(7, 8, None),
                e(9, 8, None),
                e(6, 14, None),
                e(10, 7, None),
                e(5, 6, None),
                e(11, 11, None),
                e(13, 8, None),
                e(3, 4, None),
                e(8, 3, None),
                e(1, 6, Some(Category::SyntaxStructure)),
                e(12, 6, None),
                e(4, 4, None),
                e(1, 3, Some(Category::ReservedWords)),
                e(2, 2, None),
            ],
            tiers: Some(TierQuota {
                simple: 30,
                medium: 30,
                complex: 30,
            }),
            tier_map: None,
        }
    }

    pub fn total(&self) -> usize {
        self.rules.iter().map(|r| r.count).sum()
    }

    fn validate(&self) -> Result<(), PlanError> {
        for r in &self.rules {
            let Some(rule) = rule(r.rule) else {
                return Err(PlanError::Parse(format!("unknown rule {}", r.rule)));
            };
            if let Some(c) = r.category {
                if r.rule != 1 && c != rule.category {
                    return Err(PlanError::Parse(format!(
                        "rule {} only produces `{}`, not `{c}`",
                        r.rule, rule.category
                    )));
                }
            }
        }
        if let Some(q) = &self.tiers {
            if self.tier_map.is_none() && q.total() != self.total() {
                return Err(PlanError::Parse(format!(
                    "tier quotas sum to {} but the plan has {} defects",
                    q.total(),
                    self.total()
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkEntry {
    pub dut_id: String,
    pub difficulty: Difficulty,
    pub category: Category,
    pub source_file: String,
    pub complexity: u64,
    pub original_path: String,
    pub original_sha256: String,
    pub mutated_path: String,
    pub mutated_sha256: String,
    pub defect: DefectRecord,
    #[serde(flatten)]
    pub extra: BTreeMap<String, Value>,
}

/// Hand correction of one entry's ground truth, applied by
/// [`BenchmarkManifest::resolved_entries`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManualOverride {
    pub dut_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub injected_line: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub touched_lines: Option<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<Category>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkManifest {
    pub version: String,
    pub seed: u64,
    pub corpus_digest: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tier_map: Option<TierMap>,
    pub entries: Vec<BenchmarkEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub overrides: Vec<ManualOverride>,
    #[serde(flatten)]
    pub extra: BTreeMap<String, Value>,
}

impl BenchmarkManifest {
    pub fn entry(&self, dut_id: &str) -> Option<&BenchmarkEntry> {
        self.entries.iter().find(|e| e.dut_id == dut_id)
    }

    /// Entries with manual overrides applied.
    pub fn resolved_entries(&self) -> Vec<BenchmarkEntry> {
        self.entries
            .iter()
            .map(|e| {
                let mut e = e.clone();
                for o in self.overrides.iter().filter(|o| o.dut_id == e.dut_id) {
                    if let Some(l) = o.injected_line {
                        e.defect.injected_line = l;
                    }
                    if let Some(t) = o.touched_lines {
                        e.defect.touched_lines = t;
                    }
                    if let Some(c) = o.category {
                        e.category = c;
                        e.defect.category = c;
                    }
                }
                e
            })
            .collect()
    }

    pub fn category_counts(&self) -> BTreeMap<Category, usize> {
        let mut out = BTreeMap::new();
        for e in &self.entries {
            *out.entry(e.category).or_insert(0) += 1;
        }
        out
    }

    pub fn tier_counts(&self) -> BTreeMap<Difficulty, usize> {
        let mut out = BTreeMap::new();
        for e in &self.entries {
            *out.entry(e.difficulty).or_insert(0) += 1;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BuildWarning {
    Rejected { file: String, reason: String },
    NoApplicableSite { file: String, rule: u8 },
}

impl fmt::Display for BuildWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BuildWarning::Rejected { file, reason } => write!(f, "{file}: rejected ({reason})"),
            BuildWarning::NoApplicableSite { file, rule } => {
                write!(f, "{file}: no applicable site for rule {rule}, trying next file")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Shortfall {
    pub rule: u8,
    pub category: Option<Category>,
    pub requested: usize,
    pub built: usize,
}

#[derive(Debug, Clone)]
pub struct BuildOutcome {
    pub manifest: BenchmarkManifest,
    pub originals: Vec<SourceUnit>,
    pub mutated: Vec<SourceUnit>,
    pub warnings: Vec<BuildWarning>,
    pub shortfall: Vec<Shortfall>,
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("corpus has {available} valid files but the plan needs {needed}")]
    InsufficientCorpus { available: usize, needed: usize },
    #[error(transparent)]
    Source(#[from] SourceError),
    #[error("i/o error on {path}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("manifest parse error at line {line}: {reason}")]
    ManifestParseError { line: usize, reason: String },
    #[error("digest mismatch for {dut_id}: {reason}")]
    DigestMismatch { dut_id: String, reason: String },
    #[error("invalid manifest entry {dut_id}: {reason}")]
    InvalidEntry { dut_id: String, reason: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> BenchError + '_ {
    move |source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Corpus files in sorted file-name order.
pub fn load_corpus(dir: impl AsRef<Path>) -> Result<Vec<SourceUnit>, BenchError> {
    let dir = dir.as_ref();
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io_err(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "v"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| SourceUnit::load(p).map_err(BenchError::from))
        .collect()
}

pub fn corpus_digest(files: &[SourceUnit]) -> String {
    let mut listing = String::new();
    for f in files {
        listing.push_str(&file_name(f));
        listing.push(' ');
        listing.push_str(f.sha256());
        listing.push('\n');
    }
    sha256_hex(listing.as_bytes())
}

fn file_name(src: &SourceUnit) -> String {
    src.path()
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| src.id().to_string())
}

/// Significant tokens plus a weight per level of block nesting.
pub fn complexity_score(src: &SourceUnit) -> u64 {
    let Ok(tokens) = tokenize(src) else { return 0 };
    let Ok(modules) = extract_modules(&tokens) else { return 0 };
    modules
        .iter()
        .map(|m| m.body.token_count as u64 + 20 * m.body.max_depth as u64)
        .sum()
}

/// Tier per item. With a tier map the category decides; otherwise items are
/// ranked by (complexity, file name) and cut into the quota sizes.
pub fn classify_difficulty(
    items: &[(Category, u64, String)],
    tier_map: Option<&TierMap>,
    quota: TierQuota,
) -> Vec<Difficulty> {
    if let Some(map) = tier_map {
        return items
            .iter()
            .map(|(c, _, _)| map.get(c).copied().unwrap_or(Difficulty::Medium))
            .collect();
    }
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&a, &b| (items[a].1, &items[a].2).cmp(&(items[b].1, &items[b].2)));
    let mut out = vec![Difficulty::Complex; items.len()];
    let mut ranked = order.into_iter();
    for d in Difficulty::ALL {
        for i in ranked.by_ref().take(quota.get(d)) {
            out[i] = d;
        }
    }
    out
}

struct Candidate {
    src: SourceUnit,
    name: String,
    /// Sites per plan entry.
    sites: Vec<Vec<MutationSite>>,
}

pub fn build_benchmark(corpus: &[SourceUnit], plan: &Plan, seed: u64) -> Result<BuildOutcome, BenchError> {
    let mut warnings = Vec::new();
    let mut valid = Vec::new();
    for f in corpus {
        match validate_corpus_file(f) {
            Verdict::Accepted => valid.push(strip_comments(f)?),
            Verdict::Rejected(r) => warnings.push(BuildWarning::Rejected {
                file: file_name(f),
                reason: r.to_string(),
            }),
        }
    }
    let needed = plan.total();
    if valid.len() < needed {
        return Err(BenchError::InsufficientCorpus {
            available: valid.len(),
            needed,
        });
    }

    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let candidates: Vec<Candidate> = par_map(&valid, threads, |_, src| {
        let tokens = tokenize(src).unwrap_or_default();
        let modules = extract_modules(&tokens).unwrap_or_default();
        let sites = plan
            .rules
            .iter()
            .map(|p| {
                let r = rule(p.rule).expect("plan validated");
                enumerate_sites(src, r, &modules)
                    .into_iter()
                    .filter(|s| p.category.is_none_or(|c| c == s.category))
                    .collect()
            })
            .collect();
        Candidate {
            src: src.clone(),
            name: file_name(src),
            sites,
        }
    });

    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    // expand the plan into units; each unit keeps its ordinal for seeding
    let mut units: Vec<(usize, usize)> = Vec::new();
    for (pi, p) in plan.rules.iter().enumerate() {
        for _ in 0..p.count {
            units.push((units.len(), pi));
        }
    }
    // most constrained plan entries claim files first
    let applicable = |pi: usize| candidates.iter().filter(|c| !c.sites[pi].is_empty()).count();
    let mut unit_order: Vec<(usize, usize)> = units.clone();
    unit_order.sort_by_key(|&(ordinal, pi)| (applicable(pi), pi, ordinal));

    let mut used = vec![false; candidates.len()];
    let mut warned = BTreeSet::new();
    let mut picked: Vec<(usize, usize, usize, MutationSite)> = Vec::new();
    let mut built = vec![0usize; plan.rules.len()];
    for (ordinal, pi) in unit_order {
        let entry_seed = seed.wrapping_add(ordinal as u64);
        for &ci in &order {
            if used[ci] {
                continue;
            }
            let c = &candidates[ci];
            match pick_site(&c.sites[pi], entry_seed) {
                Ok(site) => {
                    used[ci] = true;
                    built[pi] += 1;
                    picked.push((ordinal, pi, ci, site.clone()));
                    break;
                }
                Err(_) => {
                    let rule = plan.rules[pi].rule;
                    if warned.insert((ci, rule)) {
                        warnings.push(BuildWarning::NoApplicableSite {
                            file: c.name.clone(),
                            rule,
                        });
                    }
                }
            }
        }
    }
    picked.sort_by_key(|p| p.0);

    let mut staged = Vec::new();
    for (ordinal, _, ci, site) in &picked {
        let c = &candidates[*ci];
        let (mutated, mut rec) = apply_mutation(&c.src, site).expect("site enumerated on this source");
        rec.seed = seed.wrapping_add(*ordinal as u64);
        staged.push((c, mutated, rec, complexity_score(&c.src)));
    }

    let items: Vec<(Category, u64, String)> = staged
        .iter()
        .map(|(c, _, rec, score)| (rec.category, *score, c.name.clone()))
        .collect();
    let quota = plan.tiers.unwrap_or_else(|| TierQuota::even(items.len()));
    let quota = if quota.total() == items.len() {
        quota
    } else {
        TierQuota::even(items.len())
    };
    let tiers = classify_difficulty(&items, plan.tier_map.as_ref(), quota);

    // number duts within each tier by (complexity, file name)
    let mut rank: Vec<usize> = (0..staged.len()).collect();
    rank.sort_by(|&a, &b| (tiers[a], items[a].1, &items[a].2).cmp(&(tiers[b], items[b].1, &items[b].2)));
    let mut counters: BTreeMap<Difficulty, usize> = BTreeMap::new();
    let mut entries = Vec::new();
    let mut originals = Vec::new();
    let mut mutated_units = Vec::new();
    for i in rank {
        let (c, mutated, rec, score) = &staged[i];
        let n = counters.entry(tiers[i]).or_insert(0);
        *n += 1;
        let dut_id = format!("{}{:02}", tiers[i].prefix(), n);
        let mut rec = rec.clone();
        rec.dut_id = dut_id.clone();
        let original = c.src.with_content(c.src.content()).with_id(dut_id.clone());
        let mutated = mutated.clone().with_id(dut_id.clone());
        entries.push(BenchmarkEntry {
            dut_id: dut_id.clone(),
            difficulty: tiers[i],
            category: rec.category,
            source_file: c.name.clone(),
            complexity: *score,
            original_path: format!("originals/{dut_id}.v"),
            original_sha256: original.sha256().to_string(),
            mutated_path: format!("mutated/{dut_id}.v"),
            mutated_sha256: mutated.sha256().to_string(),
            defect: rec,
            extra: BTreeMap::new(),
        });
        originals.push(original);
        mutated_units.push(mutated);
    }

    let shortfall = plan
        .rules
        .iter()
        .zip(&built)
        .filter(|(p, &b)| b < p.count)
        .map(|(p, &b)| Shortfall {
            rule: p.rule,
            category: p.category,
            requested: p.count,
            built: b,
        })
        .collect();

    Ok(BuildOutcome {
        manifest: BenchmarkManifest {
            version: MANIFEST_VERSION.to_string(),
            seed,
            corpus_digest: corpus_digest(corpus),
            tier_map: plan.tier_map.clone(),
            entries,
            overrides: Vec::new(),
            extra: BTreeMap::new(),
        },
        originals,
        mutated: mutated_units,
        warnings,
        shortfall,
    })
}

/// Writes the manifest and both file trees under `out`.
pub fn write_benchmark(outcome: &BuildOutcome, out: impl AsRef<Path>) -> Result<PathBuf, BenchError> {
    let out = out.as_ref();
    for sub in ["originals", "mutated"] {
        let d = out.join(sub);
        std::fs::create_dir_all(&d).map_err(io_err(&d))?;
    }
    for ((entry, orig), mutated) in outcome
        .manifest
        .entries
        .iter()
        .zip(&outcome.originals)
        .zip(&outcome.mutated)
    {
        let p = out.join(&entry.original_path);
        std::fs::write(&p, orig.content()).map_err(io_err(&p))?;
        let p = out.join(&entry.mutated_path);
        std::fs::write(&p, mutated.content()).map_err(io_err(&p))?;
    }
    let path = out.join(MANIFEST_FILE);
    save_manifest(&outcome.manifest, &path)?;
    Ok(path)
}

pub fn save_manifest(manifest: &BenchmarkManifest, path: impl AsRef<Path>) -> Result<(), BenchError> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    text.push('\n');
    std::fs::write(path, text).map_err(io_err(path))
}

pub fn parse_manifest(text: &str) -> Result<BenchmarkManifest, BenchError> {
    let manifest: BenchmarkManifest = serde_json::from_str(text).map_err(|e| BenchError::ManifestParseError {
        line: e.line(),
        reason: e.to_string(),
    })?;
    let mut seen = BTreeSet::new();
    for e in &manifest.entries {
        let invalid = |reason: String| BenchError::InvalidEntry {
            dut_id: e.dut_id.clone(),
            reason,
        };
        if !seen.insert(e.dut_id.as_str()) {
            return Err(invalid("duplicate dut_id".into()));
        }
        if !e.dut_id.starts_with(e.difficulty.prefix()) {
            return Err(invalid(format!("prefix does not match difficulty {}", e.difficulty)));
        }
        if e.category != e.defect.category {
            return Err(invalid("category differs from defect.category".into()));
        }
        if !e.defect.touches(e.defect.injected_line) {
            return Err(invalid("injected_line outside touched_lines".into()));
        }
    }
    Ok(manifest)
}

/// Parses a manifest and checks every referenced file against its digest.
/// Paths are resolved against the manifest's directory.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<BenchmarkManifest, BenchError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let manifest = parse_manifest(&text)?;
    let root = path.parent().unwrap_or(Path::new("."));
    for e in &manifest.entries {
        for (rel, digest) in [(&e.original_path, &e.original_sha256), (&e.mutated_path, &e.mutated_sha256)] {
            let file = root.join(rel);
            let actual = std::fs::read(&file).map(|b| sha256_hex(&b)).map_err(|err| BenchError::DigestMismatch {
                dut_id: e.dut_id.clone(),
                reason: format!("{}: {err}", file.display()),
            })?;
            if &actual != digest {
                return Err(BenchError::DigestMismatch {
                    dut_id: e.dut_id.clone(),
                    reason: format!("{} has digest {actual}", file.display()),
                });
            }
        }
    }
    Ok(manifest)
}

/// Loads the mutated (or original) file of an entry, using the dut id as
/// the unit id.
pub fn load_entry_source(root: &Path, entry: &BenchmarkEntry, mutated: bool) -> Result<SourceUnit, BenchError> {
    let rel = if mutated { &entry.mutated_path } else { &entry.original_path };
    Ok(SourceUnit::load(root.join(rel))?.with_id(entry.dut_id.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus() -> Vec<SourceUnit> {
        load_corpus(Path::new(env!("CARGO_MANIFEST_DIR")).join("data/corpus")).unwrap()
    }

    #[test]
    fn plan_parses_toml() {
        let plan = Plan::parse("[[rules]]\nrule = 7\ncount = 2\n\n[[rules]]\nrule = 1\ncount = 1\ncategory = \"Syntax Structure\"\n").unwrap();
        assert_eq!(plan.total(), 3);
        assert_eq!(plan.rules[1].category, Some(Category::SyntaxStructure));
        assert!(Plan::parse("[[rules]]\nrule = 14\ncount = 1\n").is_err());
        assert!(Plan::parse("[[rules]]\nrule = 6\ncount = 1\ncategory = \"Port Type\"\n").is_err());
    }

    #[test]
    fn published_plan_counts() {
        let plan = Plan::published_plan();
        assert_eq!(plan.total(), 90);
        let mut by_cat: BTreeMap<Category, usize> = BTreeMap::new();
        for p in &plan.rules {
            let c = p.category.unwrap_or(rule(p.rule).unwrap().category);
            *by_cat.entry(c).or_insert(0) += p.count;
        }
        use Category::*;
        let expect = [
            (SensitivityList, 16),
            (BitWidthUsage, 14),
            (SignalUsage, 13),
            (RaceOrHazard, 11),
            (ModuleInstances, 8),
            (Operators, 7),
            (SyntaxStructure, 6),
            (LogicSynthesis, 6),
            (PortType, 4),
            (ReservedWords, 3),
            (CombinationalOrSequential, 2),
        ];
        for (c, n) in expect {
            assert_eq!(by_cat[&c], n, "{c}");
        }
    }

    #[test]
    fn quota_forcing_one_per_tier() {
        let items = vec![
            (Category::Operators, 300, "c.v".to_string()),
            (Category::Operators, 100, "a.v".to_string()),
            (Category::Operators, 200, "b.v".to_string()),
        ];
        let tiers = classify_difficulty(&items, None, TierQuota { simple: 1, medium: 1, complex: 1 });
        assert_eq!(tiers, vec![Difficulty::Complex, Difficulty::Simple, Difficulty::Medium]);
    }

    #[test]
    fn complexity_tie_goes_to_lower_name() {
        let items = vec![
            (Category::Operators, 100, "b.v".to_string()),
            (Category::Operators, 100, "a.v".to_string()),
        ];
        let tiers = classify_difficulty(&items, None, TierQuota { simple: 1, medium: 1, complex: 0 });
        assert_eq!(tiers, vec![Difficulty::Medium, Difficulty::Simple]);
    }

    #[test]
    fn table_layout_puts_bit_width_in_complex() {
        let map = category_tier_map();
        let items = vec![(Category::BitWidthUsage, 10, "complex_1.v".to_string())];
        assert_eq!(
            classify_difficulty(&items, Some(&map), TierQuota::even(1)),
            vec![Difficulty::Complex]
        );
        assert_eq!(map.len(), 11);
    }

    #[test]
    fn demo_build_is_deterministic() {
        let plan = Plan::from_counts(&[(7, 2), (2, 2), (6, 2)]);
        let a = build_benchmark(&corpus(), &plan, 42).unwrap();
        let b = build_benchmark(&corpus(), &plan, 42).unwrap();
        assert_eq!(a.manifest, b.manifest);
        assert_eq!(a.manifest.entries.len(), 6);
        assert!(a.shortfall.is_empty());
        let ids: Vec<_> = a.manifest.entries.iter().map(|e| e.dut_id.as_str()).collect();
        assert_eq!(ids, ["s01", "s02", "m01", "m02", "c01", "c02"]);
        let files: BTreeSet<_> = a.manifest.entries.iter().map(|e| &e.source_file).collect();
        assert_eq!(files.len(), 6, "each corpus file used at most once");
    }

    #[test]
    fn insufficient_corpus() {
        let plan = Plan::from_counts(&[(10, 13)]);
        assert!(matches!(
            build_benchmark(&corpus(), &plan, 0),
            Err(BenchError::InsufficientCorpus { available: 12, needed: 13 })
        ));
    }

    #[test]
    fn missing_sites_are_a_shortfall() {
        // only two corpus files instantiate modules
        let plan = Plan::from_counts(&[(13, 4)]);
        let out = build_benchmark(&corpus(), &plan, 1).unwrap();
        assert_eq!(out.manifest.entries.len(), 2);
        assert_eq!(out.shortfall[0].built, 2);
        assert!(out
            .warnings
            .iter()
            .any(|w| matches!(w, BuildWarning::NoApplicableSite { rule: 13, .. })));
    }

    #[test]
    fn manifest_round_trip_and_verification() {
        let dir = tempfile::tempdir().unwrap();
        let plan = Plan::from_counts(&[(7, 1), (10, 1)]);
        let out = build_benchmark(&corpus(), &plan, 3).unwrap();
        let path = write_benchmark(&out, dir.path()).unwrap();
        let loaded = load_manifest(&path).unwrap();
        assert_eq!(loaded, out.manifest);

        // unknown fields survive a rewrite
        let text = std::fs::read_to_string(&path).unwrap().replacen("{", "{\n  \"curator\": \"lab\",", 1);
        std::fs::write(&path, text).unwrap();
        let loaded = load_manifest(&path).unwrap();
        assert_eq!(loaded.extra["curator"], "lab");
        save_manifest(&loaded, &path).unwrap();
        assert!(std::fs::read_to_string(&path).unwrap().contains("\"curator\": \"lab\""));

        let first = &loaded.entries[0];
        std::fs::remove_file(dir.path().join(&first.mutated_path)).unwrap();
        match load_manifest(&path) {
            Err(BenchError::DigestMismatch { dut_id, .. }) => assert_eq!(dut_id, first.dut_id),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_category_is_a_parse_error() {
        let plan = Plan::from_counts(&[(7, 1)]);
        let out = build_benchmark(&corpus(), &plan, 3).unwrap();
        let text = serde_json::to_string_pretty(&out.manifest)
            .unwrap()
            .replace("\"Sensitivity List\"", "\"Sensitivity Lists\"");
        assert!(matches!(parse_manifest(&text), Err(BenchError::ManifestParseError { .. })));
    }

    #[test]
    fn overrides_apply_on_resolve() {
        let plan = Plan::from_counts(&[(7, 1)]);
        let mut m = build_benchmark(&corpus(), &plan, 3).unwrap().manifest;
        let id = m.entries[0].dut_id.clone();
        m.overrides.push(ManualOverride {
            dut_id: id,
            injected_line: Some(99),
            touched_lines: Some((99, 99)),
            category: None,
            note: Some("checked by hand".into()),
        });
        assert_eq!(m.resolved_entries()[0].defect.injected_line, 99);
        assert_ne!(m.entries[0].defect.injected_line, 99);
    }
}
