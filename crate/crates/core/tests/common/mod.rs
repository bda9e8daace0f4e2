//! Detector over a synthetic defect graph.
//!
//! Line `i + 1` of the source reads `node parents=a,b` where the parents are
//! 1-based lines of earlier nodes. A node is reported while its line is
//! intact and it is either a root or has at least one reported parent.

#![allow(dead_code)]

use std::collections::BTreeSet;

use lintllm::category::Category;
use lintllm::detector::{render_reports, DefectReport, DetectError, Detector, RawResponse};
use lintllm::prompt::LogicTreePrompt;
use lintllm::source::SourceUnit;

pub struct DagDetector;

pub fn dag_source(parents: &[Vec<usize>]) -> SourceUnit {
    let text: String = parents
        .iter()
        .map(|ps| {
            let list: Vec<String> = ps.iter().map(|p| p.to_string()).collect();
            format!("node parents={}\n", list.join(","))
        })
        .collect();
    SourceUnit::new("dag", "dag.v", text)
}

fn parse(src: &SourceUnit) -> Vec<Option<Vec<usize>>> {
    src.lines()
        .map(|l| {
            let rest = l.trim().strip_prefix("node parents=")?;
            Some(rest.split(',').filter(|s| !s.is_empty()).map(|s| s.parse().unwrap()).collect())
        })
        .collect()
}

/// Reported lines given which lines are still intact.
pub fn reported(nodes: &[Option<Vec<usize>>]) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    for (i, n) in nodes.iter().enumerate() {
        if let Some(ps) = n {
            if ps.is_empty() || ps.iter().any(|p| out.contains(p)) {
                out.insert(i + 1);
            }
        }
    }
    out
}

impl Detector for DagDetector {
    fn name(&self) -> &str {
        "dag"
    }

    fn respond(&self, src: &SourceUnit, _: &LogicTreePrompt) -> Result<RawResponse, DetectError> {
        let reports: Vec<DefectReport> = reported(&parse(src))
            .into_iter()
            .map(|l| DefectReport::new(l, Category::SignalUsage, "graph node"))
            .collect();
        Ok(RawResponse {
            text: render_reports(&reports),
            ..RawResponse::default()
        })
    }
}

/// Exhaustive choice: remove each reported node in turn and keep the one
/// leaving the fewest reports, lowest line on ties.
pub fn brute_force(parents: &[Vec<usize>]) -> Option<(usize, usize)> {
    let full: Vec<Option<Vec<usize>>> = parents.iter().cloned().map(Some).collect();
    let mut best: Option<(usize, usize)> = None;
    for line in reported(&full) {
        let mut cut = full.clone();
        cut[line - 1] = None;
        let left = reported(&cut).len();
        if best.is_none_or(|(_, b)| left < b) {
            best = Some((line, left));
        }
    }
    best
}

/// A random DAG on `n` nodes from a seed, edges only to earlier nodes.
pub fn random_dag(n: usize, seed: u64) -> Vec<Vec<usize>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            if i == 0 || rng.random_bool(0.3) {
                return Vec::new();
            }
            let k = rng.random_range(1..=i.min(3));
            let mut ps: Vec<usize> = (0..k).map(|_| rng.random_range(1..=i)).collect();
            ps.sort();
            ps.dedup();
            ps
        })
        .collect()
}
