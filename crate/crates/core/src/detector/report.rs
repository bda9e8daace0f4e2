//! Detector output grammar.
//!
//! ```text
//! DEFECT line=<n> type=<category> [deps=<n>,<n>] reason=<text> [fix=<text>]
//! NO_DEFECTS
//! ```
//!
//! Responses without any `DEFECT` line or `NO_DEFECTS` marker fall back to
//! scanning prose for `line <n>` mentions.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::category::Category;

pub const NO_DEFECTS: &str = "NO_DEFECTS";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefectReport {
    pub line: usize,
    /// One of the eleven category names when recognised, else the raw text.
    pub category: String,
    pub rationale: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suggested_fix: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dependencies: Vec<usize>,
}

impl DefectReport {
    pub fn new(line: usize, category: Category, rationale: impl Into<String>) -> Self {
        Self {
            line,
            category: category.name().to_string(),
            rationale: rationale.into(),
            suggested_fix: None,
            dependencies: Vec::new(),
        }
    }

    pub fn with_fix(mut self, fix: impl Into<String>) -> Self {
        let fix: String = fix.into();
        self.suggested_fix = Some(fix.lines().next().unwrap_or("").to_string());
        self
    }

    pub fn with_dep(mut self, line: usize) -> Self {
        if !self.dependencies.contains(&line) {
            self.dependencies.push(line);
        }
        self
    }

    pub fn category_enum(&self) -> Option<Category> {
        self.category.parse().ok()
    }
}

fn normalize_category(text: &str) -> String {
    match Category::normalize(text) {
        Some(c) => c.name().to_string(),
        None => text.trim().to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ParsedOutput {
    pub reports: Vec<DefectReport>,
    pub no_defects: bool,
    pub used_fallback: bool,
    /// `DEFECT` lines that could not be read, and zero line numbers.
    pub anomalies: usize,
}

impl ParsedOutput {
    /// True when nothing usable came out of the response.
    pub fn exhausted(&self) -> bool {
        self.reports.is_empty() && !self.no_defects
    }
}

const KEYS: [&str; 5] = ["line", "type", "deps", "reason", "fix"];

fn parse_defect_line(body: &str) -> Option<DefectReport> {
    let body = format!(" {}", body.trim());
    // locate each key in order: line, type, [deps], reason, [fix]
    let mut found: Vec<(usize, &str)> = Vec::new();
    let mut from = 0;
    for key in KEYS {
        let marker = format!(" {key}=");
        if let Some(p) = body[from..].find(&marker) {
            found.push((from + p, key));
            from += p + marker.len();
        }
    }
    let value = |key: &str| -> Option<&str> {
        let idx = found.iter().position(|(_, k)| *k == key)?;
        let start = found[idx].0 + key.len() + 2;
        let end = found.get(idx + 1).map_or(body.len(), |(p, _)| *p);
        Some(body[start..end].trim())
    };
    let line: usize = value("line")?.trim_matches(|c: char| !c.is_ascii_digit()).parse().ok()?;
    let category = normalize_category(value("type").unwrap_or(""));
    let dependencies = value("deps")
        .map(|d| {
            d.split(|c: char| c == ',' || c.is_whitespace())
                .filter_map(|x| x.trim().parse().ok())
                .collect()
        })
        .unwrap_or_default();
    let rationale = value("reason").unwrap_or("").to_string();
    let suggested_fix = value("fix").map(str::to_string).filter(|f| !f.is_empty());
    Some(DefectReport {
        line,
        category,
        rationale,
        suggested_fix,
        dependencies,
    })
}

fn line_mention() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)\blines?\s*(\d+)").unwrap())
}

fn fallback(raw: &str) -> Vec<DefectReport> {
    let mut out: Vec<DefectReport> = Vec::new();
    for chunk in raw.split('\n') {
        // sentence boundaries, keeping decimals like 1.5 intact
        for sentence in chunk.split(". ") {
            let sentence = sentence.trim().trim_start_matches(['-', '*', ' ']);
            for cap in line_mention().captures_iter(sentence) {
                let Ok(line) = cap[1].parse::<usize>() else { continue };
                if out.iter().any(|r| r.line == line) {
                    continue;
                }
                let category = Category::normalize(sentence)
                    .map(|c| c.name().to_string())
                    .unwrap_or_default();
                out.push(DefectReport {
                    line,
                    category,
                    rationale: sentence.to_string(),
                    suggested_fix: None,
                    dependencies: Vec::new(),
                });
            }
        }
    }
    out
}

pub fn parse_output(raw: &str) -> ParsedOutput {
    let mut parsed = ParsedOutput::default();
    let mut saw_defect = false;
    for l in raw.lines() {
        let t = l.trim().trim_start_matches(['-', '*', '`', ' ']).trim_end_matches('`');
        if t == NO_DEFECTS {
            parsed.no_defects = true;
            continue;
        }
        if let Some(body) = t.strip_prefix("DEFECT") {
            if !body.is_empty() && !body.starts_with(' ') {
                continue;
            }
            saw_defect = true;
            match parse_defect_line(body) {
                Some(r) if r.line >= 1 => parsed.reports.push(r),
                _ => parsed.anomalies += 1,
            }
        }
    }
    if !saw_defect && !parsed.no_defects {
        parsed.reports = fallback(raw);
        parsed.used_fallback = true;
        let before = parsed.reports.len();
        parsed.reports.retain(|r| r.line >= 1);
        parsed.anomalies += before - parsed.reports.len();
    }
    if parsed.no_defects && !parsed.reports.is_empty() {
        parsed.no_defects = false;
    }
    parsed
}

/// Sorts by line and merges reports sharing (line, category): the first
/// rationale and fix win, dependencies are unioned.
pub fn merge_reports(reports: Vec<DefectReport>) -> Vec<DefectReport> {
    let mut merged: BTreeMap<(usize, String), DefectReport> = BTreeMap::new();
    let mut order: Vec<(usize, String)> = Vec::new();
    for r in reports {
        let key = (r.line, r.category.clone());
        match merged.get_mut(&key) {
            Some(existing) => {
                if existing.suggested_fix.is_none() {
                    existing.suggested_fix = r.suggested_fix;
                }
                for d in r.dependencies {
                    if !existing.dependencies.contains(&d) {
                        existing.dependencies.push(d);
                    }
                }
            }
            None => {
                let mut r = r;
                let mut seen = Vec::new();
                r.dependencies.retain(|d| {
                    let fresh = !seen.contains(d);
                    seen.push(*d);
                    fresh
                });
                order.push(key.clone());
                merged.insert(key, r);
            }
        }
    }
    let mut out: Vec<DefectReport> = order.into_iter().map(|k| merged.remove(&k).unwrap()).collect();
    out.sort_by_key(|r| r.line);
    out
}

/// Inverse of [`parse_output`] for well-formed reports.
pub fn render_reports(reports: &[DefectReport]) -> String {
    if reports.is_empty() {
        return format!("{NO_DEFECTS}\n");
    }
    let mut out = String::new();
    for r in reports {
        out.push_str(&format!("DEFECT line={} type={}", r.line, r.category));
        if !r.dependencies.is_empty() {
            let deps: Vec<String> = r.dependencies.iter().map(|d| d.to_string()).collect();
            out.push_str(&format!(" deps={}", deps.join(",")));
        }
        out.push_str(&format!(" reason={}", r.rationale));
        if let Some(f) = &r.suggested_fix {
            out.push_str(&format!(" fix={f}"));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn primary_grammar_with_fix() {
        let p = parse_output("DEFECT line=6 type=BitWidthUsage reason=temp_reg narrower than din fix=reg [15:0] temp_reg;");
        assert_eq!(p.reports.len(), 1);
        let r = &p.reports[0];
        assert_eq!(r.line, 6);
        assert_eq!(r.category, "Bit width Usage");
        assert_eq!(r.rationale, "temp_reg narrower than din");
        assert_eq!(r.suggested_fix.as_deref(), Some("reg [15:0] temp_reg;"));
    }

    #[test]
    fn no_defects_marker() {
        let p = parse_output("NO_DEFECTS");
        assert!(p.reports.is_empty() && p.no_defects && !p.exhausted());
    }

    #[test]
    fn prose_fallback() {
        let p = parse_output("There is a problem on Line 9: non-blocking write to undersized reg");
        assert!(p.used_fallback);
        assert_eq!(p.reports.len(), 1);
        assert_eq!(p.reports[0].line, 9);
        assert!(p.reports[0].rationale.contains("undersized"));
    }

    #[test]
    fn fallback_dedupes_by_line() {
        let p = parse_output("Line 4 is wrong. Also line 4 again. And line 7.");
        let lines: Vec<_> = p.reports.iter().map(|r| r.line).collect();
        assert_eq!(lines, [4, 7]);
    }

    #[test]
    fn nothing_parseable() {
        assert!(parse_output("looks fine to me").exhausted());
    }

    #[test]
    fn zero_line_is_an_anomaly() {
        let p = parse_output("DEFECT line=0 type=Operators reason=x\nDEFECT garbage\nDEFECT line=3 type=Operators reason=y");
        assert_eq!(p.reports.len(), 1);
        assert_eq!(p.anomalies, 2);
    }

    #[test]
    fn deps_and_unknown_category() {
        let p = parse_output("- DEFECT line=9 type=Width Trouble deps=6 reason=follows from line 6\n");
        assert_eq!(p.reports[0].dependencies, [6]);
        assert_eq!(p.reports[0].category, "Bit width Usage");
        let p = parse_output("DEFECT line=2 type=Mystery reason=r");
        assert_eq!(p.reports[0].category, "Mystery");
    }

    #[test]
    fn merge_combines_same_line_and_category() {
        let a = DefectReport::new(5, Category::Operators, "first");
        let b = DefectReport::new(5, Category::Operators, "second").with_fix("x = y;");
        let c = DefectReport::new(2, Category::PortType, "other");
        let m = merge_reports(vec![a, b, c]);
        assert_eq!(m.len(), 2);
        assert_eq!(m[0].line, 2);
        assert_eq!(m[1].rationale, "first");
        assert_eq!(m[1].suggested_fix.as_deref(), Some("x = y;"));
    }

    fn arb_report() -> impl Strategy<Value = DefectReport> {
        (
            1usize..200,
            prop::sample::select(Category::ALL.to_vec()),
            "[a-z][a-z ]{0,20}[a-z]",
            prop::option::of("[a-z][a-z0-9 \\[\\]:;]{0,20}[a-z;]"),
            prop::collection::vec(1usize..200, 0..3),
        )
            .prop_map(|(line, c, reason, fix, deps)| DefectReport {
                line,
                category: c.name().to_string(),
                rationale: reason,
                suggested_fix: fix,
                dependencies: deps,
            })
    }

    proptest! {
        #[test]
        fn render_then_parse_is_identity(reports in prop::collection::vec(arb_report(), 0..8)) {
            let merged = merge_reports(reports);
            let reparsed = merge_reports(parse_output(&render_reports(&merged)).reports);
            prop_assert_eq!(reparsed, merged);
        }
    }
}
