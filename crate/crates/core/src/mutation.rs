//! Rule-driven defect injection.
//!
//! Rules 1 to 10 rewrite text on a single line; rules 11 to 13 insert one
//! new statement line after an anchor line. Every site is checked to still
//! lex after application.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::category::Category;
use crate::lexer::{tokenize, tokenize_str, Token, TokenKind};
use crate::source::SourceUnit;
use crate::structure::{
    extract_modules, DeclClass, Direction, ModuleBlock, NetKind, ProcContext, Sensitivity, Width,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleKind {
    TokenSwap,
    TokenRewrite,
    StatementInsert,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MutationRule {
    pub rule_id: u8,
    pub description: &'static str,
    pub category: Category,
    pub kind: RuleKind,
}

pub const RULES: [MutationRule; 13] = [
    MutationRule {
        rule_id: 1,
        description: "misspell a reserved keyword",
        category: Category::ReservedWords,
        kind: RuleKind::TokenRewrite,
    },
    MutationRule {
        rule_id: 2,
        description: "swap blocking and non-blocking assignment",
        category: Category::CombinationalOrSequential,
        kind: RuleKind::TokenSwap,
    },
    MutationRule {
        rule_id: 3,
        description: "swap assignment `=` and equality `==`",
        category: Category::Operators,
        kind: RuleKind::TokenSwap,
    },
    MutationRule {
        rule_id: 4,
        description: "swap input and output",
        category: Category::PortType,
        kind: RuleKind::TokenSwap,
    },
    MutationRule {
        rule_id: 5,
        description: "swap reg and wire",
        category: Category::SignalUsage,
        kind: RuleKind::TokenSwap,
    },
    MutationRule {
        rule_id: 6,
        description: "change a declared bit width",
        category: Category::BitWidthUsage,
        kind: RuleKind::TokenRewrite,
    },
    MutationRule {
        rule_id: 7,
        description: "swap posedge and negedge",
        category: Category::SensitivityList,
        kind: RuleKind::TokenSwap,
    },
    MutationRule {
        rule_id: 8,
        description: "swap bitwise and logical operators",
        category: Category::Operators,
        kind: RuleKind::TokenSwap,
    },
    MutationRule {
        rule_id: 9,
        description: "replace `or` in a sensitivity list with `|` or `||`",
        category: Category::SensitivityList,
        kind: RuleKind::TokenSwap,
    },
    MutationRule {
        rule_id: 10,
        description: "use an undeclared signal",
        category: Category::SignalUsage,
        kind: RuleKind::TokenRewrite,
    },
    MutationRule {
        rule_id: 11,
        description: "add a second driver (write-write race)",
        category: Category::RaceOrHazard,
        kind: RuleKind::StatementInsert,
    },
    MutationRule {
        rule_id: 12,
        description: "assign x or z in synthesizable code",
        category: Category::LogicSynthesis,
        kind: RuleKind::StatementInsert,
    },
    MutationRule {
        rule_id: 13,
        description: "instantiate a module with a floating port",
        category: Category::ModuleInstances,
        kind: RuleKind::StatementInsert,
    },
];

pub fn rule(rule_id: u8) -> Option<&'static MutationRule> {
    RULES.iter().find(|r| r.rule_id == rule_id)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutationSite {
    pub rule_id: u8,
    /// Rewrite line, or the anchor line an insert follows.
    pub line: usize,
    /// 1-based character column; 1 for inserts.
    pub col: usize,
    /// Empty for inserts.
    pub original_text: String,
    /// For inserts, the full inserted line(s).
    pub replacement_text: String,
    pub category: Category,
    pub source_sha256: String,
}

impl MutationSite {
    pub fn is_insert(&self) -> bool {
        self.original_text.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefectRecord {
    pub dut_id: String,
    pub rule_id: u8,
    pub category: Category,
    pub injected_line: usize,
    /// Inclusive line span in the mutated file.
    pub touched_lines: (usize, usize),
    pub original_snippet: String,
    pub mutated_snippet: String,
    pub seed: u64,
}

impl DefectRecord {
    pub fn touches(&self, line: usize) -> bool {
        (self.touched_lines.0..=self.touched_lines.1).contains(&line)
    }

    /// Number of lines the original snippet occupies.
    pub fn original_len(&self) -> usize {
        self.original_snippet.split('\n').count()
    }

    pub fn is_insert(&self) -> bool {
        self.mutated_snippet.split('\n').count() > self.original_len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MutationError {
    #[error("site was enumerated against a different source (digest {expected}, got {actual})")]
    StaleSite { expected: String, actual: String },
    #[error("snippet at lines {start}-{end} does not match the defect record")]
    RecordMismatch { start: usize, end: usize },
    #[error("no mutation sites")]
    NoSites,
}

/// Sites for one rule, sorted by (line, col, replacement). `modules` must
/// come from this exact source.
pub fn enumerate_sites(src: &SourceUnit, rule: &MutationRule, modules: &[ModuleBlock]) -> Vec<MutationSite> {
    let Ok(tokens) = tokenize(src) else {
        return Vec::new();
    };
    let mut raw = Vec::new();
    for m in modules {
        let mut ctx = Ctx {
            src,
            toks: &tokens,
            module: m,
            out: &mut raw,
        };
        match rule.rule_id {
            1 => ctx.rule1(),
            2 => ctx.rule2(),
            3 => ctx.rule3(),
            4 => ctx.rule4(),
            5 => ctx.rule5(),
            6 => ctx.rule6(),
            7 => ctx.rule7(),
            8 => ctx.rule8(),
            9 => ctx.rule9(),
            10 => ctx.rule10(),
            11 => ctx.rule11(),
            12 => ctx.rule12(),
            13 => ctx.rule13(),
            _ => {}
        }
    }
    let mut seen = BTreeSet::new();
    let mut sites: Vec<MutationSite> = raw
        .into_iter()
        .map(|(line, col, original_text, replacement_text, category)| MutationSite {
            rule_id: rule.rule_id,
            line,
            col,
            original_text,
            replacement_text,
            category,
            source_sha256: src.sha256().to_string(),
        })
        .filter(|s| s.original_text != s.replacement_text)
        .filter(|s| seen.insert((s.line, s.col, s.replacement_text.clone())))
        .filter(|s| {
            splice(src, s).is_some_and(|(m, _)| tokenize_str(m.content()).is_ok())
        })
        .collect();
    sites.sort_by(|a, b| (a.line, a.col, &a.replacement_text).cmp(&(b.line, b.col, &b.replacement_text)));
    sites
}

/// Sites for every rule on a source, tokenizing and parsing it once.
pub fn enumerate_all(src: &SourceUnit) -> Vec<MutationSite> {
    let Ok(tokens) = tokenize(src) else {
        return Vec::new();
    };
    let Ok(modules) = extract_modules(&tokens) else {
        return Vec::new();
    };
    RULES
        .iter()
        .flat_map(|r| enumerate_sites(src, r, &modules))
        .collect()
}

pub fn pick_site(sites: &[MutationSite], seed: u64) -> Result<&MutationSite, MutationError> {
    if sites.is_empty() {
        return Err(MutationError::NoSites);
    }
    Ok(&sites[(seed % sites.len() as u64) as usize])
}

/// Applies a site. The record's `dut_id` is the source id and `seed` is 0;
/// callers building a benchmark overwrite both.
pub fn apply_mutation(src: &SourceUnit, site: &MutationSite) -> Result<(SourceUnit, DefectRecord), MutationError> {
    if site.source_sha256 != src.sha256() {
        return Err(MutationError::StaleSite {
            expected: site.source_sha256.clone(),
            actual: src.sha256().to_string(),
        });
    }
    let (mutated, record) = splice(src, site).ok_or_else(|| MutationError::StaleSite {
        expected: site.source_sha256.clone(),
        actual: src.sha256().to_string(),
    })?;
    Ok((mutated, record))
}

fn splice(src: &SourceUnit, site: &MutationSite) -> Option<(SourceUnit, DefectRecord)> {
    let mut lines: Vec<String> = src.lines().map(str::to_string).collect();
    let anchor = src.line(site.line)?.to_string();
    let (injected_line, touched, original_snippet, mutated_snippet) = if site.is_insert() {
        let inserted: Vec<String> = site.replacement_text.split('\n').map(str::to_string).collect();
        let n = inserted.len();
        let mut mutated_snippet = anchor.clone();
        for l in &inserted {
            mutated_snippet.push('\n');
            mutated_snippet.push_str(l);
        }
        lines.splice(site.line..site.line, inserted);
        (site.line + 1, (site.line, site.line + n), anchor, mutated_snippet)
    } else {
        let byte = anchor.char_indices().nth(site.col - 1).map(|(b, _)| b)?;
        if !anchor[byte..].starts_with(&site.original_text) {
            return None;
        }
        let mut new_line = String::with_capacity(anchor.len() + site.replacement_text.len());
        new_line.push_str(&anchor[..byte]);
        new_line.push_str(&site.replacement_text);
        new_line.push_str(&anchor[byte + site.original_text.len()..]);
        if new_line.contains('\n') {
            return None;
        }
        lines[site.line - 1] = new_line.clone();
        (site.line, (site.line, site.line), anchor, new_line)
    };
    let mutated = src.from_lines(&lines);
    Some((
        mutated,
        DefectRecord {
            dut_id: src.id().to_string(),
            rule_id: site.rule_id,
            category: site.category,
            injected_line,
            touched_lines: touched,
            original_snippet,
            mutated_snippet,
            seed: 0,
        },
    ))
}

/// Restores the original source from a mutated one.
pub fn invert_mutation(mutated: &SourceUnit, rec: &DefectRecord) -> Result<SourceUnit, MutationError> {
    let (start, end) = rec.touched_lines;
    let mismatch = MutationError::RecordMismatch { start, end };
    if start == 0 || end < start || end > mutated.line_count() {
        return Err(mismatch);
    }
    let current: Vec<&str> = (start..=end).map(|n| mutated.line(n).unwrap_or("")).collect();
    if current.join("\n") != rec.mutated_snippet {
        return Err(mismatch);
    }
    let mut lines: Vec<String> = mutated.lines().map(str::to_string).collect();
    lines.splice(
        start - 1..end,
        rec.original_snippet.split('\n').map(str::to_string),
    );
    Ok(mutated.from_lines(&lines))
}

type RawSite = (usize, usize, String, String, Category);

struct Ctx<'a> {
    src: &'a SourceUnit,
    toks: &'a [Token],
    module: &'a ModuleBlock,
    out: &'a mut Vec<RawSite>,
}

const KEYWORD_TYPOS: &[(&str, &str, Category)] = &[
    ("always", "alway", Category::ReservedWords),
    ("assign", "asign", Category::ReservedWords),
    ("default", "defualt", Category::ReservedWords),
    ("begin", "begn", Category::SyntaxStructure),
    ("end", "ned", Category::SyntaxStructure),
    ("endcase", "endcas", Category::SyntaxStructure),
];

impl Ctx<'_> {
    fn push_tok(&mut self, tok: usize, replacement: impl Into<String>, category: Category) {
        let t = &self.toks[tok];
        self.out.push((t.line, t.col, t.text.clone(), replacement.into(), category));
    }

    fn push_insert(&mut self, anchor: usize, text: String, category: Category) {
        if anchor >= self.module.end_line || anchor < self.module.start_line {
            return;
        }
        self.out.push((anchor, 1, String::new(), text, category));
    }

    fn span(&self) -> std::ops::RangeInclusive<usize> {
        self.module.first_tok..=self.module.last_tok
    }

    fn next_significant(&self, tok: usize) -> Option<usize> {
        (tok + 1..self.toks.len()).find(|&i| !self.toks[i].is_trivia())
    }

    fn prev_significant(&self, tok: usize) -> Option<usize> {
        (0..tok).rev().find(|&i| !self.toks[i].is_trivia())
    }

    fn indent_of(&self, line: usize) -> String {
        self.src
            .line(line)
            .unwrap_or("")
            .chars()
            .take_while(|c| *c == ' ' || *c == '\t')
            .collect()
    }

    /// Token texts in an inclusive range, whitespace collapsed.
    fn text(&self, range: (usize, usize)) -> String {
        let mut out = String::new();
        for t in &self.toks[range.0..=range.1] {
            if t.is_trivia() {
                if !out.ends_with(' ') {
                    out.push(' ');
                }
            } else {
                out.push_str(&t.text);
            }
        }
        out.trim().to_string()
    }

    /// True when the statement ending at `tok` is the last thing on its line.
    fn ends_line(&self, tok: usize) -> bool {
        self.next_significant(tok)
            .is_none_or(|n| self.toks[n].line > self.toks[tok].line)
    }

    fn starts_line(&self, tok: usize) -> bool {
        self.prev_significant(tok)
            .is_none_or(|p| self.toks[p].line < self.toks[tok].line)
    }

    fn rule1(&mut self) {
        for i in self.span() {
            let t = &self.toks[i];
            if t.kind != TokenKind::Keyword {
                continue;
            }
            if t.text == "else" {
                let Some(n) = self.next_significant(i) else { continue };
                let between_ok = self.toks[i + 1..n]
                    .iter()
                    .all(|w| w.kind == TokenKind::Whitespace && !w.text.contains('\n') && !w.text.contains("/"));
                if self.toks[n].is_keyword("if") && between_ok {
                    let original: String = self.toks[i..=n].iter().map(|t| t.text.as_str()).collect();
                    self.out.push((t.line, t.col, original, "elif".into(), Category::ReservedWords));
                }
                continue;
            }
            if let Some((_, typo, cat)) = KEYWORD_TYPOS.iter().find(|(kw, _, _)| *kw == t.text) {
                self.push_tok(i, *typo, *cat);
            }
        }
    }

    fn rule2(&mut self) {
        let body = &self.module.body;
        let mut sites = Vec::new();
        for a in &body.proc_assigns {
            let Some(block) = body.always_of(a.context) else { continue };
            let op = &self.toks[a.op_tok].text;
            let clocked = block.sensitivity.is_clocked();
            match (clocked, op.as_str()) {
                (true, "<=") => sites.push((a.op_tok, "=")),
                (false, "=") => sites.push((a.op_tok, "<=")),
                _ => {}
            }
        }
        for (tok, rep) in sites {
            self.push_tok(tok, rep, Category::CombinationalOrSequential);
        }
    }

    fn rule3(&mut self) {
        let body = &self.module.body;
        let mut sites = Vec::new();
        let mut ranges: Vec<(usize, usize)> = body
            .conditions
            .iter()
            .filter(|c| c.kind != crate::structure::ConditionKind::Case)
            .map(|c| (c.open_tok, c.close_tok))
            .collect();
        ranges.extend(body.proc_assigns.iter().map(|a| a.rhs));
        ranges.extend(body.cont_assigns.iter().map(|a| a.rhs));
        for (a, b) in ranges {
            if b < a {
                continue;
            }
            for i in a..=b {
                if self.toks[i].text == "==" && self.toks[i].kind == TokenKind::Operator {
                    sites.push((i, "="));
                }
            }
        }
        for a in &body.proc_assigns {
            if a.blocking && self.toks[a.op_tok].text == "=" && body.always_of(a.context).is_some() {
                sites.push((a.op_tok, "=="));
            }
        }
        for a in &body.cont_assigns {
            if a.kw_tok.is_some() && self.toks[a.op_tok].text == "=" {
                sites.push((a.op_tok, "=="));
            }
        }
        for (tok, rep) in sites {
            self.push_tok(tok, rep, Category::Operators);
        }
    }

    fn rule4(&mut self) {
        let sites: Vec<_> = self
            .module
            .body
            .decls
            .iter()
            .filter_map(|d| match (d.direction, d.direction_tok) {
                (Some(Direction::Input), Some(t)) => Some((t, "output")),
                (Some(Direction::Output), Some(t)) => Some((t, "input")),
                _ => None,
            })
            .collect();
        for (tok, rep) in sites {
            self.push_tok(tok, rep, Category::PortType);
        }
    }

    fn rule5(&mut self) {
        let sites: Vec<_> = self
            .module
            .body
            .decls
            .iter()
            .filter_map(|d| match (d.net, d.net_tok) {
                (Some(NetKind::Reg), Some(t)) => Some((t, "wire")),
                (Some(NetKind::Wire), Some(t)) => Some((t, "reg")),
                _ => None,
            })
            .collect();
        for (tok, rep) in sites {
            self.push_tok(tok, rep, Category::SignalUsage);
        }
    }

    fn rule6(&mut self) {
        let mut sites = Vec::new();
        for d in &self.module.body.decls {
            if d.class != DeclClass::Signal {
                continue;
            }
            let Some(r) = &d.range else { continue };
            if r.open_tok == usize::MAX || r.close_tok == usize::MAX {
                continue;
            }
            let Width::Range { msb, lsb } = r.width else { continue };
            if self.toks[r.open_tok].line != self.toks[r.close_tok].line {
                continue;
            }
            let width = msb.abs_diff(lsb) as i64 + 1;
            let new_width = if width >= 16 { width / 2 } else { width * 2 };
            let replacement = if msb >= lsb {
                format!("[{}:{}]", lsb + new_width - 1, lsb)
            } else {
                format!("[{}:{}]", msb, msb + new_width - 1)
            };
            let original: String = self.toks[r.open_tok..=r.close_tok]
                .iter()
                .map(|t| t.text.as_str())
                .collect();
            let t = &self.toks[r.open_tok];
            sites.push((t.line, t.col, original, replacement));
        }
        for (line, col, original, replacement) in sites {
            self.out.push((line, col, original, replacement, Category::BitWidthUsage));
        }
    }

    fn rule7(&mut self) {
        let mut sites = Vec::new();
        for b in &self.module.body.always_blocks {
            if let Sensitivity::List { items, .. } = &b.sensitivity {
                for item in items {
                    if let Some(t) = item.edge_tok {
                        let rep = if self.toks[t].text == "posedge" { "negedge" } else { "posedge" };
                        sites.push((t, rep));
                    }
                }
            }
        }
        for (tok, rep) in sites {
            self.push_tok(tok, rep, Category::SensitivityList);
        }
    }

    fn rule8(&mut self) {
        let body = &self.module.body;
        let mut ranges: Vec<(usize, usize)> = body.conditions.iter().map(|c| (c.open_tok, c.close_tok)).collect();
        ranges.extend(body.proc_assigns.iter().map(|a| a.rhs));
        ranges.extend(body.cont_assigns.iter().map(|a| a.rhs));
        let mut sites = Vec::new();
        for (a, b) in ranges {
            if b < a {
                continue;
            }
            for i in a..=b {
                let t = &self.toks[i];
                let rep = match t.text.as_str() {
                    "&" => "&&",
                    "&&" => "&",
                    "|" => "||",
                    "||" => "|",
                    _ => continue,
                };
                let binary = self.prev_significant(i).is_some_and(|p| {
                    let pt = &self.toks[p];
                    matches!(pt.kind, TokenKind::Identifier | TokenKind::Literal)
                        || matches!(pt.text.as_str(), ")" | "]" | "}")
                });
                if binary {
                    sites.push((i, rep));
                }
            }
        }
        for (tok, rep) in sites {
            self.push_tok(tok, rep, Category::Operators);
        }
    }

    fn rule9(&mut self) {
        let mut sites = Vec::new();
        for b in &self.module.body.always_blocks {
            if let Sensitivity::List {
                at_tok,
                open_tok,
                separators,
                ..
            } = &b.sensitivity
            {
                if at_tok == open_tok {
                    continue;
                }
                for &s in separators {
                    match self.toks[s].text.as_str() {
                        "or" => {
                            sites.push((s, "|"));
                            sites.push((s, "||"));
                        }
                        "," => sites.push((s, "|")),
                        _ => {}
                    }
                }
            }
        }
        for (tok, rep) in sites {
            self.push_tok(tok, rep, Category::SensitivityList);
        }
    }

    fn rule10(&mut self) {
        let body = &self.module.body;
        let signals = body.signals();
        let used: BTreeSet<&str> = self
            .toks
            .iter()
            .filter(|t| t.kind == TokenKind::Identifier)
            .map(|t| t.text.as_str())
            .collect();
        let mut sites = Vec::new();
        for r in &body.refs {
            if r.role != crate::structure::RefRole::Read || r.in_sensitivity {
                continue;
            }
            let Some(sig) = signals.get(&r.name) else { continue };
            if sig.class != DeclClass::Signal {
                continue;
            }
            let replacement = ["_r", "_q", "_d"]
                .iter()
                .map(|suffix| format!("{}{}", r.name, suffix))
                .find(|cand| !used.contains(cand.as_str()) && !signals.contains_key(cand))
                .unwrap_or_else(|| format!("{}_undeclared", r.name));
            sites.push((r.tok, replacement));
        }
        for (tok, rep) in sites {
            self.push_tok(tok, rep, Category::SignalUsage);
        }
    }

    fn rule11(&mut self) {
        let body = &self.module.body;
        let mut inserts = Vec::new();
        for a in &body.cont_assigns {
            let (Some(kw), Some(name)) = (a.kw_tok, &a.lhs.name) else { continue };
            if a.lhs.select.is_some() || !self.ends_line(a.end_tok) {
                continue;
            }
            let indent = self.indent_of(self.toks[kw].line);
            inserts.push((a.end_line, format!("{indent}assign {name} = 1'b0;")));
        }
        for (idx, block) in body.always_blocks.iter().enumerate() {
            if !self.ends_line(block.end_tok) {
                continue;
            }
            let indent = self.indent_of(block.line);
            let (event, op) = match &block.sensitivity {
                Sensitivity::List { open_tok, close_tok, at_tok, .. } if block.sensitivity.is_clocked() && open_tok != at_tok => {
                    (self.text((*open_tok + 1, *close_tok - 1)), "<=")
                }
                Sensitivity::None => continue,
                _ => ("*".to_string(), "="),
            };
            let mut names: Vec<&str> = Vec::new();
            for a in &body.proc_assigns {
                if a.context != ProcContext::Always(idx) || a.lhs.select.is_some() {
                    continue;
                }
                if let Some(n) = &a.lhs.name {
                    if !names.contains(&n.as_str()) {
                        names.push(n);
                    }
                }
            }
            for n in names {
                inserts.push((block.end_line, format!("{indent}always @({event}) {n} {op} 1'b0;")));
            }
        }
        for (anchor, text) in inserts {
            self.push_insert(anchor, text, Category::RaceOrHazard);
        }
    }

    fn rule12(&mut self) {
        let body = &self.module.body;
        let mut inserts = Vec::new();
        for a in &body.proc_assigns {
            if !matches!(a.context, ProcContext::Always(_)) || !a.in_seq_block || a.lhs.select.is_some() {
                continue;
            }
            let (Some(name), Some(semi)) = (&a.lhs.name, a.semi_tok) else { continue };
            if self.toks[semi].line != a.line || !self.ends_line(semi) || !self.starts_line(a.lhs.first_tok) {
                continue;
            }
            let op = &self.toks[a.op_tok].text;
            let indent = self.indent_of(a.line);
            for v in ["1'bz", "1'bx"] {
                inserts.push((a.line, format!("{indent}{name} {op} {v};")));
            }
        }
        for d in &body.decls {
            if d.in_header || d.net != Some(NetKind::Reg) || d.net_tok.is_none() || d.array {
                continue;
            }
            if self.toks[d.stmt_end_tok].line != d.line || !self.ends_line(d.stmt_end_tok) {
                continue;
            }
            let indent = self.indent_of(d.line);
            inserts.push((d.line, format!("{indent}initial {} = 1'bx;", d.name)));
        }
        for (anchor, text) in inserts {
            self.push_insert(anchor, text, Category::LogicSynthesis);
        }
    }

    fn rule13(&mut self) {
        let body = &self.module.body;
        let names: BTreeSet<&str> = self
            .toks
            .iter()
            .filter(|t| t.kind == TokenKind::Identifier)
            .map(|t| t.text.as_str())
            .collect();
        let mut inserts = Vec::new();
        for inst in &body.instances {
            let Some(name) = &inst.name else { continue };
            if !self.ends_line(inst.end_tok) || inst.connections.is_empty() {
                continue;
            }
            let clone_name = (1..)
                .map(|k| format!("{name}_{k}"))
                .find(|c| !names.contains(c.as_str()))
                .unwrap();
            let params = inst
                .params
                .map(|p| format!(" {}", self.text(p)))
                .unwrap_or_default();
            let indent = self.indent_of(self.toks[inst.module_tok].line);
            for (k, _) in inst.connections.iter().enumerate().filter(|(_, c)| c.expr.is_some()) {
                let conns: Vec<String> = inst
                    .connections
                    .iter()
                    .enumerate()
                    .map(|(j, c)| {
                        let expr = if j == k { String::new() } else { c.expr.map(|e| self.text(e)).unwrap_or_default() };
                        match &c.port {
                            Some(p) => format!(".{p}({expr})"),
                            None => expr,
                        }
                    })
                    .collect();
                inserts.push((
                    inst.end_line,
                    format!("{indent}{}{params} {clone_name} ({});", inst.module_name, conns.join(", ")),
                ));
            }
        }
        for (anchor, text) in inserts {
            self.push_insert(anchor, text, Category::ModuleInstances);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::strip_comments;

    fn unit(text: &str) -> SourceUnit {
        SourceUnit::new("t", "t.v", text)
    }

    fn sites(text: &str, rule_id: u8) -> Vec<MutationSite> {
        let src = unit(text);
        let toks = tokenize(&src).unwrap();
        let modules = extract_modules(&toks).unwrap();
        enumerate_sites(&src, rule(rule_id).unwrap(), &modules)
    }

    const CLOCKED: &str = "module m(input clk, input d, output reg q);\nalways @(posedge clk)\n  q <= d;\nendmodule\n";

    #[test]
    fn rules_table_is_a_bijection() {
        for (i, r) in RULES.iter().enumerate() {
            assert_eq!(r.rule_id as usize, i + 1);
            assert_eq!(r.kind == RuleKind::StatementInsert, r.rule_id >= 11);
        }
    }

    #[test]
    fn rule7_swaps_edge() {
        let s = sites(CLOCKED, 7);
        assert_eq!(s.len(), 1);
        assert_eq!((s[0].line, s[0].col), (2, 10));
        assert_eq!((s[0].original_text.as_str(), s[0].replacement_text.as_str()), ("posedge", "negedge"));
    }

    #[test]
    fn rule2_swaps_nonblocking_in_clocked_block() {
        let s = sites(CLOCKED, 2);
        assert_eq!(s.len(), 1);
        assert_eq!((s[0].line, s[0].original_text.as_str(), s[0].replacement_text.as_str()), (3, "<=", "="));
    }

    #[test]
    fn rule6_without_ranges_is_empty() {
        assert!(sites(CLOCKED, 6).is_empty());
    }

    #[test]
    fn rule4_on_input_load() {
        let src = unit("module m(\n  input load,\n  output y\n);\nassign y = load;\nendmodule\n");
        let toks = tokenize(&src).unwrap();
        let modules = extract_modules(&toks).unwrap();
        let s = enumerate_sites(&src, rule(4).unwrap(), &modules);
        let site = s.iter().find(|s| s.line == 2).unwrap();
        assert_eq!(site.replacement_text, "output");
        let (m, rec) = apply_mutation(&src, site).unwrap();
        assert_eq!(m.line(2), Some("  output load,"));
        assert_eq!(rec.touched_lines, (2, 2));
        assert_eq!(rec.category, Category::PortType);
    }

    #[test]
    fn rule11_second_driver() {
        let src = unit("module m(input a, output out);\n  assign out = a;\nendmodule\n");
        let toks = tokenize(&src).unwrap();
        let modules = extract_modules(&toks).unwrap();
        let s = enumerate_sites(&src, rule(11).unwrap(), &modules);
        assert_eq!(s.len(), 1);
        let (m, rec) = apply_mutation(&src, &s[0]).unwrap();
        assert_eq!(m.line(3), Some("  assign out = 1'b0;"));
        assert_eq!(rec.touched_lines, (2, 3));
        assert_eq!(rec.injected_line, 3);
        assert_eq!(rec.category, Category::RaceOrHazard);
        assert_eq!(invert_mutation(&m, &rec).unwrap(), src);
    }

    #[test]
    fn width_chain_from_corrected_file() {
        let text = include_str!("../data/corpus/complex_1.v");
        let src = strip_comments(&unit(text)).unwrap();
        let s = sites(src.content(), 6);
        let site = s.iter().find(|s| s.line == 6).unwrap();
        assert_eq!((site.original_text.as_str(), site.replacement_text.as_str()), ("[15:0]", "[7:0]"));
        let src = unit(src.content());
        let site = MutationSite {
            source_sha256: src.sha256().to_string(),
            ..site.clone()
        };
        let (m, rec) = apply_mutation(&src, &site).unwrap();
        assert_eq!(rec.injected_line, 6);
        assert!(m.line(6).unwrap().starts_with("    reg [7:0] temp_reg;"));
        let back = invert_mutation(&m, &rec).unwrap();
        assert!(back.line(6).unwrap().starts_with("    reg [15:0] temp_reg;"));
    }

    #[test]
    fn rule12_insert_inverts_to_original_line_count() {
        let text = "module m(input clk, input d, output reg q);\nalways @(posedge clk) begin\n  q <= d;\nend\nendmodule\n";
        let s = sites(text, 12);
        assert!(!s.is_empty());
        let src = unit(text);
        for site in &s {
            let (m, rec) = apply_mutation(&src, site).unwrap();
            assert_eq!(m.line_count(), src.line_count() + 1);
            let back = invert_mutation(&m, &rec).unwrap();
            assert_eq!(back.line_count(), src.line_count());
            assert_eq!(back, src);
        }
    }

    #[test]
    fn rule12_skips_unbraced_if_body() {
        let text = "module m(input clk, input d, output reg q);\nalways @(posedge clk)\n  if (d)\n    q <= d;\n  else\n    q <= 1'b0;\nendmodule\n";
        assert!(sites(text, 12).is_empty());
    }

    #[test]
    fn rule13_clone_has_floating_port() {
        let text = "module top(input a, output y);\n  sub u0 (.a(a), .y(y));\nendmodule\n";
        let s = sites(text, 13);
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].replacement_text, "  sub u0_1 (.a(), .y(y));");
        assert_eq!(s[1].replacement_text, "  sub u0_1 (.a(a), .y());");
    }

    #[test]
    fn rule1_else_if() {
        let text = "module m(input a, input b, output reg y);\nalways @(*) begin\n  if (a) y = 1'b0;\n  else if (b) y = 1'b1;\n  else y = a;\nend\nendmodule\n";
        let s = sites(text, 1);
        let elif = s.iter().find(|s| s.replacement_text == "elif").unwrap();
        assert_eq!((elif.line, elif.col, elif.original_text.as_str()), (4, 3, "else if"));
        assert!(s.iter().any(|s| s.category == Category::SyntaxStructure));
    }

    #[test]
    fn stale_site_rejected() {
        let s = sites(CLOCKED, 7);
        let other = unit("module m; endmodule\n");
        assert!(matches!(apply_mutation(&other, &s[0]), Err(MutationError::StaleSite { .. })));
    }

    #[test]
    fn pick_site_is_modular() {
        let s = sites("module m(input a, input b, input c, output y);\nassign y = a & b & c;\nendmodule\n", 8);
        assert_eq!(s.len(), 2);
        assert_eq!(pick_site(&s, 0).unwrap(), &s[0]);
        assert_eq!(pick_site(&s, 3).unwrap(), &s[1]);
        assert_eq!(pick_site(&[], 1), Err(MutationError::NoSites));
    }

    #[test]
    fn invert_rejects_foreign_record() {
        let s = sites(CLOCKED, 7);
        let src = unit(CLOCKED);
        let (_, rec) = apply_mutation(&src, &s[0]).unwrap();
        assert!(matches!(invert_mutation(&src, &rec), Err(MutationError::RecordMismatch { .. })));
    }
}
