//! Rule-based lint used as the offline reference detector.
//!
//! Each check targets one defect category and reports on the line a human
//! reviewer would point at (usually the declaration for declaration-level
//! problems). The checks are conservative: no finding on well-formed code.

use std::collections::{BTreeMap, BTreeSet};

use super::report::{merge_reports, render_reports, DefectReport};
use super::{DetectError, Detector, RawResponse};
use crate::category::Category;
use crate::lexer::{tokenize, Token, TokenKind};
use crate::prompt::LogicTreePrompt;
use crate::source::SourceUnit;
use crate::structure::{
    extract_modules, range_is_empty, ConditionKind, DeclClass, Direction, Edge, ModuleBody, NetKind,
    ProcContext, RefRole, Sensitivity, SignalInfo,
};

/// Stateless; zero token usage.
#[derive(Debug, Clone, Copy, Default)]
pub struct BaselineDetector;

impl Detector for BaselineDetector {
    fn name(&self) -> &str {
        "baseline"
    }

    fn respond(&self, src: &SourceUnit, _: &LogicTreePrompt) -> Result<RawResponse, DetectError> {
        Ok(RawResponse {
            text: render_reports(&baseline_detect(src)),
            input_tokens: 0,
            output_tokens: 0,
        })
    }
}

pub fn baseline_detect(src: &SourceUnit) -> Vec<DefectReport> {
    let tokens = match tokenize(src) {
        Ok(t) => t,
        Err(e) => return vec![DefectReport::new(e.line(), Category::SyntaxStructure, e.to_string())],
    };
    let modules = match extract_modules(&tokens) {
        Ok(m) => m,
        Err(e) => {
            let crate::structure::StructureError::UnbalancedModule { line } = e;
            return vec![DefectReport::new(line, Category::SyntaxStructure, e.to_string())];
        }
    };
    let module_names: BTreeSet<&str> = modules.iter().map(|m| m.name.as_str()).collect();
    let mut out = Vec::new();
    for m in &modules {
        let cx = Ctx {
            src,
            toks: &tokens,
            body: &m.body,
            sigs: m.body.signals(),
            module_names: &module_names,
        };
        cx.syntax(&mut out);
        cx.undeclared(&mut out);
        cx.widths(&mut out);
        cx.assignment_kinds(&mut out);
        cx.operators(&mut out);
        cx.drivers(&mut out);
        cx.sensitivity(&mut out);
        cx.instances(&mut out);
        cx.ports_and_nets(&mut out);
        cx.synthesis(&mut out);
    }
    merge_reports(out)
}

struct Ctx<'a> {
    src: &'a SourceUnit,
    toks: &'a [Token],
    body: &'a ModuleBody,
    sigs: BTreeMap<String, SignalInfo>,
    module_names: &'a BTreeSet<&'a str>,
}

const STRUCTURE_KEYWORDS: &[&str] = &["begin", "end", "endcase", "endmodule", "endfunction", "endtask", "fork", "join"];
const RESERVED_LOOKALIKES: &[&str] = &["elif", "elsif", "elseif", "switch", "others", "when", "then"];

fn keyword_lookalike(word: &str) -> Option<&'static str> {
    if word.len() < 3 {
        return None;
    }
    crate::lexer::keywords()
        .iter()
        .filter(|k| k.len() >= 3)
        .map(|k| (strsim::levenshtein(word, k), *k))
        .filter(|(d, k)| *d >= 1 && (*d == 1 || (*d == 2 && k.len() >= 6)))
        .min()
        .map(|(_, k)| k)
}

fn sig_tokens(toks: &[Token], range: (usize, usize)) -> Vec<&Token> {
    if range_is_empty(range) {
        return Vec::new();
    }
    toks[range.0..=range.1.min(toks.len() - 1)].iter().filter(|t| !t.is_trivia()).collect()
}

fn literal_width(text: &str) -> Option<u64> {
    let (size, _) = text.split_once('\'')?;
    size.replace('_', "").parse().ok()
}

fn has_xz(text: &str) -> bool {
    match text.split_once('\'') {
        Some((_, rest)) => rest.chars().skip(1).any(|c| matches!(c, 'x' | 'X' | 'z' | 'Z' | '?')),
        None => false,
    }
}

fn is_clock_name(name: &str) -> bool {
    let n = name.to_ascii_lowercase();
    n.contains("clk") || n.contains("clock")
}

fn is_active_low(name: &str) -> bool {
    let n = name.to_ascii_lowercase();
    n.ends_with("_n") || n.ends_with("_b") || n.starts_with('n') && (n.contains("rst") || n.contains("reset"))
}

fn is_reset_name(name: &str) -> bool {
    let n = name.to_ascii_lowercase();
    n.contains("rst") || n.contains("reset")
}

fn fixed(report: DefectReport, fix: Option<String>) -> DefectReport {
    match fix {
        Some(f) => report.with_fix(f),
        None => report,
    }
}

impl Ctx<'_> {
    /// The token's line with the token replaced.
    fn line_fix(&self, tok: usize, replacement: &str) -> Option<String> {
        let t = self.toks.get(tok)?;
        let line = self.src.line(t.line)?;
        let byte = line.char_indices().nth(t.col - 1).map(|(b, _)| b)?;
        let rest = line.get(byte..)?.strip_prefix(t.text.as_str())?;
        Some(format!("{}{replacement}{rest}", &line[..byte]))
    }

    /// The line of `first` with tokens `first..=last` replaced.
    fn span_fix(&self, first: usize, last: usize, replacement: &str) -> Option<String> {
        let (a, b) = (self.toks.get(first)?, self.toks.get(last)?);
        if a.line != b.line {
            return None;
        }
        let line = self.src.line(a.line)?;
        let start = line.char_indices().nth(a.col - 1).map(|(i, _)| i)?;
        let end = start + (b.end_offset() - a.offset);
        Some(format!("{}{replacement}{}", &line[..start], line.get(end..)?))
    }

    fn tok_index(&self, t: &Token) -> usize {
        self.toks.partition_point(|x| x.offset < t.offset)
    }

    fn width_of_name(&self, name: &str) -> Option<u64> {
        let s = self.sigs.get(name)?;
        if s.class != DeclClass::Signal || s.array || s.net == Some(NetKind::Integer) || s.net == Some(NetKind::Other) {
            return None;
        }
        s.width.bits()
    }

    /// Width of `name` followed by an optional constant select.
    fn operand_width(&self, items: &[&Token]) -> Option<u64> {
        match items {
            [t] if t.kind == TokenKind::Literal => literal_width(&t.text),
            [t] if t.kind == TokenKind::Identifier => self.width_of_name(&t.text),
            [t, o, i, c] if t.kind == TokenKind::Identifier && o.is("[") && c.is("]") => {
                i.text.parse::<u64>().ok().map(|_| 1)
            }
            [t, o, a, colon, b, c] if t.kind == TokenKind::Identifier && o.is("[") && colon.is(":") && c.is("]") => {
                let a: i64 = a.text.parse().ok()?;
                let b: i64 = b.text.parse().ok()?;
                Some(a.abs_diff(b) + 1)
            }
            _ => None,
        }
    }

    /// Known width of a bitwise or additive combination of simple operands.
    /// Unsized literals adapt to context and do not count.
    fn expr_width(&self, range: (usize, usize)) -> Option<u64> {
        let items = sig_tokens(self.toks, range);
        let mut width = None;
        for operand in items.split(|t| matches!(t.text.as_str(), "&" | "|" | "^" | "~^" | "^~" | "+" | "-")) {
            let operand: Vec<&Token> = operand.iter().copied().skip_while(|t| t.is("~")).collect();
            match operand.as_slice() {
                [] => return None,
                [t] if t.kind == TokenKind::Literal && !t.text.contains('\'') => continue,
                _ => {}
            }
            let w = self.operand_width(&operand)?;
            width = Some(width.map_or(w, |x: u64| x.max(w)));
        }
        width
    }

    fn syntax(&self, out: &mut Vec<DefectReport>) {
        let mut lookalikes = Vec::new();
        for issue in &self.body.issues {
            let Some(w) = issue.leading_ident.as_deref() else { continue };
            let report = if RESERVED_LOOKALIKES.contains(&w) {
                DefectReport::new(issue.line, Category::ReservedWords, format!("`{w}` is not a Verilog keyword"))
            } else {
                let Some(k) = keyword_lookalike(w) else { continue };
                let cat = if STRUCTURE_KEYWORDS.contains(&k) {
                    Category::SyntaxStructure
                } else {
                    Category::ReservedWords
                };
                fixed(
                    DefectReport::new(issue.line, cat, format!("`{w}` looks like a misspelled `{k}`")),
                    self.line_fix(issue.tok, k),
                )
            };
            lookalikes.push(report);
        }
        // follow-on parse errors after a misspelled keyword are noise
        if lookalikes.is_empty() {
            if let Some(issue) = self.body.issues.first() {
                out.push(DefectReport::new(issue.line, Category::SyntaxStructure, issue.message.clone()));
            }
        }
        out.extend(lookalikes);
    }

    fn undeclared(&self, out: &mut Vec<DefectReport>) {
        for r in &self.body.refs {
            if self.sigs.contains_key(&r.name) || self.module_names.contains(r.name.as_str()) {
                continue;
            }
            out.push(DefectReport::new(
                r.line,
                Category::SignalUsage,
                format!("`{}` is used but never declared", r.name),
            ));
        }
    }

    fn widths(&self, out: &mut Vec<DefectReport>) {
        let assigns = self
            .body
            .proc_assigns
            .iter()
            .map(|a| (&a.lhs, a.rhs, a.line))
            .chain(self.body.cont_assigns.iter().map(|a| (&a.lhs, a.rhs, a.line)));
        for (lhs, rhs, line) in assigns {
            if lhs.targets.len() != 1 {
                continue;
            }
            let lhs_w = self.expr_width((lhs.first_tok, lhs.last_tok));
            let rhs_w = self.expr_width(rhs);
            let (Some(lw), Some(rw)) = (lhs_w, rhs_w) else { continue };
            if lw == rw {
                continue;
            }
            out.push(DefectReport::new(
                line,
                Category::BitWidthUsage,
                format!("{lw}-bit target assigned a {rw}-bit value"),
            ));
            let mut names: Vec<&str> = vec![lhs.targets[0].0.as_str()];
            names.extend(
                sig_tokens(self.toks, rhs)
                    .iter()
                    .filter(|t| t.kind == TokenKind::Identifier)
                    .map(|t| t.text.as_str()),
            );
            let involved: Vec<&SignalInfo> = names
                .iter()
                .filter_map(|n| self.sigs.get(*n))
                .filter(|s| s.class == DeclClass::Signal && s.width.bits().is_some())
                .collect();
            // internal signals are the likelier culprits; ports only when nothing else is involved
            let internal = involved.iter().any(|s| s.direction.is_none());
            for s in involved {
                if internal && s.direction.is_some() {
                    continue;
                }
                let name = &s.name;
                let other = if name == &lhs.targets[0].0 { rw } else { lw };
                for &d in &s.decl_lines {
                    let fix = self
                        .body
                        .decls
                        .iter()
                        .find(|x| &x.name == name && x.line == d)
                        .and_then(|x| x.range.as_ref())
                        .filter(|r| r.open_tok < self.toks.len() && r.close_tok < self.toks.len())
                        .and_then(|r| self.span_fix(r.open_tok, r.close_tok, &format!("[{}:0]", other - 1)));
                    out.push(fixed(
                        DefectReport::new(d, Category::BitWidthUsage, format!("declared width of `{name}` does not match its uses"))
                            .with_dep(line),
                        fix,
                    ));
                }
            }
        }
    }

    fn assignment_kinds(&self, out: &mut Vec<DefectReport>) {
        for a in &self.body.proc_assigns {
            let Some(block) = self.body.always_of(a.context) else { continue };
            let clocked = block.sensitivity.is_clocked();
            if clocked && a.blocking {
                out.push(fixed(
                    DefectReport::new(a.line, Category::CombinationalOrSequential, "blocking assignment in a clocked block"),
                    self.line_fix(a.op_tok, "<="),
                ));
            } else if !clocked && !a.blocking {
                out.push(fixed(
                    DefectReport::new(a.line, Category::CombinationalOrSequential, "non-blocking assignment in combinational logic"),
                    self.line_fix(a.op_tok, "="),
                ));
            }
        }
    }

    fn operators(&self, out: &mut Vec<DefectReport>) {
        for e in &self.body.equality_statements {
            out.push(fixed(
                DefectReport::new(e.line, Category::Operators, "`==` used as an assignment"),
                self.line_fix(e.op_tok, "="),
            ));
        }
        for c in &self.body.conditions {
            if c.kind == ConditionKind::Case {
                continue;
            }
            for t in sig_tokens(self.toks, (c.open_tok + 1, c.close_tok.saturating_sub(1))) {
                if t.is("=") {
                    out.push(fixed(
                        DefectReport::new(t.line, Category::Operators, "assignment inside a condition"),
                        self.line_fix(self.tok_index(t), "=="),
                    ));
                }
            }
        }
        let ranges = self
            .body
            .proc_assigns
            .iter()
            .map(|a| a.rhs)
            .chain(self.body.cont_assigns.iter().map(|a| a.rhs))
            .chain(self.body.conditions.iter().map(|c| (c.open_tok + 1, c.close_tok.saturating_sub(1))));
        for range in ranges {
            let items = sig_tokens(self.toks, range);
            for (k, t) in items.iter().enumerate() {
                if t.is("=") && !self.body.conditions.iter().any(|c| t.offset > self.toks[c.open_tok].offset && t.offset < self.toks[c.close_tok].offset) {
                    out.push(DefectReport::new(t.line, Category::Operators, "stray `=` in an expression"));
                }
                let logical = t.is("&&") || t.is("||");
                let unary = t.is("!");
                if !(logical || unary) {
                    continue;
                }
                let vector = |j: Option<usize>| -> bool {
                    let Some(j) = j else { return false };
                    let Some(op) = items.get(j) else { return false };
                    if op.kind != TokenKind::Identifier || items.get(j + 1).is_some_and(|n| n.is("[")) {
                        return false;
                    }
                    if j > 0 && items[j - 1].is("]") {
                        return false;
                    }
                    self.width_of_name(&op.text).is_some_and(|w| w > 1)
                };
                let after = vector(Some(k + 1));
                let before = logical && vector(k.checked_sub(1));
                if before || after {
                    let op = &t.text;
                    out.push(DefectReport::new(
                        t.line,
                        Category::Operators,
                        format!("logical `{op}` applied to a multi-bit operand"),
                    ));
                }
            }
        }
    }

    fn drivers(&self, out: &mut Vec<DefectReport>) {
        // signal -> [(unit, first line in that unit, partial)]
        let mut units: BTreeMap<&str, Vec<(usize, usize, bool)>> = BTreeMap::new();
        let n_blocks = self.body.always_blocks.len();
        for a in &self.body.proc_assigns {
            let ProcContext::Always(b) = a.context else { continue };
            for (name, _) in &a.lhs.targets {
                let v = units.entry(name).or_default();
                if !v.iter().any(|(u, _, _)| *u == b) {
                    v.push((b, a.line, a.lhs.select.is_some()));
                }
            }
        }
        for (k, a) in self.body.cont_assigns.iter().enumerate() {
            for (name, _) in &a.lhs.targets {
                units.entry(name).or_default().push((n_blocks + k, a.line, a.lhs.select.is_some()));
            }
        }
        for (name, mut v) in units {
            if v.len() < 2 || v.iter().all(|(_, _, partial)| *partial) {
                continue;
            }
            v.sort_by_key(|(_, line, _)| *line);
            for &(_, line, _) in &v[1..] {
                out.push(
                    DefectReport::new(line, Category::RaceOrHazard, format!("`{name}` has more than one driver"))
                        .with_dep(v[0].1),
                );
            }
        }
    }

    fn sensitivity(&self, out: &mut Vec<DefectReport>) {
        for b in &self.body.always_blocks {
            let Sensitivity::List { items, separators, .. } = &b.sensitivity else { continue };
            for &s in separators {
                let t = &self.toks[s];
                if t.is("|") || t.is("||") {
                    out.push(fixed(
                        DefectReport::new(t.line, Category::SensitivityList, format!("`{}` used to separate events", t.text)),
                        self.line_fix(s, "or"),
                    ));
                }
            }
            for item in items {
                let (Some(edge), Some(name)) = (item.edge, item.signal.as_deref()) else { continue };
                let line = item.edge_tok.map_or(b.line, |t| self.toks[t].line);
                let wrong = match edge {
                    Edge::Negedge => is_clock_name(name) || (is_reset_name(name) && !is_active_low(name)),
                    Edge::Posedge => !is_clock_name(name) && is_active_low(name),
                };
                if wrong {
                    let (e, other) = if edge == Edge::Negedge { ("negedge", "posedge") } else { ("posedge", "negedge") };
                    out.push(fixed(
                        DefectReport::new(line, Category::SensitivityList, format!("`{name}` triggered on {e}, opposite to its polarity")),
                        item.edge_tok.and_then(|t| self.line_fix(t, other)),
                    ));
                }
            }
        }
    }

    fn instances(&self, out: &mut Vec<DefectReport>) {
        let mut names: BTreeMap<&str, usize> = BTreeMap::new();
        for inst in &self.body.instances {
            for c in &inst.connections {
                if c.expr.is_none() {
                    let port = c.port.as_deref().unwrap_or("?");
                    let line = c.dot_tok.map_or(inst.line, |t| self.toks[t].line);
                    out.push(DefectReport::new(
                        line,
                        Category::ModuleInstances,
                        format!("port `{port}` of `{}` is left unconnected", inst.module_name),
                    ));
                }
            }
            if let Some(n) = &inst.name {
                if let Some(&first) = names.get(n.as_str()) {
                    out.push(DefectReport::new(inst.line, Category::ModuleInstances, format!("instance name `{n}` reused")).with_dep(first));
                } else {
                    names.insert(n, inst.line);
                }
            }
        }
    }

    fn ports_and_nets(&self, out: &mut Vec<DefectReport>) {
        let mut proc_written: BTreeSet<&str> = BTreeSet::new();
        for a in &self.body.proc_assigns {
            proc_written.extend(a.lhs.targets.iter().map(|(n, _)| n.as_str()));
        }
        let mut cont_written: BTreeSet<&str> = BTreeSet::new();
        for a in &self.body.cont_assigns {
            cont_written.extend(a.lhs.targets.iter().map(|(n, _)| n.as_str()));
        }
        let connected: BTreeSet<&str> = self
            .body
            .refs
            .iter()
            .filter(|r| r.role == RefRole::Connect)
            .map(|r| r.name.as_str())
            .collect();
        for (name, s) in &self.sigs {
            if s.class != DeclClass::Signal {
                continue;
            }
            let line = s.decl_lines[0];
            let driven = proc_written.contains(name.as_str()) || cont_written.contains(name.as_str());
            match s.direction {
                Some(Direction::Input) => {
                    if driven {
                        out.push(DefectReport::new(line, Category::PortType, format!("input `{name}` is driven inside the module")));
                    } else if s.net == Some(NetKind::Reg) {
                        out.push(DefectReport::new(line, Category::PortType, format!("input `{name}` declared as reg")));
                    }
                }
                Some(Direction::Output) if !driven && !connected.contains(name.as_str()) => {
                    out.push(DefectReport::new(line, Category::PortType, format!("output `{name}` is never driven")));
                }
                _ => {}
            }
            if s.direction == Some(Direction::Input) {
                continue;
            }
            let net_tok = self
                .body
                .decls
                .iter()
                .find(|d| d.name == *name && d.line == line)
                .and_then(|d| d.net_tok);
            let is_reg = matches!(s.net, Some(NetKind::Reg) | Some(NetKind::Integer));
            if proc_written.contains(name.as_str()) && !is_reg && s.net != Some(NetKind::Other) {
                out.push(fixed(
                    DefectReport::new(line, Category::SignalUsage, format!("`{name}` is a net but assigned in a procedural block")),
                    net_tok.and_then(|t| self.line_fix(t, "reg")),
                ));
            }
            if cont_written.contains(name.as_str()) && is_reg {
                out.push(fixed(
                    DefectReport::new(line, Category::SignalUsage, format!("reg `{name}` driven by a continuous assignment")),
                    net_tok.and_then(|t| self.line_fix(t, "wire")),
                ));
            }
        }
    }

    fn synthesis(&self, out: &mut Vec<DefectReport>) {
        for i in &self.body.initial_blocks {
            out.push(DefectReport::new(i.line, Category::LogicSynthesis, "initial block is not synthesizable"));
        }
        for a in &self.body.proc_assigns {
            if !matches!(a.context, ProcContext::Always(_)) {
                continue;
            }
            if let Some(t) = sig_tokens(self.toks, a.rhs).iter().find(|t| t.kind == TokenKind::Literal && has_xz(&t.text)) {
                out.push(DefectReport::new(
                    a.line,
                    Category::LogicSynthesis,
                    format!("`{}` in synthesizable logic", t.text),
                ));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::load_corpus;
    use crate::mutation::{apply_mutation, enumerate_all};
    use proptest::prelude::*;
    use std::path::Path;

    const WIDTH_CHAIN: &str = include_str!("../../data/fixtures/width_chain.v");

    fn lines(text: &str) -> Vec<usize> {
        let mut l: Vec<usize> = baseline_detect(&SourceUnit::new("t", "t.v", text)).iter().map(|r| r.line).collect();
        l.dedup();
        l
    }

    fn corpus() -> Vec<SourceUnit> {
        load_corpus(Path::new(env!("CARGO_MANIFEST_DIR")).join("data/corpus")).unwrap()
    }

    #[test]
    fn width_chain_reports() {
        assert_eq!(lines(WIDTH_CHAIN), [6, 9, 10]);
        let r = baseline_detect(&SourceUnit::new("t", "t.v", WIDTH_CHAIN));
        assert!(r.iter().all(|r| r.category == "Bit width Usage"));
    }

    #[test]
    fn clean_corpus_has_no_findings() {
        for src in corpus() {
            let r = baseline_detect(&src);
            assert!(r.is_empty(), "{}: {:?}", src.id(), r);
        }
    }

    #[test]
    fn individual_checks() {
        let hdr = "module m(input clk, input rst_n, input [3:0] a, output reg [3:0] q);\n";
        let case = |body: &str| lines(&format!("{hdr}{body}endmodule\n"));
        assert_eq!(case("always @(negedge clk) q <= a;\n"), [2]);
        assert_eq!(case("always @(posedge clk or posedge rst_n) q <= a;\n"), [2]);
        assert_eq!(case("always @(posedge clk | negedge rst_n) q <= a;\n"), [2]);
        assert_eq!(case("always @(posedge clk) q = a;\n"), [2]);
        assert_eq!(case("always @(*) q <= a;\n"), [2]);
        assert_eq!(case("always @(posedge clk) q <= a_r;\n"), [2]);
        assert_eq!(case("always @(posedge clk) if (a = 4'd1) q <= a;\n"), [2]);
        assert_eq!(case("always @(posedge clk) q <= 4'bxxxx;\n"), [2]);
        assert_eq!(case("always @(posedge clk) q <= a;\ninitial q = 4'd0;\n"), [3]);
        assert_eq!(case("always @(posedge clk) q <= a;\nalways @(posedge clk) q <= 4'd0;\n"), [3]);
        assert_eq!(case("always @(posedge clk) if (!a) q <= a;\n"), [2]);
        assert_eq!(case("always @(posedge clk) q <= a;\n"), Vec::<usize>::new());
    }

    #[test]
    fn fixes_are_whole_lines() {
        let text = "module m(input clk, input [3:0] a, output reg [3:0] q);\n  always @(posedge clk) q = a;\nendmodule\n";
        let r = baseline_detect(&SourceUnit::new("t", "t.v", text));
        assert_eq!(r[0].suggested_fix.as_deref(), Some("  always @(posedge clk) q <= a;"));
        let text = "module m(input a, output y);\nwire w;\nassign y = w;\nalways @(*) w = a;\nendmodule\n";
        let r = baseline_detect(&SourceUnit::new("t", "t.v", text));
        assert_eq!(r[0].suggested_fix.as_deref(), Some("reg w;"));
    }

    #[test]
    fn port_and_net_checks() {
        assert_eq!(lines("module m(input a, output y);\nassign a = 1'b0;\nendmodule\n"), [1]);
        assert_eq!(lines("module m(input a, output y);\nwire w;\nassign y = a;\nalways @(*) w = a;\nendmodule\n"), [2]);
        assert_eq!(lines("module m(input a, output y);\nreg r;\nassign r = a;\nassign y = r;\nendmodule\n"), [2]);
    }

    #[test]
    fn keyword_typos() {
        let hdr = "module m(input clk, input a, output reg q);\n";
        let l = lines(&format!("{hdr}always @(posedge clk) begin\nif (a) q <= 1'b0;\nelif (q) q <= 1'b1;\nend\nendmodule\n"));
        assert!(l.contains(&4), "{l:?}");
        let r = baseline_detect(&SourceUnit::new("t", "t.v", format!("{hdr}asign q = a;\nendmodule\n")));
        let typo = r.iter().find(|r| r.line == 2).unwrap();
        assert_eq!(typo.category, "Reserved words");
        assert_eq!(typo.suggested_fix.as_deref(), Some("assign q = a;"));
    }

    #[test]
    fn floating_instance_port() {
        let text = "module sub(input a, output y);\nassign y = a;\nendmodule\nmodule top(input x, output z);\nsub u0 (.a(x), .y(z));\nsub u0_1 (.a(), .y(z));\nendmodule\n";
        assert!(lines(text).contains(&6));
    }

    #[test]
    fn lookalike_distance() {
        assert_eq!(keyword_lookalike("begn"), Some("begin"));
        assert_eq!(keyword_lookalike("endcas"), Some("endcase"));
        assert_eq!(keyword_lookalike("data"), None);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn never_panics_on_mutants(pick in 0usize..10_000) {
            let sources = corpus();
            let src = &sources[pick % sources.len()];
            let sites = enumerate_all(src);
            if !sites.is_empty() {
                let site = &sites[(pick / sources.len()) % sites.len()];
                let (mutant, _) = apply_mutation(src, site).unwrap();
                let _ = baseline_detect(&mutant);
            }
        }
    }
}
