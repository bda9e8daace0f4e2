//! Module-level structure recovered from a token stream.
//!
//! [`extract_modules`] finds every `module ... endmodule` pair and runs a
//! tolerant recursive-descent pass over each body. The pass never fails on
//! lexable input: anything it cannot make sense of becomes a
//! [`SyntaxIssue`] and parsing resumes at the next `;`. Mutated (defective)
//! designs therefore still yield a usable [`ModuleBody`].
//!
//! All `*_tok` fields are indices into the full token vector handed to
//! [`extract_modules`], whitespace included.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexer::{Token, TokenKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("unbalanced module/endmodule near line {line}")]
    UnbalancedModule { line: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Input,
    Output,
    Inout,
}

impl Direction {
    fn from_keyword(text: &str) -> Option<Self> {
        match text {
            "input" => Some(Direction::Input),
            "output" => Some(Direction::Output),
            "inout" => Some(Direction::Inout),
            _ => None,
        }
    }
}

/// Declared packed width. Only `[<int>:<int>]` ranges are interpreted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Width {
    Scalar,
    Range { msb: i64, lsb: i64 },
    Opaque(String),
}

impl Width {
    pub fn bits(&self) -> Option<u64> {
        match self {
            Width::Scalar => Some(1),
            Width::Range { msb, lsb } => Some(msb.abs_diff(*lsb) + 1),
            Width::Opaque(_) => None,
        }
    }
}

impl std::fmt::Display for Width {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Width::Scalar => write!(f, "scalar"),
            Width::Range { msb, lsb } => write!(f, "[{msb}:{lsb}]"),
            Width::Opaque(text) => write!(f, "[{text}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Port {
    pub name: String,
    pub direction: Option<Direction>,
    pub width: Width,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModuleBlock {
    pub name: String,
    pub start_line: usize,
    pub end_line: usize,
    pub ports: Vec<Port>,
    /// `module` token index.
    #[serde(skip)]
    pub first_tok: usize,
    /// `endmodule` token index.
    #[serde(skip)]
    pub last_tok: usize,
    #[serde(skip)]
    pub body: ModuleBody,
}

impl ModuleBlock {
    pub fn port(&self, name: &str) -> Option<&Port> {
        self.ports.iter().find(|p| p.name == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NetKind {
    Reg,
    Wire,
    Integer,
    Other,
}

impl NetKind {
    fn from_keyword(text: &str) -> Option<Self> {
        match text {
            "reg" => Some(NetKind::Reg),
            "wire" => Some(NetKind::Wire),
            "integer" => Some(NetKind::Integer),
            "tri" | "tri0" | "tri1" | "wand" | "wor" | "triand" | "trior" | "trireg"
            | "supply0" | "supply1" | "real" | "realtime" | "time" | "event" => Some(NetKind::Other),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeclClass {
    Signal,
    Parameter,
    Genvar,
    Subprogram,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RangeSpec {
    pub open_tok: usize,
    pub close_tok: usize,
    pub width: Width,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decl {
    pub name: String,
    pub name_tok: usize,
    pub line: usize,
    pub class: DeclClass,
    pub direction: Option<Direction>,
    pub direction_tok: Option<usize>,
    pub net: Option<NetKind>,
    pub net_tok: Option<usize>,
    pub range: Option<RangeSpec>,
    /// Has unpacked dimensions (`reg [7:0] mem [0:3]`).
    pub array: bool,
    pub in_header: bool,
    /// Index of the `;` (or header `)`) ending the declaration.
    pub stmt_end_tok: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edge {
    Posedge,
    Negedge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensItem {
    pub edge: Option<Edge>,
    pub edge_tok: Option<usize>,
    pub signal: Option<String>,
    pub signal_tok: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Sensitivity {
    None,
    Star { at_tok: usize },
    List {
        at_tok: usize,
        open_tok: usize,
        close_tok: usize,
        items: Vec<SensItem>,
        /// `or`, `,`, `|`, `||` tokens between items.
        separators: Vec<usize>,
    },
}

impl Sensitivity {
    pub fn is_clocked(&self) -> bool {
        match self {
            Sensitivity::List { items, .. } => items.iter().any(|i| i.edge.is_some()),
            _ => false,
        }
    }

    pub fn contains_token(&self, tok: usize) -> bool {
        match self {
            Sensitivity::List { open_tok, close_tok, .. } => tok > *open_tok && tok < *close_tok,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlwaysBlock {
    pub kw_tok: usize,
    pub line: usize,
    pub end_line: usize,
    pub end_tok: usize,
    pub sensitivity: Sensitivity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProcContext {
    Always(usize),
    Initial(usize),
    Subprogram,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LValue {
    /// Base identifier, when the target is a single (possibly selected) name.
    pub name: Option<String>,
    pub name_tok: Option<usize>,
    /// Every written identifier (more than one for concatenations).
    pub targets: Vec<(String, usize)>,
    /// Select on the base name, as `[` and `]` token indices.
    pub select: Option<(usize, usize)>,
    pub first_tok: usize,
    pub last_tok: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProcAssign {
    pub context: ProcContext,
    pub lhs: LValue,
    pub op_tok: usize,
    pub blocking: bool,
    /// Inclusive token range of the right-hand side.
    pub rhs: (usize, usize),
    pub semi_tok: Option<usize>,
    pub line: usize,
    /// Directly inside a `begin ... end` block.
    pub in_seq_block: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContAssign {
    /// `None` for net declaration assignments (`wire w = a;`).
    pub kw_tok: Option<usize>,
    pub lhs: LValue,
    pub op_tok: usize,
    pub rhs: (usize, usize),
    pub end_tok: usize,
    pub line: usize,
    pub end_line: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionKind {
    If,
    While,
    Case,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub kind: ConditionKind,
    pub open_tok: usize,
    pub close_tok: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Connection {
    pub port: Option<String>,
    pub dot_tok: Option<usize>,
    /// Inclusive token range of the connected expression; `None` when empty.
    pub expr: Option<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub module_name: String,
    pub module_tok: usize,
    pub name: Option<String>,
    pub name_tok: Option<usize>,
    /// Inclusive token range of a `#(...)` / `#n` parameter override.
    pub params: Option<(usize, usize)>,
    pub open_tok: usize,
    pub close_tok: usize,
    pub end_tok: usize,
    pub connections: Vec<Connection>,
    pub primitive: bool,
    pub line: usize,
    pub end_line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialBlock {
    pub kw_tok: usize,
    pub line: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefRole {
    Read,
    Write,
    Connect,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentRef {
    pub tok: usize,
    pub name: String,
    pub line: usize,
    pub role: RefRole,
    /// Inside a sensitivity list.
    pub in_sensitivity: bool,
}

/// An assignment-shaped statement whose operator is `==`.
#[derive(Debug, Clone, PartialEq)]
pub struct EqualityStatement {
    pub op_tok: usize,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntaxIssue {
    pub line: usize,
    pub tok: usize,
    pub message: String,
    /// First token of the statement that failed to parse, when it was an
    /// identifier.
    pub leading_ident: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ModuleBody {
    pub decls: Vec<Decl>,
    pub always_blocks: Vec<AlwaysBlock>,
    pub initial_blocks: Vec<InitialBlock>,
    pub proc_assigns: Vec<ProcAssign>,
    pub cont_assigns: Vec<ContAssign>,
    pub conditions: Vec<Condition>,
    pub instances: Vec<Instance>,
    pub refs: Vec<IdentRef>,
    pub equality_statements: Vec<EqualityStatement>,
    pub for_headers: Vec<(usize, usize)>,
    pub issues: Vec<SyntaxIssue>,
    /// Deepest `begin`/`case`/`if` nesting seen.
    pub max_depth: usize,
    /// Significant tokens in the module span.
    pub token_count: usize,
}

/// Merged view of every declaration of one name.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalInfo {
    pub name: String,
    pub class: DeclClass,
    pub direction: Option<Direction>,
    pub net: Option<NetKind>,
    pub width: Width,
    pub array: bool,
    pub decl_lines: Vec<usize>,
}

impl ModuleBody {
    pub fn signals(&self) -> BTreeMap<String, SignalInfo> {
        let mut out: BTreeMap<String, SignalInfo> = BTreeMap::new();
        for d in &self.decls {
            let entry = out.entry(d.name.clone()).or_insert_with(|| SignalInfo {
                name: d.name.clone(),
                class: d.class,
                direction: None,
                net: None,
                width: Width::Scalar,
                array: false,
                decl_lines: Vec::new(),
            });
            if d.direction.is_some() {
                entry.direction = d.direction;
            }
            match (entry.net, d.net) {
                (None, Some(n)) | (Some(NetKind::Wire), Some(n)) => entry.net = Some(n),
                _ => {}
            }
            if let Some(r) = &d.range {
                if entry.width == Width::Scalar {
                    entry.width = r.width.clone();
                }
            }
            entry.array |= d.array;
            if !entry.decl_lines.contains(&d.line) {
                entry.decl_lines.push(d.line);
            }
        }
        out
    }

    pub fn always_of(&self, ctx: ProcContext) -> Option<&AlwaysBlock> {
        match ctx {
            ProcContext::Always(i) => self.always_blocks.get(i),
            _ => None,
        }
    }
}

const GATE_PRIMITIVES: &[&str] = &[
    "and", "nand", "or", "nor", "xor", "xnor", "not", "buf", "bufif0", "bufif1", "notif0",
    "notif1", "pullup", "pulldown",
];

pub fn extract_modules(tokens: &[Token]) -> Result<Vec<ModuleBlock>, StructureError> {
    let sig: Vec<usize> = (0..tokens.len()).filter(|&i| !tokens[i].is_trivia()).collect();
    let mut spans = Vec::new();
    let mut open: Option<usize> = None;
    for (k, &i) in sig.iter().enumerate() {
        let t = &tokens[i];
        if t.is_keyword("module") || t.is_keyword("macromodule") {
            if open.is_some() {
                return Err(StructureError::UnbalancedModule { line: t.line });
            }
            open = Some(k);
        } else if t.is_keyword("endmodule") {
            match open.take() {
                Some(start) => spans.push((start, k)),
                None => return Err(StructureError::UnbalancedModule { line: t.line }),
            }
        }
    }
    if let Some(start) = open {
        return Err(StructureError::UnbalancedModule {
            line: tokens[sig[start]].line,
        });
    }
    Ok(spans
        .into_iter()
        .map(|(start, end)| Parser::new(tokens, &sig, start, end).parse_module())
        .collect())
}

struct Parser<'t> {
    toks: &'t [Token],
    sig: &'t [usize],
    pos: usize,
    /// `endmodule` position in `sig`.
    end: usize,
    body: ModuleBody,
    depth: usize,
    in_sensitivity: bool,
}

impl<'t> Parser<'t> {
    fn new(toks: &'t [Token], sig: &'t [usize], start: usize, end: usize) -> Self {
        Self {
            toks,
            sig,
            pos: start,
            end,
            body: ModuleBody {
                token_count: end - start + 1,
                ..ModuleBody::default()
            },
            depth: 0,
            in_sensitivity: false,
        }
    }

    // ---- cursor helpers ----

    fn done(&self) -> bool {
        self.pos >= self.end
    }

    fn peek_at(&self, k: usize) -> Option<&'t Token> {
        let p = self.pos + k;
        if p < self.end {
            Some(&self.toks[self.sig[p]])
        } else {
            None
        }
    }

    fn peek(&self) -> Option<&'t Token> {
        self.peek_at(0)
    }

    fn at(&self, text: &str) -> bool {
        self.peek().is_some_and(|t| t.text == text)
    }

    fn at_kind(&self, kind: TokenKind) -> bool {
        self.peek().is_some_and(|t| t.kind == kind)
    }

    /// Full index of the current token (or of `endmodule` when done).
    fn idx(&self) -> usize {
        self.sig[self.pos.min(self.end)]
    }

    fn bump(&mut self) -> usize {
        let i = self.idx();
        if self.pos < self.end {
            self.pos += 1;
        }
        i
    }

    fn eat(&mut self, text: &str) -> Option<usize> {
        if self.at(text) {
            Some(self.bump())
        } else {
            None
        }
    }

    fn prev_idx(&self) -> usize {
        self.sig[self.pos.saturating_sub(1)]
    }

    fn issue(&mut self, message: impl Into<String>) {
        let tok = self.idx();
        self.body.issues.push(SyntaxIssue {
            line: self.toks[tok].line,
            tok,
            message: message.into(),
            leading_ident: None,
        });
    }

    fn skip_past(&mut self, text: &str) {
        while !self.done() {
            if self.bump_is(text) {
                return;
            }
        }
    }

    fn bump_is(&mut self, text: &str) -> bool {
        let i = self.bump();
        self.toks[i].text == text
    }

    /// At an opening bracket; consumes through its match and returns the
    /// full index of the closing token.
    fn skip_balanced(&mut self) -> usize {
        let mut depth = 0usize;
        loop {
            if self.done() {
                return self.prev_idx();
            }
            let i = self.bump();
            match self.toks[i].text.as_str() {
                "(" | "[" | "{" => depth += 1,
                ")" | "]" | "}" => {
                    depth = depth.saturating_sub(1);
                    if depth == 0 {
                        return i;
                    }
                }
                _ => {}
            }
            if depth == 0 {
                return i;
            }
        }
    }

    fn enter(&mut self) {
        self.depth += 1;
        self.body.max_depth = self.body.max_depth.max(self.depth);
    }

    fn leave(&mut self) {
        self.depth = self.depth.saturating_sub(1);
    }

    // ---- module ----

    fn parse_module(mut self) -> ModuleBlock {
        let module_tok = self.bump();
        let start_line = self.toks[module_tok].line;
        let name = if self.at_kind(TokenKind::Identifier) {
            let i = self.bump();
            self.toks[i].text.clone()
        } else {
            self.issue("missing module name");
            String::new()
        };
        if self.at("#") {
            self.bump();
            if self.at("(") {
                self.parse_parameter_ports();
            }
        }
        let mut header_order: Vec<String> = Vec::new();
        if self.at("(") {
            header_order = self.parse_port_list();
        }
        if self.eat(";").is_none() {
            self.issue("expected `;` after module header");
        }
        while !self.done() {
            let before = self.pos;
            self.parse_item();
            if self.pos == before {
                self.issue(format!("unexpected `{}`", self.peek().map_or("", |t| &t.text)));
                self.bump();
            }
        }
        let last_tok = self.idx();
        let end_line = self.toks[last_tok].line;

        let signals = self.body.signals();
        let mut ports = Vec::new();
        for pname in &header_order {
            let (direction, width, line) = match signals.get(pname) {
                Some(s) => (
                    s.direction,
                    s.width.clone(),
                    self.body
                        .decls
                        .iter()
                        .find(|d| &d.name == pname && d.direction.is_some())
                        .map_or(s.decl_lines[0], |d| d.line),
                ),
                None => (None, Width::Scalar, start_line),
            };
            ports.push(Port {
                name: pname.clone(),
                direction,
                width,
                line,
            });
        }
        self.body.max_depth = self.body.max_depth.max(1);
        ModuleBlock {
            name,
            start_line,
            end_line,
            ports,
            first_tok: module_tok,
            last_tok,
            body: self.body,
        }
    }

    fn parse_parameter_ports(&mut self) {
        let open = self.bump();
        let _ = open;
        let mut depth = 1usize;
        while !self.done() && depth > 0 {
            let t = self.peek().unwrap();
            match t.text.as_str() {
                "(" | "[" | "{" => depth += 1,
                ")" | "]" | "}" => depth -= 1,
                _ => {}
            }
            if depth == 1 && t.kind == TokenKind::Identifier && self.peek_at(1).is_some_and(|n| n.text == "=") {
                let i = self.idx();
                self.push_decl_simple(i, DeclClass::Parameter, true);
                self.bump();
                continue;
            }
            if depth == 0 {
                self.bump();
                break;
            }
            let i = self.bump();
            if depth >= 1 && self.toks[i].kind == TokenKind::Identifier {
                self.read_ref(i);
            }
        }
    }

    fn push_decl_simple(&mut self, tok: usize, class: DeclClass, in_header: bool) {
        self.body.decls.push(Decl {
            name: self.toks[tok].text.clone(),
            name_tok: tok,
            line: self.toks[tok].line,
            class,
            direction: None,
            direction_tok: None,
            net: None,
            net_tok: None,
            range: None,
            array: false,
            in_header,
            stmt_end_tok: tok,
        });
    }

    /// Header port list; returns port names in header order.
    fn parse_port_list(&mut self) -> Vec<String> {
        self.bump(); // (
        let ansi = self
            .peek()
            .is_some_and(|t| Direction::from_keyword(&t.text).is_some());
        let mut names = Vec::new();
        if !ansi {
            while !self.done() && !self.at(")") {
                let i = self.bump();
                let t = &self.toks[i];
                if t.kind == TokenKind::Identifier && !names.contains(&t.text) {
                    names.push(t.text.clone());
                }
            }
            self.eat(")");
            return names;
        }
        let mut direction: Option<(Direction, usize)> = None;
        let mut net: Option<(NetKind, usize)> = None;
        let mut range: Option<RangeSpec> = None;
        let first_decl = self.body.decls.len();
        while !self.done() && !self.at(")") {
            let t = self.peek().unwrap();
            if let Some(d) = Direction::from_keyword(&t.text) {
                let i = self.bump();
                direction = Some((d, i));
                net = None;
                range = None;
            } else if let Some(n) = NetKind::from_keyword(&t.text) {
                let i = self.bump();
                net = Some((n, i));
            } else if t.is_keyword("signed") || t.is_keyword("unsigned") {
                self.bump();
            } else if t.text == "[" {
                range = Some(self.parse_range());
            } else if t.kind == TokenKind::Identifier {
                let i = self.bump();
                let name = t.text.clone();
                if !names.contains(&name) {
                    names.push(name.clone());
                }
                self.body.decls.push(Decl {
                    name,
                    name_tok: i,
                    line: t.line,
                    class: DeclClass::Signal,
                    direction: direction.map(|d| d.0),
                    direction_tok: direction.map(|d| d.1),
                    net: net.map(|n| n.0),
                    net_tok: net.map(|n| n.1),
                    range: range.clone(),
                    array: false,
                    in_header: true,
                    stmt_end_tok: i,
                });
                // direction/net/range carry over to following names, but the
                // keyword tokens belong to the first declaration only
                direction = direction.map(|d| (d.0, usize::MAX));
                net = net.map(|n| (n.0, usize::MAX));
                if let Some(r) = range.as_mut() {
                    r.open_tok = usize::MAX;
                }
            } else {
                self.bump();
            }
        }
        let close = self.eat(")").unwrap_or_else(|| self.prev_idx());
        for d in &mut self.body.decls[first_decl..] {
            d.stmt_end_tok = close;
            if d.direction_tok == Some(usize::MAX) {
                d.direction_tok = None;
            }
            if d.net_tok == Some(usize::MAX) {
                d.net_tok = None;
            }
            if d.range.as_ref().is_some_and(|r| r.open_tok == usize::MAX) {
                // shared range: not a distinct mutation site
                if let Some(r) = d.range.as_mut() {
                    r.close_tok = usize::MAX;
                }
            }
        }
        names
    }

    fn parse_range(&mut self) -> RangeSpec {
        let start = self.pos;
        let open_tok = self.idx();
        let close_tok = self.skip_balanced();
        let inner_idx: Vec<usize> = self.sig[start + 1..self.pos.saturating_sub(1).max(start + 1)].to_vec();
        for &i in &inner_idx {
            if self.toks[i].kind == TokenKind::Identifier {
                self.read_ref(i);
            }
        }
        let toks = self.toks;
        let inner: Vec<&Token> = inner_idx.iter().map(|&i| &toks[i]).collect();
        let width = match inner.as_slice() {
            [a, c, b] if c.text == ":" && is_decimal(&a.text) && is_decimal(&b.text) => Width::Range {
                msb: parse_decimal(&a.text),
                lsb: parse_decimal(&b.text),
            },
            _ => Width::Opaque(inner.iter().map(|t| t.text.as_str()).collect::<Vec<_>>().join("")),
        };
        RangeSpec {
            open_tok,
            close_tok,
            width,
        }
    }

    // ---- module items ----

    fn parse_item(&mut self) {
        let Some(t) = self.peek() else { return };
        let text = t.text.as_str();
        if t.kind == TokenKind::Keyword {
            if Direction::from_keyword(text).is_some() || NetKind::from_keyword(text).is_some() {
                self.parse_decl();
                return;
            }
            match text {
                "parameter" | "localparam" | "specparam" => self.parse_parameter_decl(),
                "genvar" => {
                    self.bump();
                    while !self.done() && !self.at(";") {
                        let i = self.bump();
                        if self.toks[i].kind == TokenKind::Identifier {
                            self.push_decl_simple(i, DeclClass::Genvar, false);
                        }
                    }
                    self.eat(";");
                }
                "assign" => self.parse_cont_assign(),
                "always" => self.parse_always(),
                "initial" => {
                    let kw = self.bump();
                    self.body.initial_blocks.push(InitialBlock {
                        kw_tok: kw,
                        line: self.toks[kw].line,
                    });
                    let idx = self.body.initial_blocks.len() - 1;
                    self.parse_stmt(ProcContext::Initial(idx), false);
                }
                "function" | "task" => self.parse_subprogram(text == "function"),
                "generate" | "endgenerate" | "begin" | "end" | "else" => {
                    self.bump();
                    if text == "begin" && self.eat(":").is_some() {
                        self.bump();
                    }
                }
                "for" | "if" => {
                    self.bump();
                    if self.at("(") {
                        self.skip_balanced();
                    }
                }
                "defparam" => self.skip_past(";"),
                "specify" => self.skip_past("endspecify"),
                _ if GATE_PRIMITIVES.contains(&text) => self.parse_instance(true),
                _ => {
                    self.issue(format!("unexpected `{text}` in module body"));
                    self.skip_past(";");
                }
            }
            return;
        }
        match t.kind {
            TokenKind::Identifier => self.parse_instance(false),
            TokenKind::Punctuation if text == ";" => {
                self.bump();
            }
            TokenKind::Punctuation if text == "`" => {
                // compiler directive: rest of the line
                let line = t.line;
                while self.peek().is_some_and(|n| n.line == line) {
                    self.bump();
                }
            }
            _ => {
                self.issue(format!("unexpected `{text}` in module body"));
                self.skip_past(";");
            }
        }
    }

    fn parse_decl(&mut self) {
        let mut direction = None;
        let mut net = None;
        let mut range = None;
        while let Some(t) = self.peek() {
            if let Some(d) = Direction::from_keyword(&t.text) {
                direction = Some((d, self.bump()));
            } else if let Some(n) = NetKind::from_keyword(&t.text) {
                net = Some((n, self.bump()));
            } else if t.is_keyword("signed")
                || t.is_keyword("unsigned")
                || t.is_keyword("vectored")
                || t.is_keyword("scalared")
            {
                self.bump();
            } else if t.text == "#" {
                self.bump();
                if self.at("(") {
                    self.skip_balanced();
                } else {
                    self.bump();
                }
            } else if t.text == "[" {
                range = Some(self.parse_range());
            } else {
                break;
            }
        }
        let first_decl = self.body.decls.len();
        let mut first_name = true;
        while !self.done() && !self.at(";") {
            if !self.at_kind(TokenKind::Identifier) {
                self.issue(format!(
                    "unexpected `{}` in declaration",
                    self.peek().map_or("", |t| &t.text)
                ));
                self.skip_past(";");
                break;
            }
            let name_tok = self.bump();
            let mut array = false;
            while self.at("[") {
                array = true;
                self.parse_range();
            }
            let lhs_name = self.toks[name_tok].text.clone();
            self.body.decls.push(Decl {
                name: lhs_name.clone(),
                name_tok,
                line: self.toks[name_tok].line,
                class: DeclClass::Signal,
                direction: direction.map(|d| d.0),
                direction_tok: if first_name { direction.map(|d| d.1) } else { None },
                net: net.map(|n| n.0),
                net_tok: if first_name { net.map(|n| n.1) } else { None },
                range: if first_name {
                    range.clone()
                } else {
                    range.clone().map(|r| RangeSpec {
                        open_tok: usize::MAX,
                        close_tok: usize::MAX,
                        ..r
                    })
                },
                array,
                in_header: false,
                stmt_end_tok: name_tok,
            });
            first_name = false;
            if let Some(op) = self.eat("=") {
                let rhs = self.parse_expr(&[",", ";"]);
                if net.is_some_and(|n| n.0 != NetKind::Reg && n.0 != NetKind::Integer) {
                    let lhs = LValue {
                        name: Some(lhs_name.clone()),
                        name_tok: Some(name_tok),
                        targets: vec![(lhs_name, name_tok)],
                        select: None,
                        first_tok: name_tok,
                        last_tok: name_tok,
                    };
                    let end_tok = self.idx();
                    self.body.cont_assigns.push(ContAssign {
                        kw_tok: None,
                        lhs,
                        op_tok: op,
                        rhs,
                        end_tok,
                        line: self.toks[name_tok].line,
                        end_line: self.toks[end_tok].line,
                    });
                }
            }
            if self.eat(",").is_none() {
                break;
            }
        }
        let end = self.eat(";").unwrap_or_else(|| self.prev_idx());
        for d in &mut self.body.decls[first_decl..] {
            d.stmt_end_tok = end;
        }
    }

    fn parse_parameter_decl(&mut self) {
        self.bump();
        while let Some(t) = self.peek() {
            if t.is_keyword("signed") || t.is_keyword("integer") || t.is_keyword("real") {
                self.bump();
            } else if t.text == "[" {
                self.parse_range();
            } else {
                break;
            }
        }
        let first_decl = self.body.decls.len();
        while !self.done() && !self.at(";") {
            if self.at_kind(TokenKind::Identifier) {
                let i = self.bump();
                self.push_decl_simple(i, DeclClass::Parameter, false);
                if self.eat("=").is_some() {
                    self.parse_expr(&[",", ";"]);
                }
            } else {
                self.bump();
            }
            self.eat(",");
        }
        let end = self.eat(";").unwrap_or_else(|| self.prev_idx());
        for d in &mut self.body.decls[first_decl..] {
            d.stmt_end_tok = end;
        }
    }

    fn parse_subprogram(&mut self, function: bool) {
        let closer = if function { "endfunction" } else { "endtask" };
        self.bump();
        // name is the last identifier before `;` or `(`
        let mut name_tok = None;
        while !self.done() && !self.at(";") && !self.at("(") {
            let i = self.bump();
            if self.toks[i].kind == TokenKind::Identifier {
                name_tok = Some(i);
            }
        }
        if let Some(i) = name_tok {
            self.push_decl_simple(i, DeclClass::Subprogram, false);
        }
        // locals and arguments are scoped to the subprogram; skip the body
        self.skip_past(closer);
    }

    fn parse_cont_assign(&mut self) {
        let kw = self.bump();
        if self.at("(") {
            self.skip_balanced();
        }
        if self.eat("#").is_some() {
            if self.at("(") {
                self.skip_balanced();
            } else {
                self.bump();
            }
        }
        loop {
            if self.done() {
                return;
            }
            let Some(lhs) = self.parse_lvalue() else {
                self.issue("malformed continuous assignment");
                self.skip_past(";");
                return;
            };
            let op_tok = if let Some(op) = self.eat("=") {
                op
            } else if let Some(op) = self.eat("==") {
                self.body.equality_statements.push(EqualityStatement {
                    op_tok: op,
                    line: self.toks[op].line,
                });
                op
            } else {
                self.issue("expected `=` in continuous assignment");
                self.skip_past(";");
                return;
            };
            let rhs = self.parse_expr(&[",", ";"]);
            let end_tok = self.idx();
            self.body.cont_assigns.push(ContAssign {
                kw_tok: Some(kw),
                line: self.toks[lhs.first_tok].line,
                lhs,
                op_tok,
                rhs,
                end_tok,
                end_line: self.toks[end_tok].line,
            });
            if self.eat(",").is_none() {
                break;
            }
        }
        if self.eat(";").is_none() {
            self.issue("expected `;` after continuous assignment");
        }
    }

    fn parse_always(&mut self) {
        let kw = self.bump();
        let mut sensitivity = Sensitivity::None;
        if let Some(at) = self.eat("@") {
            if self.eat("*").is_some() {
                sensitivity = Sensitivity::Star { at_tok: at };
            } else if self.at("(") {
                if self.peek_at(1).is_some_and(|t| t.text == "*")
                    && self.peek_at(2).is_some_and(|t| t.text == ")")
                {
                    self.bump();
                    self.bump();
                    self.bump();
                    sensitivity = Sensitivity::Star { at_tok: at };
                } else {
                    sensitivity = self.parse_sensitivity(at);
                }
            } else if self.at_kind(TokenKind::Identifier) {
                let i = self.bump();
                self.in_sensitivity = true;
                self.read_ref(i);
                self.in_sensitivity = false;
                sensitivity = Sensitivity::List {
                    at_tok: at,
                    open_tok: at,
                    close_tok: i + 1,
                    items: vec![SensItem {
                        edge: None,
                        edge_tok: None,
                        signal: Some(self.toks[i].text.clone()),
                        signal_tok: Some(i),
                    }],
                    separators: Vec::new(),
                };
            }
        } else if self.eat("#").is_some() {
            if self.at("(") {
                self.skip_balanced();
            } else {
                self.bump();
            }
        }
        let idx = self.body.always_blocks.len();
        self.body.always_blocks.push(AlwaysBlock {
            kw_tok: kw,
            line: self.toks[kw].line,
            end_line: self.toks[kw].line,
            end_tok: kw,
            sensitivity,
        });
        self.parse_stmt(ProcContext::Always(idx), false);
        let end_tok = self.prev_idx();
        let b = &mut self.body.always_blocks[idx];
        b.end_tok = end_tok;
        b.end_line = self.toks[end_tok].line;
    }

    fn parse_sensitivity(&mut self, at_tok: usize) -> Sensitivity {
        let open_tok = self.bump();
        let mut items = Vec::new();
        let mut separators = Vec::new();
        let mut current = SensItem {
            edge: None,
            edge_tok: None,
            signal: None,
            signal_tok: None,
        };
        let mut depth = 0usize;
        self.in_sensitivity = true;
        let close_tok = loop {
            if self.done() {
                break self.prev_idx();
            }
            let t = self.peek().unwrap();
            match t.text.as_str() {
                ")" if depth == 0 => break self.bump(),
                "(" | "[" | "{" => {
                    depth += 1;
                    self.bump();
                }
                ")" | "]" | "}" => {
                    depth -= 1;
                    self.bump();
                }
                "or" | "," | "|" | "||" if depth == 0 => {
                    separators.push(self.bump());
                    items.push(std::mem::replace(
                        &mut current,
                        SensItem {
                            edge: None,
                            edge_tok: None,
                            signal: None,
                            signal_tok: None,
                        },
                    ));
                }
                "posedge" | "negedge" => {
                    let i = self.bump();
                    current.edge = Some(if t.text == "posedge" { Edge::Posedge } else { Edge::Negedge });
                    current.edge_tok = Some(i);
                }
                _ => {
                    let i = self.bump();
                    if t.kind == TokenKind::Identifier {
                        self.read_ref(i);
                        if current.signal.is_none() {
                            current.signal = Some(t.text.clone());
                            current.signal_tok = Some(i);
                        }
                    }
                }
            }
        };
        self.in_sensitivity = false;
        items.push(current);
        Sensitivity::List {
            at_tok,
            open_tok,
            close_tok,
            items,
            separators,
        }
    }

    fn parse_instance(&mut self, primitive: bool) {
        let module_tok = self.bump();
        let module_name = self.toks[module_tok].text.clone();
        let line = self.toks[module_tok].line;
        if !primitive && self.at("=") || self.at("<=") {
            self.body.issues.push(SyntaxIssue {
                line,
                tok: module_tok,
                message: format!("assignment to `{module_name}` outside a procedural block"),
                leading_ident: Some(module_name),
            });
            self.skip_past(";");
            return;
        }
        let mut params = None;
        if let Some(hash) = self.eat("#") {
            let end = if self.at("(") {
                let start = self.pos;
                let close = self.skip_balanced();
                for k in start..self.pos {
                    let i = self.sig[k];
                    if self.toks[i].kind == TokenKind::Identifier
                        && self.toks[self.sig[k - 1]].text != "."
                    {
                        self.read_ref(i);
                    }
                }
                close
            } else {
                self.bump()
            };
            params = Some((hash, end));
        }
        if primitive && self.at("(") {
            // strength or anonymous gate; anonymous gates have no name
            if self.peek_at(1).is_some_and(|t| t.text.ends_with('0') || t.text.ends_with('1'))
                && self.peek_at(1).is_some_and(|t| t.kind == TokenKind::Keyword)
            {
                self.skip_balanced();
            }
        }
        loop {
            let mut name = None;
            let mut name_tok = None;
            if self.at_kind(TokenKind::Identifier) {
                let i = self.bump();
                name = Some(self.toks[i].text.clone());
                name_tok = Some(i);
                while self.at("[") {
                    self.parse_range();
                }
            } else if !primitive {
                let leading = Some(module_name.clone());
                self.body.issues.push(SyntaxIssue {
                    line,
                    tok: module_tok,
                    message: format!("`{module_name}` does not start a valid module item"),
                    leading_ident: leading,
                });
                self.skip_past(";");
                return;
            }
            if !self.at("(") {
                self.body.issues.push(SyntaxIssue {
                    line,
                    tok: module_tok,
                    message: format!("`{module_name}` does not start a valid module item"),
                    leading_ident: Some(module_name.clone()),
                });
                self.skip_past(";");
                return;
            }
            let open_tok = self.bump();
            let mut connections = Vec::new();
            loop {
                if self.done() {
                    break;
                }
                if self.at(")") {
                    if !connections.is_empty() || self.toks[self.prev_idx()].text == "," {
                        connections.push(Connection {
                            port: None,
                            dot_tok: None,
                            expr: None,
                        });
                    }
                    break;
                }
                if self.at(",") {
                    connections.push(Connection {
                        port: None,
                        dot_tok: None,
                        expr: None,
                    });
                    self.bump();
                    continue;
                }
                if let Some(dot) = self.eat(".") {
                    let port = if self.at_kind(TokenKind::Identifier) {
                        let i = self.bump();
                        Some(self.toks[i].text.clone())
                    } else {
                        None
                    };
                    let mut expr = None;
                    if self.eat("(").is_some() {
                        if !self.at(")") {
                            expr = Some(self.parse_expr_role(&[")"], RefRole::Connect));
                        }
                        self.eat(")");
                    }
                    connections.push(Connection {
                        port,
                        dot_tok: Some(dot),
                        expr,
                    });
                } else {
                    let expr = self.parse_expr_role(&[",", ")"], RefRole::Connect);
                    connections.push(Connection {
                        port: None,
                        dot_tok: None,
                        expr: Some(expr),
                    });
                }
                if self.eat(",").is_none() {
                    break;
                }
                if self.at(")") {
                    connections.push(Connection {
                        port: None,
                        dot_tok: None,
                        expr: None,
                    });
                    break;
                }
            }
            let close_tok = self.eat(")").unwrap_or_else(|| self.prev_idx());
            let end_tok = if self.at(";") { self.idx() } else { close_tok };
            self.body.instances.push(Instance {
                module_name: module_name.clone(),
                module_tok,
                name,
                name_tok,
                params,
                open_tok,
                close_tok,
                end_tok,
                connections,
                primitive,
                line: name_tok.map_or(line, |i| self.toks[i].line),
                end_line: self.toks[end_tok].line,
            });
            if self.eat(",").is_none() {
                break;
            }
        }
        if self.eat(";").is_none() {
            self.issue("expected `;` after instance");
        }
    }

    // ---- statements ----

    fn parse_stmt(&mut self, ctx: ProcContext, in_seq: bool) {
        let Some(t) = self.peek() else { return };
        match t.text.as_str() {
            "begin" | "fork" => {
                let closer = if t.text == "begin" { "end" } else { "join" };
                self.bump();
                self.enter();
                if self.eat(":").is_some() && self.at_kind(TokenKind::Identifier) {
                    self.bump();
                }
                while !self.done() && !self.at(closer) {
                    if self.at("endmodule") || self.at("endcase") {
                        break;
                    }
                    let before = self.pos;
                    self.parse_stmt(ctx, true);
                    if self.pos == before {
                        self.issue(format!("unexpected `{}`", self.peek().map_or("", |t| &t.text)));
                        self.bump();
                    }
                }
                if self.eat(closer).is_none() {
                    self.issue(format!("missing `{closer}`"));
                }
                self.leave();
            }
            "if" => {
                self.bump();
                self.enter();
                self.parse_condition(ConditionKind::If);
                self.parse_stmt(ctx, false);
                if self.eat("else").is_some() {
                    self.parse_stmt(ctx, false);
                }
                self.leave();
            }
            "case" | "casex" | "casez" => {
                self.bump();
                self.enter();
                self.parse_condition(ConditionKind::Case);
                while !self.done() && !self.at("endcase") {
                    if self.at("end") || self.at("endmodule") {
                        break;
                    }
                    let before = self.pos;
                    if self.eat("default").is_some() {
                        self.eat(":");
                    } else {
                        self.parse_expr(&[":"]);
                        if self.eat(":").is_none() {
                            self.issue("expected `:` after case item");
                        }
                    }
                    self.parse_stmt(ctx, false);
                    if self.pos == before {
                        self.bump();
                    }
                }
                if self.eat("endcase").is_none() {
                    self.issue("missing `endcase`");
                }
                self.leave();
            }
            "for" => {
                self.bump();
                if self.at("(") {
                    let start = self.pos;
                    let open = self.idx();
                    let close = self.skip_balanced();
                    self.body.for_headers.push((open, close));
                    for k in start..self.pos {
                        let i = self.sig[k];
                        if self.toks[i].kind == TokenKind::Identifier {
                            self.read_ref(i);
                        }
                    }
                }
                self.enter();
                self.parse_stmt(ctx, false);
                self.leave();
            }
            "while" | "repeat" => {
                self.bump();
                self.parse_condition(ConditionKind::While);
                self.parse_stmt(ctx, false);
            }
            "wait" => {
                self.bump();
                self.parse_condition(ConditionKind::While);
                self.parse_stmt(ctx, false);
            }
            "forever" => {
                self.bump();
                self.parse_stmt(ctx, false);
            }
            "#" => {
                self.bump();
                if self.at("(") {
                    self.skip_balanced();
                } else {
                    self.bump();
                }
                self.parse_stmt(ctx, in_seq);
            }
            "@" => {
                self.bump();
                if self.at("(") {
                    self.skip_balanced();
                } else {
                    self.bump();
                }
                self.parse_stmt(ctx, in_seq);
            }
            ";" => {
                self.bump();
            }
            "disable" | "->" => self.skip_past(";"),
            "end" | "endcase" | "join" | "endmodule" => {
                self.issue(format!("unexpected `{}`", t.text));
            }
            "else" => {
                self.issue("`else` without matching `if`");
                self.bump();
            }
            "assign" | "deassign" | "force" | "release" => {
                self.bump();
                self.parse_assignment(ctx, in_seq);
            }
            _ if t.kind == TokenKind::Identifier && t.text.starts_with('$') => {
                self.bump();
                if self.at("(") {
                    self.eat("(");
                    self.parse_expr(&[")"]);
                    self.eat(")");
                }
                if self.eat(";").is_none() {
                    self.issue("expected `;` after system task");
                }
            }
            _ if t.kind == TokenKind::Identifier || t.text == "{" => self.parse_assignment(ctx, in_seq),
            _ => {
                self.issue(format!("unexpected `{}` in statement", t.text));
                self.skip_past(";");
            }
        }
    }

    fn parse_condition(&mut self, kind: ConditionKind) {
        if !self.at("(") {
            self.issue("expected `(`");
            return;
        }
        let open_tok = self.bump();
        self.parse_expr(&[")"]);
        let close_tok = self.eat(")").unwrap_or_else(|| self.prev_idx());
        self.body.conditions.push(Condition {
            kind,
            open_tok,
            close_tok,
        });
    }

    fn parse_assignment(&mut self, ctx: ProcContext, in_seq: bool) {
        let first = self.peek().unwrap();
        let first_tok = self.idx();
        let leading = (first.kind == TokenKind::Identifier).then(|| first.text.clone());
        let start_pos = self.pos;
        let Some(lhs) = self.parse_lvalue() else {
            self.issue("malformed statement");
            self.skip_past(";");
            return;
        };
        let (op_tok, blocking) = if let Some(op) = self.eat("=") {
            (op, true)
        } else if let Some(op) = self.eat("<=") {
            (op, false)
        } else if let Some(op) = self.eat("==") {
            self.body.equality_statements.push(EqualityStatement {
                op_tok: op,
                line: self.toks[op].line,
            });
            (op, true)
        } else if lhs.name.is_some() && (self.at("(") || self.at(";")) {
            // task enable
            if self.at("(") {
                self.eat("(");
                self.parse_expr(&[")"]);
                self.eat(")");
            }
            if self.eat(";").is_none() {
                self.body.refs.retain(|r| r.tok < first_tok);
                self.body.issues.push(SyntaxIssue {
                    line: self.toks[first_tok].line,
                    tok: first_tok,
                    message: format!("`{}` is neither an assignment nor a task call", self.toks[first_tok].text),
                    leading_ident: leading,
                });
                self.skip_statement();
            }
            return;
        } else {
            // not an assignment: undo the refs recorded for the bogus lvalue
            self.body.refs.retain(|r| r.tok < first_tok);
            self.pos = start_pos;
            self.body.issues.push(SyntaxIssue {
                line: self.toks[first_tok].line,
                tok: first_tok,
                message: format!("statement starting with `{}` is not an assignment", self.toks[first_tok].text),
                leading_ident: leading,
            });
            self.skip_statement();
            return;
        };
        if self.eat("#").is_some() {
            if self.at("(") {
                self.skip_balanced();
            } else {
                self.bump();
            }
        }
        let rhs = self.parse_expr(&[";"]);
        let semi_tok = self.eat(";");
        if semi_tok.is_none() {
            self.issue("expected `;`");
        }
        self.body.proc_assigns.push(ProcAssign {
            context: ctx,
            line: self.toks[lhs.first_tok].line,
            lhs,
            op_tok,
            blocking,
            rhs,
            semi_tok,
            in_seq_block: in_seq,
        });
    }

    /// Recovery: skip to the `;` ending the current statement, but stop
    /// before block keywords so enclosing blocks still close.
    fn skip_statement(&mut self) {
        while let Some(t) = self.peek() {
            match t.text.as_str() {
                ";" => {
                    self.bump();
                    return;
                }
                "end" | "endcase" | "endmodule" | "begin" | "else" if self.pos > 0 => {
                    if t.text == "begin" {
                        // a typo'd keyword followed by a real block
                        self.bump();
                        continue;
                    }
                    return;
                }
                _ => {
                    self.bump();
                }
            }
        }
    }

    fn parse_lvalue(&mut self) -> Option<LValue> {
        let first_tok = self.idx();
        if self.at("{") {
            let start = self.pos;
            let close = self.skip_balanced();
            let mut targets = Vec::new();
            let mut depth_brackets = 0usize;
            for k in start..self.pos {
                let i = self.sig[k];
                let t = &self.toks[i];
                match t.text.as_str() {
                    "[" => depth_brackets += 1,
                    "]" => depth_brackets = depth_brackets.saturating_sub(1),
                    _ => {}
                }
                if t.kind == TokenKind::Identifier {
                    if depth_brackets == 0 {
                        targets.push((t.text.clone(), i));
                        self.push_ref(i, RefRole::Write);
                    } else {
                        self.read_ref(i);
                    }
                }
            }
            return Some(LValue {
                name: None,
                name_tok: None,
                targets,
                select: None,
                first_tok,
                last_tok: close,
            });
        }
        if !self.at_kind(TokenKind::Identifier) {
            return None;
        }
        let name_tok = self.bump();
        let name = self.toks[name_tok].text.clone();
        self.push_ref(name_tok, RefRole::Write);
        let mut select = None;
        let mut last_tok = name_tok;
        while self.at("[") {
            let start = self.pos;
            let open = self.idx();
            let close = self.skip_balanced();
            for k in start..self.pos {
                let i = self.sig[k];
                if self.toks[i].kind == TokenKind::Identifier {
                    self.read_ref(i);
                }
            }
            if select.is_none() {
                select = Some((open, close));
            } else {
                select = Some((select.unwrap().0, close));
            }
            last_tok = close;
        }
        Some(LValue {
            name: Some(name.clone()),
            name_tok: Some(name_tok),
            targets: vec![(name, name_tok)],
            select,
            first_tok,
            last_tok,
        })
    }

    fn parse_expr(&mut self, terminators: &[&str]) -> (usize, usize) {
        self.parse_expr_role(terminators, RefRole::Read)
    }

    /// Consumes an expression up to (not including) a depth-0 terminator and
    /// returns its inclusive token range.
    fn parse_expr_role(&mut self, terminators: &[&str], role: RefRole) -> (usize, usize) {
        let first = self.idx();
        let mut last = first;
        let mut depth = 0usize;
        let mut any = false;
        while let Some(t) = self.peek() {
            if depth == 0 && terminators.contains(&t.text.as_str()) {
                break;
            }
            match t.text.as_str() {
                "(" | "[" | "{" => depth += 1,
                ")" | "]" | "}" => {
                    if depth == 0 {
                        break;
                    }
                    depth -= 1;
                }
                ";" | "begin" | "end" | "endcase" | "endmodule" => break,
                _ => {}
            }
            let i = self.bump();
            any = true;
            last = i;
            if t.kind == TokenKind::Identifier
                && !(i > 0 && self.pos >= 2 && self.toks[self.sig[self.pos - 2]].text == "`")
            {
                self.push_ref(i, role);
            }
        }
        if !any {
            return (first, first.saturating_sub(1));
        }
        (first, last)
    }

    fn read_ref(&mut self, tok: usize) {
        self.push_ref(tok, RefRole::Read);
    }

    fn push_ref(&mut self, tok: usize, role: RefRole) {
        let t = &self.toks[tok];
        if t.text.starts_with('$') {
            return;
        }
        self.body.refs.push(IdentRef {
            tok,
            name: t.text.clone(),
            line: t.line,
            role,
            in_sensitivity: self.in_sensitivity,
        });
    }
}

fn is_decimal(text: &str) -> bool {
    !text.is_empty() && text.bytes().all(|b| b.is_ascii_digit() || b == b'_') && text.as_bytes()[0].is_ascii_digit()
}

fn parse_decimal(text: &str) -> i64 {
    text.replace('_', "").parse().unwrap_or(0)
}

/// Inclusive token range is empty when `last < first`.
pub fn range_is_empty(range: (usize, usize)) -> bool {
    range.1 < range.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexer::tokenize_str;

    const WIDTH_CHAIN: &str = include_str!("../data/fixtures/width_chain.v");

    fn modules(text: &str) -> Vec<ModuleBlock> {
        extract_modules(&tokenize_str(text).unwrap()).unwrap()
    }

    #[test]
    fn width_chain_ports() {
        let m = modules(WIDTH_CHAIN);
        assert_eq!(m.len(), 1);
        let m = &m[0];
        assert_eq!(m.name, "complex_1");
        assert_eq!((m.start_line, m.end_line), (1, 12));
        let ports: Vec<_> = m
            .ports
            .iter()
            .map(|p| (p.name.as_str(), p.direction, p.width.clone()))
            .collect();
        assert_eq!(
            ports,
            vec![
                ("qo", Some(Direction::Output), Width::Range { msb: 15, lsb: 0 }),
                ("din", Some(Direction::Input), Width::Range { msb: 15, lsb: 0 }),
                ("load", Some(Direction::Input), Width::Scalar),
            ]
        );
        let sigs = m.body.signals();
        assert_eq!(sigs["temp_reg"].width, Width::Range { msb: 7, lsb: 0 });
        assert_eq!(sigs["qo"].net, Some(NetKind::Reg));
        assert_eq!(m.body.always_blocks.len(), 1);
        assert!(m.body.always_blocks[0].sensitivity.is_clocked());
        let lines: Vec<_> = m.body.proc_assigns.iter().map(|a| (a.line, a.blocking)).collect();
        assert_eq!(lines, vec![(9, false), (10, false)]);
        assert!(m.body.issues.is_empty(), "{:?}", m.body.issues);
    }

    #[test]
    fn two_modules_do_not_overlap() {
        let m = modules("module a;\nendmodule\nmodule b(input x);\nendmodule\n");
        assert_eq!(m.len(), 2);
        assert!(m[0].end_line < m[1].start_line);
    }

    #[test]
    fn empty_port_list() {
        let m = modules("module m; endmodule");
        assert!(m[0].ports.is_empty());
    }

    #[test]
    fn unbalanced_modules() {
        let toks = tokenize_str("module m;\n").unwrap();
        assert_eq!(extract_modules(&toks), Err(StructureError::UnbalancedModule { line: 1 }));
        let toks = tokenize_str("endmodule\n").unwrap();
        assert!(extract_modules(&toks).is_err());
        let toks = tokenize_str("module a;\nmodule b;\nendmodule\n").unwrap();
        assert_eq!(extract_modules(&toks), Err(StructureError::UnbalancedModule { line: 2 }));
    }

    #[test]
    fn non_ansi_ports_take_body_declarations() {
        let src = "module c (clk, q);\ninput clk;\noutput [7:0] q;\nreg [7:0] q;\nalways @(posedge clk) q <= q + 1;\nendmodule\n";
        let m = &modules(src)[0];
        assert_eq!(m.ports[0].direction, Some(Direction::Input));
        assert_eq!(m.ports[1].width, Width::Range { msb: 7, lsb: 0 });
        assert_eq!(m.ports[1].line, 3);
        assert_eq!(m.body.signals()["q"].net, Some(NetKind::Reg));
    }

    #[test]
    fn parameterized_width_is_opaque() {
        let m = &modules("module p #(parameter W = 8) (input [W-1:0] a);\nendmodule\n")[0];
        assert_eq!(m.ports[0].width, Width::Opaque("W-1:0".into()));
        assert_eq!(m.ports[0].width.bits(), None);
    }

    #[test]
    fn sensitivity_lists() {
        let m = &modules(
            "module s(input a, input b, input clk, input rst_n, output reg y, output reg q);\n\
             always @(a or b) y = a & b;\n\
             always @(posedge clk or negedge rst_n) q <= a;\n\
             always @* y = b;\n\
             endmodule\n",
        )[0];
        let blocks = &m.body.always_blocks;
        match &blocks[0].sensitivity {
            Sensitivity::List { items, separators, .. } => {
                assert_eq!(items.len(), 2);
                assert_eq!(separators.len(), 1);
                assert!(items.iter().all(|i| i.edge.is_none()));
            }
            other => panic!("{other:?}"),
        }
        assert!(blocks[1].sensitivity.is_clocked());
        assert!(matches!(blocks[2].sensitivity, Sensitivity::Star { .. }));
    }

    #[test]
    fn instances_with_named_and_positional_connections() {
        let m = &modules(
            "module t(input a, output y);\nwire n;\nsub u0 (.a(a), .y(n), .z());\nand g1 (y, n, a);\nendmodule\n",
        )[0];
        let inst = &m.body.instances;
        assert_eq!(inst.len(), 2);
        assert_eq!(inst[0].module_name, "sub");
        assert_eq!(inst[0].connections.len(), 3);
        assert!(inst[0].connections[2].expr.is_none());
        assert!(inst[1].primitive);
        assert_eq!(inst[1].connections.len(), 3);
    }

    #[test]
    fn case_items_and_conditions() {
        let m = &modules(
            "module c(input [1:0] s, output reg [1:0] y);\nalways @(*) begin\ncase (s)\n2'b00: y = 2'b01;\ndefault: y = s;\nendcase\nif (s == 2'b11) y = 0;\nend\nendmodule\n",
        )[0];
        assert_eq!(m.body.proc_assigns.len(), 3);
        assert_eq!(m.body.conditions.len(), 2);
        assert!(m.body.issues.is_empty(), "{:?}", m.body.issues);
        assert!(m.body.max_depth >= 2);
    }

    #[test]
    fn keyword_typo_becomes_issue() {
        let m = &modules(
            "module e(input clk, input a, input b, output reg q);\nalways @(posedge clk) begin\nif (a) q <= 1'b0;\nelif (b) q <= 1'b1;\nend\nendmodule\n",
        )[0];
        assert_eq!(m.body.issues.len(), 1, "{:?}", m.body.issues);
        assert_eq!(m.body.issues[0].line, 4);
        assert_eq!(m.body.issues[0].leading_ident.as_deref(), Some("elif"));
    }

    #[test]
    fn for_headers_are_not_assignments() {
        let m = &modules(
            "module f(input clk, output reg [3:0] q);\ninteger i;\nalways @(posedge clk) for (i = 0; i < 4; i = i + 1) q[i] <= 1'b0;\nendmodule\n",
        )[0];
        assert_eq!(m.body.proc_assigns.len(), 1);
        assert!(!m.body.proc_assigns[0].blocking);
        assert_eq!(m.body.for_headers.len(), 1);
    }

    #[test]
    fn corpus_parses_cleanly() {
        let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data/corpus");
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            let text = std::fs::read_to_string(&path).unwrap();
            let m = modules(&text);
            assert!(!m.is_empty(), "{path:?}");
            for block in &m {
                assert!(block.body.issues.is_empty(), "{path:?}: {:?}", block.body.issues);
                assert!(block.ports.iter().all(|p| p.direction.is_some()), "{path:?}");
            }
        }
    }
}
