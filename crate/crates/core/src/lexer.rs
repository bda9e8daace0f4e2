//! Lossless Verilog-2001 lexer.
//!
//! Every byte of the input lands in exactly one token, so concatenating the
//! token texts gives back the source. Comments are carried as
//! [`TokenKind::Whitespace`]. SystemVerilog keywords are plain identifiers.

use serde::Serialize;
use thiserror::Error;

use crate::source::SourceUnit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenKind {
    Keyword,
    Identifier,
    Operator,
    Literal,
    Punctuation,
    Whitespace,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    /// 1-based line of the first character.
    pub line: usize,
    /// 1-based column (in characters) of the first character.
    pub col: usize,
    /// Byte offset into the source.
    pub offset: usize,
}

impl Token {
    pub fn is_trivia(&self) -> bool {
        self.kind == TokenKind::Whitespace
    }

    pub fn is_keyword(&self, kw: &str) -> bool {
        self.kind == TokenKind::Keyword && self.text == kw
    }

    pub fn is(&self, text: &str) -> bool {
        self.text == text && self.kind != TokenKind::Whitespace
    }

    pub fn end_offset(&self) -> usize {
        self.offset + self.text.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexError {
    #[error("unexpected character {ch:?} at {line}:{col}")]
    Unexpected { line: usize, col: usize, ch: char },
    #[error("unterminated string literal at {line}:{col}")]
    UnterminatedString { line: usize, col: usize },
    #[error("unterminated block comment opened on line {line}")]
    UnterminatedBlockComment { line: usize },
}

impl LexError {
    pub fn line(&self) -> usize {
        match self {
            LexError::Unexpected { line, .. }
            | LexError::UnterminatedString { line, .. }
            | LexError::UnterminatedBlockComment { line } => *line,
        }
    }
}

const KEYWORDS: &[&str] = &[
    "always", "and", "assign", "automatic", "begin", "buf", "bufif0", "bufif1", "case", "casex",
    "casez", "cell", "cmos", "config", "deassign", "default", "defparam", "design", "disable",
    "edge", "else", "end", "endcase", "endconfig", "endfunction", "endgenerate", "endmodule",
    "endprimitive", "endspecify", "endtable", "endtask", "event", "for", "force", "forever",
    "fork", "function", "generate", "genvar", "highz0", "highz1", "if", "ifnone", "incdir",
    "include", "initial", "inout", "input", "instance", "integer", "join", "large", "liblist",
    "library", "localparam", "macromodule", "medium", "module", "nand", "negedge", "nmos", "nor",
    "noshowcancelled", "not", "notif0", "notif1", "or", "output", "parameter", "pmos", "posedge",
    "primitive", "pull0", "pull1", "pulldown", "pullup", "pulsestyle_ondetect",
    "pulsestyle_onevent", "rcmos", "real", "realtime", "reg", "release", "repeat", "rnmos",
    "rpmos", "rtran", "rtranif0", "rtranif1", "scalared", "showcancelled", "signed", "small",
    "specify", "specparam", "strong0", "strong1", "supply0", "supply1", "table", "task", "time",
    "tran", "tranif0", "tranif1", "tri", "tri0", "tri1", "triand", "trior", "trireg", "unsigned",
    "use", "vectored", "wait", "wand", "weak0", "weak1", "while", "wire", "wor", "xnor", "xor",
];

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.binary_search(&word).is_ok()
}

pub fn keywords() -> &'static [&'static str] {
    KEYWORDS
}

// longest first
const OPERATORS: &[&str] = &[
    "<<<", ">>>", "===", "!==", "==", "!=", "<=", ">=", "&&", "||", "**", "<<", ">>", "~&", "~|",
    "~^", "^~", "->", "+:", "-:", "+", "-", "*", "/", "%", "<", ">", "!", "~", "&", "|", "^", "=",
    "?", ":",
];

const PUNCTUATION: &[char] = &['(', ')', '[', ']', '{', '}', ';', ',', '.', '@', '#', '`'];

pub fn tokenize(src: &SourceUnit) -> Result<Vec<Token>, LexError> {
    tokenize_str(src.content())
}

pub fn tokenize_str(text: &str) -> Result<Vec<Token>, LexError> {
    Lexer::new(text).run()
}

struct Lexer<'a> {
    text: &'a str,
    pos: usize,
    line: usize,
    col: usize,
    tokens: Vec<Token>,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            text,
            pos: 0,
            line: 1,
            col: 1,
            tokens: Vec::new(),
        }
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn run(mut self) -> Result<Vec<Token>, LexError> {
        while let Some(c) = self.peek() {
            let rest = self.rest();
            if c.is_ascii_whitespace() {
                let len = rest
                    .find(|ch: char| !ch.is_ascii_whitespace())
                    .unwrap_or(rest.len());
                self.emit(TokenKind::Whitespace, len);
            } else if rest.starts_with("//") {
                let len = rest.find('\n').unwrap_or(rest.len());
                let len = if rest[..len].ends_with('\r') { len - 1 } else { len };
                self.emit(TokenKind::Whitespace, len);
            } else if let Some(body) = rest.strip_prefix("/*") {
                match body.find("*/") {
                    Some(end) => self.emit(TokenKind::Whitespace, end + 4),
                    None => return Err(LexError::UnterminatedBlockComment { line: self.line }),
                }
            } else if c == '"' {
                let len = self.string_len()?;
                self.emit(TokenKind::Literal, len);
            } else if c.is_ascii_alphabetic() || c == '_' || c == '$' {
                let len = rest
                    .find(|ch: char| !(ch.is_ascii_alphanumeric() || ch == '_' || ch == '$'))
                    .unwrap_or(rest.len());
                let kind = if is_keyword(&rest[..len]) {
                    TokenKind::Keyword
                } else {
                    TokenKind::Identifier
                };
                self.emit(kind, len);
            } else if c == '\\' {
                // escaped identifier runs to the next whitespace
                let len = rest
                    .find(|ch: char| ch.is_ascii_whitespace())
                    .unwrap_or(rest.len());
                if len == 1 {
                    return Err(self.unexpected(c));
                }
                self.emit(TokenKind::Identifier, len);
            } else if c.is_ascii_digit() || (c == '\'' && based_prefix(&rest[1..]) > 0) {
                let len = number_len(rest);
                self.emit(TokenKind::Literal, len);
            } else if let Some(op) = OPERATORS.iter().find(|op| rest.starts_with(**op)) {
                self.emit(TokenKind::Operator, op.len());
            } else if PUNCTUATION.contains(&c) {
                self.emit(TokenKind::Punctuation, 1);
            } else {
                return Err(self.unexpected(c));
            }
        }
        Ok(self.tokens)
    }

    fn unexpected(&self, ch: char) -> LexError {
        LexError::Unexpected {
            line: self.line,
            col: self.col,
            ch,
        }
    }

    fn string_len(&self) -> Result<usize, LexError> {
        let rest = self.rest();
        let mut iter = rest.char_indices().skip(1);
        while let Some((i, ch)) = iter.next() {
            match ch {
                '\\' => {
                    iter.next();
                }
                '"' => return Ok(i + 1),
                '\n' => break,
                _ => {}
            }
        }
        Err(LexError::UnterminatedString {
            line: self.line,
            col: self.col,
        })
    }

    fn emit(&mut self, kind: TokenKind, len: usize) {
        let text = &self.text[self.pos..self.pos + len];
        self.tokens.push(Token {
            kind,
            text: text.to_string(),
            line: self.line,
            col: self.col,
            offset: self.pos,
        });
        for ch in text.chars() {
            if ch == '\n' {
                self.line += 1;
                self.col = 1;
            } else {
                self.col += 1;
            }
        }
        self.pos += len;
    }
}

/// Length of `[sS]?[bodhBODH]` after a `'`, or 0.
fn based_prefix(s: &str) -> usize {
    let b = s.as_bytes();
    let mut i = 0;
    if i < b.len() && (b[i] == b's' || b[i] == b'S') {
        i += 1;
    }
    if i < b.len() && b"bodhBODH".contains(&b[i]) {
        i + 1
    } else {
        0
    }
}

fn number_len(s: &str) -> usize {
    let b = s.as_bytes();
    let mut i = 0;
    while i < b.len() && (b[i].is_ascii_digit() || b[i] == b'_') {
        i += 1;
    }
    if i < b.len() && b[i] == b'\'' {
        let p = based_prefix(&s[i + 1..]);
        if p > 0 {
            i += 1 + p;
            while i < b.len() && (b[i].is_ascii_hexdigit() || b"xXzZ?_".contains(&b[i])) {
                i += 1;
            }
            return i;
        }
        return i;
    }
    // real: 1.5, 1e3, 1.5e-3
    if i + 1 < b.len() && b[i] == b'.' && b[i + 1].is_ascii_digit() {
        i += 1;
        while i < b.len() && (b[i].is_ascii_digit() || b[i] == b'_') {
            i += 1;
        }
    }
    if i > 0 && i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        let mut j = i + 1;
        if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
            j += 1;
        }
        if j < b.len() && b[j].is_ascii_digit() {
            while j < b.len() && b[j].is_ascii_digit() {
                j += 1;
            }
            i = j;
        }
    }
    i
}

/// Non-whitespace tokens, with their index in the full stream.
pub fn significant(tokens: &[Token]) -> Vec<&Token> {
    tokens.iter().filter(|t| !t.is_trivia()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(text: &str) -> Vec<(TokenKind, String)> {
        tokenize_str(text)
            .unwrap()
            .into_iter()
            .filter(|t| !t.is_trivia())
            .map(|t| (t.kind, t.text))
            .collect()
    }

    #[test]
    fn keyword_table_is_sorted() {
        let mut sorted = KEYWORDS.to_vec();
        sorted.sort_unstable();
        assert_eq!(sorted, KEYWORDS);
    }

    #[test]
    fn continuous_assign() {
        use TokenKind::*;
        let toks = kinds("assign y = a & b;");
        let expect = [
            (Keyword, "assign"),
            (Identifier, "y"),
            (Operator, "="),
            (Identifier, "a"),
            (Operator, "&"),
            (Identifier, "b"),
            (Punctuation, ";"),
        ];
        assert_eq!(toks.len(), expect.len());
        for ((k, t), (ek, et)) in toks.iter().zip(expect) {
            assert_eq!((*k, t.as_str()), (ek, et));
        }
        let all = tokenize_str("assign y = a & b;").unwrap();
        assert_eq!(all.len(), 12, "whitespace interleaved");
    }

    #[test]
    fn posedge_column() {
        let toks = tokenize_str("always @(posedge clk)").unwrap();
        let pe = toks.iter().find(|t| t.text == "posedge").unwrap();
        assert_eq!(pe.kind, TokenKind::Keyword);
        assert_eq!((pe.line, pe.col), (1, 10));
    }

    #[test]
    fn empty_input() {
        assert!(tokenize_str("").unwrap().is_empty());
    }

    #[test]
    fn literals() {
        let toks = kinds("x = 8'hFF + 'b1 + 4'sd3 + 12 + 1.5e3 + 3'bx0z;");
        let lits: Vec<_> = toks
            .iter()
            .filter(|(k, _)| *k == TokenKind::Literal)
            .map(|(_, t)| t.as_str())
            .collect();
        assert_eq!(lits, ["8'hFF", "'b1", "4'sd3", "12", "1.5e3", "3'bx0z"]);
    }

    #[test]
    fn multi_char_operators() {
        let toks = kinds("a <= b === c && d >>> 2");
        let ops: Vec<_> = toks
            .iter()
            .filter(|(k, _)| *k == TokenKind::Operator)
            .map(|(_, t)| t.as_str())
            .collect();
        assert_eq!(ops, ["<=", "===", "&&", ">>>"]);
    }

    #[test]
    fn systemverilog_words_are_identifiers() {
        assert_eq!(kinds("logic")[0].0, TokenKind::Identifier);
        assert_eq!(kinds("elif")[0].0, TokenKind::Identifier);
    }

    #[test]
    fn directives_and_system_tasks() {
        let toks = kinds("`include \"a.vh\" $display");
        assert_eq!(toks[0], (TokenKind::Punctuation, "`".into()));
        assert_eq!(toks[1], (TokenKind::Keyword, "include".into()));
        assert_eq!(toks[2].0, TokenKind::Literal);
        assert_eq!(toks[3], (TokenKind::Identifier, "$display".into()));
    }

    #[test]
    fn rejects_characters_outside_the_set() {
        let err = tokenize_str("wire a;\nwire é;").unwrap_err();
        assert_eq!(err, LexError::Unexpected { line: 2, col: 6, ch: 'é' });
        assert!(tokenize_str("a = \"open").is_err());
    }

    #[test]
    fn comments_are_trivia() {
        let toks = tokenize_str("a // c\n/* b */ b").unwrap();
        assert_eq!(significant(&toks).len(), 2);
        let b = toks.iter().find(|t| t.text == "b").unwrap();
        assert_eq!((b.line, b.col), (2, 9));
    }
}
