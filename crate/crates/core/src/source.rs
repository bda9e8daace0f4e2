//! Verilog source units with stable 1-based line indexing.
//!
//! A [`SourceUnit`] owns the exact file content. Lines are split on `\n`
//! (a `\r` before the newline stays part of the line), and a final newline
//! terminates the last line rather than opening an empty one, so a
//! twelve-line file with a trailing newline reports `line_count() == 12`.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::lexer::{self, LexError};
use crate::structure::{self, StructureError};

#[derive(Debug, Error)]
pub enum SourceError {
    #[error("failed to read {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} is not valid UTF-8")]
    InvalidUtf8 { path: PathBuf },
    #[error("unterminated block comment opened on line {line}")]
    UnterminatedBlockComment { line: usize },
}

/// Hex-encoded SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// One Verilog design file.
#[derive(Clone, PartialEq, Eq)]
pub struct SourceUnit {
    id: String,
    path: PathBuf,
    content: String,
    line_starts: Vec<usize>,
    sha256: String,
}

impl fmt::Debug for SourceUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SourceUnit")
            .field("id", &self.id)
            .field("path", &self.path)
            .field("line_count", &self.line_count())
            .field("sha256", &self.sha256)
            .finish()
    }
}

impl SourceUnit {
    pub fn new(id: impl Into<String>, path: impl Into<PathBuf>, content: impl Into<String>) -> Self {
        let content = content.into();
        let mut line_starts = vec![0];
        for (i, b) in content.bytes().enumerate() {
            if b == b'\n' && i + 1 < content.len() {
                line_starts.push(i + 1);
            }
        }
        let sha256 = sha256_hex(content.as_bytes());
        Self {
            id: id.into(),
            path: path.into(),
            content,
            line_starts,
            sha256,
        }
    }

    /// Loads a `.v` file; the id is the file stem.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, SourceError> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|source| SourceError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let content = String::from_utf8(bytes).map_err(|_| SourceError::InvalidUtf8 {
            path: path.to_path_buf(),
        })?;
        let id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Ok(Self::new(id, path, content))
    }

    /// Same id and path, new content.
    pub fn with_content(&self, content: impl Into<String>) -> Self {
        Self::new(self.id.clone(), self.path.clone(), content)
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn content(&self) -> &str {
        &self.content
    }

    pub fn sha256(&self) -> &str {
        &self.sha256
    }

    pub fn line_count(&self) -> usize {
        self.line_starts.len()
    }

    pub fn has_trailing_newline(&self) -> bool {
        self.content.ends_with('\n')
    }

    /// Text of 1-based line `n`, without its terminating newline.
    pub fn line(&self, n: usize) -> Option<&str> {
        if n == 0 || n > self.line_count() {
            return None;
        }
        let start = self.line_starts[n - 1];
        let end = if n < self.line_count() {
            self.line_starts[n] - 1
        } else if self.has_trailing_newline() {
            self.content.len() - 1
        } else {
            self.content.len()
        };
        Some(&self.content[start..end])
    }

    pub fn lines(&self) -> impl Iterator<Item = &str> + '_ {
        (1..=self.line_count()).map(move |n| self.line(n).unwrap_or(""))
    }

    /// Builds a unit from explicit lines, keeping this unit's id, path and
    /// trailing-newline convention.
    pub fn from_lines<S: AsRef<str>>(&self, lines: &[S]) -> Self {
        let mut content = lines
            .iter()
            .map(|l| l.as_ref())
            .collect::<Vec<_>>()
            .join("\n");
        if self.has_trailing_newline() {
            content.push('\n');
        }
        self.with_content(content)
    }

    /// Source rendered with `N| ` prefixes, one line per row.
    pub fn numbered(&self) -> String {
        let mut out = String::with_capacity(self.content.len() + 8 * self.line_count());
        for (i, line) in self.lines().enumerate() {
            out.push_str(&format!("{}| {}\n", i + 1, line));
        }
        out
    }
}

/// Blanks every `//` and `/* */` comment with spaces, one space per
/// character, leaving newlines (and so every line number) untouched.
/// String literals are respected.
pub fn strip_comments(src: &SourceUnit) -> Result<SourceUnit, SourceError> {
    let text = src.content();
    let mut out = String::with_capacity(text.len());
    let mut chars = text.char_indices().peekable();
    let mut line = 1usize;

    while let Some((_, c)) = chars.next() {
        match c {
            '"' => {
                out.push(c);
                while let Some((_, s)) = chars.next() {
                    out.push(s);
                    match s {
                        '\\' => {
                            if let Some((_, e)) = chars.next() {
                                if e == '\n' {
                                    line += 1;
                                }
                                out.push(e);
                            }
                        }
                        '"' => break,
                        '\n' => {
                            line += 1;
                            break;
                        }
                        _ => {}
                    }
                }
            }
            '/' if matches!(chars.peek(), Some((_, '/'))) => {
                out.push(' ');
                while let Some(&(idx, n)) = chars.peek() {
                    if n == '\n' || (n == '\r' && is_crlf(&text[idx..])) {
                        break;
                    }
                    chars.next();
                    out.push(' ');
                }
            }
            '/' if matches!(chars.peek(), Some((_, '*'))) => {
                let open_line = line;
                chars.next();
                out.push_str("  ");
                let mut closed = false;
                let mut prev = '\0';
                for (idx, n) in chars.by_ref() {
                    if n == '\n' {
                        line += 1;
                        out.push('\n');
                    } else if n == '\r' && is_crlf(&text[idx..]) {
                        out.push('\r');
                    } else {
                        out.push(' ');
                    }
                    if prev == '*' && n == '/' {
                        closed = true;
                        break;
                    }
                    prev = n;
                }
                if !closed {
                    return Err(SourceError::UnterminatedBlockComment { line: open_line });
                }
            }
            '\n' => {
                line += 1;
                out.push(c);
            }
            _ => out.push(c),
        }
    }
    Ok(src.with_content(out))
}

fn is_crlf(rest: &str) -> bool {
    rest.starts_with("\r\n")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Rejection {
    IncludeDirective { line: usize },
    NoModule,
    MultipleModules { count: usize },
    UnterminatedBlockComment { line: usize },
    Lex { line: usize, col: usize },
    Structure { message: String },
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rejection::IncludeDirective { line } => write!(f, "`include directive on line {line}"),
            Rejection::NoModule => write!(f, "no module-endmodule block"),
            Rejection::MultipleModules { count } => write!(f, "{count} modules (expected exactly one)"),
            Rejection::UnterminatedBlockComment { line } => {
                write!(f, "unterminated block comment opened on line {line}")
            }
            Rejection::Lex { line, col } => write!(f, "lex error at {line}:{col}"),
            Rejection::Structure { message } => write!(f, "{message}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Accepted,
    Rejected(Rejection),
}

impl Verdict {
    pub fn is_accepted(&self) -> bool {
        matches!(self, Verdict::Accepted)
    }
}

/// Corpus admission check: one module-endmodule block, no `include.
pub fn validate_corpus_file(src: &SourceUnit) -> Verdict {
    let stripped = match strip_comments(src) {
        Ok(s) => s,
        Err(SourceError::UnterminatedBlockComment { line }) => {
            return Verdict::Rejected(Rejection::UnterminatedBlockComment { line })
        }
        Err(e) => {
            return Verdict::Rejected(Rejection::Structure {
                message: e.to_string(),
            })
        }
    };
    let tokens = match lexer::tokenize(&stripped) {
        Ok(t) => t,
        Err(LexError::Unexpected { line, col, .. }) | Err(LexError::UnterminatedString { line, col }) => {
            return Verdict::Rejected(Rejection::Lex { line, col })
        }
        Err(LexError::UnterminatedBlockComment { line }) => {
            return Verdict::Rejected(Rejection::UnterminatedBlockComment { line })
        }
    };
    let significant: Vec<_> = tokens.iter().filter(|t| !t.is_trivia()).collect();
    for pair in significant.windows(2) {
        if pair[0].text == "`" && pair[1].text == "include" {
            return Verdict::Rejected(Rejection::IncludeDirective { line: pair[0].line });
        }
    }
    match structure::extract_modules(&tokens) {
        Ok(blocks) => match blocks.len() {
            0 => Verdict::Rejected(Rejection::NoModule),
            1 => Verdict::Accepted,
            count => Verdict::Rejected(Rejection::MultipleModules { count }),
        },
        Err(StructureError::UnbalancedModule { .. }) => Verdict::Rejected(Rejection::Structure {
            message: "unbalanced module/endmodule".into(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(text: &str) -> SourceUnit {
        SourceUnit::new("t", "t.v", text)
    }

    #[test]
    fn line_indexing() {
        let u = unit("a\nb\n");
        assert_eq!(u.line_count(), 2);
        assert_eq!(u.line(1), Some("a"));
        assert_eq!(u.line(2), Some("b"));
        assert_eq!(u.line(3), None);
        let u = unit("a\n\nb");
        assert_eq!(u.lines().collect::<Vec<_>>(), vec!["a", "", "b"]);
        assert_eq!(unit("").line_count(), 1);
        assert_eq!(unit("\n").line_count(), 1);
    }

    #[test]
    fn from_lines_reproduces_content() {
        for text in ["a\nb\n", "a\r\nb", "", "\n\n", "x"] {
            let u = unit(text);
            let lines: Vec<&str> = u.lines().collect();
            assert_eq!(u.from_lines(&lines).content(), text);
        }
    }

    #[test]
    fn line_comment_blanked_to_same_width() {
        let out = strip_comments(&unit("a <= b; // note")).unwrap();
        assert_eq!(out.content(), "a <= b;        ");
    }

    #[test]
    fn block_comment_line_becomes_spaces() {
        let out = strip_comments(&unit("a;\n/* x */\nb;")).unwrap();
        assert_eq!(out.line_count(), 3);
        assert_eq!(out.line(2), Some("       "));
    }

    #[test]
    fn multiline_block_comment_keeps_lines() {
        let out = strip_comments(&unit("x /* one\ntwo */ y\n")).unwrap();
        assert_eq!(out.content(), "x       \n       y\n");
    }

    #[test]
    fn comment_markers_inside_strings_survive() {
        let src = "initial $display(\"a // b /* c\"); // gone";
        let out = strip_comments(&unit(src)).unwrap();
        assert!(out.content().starts_with("initial $display(\"a // b /* c\");"));
        assert!(!out.content().contains("gone"));
    }

    #[test]
    fn unterminated_block_comment_reports_line() {
        let err = strip_comments(&unit("a;\nb; /* open\nc;")).unwrap_err();
        assert!(matches!(err, SourceError::UnterminatedBlockComment { line: 2 }));
    }

    #[test]
    fn non_ascii_comment_blanks_per_character() {
        let out = strip_comments(&unit("a; // héllo")).unwrap();
        assert_eq!(out.content(), "a;         ");
    }

    #[test]
    fn crlf_line_endings_survive() {
        let out = strip_comments(&unit("a; // c\r\nb;\r\n")).unwrap();
        assert_eq!(out.content(), "a;     \r\nb;\r\n");
    }

    #[test]
    fn validation_verdicts() {
        assert!(validate_corpus_file(&unit("module m(input a);\nendmodule\n")).is_accepted());
        assert_eq!(
            validate_corpus_file(&unit("`include \"defs.vh\"\nmodule m;\nendmodule\n")),
            Verdict::Rejected(Rejection::IncludeDirective { line: 1 })
        );
        assert_eq!(
            validate_corpus_file(&unit("module a;\nendmodule\nmodule b;\nendmodule\n")),
            Verdict::Rejected(Rejection::MultipleModules { count: 2 })
        );
        assert_eq!(validate_corpus_file(&unit("wire x;\n")), Verdict::Rejected(Rejection::NoModule));
        // commented-out include is not a directive
        assert!(validate_corpus_file(&unit("// `include \"x.vh\"\nmodule m;\nendmodule\n")).is_accepted());
    }
}
