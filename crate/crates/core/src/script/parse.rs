use std::collections::BTreeSet;
use std::fmt;

use super::{Decl, Pos, Query, QueryKind, Script, TreeExpr, BUILTINS};
use crate::words::BinWord;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScriptErrorKind {
    /// Malformed input, unknown or duplicate names, wrong shapes.
    Parse,
    /// A well-formed tree that violates a presentation invariant.
    Presentation,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScriptError {
    pub kind: ScriptErrorKind,
    pub pos: Pos,
    pub message: String,
}

impl ScriptError {
    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ScriptErrorKind::Parse => 1,
            ScriptErrorKind::Presentation => 2,
        }
    }
}

impl fmt::Display for ScriptError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.kind {
            ScriptErrorKind::Parse => "parse error",
            ScriptErrorKind::Presentation => "invalid presentation",
        };
        write!(f, "{what} at {}: {}", self.pos, self.message)
    }
}

impl std::error::Error for ScriptError {}

const KEYWORDS: [&str; 6] = ["full", "words", "blocks", "silver", "product", "subtree"];

fn is_punct(c: char) -> bool {
    "(){}[],=".contains(c)
}

#[derive(Clone, Debug)]
struct Token {
    text: String,
    pos: Pos,
}

fn tokenize(line: &str, number: usize) -> Vec<Token> {
    let line = line.split('#').next().unwrap_or("");
    let mut out: Vec<Token> = Vec::new();
    let mut current: Option<Token> = None;
    for (i, c) in line.chars().enumerate() {
        let pos = Pos { line: number, col: i + 1 };
        if c.is_whitespace() || is_punct(c) {
            out.extend(current.take());
            if is_punct(c) {
                out.push(Token { text: c.to_string(), pos });
            }
        } else {
            current.get_or_insert_with(|| Token { text: String::new(), pos }).text.push(c);
        }
    }
    out.extend(current);
    out
}

struct Cursor<'a> {
    tokens: &'a [Token],
    at: usize,
    end: Pos,
}

impl Cursor<'_> {
    fn err(&self, pos: Pos, message: impl Into<String>) -> ScriptError {
        ScriptError { kind: ScriptErrorKind::Parse, pos, message: message.into() }
    }

    fn here(&self) -> Pos {
        self.tokens.get(self.at).map_or(self.end, |t| t.pos)
    }

    fn next(&mut self, what: &str) -> Result<&Token, ScriptError> {
        let end = self.end;
        let tok = self.tokens.get(self.at).ok_or_else(|| self.err(end, format!("expected {what}")))?;
        self.at += 1;
        Ok(tok)
    }

    fn peek(&self) -> Option<&str> {
        self.tokens.get(self.at).map(|t| t.text.as_str())
    }

    fn expect(&mut self, text: &str) -> Result<(), ScriptError> {
        let pos = self.here();
        let tok = self.next(&format!("`{text}`"))?;
        if tok.text != text {
            let found = tok.text.clone();
            return Err(self.err(pos, format!("expected `{text}`, found `{found}`")));
        }
        Ok(())
    }

    fn number(&mut self, what: &str) -> Result<usize, ScriptError> {
        let pos = self.here();
        let tok = self.next(what)?.text.clone();
        tok.parse().map_err(|_| self.err(pos, format!("expected {what}, found `{tok}`")))
    }

    fn word(&mut self) -> Result<BinWord, ScriptError> {
        let pos = self.here();
        let tok = self.next("a binary word")?.text.clone();
        tok.parse().map_err(|_| self.err(pos, format!("`{tok}` is not a binary word")))
    }

    fn finish(&self) -> Result<(), ScriptError> {
        match self.tokens.get(self.at) {
            None => Ok(()),
            Some(t) => Err(self.err(t.pos, format!("unexpected `{}`", t.text))),
        }
    }
}

struct Parser {
    names: BTreeSet<String>,
}

impl Parser {
    fn name(&self, c: &mut Cursor<'_>) -> Result<String, ScriptError> {
        let pos = c.here();
        let tok = c.next("a tree name")?.text.clone();
        if !self.names.contains(&tok) {
            return Err(c.err(pos, format!("unknown tree `{tok}`")));
        }
        Ok(tok)
    }

    fn words_in_braces(&self, c: &mut Cursor<'_>) -> Result<Vec<(BinWord, Pos)>, ScriptError> {
        c.expect("{")?;
        let mut out = Vec::new();
        while c.peek() != Some("}") {
            let pos = c.here();
            out.push((c.word()?, pos));
        }
        c.expect("}")?;
        Ok(out)
    }

    fn entries(&self, c: &mut Cursor<'_>) -> Result<Vec<i8>, ScriptError> {
        c.expect("[")?;
        let mut out = Vec::new();
        while c.peek() != Some("]") {
            let pos = c.here();
            let tok = c.next("a silver entry")?.text.clone();
            match tok.parse::<i8>() {
                Ok(e) if (-1..=1).contains(&e) => out.push(e),
                _ => return Err(c.err(pos, format!("silver entries are -1, 0 or 1, found `{tok}`"))),
            }
        }
        c.expect("]")?;
        Ok(out)
    }

    fn expr(&self, c: &mut Cursor<'_>) -> Result<TreeExpr, ScriptError> {
        let pos = c.here();
        let head = c.next("a tree expression")?.text.clone();
        match head.as_str() {
            "full" => Ok(TreeExpr::Full),
            "words" => {
                let ws = self.words_in_braces(c)?;
                let Some((first, _)) = ws.first() else {
                    return Err(c.err(pos, "words{} needs at least one word"));
                };
                let depth = first.len();
                if let Some((w, p)) = ws.iter().find(|(w, _)| w.len() != depth) {
                    return Err(c.err(*p, format!("word {w} does not have length {depth}")));
                }
                Ok(TreeExpr::Words(ws.into_iter().map(|(w, _)| w).collect()))
            }
            "blocks" => {
                c.expect("(")?;
                let kpos = c.here();
                let k = c.number("a block length")?;
                if k == 0 {
                    return Err(c.err(kpos, "block length must be at least 1"));
                }
                c.expect(")")?;
                let ws = self.words_in_braces(c)?;
                if ws.is_empty() {
                    return Err(c.err(pos, "blocks need at least one word"));
                }
                if let Some((w, p)) = ws.iter().find(|(w, _)| w.len() != k) {
                    return Err(c.err(*p, format!("block {w} does not have length {k}")));
                }
                Ok(TreeExpr::Blocks(k, ws.into_iter().map(|(w, _)| w).collect()))
            }
            "silver" => {
                let prefix = self.entries(c)?;
                c.expect("repeat")?;
                let period = self.entries(c)?;
                if period.is_empty() {
                    return Err(c.err(pos, "silver period must be nonempty"));
                }
                Ok(TreeExpr::Silver(prefix, period))
            }
            "product" => {
                c.expect("(")?;
                let a = self.expr(c)?;
                c.expect(",")?;
                let b = self.expr(c)?;
                c.expect(")")?;
                Ok(TreeExpr::Product(Box::new(a), Box::new(b)))
            }
            "subtree" => {
                c.expect("(")?;
                let a = self.expr(c)?;
                c.expect(",")?;
                let w = c.word()?;
                c.expect(")")?;
                Ok(TreeExpr::Subtree(Box::new(a), w))
            }
            name if self.names.contains(name) => Ok(TreeExpr::Name(name.to_string())),
            other => Err(c.err(pos, format!("unknown tree `{other}`"))),
        }
    }

    fn query(&self, c: &mut Cursor<'_>) -> Result<QueryKind, ScriptError> {
        let pos = c.here();
        let head = c.next("a query")?.text.clone();
        let kind = match head.as_str() {
            "classify" => {
                let tree = self.name(c)?;
                c.expect("depth")?;
                QueryKind::Classify { tree, depth: c.number("a depth")? }
            }
            "measure" => {
                let tree = self.name(c)?;
                c.expect("cylinder")?;
                QueryKind::Measure { tree, word: c.word()? }
            }
            "trace" => {
                let x = self.name(c)?;
                c.expect("in")?;
                let p = self.name(c)?;
                let depth = match c.peek() {
                    Some("depth") => {
                        c.expect("depth")?;
                        Some(c.number("a depth")?)
                    }
                    _ => None,
                };
                QueryKind::Trace { x, p, depth }
            }
            "trace-exact" => {
                let x = self.name(c)?;
                c.expect("in")?;
                QueryKind::TraceExact { x, p: self.name(c)? }
            }
            "lemma1" => {
                let x = self.name(c)?;
                c.expect("in")?;
                let p = self.name(c)?;
                c.expect("k")?;
                let k = c.number("a window length")?;
                c.expect("rounds")?;
                QueryKind::Lemma1 { x, p, k, rounds: c.number("a round count")? }
            }
            "table1" => QueryKind::Table1,
            "table2" => QueryKind::Table2,
            "phi" => QueryKind::Phi(c.word()?),
            "lusin" => {
                c.expect("stages")?;
                QueryKind::Lusin { stages: c.number("a stage count")? }
            }
            "product-check" => {
                let a = self.name(c)?;
                let b = self.name(c)?;
                c.expect("depth")?;
                QueryKind::ProductCheck { a, b, depth: c.number("a depth")? }
            }
            other => return Err(c.err(pos, format!("unknown query `{other}`"))),
        };
        Ok(kind)
    }
}

fn valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    chars.next().is_some_and(|c| c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !KEYWORDS.contains(&name)
}

/// Parses a script. Names must be declared before use.
pub fn parse(text: &str) -> Result<Script, ScriptError> {
    let mut parser = Parser { names: BUILTINS.iter().map(|s| s.to_string()).collect() };
    let mut script = Script::default();
    for (i, line) in text.lines().enumerate() {
        let tokens = tokenize(line, i + 1);
        let end = Pos { line: i + 1, col: line.chars().count() + 1 };
        let mut c = Cursor { tokens: &tokens, at: 0, end };
        let Some(first) = c.peek() else { continue };
        let pos = c.here();
        match first {
            "tree" => {
                c.expect("tree")?;
                let npos = c.here();
                let name = c.next("a tree name")?.text.clone();
                if !valid_name(&name) {
                    return Err(c.err(npos, format!("`{name}` is not a valid tree name")));
                }
                if parser.names.contains(&name) {
                    return Err(c.err(npos, format!("duplicate tree name `{name}`")));
                }
                c.expect("=")?;
                let expr = parser.expr(&mut c)?;
                c.finish()?;
                parser.names.insert(name.clone());
                script.decls.push(Decl { name, expr, pos });
            }
            "query" => {
                c.expect("query")?;
                let kind = parser.query(&mut c)?;
                c.finish()?;
                script.queries.push(Query { kind, pos });
            }
            other => return Err(c.err(pos, format!("expected `tree` or `query`, found `{other}`"))),
        }
    }
    Ok(script)
}
