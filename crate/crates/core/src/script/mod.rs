//! A small line-oriented language for declaring trees and querying them.
//!
//! ```text
//! # comments run to the end of the line
//! tree K = blocks(3){000 001 011 111}
//! tree S = silver[-1 0]repeat[-1 1]
//! query measure K cylinder 011
//! query trace U in S depth 12
//! query lemma1 U in FULL k 2 rounds 4
//! ```
//!
//! Tree expressions are `full`, `words{…}`, `blocks(k){…}`,
//! `silver[…]repeat[…]`, `product(A,B)` and `subtree(A,w)`, where `A`, `B`
//! are nested expressions or names declared earlier. The built-in names are
//! `FULL`, `E`, `Q`, `PJ`, `U` and `BST`.

mod parse;
mod run;

use std::fmt;

use crate::trees::SilverEntry;
use crate::words::BinWord;

pub use parse::{parse, ScriptError, ScriptErrorKind};
pub use run::{run, CompiledScript, QueryReport, Report, RunOptions, Status};

pub const BUILTINS: [&str; 6] = ["FULL", "E", "Q", "PJ", "U", "BST"];

/// 1-based line and column.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TreeExpr {
    Full,
    Words(Vec<BinWord>),
    Blocks(usize, Vec<BinWord>),
    Silver(Vec<SilverEntry>, Vec<SilverEntry>),
    Product(Box<TreeExpr>, Box<TreeExpr>),
    Subtree(Box<TreeExpr>, BinWord),
    Name(String),
}

impl fmt::Display for TreeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn list<T: fmt::Display>(xs: &[T]) -> String {
            xs.iter().map(T::to_string).collect::<Vec<_>>().join(" ")
        }
        match self {
            TreeExpr::Full => f.write_str("full"),
            TreeExpr::Words(ws) => write!(f, "words{{{}}}", list(ws)),
            TreeExpr::Blocks(k, ws) => write!(f, "blocks({k}){{{}}}", list(ws)),
            TreeExpr::Silver(a, b) => write!(f, "silver[{}]repeat[{}]", list(a), list(b)),
            TreeExpr::Product(a, b) => write!(f, "product({a},{b})"),
            TreeExpr::Subtree(a, w) => write!(f, "subtree({a},{w})"),
            TreeExpr::Name(n) => f.write_str(n),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decl {
    pub name: String,
    pub expr: TreeExpr,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum QueryKind {
    Classify { tree: String, depth: usize },
    Measure { tree: String, word: BinWord },
    Trace { x: String, p: String, depth: Option<usize> },
    TraceExact { x: String, p: String },
    Lemma1 { x: String, p: String, k: usize, rounds: usize },
    Table1,
    Table2,
    Phi(BinWord),
    Lusin { stages: usize },
    ProductCheck { a: String, b: String, depth: usize },
}

impl fmt::Display for QueryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QueryKind::Classify { tree, depth } => write!(f, "classify {tree} depth {depth}"),
            QueryKind::Measure { tree, word } => write!(f, "measure {tree} cylinder {word}"),
            QueryKind::Trace { x, p, depth: Some(d) } => write!(f, "trace {x} in {p} depth {d}"),
            QueryKind::Trace { x, p, depth: None } => write!(f, "trace {x} in {p}"),
            QueryKind::TraceExact { x, p } => write!(f, "trace-exact {x} in {p}"),
            QueryKind::Lemma1 { x, p, k, rounds } => write!(f, "lemma1 {x} in {p} k {k} rounds {rounds}"),
            QueryKind::Table1 => f.write_str("table1"),
            QueryKind::Table2 => f.write_str("table2"),
            QueryKind::Phi(w) => write!(f, "phi {w}"),
            QueryKind::Lusin { stages } => write!(f, "lusin stages {stages}"),
            QueryKind::ProductCheck { a, b, depth } => write!(f, "product-check {a} {b} depth {depth}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Query {
    pub kind: QueryKind,
    pub pos: Pos,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Script {
    pub decls: Vec<Decl>,
    pub queries: Vec<Query>,
}

impl Script {
    /// The script without source positions, for structural comparison.
    pub fn structure(&self) -> (Vec<(&str, &TreeExpr)>, Vec<&QueryKind>) {
        (
            self.decls.iter().map(|d| (d.name.as_str(), &d.expr)).collect(),
            self.queries.iter().map(|q| &q.kind).collect(),
        )
    }
}

/// Canonical text: declarations first, then queries, one per line.
impl fmt::Display for Script {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.decls {
            writeln!(f, "tree {} = {}", d.name, d.expr)?;
        }
        for q in &self.queries {
            writeln!(f, "query {}", q.kind)?;
        }
        Ok(())
    }
}
