use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use super::parse::{ScriptError, ScriptErrorKind};
use super::{QueryKind, Script, TreeExpr};
use crate::constructions::{self, Named};
use crate::error::{Error, Result};
use crate::measure::{self, replay, ProductMeasure, TraceResult};
use crate::rational::Rational;
use crate::splits;
use crate::trees::{Tree, TreePresentation};

/// Node cap for `lusin` queries.
pub const LUSIN_CAP: usize = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunOptions {
    /// Worker threads; 0 lets rayon decide.
    pub threads: usize,
    /// Largest depth any query may ask for; also the staircase horizon.
    pub max_depth: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { threads: 0, max_depth: constructions::STAIRCASE_HORIZON }
    }
}

/// A script with every tree compiled.
pub struct CompiledScript {
    pub script: Script,
    trees: BTreeMap<String, Tree>,
    options: RunOptions,
}

fn resolve(expr: &TreeExpr, trees: &BTreeMap<String, Tree>) -> Result<TreePresentation> {
    Ok(match expr {
        TreeExpr::Full => TreePresentation::Full,
        TreeExpr::Words(ws) => TreePresentation::explicit(ws.iter().cloned())?,
        TreeExpr::Blocks(k, ws) => TreePresentation::blocks(*k, ws.iter().cloned())?,
        TreeExpr::Silver(a, b) => TreePresentation::silver(a.clone(), b.clone())?,
        TreeExpr::Product(a, b) => TreePresentation::product(resolve(a, trees)?, resolve(b, trees)?),
        TreeExpr::Subtree(a, w) => TreePresentation::subtree(resolve(a, trees)?, w.clone()),
        TreeExpr::Name(n) => trees[n].presentation().clone(),
    })
}

impl CompiledScript {
    pub fn new(script: Script, options: RunOptions) -> std::result::Result<Self, ScriptError> {
        let mut trees = BTreeMap::new();
        trees.insert("FULL".to_string(), Tree::full());
        for name in Named::ALL {
            let tree = match name {
                Named::BStaircase => {
                    constructions::staircase(options.max_depth.min(constructions::STAIRCASE_HORIZON))
                }
                _ => constructions::make_named(name).tree,
            };
            trees.insert(name.script_name().to_string(), tree);
        }
        for d in &script.decls {
            let tree = resolve(&d.expr, &trees).and_then(Tree::compile).map_err(|e| ScriptError {
                kind: ScriptErrorKind::Presentation,
                pos: d.pos,
                message: format!("tree {}: {e}", d.name),
            })?;
            trees.insert(d.name.clone(), tree);
        }
        Ok(CompiledScript { script, trees, options })
    }

    pub fn tree(&self, name: &str) -> Option<&Tree> {
        self.trees.get(name)
    }

    fn depth(&self, d: usize) -> Result<usize> {
        if d > self.options.max_depth {
            return Err(Error::CapExceeded(format!(
                "depth {d} exceeds the limit {}",
                self.options.max_depth
            )));
        }
        Ok(d)
    }

    fn execute(&self, index: usize, kind: &QueryKind) -> Result<(Vec<String>, Option<String>)> {
        let t = |name: &str| &self.trees[name];
        let mut body = Vec::new();
        let mut cert = None;
        match kind {
            QueryKind::Classify { tree, depth } => {
                let c = splits::classify(t(tree), self.depth(*depth)?)?;
                body.push(format!("balanced {}", c.balanced));
                body.push(format!("uniform {}", c.uniform));
                body.push(format!("silver {}", c.silver));
                body.push(format!("exactness {}", c.exactness));
                if let Some(pattern) = &c.split_pattern {
                    let lengths: Vec<String> =
                        pattern.split_lengths(*depth).iter().map(usize::to_string).collect();
                    body.push(format!("split-lengths {}", lengths.join(" ")));
                }
            }
            QueryKind::Measure { tree, word } => {
                self.depth(word.len())?;
                body.push(format!("= {}", measure::mu_cylinder(t(tree), word)?));
            }
            QueryKind::Trace { x, p, depth } => {
                let (p, x) = (t(p), t(x));
                let d = self.depth(depth.unwrap_or_else(|| measure::default_trace_depth(p, x)))?;
                hull_lines(&mut body, &measure::trace_upper(p, x, d)?);
            }
            QueryKind::TraceExact { x, p } => {
                let (p, x) = (t(p), t(x));
                match measure::trace_exact(p, x) {
                    Ok(r) => {
                        body.push(format!("= {}", r.exact.as_ref().expect("exact value")));
                        let last = r.upper_bounds.len() - 1;
                        body.push(format!("hull {last} {}", r.upper_bounds[last]));
                    }
                    Err(Error::Unsupported(msg)) => {
                        body.push(format!("exact unsupported: {msg}"));
                        let d = self.depth(measure::default_trace_depth(p, x))?;
                        hull_lines(&mut body, &measure::trace_upper(p, x, d)?);
                    }
                    Err(e) => return Err(e),
                }
            }
            QueryKind::Lemma1 { x, p, k, rounds } => {
                let (p, x) = (t(p), t(x));
                let c = measure::lemma1_refine(p, x, *k, *rounds)?;
                let text = c.to_string();
                let summary = replay::replay(&text, Some((p, x)))?;
                body.push(format!("rounds {}", c.rounds));
                body.push(format!("k {}", c.k));
                body.push(format!("cover-entries {}", c.entry_count()));
                body.push(format!("cover-nodes {}", c.cover.nodes.len()));
                body.push(format!("bound {}", c.bound));
                body.push(format!("target {}", c.target()));
                body.push(format!("replay ok bound {}", summary.bound));
                body.push(format!("certificate query-{index}"));
                cert = Some(text);
            }
            QueryKind::Table1 => {
                body.push("s w mu_Q fiber mu_P".to_string());
                for r in constructions::table1()? {
                    body.push(format!("{} {} {} {} {}", r.s, r.w, r.mu_q, r.fiber, r.mu_p));
                }
            }
            QueryKind::Table2 => {
                body.push("s w".to_string());
                for (s, w) in constructions::table2()? {
                    body.push(format!("{s} {w}"));
                }
                body.push("image L".to_string());
            }
            QueryKind::Phi(w) => {
                let v = constructions::phi(w);
                body.push(format!("= {v}"));
                body.push(format!("length {}", v.len()));
            }
            QueryKind::Lusin { stages } => {
                let tree = constructions::lusin_tree(*stages, LUSIN_CAP)?;
                for (n, s) in tree.stages.iter().enumerate() {
                    let limit = Rational::dyadic(n as u32 + 2);
                    if s.removed > limit {
                        return Err(Error::Integrity(format!("stage {n} removes {}", s.removed)));
                    }
                    let m: Vec<String> = s.branching.iter().take(8).map(u64::to_string).collect();
                    let more = if s.branching.len() > 8 { " …" } else { "" };
                    body.push(format!(
                        "stage {n} size {} removed {} limit {limit} M {}{more}",
                        s.nodes.len(),
                        s.removed,
                        m.join(" ")
                    ));
                }
                body.push(format!("total {}", tree.total_removed()));
            }
            QueryKind::ProductCheck { a, b, depth } => {
                let depth = self.depth(*depth)?;
                let pm = ProductMeasure::new(t(a), t(b))?;
                let mut checked = 0usize;
                for d in 0..=depth {
                    let nodes = pm.product_tree().nodes_at(d)?;
                    let total: Rational = nodes.iter().map(|v| pm.measure(v)).sum::<Result<_>>()?;
                    if !total.is_one() {
                        return Err(Error::Integrity(format!("depth {d} sums to {total}")));
                    }
                    checked += nodes.len();
                }
                body.push(format!("nodes {checked}"));
                body.push("agree".to_string());
            }
        }
        Ok((body, cert))
    }
}

fn hull_lines(body: &mut Vec<String>, r: &TraceResult) {
    for (d, b) in r.upper_bounds.iter().enumerate() {
        body.push(format!("hull {d} {b}"));
    }
    body.push(format!("bound {}", r.upper_bounds.last().expect("depth 0")));
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    Error { kind: &'static str, message: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueryReport {
    pub index: usize,
    pub line: usize,
    pub echo: String,
    pub body: Vec<String>,
    pub status: Status,
    pub certificate: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Report {
    pub queries: Vec<QueryReport>,
}

impl Report {
    pub fn all_ok(&self) -> bool {
        self.queries.iter().all(|q| q.status == Status::Ok)
    }

    pub fn exit_code(&self) -> i32 {
        if self.all_ok() {
            0
        } else {
            3
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for q in &self.queries {
            let _ = writeln!(out, "query {} (line {}): {}", q.index, q.line, q.echo);
            for l in &q.body {
                let _ = writeln!(out, "  {l}");
            }
            match &q.status {
                Status::Ok => out.push_str("  status ok\n"),
                Status::Error { kind, message } => {
                    let _ = writeln!(out, "  status error({kind}): {message}");
                }
            }
            out.push('\n');
        }
        let failed = self.queries.iter().filter(|q| q.status != Status::Ok).count();
        let _ = writeln!(out, "summary {} queries, {failed} failed", self.queries.len());
        out
    }

    /// All certificates, each preceded by a comment naming its query.
    pub fn certificates(&self) -> String {
        let mut out = String::new();
        for q in &self.queries {
            if let Some(c) = &q.certificate {
                let _ = writeln!(out, "# query-{} (line {}): {}", q.index, q.line, q.echo);
                out.push_str(c);
                out.push_str("\n\n");
            }
        }
        out
    }
}

/// Runs every query; a failing query does not stop the others. The report
/// keeps input order whatever the thread count.
pub fn run(compiled: &CompiledScript) -> Report {
    let queries = &compiled.script.queries;
    let evaluate = || -> Vec<QueryReport> {
        queries
            .par_iter()
            .enumerate()
            .map(|(i, q)| {
                let index = i + 1;
                let (body, status, certificate) = match compiled.execute(index, &q.kind) {
                    Ok((body, cert)) => (body, Status::Ok, cert),
                    Err(e) => (Vec::new(), Status::Error { kind: e.kind(), message: e.to_string() }, None),
                };
                QueryReport { index, line: q.pos.line, echo: q.kind.to_string(), body, status, certificate }
            })
            .collect()
    };
    let queries = match rayon::ThreadPoolBuilder::new().num_threads(compiled.options.threads).build() {
        Ok(pool) => pool.install(evaluate),
        Err(_) => evaluate(),
    };
    Report { queries }
}
