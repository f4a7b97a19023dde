//! Independent checker for serialized bound certificates.
//!
//! Works from the text form only. It recomputes the bound by a backward pass
//! over the cover DAG, the per-round records by a forward pass, and, when
//! the trees are supplied, re-derives every gain from `T_P` and checks that
//! the extensions cover every branch of `T_P ∩ T_X` below each element.

use std::collections::{BTreeMap, HashSet};

use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::trees::{Automaton, StateId, Tree};
use crate::words::BinWord;

/// What a successful replay established.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReplaySummary {
    pub rounds: usize,
    pub k: usize,
    pub entries: u128,
    pub bound: Rational,
    pub checked_against_trees: bool,
}

struct Ext {
    word: BinWord,
    gain: u32,
    target: usize,
}

struct Parsed {
    rounds: usize,
    k: usize,
    nodes: Vec<Option<Vec<Ext>>>,
    root: usize,
    log: Vec<(usize, u128, Rational)>,
    entries: u128,
    listed: Vec<(BinWord, u32)>,
    bound: Rational,
}

fn bad(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Integrity(format!("certificate line {}: {msg}", line + 1))
}

fn field<T: std::str::FromStr>(line: usize, text: &str, key: &str) -> Result<T> {
    text.strip_prefix(key)
        .and_then(|rest| rest.strip_prefix(' '))
        .and_then(|rest| rest.parse().ok())
        .ok_or_else(|| bad(line, format!("expected `{key} <value>`, got `{text}`")))
}

fn parse(text: &str) -> Result<Parsed> {
    let lines: Vec<&str> = text.lines().map(str::trim_end).collect();
    let mut i = 0;
    let mut next = || {
        let l = lines.get(i).copied().ok_or_else(|| bad(i, "unexpected end"));
        i += 1;
        l.map(|l| (i - 1, l))
    };
    let (n, l) = next()?;
    if l != "bound-certificate" {
        return Err(bad(n, "missing header"));
    }
    let (n, l) = next()?;
    let rounds: usize = field(n, l, "rounds")?;
    let (n, l) = next()?;
    let k: usize = field(n, l, "k")?;
    let (n, l) = next()?;
    let count: usize = field(n, l, "nodes")?;
    let mut nodes = Vec::with_capacity(count);
    for id in 0..count {
        let (n, l) = next()?;
        let mut toks = l.split_whitespace();
        if toks.next() != Some("node") || toks.next() != Some(id.to_string().as_str()) {
            return Err(bad(n, format!("expected node {id}")));
        }
        let rest: Vec<&str> = toks.collect();
        if rest == ["leaf"] {
            nodes.push(None);
            continue;
        }
        let mut exts = Vec::new();
        for tok in rest {
            let (word, tail) = tok.split_once('+').ok_or_else(|| bad(n, tok))?;
            let (gain, target) = tail.split_once('>').ok_or_else(|| bad(n, tok))?;
            exts.push(Ext {
                word: word.parse().map_err(|_| bad(n, tok))?,
                gain: gain.parse().map_err(|_| bad(n, tok))?,
                target: target.parse().map_err(|_| bad(n, tok))?,
            });
        }
        nodes.push(Some(exts));
    }
    let (n, l) = next()?;
    let root: usize = field(n, l, "root")?;
    let mut log = Vec::new();
    let (mut n, mut l) = next()?;
    while l.starts_with("round ") {
        let t: Vec<&str> = l.split_whitespace().collect();
        if t.len() != 6 || t[2] != "entries" || t[4] != "bound" {
            return Err(bad(n, "malformed round record"));
        }
        let round = t[1].parse().map_err(|_| bad(n, t[1]))?;
        let entries = t[3].parse().map_err(|_| bad(n, t[3]))?;
        let bound = t[5].parse().map_err(|_| bad(n, t[5]))?;
        log.push((round, entries, bound));
        (n, l) = next()?;
    }
    let entries: u128 = field(n, l, "entries")?;
    let mut listed = Vec::new();
    (n, l) = next()?;
    while let Some(e) = l.strip_prefix("entry ") {
        let (w, lv) = e.split_once(':').ok_or_else(|| bad(n, e))?;
        listed.push((w.parse().map_err(|_| bad(n, w))?, lv.parse().map_err(|_| bad(n, lv))?));
        (n, l) = next()?;
    }
    let bound: Rational = field(n, l, "bound")?;
    let (n, l) = next()?;
    if l != "end" {
        return Err(bad(n, "missing end"));
    }
    Ok(Parsed { rounds, k, nodes, root, log, entries, listed, bound })
}

/// Replays a certificate. With `trees = Some((P, X))` the cover is also
/// checked against the presentations it was built for.
pub fn replay(text: &str, trees: Option<(&Tree, &Tree)>) -> Result<ReplaySummary> {
    let c = parse(text)?;
    if c.nodes.first().is_none_or(Option::is_some) {
        return Err(Error::Integrity("node 0 must be the only leaf".into()));
    }
    if c.k == 0 || c.root >= c.nodes.len() {
        return Err(Error::Integrity("bad window length or root".into()));
    }

    // backward pass: depth to the leaf (none for an empty cover), subtree
    // bound and count
    let mut depth: Vec<Option<usize>> = vec![Some(0); c.nodes.len()];
    let mut value = vec![Rational::one(); c.nodes.len()];
    let mut count = vec![1u128; c.nodes.len()];
    for (id, node) in c.nodes.iter().enumerate().skip(1) {
        let exts = node.as_ref().ok_or_else(|| Error::Integrity(format!("extra leaf {id}")))?;
        let mut d = None;
        let mut v = Rational::zero();
        let mut n: u128 = 0;
        let mut seen = HashSet::new();
        for e in exts {
            if e.target >= id {
                return Err(Error::Integrity(format!("node {id} points forward to {}", e.target)));
            }
            if e.word.len() < c.k || !seen.insert(e.word.clone()) {
                return Err(Error::Integrity(format!("node {id}: bad extension {}", e.word)));
            }
            if let Some(t) = depth[e.target] {
                if d.is_some_and(|d| d != t + 1) {
                    return Err(Error::Integrity(format!("node {id} has uneven depth")));
                }
                d = Some(t + 1);
            }
            v = v + &value[e.target] * &Rational::dyadic(e.gain);
            n = n
                .checked_add(count[e.target])
                .ok_or_else(|| Error::Integrity("cover size overflow".into()))?;
        }
        depth[id] = d;
        value[id] = v;
        count[id] = n;
    }
    if depth[c.root].is_some_and(|d| d != c.rounds) || (c.root == 0 && c.rounds != 0) {
        return Err(Error::Integrity(format!("cover depth {:?} but {} rounds", depth[c.root], c.rounds)));
    }
    if value[c.root] != c.bound {
        return Err(Error::Integrity(format!("bound {} recomputes to {}", c.bound, value[c.root])));
    }
    if count[c.root] != c.entries {
        return Err(Error::Integrity(format!("{} entries recount to {}", c.entries, count[c.root])));
    }
    let ratio = Rational::one() - Rational::dyadic(c.k as u32);
    if c.bound > ratio.pow(c.rounds as u32) {
        return Err(Error::Integrity(format!("bound {} above the round target", c.bound)));
    }

    // forward pass: per-round records
    let mut frontier: BTreeMap<usize, (u128, Rational)> = BTreeMap::from([(c.root, (1, Rational::one()))]);
    if c.log.len() != c.rounds + 1 {
        return Err(Error::Integrity("round log length".into()));
    }
    for (expected, (round, entries, bound)) in c.log.iter().enumerate() {
        let n: u128 = frontier.values().map(|(n, _)| *n).sum();
        let b: Rational = frontier.values().map(|(_, m)| m).sum();
        if *round != expected || (*entries, bound) != (n, &b) {
            return Err(Error::Integrity(format!("round {round} recomputes to {n} entries, bound {b}")));
        }
        let mut next: BTreeMap<usize, (u128, Rational)> = BTreeMap::new();
        for (node, (n, m)) in frontier {
            for e in c.nodes[node].iter().flatten() {
                let slot = next.entry(e.target).or_insert((0, Rational::zero()));
                slot.0 += n;
                slot.1 = &slot.1 + &(&m * &Rational::dyadic(e.gain));
            }
        }
        frontier = next;
    }

    if !c.listed.is_empty() {
        let mut expanded = Vec::new();
        expand(&c, c.root, BinWord::empty(), 0, &mut expanded);
        if expanded != c.listed {
            return Err(Error::Integrity("listed entries differ from the cover".into()));
        }
    }

    if let Some((p, x)) = trees {
        let mut checker = Checker { c: &c, pa: p.automaton(), xa: x.automaton(), done: HashSet::new() };
        checker.check(c.root, (checker.pa.start(), Some(checker.xa.start())))?;
    }

    Ok(ReplaySummary {
        rounds: c.rounds,
        k: c.k,
        entries: c.entries,
        bound: c.bound,
        checked_against_trees: trees.is_some(),
    })
}

fn expand(c: &Parsed, node: usize, prefix: BinWord, level: u32, out: &mut Vec<(BinWord, u32)>) {
    match &c.nodes[node] {
        None => out.push((prefix, level)),
        Some(exts) => {
            for e in exts {
                expand(c, e.target, prefix.concat(&e.word), level + e.gain, out);
            }
        }
    }
}

type Key = (StateId, Option<StateId>);

struct Checker<'a> {
    c: &'a Parsed,
    pa: &'a Automaton,
    xa: &'a Automaton,
    done: HashSet<(usize, Key)>,
}

impl Checker<'_> {
    fn step(&self, (p, x): Key, bit: u8) -> Result<Option<Key>> {
        if self.pa.is_horizon(p) || x.is_some_and(|x| self.xa.is_horizon(x)) {
            return Err(Error::Integrity("cover reaches past a horizon".into()));
        }
        let Some(pn) = self.pa.next(p, bit) else { return Ok(None) };
        Ok(Some((pn, x.and_then(|x| self.xa.next(x, bit)))))
    }

    fn check(&mut self, node: usize, key: Key) -> Result<()> {
        if !self.done.insert((node, key)) {
            return Ok(());
        }
        let Some(exts) = &self.c.nodes[node] else { return Ok(()) };
        // every extension is a node of T_P with the stated gain
        let mut targets = Vec::with_capacity(exts.len());
        for e in exts {
            let mut k = key;
            let mut gain = 0;
            for &b in e.word.bits() {
                gain += u32::from(self.pa.is_split(k.0));
                k = self
                    .step(k, b)?
                    .ok_or_else(|| Error::Integrity(format!("extension {} leaves T_P", e.word)))?;
            }
            if gain != e.gain {
                return Err(Error::Integrity(format!("extension {} gains {gain}, not {}", e.word, e.gain)));
            }
            targets.push((e.target, k));
        }
        self.covers(key, &BinWord::empty(), exts, &mut Walk::default())?;
        for (t, k) in targets {
            self.check(t, k)?;
        }
        Ok(())
    }

    /// Every branch of `T_P ∩ T_X` from `key` passes through an extension.
    /// Past the last extension a branch must leave `X` or die, so a loop
    /// inside `T_P ∩ T_X` there is an uncovered point of `X ∩ P`.
    fn covers(&self, key: Key, rel: &BinWord, exts: &[Ext], walk: &mut Walk) -> Result<()> {
        if key.1.is_none() || exts.iter().any(|e| e.word == *rel) {
            return Ok(());
        }
        let ahead = exts.iter().any(|e| e.word.len() > rel.len() && rel.is_prefix_of(&e.word));
        if !ahead {
            if walk.finite.contains(&key) {
                return Ok(());
            }
            if walk.stack.contains(&key) {
                return Err(Error::Integrity(format!("branch {rel} of X is not covered")));
            }
        }
        walk.stack.push(key);
        for b in [0, 1] {
            if let Some(next) = self.step(key, b)? {
                self.covers(next, &rel.child(b), exts, walk)?;
            }
        }
        walk.stack.pop();
        if !ahead {
            walk.finite.insert(key);
        }
        Ok(())
    }
}

/// Search state for [`Checker::covers`].
#[derive(Default)]
struct Walk {
    stack: Vec<Key>,
    /// Keys below which `T_P ∩ T_X` is finite.
    finite: HashSet<Key>,
}
