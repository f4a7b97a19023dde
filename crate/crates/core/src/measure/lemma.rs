//! Cover refinement for closed sets that keep missing a window of `P`.
//!
//! A cover element `u` is refined by searching below it, breadth first and
//! branch by branch, for the shallowest node `v` with a window `w ∈ 2^k`
//! such that `v⌢w ∈ T_P \ T_X`. Each such `v` is replaced by its extensions
//! `v⌢w'` with `w' ≠ w` that stay in `T_P`. The search result depends only
//! on the product state of `u`, so the cover after `m` rounds is stored as
//! a DAG over `(rounds left, product state)` instead of as an explicit list.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::trees::{Automaton, StateId, Tree};
use crate::words::BinWord;

/// Cover lists longer than this are not spelled out in certificates.
pub const EXPLICIT_ENTRY_LIMIT: u128 = 4096;

/// Path enumeration cap for a single refinement search.
const SEARCH_CAP: usize = 1 << 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverExtension {
    pub word: BinWord,
    /// Branching points passed between the parent and `word`.
    pub gain: u32,
    pub target: usize,
}

/// Node 0 is the leaf; every other node lists its extensions.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct CoverNode {
    pub extensions: Vec<CoverExtension>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cover {
    pub nodes: Vec<CoverNode>,
    pub root: usize,
}

impl Cover {
    /// Explicit `(node, level)` pairs in lexicographic order, or `None`
    /// when there are more than `limit`.
    pub fn entries(&self, limit: u128) -> Option<Vec<(BinWord, u32)>> {
        if self.count(self.root)? > limit {
            return None;
        }
        let mut out = Vec::new();
        self.expand(self.root, &BinWord::empty(), 0, &mut out);
        Some(out)
    }

    fn expand(&self, node: usize, prefix: &BinWord, level: u32, out: &mut Vec<(BinWord, u32)>) {
        if node == 0 {
            out.push((prefix.clone(), level));
            return;
        }
        for e in &self.nodes[node].extensions {
            self.expand(e.target, &prefix.concat(&e.word), level + e.gain, out);
        }
    }

    fn count(&self, node: usize) -> Option<u128> {
        let mut counts: Vec<u128> = vec![1; node + 1];
        for i in 1..=node {
            let mut c: u128 = 0;
            for e in &self.nodes[i].extensions {
                c = c.checked_add(counts[e.target])?;
            }
            counts[i] = c;
        }
        Some(counts[node])
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundRecord {
    pub round: usize,
    pub entries: u128,
    pub bound: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundCertificate {
    pub rounds: usize,
    pub k: usize,
    pub cover: Cover,
    pub bound: Rational,
    pub replay_log: Vec<RoundRecord>,
}

impl BoundCertificate {
    /// `((2^k − 1)/2^k)^rounds`.
    pub fn target(&self) -> Rational {
        let ratio = Rational::one() - Rational::dyadic(self.k as u32);
        ratio.pow(self.rounds as u32)
    }

    pub fn entry_count(&self) -> u128 {
        self.replay_log.last().map_or(1, |r| r.entries)
    }
}

impl fmt::Display for BoundCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "bound-certificate")?;
        writeln!(f, "rounds {}", self.rounds)?;
        writeln!(f, "k {}", self.k)?;
        writeln!(f, "nodes {}", self.cover.nodes.len())?;
        for (i, node) in self.cover.nodes.iter().enumerate() {
            if i == 0 {
                writeln!(f, "node 0 leaf")?;
                continue;
            }
            write!(f, "node {i}")?;
            for e in &node.extensions {
                write!(f, " {}+{}>{}", e.word, e.gain, e.target)?;
            }
            writeln!(f)?;
        }
        writeln!(f, "root {}", self.cover.root)?;
        for r in &self.replay_log {
            writeln!(f, "round {} entries {} bound {}", r.round, r.entries, r.bound)?;
        }
        writeln!(f, "entries {}", self.entry_count())?;
        if let Some(entries) = self.cover.entries(EXPLICIT_ENTRY_LIMIT) {
            for (w, l) in entries {
                writeln!(f, "entry {w}:{l}")?;
            }
        }
        writeln!(f, "bound {}", self.bound)?;
        write!(f, "end")
    }
}

type Key = (StateId, Option<StateId>);

struct Escape {
    word: BinWord,
    gain: u32,
    target: Key,
}

struct Refiner<'a> {
    pa: &'a Automaton,
    xa: &'a Automaton,
    windows: Vec<BinWord>,
    escapes: HashMap<Key, Option<BinWord>>,
    searches: HashMap<Key, std::rc::Rc<Vec<Escape>>>,
    nodes: Vec<CoverNode>,
    ids: HashMap<(usize, Key), usize>,
}

impl<'a> Refiner<'a> {
    fn step(&self, (p, x): Key, bit: u8) -> Result<Option<Key>> {
        if self.pa.is_horizon(p) {
            return Err(horizon(self.pa, p));
        }
        let Some(pn) = self.pa.next(p, bit) else { return Ok(None) };
        let xn = match x {
            Some(x) if self.xa.is_horizon(x) => return Err(horizon(self.xa, x)),
            Some(x) => self.xa.next(x, bit),
            None => None,
        };
        Ok(Some((pn, xn)))
    }

    /// Walks `word` inside `T_P`, returning the end state and the number of
    /// branching points passed.
    fn walk(&self, mut key: Key, word: &BinWord) -> Result<Option<(Key, u32)>> {
        let mut gain = 0;
        for &b in word.bits() {
            if self.pa.is_horizon(key.0) {
                return Err(horizon(self.pa, key.0));
            }
            gain += u32::from(self.pa.is_split(key.0));
            match self.step(key, b)? {
                Some(next) => key = next,
                None => return Ok(None),
            }
        }
        Ok(Some((key, gain)))
    }

    /// Least window `w` with `v⌢w ∈ T_P \ T_X`.
    fn escape(&mut self, key: Key) -> Result<Option<BinWord>> {
        if let Some(found) = self.escapes.get(&key) {
            return Ok(found.clone());
        }
        let mut found = None;
        for w in &self.windows {
            if let Some(((_, None), _)) = self.walk(key, w)? {
                found = Some(w.clone());
                break;
            }
        }
        self.escapes.insert(key, found.clone());
        Ok(found)
    }

    /// Non-escaping extensions of the shallowest escape nodes below `key`.
    fn search(&mut self, key: Key, word: &BinWord) -> Result<std::rc::Rc<Vec<Escape>>> {
        if let Some(found) = self.searches.get(&key) {
            return Ok(found.clone());
        }
        let mut out = Vec::new();
        let mut stack = Vec::new();
        self.descend(key, BinWord::empty(), 0, word, &mut stack, &mut out)?;
        out.sort_by(|a, b| a.word.cmp(&b.word));
        let out = std::rc::Rc::new(out);
        self.searches.insert(key, out.clone());
        Ok(out)
    }

    fn descend(
        &mut self,
        key: Key,
        rel: BinWord,
        gain: u32,
        origin: &BinWord,
        stack: &mut Vec<Key>,
        out: &mut Vec<Escape>,
    ) -> Result<()> {
        if let Some(w) = self.escape(key)? {
            for other in &self.windows {
                if *other == w {
                    continue;
                }
                if let Some((target, g)) = self.walk(key, other)? {
                    out.push(Escape { word: rel.concat(other), gain: gain + g, target });
                    if out.len() > SEARCH_CAP {
                        return Err(Error::CapExceeded(format!("refinement below {origin}")));
                    }
                }
            }
            return Ok(());
        }
        if stack.contains(&key) {
            // an escape-free loop: some branch through `origin` never meets a window
            return Err(Error::WitnessNotFound(origin.clone()));
        }
        if self.pa.is_horizon(key.0) {
            return Err(horizon(self.pa, key.0));
        }
        stack.push(key);
        let split = u32::from(self.pa.is_split(key.0));
        for b in self.pa.child_bits(key.0) {
            if let Some(next) = self.step(key, b)? {
                self.descend(next, rel.child(b), gain + split, origin, stack, out)?;
            }
        }
        stack.pop();
        Ok(())
    }

    fn node(&mut self, rounds: usize, key: Key, word: &BinWord) -> Result<usize> {
        if rounds == 0 {
            return Ok(0);
        }
        if let Some(&id) = self.ids.get(&(rounds, key)) {
            return Ok(id);
        }
        let found = self.search(key, word)?;
        let mut extensions = Vec::with_capacity(found.len());
        for e in found.iter() {
            let target = self.node(rounds - 1, e.target, &word.concat(&e.word))?;
            extensions.push(CoverExtension { word: e.word.clone(), gain: e.gain, target });
        }
        self.nodes.push(CoverNode { extensions });
        let id = self.nodes.len() - 1;
        self.ids.insert((rounds, key), id);
        Ok(id)
    }
}

fn horizon(a: &Automaton, s: StateId) -> Error {
    let node = a.access_word(s).clone();
    let depth = node.len();
    Error::BeyondHorizon { node, depth }
}

/// Runs `rounds` refinement rounds of the cover `{ε}` of `X∩P`.
pub fn lemma1_refine(p: &Tree, x: &Tree, k: usize, rounds: usize) -> Result<BoundCertificate> {
    p.require_perfect()?;
    if k == 0 || k > 16 {
        return Err(Error::Unsupported(format!("window length {k} outside 1..=16")));
    }
    let pa = p.automaton();
    let xa = x.automaton();
    let mut refiner = Refiner {
        pa,
        xa,
        windows: BinWord::all_of_length(k).collect(),
        escapes: HashMap::new(),
        searches: HashMap::new(),
        nodes: vec![CoverNode::default()],
        ids: HashMap::new(),
    };
    let root = refiner.node(rounds, (pa.start(), Some(xa.start())), &BinWord::empty())?;
    let cover = Cover { nodes: refiner.nodes, root };
    let replay_log = forward_rounds(&cover, rounds)?;
    let bound = replay_log.last().expect("round 0").bound.clone();
    let cert = BoundCertificate { rounds, k, cover, bound, replay_log };
    if cert.bound > cert.target() {
        return Err(Error::Integrity(format!("cover bound {} exceeds {}", cert.bound, cert.target())));
    }
    Ok(cert)
}

/// Cover size and measure after each round, by pushing mass down the DAG.
fn forward_rounds(cover: &Cover, rounds: usize) -> Result<Vec<RoundRecord>> {
    let mut frontier: BTreeMap<usize, (u128, Rational)> =
        BTreeMap::from([(cover.root, (1, Rational::one()))]);
    let mut log = Vec::with_capacity(rounds + 1);
    for round in 0..=rounds {
        let entries = frontier.values().try_fold(0u128, |acc, (c, _)| acc.checked_add(*c));
        let entries = entries.ok_or_else(|| Error::CapExceeded("cover size".into()))?;
        let bound = frontier.values().map(|(_, m)| m).sum();
        log.push(RoundRecord { round, entries, bound });
        if round == rounds {
            break;
        }
        let mut next: BTreeMap<usize, (u128, Rational)> = BTreeMap::new();
        for (node, (count, mass)) in frontier {
            for e in &cover.nodes[node].extensions {
                let slot = next.entry(e.target).or_insert((0, Rational::zero()));
                slot.0 = slot.0.checked_add(count).ok_or_else(|| Error::CapExceeded("cover size".into()))?;
                slot.1 = &slot.1 + &(&mass * &Rational::dyadic(e.gain));
            }
        }
        frontier = next;
    }
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::TreePresentation;

    fn w(s: &str) -> BinWord {
        s.parse().unwrap()
    }

    fn u() -> Tree {
        Tree::compile(TreePresentation::blocks(2, [w("00"), w("11")]).unwrap()).unwrap()
    }

    #[test]
    fn full_over_u_gives_three_quarters_per_round() {
        for m in 0..=8 {
            let cert = lemma1_refine(&Tree::full(), &u(), 2, m).unwrap();
            assert_eq!(cert.bound, Rational::new(3, 4).pow(m as u32));
            assert_eq!(cert.entry_count(), 3u128.pow(m as u32));
        }
    }

    #[test]
    fn first_round_cover() {
        let cert = lemma1_refine(&Tree::full(), &u(), 2, 1).unwrap();
        let entries = cert.cover.entries(100).unwrap();
        assert_eq!(entries, vec![(w("00"), 2), (w("10"), 2), (w("11"), 2)]);
    }

    #[test]
    fn nothing_escapes_the_full_tree() {
        let err = lemma1_refine(&u(), &Tree::full(), 2, 3).unwrap_err();
        assert_eq!(err, Error::WitnessNotFound(BinWord::empty()));
    }

    #[test]
    fn zero_rounds_is_the_root() {
        let cert = lemma1_refine(&Tree::full(), &u(), 3, 0).unwrap();
        assert!(cert.bound.is_one());
        assert_eq!(cert.cover.entries(10).unwrap(), vec![(BinWord::empty(), 0)]);
    }

    #[test]
    fn text_form_is_stable() {
        let cert = lemma1_refine(&Tree::full(), &u(), 2, 1).unwrap();
        let text = cert.to_string();
        assert!(text.starts_with("bound-certificate\nrounds 1\nk 2\n"));
        assert!(text.contains("entry 10:2"));
        assert!(text.ends_with("bound 3/4\nend"));
    }
}
