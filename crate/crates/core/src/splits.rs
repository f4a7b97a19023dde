//! Branching-point analysis: `Split_i(P)`, `s_i(P)`, `S_i(P)`, levels,
//! regularity classes and the canonical embedding `2^<ω → Split(P)`.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::trees::{Exactness, StateId, Tree};
use crate::words::BinWord;

/// The branching points on one level together with their extreme lengths.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitLevel {
    pub points: BTreeSet<BinWord>,
    /// `s_i(P)`
    pub min_len: usize,
    /// `S_i(P)`
    pub max_len: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitProfile {
    pub levels: Vec<SplitLevel>,
    pub exactness: Exactness,
}

impl SplitProfile {
    pub fn s(&self, i: usize) -> usize {
        self.levels[i].min_len
    }

    pub fn big_s(&self, i: usize) -> usize {
        self.levels[i].max_len
    }
}

/// Split flags by length: `transient` then `cycle` repeated forever.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitPattern {
    pub transient: Vec<bool>,
    pub cycle: Vec<bool>,
}

impl SplitPattern {
    /// Lengths `< limit` at which every node splits.
    pub fn split_lengths(&self, limit: usize) -> Vec<usize> {
        (0..limit).filter(|&n| self.splits_at(n) == Some(true)).collect()
    }

    pub fn splits_at(&self, n: usize) -> Option<bool> {
        if n < self.transient.len() {
            Some(self.transient[n])
        } else if self.cycle.is_empty() {
            None
        } else {
            Some(self.cycle[(n - self.transient.len()) % self.cycle.len()])
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Classification {
    pub balanced: bool,
    pub uniform: bool,
    pub silver: bool,
    pub exactness: Exactness,
    /// Present for uniform trees.
    pub split_pattern: Option<SplitPattern>,
}

/// The first branching point extending the node `w` (possibly `w` itself).
pub fn first_split(tree: &Tree, w: &BinWord) -> Result<BinWord> {
    let a = tree.automaton();
    let mut s = tree.state_of(w)?;
    let mut node = w.clone();
    // a forced path longer than the state count would be a cycle
    for _ in 0..=a.num_states() {
        if a.is_horizon(s) {
            return Err(Error::BeyondHorizon { depth: node.len(), node });
        }
        let bits = a.child_bits(s);
        match bits.as_slice() {
            [_, _] => return Ok(node),
            [b] => {
                node.push(*b);
                s = a.next(s, *b).expect("child exists");
            }
            _ => return Err(Error::NotPerfect(node)),
        }
    }
    Err(Error::NotPerfect(w.clone()))
}

/// `Split_i`, `s_i`, `S_i` for `i < levels`.
pub fn split_profile(tree: &Tree, levels: usize) -> Result<SplitProfile> {
    tree.require_perfect()?;
    let mut out = Vec::with_capacity(levels);
    let mut current: BTreeSet<BinWord> = BTreeSet::new();
    for i in 0..levels {
        current = if i == 0 {
            BTreeSet::from([first_split(tree, &BinWord::empty())?])
        } else {
            current
                .iter()
                .flat_map(|s| [s.child(0), s.child(1)])
                .map(|c| first_split(tree, &c))
                .collect::<Result<_>>()?
        };
        let min_len = current.iter().map(BinWord::len).min().unwrap_or(0);
        let max_len = current.iter().map(BinWord::len).max().unwrap_or(0);
        out.push(SplitLevel { points: current.clone(), min_len, max_len });
    }
    let exactness = if tree.is_exact() {
        Exactness::Exact
    } else {
        let deepest = out.last().map_or(0, |l| l.max_len);
        Exactness::UpToDepth(deepest)
    };
    Ok(SplitProfile { levels: out, exactness })
}

/// `l_P(w)`: the number of branching points strictly below `w`.
pub fn level(tree: &Tree, w: &BinWord) -> Result<u32> {
    tree.require_perfect()?;
    let a = tree.automaton();
    let mut s = a.start();
    let mut level = 0;
    for (i, &b) in w.bits().iter().enumerate() {
        if a.is_horizon(s) {
            return Err(Error::BeyondHorizon { node: w.clone(), depth: i });
        }
        if a.is_split(s) {
            level += 1;
        }
        s = a.next(s, b).ok_or_else(|| Error::NotANode(w.clone()))?;
    }
    Ok(level)
}

/// Image of `w` under the order isomorphism `2^<ω → Split(P)`, left child
/// before right.
pub fn canon_embed(tree: &Tree, w: &BinWord) -> Result<BinWord> {
    tree.require_perfect()?;
    let mut s = first_split(tree, &BinWord::empty())?;
    for &b in w.bits() {
        s = first_split(tree, &s.child(b))?;
    }
    Ok(s)
}

/// Number of branching points of each length `0..depth`.
pub fn splits_per_length(tree: &Tree, depth: usize) -> Result<Vec<u128>> {
    let a = tree.automaton();
    let mut counts: BTreeMap<StateId, u128> = BTreeMap::from([(a.start(), 1)]);
    let mut out = Vec::with_capacity(depth);
    for d in 0..depth {
        let mut splits = 0;
        let mut next: BTreeMap<StateId, u128> = BTreeMap::new();
        for (&s, &c) in &counts {
            if a.is_horizon(s) {
                return Err(Error::BeyondHorizon { node: a.access_word(s).clone(), depth: d });
            }
            if a.is_split(s) {
                splits += c;
            }
            for b in 0..2u8 {
                if let Some(t) = a.next(s, b) {
                    *next.entry(t).or_default() += c;
                }
            }
        }
        out.push(splits);
        counts = next;
    }
    Ok(out)
}

/// Decides the balanced / uniform / Silver conditions.
///
/// Exact for horizon-free trees: the reachable state sets per length are
/// eventually periodic, so the whole sequence is inspected after one cycle.
/// For trees with a horizon the conditions are checked for lengths below
/// `min(depth, horizon)`.
pub fn classify(tree: &Tree, depth: usize) -> Result<Classification> {
    tree.require_perfect()?;
    let a = tree.automaton();
    let limit = match tree.horizon_depth() {
        None => usize::MAX,
        Some(h) => depth.min(h),
    };

    let sets = a.level_sets();
    let checked = sets.stored().min(limit);
    let mut uniform = true;
    let mut silver = true;
    let mut flags = Vec::with_capacity(checked);
    for n in 0..checked {
        let set = sets.at(n).expect("stored depth");
        let splitting = set.iter().filter(|&&s| a.is_split(s)).count();
        if splitting != 0 && splitting != set.len() {
            uniform = false;
        }
        let first = a.child_bits(set[0]);
        if set.iter().any(|&s| a.child_bits(s) != first) {
            silver = false;
        }
        flags.push(splitting == set.len());
    }
    silver &= uniform;
    let (balanced, balanced_depth) = balanced_check(tree, limit)?;
    let exactness =
        if tree.is_exact() { Exactness::Exact } else { Exactness::UpToDepth(checked.min(balanced_depth)) };
    let split_pattern = uniform.then(|| match sets.cycle() {
        Some((start, _)) if tree.is_exact() => {
            SplitPattern { transient: flags[..start].to_vec(), cycle: flags[start..].to_vec() }
        }
        _ => SplitPattern { transient: flags.clone(), cycle: Vec::new() },
    });
    Ok(Classification { balanced, uniform, silver, exactness, split_pattern })
}

/// `s_{i+1} > S_i` for all `i` holds iff no length carries a branching point
/// whose level exceeds the least level among the nodes of that length. The
/// configuration tracked per length is the set of (state, level − least
/// level) pairs; offsets stay in `{0,1}` until a violation shows up.
fn balanced_check(tree: &Tree, limit: usize) -> Result<(bool, usize)> {
    let a = tree.automaton();
    let mut config: BTreeSet<(StateId, u8)> = BTreeSet::from([(a.start(), 0)]);
    let mut seen: BTreeSet<BTreeSet<(StateId, u8)>> = BTreeSet::new();
    let mut n = 0;
    while n < limit {
        if config.iter().any(|&(s, _)| a.is_horizon(s)) {
            break;
        }
        if !seen.insert(config.clone()) {
            return Ok((true, n));
        }
        if config.iter().any(|&(s, o)| o > 0 && a.is_split(s)) {
            return Ok((false, n));
        }
        let next: BTreeSet<(StateId, u8)> = config
            .iter()
            .flat_map(|&(s, o)| {
                let gain = u8::from(a.is_split(s));
                a.child_bits(s).into_iter().map(move |b| (a.next(s, b).expect("child"), o + gain))
            })
            .collect();
        let least = next.iter().map(|&(_, o)| o).min().unwrap_or(0);
        config = next.into_iter().map(|(s, o)| (s, o - least)).collect();
        n += 1;
    }
    Ok((true, n))
}
