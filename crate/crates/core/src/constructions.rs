//! Named sets, block tables, the `φ` embedding and the Lusin tree.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::measure::{self, lemma1_refine, BoundCertificate};
use crate::rational::Rational;
use crate::splits;
use crate::trees::{Tree, TreePresentation};
use crate::words::{BinWord, NatWord};

pub const K_BLOCKS: [&str; 4] = ["000", "001", "011", "111"];

pub const L_BLOCKS: [&str; 8] = ["0000", "0001", "0011", "0111", "1000", "1001", "1011", "1111"];

pub const J_BLOCKS: [&str; 16] = [
    "00000000", "00010111", "00101011", "00111111", "01001010", "01011111", "01101011", "01111111",
    "10000101", "10010111", "10101111", "10111111", "11001111", "11011111", "11101111", "11111111",
];

/// Horizon of the staircase tree when none is given.
pub const STAIRCASE_HORIZON: usize = 64;

pub fn words(list: &[&str]) -> BTreeSet<BinWord> {
    list.iter().map(|s| s.parse().expect("static word")).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Named {
    E,
    Q,
    PJ,
    U,
    BStaircase,
}

impl Named {
    pub const ALL: [Named; 5] = [Named::E, Named::Q, Named::PJ, Named::U, Named::BStaircase];

    /// Name used in scripts.
    pub fn script_name(self) -> &'static str {
        match self {
            Named::E => "E",
            Named::Q => "Q",
            Named::PJ => "PJ",
            Named::U => "U",
            Named::BStaircase => "BST",
        }
    }
}

impl fmt::Display for Named {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.script_name())
    }
}

impl FromStr for Named {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Named::ALL
            .into_iter()
            .find(|n| n.script_name() == s)
            .ok_or_else(|| Error::Unsupported(format!("no construction named {s}")))
    }
}

/// Properties a construction is expected to have.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Claim {
    Perfect,
    Balanced,
    NotBalanced,
    Uniform,
    NotSilver,
    OneSplitPerLength,
}

#[derive(Clone, Debug)]
pub struct NamedConstruction {
    pub name: Named,
    pub tree: Tree,
    pub expected: Vec<Claim>,
}

impl NamedConstruction {
    pub fn presentation(&self) -> &TreePresentation {
        self.tree.presentation()
    }

    /// Evaluates each expected claim up to `depth` (exactly where possible).
    pub fn check_claims(&self, depth: usize) -> Result<Vec<(Claim, bool)>> {
        let c = splits::classify(&self.tree, depth)?;
        self.expected
            .iter()
            .map(|&claim| {
                let holds = match claim {
                    Claim::Perfect => self.tree.is_perfect(),
                    Claim::Balanced => c.balanced,
                    Claim::NotBalanced => !c.balanced,
                    Claim::Uniform => c.uniform,
                    Claim::NotSilver => !c.silver,
                    Claim::OneSplitPerLength => {
                        let d = self.tree.horizon_depth().map_or(depth, |h| h.min(depth));
                        splits::splits_per_length(&self.tree, d)?.iter().all(|&n| n == 1)
                    }
                };
                Ok((claim, holds))
            })
            .collect()
    }
}

fn blocks(k: usize, list: &[&str]) -> Tree {
    let p = TreePresentation::blocks(k, words(list)).expect("static blocks");
    Tree::compile(p).expect("static blocks compile")
}

pub fn make_named(name: Named) -> NamedConstruction {
    use Claim::*;
    let (tree, expected) = match name {
        Named::E => (blocks(3, &K_BLOCKS), vec![Perfect, NotBalanced]),
        Named::Q => (blocks(4, &L_BLOCKS), vec![Perfect, NotBalanced]),
        Named::PJ => (blocks(8, &J_BLOCKS), vec![Perfect, Balanced, Uniform]),
        Named::U => (blocks(2, &["00", "11"]), vec![Perfect, Balanced, Uniform, NotSilver]),
        Named::BStaircase => (staircase(STAIRCASE_HORIZON), vec![Perfect, Balanced, OneSplitPerLength]),
    };
    NamedConstruction { name, tree, expected }
}

/// The staircase tree truncated at `horizon`.
///
/// At each length the least node of minimal level splits and every other
/// node continues with 0, so each length carries exactly one branching point
/// and levels of branching points never decrease.
pub fn staircase(horizon: usize) -> Tree {
    staircase_with(horizon, |_| 0)
}

/// Staircase variant driven by `choose(n) ∈ 0..n`: it picks which of the
/// minimal-level nodes splits and the forced bit of every other node.
pub fn staircase_with(horizon: usize, mut choose: impl FnMut(usize) -> usize) -> Tree {
    let mut nodes: Vec<(BinWord, u32)> = vec![(BinWord::empty(), 0)];
    for _ in 0..horizon {
        let least = nodes.iter().map(|&(_, l)| l).min().expect("nonempty");
        let candidates: Vec<usize> = (0..nodes.len()).filter(|&i| nodes[i].1 == least).collect();
        let split = candidates[choose(candidates.len()) % candidates.len()];
        let mut next = Vec::with_capacity(nodes.len() + 1);
        for (i, (w, l)) in nodes.into_iter().enumerate() {
            if i == split {
                next.push((w.child(0), l + 1));
                next.push((w.child(1), l + 1));
            } else {
                next.push((w.child((choose(2) % 2) as u8), l));
            }
        }
        nodes = next;
    }
    let frontier = nodes.into_iter().map(|(w, _)| w);
    let p = TreePresentation::explicit(frontier).expect("staircase frontier");
    Tree::compile(p).expect("staircase compiles")
}

/// `{select(s, idx) : s ∈ blocks}`.
pub fn project_blocks<'a, I>(blocks: I, idx: &[usize]) -> Result<BTreeSet<BinWord>>
where
    I: IntoIterator<Item = &'a BinWord>,
{
    blocks.into_iter().map(|s| s.select(idx)).collect()
}

pub const EVEN: [usize; 4] = [0, 2, 4, 6];
pub const ODD: [usize; 4] = [1, 3, 5, 7];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Table1Row {
    pub s: BinWord,
    pub w: BinWord,
    /// `μ_Q` of the cylinder of `w`.
    pub mu_q: Rational,
    /// `|{s' ∈ J : s'⟨0,2,4,6⟩ = w}| / 16`.
    pub fiber: Rational,
    /// `μ_{P_J}` of the union of that fiber.
    pub mu_p: Rational,
}

/// One row per `s ∈ J`, in lexicographic order of `s`.
pub fn table1() -> Result<Vec<Table1Row>> {
    let q = make_named(Named::Q).tree;
    let p = make_named(Named::PJ).tree;
    let j = words(&J_BLOCKS);
    let mut rows = Vec::with_capacity(j.len());
    for s in &j {
        let w = s.select(&EVEN)?;
        let fiber: Vec<BinWord> =
            j.iter().filter(|t| t.select(&EVEN).is_ok_and(|x| x == w)).cloned().collect();
        let row = Table1Row {
            mu_q: measure::mu_cylinder(&q, &w)?,
            fiber: Rational::new(fiber.len() as i64, 16),
            mu_p: measure::mu_clopen(&p, &fiber)?,
            s: s.clone(),
            w,
        };
        if row.mu_q != row.fiber || row.fiber != row.mu_p {
            return Err(Error::Integrity(format!(
                "row {}: μ_Q {} fiber {} μ_P {}",
                row.s, row.mu_q, row.fiber, row.mu_p
            )));
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Pairs `(s, s⟨1,3,5,7⟩)` for `s ∈ J`; fails unless the image is `L`.
pub fn table2() -> Result<Vec<(BinWord, BinWord)>> {
    let j = words(&J_BLOCKS);
    let rows: Vec<(BinWord, BinWord)> =
        j.iter().map(|s| Ok((s.clone(), s.select(&ODD)?))).collect::<Result<_>>()?;
    let image: BTreeSet<BinWord> = rows.iter().map(|(_, w)| w.clone()).collect();
    if image != words(&L_BLOCKS) {
        return Err(Error::Integrity("second projection of J is not L".into()));
    }
    Ok(rows)
}

/// The embedding with `φ(w⌢b) = φ(w)⌢ε_{2k+b}^{2^{n+1}}`, `k` the value of
/// `w` read most significant bit first and `n = |w|`.
pub fn phi(w: &BinWord) -> BinWord {
    let mut out = BinWord::empty();
    for n in 0..w.len() {
        let k = w.prefix(n).value() as usize;
        out = out.concat(&BinWord::unit(2 * k + usize::from(w.bit(n)), 1 << (n + 1)));
    }
    out
}

/// `φ(w)` for every `w ∈ 2^l`, in lexicographic order of `w`.
pub fn phi_level(l: usize) -> Vec<BinWord> {
    BinWord::all_of_length(l).map(|w| phi(&w)).collect()
}

/// Checks that `φ(w⌢0)` and `φ(w⌢1)` extend `φ(w)` and are incomparable
/// for all `|w| < levels`.
pub fn phi_cantor_scheme(levels: usize) -> Result<()> {
    for n in 0..levels {
        for w in BinWord::all_of_length(n) {
            let (v, a, b) = (phi(&w), phi(&w.child(0)), phi(&w.child(1)));
            if !v.is_prefix_of(&a) || !v.is_prefix_of(&b) || a.comparable(&b) {
                return Err(Error::Integrity(format!("φ fails the scheme at {w}")));
            }
        }
    }
    Ok(())
}

/// Linear independence over `Z₂` of the restrictions to `[a, b)`.
pub fn z2_independent(words: &[BinWord], (a, b): (usize, usize)) -> Result<bool> {
    if a > b {
        return Err(Error::IndexOutOfRange { index: a, len: b });
    }
    if let Some(w) = words.iter().find(|w| w.len() != words[0].len() || w.len() < b) {
        return Err(Error::LengthMismatch(format!("{w} does not cover [{a}, {b})")));
    }
    let width = b - a;
    let mut rows: Vec<Vec<u64>> = words
        .iter()
        .map(|w| {
            let mut row = vec![0u64; width.div_ceil(64)];
            for i in 0..width {
                row[i / 64] |= u64::from(w.bit(a + i)) << (i % 64);
            }
            row
        })
        .collect();
    let mut rank = 0;
    for col in 0..width {
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][col / 64] >> (col % 64) & 1 == 1) else {
            continue;
        };
        rows.swap(rank, pivot);
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[col / 64] >> (col % 64) & 1 == 1 {
                row.iter_mut().zip(&pivot_row).for_each(|(x, y)| *x ^= y);
            }
        }
        rank += 1;
    }
    Ok(rank == words.len())
}

/// One stage `T_n` of the Lusin tree with its branching numbers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LusinStage {
    pub nodes: Vec<NatWord>,
    /// `M_w` for each node, aligned with `nodes`.
    pub branching: Vec<u64>,
    /// `m(⋃[T_n]) − m(⋃[T_{n+1}])`.
    pub removed: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LusinTree {
    pub stages: Vec<LusinStage>,
}

impl LusinTree {
    pub fn total_removed(&self) -> Rational {
        self.stages.iter().map(|s| &s.removed).sum()
    }
}

fn ceil_log2(n: usize) -> u64 {
    u64::from(n.next_power_of_two().trailing_zeros())
}

/// Builds stages `0..stages` with the least `M_w ≥ 2` such that
/// `2^{M_w} ≥ 2^{n+2}·|T_n|·m([w])`. Fails once a stage would exceed `cap`
/// nodes.
pub fn lusin_tree(stages: usize, cap: usize) -> Result<LusinTree> {
    let mut level = vec![NatWord::empty()];
    let mut out = Vec::with_capacity(stages);
    for n in 0..stages {
        let log_size = ceil_log2(level.len());
        let mut branching = Vec::with_capacity(level.len());
        let mut next = Vec::new();
        let mut removed = Rational::zero();
        for w in &level {
            let e: u64 = w.entries().iter().map(|&x| x + 1).sum();
            let m = (n as u64 + 2 + log_size).saturating_sub(e).max(2);
            if next.len() as u64 + m > cap as u64 {
                return Err(Error::CapExceeded(format!("stage {} exceeds {cap} nodes", n + 1)));
            }
            // m([w]) · Σ_{i ≥ M} 2^{-(i+1)} = m([w]) / 2^M
            removed = removed + measure::baire_measure(w) * Rational::dyadic(m as u32);
            next.extend((0..m).map(|k| w.child(k)));
            branching.push(m);
        }
        let before: Rational = level.iter().map(measure::baire_measure).sum();
        let after: Rational = next.iter().map(measure::baire_measure).sum();
        if &before - &after != removed {
            return Err(Error::Integrity(format!("stage {n} removed mass disagrees")));
        }
        out.push(LusinStage { nodes: std::mem::replace(&mut level, next), branching, removed });
    }
    Ok(LusinTree { stages: out })
}

/// Outcome of running the refinement in both directions.
#[derive(Debug)]
pub struct Dichotomy {
    /// Cover of `B ∩ P` inside `P`.
    pub forward: Result<BoundCertificate>,
    /// Cover of `P ∩ B` inside `B`.
    pub backward: Result<BoundCertificate>,
}

impl Dichotomy {
    pub fn resolved(&self) -> bool {
        self.forward.is_ok() || self.backward.is_ok()
    }
}

/// Refines covers of `B` in `P` and of `P` in `B` with window length `k`.
pub fn lemma_dichotomy(p: &Tree, b: &Tree, k: usize, rounds: usize) -> Dichotomy {
    Dichotomy { forward: lemma1_refine(p, b, k, rounds), backward: lemma1_refine(b, p, k, rounds) }
}
