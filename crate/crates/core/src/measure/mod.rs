//! Exact canonical-measure computation.
//!
//! Mass flows down the compiled automaton: a node carries `1/2^level`, a
//! branching point hands half of its mass to each child and any other node
//! passes all of it on. Traces `μ_P(X∩P)` of a presented closed set `X`
//! follow the same flow on the product of the two automata, dropping mass
//! whenever a child of `P` leaves `T_X`.

mod lemma;
mod linsolve;
pub mod replay;

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_integer::Integer;

use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::splits;
use crate::trees::{StateId, Tree, TreePresentation};
use crate::words::{BinWord, NatWord};

pub use lemma::{lemma1_refine, BoundCertificate, Cover, CoverExtension, CoverNode, RoundRecord};

/// Symbols cap for [`default_trace_depth`].
pub const TRACE_DEPTH_CAP: usize = 60;

/// `μ_P([w]_P)`; zero when `w` leaves `T_P` before any horizon.
pub fn mu_cylinder(p: &Tree, w: &BinWord) -> Result<Rational> {
    match splits::level(p, w) {
        Ok(level) => Ok(Rational::dyadic(level)),
        Err(Error::NotANode(_)) => Ok(Rational::zero()),
        Err(e) => Err(e),
    }
}

/// Measure of a finite union of cylinders.
pub fn mu_clopen<'a, I>(p: &Tree, words: I) -> Result<Rational>
where
    I: IntoIterator<Item = &'a BinWord>,
{
    let words: BTreeSet<&BinWord> = words.into_iter().collect();
    // keep only words with no proper prefix in the set; the rest are absorbed
    let mut kept: Vec<&BinWord> = Vec::new();
    for w in words {
        if kept.last().is_some_and(|k| k.is_prefix_of(w)) {
            continue;
        }
        kept.push(w);
    }
    kept.into_iter().map(|w| mu_cylinder(p, w)).sum()
}

/// Result of a trace computation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceResult {
    pub exact: Option<Rational>,
    /// `upper_bounds[d]` is the measure of the depth-`d` clopen hull.
    pub upper_bounds: Vec<Rational>,
    pub method: TraceMethod,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceMethod {
    ExactSolve,
    DepthBounded,
}

/// Depth-`d` hulls of `μ_P(X∩P)` for `d = 0..=depth`.
pub fn trace_upper(p: &Tree, x: &Tree, depth: usize) -> Result<TraceResult> {
    p.require_perfect()?;
    let pa = p.automaton();
    let xa = x.automaton();
    let mut mass: BTreeMap<(StateId, StateId), Rational> =
        BTreeMap::from([((pa.start(), xa.start()), Rational::one())]);
    let mut bounds = vec![Rational::one()];
    for d in 0..depth {
        let mut next: BTreeMap<(StateId, StateId), Rational> = BTreeMap::new();
        for ((ps, xs), m) in mass {
            for (auto, s) in [(pa, ps), (xa, xs)] {
                if auto.is_horizon(s) {
                    return Err(Error::BeyondHorizon { node: auto.access_word(s).clone(), depth: d });
                }
            }
            let share = if pa.is_split(ps) { m.half() } else { m };
            for b in pa.child_bits(ps) {
                if let Some(xt) = xa.next(xs, b) {
                    let key = (pa.next(ps, b).expect("child"), xt);
                    let slot = next.entry(key).or_default();
                    *slot = &*slot + &share;
                }
            }
        }
        bounds.push(next.values().sum());
        mass = next;
    }
    Ok(TraceResult { exact: None, upper_bounds: bounds, method: TraceMethod::DepthBounded })
}

/// Default hull depth for a pair of trees: the joint transient plus six
/// joint periods of the reachable state sets, capped at
/// [`TRACE_DEPTH_CAP`]. Trees with a horizon use the horizon instead.
pub fn default_trace_depth(p: &Tree, x: &Tree) -> usize {
    let a = p.automaton().level_sets().cycle();
    let b = x.automaton().level_sets().cycle();
    let depth = match (a, b) {
        (Some((sa, la)), Some((sb, lb))) => sa.max(sb) + 6 * la.lcm(&lb),
        _ => {
            let h = [p.horizon_depth(), x.horizon_depth()].into_iter().flatten().min();
            h.unwrap_or(TRACE_DEPTH_CAP)
        }
    };
    depth.min(TRACE_DEPTH_CAP)
}

/// Exact `μ_P(X∩P)` for horizon-free presentations.
///
/// States of the product automaton from which no `P`-child ever leaves
/// `T_X` keep all their mass and have value 1. Every other state reaches a
/// leak, so the remaining linear system `v = Mv + c` has a substochastic `M`
/// with spectral radius below 1 and a unique solution, which is the
/// greatest fixed point and hence the limit of the hull measures.
pub fn trace_exact(p: &Tree, x: &Tree) -> Result<TraceResult> {
    p.require_perfect()?;
    for t in [p, x] {
        if !t.is_exact() {
            return Err(Error::Unsupported(format!(
                "exact trace needs horizon-free presentations, got {}",
                t.presentation()
            )));
        }
    }
    let pa = p.automaton();
    let xa = x.automaton();

    // reachable product states, each with weighted live successors
    let start = (pa.start(), xa.start());
    let mut index: BTreeMap<(StateId, StateId), usize> = BTreeMap::from([(start, 0)]);
    let mut states = vec![start];
    let mut succ: Vec<Vec<usize>> = Vec::new();
    let mut leaks: Vec<bool> = Vec::new();
    let mut i = 0;
    while i < states.len() {
        let (ps, xs) = states[i];
        let mut out = Vec::new();
        let mut leak = false;
        for b in pa.child_bits(ps) {
            match xa.next(xs, b) {
                Some(xt) => {
                    let key = (pa.next(ps, b).expect("child"), xt);
                    let id = *index.entry(key).or_insert_with(|| {
                        states.push(key);
                        states.len() - 1
                    });
                    out.push(id);
                }
                None => leak = true,
            }
        }
        succ.push(out);
        leaks.push(leak);
        i += 1;
    }
    let n = states.len();

    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (s, out) in succ.iter().enumerate() {
        for &t in out {
            preds[t].push(s);
        }
    }
    let mut reaches_leak = leaks.clone();
    let mut queue: VecDeque<usize> = (0..n).filter(|&s| leaks[s]).collect();
    while let Some(s) = queue.pop_front() {
        for &q in &preds[s] {
            if !reaches_leak[q] {
                reaches_leak[q] = true;
                queue.push_back(q);
            }
        }
    }

    let value = if !reaches_leak[0] {
        Rational::one()
    } else {
        let transient: Vec<usize> = (0..n).filter(|&s| reaches_leak[s]).collect();
        let pos: BTreeMap<usize, usize> = transient.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let m = transient.len();
        let mut matrix = vec![vec![Rational::zero(); m]; m];
        let mut rhs = vec![Rational::zero(); m];
        for (row, &s) in transient.iter().enumerate() {
            matrix[row][row] = Rational::one();
            let w = if pa.is_split(states[s].0) { Rational::new(1, 2) } else { Rational::one() };
            for &t in &succ[s] {
                match pos.get(&t) {
                    Some(&col) => matrix[row][col] = &matrix[row][col] - &w,
                    None => rhs[row] = &rhs[row] + &w,
                }
            }
        }
        let solution =
            linsolve::solve(matrix, rhs).ok_or_else(|| Error::Integrity("singular trace system".into()))?;
        solution[pos[&0]].clone()
    };

    let depth = default_trace_depth(p, x);
    let bounds = trace_upper(p, x, depth)?.upper_bounds;
    if bounds.iter().any(|b| b < &value) {
        return Err(Error::Integrity("exact trace exceeds a hull bound".into()));
    }
    Ok(TraceResult { exact: Some(value), upper_bounds: bounds, method: TraceMethod::ExactSolve })
}

/// `μ_{P×Q}([v])` computed on the product tree and as
/// `μ_P([w_P]) · μ_Q([w_Q])` from the deinterleaved halves.
pub struct ProductMeasure<'a> {
    left: &'a Tree,
    right: &'a Tree,
    product: Tree,
}

impl<'a> ProductMeasure<'a> {
    pub fn new(left: &'a Tree, right: &'a Tree) -> Result<Self> {
        left.require_perfect()?;
        right.require_perfect()?;
        let product = Tree::compile(TreePresentation::product(
            left.presentation().clone(),
            right.presentation().clone(),
        ))?;
        Ok(ProductMeasure { left, right, product })
    }

    pub fn product_tree(&self) -> &Tree {
        &self.product
    }

    pub fn measure(&self, v: &BinWord) -> Result<Rational> {
        if !self.product.contains(v)? {
            return Err(Error::NotANode(v.clone()));
        }
        let direct = mu_cylinder(&self.product, v)?;
        let (wp, wq) = v.deinterleave();
        let factored = mu_cylinder(self.left, &wp)? * mu_cylinder(self.right, &wq)?;
        if direct != factored {
            return Err(Error::Integrity(format!(
                "product measure of {v}: direct {direct} vs factored {factored}"
            )));
        }
        Ok(direct)
    }
}

pub fn product_measure(p: &Tree, q: &Tree, v: &BinWord) -> Result<Rational> {
    ProductMeasure::new(p, q)?.measure(v)
}

/// The natural measure on `ω^ω`: `m([w]) = Π 1/2^{w(i)+1}`.
pub fn baire_measure(w: &NatWord) -> Rational {
    let exp: u64 = w.entries().iter().map(|&e| e + 1).sum();
    Rational::dyadic(u32::try_from(exp).expect("exponent fits in u32"))
}
