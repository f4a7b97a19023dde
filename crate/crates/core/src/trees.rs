//! Finite presentations of closed subtrees of `2^<ω`.
//!
//! Every presentation is compiled once into a finite deterministic
//! [`Automaton`] over `{0,1}` whose runs from the start state are exactly the
//! nodes of the tree. Infinite-depth trees thus become finite objects, and
//! all later queries are read-only walks over the automaton. Explicit
//! presentations compile into a trie whose deepest states are marked as
//! *horizon* states: their children are unknown and any query that needs
//! them fails with [`Error::BeyondHorizon`].

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use crate::error::{Error, Result};
use crate::words::BinWord;

/// Entry of a Silver presentation: `-1` splits, `0`/`1` force that bit.
pub type SilverEntry = i8;

/// A finite description of a closed subtree of `2^<ω`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TreePresentation {
    /// All of `2^<ω`.
    Full,
    /// The prefix closure of a frontier of words sharing the length `depth`.
    Explicit { depth: usize, frontier: BTreeSet<BinWord> },
    /// Branches whose consecutive length-`k` blocks all lie in `blocks`.
    BlockPeriodic { k: usize, blocks: BTreeSet<BinWord> },
    /// Entry sequence `prefix⌢period⌢period⌢…` over `{-1,0,1}`.
    Silver { prefix: Vec<SilverEntry>, period: Vec<SilverEntry> },
    /// `h[P×Q]`: even positions from the left tree, odd from the right.
    Product(Box<TreePresentation>, Box<TreePresentation>),
    /// The nodes of `base` comparable with `root`, i.e. the tree of `[root]∩P`.
    SubtreeAt { base: Box<TreePresentation>, root: BinWord },
}

impl TreePresentation {
    pub fn explicit<I: IntoIterator<Item = BinWord>>(frontier: I) -> Result<Self> {
        let frontier: BTreeSet<BinWord> = frontier.into_iter().collect();
        let depth = match frontier.iter().next() {
            Some(w) => w.len(),
            None => return Err(Error::InvalidPresentation("empty frontier".into())),
        };
        if let Some(w) = frontier.iter().find(|w| w.len() != depth) {
            return Err(Error::InvalidPresentation(format!("frontier word {w} does not have depth {depth}")));
        }
        Ok(TreePresentation::Explicit { depth, frontier })
    }

    pub fn blocks<I: IntoIterator<Item = BinWord>>(k: usize, blocks: I) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidPresentation("block length must be at least 1".into()));
        }
        let blocks: BTreeSet<BinWord> = blocks.into_iter().collect();
        if blocks.is_empty() {
            return Err(Error::InvalidPresentation("empty block set".into()));
        }
        if let Some(b) = blocks.iter().find(|b| b.len() != k) {
            return Err(Error::InvalidPresentation(format!("block {b} does not have length {k}")));
        }
        Ok(TreePresentation::BlockPeriodic { k, blocks })
    }

    pub fn silver(prefix: Vec<SilverEntry>, period: Vec<SilverEntry>) -> Result<Self> {
        if let Some(e) = prefix.iter().chain(&period).find(|e| !(-1..=1).contains(*e)) {
            return Err(Error::InvalidPresentation(format!("silver entry {e} not in {{-1,0,1}}")));
        }
        if !period.contains(&-1) {
            return Err(Error::InvalidPresentation("silver period must contain -1".into()));
        }
        Ok(TreePresentation::Silver { prefix, period })
    }

    pub fn product(left: TreePresentation, right: TreePresentation) -> Self {
        TreePresentation::Product(Box::new(left), Box::new(right))
    }

    pub fn subtree(base: TreePresentation, root: BinWord) -> Self {
        TreePresentation::SubtreeAt { base: Box::new(base), root }
    }

    /// True when the presentation compiles without a horizon.
    pub fn is_infinite(&self) -> bool {
        match self {
            TreePresentation::Explicit { .. } => false,
            TreePresentation::Product(a, b) => a.is_infinite() && b.is_infinite(),
            TreePresentation::SubtreeAt { base, .. } => base.is_infinite(),
            _ => true,
        }
    }
}

impl fmt::Display for TreePresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn words(f: &mut fmt::Formatter<'_>, ws: &BTreeSet<BinWord>) -> fmt::Result {
            let parts: Vec<String> = ws.iter().map(|w| w.to_string()).collect();
            write!(f, "{{{}}}", parts.join(" "))
        }
        fn entries(es: &[SilverEntry]) -> String {
            es.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(" ")
        }
        match self {
            TreePresentation::Full => f.write_str("full"),
            TreePresentation::Explicit { frontier, .. } => {
                f.write_str("words")?;
                words(f, frontier)
            }
            TreePresentation::BlockPeriodic { k, blocks } => {
                write!(f, "blocks({k})")?;
                words(f, blocks)
            }
            TreePresentation::Silver { prefix, period } => {
                write!(f, "silver[{}]repeat[{}]", entries(prefix), entries(period))
            }
            TreePresentation::Product(a, b) => write!(f, "product({a},{b})"),
            TreePresentation::SubtreeAt { base, root } => write!(f, "subtree({base},{root})"),
        }
    }
}

pub type StateId = u32;

/// Deterministic automaton over `{0,1}` whose runs from state 0 are the
/// nodes of a tree.
#[derive(Clone, Debug)]
pub struct Automaton {
    next: Vec<[Option<StateId>; 2]>,
    horizon: Vec<bool>,
    // shortest, then lexicographically least, word reaching each state
    access: Vec<BinWord>,
}

/// Outcome of following a word through an [`Automaton`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Walk {
    /// The word is a node ending in this state.
    Node(StateId),
    /// The prefix of this length is a node, the next bit leaves the tree.
    Absent { at: usize },
    /// The prefix of this length ends in a horizon state.
    Horizon { at: usize },
}

enum Step<K> {
    Horizon,
    Next([Option<K>; 2]),
}

impl Automaton {
    fn explore<K: Ord + Clone>(start: K, mut step: impl FnMut(&K) -> Result<Step<K>>) -> Result<Self> {
        let mut ids: BTreeMap<K, StateId> = BTreeMap::new();
        let mut keys = vec![start.clone()];
        let mut next = Vec::new();
        let mut horizon = Vec::new();
        let mut access = vec![BinWord::empty()];
        ids.insert(start, 0);
        let mut i = 0;
        while i < keys.len() {
            let key = keys[i].clone();
            match step(&key)? {
                Step::Horizon => {
                    next.push([None, None]);
                    horizon.push(true);
                }
                Step::Next(succ) => {
                    let mut row = [None, None];
                    for (bit, k) in succ.into_iter().enumerate() {
                        if let Some(k) = k {
                            let id = match ids.get(&k) {
                                Some(&id) => id,
                                None => {
                                    let id = keys.len() as StateId;
                                    ids.insert(k.clone(), id);
                                    keys.push(k);
                                    access.push(access[i].child(bit as u8));
                                    id
                                }
                            };
                            row[bit] = Some(id);
                        }
                    }
                    next.push(row);
                    horizon.push(false);
                }
            }
            i += 1;
        }
        Ok(Automaton { next, horizon, access })
    }

    pub fn start(&self) -> StateId {
        0
    }

    pub fn num_states(&self) -> usize {
        self.next.len()
    }

    pub fn next(&self, state: StateId, bit: u8) -> Option<StateId> {
        self.next[state as usize][bit as usize]
    }

    pub fn is_horizon(&self, state: StateId) -> bool {
        self.horizon[state as usize]
    }

    pub fn is_split(&self, state: StateId) -> bool {
        let row = &self.next[state as usize];
        row[0].is_some() && row[1].is_some()
    }

    /// Bits `b` such that the state has a `b`-successor.
    pub fn child_bits(&self, state: StateId) -> Vec<u8> {
        (0..2u8).filter(|&b| self.next(state, b).is_some()).collect()
    }

    /// A shortest word reaching `state`.
    pub fn access_word(&self, state: StateId) -> &BinWord {
        &self.access[state as usize]
    }

    pub fn has_horizon(&self) -> bool {
        self.horizon.iter().any(|&h| h)
    }

    /// Least depth at which a horizon state occurs.
    pub fn horizon_depth(&self) -> Option<usize> {
        (0..self.num_states()).filter(|&s| self.horizon[s]).map(|s| self.access[s].len()).min()
    }

    pub fn walk_from(&self, mut state: StateId, word: &BinWord) -> Walk {
        for (i, &b) in word.bits().iter().enumerate() {
            if self.is_horizon(state) {
                return Walk::Horizon { at: i };
            }
            match self.next(state, b) {
                Some(s) => state = s,
                None => return Walk::Absent { at: i },
            }
        }
        Walk::Node(state)
    }

    pub fn walk(&self, word: &BinWord) -> Walk {
        self.walk_from(self.start(), word)
    }

    /// The sequence of state sets reached at each depth, until it becomes
    /// periodic or meets a horizon state.
    pub fn level_sets(&self) -> LevelSets {
        let mut sets: Vec<Vec<StateId>> = vec![vec![self.start()]];
        let mut seen: HashMap<Vec<StateId>, usize> = HashMap::new();
        loop {
            let n = sets.len() - 1;
            let cur = &sets[n];
            if cur.iter().any(|&s| self.is_horizon(s)) {
                return LevelSets { sets, cycle: None };
            }
            if let Some(&start) = seen.get(cur) {
                sets.pop();
                return LevelSets { sets, cycle: Some((start, n - start)) };
            }
            seen.insert(cur.clone(), n);
            let succ: BTreeSet<StateId> =
                cur.iter().flat_map(|&s| self.next[s as usize].iter().flatten().copied()).collect();
            sets.push(succ.into_iter().collect());
        }
    }
}

/// Eventually periodic sequence of reachable state sets, indexed by depth.
#[derive(Clone, Debug)]
pub struct LevelSets {
    sets: Vec<Vec<StateId>>,
    /// `(start, length)` of the cycle; `None` when a horizon cut the sequence.
    cycle: Option<(usize, usize)>,
}

impl LevelSets {
    pub fn cycle(&self) -> Option<(usize, usize)> {
        self.cycle
    }

    /// Number of depths stored explicitly.
    pub fn stored(&self) -> usize {
        self.sets.len()
    }

    pub fn at(&self, depth: usize) -> Option<&[StateId]> {
        match self.cycle {
            Some((start, len)) if depth >= start => Some(&self.sets[start + (depth - start) % len]),
            _ => self.sets.get(depth).map(Vec::as_slice),
        }
    }
}

/// Exactness of a property decided on a tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exactness {
    Exact,
    UpToDepth(usize),
}

impl fmt::Display for Exactness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exactness::Exact => f.write_str("exact"),
            Exactness::UpToDepth(d) => write!(f, "up-to-depth({d})"),
        }
    }
}

/// Findings of [`Tree::compile`].
///
/// For trees with a horizon, `perfect` means every node shallower than the
/// `UpToDepth` bound has a branching descendant inside the horizon, and the
/// witnesses are the nodes where that verification stopped.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub pruned: bool,
    pub perfect: bool,
    pub exactness: Exactness,
    pub witnesses: Vec<BinWord>,
}

/// A validated presentation together with its compiled automaton.
#[derive(Clone, Debug)]
pub struct Tree {
    presentation: TreePresentation,
    automaton: Automaton,
    report: ValidationReport,
}

impl Tree {
    /// Compiles and validates a presentation.
    pub fn compile(presentation: TreePresentation) -> Result<Self> {
        let automaton = compile_automaton(&presentation)?;
        let report = validate(&automaton);
        Ok(Tree { presentation, automaton, report })
    }

    pub fn full() -> Self {
        Tree::compile(TreePresentation::Full).expect("full tree compiles")
    }

    pub fn presentation(&self) -> &TreePresentation {
        &self.presentation
    }

    pub fn automaton(&self) -> &Automaton {
        &self.automaton
    }

    pub fn report(&self) -> &ValidationReport {
        &self.report
    }

    pub fn is_perfect(&self) -> bool {
        self.report.perfect
    }

    pub fn is_exact(&self) -> bool {
        !self.automaton.has_horizon()
    }

    pub fn horizon_depth(&self) -> Option<usize> {
        self.automaton.horizon_depth()
    }

    /// Fails with [`Error::NotPerfect`] unless the tree validated as perfect.
    pub fn require_perfect(&self) -> Result<()> {
        if self.report.perfect {
            Ok(())
        } else {
            let w = self.report.witnesses.first().cloned().unwrap_or_default();
            Err(Error::NotPerfect(w))
        }
    }

    /// Membership of `w` in the tree.
    ///
    /// A word that leaves the tree before the horizon is reported absent;
    /// one that would need children of a horizon node is an error.
    pub fn contains(&self, w: &BinWord) -> Result<bool> {
        match self.automaton.walk(w) {
            Walk::Node(_) => Ok(true),
            Walk::Absent { .. } => Ok(false),
            Walk::Horizon { at } => Err(Error::BeyondHorizon { node: w.clone(), depth: at }),
        }
    }

    /// The state reached by the node `w`.
    pub fn state_of(&self, w: &BinWord) -> Result<StateId> {
        match self.automaton.walk(w) {
            Walk::Node(s) => Ok(s),
            Walk::Absent { .. } => Err(Error::NotANode(w.clone())),
            Walk::Horizon { at } => Err(Error::BeyondHorizon { node: w.clone(), depth: at }),
        }
    }

    /// The bits `b` with `w⌢b` in the tree.
    pub fn children(&self, w: &BinWord) -> Result<Vec<u8>> {
        let s = self.state_of(w)?;
        if self.automaton.is_horizon(s) {
            return Err(Error::BeyondHorizon { node: w.clone(), depth: w.len() });
        }
        Ok(self.automaton.child_bits(s))
    }

    /// Whether `w` is a branching point.
    pub fn is_split(&self, w: &BinWord) -> Result<bool> {
        Ok(self.children(w)?.len() == 2)
    }

    /// All nodes of length `depth`, in lexicographic order.
    pub fn nodes_at(&self, depth: usize) -> Result<Vec<BinWord>> {
        let a = &self.automaton;
        let mut layer = vec![(BinWord::empty(), a.start())];
        for _ in 0..depth {
            let mut next = Vec::with_capacity(layer.len() * 2);
            for (w, s) in layer {
                if a.is_horizon(s) {
                    return Err(Error::BeyondHorizon { depth: w.len(), node: w });
                }
                for b in 0..2u8 {
                    if let Some(t) = a.next(s, b) {
                        next.push((w.child(b), t));
                    }
                }
            }
            layer = next;
        }
        Ok(layer.into_iter().map(|(w, _)| w).collect())
    }

    /// Number of nodes of each length `0..=depth`.
    pub fn node_counts(&self, depth: usize) -> Result<Vec<u128>> {
        let a = &self.automaton;
        let mut counts: BTreeMap<StateId, u128> = BTreeMap::from([(a.start(), 1)]);
        let mut out = vec![1u128];
        for d in 0..depth {
            let mut next: BTreeMap<StateId, u128> = BTreeMap::new();
            for (&s, &c) in &counts {
                if a.is_horizon(s) {
                    return Err(Error::BeyondHorizon { node: a.access_word(s).clone(), depth: d });
                }
                for b in 0..2u8 {
                    if let Some(t) = a.next(s, b) {
                        *next.entry(t).or_default() += c;
                    }
                }
            }
            out.push(next.values().sum());
            counts = next;
        }
        Ok(out)
    }
}

fn compile_automaton(p: &TreePresentation) -> Result<Automaton> {
    match p {
        TreePresentation::Full => Automaton::explore((), |_| Ok(Step::Next([Some(()), Some(())]))),
        TreePresentation::Explicit { depth, frontier } => {
            let mut prefixes: BTreeSet<BinWord> = BTreeSet::new();
            for w in frontier {
                for n in 0..=w.len() {
                    prefixes.insert(w.prefix(n));
                }
            }
            let depth = *depth;
            Automaton::explore(BinWord::empty(), |w| {
                if w.len() == depth {
                    return Ok(Step::Horizon);
                }
                let succ = [0u8, 1].map(|b| Some(w.child(b)).filter(|c| prefixes.contains(c)));
                Ok(Step::Next(succ))
            })
        }
        TreePresentation::BlockPeriodic { k, blocks } => {
            let k = *k;
            let mut prefixes: BTreeSet<BinWord> = BTreeSet::new();
            for b in blocks {
                for n in 0..k {
                    prefixes.insert(b.prefix(n));
                }
            }
            Automaton::explore(BinWord::empty(), |w| {
                let succ = [0u8, 1].map(|b| {
                    let c = w.child(b);
                    if c.len() == k {
                        blocks.contains(&c).then(BinWord::empty)
                    } else {
                        prefixes.contains(&c).then_some(c)
                    }
                });
                Ok(Step::Next(succ))
            })
        }
        TreePresentation::Silver { prefix, period } => {
            let entry = |i: usize| {
                if i < prefix.len() {
                    prefix[i]
                } else {
                    period[i - prefix.len()]
                }
            };
            let last = prefix.len() + period.len() - 1;
            Automaton::explore(0usize, |&i| {
                let j = if i == last { prefix.len() } else { i + 1 };
                let succ = match entry(i) {
                    -1 => [Some(j), Some(j)],
                    0 => [Some(j), None],
                    _ => [None, Some(j)],
                };
                Ok(Step::Next(succ))
            })
        }
        TreePresentation::Product(left, right) => {
            let a = compile_automaton(left)?;
            let b = compile_automaton(right)?;
            Automaton::explore((0 as StateId, 0 as StateId, false), |&(x, y, odd)| {
                let (driver, auto) = if odd { (y, &b) } else { (x, &a) };
                if auto.is_horizon(driver) {
                    return Ok(Step::Horizon);
                }
                let succ = [0u8, 1].map(|bit| {
                    auto.next(driver, bit).map(|t| if odd { (x, t, false) } else { (t, y, true) })
                });
                Ok(Step::Next(succ))
            })
        }
        TreePresentation::SubtreeAt { base, root } => {
            let a = compile_automaton(base)?;
            match a.walk(root) {
                Walk::Node(_) => {}
                Walk::Absent { .. } => {
                    return Err(Error::InvalidPresentation(format!(
                        "subtree root {root} is not a node of the base tree"
                    )))
                }
                Walk::Horizon { at } => return Err(Error::BeyondHorizon { node: root.clone(), depth: at }),
            }
            // (position along root, base state); position == |root| means free
            Automaton::explore((0usize, a.start()), |&(pos, s)| {
                if a.is_horizon(s) {
                    return Ok(Step::Horizon);
                }
                let succ = [0u8, 1].map(|bit| {
                    if pos < root.len() && root.bit(pos) != bit {
                        return None;
                    }
                    a.next(s, bit).map(|t| ((pos + 1).min(root.len()), t))
                });
                Ok(Step::Next(succ))
            })
        }
    }
}

fn validate(a: &Automaton) -> ValidationReport {
    let n = a.num_states();
    let live = |s: usize| !a.horizon[s];
    let dead_ends: Vec<usize> = (0..n).filter(|&s| live(s) && a.next[s] == [None, None]).collect();
    let pruned = dead_ends.is_empty();

    // states from which a branching point is reachable
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for s in 0..n {
        for t in a.next[s].iter().flatten() {
            preds[*t as usize].push(s);
        }
    }
    let mut reaches_split = vec![false; n];
    let mut queue: VecDeque<usize> = (0..n).filter(|&s| a.is_split(s as StateId)).collect();
    for &s in &queue {
        reaches_split[s] = true;
    }
    while let Some(s) = queue.pop_front() {
        for &p in &preds[s] {
            if !reaches_split[p] {
                reaches_split[p] = true;
                queue.push_back(p);
            }
        }
    }
    let mut failing: Vec<usize> = (0..n).filter(|&s| live(s) && !reaches_split[s]).collect();
    failing.sort_by(|&x, &y| a.access[x].len().cmp(&a.access[y].len()).then(a.access[x].cmp(&a.access[y])));

    if !pruned {
        return ValidationReport {
            pruned,
            perfect: false,
            exactness: match a.horizon_depth() {
                None => Exactness::Exact,
                Some(h) => Exactness::UpToDepth(h),
            },
            witnesses: dead_ends.iter().map(|&s| a.access[s].clone()).collect(),
        };
    }
    match a.horizon_depth() {
        None => ValidationReport {
            pruned,
            perfect: failing.is_empty(),
            exactness: Exactness::Exact,
            witnesses: failing.iter().map(|&s| a.access[s].clone()).collect(),
        },
        Some(h) => {
            let d = failing.first().map_or(h, |&s| a.access[s].len().min(h));
            let witnesses =
                failing.iter().filter(|&&s| a.access[s].len() == d).map(|&s| a.access[s].clone()).collect();
            ValidationReport { pruned, perfect: d > 0, exactness: Exactness::UpToDepth(d), witnesses }
        }
    }
}

/// One component of a split Silver tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SilverComponent {
    /// Infinitely many `-1` entries: a perfect tree.
    Perfect(TreePresentation),
    /// Finitely many `-1` entries: a finite set, truncated at a horizon.
    Finite(TreePresentation),
}

impl SilverComponent {
    pub fn presentation(&self) -> &TreePresentation {
        match self {
            SilverComponent::Perfect(p) | SilverComponent::Finite(p) => p,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, SilverComponent::Finite(_))
    }
}

/// Splits a Silver tree `P` into `P₁`, `P₂` with `P = P₁ × P₂`, built from
/// the even- and odd-indexed entries. A component with finitely many `-1`
/// entries is returned as an explicit tree truncated at `horizon`.
pub fn silver_split(silver: &TreePresentation, horizon: usize) -> Result<(SilverComponent, SilverComponent)> {
    let (prefix, period) = match silver {
        TreePresentation::Silver { prefix, period } => (prefix, period),
        other => return Err(Error::Unsupported(format!("silver_split of non-Silver tree {other}"))),
    };
    let entry = |i: usize| {
        if i < prefix.len() {
            prefix[i]
        } else {
            period[(i - prefix.len()) % period.len()]
        }
    };
    let component = |offset: usize| -> Result<SilverComponent> {
        // entries a_{2n+offset}; periodic once 2n+offset >= |prefix|
        let start = prefix.len().div_ceil(2);
        let sub_prefix: Vec<SilverEntry> = (0..start).map(|n| entry(2 * n + offset)).collect();
        let sub_period: Vec<SilverEntry> =
            (start..start + period.len()).map(|n| entry(2 * n + offset)).collect();
        if sub_prefix.iter().chain(&sub_period).all(|&e| e == -1) {
            Ok(SilverComponent::Perfect(TreePresentation::Full))
        } else if sub_period.contains(&-1) {
            Ok(SilverComponent::Perfect(TreePresentation::silver(sub_prefix, sub_period)?))
        } else {
            let mut words = vec![BinWord::empty()];
            for n in 0..horizon {
                let e = entry(2 * n + offset);
                words = words
                    .into_iter()
                    .flat_map(|w| match e {
                        -1 => vec![w.child(0), w.child(1)],
                        b => vec![w.child(b as u8)],
                    })
                    .collect();
            }
            Ok(SilverComponent::Finite(TreePresentation::explicit(words)?))
        }
    };
    Ok((component(0)?, component(1)?))
}
