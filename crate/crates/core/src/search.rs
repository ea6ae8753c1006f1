//! Brute-force search: backtracking enumeration of tiling complements and of
//! all normalized tilings of small moduli, plus seeded generation of
//! structured tilings from standard pairs.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::boxes::require_three_squares;
use crate::cyclotomic::{standard_complement, Spectrum};
use crate::error::{Error, Result};
use crate::isometry::{IsometryMap, IsometryTag};
use crate::multiset::Multiset;
use crate::structure::{fiber_shift, find_cofiber, replay_chain, CofiberPair, ShiftMove};
use crate::tiling::{verify_tiling, TilingInstance};
use crate::zmod::Modulus;

pub const DEFAULT_NODE_BUDGET: u64 = 1_000_000_000;
pub const DEFAULT_EXHAUSTIVE_CAP: u64 = 72;

const FRONTIER_TARGET_FACTOR: usize = 32;
const FRONTIER_DEPTH_CAP: usize = 12;

/// Shared knobs for the searches.
#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub modulus: Modulus,
    /// Normalize `0` into both factors during full enumeration.
    pub fix_zero: bool,
    /// Required `(|A|, |B|)`; must multiply to the modulus when present.
    pub size_split: Option<(u64, u64)>,
    pub node_budget: u64,
    pub seed: u64,
    /// Reject partial factors whose new difference class is already taken
    /// by the other side.
    pub sands_prune: bool,
    /// Largest modulus accepted by the exhaustive enumeration.
    pub exhaustive_cap: u64,
}

impl SearchConfig {
    pub fn new(modulus: Modulus) -> SearchConfig {
        SearchConfig {
            modulus,
            fix_zero: true,
            size_split: None,
            node_budget: DEFAULT_NODE_BUDGET,
            seed: 0,
            sands_prune: true,
            exhaustive_cap: DEFAULT_EXHAUSTIVE_CAP,
        }
    }

    fn checked_split(&self) -> Result<Option<(u64, u64)>> {
        if let Some((sa, sb)) = self.size_split {
            if sa == 0 || sa.checked_mul(sb) != Some(self.modulus.value()) {
                return Err(Error::InvalidArgument(format!(
                    "size split {sa} x {sb} does not multiply to {}",
                    self.modulus.value()
                )));
            }
        }
        Ok(self.size_split)
    }
}

/// How a search run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchStatus {
    /// The whole space was explored.
    Complete,
    /// A visitor stopped the run early.
    Stopped,
    /// The node budget ran out; results are partial.
    BudgetExhausted,
}

/// Search results plus completion status and the node count spent.
#[derive(Debug, Clone)]
pub struct Enumeration<T> {
    pub items: Vec<T>,
    pub status: SearchStatus,
    pub nodes: u64,
}

/// A streamed fold over search output, with status and node count.
#[derive(Debug, Clone)]
pub struct FoldRun<T> {
    pub value: T,
    pub status: SearchStatus,
    pub nodes: u64,
}

#[derive(Clone)]
struct Cover {
    words: Vec<u64>,
    count: u64,
}

impl Cover {
    fn new(m: u64) -> Cover {
        Cover { words: vec![0; m.div_ceil(64) as usize], count: 0 }
    }

    #[inline]
    fn get(&self, x: u64) -> bool {
        self.words[(x / 64) as usize] >> (x % 64) & 1 == 1
    }

    #[inline]
    fn set(&mut self, x: u64) {
        self.words[(x / 64) as usize] |= 1 << (x % 64);
        self.count += 1;
    }

    #[inline]
    fn clear(&mut self, x: u64) {
        self.words[(x / 64) as usize] &= !(1 << (x % 64));
        self.count -= 1;
    }

    fn first_uncovered(&self, m: u64) -> Option<u64> {
        for (i, &w) in self.words.iter().enumerate() {
            if w != u64::MAX {
                let x = i as u64 * 64 + (!w).trailing_zeros() as u64;
                if x < m {
                    return Some(x);
                }
            }
        }
        None
    }
}

/// Divisor-class bookkeeping: counts of attained difference classes per
/// divisor index, skipping the full-modulus class.
struct ClassCounts {
    class_index: Vec<usize>,
    full_index: usize,
    counts_a: Vec<u32>,
    counts_b: Vec<u32>,
}

impl ClassCounts {
    fn new(m: &Modulus) -> ClassCounts {
        let divisors = m.divisors();
        let class_index = (0..m.value())
            .map(|x| {
                m.divisor_index(m.divisor_class(x)).expect("class divides")
            })
            .collect();
        ClassCounts {
            class_index,
            full_index: divisors.len() - 1,
            counts_a: vec![0; divisors.len()],
            counts_b: vec![0; divisors.len()],
        }
    }

    fn add(&mut self, m: &Modulus, side_a: bool, x: u64, others: &[u64]) {
        for &y in others {
            let idx = self.class_index[m.sub(x, y) as usize];
            if side_a {
                self.counts_a[idx] += 1;
            } else {
                self.counts_b[idx] += 1;
            }
        }
    }

    fn remove(&mut self, m: &Modulus, side_a: bool, x: u64, others: &[u64]) {
        for &y in others {
            let idx = self.class_index[m.sub(x, y) as usize];
            if side_a {
                self.counts_a[idx] -= 1;
            } else {
                self.counts_b[idx] -= 1;
            }
        }
    }

    fn conflict(&self) -> bool {
        self.counts_a
            .iter()
            .zip(&self.counts_b)
            .enumerate()
            .any(|(idx, (&ca, &cb))| idx != self.full_index && ca > 0 && cb > 0)
    }
}

struct ComplementSearch<'a> {
    m: &'a Modulus,
    a_ms: &'a Multiset,
    a: Vec<u64>,
    div_a: Vec<bool>,
    class_index: Vec<usize>,
    full_index: usize,
    prune: bool,
    budget: u64,
    nodes: u64,
    exhausted: bool,
    stopped: bool,
}

impl<'a> ComplementSearch<'a> {
    fn run(
        &mut self,
        covered: &mut Cover,
        b: &mut Vec<u64>,
        emit: &mut dyn FnMut(&[u64]) -> bool,
    ) {
        if self.exhausted || self.stopped {
            return;
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            self.exhausted = true;
            return;
        }
        let Some(z) = covered.first_uncovered(self.m.value()) else {
            let mut found = b.clone();
            found.sort_unstable();
            let ok = Multiset::from_set(self.m.clone(), &found)
                .map(|bm| verify_tiling(self.a_ms, &bm))
                .unwrap_or(false);
            debug_assert!(ok);
            if ok && !emit(&found) {
                self.stopped = true;
            }
            return;
        };
        for i in 0..self.a.len() {
            let cand = self.m.sub(z, self.a[i]);
            if self
                .a
                .iter()
                .any(|&a| covered.get(self.m.add(cand, a)))
            {
                continue;
            }
            if self.prune
                && b.iter().any(|&b2| {
                    let idx = self.class_index[self.m.sub(cand, b2) as usize];
                    idx != self.full_index && self.div_a[idx]
                })
            {
                continue;
            }
            for &a in &self.a {
                covered.set(self.m.add(cand, a));
            }
            b.push(cand);
            self.run(covered, b, emit);
            b.pop();
            for &a in &self.a {
                covered.clear(self.m.add(cand, a));
            }
            if self.exhausted || self.stopped {
                return;
            }
        }
    }
}

/// Streams every complement of `a` containing zero to `visit`, which may
/// return `false` to stop early; complements are verified before emission.
pub fn enumerate_complements_with(
    a: &Multiset,
    cfg: &SearchConfig,
    mut visit: impl FnMut(&[u64]) -> bool,
) -> Result<Enumeration<()>> {
    let m = a.modulus();
    if m.value() != cfg.modulus.value() {
        return Err(Error::ModulusMismatch(m.value(), cfg.modulus.value()));
    }
    if !a.is_set() || a.support_len() == 0 {
        return Err(Error::InvalidArgument(
            "factor must be a nonempty set".into(),
        ));
    }
    let elems = a.support();
    let size = elems.len() as u64;
    if m.value() % size != 0 {
        return Err(Error::InvalidArgument(format!(
            "factor size {size} does not divide {}",
            m.value()
        )));
    }
    if let Some((sa, _)) = cfg.checked_split()? {
        if sa != size {
            return Err(Error::InvalidArgument(format!(
                "size split wants |A| = {sa}, factor has {size}"
            )));
        }
    }
    let divisors = m.divisors();
    let class_index: Vec<usize> = (0..m.value())
        .map(|x| m.divisor_index(m.divisor_class(x)).expect("class divides"))
        .collect();
    let mut div_a = vec![false; divisors.len()];
    for &x in &elems {
        for &y in &elems {
            if x != y {
                div_a[class_index[m.sub(x, y) as usize]] = true;
            }
        }
    }
    let mut search = ComplementSearch {
        m,
        a_ms: a,
        a: elems,
        div_a,
        full_index: divisors.len() - 1,
        class_index,
        prune: cfg.sands_prune,
        budget: cfg.node_budget,
        nodes: 0,
        exhausted: false,
        stopped: false,
    };
    let mut covered = Cover::new(m.value());
    for &a0 in &search.a {
        covered.set(a0);
    }
    let mut b = vec![0u64];
    search.run(&mut covered, &mut b, &mut visit);
    let status = if search.exhausted {
        SearchStatus::BudgetExhausted
    } else if search.stopped {
        SearchStatus::Stopped
    } else {
        SearchStatus::Complete
    };
    Ok(Enumeration { items: Vec::new(), status, nodes: search.nodes })
}

/// Collects every complement of `a` containing zero, in lexicographic
/// order.
pub fn enumerate_complements(
    a: &Multiset,
    cfg: &SearchConfig,
) -> Result<Enumeration<Vec<u64>>> {
    let mut items = Vec::new();
    let run = enumerate_complements_with(a, cfg, |b| {
        items.push(b.to_vec());
        true
    })?;
    items.sort_unstable();
    Ok(Enumeration { items, status: run.status, nodes: run.nodes })
}

#[derive(Clone)]
struct JointState {
    a: Vec<u64>,
    b: Vec<u64>,
    covered: Cover,
}

struct JointSearch<'a> {
    m: &'a Modulus,
    sa: usize,
    sb: usize,
    prune: bool,
    budget: u64,
    nodes: u64,
    exhausted: bool,
}

enum JointMove {
    ExtendB(u64),
    ExtendA(u64),
    ExtendBoth(u64, u64),
}

impl<'a> JointSearch<'a> {
    fn moves(&self, st: &JointState, z: u64) -> Vec<JointMove> {
        let mut out = Vec::new();
        if st.b.len() < self.sb {
            for &a in &st.a {
                out.push(JointMove::ExtendB(self.m.sub(z, a)));
            }
        }
        if st.a.len() < self.sa {
            for &b in &st.b {
                out.push(JointMove::ExtendA(self.m.sub(z, b)));
            }
        }
        if st.a.len() < self.sa && st.b.len() < self.sb {
            for a in 0..self.m.value() {
                let b = self.m.sub(z, a);
                if !st.a.contains(&a) && !st.b.contains(&b) {
                    out.push(JointMove::ExtendBoth(a, b));
                }
            }
        }
        out
    }

    fn cover_one(
        &self,
        st: &mut JointState,
        side_a: bool,
        x: u64,
    ) -> Option<Vec<u64>> {
        let partners: &[u64] = if side_a { &st.b } else { &st.a };
        let sums: Vec<u64> =
            partners.iter().map(|&y| self.m.add(x, y)).collect();
        if sums.iter().any(|&s| st.covered.get(s)) {
            return None;
        }
        for &s in &sums {
            st.covered.set(s);
        }
        if side_a {
            st.a.push(x);
        } else {
            st.b.push(x);
        }
        Some(sums)
    }

    fn uncover_one(&self, st: &mut JointState, side_a: bool, sums: &[u64]) {
        if side_a {
            st.a.pop();
        } else {
            st.b.pop();
        }
        for &s in sums {
            st.covered.clear(s);
        }
    }

    fn apply(
        &self,
        st: &mut JointState,
        classes: &mut ClassCounts,
        mv: &JointMove,
    ) -> Option<(Vec<u64>, Option<Vec<u64>>)> {
        match *mv {
            JointMove::ExtendB(b) => {
                let sums = self.cover_one(st, false, b)?;
                classes.add(self.m, false, b, &st.b[..st.b.len() - 1]);
                Some((sums, None))
            }
            JointMove::ExtendA(a) => {
                let sums = self.cover_one(st, true, a)?;
                classes.add(self.m, true, a, &st.a[..st.a.len() - 1]);
                Some((sums, None))
            }
            JointMove::ExtendBoth(a, b) => {
                let sums_a = self.cover_one(st, true, a)?;
                classes.add(self.m, true, a, &st.a[..st.a.len() - 1]);
                match self.cover_one(st, false, b) {
                    Some(sums_b) => {
                        classes.add(self.m, false, b, &st.b[..st.b.len() - 1]);
                        Some((sums_a, Some(sums_b)))
                    }
                    None => {
                        classes.remove(
                            self.m,
                            true,
                            a,
                            &st.a[..st.a.len() - 1],
                        );
                        self.uncover_one(st, true, &sums_a);
                        None
                    }
                }
            }
        }
    }

    fn undo(
        &self,
        st: &mut JointState,
        classes: &mut ClassCounts,
        mv: &JointMove,
        sums: (Vec<u64>, Option<Vec<u64>>),
    ) {
        match *mv {
            JointMove::ExtendB(b) => {
                classes.remove(self.m, false, b, &st.b[..st.b.len() - 1]);
                self.uncover_one(st, false, &sums.0);
            }
            JointMove::ExtendA(a) => {
                classes.remove(self.m, true, a, &st.a[..st.a.len() - 1]);
                self.uncover_one(st, true, &sums.0);
            }
            JointMove::ExtendBoth(a, b) => {
                if let Some(sb) = sums.1 {
                    classes.remove(self.m, false, b, &st.b[..st.b.len() - 1]);
                    self.uncover_one(st, false, &sb);
                }
                classes.remove(self.m, true, a, &st.a[..st.a.len() - 1]);
                self.uncover_one(st, true, &sums.0);
            }
        }
    }

    /// Emits the completed pair exactly once: splits with `sa == sb` reach
    /// every unordered pair through both orderings, so the lexicographically
    /// larger one is dropped; unequal splits reach each pair once and only
    /// normalize.
    fn emit(&self, st: &JointState, sink: &mut dyn FnMut(Vec<u64>, Vec<u64>)) {
        let mut a = st.a.clone();
        let mut b = st.b.clone();
        a.sort_unstable();
        b.sort_unstable();
        if a <= b {
            sink(a, b);
        } else if self.sa != self.sb {
            sink(b, a);
        }
    }

    fn run(
        &mut self,
        st: &mut JointState,
        classes: &mut ClassCounts,
        sink: &mut dyn FnMut(Vec<u64>, Vec<u64>),
    ) {
        if self.exhausted {
            return;
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            self.exhausted = true;
            return;
        }
        let Some(z) = st.covered.first_uncovered(self.m.value()) else {
            self.emit(st, sink);
            return;
        };
        for mv in self.moves(st, z) {
            let Some(sums) = self.apply(st, classes, &mv) else {
                continue;
            };
            if !(self.prune && classes.conflict()) {
                self.run(st, classes, sink);
            }
            self.undo(st, classes, &mv, sums);
            if self.exhausted {
                return;
            }
        }
    }

    /// Expands the root breadth-first until enough independent subtrees
    /// exist for parallel fan-out; covers completed along the way are
    /// emitted directly.
    fn frontier(
        &mut self,
        root: JointState,
        sink: &mut dyn FnMut(Vec<u64>, Vec<u64>),
    ) -> Vec<JointState> {
        let target =
            rayon::current_num_threads().max(1) * FRONTIER_TARGET_FACTOR;
        let mut states = vec![root];
        for _ in 0..FRONTIER_DEPTH_CAP {
            if states.len() >= target {
                break;
            }
            let mut next = Vec::new();
            for mut st in states {
                self.nodes += 1;
                let Some(z) = st.covered.first_uncovered(self.m.value())
                else {
                    self.emit(&st, sink);
                    continue;
                };
                let mut classes = ClassCounts::new(self.m);
                for (i, &a) in st.a.iter().enumerate() {
                    classes.add(self.m, true, a, &st.a[..i]);
                }
                for (i, &b) in st.b.iter().enumerate() {
                    classes.add(self.m, false, b, &st.b[..i]);
                }
                for mv in self.moves(&st, z) {
                    let Some(sums) = self.apply(&mut st, &mut classes, &mv)
                    else {
                        continue;
                    };
                    if !(self.prune && classes.conflict()) {
                        next.push(st.clone());
                    }
                    self.undo(&mut st, &mut classes, &mv, sums);
                }
            }
            states = next;
            if states.is_empty() {
                break;
            }
        }
        states
    }
}

fn fold_split<T, F, G>(
    m: &Modulus,
    sa: u64,
    sb: u64,
    cfg: &SearchConfig,
    init: &T,
    fold: &F,
    merge: &G,
) -> Result<(T, bool, u64)>
where
    T: Clone + Send + Sync,
    F: Fn(&mut T, &[u64], &[u64]) + Send + Sync,
    G: Fn(&mut T, T) + Send + Sync,
{
    let mut root = JointState {
        a: vec![0],
        b: vec![0],
        covered: Cover::new(m.value()),
    };
    root.covered.set(0);
    let mut driver = JointSearch {
        m,
        sa: sa as usize,
        sb: sb as usize,
        prune: cfg.sands_prune,
        budget: cfg.node_budget,
        nodes: 0,
        exhausted: false,
    };
    let mut acc = init.clone();
    let mut sink = |a: Vec<u64>, b: Vec<u64>| fold(&mut acc, &a, &b);
    let states = driver.frontier(root, &mut sink);
    let setup_nodes = driver.nodes;
    let quota = if states.is_empty() {
        cfg.node_budget
    } else {
        (cfg.node_budget.saturating_sub(setup_nodes) / states.len() as u64)
            .max(1)
    };
    let results: Vec<(T, bool, u64)> = states
        .into_par_iter()
        .map(|mut st| {
            let mut classes = ClassCounts::new(m);
            for (i, &a) in st.a.iter().enumerate() {
                classes.add(m, true, a, &st.a[..i]);
            }
            for (i, &b) in st.b.iter().enumerate() {
                classes.add(m, false, b, &st.b[..i]);
            }
            let mut task = JointSearch {
                m,
                sa: sa as usize,
                sb: sb as usize,
                prune: cfg.sands_prune,
                budget: quota,
                nodes: 0,
                exhausted: false,
            };
            let mut local = init.clone();
            let mut sink = |a: Vec<u64>, b: Vec<u64>| fold(&mut local, &a, &b);
            task.run(&mut st, &mut classes, &mut sink);
            (local, task.exhausted, task.nodes)
        })
        .collect();
    let mut exhausted = false;
    let mut nodes = setup_nodes;
    for (sub, ex, n) in results {
        merge(&mut acc, sub);
        exhausted |= ex;
        nodes += n;
    }
    Ok((acc, exhausted, nodes))
}

/// Streams every normalized tiling of the configured modulus through `fold`
/// without materializing the corpus.
///
/// Each unordered pair with zero in both factors is delivered exactly once,
/// lexicographically smaller factor first, both factors sorted ascending.
/// Per-subtree accumulators start from a clone of `init` and combine via
/// `merge` in a fixed order, so the result is deterministic for a given
/// budget regardless of scheduling.
pub fn fold_tilings<T, F, G>(
    cfg: &SearchConfig,
    init: T,
    fold: F,
    merge: G,
) -> Result<FoldRun<T>>
where
    T: Clone + Send + Sync,
    F: Fn(&mut T, &[u64], &[u64]) + Send + Sync,
    G: Fn(&mut T, T) + Send + Sync,
{
    let m = &cfg.modulus;
    if m.value() > cfg.exhaustive_cap {
        return Err(Error::InvalidArgument(format!(
            "{} exceeds the exhaustive cap {}; use randomized sampling",
            m.value(),
            cfg.exhaustive_cap
        )));
    }
    let split = cfg.checked_split()?;
    let mut splits: Vec<(u64, u64)> = Vec::new();
    for &d in m.divisors() {
        if d * d <= m.value() {
            splits.push((d, m.value() / d));
        }
    }
    if let Some((sa, sb)) = split {
        splits.retain(|&(x, y)| (x, y) == (sa, sb) || (y, x) == (sa, sb));
    }

    let gated = |acc: &mut T, a: &[u64], b: &[u64]| {
        if let Some((sa, _)) = split {
            if a.len() as u64 != sa {
                return;
            }
        }
        fold(acc, a, b);
    };
    let mut acc = init.clone();
    let mut exhausted = false;
    let mut nodes = 0u64;
    for (sa, sb) in splits {
        let (sub, ex, n) = fold_split(m, sa, sb, cfg, &init, &gated, &merge)?;
        merge(&mut acc, sub);
        exhausted |= ex;
        nodes += n;
    }
    let status = if exhausted {
        SearchStatus::BudgetExhausted
    } else {
        SearchStatus::Complete
    };
    Ok(FoldRun { value: acc, status, nodes })
}

/// Enumerates all tilings of the configured modulus with zero in both
/// factors, normalized so the first factor is lexicographically least.
pub fn enumerate_tilings(cfg: &SearchConfig) -> Result<Enumeration<TilingInstance>> {
    let run = fold_tilings(
        cfg,
        BTreeSet::new(),
        |acc: &mut BTreeSet<(Vec<u64>, Vec<u64>)>, a, b| {
            acc.insert((a.to_vec(), b.to_vec()));
        },
        |acc, sub| acc.extend(sub),
    )?;
    let items = run
        .value
        .into_iter()
        .map(|(a, b)| TilingInstance::from_sets(cfg.modulus.clone(), &a, &b))
        .collect::<Result<Vec<_>>>()?;
    Ok(Enumeration { items, status: run.status, nodes: run.nodes })
}

/// Keeps one representative per joint dilation orbit `(rA, rB)` over the
/// units; an optional post-filter for enumeration output.
pub fn dilation_orbit_filter(items: &[TilingInstance]) -> Vec<TilingInstance> {
    let mut kept = Vec::new();
    let mut seen: BTreeSet<(Vec<u64>, Vec<u64>)> = BTreeSet::new();
    for t in items {
        let m = t.modulus();
        let canon = m
            .units()
            .iter()
            .map(|&r| {
                let mut a: Vec<u64> =
                    t.a().support().iter().map(|&x| m.mul(r, x)).collect();
                let mut b: Vec<u64> =
                    t.b().support().iter().map(|&x| m.mul(r, x)).collect();
                a.sort_unstable();
                b.sort_unstable();
                if a <= b {
                    (a, b)
                } else {
                    (b, a)
                }
            })
            .min()
            .expect("unit group is nonempty");
        if seen.insert(canon) {
            kept.push(t.clone());
        }
    }
    kept
}

/// One generated tiling with the journal that rebuilds it from the standard
/// pair of its spectrum split.
#[derive(Debug, Clone)]
pub struct SampleRecord {
    pub index: u64,
    /// Prime powers assigned to the first factor's spectrum.
    pub spec_a: Vec<u64>,
    pub a_moves: Vec<IsometryTag>,
    pub b_moves: Vec<IsometryTag>,
    pub shifts: Vec<ShiftMove>,
    pub instance: TilingInstance,
}

fn all_prime_powers(m: &Modulus) -> Vec<u64> {
    let mut out = Vec::new();
    for nu in 0..m.num_primes() {
        let p = m.prime(nu);
        for e in 1..=m.exponent(nu) {
            out.push(p.pow(e));
        }
    }
    out
}

/// The standard pair for a spectrum split: the first factor built from the
/// given prime powers, the second from the complementary ones.
pub fn standard_pair_for_split(
    m: &Modulus,
    spec_a: &[u64],
) -> Result<TilingInstance> {
    let powers = all_prime_powers(m);
    for s in spec_a {
        if !powers.contains(s) {
            return Err(Error::InvalidArgument(format!(
                "{s} is not a prime power divisor of {}",
                m.value()
            )));
        }
    }
    let rest: Vec<u64> = powers
        .iter()
        .copied()
        .filter(|s| !spec_a.contains(s))
        .collect();
    let a = standard_complement(&Spectrum::from_elements(
        m.clone(),
        spec_a.to_vec(),
    )?);
    let b = standard_complement(&Spectrum::from_elements(m.clone(), rest)?);
    TilingInstance::new(a, b)
}

fn tag_to_map(m: &Modulus, tag: &IsometryTag) -> Result<IsometryMap> {
    match *tag {
        IsometryTag::Translation(c) => {
            Ok(IsometryMap::translation(m.clone(), c))
        }
        IsometryTag::Dilation(r) => IsometryMap::dilation(m.clone(), r),
        IsometryTag::PlaneExchange { c, c_prime, nu, alpha } => {
            IsometryMap::plane_exchange(m.clone(), c, c_prime, nu, alpha)
        }
        IsometryTag::Composite => Err(Error::InvalidArgument(
            "composite isometries cannot be journaled".into(),
        )),
    }
}

/// Rebuilds the instance a journal describes, verifying every step.
pub fn replay_sample(
    m: &Modulus,
    spec_a: &[u64],
    a_moves: &[IsometryTag],
    b_moves: &[IsometryTag],
    shifts: &[ShiftMove],
) -> Result<TilingInstance> {
    let t = standard_pair_for_split(m, spec_a)?;
    let mut a = t.a().clone();
    let mut b = t.b().clone();
    for tag in a_moves {
        a = tag_to_map(m, tag)?.apply(&a);
    }
    for tag in b_moves {
        b = tag_to_map(m, tag)?.apply(&b);
    }
    let t = TilingInstance::new(a, b)?;
    replay_chain(&t, shifts)
}

fn random_split(
    m: &Modulus,
    rng: &mut ChaCha12Rng,
    size_split: Option<(u64, u64)>,
) -> Result<Vec<u64>> {
    let powers = all_prime_powers(m);
    for _ in 0..10_000 {
        let pick: Vec<u64> = powers
            .iter()
            .copied()
            .filter(|_| rng.random_bool(0.5))
            .collect();
        let size: u64 = pick
            .iter()
            .map(|&s| {
                (0..m.num_primes())
                    .find(|&nu| s % m.prime(nu) == 0)
                    .map(|nu| m.prime(nu))
                    .unwrap_or(1)
            })
            .product();
        match size_split {
            Some((sa, _)) if size != sa => continue,
            _ => return Ok(pick),
        }
    }
    Err(Error::InvalidArgument(
        "no spectrum split matches the requested sizes".into(),
    ))
}

fn random_isometries(
    m: &Modulus,
    rng: &mut ChaCha12Rng,
) -> Result<Vec<IsometryTag>> {
    let mut tags = vec![IsometryTag::Translation(
        rng.random_range(0..m.value()),
    )];
    if rng.random_bool(0.5) {
        let units = m.units();
        tags.push(IsometryTag::Dilation(
            units[rng.random_range(0..units.len())],
        ));
    }
    if rng.random_bool(0.5) {
        let nu = rng.random_range(0..m.num_primes());
        let alpha = rng.random_range(0..m.exponent(nu));
        let c = rng.random_range(0..m.value());
        let c_prime = m.add(c, m.value() / m.prime(nu).pow(alpha + 1));
        tags.push(IsometryTag::PlaneExchange { c, c_prime, nu, alpha });
    }
    Ok(tags)
}

fn random_shift(
    t: &TilingInstance,
    rng: &mut ChaCha12Rng,
) -> Result<Option<(TilingInstance, ShiftMove)>> {
    let m = t.modulus();
    let nu = rng.random_range(0..m.num_primes());
    if m.exponent(nu) != 2 {
        return Ok(None);
    }
    let Some(pair_template) = find_cofiber(t, nu)? else {
        return Ok(None);
    };
    let step = m.fiber_step(nu);
    let roots: Vec<u64> = (0..step)
        .filter(|&r| m.fiber(r, nu).iter().all(|&z| t.a().contains(z)))
        .collect();
    if roots.is_empty() {
        return Ok(None);
    }
    let root = roots[rng.random_range(0..roots.len())];
    let fiber = m.fiber(root, nu);
    let p = m.prime(nu);
    let base_coord = m.coord(nu, root) % p;
    let targets: Vec<u64> = m
        .line(root, nu)
        .into_iter()
        .filter(|&x| m.coord(nu, x) % p != base_coord)
        .map(|x| x % step)
        .collect::<BTreeSet<u64>>()
        .into_iter()
        .filter(|&x| {
            !m.fiber(x, nu)
                .iter()
                .any(|&z| t.a().contains(z) && !fiber.contains(&z))
        })
        .collect();
    if targets.is_empty() {
        return Ok(None);
    }
    let target = targets[rng.random_range(0..targets.len())];
    let pair = CofiberPair { a_fiber: fiber, ..pair_template };
    fiber_shift(t, &pair, target).map(Some)
}

/// Generates `count` verified tilings from random spectrum splits, divisor
/// isometries, and legal fiber shifts; the stream is a pure function of the
/// seed.
pub fn sample_structured(
    cfg: &SearchConfig,
    count: u64,
) -> Result<Vec<SampleRecord>> {
    let m = &cfg.modulus;
    require_three_squares(m)?;
    cfg.checked_split()?;
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let mut out = Vec::with_capacity(count as usize);
    for index in 0..count {
        let mut spec_a = random_split(m, &mut rng, cfg.size_split)?;
        spec_a.sort_unstable();
        let a_moves = random_isometries(m, &mut rng)?;
        let b_moves = random_isometries(m, &mut rng)?;
        let base = standard_pair_for_split(m, &spec_a)?;
        let mut a = base.a().clone();
        let mut b = base.b().clone();
        for tag in &a_moves {
            a = tag_to_map(m, tag)?.apply(&a);
        }
        for tag in &b_moves {
            b = tag_to_map(m, tag)?.apply(&b);
        }
        let mut t = TilingInstance::new(a, b)?;
        let mut shifts = Vec::new();
        for _ in 0..rng.random_range(0..3u32) {
            if let Some((next, mv)) = random_shift(&t, &mut rng)? {
                t = next;
                shifts.push(mv);
            }
        }
        out.push(SampleRecord {
            index,
            spec_a,
            a_moves,
            b_moves,
            shifts,
            instance: t,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(m: u64) -> SearchConfig {
        SearchConfig::new(Modulus::new(m).unwrap())
    }

    #[test]
    fn complements_of_a_two_point_factor() {
        let config = cfg(12);
        let a = Multiset::from_set(config.modulus.clone(), &[0, 6]).unwrap();
        let run = enumerate_complements(&a, &config).unwrap();
        assert_eq!(run.status, SearchStatus::Complete);
        assert_eq!(run.items.len(), 32);
        for b in &run.items {
            assert!(b.contains(&0));
            assert_eq!(b.len(), 6);
        }
    }

    #[test]
    fn complements_include_the_known_one() {
        let config = cfg(12);
        let a =
            Multiset::from_set(config.modulus.clone(), &[0, 1, 2]).unwrap();
        let run = enumerate_complements(&a, &config).unwrap();
        assert_eq!(run.status, SearchStatus::Complete);
        assert!(run.items.contains(&vec![0, 3, 6, 9]));
    }

    #[test]
    fn trivial_factors_have_single_complements() {
        let config = cfg(12);
        let full: Vec<u64> = (0..12).collect();
        let a = Multiset::from_set(config.modulus.clone(), &full).unwrap();
        let run = enumerate_complements(&a, &config).unwrap();
        assert_eq!(run.items, vec![vec![0]]);

        let single = Multiset::from_set(config.modulus.clone(), &[0]).unwrap();
        let run = enumerate_complements(&single, &config).unwrap();
        assert_eq!(run.items, vec![full]);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let mut config = cfg(12);
        config.node_budget = 3;
        let a = Multiset::from_set(config.modulus.clone(), &[0, 6]).unwrap();
        let run = enumerate_complements(&a, &config).unwrap();
        assert_eq!(run.status, SearchStatus::BudgetExhausted);
        assert!(run.items.len() < 32);
    }

    #[test]
    fn early_stop_is_reported() {
        let config = cfg(12);
        let a = Multiset::from_set(config.modulus.clone(), &[0, 6]).unwrap();
        let mut seen = 0u32;
        let run = enumerate_complements_with(&a, &config, |_| {
            seen += 1;
            seen < 2
        })
        .unwrap();
        assert_eq!(run.status, SearchStatus::Stopped);
        assert_eq!(seen, 2);
    }

    #[test]
    fn pruning_does_not_change_the_result() {
        let mut config = cfg(24);
        let a = Multiset::from_set(config.modulus.clone(), &[0, 1, 2])
            .unwrap();
        let pruned = enumerate_complements(&a, &config).unwrap();
        config.sands_prune = false;
        let bare = enumerate_complements(&a, &config).unwrap();
        assert_eq!(pruned.items, bare.items);
        assert!(pruned.nodes <= bare.nodes);
    }

    #[test]
    fn tilings_of_z4_with_halved_sizes() {
        let mut config = cfg(4);
        config.size_split = Some((2, 2));
        let run = enumerate_tilings(&config).unwrap();
        assert_eq!(run.status, SearchStatus::Complete);
        let pairs: Vec<(Vec<u64>, Vec<u64>)> = run
            .items
            .iter()
            .map(|t| (t.a().support(), t.b().support()))
            .collect();
        assert_eq!(
            pairs,
            vec![
                (vec![0, 1], vec![0, 2]),
                (vec![0, 2], vec![0, 3]),
            ]
        );
    }

    #[test]
    fn prime_moduli_have_only_the_trivial_tiling() {
        let run = enumerate_tilings(&cfg(5)).unwrap();
        assert_eq!(run.items.len(), 1);
        assert_eq!(run.items[0].a().support(), vec![0]);
    }

    #[test]
    fn z12_count_is_pinned() {
        let run = enumerate_tilings(&cfg(12)).unwrap();
        assert_eq!(run.status, SearchStatus::Complete);
        let again = enumerate_tilings(&cfg(12)).unwrap();
        let key = |items: &[TilingInstance]| -> Vec<(Vec<u64>, Vec<u64>)> {
            items
                .iter()
                .map(|t| (t.a().support(), t.b().support()))
                .collect()
        };
        assert_eq!(key(&run.items), key(&again.items));
        assert_eq!(run.items.len(), 97);
    }

    #[test]
    fn exhaustive_cap_is_enforced() {
        let err = enumerate_tilings(&cfg(900)).unwrap_err();
        assert!(err.to_string().contains("randomized"));
    }

    #[test]
    fn dilation_filter_keeps_representatives() {
        let run = enumerate_tilings(&cfg(12)).unwrap();
        let filtered = dilation_orbit_filter(&run.items);
        assert!(!filtered.is_empty());
        assert!(filtered.len() < run.items.len());
    }

    #[test]
    fn empty_journal_rebuilds_the_standard_pair() {
        let m = Modulus::new(900).unwrap();
        let t = replay_sample(&m, &[4, 9, 25], &[], &[], &[]).unwrap();
        let direct = standard_pair_for_split(&m, &[4, 9, 25]).unwrap();
        assert_eq!(t.a().support(), direct.a().support());
        assert_eq!(t.b().support(), direct.b().support());
    }

    #[test]
    fn sampling_is_deterministic_and_replayable() {
        let mut config = cfg(900);
        config.seed = 7;
        config.size_split = Some((30, 30));
        let first = sample_structured(&config, 4).unwrap();
        let second = sample_structured(&config, 4).unwrap();
        for (x, y) in first.iter().zip(&second) {
            assert_eq!(x.instance.a().support(), y.instance.a().support());
            assert_eq!(x.instance.b().support(), y.instance.b().support());
        }
        for rec in &first {
            assert_eq!(rec.instance.a().support_len(), 30);
            assert_eq!(rec.instance.b().support_len(), 30);
            let rebuilt = replay_sample(
                &config.modulus,
                &rec.spec_a,
                &rec.a_moves,
                &rec.b_moves,
                &rec.shifts,
            )
            .unwrap();
            assert_eq!(
                rebuilt.a().support(),
                rec.instance.a().support()
            );
            assert_eq!(
                rebuilt.b().support(),
                rec.instance.b().support()
            );
        }
    }

    #[test]
    fn sampling_covers_shifted_instances() {
        let mut config = cfg(900);
        config.seed = 11;
        config.size_split = Some((30, 30));
        let records = sample_structured(&config, 12).unwrap();
        assert!(records.iter().any(|r| !r.shifts.is_empty()));
    }
}
