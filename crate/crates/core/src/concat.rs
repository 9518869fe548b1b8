//! Concatenated circuit layouts and recursive sparseness.
//!
//! A level-`r` layout holds `N` root rectangles. Each level-`j` rectangle
//! owns `A_C` level-`(j−1)` children and level-0 rectangles are locations
//! (leaves). Leaf ids are assigned depth-first, so root `k` owns the
//! contiguous range `k·A_C^r .. (k+1)·A_C^r`.
//!
//! Error propagation is modelled by counts rather than states: a rectangle
//! first runs its pre-EC children, then corrects up to `corrects` non-sparse
//! sub-blocks, then runs its during-EC children. A level-`j` rectangle acts
//! on a level-`j` block of `m` sub-blocks, child `i` on sub-block `i mod m`.

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::random::seeded;

/// Upper limit on the number of leaves a layout may hold.
pub const MAX_LEAVES: usize = 1 << 22;

/// Rejection-sampling budget for [`lemma8_property_check`].
pub const MAX_SAMPLING_ATTEMPTS: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeModel {
    corrects: usize,
    spread: usize,
    m: usize,
    a_c: usize,
}

impl CodeModel {
    /// A code correcting two errors with spread one, `m` qubits per block and
    /// `a_c` locations per 1-rectangle.
    pub fn new(m: usize, a_c: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::param("m", "block size must be at least 1"));
        }
        if a_c < 2 {
            return Err(Error::param("A_C", format!("{a_c} (must be at least 2)")));
        }
        Ok(Self {
            corrects: 2,
            spread: 1,
            m,
            a_c,
        })
    }

    /// Code with arbitrary capacity, for negative controls only.
    #[cfg(test)]
    pub(crate) fn with_capacity(corrects: usize, spread: usize, m: usize, a_c: usize) -> Self {
        Self {
            corrects,
            spread,
            m,
            a_c,
        }
    }

    pub fn corrects(&self) -> usize {
        self.corrects
    }

    pub fn spread(&self) -> usize {
        self.spread
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn a_c(&self) -> usize {
        self.a_c
    }

    fn validate(&self) -> Result<()> {
        if self.corrects != 2 || self.spread != 1 {
            return Err(Error::param(
                "code",
                "computation code must correct 2 errors with spread 1",
            ));
        }
        Self::new(self.m, self.a_c).map(|_| ())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RectangleBody {
    Location { leaf: usize },
    Children(Vec<Rectangle>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rectangle {
    pub level: usize,
    /// Index of the root, then the child index at each level below it.
    pub path: Vec<usize>,
    pub body: RectangleBody,
}

impl Rectangle {
    fn build(level: usize, path: Vec<usize>, a_c: usize, next_leaf: &mut usize) -> Self {
        let body = if level == 0 {
            let leaf = *next_leaf;
            *next_leaf += 1;
            RectangleBody::Location { leaf }
        } else {
            RectangleBody::Children(
                (0..a_c)
                    .map(|i| {
                        let mut p = path.clone();
                        p.push(i);
                        Rectangle::build(level - 1, p, a_c, next_leaf)
                    })
                    .collect(),
            )
        };
        Rectangle { level, path, body }
    }

    pub fn children(&self) -> &[Rectangle] {
        match &self.body {
            RectangleBody::Children(c) => c,
            RectangleBody::Location { .. } => &[],
        }
    }

    pub fn leaves(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<usize>) {
        match &self.body {
            RectangleBody::Location { leaf } => out.push(*leaf),
            RectangleBody::Children(c) => c.iter().for_each(|r| r.collect_leaves(out)),
        }
    }

    /// Rectangles exactly `level` levels above the leaves, within this one.
    fn at_level<'a>(&'a self, level: usize, out: &mut Vec<&'a Rectangle>) {
        if self.level == level {
            out.push(self);
        } else {
            self.children().iter().for_each(|c| c.at_level(level, out));
        }
    }

    fn contains_fault(&self, faults: &FaultSet) -> bool {
        match &self.body {
            RectangleBody::Location { leaf } => faults.contains(*leaf),
            RectangleBody::Children(c) => c.iter().any(|r| r.contains_fault(faults)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitLayout {
    n_base: usize,
    levels: usize,
    code: CodeModel,
    /// Number of level-`r` blocks in the register; root `k` acts on block
    /// `k mod register_blocks`.
    register_blocks: usize,
    roots: Vec<Rectangle>,
}

/// Concatenated layout with `n_base` root rectangles of depth `levels`.
pub fn build_concatenation(n_base: usize, levels: usize, code: CodeModel) -> Result<CircuitLayout> {
    if n_base == 0 {
        return Err(Error::param("N", "at least one base location is required"));
    }
    code.validate()?;
    let per_root = checked_pow(code.a_c, levels)
        .ok_or_else(|| Error::param("r", "layout too large"))?;
    let total = per_root
        .checked_mul(n_base)
        .filter(|&t| t <= MAX_LEAVES)
        .ok_or_else(|| Error::param("r", format!("layout exceeds {MAX_LEAVES} locations")))?;
    let mut next_leaf = 0;
    let roots = (0..n_base)
        .map(|k| Rectangle::build(levels, vec![k], code.a_c, &mut next_leaf))
        .collect();
    debug_assert_eq!(next_leaf, total);
    Ok(CircuitLayout {
        n_base,
        levels,
        code,
        register_blocks: 1,
        roots,
    })
}

fn checked_pow(base: usize, exp: usize) -> Option<usize> {
    (0..exp).try_fold(1usize, |acc, _| acc.checked_mul(base))
}

impl CircuitLayout {
    pub fn with_register_blocks(mut self, blocks: usize) -> Result<Self> {
        if blocks == 0 {
            return Err(Error::param("register_blocks", "must be at least 1"));
        }
        self.register_blocks = blocks;
        Ok(self)
    }

    pub fn n_base(&self) -> usize {
        self.n_base
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn code(&self) -> &CodeModel {
        &self.code
    }

    pub fn register_blocks(&self) -> usize {
        self.register_blocks
    }

    pub fn roots(&self) -> &[Rectangle] {
        &self.roots
    }

    pub fn leaves_per_root(&self) -> usize {
        checked_pow(self.code.a_c, self.levels).expect("checked at construction")
    }

    pub fn leaf_count(&self) -> usize {
        self.n_base * self.leaves_per_root()
    }

    /// Rectangle indices from the root down to leaf `leaf`.
    pub fn leaf_path(&self, leaf: usize) -> Option<Vec<usize>> {
        if leaf >= self.leaf_count() {
            return None;
        }
        let per_root = self.leaves_per_root();
        let mut path = vec![leaf / per_root];
        let mut rem = leaf % per_root;
        let mut span = per_root;
        for _ in 0..self.levels {
            span /= self.code.a_c;
            path.push(rem / span);
            rem %= span;
        }
        Some(path)
    }

    /// Structural checks for layouts read back from JSON.
    pub fn validate(&self) -> Result<()> {
        self.code.validate()?;
        let fresh = build_concatenation(self.n_base, self.levels, self.code)?;
        if fresh.roots != self.roots {
            return Err(Error::param("layout", "rectangle tree does not match N, r and A_C"));
        }
        if self.register_blocks == 0 {
            return Err(Error::param("register_blocks", "must be at least 1"));
        }
        Ok(())
    }
}

/// Faulty locations of a layout.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FaultSet {
    faulty_leaves: BTreeSet<usize>,
}

impl FaultSet {
    pub fn new(leaves: impl IntoIterator<Item = usize>, layout: &CircuitLayout) -> Result<Self> {
        let faulty_leaves: BTreeSet<usize> = leaves.into_iter().collect();
        if let Some(&bad) = faulty_leaves.iter().find(|&&l| l >= layout.leaf_count()) {
            return Err(Error::param(
                "faults",
                format!("leaf {bad} outside layout of {} locations", layout.leaf_count()),
            ));
        }
        Ok(Self { faulty_leaves })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn contains(&self, leaf: usize) -> bool {
        self.faulty_leaves.contains(&leaf)
    }

    pub fn len(&self) -> usize {
        self.faulty_leaves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faulty_leaves.is_empty()
    }

    pub fn leaves(&self) -> impl Iterator<Item = usize> + '_ {
        self.faulty_leaves.iter().copied()
    }

    pub fn without(&self, leaf: usize) -> Self {
        let mut s = self.clone();
        s.faulty_leaves.remove(&leaf);
        s
    }
}

/// A node of a tree on which recursive `(j,1)`-sparseness is defined.
pub(crate) trait SparseNode: Sized {
    fn subtrees(&self) -> Vec<Self>;
    /// Verdict for a leaf.
    fn leaf_clean(&self) -> bool;
    /// Nodes marked failed are non-sparse regardless of their children.
    fn failed(&self) -> bool {
        false
    }
}

/// `(j,1)`-sparse: empty at a leaf, otherwise at most one child is not sparse.
pub(crate) fn recursively_sparse<N: SparseNode>(node: &N) -> bool {
    if node.failed() {
        return false;
    }
    let children = node.subtrees();
    if children.is_empty() {
        return node.leaf_clean();
    }
    children.iter().filter(|c| !recursively_sparse(*c)).count() <= 1
}

#[derive(Clone, Copy)]
struct FaultView<'a> {
    rect: &'a Rectangle,
    faults: &'a FaultSet,
}

impl SparseNode for FaultView<'_> {
    fn subtrees(&self) -> Vec<Self> {
        self.rect
            .children()
            .iter()
            .map(|rect| FaultView {
                rect,
                faults: self.faults,
            })
            .collect()
    }

    fn leaf_clean(&self) -> bool {
        match self.rect.body {
            RectangleBody::Location { leaf } => !self.faults.contains(leaf),
            RectangleBody::Children(_) => true,
        }
    }
}

/// Whether `faults` is `(level,1)`-sparse in every level-`level` rectangle.
pub fn is_sparse(faults: &FaultSet, layout: &CircuitLayout, level: usize) -> Result<bool> {
    if level > layout.levels {
        return Err(Error::param(
            "level",
            format!("{level} exceeds layout depth {}", layout.levels),
        ));
    }
    let mut rects = Vec::new();
    for root in &layout.roots {
        root.at_level(level, &mut rects);
    }
    Ok(rects
        .into_iter()
        .all(|rect| recursively_sparse(&FaultView { rect, faults })))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    /// Before the rectangle's error correction; caught by it.
    PreEc,
    /// During or after error correction; survives to the rectangle's end.
    DuringEc,
}

/// Phase of each child position, per rectangle level.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    /// `by_level[j-1][i]` is the phase of child `i` inside a level-`j` rectangle.
    by_level: Vec<Vec<Option<Phase>>>,
}

impl Schedule {
    /// The same child pattern at every level.
    pub fn uniform(pattern: Vec<Phase>, levels: usize) -> Self {
        let row: Vec<Option<Phase>> = pattern.into_iter().map(Some).collect();
        Self {
            by_level: vec![row; levels],
        }
    }

    /// Every child of every rectangle in the same phase.
    pub fn all(phase: Phase, layout: &CircuitLayout) -> Self {
        Self::uniform(vec![phase; layout.code.a_c], layout.levels)
    }

    /// Explicit per-level patterns; `None` leaves a position unassigned.
    pub fn per_level(by_level: Vec<Vec<Option<Phase>>>) -> Self {
        Self { by_level }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, layout: &CircuitLayout) -> Self {
        let by_level = (0..layout.levels)
            .map(|_| {
                (0..layout.code.a_c)
                    .map(|_| Some(if rng.random_bool(0.5) { Phase::PreEc } else { Phase::DuringEc }))
                    .collect()
            })
            .collect();
        Self { by_level }
    }

    /// Phase of child `position` inside a level-`level` rectangle.
    pub fn phase(&self, level: usize, position: usize) -> Option<Phase> {
        self.by_level
            .get(level.checked_sub(1)?)
            .and_then(|row| row.get(position).copied().flatten())
    }
}

/// Error descriptor of a block: a qubit, or `m` sub-blocks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockState {
    Qubit { error: bool },
    Block { failed: bool, sub_blocks: Vec<BlockState> },
}

impl BlockState {
    pub fn fresh(level: usize, m: usize) -> Self {
        if level == 0 {
            BlockState::Qubit { error: false }
        } else {
            BlockState::Block {
                failed: false,
                sub_blocks: vec![Self::fresh(level - 1, m); m],
            }
        }
    }

    /// Uncorrectable block: every qubit erroneous.
    pub fn garbage(level: usize, m: usize) -> Self {
        if level == 0 {
            BlockState::Qubit { error: true }
        } else {
            BlockState::Block {
                failed: true,
                sub_blocks: vec![Self::garbage(level - 1, m); m],
            }
        }
    }

    pub fn level(&self) -> usize {
        match self {
            BlockState::Qubit { .. } => 0,
            BlockState::Block { sub_blocks, .. } => 1 + sub_blocks[0].level(),
        }
    }

    pub fn qubit_count(&self) -> usize {
        match self {
            BlockState::Qubit { .. } => 1,
            BlockState::Block { sub_blocks, .. } => sub_blocks.iter().map(Self::qubit_count).sum(),
        }
    }

    pub fn error_count(&self) -> usize {
        match self {
            BlockState::Qubit { error } => usize::from(*error),
            BlockState::Block { sub_blocks, .. } => sub_blocks.iter().map(Self::error_count).sum(),
        }
    }

    pub fn is_failed(&self) -> bool {
        matches!(self, BlockState::Block { failed: true, .. })
    }

    /// Qubit-level `(j,1)`-sparseness, with failed blocks never sparse.
    pub fn is_sparse(&self) -> bool {
        recursively_sparse(&self)
    }
}

impl SparseNode for &BlockState {
    fn subtrees(&self) -> Vec<Self> {
        match self {
            BlockState::Qubit { .. } => Vec::new(),
            BlockState::Block { sub_blocks, .. } => sub_blocks.iter().collect(),
        }
    }

    fn leaf_clean(&self) -> bool {
        !matches!(self, BlockState::Qubit { error: true })
    }

    fn failed(&self) -> bool {
        self.is_failed()
    }
}

/// Register state after running every root rectangle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockErrorState {
    pub blocks: Vec<BlockState>,
    /// Sparseness of the acted-on block at the end of each root rectangle's
    /// working period, in execution order.
    pub period_sparse: Vec<bool>,
}

impl BlockErrorState {
    pub fn failed(&self) -> Vec<bool> {
        self.blocks.iter().map(BlockState::is_failed).collect()
    }

    pub fn all_periods_sparse(&self) -> bool {
        self.period_sparse.iter().all(|&s| s)
    }
}

struct Propagator<'a> {
    code: &'a CodeModel,
    faults: &'a FaultSet,
    schedule: &'a Schedule,
}

impl Propagator<'_> {
    fn run(&self, rect: &Rectangle, block: &mut BlockState) -> Result<()> {
        match &rect.body {
            RectangleBody::Location { leaf } => {
                if self.faults.contains(*leaf) {
                    if let BlockState::Qubit { error } = block {
                        *error = true;
                    }
                }
                Ok(())
            }
            RectangleBody::Children(children) => self.run_rectangle(rect.level, children, block),
        }
    }

    fn run_rectangle(&self, level: usize, children: &[Rectangle], block: &mut BlockState) -> Result<()> {
        let m = self.code.m;
        let mut pre = Vec::new();
        let mut during = Vec::new();
        for (i, child) in children.iter().enumerate() {
            match self.schedule.phase(level, i) {
                Some(Phase::PreEc) => pre.push(i),
                Some(Phase::DuringEc) => during.push(i),
                None if child.contains_fault(self.faults) => {
                    let leaf = child.leaves().into_iter().find(|&l| self.faults.contains(l));
                    return Err(Error::UnassignedPhase {
                        leaf: leaf.unwrap_or_default(),
                        position: i,
                    });
                }
                None => during.push(i),
            }
        }

        for &i in &pre {
            self.run_on_sub_block(&children[i], i, block)?;
        }

        // error correction
        let BlockState::Block { sub_blocks, .. } = block else {
            unreachable!("rectangle of level {level} acting on a qubit");
        };
        let dirty: Vec<usize> = (0..sub_blocks.len())
            .filter(|&s| !sub_blocks[s].is_sparse())
            .collect();
        if dirty.len() > self.code.corrects {
            *block = BlockState::garbage(level, m);
            return Ok(());
        }
        for s in dirty {
            sub_blocks[s] = BlockState::fresh(level - 1, m);
        }

        for &i in &during {
            self.run_on_sub_block(&children[i], i, block)?;
        }
        Ok(())
    }

    /// Child `i` acts on sub-blocks `i, i+1, …, i+spread−1 (mod m)` when it is a
    /// location, otherwise on sub-block `i mod m`.
    fn run_on_sub_block(&self, child: &Rectangle, i: usize, block: &mut BlockState) -> Result<()> {
        let m = self.code.m;
        let BlockState::Block { sub_blocks, .. } = block else {
            unreachable!("rectangle acting on a qubit");
        };
        if child.level == 0 {
            for s in 0..self.code.spread.min(m) {
                self.run(child, &mut sub_blocks[(i + s) % m])?;
            }
            Ok(())
        } else {
            self.run(child, &mut sub_blocks[i % m])
        }
    }
}

/// Runs the abstract rectangle semantics over the whole layout.
pub fn propagate_errors(
    layout: &CircuitLayout,
    faults: &FaultSet,
    schedule: &Schedule,
) -> Result<BlockErrorState> {
    let code = &layout.code;
    let mut blocks = vec![BlockState::fresh(layout.levels, code.m); layout.register_blocks];
    let mut period_sparse = Vec::with_capacity(layout.n_base);
    let prop = Propagator {
        code,
        faults,
        schedule,
    };
    for (k, root) in layout.roots.iter().enumerate() {
        let b = k % layout.register_blocks;
        // at r = 0 the root is a location and the block a single qubit
        prop.run(root, &mut blocks[b])?;
        period_sparse.push(blocks[b].is_sparse());
    }
    Ok(BlockErrorState {
        blocks,
        period_sparse,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Lemma8Report {
    pub trials: usize,
    /// Samples rejected for not being sparse.
    pub rejected: usize,
    /// Accepted samples with at least one fault.
    pub nonempty: usize,
    pub violations: usize,
}

/// Samples random sparse fault paths and checks that every working period
/// ends with a sparse error set.
pub fn lemma8_property_check(layout: &CircuitLayout, n_trials: usize, seed: u64) -> Result<Lemma8Report> {
    if layout.levels > 3 {
        return Err(Error::param("r", "property check is limited to r <= 3"));
    }
    let mut rng = seeded(seed);
    let per_root = layout.leaves_per_root();
    let max_density = (3.0 / per_root as f64).min(0.6);
    let mut report = Lemma8Report::default();
    let mut attempts = 0usize;
    while report.trials < n_trials {
        attempts += 1;
        if attempts > MAX_SAMPLING_ATTEMPTS {
            return Err(Error::NoConvergence(format!(
                "rejection sampling exceeded {MAX_SAMPLING_ATTEMPTS} attempts"
            )));
        }
        let density = rng.random_range(0.0..=max_density);
        let leaves: Vec<usize> = (0..layout.leaf_count())
            .filter(|_| rng.random_bool(density))
            .collect();
        let faults = FaultSet::new(leaves, layout)?;
        if !is_sparse(&faults, layout, layout.levels)? {
            report.rejected += 1;
            continue;
        }
        let schedule = Schedule::random(&mut rng, layout);
        let state = propagate_errors(layout, &faults, &schedule)?;
        report.trials += 1;
        if !faults.is_empty() {
            report.nonempty += 1;
        }
        if !state.all_periods_sparse() {
            report.violations += 1;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layout(n: usize, r: usize, a_c: usize, m: usize) -> CircuitLayout {
        build_concatenation(n, r, CodeModel::new(m, a_c).unwrap()).unwrap()
    }

    #[test]
    fn leaf_counts() {
        assert_eq!(layout(1, 0, 5, 5).leaf_count(), 1);
        assert_eq!(layout(1, 1, 5, 5).leaf_count(), 5);
        assert_eq!(layout(3, 2, 4, 5).leaf_count(), 48);
        let l = layout(3, 2, 4, 5);
        let mut all: Vec<usize> = l.roots().iter().flat_map(|r| r.leaves()).collect();
        all.sort_unstable();
        assert_eq!(all, (0..48).collect::<Vec<_>>());
    }

    #[test]
    fn leaf_paths_are_unique_and_match_tree() {
        let l = layout(2, 2, 3, 3);
        let mut seen = BTreeSet::new();
        for leaf in 0..l.leaf_count() {
            assert!(seen.insert(l.leaf_path(leaf).unwrap()));
        }
        // walk the tree and compare
        fn walk(r: &Rectangle, l: &CircuitLayout) {
            match &r.body {
                RectangleBody::Location { leaf } => assert_eq!(l.leaf_path(*leaf).unwrap(), r.path),
                RectangleBody::Children(c) => c.iter().for_each(|x| walk(x, l)),
            }
        }
        l.roots().iter().for_each(|r| walk(r, &l));
        assert!(l.leaf_path(l.leaf_count()).is_none());
    }

    #[test]
    fn construction_errors() {
        let code = CodeModel::new(5, 5).unwrap();
        assert!(build_concatenation(0, 1, code).is_err());
        assert!(build_concatenation(1, 40, code).is_err());
        assert!(CodeModel::new(0, 5).is_err());
        assert!(CodeModel::new(5, 1).is_err());
    }

    #[test]
    fn sparseness_examples() {
        let l1 = layout(1, 1, 5, 5);
        assert!(is_sparse(&FaultSet::empty(), &l1, 1).unwrap());
        assert!(is_sparse(&FaultSet::new([3], &l1).unwrap(), &l1, 1).unwrap());
        assert!(!is_sparse(&FaultSet::new([0, 1], &l1).unwrap(), &l1, 1).unwrap());
        assert!(is_sparse(&FaultSet::new([0, 1], &l1).unwrap(), &l1, 0).is_ok());
        assert!(!is_sparse(&FaultSet::new([0], &l1).unwrap(), &l1, 0).unwrap());
        assert!(is_sparse(&FaultSet::empty(), &l1, 2).is_err());

        let l2 = layout(1, 2, 5, 5);
        // child 1-rectangle 0 holds two faults, children 2 and 4 one each
        let f = FaultSet::new([0, 1, 10, 22], &l2).unwrap();
        assert!(is_sparse(&f, &l2, 2).unwrap());
        assert!(!is_sparse(&f, &l2, 1).unwrap());
        // two bad children
        let g = FaultSet::new([0, 1, 5, 6], &l2).unwrap();
        assert!(!is_sparse(&g, &l2, 2).unwrap());
    }

    #[test]
    fn fault_set_rejects_unknown_leaves() {
        let l = layout(1, 1, 5, 5);
        assert!(FaultSet::new([5], &l).is_err());
    }

    #[test]
    fn propagate_fault_free_run() {
        let l = layout(2, 2, 5, 5);
        let s = propagate_errors(&l, &FaultSet::empty(), &Schedule::all(Phase::PreEc, &l)).unwrap();
        assert!(s.blocks.iter().all(|b| b.error_count() == 0));
        assert_eq!(s.failed(), vec![false]);
        assert!(s.all_periods_sparse());
    }

    #[test]
    fn single_pre_ec_fault_is_corrected() {
        let l = layout(1, 1, 5, 5);
        let f = FaultSet::new([2], &l).unwrap();
        let s = propagate_errors(&l, &f, &Schedule::all(Phase::PreEc, &l)).unwrap();
        assert_eq!(s.blocks[0].error_count(), 0);
        assert!(!s.blocks[0].is_failed());
    }

    #[test]
    fn single_during_ec_fault_leaves_one_error() {
        let l = layout(1, 1, 5, 5);
        let f = FaultSet::new([2], &l).unwrap();
        let s = propagate_errors(&l, &f, &Schedule::all(Phase::DuringEc, &l)).unwrap();
        assert_eq!(s.blocks[0].error_count(), 1);
        assert!(s.blocks[0].is_sparse());
    }

    #[test]
    fn three_pre_ec_faults_fail_the_block() {
        let l = layout(1, 1, 5, 5);
        let f = FaultSet::new([0, 2, 4], &l).unwrap();
        let s = propagate_errors(&l, &f, &Schedule::all(Phase::PreEc, &l)).unwrap();
        assert!(s.blocks[0].is_failed());
        assert_eq!(s.failed(), vec![true]);
        assert_eq!(s.blocks[0].error_count(), 5);
        // two are still within capacity
        let f2 = FaultSet::new([0, 2], &l).unwrap();
        let s2 = propagate_errors(&l, &f2, &Schedule::all(Phase::PreEc, &l)).unwrap();
        assert!(!s2.blocks[0].is_failed());
        assert_eq!(s2.blocks[0].error_count(), 0);
    }

    #[test]
    fn incoming_error_plus_one_fault_is_corrected() {
        // the first rectangle leaves one error, the second corrects it together
        // with its own pre-EC fault
        let l = layout(2, 1, 5, 5);
        let f = FaultSet::new([1, 7], &l).unwrap();
        let sched = Schedule::uniform(
            vec![Phase::DuringEc, Phase::DuringEc, Phase::PreEc, Phase::PreEc, Phase::PreEc],
            1,
        );
        let s = propagate_errors(&l, &f, &sched).unwrap();
        assert_eq!(s.period_sparse, vec![true, true]);
        assert_eq!(s.blocks[0].error_count(), 0);
    }

    #[test]
    fn unassigned_phase_is_an_error() {
        let l = layout(1, 1, 5, 5);
        let sched = Schedule::per_level(vec![vec![Some(Phase::PreEc), None, None, None, None]]);
        let f = FaultSet::new([3], &l).unwrap();
        assert!(matches!(
            propagate_errors(&l, &f, &sched),
            Err(Error::UnassignedPhase { leaf: 3, position: 3 })
        ));
        // a fault-free unassigned position is fine
        let g = FaultSet::new([0], &l).unwrap();
        assert!(propagate_errors(&l, &g, &sched).is_ok());
    }

    #[test]
    fn weaker_codes_break_the_property() {
        // correcting only one error cannot absorb an incoming error plus a new fault
        let weak = CodeModel::with_capacity(1, 1, 5, 5);
        let mut l = layout(2, 1, 5, 5);
        l.code = weak;
        let f = FaultSet::new([1, 7], &l).unwrap();
        let sched = Schedule::uniform(
            vec![Phase::DuringEc, Phase::DuringEc, Phase::PreEc, Phase::PreEc, Phase::PreEc],
            1,
        );
        let s = propagate_errors(&l, &f, &sched).unwrap();
        assert!(!s.all_periods_sparse());

        // spread two turns a single during-EC fault into two errors
        let spready = CodeModel::with_capacity(2, 2, 5, 5);
        let mut l = layout(1, 1, 5, 5);
        l.code = spready;
        let f = FaultSet::new([0], &l).unwrap();
        let s = propagate_errors(&l, &f, &Schedule::all(Phase::DuringEc, &l)).unwrap();
        assert!(!s.all_periods_sparse());
    }

    #[test]
    fn property_check_small_runs() {
        for r in 1..=2 {
            let l = layout(3, r, 5, 5);
            let rep = lemma8_property_check(&l, 200, 9).unwrap();
            assert_eq!(rep.violations, 0, "r={r}: {rep:?}");
            assert_eq!(rep.trials, 200);
            assert!(rep.nonempty > 50);
        }
    }

    #[test]
    fn property_check_detects_weak_code() {
        let mut l = layout(3, 1, 5, 5);
        l.code = CodeModel::with_capacity(1, 1, 5, 5);
        let rep = lemma8_property_check(&l, 300, 4).unwrap();
        assert!(rep.violations > 0);
    }

    #[test]
    fn layout_validate_catches_tampering() {
        let mut l = layout(1, 1, 5, 5);
        assert!(l.validate().is_ok());
        l.roots[0].path = vec![9];
        assert!(l.validate().is_err());
    }
}
