//! Self-maps of finite sets (functional graphs) and the four sets
//! `Fix ⊆ Orb ⊆ Stab ⊆ Atrac`.

mod example21;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use example21::{
    example21_apply, example21_backward_search, example21_classify, example21_truncate, ChainBehavior, ClassifyReport,
    Truncation, Z2Point,
};

/// A self-map of `{0, …, size-1}` given by its successor table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FiniteSelfMap {
    succ: Vec<usize>,
}

#[derive(Deserialize)]
struct RawMap {
    size: usize,
    succ: Vec<usize>,
}

impl FiniteSelfMap {
    pub fn new(succ: Vec<usize>) -> Result<Self> {
        if succ.is_empty() {
            return Err(Error::input("a self-map needs at least one point"));
        }
        let size = succ.len();
        if let Some((i, &s)) = succ.iter().enumerate().find(|(_, &s)| s >= size) {
            return Err(Error::input(format!("succ[{i}] = {s} is not a point of 0..{size}")));
        }
        Ok(Self { succ })
    }

    /// Reads `{"size": N, "succ": [...]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawMap = serde_json::from_str(text).map_err(|e| Error::input(format!("functional graph: {e}")))?;
        if raw.succ.len() != raw.size {
            return Err(Error::input(format!(
                "size is {} but succ has {} entries",
                raw.size,
                raw.succ.len()
            )));
        }
        Self::new(raw.succ)
    }

    pub fn size(&self) -> usize {
        self.succ.len()
    }

    pub fn succ(&self) -> &[usize] {
        &self.succ
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.succ[x]
    }

    pub fn image(&self, ys: &BTreeSet<usize>) -> BTreeSet<usize> {
        ys.iter().map(|&y| self.succ[y]).collect()
    }

    pub fn compose(&self, inner: &FiniteSelfMap) -> Result<FiniteSelfMap> {
        if inner.size() != self.size() {
            return Err(Error::input("cannot compose maps on different carriers"));
        }
        Ok(FiniteSelfMap {
            succ: inner.succ.iter().map(|&x| self.succ[x]).collect(),
        })
    }

    /// `φⁿ` (`n = 0` gives the identity).
    pub fn power(&self, n: usize) -> FiniteSelfMap {
        let mut succ: Vec<usize> = (0..self.size()).collect();
        for _ in 0..n {
            for s in succ.iter_mut() {
                *s = self.succ[*s];
            }
        }
        FiniteSelfMap { succ }
    }

    /// Preimage lists, each sorted ascending.
    pub fn preimages(&self) -> Vec<Vec<usize>> {
        let mut pre = vec![Vec::new(); self.size()];
        for (x, &y) in self.succ.iter().enumerate() {
            pre[y].push(x);
        }
        pre
    }

    /// `φ(Y) = Y`.
    pub fn stabilizes(&self, ys: &BTreeSet<usize>) -> bool {
        self.image(ys) == *ys
    }
}

/// The four sets of a self-map.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SetQuad<T: Ord> {
    pub fix: BTreeSet<T>,
    pub orb: BTreeSet<T>,
    pub stab: BTreeSet<T>,
    pub atrac: BTreeSet<T>,
}

impl<T: Ord> SetQuad<T> {
    /// `fix ⊆ orb ⊆ stab ⊆ atrac`.
    pub fn chain_holds(&self) -> bool {
        self.fix.is_subset(&self.orb) && self.orb.is_subset(&self.stab) && self.stab.is_subset(&self.atrac)
    }
}

/// Points lying on a cycle of the functional graph.
pub fn cyclic_points(f: &FiniteSelfMap) -> BTreeSet<usize> {
    #[derive(Clone, Copy, PartialEq, Eq)]
    enum Mark {
        New,
        OnPath,
        Done,
    }
    let n = f.size();
    let mut mark = vec![Mark::New; n];
    let mut cyclic = BTreeSet::new();
    let mut path = Vec::new();
    for start in 0..n {
        if mark[start] != Mark::New {
            continue;
        }
        let mut x = start;
        while mark[x] == Mark::New {
            mark[x] = Mark::OnPath;
            path.push(x);
            x = f.apply(x);
        }
        if mark[x] == Mark::OnPath {
            let pos = path.iter().position(|&p| p == x).expect("x is on the path");
            cyclic.extend(path[pos..].iter().copied());
        }
        for p in path.drain(..) {
            mark[p] = Mark::Done;
        }
    }
    cyclic
}

/// `∩ₙ φⁿ(X)` by iterating the set image until it stops shrinking.
pub fn attracting_set(f: &FiniteSelfMap) -> BTreeSet<usize> {
    let mut current: BTreeSet<usize> = (0..f.size()).collect();
    loop {
        let next = f.image(&current);
        if next == current {
            return current;
        }
        current = next;
    }
}

/// Leaf pruning: repeatedly drop points with no preimage among the
/// surviving points. Returns the survivors and the removal order.
fn prune(f: &FiniteSelfMap) -> (Vec<bool>, Vec<usize>) {
    let n = f.size();
    let mut indeg = vec![0usize; n];
    for &y in f.succ() {
        indeg[y] += 1;
    }
    let mut alive = vec![true; n];
    let mut queue: Vec<usize> = (0..n).filter(|&x| indeg[x] == 0).collect();
    let mut order = Vec::new();
    while let Some(x) = queue.pop() {
        alive[x] = false;
        order.push(x);
        let y = f.apply(x);
        indeg[y] -= 1;
        if indeg[y] == 0 {
            queue.push(y);
        }
    }
    (alive, order)
}

/// The largest `Y` with `φ(Y) = Y`, computed as a greatest fixpoint
/// (independently of [`attracting_set`]).
pub fn greatest_stabilized_subset(f: &FiniteSelfMap) -> BTreeSet<usize> {
    let (alive, _) = prune(f);
    (0..f.size()).filter(|&x| alive[x]).collect()
}

pub fn four_sets(f: &FiniteSelfMap) -> SetQuad<usize> {
    SetQuad {
        fix: (0..f.size()).filter(|&x| f.apply(x) == x).collect(),
        orb: cyclic_points(f),
        stab: greatest_stabilized_subset(f),
        atrac: attracting_set(f),
    }
}

/// Longest backward chain starting at each point; `None` means unbounded
/// (the point is in `Stab`).
pub fn backward_heights(f: &FiniteSelfMap) -> Vec<Option<usize>> {
    let (alive, order) = prune(f);
    let pre = f.preimages();
    let mut height: Vec<Option<usize>> = vec![None; f.size()];
    // removal order lists every preimage of a pruned point before the point
    for &x in &order {
        let h = pre[x]
            .iter()
            .map(|&p| height[p].expect("preimage pruned earlier") + 1)
            .max()
            .unwrap_or(0);
        height[x] = Some(h);
    }
    debug_assert!(order.iter().all(|&x| !alive[x]));
    height
}

/// A chain `x = x₀, x₁, …, x_depth` with `φ(xᵢ₊₁) = xᵢ`, choosing the
/// smallest admissible preimage at each step.
pub fn backward_chain(f: &FiniteSelfMap, x: usize, depth: usize) -> Result<Option<Vec<usize>>> {
    if x >= f.size() {
        return Err(Error::input(format!("point {x} outside 0..{}", f.size())));
    }
    let heights = backward_heights(f);
    let reaches = |p: usize, need: usize| heights[p].is_none_or(|h| h >= need);
    if !reaches(x, depth) {
        return Ok(None);
    }
    let pre = f.preimages();
    let mut chain = Vec::with_capacity(depth + 1);
    chain.push(x);
    let mut cur = x;
    for step in 1..=depth {
        let need = depth - step;
        cur = *pre[cur]
            .iter()
            .find(|&&p| reaches(p, need))
            .expect("height bound guarantees an admissible preimage");
        chain.push(cur);
    }
    Ok(Some(chain))
}
