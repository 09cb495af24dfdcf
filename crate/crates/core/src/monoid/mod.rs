//! Stable and attracting sets of a finite family of self-maps.
//!
//! On a finite carrier both sets are computed here by separate routes:
//! image iteration `A ← ∪ φ(A)` for the attracting set and removal of points
//! without a predecessor for the stable set. Word carriers live in the
//! submodules and are answered at a stated prefix precision.

mod episturmian;
mod runlength;

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::dynamics::FiniteSelfMap;
use crate::{Error, Result};

pub use episturmian::{
    desubstitute_branches, directive_path_exists, episturmian_generate, monoid_atrac_depth, parse_directive,
    prefix_preimages, AtracDepth, DesubNode, DesubReport, EpiReport, Token,
};
pub use runlength::{
    kolakoski, kolakoski_report, psi_expand, rle_decode, smooth_check, KolakoskiReport, RunLength, SmoothFailure,
    SmoothReport,
};

/// A named family of self-maps of `{0, …, size−1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MonoidSystem {
    pub size: usize,
    pub names: Vec<String>,
    pub maps: Vec<FiniteSelfMap>,
}

#[derive(Deserialize)]
struct RawSystem {
    size: usize,
    maps: Vec<RawNamedMap>,
}

#[derive(Deserialize)]
struct RawNamedMap {
    name: String,
    succ: Vec<usize>,
}

impl MonoidSystem {
    pub fn new(names: Vec<String>, maps: Vec<FiniteSelfMap>) -> Result<Self> {
        let Some(first) = maps.first() else {
            return Err(Error::input("a system needs at least one map"));
        };
        let size = first.size();
        if maps.iter().any(|m| m.size() != size) {
            return Err(Error::input("all maps must act on the same carrier"));
        }
        if names.len() != maps.len() {
            return Err(Error::input("one name per map is required"));
        }
        Ok(MonoidSystem { size, names, maps })
    }

    pub fn unnamed(maps: Vec<FiniteSelfMap>) -> Result<Self> {
        let names = (0..maps.len()).map(|i| format!("f{i}")).collect();
        Self::new(names, maps)
    }

    /// Reads `{"size": N, "maps": [{"name": …, "succ": […]}, …]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawSystem = serde_json::from_str(text).map_err(|e| Error::input(format!("system: {e}")))?;
        let mut names = Vec::new();
        let mut maps = Vec::new();
        for m in raw.maps {
            if m.succ.len() != raw.size {
                return Err(Error::input(format!(
                    "map {:?} has {} entries, expected {}",
                    m.name,
                    m.succ.len(),
                    raw.size
                )));
            }
            names.push(m.name);
            maps.push(FiniteSelfMap::new(m.succ)?);
        }
        Self::new(names, maps)
    }

    /// `∪ φ(Y)`.
    pub fn image(&self, ys: &BTreeSet<usize>) -> BTreeSet<usize> {
        self.maps.iter().flat_map(|m| m.image(ys)).collect()
    }

    pub fn stabilizes(&self, ys: &BTreeSet<usize>) -> bool {
        &self.image(ys) == ys
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MonoidSets {
    pub stab: BTreeSet<usize>,
    pub atrac: BTreeSet<usize>,
    pub equal: bool,
}

pub fn monoid_attracting_set(sys: &MonoidSystem) -> BTreeSet<usize> {
    let mut a: BTreeSet<usize> = (0..sys.size).collect();
    loop {
        let next = sys.image(&a);
        if next == a {
            return a;
        }
        a = next;
    }
}

/// Points that start an infinite backward chain `x₀ = φ₁(x₁)`, `x₁ = φ₂(x₂)`, …
/// with every `φᵢ` in the family.
pub fn monoid_stable_set(sys: &MonoidSystem) -> BTreeSet<usize> {
    let mut preds = vec![0usize; sys.size];
    for m in &sys.maps {
        for &y in m.succ() {
            preds[y] += 1;
        }
    }
    let mut queue: VecDeque<usize> = (0..sys.size).filter(|&x| preds[x] == 0).collect();
    let mut alive = vec![true; sys.size];
    while let Some(x) = queue.pop_front() {
        alive[x] = false;
        for m in &sys.maps {
            let y = m.apply(x);
            preds[y] -= 1;
            if preds[y] == 0 {
                queue.push_back(y);
            }
        }
    }
    (0..sys.size).filter(|&x| alive[x]).collect()
}

pub fn finite_monoid_sets(sys: &MonoidSystem) -> MonoidSets {
    let stab = monoid_stable_set(sys);
    let atrac = monoid_attracting_set(sys);
    MonoidSets {
        equal: stab == atrac,
        stab,
        atrac,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MaximalityReport {
    pub subsets: u64,
    pub stabilized: u64,
    pub stab_is_stabilized: bool,
    /// A stabilized subset not contained in the stable set, if any.
    pub counterexample: Option<BTreeSet<usize>>,
}

impl MaximalityReport {
    pub fn passes(&self) -> bool {
        self.stab_is_stabilized && self.counterexample.is_none()
    }
}

/// Checks over all `2^|X|` subsets that the stable set is stabilized and
/// contains every stabilized subset.
pub fn maximality_exhaustive(sys: &MonoidSystem) -> Result<MaximalityReport> {
    if sys.size > 20 {
        return Err(Error::input("exhaustive check limited to 20 points"));
    }
    let stab = monoid_stable_set(sys);
    let stab_mask: u32 = stab.iter().map(|&x| 1u32 << x).sum();
    // image of a subset, as masks
    let images: Vec<Vec<u32>> = sys
        .maps
        .iter()
        .map(|m| (0..sys.size).map(|x| 1u32 << m.apply(x)).collect())
        .collect();
    let mut stabilized = 0;
    let mut counterexample = None;
    let total: u32 = 1 << sys.size;
    for mask in 0..total {
        let mut img = 0u32;
        for per_map in &images {
            let mut rest = mask;
            while rest != 0 {
                let x = rest.trailing_zeros() as usize;
                img |= per_map[x];
                rest &= rest - 1;
            }
        }
        if img == mask {
            stabilized += 1;
            if mask & !stab_mask != 0 && counterexample.is_none() {
                counterexample = Some((0..sys.size).filter(|&x| mask >> x & 1 == 1).collect());
            }
        }
    }
    Ok(MaximalityReport {
        subsets: u64::from(total),
        stabilized,
        stab_is_stabilized: sys.stabilizes(&stab),
        counterexample,
    })
}
