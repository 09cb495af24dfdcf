//! The staircase map on `X = {(n, m) ∈ ℤ² | 0 ≤ m ≤ max(n-1, 0)}`:
//! `(n, m) ↦ (n, m-1)` for `m > 0` and `(n, 0) ↦ (min(n-1, 0), 0)`.
//!
//! Its attracting set is the ray `{(n, 0) | n ≤ 0}` while its stable set is
//! empty: every backward chain from the ray walks up to `(0, 0)`, jumps to
//! some column `(k, 0)` and climbs to `(k, k-1)`, where it stops.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::FiniteSelfMap;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Z2Point {
    pub n: i64,
    pub m: i64,
}

impl Z2Point {
    pub fn new(n: i64, m: i64) -> Result<Self> {
        let p = Z2Point { n, m };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 0 || self.m > (self.n - 1).max(0) {
            return Err(Error::input(format!(
                "({}, {}) violates 0 <= m <= max(n-1, 0)",
                self.n, self.m
            )));
        }
        Ok(())
    }

    fn is_valid(n: i64, m: i64) -> bool {
        m >= 0 && m <= (n - 1).max(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "max_length")]
pub enum ChainBehavior {
    InfiniteChain,
    UnboundedFiniteChains,
    BoundedChains(u64),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassifyReport {
    pub point: Z2Point,
    pub in_atrac: bool,
    pub in_stab: bool,
    pub chain_behavior: ChainBehavior,
}

pub fn example21_apply(p: Z2Point) -> Result<Z2Point> {
    p.validate()?;
    Ok(if p.m > 0 {
        Z2Point { n: p.n, m: p.m - 1 }
    } else {
        Z2Point {
            n: (p.n - 1).min(0),
            m: 0,
        }
    })
}

/// Closed-form classification from the preimage structure.
pub fn example21_classify(p: Z2Point) -> Result<ClassifyReport> {
    p.validate()?;
    let (in_atrac, chain_behavior) = if p.n <= 0 {
        (true, ChainBehavior::UnboundedFiniteChains)
    } else {
        // climb (n, m) ← (n, m+1) ← … ← (n, n-1)
        (false, ChainBehavior::BoundedChains((p.n - 1 - p.m) as u64))
    };
    Ok(ClassifyReport {
        point: p,
        in_atrac,
        in_stab: false,
        chain_behavior,
    })
}

/// Preimages of `p` in ascending order. `(0, 0)` has the infinitely many
/// preimages `(k, 0)`, `k ≥ 1`; only `k ≤ column_cap` are listed.
fn preimages(p: Z2Point, column_cap: i64) -> Vec<Z2Point> {
    let mut out = Vec::new();
    if p.m == 0 {
        if p.n < 0 {
            out.push(Z2Point { n: p.n + 1, m: 0 });
        } else if p.n == 0 {
            out.extend((1..=column_cap).map(|k| Z2Point { n: k, m: 0 }));
        }
    }
    if Z2Point::is_valid(p.n, p.m + 1) {
        out.push(Z2Point { n: p.n, m: p.m + 1 });
    }
    out.sort();
    out
}

/// Depth-limited backward search: a chain `p = x₀, …, x_depth` with
/// `φ(xᵢ₊₁) = xᵢ`, found by depth-first search over preimages in ascending
/// order. Columns hanging off `(0, 0)` are explored up to `depth + 1`.
pub fn example21_backward_search(p: Z2Point, depth: usize) -> Result<Option<Vec<Z2Point>>> {
    p.validate()?;
    let cap = depth as i64 + 1;
    let mut chain = vec![p];
    fn dfs(chain: &mut Vec<Z2Point>, remaining: usize, cap: i64) -> bool {
        if remaining == 0 {
            return true;
        }
        let cur = *chain.last().unwrap();
        for q in preimages(cur, cap) {
            chain.push(q);
            if dfs(chain, remaining - 1, cap) {
                return true;
            }
            chain.pop();
        }
        false
    }
    Ok(dfs(&mut chain, depth, cap).then_some(chain))
}

/// Example restricted to the window `-N ≤ n ≤ N`, with `(-N, 0)` sent to
/// itself so the map stays total.
#[derive(Debug, Clone, Serialize)]
pub struct Truncation {
    pub map: FiniteSelfMap,
    pub points: Vec<Z2Point>,
}

impl Truncation {
    pub fn label(&self, p: Z2Point) -> Option<usize> {
        self.points.binary_search(&p).ok()
    }
}

pub fn example21_truncate(window: i64) -> Result<Truncation> {
    if window < 1 {
        return Err(Error::input("window must be at least 1"));
    }
    let points: Vec<Z2Point> = (-window..=window)
        .flat_map(|n| (0..=(n - 1).max(0)).map(move |m| Z2Point { n, m }))
        .collect();
    let index: BTreeMap<Z2Point, usize> = points.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let succ = points
        .iter()
        .map(|&p| {
            let img = if p == (Z2Point { n: -window, m: 0 }) {
                p
            } else {
                example21_apply(p).expect("window points are valid")
            };
            index[&img]
        })
        .collect();
    Ok(Truncation {
        map: FiniteSelfMap::new(succ)?,
        points,
    })
}
