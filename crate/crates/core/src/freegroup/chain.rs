use serde::Serialize;

use super::stallings::{substitute, StallingsGraph};
use super::{FreeEndo, ReducedWord};
use crate::{Error, Result};

/// Stops a chain once the generators of a stage exceed this many letters.
pub const LETTER_CAP: usize = 1 << 18;

struct Stage {
    basis: Vec<ReducedWord>,
    graph: StallingsGraph,
}

/// `H_0 = F`, `H_n = ⟨φ(b) : b ∈ basis(H_{n−1})⟩ = φⁿ(F)`, for `n ≤ last`.
/// Index 0 of the result is `H_1`; the chain may end early when the cap is hit.
fn stages(phi: &FreeEndo, last: usize, track: bool) -> (Vec<Stage>, bool) {
    let mut basis: Vec<ReducedWord> = (0..phi.rank()).map(ReducedWord::generator).collect();
    let mut out = Vec::new();
    for _ in 0..last {
        let gens: Vec<ReducedWord> = basis.iter().map(|b| phi.apply(b)).collect();
        if gens.iter().map(ReducedWord::len).sum::<usize>() > LETTER_CAP {
            return (out, true);
        }
        let graph = if track {
            StallingsGraph::with_expressions(&gens)
        } else {
            StallingsGraph::new(&gens)
        };
        basis = graph.basis();
        out.push(Stage {
            basis: basis.clone(),
            graph,
        });
    }
    (out, false)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankChain {
    pub horizon: usize,
    /// `rank φⁿ(F)` for `n = 1..`.
    pub ranks: Vec<usize>,
    /// Entry `n−1` records `φⁿ(F) = φⁿ⁺¹(F)`.
    pub set_equal: Vec<bool>,
    pub ranks_non_increasing: bool,
    /// Least `n` after which the rank no longer changes within the horizon.
    pub rank_stable_from: usize,
    pub set_stable_at: Option<usize>,
    /// Once two consecutive stages agree, all later ones do.
    pub hopfian_consistent: bool,
    pub truncated: bool,
}

pub fn rank_chain(phi: &FreeEndo, horizon: usize) -> RankChain {
    let (st, truncated) = stages(phi, horizon + 1, false);
    let ranks: Vec<usize> = st.iter().take(horizon).map(|s| s.graph.rank()).collect();
    let set_equal: Vec<bool> = st
        .windows(2)
        .take(horizon)
        .map(|p| p[0].basis.iter().all(|b| p[1].graph.contains(b)))
        .collect();
    let ranks_non_increasing = std::iter::once(phi.rank())
        .chain(ranks.iter().copied())
        .collect::<Vec<_>>()
        .windows(2)
        .all(|p| p[1] <= p[0]);
    let rank_stable_from = match ranks.last() {
        Some(&r) => ranks.iter().rposition(|&x| x != r).map_or(1, |i| i + 2),
        None => 0,
    };
    let set_stable_at = set_equal.iter().position(|&e| e).map(|i| i + 1);
    let hopfian_consistent = set_stable_at.is_none_or(|s| set_equal[s - 1..].iter().all(|&e| e));
    RankChain {
        horizon,
        ranks,
        set_equal,
        ranks_non_increasing,
        rank_stable_from,
        set_stable_at,
        hopfian_consistent,
        truncated,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum StabVerdict {
    /// The image chain is constant from `stable_at`; membership there is final.
    Exact { stable_at: usize, member: bool },
    /// `w ∉ φⁿ(F)`, so `w` is neither in Atrac nor in Stab.
    Refuted { at: usize },
    /// `w ∈ φ^depth(F)` with no stabilization seen.
    DepthStamped { depth: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StabAtracReport {
    pub word: ReducedWord,
    #[serde(flatten)]
    pub verdict: StabVerdict,
    pub in_atrac: Option<bool>,
    pub in_stab: Option<bool>,
    /// `w = v₀ ← v₁ ← …` with `φ(v_{k+1}) = v_k`.
    pub chain: Vec<ReducedWord>,
    pub truncated: bool,
}

/// Pulls `v ∈ H_j` back to `H_{j−1}`; `stage` is `H_j`, `prev` the basis of `H_{j−1}`.
fn pull(stage: &Stage, prev: &[ReducedWord], v: &ReducedWord) -> Option<ReducedWord> {
    stage.graph.express(v).map(|e| substitute(&e, prev))
}

pub fn stab_atrac_report(phi: &FreeEndo, w: &ReducedWord, depth: usize) -> Result<StabAtracReport> {
    if w.rank_needed() > phi.rank() {
        return Err(Error::input("word uses a generator beyond the rank"));
    }
    let (st, truncated) = stages(phi, depth + 1, true);
    let generators: Vec<ReducedWord> = (0..phi.rank()).map(ReducedWord::generator).collect();
    let basis_of = |j: usize| {
        if j == 0 {
            &generators[..]
        } else {
            &st[j - 1].basis[..]
        }
    };

    let mut verdict = None;
    for n in 1..=depth.min(st.len()) {
        if !st[n - 1].graph.contains(w) {
            verdict = Some(StabVerdict::Refuted { at: n });
            break;
        }
        if let Some(next) = st.get(n) {
            if st[n - 1].basis.iter().all(|b| next.graph.contains(b)) {
                verdict = Some(StabVerdict::Exact {
                    stable_at: n,
                    member: true,
                });
                break;
            }
        }
    }
    let reached = depth.min(st.len());
    let verdict = verdict.unwrap_or(StabVerdict::DepthStamped { depth: reached });

    let mut chain = vec![w.clone()];
    match verdict {
        StabVerdict::Exact { stable_at: s, .. } => {
            // H_s = H_{s+1} = ⟨φ(basis H_s)⟩, so preimages can stay in H_s forever.
            for _ in 0..depth.max(1) {
                let v = pull(&st[s], basis_of(s), chain.last().expect("non-empty"))
                    .ok_or_else(|| Error::verification("stable stage lost a member"))?;
                chain.push(v);
            }
        }
        StabVerdict::DepthStamped { depth: d } => {
            for j in (1..=d).rev() {
                let v = pull(&st[j - 1], basis_of(j - 1), chain.last().expect("non-empty"))
                    .ok_or_else(|| Error::verification("image stage lost a member"))?;
                chain.push(v);
            }
        }
        StabVerdict::Refuted { .. } => {}
    }
    if !verify_chain(phi, &chain) {
        return Err(Error::verification("backward chain does not map forward"));
    }
    let (in_atrac, in_stab) = match verdict {
        StabVerdict::Exact { member, .. } => (Some(member), Some(member)),
        StabVerdict::Refuted { .. } => (Some(false), Some(false)),
        StabVerdict::DepthStamped { .. } => (None, None),
    };
    Ok(StabAtracReport {
        word: w.clone(),
        verdict,
        in_atrac,
        in_stab,
        chain,
        truncated,
    })
}

/// `φ(chain[k+1]) = chain[k]` throughout.
pub fn verify_chain(phi: &FreeEndo, chain: &[ReducedWord]) -> bool {
    chain.windows(2).all(|p| phi.apply(&p[1]) == p[0])
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InnerWitness {
    pub conjugator: ReducedWord,
    pub word: ReducedWord,
    /// `w` is periodic under conjugation by `c` exactly when `cw = wc`.
    pub commutes: bool,
    pub period: Option<usize>,
    pub in_orb: bool,
    pub in_stab: bool,
    pub chain: Vec<ReducedWord>,
}

/// Conjugation by `c` is onto, so every word has backward chains
/// `v_k = c⁻ᵏ w cᵏ`. Centralizers in a free group are cyclic, so some power of
/// `c` fixes `w` only when `c` and `w` commute.
pub fn inner_automorphism_witness(rank: usize, c: &ReducedWord, w: &ReducedWord, depth: usize) -> Result<InnerWitness> {
    let phi = FreeEndo::inner(rank, c)?;
    if w.rank_needed() > rank {
        return Err(Error::input("word uses a generator beyond the rank"));
    }
    let commutes = c.mul(w) == w.mul(c);
    let mut period = None;
    let mut cur = w.clone();
    for p in 1..=depth {
        cur = phi.apply(&cur);
        if &cur == w {
            period = Some(p);
            break;
        }
    }
    if period.is_some() && !commutes {
        return Err(Error::verification("a non-commuting word came back under conjugation"));
    }
    let chain: Vec<ReducedWord> = (0..=depth as i64).map(|k| c.pow(-k).mul(w).mul(&c.pow(k))).collect();
    if !verify_chain(&phi, &chain) {
        return Err(Error::verification("conjugation chain does not map forward"));
    }
    Ok(InnerWitness {
        conjugator: c.clone(),
        word: w.clone(),
        commutes,
        period,
        in_orb: commutes,
        in_stab: true,
        chain,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> ReducedWord {
        ReducedWord::parse(s, 3).unwrap()
    }

    #[test]
    fn rank_chain_examples() {
        let id = rank_chain(&FreeEndo::identity(3).unwrap(), 4);
        assert_eq!(id.ranks, vec![3; 4]);
        assert_eq!(id.set_stable_at, Some(1));

        let sq = rank_chain(&FreeEndo::parse(2, &["xx", "yy"]).unwrap(), 4);
        assert_eq!(sq.ranks, vec![2; 4]);
        assert_eq!(sq.set_stable_at, None);
        assert!(sq.set_equal.iter().all(|e| !e));

        let fold = rank_chain(&FreeEndo::parse(2, &["x", "x"]).unwrap(), 4);
        assert_eq!(fold.ranks, vec![1; 4]);
        assert_eq!(fold.set_stable_at, Some(1));
        assert_eq!(fold.rank_stable_from, 1);

        let drop = rank_chain(&FreeEndo::parse(3, &["xy", "xy", "zz"]).unwrap(), 3);
        assert_eq!(drop.ranks, vec![2, 2, 2]);
        assert!(drop.ranks_non_increasing && drop.hopfian_consistent);

        let late = rank_chain(&FreeEndo::parse(2, &["y", "."]).unwrap(), 4);
        assert_eq!(late.ranks, vec![1, 0, 0, 0]);
        assert_eq!(late.rank_stable_from, 2);
        assert_eq!(late.set_stable_at, Some(2));
    }

    #[test]
    fn stab_atrac_examples() {
        let phi = FreeEndo::parse(2, &["x", "x"]).unwrap();
        let r = stab_atrac_report(&phi, &w("x"), 3).unwrap();
        assert_eq!(
            r.verdict,
            StabVerdict::Exact {
                stable_at: 1,
                member: true
            }
        );
        assert_eq!(r.in_stab, Some(true));
        assert_eq!(r.chain.len(), 4);

        let phi = FreeEndo::parse(1, &["xx"]).unwrap();
        let r = stab_atrac_report(&phi, &w("x"), 3).unwrap();
        assert_eq!(r.verdict, StabVerdict::Refuted { at: 1 });
        assert_eq!(r.in_atrac, Some(false));

        let phi = FreeEndo::parse(2, &["xx", "yy"]).unwrap();
        let r = stab_atrac_report(&phi, &w("xxxxyyyy"), 2).unwrap();
        assert_eq!(r.verdict, StabVerdict::DepthStamped { depth: 2 });
        assert_eq!(r.chain, vec![w("xxxxyyyy"), w("xxyy"), w("xy")]);
        let r = stab_atrac_report(&phi, &w("xxxxyyyy"), 3).unwrap();
        assert_eq!(r.verdict, StabVerdict::Refuted { at: 3 });
    }

    #[test]
    fn conjugation_separates_orbit_from_stab() {
        let rep = inner_automorphism_witness(2, &w("x"), &w("y"), 6).unwrap();
        assert!(!rep.commutes && !rep.in_orb && rep.in_stab);
        assert_eq!(rep.period, None);
        assert_eq!(rep.chain[2], w("XXyxx"));

        let phi = FreeEndo::inner(2, &w("xy")).unwrap();
        for s in ["y", "xYY", "yxYx"] {
            let r = stab_atrac_report(&phi, &w(s), 3).unwrap();
            assert_eq!(r.in_stab, Some(true));
        }
        let rep = inner_automorphism_witness(2, &w("xy"), &w("xyxy"), 4).unwrap();
        assert!(rep.commutes && rep.in_orb);
        assert_eq!(rep.period, Some(1));
    }
}
