//! Exact Orb/Stab/Atrac membership for finite words and the independent
//! checks run against it.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use serde::Serialize;

use super::{parse_blocks, Letter, Substitution, Word};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Method {
    Exact,
    DepthLimited { depth: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MembershipReport {
    pub in_orb: bool,
    pub in_stab: bool,
    pub in_atrac: bool,
    pub period: Option<u64>,
    pub method: Method,
    /// Forward iterations performed.
    pub steps: u64,
}

/// Decides whether `φᵖ(W) = W` for some `p ≥ 1` by forward iteration.
///
/// The number of immortal letters never decreases along the orbit, so the
/// search stops as soon as it exceeds that of `W`. Below that bound only
/// finitely many words occur, and a repeated word other than `W` closes a
/// cycle that avoids `W`.
pub fn membership_finite(phi: &Substitution, w: &[Letter]) -> MembershipReport {
    let bound = phi.immortal_count(w);
    let mut seen: HashSet<Word> = HashSet::from([w.to_vec()]);
    let mut cur = w.to_vec();
    let mut steps = 0;
    let period = loop {
        cur = phi.apply(&cur);
        steps += 1;
        if cur == w {
            break Some(steps);
        }
        if phi.immortal_count(&cur) > bound || !seen.insert(cur.clone()) {
            break None;
        }
    };
    let member = period.is_some();
    MembershipReport {
        in_orb: member,
        in_stab: member,
        in_atrac: member,
        period,
        method: Method::Exact,
        steps,
    }
}

/// All words of length at most `max_len` in shortlex order, ε first.
pub fn words_up_to(size: usize, max_len: usize) -> Vec<Word> {
    let mut out = vec![Word::new()];
    let mut layer = vec![Word::new()];
    for _ in 0..max_len {
        layer = layer
            .iter()
            .flat_map(|w| {
                (0..size).map(move |s| {
                    let mut v = w.clone();
                    v.push(s as Letter);
                    v
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniverseSets {
    pub orb: BTreeSet<Word>,
    pub stab: BTreeSet<Word>,
    pub atrac: BTreeSet<Word>,
}

/// The three sets intersected with the words of length at most `max_len`,
/// each from its own algorithm. For a non-erasing substitution preimages are
/// never longer than their image, so the universe is closed under preimages
/// and all three computations are exact.
pub fn universe_sets(phi: &Substitution, max_len: usize) -> Result<UniverseSets> {
    if !phi.is_non_erasing() {
        return Err(Error::precondition("universe sets need a non-erasing substitution"));
    }
    let universe = words_up_to(phi.size(), max_len);
    let index: HashMap<&Word, usize> = universe.iter().enumerate().map(|(i, w)| (w, i)).collect();
    let succ: Vec<Option<usize>> = universe
        .iter()
        .map(|w| {
            let img = phi.apply(w);
            index.get(&img).copied()
        })
        .collect();

    // Stab: drop words without a surviving preimage until none is left.
    let mut alive = vec![true; universe.len()];
    let mut indeg = vec![0usize; universe.len()];
    for &y in succ.iter().flatten() {
        indeg[y] += 1;
    }
    let mut queue: VecDeque<usize> = (0..universe.len()).filter(|&i| indeg[i] == 0).collect();
    while let Some(x) = queue.pop_front() {
        alive[x] = false;
        if let Some(y) = succ[x] {
            indeg[y] -= 1;
            if indeg[y] == 0 {
                queue.push_back(y);
            }
        }
    }
    let stab = (0..universe.len())
        .filter(|&i| alive[i])
        .map(|i| universe[i].clone())
        .collect();

    // Atrac: A ← φ(A) ∩ U from A = U.
    let mut current: BTreeSet<usize> = (0..universe.len()).collect();
    loop {
        let next: BTreeSet<usize> = current.iter().filter_map(|&i| succ[i]).collect();
        if next == current {
            break;
        }
        current = next;
    }
    let atrac = current.into_iter().map(|i| universe[i].clone()).collect();

    let orb = universe
        .iter()
        .filter(|w| membership_finite(phi, w).in_orb)
        .cloned()
        .collect();
    Ok(UniverseSets { orb, stab, atrac })
}

/// `{s | φ(s) ∈ S}`: letters whose image is a single letter.
pub fn single_letter_letters(phi: &Substitution) -> Vec<Letter> {
    phi.letters().filter(|&s| phi.image(s).len() == 1).collect()
}

/// Letters `s` with `φᵖ(s) = s` for some `p ≥ 1`. For a non-erasing
/// substitution the periodic words are exactly the words over these letters.
pub fn periodic_letters(phi: &Substitution) -> Vec<Letter> {
    phi.letters()
        .filter(|&s| {
            let mut cur = s;
            for _ in 0..phi.size() {
                match phi.image(cur) {
                    [next] => cur = *next,
                    _ => return false,
                }
                if cur == s {
                    return true;
                }
            }
            false
        })
        .collect()
}

/// Images `φⁿ(s)` no longer than `cap`, for successive `n`.
struct CappedPowers<'a> {
    phi: &'a Substitution,
    cap: usize,
    images: Vec<Option<Word>>,
}

impl<'a> CappedPowers<'a> {
    fn new(phi: &'a Substitution, cap: usize) -> Self {
        let images = phi.letters().map(|s| Some(vec![s])).collect();
        CappedPowers { phi, cap, images }
    }

    fn step(&mut self) {
        let next = self
            .phi
            .letters()
            .map(|s| {
                let mut out = Word::new();
                for &t in self.phi.image(s) {
                    out.extend(self.images[usize::from(t)].as_ref()?);
                    if out.len() > self.cap {
                        return None;
                    }
                }
                Some(out)
            })
            .collect();
        self.images = next;
    }

    fn contains(&self, w: &[Letter]) -> bool {
        if w.is_empty() {
            return true;
        }
        let blocks: Vec<(Letter, &[Letter])> = self
            .images
            .iter()
            .enumerate()
            .filter_map(|(s, img)| img.as_deref().filter(|b| !b.is_empty()).map(|b| (s as Letter, b)))
            .collect();
        !parse_blocks(w, &blocks).is_empty()
    }
}

/// Whether `W ∈ φⁿ(S*)`.
pub fn in_image_of_power(phi: &Substitution, w: &[Letter], n: u64) -> bool {
    let mut p = CappedPowers::new(phi, w.len());
    for _ in 0..n {
        p.step();
    }
    p.contains(w)
}

/// Whether `W` starts an infinite backward chain of canonical preimages.
/// Canonical preimages are never longer than their image, so the chains live
/// in a finite graph; `None` if that graph has more than `max_words` words.
///
/// A chain found this way proves `W ∈ Stab`. The converse fails for erasing
/// substitutions: with `a ↦ ε`, `b ↦ ab` the word `ab` is fixed, yet its only
/// canonical preimage `b` has none.
pub fn canonical_chain_exists(phi: &Substitution, w: &[Letter], max_words: usize) -> Option<bool> {
    let mut index: HashMap<Word, usize> = HashMap::from([(w.to_vec(), 0)]);
    let mut words = vec![w.to_vec()];
    let mut preimages: Vec<Vec<usize>> = Vec::new();
    let mut i = 0;
    while i < words.len() {
        let pre = phi.canonical_preimages(&words[i]);
        let mut ids = Vec::with_capacity(pre.len());
        for v in pre {
            let id = *index.entry(v.clone()).or_insert_with(|| {
                words.push(v);
                words.len() - 1
            });
            ids.push(id);
        }
        if words.len() > max_words {
            return None;
        }
        preimages.push(ids);
        i += 1;
    }
    let mut alive = vec![true; words.len()];
    loop {
        let dead: Vec<usize> = (0..words.len())
            .filter(|&x| alive[x] && !preimages[x].iter().any(|&p| alive[p]))
            .collect();
        if dead.is_empty() {
            return Some(alive[0]);
        }
        for x in dead {
            alive[x] = false;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DepthCheck {
    pub in_orb: bool,
    pub depth: u64,
    /// Least `n ≤ depth` with `W ∉ φⁿ(S*)`.
    pub first_missing: Option<u64>,
    pub canonical_chain: Option<bool>,
    /// The bounded evidence contradicts the exact answer.
    pub contradiction: bool,
    /// `W` is not periodic but lies in every image up to `depth`.
    pub unresolved: bool,
}

/// Bounded checks against the exact answer for a possibly erasing
/// substitution: membership in `φⁿ(S*)` for `n ≤ depth` and a canonical
/// backward chain search. Both are one-sided.
pub fn erasing_depth_check(phi: &Substitution, w: &[Letter], depth: u64) -> DepthCheck {
    let in_orb = membership_finite(phi, w).in_orb;
    let mut powers = CappedPowers::new(phi, w.len());
    let mut first_missing = None;
    for n in 1..=depth {
        powers.step();
        if !powers.contains(w) {
            first_missing = Some(n);
            break;
        }
    }
    let canonical_chain = canonical_chain_exists(phi, w, 100_000);
    let contradiction = (in_orb && first_missing.is_some()) || (!in_orb && canonical_chain == Some(true));
    DepthCheck {
        in_orb,
        depth,
        first_missing,
        canonical_chain,
        contradiction,
        unresolved: !in_orb && first_missing.is_none(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sub(pairs: &[(char, &str)]) -> Substitution {
        Substitution::from_pairs(pairs).unwrap()
    }

    #[test]
    fn membership_examples() {
        let tm = sub(&[('a', "ab"), ('b', "ba")]);
        let r = membership_finite(&tm, &tm.word("ab").unwrap());
        assert!(!r.in_orb && !r.in_stab && !r.in_atrac);
        let phi = sub(&[('a', "."), ('b', "ab")]);
        let r = membership_finite(&phi, &phi.word("ab").unwrap());
        assert!(r.in_orb && r.in_stab && r.in_atrac);
        assert_eq!(r.period, Some(1));
        let swap = sub(&[('a', "b"), ('b', "a"), ('c', "cc")]);
        assert_eq!(membership_finite(&swap, &swap.word("abba").unwrap()).period, Some(2));
        assert!(!membership_finite(&swap, &swap.word("ac").unwrap()).in_orb);
        assert_eq!(membership_finite(&swap, &[]).period, Some(1));
    }

    #[test]
    fn universe_enumeration() {
        let u = words_up_to(2, 3);
        assert_eq!(u.len(), 15);
        assert!(u[0].is_empty());
        assert_eq!(u[3], vec![0, 0]);
    }

    #[test]
    fn universe_sets_agree() {
        let phi = sub(&[('a', "b"), ('b', "a"), ('c', "ca"), ('d', "d")]);
        let s = universe_sets(&phi, 4).unwrap();
        assert_eq!(s.orb, s.stab);
        assert_eq!(s.stab, s.atrac);
        assert!(s.orb.contains(&phi.word("abd").unwrap()));
        assert!(!s.orb.contains(&phi.word("c").unwrap()));
        assert!(universe_sets(&sub(&[('a', ".")]), 2).is_err());
    }

    #[test]
    fn letter_characterizations() {
        let phi = sub(&[('a', "b"), ('b', "bb")]);
        assert_eq!(single_letter_letters(&phi), vec![0]);
        assert!(periodic_letters(&phi).is_empty());
        assert!(!membership_finite(&phi, &[0]).in_orb);
        let phi = sub(&[('a', "b"), ('b', "a"), ('c', "a"), ('d', "dd")]);
        assert_eq!(periodic_letters(&phi), vec![0, 1]);
    }

    #[test]
    fn image_of_power() {
        let phi = sub(&[('a', "."), ('b', "ab")]);
        let w = phi.word("ab").unwrap();
        assert!((0..30).all(|n| in_image_of_power(&phi, &w, n)));
        assert!(!in_image_of_power(&phi, &phi.word("ba").unwrap(), 1));
        let tm = sub(&[('a', "ab"), ('b', "ba")]);
        assert!(in_image_of_power(&tm, &tm.word("abbabaab").unwrap(), 3));
        assert!(!in_image_of_power(&tm, &tm.word("abbabaab").unwrap(), 4));
    }

    #[test]
    fn canonical_chains_are_incomplete_for_erasing() {
        let phi = sub(&[('a', "."), ('b', "ab")]);
        let w = phi.word("ab").unwrap();
        assert_eq!(canonical_chain_exists(&phi, &w, 100), Some(false));
        let d = erasing_depth_check(&phi, &w, 50);
        assert!(d.in_orb && !d.contradiction && d.first_missing.is_none());
        let swap = sub(&[('a', "b"), ('b', "a"), ('c', ".")]);
        assert_eq!(
            canonical_chain_exists(&swap, &swap.word("ab").unwrap(), 100),
            Some(true)
        );
    }
}
