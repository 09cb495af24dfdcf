//! Endomorphisms of finitely generated free groups: image subgroups through
//! Stallings graphs, rank chains and backward chains.

mod chain;
mod stallings;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use chain::{
    inner_automorphism_witness, rank_chain, stab_atrac_report, InnerWitness, RankChain, StabAtracReport, StabVerdict,
};
pub use stallings::StallingsGraph;

/// Generator names in order; the capital letter is the inverse.
pub const GENERATOR_NAMES: &str = "xyzabcdefghijklmnopqrstuvw";

/// A freely reduced word. Letter `±(i+1)` is generator `i` or its inverse.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ReducedWord(Vec<i32>);

impl ReducedWord {
    pub fn identity() -> Self {
        ReducedWord(Vec::new())
    }

    pub fn generator(i: usize) -> Self {
        ReducedWord(vec![i as i32 + 1])
    }

    /// Reduces any sequence of signed letters.
    pub fn reduce(letters: impl IntoIterator<Item = i32>) -> Self {
        let mut out: Vec<i32> = Vec::new();
        for l in letters {
            debug_assert!(l != 0, "letter 0 is not a generator");
            if out.last() == Some(&-l) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        ReducedWord(out)
    }

    /// Parses `xyX…` over the first `rank` generator names; `.` or `""` is 1.
    pub fn parse(text: &str, rank: usize) -> Result<Self> {
        let text = text.trim();
        if text == "." || text == "1" {
            return Ok(Self::identity());
        }
        let letters = text
            .chars()
            .map(|c| {
                let i = GENERATOR_NAMES
                    .chars()
                    .take(rank)
                    .position(|g| g == c.to_ascii_lowercase())
                    .ok_or_else(|| Error::input(format!("unknown generator {c:?} for rank {rank}")))?;
                Ok(if c.is_uppercase() {
                    -(i as i32 + 1)
                } else {
                    i as i32 + 1
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::reduce(letters))
    }

    pub fn letters(&self) -> &[i32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Self {
        ReducedWord(self.0.iter().rev().map(|l| -l).collect())
    }

    pub fn mul(&self, other: &ReducedWord) -> Self {
        Self::reduce(self.0.iter().chain(&other.0).copied())
    }

    pub fn pow(&self, n: i64) -> Self {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        (0..n.unsigned_abs()).fold(Self::identity(), |acc, _| acc.mul(&base))
    }

    /// Highest generator index used, plus one.
    pub fn rank_needed(&self) -> usize {
        self.0.iter().map(|l| l.unsigned_abs() as usize).max().unwrap_or(0)
    }
}

impl fmt::Display for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, ".");
        }
        for &l in &self.0 {
            let c = GENERATOR_NAMES.as_bytes()[(l.unsigned_abs() - 1) as usize] as char;
            write!(f, "{}", if l < 0 { c.to_ascii_uppercase() } else { c })?;
        }
        Ok(())
    }
}

impl Serialize for ReducedWord {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// An endomorphism of `F_m` given by the images of the generators.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FreeEndo {
    rank: usize,
    images: Vec<ReducedWord>,
}

#[derive(Deserialize)]
struct RawEndo {
    rank: usize,
    images: Vec<String>,
}

impl FreeEndo {
    pub fn new(rank: usize, images: Vec<ReducedWord>) -> Result<Self> {
        if rank == 0 || rank > GENERATOR_NAMES.len() {
            return Err(Error::input(format!("rank must lie in 1..={}", GENERATOR_NAMES.len())));
        }
        if images.len() != rank {
            return Err(Error::input(format!("expected {rank} images, got {}", images.len())));
        }
        if images.iter().any(|w| w.rank_needed() > rank) {
            return Err(Error::input("an image uses a generator beyond the rank"));
        }
        Ok(FreeEndo { rank, images })
    }

    pub fn parse(rank: usize, images: &[&str]) -> Result<Self> {
        let images = images
            .iter()
            .map(|w| ReducedWord::parse(w, rank))
            .collect::<Result<_>>()?;
        Self::new(rank, images)
    }

    /// Reads `{"rank": m, "images": ["xY", …]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawEndo = serde_json::from_str(text).map_err(|e| Error::input(format!("endomorphism: {e}")))?;
        let images: Vec<&str> = raw.images.iter().map(String::as_str).collect();
        Self::parse(raw.rank, &images)
    }

    pub fn identity(rank: usize) -> Result<Self> {
        Self::new(rank, (0..rank).map(ReducedWord::generator).collect())
    }

    /// `w ↦ c w c⁻¹`.
    pub fn inner(rank: usize, c: &ReducedWord) -> Result<Self> {
        let ci = c.inverse();
        Self::new(
            rank,
            (0..rank).map(|i| c.mul(&ReducedWord::generator(i)).mul(&ci)).collect(),
        )
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn images(&self) -> &[ReducedWord] {
        &self.images
    }

    pub fn apply(&self, w: &ReducedWord) -> ReducedWord {
        ReducedWord::reduce(w.letters().iter().flat_map(|&l| {
            let img = &self.images[(l.unsigned_abs() - 1) as usize];
            let letters: Vec<i32> = if l > 0 {
                img.letters().to_vec()
            } else {
                img.inverse().letters().to_vec()
            };
            letters
        }))
    }

    pub fn apply_n(&self, w: &ReducedWord, n: usize) -> ReducedWord {
        (0..n).fold(w.clone(), |acc, _| self.apply(&acc))
    }

    /// `v` with `φ(v) = w`, or `None` if `w ∉ φ(F_m)`.
    pub fn preimage_solve(&self, w: &ReducedWord) -> Option<ReducedWord> {
        let graph = StallingsGraph::with_expressions(&self.images);
        let v = graph.express(w)?;
        debug_assert_eq!(&self.apply(&v), w);
        Some(v)
    }

    /// Every generator lies in the image.
    pub fn is_surjective(&self) -> bool {
        let graph = StallingsGraph::new(&self.images);
        (0..self.rank).all(|i| graph.contains(&ReducedWord::generator(i)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(s: &str) -> ReducedWord {
        ReducedWord::parse(s, 3).unwrap()
    }

    #[test]
    fn reduction_examples() {
        assert!(w("xX").is_identity());
        assert_eq!(w("xyYx"), w("xx"));
        assert_eq!(w("xyYx").to_string(), "xx");
        assert!(ReducedWord::parse("xq", 2).is_err());
        assert!(ReducedWord::parse("z", 2).is_err());
        assert_eq!(w("xy").inverse().to_string(), "YX");
        assert_eq!(w("xy").pow(-2).to_string(), "YXYX");
    }

    #[test]
    fn endo_basics() {
        let phi = FreeEndo::parse(2, &["xx", "yx"]).unwrap();
        assert_eq!(phi.apply(&w("yX")).to_string(), "yX");
        assert_eq!(phi.apply(&w("Yxy")).to_string(), "XYxxyx");
        assert!(FreeEndo::parse(2, &["x"]).is_err());
        assert!(FreeEndo::parse(2, &["x", "z"]).is_err());
        let json = FreeEndo::from_json(r#"{"rank": 2, "images": ["xY", "."]}"#).unwrap();
        assert!(json.images()[1].is_identity());
    }

    #[test]
    fn preimage_examples() {
        let phi = FreeEndo::parse(2, &["xx", "y"]).unwrap();
        assert_eq!(phi.preimage_solve(&w("xxxx")), Some(w("xx")));
        assert_eq!(phi.preimage_solve(&w("xxx")), None);
        let id = FreeEndo::identity(2).unwrap();
        assert_eq!(id.preimage_solve(&w("xYYx")), Some(w("xYYx")));
        let phi = FreeEndo::parse(2, &["xyX", "xyyX"]).unwrap();
        let target = w("xyyyX");
        let v = phi.preimage_solve(&target).unwrap();
        assert_eq!(phi.apply(&v), target);
    }

    fn arb_word(rank: usize, max: usize) -> impl Strategy<Value = ReducedWord> {
        proptest::collection::vec((0..rank as i32, any::<bool>()), 0..=max)
            .prop_map(|ls| ReducedWord::reduce(ls.into_iter().map(|(g, inv)| if inv { -(g + 1) } else { g + 1 })))
    }

    proptest! {
        #[test]
        fn reduce_is_idempotent(v in arb_word(3, 12)) {
            prop_assert_eq!(ReducedWord::reduce(v.letters().iter().copied()), v.clone());
            prop_assert!(v.letters().windows(2).all(|p| p[0] != -p[1]));
        }

        #[test]
        fn preimages_round_trip(imgs in proptest::collection::vec(arb_word(2, 5), 2), v in arb_word(2, 6)) {
            let phi = FreeEndo::new(2, imgs).unwrap();
            let target = phi.apply(&v);
            let pre = phi.preimage_solve(&target).expect("image of v");
            prop_assert_eq!(phi.apply(&pre), target);
        }
    }
}
