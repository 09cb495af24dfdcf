//! Substitutions `φ: S → S*` over small alphabets, possibly erasing.
//!
//! Letters are indices into the alphabet. Finite words are `Vec<Letter>`;
//! right-infinite words are handled through finite prefixes.

mod fixpoint;
mod membership;

use serde::Serialize;

use crate::{Error, Result};

pub use fixpoint::{
    erasure_extension, expand_fixed_point, extension_check, finite_fixed_word, fixed_point_specs, growth_lengths,
    stab_membership_prefix, ExtensionCheck, FixedPointAnalysis, FixedPointCase, FixedPointSpec, PrefixReport,
    PrefixVerdict,
};
pub use membership::{
    canonical_chain_exists, erasing_depth_check, in_image_of_power, membership_finite, periodic_letters,
    single_letter_letters, universe_sets, words_up_to, DepthCheck, MembershipReport, UniverseSets,
};

pub type Letter = u8;
pub type Word = Vec<Letter>;

/// A substitution together with its mortality data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Substitution {
    alphabet: Vec<char>,
    images: Vec<Word>,
    /// Rounds after which each letter dies (`None` for immortal letters).
    death: Vec<Option<u32>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MortalityReport {
    pub mortal: Vec<char>,
    pub exponent: u32,
}

impl Substitution {
    pub fn new(alphabet: Vec<char>, images: Vec<Word>) -> Result<Self> {
        if alphabet.is_empty() {
            return Err(Error::input("empty alphabet"));
        }
        if alphabet.len() > usize::from(Letter::MAX) {
            return Err(Error::input("alphabet too large"));
        }
        if alphabet.len() != images.len() {
            return Err(Error::input("one image per letter is required"));
        }
        for (i, c) in alphabet.iter().enumerate() {
            if alphabet[..i].contains(c) {
                return Err(Error::input(format!("letter {c:?} listed twice")));
            }
            if c.is_whitespace() || *c == '.' {
                return Err(Error::input(format!("{c:?} cannot be a letter")));
            }
        }
        if images.iter().flatten().any(|&l| usize::from(l) >= alphabet.len()) {
            return Err(Error::input("image uses a letter outside the alphabet"));
        }
        let death = mortality_rounds(&images);
        Ok(Substitution {
            alphabet,
            images,
            death,
        })
    }

    /// Builds from `(letter, image)` pairs; an image of `"."` or `""` is ε.
    pub fn from_pairs(pairs: &[(char, &str)]) -> Result<Self> {
        let alphabet: Vec<char> = pairs.iter().map(|(c, _)| *c).collect();
        let images = pairs
            .iter()
            .map(|(_, img)| word_in(&alphabet, img))
            .collect::<Result<Vec<_>>>()?;
        Self::new(alphabet, images)
    }

    /// Parses one `a -> ab` rule per line. `.` stands for ε, blank lines and
    /// lines starting with `#` are skipped. The alphabet is the set of
    /// left-hand sides in order of appearance.
    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs: Vec<(char, String)> = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (lhs, rhs) = line
                .split_once("->")
                .ok_or_else(|| Error::input(format!("line {}: expected `x -> word`", no + 1)))?;
            let mut lhs_chars = lhs.trim().chars();
            let (Some(c), None) = (lhs_chars.next(), lhs_chars.next()) else {
                return Err(Error::input(format!("line {}: left side must be one letter", no + 1)));
            };
            let rhs: String = rhs.chars().filter(|c| !c.is_whitespace()).collect();
            pairs.push((c, rhs));
        }
        let borrowed: Vec<(char, &str)> = pairs.iter().map(|(c, s)| (*c, s.as_str())).collect();
        Self::from_pairs(&borrowed)
    }

    pub fn to_dsl(&self) -> String {
        self.alphabet
            .iter()
            .zip(&self.images)
            .map(|(c, img)| {
                let rhs = if img.is_empty() {
                    ".".to_string()
                } else {
                    self.format(img)
                };
                format!("{c} -> {rhs}\n")
            })
            .collect()
    }

    pub fn alphabet(&self) -> &[char] {
        &self.alphabet
    }

    pub fn size(&self) -> usize {
        self.alphabet.len()
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> {
        (0..self.alphabet.len()).map(|i| i as Letter)
    }

    pub fn image(&self, s: Letter) -> &[Letter] {
        &self.images[usize::from(s)]
    }

    pub fn letter(&self, c: char) -> Result<Letter> {
        self.alphabet
            .iter()
            .position(|&x| x == c)
            .map(|i| i as Letter)
            .ok_or_else(|| Error::input(format!("letter {c:?} is not in the alphabet")))
    }

    /// Parses a word; `"."` and `""` are ε.
    pub fn word(&self, text: &str) -> Result<Word> {
        word_in(&self.alphabet, text)
    }

    pub fn format(&self, w: &[Letter]) -> String {
        w.iter().map(|&l| self.alphabet[usize::from(l)]).collect()
    }

    pub fn is_mortal(&self, s: Letter) -> bool {
        self.death[usize::from(s)].is_some()
    }

    pub fn is_non_erasing(&self) -> bool {
        self.death.iter().all(Option::is_none)
    }

    pub fn has_immortal(&self) -> bool {
        self.death.iter().any(Option::is_none)
    }

    pub fn mortality(&self) -> MortalityReport {
        MortalityReport {
            mortal: self
                .letters()
                .filter(|&s| self.is_mortal(s))
                .map(|s| self.alphabet[usize::from(s)])
                .collect(),
            exponent: self.exponent(),
        }
    }

    /// Least `m` with `φ^m(s) = ε` for every mortal letter `s`.
    pub fn exponent(&self) -> u32 {
        self.death.iter().flatten().copied().max().unwrap_or(0)
    }

    /// Number of immortal letters `ℓ_∞(W)`.
    pub fn immortal_count(&self, w: &[Letter]) -> usize {
        w.iter().filter(|&&l| !self.is_mortal(l)).count()
    }

    pub fn first_immortal(&self, w: &[Letter]) -> Option<usize> {
        w.iter().position(|&l| !self.is_mortal(l))
    }

    pub fn apply(&self, w: &[Letter]) -> Word {
        w.iter().flat_map(|&l| self.image(l).iter().copied()).collect()
    }

    pub fn apply_n(&self, w: &[Letter], n: u64) -> Word {
        (0..n).fold(w.to_vec(), |acc, _| self.apply(&acc))
    }

    /// The first `len` letters of `φⁿ(W)` (fewer if `φⁿ(W)` is shorter).
    /// Intermediate words are cut after their `len`-th immortal letter,
    /// which keeps every surviving prefix exact.
    pub fn apply_n_prefix(&self, w: &[Letter], n: u64, len: usize) -> Word {
        let mut cur = self.cut_after_immortal(w, len);
        for _ in 0..n {
            cur = self.cut_after_immortal(&self.apply(&cur), len);
        }
        cur.truncate(len);
        cur
    }

    fn cut_after_immortal(&self, w: &[Letter], count: usize) -> Word {
        let mut seen = 0;
        for (i, &l) in w.iter().enumerate() {
            if !self.is_mortal(l) {
                seen += 1;
                if seen == count {
                    return w[..=i].to_vec();
                }
            }
        }
        w.to_vec()
    }

    /// `φⁿ` as a substitution.
    pub fn power(&self, n: u64) -> Substitution {
        let images = self.letters().map(|s| self.apply_n(&[s], n)).collect();
        Substitution::new(self.alphabet.clone(), images).expect("same alphabet")
    }

    /// `ℓ(φⁱ(s))` for `i = 0..=steps`, saturating at `u64::MAX`.
    pub fn image_lengths(&self, steps: u64) -> Vec<Vec<u64>> {
        let mut out = Vec::with_capacity(steps as usize + 1);
        let mut cur = vec![1u64; self.size()];
        out.push(cur.clone());
        for _ in 0..steps {
            cur = self
                .images
                .iter()
                .map(|img| img.iter().fold(0u64, |acc, &t| acc.saturating_add(cur[usize::from(t)])))
                .collect();
            out.push(cur.clone());
        }
        out
    }

    /// All `V` over letters with non-empty image such that `φ(V) = W`, in
    /// lexicographic order.
    pub fn canonical_preimages(&self, w: &[Letter]) -> Vec<Word> {
        let blocks: Vec<(Letter, &[Letter])> = self
            .letters()
            .filter(|&s| !self.image(s).is_empty())
            .map(|s| (s, self.image(s)))
            .collect();
        parse_blocks(w, &blocks)
    }
}

/// Every way of writing `w` as a concatenation of the given blocks, read as
/// the word of block labels. Results are sorted and distinct.
pub(crate) fn parse_blocks(w: &[Letter], blocks: &[(Letter, &[Letter])]) -> Vec<Word> {
    let n = w.len();
    // reach[i]: the suffix from i can be parsed
    let mut reach = vec![false; n + 1];
    reach[n] = true;
    for i in (0..n).rev() {
        reach[i] = blocks
            .iter()
            .any(|(_, b)| !b.is_empty() && w[i..].starts_with(b) && reach[i + b.len()]);
    }
    let mut out = Vec::new();
    if !reach[0] {
        return out;
    }
    let mut stack: Vec<(usize, Word)> = vec![(0, Vec::new())];
    while let Some((i, acc)) = stack.pop() {
        if i == n {
            out.push(acc);
            continue;
        }
        for (s, b) in blocks {
            if !b.is_empty() && w[i..].starts_with(b) && reach[i + b.len()] {
                let mut next = acc.clone();
                next.push(*s);
                stack.push((i + b.len(), next));
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

fn word_in(alphabet: &[char], text: &str) -> Result<Word> {
    let text = text.trim();
    if text == "." {
        return Ok(Vec::new());
    }
    text.chars()
        .map(|c| {
            alphabet
                .iter()
                .position(|&x| x == c)
                .map(|i| i as Letter)
                .ok_or_else(|| Error::input(format!("letter {c:?} is not in the alphabet")))
        })
        .collect()
}

fn mortality_rounds(images: &[Word]) -> Vec<Option<u32>> {
    let mut death: Vec<Option<u32>> = vec![None; images.len()];
    for round in 1.. {
        let fresh: Vec<usize> = (0..images.len())
            .filter(|&s| death[s].is_none())
            .filter(|&s| images[s].iter().all(|&t| death[usize::from(t)].is_some()))
            .collect();
        if fresh.is_empty() {
            break;
        }
        for s in fresh {
            death[s] = Some(round);
        }
    }
    death
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn thue_morse() -> Substitution {
        Substitution::from_pairs(&[('a', "ab"), ('b', "ba")]).unwrap()
    }

    #[test]
    fn apply_examples() {
        let tm = thue_morse();
        assert_eq!(tm.format(&tm.apply(&tm.word("ab").unwrap())), "abba");
        assert!(tm.apply(&[]).is_empty());
        let phi = Substitution::from_pairs(&[('a', "."), ('b', "ab")]).unwrap();
        assert_eq!(phi.format(&phi.apply(&phi.word("aba").unwrap())), "ab");
        assert!(tm.word("abc").is_err());
    }

    #[test]
    fn mortality_examples() {
        let r = thue_morse().mortality();
        assert!(r.mortal.is_empty());
        assert_eq!(r.exponent, 0);
        let r = Substitution::from_pairs(&[('a', "."), ('b', "ab")])
            .unwrap()
            .mortality();
        assert_eq!((r.mortal, r.exponent), (vec!['a'], 1));
        let r = Substitution::from_pairs(&[('a', "b"), ('b', "")]).unwrap().mortality();
        assert_eq!((r.mortal, r.exponent), (vec!['a', 'b'], 2));
    }

    #[test]
    fn dsl_round_trip() {
        let text = "# comment\na -> ab\n\nb -> .\nc -> c a\n";
        let phi = Substitution::parse(text).unwrap();
        assert_eq!(phi.alphabet(), &['a', 'b', 'c']);
        assert_eq!(phi.format(phi.image(2)), "ca");
        assert_eq!(Substitution::parse(&phi.to_dsl()).unwrap(), phi);
        assert!(Substitution::parse("a -> b").is_err());
        assert!(Substitution::parse("ab -> a").is_err());
        assert!(Substitution::parse("a -> a\na -> a").is_err());
        assert!(Substitution::parse("a = a").is_err());
    }

    #[test]
    fn canonical_preimage_examples() {
        let tm = thue_morse();
        assert_eq!(
            tm.canonical_preimages(&tm.word("abba").unwrap()),
            vec![tm.word("ab").unwrap()]
        );
        assert!(tm.canonical_preimages(&tm.word("aa").unwrap()).is_empty());
        assert_eq!(tm.canonical_preimages(&[]), vec![Vec::<Letter>::new()]);
        let phi = Substitution::from_pairs(&[('a', "a"), ('b', "a"), ('c', "aa")]).unwrap();
        assert_eq!(phi.canonical_preimages(&phi.word("aa").unwrap()).len(), 5);
    }

    #[test]
    fn prefix_application_matches_full() {
        let phi = Substitution::from_pairs(&[('a', "ca"), ('b', "bcab"), ('c', ".")]).unwrap();
        let w = phi.word("abcab").unwrap();
        for n in 0..6 {
            let full = phi.apply_n(&w, n);
            for len in [0, 1, 3, 7, 50] {
                let p = phi.apply_n_prefix(&w, n, len);
                assert_eq!(p, full[..len.min(full.len())]);
            }
        }
    }

    #[test]
    fn image_lengths_saturate() {
        let phi = Substitution::from_pairs(&[('a', "aa")]).unwrap();
        let l = phi.image_lengths(70);
        assert_eq!(l[10][0], 1024);
        assert_eq!(l[70][0], u64::MAX);
    }
}
