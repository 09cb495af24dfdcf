//! Episturmian morphisms `L_a`, `R_a` acting on right-infinite words, known
//! through finite prefixes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::words::{Letter, Substitution, Word};
use crate::{Error, Result};

/// `L_a` sends `b ≠ a` to `ab`, `R_a` sends it to `ba`; both fix `a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Token {
    L(Letter),
    R(Letter),
}

impl Token {
    pub fn letter(self) -> Letter {
        match self {
            Token::L(a) | Token::R(a) => a,
        }
    }

    /// All tokens over an alphabet of `size` letters, `L` before `R`.
    pub fn all(size: usize) -> Vec<Token> {
        let letters = (0..size).map(|a| a as Letter);
        letters.clone().map(Token::L).chain(letters.map(Token::R)).collect()
    }

    pub fn substitution(self, alphabet: &[char]) -> Substitution {
        let a = self.letter();
        let images = (0..alphabet.len() as Letter)
            .map(|b| match self {
                _ if b == a => vec![a],
                Token::L(_) => vec![a, b],
                Token::R(_) => vec![b, a],
            })
            .collect();
        Substitution::new(alphabet.to_vec(), images).expect("letters in range")
    }

    pub fn display(self, alphabet: &[char]) -> String {
        let side = match self {
            Token::L(_) => 'L',
            Token::R(_) => 'R',
        };
        format!("{side}{}", alphabet[usize::from(self.letter())])
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::L(a) => write!(f, "L{a}"),
            Token::R(a) => write!(f, "R{a}"),
        }
    }
}

/// Parses whitespace-separated tokens such as `La Rb`.
pub fn parse_directive(text: &str, alphabet: &[char]) -> Result<Vec<Token>> {
    let tokens: Vec<Token> = text
        .split_whitespace()
        .map(|tok| {
            let mut chars = tok.chars();
            let (Some(side), Some(c), None) = (chars.next(), chars.next(), chars.next()) else {
                return Err(Error::input(format!("bad directive token {tok:?}")));
            };
            let a = alphabet
                .iter()
                .position(|&x| x == c)
                .ok_or_else(|| Error::input(format!("token {tok:?} uses a letter outside the alphabet")))?
                as Letter;
            match side {
                'L' => Ok(Token::L(a)),
                'R' => Ok(Token::R(a)),
                _ => Err(Error::input(format!("token {tok:?} must start with L or R"))),
            }
        })
        .collect::<Result<_>>()?;
    if tokens.is_empty() {
        return Err(Error::input("empty directive"));
    }
    Ok(tokens)
}

fn lcp(a: &[Letter], b: &[Letter]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EpiReport {
    pub prefix: String,
    pub requested: usize,
    /// Length of the common prefix after each directive token.
    pub stable_lengths: Vec<usize>,
    pub complete: bool,
}

/// Common prefix `C` of `f(Σ^ω)` for `f = φ_{d₁}∘⋯∘φ_{dₙ}`, capped at `len`.
/// `C` is the limit of `D ← lcp_x(f(x)·D)` from `D = ε`, because every
/// image `f(xw) = f(x)f(w)` continues with `C`.
fn common_prefix(images: &[Word], len: usize) -> Word {
    let mut d = Word::new();
    loop {
        let mut best: Option<Word> = None;
        for img in images {
            let mut cand = img.clone();
            cand.extend(&d);
            cand.truncate(len);
            best = Some(match best {
                None => cand,
                Some(b) => b[..lcp(&b, &cand)].to_vec(),
            });
        }
        let next = best.unwrap_or_default();
        if next == d || next.len() >= len {
            return next;
        }
        d = next;
    }
}

/// Images `φ_{d₁}∘⋯∘φ_{dₙ}(x)` cut at `len` (exact: the maps are
/// non-erasing, so a prefix of length `len` only depends on `len` letters).
fn composed_images(tokens: &[Token], alphabet: &[char], len: usize) -> Vec<Word> {
    let subs: Vec<Substitution> = tokens.iter().map(|t| t.substitution(alphabet)).collect();
    (0..alphabet.len() as Letter)
        .map(|x| {
            subs.iter().rev().fold(vec![x], |w, s| {
                let mut img = s.apply(&w);
                img.truncate(len);
                img
            })
        })
        .collect()
}

pub fn episturmian_generate(tokens: &[Token], alphabet: &[char], len: usize) -> Result<EpiReport> {
    if tokens.is_empty() {
        return Err(Error::input("empty directive"));
    }
    if let Some(t) = tokens.iter().find(|t| usize::from(t.letter()) >= alphabet.len()) {
        return Err(Error::input(format!("token {t} outside the alphabet")));
    }
    let mut stable_lengths = Vec::with_capacity(tokens.len());
    let mut prefix = Word::new();
    for n in 1..=tokens.len() {
        prefix = common_prefix(&composed_images(&tokens[..n], alphabet, len), len);
        stable_lengths.push(prefix.len());
    }
    Ok(EpiReport {
        prefix: prefix.iter().map(|&l| alphabet[usize::from(l)]).collect(),
        requested: len,
        complete: prefix.len() >= len,
        stable_lengths,
    })
}

/// Prefixes `W'` of right-infinite words `X'` with `φ(X')` beginning with
/// `W`, cut just after the letter whose image covers the end of `W`.
/// Requires a non-erasing `φ`.
pub fn prefix_preimages(phi: &Substitution, w: &[Letter]) -> Vec<Word> {
    fn walk(phi: &Substitution, w: &[Letter], i: usize, acc: &mut Word, out: &mut BTreeSet<Word>) {
        if i == w.len() {
            out.insert(acc.clone());
            return;
        }
        let rest = &w[i..];
        for s in phi.letters() {
            let b = phi.image(s);
            if b.is_empty() {
                continue;
            }
            if rest.starts_with(b) {
                acc.push(s);
                walk(phi, w, i + b.len(), acc, out);
                acc.pop();
            } else if b.starts_with(rest) {
                acc.push(s);
                out.insert(acc.clone());
                acc.pop();
            }
        }
    }
    let mut out = BTreeSet::new();
    walk(phi, w, 0, &mut Word::new(), &mut out);
    out.into_iter().collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DesubNode {
    pub token: Option<String>,
    pub prefix: String,
    pub children: Vec<DesubNode>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DesubReport {
    pub root: DesubNode,
    pub depth: usize,
    /// Longest branch found.
    pub depth_reached: usize,
    pub nodes: usize,
    /// The node cap stopped the search before it was exhaustive.
    pub truncated: bool,
}

impl DesubReport {
    /// `W` has a desubstitution branch of the full requested depth.
    pub fn in_stab_at_precision(&self) -> bool {
        self.depth_reached == self.depth
    }
}

/// Tree of `(token, shorter prefix)` steps under all `L_a`, `R_a`, explored
/// depth first in token order up to `depth` levels and `node_cap` nodes.
pub fn desubstitute_branches(alphabet: &[char], w: &[Letter], depth: usize, node_cap: usize) -> DesubReport {
    let subs: Vec<(Token, Substitution)> = Token::all(alphabet.len())
        .into_iter()
        .map(|t| (t, t.substitution(alphabet)))
        .collect();
    struct Search<'a> {
        subs: Vec<(Token, Substitution)>,
        alphabet: &'a [char],
        depth: usize,
        cap: usize,
        nodes: usize,
        truncated: bool,
        deepest: usize,
    }
    impl Search<'_> {
        fn fmt(&self, w: &[Letter]) -> String {
            w.iter().map(|&l| self.alphabet[usize::from(l)]).collect()
        }

        fn grow(&mut self, w: &[Letter], level: usize) -> Vec<DesubNode> {
            self.deepest = self.deepest.max(level);
            if level == self.depth || w.is_empty() {
                return Vec::new();
            }
            let mut out = Vec::new();
            for i in 0..self.subs.len() {
                let (t, pres) = (self.subs[i].0, prefix_preimages(&self.subs[i].1, w));
                for pre in pres {
                    if self.nodes >= self.cap {
                        self.truncated = true;
                        return out;
                    }
                    self.nodes += 1;
                    let children = self.grow(&pre, level + 1);
                    out.push(DesubNode {
                        token: Some(t.display(self.alphabet)),
                        prefix: self.fmt(&pre),
                        children,
                    });
                }
            }
            out
        }
    }
    let mut st = Search {
        subs,
        alphabet,
        depth,
        cap: node_cap,
        nodes: 1,
        truncated: false,
        deepest: 0,
    };
    let children = st.grow(w, 0);
    DesubReport {
        root: DesubNode {
            token: None,
            prefix: st.fmt(w),
            children,
        },
        depth,
        depth_reached: st.deepest,
        nodes: st.nodes,
        truncated: st.truncated,
    }
}

/// Whether `W` desubstitutes along the given directive for its full length.
/// The empty prefix desubstitutes trivially.
pub fn directive_path_exists(tokens: &[Token], alphabet: &[char], w: &[Letter]) -> bool {
    let mut frontier: BTreeSet<Word> = BTreeSet::from([w.to_vec()]);
    for t in tokens {
        let s = t.substitution(alphabet);
        frontier = frontier.iter().flat_map(|v| prefix_preimages(&s, v)).collect();
        if frontier.is_empty() {
            return false;
        }
    }
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum AtracDepth {
    /// Names of `f₁, …, fₙ` with `f₁∘⋯∘fₙ(X)` consistent with `W`.
    Witnessed { composition: Vec<String> },
    /// No composition of this length is consistent with `W`.
    Refuted { length: usize },
}

/// One-sided evidence that the prefix `W` lies in `∪_{ℓ(f)=n} f(Σ^ω)`.
pub fn monoid_atrac_depth(maps: &[(String, Substitution)], w: &[Letter], n: usize) -> Result<AtracDepth> {
    if maps.iter().any(|(_, s)| !s.is_non_erasing()) {
        return Err(Error::precondition("word maps must be non-erasing"));
    }
    // level k: prefix → (map used, parent prefix at level k−1)
    let mut levels: Vec<BTreeMap<Word, (usize, Word)>> =
        vec![BTreeMap::from([(w.to_vec(), (usize::MAX, Word::new()))])];
    for k in 1..=n {
        let mut next = BTreeMap::new();
        for v in levels[k - 1].keys() {
            for (i, (_, s)) in maps.iter().enumerate() {
                for pre in prefix_preimages(s, v) {
                    next.entry(pre).or_insert_with(|| (i, v.clone()));
                }
            }
        }
        if next.is_empty() {
            return Ok(AtracDepth::Refuted { length: k });
        }
        levels.push(next);
    }
    let mut composition = Vec::with_capacity(n);
    let mut cur = levels[n].keys().next().expect("non-empty level").clone();
    for k in (1..=n).rev() {
        let (i, parent) = levels[k][&cur].clone();
        composition.push(maps[i].0.clone());
        cur = parent;
    }
    composition.reverse();
    Ok(AtracDepth::Witnessed { composition })
}
