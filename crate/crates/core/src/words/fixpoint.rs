//! Fixed points of `φ_ω` built from letters that return to the front of their
//! own image, and prefix-precision membership tests for infinite words.

use num_integer::Integer;
use serde::Serialize;
use serde_json::json;

use super::{membership_finite, Letter, Substitution, Word};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FixedPointCase {
    Finite,
    Infinite,
}

/// `φ^r(a) = V₁·a·V₂` with `V₁` made of mortal letters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixedPointSpec {
    pub seed: Letter,
    pub power: u64,
    pub v1: Word,
    pub v2: Word,
    pub case: FixedPointCase,
}

impl FixedPointSpec {
    pub fn to_json(&self, phi: &Substitution) -> serde_json::Value {
        json!({
            "seed": phi.format(&[self.seed]),
            "power": self.power,
            "v1": phi.format(&self.v1),
            "v2": phi.format(&self.v2),
            "case": self.case,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixedPointAnalysis {
    pub specs: Vec<FixedPointSpec>,
    /// `m_s` per letter: least `r ≥ 1` such that the first immortal letter
    /// of `φ^r(s)` is `s` (`None` for mortal letters and letters off a cycle).
    pub returns: Vec<Option<u64>>,
    /// Least common multiple of the defined `m_s` (1 if there are none).
    pub m: u64,
}

impl FixedPointAnalysis {
    pub fn to_json(&self, phi: &Substitution) -> serde_json::Value {
        let returns: serde_json::Map<String, serde_json::Value> = phi
            .letters()
            .map(|s| (phi.format(&[s]), json!(self.returns[usize::from(s)])))
            .collect();
        json!({
            "specs": self.specs.iter().map(|s| s.to_json(phi)).collect::<Vec<_>>(),
            "returns": returns,
            "m": self.m,
        })
    }
}

pub fn fixed_point_specs(phi: &Substitution) -> FixedPointAnalysis {
    let immortal: Vec<Letter> = phi.letters().filter(|&s| !phi.is_mortal(s)).collect();
    let k = immortal.len() as u64;
    // first immortal letter of φ(s); exists because s is immortal
    let head = |s: Letter| -> Letter {
        let img = phi.image(s);
        img[phi.first_immortal(img).expect("immortal letters have immortal images")]
    };
    let mut returns = vec![None; phi.size()];
    for &s in &immortal {
        let mut cur = s;
        for r in 1..=k {
            cur = head(cur);
            if cur == s {
                returns[usize::from(s)] = Some(r);
                break;
            }
        }
    }
    let specs = immortal
        .iter()
        .filter_map(|&s| {
            let r = returns[usize::from(s)]?;
            let img = phi.apply_n(&[s], r);
            let pos = phi.first_immortal(&img).expect("immortal image");
            debug_assert_eq!(img[pos], s);
            let v2 = img[pos + 1..].to_vec();
            let case = if phi.immortal_count(&v2) == 0 {
                FixedPointCase::Finite
            } else {
                FixedPointCase::Infinite
            };
            Some(FixedPointSpec {
                seed: s,
                power: r,
                v1: img[..pos].to_vec(),
                v2,
                case,
            })
        })
        .collect();
    let m = returns.iter().flatten().fold(1u64, |acc, &r| acc.lcm(&r));
    FixedPointAnalysis { specs, returns, m }
}

/// The first `len` letters of the infinite fixed word of `ψ = φ^r` seeded by
/// `spec`, assembled as `ψ^{q−1}(V₁)⋯ψ(V₁)V₁ · a · V₂ψ(V₂)ψ²(V₂)⋯` with
/// `q = exp(ψ)`.
pub fn expand_fixed_point(phi: &Substitution, spec: &FixedPointSpec, len: usize) -> Result<Word> {
    if spec.case == FixedPointCase::Finite {
        return Err(Error::precondition("the seed yields a finite fixed word"));
    }
    let psi = phi.power(spec.power);
    let q = psi.exponent();
    let mut out = Word::new();
    for i in (0..q).rev() {
        out.extend(psi.apply_n(&spec.v1, u64::from(i)));
        if out.len() >= len {
            out.truncate(len);
            return Ok(out);
        }
    }
    out.push(spec.seed);
    let mut block = spec.v2.clone();
    while out.len() < len {
        let room = len - out.len();
        out.extend(block.iter().take(room));
        block = psi.cut_after_immortal(&psi.apply(&block), room);
    }
    out.truncate(len);
    Ok(out)
}

/// `ψ^{exp(ψ)}(a)` for a finite-case spec, where `ψ = φ^r`.
pub fn finite_fixed_word(phi: &Substitution, spec: &FixedPointSpec) -> Result<Word> {
    if spec.case == FixedPointCase::Infinite {
        return Err(Error::precondition("the seed yields an infinite fixed word"));
    }
    let psi = phi.power(spec.power);
    Ok(psi.apply_n(&[spec.seed], u64::from(psi.exponent())))
}

/// `ℓ(φ^{rn}(a))` for `n = 0..=n_max`, saturating.
pub fn growth_lengths(phi: &Substitution, spec: &FixedPointSpec, n_max: u64) -> Vec<u64> {
    let lens = phi.image_lengths(spec.power * n_max);
    (0..=n_max)
        .map(|n| lens[(spec.power * n) as usize][usize::from(spec.seed)])
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum PrefixVerdict {
    Consistent,
    /// First disagreeing position, counted from 1.
    Inconsistent {
        position: usize,
    },
    /// The prefix has no immortal letter.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PrefixReport {
    #[serde(flatten)]
    pub verdict: PrefixVerdict,
    pub m: u64,
    pub length: usize,
    /// Positions of `W` fixed by the known prefix of `φ^m(W)`.
    pub determined: usize,
}

/// Whether a finite prefix `W` can extend to a word fixed by `φ^m`: the
/// known part of `φ^m(W)` must agree with `W` position by position.
pub fn stab_membership_prefix(phi: &Substitution, w: &[Letter]) -> Result<PrefixReport> {
    if !phi.has_immortal() {
        return Err(Error::precondition("the substitution has no immortal letter"));
    }
    let m = fixed_point_specs(phi).m;
    if phi.first_immortal(w).is_none() {
        return Ok(PrefixReport {
            verdict: PrefixVerdict::Inconclusive,
            m,
            length: w.len(),
            determined: 0,
        });
    }
    let img = phi.apply_n_prefix(w, m, w.len());
    let verdict = match w.iter().zip(&img).position(|(a, b)| a != b) {
        Some(i) => PrefixVerdict::Inconsistent { position: i + 1 },
        None => PrefixVerdict::Consistent,
    };
    Ok(PrefixReport {
        verdict,
        m,
        length: w.len(),
        determined: img.len(),
    })
}

/// `φ̃` on `S ∪ {t}` with `φ̃(t) = t`. Returns the new letter as well.
pub fn erasure_extension(phi: &Substitution, t: char) -> Result<(Substitution, Letter)> {
    if phi.alphabet().contains(&t) {
        return Err(Error::input(format!("{t:?} already belongs to the alphabet")));
    }
    let mut alphabet = phi.alphabet().to_vec();
    let mut images: Vec<Word> = phi.letters().map(|s| phi.image(s).to_vec()).collect();
    let tl = alphabet.len() as Letter;
    alphabet.push(t);
    images.push(vec![tl]);
    Ok((Substitution::new(alphabet, images)?, tl))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExtensionCheck {
    pub in_orb: bool,
    pub prefix: PrefixVerdict,
    pub agree: bool,
}

/// Compares the finite-word answer for `W` with the prefix test for
/// `W t t t ⋯` under the extension. Padding with `ℓ(W) + 1` copies of `t`
/// is enough: `φ^m(W)t^∞` and `Wt^∞` differ within the first `ℓ(W) + 1`
/// positions whenever `φ^m(W) ≠ W`.
pub fn extension_check(phi: &Substitution, w: &[Letter], t: char) -> Result<ExtensionCheck> {
    let (ext, tl) = erasure_extension(phi, t)?;
    let in_orb = membership_finite(phi, w).in_orb;
    let mut padded = w.to_vec();
    padded.extend(std::iter::repeat_n(tl, w.len() + 1));
    let prefix = stab_membership_prefix(&ext, &padded)?.verdict;
    Ok(ExtensionCheck {
        in_orb,
        prefix,
        agree: in_orb == (prefix == PrefixVerdict::Consistent),
    })
}
