//! Run-length encoding `Δ`, its sections `ψ_W`, the Kolakoski word and
//! smooth words.

use serde::Serialize;

use crate::{Error, Result};

/// Runs of a finite prefix. The last run may continue beyond the prefix, so
/// its length is only a lower bound.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunLength<T> {
    /// Letter of every run, including the last one.
    pub shape: Vec<T>,
    /// Lengths of the complete runs.
    pub lengths: Vec<usize>,
    /// Length seen so far of the last run.
    pub pending: Option<usize>,
}

pub fn rle_decode<T: PartialEq + Clone>(v: &[T]) -> RunLength<T> {
    let mut shape: Vec<T> = Vec::new();
    let mut lengths = Vec::new();
    let mut run = 0;
    for x in v {
        if shape.last() == Some(x) {
            run += 1;
        } else {
            if !shape.is_empty() {
                lengths.push(run);
            }
            shape.push(x.clone());
            run = 1;
        }
    }
    RunLength {
        pending: (!shape.is_empty()).then_some(run),
        shape,
        lengths,
    }
}

/// `ψ_W(x₁x₂⋯) = a₁^{x₁} a₂^{x₂} ⋯` on the common length of `W` and the
/// exponents. `W` must have no two equal consecutive letters.
pub fn psi_expand<T: PartialEq + Clone>(shape: &[T], lengths: &[usize]) -> Result<Vec<T>> {
    if shape.windows(2).any(|p| p[0] == p[1]) {
        return Err(Error::input("shape word has two equal consecutive letters"));
    }
    Ok(shape
        .iter()
        .zip(lengths)
        .flat_map(|(a, &n)| std::iter::repeat_n(a.clone(), n))
        .collect())
}

/// First `len` symbols of the Kolakoski word over `{1, 2}` starting with 2:
/// run `r` has letter 2 for even `r`, 1 for odd `r`, and length equal to the
/// `r`-th symbol.
pub fn kolakoski(len: usize) -> Vec<u8> {
    let mut k: Vec<u8> = Vec::with_capacity(len + 2);
    let mut run = 0;
    while k.len() < len {
        let letter = if run % 2 == 0 { 2 } else { 1 };
        // the first run reads its own first symbol
        let count = if run == 0 { 2 } else { k[run] };
        k.extend(std::iter::repeat_n(letter, usize::from(count)));
        run += 1;
    }
    k.truncate(len);
    k
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KolakoskiReport {
    pub prefix: String,
    /// Complete runs of the prefix, i.e. the positions where `Δ(K)` is known.
    pub determined: usize,
    /// First position (from 1) where `Δ(K)` and `K` differ.
    pub self_mismatch: Option<usize>,
    pub reference: Option<String>,
    /// First position (from 1) where the prefix and the reference differ.
    pub reference_mismatch: Option<usize>,
}

/// Generates `len` symbols, checks `Δ(K) = K` on the determined positions and
/// compares against an optional quoted prefix.
pub fn kolakoski_report(len: usize, reference: Option<&str>) -> Result<KolakoskiReport> {
    let k = kolakoski(len);
    let rl = rle_decode(&k);
    let self_mismatch = rl
        .lengths
        .iter()
        .zip(&k)
        .position(|(&a, &b)| a != usize::from(b))
        .map(|i| i + 1);
    let prefix: String = k.iter().map(|d| char::from(b'0' + d)).collect();
    let reference_mismatch = match reference {
        Some(r) => {
            if let Some(c) = r.chars().find(|c| *c != '1' && *c != '2') {
                return Err(Error::input(format!("reference prefix has symbol {c:?}")));
            }
            prefix.chars().zip(r.chars()).position(|(a, b)| a != b).map(|i| i + 1)
        }
        None => None,
    };
    Ok(KolakoskiReport {
        prefix,
        determined: rl.lengths.len(),
        self_mismatch,
        reference: reference.map(str::to_string),
        reference_mismatch,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SmoothFailure {
    /// Iteration of `Δ` at which the failure shows (0 is the input).
    pub level: usize,
    /// Position counted from 1 in that iterate.
    pub position: usize,
    pub value: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SmoothReport {
    pub passes: bool,
    /// Lengths of the determined iterates `W, Δ(W), Δ²(W), …`.
    pub lengths: Vec<usize>,
    pub failure: Option<SmoothFailure>,
    /// Iterations checked before the determined prefix ran out.
    pub depth_reached: usize,
}

/// Iterates `Δ` up to `depth` times, requiring every symbol and every run
/// length (complete or pending) to lie in `Σ`.
pub fn smooth_check(w: &[usize], sigma: &[usize], depth: usize) -> Result<SmoothReport> {
    if sigma.is_empty() || sigma.contains(&0) {
        return Err(Error::input("alphabet must be a non-empty set of positive integers"));
    }
    let max = *sigma.iter().max().expect("non-empty");
    let mut cur = w.to_vec();
    let mut lengths = vec![cur.len()];
    let fail = |level, position, value, lengths| SmoothReport {
        passes: false,
        lengths,
        failure: Some(SmoothFailure { level, position, value }),
        depth_reached: level,
    };
    for level in 0..=depth {
        if let Some(i) = cur.iter().position(|x| !sigma.contains(x)) {
            return Ok(fail(level, i + 1, cur[i], lengths));
        }
        if level == depth || cur.is_empty() {
            return Ok(SmoothReport {
                passes: true,
                lengths,
                failure: None,
                depth_reached: level,
            });
        }
        let rl = rle_decode(&cur);
        if let Some(p) = rl.pending.filter(|&p| p > max) {
            return Ok(fail(level + 1, rl.lengths.len() + 1, p, lengths));
        }
        cur = rl.lengths;
        lengths.push(cur.len());
    }
    unreachable!("loop returns at level == depth")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kolakoski_is_self_reading() {
        let r = kolakoski_report(1000, Some("2211212211")).unwrap();
        assert_eq!(r.self_mismatch, None);
        assert!(r.determined > 400);
        assert_eq!(&r.prefix[..10], "2211212212");
        assert_eq!(r.reference_mismatch, Some(10));
        assert!(kolakoski_report(5, Some("2x")).is_err());
    }

    #[test]
    fn rle_examples() {
        let v = [2, 2, 1, 1, 2, 1, 2, 2, 1, 1];
        let r = rle_decode(&v);
        assert_eq!(r.lengths, vec![2, 2, 1, 1, 2]);
        assert_eq!(r.shape, vec![2, 1, 2, 1, 2, 1]);
        assert_eq!(r.pending, Some(2));
        let r = rle_decode(&['a', 'a', 'a']);
        assert_eq!((r.shape, r.lengths, r.pending), (vec!['a'], vec![], Some(3)));
        assert_eq!(rle_decode::<u8>(&[]).pending, None);
    }

    #[test]
    fn psi_round_trip() {
        let v = [3, 3, 1, 2, 2, 2, 3, 1, 1];
        let r = rle_decode(&v);
        let back = psi_expand(&r.shape, &r.lengths).unwrap();
        assert_eq!(back[..], v[..back.len()]);
        assert!(psi_expand(&[1, 1], &[1, 1]).is_err());
    }

    #[test]
    fn kolakoski_prefix() {
        assert_eq!(kolakoski(4), vec![2, 2, 1, 1]);
        assert_eq!(kolakoski(10), vec![2, 2, 1, 1, 2, 1, 2, 2, 1, 2]);
        let k = kolakoski(1000);
        let r = rle_decode(&k);
        assert!(r.lengths.iter().zip(&k).all(|(&a, &b)| a == usize::from(b)));
        assert!(r
            .shape
            .iter()
            .enumerate()
            .all(|(i, &x)| x == if i % 2 == 0 { 2 } else { 1 }));
    }

    #[test]
    fn smooth_examples() {
        let k: Vec<usize> = kolakoski(500).into_iter().map(usize::from).collect();
        let r = smooth_check(&k, &[1, 2], 5).unwrap();
        assert!(r.passes);
        assert_eq!(r.depth_reached, 5);
        let r = smooth_check(&[1, 1, 1], &[1, 2], 3).unwrap();
        assert!(!r.passes);
        assert_eq!(r.failure.unwrap().value, 3);
        let r = smooth_check(&[1, 3], &[1, 2], 3).unwrap();
        assert_eq!(r.failure.unwrap().position, 2);
        let shape: Vec<usize> = (0..300).map(|i| if i % 2 == 0 { 1 } else { 2 }).collect();
        let w = psi_expand(&shape, &k).unwrap();
        assert!(smooth_check(&w, &[1, 2], 4).unwrap().passes);
    }
}
