//! Seeded instance generators shared by the property campaigns.
//!
//! All generators draw from a caller-provided RNG, so a campaign seeded with
//! `ChaCha8Rng::seed_from_u64` replays exactly.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::dynamics::FiniteSelfMap;
use crate::freegroup::{FreeEndo, ReducedWord};
use crate::interval::{Piece, PwlMap};
use crate::linear::RationalMatrix;
use crate::rational::{q, Q};
use crate::words::{Letter, Substitution};

pub const LETTERS: [char; 8] = ['a', 'b', 'c', 'd', 'e', 'f', 'g', 'h'];

/// A self-map of `size` points. Half the draws are uniform; the other half
/// send most points to a smaller label, which grows long in-trees and short
/// cycles.
pub fn random_self_map(rng: &mut impl Rng, size: usize) -> FiniteSelfMap {
    assert!(size > 0, "size must be positive");
    let uniform = rng.gen_bool(0.5);
    let succ = (0..size)
        .map(|i| {
            if uniform || i == 0 || rng.gen_bool(0.1) {
                rng.gen_range(0..size)
            } else {
                rng.gen_range(0..i)
            }
        })
        .collect();
    FiniteSelfMap::new(succ).expect("labels in range")
}

fn small_rational(rng: &mut impl Rng) -> Q {
    q(rng.gen_range(-3..=3), rng.gen_range(1..=3))
}

/// A `d × d` rational matrix, biased towards singular ones with long kernel
/// chains: sparse draws, low-rank products and strictly triangular parts.
pub fn random_matrix(rng: &mut impl Rng, d: usize) -> RationalMatrix {
    let mut m = RationalMatrix::zeros(d, d);
    match rng.gen_range(0..4) {
        0 => {
            for i in 0..d {
                for j in 0..d {
                    m[(i, j)] = small_rational(rng);
                }
            }
        }
        1 => {
            for i in 0..d {
                for j in 0..d {
                    if rng.gen_bool(0.3) {
                        m[(i, j)] = small_rational(rng);
                    }
                }
            }
        }
        2 => {
            let r = rng.gen_range(0..d.max(1));
            let mut a = RationalMatrix::zeros(d, r.max(1));
            let mut b = RationalMatrix::zeros(r.max(1), d);
            for i in 0..d {
                for j in 0..r {
                    a[(i, j)] = small_rational(rng);
                    b[(j, i)] = small_rational(rng);
                }
            }
            m = a.mul(&b).expect("compatible shapes");
        }
        _ => {
            // strictly upper triangular block plus an invertible diagonal tail
            let nil = rng.gen_range(0..=d);
            for i in 0..d {
                for j in 0..d {
                    if (i < nil && j > i && j < nil) || (i >= nil && j >= nil && rng.gen_bool(0.4)) {
                        m[(i, j)] = small_rational(rng);
                    }
                }
                if i >= nil {
                    m[(i, i)] = q(rng.gen_range(1..=3), 1);
                }
            }
        }
    }
    m
}

/// A substitution on at most `max_alphabet` letters with images of length at
/// most `max_image`. Erasing draws always send some letter to ε.
pub fn random_substitution(rng: &mut impl Rng, max_alphabet: usize, max_image: usize, erasing: bool) -> Substitution {
    let size = rng.gen_range(2..=max_alphabet.max(2)).min(LETTERS.len());
    let min_len = usize::from(!erasing);
    let mut images: Vec<Vec<Letter>> = (0..size)
        .map(|_| {
            let len = rng.gen_range(min_len..=max_image.max(min_len));
            (0..len).map(|_| rng.gen_range(0..size) as Letter).collect()
        })
        .collect();
    if erasing && images.iter().all(|w| !w.is_empty()) {
        let victim = rng.gen_range(0..size);
        images[victim].clear();
    }
    Substitution::new(LETTERS[..size].to_vec(), images).expect("valid images")
}

/// `count` self-maps of one set of `size` points.
pub fn random_system(rng: &mut impl Rng, count: usize, size: usize) -> Vec<FiniteSelfMap> {
    (0..count).map(|_| random_self_map(rng, size)).collect()
}

/// A random word over `size` letters.
pub fn random_word(rng: &mut impl Rng, size: usize, len: usize) -> Vec<Letter> {
    (0..len).map(|_| rng.gen_range(0..size) as Letter).collect()
}

/// A reduced word over `rank` generators of length at most `max_len`.
pub fn random_group_word(rng: &mut impl Rng, rank: usize, max_len: usize) -> ReducedWord {
    let len = rng.gen_range(0..=max_len);
    ReducedWord::reduce((0..len).map(|_| {
        let g = rng.gen_range(1..=rank as i32);
        if rng.gen_bool(0.5) {
            g
        } else {
            -g
        }
    }))
}

/// An endomorphism of `F_rank` whose generator images have at most `max_len`
/// letters before reduction. A quarter of the draws reuse a generator image,
/// which makes the rank drop.
pub fn random_endo(rng: &mut impl Rng, rank: usize, max_len: usize) -> FreeEndo {
    let mut images: Vec<ReducedWord> = (0..rank).map(|_| random_group_word(rng, rank, max_len)).collect();
    if rank > 1 && rng.gen_bool(0.25) {
        let i = rng.gen_range(1..rank);
        images[i] = images[rng.gen_range(0..i)].clone();
    }
    FreeEndo::new(rank, images).expect("images use the given rank")
}

/// A piecewise-affine self-map of `[0,1]` with at most `max_pieces` pieces
/// and breakpoint and value denominators at most `den`. Half the draws are
/// continuous.
pub fn random_pwl(rng: &mut impl Rng, max_pieces: usize, den: i64) -> PwlMap {
    let mut cuts: Vec<i64> = (1..den).collect();
    cuts.shuffle(rng);
    let count = rng.gen_range(1..=max_pieces.max(1)).min(den as usize);
    let mut inner: Vec<i64> = cuts[..count - 1].to_vec();
    inner.sort_unstable();
    let breakpoints: Vec<Q> = std::iter::once(q(0, 1))
        .chain(inner.iter().map(|&c| q(c, den)))
        .chain(std::iter::once(q(1, 1)))
        .collect();
    let continuous = rng.gen_bool(0.5);
    let mut value = || q(rng.gen_range(0..=den), den);
    let mut left = value();
    let mut pieces = Vec::with_capacity(count);
    for w in breakpoints.windows(2) {
        if !continuous {
            left = value();
        }
        let right = value();
        let p = (&right - &left) / (&w[1] - &w[0]);
        let c = &left - &p * &w[0];
        pieces.push(Piece { p, q: c });
        left = right;
    }
    PwlMap::new(breakpoints, pieces, None).expect("values lie in [0,1]")
}

/// Picks one element; panics on an empty slice.
pub fn pick<'a, T>(rng: &mut impl Rng, items: &'a [T]) -> &'a T {
    items.choose(rng).expect("non-empty slice")
}
