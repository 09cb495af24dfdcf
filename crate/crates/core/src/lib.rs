//! Fixed, orbit, stable and attracting sets of self-maps.
//!
//! For a self-map `φ: X → X` the four sets are
//!
//! * `Fix(φ)`: points with `φ(x) = x`;
//! * `Orb(φ)`: periodic points, the union of `Fix(φⁿ)`;
//! * `Stab(φ)`: points admitting an infinite backward chain
//!   `x = x₀, x₁, …` with `φ(xₙ₊₁) = xₙ`;
//! * `Atrac(φ)`: the eventual image `∩ₙ φⁿ(X)`.
//!
//! They always satisfy `Fix ⊆ Orb ⊆ Stab ⊆ Atrac`. Each module computes or
//! decides them in one concrete setting, using two independent routes
//! wherever an equality between them is being checked:
//!
//! * [`dynamics`]: finite functional graphs and the `ℤ²` staircase map;
//! * [`linear`]: exact rational matrices, kernel and image chains;
//! * [`hilbert`]: the truncated operator built from the pairing `α(k, n)`;
//! * [`words`]: substitutions on finite and right-infinite words;
//! * [`monoid`]: families of self-maps, episturmian words, run-length
//!   encoding and the Kolakoski word;
//! * [`freegroup`]: free-group endomorphisms via Stallings foldings;
//! * [`interval`]: exact piecewise-linear maps of `[0, 1]`.

pub mod dynamics;
mod error;
pub mod freegroup;
pub mod hilbert;
pub mod interval;
pub mod linear;
pub mod monoid;
pub mod random;
pub mod rational;
pub mod words;

pub use error::{Error, Result};
