//! Piecewise-affine self-maps of `[0,1]` with rational data, and exact unions
//! of intervals.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize, Serializer};

use crate::rational::{fmt_q, parse_q, q, qi, serialize_q, serialize_q_vec, Q};
use crate::{Error, Result};

/// A non-empty interval; a single point is `[a,a]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub lo: Q,
    pub lo_closed: bool,
    pub hi: Q,
    pub hi_closed: bool,
}

impl Interval {
    /// `None` when the described set is empty.
    pub fn new(lo: Q, lo_closed: bool, hi: Q, hi_closed: bool) -> Option<Self> {
        match lo.cmp(&hi) {
            Ordering::Less => Some(Interval {
                lo,
                lo_closed,
                hi,
                hi_closed,
            }),
            Ordering::Equal if lo_closed && hi_closed => Some(Interval {
                lo,
                lo_closed,
                hi,
                hi_closed,
            }),
            _ => None,
        }
    }

    pub fn closed(lo: Q, hi: Q) -> Self {
        Self::new(lo, true, hi, true).expect("lo ≤ hi")
    }

    pub fn point(x: Q) -> Self {
        Interval {
            lo: x.clone(),
            lo_closed: true,
            hi: x,
            hi_closed: true,
        }
    }

    pub fn unit() -> Self {
        Self::closed(qi(0), qi(1))
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: &Q) -> bool {
        let above = if self.lo_closed { x >= &self.lo } else { x > &self.lo };
        let below = if self.hi_closed { x <= &self.hi } else { x < &self.hi };
        above && below
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let (lo, lo_closed) = match self.lo.cmp(&other.lo) {
            Ordering::Less => (other.lo.clone(), other.lo_closed),
            Ordering::Greater => (self.lo.clone(), self.lo_closed),
            Ordering::Equal => (self.lo.clone(), self.lo_closed && other.lo_closed),
        };
        let (hi, hi_closed) = match self.hi.cmp(&other.hi) {
            Ordering::Less => (self.hi.clone(), self.hi_closed),
            Ordering::Greater => (other.hi.clone(), other.hi_closed),
            Ordering::Equal => (self.hi.clone(), self.hi_closed && other.hi_closed),
        };
        Interval::new(lo, lo_closed, hi, hi_closed)
    }

    /// Image under `x ↦ px + q`.
    pub fn affine_image(&self, p: &Q, c: &Q) -> Interval {
        let a = p * &self.lo + c;
        let b = p * &self.hi + c;
        if p.is_zero() {
            Interval::point(c.clone())
        } else if p.is_positive() {
            Interval {
                lo: a,
                lo_closed: self.lo_closed,
                hi: b,
                hi_closed: self.hi_closed,
            }
        } else {
            Interval {
                lo: b,
                lo_closed: self.hi_closed,
                hi: a,
                hi_closed: self.lo_closed,
            }
        }
    }

    /// A canonical element: a closed left end, else a closed right end, else the midpoint.
    pub fn representative(&self) -> Q {
        if self.lo_closed {
            self.lo.clone()
        } else if self.hi_closed {
            self.hi.clone()
        } else {
            (&self.lo + &self.hi) / qi(2)
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_point() {
            return write!(f, "{{{}}}", fmt_q(&self.lo));
        }
        write!(
            f,
            "{}{},{}{}",
            if self.lo_closed { '[' } else { '(' },
            fmt_q(&self.lo),
            fmt_q(&self.hi),
            if self.hi_closed { ']' } else { ')' }
        )
    }
}

/// Disjoint, sorted, maximally merged intervals.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IntervalUnion(Vec<Interval>);

impl IntervalUnion {
    pub fn empty() -> Self {
        IntervalUnion(Vec::new())
    }

    pub fn unit() -> Self {
        IntervalUnion(vec![Interval::unit()])
    }

    pub fn from_intervals(mut parts: Vec<Interval>) -> Self {
        parts.sort_by(|a, b| a.lo.cmp(&b.lo).then(b.lo_closed.cmp(&a.lo_closed)));
        let mut out: Vec<Interval> = Vec::with_capacity(parts.len());
        for b in parts {
            if let Some(a) = out.last_mut() {
                let touches = b.lo < a.hi || (b.lo == a.hi && (a.hi_closed || b.lo_closed));
                if touches {
                    match b.hi.cmp(&a.hi) {
                        Ordering::Greater => {
                            a.hi = b.hi;
                            a.hi_closed = b.hi_closed;
                        }
                        Ordering::Equal => a.hi_closed |= b.hi_closed,
                        Ordering::Less => {}
                    }
                    continue;
                }
            }
            out.push(b);
        }
        IntervalUnion(out)
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, x: &Q) -> bool {
        self.0.iter().any(|i| i.contains(x))
    }

    pub fn intersect_interval(&self, other: &Interval) -> IntervalUnion {
        IntervalUnion(self.0.iter().filter_map(|i| i.intersect(other)).collect())
    }

    pub fn is_subset_of(&self, other: &IntervalUnion) -> bool {
        self.0
            .iter()
            .all(|i| other.0.iter().any(|o| i.intersect(o).as_ref() == Some(i)))
    }

    /// Rationals `a/b` of the union with `b ≤ max_den`, ascending.
    pub fn grid_points(&self, max_den: u32) -> Vec<Q> {
        unit_grid(max_den).into_iter().filter(|x| self.contains(x)).collect()
    }
}

/// All rationals of `[0,1]` with denominator at most `max_den`, ascending.
pub fn unit_grid(max_den: u32) -> Vec<Q> {
    let set: BTreeSet<Q> = (1..=max_den as i64)
        .flat_map(|d| (0..=d).map(move |n| q(n, d)))
        .collect();
    set.into_iter().collect()
}

impl fmt::Display for IntervalUnion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "∅");
        }
        let parts: Vec<String> = self.0.iter().map(Interval::to_string).collect();
        write!(f, "{}", parts.join(" ∪ "))
    }
}

impl Serialize for IntervalUnion {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Which side owns an interior breakpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Owner {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Piece {
    #[serde(serialize_with = "serialize_q")]
    pub p: Q,
    #[serde(serialize_with = "serialize_q")]
    pub q: Q,
}

impl Piece {
    pub fn eval(&self, x: &Q) -> Q {
        &self.p * x + &self.q
    }
}

/// `x ↦ pᵢx + qᵢ` on the i-th piece. Pieces are left-closed unless an interior
/// breakpoint is owned by the piece on its left; the last piece is closed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PwlMap {
    #[serde(serialize_with = "serialize_q_vec")]
    breakpoints: Vec<Q>,
    pieces: Vec<Piece>,
    owners: Vec<Owner>,
}

#[derive(Deserialize)]
struct RawPiece {
    p: String,
    q: String,
}

#[derive(Deserialize)]
struct RawMap {
    breakpoints: Vec<String>,
    pieces: Vec<RawPiece>,
    #[serde(default)]
    owners: Option<Vec<Owner>>,
}

impl PwlMap {
    pub fn new(breakpoints: Vec<Q>, pieces: Vec<Piece>, owners: Option<Vec<Owner>>) -> Result<Self> {
        if breakpoints.len() < 2 || breakpoints[0] != qi(0) || breakpoints[breakpoints.len() - 1] != qi(1) {
            return Err(Error::input("breakpoints must run from 0 to 1"));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::input("breakpoints must be strictly increasing"));
        }
        if pieces.len() + 1 != breakpoints.len() {
            return Err(Error::input(format!(
                "{} breakpoints need {} pieces, got {}",
                breakpoints.len(),
                breakpoints.len() - 1,
                pieces.len()
            )));
        }
        let owners = owners.unwrap_or_else(|| vec![Owner::Right; pieces.len() - 1]);
        if owners.len() + 1 != pieces.len() {
            return Err(Error::input("one owner per interior breakpoint"));
        }
        let unit = Interval::unit();
        for (i, piece) in pieces.iter().enumerate() {
            for x in [&breakpoints[i], &breakpoints[i + 1]] {
                if !unit.contains(&piece.eval(x)) {
                    return Err(Error::input(format!("piece {i} leaves [0,1] near {}", fmt_q(x))));
                }
            }
        }
        Ok(PwlMap {
            breakpoints,
            pieces,
            owners,
        })
    }

    /// Reads `{"breakpoints": [...], "pieces": [{"p","q"}], "owners": ["left"|"right", …]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawMap = serde_json::from_str(text).map_err(|e| Error::input(format!("interval map: {e}")))?;
        let breakpoints = raw.breakpoints.iter().map(|s| parse_q(s)).collect::<Result<_>>()?;
        let pieces = raw
            .pieces
            .iter()
            .map(|r| {
                Ok(Piece {
                    p: parse_q(&r.p)?,
                    q: parse_q(&r.q)?,
                })
            })
            .collect::<Result<_>>()?;
        Self::new(breakpoints, pieces, raw.owners)
    }

    /// `x ↦ px + q` on all of `[0,1]`.
    pub fn affine(p: Q, c: Q) -> Result<Self> {
        Self::new(vec![qi(0), qi(1)], vec![Piece { p, q: c }], None)
    }

    /// `1/2` on `[0,1/2]`, `(3/2)(x − 1/2)` on `(1/2,1]`.
    pub fn collapsing_example() -> Self {
        Self::new(
            vec![qi(0), q(1, 2), qi(1)],
            vec![
                Piece { p: qi(0), q: q(1, 2) },
                Piece {
                    p: q(3, 2),
                    q: q(-3, 4),
                },
            ],
            Some(vec![Owner::Left]),
        )
        .expect("valid map")
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn domain(&self, i: usize) -> Interval {
        let last = self.pieces.len() - 1;
        let lo_closed = i == 0 || self.owners[i - 1] == Owner::Right;
        let hi_closed = i == last || self.owners[i] == Owner::Left;
        Interval::new(
            self.breakpoints[i].clone(),
            lo_closed,
            self.breakpoints[i + 1].clone(),
            hi_closed,
        )
        .expect("pieces have positive length")
    }

    fn piece_of(&self, x: &Q) -> Option<usize> {
        (0..self.pieces.len()).find(|&i| self.domain(i).contains(x))
    }

    pub fn apply(&self, x: &Q) -> Result<Q> {
        let i = self
            .piece_of(x)
            .ok_or_else(|| Error::input(format!("{} is outside [0,1]", fmt_q(x))))?;
        Ok(self.pieces[i].eval(x))
    }

    pub fn image(&self, u: &IntervalUnion) -> IntervalUnion {
        let parts = (0..self.pieces.len())
            .flat_map(|i| {
                let d = self.domain(i);
                let piece = &self.pieces[i];
                u.intervals()
                    .iter()
                    .filter_map(move |j| j.intersect(&d))
                    .map(move |j| j.affine_image(&piece.p, &piece.q))
            })
            .collect();
        IntervalUnion::from_intervals(parts)
    }

    /// All `y` with `f(y) = x`.
    pub fn preimage(&self, x: &Q) -> IntervalUnion {
        let parts = (0..self.pieces.len())
            .filter_map(|i| {
                let d = self.domain(i);
                let Piece { p, q } = &self.pieces[i];
                if p.is_zero() {
                    (q == x).then_some(d)
                } else {
                    let y = (x - q) / p;
                    d.contains(&y).then(|| Interval::point(y))
                }
            })
            .collect();
        IntervalUnion::from_intervals(parts)
    }
}

/// `f¹([0,1]) ⊇ … ⊇ fⁿ([0,1])`.
pub fn atrac_iterates(f: &PwlMap, n: usize) -> Result<Vec<IntervalUnion>> {
    if n == 0 {
        return Err(Error::precondition("need at least one iterate"));
    }
    let mut out: Vec<IntervalUnion> = Vec::with_capacity(n);
    let mut cur = IntervalUnion::unit();
    for k in 1..=n {
        let next = f.image(&cur);
        if next.is_empty() {
            return Err(Error::verification(format!("iterate {k} is empty")));
        }
        if !next.is_subset_of(&cur) {
            return Err(Error::verification(format!(
                "iterate {k} is not inside iterate {}",
                k - 1
            )));
        }
        out.push(next.clone());
        cur = next;
    }
    Ok(out)
}

/// Solutions of `f(x) = x`; identity pieces contribute their whole domain.
pub fn fixed_points(f: &PwlMap) -> IntervalUnion {
    let parts = (0..f.pieces.len())
        .filter_map(|i| {
            let d = f.domain(i);
            let Piece { p, q } = &f.pieces[i];
            if p.is_one() {
                q.is_zero().then_some(d)
            } else {
                let x = q / (qi(1) - p);
                d.contains(&x).then(|| Interval::point(x))
            }
        })
        .collect();
    IntervalUnion::from_intervals(parts)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PointChain {
    #[serde(serialize_with = "serialize_q")]
    pub x: Q,
    pub depth: usize,
    /// Largest `k ≤ depth` with `x ∈ fᵏ([0,1])`.
    pub reachable: usize,
    /// `x = x₀, x₁, …` with `f(x_{m+1}) = x_m`, when `reachable = depth`.
    #[serde(serialize_with = "serialize_chain")]
    pub chain: Option<Vec<Q>>,
}

fn serialize_chain<S: Serializer>(c: &Option<Vec<Q>>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match c {
        Some(c) => s.collect_seq(c.iter().map(fmt_q)),
        None => s.serialize_none(),
    }
}

/// A backward chain of length `depth` from `x`. Each step picks a preimage
/// inside `f^{remaining}([0,1])`, so no step can strand the search; `x` itself
/// is preferred when it is its own preimage.
pub fn backward_chain_point(f: &PwlMap, x: &Q, depth: usize) -> Result<PointChain> {
    if !Interval::unit().contains(x) {
        return Err(Error::input(format!("{} is outside [0,1]", fmt_q(x))));
    }
    let mut levels = vec![IntervalUnion::unit()];
    if depth > 0 {
        levels.extend(atrac_iterates(f, depth)?);
    }
    let reachable = (0..=depth).rev().find(|&k| levels[k].contains(x)).unwrap_or(0);
    if reachable < depth {
        return Ok(PointChain {
            x: x.clone(),
            depth,
            reachable,
            chain: None,
        });
    }
    let mut chain = vec![x.clone()];
    for remaining in (0..depth).rev() {
        let cur = chain.last().expect("non-empty");
        let allowed: Vec<Interval> = f
            .preimage(cur)
            .intervals()
            .iter()
            .flat_map(|i| levels[remaining].intersect_interval(i).intervals().to_vec())
            .collect();
        let options = IntervalUnion::from_intervals(allowed);
        let next = if options.contains(cur) {
            cur.clone()
        } else {
            options
                .intervals()
                .first()
                .map(Interval::representative)
                .ok_or_else(|| Error::verification("an image point has no preimage in the previous iterate"))?
        };
        chain.push(next);
    }
    if !verify_chain(f, &chain)? {
        return Err(Error::verification("backward chain does not map forward"));
    }
    Ok(PointChain {
        x: x.clone(),
        depth,
        reachable,
        chain: Some(chain),
    })
}

pub fn verify_chain(f: &PwlMap, chain: &[Q]) -> Result<bool> {
    for w in chain.windows(2) {
        if f.apply(&w[1])? != w[0] {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OrbitReturn {
    /// `fᵖ(x) = x`.
    Returns {
        period: usize,
    },
    /// The orbit entered a cycle that avoids `x`, so it never comes back.
    Never {
        tail: usize,
        cycle: usize,
    },
    Unknown {
        steps: usize,
    },
}

pub fn orbit_return(f: &PwlMap, x: &Q, max_steps: usize) -> Result<OrbitReturn> {
    let mut seen: Vec<Q> = vec![x.clone()];
    let mut cur = x.clone();
    for step in 1..=max_steps {
        cur = f.apply(&cur)?;
        if &cur == x {
            return Ok(OrbitReturn::Returns { period: step });
        }
        if let Some(at) = seen.iter().position(|y| y == &cur) {
            return Ok(OrbitReturn::Never {
                tail: at,
                cycle: step - at,
            });
        }
        seen.push(cur.clone());
    }
    Ok(OrbitReturn::Unknown { steps: max_steps })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SeparationSearch {
    pub depth: usize,
    pub max_den: u32,
    pub attractor: IntervalUnion,
    pub fixed: IntervalUnion,
    #[serde(serialize_with = "serialize_q_vec")]
    pub candidates: Vec<Q>,
    /// Every candidate has a verified chain of the full depth.
    pub all_chained: bool,
    /// A candidate with a full-depth chain whose orbit never returns.
    pub witness: Option<PointChain>,
    pub witness_orbit: Option<OrbitReturn>,
}

/// Looks for a point of `Stab ∖ Orb` among the grid points of `f^depth([0,1])`.
pub fn separation_search(f: &PwlMap, depth: usize, max_den: u32, orbit_steps: usize) -> Result<SeparationSearch> {
    let attractor = atrac_iterates(f, depth)?.pop().expect("depth ≥ 1");
    let candidates = attractor.grid_points(max_den);
    let mut all_chained = true;
    let mut witness = None;
    let mut witness_orbit = None;
    for x in &candidates {
        let chain = backward_chain_point(f, x, depth)?;
        if chain.chain.is_none() {
            all_chained = false;
            continue;
        }
        if witness.is_none() {
            let orbit = orbit_return(f, x, orbit_steps)?;
            if matches!(orbit, OrbitReturn::Never { .. }) {
                witness = Some(chain);
                witness_orbit = Some(orbit);
            }
        }
    }
    Ok(SeparationSearch {
        depth,
        max_den,
        attractor,
        fixed: fixed_points(f),
        candidates,
        all_chained,
        witness,
        witness_orbit,
    })
}
