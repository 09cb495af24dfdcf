//! Exact rational linear self-maps of `ℚᵈ`: kernel and image chains of the
//! powers, the stabilization index and the stable subspace.

use serde::{Deserialize, Serialize};

use crate::dynamics::FiniteSelfMap;
use crate::rational::{fmt_q, parse_q, Q};
use crate::{Error, Result};
use num_traits::{One, Zero};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Q>,
}

#[derive(Deserialize)]
struct RawMatrix {
    n: usize,
    entries: Vec<Vec<String>>,
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RationalMatrix {
            rows,
            cols,
            data: vec![Q::zero(); rows * cols],
        }
    }

    pub fn identity(d: usize) -> Self {
        let mut m = Self::zeros(d, d);
        for i in 0..d {
            m[(i, i)] = Q::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Q>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if r == 0 || c == 0 {
            return Err(Error::input("matrix must be non-empty"));
        }
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::input("ragged matrix rows"));
        }
        Ok(RationalMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_i64(rows: &[&[i64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|row| row.iter().map(|&x| Q::from_integer(x.into())).collect())
                .collect(),
        )
    }

    /// Reads `{"n": d, "entries": [["p/q", ...], ...]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawMatrix = serde_json::from_str(text).map_err(|e| Error::input(format!("matrix: {e}")))?;
        if raw.entries.len() != raw.n || raw.entries.iter().any(|r| r.len() != raw.n) {
            return Err(Error::input(format!("entries must form a {0}x{0} array", raw.n)));
        }
        let rows = raw
            .entries
            .iter()
            .map(|r| r.iter().map(|s| parse_q(s)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(rows)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let entries: Vec<Vec<String>> = (0..self.rows)
            .map(|i| (0..self.cols).map(|j| fmt_q(&self[(i, j)])).collect())
            .collect();
        serde_json::json!({ "n": self.rows, "entries": entries })
    }

    /// The linear extension of a finite self-map to the free vector space on
    /// its points: column `x` is the basis vector `e_{φ(x)}`.
    pub fn from_self_map(f: &FiniteSelfMap) -> Self {
        let d = f.size();
        let mut m = Self::zeros(d, d);
        for x in 0..d {
            m[(f.apply(x), x)] = Q::one();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    fn require_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::input(format!(
                "expected a square matrix, got {}x{}",
                self.rows, self.cols
            )))
        }
    }

    pub fn row(&self, i: usize) -> &[Q] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul(&self, other: &RationalMatrix) -> Result<RationalMatrix> {
        if self.cols != other.rows {
            return Err(Error::input("dimension mismatch in product"));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn pow(&self, n: usize) -> Result<RationalMatrix> {
        let d = self.require_square()?;
        let mut acc = Self::identity(d);
        for _ in 0..n {
            acc = self.mul(&acc)?;
        }
        Ok(acc)
    }

    pub fn apply(&self, v: &[Q]) -> Vec<Q> {
        assert_eq!(v.len(), self.cols, "vector length must match column count");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .map(|(a, b)| a * b)
                    .fold(Q::zero(), |s, t| s + t)
            })
            .collect()
    }

    pub fn transpose(&self) -> RationalMatrix {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    /// Reduced row echelon form and pivot columns. Pivots are scaled to one
    /// and chosen as the first non-zero entry down each column.
    pub fn rref(&self) -> (RationalMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m[(i, c)].is_zero()) else {
                continue;
            };
            m.swap_rows(r, p);
            let inv = m[(r, c)].recip();
            for j in c..m.cols {
                let v = &m[(r, j)] * &inv;
                m[(r, j)] = v;
            }
            for i in 0..m.rows {
                if i == r || m[(i, c)].is_zero() {
                    continue;
                }
                let factor = m[(i, c)].clone();
                for j in c..m.cols {
                    let delta = &factor * &m[(r, j)];
                    if !delta.is_zero() {
                        m[(i, j)] -= delta;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }
}

impl std::ops::Index<(usize, usize)> for RationalMatrix {
    type Output = Q;
    fn index(&self, (i, j): (usize, usize)) -> &Q {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RationalMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Q {
        &mut self.data[i * self.cols + j]
    }
}

/// A subspace of `ℚᵈ` stored by its canonical basis: the non-zero rows of the
/// reduced row echelon form of any spanning set. Equal subspaces have equal
/// bases.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubspaceBasis {
    pub ambient: usize,
    pub dimension: usize,
    #[serde(serialize_with = "serialize_vectors")]
    pub vectors: Vec<Vec<Q>>,
}

fn serialize_vectors<S: serde::Serializer>(vs: &[Vec<Q>], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(vs.iter().map(|v| v.iter().map(fmt_q).collect::<Vec<_>>()))
}

impl SubspaceBasis {
    pub fn span(ambient: usize, vectors: &[Vec<Q>]) -> Self {
        if vectors.is_empty() {
            return Self::zero(ambient);
        }
        let m = RationalMatrix::from_rows(vectors.to_vec()).expect("vectors share the ambient length");
        let (r, pivots) = m.rref();
        let vectors: Vec<Vec<Q>> = (0..pivots.len()).map(|i| r.row(i).to_vec()).collect();
        SubspaceBasis {
            ambient,
            dimension: vectors.len(),
            vectors,
        }
    }

    pub fn zero(ambient: usize) -> Self {
        SubspaceBasis {
            ambient,
            dimension: 0,
            vectors: Vec::new(),
        }
    }

    pub fn full(ambient: usize) -> Self {
        let id = RationalMatrix::identity(ambient);
        Self::span(ambient, &(0..ambient).map(|i| id.row(i).to_vec()).collect::<Vec<_>>())
    }

    pub fn sum(&self, other: &SubspaceBasis) -> SubspaceBasis {
        let mut all = self.vectors.clone();
        all.extend(other.vectors.iter().cloned());
        Self::span(self.ambient, &all)
    }

    pub fn intersection_dimension(&self, other: &SubspaceBasis) -> usize {
        self.dimension + other.dimension - self.sum(other).dimension
    }

    pub fn contains(&self, v: &[Q]) -> bool {
        let mut all = self.vectors.clone();
        all.push(v.to_vec());
        Self::span(self.ambient, &all).dimension == self.dimension
    }

    pub fn is_subspace_of(&self, other: &SubspaceBasis) -> bool {
        self.vectors.iter().all(|v| other.contains(v))
    }

    /// `M(W)`.
    pub fn image_under(&self, m: &RationalMatrix) -> SubspaceBasis {
        let imgs: Vec<Vec<Q>> = self.vectors.iter().map(|v| m.apply(v)).collect();
        Self::span(m.rows(), &imgs)
    }

    /// Independence of the stored vectors, re-checked by elimination.
    pub fn is_independent(&self) -> bool {
        self.vectors.is_empty()
            || RationalMatrix::from_rows(self.vectors.clone())
                .map(|m| m.rank() == self.vectors.len())
                .unwrap_or(false)
    }
}

pub fn kernel_basis(m: &RationalMatrix) -> Result<SubspaceBasis> {
    let d = m.require_square()?;
    let (r, pivots) = m.rref();
    let free: Vec<usize> = (0..d).filter(|c| !pivots.contains(c)).collect();
    let vectors: Vec<Vec<Q>> = free
        .iter()
        .map(|&f| {
            let mut v = vec![Q::zero(); d];
            v[f] = Q::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -r[(row, f)].clone();
            }
            v
        })
        .collect();
    Ok(SubspaceBasis::span(d, &vectors))
}

/// Column space.
pub fn image_basis(m: &RationalMatrix) -> SubspaceBasis {
    let t = m.transpose();
    SubspaceBasis::span(m.rows(), &(0..t.rows()).map(|i| t.row(i).to_vec()).collect::<Vec<_>>())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainReport {
    pub dimension: usize,
    /// `dim Ker(Mⁿ)` for `n = 0..=d`.
    pub ker_dims: Vec<usize>,
    /// `dim Im(Mⁿ)` for `n = 0..=d`.
    pub im_dims: Vec<usize>,
    /// Least `n` with `Ker(Mⁿ⁺¹) = Ker(Mⁿ)`.
    pub stab_index: usize,
    pub stable_image: SubspaceBasis,
}

pub fn chain_report(m: &RationalMatrix) -> Result<ChainReport> {
    let d = m.require_square()?;
    let mut power = RationalMatrix::identity(d);
    let mut ker_dims = Vec::with_capacity(d + 1);
    let mut im_dims = Vec::with_capacity(d + 1);
    let mut images = Vec::with_capacity(d + 1);
    for n in 0..=d {
        if n > 0 {
            power = m.mul(&power)?;
        }
        ker_dims.push(kernel_basis(&power)?.dimension);
        let im = image_basis(&power);
        im_dims.push(im.dimension);
        images.push(im);
    }
    // Kernels are nested, so equal dimensions mean equal subspaces. If the
    // chain grows at every step up to d it has reached all of V at n = d.
    let stab_index = (0..d).find(|&n| ker_dims[n + 1] == ker_dims[n]).unwrap_or(d);
    Ok(ChainReport {
        dimension: d,
        ker_dims,
        im_dims,
        stab_index,
        stable_image: images.swap_remove(stab_index),
    })
}

/// The greatest subspace `W` with `M(W) = W`, obtained by iterating
/// `W ← M(W)` from the whole space until the dimension stops dropping.
pub fn stable_subspace(m: &RationalMatrix) -> Result<SubspaceBasis> {
    let d = m.require_square()?;
    let mut w = SubspaceBasis::full(d);
    loop {
        let next = w.image_under(m);
        if next.dimension == w.dimension {
            return Ok(w);
        }
        w = next;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecompositionReport {
    pub index: usize,
    pub ker_dim: usize,
    pub im_dim: usize,
    pub intersection_dim: usize,
    pub passes: bool,
}

/// `V = Ker(M^N) ⊕ Im(M^N)` at the stabilization index `N`.
pub fn decomposition_report(m: &RationalMatrix) -> Result<DecompositionReport> {
    let d = m.require_square()?;
    let index = chain_report(m)?.stab_index;
    let p = m.pow(index)?;
    let k = kernel_basis(&p)?;
    let i = image_basis(&p);
    let intersection_dim = k.intersection_dimension(&i);
    Ok(DecompositionReport {
        index,
        ker_dim: k.dimension,
        im_dim: i.dimension,
        intersection_dim,
        passes: k.dimension + i.dimension == d && intersection_dim == 0,
    })
}

pub fn decomposition_check(m: &RationalMatrix) -> Result<bool> {
    Ok(decomposition_report(m)?.passes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    fn jordan_nilpotent(d: usize) -> RationalMatrix {
        let mut m = RationalMatrix::zeros(d, d);
        for i in 0..d - 1 {
            m[(i, i + 1)] = Q::one();
        }
        m
    }

    fn e(d: usize, i: usize) -> Vec<Q> {
        (0..d).map(|j| if j == i { qi(1) } else { qi(0) }).collect()
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(kernel_basis(&RationalMatrix::identity(3)).unwrap().dimension, 0);
        assert_eq!(kernel_basis(&RationalMatrix::zeros(2, 2)).unwrap().dimension, 2);
        let k = kernel_basis(&RationalMatrix::from_i64(&[&[0, 1], &[0, 0]]).unwrap()).unwrap();
        assert_eq!(k, SubspaceBasis::span(2, &[e(2, 0)]));
        assert!(k.is_independent());
        assert!(kernel_basis(&RationalMatrix::from_i64(&[&[1, 2]]).unwrap()).is_err());
    }

    #[test]
    fn kernel_vectors_are_annihilated() {
        let m = RationalMatrix::from_rows(vec![
            vec![q(1, 2), qi(1), qi(0)],
            vec![qi(1), qi(2), q(-1, 3)],
            vec![q(3, 2), qi(3), q(-1, 3)],
        ])
        .unwrap();
        let k = kernel_basis(&m).unwrap();
        assert_eq!(k.dimension, 1);
        for v in &k.vectors {
            assert!(m.apply(v).iter().all(Zero::is_zero));
        }
    }

    #[test]
    fn chain_examples() {
        let r = chain_report(&jordan_nilpotent(3)).unwrap();
        assert_eq!(r.ker_dims, vec![0, 1, 2, 3]);
        assert_eq!(r.im_dims, vec![3, 2, 1, 0]);
        assert_eq!(r.stab_index, 3);

        let r = chain_report(&RationalMatrix::identity(2)).unwrap();
        assert_eq!(r.ker_dims, vec![0, 0, 0]);
        assert_eq!(r.stab_index, 0);

        let m = RationalMatrix::from_i64(&[&[0, 1, 0], &[0, 0, 0], &[0, 0, 1]]).unwrap();
        let r = chain_report(&m).unwrap();
        assert_eq!(r.ker_dims, vec![0, 1, 2, 2]);
        assert_eq!(r.stab_index, 2);
        assert_eq!(r.stable_image, SubspaceBasis::span(3, &[e(3, 2)]));
    }

    #[test]
    fn stable_subspace_examples() {
        assert_eq!(stable_subspace(&jordan_nilpotent(3)).unwrap().dimension, 0);
        let inv = RationalMatrix::from_i64(&[&[2, 1], &[1, 1]]).unwrap();
        assert_eq!(stable_subspace(&inv).unwrap(), SubspaceBasis::full(2));
        let m = RationalMatrix::from_i64(&[&[0, 1, 0], &[0, 0, 0], &[0, 0, 2]]).unwrap();
        assert_eq!(stable_subspace(&m).unwrap(), SubspaceBasis::span(3, &[e(3, 2)]));
    }

    #[test]
    fn decomposition_examples() {
        let r = decomposition_report(&jordan_nilpotent(4)).unwrap();
        assert!(r.passes);
        assert_eq!((r.ker_dim, r.im_dim), (4, 0));
        let r = decomposition_report(&RationalMatrix::from_i64(&[&[1, 1], &[0, 1]]).unwrap()).unwrap();
        assert!(r.passes);
        assert_eq!((r.ker_dim, r.im_dim), (0, 2));
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"n": 2, "entries": [["1/2", "0"], ["-3", "4/6"]]}"#;
        let m = RationalMatrix::from_json(text).unwrap();
        assert_eq!(m[(1, 1)], q(2, 3));
        assert_eq!(RationalMatrix::from_json(&m.to_json().to_string()).unwrap(), m);
        assert!(RationalMatrix::from_json(r#"{"n": 2, "entries": [["1"]]}"#).is_err());
        assert!(RationalMatrix::from_json(r#"{"n": 1, "entries": [["1/0"]]}"#).is_err());
    }

    #[test]
    fn self_map_extension() {
        let f = FiniteSelfMap::new(vec![0, 0, 1]).unwrap();
        let m = RationalMatrix::from_self_map(&f);
        assert_eq!(m.apply(&e(3, 2)), e(3, 1));
        // e1 - e0 spans the kernel
        let k = kernel_basis(&m).unwrap();
        assert_eq!(k.dimension, 1);
        assert!(k.contains(&[qi(1), qi(-1), qi(0)]));
    }
}
