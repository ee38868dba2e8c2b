//! Dense linear algebra over GF(q).
//!
//! Vectors are rows and matrices act on the right: `v -> v g`. Products
//! compose left to right, so `v (g h)` applies `g` first.

use std::fmt;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Result, ScgError};
use crate::ffield::{Field, FieldElement};

/// A row vector. Inline storage covers the dimensions used in practice.
pub type Vector = SmallVec<[FieldElement; 8]>;

pub fn zero_vector(d: usize) -> Vector {
    smallvec::smallvec![FieldElement::ZERO; d]
}

pub fn unit_vector(d: usize, i: usize) -> Vector {
    let mut v = zero_vector(d);
    v[i] = FieldElement::ONE;
    v
}

pub fn vec_add(f: &Field, a: &[FieldElement], b: &[FieldElement]) -> Vector {
    a.iter().zip(b).map(|(&x, &y)| f.add(x, y)).collect()
}

pub fn vec_sub(f: &Field, a: &[FieldElement], b: &[FieldElement]) -> Vector {
    a.iter().zip(b).map(|(&x, &y)| f.sub(x, y)).collect()
}

pub fn vec_scale(f: &Field, c: FieldElement, a: &[FieldElement]) -> Vector {
    a.iter().map(|&x| f.mul(c, x)).collect()
}

/// `a + c b`.
pub fn vec_axpy(f: &Field, a: &[FieldElement], c: FieldElement, b: &[FieldElement]) -> Vector {
    a.iter().zip(b).map(|(&x, &y)| f.mul_add(c, y, x)).collect()
}

/// Standard dot product `sum a_i b_i`.
pub fn dot(f: &Field, a: &[FieldElement], b: &[FieldElement]) -> FieldElement {
    a.iter()
        .zip(b)
        .fold(FieldElement::ZERO, |acc, (&x, &y)| f.mul_add(x, y, acc))
}

pub fn is_zero_vector(v: &[FieldElement]) -> bool {
    v.iter().all(|x| x.is_zero())
}

/// Scales `v` so its first nonzero entry is 1. Zero stays zero.
pub fn normalize(f: &Field, v: &[FieldElement]) -> Vector {
    match v.iter().find(|x| !x.is_zero()) {
        None => v.iter().copied().collect(),
        Some(&lead) => {
            let c = f.inv(lead).expect("nonzero");
            vec_scale(f, c, v)
        }
    }
}

/// Packs a vector into a single integer `sum v_i q^i`. The caller must
/// ensure `q^d` fits in 64 bits.
#[inline]
pub fn pack(v: &[FieldElement], q: u64) -> u64 {
    v.iter().rev().fold(0u64, |acc, x| acc * q + x.value() as u64)
}

/// All vectors of `F_q^d`, in pack order.
pub fn all_vectors(f: &Field, d: usize) -> impl Iterator<Item = Vector> + '_ {
    let q = f.order() as u64;
    let total = q.pow(d as u32);
    (0..total).map(move |mut code| {
        let mut v = zero_vector(d);
        for x in v.iter_mut() {
            *x = f.element((code % q) as u32).expect("in range");
            code /= q;
        }
        v
    })
}

/// Representatives (first nonzero entry 1) of the 1-spaces of `F_q^d`.
pub fn projective_points(f: &Field, d: usize) -> impl Iterator<Item = Vector> + '_ {
    all_vectors(f, d).filter(|v| {
        v.iter()
            .find(|x| !x.is_zero())
            .is_some_and(|&x| x == FieldElement::ONE)
    })
}

/// A square `d x d` matrix, row-major.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Matrix {
    d: usize,
    entries: SmallVec<[FieldElement; 25]>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.d {
            if i > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<u32> = self.row(i).iter().map(|x| x.value()).collect();
            write!(f, "{row:?}")?;
        }
        write!(f, "]")
    }
}

impl Matrix {
    pub fn zero(d: usize) -> Matrix {
        Matrix {
            d,
            entries: smallvec::smallvec![FieldElement::ZERO; d * d],
        }
    }

    pub fn identity(d: usize) -> Matrix {
        let mut m = Matrix::zero(d);
        for i in 0..d {
            m.entries[i * d + i] = FieldElement::ONE;
        }
        m
    }

    pub fn scalar(d: usize, c: FieldElement) -> Matrix {
        let mut m = Matrix::zero(d);
        for i in 0..d {
            m.entries[i * d + i] = c;
        }
        m
    }

    pub fn diagonal(diag: &[FieldElement]) -> Matrix {
        let d = diag.len();
        let mut m = Matrix::zero(d);
        for (i, &c) in diag.iter().enumerate() {
            m.entries[i * d + i] = c;
        }
        m
    }

    pub fn from_rows(rows: &[Vector]) -> Result<Matrix> {
        let d = rows.len();
        if d == 0 {
            return Err(ScgError::DimMismatch { expected: 1, found: 0 });
        }
        let mut entries = SmallVec::with_capacity(d * d);
        for r in rows {
            if r.len() != d {
                return Err(ScgError::DimMismatch { expected: d, found: r.len() });
            }
            entries.extend_from_slice(r);
        }
        Ok(Matrix { d, entries })
    }

    /// Matrix from row-major integer codes.
    pub fn from_codes(f: &Field, d: usize, codes: &[u32]) -> Result<Matrix> {
        if d == 0 || codes.len() != d * d {
            return Err(ScgError::DimMismatch { expected: d * d, found: codes.len() });
        }
        let entries = codes
            .iter()
            .map(|&c| f.element(c))
            .collect::<Result<SmallVec<_>>>()?;
        Ok(Matrix { d, entries })
    }

    /// Row-major integer codes.
    pub fn to_codes(&self) -> Vec<u32> {
        self.entries.iter().map(|x| x.value()).collect()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> FieldElement {
        self.entries[i * self.d + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, x: FieldElement) {
        self.entries[i * self.d + j] = x;
    }

    pub fn row(&self, i: usize) -> &[FieldElement] {
        &self.entries[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> Vec<Vector> {
        (0..self.d).map(|i| self.row(i).iter().copied().collect()).collect()
    }

    pub fn is_identity(&self) -> bool {
        (0..self.d).all(|i| {
            (0..self.d).all(|j| {
                let x = self.get(i, j);
                if i == j {
                    x == FieldElement::ONE
                } else {
                    x.is_zero()
                }
            })
        })
    }

    pub fn mul(&self, rhs: &Matrix, f: &Field) -> Matrix {
        let d = self.d;
        debug_assert_eq!(d, rhs.d);
        let mut out = Matrix::zero(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.entries[i * d + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..d {
                    let idx = i * d + j;
                    out.entries[idx] = f.mul_add(a, rhs.entries[k * d + j], out.entries[idx]);
                }
            }
        }
        out
    }

    pub fn try_mul(&self, rhs: &Matrix, f: &Field) -> Result<Matrix> {
        if self.d != rhs.d {
            return Err(ScgError::DimMismatch { expected: self.d, found: rhs.d });
        }
        Ok(self.mul(rhs, f))
    }

    pub fn add(&self, rhs: &Matrix, f: &Field) -> Matrix {
        let entries = self
            .entries
            .iter()
            .zip(&rhs.entries)
            .map(|(&a, &b)| f.add(a, b))
            .collect();
        Matrix { d: self.d, entries }
    }

    pub fn sub(&self, rhs: &Matrix, f: &Field) -> Matrix {
        let entries = self
            .entries
            .iter()
            .zip(&rhs.entries)
            .map(|(&a, &b)| f.sub(a, b))
            .collect();
        Matrix { d: self.d, entries }
    }

    pub fn neg(&self, f: &Field) -> Matrix {
        Matrix {
            d: self.d,
            entries: self.entries.iter().map(|&a| f.neg(a)).collect(),
        }
    }

    pub fn scale(&self, c: FieldElement, f: &Field) -> Matrix {
        Matrix {
            d: self.d,
            entries: self.entries.iter().map(|&a| f.mul(c, a)).collect(),
        }
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zero(self.d);
        for i in 0..self.d {
            for j in 0..self.d {
                out.entries[j * self.d + i] = self.entries[i * self.d + j];
            }
        }
        out
    }

    /// `v g` for a row vector `v`.
    #[inline]
    pub fn apply(&self, v: &[FieldElement], f: &Field) -> Vector {
        let d = self.d;
        let mut out = zero_vector(d);
        for (k, &a) in v.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let row = &self.entries[k * d..(k + 1) * d];
            for (o, &x) in out.iter_mut().zip(row) {
                *o = f.mul_add(a, x, *o);
            }
        }
        out
    }

    /// `g v^tr` as a vector (column action).
    pub fn apply_column(&self, v: &[FieldElement], f: &Field) -> Vector {
        (0..self.d).map(|i| dot(f, self.row(i), v)).collect()
    }

    pub fn det(&self, f: &Field) -> FieldElement {
        let mut rows = self.rows();
        let d = self.d;
        let mut det = FieldElement::ONE;
        for col in 0..d {
            let Some(piv) = (col..d).find(|&r| !rows[r][col].is_zero()) else {
                return FieldElement::ZERO;
            };
            if piv != col {
                rows.swap(piv, col);
                det = f.neg(det);
            }
            let p = rows[col][col];
            det = f.mul(det, p);
            let pinv = f.inv(p).expect("nonzero pivot");
            for r in col + 1..d {
                let c = rows[r][col];
                if !c.is_zero() {
                    let factor = f.neg(f.mul(c, pinv));
                    rows[r] = vec_axpy(f, &rows[r], factor, &rows[col]);
                }
            }
        }
        det
    }

    pub fn inverse(&self, f: &Field) -> Result<Matrix> {
        let d = self.d;
        let mut a = self.rows();
        let mut b = Matrix::identity(d).rows();
        for col in 0..d {
            let piv = (col..d)
                .find(|&r| !a[r][col].is_zero())
                .ok_or(ScgError::Singular)?;
            a.swap(piv, col);
            b.swap(piv, col);
            let pinv = f.inv(a[col][col])?;
            a[col] = vec_scale(f, pinv, &a[col]);
            b[col] = vec_scale(f, pinv, &b[col]);
            for r in 0..d {
                if r != col {
                    let c = a[r][col];
                    if !c.is_zero() {
                        let factor = f.neg(c);
                        a[r] = vec_axpy(f, &a[r], factor, &a[col]);
                        b[r] = vec_axpy(f, &b[r], factor, &b[col]);
                    }
                }
            }
        }
        Matrix::from_rows(&b)
    }

    pub fn rank(&self, f: &Field) -> usize {
        rank_of_rows(f, &self.rows())
    }

    /// `g^n` by square-and-multiply.
    pub fn pow(&self, mut n: u64, f: &Field) -> Matrix {
        let mut acc = Matrix::identity(self.d);
        let mut base = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base, f);
            }
            base = base.mul(&base, f);
            n >>= 1;
        }
        acc
    }

    pub fn is_involution(&self, f: &Field) -> bool {
        !self.is_identity() && self.mul(self, f).is_identity()
    }

    pub fn commutes_with(&self, other: &Matrix, f: &Field) -> bool {
        self.mul(other, f) == other.mul(self, f)
    }
}

/// Least `n >= 1` with `g^n = I`, by iterated multiplication.
pub fn mat_order(g: &Matrix, cap: u64, f: &Field) -> Result<u64> {
    if g.det(f).is_zero() {
        return Err(ScgError::Singular);
    }
    let mut power = g.clone();
    let mut n = 1u64;
    while !power.is_identity() {
        if n >= cap {
            return Err(ScgError::OrderExceedsCap { cap });
        }
        power = power.mul(g, f);
        n += 1;
    }
    Ok(n)
}

/// Reduced row-echelon form of `rows` with zero rows removed, plus pivot
/// columns.
pub fn rref(f: &Field, rows: &[Vector]) -> (Vec<Vector>, Vec<usize>) {
    let mut m: Vec<Vector> = rows.to_vec();
    let ncols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        if r == m.len() {
            break;
        }
        let Some(piv) = (r..m.len()).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(piv, r);
        let pinv = f.inv(m[r][col]).expect("nonzero pivot");
        m[r] = vec_scale(f, pinv, &m[r]);
        for i in 0..m.len() {
            if i != r {
                let c = m[i][col];
                if !c.is_zero() {
                    m[i] = vec_axpy(f, &m[i], f.neg(c), &m[r]);
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    m.truncate(r);
    (m, pivots)
}

pub fn rank_of_rows(f: &Field, rows: &[Vector]) -> usize {
    rref(f, rows).0.len()
}

/// Basis of `{x : rows . x^tr = 0}` (the right kernel of the matrix whose
/// rows are given), in `ncols`-dimensional space.
pub fn right_kernel(f: &Field, rows: &[Vector], ncols: usize) -> Vec<Vector> {
    let (r, pivots) = rref(f, rows);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            let mut x = zero_vector(ncols);
            x[fc] = FieldElement::ONE;
            for (row, &pc) in r.iter().zip(&pivots) {
                x[pc] = f.neg(row[fc]);
            }
            x
        })
        .collect()
}

/// A subspace of `F_q^d`, stored by its canonical reduced row-echelon basis.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Subspace {
    ambient: usize,
    basis: Vec<Vector>,
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<u32>> = self
            .basis
            .iter()
            .map(|r| r.iter().map(|x| x.value()).collect())
            .collect();
        write!(f, "Subspace(d={}, {:?})", self.ambient, rows)
    }
}

impl Subspace {
    pub fn zero(ambient: usize) -> Subspace {
        Subspace { ambient, basis: Vec::new() }
    }

    pub fn full(ambient: usize) -> Subspace {
        Subspace {
            ambient,
            basis: (0..ambient).map(|i| unit_vector(ambient, i)).collect(),
        }
    }

    pub fn span(f: &Field, ambient: usize, vectors: &[Vector]) -> Subspace {
        if vectors.is_empty() {
            return Subspace::zero(ambient);
        }
        Subspace { ambient, basis: rref(f, vectors).0 }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn basis(&self) -> &[Vector] {
        &self.basis
    }

    pub fn contains(&self, f: &Field, v: &[FieldElement]) -> bool {
        let mut rows = self.basis.clone();
        rows.push(v.iter().copied().collect());
        rank_of_rows(f, &rows) == self.dim()
    }

    pub fn is_subspace_of(&self, f: &Field, other: &Subspace) -> bool {
        self.basis.iter().all(|v| other.contains(f, v))
    }

    pub fn sum(&self, f: &Field, other: &Subspace) -> Subspace {
        let mut rows = self.basis.clone();
        rows.extend(other.basis.iter().cloned());
        Subspace::span(f, self.ambient, &rows)
    }

    /// Annihilator under the standard dot product.
    pub fn annihilator(&self, f: &Field) -> Subspace {
        if self.basis.is_empty() {
            return Subspace::full(self.ambient);
        }
        Subspace::span(f, self.ambient, &right_kernel(f, &self.basis, self.ambient))
    }

    pub fn intersection(&self, f: &Field, other: &Subspace) -> Subspace {
        self.annihilator(f)
            .sum(f, &other.annihilator(f))
            .annihilator(f)
    }

    /// All vectors of the subspace (there are `q^dim`).
    pub fn vectors<'a>(&'a self, f: &'a Field) -> impl Iterator<Item = Vector> + 'a {
        all_vectors(f, self.dim()).map(move |coords| {
            self.basis
                .iter()
                .zip(coords.iter())
                .fold(zero_vector(self.ambient), |acc, (b, &c)| {
                    vec_axpy(f, &acc, c, b)
                })
        })
    }
}

/// Image of `I - g`: the support `[V, g]`.
pub fn support(g: &Matrix, f: &Field) -> Subspace {
    let m = Matrix::identity(g.dim()).sub(g, f);
    Subspace::span(f, g.dim(), &m.rows())
}

/// `{v : v g = v}`.
pub fn fixed_space(g: &Matrix, f: &Field) -> Subspace {
    eigenspace(g, FieldElement::ONE, f)
}

/// `{v : v g = lambda v}`.
pub fn eigenspace(g: &Matrix, lambda: FieldElement, f: &Field) -> Subspace {
    nullspace(&g.sub(&Matrix::scalar(g.dim(), lambda), f), f)
}

pub fn eigenspace_dim(g: &Matrix, lambda: FieldElement, f: &Field) -> usize {
    let m = g.sub(&Matrix::scalar(g.dim(), lambda), f);
    g.dim() - m.rank(f)
}

/// Left kernel `{v : v m = 0}`.
pub fn nullspace(m: &Matrix, f: &Field) -> Subspace {
    // v m = 0  <=>  m^tr v^tr = 0
    Subspace::span(f, m.dim(), &right_kernel(f, &m.transpose().rows(), m.dim()))
}

pub fn row_space(m: &Matrix, f: &Field) -> Subspace {
    Subspace::span(f, m.dim(), &m.rows())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gf(q: u32) -> Field {
        Field::with_order(q).unwrap()
    }

    fn mat(f: &Field, d: usize, codes: &[u32]) -> Matrix {
        Matrix::from_codes(f, d, codes).unwrap()
    }

    #[test]
    fn det_identity_and_rank_zero() {
        let f = gf(7);
        assert_eq!(Matrix::identity(5).det(&f), FieldElement::ONE);
        assert_eq!(Matrix::zero(5).rank(&f), 0);
    }

    #[test]
    fn inverse_example() {
        let f = gf(5);
        let m = mat(&f, 2, &[1, 1, 0, 1]);
        let inv = m.inverse(&f).unwrap();
        assert_eq!(inv, mat(&f, 2, &[1, 4, 0, 1]));
        assert!(m.mul(&inv, &f).is_identity());
        assert_eq!(Matrix::zero(3).inverse(&f), Err(ScgError::Singular));
    }

    #[test]
    fn order_examples() {
        let f = gf(5);
        assert_eq!(mat_order(&Matrix::identity(3), 10, &f).unwrap(), 1);
        // h(1,1) = [[-1,1],[-1,0]] over GF(5)
        let h = mat(&f, 2, &[4, 1, 4, 0]);
        assert_eq!(mat_order(&h, 6, &f).unwrap(), 3);
        assert_eq!(mat_order(&h, 2, &f), Err(ScgError::OrderExceedsCap { cap: 2 }));
        assert_eq!(mat_order(&Matrix::zero(2), 6, &f), Err(ScgError::Singular));
    }

    #[test]
    fn support_and_fixed_space_of_scalars() {
        let f = gf(5);
        let id = Matrix::identity(5);
        assert_eq!(support(&id, &f).dim(), 0);
        assert_eq!(fixed_space(&id, &f).dim(), 5);
        let minus = id.neg(&f);
        assert_eq!(support(&minus, &f).dim(), 5);
        assert_eq!(eigenspace_dim(&id, FieldElement::ONE, &f), 5);
    }

    #[test]
    fn subspace_intersection() {
        let f = gf(3);
        let e = |i| unit_vector(4, i);
        let u = Subspace::span(&f, 4, &[e(0), e(1)]);
        let w = Subspace::span(&f, 4, &[e(1), e(2)]);
        let i = u.intersection(&f, &w);
        assert_eq!(i, Subspace::span(&f, 4, &[e(1)]));
        assert_eq!(u.sum(&f, &w).dim(), 3);
        assert_eq!(u.vectors(&f).count(), 9);
    }

    #[test]
    fn nullspace_of_projection() {
        let f = gf(5);
        let p = Matrix::diagonal(&[FieldElement::ONE, FieldElement::ZERO, FieldElement::ZERO]);
        let n = nullspace(&p, &f);
        assert_eq!(n.dim(), 2);
        assert_eq!(row_space(&p, &f).dim(), 1);
    }

    fn arb_matrix(q: u32, d: usize) -> impl Strategy<Value = Vec<u32>> {
        proptest::collection::vec(0..q, d * d)
    }

    proptest! {
        #[test]
        fn det_is_multiplicative(a in arb_matrix(7, 4), b in arb_matrix(7, 4)) {
            let f = gf(7);
            let (a, b) = (mat(&f, 4, &a), mat(&f, 4, &b));
            prop_assert_eq!(a.mul(&b, &f).det(&f), f.mul(a.det(&f), b.det(&f)));
        }

        #[test]
        fn rank_nullity(a in arb_matrix(9, 5)) {
            let f = gf(9);
            let a = mat(&f, 5, &a);
            prop_assert_eq!(a.rank(&f) + nullspace(&a, &f).dim(), 5);
        }

        #[test]
        fn inverse_roundtrip(a in arb_matrix(4, 3)) {
            let f = gf(4);
            let a = mat(&f, 3, &a);
            match a.inverse(&f) {
                Ok(inv) => prop_assert!(a.mul(&inv, &f).is_identity()),
                Err(_) => prop_assert!(a.det(&f).is_zero()),
            }
        }
    }
}
