//! Exact rational linear algebra.
//!
//! Everything here works over `BigRational`, so rank, containment and equality
//! of subspaces are decided exactly. A [`Subspace`] keeps its basis in reduced
//! row echelon form, which makes two equal subspaces structurally identical and
//! lets them be used directly as hash keys.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Exact rational scalar, always kept in lowest terms with a positive denominator.
pub type Rational = BigRational;

/// Shorthand for an integer-valued rational.
pub fn rat(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// Parses `"p"` or `"p/q"` (optional sign, base 10) into a reduced rational.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let err = || Error::ParseRational {
        input: text.to_string(),
    };
    let trimmed = text.trim();
    let parse_int = |s: &str| -> Result<BigInt> {
        let s = s.trim();
        let digits = s.strip_prefix(['-', '+']).unwrap_or(s);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        s.parse::<BigInt>().map_err(|_| err())
    };
    match trimmed.split_once('/') {
        None => Ok(Rational::from_integer(parse_int(trimmed)?)),
        Some((num, den)) => {
            let num = parse_int(num)?;
            let den = parse_int(den)?;
            if den.is_zero() {
                return Err(err());
            }
            Ok(Rational::new(num, den))
        }
    }
}

/// Dense row-major matrix of exact rationals.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RationalMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Rational>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Rational::one();
        }
        m
    }

    /// Builds a matrix from rows; all rows must have the same length.
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch(format!(
                "row {bad} has {} entries, expected {cols}",
                rows[bad].len()
            )));
        }
        let n_rows = rows.len();
        Ok(Self {
            rows: n_rows,
            cols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    /// Integer matrix literal. Panics on ragged input.
    pub fn from_ints<R: AsRef<[i64]>>(rows: &[R]) -> Self {
        let rows = rows
            .iter()
            .map(|r| r.as_ref().iter().map(|&v| rat(v)).collect())
            .collect();
        Self::from_rows(rows).expect("ragged integer matrix literal")
    }

    /// Column vector with the given entries.
    pub fn column_vector(entries: Vec<Rational>) -> Self {
        let rows = entries.len();
        Self {
            rows,
            cols: 1,
            data: entries,
        }
    }

    /// The `i`-th canonical basis vector of `Q^n` (0-based) as an `n x 1` matrix.
    pub fn unit_column(n: usize, i: usize) -> Self {
        let mut m = Self::zeros(n, 1);
        m.data[i] = Rational::one();
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

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Rational) {
        self.data[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Rational> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j).clone();
            }
        }
        t
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs.get(k, j);
                    if !b.is_zero() {
                        out.data[i * rhs.cols + j] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    /// `self * v` for a vector of length `cols`.
    pub fn mul_vec(&self, v: &[Rational]) -> Result<Vec<Rational>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "cannot apply {}x{} matrix to vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok(self.mul_vec_unchecked(v))
    }

    pub(crate) fn mul_vec_unchecked(&self, v: &[Rational]) -> Vec<Rational> {
        (0..self.rows)
            .map(|i| {
                let mut acc = Rational::zero();
                for (a, x) in self.row(i).iter().zip(v) {
                    if !a.is_zero() && !x.is_zero() {
                        acc += a * x;
                    }
                }
                acc
            })
            .collect()
    }

    fn zip_with(&self, rhs: &Self, op: &str, f: impl Fn(&Rational, &Rational) -> Rational) -> Result<Self> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::DimensionMismatch(format!(
                "cannot {op} {}x{} and {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| f(a, b)).collect(),
        })
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, "add", |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, "subtract", |a, b| a - b)
    }

    pub fn neg(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| -a).collect(),
        }
    }

    pub fn pow(&self, exponent: u32) -> Result<Self> {
        self.require_square()?;
        let mut acc = Self::identity(self.rows);
        for _ in 0..exponent {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Copy of the block `rows x cols` (half-open ranges).
    pub fn block(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Self {
        let mut out = Self::zeros(rows.len(), cols.len());
        for (oi, i) in rows.clone().enumerate() {
            for (oj, j) in cols.clone().enumerate() {
                out.data[oi * out.cols + oj] = self.get(i, j).clone();
            }
        }
        out
    }

    /// Block-diagonal matrix; blocks need not be square.
    pub fn block_diag(blocks: &[Self]) -> Self {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    out.data[(r0 + i) * cols + c0 + j] = b.get(i, j).clone();
                }
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        out
    }

    /// Horizontal concatenation `[self | rhs]`.
    pub fn hstack(&self, rhs: &Self) -> Result<Self> {
        if self.rows != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot place {} rows beside {} rows",
                self.rows, rhs.rows
            )));
        }
        let mut data = Vec::with_capacity(self.data.len() + rhs.data.len());
        for i in 0..self.rows {
            data.extend_from_slice(self.row(i));
            data.extend_from_slice(rhs.row(i));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols + rhs.cols,
            data,
        })
    }

    /// Vertical concatenation `[self; rhs]`.
    pub fn vstack(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.cols {
            return Err(Error::DimensionMismatch(format!(
                "cannot stack {} columns on {} columns",
                self.cols, rhs.cols
            )));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&rhs.data);
        Ok(Self {
            rows: self.rows + rhs.rows,
            cols: self.cols,
            data,
        })
    }

    fn require_square(&self) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    /// Reduced row echelon form together with its pivot columns.
    pub fn rref_with_pivots(&self) -> (Self, Vec<usize>) {
        let mut rows = self.to_rows();
        let pivots = eliminate(&mut rows, self.cols);
        let data = rows.into_iter().flatten().collect();
        (
            Self {
                rows: self.rows,
                cols: self.cols,
                data,
            },
            pivots,
        )
    }

    pub fn rank(&self) -> usize {
        self.rref_with_pivots().1.len()
    }

    /// Indices of a maximal set of linearly independent columns (the leftmost one).
    pub fn pivot_columns(&self) -> Vec<usize> {
        self.rref_with_pivots().1
    }

    pub fn determinant(&self) -> Result<Rational> {
        self.require_square()?;
        let n = self.rows;
        let mut rows = self.to_rows();
        let mut det = Rational::one();
        for col in 0..n {
            let Some(p) = (col..n).find(|&r| !rows[r][col].is_zero()) else {
                return Ok(Rational::zero());
            };
            if p != col {
                rows.swap(p, col);
                det = -det;
            }
            let pivot = rows[col][col].clone();
            det *= &pivot;
            for r in col + 1..n {
                if rows[r][col].is_zero() {
                    continue;
                }
                let factor = &rows[r][col] / &pivot;
                let (upper, lower) = rows.split_at_mut(r);
                for (dst, src) in lower[0][col..].iter_mut().zip(&upper[col][col..]) {
                    *dst -= &factor * src;
                }
            }
        }
        Ok(det)
    }

    pub fn is_invertible(&self) -> Result<bool> {
        self.require_square()?;
        Ok(self.rank() == self.rows)
    }

    /// Exact inverse, or `None` when singular.
    pub fn inverse(&self) -> Result<Option<Self>> {
        self.require_square()?;
        let n = self.rows;
        let (reduced, pivots) = self.hstack(&Self::identity(n))?.rref_with_pivots();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return Ok(None);
        }
        Ok(Some(reduced.block(0..n, n..2 * n)))
    }
}

impl fmt::Display for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> = self.row(i).iter().map(ToString::to_string).collect();
            write!(f, "{}", row.join(", "))?;
        }
        write!(f, "]")
    }
}

/// Gauss-Jordan elimination in place; returns pivot columns. Rows keep their count.
fn eliminate(rows: &mut [Vec<Rational>], cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut lead = 0;
    for col in 0..cols {
        if lead == rows.len() {
            break;
        }
        let Some(p) = (lead..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(lead, p);
        let inv = rows[lead][col].recip();
        if !inv.is_one() {
            for v in rows[lead][col..].iter_mut() {
                *v *= &inv;
            }
        }
        let (before, rest) = rows.split_at_mut(lead);
        let (pivot_row, after) = rest.split_first_mut().expect("lead < len");
        for other in before.iter_mut().chain(after.iter_mut()) {
            if other[col].is_zero() {
                continue;
            }
            let factor = other[col].clone();
            for (c, pv) in pivot_row.iter().enumerate().skip(col) {
                if !pv.is_zero() {
                    other[c] -= &factor * pv;
                }
            }
        }
        pivots.push(col);
        lead += 1;
    }
    pivots
}

/// Reduced row echelon form of `m`.
pub fn rref(m: &RationalMatrix) -> RationalMatrix {
    m.rref_with_pivots().0
}

/// A linear subspace of `Q^n`, stored by its unique RREF row basis.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Subspace {
    ambient: usize,
    basis: Vec<Vec<Rational>>,
}

impl Subspace {
    pub fn zero(n: usize) -> Self {
        Self {
            ambient: n,
            basis: Vec::new(),
        }
    }

    pub fn full(n: usize) -> Self {
        Self::column_space(&RationalMatrix::identity(n))
    }

    /// Span of coordinate vectors `e_i` for the given 0-based indices.
    pub fn coordinate(n: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let vectors = indices.into_iter().map(|i| {
            let mut v = vec![Rational::zero(); n];
            v[i] = Rational::one();
            v
        });
        Self::from_vectors_unchecked(n, vectors.collect())
    }

    /// Span of arbitrary vectors in `Q^n`.
    pub fn span(n: usize, vectors: Vec<Vec<Rational>>) -> Result<Self> {
        if let Some(v) = vectors.iter().find(|v| v.len() != n) {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} in ambient dimension {n}",
                v.len()
            )));
        }
        Ok(Self::from_vectors_unchecked(n, vectors))
    }

    pub(crate) fn from_vectors_unchecked(n: usize, mut vectors: Vec<Vec<Rational>>) -> Self {
        let rank = eliminate(&mut vectors, n).len();
        vectors.truncate(rank);
        Self {
            ambient: n,
            basis: vectors,
        }
    }

    /// Span of the columns of `m`; the ambient dimension is `m.rows()`.
    pub fn column_space(m: &RationalMatrix) -> Self {
        let n = m.rows();
        Self::from_vectors_unchecked(n, m.transpose().to_rows())
    }

    /// Span of the rows of `m`; the ambient dimension is `m.cols()`.
    pub fn row_space(m: &RationalMatrix) -> Self {
        Self::from_vectors_unchecked(m.cols(), m.to_rows())
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.basis.len() == self.ambient
    }

    /// Canonical basis rows (RREF, no zero rows).
    pub fn basis(&self) -> &[Vec<Rational>] {
        &self.basis
    }

    /// Basis as a `dim x n` matrix.
    pub fn basis_matrix(&self) -> RationalMatrix {
        RationalMatrix {
            rows: self.basis.len(),
            cols: self.ambient,
            data: self.basis.iter().flatten().cloned().collect(),
        }
    }

    /// Pivot column of each basis row.
    pub fn pivots(&self) -> Vec<usize> {
        self.basis
            .iter()
            .map(|row| row.iter().position(|v| !v.is_zero()).expect("nonzero basis row"))
            .collect()
    }

    fn check_ambient(&self, other: &Self) -> Result<()> {
        if self.ambient == other.ambient {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "subspaces of Q^{} and Q^{}",
                self.ambient, other.ambient
            )))
        }
    }

    pub fn sum(&self, other: &Self) -> Result<Self> {
        self.check_ambient(other)?;
        Ok(self.sum_unchecked(other))
    }

    pub(crate) fn sum_unchecked(&self, other: &Self) -> Self {
        if other.is_zero() || self.is_full() {
            return self.clone();
        }
        if self.is_zero() || other.is_full() {
            return other.clone();
        }
        let vectors = self.basis.iter().chain(&other.basis).cloned().collect();
        Self::from_vectors_unchecked(self.ambient, vectors)
    }

    /// Image `A W` of this subspace under a square matrix.
    pub fn image(&self, a: &RationalMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::NotSquare {
                rows: a.rows(),
                cols: a.cols(),
            });
        }
        if a.rows() != self.ambient {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix applied to a subspace of Q^{}",
                a.rows(),
                a.cols(),
                self.ambient
            )));
        }
        Ok(self.image_plus_unchecked(a, &Self::zero(self.ambient)))
    }

    /// `A W + U` in one elimination pass. Shapes must already agree.
    pub(crate) fn image_plus_unchecked(&self, a: &RationalMatrix, add: &Self) -> Self {
        let mut vectors: Vec<Vec<Rational>> = self.basis.iter().map(|b| a.mul_vec_unchecked(b)).collect();
        vectors.extend(add.basis.iter().cloned());
        Self::from_vectors_unchecked(self.ambient, vectors)
    }

    /// `other ⊆ self`.
    pub fn contains(&self, other: &Self) -> Result<bool> {
        self.check_ambient(other)?;
        if other.dim() > self.dim() {
            return Ok(false);
        }
        Ok(other.basis.iter().all(|v| self.contains_vector_unchecked(v)))
    }

    pub fn contains_vector(&self, v: &[Rational]) -> Result<bool> {
        if v.len() != self.ambient {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} in ambient dimension {}",
                v.len(),
                self.ambient
            )));
        }
        Ok(self.contains_vector_unchecked(v))
    }

    fn contains_vector_unchecked(&self, v: &[Rational]) -> bool {
        // Reduce against the RREF basis; pivots make this a single pass.
        let mut residual = v.to_vec();
        for (row, pivot) in self.basis.iter().zip(self.pivots()) {
            if residual[pivot].is_zero() {
                continue;
            }
            let factor = residual[pivot].clone();
            for (r, b) in residual.iter_mut().zip(row) {
                if !b.is_zero() {
                    *r -= &factor * b;
                }
            }
        }
        residual.iter().all(Zero::is_zero)
    }

    pub fn equals(&self, other: &Self) -> Result<bool> {
        self.check_ambient(other)?;
        Ok(self == other)
    }

    /// If this is a coordinate subspace `span{e_i : i ∈ I}`, returns `I` (0-based, sorted).
    pub fn coordinate_support(&self) -> Option<Vec<usize>> {
        let mut support = Vec::with_capacity(self.basis.len());
        for row in &self.basis {
            let mut nonzero = row.iter().enumerate().filter(|(_, v)| !v.is_zero());
            let (i, v) = nonzero.next()?;
            if !v.is_one() || nonzero.next().is_some() {
                return None;
            }
            support.push(i);
        }
        Some(support)
    }
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "{{0}}");
        }
        if self.is_full() {
            return write!(f, "R^{}", self.ambient);
        }
        if let Some(support) = self.coordinate_support() {
            let names: Vec<String> = support.iter().map(|i| format!("e{}", i + 1)).collect();
            return write!(f, "span{{{}}}", names.join(","));
        }
        let rows: Vec<String> = self
            .basis
            .iter()
            .map(|r| {
                let entries: Vec<String> = r.iter().map(ToString::to_string).collect();
                format!("({})", entries.join(","))
            })
            .collect();
        write!(f, "span{{{}}}", rows.join(","))
    }
}
