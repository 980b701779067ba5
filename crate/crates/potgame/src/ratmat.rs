//! Dense exact-rational linear algebra: rank, solving, row-space bases and
//! intersections. Every span-membership question downstream is decided here,
//! exactly, with no floating-point tolerance.

use num::{BigInt, BigRational, One, Zero};
use std::fmt;
use std::ops::{Index, IndexMut};

/// Arbitrary-precision rational scalar.
pub type Rat = BigRational;

/// Rational from an integer.
pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Rational p/q.
pub fn ratq(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

/// Parses "p/q" or a bare integer string.
pub fn parse_rat(s: &str) -> Result<Rat, MatError> {
    let s = s.trim();
    let parse_int = |t: &str| {
        t.trim()
            .parse::<BigInt>()
            .map_err(|_| MatError::BadRational(s.to_string()))
    };
    match s.split_once('/') {
        Some((p, q)) => {
            let q = parse_int(q)?;
            if q.is_zero() {
                return Err(MatError::BadRational(s.to_string()));
            }
            Ok(Rat::new(parse_int(p)?, q))
        }
        None => Ok(Rat::from_integer(parse_int(s)?)),
    }
}

/// Renders a rational as "p/q" or "p" when integral.
pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MatError {
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("cannot parse rational: {0}")]
    BadRational(String),
}

/// Dense row-major matrix over `Rat`. Empty (0-row or 0-col) matrices are
/// legal and stand for degenerate spans.
#[derive(Clone, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl fmt::Debug for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RatMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|c| format_rat(&self[(r, c)])).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for RatMatrix {
    type Output = Rat;
    fn index(&self, (r, c): (usize, usize)) -> &Rat {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for RatMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Rat {
        &mut self.data[r * self.cols + c]
    }
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix {
            rows,
            cols,
            data: vec![Rat::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rat::one();
        }
        m
    }

    /// All-ones matrix; `ones(n, 1)` is the column vector 1_n.
    pub fn ones(rows: usize, cols: usize) -> Self {
        RatMatrix {
            rows,
            cols,
            data: vec![Rat::one(); rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Self {
        let nr = rows.len();
        let nc = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == nc), "ragged rows");
        RatMatrix {
            rows: nr,
            cols: nc,
            data: rows.into_iter().flatten().collect(),
        }
    }

    /// Single-row matrix from a slice of i64.
    pub fn row_from_ints(v: &[i64]) -> Self {
        Self::from_rows(vec![v.iter().map(|&x| rat(x)).collect()])
    }

    pub fn from_int_rows(rows: &[&[i64]]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| rat(x)).collect())
                .collect(),
        )
    }

    pub fn col_from_vec(v: Vec<Rat>) -> Self {
        let rows = v.len();
        RatMatrix {
            rows,
            cols: 1,
            data: v,
        }
    }

    pub fn row_from_vec(v: Vec<Rat>) -> Self {
        let cols = v.len();
        RatMatrix {
            rows: 1,
            cols,
            data: v,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> Vec<Rat> {
        self.data[r * self.cols..(r + 1) * self.cols].to_vec()
    }

    pub fn col(&self, c: usize) -> Vec<Rat> {
        (0..self.rows).map(|r| self[(r, c)].clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &Self) -> Result<Self, MatError> {
        if self.cols != other.rows {
            return Err(MatError::DimMismatch(format!(
                "mul: {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(r, k)];
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let b = &other[(k, c)];
                    if !b.is_zero() {
                        let v = &out[(r, c)] + a * b;
                        out[(r, c)] = v;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self, MatError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(MatError::DimMismatch("add".into()));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Ok(RatMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, MatError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(MatError::DimMismatch("sub".into()));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(RatMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// Stacks `other` below `self`.
    pub fn vstack(&self, other: &Self) -> Result<Self, MatError> {
        if self.rows > 0 && other.rows > 0 && self.cols != other.cols {
            return Err(MatError::DimMismatch(format!(
                "vstack: {} vs {} columns",
                self.cols, other.cols
            )));
        }
        let cols = if self.rows > 0 { self.cols } else { other.cols };
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(RatMatrix {
            rows: self.rows + other.rows,
            cols,
            data,
        })
    }

    /// Places `other` to the right of `self`.
    pub fn hstack(&self, other: &Self) -> Result<Self, MatError> {
        if self.rows != other.rows {
            return Err(MatError::DimMismatch(format!(
                "hstack: {} vs {} rows",
                self.rows, other.rows
            )));
        }
        let mut out = Self::zeros(self.rows, self.cols + other.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(r, c)] = self[(r, c)].clone();
            }
            for c in 0..other.cols {
                out[(r, self.cols + c)] = other[(r, c)].clone();
            }
        }
        Ok(out)
    }

    /// Kronecker product, dims (m·p)x(n·q).
    pub fn kron(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows * other.rows, self.cols * other.cols);
        for r1 in 0..self.rows {
            for c1 in 0..self.cols {
                let a = &self[(r1, c1)];
                if a.is_zero() {
                    continue;
                }
                for r2 in 0..other.rows {
                    for c2 in 0..other.cols {
                        let b = &other[(r2, c2)];
                        if !b.is_zero() {
                            out[(r1 * other.rows + r2, c1 * other.cols + c2)] = a * b;
                        }
                    }
                }
            }
        }
        out
    }

    pub fn scale(&self, s: &Rat) -> Self {
        RatMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// Reduced row-echelon form together with the pivot column of each pivot row.
    pub fn rref(&self) -> (RatMatrix, Vec<usize>) {
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
                let f = m[(i, c)].clone();
                for j in c..m.cols {
                    let v = &m[(i, j)] - &f * &m[(r, j)];
                    m[(i, j)] = v;
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    /// Dimension of the row space.
    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Nonzero rows of the RREF: a canonical basis of the row space.
    /// The zero matrix yields a 0-row matrix.
    pub fn row_space_basis(&self) -> RatMatrix {
        let (r, pivots) = self.rref();
        let rows = (0..pivots.len()).map(|i| r.row(i)).collect::<Vec<_>>();
        if rows.is_empty() {
            RatMatrix::zeros(0, self.cols)
        } else {
            RatMatrix::from_rows(rows)
        }
    }

    /// One particular solution of `self * x = b` with free variables pinned
    /// to 0, or `None` when inconsistent. Deterministic for a given input.
    pub fn solve_linear(&self, b: &[Rat]) -> Result<Option<Vec<Rat>>, MatError> {
        if b.len() != self.rows {
            return Err(MatError::DimMismatch(format!(
                "solve: {} rows vs rhs of length {}",
                self.rows,
                b.len()
            )));
        }
        let aug = self.hstack(&RatMatrix::col_from_vec(b.to_vec()))?;
        let (r, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return Ok(None); // pivot in the rhs column
        }
        let mut x = vec![Rat::zero(); self.cols];
        for (row, &col) in pivots.iter().enumerate() {
            x[col] = r[(row, self.cols)].clone();
        }
        Ok(Some(x))
    }

    /// Basis of rowspace(self) ∩ rowspace(other) by the Zassenhaus block
    /// construction on [[M1 M1],[M2 0]].
    pub fn row_space_intersection(&self, other: &Self) -> Result<RatMatrix, MatError> {
        if self.cols != other.cols {
            return Err(MatError::DimMismatch(format!(
                "intersection: {} vs {} columns",
                self.cols, other.cols
            )));
        }
        let c = self.cols;
        let top = self.hstack(self)?;
        let bottom = other.hstack(&RatMatrix::zeros(other.rows, c))?;
        let block = top.vstack(&bottom)?;
        let (r, pivots) = block.rref();
        let mut rows = Vec::new();
        for i in 0..pivots.len() {
            // rows whose left block vanished carry the intersection in the right block
            if pivots[i] >= c {
                let right = r.row(i)[c..].to_vec();
                rows.push(right);
            }
        }
        if rows.is_empty() {
            Ok(RatMatrix::zeros(0, c))
        } else {
            Ok(RatMatrix::from_rows(rows))
        }
    }

    /// True iff `v` lies in the row space of `self`.
    pub fn in_row_space(&self, v: &[Rat]) -> Result<bool, MatError> {
        if v.len() != self.cols {
            return Err(MatError::DimMismatch(format!(
                "in_row_space: vector of length {} vs {} columns",
                v.len(),
                self.cols
            )));
        }
        let stacked = self.vstack(&RatMatrix::row_from_vec(v.to_vec()))?;
        Ok(stacked.rank() == self.rank())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }
}
