//! Exact integer and rational linear algebra.
//!
//! Everything here is arbitrary precision. The Smith normal form tracks the
//! unimodular transforms and their inverses, because cohomology coordinates
//! need to move in both directions between cochains and class coordinates.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub type Int = BigInt;
pub type Rat = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionError { expected: usize, found: usize },
}

/// Dense row-major matrix of big integers.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Int>,
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "IntMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![Int::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Int::one();
        }
        m
    }

    /// Builds a matrix from rows of anything convertible to `BigInt`.
    ///
    /// Panics if the rows are ragged.
    pub fn from_rows<T: Into<Int> + Clone>(rows: &[Vec<T>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend(r.iter().cloned().map(Into::into));
        }
        IntMatrix { rows: rows.len(), cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Int {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Int) {
        self.data[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[Int] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Int> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
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

    pub fn mul_vec(&self, x: &[Int]) -> Result<Vec<Int>, LinalgError> {
        if x.len() != self.cols {
            return Err(LinalgError::DimensionError { expected: self.cols, found: x.len() });
        }
        Ok((0..self.rows)
            .map(|i| {
                let mut acc = Int::zero();
                for (a, b) in self.row(i).iter().zip(x) {
                    if !a.is_zero() && !b.is_zero() {
                        acc += a * b;
                    }
                }
                acc
            })
            .collect())
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::DimensionError { expected: self.cols, found: other.rows });
        }
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.data[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Stacks `other` underneath `self`.
    pub fn vstack(&self, other: &IntMatrix) -> Result<IntMatrix, LinalgError> {
        if self.cols != other.cols {
            return Err(LinalgError::DimensionError { expected: self.cols, found: other.cols });
        }
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Ok(IntMatrix { rows: self.rows + other.rows, cols: self.cols, data })
    }

    /// Determinant by fraction-free (Bareiss) elimination. Square matrices only.
    pub fn determinant(&self) -> Result<Int, LinalgError> {
        if self.rows != self.cols {
            return Err(LinalgError::DimensionError { expected: self.rows, found: self.cols });
        }
        let n = self.rows;
        if n == 0 {
            return Ok(Int::one());
        }
        let mut a: Vec<Vec<Int>> = (0..n).map(|i| self.row(i).to_vec()).collect();
        let mut sign = Int::one();
        let mut prev = Int::one();
        for k in 0..n {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                    Some(i) => {
                        a.swap(i, k);
                        sign = -sign;
                    }
                    None => return Ok(Int::zero()),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                    a[i][j] = v / &prev;
                }
                a[i][k] = Int::zero();
            }
            prev = a[k][k].clone();
        }
        Ok(sign * &a[n - 1][n - 1])
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    fn negate_row(&mut self, i: usize) {
        for x in &mut self.data[i * self.cols..(i + 1) * self.cols] {
            *x = -std::mem::take(x);
        }
    }

    fn negate_col(&mut self, j: usize) {
        for i in 0..self.rows {
            let x = &mut self.data[i * self.cols + j];
            *x = -std::mem::take(x);
        }
    }

    /// row[target] += factor * row[source]
    fn add_row_multiple(&mut self, target: usize, source: usize, factor: &Int) {
        if factor.is_zero() {
            return;
        }
        let c = self.cols;
        for j in 0..c {
            let s = &self.data[source * c + j];
            if !s.is_zero() {
                let v = s * factor;
                self.data[target * c + j] += v;
            }
        }
    }

    /// col[target] += factor * col[source]
    fn add_col_multiple(&mut self, target: usize, source: usize, factor: &Int) {
        if factor.is_zero() {
            return;
        }
        let c = self.cols;
        for i in 0..self.rows {
            let s = &self.data[i * c + source];
            if !s.is_zero() {
                let v = s * factor;
                self.data[i * c + target] += v;
            }
        }
    }
}

/// Dense row-major matrix of rationals, always in lowest terms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix { rows, cols, data: vec![Rat::zero(); rows * cols] }
    }

    pub fn from_rows(rows: &[Vec<Rat>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend(r.iter().cloned());
        }
        RatMatrix { rows: rows.len(), cols, data }
    }

    pub fn from_int(m: &IntMatrix) -> Self {
        RatMatrix {
            rows: m.rows,
            cols: m.cols,
            data: m.data.iter().map(|x| Rat::from_integer(x.clone())).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rat {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Rat) {
        self.data[i * self.cols + j] = value;
    }

    pub fn mul_vec(&self, x: &[Rat]) -> Result<Vec<Rat>, LinalgError> {
        if x.len() != self.cols {
            return Err(LinalgError::DimensionError { expected: self.cols, found: x.len() });
        }
        Ok((0..self.rows)
            .map(|i| {
                let mut acc = Rat::zero();
                for j in 0..self.cols {
                    let a = self.get(i, j);
                    if !a.is_zero() && !x[j].is_zero() {
                        acc += a * &x[j];
                    }
                }
                acc
            })
            .collect())
    }
}

/// `U · A · V = D` with `U`, `V` unimodular and `D` diagonal with `d1 | d2 | …`.
#[derive(Clone, Debug)]
pub struct SmithDecomposition {
    pub u: IntMatrix,
    pub u_inv: IntMatrix,
    pub v: IntMatrix,
    pub v_inv: IntMatrix,
    /// Nonzero invariant factors, positive and divisibility-ordered.
    pub diagonal: Vec<Int>,
    rows: usize,
    cols: usize,
}

impl SmithDecomposition {
    pub fn rank(&self) -> usize {
        self.diagonal.len()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// The full diagonal matrix `D`.
    pub fn d(&self) -> IntMatrix {
        let mut d = IntMatrix::zeros(self.rows, self.cols);
        for (i, x) in self.diagonal.iter().enumerate() {
            d.set(i, i, x.clone());
        }
        d
    }

    /// Columns of `V` beyond the rank: a basis of the integer kernel.
    pub fn kernel_basis(&self) -> Vec<Vec<Int>> {
        (self.rank()..self.cols).map(|j| self.v.column(j)).collect()
    }

    /// Solves `A x = b` over the integers, returning `None` when no integer solution exists.
    pub fn solve(&self, b: &[Int]) -> Result<Option<Vec<Int>>, LinalgError> {
        let c = self.u.mul_vec(b)?;
        let r = self.rank();
        if c[r..].iter().any(|x| !x.is_zero()) {
            return Ok(None);
        }
        let mut s = vec![Int::zero(); self.cols];
        for i in 0..r {
            let (q, rem) = c[i].div_rem(&self.diagonal[i]);
            if !rem.is_zero() {
                return Ok(None);
            }
            s[i] = q;
        }
        Ok(Some(self.v.mul_vec(&s)?))
    }
}

struct SmithState {
    a: IntMatrix,
    u: IntMatrix,
    u_inv: IntMatrix,
    v: IntMatrix,
    v_inv: IntMatrix,
}

impl SmithState {
    fn swap_rows(&mut self, i: usize, k: usize) {
        self.a.swap_rows(i, k);
        self.u.swap_rows(i, k);
        self.u_inv.swap_cols(i, k);
    }

    fn swap_cols(&mut self, j: usize, k: usize) {
        self.a.swap_cols(j, k);
        self.v.swap_cols(j, k);
        self.v_inv.swap_rows(j, k);
    }

    fn negate_row(&mut self, i: usize) {
        self.a.negate_row(i);
        self.u.negate_row(i);
        self.u_inv.negate_col(i);
    }

    /// row[target] += f * row[source]
    fn row_op(&mut self, target: usize, source: usize, f: &Int) {
        self.a.add_row_multiple(target, source, f);
        self.u.add_row_multiple(target, source, f);
        let neg = -f;
        self.u_inv.add_col_multiple(source, target, &neg);
    }

    /// col[target] += f * col[source]
    fn col_op(&mut self, target: usize, source: usize, f: &Int) {
        self.a.add_col_multiple(target, source, f);
        self.v.add_col_multiple(target, source, f);
        let neg = -f;
        self.v_inv.add_row_multiple(source, target, &neg);
    }
}

/// Smith normal form with smallest-magnitude pivoting; ties broken by
/// row-major index order, so the result is deterministic.
pub fn smith_normal_form(a: &IntMatrix) -> SmithDecomposition {
    let (m, n) = (a.rows, a.cols);
    let mut st = SmithState {
        a: a.clone(),
        u: IntMatrix::identity(m),
        u_inv: IntMatrix::identity(m),
        v: IntMatrix::identity(n),
        v_inv: IntMatrix::identity(n),
    };
    let mut diagonal = Vec::new();
    let mut t = 0;
    while t < m.min(n) {
        let Some((pi, pj)) = smallest_entry(&st.a, (t..m).flat_map(|i| (t..n).map(move |j| (i, j))))
        else {
            break;
        };
        st.swap_rows(t, pi);
        st.swap_cols(t, pj);
        loop {
            // clear column t below and row t to the right
            let pivot = st.a.get(t, t).clone();
            for i in t + 1..m {
                let x = st.a.get(i, t);
                if !x.is_zero() {
                    let q = -(x / &pivot);
                    st.row_op(i, t, &q);
                }
            }
            for j in t + 1..n {
                let x = st.a.get(t, j);
                if !x.is_zero() {
                    let q = -(x / &pivot);
                    st.col_op(j, t, &q);
                }
            }
            let leftover = (t + 1..m)
                .map(|i| (i, t))
                .chain((t + 1..n).map(|j| (t, j)))
                .filter(|&(i, j)| !st.a.get(i, j).is_zero());
            if let Some((i, j)) = smallest_entry(&st.a, leftover) {
                if i == t {
                    st.swap_cols(t, j);
                } else {
                    st.swap_rows(t, i);
                }
                continue;
            }
            let pivot = st.a.get(t, t).clone();
            let offender = (t + 1..m).find(|&i| {
                st.a.row(i)[t + 1..].iter().any(|x| !x.is_multiple_of(&pivot))
            });
            match offender {
                Some(i) => st.row_op(t, i, &Int::one()),
                None => break,
            }
        }
        if st.a.get(t, t).is_negative() {
            st.negate_row(t);
        }
        diagonal.push(st.a.get(t, t).clone());
        t += 1;
    }
    SmithDecomposition {
        u: st.u,
        u_inv: st.u_inv,
        v: st.v,
        v_inv: st.v_inv,
        diagonal,
        rows: m,
        cols: n,
    }
}

fn smallest_entry(
    a: &IntMatrix,
    positions: impl Iterator<Item = (usize, usize)>,
) -> Option<(usize, usize)> {
    let mut best: Option<((usize, usize), Int)> = None;
    for (i, j) in positions {
        let x = a.get(i, j);
        if x.is_zero() {
            continue;
        }
        let mag = x.abs();
        let better = match &best {
            None => true,
            Some((_, b)) => mag < *b,
        };
        if better {
            let one = mag.is_one();
            best = Some(((i, j), mag));
            if one {
                break;
            }
        }
    }
    best.map(|(p, _)| p)
}

/// Integer solution of `A x = b`, if one exists. The witness is verified by substitution.
pub fn solve_integer_linear(a: &IntMatrix, b: &[Int]) -> Result<Option<Vec<Int>>, LinalgError> {
    if b.len() != a.rows {
        return Err(LinalgError::DimensionError { expected: a.rows, found: b.len() });
    }
    let snf = smith_normal_form(a);
    let x = snf.solve(b)?;
    if let Some(x) = &x {
        debug_assert_eq!(a.mul_vec(x)?, b);
    }
    Ok(x)
}

/// Integer basis of `{x : A x = 0}`.
pub fn integer_kernel(a: &IntMatrix) -> Vec<Vec<Int>> {
    smith_normal_form(a).kernel_basis()
}

/// Row echelon form of an integer matrix by Bareiss elimination.
/// Returns the reduced rows and the pivot columns.
fn bareiss_echelon(mut rows: Vec<Vec<Int>>, cols: usize) -> (Vec<Vec<Int>>, Vec<usize>) {
    let m = rows.len();
    let mut pivots = Vec::new();
    let mut prev = Int::one();
    let mut r = 0;
    for c in 0..cols {
        if r == m {
            break;
        }
        let Some(p) = (r..m).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        for i in r + 1..m {
            for j in c + 1..cols {
                let v = &rows[i][j] * &rows[r][c] - &rows[i][c] * &rows[r][j];
                rows[i][j] = v / &prev;
            }
            rows[i][c] = Int::zero();
        }
        // entries left of column c in rows below r are already zero
        prev = rows[r][c].clone();
        pivots.push(c);
        r += 1;
    }
    (rows, pivots)
}

fn integer_rows(a: &RatMatrix, b: Option<&[Rat]>) -> Vec<Vec<Int>> {
    (0..a.rows)
        .map(|i| {
            let mut row: Vec<Rat> = (0..a.cols).map(|j| a.get(i, j).clone()).collect();
            if let Some(b) = b {
                row.push(b[i].clone());
            }
            let lcm = row.iter().fold(Int::one(), |acc, x| acc.lcm(x.denom()));
            row.iter().map(|x| (x * Rat::from_integer(lcm.clone())).to_integer()).collect()
        })
        .collect()
}

/// Rank over the rationals.
pub fn rational_rank(a: &RatMatrix) -> usize {
    let (_, pivots) = bareiss_echelon(integer_rows(a, None), a.cols);
    pivots.len()
}

/// Rational solution of `A x = b` (free variables set to zero), if consistent.
pub fn solve_rational_linear(a: &RatMatrix, b: &[Rat]) -> Result<Option<Vec<Rat>>, LinalgError> {
    if b.len() != a.rows {
        return Err(LinalgError::DimensionError { expected: a.rows, found: b.len() });
    }
    let n = a.cols;
    let (rows, pivots) = bareiss_echelon(integer_rows(a, Some(b)), n + 1);
    if pivots.last() == Some(&n) {
        return Ok(None);
    }
    let mut x = vec![Rat::zero(); n];
    for (r, &c) in pivots.iter().enumerate().rev() {
        let row = &rows[r];
        let mut acc = Rat::from_integer(row[n].clone());
        for j in c + 1..n {
            if !row[j].is_zero() && !x[j].is_zero() {
                acc -= Rat::from_integer(row[j].clone()) * &x[j];
            }
        }
        x[c] = acc / Rat::from_integer(row[c].clone());
    }
    debug_assert_eq!(a.mul_vec(&x)?, b);
    Ok(Some(x))
}
