//! Exact dense linear algebra over big integers.
//!
//! Matrices with rational entries are cleared to a common denominator and
//! handled fraction-free: Bareiss elimination for factorization, rank and
//! determinant sign, and an adjugate representation `A⁻¹ = N / D` (N integer
//! matrix, D = det) that supports division-exact Sherman–Morrison rank-one
//! updates. No rational reduction happens in the hot loops.

use num_integer::Integer;
use num_traits::{One, Zero};

use crate::{Int, Rational};

/// Dense row-major matrix of big integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    pub dim_rows: usize,
    pub dim_cols: usize,
    data: Vec<Int>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            dim_rows: rows,
            dim_cols: cols,
            data: vec![Int::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            *m.at_mut(i, i) = Int::one();
        }
        m
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> &Int {
        &self.data[r * self.dim_cols + c]
    }

    #[inline]
    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut Int {
        &mut self.data[r * self.dim_cols + c]
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.dim_cols {
            self.data.swap(a * self.dim_cols + c, b * self.dim_cols + c);
        }
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for r in 0..self.dim_rows {
            self.data.swap(r * self.dim_cols + a, r * self.dim_cols + b);
        }
    }

    /// y = M v over integers.
    pub fn mul_vec(&self, v: &[Int]) -> Vec<Int> {
        assert_eq!(v.len(), self.dim_cols);
        let mut out = vec![Int::zero(); self.dim_rows];
        for r in 0..self.dim_rows {
            let row = &self.data[r * self.dim_cols..(r + 1) * self.dim_cols];
            let mut acc = Int::zero();
            for (a, b) in row.iter().zip(v) {
                if !a.is_zero() && !b.is_zero() {
                    acc += a * b;
                }
            }
            out[r] = acc;
        }
        out
    }

    /// y = Mᵀ v over integers.
    pub fn mul_vec_transposed(&self, v: &[Int]) -> Vec<Int> {
        assert_eq!(v.len(), self.dim_rows);
        let mut out = vec![Int::zero(); self.dim_cols];
        for r in 0..self.dim_rows {
            if v[r].is_zero() {
                continue;
            }
            let row = &self.data[r * self.dim_cols..(r + 1) * self.dim_cols];
            for (c, a) in row.iter().enumerate() {
                if !a.is_zero() {
                    out[c] += a * &v[r];
                }
            }
        }
        out
    }
}

/// Clear a rational matrix to `(integer matrix, positive scale)` with
/// `rational = matrix / scale`.
pub fn clear_denominators(rows: usize, cols: usize, entries: &[Rational]) -> (IntMatrix, Int) {
    assert_eq!(entries.len(), rows * cols);
    let mut scale = Int::one();
    for q in entries {
        scale = num_integer::lcm(scale, q.denom().clone());
    }
    let mut m = IntMatrix::zeros(rows, cols);
    for (idx, q) in entries.iter().enumerate() {
        m.data[idx] = q.numer() * (&scale / q.denom());
    }
    (m, scale)
}

/// Scale a rational vector to integers: returns `(ints, s)` with `v = ints/s`.
pub fn clear_vec(v: &[Rational]) -> (Vec<Int>, Int) {
    let mut scale = Int::one();
    for q in v {
        scale = num_integer::lcm(scale, q.denom().clone());
    }
    let ints = v.iter().map(|q| q.numer() * (&scale / q.denom())).collect();
    (ints, scale)
}

fn exact_div(num: Int, den: &Int) -> Int {
    debug_assert!(!den.is_zero());
    let (quot, rem) = num.div_rem(den);
    debug_assert!(rem.is_zero(), "inexact division in fraction-free step");
    let _ = rem;
    quot
}

/// Fraction-free LU (Bareiss) with row and column pivoting.
///
/// After `factor`, `data` holds the eliminated matrix: the upper triangle of
/// the first `rank` rows is the fraction-free U (its diagonal entries are the
/// leading principal minors of the permuted matrix), and entries below the
/// diagonal hold the pre-elimination values used as multipliers.
#[derive(Debug, Clone)]
pub struct FractionFreeLu {
    pub dim: usize,
    pub rank: usize,
    data: IntMatrix,
    row_perm: Vec<usize>,
    col_perm: Vec<usize>,
    perm_sign: i8,
}

impl FractionFreeLu {
    pub fn factor(mut m: IntMatrix) -> Self {
        assert_eq!(m.dim_rows, m.dim_cols);
        let n = m.dim_rows;
        let mut row_perm: Vec<usize> = (0..n).collect();
        let mut col_perm: Vec<usize> = (0..n).collect();
        let mut perm_sign = 1i8;
        let mut prev_pivot = Int::one();
        let mut rank = n;

        for k in 0..n {
            // first nonzero pivot, scanning columns within rows for determinism
            let mut found = None;
            'search: for r in k..n {
                for c in k..n {
                    if !m.at(r, c).is_zero() {
                        found = Some((r, c));
                        break 'search;
                    }
                }
            }
            let (pr, pc) = match found {
                Some(p) => p,
                None => {
                    rank = k;
                    break;
                }
            };
            if pr != k {
                m.swap_rows(k, pr);
                row_perm.swap(k, pr);
                perm_sign = -perm_sign;
            }
            if pc != k {
                m.swap_cols(k, pc);
                col_perm.swap(k, pc);
                perm_sign = -perm_sign;
            }
            let pivot = m.at(k, k).clone();
            for i in (k + 1)..n {
                let mik = m.at(i, k).clone();
                for j in (k + 1)..n {
                    let val = &pivot * m.at(i, j) - &mik * m.at(k, j);
                    *m.at_mut(i, j) = exact_div(val, &prev_pivot);
                }
            }
            prev_pivot = pivot;
        }

        FractionFreeLu {
            dim: n,
            rank,
            data: m,
            row_perm,
            col_perm,
            perm_sign,
        }
    }

    /// Determinant of the factored matrix (0 when rank-deficient).
    pub fn det(&self) -> Int {
        if self.rank < self.dim {
            return Int::zero();
        }
        let d = self.data.at(self.dim - 1, self.dim - 1).clone();
        if self.perm_sign < 0 {
            -d
        } else {
            d
        }
    }

    /// Solve `A x = det(A) · b` over integers (so `x / det` solves `A x = b`).
    /// Requires full rank.
    pub fn solve_scaled(&self, b: &[Int]) -> Vec<Int> {
        assert_eq!(self.rank, self.dim, "solve on singular matrix");
        let n = self.dim;
        let mut rhs: Vec<Int> = self.row_perm.iter().map(|&i| b[i].clone()).collect();

        // forward: same fraction-free row operations as the factorization
        let mut prev = Int::one();
        for k in 0..n {
            let pivot = self.data.at(k, k);
            for i in (k + 1)..n {
                let val = pivot * &rhs[i] - self.data.at(i, k) * &rhs[k];
                rhs[i] = exact_div(val, &prev);
            }
            prev = pivot.clone();
        }

        // backward: x_i = (u_nn · y_i − Σ_{j>i} U_ij x_j) / U_ii, exact
        let det_mag = self.data.at(n - 1, n - 1).clone();
        let mut x = vec![Int::zero(); n];
        for i in (0..n).rev() {
            let mut acc = &det_mag * &rhs[i];
            for j in (i + 1)..n {
                acc -= self.data.at(i, j) * &x[j];
            }
            x[i] = exact_div(acc, self.data.at(i, i));
        }

        // undo the column permutation; fold the permutation sign into x so
        // that A (x / det()) = b with det() the signed determinant
        let mut out = vec![Int::zero(); n];
        for (pos, &orig) in self.col_perm.iter().enumerate() {
            out[orig] = x[pos].clone();
        }
        if self.perm_sign < 0 {
            for v in &mut out {
                let neg = -std::mem::take(v);
                *v = neg;
            }
        }
        out
    }

    /// A nonzero integer kernel vector when the rank defect is exactly one.
    pub fn kernel_vector(&self) -> Option<Vec<Int>> {
        if self.dim - self.rank != 1 {
            return None;
        }
        let n = self.dim;
        let r = self.rank;
        // Solve U[0..r, 0..r] y = -det(U_r) · U[0..r, r] fraction-free, then
        // append det(U_r) for the free coordinate.
        let lead = self.data.at(r - 1, r - 1).clone();
        let mut y = vec![Int::zero(); r];
        for i in (0..r).rev() {
            let mut acc = -(&lead * self.data.at(i, r));
            for j in (i + 1)..r {
                acc -= self.data.at(i, j) * &y[j];
            }
            y[i] = exact_div(acc, self.data.at(i, i));
        }
        let mut out = vec![Int::zero(); n];
        for (pos, &orig) in self.col_perm.iter().enumerate() {
            if pos < r {
                out[orig] = y[pos].clone();
            } else {
                out[orig] = lead.clone();
            }
        }
        Some(out)
    }
}

/// Inverse of an integer matrix in adjugate form: `A⁻¹ = numer / denom` with
/// `denom = det(A)` (signed). Supports exact rank-one updates.
#[derive(Debug, Clone)]
pub struct AdjugateInverse {
    pub dim: usize,
    /// `denom · A⁻¹`, an integer matrix.
    pub numer: IntMatrix,
    /// Signed determinant of the represented matrix.
    pub denom: Int,
}

impl AdjugateInverse {
    /// Build from a factored nonsingular matrix.
    pub fn from_lu(lu: &FractionFreeLu) -> Self {
        let n = lu.dim;
        let det = lu.det();
        let mut numer = IntMatrix::zeros(n, n);
        let mut e = vec![Int::zero(); n];
        for j in 0..n {
            e[j] = Int::one();
            let col = lu.solve_scaled(&e);
            e[j] = Int::zero();
            for i in 0..n {
                *numer.at_mut(i, j) = col[i].clone();
            }
        }
        AdjugateInverse {
            dim: n,
            numer,
            denom: det,
        }
    }

    /// `A⁻¹ b` for an integer rhs, returned as `(vector, common denominator)`.
    pub fn apply(&self, b: &[Int]) -> (Vec<Int>, Int) {
        (self.numer.mul_vec(b), self.denom.clone())
    }

    /// `A⁻ᵀ b` for an integer rhs.
    pub fn apply_transposed(&self, b: &[Int]) -> (Vec<Int>, Int) {
        (self.numer.mul_vec_transposed(b), self.denom.clone())
    }

    /// Rank-one update `A' = A + u vᵀ` (u, v integer vectors).
    ///
    /// Returns the new inverse, or `None` when A' is singular, together with
    /// `N u` (the unnormalized direction spanning the new kernel in that
    /// case). All divisions are exact: `N' = (N·D' − (N u)(vᵀ N)) / D`.
    pub fn rank_one_update(&self, u: &[Int], v: &[Int]) -> Result<AdjugateInverse, Vec<Int>> {
        let n = self.dim;
        let nu = self.numer.mul_vec(u);
        let vtn = self.numer.mul_vec_transposed(v);
        let mut vtnu = Int::zero();
        for (a, b) in v.iter().zip(&nu) {
            if !a.is_zero() && !b.is_zero() {
                vtnu += a * b;
            }
        }
        // det(A + uvᵀ) = det(A)(1 + vᵀA⁻¹u) = D + vᵀNu
        let new_denom = &self.denom + vtnu;
        if new_denom.is_zero() {
            return Err(nu);
        }
        let mut numer = IntMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let val = self.numer.at(i, j) * &new_denom - &nu[i] * &vtn[j];
                *numer.at_mut(i, j) = exact_div(val, &self.denom);
            }
        }
        Ok(AdjugateInverse {
            dim: n,
            numer,
            denom: new_denom,
        })
    }
}

/// Divide an integer vector by a denominator, producing reduced rationals.
pub fn ints_to_rationals(v: Vec<Int>, denom: &Int) -> Vec<Rational> {
    v.into_iter()
        .map(|x| Rational::new(x, denom.clone()))
        .collect()
}

/// Plain rational Gauss–Jordan solve used by test oracles; independent of the
/// fraction-free path.
pub fn gauss_solve(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = a.len();
    if n == 0 {
        return Some(Vec::new());
    }
    assert!(a.iter().all(|row| row.len() == n));
    let mut piv_of_col = vec![usize::MAX; n];
    let mut used = vec![false; n];
    for c in 0..n {
        let r = (0..n).find(|&r| !used[r] && !a[r][c].is_zero());
        let r = match r {
            Some(r) => r,
            None => continue,
        };
        used[r] = true;
        piv_of_col[c] = r;
        let p = a[r][c].clone();
        for x in a[r].iter_mut() {
            *x = &*x / &p;
        }
        b[r] = &b[r] / &p;
        for i in 0..n {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in 0..n {
                    let sub = &f * &a[r][j];
                    a[i][j] = &a[i][j] - &sub;
                }
                let sub = &f * &b[r];
                b[i] = &b[i] - &sub;
            }
        }
    }
    // rows never used as pivots must have zero rhs, else inconsistent
    for r in 0..n {
        if !used[r] && !b[r].is_zero() {
            return None;
        }
    }
    let mut x = vec![Rational::zero(); n];
    for c in 0..n {
        if piv_of_col[c] == usize::MAX {
            return None; // underdetermined: no unique solution
        }
        x[c] = b[piv_of_col[c]].clone();
    }
    Some(x)
}
