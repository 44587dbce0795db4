//! Exact linear algebra over the rationals.
//!
//! Ranks are computed by fraction-free (Bareiss) forward elimination on
//! integer matrices; rational matrices are first scaled row by row to clear
//! denominators, which leaves the row space unchanged. Pivots are always the
//! leftmost available column and the first nonzero row below the current
//! one, so every result is a deterministic function of the input.
//!
//! A modular rank over a small fixed list of 62-bit primes is available as a
//! filter. It never decides a reported rank on its own: a modular rank can
//! only confirm a rational rank when it already reaches the trivial upper
//! bound `min(rows, cols)`. Any other case falls back to the exact
//! computation.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// The five largest primes below 2^62, tried in this order by the filter.
pub const PRIMES: [u64; 5] = [
    4_611_686_018_427_387_847,
    4_611_686_018_427_387_817,
    4_611_686_018_427_387_787,
    4_611_686_018_427_387_761,
    4_611_686_018_427_387_751,
];

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Least common multiple of the denominators of `values` (1 when empty).
pub fn denominator_lcm<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

/// Dense row-major rational matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    entries: Vec<Rational>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.entries[i * n + i] = Rational::one();
        }
        m
    }

    /// Builds a matrix with `cols` columns from a list of rows.
    pub fn from_rows(cols: usize, rows: impl IntoIterator<Item = Vec<Rational>>) -> Result<Self> {
        let mut entries = Vec::new();
        let mut count = 0;
        for row in rows {
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: row.len(),
                });
            }
            entries.extend(row);
            count += 1;
        }
        Ok(Self {
            rows: count,
            cols,
            entries,
        })
    }

    pub fn from_i64_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        Self::from_rows(cols, rows.iter().map(|r| r.iter().map(|&x| rat(x)).collect()))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Rational {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: Rational) {
        self.entries[r * self.cols + c] = value;
    }

    pub fn row(&self, r: usize) -> &[Rational] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_vectors(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn column(&self, c: usize) -> Vec<Rational> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.entries[c * self.rows + r] = self.get(r, c).clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.entries[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Result<Vec<Rational>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        Ok((0..self.rows)
            .map(|r| dot(self.row(r), v))
            .collect())
    }

    /// Row vector times matrix.
    pub fn vec_mul(&self, v: &[Rational]) -> Result<Vec<Rational>> {
        if v.len() != self.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                found: v.len(),
            });
        }
        let mut out = vec![Rational::zero(); self.cols];
        for (r, coef) in v.iter().enumerate() {
            if coef.is_zero() {
                continue;
            }
            for (c, slot) in out.iter_mut().enumerate() {
                let e = self.get(r, c);
                if !e.is_zero() {
                    *slot += coef * e;
                }
            }
        }
        Ok(out)
    }

    /// Inverse of a square matrix, `None` when singular.
    pub fn inverse(&self) -> Option<Matrix> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let mut aug = Matrix::zeros(n, 2 * n);
        for r in 0..n {
            for c in 0..n {
                aug.set(r, c, self.get(r, c).clone());
            }
            aug.set(r, n + r, Rational::one());
        }
        let reduced = rref(&aug);
        if reduced.rank < n || reduced.pivot_cols[..n].iter().copied().ne(0..n) {
            return None;
        }
        let mut inv = Matrix::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                inv.set(r, c, reduced.rref.get(r, n + c).clone());
            }
        }
        Some(inv)
    }

    pub fn determinant(&self) -> Result<Rational> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                found: self.cols,
            });
        }
        let n = self.rows;
        if n == 0 {
            return Ok(Rational::one());
        }
        let (mut im, scales) = self.to_int_scaled();
        let sign = im.bareiss_with_sign(n);
        match sign {
            None => Ok(Rational::zero()),
            Some(sign) => {
                let det = im.get(n - 1, n - 1).clone() * BigInt::from(sign);
                let scale = scales.iter().fold(BigInt::one(), |acc, s| acc * s);
                Ok(Rational::new(det, scale))
            }
        }
    }

    /// Integer matrix with each row multiplied by the lcm of its denominators.
    pub fn to_int_rows(&self) -> IntMatrix {
        self.to_int_scaled().0
    }

    fn to_int_scaled(&self) -> (IntMatrix, Vec<BigInt>) {
        let mut data = Vec::with_capacity(self.entries.len());
        let mut scales = Vec::with_capacity(self.rows);
        for r in 0..self.rows {
            let row = self.row(r);
            let l = denominator_lcm(row);
            for x in row {
                data.push(x.numer() * (&l / x.denom()));
            }
            scales.push(l);
        }
        (
            IntMatrix {
                rows: self.rows,
                cols: self.cols,
                data,
            },
            scales,
        )
    }
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter()
        .zip(b)
        .filter(|(x, y)| !x.is_zero() && !y.is_zero())
        .fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

/// Dense row-major integer matrix, the working representation for ranks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn from_rows(cols: usize, rows: impl IntoIterator<Item = Vec<BigInt>>) -> Result<Self> {
        let mut data = Vec::new();
        let mut count = 0;
        for row in rows {
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: row.len(),
                });
            }
            data.extend(row);
            count += 1;
        }
        Ok(Self {
            rows: count,
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &BigInt {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: BigInt) {
        self.data[r * self.cols + c] = value;
    }

    pub fn row(&self, r: usize) -> &[BigInt] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_rational(&self) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .data
                .iter()
                .map(|x| Rational::from_integer(x.clone()))
                .collect(),
        }
    }

    /// The submatrix formed by the given columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> IntMatrix {
        let mut data = Vec::with_capacity(self.rows * cols.len());
        for r in 0..self.rows {
            let row = self.row(r);
            data.extend(cols.iter().map(|&c| row[c].clone()));
        }
        IntMatrix {
            rows: self.rows,
            cols: cols.len(),
            data,
        }
    }

    /// Rank, using the modular filter when it is enabled globally. The
    /// returned value is always the rational rank.
    pub fn rank(&self) -> usize {
        if modular_filter_enabled() {
            rank_filtered_int(self).rank
        } else {
            self.rank_exact()
        }
    }

    pub fn rank_exact(&self) -> usize {
        if self.rows == 0 || self.cols == 0 {
            return 0;
        }
        let mut work = self.clone();
        work.bareiss(self.cols).len()
    }

    /// For each column in `test_cols`, whether it lies in the span of the
    /// columns `span_cols`.
    pub fn columns_in_span(&self, span_cols: &[usize], test_cols: &[usize]) -> Vec<bool> {
        let order: Vec<usize> = span_cols.iter().chain(test_cols).copied().collect();
        let mut work = self.select_columns(&order);
        let rank = work.bareiss(span_cols.len()).len();
        (0..test_cols.len())
            .map(|k| {
                let c = span_cols.len() + k;
                (rank..work.rows).all(|r| work.get(r, c).is_zero())
            })
            .collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let cols = self.cols;
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let (head, tail) = self.data.split_at_mut(hi * cols);
        head[lo * cols..(lo + 1) * cols].swap_with_slice(&mut tail[..cols]);
    }

    /// In-place fraction-free forward elimination, pivoting only in the
    /// first `pivot_limit` columns. Returns the pivot columns. After the
    /// call, rows at and beyond the rank are zero in those columns and every
    /// later column has been transformed by the same (invertible) row
    /// operations.
    fn bareiss(&mut self, pivot_limit: usize) -> Vec<usize> {
        self.bareiss_inner(pivot_limit).0
    }

    /// Elimination for square determinants: `None` when singular, otherwise
    /// the sign of the row permutation. The determinant is then the last
    /// diagonal entry times that sign.
    fn bareiss_with_sign(&mut self, n: usize) -> Option<i64> {
        let (pivots, sign) = self.bareiss_inner(n);
        (pivots.len() == n).then_some(sign)
    }

    fn bareiss_inner(&mut self, pivot_limit: usize) -> (Vec<usize>, i64) {
        let cols = self.cols;
        let mut prev = BigInt::one();
        let mut pivots = Vec::new();
        let mut sign = 1i64;
        let mut r = 0;
        for c in 0..pivot_limit.min(cols) {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !self.data[i * cols + c].is_zero()) else {
                continue;
            };
            if p != r {
                self.swap_rows(r, p);
                sign = -sign;
            }
            let pivot_row: Vec<BigInt> = self.data[r * cols + c..(r + 1) * cols].to_vec();
            let piv = &pivot_row[0];
            let trivial_scale = piv.is_one() && prev.is_one();
            for i in r + 1..self.rows {
                let base = i * cols;
                let factor = std::mem::take(&mut self.data[base + c]);
                if factor.is_zero() {
                    if trivial_scale {
                        continue;
                    }
                    for j in c + 1..cols {
                        let x = &mut self.data[base + j];
                        if !x.is_zero() {
                            *x = (piv * &*x) / &prev;
                        }
                    }
                } else {
                    for j in c + 1..cols {
                        let pj = &pivot_row[j - c];
                        let x = &mut self.data[base + j];
                        let v = if pj.is_zero() {
                            piv * &*x
                        } else {
                            piv * &*x - &factor * pj
                        };
                        *x = if prev.is_one() { v } else { v / &prev };
                    }
                }
            }
            prev = piv.clone();
            pivots.push(c);
            r += 1;
        }
        (pivots, sign)
    }

    /// Rank modulo a prime.
    pub fn rank_mod_p(&self, p: u64) -> usize {
        let pb = BigInt::from(p);
        let mut rows: Vec<Vec<u64>> = (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .map(|x| x.mod_floor(&pb).to_u64().expect("residue fits in u64"))
                    .collect()
            })
            .collect();
        rank_mod_p_rows(&mut rows, self.cols, p)
    }
}

/// Output of [`rref`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RrefResult {
    pub rref: Matrix,
    pub rank: usize,
    pub pivot_cols: Vec<usize>,
}

/// Reduced row echelon form. The first `rank` rows of `rref` carry the
/// pivots; the rest are zero.
pub fn rref(m: &Matrix) -> RrefResult {
    let mut im = m.to_int_rows();
    let pivots = if m.rows == 0 || m.cols == 0 {
        Vec::new()
    } else {
        im.bareiss(m.cols)
    };
    let rank = pivots.len();
    let mut rows: Vec<Vec<Rational>> = (0..rank)
        .map(|i| {
            im.row(i)
                .iter()
                .map(|x| Rational::from_integer(x.clone()))
                .collect()
        })
        .collect();
    for i in (0..rank).rev() {
        let c = pivots[i];
        let piv = rows[i][c].clone();
        if !piv.is_one() {
            for x in rows[i][c..].iter_mut() {
                if !x.is_zero() {
                    *x /= &piv;
                }
            }
        }
        let (above, rest) = rows.split_at_mut(i);
        let pivot_row = &rest[0];
        for row in above.iter_mut() {
            let f = row[c].clone();
            if f.is_zero() {
                continue;
            }
            for (x, y) in row[c..].iter_mut().zip(&pivot_row[c..]) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
    }
    let mut out = Matrix::zeros(m.rows, m.cols);
    for (i, row) in rows.into_iter().enumerate() {
        for (c, x) in row.into_iter().enumerate() {
            out.set(i, c, x);
        }
    }
    RrefResult {
        rref: out,
        rank,
        pivot_cols: pivots,
    }
}

/// Exact rank, honoring the global modular filter setting.
pub fn rank(m: &Matrix) -> usize {
    if modular_filter_enabled() {
        rank_filtered(m).rank
    } else {
        m.to_int_rows().rank_exact()
    }
}

/// Basis of the right kernel, one vector per free column in ascending order
/// with that free variable set to 1 and the other free variables to 0.
pub fn kernel_basis(m: &Matrix) -> Vec<Vec<Rational>> {
    let reduced = rref(m);
    let mut is_pivot = vec![false; m.cols];
    for &c in &reduced.pivot_cols {
        is_pivot[c] = true;
    }
    (0..m.cols)
        .filter(|&f| !is_pivot[f])
        .map(|f| {
            let mut v = vec![Rational::zero(); m.cols];
            v[f] = Rational::one();
            for (i, &c) in reduced.pivot_cols.iter().enumerate() {
                let e = reduced.rref.get(i, f);
                if !e.is_zero() {
                    v[c] = -e.clone();
                }
            }
            v
        })
        .collect()
}

/// Whether `v` lies in the span of `basis`.
pub fn in_span(v: &[Rational], basis: &[Vec<Rational>]) -> Result<bool> {
    if let Some(b) = basis.iter().find(|b| b.len() != v.len()) {
        return Err(Error::DimensionMismatch {
            expected: v.len(),
            found: b.len(),
        });
    }
    if v.iter().all(Zero::is_zero) {
        return Ok(true);
    }
    let base = Matrix::from_rows(v.len(), basis.iter().cloned())?;
    let with_v = Matrix::from_rows(v.len(), basis.iter().cloned().chain([v.to_vec()]))?;
    Ok(rank(&with_v) == rank(&base))
}

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

fn residue(x: &BigInt, p: u64) -> u64 {
    x.mod_floor(&BigInt::from(p))
        .to_u64()
        .expect("residue fits in u64")
}

fn rank_mod_p_rows(rows: &mut [Vec<u64>], cols: usize, p: u64) -> usize {
    let mut r = 0;
    for c in 0..cols {
        if r == rows.len() {
            break;
        }
        let Some(piv) = (r..rows.len()).find(|&i| rows[i][c] != 0) else {
            continue;
        };
        rows.swap(r, piv);
        let inv = pow_mod(rows[r][c], p - 2, p);
        for x in rows[r][c..].iter_mut() {
            *x = mul_mod(*x, inv, p);
        }
        let (head, tail) = rows.split_at_mut(r + 1);
        let pivot_row = &head[r];
        for row in tail.iter_mut() {
            let f = row[c];
            if f == 0 {
                continue;
            }
            for j in c..cols {
                let sub = mul_mod(f, pivot_row[j], p);
                row[j] = if row[j] >= sub {
                    row[j] - sub
                } else {
                    row[j] + p - sub
                };
            }
        }
        r += 1;
    }
    r
}

/// Rank of `m` reduced modulo the prime `p`. Never exceeds the rational rank.
pub fn rank_mod_p(m: &Matrix, p: u64) -> Result<usize> {
    let mut rows = Vec::with_capacity(m.rows);
    for r in 0..m.rows {
        let mut row = Vec::with_capacity(m.cols);
        for c in 0..m.cols {
            let x = m.get(r, c);
            let d = residue(x.denom(), p);
            if d == 0 {
                return Err(Error::DenominatorDivisible { prime: p, row: r, col: c });
            }
            row.push(mul_mod(residue(x.numer(), p), pow_mod(d, p - 2, p), p));
        }
        rows.push(row);
    }
    Ok(rank_mod_p_rows(&mut rows, m.cols, p))
}

static MODULAR_FILTER: AtomicBool = AtomicBool::new(false);
static CONFIRMED: AtomicU64 = AtomicU64::new(0);
static FALLBACKS: AtomicU64 = AtomicU64::new(0);
static DISAGREEMENTS: AtomicU64 = AtomicU64::new(0);

pub fn set_modular_filter(enabled: bool) {
    MODULAR_FILTER.store(enabled, Ordering::Relaxed);
}

pub fn modular_filter_enabled() -> bool {
    MODULAR_FILTER.load(Ordering::Relaxed)
}

/// Process-wide counters of the modular filter.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FilterStats {
    /// Ranks confirmed by a modular rank equal to `min(rows, cols)`.
    pub confirmed: u64,
    /// Ranks that needed the exact computation.
    pub fallbacks: u64,
    /// Fallbacks where the exact rank differed from the modular one.
    pub disagreements: u64,
}

pub fn filter_stats() -> FilterStats {
    FilterStats {
        confirmed: CONFIRMED.load(Ordering::Relaxed),
        fallbacks: FALLBACKS.load(Ordering::Relaxed),
        disagreements: DISAGREEMENTS.load(Ordering::Relaxed),
    }
}

/// Result of a filtered rank computation. `rank` is always the rational rank.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RankOutcome {
    pub rank: usize,
    pub prime: Option<u64>,
    pub modular_rank: Option<usize>,
    /// The modular rank reached `min(rows, cols)` and no exact elimination ran.
    pub short_circuited: bool,
    /// The exact rank differed from the modular rank.
    pub disagreement: bool,
}

fn finish_filtered(modular: Option<(u64, usize)>, bound: usize, exact: impl FnOnce() -> usize) -> RankOutcome {
    if let Some((p, mr)) = modular {
        if mr == bound {
            CONFIRMED.fetch_add(1, Ordering::Relaxed);
            return RankOutcome {
                rank: mr,
                prime: Some(p),
                modular_rank: Some(mr),
                short_circuited: true,
                disagreement: false,
            };
        }
    }
    FALLBACKS.fetch_add(1, Ordering::Relaxed);
    let rank = exact();
    let disagreement = modular.is_some_and(|(_, mr)| mr != rank);
    if let (true, Some((p, mr))) = (disagreement, modular) {
        DISAGREEMENTS.fetch_add(1, Ordering::Relaxed);
        log::warn!("rank mod {p} is {mr} but the rational rank is {rank}; using the rational rank");
    }
    RankOutcome {
        rank,
        prime: modular.map(|(p, _)| p),
        modular_rank: modular.map(|(_, mr)| mr),
        short_circuited: false,
        disagreement,
    }
}

/// Rank through the modular filter: the first listed prime not dividing any
/// denominator is tried, and the exact rank is computed unless the modular
/// rank already equals `min(rows, cols)`.
pub fn rank_filtered(m: &Matrix) -> RankOutcome {
    let modular = PRIMES
        .iter()
        .find_map(|&p| rank_mod_p(m, p).ok().map(|r| (p, r)));
    finish_filtered(modular, m.rows.min(m.cols), || m.to_int_rows().rank_exact())
}

pub fn rank_filtered_int(m: &IntMatrix) -> RankOutcome {
    let p = PRIMES[0];
    let modular = Some((p, m.rank_mod_p(p)));
    finish_filtered(modular, m.rows.min(m.cols), || m.rank_exact())
}
