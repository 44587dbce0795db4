//! Fat point schemes and their Hilbert functions.
//!
//! H_Z(t) is the rank of the degree-t condition matrix: one row per point
//! P_i and per exponent alpha with |alpha| = min(m_i - 1, t), holding the
//! partial derivative d^alpha of every degree-t monomial evaluated at P_i.
//!
//! The production path first moves a maximal independent subset of the
//! points to coordinate points. For a coordinate point e_k every condition
//! row has a single nonzero entry, so those rows only mark columns as
//! eliminated, and the fraction-free elimination runs on the rows of the
//! remaining points alone.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::geometry::{coordinate_frame, CoordinateChange, ProjPoint};
use crate::linalg::{self, IntMatrix, Matrix, Rational};
use crate::monomial::{binomial, Form, MonomialBasis};

/// Z = m_1 P_1 + ... + m_s P_s in P^n.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FatPointScheme {
    n: usize,
    points: Vec<ProjPoint>,
    mults: Vec<u32>,
}

impl FatPointScheme {
    pub fn new(points: Vec<ProjPoint>, mults: Vec<u32>) -> Result<Self> {
        let first = points.first().ok_or(Error::EmptyInput("scheme without points"))?;
        let n = first.ambient_n();
        if mults.len() != points.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                found: mults.len(),
            });
        }
        for p in &points {
            if p.ambient_n() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: p.ambient_n(),
                });
            }
        }
        if let Some(index) = mults.iter().position(|&m| m == 0) {
            return Err(Error::ZeroMultiplicity { index });
        }
        for (second, p) in points.iter().enumerate() {
            if let Some(first) = points[..second].iter().position(|q| q == p) {
                return Err(Error::DuplicatePoint { first, second });
            }
        }
        Ok(Self { n, points, mults })
    }

    pub fn equimultiple(points: Vec<ProjPoint>, m: u32) -> Result<Self> {
        let mults = vec![m; points.len()];
        Self::new(points, mults)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn points(&self) -> &[ProjPoint] {
        &self.points
    }

    pub fn mults(&self) -> &[u32] {
        &self.mults
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_mult(&self) -> usize {
        self.mults.iter().map(|&m| m as usize).sum()
    }

    pub fn max_mult(&self) -> u32 {
        self.mults.iter().copied().max().unwrap_or(0)
    }

    pub fn is_equimultiple(&self) -> bool {
        self.mults.windows(2).all(|w| w[0] == w[1])
    }

    /// The scheme with point `index` removed (`None` if nothing would remain).
    pub fn without(&self, index: usize) -> Option<FatPointScheme> {
        if self.points.len() <= 1 || index >= self.points.len() {
            return None;
        }
        let mut points = self.points.clone();
        let mut mults = self.mults.clone();
        points.remove(index);
        mults.remove(index);
        Some(Self {
            n: self.n,
            points,
            mults,
        })
    }

    /// Same scheme with points (and multiplicities) reordered by `perm`:
    /// entry k of the result is entry `perm[k]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> FatPointScheme {
        Self {
            n: self.n,
            points: perm.iter().map(|&i| self.points[i].clone()).collect(),
            mults: perm.iter().map(|&i| self.mults[i]).collect(),
        }
    }

    pub fn transformed(&self, change: &CoordinateChange) -> FatPointScheme {
        Self {
            n: self.n,
            points: self.points.iter().map(|p| change.point(p)).collect(),
            mults: self.mults.clone(),
        }
    }

    /// Index of `p` among the points, if present.
    pub fn position(&self, p: &ProjPoint) -> Option<usize> {
        self.points.iter().position(|q| q == p)
    }
}

/// e(Z) = sum_i C(m_i + n - 1, n).
pub fn multiplicity(z: &FatPointScheme) -> usize {
    z.mults
        .iter()
        .map(|&m| binomial(m as usize + z.n - 1, z.n))
        .sum()
}

/// Number of derivative conditions imposed by an m-fold point in degree t.
pub(crate) fn condition_order(m: u32, t: usize) -> usize {
    (m as usize - 1).min(t)
}

fn powers(coords: &[BigInt], t: usize) -> Vec<Vec<BigInt>> {
    coords
        .iter()
        .map(|c| {
            let mut row = Vec::with_capacity(t + 1);
            let mut acc = BigInt::one();
            for _ in 0..=t {
                row.push(acc.clone());
                acc *= c;
            }
            row
        })
        .collect()
}

fn falling(b: u32, a: u32) -> u64 {
    ((b - a + 1)..=b).map(u64::from).product()
}

/// Rows d^alpha(x^beta)(q) over `basis` for every |alpha| = order.
pub(crate) fn derivative_rows(q: &[BigInt], order: usize, basis: &MonomialBasis) -> Vec<Vec<BigInt>> {
    let pows = powers(q, basis.degree());
    let alphas = MonomialBasis::new(order, basis.nvars());
    alphas
        .exponents()
        .iter()
        .map(|alpha| {
            basis
                .exponents()
                .iter()
                .map(|beta| {
                    if beta.iter().zip(alpha).any(|(b, a)| b < a) {
                        return BigInt::zero();
                    }
                    let mut value = BigInt::from(
                        beta.iter().zip(alpha).map(|(&b, &a)| falling(b, a)).product::<u64>(),
                    );
                    for (k, (&b, &a)) in beta.iter().zip(alpha).enumerate() {
                        let e = (b - a) as usize;
                        if e > 0 {
                            value *= &pows[k][e];
                            if value.is_zero() {
                                break;
                            }
                        }
                    }
                    value
                })
                .collect()
        })
        .collect()
}

/// Row label of a condition matrix: point index and derivative exponent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditionRow {
    pub point: usize,
    pub alpha: Vec<u32>,
}

/// The full degree-t condition matrix, columns indexed by
/// `MonomialBasis::cached(t, n)`.
#[derive(Clone, Debug)]
pub struct ConditionMatrix {
    pub degree: usize,
    pub rows: Vec<ConditionRow>,
    pub matrix: IntMatrix,
}

impl ConditionMatrix {
    pub fn build(z: &FatPointScheme, t: usize) -> Self {
        let basis = MonomialBasis::cached(t, z.n);
        let mut labels = Vec::new();
        let mut data = Vec::new();
        for (i, (p, &m)) in z.points.iter().zip(&z.mults).enumerate() {
            let order = condition_order(m, t);
            let alphas = MonomialBasis::new(order, z.n + 1);
            let rows = derivative_rows(&p.integer_coords(), order, &basis);
            for (alpha, row) in alphas.exponents().iter().zip(rows) {
                labels.push(ConditionRow {
                    point: i,
                    alpha: alpha.clone(),
                });
                data.push(row);
            }
        }
        let matrix = IntMatrix::from_rows(basis.len(), data).expect("rows have basis length");
        Self {
            degree: t,
            rows: labels,
            matrix,
        }
    }

    pub fn rank(&self) -> usize {
        self.matrix.rank()
    }
}

/// Condition matrix in a frame where some points are coordinate points:
/// those contribute unit rows, recorded as eliminated columns, and the
/// others contribute ordinary rows in `residual`.
#[derive(Clone, Debug)]
pub(crate) struct ReducedConditions {
    pub basis: Arc<MonomialBasis>,
    pub unit: Vec<bool>,
    pub residual: IntMatrix,
}

impl ReducedConditions {
    /// `points` must already be expressed in the working frame.
    pub fn build(n: usize, points: &[ProjPoint], mults: &[u32], t: usize) -> Self {
        let basis = MonomialBasis::cached(t, n);
        let mut unit = vec![false; basis.len()];
        let mut data = Vec::new();
        for (p, &m) in points.iter().zip(mults) {
            let order = condition_order(m, t);
            match p.coordinate_index() {
                Some(k) => {
                    let threshold = (t - order) as u32;
                    for (c, beta) in basis.exponents().iter().enumerate() {
                        if beta[k] >= threshold {
                            unit[c] = true;
                        }
                    }
                }
                None => data.extend(derivative_rows(&p.integer_coords(), order, &basis)),
            }
        }
        let residual = IntMatrix::from_rows(basis.len(), data).expect("rows have basis length");
        Self {
            basis,
            unit,
            residual,
        }
    }

    pub fn rank(&self) -> usize {
        let all: Vec<usize> = (0..self.basis.len()).collect();
        self.rank_on(&all)
    }

    /// Rank of the condition matrix restricted to the columns `cols`.
    pub fn rank_on(&self, cols: &[usize]) -> usize {
        let (killed, free): (Vec<usize>, Vec<usize>) = cols.iter().partition(|&&c| self.unit[c]);
        if free.is_empty() || self.residual.rows() == 0 {
            return killed.len();
        }
        killed.len() + self.residual.select_columns(&free).rank()
    }

    /// For every test column, whether the corresponding column of the
    /// condition matrix lies in the span of the columns `span`.
    pub fn columns_in_span(&self, span: &[usize], tests: &[usize]) -> Vec<bool> {
        let free_span: Vec<usize> = span.iter().copied().filter(|&c| !self.unit[c]).collect();
        let candidates: Vec<usize> = tests.iter().copied().filter(|&c| !self.unit[c]).collect();
        let verdicts = if self.residual.rows() == 0 {
            vec![true; candidates.len()]
        } else {
            self.residual.columns_in_span(&free_span, &candidates)
        };
        let mut it = verdicts.into_iter();
        tests
            .iter()
            .map(|&c| {
                if span.contains(&c) {
                    // keep the iterator aligned with `candidates`
                    if !self.unit[c] {
                        it.next();
                    }
                    true
                } else if self.unit[c] {
                    false
                } else {
                    it.next().expect("one verdict per candidate")
                }
            })
            .collect()
    }
}

/// The scheme expressed in a frame sending a maximal independent subset
/// of its points to coordinate points.
#[derive(Clone, Debug)]
pub(crate) struct Framed {
    pub n: usize,
    pub points: Vec<ProjPoint>,
    pub mults: Vec<u32>,
}

impl Framed {
    pub fn new(z: &FatPointScheme) -> Self {
        let (change, _) = coordinate_frame(z.n, &z.points);
        Self {
            n: z.n,
            points: z.points.iter().map(|p| change.point(p)).collect(),
            mults: z.mults.clone(),
        }
    }

    pub fn conditions(&self, t: usize) -> ReducedConditions {
        ReducedConditions::build(self.n, &self.points, &self.mults, t)
    }
}

/// H_Z(t) = dim_K (R/I)_t.
pub fn hilbert(z: &FatPointScheme, t: usize) -> usize {
    Framed::new(z).conditions(t).rank()
}

/// H_Z(t) as the rank of the unreduced condition matrix in the given
/// coordinates. Slower; kept as an independent route.
pub fn hilbert_direct(z: &FatPointScheme, t: usize) -> usize {
    ConditionMatrix::build(z, t).rank()
}

/// H_Z(0), H_Z(1), ... up to and including the first degree reaching e(Z).
pub fn hilbert_table(z: &FatPointScheme) -> Result<Vec<usize>> {
    let reg = reg_index(z)?;
    let framed = Framed::new(z);
    Ok((0..=reg).map(|t| framed.conditions(t).rank()).collect())
}

/// Upper end of the regularity search: sum of multiplicities minus one.
pub fn reg_search_cap(z: &FatPointScheme) -> usize {
    z.total_mult() - 1
}

/// reg(Z) = min { t : H_Z(t) = e(Z) }.
pub fn reg_index(z: &FatPointScheme) -> Result<usize> {
    let e = multiplicity(z);
    let cap = reg_search_cap(z);
    let framed = Framed::new(z);
    let start = z.max_mult() as usize - 1;
    (start..=cap)
        .find(|&t| framed.conditions(t).rank() == e)
        .ok_or(Error::RegularityCapExceeded { cap })
}

/// A basis of I_t, the degree-t forms vanishing to order m_i at each P_i.
pub fn ideal_basis(z: &FatPointScheme, t: usize) -> Vec<Form> {
    let cm = ConditionMatrix::build(z, t);
    linalg::kernel_basis(&cm.matrix.to_rational())
        .into_iter()
        .map(|v| Form::from_coeffs(z.n, t, v).expect("kernel vector has basis length"))
        .collect()
}

/// Whether `f` lies in I: every partial of order min(m_i - 1, deg f)
/// vanishes at every P_i.
pub fn member_fat_ideal(f: &Form, z: &FatPointScheme) -> Result<bool> {
    if f.n() != z.n {
        return Err(Error::DimensionMismatch {
            expected: z.n,
            found: f.n(),
        });
    }
    if f.is_zero() {
        return Ok(true);
    }
    let coeffs = crate::geometry::primitive_integers(f.coeffs());
    let basis = MonomialBasis::cached(f.degree(), z.n);
    for (p, &m) in z.points.iter().zip(&z.mults) {
        let order = condition_order(m, f.degree());
        for row in derivative_rows(&p.integer_coords(), order, &basis) {
            let value = row
                .iter()
                .zip(&coeffs)
                .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                .fold(BigInt::zero(), |acc, (a, b)| acc + a * b);
            if !value.is_zero() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The rational value of a form at a point representative.
pub fn eval_form(f: &Form, p: &ProjPoint) -> Rational {
    let basis = MonomialBasis::cached(f.degree(), f.n());
    f.coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .fold(Rational::zero(), |acc, (i, c)| {
            let mut term = c.clone();
            for (x, &e) in p.coords().iter().zip(basis.exponent(i)) {
                for _ in 0..e {
                    term *= x;
                }
            }
            acc + term
        })
}

/// The condition matrix as a rational matrix (for external checks).
pub fn condition_matrix(z: &FatPointScheme, t: usize) -> Matrix {
    ConditionMatrix::build(z, t).matrix.to_rational()
}
