//! Points, flats and hyperplanes of projective space over the rationals.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, denominator_lcm, dot, rat, Matrix, Rational};

/// How many random directions a seeded construction tries per step.
pub const EXTENSION_RETRIES: usize = 32;

fn normalize_first_nonzero(mut coords: Vec<Rational>) -> Option<Vec<Rational>> {
    let lead = coords.iter().find(|x| !x.is_zero())?.clone();
    if !lead.is_one() {
        for x in coords.iter_mut() {
            *x /= &lead;
        }
    }
    Some(coords)
}

/// Primitive integer vector proportional to `v` (first nonzero entry keeps its sign).
pub fn primitive_integers(v: &[Rational]) -> Vec<BigInt> {
    let l = denominator_lcm(v);
    let ints: Vec<BigInt> = v.iter().map(|x| x.numer() * (&l / x.denom())).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() || g.is_one() {
        ints
    } else {
        ints.into_iter().map(|x| x / &g).collect()
    }
}

/// A point of P^n, stored with its first nonzero coordinate equal to 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProjPoint {
    coords: Vec<Rational>,
}

impl ProjPoint {
    pub fn new(coords: Vec<Rational>) -> Result<Self> {
        normalize_first_nonzero(coords)
            .map(|coords| Self { coords })
            .ok_or(Error::ZeroPoint)
    }

    pub fn from_ints(coords: &[i64]) -> Result<Self> {
        Self::new(coords.iter().map(|&x| rat(x)).collect())
    }

    pub fn from_bigints(coords: &[BigInt]) -> Result<Self> {
        Self::new(coords.iter().cloned().map(Rational::from_integer).collect())
    }

    /// The k-th coordinate point of P^n.
    pub fn unit(n: usize, k: usize) -> Self {
        let mut coords = vec![Rational::zero(); n + 1];
        coords[k] = Rational::one();
        Self { coords }
    }

    /// Ambient dimension n.
    pub fn ambient_n(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn coords(&self) -> &[Rational] {
        &self.coords
    }

    /// Primitive integer representative.
    pub fn integer_coords(&self) -> Vec<BigInt> {
        primitive_integers(&self.coords)
    }

    /// Index `k` when this point is the coordinate point e_k.
    pub fn coordinate_index(&self) -> Option<usize> {
        let mut nonzero = self.coords.iter().enumerate().filter(|(_, x)| !x.is_zero());
        let (k, _) = nonzero.next()?;
        nonzero.next().is_none().then_some(k)
    }
}

impl fmt::Display for ProjPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.integer_coords().iter().enumerate() {
            if i > 0 {
                write!(f, ":")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

/// A linear subspace of P^n. The cone basis is kept in reduced row echelon
/// form, so equal flats compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Flat {
    ambient_n: usize,
    basis: Vec<Vec<Rational>>,
}

impl Flat {
    fn from_vectors(ambient_n: usize, vectors: Vec<Vec<Rational>>) -> Result<Self> {
        let m = Matrix::from_rows(ambient_n + 1, vectors)?;
        let reduced = linalg::rref(&m);
        if reduced.rank == 0 {
            return Err(Error::EmptyInput("flat spanned by no nonzero vector"));
        }
        let basis = (0..reduced.rank).map(|r| reduced.rref.row(r).to_vec()).collect();
        Ok(Self { ambient_n, basis })
    }

    /// The whole space P^n.
    pub fn whole(n: usize) -> Self {
        Self {
            ambient_n: n,
            basis: (0..=n)
                .map(|k| ProjPoint::unit(n, k).coords)
                .collect(),
        }
    }

    pub fn ambient_n(&self) -> usize {
        self.ambient_n
    }

    pub fn dim(&self) -> usize {
        self.basis.len() - 1
    }

    pub fn cone_basis(&self) -> &[Vec<Rational>] {
        &self.basis
    }

    /// The basis vectors as points; they span the flat.
    pub fn spanning_points(&self) -> Vec<ProjPoint> {
        self.basis
            .iter()
            .map(|v| ProjPoint::new(v.clone()).expect("basis vectors are nonzero"))
            .collect()
    }

    fn contains_vector(&self, v: &[Rational]) -> bool {
        linalg::in_span(v, &self.basis).expect("ambient dimensions checked by caller")
    }

    /// Smallest flat containing both.
    pub fn join(&self, other: &Flat) -> Result<Flat> {
        check_dim(self.ambient_n, other.ambient_n)?;
        Flat::from_vectors(
            self.ambient_n,
            self.basis.iter().chain(&other.basis).cloned().collect(),
        )
    }

    pub fn contains_flat(&self, other: &Flat) -> bool {
        other.basis.iter().all(|v| self.contains_vector(v))
    }

    /// Linear forms cutting out the flat (a basis of its annihilator).
    pub fn equations(&self) -> Vec<LinearForm> {
        let m = Matrix::from_rows(self.ambient_n + 1, self.basis.clone())
            .expect("basis rows have ambient length");
        linalg::kernel_basis(&m)
            .into_iter()
            .map(|v| LinearForm::new(v).expect("kernel vectors are nonzero"))
            .collect()
    }
}

impl fmt::Display for Flat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<")?;
        for (i, p) in self.spanning_points().iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ">")
    }
}

/// A hyperplane, identified with its defining linear form. Coefficients are
/// scaled so the first nonzero one is 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct LinearForm {
    coeffs: Vec<Rational>,
}

impl LinearForm {
    pub fn new(coeffs: Vec<Rational>) -> Result<Self> {
        normalize_first_nonzero(coeffs)
            .map(|coeffs| Self { coeffs })
            .ok_or(Error::ZeroPoint)
    }

    pub fn from_ints(coeffs: &[i64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&x| rat(x)).collect())
    }

    /// The coordinate form X_k.
    pub fn coordinate(n: usize, k: usize) -> Self {
        Self {
            coeffs: ProjPoint::unit(n, k).coords,
        }
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn ambient_n(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Value at the canonical representative of `p`, so only its vanishing
    /// is meaningful.
    pub fn eval(&self, p: &ProjPoint) -> Rational {
        dot(&self.coeffs, &p.coords)
    }

    pub fn vanishes_at(&self, p: &ProjPoint) -> bool {
        self.eval(p).is_zero()
    }
}

impl TryFrom<Vec<String>> for LinearForm {
    type Error = Error;

    fn try_from(raw: Vec<String>) -> Result<Self> {
        let coeffs = raw
            .iter()
            .enumerate()
            .map(|(i, s)| {
                parse_rational(s).ok_or_else(|| Error::Input {
                    path: format!("coefficient[{i}]"),
                    message: format!("invalid rational {s:?}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        LinearForm::new(coeffs)
    }
}

impl From<LinearForm> for Vec<String> {
    fn from(form: LinearForm) -> Self {
        primitive_integers(&form.coeffs)
            .iter()
            .map(ToString::to_string)
            .collect()
    }
}

/// Parses `"7"`, `"-3"` or `"p/q"`.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().ok()?;
            let q: BigInt = q.trim().parse().ok()?;
            (!q.is_zero()).then(|| Rational::new(p, q))
        }
        None => s.parse::<BigInt>().ok().map(Rational::from_integer),
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Smallest flat containing all the points.
pub fn span(points: &[ProjPoint]) -> Result<Flat> {
    let first = points.first().ok_or(Error::EmptyInput("span of no points"))?;
    let n = first.ambient_n();
    for p in points {
        check_dim(n, p.ambient_n())?;
    }
    Flat::from_vectors(n, points.iter().map(|p| p.coords.clone()).collect())
}

/// Dimension of the span (rank of the coordinate matrix minus one).
pub fn span_dim(points: &[ProjPoint]) -> Result<usize> {
    Ok(span(points)?.dim())
}

/// Rank of the coordinate matrix of `points` (0 for no points).
pub fn point_rank(points: &[&ProjPoint]) -> usize {
    match points.first() {
        None => 0,
        Some(p) => {
            let m = Matrix::from_rows(
                p.ambient_n() + 1,
                points.iter().map(|q| q.coords.clone()),
            )
            .expect("points share an ambient dimension");
            linalg::rank(&m)
        }
    }
}

pub fn flat_contains(f: &Flat, p: &ProjPoint) -> Result<bool> {
    check_dim(f.ambient_n, p.ambient_n())?;
    Ok(f.contains_vector(&p.coords))
}

/// Calls `visit` on every `k`-subset of `0..n` in lexicographic order and
/// stops early when it returns `true`. Returns whether it stopped early.
pub fn any_subset(n: usize, k: usize, mut visit: impl FnMut(&[usize]) -> bool) -> bool {
    if k > n {
        return false;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        if visit(&idx) {
            return true;
        }
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return false;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// True iff all points lie on an r-flat and no j+2 of them lie on a j-flat
/// for any j < r.
pub fn general_position_check(points: &[ProjPoint], r: usize) -> bool {
    if points.is_empty() {
        return true;
    }
    if span_dim(points).expect("nonempty") > r {
        return false;
    }
    // no j+2 on a j-flat for j < r  <=>  every subset of size <= r+1 is independent
    let k = (r + 1).min(points.len());
    !any_subset(points.len(), k, |idx| {
        let sub: Vec<&ProjPoint> = idx.iter().map(|&i| &points[i]).collect();
        point_rank(&sub) < k
    })
}

/// The least h such that some h-flat holds h+2 of the points, restricted to
/// h below the dimension of their span; `None` when the points are in
/// general position in their span.
pub fn degeneracy_k(points: &[ProjPoint]) -> Option<usize> {
    let d = span_dim(points).ok()?;
    (0..d).find(|&h| {
        any_subset(points.len(), h + 2, |idx| {
            let sub: Vec<&ProjPoint> = idx.iter().map(|&i| &points[i]).collect();
            point_rank(&sub) <= h + 1
        })
    })
}

/// A hyperplane containing `f` and missing `avoid`. Among the canonical
/// equations of `f`, the first one not vanishing at `avoid` is returned.
pub fn hyperplane_containing_avoiding(f: &Flat, avoid: &ProjPoint) -> Result<LinearForm> {
    if flat_contains(f, avoid)? {
        return Err(Error::AvoidOnFlat);
    }
    f.equations()
        .into_iter()
        .find(|h| !h.vanishes_at(avoid))
        .ok_or(Error::AvoidOnFlat)
}

/// Extends `f` to a flat of dimension `target_dim` that still misses
/// `avoid`, adding seeded random small-integer directions one at a time.
pub fn extend_flat_avoiding(f: &Flat, target_dim: usize, avoid: &ProjPoint, seed: u64) -> Result<Flat> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    extend_flat_avoiding_with(f, target_dim, avoid, &mut rng)
}

pub(crate) fn extend_flat_avoiding_with(
    f: &Flat,
    target_dim: usize,
    avoid: &ProjPoint,
    rng: &mut impl Rng,
) -> Result<Flat> {
    let n = f.ambient_n;
    check_dim(n, avoid.ambient_n())?;
    if flat_contains(f, avoid)? {
        return Err(Error::AvoidOnFlat);
    }
    if target_dim < f.dim() {
        return Err(Error::ImpossibleGeometry(format!(
            "cannot shrink a {}-flat to dimension {target_dim}",
            f.dim()
        )));
    }
    if target_dim >= n && target_dim > f.dim() {
        return Err(Error::ImpossibleGeometry(format!(
            "a {target_dim}-flat of P^{n} cannot avoid a point"
        )));
    }
    let mut current = f.clone();
    while current.dim() < target_dim {
        let mut next = None;
        for _ in 0..EXTENSION_RETRIES {
            let v: Vec<Rational> = (0..=n).map(|_| rat(rng.random_range(-5..=5))).collect();
            if v.iter().all(Zero::is_zero) {
                continue;
            }
            let mut vectors = current.basis.clone();
            vectors.push(v);
            let candidate = Flat::from_vectors(n, vectors)?;
            if candidate.dim() == current.dim() + 1 && !candidate.contains_vector(&avoid.coords) {
                next = Some(candidate);
                break;
            }
        }
        current = next.ok_or_else(|| Error::RetriesExhausted {
            what: format!("extending a {}-flat avoiding a point", current.dim()),
            attempts: EXTENSION_RETRIES,
        })?;
    }
    Ok(current)
}

/// An invertible change of homogeneous coordinates `y = A x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoordinateChange {
    forward: Matrix,
    inverse: Matrix,
}

impl CoordinateChange {
    pub fn new(forward: Matrix) -> Result<Self> {
        let inverse = forward.inverse().ok_or_else(|| {
            Error::ImpossibleGeometry("coordinate change matrix is singular".into())
        })?;
        Ok(Self { forward, inverse })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            forward: Matrix::identity(n + 1),
            inverse: Matrix::identity(n + 1),
        }
    }

    /// The change whose inverse has the given columns: column k is sent to e_k.
    fn from_columns(n: usize, columns: &[Vec<Rational>]) -> Result<Self> {
        let inverse = Matrix::from_rows(n + 1, columns.iter().cloned())?.transpose();
        let forward = inverse.inverse().ok_or_else(|| {
            Error::ImpossibleGeometry("frame vectors are dependent".into())
        })?;
        Ok(Self { forward, inverse })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.forward
    }

    pub fn inverse_matrix(&self) -> &Matrix {
        &self.inverse
    }

    pub fn ambient_n(&self) -> usize {
        self.forward.rows() - 1
    }

    pub fn point(&self, p: &ProjPoint) -> ProjPoint {
        ProjPoint::new(self.forward.mul_vec(&p.coords).expect("ambient dimension"))
            .expect("invertible maps keep points nonzero")
    }

    /// The form in new coordinates vanishing exactly on the image hyperplane.
    pub fn form(&self, h: &LinearForm) -> LinearForm {
        LinearForm::new(self.inverse.vec_mul(&h.coeffs).expect("ambient dimension"))
            .expect("invertible maps keep forms nonzero")
    }

    /// The linear form X_k of the new coordinates, written in the old ones.
    pub fn new_coordinate_form(&self, k: usize) -> Vec<Rational> {
        self.forward.row(k).to_vec()
    }

    pub fn then(&self, next: &CoordinateChange) -> CoordinateChange {
        CoordinateChange {
            forward: next.forward.mul(&self.forward).expect("same ambient"),
            inverse: self.inverse.mul(&next.inverse).expect("same ambient"),
        }
    }
}

/// A change sending `p` to (1, 0, ..., 0). When the first nonzero
/// coordinate of `p` sits at index k, the inverse matrix has columns
/// p, then the unit vectors e_j for j != k in increasing order.
pub fn coordinate_change_to_origin(p: &ProjPoint) -> CoordinateChange {
    let n = p.ambient_n();
    let k = p
        .coords
        .iter()
        .position(|x| !x.is_zero())
        .expect("points are nonzero");
    let mut columns = vec![p.coords.clone()];
    columns.extend(
        (0..=n)
            .filter(|&j| j != k)
            .map(|j| ProjPoint::unit(n, j).coords),
    );
    CoordinateChange::from_columns(n, &columns).expect("p and the other unit vectors form a basis")
}

/// A change sending a maximal independent prefix-greedy selection of
/// `points` to the coordinate points e_0, e_1, ... in selection order.
/// Returns the change and the selected indices.
pub fn coordinate_frame(n: usize, points: &[ProjPoint]) -> (CoordinateChange, Vec<usize>) {
    let mut chosen: Vec<usize> = Vec::new();
    let mut columns: Vec<Vec<Rational>> = Vec::new();
    for (i, p) in points.iter().enumerate() {
        if columns.len() == n + 1 {
            break;
        }
        if !linalg::in_span(&p.coords, &columns).expect("same ambient") {
            columns.push(p.coords.clone());
            chosen.push(i);
        }
    }
    if chosen.is_empty() {
        return (CoordinateChange::identity(n), chosen);
    }
    for k in 0..=n {
        if columns.len() == n + 1 {
            break;
        }
        let e = ProjPoint::unit(n, k).coords;
        if !linalg::in_span(&e, &columns).expect("same ambient") {
            columns.push(e);
        }
    }
    let change = CoordinateChange::from_columns(n, &columns).expect("columns were chosen independent");
    (change, chosen)
}

/// A seeded random invertible integer change of coordinates, entries in
/// `-height..=height`.
pub fn random_coordinate_change(n: usize, height: i64, rng: &mut impl Rng) -> CoordinateChange {
    loop {
        let rows: Vec<Vec<Rational>> = (0..=n)
            .map(|_| (0..=n).map(|_| rat(rng.random_range(-height..=height))).collect())
            .collect();
        let m = Matrix::from_rows(n + 1, rows).expect("square");
        if let Ok(change) = CoordinateChange::new(m) {
            return change;
        }
    }
}
