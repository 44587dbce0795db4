//! The artinian quotient R/(J + p^a) for a fat point scheme J and a point
//! P outside it, in coordinates where P = (1, 0, ..., 0) and p = (X_1..X_n).
//!
//! Writing C_t for the degree-t condition matrix of J, the image of R_t
//! under C_t is R_t/J_t, and (p^a)_t is spanned by the monomials whose
//! X_1..X_n-degree is at least a. Hence
//!
//!   dim (R/(J + p^a))_t = rank C_t - rank C_t[:, high_a]
//!
//! and X_0^(b-i) M lies in J_b + (p^(i+1))_b exactly when its column of C_b
//! lies in the span of the columns high_(i+1).
//!
//! The regularity of the quotient is taken as the least t with
//! (R/(J + p^a))_t = 0, one more than its top nonzero degree. With this
//! convention reg(R/(J cap p^a)) = max{a - 1, reg(R/J), reg(R/(J + p^a))}
//! and reg(R/(J + p^a)) <= b is equivalent to the monomial criterion below.
//!
//! Any change sending P to (1, 0, ..., 0) gives the same answers, so the
//! frame also moves independent points of J to coordinate points.

use crate::error::{Error, Result};
use crate::geometry::{coordinate_change_to_origin, coordinate_frame, ProjPoint};
use crate::linalg::{self, Rational};
use crate::monomial::{binomial, MonomialBasis};
use crate::scheme::{ideal_basis, FatPointScheme, ReducedConditions};

use num_traits::{One, Zero};

fn validate(j: &FatPointScheme, p: &ProjPoint, a: u32) -> Result<()> {
    if p.ambient_n() != j.n() {
        return Err(Error::DimensionMismatch {
            expected: j.n(),
            found: p.ambient_n(),
        });
    }
    if let Some(index) = j.position(p) {
        return Err(Error::PointCoincides { index });
    }
    if a == 0 {
        return Err(Error::Precondition("order a must be at least 1".into()));
    }
    Ok(())
}

/// Points of J in a frame where P = e_0.
fn framed_points(j: &FatPointScheme, p: &ProjPoint) -> Vec<ProjPoint> {
    let mut all = vec![p.clone()];
    all.extend(j.points().iter().cloned());
    let (change, chosen) = coordinate_frame(j.n(), &all);
    debug_assert_eq!(chosen.first(), Some(&0));
    j.points().iter().map(|q| change.point(q)).collect()
}

/// Columns of the degree-t basis whose X_1..X_n-degree is at least `a`.
fn high_columns(basis: &MonomialBasis, a: u32) -> Vec<usize> {
    let t = basis.degree() as u32;
    (0..basis.len())
        .filter(|&c| t - basis.exponent(c)[0] >= a)
        .collect()
}

/// Upper end of the degree search for the artinian quotient.
pub fn artinian_search_cap(j: &FatPointScheme, a: u32) -> usize {
    j.total_mult() + a as usize
}

/// dim (R/(J + p^a))_t for t = 0, 1, ... up to and including the first
/// zero. The quotient is artinian, so once a degree vanishes all later ones
/// do too.
pub fn artinian_hilbert(j: &FatPointScheme, p: &ProjPoint, a: u32) -> Result<Vec<usize>> {
    validate(j, p, a)?;
    let points = framed_points(j, p);
    let cap = artinian_search_cap(j, a);
    let mut dims = Vec::new();
    for t in 0..=cap + 1 {
        let rc = ReducedConditions::build(j.n(), &points, j.mults(), t);
        let high = high_columns(&rc.basis, a);
        let d = rc.rank() - rc.rank_on(&high);
        dims.push(d);
        if d == 0 {
            return Ok(dims);
        }
    }
    Err(Error::RegularityCapExceeded { cap })
}

/// reg(R/(J + p^a)), the first degree in which the quotient vanishes.
pub fn reg_artinian_quotient(j: &FatPointScheme, p: &ProjPoint, a: u32) -> Result<usize> {
    let dims = artinian_hilbert(j, p, a)?;
    Ok(dims.len() - 1)
}

/// Whether X_0^(b-i) M lies in J_b + (p^(i+1))_b for every i < a and every
/// monomial M of degree i in X_1..X_n. True exactly when
/// reg(R/(J + p^a)) <= b.
pub fn monomial_criterion(j: &FatPointScheme, p: &ProjPoint, a: u32, b: usize) -> Result<bool> {
    validate(j, p, a)?;
    if b + 1 < a as usize {
        return Err(Error::Precondition(format!("degree b = {b} is below a - 1 = {}", a - 1)));
    }
    let points = framed_points(j, p);
    let rc = ReducedConditions::build(j.n(), &points, j.mults(), b);
    for i in 0..a {
        let span = high_columns(&rc.basis, i + 1);
        let tests = x0_times_monomials(&rc.basis, i);
        if !rc.columns_in_span(&span, &tests).into_iter().all(|ok| ok) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Columns of X_0^(b-i) M for all monomials M of degree i in X_1..X_n.
fn x0_times_monomials(basis: &MonomialBasis, i: u32) -> Vec<usize> {
    let b = basis.degree() as u32;
    (0..basis.len())
        .filter(|&c| basis.exponent(c)[0] == b - i)
        .collect()
}

/// Stacked-basis route: bases of J_t (kernel of the condition matrix in the
/// frame of `coordinate_change_to_origin`) together with the unit vectors
/// of (p^a)_t.
fn stacked(j: &FatPointScheme, p: &ProjPoint, a: u32, t: usize) -> (Vec<Vec<Rational>>, usize) {
    let change = coordinate_change_to_origin(p);
    let moved = j.transformed(&change);
    let basis = MonomialBasis::cached(t, j.n());
    let mut vectors: Vec<Vec<Rational>> = ideal_basis(&moved, t)
        .into_iter()
        .map(|f| f.coeffs().to_vec())
        .collect();
    for c in high_columns(&basis, a) {
        let mut e = vec![Rational::zero(); basis.len()];
        e[c] = Rational::one();
        vectors.push(e);
    }
    (vectors, basis.len())
}

/// `reg_artinian_quotient` through explicit bases of J_t + (p^a)_t.
pub fn reg_artinian_quotient_stacked(j: &FatPointScheme, p: &ProjPoint, a: u32) -> Result<usize> {
    validate(j, p, a)?;
    let cap = artinian_search_cap(j, a);
    for t in 0..=cap + 1 {
        let (vectors, len) = stacked(j, p, a, t);
        debug_assert_eq!(len, binomial(t + j.n(), j.n()));
        let dim = if vectors.is_empty() {
            0
        } else {
            linalg::rank(&linalg::Matrix::from_rows(len, vectors).expect("uniform length"))
        };
        if dim == len {
            return Ok(t);
        }
    }
    Err(Error::RegularityCapExceeded { cap })
}

/// `monomial_criterion` through explicit bases and `in_span`.
pub fn monomial_criterion_stacked(j: &FatPointScheme, p: &ProjPoint, a: u32, b: usize) -> Result<bool> {
    validate(j, p, a)?;
    if b + 1 < a as usize {
        return Err(Error::Precondition(format!("degree b = {b} is below a - 1 = {}", a - 1)));
    }
    let basis = MonomialBasis::cached(b, j.n());
    for i in 0..a {
        let (vectors, len) = stacked(j, p, i + 1, b);
        for c in x0_times_monomials(&basis, i) {
            let mut v = vec![Rational::zero(); len];
            v[c] = Rational::one();
            if !linalg::in_span(&v, &vectors)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(c: &[i64]) -> ProjPoint {
        ProjPoint::from_ints(c).unwrap()
    }

    fn scheme(points: &[&[i64]], mults: &[u32]) -> FatPointScheme {
        FatPointScheme::new(points.iter().map(|c| pt(c)).collect(), mults.to_vec()).unwrap()
    }

    #[test]
    fn single_point_order_one() {
        let j = scheme(&[&[0, 1, 0]], &[1]);
        // the quotient is K in degree 0 only
        assert_eq!(artinian_hilbert(&j, &pt(&[1, 0, 0]), 1).unwrap(), vec![1, 0]);
        assert_eq!(reg_artinian_quotient(&j, &pt(&[1, 0, 0]), 1).unwrap(), 1);
        assert_eq!(reg_artinian_quotient_stacked(&j, &pt(&[1, 0, 0]), 1).unwrap(), 1);
    }

    #[test]
    fn line_example() {
        // J = e_1 in P^1, P = e_0, a = 2: R/(X_0, X_1^2) vanishes from degree 2
        let j = scheme(&[&[0, 1]], &[1]);
        let p = pt(&[1, 0]);
        assert_eq!(artinian_hilbert(&j, &p, 2).unwrap(), vec![1, 1, 0]);
        assert_eq!(reg_artinian_quotient(&j, &p, 2).unwrap(), 2);
        assert!(monomial_criterion(&j, &p, 2, 2).unwrap());
        assert!(!monomial_criterion(&j, &p, 2, 1).unwrap());
        assert!(matches!(monomial_criterion(&j, &p, 2, 0), Err(Error::Precondition(_))));
        // a = 1: only X_0^b needs checking, and X_0 vanishes at e_1
        assert!(monomial_criterion(&j, &p, 1, 0).is_ok_and(|ok| !ok));
        assert!(monomial_criterion(&j, &p, 1, 1).unwrap());
    }

    #[test]
    fn coincident_point_rejected() {
        let j = scheme(&[&[1, 2, 3]], &[2]);
        assert_eq!(
            reg_artinian_quotient(&j, &pt(&[2, 4, 6]), 1),
            Err(Error::PointCoincides { index: 0 })
        );
        assert!(matches!(
            monomial_criterion(&j, &pt(&[1, 0, 0]), 3, 1),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn routes_agree() {
        let j = scheme(&[&[1, 2, 3], &[2, -1, 1], &[0, 1, 4]], &[2, 1, 3]);
        let p = pt(&[1, 1, 1]);
        for a in 1..4 {
            let fast = reg_artinian_quotient(&j, &p, a).unwrap();
            assert_eq!(fast, reg_artinian_quotient_stacked(&j, &p, a).unwrap(), "a = {a}");
            for b in (a as usize - 1)..fast + 2 {
                let expected = b >= fast;
                assert_eq!(monomial_criterion(&j, &p, a, b).unwrap(), expected, "a = {a}, b = {b}");
                assert_eq!(monomial_criterion_stacked(&j, &p, a, b).unwrap(), expected, "a = {a}, b = {b}");
            }
        }
    }

    #[test]
    fn saturation_far_above() {
        let j = scheme(&[&[1, 0, 2], &[3, 1, 1]], &[2, 2]);
        let p = pt(&[0, 1, 5]);
        assert!(monomial_criterion(&j, &p, 2, j.total_mult()).unwrap());
    }
}
