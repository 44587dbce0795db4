//! Worked examples with independently computed expected values.

mod common;

use rand::Rng;

use common::*;
use fatpoints::artinian::{monomial_criterion, reg_artinian_quotient};
use fatpoints::constructions::{
    build_certificate, distribute_flats, distribution_threshold, recursion_check, theorem_check, verify_certificate,
};
use fatpoints::geometry::{
    coordinate_change_to_origin, degeneracy_k, extend_flat_avoiding, flat_contains, general_position_check,
    hyperplane_containing_avoiding, span,
};
use fatpoints::harness::batch::batch_check;
use fatpoints::harness::generate::{generate, satisfies, MultSpec, Pattern, PatternSpec};
use fatpoints::linalg::{in_span, rank, rank_mod_p};
use fatpoints::scheme::{ideal_basis, member_fat_ideal, multiplicity, reg_index};
use fatpoints::segre::{segre_bound, t_value};
use fatpoints::{FatPointScheme, Form, Matrix, ProjPoint, Rational};

fn pt(c: &[i64]) -> ProjPoint {
    ProjPoint::from_ints(c).unwrap()
}

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    (u128::from(a) * u128::from(b) % u128::from(m)) as u64
}

fn powmod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(acc, b, m);
        }
        b = mulmod(b, b, m);
        e >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for 64-bit inputs.
fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    if let Some(&b) = BASES.iter().find(|&&b| n.is_multiple_of(b)) {
        return n == b;
    }
    let (mut d, mut r) = (n - 1, 0);
    while d % 2 == 0 {
        d /= 2;
        r += 1;
    }
    'bases: for a in BASES {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..r {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

fn to_matrix(rows: &[Vec<Q>]) -> Matrix {
    Matrix::from_rows(rows[0].len(), rows.iter().cloned()).unwrap()
}

#[test]
fn rank_matches_minor_enumeration_up_to_6x9() {
    let mut r = rng(1);
    for k in 0..6 {
        let rows = if k % 2 == 0 {
            random_matrix(6, 9, &mut r)
        } else {
            low_rank_matrix(6, 9, 2 + k / 2, &mut r)
        };
        assert_eq!(rank(&to_matrix(&rows)), minor_rank(&rows), "matrix {k}");
    }
}

#[test]
fn in_span_matches_rank_comparison() {
    let mut r = rng(2);
    for _ in 0..40 {
        let basis = random_matrix(r.random_range(1..=4), 5, &mut r);
        let v = if r.random_bool(0.5) {
            // a combination of the basis
            let c: Vec<Q> = (0..basis.len()).map(|_| q(r.random_range(-3..=3))).collect();
            (0..5).map(|j| (0..basis.len()).map(|i| &c[i] * &basis[i][j]).sum()).collect()
        } else {
            random_matrix(1, 5, &mut r).remove(0)
        };
        let mut with = basis.clone();
        with.push(v.clone());
        let want = gauss_rank(&with) == gauss_rank(&basis);
        assert_eq!(in_span(&v, &basis).unwrap(), want);
    }
}

#[test]
fn modular_rank_with_random_62_bit_primes() {
    let mut r = rng(3);
    let mut primes = Vec::new();
    while primes.len() < 150 {
        let candidate = r.random_range((1u64 << 61)..(1u64 << 62)) | 1;
        if is_prime(candidate) {
            primes.push(candidate);
        }
    }
    for trial in 0..50 {
        let rows = if trial % 3 == 0 {
            low_rank_matrix(5, 6, 2, &mut r)
        } else {
            random_matrix(r.random_range(1..=6), r.random_range(1..=6), &mut r)
        };
        let m = to_matrix(&rows);
        let exact = gauss_rank(&rows);
        for &p in &primes[3 * trial..3 * trial + 3] {
            assert_eq!(rank_mod_p(&m, p).unwrap(), exact, "trial {trial}, p = {p}");
        }
    }
    let p = primes[0];
    let degenerate = Matrix::from_rows(2, [vec![Rational::from_integer(p.into()), q(0)], vec![q(0), q(1)]]).unwrap();
    assert_eq!(rank_mod_p(&degenerate, p).unwrap(), 1);
    assert_eq!(rank(&degenerate), 2);
}

#[test]
fn four_points_on_a_random_plane() {
    let mut r = rng(4);
    for _ in 0..20 {
        let basis: Vec<Vec<i64>> = loop {
            let b: Vec<Vec<i64>> = (0..3).map(|_| (0..4).map(|_| r.random_range(-5..=5)).collect()).collect();
            let rows: Vec<Vec<Q>> = b.iter().map(|v| v.iter().map(|&x| q(x)).collect()).collect();
            if gauss_rank(&rows) == 3 {
                break b;
            }
        };
        let pts: Vec<ProjPoint> = (0..4)
            .map(|_| loop {
                let c: Vec<i64> = (0..3).map(|_| r.random_range(-4..=4)).collect();
                let v: Vec<i64> = (0..4).map(|k| (0..3).map(|i| c[i] * basis[i][k]).sum()).collect();
                if let Ok(p) = ProjPoint::from_ints(&v) {
                    break p;
                }
            })
            .collect();
        let refs: Vec<&ProjPoint> = pts.iter().collect();
        assert_eq!(span(&pts).unwrap().dim() + 1, point_rank_oracle(&refs));
        assert!(span(&pts).unwrap().dim() <= 2);
    }
    let plane = [pt(&[1, 0, 0, 0]), pt(&[0, 1, 0, 0]), pt(&[0, 0, 1, 0]), pt(&[1, 2, 3, 0])];
    assert_eq!(span(&plane).unwrap().dim(), 2);
}

#[test]
fn flat_contains_matches_in_span() {
    let mut r = rng(5);
    for _ in 0..40 {
        let n = r.random_range(2..=4);
        let k = r.random_range(1..=n);
        let mut gens: Vec<ProjPoint> = (0..k).map(|_| random_point(n, 3, &mut r)).collect();
        let f = span(&gens).unwrap();
        let p = if r.random_bool(0.5) { random_point(n, 3, &mut r) } else { gens.pop().unwrap() };
        let basis: Vec<Vec<Q>> = f.cone_basis().to_vec();
        assert_eq!(flat_contains(&f, &p).unwrap(), in_span(p.coords(), &basis).unwrap());
    }
}

/// No j + 2 of the points on a j-flat, by listing every subset.
fn general_by_subsets(points: &[ProjPoint], r: usize) -> bool {
    let s = points.len();
    let all: Vec<&ProjPoint> = points.iter().collect();
    if point_rank_oracle(&all) > r + 1 {
        return false;
    }
    (1u32..1 << s).all(|mask| {
        let sub: Vec<&ProjPoint> = (0..s).filter(|i| mask >> i & 1 == 1).map(|i| &points[i]).collect();
        let size = sub.len();
        let rank = point_rank_oracle(&sub);
        // size points on a (rank - 1)-flat are fine unless size > rank with rank - 1 < r
        !(size > rank && rank <= r)
    })
}

#[test]
fn six_random_points_in_p3_are_general() {
    let mut r = rng(6);
    let mut general = 0;
    for _ in 0..20 {
        let z = random_scheme(3, 6, 1, 50, &mut r);
        let want = general_by_subsets(z.points(), 3);
        assert_eq!(general_position_check(z.points(), 3), want);
        general += usize::from(want);
    }
    assert!(general >= 19);
    let line = [pt(&[1, 0, 0]), pt(&[0, 1, 0]), pt(&[1, 1, 0])];
    assert!(!general_position_check(&line, 2));
    assert!(!general_by_subsets(&line, 2));
}

#[test]
fn degenerate_pattern_plants_its_k() {
    for (n, s, k) in [(3, 3, 1), (3, 3, 2), (4, 4, 2), (4, 4, 3), (4, 3, 1)] {
        let spec = PatternSpec { k: Some(k), ..PatternSpec::new(Pattern::Degenerate, n, s, MultSpec::Equal(2), 11) };
        let z = generate(&spec).unwrap();
        assert_eq!(degeneracy_k(z.points()), Some(k), "n={n} s={s}");
        // the minimal h with h + 2 points on an h-flat, by brute force
        let pts = z.points();
        let brute = (1..=n).find(|&h| {
            (1u32..1 << pts.len()).any(|mask| {
                let sub: Vec<&ProjPoint> = (0..pts.len()).filter(|i| mask >> i & 1 == 1).map(|i| &pts[i]).collect();
                sub.len() == h + 2 && point_rank_oracle(&sub) <= h + 1
            })
        });
        assert_eq!(brute, Some(k));
    }
}

#[test]
fn hyperplanes_and_extensions_avoid_the_point() {
    let mut r = rng(7);
    let mut done = 0;
    for seed in 0..200u64 {
        let n = r.random_range(2..=4);
        let k = r.random_range(1..=n.min(3));
        let gens: Vec<ProjPoint> = (0..k).map(|_| random_point(n, 4, &mut r)).collect();
        let avoid = random_point(n, 4, &mut r);
        let f = span(&gens).unwrap();
        if flat_contains(&f, &avoid).unwrap() || f.dim() >= n {
            continue;
        }
        let h = hyperplane_containing_avoiding(&f, &avoid).unwrap();
        assert!(f.spanning_points().iter().all(|q| h.vanishes_at(q)));
        assert!(!h.vanishes_at(&avoid));
        let target = r.random_range(f.dim()..n);
        let g = extend_flat_avoiding(&f, target, &avoid, seed).unwrap();
        assert_eq!(g.dim(), target);
        assert!(g.contains_flat(&f));
        assert!(!flat_contains(&g, &avoid).unwrap());
        assert_eq!(extend_flat_avoiding(&f, target, &avoid, seed).unwrap(), g);
        done += 1;
        if done == 100 {
            break;
        }
    }
    assert_eq!(done, 100);
}

#[test]
fn coordinate_change_sends_point_to_origin() {
    let mut r = rng(8);
    for _ in 0..30 {
        let n = r.random_range(1..=4);
        let p = random_point(n, 9, &mut r);
        let change = coordinate_change_to_origin(&p);
        assert_eq!(change.point(&p), ProjPoint::unit(n, 0));
        assert_ne!(change.matrix().determinant().unwrap(), q(0));
    }
}

#[test]
fn multiplicity_formula() {
    let two_p = FatPointScheme::new(vec![pt(&[1, 0, 0])], vec![2]).unwrap();
    assert_eq!(multiplicity(&two_p), 3);
    let three_p = FatPointScheme::new(vec![pt(&[1, 0, 0, 0])], vec![3]).unwrap();
    assert_eq!(multiplicity(&three_p), 10);
    assert_eq!(reg_index(&two_p).unwrap(), 1);
}

#[test]
fn three_collinear_points_have_reg_two() {
    let z = FatPointScheme::equimultiple(vec![pt(&[1, 0, 0]), pt(&[0, 1, 0]), pt(&[1, 1, 0])], 1).unwrap();
    assert_eq!(reg_index(&z).unwrap(), 2);
    assert_eq!(oracle_hilbert(&z, 1), 2);
    assert_eq!(oracle_hilbert(&z, 2), 3);
    assert_eq!(segre_bound(&z).bound, 2);
}

#[test]
fn membership_of_combinations_and_complements() {
    let mut r = rng(9);
    for _ in 0..10 {
        let z = random_scheme(2, 3, 2, 4, &mut r);
        let t = 3;
        let basis = ideal_basis(&z, t);
        let mut member = Form::zero(2, t);
        for f in &basis {
            member = member.add(&f.scale(&q(r.random_range(-3..=3)))).unwrap();
        }
        assert!(member_fat_ideal(&member, &z).unwrap());
        // a monomial outside the span of the basis is a non-member
        let rows: Vec<Vec<Q>> = basis.iter().map(|f| f.coeffs().to_vec()).collect();
        let outside = fatpoints::MonomialBasis::new(t, 3)
            .exponents()
            .iter()
            .map(|e| Form::monomial(2, e).unwrap())
            .find(|m| {
                let mut with = rows.clone();
                with.push(m.coeffs().to_vec());
                rows.is_empty() || gauss_rank(&with) > gauss_rank(&rows)
            })
            .unwrap();
        assert!(!member_fat_ideal(&outside, &z).unwrap());
    }
}

#[test]
fn quotient_regularity_small_case() {
    let j = FatPointScheme::new(vec![pt(&[0, 1])], vec![1]).unwrap();
    let p = pt(&[1, 0]);
    let b = reg_artinian_quotient(&j, &p, 2).unwrap();
    assert!(monomial_criterion(&j, &p, 2, b).unwrap());
    assert!(!monomial_criterion(&j, &p, 2, b - 1).unwrap());
}

#[test]
fn quotients_of_two_extra_configurations_fit_the_recursion() {
    for seed in 0..10 {
        let spec = PatternSpec::new(Pattern::TwoExtra, 2 + seed as usize % 2, 2, MultSpec::Random { max: 3 }, seed);
        let z = generate(&spec).unwrap();
        for i0 in 0..z.len() {
            let rc = recursion_check(&z, i0).unwrap();
            assert!(rc.holds);
            assert!(rc.reg_quotient <= rc.reg);
        }
    }
}

#[test]
fn planted_collinear_points() {
    let spec = PatternSpec { flat_dim: Some(1), ..PatternSpec::new(Pattern::OnFlat, 3, 7, MultSpec::Random { max: 3 }, 12) };
    let z = generate(&spec).unwrap();
    let report = segre_bound(&z);
    assert_eq!(report.entries[0].q, brute_force_q(&z, 1));
    let mut r = rng(13);
    let line = [pt(&[1, 0, 0, 0]), pt(&[0, 1, 0, 0])];
    let mut pts: Vec<ProjPoint> = (1..=4).map(|k| pt(&[1, k, 0, 0])).collect();
    pts.extend((0..3).map(|_| random_point(3, 30, &mut r)));
    let mults = vec![2, 3, 1, 2, 1, 1, 1];
    let z = FatPointScheme::new(pts, mults).unwrap();
    assert!(span(&line).unwrap().dim() == 1);
    assert_eq!(segre_bound(&z).entries[0].q, 8);
    assert_eq!(brute_force_q(&z, 1), 8);
}

#[test]
fn segre_values() {
    assert_eq!(t_value(4, 1), 3);
    let two = FatPointScheme::equimultiple(vec![pt(&[1, 0, 0, 0]), pt(&[0, 1, 0, 0])], 2).unwrap();
    assert_eq!(segre_bound(&two).entries[0].t, 3);
    let five = FatPointScheme::equimultiple(
        vec![pt(&[1, 0, 0]), pt(&[0, 1, 0]), pt(&[0, 0, 1]), pt(&[1, 1, 1]), pt(&[1, 2, 3])],
        2,
    )
    .unwrap();
    let report = segre_bound(&five);
    assert_eq!((report.entries[0].t, report.entries[1].t, report.bound), (3, 5, 5));
    assert_eq!(reg_index(&five).unwrap(), 5);
    let v = theorem_check(&five).unwrap();
    assert!(v.holds && !v.violation);
    assert_eq!(distribution_threshold(&[1, 1, 1], 2), 2);
}

#[test]
fn distribution_examples() {
    let pts = [pt(&[1, 0, 0]), pt(&[0, 1, 0]), pt(&[0, 0, 1])];
    let d = distribute_flats(&pts, &pt(&[1, 2, 5]), &[1, 1, 1], 2, 2, 0).unwrap();
    assert_eq!(d.flats.len(), 2);
    assert!(d.coverage.iter().all(|c| c.len() == 1));

    let mut r = rng(14);
    let z = random_scheme(3, 5, 1, 20, &mut r);
    let avoid = random_point(3, 20, &mut r);
    let mults = [2; 5];
    let t = distribution_threshold(&mults, 2);
    let d = distribute_flats(z.points(), &avoid, &mults, 2, t, 1).unwrap();
    for f in &d.flats {
        assert_eq!(f.dim(), 1);
        assert!(!flat_contains(f, &avoid).unwrap());
    }
    for (i, q) in z.points().iter().enumerate() {
        assert!(d.flats.iter().filter(|f| flat_contains(f, q).unwrap()).count() >= mults[i] as usize);
    }
}

#[test]
fn one_hyperplane_certificate() {
    for m in 1..=3u32 {
        let j = FatPointScheme::equimultiple(vec![pt(&[1, 0, 0, 0]), pt(&[0, 1, 0, 0]), pt(&[1, 1, 1, 0]), pt(&[1, 2, 5, 0])], m)
            .unwrap();
        let p = pt(&[1, 1, 1, 1]);
        let cert = build_certificate(&j, &p, m, 0).unwrap();
        let verdict = verify_certificate(&cert, &j, &p, m).unwrap();
        assert!(verdict.valid);
        assert_eq!(verdict.delta, 2 * m as usize - 1);
        assert!(verdict.delta >= reg_artinian_quotient(&j, &p, m).unwrap());
    }
}

#[test]
fn certificates_for_two_extra_configurations() {
    for seed in 0..8 {
        let spec = PatternSpec::new(Pattern::TwoExtra, 3, 2, MultSpec::Random { max: 3 }, 20 + seed);
        let z = generate(&spec).unwrap();
        let i = z.len() - 1;
        let j = z.without(i).unwrap();
        let (p, a) = (&z.points()[i], z.mults()[i]);
        let cert = build_certificate(&j, p, a, seed).unwrap();
        let verdict = verify_certificate(&cert, &j, p, a).unwrap();
        assert!(verdict.valid, "{:?}", verdict.failures);
        assert!(verdict.delta >= reg_artinian_quotient(&j, p, a).unwrap());
    }
}

#[test]
fn recursion_for_fat_point_plus_simple_point() {
    for m in 1..=4 {
        let z = FatPointScheme::new(vec![pt(&[1, 0, 0]), pt(&[0, 1, 0])], vec![m, 1]).unwrap();
        for i0 in 0..2 {
            let rc = recursion_check(&z, i0).unwrap();
            assert!(rc.holds);
            assert_eq!(rc.reg, m as usize);
        }
    }
}

#[test]
fn two_extra_simple_points_are_tight() {
    for (n, s) in [(2, 1), (2, 2), (3, 2), (3, 3), (4, 3)] {
        let spec = PatternSpec::new(Pattern::TwoExtra, n, s, MultSpec::Equal(1), 3);
        let v = theorem_check(&generate(&spec).unwrap()).unwrap();
        assert!(v.holds && v.tight, "n={n} s={s}");
    }
}

#[test]
fn generator_examples() {
    let spec = PatternSpec::new(Pattern::General, 3, 5, MultSpec::Equal(1), 7);
    let z = generate(&spec).unwrap();
    assert_eq!(z.len(), 5);
    assert_eq!(degeneracy_k(z.points()), None);
    assert!(general_by_subsets(z.points(), 3));

    let spec = PatternSpec::new(Pattern::TwoFlats, 4, 3, MultSpec::Equal(2), 7);
    let z = generate(&spec).unwrap();
    assert_eq!(z.len(), 6);
    assert!(satisfies(&spec, &z));
    let pts = z.points();
    let alpha = span(&pts[0..4]).unwrap();
    let beta = span(&pts[2..6]).unwrap();
    assert!(alpha.dim() <= 3 && beta.dim() <= 3);
    for a in 0..6 {
        for b in a + 1..6 {
            for c in b + 1..6 {
                assert_eq!(point_rank_oracle(&[&pts[a], &pts[b], &pts[c]]), 3);
            }
        }
    }
}

#[test]
fn batches_hold_on_every_trial() {
    let two = PatternSpec::new(Pattern::TwoExtra, 3, 2, MultSpec::Random { max: 3 }, 0);
    let report = batch_check(&two, 100, 0, 0).unwrap();
    assert_eq!(report.records.len(), 100);
    assert!(report.records.iter().all(|r| r.holds && r.tight));
    let three = PatternSpec::new(Pattern::ThreeExtra, 3, 2, MultSpec::Random { max: 3 }, 0);
    let report = batch_check(&three, 100, 0, 0).unwrap();
    assert_eq!(report.records.len(), 100);
    assert!(report.records.iter().all(|r| r.holds));
    assert_eq!(report.violation_count, 0);
}
