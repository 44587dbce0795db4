//! Independent oracles for the integration tests. Nothing here calls the
//! library's linear algebra.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fatpoints::{FatPointScheme, ProjPoint};

pub type Q = BigRational;

pub fn q(v: i64) -> Q {
    BigRational::from_integer(BigInt::from(v))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Textbook Gauss-Jordan rank over the rationals.
pub fn gauss_rank(rows: &[Vec<Q>]) -> usize {
    let mut m: Vec<Vec<Q>> = rows.to_vec();
    let cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&r| !m[r][c].is_zero()) else { continue };
        m.swap(rank, p);
        let inv = m[rank][c].recip();
        for x in m[rank].iter_mut() {
            *x *= &inv;
        }
        let pivot = m[rank].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != rank && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, y) in row.iter_mut().zip(&pivot) {
                    *x -= &f * y;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn det_laplace(m: &[Vec<Q>]) -> Q {
    match m.len() {
        0 => Q::one(),
        1 => m[0][0].clone(),
        k => {
            let mut acc = Q::zero();
            for c in 0..k {
                if m[0][c].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<Q>> = m[1..]
                    .iter()
                    .map(|r| r.iter().enumerate().filter(|(j, _)| *j != c).map(|(_, x)| x.clone()).collect())
                    .collect();
                let term = &m[0][c] * det_laplace(&minor);
                if c % 2 == 0 {
                    acc += term;
                } else {
                    acc -= term;
                }
            }
            acc
        }
    }
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Largest k with a nonvanishing k x k minor.
pub fn minor_rank(rows: &[Vec<Q>]) -> usize {
    let r = rows.len();
    let c = rows.first().map_or(0, |x| x.len());
    for k in (1..=r.min(c)).rev() {
        for rs in combinations(r, k) {
            for cs in combinations(c, k) {
                let sub: Vec<Vec<Q>> = rs.iter().map(|&i| cs.iter().map(|&j| rows[i][j].clone()).collect()).collect();
                if !det_laplace(&sub).is_zero() {
                    return k;
                }
            }
        }
    }
    0
}

pub fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<Q>> {
    (0..rows)
        .map(|_| {
            (0..cols)
                .map(|_| BigRational::new(BigInt::from(rng.random_range(-9..=9)), BigInt::from(rng.random_range(1..=4))))
                .collect()
        })
        .collect()
}

/// Random matrix of rank at most `rank` (product of random factors).
pub fn low_rank_matrix(rows: usize, cols: usize, rank: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<Q>> {
    let a = random_matrix(rows, rank, rng);
    let b = random_matrix(rank, cols, rng);
    (0..rows)
        .map(|i| (0..cols).map(|j| (0..rank).map(|k| &a[i][k] * &b[k][j]).sum()).collect())
        .collect()
}

fn binom(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

pub fn dim_forms(t: usize, n: usize) -> usize {
    binom((t + n) as u64, n as u64) as usize
}

fn exponents(t: u32, vars: usize) -> Vec<Vec<u32>> {
    if vars == 1 {
        return vec![vec![t]];
    }
    let mut out = Vec::new();
    for e in (0..=t).rev() {
        for mut rest in exponents(t - e, vars - 1) {
            rest.insert(0, e);
            out.push(rest);
        }
    }
    out
}

fn integer_coords(p: &ProjPoint) -> Vec<BigInt> {
    let lcm = p.coords().iter().fold(BigInt::one(), |acc, x| {
        let d = x.denom().clone();
        let g = num_integer::Integer::gcd(&acc, &d);
        acc / g * d
    });
    p.coords().iter().map(|x| (x * BigRational::from_integer(lcm.clone())).to_integer()).collect()
}

/// Condition matrix rank built from explicit differentiation of every
/// monomial; an independent route to H_Z(t).
pub fn oracle_hilbert(z: &FatPointScheme, t: usize) -> usize {
    let n = z.n();
    let monos = exponents(t as u32, n + 1);
    let mut rows = Vec::new();
    for (p, &m) in z.points().iter().zip(z.mults()) {
        let c = integer_coords(p);
        let order = (m as usize - 1).min(t) as u32;
        for alpha in exponents(order, n + 1) {
            let row: Vec<Q> = monos
                .iter()
                .map(|beta| {
                    let mut v = BigInt::one();
                    for k in 0..=n {
                        if beta[k] < alpha[k] {
                            return Q::zero();
                        }
                        for f in 0..alpha[k] {
                            v *= BigInt::from(beta[k] - f);
                        }
                        v *= num_traits::pow(c[k].clone(), (beta[k] - alpha[k]) as usize);
                    }
                    BigRational::from_integer(v)
                })
                .collect();
            rows.push(row);
        }
    }
    if rows.is_empty() {
        0
    } else {
        gauss_rank(&rows)
    }
}

pub fn point_rank_oracle(points: &[&ProjPoint]) -> usize {
    let rows: Vec<Vec<Q>> = points.iter().map(|p| p.coords().to_vec()).collect();
    gauss_rank(&rows)
}

/// q_j by brute force over every subset.
pub fn brute_force_q(z: &FatPointScheme, j: usize) -> usize {
    let s = z.len();
    let mut best = 0;
    for mask in 1u32..(1 << s) {
        let idx: Vec<usize> = (0..s).filter(|i| mask >> i & 1 == 1).collect();
        let pts: Vec<&ProjPoint> = idx.iter().map(|&i| &z.points()[i]).collect();
        if point_rank_oracle(&pts) <= j + 1 {
            best = best.max(idx.iter().map(|&i| z.mults()[i] as usize).sum());
        }
    }
    best
}

pub fn brute_force_bound(z: &FatPointScheme) -> usize {
    (1..=z.n()).map(|j| (brute_force_q(z, j) + j - 2) / j).max().unwrap()
}

pub fn random_point(n: usize, height: i64, rng: &mut ChaCha8Rng) -> ProjPoint {
    loop {
        let c: Vec<i64> = (0..=n).map(|_| rng.random_range(-height..=height)).collect();
        if let Ok(p) = ProjPoint::from_ints(&c) {
            return p;
        }
    }
}

/// Random scheme with `s` distinct points and multiplicities in 1..=max_m.
pub fn random_scheme(n: usize, s: usize, max_m: u32, height: i64, rng: &mut ChaCha8Rng) -> FatPointScheme {
    loop {
        let pts: Vec<ProjPoint> = (0..s).map(|_| random_point(n, height, rng)).collect();
        let mults: Vec<u32> = (0..s).map(|_| rng.random_range(1..=max_m)).collect();
        if let Ok(z) = FatPointScheme::new(pts, mults) {
            return z;
        }
    }
}

/// Whether two coefficient vectors are proportional.
pub fn proportional(a: &[Q], b: &[Q]) -> bool {
    let Some(i) = a.iter().position(|x| !x.is_zero()) else {
        return b.iter().all(Zero::is_zero);
    };
    if b[i].is_zero() {
        return false;
    }
    let ratio = &b[i] / &a[i];
    a.iter().zip(b).all(|(x, y)| &(x * &ratio) == y)
}

pub fn abs_max(values: &[Q]) -> Q {
    values.iter().map(|x| x.abs()).fold(Q::zero(), |a, b| if b > a { b } else { a })
}
