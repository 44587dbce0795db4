//! Segre-type bounds: T_j = max floor((sum of multiplicities on a j-flat +
//! j - 2) / j), and the bound max_j T_j.
//!
//! A heaviest j-flat can always be taken as the span of at most j + 1 of
//! the points, so candidates are the spans of all such subsets, deduplicated
//! by canonical basis.

use std::collections::HashSet;

use serde::Serialize;

use crate::geometry::{flat_contains, point_rank, span, Flat};
use crate::scheme::FatPointScheme;

/// A heaviest flat of dimension at most j and the indices of every scheme
/// point on it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlatWitness {
    pub flat: Flat,
    pub points: Vec<usize>,
}

fn visit_subsets(s: usize, k: usize, visit: &mut impl FnMut(&[usize])) {
    fn rec(start: usize, s: usize, k: usize, current: &mut Vec<usize>, visit: &mut impl FnMut(&[usize])) {
        if current.len() == k {
            visit(current);
            return;
        }
        for i in start..=s - (k - current.len()) {
            current.push(i);
            rec(i + 1, s, k, current, visit);
            current.pop();
        }
    }
    if k <= s {
        rec(0, s, k, &mut Vec::with_capacity(k), visit);
    }
}

/// q_j, the largest total multiplicity on a flat of dimension <= j, with a
/// witness. Ties go to the lexicographically smallest index set.
pub fn max_mult_on_j_flats(z: &FatPointScheme, j: usize) -> (usize, FlatWitness) {
    let points = z.points();
    let s = points.len();
    let mut seen: HashSet<Flat> = HashSet::new();
    let mut best: Option<(usize, FlatWitness)> = None;
    let mut consider = |flat: Flat| {
        if seen.contains(&flat) {
            return;
        }
        let on: Vec<usize> = (0..s)
            .filter(|&i| flat_contains(&flat, &points[i]).expect("same ambient"))
            .collect();
        let weight: usize = on.iter().map(|&i| z.mults()[i] as usize).sum();
        let better = match &best {
            None => true,
            Some((w, wit)) => weight > *w || (weight == *w && on < wit.points),
        };
        if better {
            best = Some((weight, FlatWitness { flat: flat.clone(), points: on }));
        }
        seen.insert(flat);
    };
    let all = span(points).expect("schemes are nonempty");
    if all.dim() <= j {
        consider(all);
    } else {
        for k in 1..=(j + 1).min(s) {
            visit_subsets(s, k, &mut |idx| {
                let sub: Vec<_> = idx.iter().map(|&i| &points[i]).collect();
                if point_rank(&sub) == k {
                    let owned: Vec<_> = sub.into_iter().cloned().collect();
                    consider(span(&owned).expect("nonempty"));
                }
            });
        }
    }
    best.expect("at least one candidate flat")
}

/// floor((q + j - 2) / j).
pub fn t_value(q: usize, j: usize) -> usize {
    (q + j).saturating_sub(2) / j
}

/// T_j for the scheme.
pub fn segre_t(z: &FatPointScheme, j: usize) -> usize {
    t_value(max_mult_on_j_flats(z, j).0, j)
}

/// One row of the Segre table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SegreEntry {
    pub j: usize,
    pub q: usize,
    pub t: usize,
    pub witness_points: Vec<usize>,
    pub witness_flat: String,
    pub witness_dim: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SegreReport {
    pub entries: Vec<SegreEntry>,
    pub bound: usize,
    pub argmax_j: usize,
}

/// T_1, ..., T_n with witnesses, and their maximum. The argmax is the
/// smallest j attaining it.
pub fn segre_bound(z: &FatPointScheme) -> SegreReport {
    let entries: Vec<SegreEntry> = (1..=z.n())
        .map(|j| {
            let (q, witness) = max_mult_on_j_flats(z, j);
            SegreEntry {
                j,
                q,
                t: t_value(q, j),
                witness_dim: witness.flat.dim(),
                witness_flat: witness.flat.to_string(),
                witness_points: witness.points,
            }
        })
        .collect();
    let bound = entries.iter().map(|e| e.t).max().expect("n >= 1");
    let argmax_j = entries.iter().find(|e| e.t == bound).expect("max exists").j;
    SegreReport {
        entries,
        bound,
        argmax_j,
    }
}
