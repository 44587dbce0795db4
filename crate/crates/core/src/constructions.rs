//! Hyperplane constructions bounding reg(R/(J + p^a)), and the checks that
//! tie the regularity index to the Segre-type bound.
//!
//! If hyperplanes L_1..L_t avoid P and L_1 ... L_t M lies in J, then
//! X_0^t M lies in J + p^(i+1) for the degree-i monomial M, so a family of
//! such products for every M of degree < a bounds the quotient regularity
//! by max(t + i). The builder is heuristic; `verify_certificate` checks
//! everything it relies on with exact derivative conditions.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::artinian::reg_artinian_quotient;
use crate::error::{Error, Result};
use crate::geometry::{
    any_subset, coordinate_frame, EXTENSION_RETRIES, degeneracy_k, extend_flat_avoiding_with, flat_contains,
    general_position_check, hyperplane_containing_avoiding, span, span_dim, Flat, LinearForm,
    ProjPoint,
};
use crate::linalg::{self, Matrix};
use crate::monomial::{binomial, Form, MonomialBasis};
use crate::scheme::{member_fat_ideal, reg_index, FatPointScheme};
use crate::segre::{segre_bound, SegreReport};

/// Inputs with at most this many points get a full scan of the
/// distribution precondition before any flat is built.
pub const UPFRONT_SCAN_LIMIT: usize = 10;

/// max{ max m_j, floor((sum m_j + r - 1) / r) }.
pub fn distribution_threshold(mults: &[u32], r: usize) -> usize {
    assert!(r >= 1, "r must be positive");
    let max = mults.iter().copied().max().unwrap_or(0) as usize;
    let sum: usize = mults.iter().map(|&m| m as usize).sum();
    max.max(sum.div_ceil(r))
}

/// t flats of dimension r - 1 avoiding a point, such that point j lies on
/// at least m_j of them (counted with repetition).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Distribution {
    pub r: usize,
    pub flats: Vec<Flat>,
    /// For every input point, the indices of the flats through it.
    pub coverage: Vec<Vec<usize>>,
}

fn subset_points(points: &[ProjPoint], idx: &[usize]) -> Vec<ProjPoint> {
    idx.iter().map(|&i| points[i].clone()).collect()
}

fn spans_avoid(points: &[ProjPoint], idx: &[usize], avoid: &ProjPoint) -> Result<bool> {
    let s = span(&subset_points(points, idx))?;
    Ok(!flat_contains(&s, avoid)?)
}

fn flat_through(
    points: &[ProjPoint],
    idx: &[usize],
    avoid: &ProjPoint,
    r: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Flat> {
    let s = span(&subset_points(points, idx))?;
    if flat_contains(&s, avoid)? {
        return Err(Error::Precondition(format!(
            "points {idx:?} span a flat through the avoided point"
        )));
    }
    if s.dim() > r - 1 {
        return Err(Error::Precondition(format!(
            "points {idx:?} do not lie on a {}-flat",
            r - 1
        )));
    }
    if s.dim() == r - 1 {
        return Ok(s);
    }
    // prefer flats that pick up no further input points, as a generic
    // choice would
    let others: Vec<&ProjPoint> = points
        .iter()
        .filter(|q| !flat_contains(&s, q).expect("same ambient"))
        .collect();
    let mut last = None;
    for _ in 0..EXTENSION_RETRIES {
        let f = extend_flat_avoiding_with(&s, r - 1, avoid, rng)?;
        if others.iter().all(|q| !flat_contains(&f, q).expect("same ambient")) {
            return Ok(f);
        }
        last = Some(f);
    }
    Ok(last.expect("at least one attempt"))
}

/// Builds the flats greedily: while more than r points still need flats,
/// one flat goes through the r heaviest (ties by index) and their demands
/// drop by one; once at most r remain, a single flat through all of them is
/// repeated for the remaining slots.
pub fn distribute_flats(
    points: &[ProjPoint],
    avoid: &ProjPoint,
    mults: &[u32],
    r: usize,
    t: usize,
    seed: u64,
) -> Result<Distribution> {
    let first = points.first().ok_or(Error::EmptyInput("no points to distribute"))?;
    let n = first.ambient_n();
    if mults.len() != points.len() {
        return Err(Error::DimensionMismatch {
            expected: points.len(),
            found: mults.len(),
        });
    }
    if let Some(index) = mults.iter().position(|&m| m == 0) {
        return Err(Error::ZeroMultiplicity { index });
    }
    if r == 0 || r > n {
        return Err(Error::Precondition(format!("r = {r} must lie in 1..={n}")));
    }
    let threshold = distribution_threshold(mults, r);
    if t < threshold {
        return Err(Error::Precondition(format!("t = {t} is below the threshold {threshold}")));
    }
    let s = points.len();
    if s <= UPFRONT_SCAN_LIMIT {
        let mut offending = None;
        any_subset(s, r.min(s), |idx| {
            match spans_avoid(points, idx, avoid) {
                Ok(true) => false,
                _ => {
                    offending = Some(idx.to_vec());
                    true
                }
            }
        });
        if let Some(idx) = offending {
            return Err(Error::Precondition(format!(
                "points {idx:?} span a flat through the avoided point"
            )));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut demand: Vec<u32> = mults.to_vec();
    let mut flats = Vec::with_capacity(t);
    while flats.len() < t {
        let mut active: Vec<usize> = (0..s).filter(|&i| demand[i] > 0).collect();
        active.sort_by(|&x, &y| demand[y].cmp(&demand[x]).then(x.cmp(&y)));
        if active.len() <= r {
            let left = t - flats.len();
            if active.iter().any(|&i| demand[i] as usize > left) {
                return Err(Error::Precondition("too few slots left for the heaviest point".into()));
            }
            let flat = if active.is_empty() {
                flat_through(points, &[0], avoid, r, &mut rng)?
            } else {
                flat_through(points, &active, avoid, r, &mut rng)?
            };
            flats.extend(std::iter::repeat_n(flat, left));
            break;
        }
        let chosen = &active[..r];
        flats.push(flat_through(points, chosen, avoid, r, &mut rng)?);
        for &i in chosen {
            demand[i] -= 1;
        }
    }

    let coverage: Vec<Vec<usize>> = points
        .iter()
        .map(|q| {
            (0..flats.len())
                .filter(|&k| flat_contains(&flats[k], q).expect("same ambient"))
                .collect()
        })
        .collect();
    for (j, c) in coverage.iter().enumerate() {
        if c.len() < mults[j] as usize {
            return Err(Error::CertificateConstruction(format!(
                "point {j} lies on {} flats, needs {}",
                c.len(),
                mults[j]
            )));
        }
    }
    Ok(Distribution { r, flats, coverage })
}

/// Hyperplanes for one monomial M of degree `degree` in the certificate's
/// coordinates X_1..X_n.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateEntry {
    pub degree: usize,
    /// Exponents c_1..c_n of M.
    pub exponent: Vec<u32>,
    pub hyperplanes: Vec<LinearForm>,
    /// Per point of J, the vanishing order still needed after M's own
    /// contribution: max(0, m_q - sum of c_k over coordinates vanishing at q).
    pub adjusted: Vec<u32>,
    pub strategy: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub a: u32,
    pub delta: usize,
    /// The coordinates X_1..X_n as forms in the original coordinates. They
    /// vanish at P and are independent, so their degree-i monomials span
    /// the degree-i part of p^i.
    pub coordinates: Vec<LinearForm>,
    pub entries: Vec<CertificateEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CertificateVerdict {
    pub valid: bool,
    pub delta: usize,
    pub failures: Vec<String>,
}

fn check_point(j: &FatPointScheme, p: &ProjPoint, a: u32) -> Result<()> {
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

fn monomial_form(coordinates: &[LinearForm], exponent: &[u32], n: usize) -> Form {
    let factors: Vec<LinearForm> = coordinates
        .iter()
        .zip(exponent)
        .flat_map(|(x, &c)| std::iter::repeat_n(x.clone(), c as usize))
        .collect();
    Form::product_of_linear(n, &factors)
}

fn exponent_label(e: &[u32]) -> String {
    let parts: Vec<String> = e
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(k, &c)| if c == 1 { format!("X{}", k + 1) } else { format!("X{}^{c}", k + 1) })
        .collect();
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("*")
    }
}

/// Checks a certificate against J, P and a. Each product of hyperplanes
/// and monomial is tested for membership in J by derivative conditions.
pub fn verify_certificate(c: &Certificate, j: &FatPointScheme, p: &ProjPoint, a: u32) -> Result<CertificateVerdict> {
    check_point(j, p, a)?;
    if c.entries.is_empty() {
        return Err(Error::Precondition("empty certificate".into()));
    }
    let n = j.n();
    let guard = j.total_mult() + a as usize;
    let mut failures = Vec::new();
    if c.a != a {
        failures.push(format!("certificate is for a = {}, checked against a = {a}", c.a));
    }

    if c.coordinates.len() != n || c.coordinates.iter().any(|x| x.ambient_n() != n) {
        failures.push(format!("expected {n} coordinate forms on P^{n}"));
        return Ok(CertificateVerdict {
            valid: false,
            delta: 0,
            failures,
        });
    }
    for (k, x) in c.coordinates.iter().enumerate() {
        if !x.vanishes_at(p) {
            failures.push(format!("coordinate X{} does not vanish at the point", k + 1));
        }
    }
    let rows = Matrix::from_rows(n + 1, c.coordinates.iter().map(|x| x.coeffs().to_vec()))?;
    if linalg::rank(&rows) != n {
        failures.push("coordinate forms are dependent".into());
    }

    for i in 0..a as usize {
        for e in MonomialBasis::new(i, n).exponents() {
            if !c.entries.iter().any(|en| en.degree == i && &en.exponent == e) {
                failures.push(format!("no entry for monomial {}", exponent_label(e)));
            }
        }
    }

    let mut delta = 0;
    for en in &c.entries {
        let label = exponent_label(&en.exponent);
        if en.exponent.len() != n || en.exponent.iter().sum::<u32>() as usize != en.degree {
            failures.push(format!("entry {label}: exponent does not match its degree"));
            continue;
        }
        let degree = en.hyperplanes.len() + en.degree;
        if degree > guard {
            return Err(Error::DegreeOverflow { degree, guard });
        }
        delta = delta.max(degree);
        let mut ok = true;
        for (k, h) in en.hyperplanes.iter().enumerate() {
            if h.ambient_n() != n {
                failures.push(format!("entry {label}: hyperplane {k} has the wrong ambient dimension"));
                ok = false;
            } else if h.vanishes_at(p) {
                failures.push(format!("entry {label}: hyperplane {k} passes through the point"));
                ok = false;
            }
        }
        if !ok {
            continue;
        }
        let product = Form::product_of_linear(n, &en.hyperplanes)
            .mul(&monomial_form(&c.coordinates, &en.exponent, n))?;
        if !member_fat_ideal(&product, j)? {
            failures.push(format!("entry {label}: product is not in J"));
        }
    }
    if c.delta != delta {
        failures.push(format!("recorded delta {} differs from {delta}", c.delta));
    }
    Ok(CertificateVerdict {
        valid: failures.is_empty(),
        delta,
        failures,
    })
}

#[derive(Clone, Debug)]
enum Plan {
    Cover,
    Distribute(usize),
    Split { group1: Vec<usize>, r1: usize, r2: usize },
}

struct Demand<'a> {
    j: &'a FatPointScheme,
    p: &'a ProjPoint,
    adjusted: Vec<u32>,
    needy: Vec<usize>,
}

impl Demand<'_> {
    fn points(&self, idx: &[usize]) -> Vec<ProjPoint> {
        idx.iter().map(|&i| self.j.points()[i].clone()).collect()
    }

    fn mults(&self, idx: &[usize]) -> Vec<u32> {
        idx.iter().map(|&i| self.adjusted[i]).collect()
    }

    fn plans(&self) -> Vec<(usize, Plan)> {
        let n = self.j.n();
        let all = self.mults(&self.needy);
        let mut plans = vec![(*all.iter().max().expect("needy") as usize, Plan::Cover)];
        for r in 1..=n {
            plans.push((distribution_threshold(&all, r), Plan::Distribute(r)));
        }
        let mut seen: Vec<Vec<usize>> = Vec::new();
        for size in 1..n {
            any_subset(self.needy.len(), size, |idx| {
                let mut span_pts = vec![self.p.clone()];
                span_pts.extend(idx.iter().map(|&k| self.j.points()[self.needy[k]].clone()));
                let alpha = span(&span_pts).expect("nonempty");
                let r1 = alpha.dim();
                if r1 != size || r1 >= n {
                    return false;
                }
                let group1: Vec<usize> = self
                    .needy
                    .iter()
                    .copied()
                    .filter(|&q| flat_contains(&alpha, &self.j.points()[q]).expect("same ambient"))
                    .collect();
                if group1.len() == self.needy.len() || seen.contains(&group1) {
                    return false;
                }
                let group2: Vec<usize> =
                    self.needy.iter().copied().filter(|q| !group1.contains(q)).collect();
                let t1 = distribution_threshold(&self.mults(&group1), r1);
                for r2 in 1..=n - r1 {
                    let t2 = distribution_threshold(&self.mults(&group2), r2);
                    plans.push((
                        t1.max(t2),
                        Plan::Split {
                            group1: group1.clone(),
                            r1,
                            r2,
                        },
                    ));
                }
                seen.push(group1);
                false
            });
        }
        // stable: ties keep generation order
        plans.sort_by_key(|(t, _)| *t);
        plans
    }

    fn realize(&self, plan: &Plan, t: usize, seed: u64) -> Result<Vec<LinearForm>> {
        match plan {
            Plan::Cover => {
                let f = span(&self.points(&self.needy))?;
                let h = hyperplane_containing_avoiding(&f, self.p)?;
                Ok(vec![h; t])
            }
            Plan::Distribute(r) => {
                let d = distribute_flats(
                    &self.points(&self.needy),
                    self.p,
                    &self.mults(&self.needy),
                    *r,
                    t,
                    seed,
                )?;
                d.flats
                    .iter()
                    .map(|f| hyperplane_containing_avoiding(f, self.p))
                    .collect()
            }
            Plan::Split { group1, r1, r2 } => {
                let group2: Vec<usize> =
                    self.needy.iter().copied().filter(|q| !group1.contains(q)).collect();
                let p1 = self.points(group1);
                let p2 = self.points(&group2);
                let d1 = distribute_flats(&p1, self.p, &self.mults(group1), *r1, t, seed)?;
                let d2 = distribute_flats(&p2, self.p, &self.mults(&group2), *r2, t, seed ^ 0x5bd1)?;
                (0..t)
                    .map(|k| {
                        let mut on: Vec<ProjPoint> = Vec::new();
                        for (pts, d) in [(&p1, &d1), (&p2, &d2)] {
                            on.extend(
                                (0..pts.len())
                                    .filter(|&q| d.coverage[q].contains(&k))
                                    .map(|q| pts[q].clone()),
                            );
                        }
                        let f = span(&on)?;
                        hyperplane_containing_avoiding(&f, self.p)
                    })
                    .collect()
            }
        }
    }

    fn counts_ok(&self, hyperplanes: &[LinearForm]) -> bool {
        self.needy.iter().all(|&q| {
            let hits = hyperplanes
                .iter()
                .filter(|h| h.vanishes_at(&self.j.points()[q]))
                .count();
            hits >= self.adjusted[q] as usize
        })
    }
}

fn plan_name(plan: &Plan) -> String {
    match plan {
        Plan::Cover => "cover".into(),
        Plan::Distribute(r) => format!("distribute r={r}"),
        Plan::Split { group1, r1, r2 } => format!("split {group1:?} r1={r1} r2={r2}"),
    }
}

/// Builds hyperplane products for every monomial of degree < a. Works in a
/// frame sending P to e_0 and independent points of J to coordinate points,
/// so that M already vanishes to high order at many points of J. For each
/// monomial the cheapest of these plans that can be realized is used: one
/// hyperplane through all points still needing vanishing, a distribution
/// of (r-1)-flats lifted to hyperplanes, or two distributions joined
/// pairwise, one inside a flat through P.
pub fn build_certificate(j: &FatPointScheme, p: &ProjPoint, a: u32, seed: u64) -> Result<Certificate> {
    check_point(j, p, a)?;
    let n = j.n();
    let mut all = vec![p.clone()];
    all.extend(j.points().iter().cloned());
    let (change, _) = coordinate_frame(n, &all);
    let coordinates: Vec<LinearForm> = (1..=n)
        .map(|k| LinearForm::new(change.new_coordinate_form(k)).expect("frame rows are nonzero"))
        .collect();
    let framed: Vec<ProjPoint> = j.points().iter().map(|q| change.point(q)).collect();

    let mut entries = Vec::new();
    for i in 0..a as usize {
        for e in MonomialBasis::new(i, n).exponents() {
            let adjusted: Vec<u32> = framed
                .iter()
                .zip(j.mults())
                .map(|(q, &m)| {
                    let order: u32 = (0..n)
                        .filter(|&k| q.coords()[k + 1] == linalg::rat(0))
                        .map(|k| e[k])
                        .sum();
                    m.saturating_sub(order)
                })
                .collect();
            let needy: Vec<usize> = (0..j.len()).filter(|&q| adjusted[q] > 0).collect();
            let demand = Demand {
                j,
                p,
                adjusted: adjusted.clone(),
                needy,
            };
            let entry_seed = seed.wrapping_add((entries.len() as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
            let (hyperplanes, strategy) = if demand.needy.is_empty() {
                (Vec::new(), "monomial".to_string())
            } else {
                let mut found = None;
                for (t, plan) in demand.plans() {
                    match demand.realize(&plan, t, entry_seed) {
                        Ok(hs) if demand.counts_ok(&hs) => {
                            found = Some((hs, plan_name(&plan)));
                            break;
                        }
                        Ok(_) => log::debug!("plan {} miscounted", plan_name(&plan)),
                        Err(err) => log::debug!("plan {} failed: {err}", plan_name(&plan)),
                    }
                }
                found.ok_or_else(|| {
                    Error::CertificateConstruction(format!(
                        "no plan realizes monomial {}",
                        exponent_label(e)
                    ))
                })?
            };
            entries.push(CertificateEntry {
                degree: i,
                exponent: e.clone(),
                hyperplanes,
                adjusted,
                strategy,
            });
        }
    }
    let delta = entries
        .iter()
        .map(|en| en.hyperplanes.len() + en.degree)
        .max()
        .unwrap_or(0);
    Ok(Certificate {
        a,
        delta,
        coordinates,
        entries,
    })
}

/// Both sides of reg(Z) = max{a - 1, reg(Z minus P), reg(R/(J + p^a))}
/// for the point P = P_i0 of multiplicity a.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RecursionCheck {
    pub removed: usize,
    pub reg: usize,
    pub a_minus_one: usize,
    pub reg_rest: usize,
    pub reg_quotient: usize,
    pub holds: bool,
}

impl RecursionCheck {
    pub fn rhs(&self) -> usize {
        self.a_minus_one.max(self.reg_rest).max(self.reg_quotient)
    }
}

pub fn recursion_check(z: &FatPointScheme, i0: usize) -> Result<RecursionCheck> {
    if z.len() < 2 {
        return Err(Error::Precondition("need at least two points".into()));
    }
    let rest = z.without(i0).ok_or_else(|| Error::Precondition(format!("no point {i0}")))?;
    let a = z.mults()[i0];
    let reg = reg_index(z)?;
    let reg_rest = reg_index(&rest)?;
    let reg_quotient = reg_artinian_quotient(&rest, &z.points()[i0], a)?;
    let a_minus_one = a as usize - 1;
    let holds = reg == a_minus_one.max(reg_rest).max(reg_quotient);
    Ok(RecursionCheck {
        removed: i0,
        reg,
        a_minus_one,
        reg_rest,
        reg_quotient,
        holds,
    })
}

/// Which known result, if any, covers a configuration of S points.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum HypothesisClass {
    /// S = s + 2 >= 3 points not on a linear (s-1)-space: reg equals the bound.
    #[serde(rename = "lemma24")]
    TwoExtra,
    /// S = s + 3 equimultiple points, s >= 1, not on a linear (s-1)-space.
    #[serde(rename = "theorem34")]
    ThreeExtraEquimultiple,
    #[serde(rename = "outside_proven_cases")]
    Outside,
}

impl HypothesisClass {
    pub fn as_str(self) -> &'static str {
        match self {
            HypothesisClass::TwoExtra => "lemma24",
            HypothesisClass::ThreeExtraEquimultiple => "theorem34",
            HypothesisClass::Outside => "outside_proven_cases",
        }
    }

    pub fn classify(points: usize, span_dim: usize, equimultiple: bool) -> Self {
        if points >= 3 && span_dim + 2 >= points {
            HypothesisClass::TwoExtra
        } else if equimultiple && points >= 4 && span_dim + 3 >= points {
            HypothesisClass::ThreeExtraEquimultiple
        } else {
            HypothesisClass::Outside
        }
    }
}

impl fmt::Display for HypothesisClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub hypothesis_class: HypothesisClass,
    pub n: usize,
    pub points: usize,
    pub span_dim: usize,
    pub equimultiple: bool,
    pub general_position: bool,
    pub degeneracy_k: Option<usize>,
    pub multiplicity: usize,
    pub reg: usize,
    pub bound: usize,
    pub holds: bool,
    pub tight: bool,
    pub violation: bool,
    pub segre: SegreReport,
}

/// Classifies the configuration, computes reg(Z) and the Segre bound, and
/// flags a violation when a covered class fails its promise: reg <= bound,
/// with equality for `TwoExtra`.
pub fn theorem_check(z: &FatPointScheme) -> Result<Verdict> {
    let span_dim = span_dim(z.points())?;
    let equimultiple = z.is_equimultiple();
    let hypothesis_class = HypothesisClass::classify(z.len(), span_dim, equimultiple);
    let reg = reg_index(z)?;
    let segre = segre_bound(z);
    let bound = segre.bound;
    let holds = reg <= bound;
    let tight = reg == bound;
    let violation = match hypothesis_class {
        HypothesisClass::TwoExtra => !tight,
        HypothesisClass::ThreeExtraEquimultiple => !holds,
        HypothesisClass::Outside => false,
    };
    Ok(Verdict {
        hypothesis_class,
        n: z.n(),
        points: z.len(),
        span_dim,
        equimultiple,
        general_position: general_position_check(z.points(), span_dim),
        degeneracy_k: degeneracy_k(z.points()),
        multiplicity: crate::scheme::multiplicity(z),
        reg,
        bound,
        holds,
        tight,
        violation,
        segre,
    })
}

/// Number of monomials of degree < a in n variables, the entry count of a
/// complete certificate.
pub fn certificate_size(n: usize, a: u32) -> usize {
    (0..a as usize).map(|i| binomial(i + n - 1, n - 1)).sum()
}
