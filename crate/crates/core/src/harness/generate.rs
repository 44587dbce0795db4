//! Seeded configuration generators. Every generator re-checks its
//! incidence hypotheses on the output and rejection-samples until they
//! hold (up to `MAX_ATTEMPTS` tries).
//!
//! Sampling: integer coordinates drawn uniformly from `-height..=height`.
//! Configurations that must span an s-flat are drawn inside the
//! coordinate flat span(e_0..e_s); points planted on a smaller flat inside
//! it are small integer combinations (coefficients in -3..=3) of random
//! spanning points.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{any_subset, degeneracy_k, point_rank, span_dim, ProjPoint};
use crate::scheme::FatPointScheme;

pub const MAX_ATTEMPTS: usize = 256;
pub const DEFAULT_HEIGHT: i64 = 50;
const COMBINATION_RANGE: i64 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pattern {
    /// s points, no h+2 of them on an h-flat below the span dimension.
    #[serde(rename = "general")]
    General,
    /// s points spanning a flat of dimension `flat_dim` (default 1).
    #[serde(rename = "on_flat")]
    OnFlat,
    /// s + 2 points not on an (s-1)-flat.
    #[serde(rename = "lemma24")]
    TwoExtra,
    /// s + 3 equimultiple points not on an (s-1)-flat.
    #[serde(rename = "theorem34")]
    ThreeExtra,
    /// s + 3 equimultiple points spanning an s-flat, not in general
    /// position on it, with degeneracy index `k`.
    #[serde(rename = "prop43")]
    Degenerate,
    /// s + 3 equimultiple points on an s-flat with a pair of (s-1)-flats
    /// holding P_1..P_{s+1} and P_3..P_{s+3}.
    #[serde(rename = "lem42")]
    TwoFlats,
}

impl Pattern {
    pub const ALL: [Pattern; 6] = [
        Pattern::General,
        Pattern::OnFlat,
        Pattern::TwoExtra,
        Pattern::ThreeExtra,
        Pattern::Degenerate,
        Pattern::TwoFlats,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Pattern::General => "general",
            Pattern::OnFlat => "on_flat",
            Pattern::TwoExtra => "lemma24",
            Pattern::ThreeExtra => "theorem34",
            Pattern::Degenerate => "prop43",
            Pattern::TwoFlats => "lem42",
        }
    }

    /// Number of points the pattern produces for parameter s.
    pub fn point_count(self, s: usize) -> usize {
        match self {
            Pattern::General | Pattern::OnFlat => s,
            Pattern::TwoExtra => s + 2,
            Pattern::ThreeExtra | Pattern::Degenerate | Pattern::TwoFlats => s + 3,
        }
    }

    pub fn equimultiple(self) -> bool {
        matches!(self, Pattern::ThreeExtra | Pattern::Degenerate | Pattern::TwoFlats)
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Pattern {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Pattern::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Pattern::ALL.iter().map(|p| p.name()).collect();
                format!("unknown pattern {s:?}, expected one of {}", names.join(", "))
            })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultSpec {
    Equal(u32),
    Explicit(Vec<u32>),
    /// Uniform in 1..=max; one shared draw for equimultiple patterns.
    Random { max: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternSpec {
    pub pattern: Pattern,
    pub n: usize,
    pub s: usize,
    pub mults: MultSpec,
    pub seed: u64,
    pub height: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flat_dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
}

impl PatternSpec {
    pub fn new(pattern: Pattern, n: usize, s: usize, mults: MultSpec, seed: u64) -> Self {
        Self {
            pattern,
            n,
            s,
            mults,
            seed,
            height: DEFAULT_HEIGHT,
            flat_dim: None,
            k: None,
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }
}

fn unsatisfiable(msg: impl Into<String>) -> Error {
    Error::PatternUnsatisfiable(msg.into())
}

fn check_spec(spec: &PatternSpec) -> Result<()> {
    let (n, s) = (spec.n, spec.s);
    if n == 0 {
        return Err(unsatisfiable("n must be at least 1"));
    }
    if spec.height < 1 {
        return Err(unsatisfiable("height must be at least 1"));
    }
    match spec.pattern {
        Pattern::General | Pattern::OnFlat if s == 0 => return Err(unsatisfiable("s must be at least 1")),
        Pattern::OnFlat => {
            let d = spec.flat_dim.unwrap_or(1);
            if d > n {
                return Err(unsatisfiable(format!("flat_dim {d} exceeds n = {n}")));
            }
            if s < d + 1 {
                return Err(unsatisfiable(format!("{s} points cannot span a {d}-flat")));
            }
        }
        Pattern::TwoExtra | Pattern::ThreeExtra if s == 0 || s > n => {
            return Err(unsatisfiable(format!("need 1 <= s <= n, got s = {s}, n = {n}")))
        }
        Pattern::Degenerate => {
            if s < 2 || s > n {
                return Err(unsatisfiable(format!("need 2 <= s <= n, got s = {s}, n = {n}")));
            }
            if let Some(k) = spec.k {
                if k == 0 || k >= s {
                    return Err(unsatisfiable(format!("need 1 <= k <= s - 1, got k = {k}")));
                }
            }
        }
        Pattern::TwoFlats if s < 3 || s > n => {
            return Err(unsatisfiable(format!("need 3 <= s <= n, got s = {s}, n = {n}")))
        }
        _ => {}
    }
    let count = spec.pattern.point_count(s);
    match &spec.mults {
        MultSpec::Equal(0) => return Err(unsatisfiable("multiplicity must be positive")),
        MultSpec::Random { max: 0 } => return Err(unsatisfiable("max multiplicity must be positive")),
        MultSpec::Explicit(v) => {
            if v.len() != count {
                return Err(unsatisfiable(format!("pattern needs {count} multiplicities, got {}", v.len())));
            }
            if v.contains(&0) {
                return Err(unsatisfiable("multiplicities must be positive"));
            }
            if spec.pattern.equimultiple() && v.windows(2).any(|w| w[0] != w[1]) {
                return Err(unsatisfiable(format!("pattern {} is equimultiple", spec.pattern)));
            }
        }
        _ => {}
    }
    Ok(())
}

fn draw_mults(spec: &PatternSpec, count: usize, rng: &mut ChaCha8Rng) -> Vec<u32> {
    match &spec.mults {
        MultSpec::Equal(m) => vec![*m; count],
        MultSpec::Explicit(v) => v.clone(),
        MultSpec::Random { max } if spec.pattern.equimultiple() => vec![rng.random_range(1..=*max); count],
        MultSpec::Random { max } => (0..count).map(|_| rng.random_range(1..=*max)).collect(),
    }
}

/// A random nonzero integer vector supported on coordinates 0..=d of P^n.
fn random_in_coordinate_flat(n: usize, d: usize, height: i64, rng: &mut ChaCha8Rng) -> Vec<i64> {
    loop {
        let mut v = vec![0; n + 1];
        for x in v.iter_mut().take(d + 1) {
            *x = rng.random_range(-height..=height);
        }
        if v.iter().any(|&x| x != 0) {
            return v;
        }
    }
}

fn random_combination(basis: &[Vec<i64>], rng: &mut ChaCha8Rng) -> Vec<i64> {
    let len = basis[0].len();
    loop {
        let coeffs: Vec<i64> = basis
            .iter()
            .map(|_| rng.random_range(-COMBINATION_RANGE..=COMBINATION_RANGE))
            .collect();
        let v: Vec<i64> = (0..len)
            .map(|c| basis.iter().zip(&coeffs).map(|(b, k)| b[c] * k).sum())
            .collect();
        if v.iter().any(|&x| x != 0) {
            return v;
        }
    }
}

/// `count` points in span(e_0..e_d), `planted` of them on a random
/// `h`-flat inside it.
fn planted_points(
    n: usize,
    d: usize,
    count: usize,
    plant: Option<(usize, usize)>,
    height: i64,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<i64>> {
    let mut out = Vec::with_capacity(count);
    if let Some((h, q)) = plant {
        let basis: Vec<Vec<i64>> = (0..=h).map(|_| random_in_coordinate_flat(n, d, height, rng)).collect();
        out.extend((0..q).map(|_| random_combination(&basis, rng)));
    }
    while out.len() < count {
        out.push(random_in_coordinate_flat(n, d, height, rng));
    }
    out
}

fn to_scheme(coords: &[Vec<i64>], mults: Vec<u32>) -> Option<FatPointScheme> {
    let points: Option<Vec<ProjPoint>> = coords.iter().map(|c| ProjPoint::from_ints(c).ok()).collect();
    FatPointScheme::new(points?, mults).ok()
}

/// Picks an h-flat holding q points so that `count` points can still span
/// a d-flat: h in 1..d, q in h+2..=count-(d-h).
fn random_plant(d: usize, count: usize, rng: &mut ChaCha8Rng) -> Option<(usize, usize)> {
    if d < 2 || rng.random_bool(0.5) {
        return None;
    }
    let h = rng.random_range(1..d);
    let hi = count - (d - h);
    let lo = h + 2;
    (lo <= hi).then(|| (h, rng.random_range(lo..=hi)))
}

fn no_flat_holds(points: &[ProjPoint], size: usize, max_rank: usize) -> bool {
    !any_subset(points.len(), size, |idx| {
        let sub: Vec<&ProjPoint> = idx.iter().map(|&i| &points[i]).collect();
        point_rank(&sub) <= max_rank
    })
}

fn rank_of(points: &[ProjPoint], idx: std::ops::Range<usize>) -> usize {
    let sub: Vec<&ProjPoint> = points[idx].iter().collect();
    point_rank(&sub)
}

/// Two-flat arrangement in normalized coordinates: the s-flat is
/// span(e_0..e_s), alpha = {X_0 = 0}, beta = {X_1 = 0}, P_{s+3} = e_0.
fn two_flats_points(n: usize, s: usize, height: i64, rng: &mut ChaCha8Rng) -> Vec<Vec<i64>> {
    let mut draw = |support: &[usize], nonzero: Option<usize>| loop {
        let mut v = vec![0i64; n + 1];
        for &c in support {
            v[c] = rng.random_range(-height..=height);
        }
        if let Some(c) = nonzero {
            if v[c] == 0 {
                continue;
            }
        }
        if v.iter().any(|&x| x != 0) {
            return v;
        }
    };
    let alpha_only: Vec<usize> = (1..=s).collect();
    let both: Vec<usize> = (2..=s).collect();
    let beta_only: Vec<usize> = std::iter::once(0).chain(2..=s).collect();
    let mut out = vec![draw(&alpha_only, Some(1)), draw(&alpha_only, Some(1))];
    for _ in 3..=s + 1 {
        out.push(draw(&both, None));
    }
    out.push(draw(&beta_only, Some(0)));
    let mut e0 = vec![0; n + 1];
    e0[0] = 1;
    out.push(e0);
    out
}

/// Whether `z` satisfies the incidence hypotheses of `spec`.
pub fn satisfies(spec: &PatternSpec, z: &FatPointScheme) -> bool {
    let pts = z.points();
    let s = spec.s;
    if z.len() != spec.pattern.point_count(s) || z.n() != spec.n {
        return false;
    }
    if spec.pattern.equimultiple() && !z.is_equimultiple() {
        return false;
    }
    let Ok(d) = span_dim(pts) else { return false };
    match spec.pattern {
        Pattern::General => degeneracy_k(pts).is_none() && d == spec.n.min(z.len() - 1),
        Pattern::OnFlat => d == spec.flat_dim.unwrap_or(1),
        Pattern::TwoExtra | Pattern::ThreeExtra => d >= s,
        Pattern::Degenerate => {
            let k = degeneracy_k(pts);
            d == s && k.is_some() && (spec.k.is_none() || k == spec.k)
        }
        Pattern::TwoFlats => {
            d == s
                && no_flat_holds(pts, s + 2, s)
                && no_flat_holds(pts, s, s - 1)
                && rank_of(pts, 0..s + 1) == s
                && rank_of(pts, 2..s + 3) == s
        }
    }
}

/// A scheme satisfying the pattern, deterministic in `spec.seed`.
pub fn generate(spec: &PatternSpec) -> Result<FatPointScheme> {
    check_spec(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (n, s, h) = (spec.n, spec.s, spec.height);
    let count = spec.pattern.point_count(s);
    for _ in 0..MAX_ATTEMPTS {
        let coords = match spec.pattern {
            Pattern::General => planted_points(n, n, count, None, h, &mut rng),
            Pattern::OnFlat => planted_points(n, spec.flat_dim.unwrap_or(1), count, None, h, &mut rng),
            Pattern::TwoExtra | Pattern::ThreeExtra => {
                let plant = random_plant(s, count, &mut rng);
                planted_points(n, s, count, plant, h, &mut rng)
            }
            Pattern::Degenerate => {
                let k = spec.k.unwrap_or_else(|| rng.random_range(1..s));
                let hi = count - (s - k);
                let q = rng.random_range(k + 2..=hi.max(k + 2));
                planted_points(n, s, count, Some((k, q)), h, &mut rng)
            }
            Pattern::TwoFlats => two_flats_points(n, s, h, &mut rng),
        };
        let mults = draw_mults(spec, count, &mut rng);
        if let Some(z) = to_scheme(&coords, mults) {
            if satisfies(spec, &z) {
                return Ok(z);
            }
        }
    }
    Err(Error::RetriesExhausted {
        what: format!("generating pattern {}", spec.pattern),
        attempts: MAX_ATTEMPTS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(pattern: Pattern, n: usize, s: usize, m: MultSpec, seed: u64) -> PatternSpec {
        PatternSpec::new(pattern, n, s, m, seed)
    }

    #[test]
    fn pattern_names_round_trip() {
        for p in Pattern::ALL {
            assert_eq!(p.name().parse::<Pattern>().unwrap(), p);
            assert_eq!(serde_json::to_string(&p).unwrap(), format!("\"{}\"", p.name()));
        }
        assert!("nope".parse::<Pattern>().is_err());
    }

    #[test]
    fn general_example() {
        let z = generate(&spec(Pattern::General, 3, 5, MultSpec::Equal(1), 7)).unwrap();
        assert_eq!(z.len(), 5);
        assert_eq!(degeneracy_k(z.points()), None);
    }

    #[test]
    fn two_extra_example() {
        let z = generate(&spec(Pattern::TwoExtra, 3, 3, MultSpec::Random { max: 3 }, 1)).unwrap();
        assert_eq!(z.len(), 5);
        assert!(span_dim(z.points()).unwrap() >= 3);
    }

    #[test]
    fn two_flats_example() {
        let sp = spec(Pattern::TwoFlats, 4, 3, MultSpec::Equal(2), 11);
        let z = generate(&sp).unwrap();
        assert_eq!(z.len(), 6);
        assert!(satisfies(&sp, &z));
        assert_eq!(z.points()[5], ProjPoint::unit(4, 0));
    }

    #[test]
    fn degenerate_prescribed_k() {
        for k in 1..3 {
            let mut sp = spec(Pattern::Degenerate, 4, 3, MultSpec::Equal(1), 5);
            sp.k = Some(k);
            let z = generate(&sp).unwrap();
            assert_eq!(degeneracy_k(z.points()), Some(k));
        }
    }

    #[test]
    fn unsatisfiable_parameters() {
        assert!(matches!(
            generate(&spec(Pattern::TwoFlats, 4, 2, MultSpec::Equal(1), 0)),
            Err(Error::PatternUnsatisfiable(_))
        ));
        assert!(matches!(
            generate(&spec(Pattern::ThreeExtra, 2, 3, MultSpec::Equal(1), 0)),
            Err(Error::PatternUnsatisfiable(_))
        ));
        assert!(matches!(
            generate(&spec(Pattern::ThreeExtra, 3, 2, MultSpec::Explicit(vec![1, 2, 1, 1, 1]), 0)),
            Err(Error::PatternUnsatisfiable(_))
        ));
    }

    #[test]
    fn deterministic_per_seed() {
        let sp = spec(Pattern::ThreeExtra, 3, 2, MultSpec::Random { max: 3 }, 42);
        assert_eq!(generate(&sp).unwrap(), generate(&sp).unwrap());
    }
}
