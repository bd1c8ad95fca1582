//! Spanning, separated and cover counts for finite metric systems, and the
//! growth class, entropy and polynomial entropy read off them.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};
use std::fmt::{self, Write as _};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use rayon::prelude::*;
use thiserror::Error;

use crate::growth::{
    self, compare, ordered_chain, parse_big_rational, pi_e, pi_p, Growth, GrowthConfig,
    GrowthError, GrowthExpr, Projection, Relation, TabulatedGrowth,
};

/// Above this exponential rate the polynomial projection is reported as `∞`.
pub const EXP_THRESHOLD: f64 = 0.05;

/// Exact search thresholds.
pub const EXACT_POINTS: usize = 16;
pub const EXACT_COVER_SETS: usize = 20;

/// Number of rungs in the default ladder `diam / 2^j`.
pub const DEFAULT_RUNGS: u32 = 6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimatorError {
    #[error(transparent)]
    Growth(#[from] GrowthError),
    #[error("malformed system: {0}")]
    Parse(String),
    #[error("distance matrix is not a metric: {0}")]
    NotMetric(String),
    #[error("map sends point {point} to {image}, outside 0..{len}")]
    BadMap {
        point: usize,
        image: usize,
        len: usize,
    },
    #[error("common denominator of the distances does not fit in 64 bits")]
    TooFine,
    #[error("epsilon must be positive")]
    BadEpsilon,
    #[error("n must be at least 1")]
    ZeroLength,
    #[error("the sets do not cover point {0}")]
    NotACover(usize),
    #[error("need at least {need} rungs, got {got}")]
    TooFewRungs { need: usize, got: usize },
    #[error("counts increase with epsilon between rungs {0} and {1}")]
    NotMonotone(usize, usize),
    #[error("system has no points")]
    Empty,
}

pub type Result<T> = std::result::Result<T, EstimatorError>;

/// Metric used to turn coordinates into distances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    /// `|x - y|` on the line.
    Euclidean,
    /// `max_i |x_i - y_i|`.
    Linf,
    /// Arc distance on `ℝ/ℤ`.
    Circle,
}

/// Finitely many points, a map on them and exact distances stored as
/// integers over a common denominator.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSystem {
    len: usize,
    den: u64,
    scaled: Vec<u64>,
    next: Vec<usize>,
}

fn lcm_u64(a: u64, b: &BigInt) -> Result<u64> {
    let b = b.to_u64().ok_or(EstimatorError::TooFine)?;
    let g = a.gcd(&b);
    (a / g).checked_mul(b).ok_or(EstimatorError::TooFine)
}

fn check_map(next: &[usize]) -> Result<()> {
    for (point, &image) in next.iter().enumerate() {
        if image >= next.len() {
            return Err(EstimatorError::BadMap {
                point,
                image,
                len: next.len(),
            });
        }
    }
    Ok(())
}

impl FiniteSystem {
    /// Points given by rational coordinates.
    pub fn from_points(
        points: &[Vec<BigRational>],
        metric: Metric,
        next: Vec<usize>,
    ) -> Result<Self> {
        if points.is_empty() {
            return Err(EstimatorError::Empty);
        }
        if points.len() != next.len() {
            return Err(EstimatorError::Parse(format!(
                "{} points but {} map entries",
                points.len(),
                next.len()
            )));
        }
        let dim = points[0].len();
        if dim == 0 || points.iter().any(|p| p.len() != dim) {
            return Err(EstimatorError::Parse(
                "coordinates have mixed dimension".into(),
            ));
        }
        if dim > 1 && metric != Metric::Linf {
            return Err(EstimatorError::Parse(
                "only the max metric is exact in more than one dimension".into(),
            ));
        }
        check_map(&next)?;
        let mut den = 1u64;
        for c in points.iter().flatten() {
            den = lcm_u64(den, c.denom())?;
        }
        let scale = BigInt::from(den);
        let ints: Vec<Vec<i128>> = points
            .iter()
            .map(|p| {
                p.iter()
                    .map(|c| {
                        let v = if metric == Metric::Circle {
                            c.numer().mod_floor(c.denom()) * (&scale / c.denom())
                        } else {
                            c.numer() * (&scale / c.denom())
                        };
                        v.to_i128().ok_or(EstimatorError::TooFine)
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        let len = points.len();
        let period = den as i128;
        let scaled = (0..len * len)
            .into_par_iter()
            .map(|idx| {
                let (a, b) = (&ints[idx / len], &ints[idx % len]);
                let d = a
                    .iter()
                    .zip(b)
                    .map(|(x, y)| {
                        let d = (x - y).abs();
                        if metric == Metric::Circle {
                            d.min(period - d)
                        } else {
                            d
                        }
                    })
                    .max()
                    .unwrap();
                u64::try_from(d).map_err(|_| EstimatorError::TooFine)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FiniteSystem {
            len,
            den,
            scaled,
            next,
        })
    }

    /// Explicit distance matrix; checked to be a metric.
    pub fn from_matrix(dist: &[Vec<BigRational>], next: Vec<usize>) -> Result<Self> {
        let len = dist.len();
        if len == 0 {
            return Err(EstimatorError::Empty);
        }
        if next.len() != len || dist.iter().any(|r| r.len() != len) {
            return Err(EstimatorError::Parse("matrix and map sizes differ".into()));
        }
        check_map(&next)?;
        let mut den = 1u64;
        for d in dist.iter().flatten() {
            if d.is_negative() {
                return Err(EstimatorError::NotMetric("negative entry".into()));
            }
            den = lcm_u64(den, d.denom())?;
        }
        let scale = BigInt::from(den);
        let scaled = dist
            .iter()
            .flatten()
            .map(|d| {
                (d.numer() * (&scale / d.denom()))
                    .to_u64()
                    .ok_or(EstimatorError::TooFine)
            })
            .collect::<Result<Vec<_>>>()?;
        let sys = FiniteSystem {
            len,
            den,
            scaled,
            next,
        };
        sys.check_metric()?;
        Ok(sys)
    }

    fn check_metric(&self) -> Result<()> {
        let d = |i: usize, j: usize| self.scaled[i * self.len + j];
        for i in 0..self.len {
            if d(i, i) != 0 {
                return Err(EstimatorError::NotMetric(format!("d({i},{i}) != 0")));
            }
            for j in 0..self.len {
                if d(i, j) != d(j, i) {
                    return Err(EstimatorError::NotMetric(format!(
                        "d({i},{j}) != d({j},{i})"
                    )));
                }
            }
        }
        let bad = (0..self.len).into_par_iter().find_first(|&i| {
            (0..self.len).any(|j| (0..self.len).any(|k| d(i, k) > d(i, j) + d(j, k)))
        });
        match bad {
            Some(i) => Err(EstimatorError::NotMetric(format!(
                "triangle inequality fails at {i}"
            ))),
            None => Ok(()),
        }
    }

    /// Parses `{"points": [...], "metric": "euclidean"|"linf"|"circle",
    /// "next": [...]}` or `{"dist": [[...]], "next": [...]}`. Coordinates and
    /// distances are numbers or rational strings.
    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let parse_num = |x: &serde_json::Value| -> Result<BigRational> {
            let text = match x {
                serde_json::Value::String(s) => s.clone(),
                serde_json::Value::Number(n) => n.to_string(),
                other => return Err(EstimatorError::Parse(format!("not a number: {other}"))),
            };
            parse_big_rational(&text).map_err(|e| EstimatorError::Parse(e.to_string()))
        };
        let next: Vec<usize> = v
            .get("next")
            .and_then(|n| n.as_array())
            .ok_or_else(|| EstimatorError::Parse("missing \"next\"".into()))?
            .iter()
            .map(|x| {
                x.as_u64()
                    .map(|x| x as usize)
                    .ok_or_else(|| EstimatorError::Parse(format!("bad map entry {x}")))
            })
            .collect::<Result<_>>()?;
        if let Some(rows) = v.get("dist").and_then(|d| d.as_array()) {
            let dist = rows
                .iter()
                .map(|r| {
                    r.as_array()
                        .ok_or_else(|| EstimatorError::Parse("matrix row is not a list".into()))?
                        .iter()
                        .map(parse_num)
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            return Self::from_matrix(&dist, next);
        }
        let metric = match v
            .get("metric")
            .and_then(|m| m.as_str())
            .unwrap_or("euclidean")
        {
            "euclidean" => Metric::Euclidean,
            "linf" => Metric::Linf,
            "circle" => Metric::Circle,
            other => return Err(EstimatorError::Parse(format!("unknown metric {other}"))),
        };
        let points = v
            .get("points")
            .and_then(|p| p.as_array())
            .ok_or_else(|| EstimatorError::Parse("missing \"points\" or \"dist\"".into()))?
            .iter()
            .map(|p| match p.as_array() {
                Some(coords) => coords.iter().map(parse_num).collect(),
                None => Ok(vec![parse_num(p)?]),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_points(&points, metric, next)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let v: serde_json::Value =
            serde_json::from_str(text).map_err(|e| EstimatorError::Parse(e.to_string()))?;
        Self::from_json(&v)
    }

    /// `x ↦ 2x` on the grid `{k/m}` of the circle.
    pub fn doubling_grid(m: usize) -> Self {
        Self::circle_grid(m, (0..m).map(|k| 2 * k % m).collect())
    }

    /// `x ↦ x + shift/m` on the grid `{k/m}` of the circle.
    pub fn rotation(m: usize, shift: usize) -> Self {
        Self::circle_grid(m, (0..m).map(|k| (k + shift) % m).collect())
    }

    /// Identity on the grid `{k/m}` of the circle.
    pub fn identity(m: usize) -> Self {
        Self::circle_grid(m, (0..m).collect())
    }

    fn circle_grid(m: usize, next: Vec<usize>) -> Self {
        let scaled = (0..m * m)
            .map(|idx| {
                let d = (idx / m).abs_diff(idx % m);
                d.min(m - d) as u64
            })
            .collect();
        FiniteSystem {
            len: m,
            den: m as u64,
            scaled,
            next,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn next(&self) -> &[usize] {
        &self.next
    }

    pub fn dist(&self, x: usize, y: usize) -> BigRational {
        BigRational::new(self.scaled[x * self.len + y].into(), self.den.into())
    }

    pub fn diameter(&self) -> BigRational {
        BigRational::new((*self.scaled.iter().max().unwrap()).into(), self.den.into())
    }

    /// `diam / 2^j` for `j = 1..=rungs`, decreasing.
    pub fn ladder(&self, rungs: u32) -> Vec<BigRational> {
        let diam = self.diameter();
        (1..=rungs)
            .map(|j| &diam / BigRational::from_integer(BigInt::from(2u32).pow(j)))
            .collect()
    }

    /// Least scaled integer `t` with `d < ε` iff `scaled d < t`.
    fn threshold(&self, eps: &BigRational) -> Result<u64> {
        if !eps.is_positive() {
            return Err(EstimatorError::BadEpsilon);
        }
        let t = (eps * BigRational::from_integer(self.den.into()))
            .ceil()
            .to_integer();
        Ok(t.to_u64().unwrap_or(u64::MAX))
    }

    /// Scaled Bowen distances `d_1, ..., d_horizon`, built by
    /// `d_{n+1}(x,y) = max(d(x,y), d_n(f x, f y))`.
    pub fn bowen(&self, horizon: usize) -> BowenIter<'_> {
        BowenIter {
            sys: self,
            current: None,
            remaining: horizon,
        }
    }

    fn bowen_at(&self, n: usize) -> Result<Vec<u64>> {
        if n == 0 {
            return Err(EstimatorError::ZeroLength);
        }
        Ok(self.bowen(n).last().unwrap())
    }
}

/// Yields the scaled `d_n` matrices for `n = 1, 2, ...`.
pub struct BowenIter<'a> {
    sys: &'a FiniteSystem,
    current: Option<Vec<u64>>,
    remaining: usize,
}

impl Iterator for BowenIter<'_> {
    type Item = Vec<u64>;

    fn next(&mut self) -> Option<Vec<u64>> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let sys = self.sys;
        let len = sys.len;
        let next = match &self.current {
            None => sys.scaled.clone(),
            Some(prev) => (0..len * len)
                .into_par_iter()
                .map(|idx| {
                    let (x, y) = (idx / len, idx % len);
                    sys.scaled[idx].max(prev[sys.next[x] * len + sys.next[y]])
                })
                .collect(),
        };
        self.current = Some(next.clone());
        Some(next)
    }
}

/// `d_n(x,y) = max_{0<=k<n} d(f^k x, f^k y)`.
pub fn dyn_dist(sys: &FiniteSystem, x: usize, y: usize, n: usize) -> Result<BigRational> {
    if n == 0 {
        return Err(EstimatorError::ZeroLength);
    }
    let (mut a, mut b) = (x, y);
    let mut best = 0u64;
    for _ in 0..n {
        best = best.max(sys.scaled[a * sys.len + b]);
        a = sys.next[a];
        b = sys.next[b];
    }
    Ok(BigRational::new(best.into(), sys.den.into()))
}

/// How a count relates to the quantity it estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Tag {
    Exact,
    /// At most the true value.
    Lower,
    /// At least the true value.
    Upper,
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tag::Exact => "exact",
            Tag::Lower => "lower",
            Tag::Upper => "upper",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Count {
    pub value: u64,
    pub tag: Tag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Spanning,
    Separated,
    Cover,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Spanning => "spanning",
            Method::Separated => "separated",
            Method::Cover => "cover",
        })
    }
}

/// Greedy `(n,ε)`-separated set in index order: every point is within
/// `d_n < ε` of some chosen point or chosen itself, so the set is maximal.
pub fn separated_set(sys: &FiniteSystem, n: usize, eps: &BigRational) -> Result<Vec<usize>> {
    let dn = sys.bowen_at(n)?;
    Ok(greedy_separated(&dn, sys.len, sys.threshold(eps)?))
}

fn greedy_separated(dn: &[u64], len: usize, thr: u64) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::new();
    for x in 0..len {
        if chosen.iter().all(|&y| dn[x * len + y] >= thr) {
            chosen.push(x);
        }
    }
    chosen
}

/// Largest `(n,ε)`-separated set: exact up to `EXACT_POINTS` points, greedy
/// (a lower bound) above.
pub fn separated_count(sys: &FiniteSystem, n: usize, eps: &BigRational) -> Result<Count> {
    let dn = sys.bowen_at(n)?;
    separated_from(&dn, sys.len, sys.threshold(eps)?)
}

fn separated_from(dn: &[u64], len: usize, thr: u64) -> Result<Count> {
    if len <= EXACT_POINTS {
        let conflict: Vec<u32> = (0..len)
            .map(|x| {
                (0..len)
                    .filter(|&y| y != x && dn[x * len + y] < thr)
                    .fold(0u32, |m, y| m | 1 << y)
            })
            .collect();
        return Ok(Count {
            value: max_independent(&conflict, (1u32 << len) - 1) as u64,
            tag: Tag::Exact,
        });
    }
    Ok(Count {
        value: greedy_separated(dn, len, thr).len() as u64,
        tag: Tag::Lower,
    })
}

/// Largest subset of `candidates` with no two members in conflict.
fn max_independent(conflict: &[u32], candidates: u32) -> u32 {
    if candidates == 0 {
        return 0;
    }
    let v = candidates.trailing_zeros() as usize;
    let rest = candidates & !(1 << v);
    let take = 1 + max_independent(conflict, rest & !conflict[v]);
    if conflict[v] & rest == 0 {
        return take;
    }
    take.max(max_independent(conflict, rest))
}

/// Smallest `(n,ε)`-spanning set: exact up to `EXACT_POINTS` points,
/// otherwise the smaller of a greedy ball cover and the greedy separated
/// set (which also spans), an upper bound.
pub fn spanning_count(sys: &FiniteSystem, n: usize, eps: &BigRational) -> Result<Count> {
    let dn = sys.bowen_at(n)?;
    spanning_from(&dn, sys.len, sys.threshold(eps)?)
}

fn spanning_from(dn: &[u64], len: usize, thr: u64) -> Result<Count> {
    let balls: Vec<Bits> = (0..len)
        .map(|x| Bits::from_fn(len, |y| dn[x * len + y] < thr))
        .collect();
    if len <= EXACT_POINTS {
        let full = Bits::full(len);
        let best = min_cover(&balls, &full, len).unwrap();
        return Ok(Count {
            value: best as u64,
            tag: Tag::Exact,
        });
    }
    let greedy = lazy_greedy_cover(&balls, &Bits::full(len));
    let separated = greedy_separated(dn, len, thr).len();
    Ok(Count {
        value: greedy.min(separated) as u64,
        tag: Tag::Upper,
    })
}

/// Fixed-width bitset over point indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Bits(Vec<u64>);

impl Bits {
    fn empty(len: usize) -> Self {
        Bits(vec![0; len.div_ceil(64)])
    }

    fn full(len: usize) -> Self {
        Self::from_fn(len, |_| true)
    }

    fn from_fn(len: usize, f: impl Fn(usize) -> bool) -> Self {
        let mut b = Self::empty(len);
        for i in (0..len).filter(|&i| f(i)) {
            b.0[i / 64] |= 1 << (i % 64);
        }
        b
    }

    fn contains(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    fn and(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    fn or_assign(&mut self, other: &Bits) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a |= b;
        }
    }

    fn minus_assign(&mut self, other: &Bits) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a &= !b;
        }
    }

    fn count_and(&self, other: &Bits) -> u32 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a & b).count_ones())
            .sum()
    }

    fn covers(&self, other: &Bits) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & b == *b)
    }
}

/// Greedy set cover with lazily refreshed gains; ties go to the lower index.
fn lazy_greedy_cover(sets: &[Bits], target: &Bits) -> usize {
    let mut uncovered = target.clone();
    let mut heap: BinaryHeap<(u32, Reverse<usize>)> = sets
        .iter()
        .enumerate()
        .map(|(i, s)| (s.count_and(&uncovered), Reverse(i)))
        .collect();
    let mut used = 0;
    while !uncovered.is_empty() {
        let Some((gain, Reverse(i))) = heap.pop() else {
            break;
        };
        let fresh = sets[i].count_and(&uncovered);
        if fresh == 0 {
            continue;
        }
        if fresh < gain {
            heap.push((fresh, Reverse(i)));
            continue;
        }
        uncovered.minus_assign(&sets[i]);
        used += 1;
    }
    used
}

/// Fewest sets covering `target`, trying sizes in increasing order.
fn min_cover(sets: &[Bits], target: &Bits, limit: usize) -> Option<usize> {
    fn search(sets: &[Bits], target: &Bits, from: usize, left: usize, acc: &Bits) -> bool {
        if acc.covers(target) {
            return true;
        }
        if left == 0 {
            return false;
        }
        (from..sets.len()).any(|i| {
            let mut next = acc.clone();
            next.or_assign(&sets[i]);
            next != *acc && search(sets, target, i + 1, left - 1, &next)
        })
    }
    let start = Bits(vec![0; target.0.len()]);
    (0..=limit.min(sets.len())).find(|&k| search(sets, target, 0, k, &start))
}

/// Refined cover `𝒰^n`: the distinct nonempty sets
/// `U_0 ∩ f^{-1} U_1 ∩ ... ∩ f^{-(n-1)} U_{n-1}`, sorted.
fn refine(sys: &FiniteSystem, cover: &[Bits], n: usize) -> Vec<Bits> {
    let len = sys.len;
    let mut current: BTreeSet<Bits> = cover.iter().filter(|b| !b.is_empty()).cloned().collect();
    for _ in 1..n {
        let pulled: Vec<Bits> = current
            .iter()
            .map(|b| Bits::from_fn(len, |x| b.contains(sys.next[x])))
            .collect();
        current = cover
            .iter()
            .flat_map(|u| pulled.iter().map(move |p| u.and(p)))
            .filter(|b| !b.is_empty())
            .collect();
    }
    current.into_iter().collect()
}

/// Smallest subcover of `𝒰^n`: exact when it has at most
/// `EXACT_COVER_SETS` sets, greedy (an upper bound) otherwise.
pub fn cover_count(sys: &FiniteSystem, cover: &[Vec<usize>], n: usize) -> Result<Count> {
    if n == 0 {
        return Err(EstimatorError::ZeroLength);
    }
    let sets = cover_bits(sys, cover)?;
    Ok(cover_from(sys, &sets, n))
}

fn cover_bits(sys: &FiniteSystem, cover: &[Vec<usize>]) -> Result<Vec<Bits>> {
    let sets: Vec<Bits> = cover
        .iter()
        .map(|u| {
            let mut b = Bits::empty(sys.len);
            for &x in u {
                if x >= sys.len {
                    return Err(EstimatorError::Parse(format!(
                        "cover index {x} out of range"
                    )));
                }
                b.0[x / 64] |= 1 << (x % 64);
            }
            Ok(b)
        })
        .collect::<Result<_>>()?;
    let mut union = Bits::empty(sys.len);
    for s in &sets {
        union.or_assign(s);
    }
    if let Some(x) = (0..sys.len).find(|&x| !union.contains(x)) {
        return Err(EstimatorError::NotACover(x));
    }
    Ok(sets)
}

fn cover_from(sys: &FiniteSystem, cover: &[Bits], n: usize) -> Count {
    let refined = refine(sys, cover, n);
    let full = Bits::full(sys.len);
    if refined.len() <= EXACT_COVER_SETS {
        let best = min_cover(&refined, &full, refined.len()).expect("refinement covers");
        Count {
            value: best as u64,
            tag: Tag::Exact,
        }
    } else {
        Count {
            value: lazy_greedy_cover(&refined, &full) as u64,
            tag: Tag::Upper,
        }
    }
}

/// Counts along one rung: one `ε` (or one cover) for `n = 1..=horizon`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rung {
    pub label: String,
    pub epsilon: Option<BigRational>,
    pub counts: Vec<u64>,
    pub tags: Vec<Tag>,
}

/// Count tables for a ladder of scales, finest last.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthSample {
    pub method: Method,
    pub rungs: Vec<Rung>,
}

impl GrowthSample {
    /// Counts for every rung of `ladder` (decreasing) and `n <= horizon`.
    ///
    /// Greedy bounds are tightened with the monotonicity they must obey:
    /// a lower bound also bounds every later `n` and every finer `ε`, an
    /// upper bound every earlier `n` and every coarser `ε`.
    pub fn sample(
        sys: &FiniteSystem,
        method: Method,
        ladder: &[BigRational],
        horizon: usize,
    ) -> Result<Self> {
        if horizon == 0 {
            return Err(EstimatorError::ZeroLength);
        }
        if method == Method::Cover {
            return Err(EstimatorError::Parse("use GrowthSample::covers".into()));
        }
        if ladder.windows(2).any(|w| w[1] >= w[0]) {
            return Err(EstimatorError::Parse("ladder must decrease".into()));
        }
        let thresholds: Vec<u64> = ladder
            .iter()
            .map(|e| sys.threshold(e))
            .collect::<Result<_>>()?;
        // raw[n-1][rung]
        let raw: Vec<Vec<Count>> = sys
            .bowen(horizon)
            .map(|dn| {
                thresholds
                    .par_iter()
                    .map(|&thr| match method {
                        Method::Spanning => spanning_from(&dn, sys.len, thr),
                        _ => separated_from(&dn, sys.len, thr),
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        let mut rungs: Vec<Rung> = ladder
            .iter()
            .enumerate()
            .map(|(r, eps)| Rung {
                label: eps.to_string(),
                epsilon: Some(eps.clone()),
                counts: raw.iter().map(|row| row[r].value).collect(),
                tags: raw.iter().map(|row| row[r].tag).collect(),
            })
            .collect();
        tighten(&mut rungs, method);
        Ok(GrowthSample { method, rungs })
    }

    /// Cover counts for a list of covers, each a list of point sets.
    pub fn covers(sys: &FiniteSystem, covers: &[Vec<Vec<usize>>], horizon: usize) -> Result<Self> {
        if horizon == 0 {
            return Err(EstimatorError::ZeroLength);
        }
        let rungs = covers
            .iter()
            .enumerate()
            .map(|(idx, cover)| {
                let sets = cover_bits(sys, cover)?;
                let row: Vec<Count> = (1..=horizon)
                    .into_par_iter()
                    .map(|n| cover_from(sys, &sets, n))
                    .collect();
                let mut counts: Vec<u64> = row.iter().map(|c| c.value).collect();
                // Upper bounds also bound every earlier n.
                for n in (0..counts.len().saturating_sub(1)).rev() {
                    counts[n] = counts[n].min(counts[n + 1]);
                }
                Ok(Rung {
                    label: format!("cover{}", idx + 1),
                    epsilon: None,
                    counts,
                    tags: row.iter().map(|c| c.tag).collect(),
                })
            })
            .collect::<Result<_>>()?;
        Ok(GrowthSample {
            method: Method::Cover,
            rungs,
        })
    }

    pub fn horizon(&self) -> usize {
        self.rungs.first().map_or(0, |r| r.counts.len())
    }

    /// Nondecreasing in `n` on every rung and, when rungs carry epsilons,
    /// nonincreasing in `ε` at every `n`.
    pub fn check_monotone(&self) -> Result<()> {
        for (idx, r) in self.rungs.iter().enumerate() {
            if r.counts.windows(2).any(|w| w[1] < w[0]) {
                return Err(EstimatorError::NotMonotone(idx, idx));
            }
        }
        if self.rungs.iter().all(|r| r.epsilon.is_some()) {
            for (idx, w) in self.rungs.windows(2).enumerate() {
                if w[0]
                    .counts
                    .iter()
                    .zip(&w[1].counts)
                    .any(|(coarse, fine)| fine < coarse)
                {
                    return Err(EstimatorError::NotMonotone(idx, idx + 1));
                }
            }
        }
        Ok(())
    }

    /// `method,epsilon,n,count,tag`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("method,epsilon,n,count,tag\n");
        for r in &self.rungs {
            for (idx, (c, t)) in r.counts.iter().zip(&r.tags).enumerate() {
                writeln!(out, "{},{},{},{},{}", self.method, r.label, idx + 1, c, t).unwrap();
            }
        }
        out
    }
}

fn tighten(rungs: &mut [Rung], method: Method) {
    let horizon = rungs.first().map_or(0, |r| r.counts.len());
    let lower = method == Method::Separated;
    for n in 0..horizon {
        for r in 0..rungs.len() {
            let mut v = rungs[r].counts[n];
            if lower {
                if n > 0 {
                    v = v.max(rungs[r].counts[n - 1]);
                }
                if r > 0 {
                    v = v.max(rungs[r - 1].counts[n]);
                }
            }
            rungs[r].counts[n] = v;
        }
    }
    if !lower {
        for n in (0..horizon).rev() {
            for r in (0..rungs.len()).rev() {
                let mut v = rungs[r].counts[n];
                if n + 1 < horizon {
                    v = v.min(rungs[r].counts[n + 1]);
                }
                if r + 1 < rungs.len() {
                    v = v.min(rungs[r + 1].counts[n]);
                }
                rungs[r].counts[n] = v;
            }
        }
    }
}

/// `g_ε(n) <= s_ε(n) <= g_{ε/2}(n)` wherever `ε/2` is also a rung.
pub fn check_interleaving(spanning: &GrowthSample, separated: &GrowthSample) -> bool {
    fn find<'a>(sample: &'a GrowthSample, eps: &BigRational) -> Option<&'a Rung> {
        sample
            .rungs
            .iter()
            .find(|r| r.epsilon.as_ref() == Some(eps))
    }
    let two = BigRational::from_integer(2.into());
    separated.rungs.iter().all(|s| {
        let Some(eps) = &s.epsilon else {
            return true;
        };
        let below =
            find(spanning, eps).is_none_or(|g| g.counts.iter().zip(&s.counts).all(|(g, s)| g <= s));
        let above = find(spanning, &(eps / &two))
            .is_none_or(|g| s.counts.iter().zip(&g.counts).all(|(s, g)| s <= g));
        below && above
    })
}

/// Class read off a sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassEstimate {
    /// Pointwise supremum over the rungs.
    pub class: Growth,
    /// Simple formula equivalent to `class` on the sampled window, if any.
    pub label: Option<GrowthExpr>,
    pub h: Projection,
    pub h_pol: Projection,
    pub horizon: usize,
}

/// Entropy is the largest exponential rate over the rungs; the polynomial
/// entropy is the largest polynomial degree, or `∞` once the rate is
/// positive.
pub fn estimate_class(sample: &GrowthSample, cfg: &GrowthConfig) -> Result<ClassEstimate> {
    if sample.rungs.len() < 3 {
        return Err(EstimatorError::TooFewRungs {
            need: 3,
            got: sample.rungs.len(),
        });
    }
    sample.check_monotone()?;
    let horizon = sample.horizon();
    let tables: Vec<Growth> = sample
        .rungs
        .iter()
        .map(|r| TabulatedGrowth::from_integers(r.counts.iter().copied()).map(Growth::from))
        .collect::<std::result::Result<_, _>>()?;
    let class = ordered_chain(&tables)?.top().clone();
    estimate_tables(&tables, class, horizon, cfg)
}

/// Same reading for a single count table.
pub fn estimate_table(table: &Growth, horizon: usize, cfg: &GrowthConfig) -> Result<ClassEstimate> {
    estimate_tables(std::slice::from_ref(table), table.clone(), horizon, cfg)
}

fn estimate_tables(
    tables: &[Growth],
    class: Growth,
    horizon: usize,
    cfg: &GrowthConfig,
) -> Result<ClassEstimate> {
    let mut h = pi_e(&tables[0], horizon)?;
    for t in &tables[1..] {
        let p = pi_e(t, horizon)?;
        if p.value > h.value {
            h = p;
        }
    }
    let h_pol = if h.value > EXP_THRESHOLD {
        Projection {
            value: f64::INFINITY,
            exact: None,
            estimate: true,
        }
    } else {
        let mut best = pi_p(&tables[0], horizon)?;
        for t in &tables[1..] {
            let p = pi_p(t, horizon)?;
            if p.value > best.value {
                best = p;
            }
        }
        best
    };
    let label = label_for(&class, &h, &h_pol, horizon, cfg)?;
    Ok(ClassEstimate {
        class,
        label,
        h,
        h_pol,
        horizon,
    })
}

/// Constant, `n^t` with `t` a multiple of `1/2`, or `e^{rn}` with `r` to
/// three decimals; kept only if `compare` finds it equivalent.
fn label_for(
    class: &Growth,
    h: &Projection,
    h_pol: &Projection,
    horizon: usize,
    cfg: &GrowthConfig,
) -> Result<Option<GrowthExpr>> {
    let candidate = if h.value > EXP_THRESHOLD {
        let r = num_rational::Rational64::new((h.value * 1000.0).round() as i64, 1000);
        GrowthExpr::exponential(r)
    } else {
        let t = num_rational::Rational64::new((h_pol.value * 2.0).round().max(0.0) as i64, 2);
        GrowthExpr::new(t, 0.into(), 0.into(), 0.into())?
    };
    let verdict = compare(class, &candidate.clone().into(), horizon, cfg)?;
    Ok((verdict.relation == Relation::Equiv).then_some(candidate))
}

impl ClassEstimate {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "label": self.label.as_ref().map(|l| l.to_string()),
            "h": self.h.to_string(),
            "h_pol": self.h_pol.to_string(),
            "horizon": self.horizon,
            "finite_horizon_estimate": self.h.estimate || self.h_pol.estimate,
        })
    }
}

/// `ln` of a count, for reports.
pub fn ln_count(c: u64) -> f64 {
    growth::ln_rational(&BigRational::from_integer(c.into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn cycle(m: usize) -> FiniteSystem {
        FiniteSystem::rotation(m, 1)
    }

    #[test]
    fn distances_on_cycle() {
        let sys = cycle(8);
        assert_eq!(sys.dist(0, 1), q(1, 8));
        assert_eq!(sys.dist(0, 7), q(1, 8));
        assert_eq!(sys.diameter(), q(1, 2));
        assert_eq!(dyn_dist(&sys, 2, 5, 1).unwrap(), sys.dist(2, 5));
        assert_eq!(dyn_dist(&sys, 3, 3, 9).unwrap(), BigRational::zero());
        // A rotation keeps adjacent pairs adjacent.
        assert_eq!(dyn_dist(&sys, 0, 1, 3).unwrap(), q(1, 8));
        let dbl = FiniteSystem::doubling_grid(8);
        // pairs (0,1), (0,2), (0,4): distances 1/8, 1/4, 1/2.
        assert_eq!(dyn_dist(&dbl, 0, 1, 3).unwrap(), q(1, 2));
        assert_eq!(dyn_dist(&dbl, 0, 1, 2).unwrap(), q(1, 4));
    }

    #[test]
    fn json_systems() {
        let sys = FiniteSystem::from_json_str(
            r#"{"metric":"circle","points":["0","1/4","1/2","3/4"],"next":[1,2,3,0]}"#,
        )
        .unwrap();
        assert_eq!(sys, FiniteSystem::rotation(4, 1));
        let sys = FiniteSystem::from_json_str(r#"{"points":[0, 0.5, 2],"next":[0,0,1]}"#).unwrap();
        assert_eq!(sys.dist(0, 2), q(2, 1));
        let sys = FiniteSystem::from_json_str(
            r#"{"metric":"linf","points":[[0,0],[1,"1/3"]],"next":[1,0]}"#,
        )
        .unwrap();
        assert_eq!(sys.dist(0, 1), q(1, 1));
        let sys = FiniteSystem::from_json_str(r#"{"dist":[[0,1],[1,0]],"next":[1,0]}"#).unwrap();
        assert_eq!(sys.diameter(), q(1, 1));
        assert!(matches!(
            FiniteSystem::from_json_str(r#"{"dist":[[0,1,5],[1,0,1],[5,1,0]],"next":[0,1,2]}"#),
            Err(EstimatorError::NotMetric(_))
        ));
        assert!(matches!(
            FiniteSystem::from_json_str(r#"{"points":[0,1],"next":[0,2]}"#),
            Err(EstimatorError::BadMap { .. })
        ));
        assert!(FiniteSystem::from_json_str(
            r#"{"metric":"euclidean","points":[[0,0]],"next":[0]}"#
        )
        .is_err());
    }

    #[test]
    fn counts_above_diameter() {
        let sys = FiniteSystem::doubling_grid(64);
        let big = q(1, 1);
        assert_eq!(separated_count(&sys, 5, &big).unwrap().value, 1);
        assert_eq!(spanning_count(&sys, 5, &big).unwrap().value, 1);
    }

    #[test]
    fn identity_counts_do_not_move() {
        let sys = FiniteSystem::identity(40);
        let eps = q(1, 16);
        let s1 = separated_count(&sys, 1, &eps).unwrap();
        let g1 = spanning_count(&sys, 1, &eps).unwrap();
        for n in [2, 7, 30] {
            assert_eq!(separated_count(&sys, n, &eps).unwrap(), s1);
            assert_eq!(spanning_count(&sys, n, &eps).unwrap(), g1);
        }
    }

    #[test]
    fn rotation_counts_are_exact_and_constant() {
        let sys = cycle(16);
        for eps in sys.ladder(6) {
            let s1 = separated_count(&sys, 1, &eps).unwrap();
            assert_eq!(s1.tag, Tag::Exact);
            for n in 2..=20 {
                assert_eq!(separated_count(&sys, n, &eps).unwrap(), s1);
            }
        }
    }

    /// Greedy on more than 16 points still returns a maximal set.
    #[test]
    fn greedy_separated_is_maximal() {
        let sys = FiniteSystem::doubling_grid(48);
        for n in 1..5 {
            for eps in sys.ladder(4) {
                let set = separated_set(&sys, n, &eps).unwrap();
                for x in 0..sys.len() {
                    if set.contains(&x) {
                        continue;
                    }
                    assert!(set.iter().any(|&y| dyn_dist(&sys, x, y, n).unwrap() < eps));
                }
                for (i, &a) in set.iter().enumerate() {
                    for &b in &set[i + 1..] {
                        assert!(dyn_dist(&sys, a, b, n).unwrap() >= eps);
                    }
                }
            }
        }
    }

    #[test]
    fn doubling_counts_double() {
        let sys = FiniteSystem::doubling_grid(1024);
        let eps = q(1, 4);
        let counts: Vec<u64> = (1..=10)
            .map(|n| separated_count(&sys, n, &eps).unwrap().value)
            .collect();
        assert_eq!(counts, vec![4, 8, 16, 32, 64, 128, 256, 512, 1024, 1024]);
    }

    /// Brute-force minimum spanning set on a small doubling grid.
    #[test]
    fn spanning_matches_brute_force() {
        let sys = FiniteSystem::doubling_grid(12);
        for n in 1..=4 {
            for eps in sys.ladder(3) {
                let mut best = usize::MAX;
                for mask in 1u32..1 << 12 {
                    let spans = (0..12).all(|y| {
                        (0..12)
                            .any(|x| mask >> x & 1 == 1 && dyn_dist(&sys, x, y, n).unwrap() < eps)
                    });
                    if spans {
                        best = best.min(mask.count_ones() as usize);
                    }
                }
                assert_eq!(spanning_count(&sys, n, &eps).unwrap().value, best as u64);
            }
        }
    }

    fn halves(m: usize) -> Vec<Vec<usize>> {
        vec![(0..=m / 2).collect(), (m / 2..m).chain([0]).collect()]
    }

    /// Exhaustive subcover search over the refined cover as the oracle.
    #[test]
    fn cover_counts() {
        let sys = FiniteSystem::doubling_grid(32);
        let single = vec![(0..32).collect::<Vec<_>>()];
        for n in 1..=6 {
            assert_eq!(cover_count(&sys, &single, n).unwrap().value, 1);
        }
        let cover = halves(32);
        assert_eq!(cover_count(&sys, &cover, 1).unwrap().value, 2);

        let n = 4;
        let cells: Vec<Vec<usize>> = {
            let mut words: BTreeSet<Vec<usize>> = BTreeSet::new();
            let mut cells = Vec::new();
            for w in 0..(1usize << n) {
                let word: Vec<usize> = (0..n).map(|k| w >> k & 1).collect();
                let cell: Vec<usize> = (0..32)
                    .filter(|&x| {
                        let mut y = x;
                        word.iter().all(|&u| {
                            let ok = cover[u].contains(&y);
                            y = sys.next()[y];
                            ok
                        })
                    })
                    .collect();
                if !cell.is_empty() && words.insert(cell.clone()) {
                    cells.push(cell);
                }
            }
            cells
        };
        let mut best = usize::MAX;
        for mask in 1u32..1 << cells.len() {
            let covered: BTreeSet<usize> = (0..cells.len())
                .filter(|&i| mask >> i & 1 == 1)
                .flat_map(|i| cells[i].iter().copied())
                .collect();
            if covered.len() == 32 {
                best = best.min(mask.count_ones() as usize);
            }
        }
        let c = cover_count(&sys, &cover, n).unwrap();
        assert_eq!(c.tag, Tag::Exact);
        assert_eq!(c.value, best as u64);

        assert!(matches!(
            cover_count(&sys, &[vec![0, 1]], 1),
            Err(EstimatorError::NotACover(2))
        ));
    }

    #[test]
    fn cover_counts_jump_boundedly() {
        let sys = FiniteSystem::doubling_grid(256);
        let cover = halves(256);
        let sample = GrowthSample::covers(&sys, std::slice::from_ref(&cover), 10).unwrap();
        let c = &sample.rungs[0].counts;
        for w in c.windows(2) {
            assert!(w[1] <= cover.len() as u64 * w[0]);
        }
    }

    #[test]
    fn samples_are_monotone_and_interleave() {
        for sys in [
            FiniteSystem::doubling_grid(256),
            cycle(16),
            FiniteSystem::rotation(40, 3),
        ] {
            let ladder = sys.ladder(5);
            let g = GrowthSample::sample(&sys, Method::Spanning, &ladder, 16).unwrap();
            let s = GrowthSample::sample(&sys, Method::Separated, &ladder, 16).unwrap();
            g.check_monotone().unwrap();
            s.check_monotone().unwrap();
            assert!(check_interleaving(&g, &s));
        }
    }

    #[test]
    fn rotation_class() {
        let sys = cycle(16);
        let ladder = sys.ladder(DEFAULT_RUNGS);
        let s = GrowthSample::sample(&sys, Method::Spanning, &ladder, 32).unwrap();
        let est = estimate_class(&s, &GrowthConfig::default()).unwrap();
        assert_eq!(est.h.value, 0.0);
        assert_eq!(est.h_pol.value, 0.0);
        assert_eq!(est.label, Some(GrowthExpr::constant()));
    }

    #[test]
    fn doubling_entropy() {
        let sys = FiniteSystem::doubling_grid(1024);
        let ladder = sys.ladder(DEFAULT_RUNGS);
        let s = GrowthSample::sample(&sys, Method::Separated, &ladder, 16).unwrap();
        let est = estimate_class(&s, &GrowthConfig::default()).unwrap();
        assert!((est.h.value - 2f64.ln()).abs() <= 0.1, "{}", est.h.value);
        assert!(est.h_pol.is_infinite());
    }

    #[test]
    fn too_few_rungs() {
        let sys = cycle(16);
        let s = GrowthSample::sample(&sys, Method::Spanning, &sys.ladder(2), 16).unwrap();
        assert!(matches!(
            estimate_class(&s, &GrowthConfig::default()),
            Err(EstimatorError::TooFewRungs { .. })
        ));
    }

    #[test]
    fn sample_csv() {
        let sys = cycle(16);
        let s = GrowthSample::sample(&sys, Method::Separated, &sys.ladder(3), 16).unwrap();
        let csv = s.to_csv();
        assert!(csv.starts_with("method,epsilon,n,count,tag\nseparated,1/4,1,4,exact\n"));
        assert_eq!(csv.lines().count(), 1 + 3 * 16);
    }
}
