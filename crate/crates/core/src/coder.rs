//! Exact enumeration of coding words over `{Y_1, ..., Y_{L+2}, ∞}` for the
//! constructed maps, and a plane-dynamics simulator that re-derives the same
//! words from orbits in exact rational arithmetic.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use smallvec::SmallVec;
use thiserror::Error;

use crate::flexibility::{
    all_tuples, build_interval_tree, CompositePlan, ConstructionPlan, FlexError, IntervalTree,
    Location,
};
use crate::growth::{
    check_bjp, syndetic_transfer, trend_factor, Growth, GrowthConfig, GrowthError, Relation,
    SyndeticSet, TabulatedGrowth, Verdict, TREND_LIMIT,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoderError {
    #[error(transparent)]
    Growth(#[from] GrowthError),
    #[error(transparent)]
    Flex(#[from] FlexError),
    #[error("word length must be at least 1")]
    ZeroLength,
    #[error("k1_max={k1_max} is below n={n}; counts would be truncated")]
    Truncated { n: usize, k1_max: u64 },
    #[error("counts are incomplete at n={0}")]
    Incomplete(usize),
    #[error("counts fail the bounded jump property")]
    NoBjp,
    #[error("height {0} lies on an interval endpoint")]
    Boundary(BigRational),
    #[error("height {0} is outside the interval tree")]
    OutsideTree(BigRational),
    #[error("height {0} is not positive")]
    NonPositiveHeight(BigRational),
    #[error("orbit hit symbol {symbol} twice")]
    RepeatedHit { symbol: u32 },
    #[error("tuple entries must be positive")]
    BadTuple,
}

pub type Result<T> = std::result::Result<T, CoderError>;

/// Crossing times `(k_1, ..., k_{L+1})` of one orbit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct JumpTuple {
    k: SmallVec<[u64; 8]>,
}

impl JumpTuple {
    pub fn new(k: Vec<u64>) -> Result<Self> {
        if k.is_empty() || k.contains(&0) {
            return Err(CoderError::BadTuple);
        }
        Ok(JumpTuple { k: k.into() })
    }

    pub(crate) fn new_unchecked(k: Vec<u64>) -> Self {
        JumpTuple { k: k.into() }
    }

    pub fn k(&self) -> &[u64] {
        &self.k
    }

    pub fn k1(&self) -> u64 {
        self.k[0]
    }

    /// `k_1 + ... + k_{L+1}`.
    pub fn total(&self) -> u64 {
        self.k.iter().sum()
    }

    /// `T_1 = 0`, `T_{i+1} = T_i + k_i`.
    pub fn hit_times(&self) -> Vec<u64> {
        let mut t = Vec::with_capacity(self.k.len() + 1);
        t.push(0);
        for k in &self.k {
            t.push(t.last().unwrap() + k);
        }
        t
    }

    /// `2i k_1 <= k_1 + ... + k_{i+1} <= (2i+1) k_1` for every `i`.
    pub fn is_admissible(&self) -> bool {
        let k1 = self.k1();
        let mut s = k1;
        self.k[1..].iter().enumerate().all(|(idx, k)| {
            let i = idx as u64 + 1;
            s += k;
            2 * i * k1 <= s && s <= (2 * i + 1) * k1
        })
    }
}

/// Length-`n` itinerary, stored as its hits `(position, symbol)`; every other
/// position reads `∞`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CodingWord {
    pub n: usize,
    pub hits: SmallVec<[(u32, u32); 8]>,
}

impl CodingWord {
    pub fn empty(n: usize) -> Self {
        CodingWord {
            n,
            hits: SmallVec::new(),
        }
    }

    pub fn is_all_infinity(&self) -> bool {
        self.hits.is_empty()
    }

    /// Positions in `[0, n)`, both positions and symbols strictly increasing.
    pub fn is_well_formed(&self) -> bool {
        self.hits
            .iter()
            .all(|&(p, s)| (p as usize) < self.n && s >= 1)
            && self
                .hits
                .windows(2)
                .all(|w| w[0].0 < w[1].0 && w[0].1 < w[1].1)
    }

    /// First `m` letters.
    pub fn prefix(&self, m: usize) -> CodingWord {
        CodingWord {
            n: m,
            hits: self
                .hits
                .iter()
                .copied()
                .filter(|&(p, _)| (p as usize) < m)
                .collect(),
        }
    }
}

impl fmt::Display for CodingWord {
    /// `p:i` pairs separated by commas; the all-`∞` word prints empty.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (idx, (p, s)) in self.hits.iter().enumerate() {
            if idx > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}:{s}")?;
        }
        Ok(())
    }
}

/// Hits `{(T_i - start, i) : 0 <= T_i - start < n}`.
pub fn word_from_window(tuple: &JumpTuple, start: i64, n: usize) -> CodingWord {
    let hits = tuple
        .hit_times()
        .into_iter()
        .enumerate()
        .filter_map(|(idx, t)| {
            let p = t as i64 - start;
            (p >= 0 && (p as usize) < n).then_some((p as u32, idx as u32 + 1))
        })
        .collect();
    CodingWord { n, hits }
}

/// Exact word counts `c(1), ..., c(horizon)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WordCount {
    /// Size of the alphabet without `∞`.
    pub symbols: usize,
    pub k1_max: u64,
    pub values: Vec<BigUint>,
    pub complete: Vec<bool>,
}

impl WordCount {
    pub fn horizon(&self) -> usize {
        self.values.len()
    }

    pub fn at(&self, n: usize) -> &BigUint {
        &self.values[n - 1]
    }

    pub fn is_complete(&self) -> bool {
        self.complete.iter().all(|&c| c)
    }

    pub fn as_growth(&self) -> Result<Growth> {
        Ok(TabulatedGrowth::from_biguints(&self.values)?.into())
    }

    /// Largest `c(n+1)/c(n)` over the table.
    pub fn max_jump(&self) -> BigRational {
        self.jumps()
            .into_iter()
            .max()
            .unwrap_or_else(BigRational::one)
    }

    pub fn jumps(&self) -> Vec<BigRational> {
        self.values
            .windows(2)
            .map(|w| BigRational::new(BigInt::from(w[1].clone()), BigInt::from(w[0].clone())))
            .collect()
    }

    /// `n,c,ratio,complete` with `ratio = c(n)/a(n)`.
    pub fn to_csv(&self, target: &Growth) -> Result<String> {
        let a = target.rational_values(self.horizon())?;
        let mut out = String::from("n,c,ratio,complete\n");
        for n in 1..=self.horizon() {
            let ratio = BigRational::from_integer(BigInt::from(self.at(n).clone())) / &a[n - 1];
            writeln!(
                out,
                "{},{},{:.6e},{}",
                n,
                self.at(n),
                ratio.to_f64().unwrap_or(f64::NAN),
                self.complete[n - 1]
            )
            .unwrap();
        }
        Ok(out)
    }
}

/// Counts words of every length up to `horizon` using tuples with
/// `k_1 <= k1_max`. With `strict`, truncation (`k1_max < n`) is an error.
///
/// A word with at least two hits is fixed by its first symbol `i`, its first
/// position `p` and its visible gaps. For the remaining room `R = n-1-p` the
/// distinct gap prefixes that fit are collected once; each is tagged with the
/// largest gap `k_{i-1}` that precedes it, since the word only starts at `p`
/// when the previous hit falls before the window.
pub fn count_words(
    plan: &ConstructionPlan,
    horizon: usize,
    k1_max: u64,
    strict: bool,
) -> Result<WordCount> {
    if horizon == 0 {
        return Err(CoderError::ZeroLength);
    }
    if strict && (k1_max as usize) < horizon {
        return Err(CoderError::Truncated { n: horizon, k1_max });
    }
    let used = k1_max.min(horizon.saturating_sub(1) as u64);
    let tuples = all_tuples(plan, used)?;
    let l = plan.l;
    let symbols = l + 2;

    let cells: Vec<(usize, usize)> = (0..horizon)
        .flat_map(|r| (1..=l + 1).map(move |i| (r, i)))
        .collect();
    let partial: Vec<Vec<u64>> = cells
        .par_iter()
        .map(|&(r, i)| room_contribution(&tuples, i, r as u64, horizon))
        .collect();

    // multi[n-1] = Σ over (i, p) of distinct multi-hit words of length n.
    let mut multi = vec![0u64; horizon];
    for contrib in &partial {
        for (idx, c) in contrib.iter().enumerate() {
            multi[idx] += c;
        }
    }
    let values = (1..=horizon)
        .map(|n| BigUint::from(1 + (symbols * n) as u64 + multi[n - 1]))
        .collect();
    let complete = (1..=horizon).map(|n| k1_max as usize >= n).collect();
    Ok(WordCount {
        symbols,
        k1_max,
        values,
        complete,
    })
}

/// Contribution of first symbol `i` with room `r` to every length `n > r`:
/// entry `n-1` counts the distinct gap prefixes realizable at `p = n-1-r`.
fn room_contribution(tuples: &[JumpTuple], i: usize, r: u64, horizon: usize) -> Vec<u64> {
    let mut seen: FxHashMap<SmallVec<[u32; 8]>, u64> = FxHashMap::default();
    for t in tuples.iter().take_while(|t| t.k1() <= r) {
        let k = t.k();
        let mut key: SmallVec<[u32; 8]> = SmallVec::new();
        let mut sum = 0;
        for &g in &k[i - 1..] {
            sum += g;
            if sum > r {
                break;
            }
            key.push(g as u32);
        }
        if key.is_empty() {
            continue;
        }
        let before = if i == 1 { u64::MAX } else { k[i - 2] };
        let slot = seen.entry(key).or_insert(0);
        *slot = (*slot).max(before);
    }
    let mut before: Vec<u64> = seen.into_values().collect();
    before.sort_unstable();
    let mut out = vec![0u64; horizon];
    for n in (r as usize + 1)..=horizon {
        let p = (n - 1) as u64 - r;
        let realizable = before.len() - before.partition_point(|&b| b <= p);
        out[n - 1] = realizable as u64;
    }
    out
}

/// Single entry `c(n)`.
pub fn count_words_at(
    plan: &ConstructionPlan,
    n: usize,
    k1_max: u64,
    strict: bool,
) -> Result<BigUint> {
    Ok(count_words(plan, n, k1_max, strict)?.values.pop().unwrap())
}

/// Every word of length `n` by direct window enumeration over all
/// admissible tuples with `k_1 <= k1_max`, plus the single-symbol words and
/// the all-`∞` word. Sorted.
pub fn enumerate_words(plan: &ConstructionPlan, n: usize, k1_max: u64) -> Result<Vec<CodingWord>> {
    if n == 0 {
        return Err(CoderError::ZeroLength);
    }
    let tuples = all_tuples(plan, k1_max)?;
    let mut words: BTreeSet<CodingWord> = BTreeSet::new();
    words.insert(CodingWord::empty(n));
    for i in 1..=plan.l as u32 + 2 {
        for p in 0..n as u32 {
            words.insert(CodingWord {
                n,
                hits: SmallVec::from_slice(&[(p, i)]),
            });
        }
    }
    for t in &tuples {
        let last = *t.hit_times().last().unwrap() as i64;
        for s in (1 - n as i64)..=last {
            words.insert(word_from_window(t, s, n));
        }
    }
    Ok(words.into_iter().collect())
}

/// One line with `n`, then one word per line.
pub fn dump_words(n: usize, words: &[CodingWord]) -> String {
    let mut out = format!("{n}\n");
    for w in words {
        writeln!(out, "{w}").unwrap();
    }
    out
}

/// Counts for the translation: one wandering set crossed once by every
/// orbit, so a window either sees the crossing at one of `n` positions or
/// sees nothing.
pub fn translation_toy(horizon: usize) -> Result<WordCount> {
    if horizon == 0 {
        return Err(CoderError::ZeroLength);
    }
    let values = (1..=horizon)
        .map(|n| {
            let mut words: BTreeSet<CodingWord> = BTreeSet::new();
            words.insert(CodingWord::empty(n));
            for s in (1 - n as i64)..=0 {
                let p = (-s) as u32;
                words.insert(CodingWord {
                    n,
                    hits: SmallVec::from_slice(&[(p, 1)]),
                });
            }
            BigUint::from(words.len())
        })
        .collect();
    Ok(WordCount {
        symbols: 1,
        k1_max: 0,
        values,
        complete: vec![true; horizon],
    })
}

/// Outcome of comparing counts with the target on `(2L+2)ℕ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SyndeticReport {
    pub d1: BigRational,
    pub d2: BigRational,
    pub trend: f64,
    pub bjp: BigRational,
    pub verdict: Verdict,
}

impl SyndeticReport {
    pub fn passed(&self) -> bool {
        self.verdict.relation == Relation::Equiv
    }
}

pub fn verify_syndetic_bounds(
    plan: &ConstructionPlan,
    counts: &WordCount,
    horizon: usize,
    cfg: &GrowthConfig,
) -> Result<SyndeticReport> {
    if counts.horizon() < horizon {
        return Err(CoderError::Incomplete(horizon));
    }
    if let Some(n) = (1..=horizon).find(|&n| !counts.complete[n - 1]) {
        return Err(CoderError::Incomplete(n));
    }
    let set = SyndeticSet::multiples(plan.syndetic_gap());
    let points = set.points(horizon);
    let a = plan.target.rational_values(horizon)?;
    let ratios: Vec<BigRational> = points
        .iter()
        .map(|&n| BigRational::from_integer(BigInt::from(counts.at(n).clone())) / &a[n - 1])
        .collect();
    if ratios.is_empty() {
        return Err(GrowthError::EmptySyndetic(horizon).into());
    }
    let d1 = ratios.iter().min().unwrap().clone();
    let d2 = ratios.iter().max().unwrap().clone();
    let trend = trend_factor(
        &ratios
            .iter()
            .map(|r| r.to_f64().unwrap())
            .collect::<Vec<_>>(),
    );

    let c: Growth = TabulatedGrowth::from_biguints(&counts.values[..horizon])?.into();
    let bjp = check_bjp(&c, horizon, cfg)?.ok_or(CoderError::NoBjp)?;

    let bounded = &d2 / &d1 <= cfg.slack && (1.0 / TREND_LIMIT..=TREND_LIMIT).contains(&trend);
    let verdict = if bounded {
        syndetic_transfer(&c, &plan.target, set, horizon, cfg)?
    } else {
        Verdict {
            relation: Relation::NoVerdict,
            c1: Some(d1.clone()),
            c2: Some(d2.clone()),
            horizon,
            mode: crate::growth::Mode::Empirical,
        }
    };
    Ok(SyndeticReport {
        d1,
        d2,
        trend,
        bjp,
        verdict,
    })
}

/// First failures of the two exact bounds
/// `k Σ_{k_1<=k} e(k_1) <= c(k(2L+2))` and `c(n) <= (2L+3) n Σ_{k_1<=n} e(k_1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SandwichCheck {
    pub lower_checked: usize,
    pub upper_checked: usize,
    pub lower_failure: Option<usize>,
    pub upper_failure: Option<usize>,
}

impl SandwichCheck {
    pub fn holds(&self) -> bool {
        self.lower_failure.is_none() && self.upper_failure.is_none()
    }
}

/// Checks both bounds at every complete `n` of the table.
pub fn check_sandwich(plan: &ConstructionPlan, counts: &WordCount) -> SandwichCheck {
    let l = plan.l;
    let gap = 2 * l + 2;
    let upto = (1..=counts.horizon().min(plan.horizon))
        .take_while(|&n| counts.complete[n - 1])
        .last()
        .unwrap_or(0);
    let mut prefix = vec![BigUint::zero()];
    for n in 1..=upto {
        let next = prefix[n - 1].clone() + plan.e_at(n);
        prefix.push(next);
    }
    let lower: Vec<usize> = (1..=upto / gap).map(|k| k * gap).collect();
    let lower_failure = lower
        .iter()
        .copied()
        .find(|&n| counts.at(n) < &(&prefix[n / gap] * BigUint::from(n / gap)));
    let upper_failure =
        (1..=upto).find(|&n| counts.at(n) > &(&prefix[n] * BigUint::from((2 * l + 3) * n)));
    SandwichCheck {
        lower_checked: lower.len(),
        upper_checked: upto,
        lower_failure,
        upper_failure,
    }
}

/// Union over stages with disjoint alphabets: only the all-`∞` word is
/// shared, so `c(n) = Σ c_k(n) - (K-1)`.
pub fn count_words_composite(
    composite: &CompositePlan,
    horizon: usize,
    k1_max: u64,
    strict: bool,
) -> Result<WordCount> {
    let stages = composite
        .stages
        .iter()
        .map(|p| count_words(p, horizon, k1_max, strict))
        .collect::<Result<Vec<_>>>()?;
    let shared = BigUint::from(stages.len() - 1);
    let values = (1..=horizon)
        .map(|n| stages.iter().map(|s| s.at(n)).sum::<BigUint>() - &shared)
        .collect();
    let complete = (0..horizon)
        .map(|idx| stages.iter().all(|s| s.complete[idx]))
        .collect();
    Ok(WordCount {
        symbols: stages.iter().map(|s| s.symbols).sum(),
        k1_max,
        values,
        complete,
    })
}

/// The `L+2` glued half-planes with step functions read off an interval tree.
#[derive(Debug, Clone)]
pub struct PlaneModel {
    pub l: usize,
    pub tree: IntervalTree,
}

impl PlaneModel {
    pub fn new(plan: &ConstructionPlan, k1_max: u64) -> Result<Self> {
        Ok(PlaneModel {
            l: plan.l,
            tree: build_interval_tree(plan, k1_max)?,
        })
    }

    /// `φ_1(y), ..., φ_{L+1}(y)`, all negative; `None` above the strip.
    pub fn steps(&self, y: &BigRational) -> Result<Option<Vec<i64>>> {
        if y <= &BigRational::zero() {
            return Err(CoderError::NonPositiveHeight(y.clone()));
        }
        if y > &BigRational::one() {
            return Ok(None);
        }
        match self.tree.locate(y) {
            Location::Leaf(leaf) => Ok(Some(leaf.prefix.iter().map(|&k| -(k as i64)).collect())),
            Location::Boundary => Err(CoderError::Boundary(y.clone())),
            Location::Outside => Err(CoderError::OutsideTree(y.clone())),
        }
    }
}

/// Iterates `(x, y)` from plane 1 under the unit translation, moving to plane
/// `i+1` through `x ↦ x + φ_i(y)` once `x > 1/3`, and records symbol `i`
/// whenever `x ∈ [-1/3, 1/3]` in plane `i`. Time 0 is at `x0`; the window
/// covers times `start .. start+n`.
pub fn simulate_orbit(
    model: &PlaneModel,
    y: &BigRational,
    x0: &BigRational,
    start: i64,
    n: usize,
) -> Result<CodingWord> {
    if n == 0 {
        return Err(CoderError::ZeroLength);
    }
    let Some(phi) = model.steps(y)? else {
        return Ok(CodingWord::empty(n));
    };
    let third = BigRational::new(1.into(), 3.into());
    let neg_third = -third.clone();
    let one = BigRational::one();
    let last_plane = model.l + 2;

    let mut plane = 1usize;
    let mut x = x0.clone();
    let glue = |plane: &mut usize, x: &mut BigRational| {
        while *plane < last_plane && *x > third {
            *x += BigRational::from_integer(phi[*plane - 1].into());
            *plane += 1;
        }
    };
    if start < 0 {
        // Plane 1 extends to -∞, so running backwards never leaves it.
        x += BigRational::from_integer(start.into());
    } else {
        glue(&mut plane, &mut x);
        for _ in 0..start {
            x += &one;
            glue(&mut plane, &mut x);
        }
    }
    if start < 0 {
        glue(&mut plane, &mut x);
    }

    let mut hits: SmallVec<[(u32, u32); 8]> = SmallVec::new();
    for m in 0..n {
        if neg_third <= x && x <= third {
            let symbol = plane as u32;
            if hits.iter().any(|&(_, s)| s == symbol) {
                return Err(CoderError::RepeatedHit { symbol });
            }
            hits.push((m as u32, symbol));
        }
        x += &one;
        glue(&mut plane, &mut x);
    }
    Ok(CodingWord { n, hits })
}
