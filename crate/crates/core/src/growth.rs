//! Orders of growth: representatives, comparison, suprema, BJP/LIP checks,
//! syndetic transfer and the exponential/polynomial projections.
//!
//! A class `[a(n)]` is handled through one of two representatives:
//!
//! * [`GrowthExpr`], the closed family `n^t (1+ln n)^s (1+ln(1+ln n))^u e^{rn}`,
//!   on which every question is answered symbolically;
//! * [`TabulatedGrowth`], a finite nondecreasing prefix of positive rationals,
//!   on which answers are finite-horizon verdicts carrying their witnesses.
//!
//! Empirical verdicts look at the window `[horizon/2, horizon]` and combine a
//! spread bound (`max ρ / min ρ <= slack`) with a trend test (ratio of the
//! geometric means of the two halves of the window within `[1/2, 2]`).

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Smallest horizon at which empirical verdicts are produced.
pub const MIN_HORIZON: usize = 16;

/// Default equivalence slack.
pub const DEFAULT_SLACK: u32 = 64;

/// Two half-window geometric means may differ by at most this factor for a
/// ratio sequence to count as trend-free.
pub const TREND_LIMIT: f64 = 2.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GrowthError {
    #[error("horizon {horizon} is below the minimum of {min}")]
    HorizonTooSmall { horizon: usize, min: usize },
    #[error("horizon {horizon} exceeds the {available} tabulated values")]
    HorizonTooLarge { horizon: usize, available: usize },
    #[error("value at n={n} is not positive")]
    NonPositive { n: usize },
    #[error("sequence decreases between n={n} and n={}", .n + 1)]
    Decreasing { n: usize },
    #[error("tabulated sequence has {len} values, at least {min} are required")]
    TooShort { len: usize, min: usize },
    #[error("horizon mismatch: {0} vs {1} values")]
    HorizonMismatch(usize, usize),
    #[error("invalid exponents: {0}")]
    InvalidExpr(String),
    #[error("multiplier m={0} must be at least 2")]
    BadMultiplier(u64),
    #[error("empty family")]
    Empty,
    #[error("sequence fails the bounded jump property")]
    NoBjp,
    #[error("syndetic set has no point in [1, {0}]")]
    EmptySyndetic(usize),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("malformed growth spec: {0}")]
    Spec(String),
}

pub type Result<T> = std::result::Result<T, GrowthError>;

/// Knobs shared by every empirical verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthConfig {
    pub slack: BigRational,
    pub min_horizon: usize,
}

impl Default for GrowthConfig {
    fn default() -> Self {
        GrowthConfig {
            slack: BigRational::from_integer(DEFAULT_SLACK.into()),
            min_horizon: MIN_HORIZON,
        }
    }
}

impl GrowthConfig {
    pub fn with_slack(slack: BigRational) -> Self {
        GrowthConfig {
            slack,
            ..Default::default()
        }
    }

    fn slack_f64(&self) -> f64 {
        self.slack.to_f64().unwrap_or(f64::INFINITY)
    }

    fn check_horizon(&self, horizon: usize) -> Result<()> {
        if horizon < self.min_horizon {
            return Err(GrowthError::HorizonTooSmall {
                horizon,
                min: self.min_horizon,
            });
        }
        Ok(())
    }
}

/// `n^t (1+ln n)^s (1+ln(1+ln n))^u e^{rn}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GrowthExpr {
    pub t: Rational64,
    pub s: Rational64,
    pub u: Rational64,
    pub r: Rational64,
}

impl GrowthExpr {
    pub fn new(t: Rational64, s: Rational64, u: Rational64, r: Rational64) -> Result<Self> {
        let e = GrowthExpr { t, s, u, r };
        if e.r < Rational64::zero() {
            return Err(GrowthError::InvalidExpr(format!("negative rate r={}", e.r)));
        }
        if e.r.is_zero()
            && (e.t, e.s, e.u) < (Rational64::zero(), Rational64::zero(), Rational64::zero())
        {
            return Err(GrowthError::InvalidExpr(format!(
                "(t,s,u)=({},{},{}) decays, not an order of growth",
                e.t, e.s, e.u
            )));
        }
        Ok(e)
    }

    pub fn poly(t: i64) -> Self {
        Self::polylog(t, 0)
    }

    pub fn polylog(t: i64, s: i64) -> Self {
        GrowthExpr {
            t: t.into(),
            s: s.into(),
            u: Rational64::zero(),
            r: Rational64::zero(),
        }
    }

    pub fn constant() -> Self {
        Self::poly(0)
    }

    pub fn exponential(r: Rational64) -> Self {
        GrowthExpr {
            t: Rational64::zero(),
            s: Rational64::zero(),
            u: Rational64::zero(),
            r,
        }
    }

    /// Lexicographic key deciding the symbolic order.
    pub fn key(&self) -> (Rational64, Rational64, Rational64, Rational64) {
        (self.r, self.t, self.s, self.u)
    }

    /// `ln` of the raw formula (before taking the nondecreasing envelope).
    pub fn ln_raw(&self, n: usize) -> f64 {
        let nf = n as f64;
        let l1 = nf.ln();
        let l2 = (1.0 + l1).ln();
        let l3 = (1.0 + l2).ln();
        r2f(&self.t) * l1 + r2f(&self.s) * l2 + r2f(&self.u) * l3 + r2f(&self.r) * nf
    }

    /// Polynomial with a nonnegative integer exponent and no other factor.
    fn integer_power(&self) -> Option<u32> {
        if self.s.is_zero() && self.u.is_zero() && self.r.is_zero() && self.t.is_integer() {
            let t = self.t.to_integer();
            if (0..=u32::MAX as i64).contains(&t) {
                return Some(t as u32);
            }
        }
        None
    }

    /// Upper bound for `a(n+1)/a(n)` over all `n >= 1`; every factor of the
    /// family has a decreasing one-step ratio, so the bound sits at `n = 1`.
    pub fn bjp_constant(&self) -> BigRational {
        if let Some(t) = self.integer_power() {
            return BigRational::from_integer(BigInt::from(2u32).pow(t));
        }
        let ln2 = std::f64::consts::LN_2;
        let ln = r2f(&self.r)
            + r2f(&self.t).max(0.0) * ln2
            + r2f(&self.s).max(0.0) * (1.0 + ln2).ln()
            + r2f(&self.u).max(0.0) * (1.0 + (1.0 + ln2).ln()).ln();
        rational_from_ln_ceil(ln)
    }

    fn label(&self) -> String {
        let mut parts = Vec::new();
        let z = Rational64::zero();
        if self.t != z {
            parts.push(if self.t == Rational64::one() {
                "n".to_string()
            } else {
                format!("n^{}", self.t)
            });
        }
        if self.s != z {
            parts.push(if self.s == Rational64::one() {
                "log n".to_string()
            } else {
                format!("(log n)^{}", self.s)
            });
        }
        if self.u != z {
            parts.push(format!("(log log n)^{}", self.u));
        }
        if self.r != z {
            parts.push(format!("e^({} n)", self.r));
        }
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join(" ")
        }
    }
}

impl fmt::Display for GrowthExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.label())
    }
}

/// Finite nondecreasing prefix `a(1), ..., a(N)` of positive rationals.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TabulatedGrowth {
    values: Vec<BigRational>,
}

impl TabulatedGrowth {
    pub fn new(values: Vec<BigRational>) -> Result<Self> {
        Self::with_min_len(values, MIN_HORIZON)
    }

    pub(crate) fn with_min_len(values: Vec<BigRational>, min: usize) -> Result<Self> {
        if values.len() < min {
            return Err(GrowthError::TooShort {
                len: values.len(),
                min,
            });
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_positive() {
                return Err(GrowthError::NonPositive { n: i + 1 });
            }
        }
        for (i, w) in values.windows(2).enumerate() {
            if w[1] < w[0] {
                return Err(GrowthError::Decreasing { n: i + 1 });
            }
        }
        Ok(TabulatedGrowth { values })
    }

    pub fn from_integers<I, T>(values: I) -> Result<Self>
    where
        I: IntoIterator<Item = T>,
        T: Into<BigInt>,
    {
        Self::new(
            values
                .into_iter()
                .map(|v| BigRational::from_integer(v.into()))
                .collect(),
        )
    }

    pub fn from_biguints(values: &[BigUint]) -> Result<Self> {
        Self::new(
            values
                .iter()
                .map(|v| BigRational::from_integer(BigInt::from(v.clone())))
                .collect(),
        )
    }

    /// Samples `f(1), ..., f(len)` of a real-valued formula as exact dyadic
    /// rationals, then takes the nondecreasing envelope.
    pub fn from_fn(len: usize, f: impl Fn(usize) -> f64) -> Result<Self> {
        let mut best = f64::NEG_INFINITY;
        let mut values = Vec::with_capacity(len);
        for n in 1..=len {
            let v = f(n);
            if v.is_nan() || v <= 0.0 || !v.is_finite() {
                return Err(GrowthError::NonPositive { n });
            }
            best = best.max(v);
            values.push(BigRational::from_float(best).expect("finite"));
        }
        Self::new(values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value at `n` (1-based).
    pub fn at(&self, n: usize) -> &BigRational {
        &self.values[n - 1]
    }

    pub fn values(&self) -> &[BigRational] {
        &self.values
    }
}

/// Either representative of a class in 𝕆.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Growth {
    Expr(GrowthExpr),
    Table(TabulatedGrowth),
}

impl From<GrowthExpr> for Growth {
    fn from(e: GrowthExpr) -> Self {
        Growth::Expr(e)
    }
}

impl From<TabulatedGrowth> for Growth {
    fn from(t: TabulatedGrowth) -> Self {
        Growth::Table(t)
    }
}

impl fmt::Display for Growth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Growth::Expr(e) => e.fmt(f),
            Growth::Table(t) => write!(f, "[tabulated, N={}]", t.len()),
        }
    }
}

impl Growth {
    /// Number of available values, `None` for formulas.
    pub fn available(&self) -> Option<usize> {
        match self {
            Growth::Expr(_) => None,
            Growth::Table(t) => Some(t.len()),
        }
    }

    pub fn as_expr(&self) -> Option<&GrowthExpr> {
        match self {
            Growth::Expr(e) => Some(e),
            Growth::Table(_) => None,
        }
    }

    pub fn require(&self, upto: usize) -> Result<()> {
        match self.available() {
            Some(len) if len < upto => Err(GrowthError::HorizonTooLarge {
                horizon: upto,
                available: len,
            }),
            _ => Ok(()),
        }
    }

    /// `ln a(1), ..., ln a(upto)`; formulas are replaced by their
    /// nondecreasing envelope.
    pub fn ln_values(&self, upto: usize) -> Result<Vec<f64>> {
        self.require(upto)?;
        Ok(match self {
            Growth::Expr(e) => {
                let mut best = f64::NEG_INFINITY;
                (1..=upto)
                    .map(|n| {
                        best = best.max(e.ln_raw(n));
                        best
                    })
                    .collect()
            }
            Growth::Table(t) => t.values[..upto].iter().map(ln_rational).collect(),
        })
    }

    /// Exact values when the representative has them: tables, and pure
    /// integer powers `n^k`.
    pub fn exact_values(&self, upto: usize) -> Result<Option<Vec<BigRational>>> {
        self.require(upto)?;
        Ok(match self {
            Growth::Table(t) => Some(t.values[..upto].to_vec()),
            Growth::Expr(e) => e.integer_power().map(|k| {
                (1..=upto)
                    .map(|n| BigRational::from_integer(BigInt::from(n).pow(k)))
                    .collect()
            }),
        })
    }

    /// Values as rationals, exact where possible and dyadic approximations of
    /// the envelope otherwise.
    pub fn rational_values(&self, upto: usize) -> Result<Vec<BigRational>> {
        if let Some(v) = self.exact_values(upto)? {
            return Ok(v);
        }
        Ok(self
            .ln_values(upto)?
            .into_iter()
            .map(rational_from_ln)
            .collect())
    }

    /// Tabulates the first `len` values.
    pub fn tabulate(&self, len: usize) -> Result<TabulatedGrowth> {
        TabulatedGrowth::new(self.rational_values(len)?)
    }

    /// `n,value` CSV export.
    pub fn to_csv(&self, upto: usize) -> Result<String> {
        let values = self.rational_values(upto)?;
        let mut out = String::from("n,value\n");
        for (i, v) in values.iter().enumerate() {
            out.push_str(&format!("{},{}\n", i + 1, v));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Relation {
    Equiv,
    StrictlyLess,
    StrictlyGreater,
    NoVerdict,
}

impl Relation {
    pub fn flip(self) -> Self {
        match self {
            Relation::StrictlyLess => Relation::StrictlyGreater,
            Relation::StrictlyGreater => Relation::StrictlyLess,
            r => r,
        }
    }

    /// `a <= b` in the order of 𝕆.
    pub fn is_leq(self) -> bool {
        matches!(self, Relation::Equiv | Relation::StrictlyLess)
    }

    pub fn is_geq(self) -> bool {
        matches!(self, Relation::Equiv | Relation::StrictlyGreater)
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Equiv => "EQUIV",
            Relation::StrictlyLess => "STRICTLY_LESS",
            Relation::StrictlyGreater => "STRICTLY_GREATER",
            Relation::NoVerdict => "NO_VERDICT",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Mode {
    Symbolic,
    Empirical,
}

/// Outcome of comparing two representatives. For `EQUIV` in empirical mode,
/// `c1 b(n) <= a(n) <= c2 b(n)` holds at every `n` of the inspected range.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub relation: Relation,
    pub c1: Option<BigRational>,
    pub c2: Option<BigRational>,
    pub horizon: usize,
    pub mode: Mode,
}

impl Verdict {
    fn symbolic(relation: Relation, horizon: usize) -> Self {
        let one = (relation == Relation::Equiv).then(BigRational::one);
        Verdict {
            relation,
            c1: one.clone(),
            c2: one,
            horizon,
            mode: Mode::Symbolic,
        }
    }

    pub fn c1_f64(&self) -> Option<f64> {
        self.c1.as_ref().and_then(|c| c.to_f64())
    }

    pub fn c2_f64(&self) -> Option<f64> {
        self.c2.as_ref().and_then(|c| c.to_f64())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "relation": self.relation,
            "c1": self.c1.as_ref().map(|c| c.to_string()),
            "c2": self.c2.as_ref().map(|c| c.to_string()),
            "c1_approx": self.c1_f64(),
            "c2_approx": self.c2_f64(),
            "horizon": self.horizon,
            "mode": self.mode,
        })
    }
}

/// Statistics of a ratio sequence over a window.
#[derive(Debug, Clone)]
struct RatioWindow {
    min_ln: f64,
    max_ln: f64,
    trend_ln: f64,
    first_ln: f64,
    last_ln: f64,
}

impl RatioWindow {
    fn new(ln_ratios: &[f64]) -> Self {
        let min_ln = ln_ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let max_ln = ln_ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        RatioWindow {
            min_ln,
            max_ln,
            trend_ln: trend_ln(ln_ratios),
            first_ln: ln_ratios[0],
            last_ln: ln_ratios[ln_ratios.len() - 1],
        }
    }

    fn spread_ok(&self, slack: f64) -> bool {
        self.max_ln - self.min_ln <= slack.ln() + 1e-12
    }

    fn trend_free(&self) -> bool {
        self.trend_ln.abs() <= TREND_LIMIT.ln() + 1e-12
    }

    fn bounded(&self, slack: f64) -> bool {
        self.spread_ok(slack) && self.trend_free()
    }
}

/// `ln` of the ratio between the geometric means of the second and first
/// halves of a sequence.
fn trend_ln(ln_values: &[f64]) -> f64 {
    let half = ln_values.len() / 2;
    if half == 0 {
        return 0.0;
    }
    let first: f64 = ln_values[..half].iter().sum::<f64>() / half as f64;
    let second: f64 = ln_values[ln_values.len() - half..].iter().sum::<f64>() / half as f64;
    second - first
}

/// Trend factor (ratio of half-window geometric means) of a positive sequence.
pub fn trend_factor(values: &[f64]) -> f64 {
    let lns: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    trend_ln(&lns).exp()
}

fn window(horizon: usize) -> std::ops::RangeInclusive<usize> {
    (horizon / 2).max(1)..=horizon
}

/// Decides the relation between `[a(n)]` and `[b(n)]`.
///
/// Two formulas are compared symbolically on `(r, t, s, u)`. Anything else
/// is judged on the ratio `a(n)/b(n)` over `[horizon/2, horizon]`.
pub fn compare(a: &Growth, b: &Growth, horizon: usize, cfg: &GrowthConfig) -> Result<Verdict> {
    cfg.check_horizon(horizon)?;
    if let (Growth::Expr(x), Growth::Expr(y)) = (a, b) {
        let rel = match x.key().cmp(&y.key()) {
            Ordering::Less => Relation::StrictlyLess,
            Ordering::Equal => Relation::Equiv,
            Ordering::Greater => Relation::StrictlyGreater,
        };
        return Ok(Verdict::symbolic(rel, horizon));
    }
    let la = a.ln_values(horizon)?;
    let lb = b.ln_values(horizon)?;
    let range = window(horizon);
    let ln_ratios: Vec<f64> = range.clone().map(|n| la[n - 1] - lb[n - 1]).collect();
    let stats = RatioWindow::new(&ln_ratios);
    let slack = cfg.slack_f64();

    let relation = if stats.bounded(slack) {
        Relation::Equiv
    } else if stats.trend_ln < 0.0
        && (stats.trend_ln < -TREND_LIMIT.ln() || stats.last_ln < -slack.ln())
        && stats.last_ln <= stats.first_ln
    {
        Relation::StrictlyLess
    } else if stats.trend_ln > 0.0
        && (stats.trend_ln > TREND_LIMIT.ln() || stats.last_ln > slack.ln())
        && stats.last_ln >= stats.first_ln
    {
        Relation::StrictlyGreater
    } else {
        Relation::NoVerdict
    };

    let (c1, c2) = match (a.exact_values(horizon)?, b.exact_values(horizon)?) {
        (Some(ea), Some(eb)) => {
            let ratios = range.map(|n| &ea[n - 1] / &eb[n - 1]);
            min_max(ratios)
        }
        _ => (
            rational_from_ln(stats.min_ln),
            rational_from_ln(stats.max_ln),
        ),
    };
    Ok(Verdict {
        relation,
        c1: Some(c1),
        c2: Some(c2),
        horizon,
        mode: Mode::Empirical,
    })
}

fn min_max(mut it: impl Iterator<Item = BigRational>) -> (BigRational, BigRational) {
    let first = it.next().expect("nonempty window");
    it.fold((first.clone(), first), |(lo, hi), v| {
        let lo = if v < lo { v.clone() } else { lo };
        let hi = if v > hi { v } else { hi };
        (lo, hi)
    })
}

/// Representative of `sup{[a(n)], [b(n)]}`: the pointwise maximum.
pub fn sup_pair(a: &Growth, b: &Growth) -> Result<Growth> {
    match (a, b) {
        (Growth::Expr(x), Growth::Expr(y)) => Ok(Growth::Expr(if x.key() >= y.key() {
            x.clone()
        } else {
            y.clone()
        })),
        (Growth::Table(x), Growth::Table(y)) => {
            if x.len() != y.len() {
                return Err(GrowthError::HorizonMismatch(x.len(), y.len()));
            }
            let values = x
                .values
                .iter()
                .zip(&y.values)
                .map(|(p, q)| if p >= q { p.clone() } else { q.clone() })
                .collect();
            Ok(Growth::Table(TabulatedGrowth::with_min_len(values, 0)?))
        }
        (Growth::Table(x), e @ Growth::Expr(_)) | (e @ Growth::Expr(_), Growth::Table(x)) => {
            let other = TabulatedGrowth::with_min_len(e.rational_values(x.len())?, 0)?;
            sup_pair(&Growth::Table(x.clone()), &Growth::Table(other))
        }
    }
}

/// Countable ordered family `[a_1] <= [a_2] <= ...` with
/// `a_k = max(b_1, ..., b_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSup {
    pub chain: Vec<Growth>,
}

impl ChainSup {
    pub fn len(&self) -> usize {
        self.chain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chain.is_empty()
    }

    /// Representative of the supremum of the whole family.
    pub fn top(&self) -> &Growth {
        self.chain.last().expect("chains are nonempty")
    }
}

pub fn ordered_chain(gamma: &[Growth]) -> Result<ChainSup> {
    let (first, rest) = gamma.split_first().ok_or(GrowthError::Empty)?;
    let mut chain = vec![first.clone()];
    for g in rest {
        let next = sup_pair(chain.last().unwrap(), g)?;
        chain.push(next);
    }
    Ok(ChainSup { chain })
}

/// Bounded jump property: returns `C` with `a(n+1) <= C a(n)`.
///
/// Tables pass when the maximal one-step ratio over `[1, horizon)` is not
/// reached in the last quarter of the range and the ratio sequence shows no
/// increasing trend.
pub fn check_bjp(a: &Growth, horizon: usize, cfg: &GrowthConfig) -> Result<Option<BigRational>> {
    cfg.check_horizon(horizon)?;
    match a {
        Growth::Expr(e) => Ok(Some(e.bjp_constant())),
        Growth::Table(t) => {
            t_require(t, horizon)?;
            let ratios: Vec<BigRational> = (1..horizon).map(|n| t.at(n + 1) / t.at(n)).collect();
            let lns: Vec<f64> = ratios.iter().map(ln_rational).collect();
            let (arg, max) = ratios
                .iter()
                .enumerate()
                .fold(
                    (0, &ratios[0]),
                    |(ai, am), (i, r)| if r > am { (i, r) } else { (ai, am) },
                );
            let tail_start = ratios.len() - ratios.len() / 4;
            let increasing = trend_ln(&lns) > TREND_LIMIT.ln();
            let at_tail = arg >= tail_start && max > &BigRational::one();
            if increasing || at_tail {
                Ok(None)
            } else {
                Ok(Some(max.clone()))
            }
        }
    }
}

fn t_require(t: &TabulatedGrowth, upto: usize) -> Result<()> {
    if t.len() < upto {
        return Err(GrowthError::HorizonTooLarge {
            horizon: upto,
            available: t.len(),
        });
    }
    Ok(())
}

/// Linearly invariant property at multiplier `m`: witnesses
/// `c1 <= a(mn)/a(n) <= c2`.
pub fn check_lip(
    a: &Growth,
    m: u64,
    horizon: usize,
    cfg: &GrowthConfig,
) -> Result<Option<(BigRational, BigRational)>> {
    if m < 2 {
        return Err(GrowthError::BadMultiplier(m));
    }
    cfg.check_horizon(horizon)?;
    match a {
        Growth::Expr(e) => {
            if !e.r.is_zero() {
                return Ok(None);
            }
            Ok(Some(symbolic_lip_bounds(e, m)))
        }
        Growth::Table(t) => {
            let m = m as usize;
            t_require(t, m * horizon)?;
            let range = window(horizon);
            let ratios: Vec<BigRational> = range.map(|n| t.at(m * n) / t.at(n)).collect();
            let lns: Vec<f64> = ratios.iter().map(ln_rational).collect();
            if RatioWindow::new(&lns).bounded(cfg.slack_f64()) {
                Ok(Some(min_max(ratios.into_iter())))
            } else {
                Ok(None)
            }
        }
    }
}

/// For `r = 0`: `a(mn)/a(n) = m^t · Π ((1+ln mn)/(1+ln n))^s ...`; each
/// polylog factor ratio lies in `[1, (1 + ln m)]` (resp. its log-log analogue).
fn symbolic_lip_bounds(e: &GrowthExpr, m: u64) -> (BigRational, BigRational) {
    let lm = (m as f64).ln();
    let f_s = (1.0 + lm).ln() * r2f(&e.s);
    let f_u = (1.0 + (1.0 + lm).ln()).ln() * r2f(&e.u);
    let mut lo_ln = f_s.min(0.0) + f_u.min(0.0);
    let mut hi_ln = f_s.max(0.0) + f_u.max(0.0);
    let power = if e.t.is_integer() && e.t >= Rational64::zero() {
        BigRational::from_integer(BigInt::from(m).pow(e.t.to_integer() as u32))
    } else if e.t.is_integer() {
        BigRational::from_integer(BigInt::from(m).pow((-e.t.to_integer()) as u32)).recip()
    } else {
        lo_ln += r2f(&e.t) * lm;
        hi_ln += r2f(&e.t) * lm;
        BigRational::one()
    };
    let lo = if lo_ln == 0.0 {
        power.clone()
    } else {
        &power * rational_from_ln_floor(lo_ln)
    };
    let hi = if hi_ln == 0.0 {
        power.clone()
    } else {
        &power * rational_from_ln_ceil(hi_ln)
    };
    (lo, hi)
}

/// Result of extending LIP from `m = 2` to a larger multiplier.
#[derive(Debug, Clone, PartialEq)]
pub struct LipExtension {
    pub m: u64,
    pub c1: BigRational,
    pub c2: BigRational,
    /// `c1(2)^k` and `c2(2)^k` with `k = ceil(log2 m)`.
    pub bound_lo: BigRational,
    pub bound_hi: BigRational,
    pub holds: bool,
}

pub fn lip_power_extension(
    a: &Growth,
    m: u64,
    horizon: usize,
    cfg: &GrowthConfig,
) -> Result<LipExtension> {
    let (b1, b2) = check_lip(a, 2, horizon, cfg)?
        .ok_or_else(|| GrowthError::Precondition("LIP fails at m=2".into()))?;
    let steps = ceil_log2(m);
    let (bound_lo, bound_hi) = if b1 <= BigRational::one() {
        // a(mn)/a(n) >= 1 always; the squaring chain only sharpens when c1 >= 1.
        (
            b1.pow(steps as i32).min(BigRational::one()),
            b2.pow(steps as i32),
        )
    } else {
        (b1.pow(steps as i32), b2.pow(steps as i32))
    };
    match check_lip(a, m, horizon, cfg)? {
        Some((c1, c2)) => {
            let holds = c1 >= BigRational::one().min(bound_lo.clone()) && c2 <= bound_hi;
            Ok(LipExtension {
                m,
                c1,
                c2,
                bound_lo,
                bound_hi,
                holds,
            })
        }
        None => Err(GrowthError::Precondition(format!(
            "LIP holds at m=2 but not at m={m} within horizon {horizon}"
        ))),
    }
}

fn ceil_log2(m: u64) -> u32 {
    64 - (m - 1).leading_zeros()
}

/// Value of a projection onto the exponential or polynomial scale.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    /// `f64::INFINITY` encodes `∞`.
    pub value: f64,
    /// Exact value when the answer is symbolic and finite.
    pub exact: Option<Rational64>,
    pub estimate: bool,
}

impl Projection {
    fn symbolic(v: Rational64) -> Self {
        Projection {
            value: r2f(&v),
            exact: Some(v),
            estimate: false,
        }
    }

    fn infinite() -> Self {
        Projection {
            value: f64::INFINITY,
            exact: None,
            estimate: false,
        }
    }

    fn estimated(value: f64) -> Self {
        Projection {
            value,
            exact: None,
            estimate: true,
        }
    }

    pub fn is_infinite(&self) -> bool {
        self.value.is_infinite()
    }
}

impl fmt::Display for Projection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.exact, self.value.is_infinite()) {
            (_, true) => f.write_str("inf"),
            (Some(r), _) => write!(f, "{r}"),
            (None, _) => write!(f, "~{:.6}", self.value),
        }
    }
}

/// `π_E([a]) = limsup ln a(n) / n`.
///
/// Tables are read through the doubling increments
/// `(ln a(n) - ln a(⌈n/2⌉)) / (n - ⌈n/2⌉)` over the tail half-window, which
/// share the limsup with `ln a(n)/n` but do not depend on the representative's
/// constant factor.
pub fn pi_e(a: &Growth, horizon: usize) -> Result<Projection> {
    match a {
        Growth::Expr(e) => Ok(Projection::symbolic(e.r)),
        Growth::Table(_) => {
            let ln = a.ln_values(horizon)?;
            let rate = window(horizon)
                .filter(|&n| n >= 2)
                .map(|n| {
                    let half = n.div_ceil(2);
                    (ln[n - 1] - ln[half - 1]) / (n - half) as f64
                })
                .fold(0.0, f64::max);
            Ok(Projection::estimated(rate))
        }
    }
}

/// `π_P([a]) = inf{t : [a] <= [n^t]}`.
///
/// Tables: least-squares slope of `ln a(n)` against `ln n` over the tail
/// half-window.
pub fn pi_p(a: &Growth, horizon: usize) -> Result<Projection> {
    match a {
        Growth::Expr(e) => {
            if e.r.is_positive() {
                Ok(Projection::infinite())
            } else {
                Ok(Projection::symbolic(e.t))
            }
        }
        Growth::Table(_) => {
            let ln = a.ln_values(horizon)?;
            let pts: Vec<(f64, f64)> = window(horizon)
                .map(|n| ((n as f64).ln(), ln[n - 1]))
                .collect();
            Ok(Projection::estimated(ls_slope(&pts)))
        }
    }
}

/// Least-squares slope; exactly zero for constant ordinates.
pub fn ls_slope(pts: &[(f64, f64)]) -> f64 {
    if pts.len() < 2 || pts.iter().all(|p| p.1 == pts[0].1) {
        return 0.0;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let num: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let den: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    num / den
}

/// Arithmetic progression `{offset, offset + gap, offset + 2 gap, ...}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SyndeticSet {
    pub gap: usize,
    pub offset: usize,
}

impl SyndeticSet {
    /// `gap·ℕ = {gap, 2 gap, ...}`.
    pub fn multiples(gap: usize) -> Self {
        SyndeticSet { gap, offset: gap }
    }

    pub fn points(&self, upto: usize) -> Vec<usize> {
        if self.gap == 0 {
            return if (1..=upto).contains(&self.offset) {
                vec![self.offset]
            } else {
                vec![]
            };
        }
        (0..)
            .map(|k| self.offset + k * self.gap)
            .take_while(|&n| n <= upto)
            .filter(|&n| n >= 1)
            .collect()
    }

    pub fn contains(&self, n: usize) -> bool {
        n >= self.offset && self.gap > 0 && (n - self.offset).is_multiple_of(self.gap)
    }
}

/// Extends an agreement `c1 b(n) <= a(n) <= c2 b(n)` on a syndetic set to
/// every `n <= horizon` by bridging gaps with the jump constant of `a`
/// (and of `b` when it has one).
pub fn syndetic_transfer(
    a: &Growth,
    b: &Growth,
    set: SyndeticSet,
    horizon: usize,
    cfg: &GrowthConfig,
) -> Result<Verdict> {
    let ca = check_bjp(a, horizon, cfg)?.ok_or(GrowthError::NoBjp)?;
    let pts = set.points(horizon);
    if pts.is_empty() || set.gap == 0 {
        return Err(GrowthError::EmptySyndetic(horizon));
    }
    let va = a.rational_values(horizon)?;
    let vb = b.rational_values(horizon)?;
    let (c1, c2) = min_max(pts.iter().map(|&n| &va[n - 1] / &vb[n - 1]));
    let mut verdict = Verdict {
        relation: Relation::NoVerdict,
        c1: Some(c1.clone()),
        c2: Some(c2.clone()),
        horizon,
        mode: Mode::Empirical,
    };
    if &c2 / &c1 > cfg.slack {
        return Ok(verdict);
    }
    let cb = check_bjp(b, horizon, cfg)?.unwrap_or_else(BigRational::one);
    let jump = if cb > ca { cb } else { ca }.pow(set.gap as i32);
    let lo = &c1 / &jump;
    let hi = &c2 * &jump;
    let holds = (1..=horizon).all(|n| {
        let x = &va[n - 1];
        let y = &vb[n - 1];
        &(&lo * y) <= x && x <= &(&hi * y)
    });
    if holds {
        verdict.relation = Relation::Equiv;
        verdict.c1 = Some(lo);
        verdict.c2 = Some(hi);
    }
    Ok(verdict)
}

/// Parses `"3"`, `"-5/2"` or `"2.25"`.
pub fn parse_rational(s: &str) -> Result<Rational64> {
    let s = s.trim();
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.starts_with('-');
        let int_v: i64 = if int == "-" || int.is_empty() {
            0
        } else {
            int.parse()
                .map_err(|_| GrowthError::Spec(format!("bad number {s:?}")))?
        };
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) || frac.len() > 15 {
            return Err(GrowthError::Spec(format!("bad number {s:?}")));
        }
        let den = 10i64.pow(frac.len() as u32);
        let num: i64 = frac.parse().unwrap();
        let frac_r = Rational64::new(num, den);
        let whole = Rational64::from_integer(int_v);
        return Ok(if neg { whole - frac_r } else { whole + frac_r });
    }
    Rational64::from_str(s).map_err(|_| GrowthError::Spec(format!("bad number {s:?}")))
}

pub fn parse_big_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    if s.contains('.') {
        let r = parse_rational(s)?;
        return Ok(BigRational::new((*r.numer()).into(), (*r.denom()).into()));
    }
    BigRational::from_str(s).map_err(|_| GrowthError::Spec(format!("bad number {s:?}")))
}

/// Structured growth spec:
/// `{"family":"polylog","t":"2","s":"1","u":"0","r":"0"}` or
/// `{"family":"tabulated","values":[...]}`.
pub fn parse_growth_spec(text: &str) -> Result<Growth> {
    let v: serde_json::Value =
        serde_json::from_str(text).map_err(|e| GrowthError::Spec(e.to_string()))?;
    growth_from_json(&v)
}

pub fn growth_from_json(v: &serde_json::Value) -> Result<Growth> {
    let family = v
        .get("family")
        .and_then(|f| f.as_str())
        .ok_or_else(|| GrowthError::Spec("missing \"family\"".into()))?;
    let field = |name: &str| -> Result<Rational64> {
        match v.get(name) {
            None => Ok(Rational64::zero()),
            Some(serde_json::Value::String(s)) => parse_rational(s),
            Some(serde_json::Value::Number(n)) => parse_rational(&n.to_string()),
            Some(other) => Err(GrowthError::Spec(format!("field {name}: {other}"))),
        }
    };
    match family {
        "polylog" => Ok(Growth::Expr(GrowthExpr::new(
            field("t")?,
            field("s")?,
            field("u")?,
            field("r")?,
        )?)),
        "tabulated" => {
            let arr = v
                .get("values")
                .and_then(|a| a.as_array())
                .ok_or_else(|| GrowthError::Spec("missing \"values\"".into()))?;
            let values = arr
                .iter()
                .map(|x| match x {
                    serde_json::Value::String(s) => parse_big_rational(s),
                    serde_json::Value::Number(n) => parse_big_rational(&n.to_string()),
                    other => Err(GrowthError::Spec(format!("bad value {other}"))),
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Growth::Table(TabulatedGrowth::new(values)?))
        }
        other => Err(GrowthError::Spec(format!("unknown family {other:?}"))),
    }
}

pub fn growth_to_json(g: &Growth) -> serde_json::Value {
    match g {
        Growth::Expr(e) => serde_json::json!({
            "family": "polylog",
            "t": e.t.to_string(),
            "s": e.s.to_string(),
            "u": e.u.to_string(),
            "r": e.r.to_string(),
        }),
        Growth::Table(t) => serde_json::json!({
            "family": "tabulated",
            "values": t.values.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        }),
    }
}

pub(crate) fn r2f(r: &Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Natural logarithm of a positive big integer, robust past `f64` range.
pub fn ln_bigint(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("in range").ln();
    }
    let shift = bits - 64;
    let top: BigInt = x >> shift;
    top.to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

pub fn ln_rational(x: &BigRational) -> f64 {
    ln_bigint(x.numer()) - ln_bigint(x.denom())
}

/// `e^ln` as an exact dyadic rational, valid beyond the `f64` exponent range.
pub fn rational_from_ln(ln: f64) -> BigRational {
    if ln.abs() < 700.0 {
        return BigRational::from_float(ln.exp()).expect("finite");
    }
    let k = (ln / std::f64::consts::LN_2).floor();
    let mant = BigRational::from_float((ln - k * std::f64::consts::LN_2).exp()).unwrap();
    let two = BigRational::from_integer(2.into());
    mant * two.pow(k as i32)
}

/// `e^ln` rounded up by a relative `1e-12`, for upper bounds computed in
/// floating point.
fn rational_from_ln_ceil(ln: f64) -> BigRational {
    rational_from_ln(ln + 1e-12 * (1.0 + ln.abs()))
}

fn rational_from_ln_floor(ln: f64) -> BigRational {
    rational_from_ln(ln - 1e-12 * (1.0 + ln.abs()))
}
