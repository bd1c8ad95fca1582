//! Synthesis of the crossing-time sequences `a_2(n), ..., a_{L+1}(n)` whose
//! derived sequence `d(n) = n Σ_{k<=n} a_2(k)···a_{L+1}(k)` tracks a target
//! order of growth, together with the nested intervals of heights that
//! realize them and the staged composite for chains of targets.

use std::fmt::Write as _;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::coder::JumpTuple;
use crate::growth::{
    self, check_bjp, compare, growth_to_json, pi_p, ChainSup, Growth, GrowthConfig, GrowthError,
    GrowthExpr,
};

/// Witnesses `d(n)/a(n) ∈ [b1, b2]` are only checked from this index on.
pub const BURN_IN: usize = 8;

/// Largest `L` tried when bounding a tabulated target by `[n^L]`.
pub const MAX_L: usize = 64;

/// Fitted degrees within this of an integer round down to it.
pub const DEGREE_TOLERANCE: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlexError {
    #[error(transparent)]
    Growth(#[from] GrowthError),
    #[error("target exceeds every polynomial; the construction needs [a(n)] <= [n^L]")]
    NotPolynomial,
    #[error("target lies below [n^2]; the construction needs [n^2] <= [a(n)]")]
    BelowQuadratic,
    #[error("target fails the bounded jump property")]
    NoBjp,
    #[error("L={0} is below 3")]
    SmallL(usize),
    #[error("plan rejected: d(n)/a(n) spans [{b1:.4e}, {b2:.4e}], wider than slack {slack}")]
    PlanRejected { b1: f64, b2: f64, slack: f64 },
    #[error("e={e} exceeds n^L for n={n}, L={l}")]
    FactorOverflow { e: BigUint, n: u64, l: usize },
    #[error("k1={k1} outside the plan horizon {horizon}")]
    OutOfRange { k1: u64, horizon: usize },
    #[error("composite needs at least one stage")]
    EmptyComposite,
    #[error("composite asks for {k} stages but the chain has {len}")]
    ChainTooShort { k: usize, len: usize },
    #[error("stage {stage}: {source}")]
    Stage {
        stage: usize,
        #[source]
        source: Box<FlexError>,
    },
}

pub type Result<T> = std::result::Result<T, FlexError>;

/// Output of the sequence-choice construction for one target.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstructionPlan {
    pub l: usize,
    pub target: Growth,
    pub horizon: usize,
    /// Achieved `e(n) = a_2(n)···a_{L+1}(n)`, index `n-1`.
    pub e: Vec<BigUint>,
    /// `factors[n-1][i-2] = a_i(n)`.
    pub factors: Vec<Vec<u64>>,
    /// `d(n) = n Σ_{k<=n} e(k)`.
    pub d: Vec<BigUint>,
    /// `d(n)/a(n)` for every `n`.
    pub slack_log: Vec<f64>,
    pub b1: BigRational,
    pub b2: BigRational,
}

impl ConstructionPlan {
    /// `a_i(n)` for `i` in `2..=L+1`.
    pub fn factor(&self, i: usize, n: usize) -> u64 {
        self.factors[n - 1][i - 2]
    }

    pub fn e_at(&self, n: usize) -> &BigUint {
        &self.e[n - 1]
    }

    pub fn d_at(&self, n: usize) -> &BigUint {
        &self.d[n - 1]
    }

    /// `Σ_{k<=n} e(k)`.
    pub fn e_prefix_sum(&self, n: usize) -> BigUint {
        self.e[..n].iter().sum()
    }

    /// Syndetic set `(2L+2)ℕ` on which counts are compared with the target.
    pub fn syndetic_gap(&self) -> usize {
        2 * self.l + 2
    }

    pub fn to_json(&self) -> serde_json::Value {
        let strs = |v: &[BigUint]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        let factors: Vec<Vec<u64>> = (2..=self.l + 1)
            .map(|i| (1..=self.horizon).map(|n| self.factor(i, n)).collect())
            .collect();
        serde_json::json!({
            "L": self.l,
            "N": self.horizon,
            "target": growth_to_json(&self.target),
            "e": strs(&self.e),
            "a": factors,
            "d": strs(&self.d),
            "b1": self.b1.to_string(),
            "b2": self.b2.to_string(),
        })
    }

    /// `n,e(n),a_2(n),...,a_{L+1}(n),d(n)`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,e");
        for i in 2..=self.l + 1 {
            write!(out, ",a_{i}").unwrap();
        }
        out.push_str(",d\n");
        for n in 1..=self.horizon {
            write!(out, "{},{}", n, self.e_at(n)).unwrap();
            for f in &self.factors[n - 1] {
                write!(out, ",{f}").unwrap();
            }
            writeln!(out, ",{}", self.d_at(n)).unwrap();
        }
        out
    }
}

/// Minimal `L >= 3` with `[target] <= [n^L]`.
pub fn choose_l(target: &Growth, horizon: usize, cfg: &GrowthConfig) -> Result<usize> {
    if let Growth::Expr(e) = target {
        if pi_p(target, horizon)?.is_infinite() {
            return Err(FlexError::NotPolynomial);
        }
        let sq: Growth = GrowthExpr::poly(2).into();
        if !compare(target, &sq, horizon, cfg)?.relation.is_geq() {
            return Err(FlexError::BelowQuadratic);
        }
        // n^t polylog <= C n^L iff (t, s, u) <= (L, 0, 0) lexicographically.
        let t = e.t.ceil().to_integer();
        let l = if e.t.is_integer() && (e.s, e.u) > (0.into(), 0.into()) {
            t + 1
        } else {
            t
        };
        return Ok((l.max(3)) as usize);
    }
    // The empirical window cannot separate n^L from n^(L+1) within the
    // slack, so the fitted polynomial degree screens both ends first.
    let degree = pi_p(target, horizon)?;
    if degree.is_infinite() {
        return Err(FlexError::NotPolynomial);
    }
    let sq: Growth = GrowthExpr::poly(2).into();
    if degree.value < 2.0 - DEGREE_TOLERANCE
        || !compare(target, &sq, horizon, cfg)?.relation.is_geq()
    {
        return Err(FlexError::BelowQuadratic);
    }
    let start = ((degree.value - DEGREE_TOLERANCE).ceil().max(3.0) as usize).min(MAX_L + 1);
    for l in start..=MAX_L {
        let bound: Growth = GrowthExpr::poly(l as i64).into();
        if compare(target, &bound, horizon, cfg)?.relation.is_leq() {
            return Ok(l);
        }
    }
    Err(FlexError::NotPolynomial)
}

/// Splits `e_value` into `L` factors in `[1, n]` whose product lies in
/// `[e_value / 2^L, e_value]`, loading the first factor. The trailing
/// factors are split recursively from `⌈e/n⌉`, the least product that lets
/// the first factor stay within `n`, and the first factor takes the floor of
/// what is left.
///
/// Front-loading puts the multiplicity on the earliest crossing, so distinct
/// tuples already give distinct words in short windows.
pub fn factor_split(e_value: &BigUint, n: u64, l: usize) -> Result<Vec<u64>> {
    let cap = BigUint::from(n).pow(l as u32);
    if e_value > &cap || e_value.is_zero() || l == 0 {
        return Err(FlexError::FactorOverflow {
            e: e_value.clone(),
            n,
            l,
        });
    }
    let mut out = Vec::with_capacity(l);
    split_front(e_value, n, l, &mut out);
    Ok(out)
}

fn split_front(e: &BigUint, n: u64, slots: usize, out: &mut Vec<u64>) -> BigUint {
    if slots == 1 {
        let a = e.to_u64().unwrap_or(u64::MAX).min(n).max(1);
        out.push(a);
        return BigUint::from(a);
    }
    let least = (e + (n - 1)) / n;
    let mut tail = Vec::with_capacity(slots - 1);
    let tail_product = split_front(&least, n, slots - 1, &mut tail);
    let head = (e / &tail_product)
        .to_u64()
        .unwrap_or(u64::MAX)
        .min(n)
        .max(1);
    out.push(head);
    out.extend(tail);
    tail_product * head
}

/// Runs the sequence-choice recurrence
/// `e(n+1) = (a(n+1)/a(n) - (n+1)/n) · d(n)/(n+1)`, rounded and clamped to
/// `[1, (n+1)^L]`, with `d` maintained from the achieved products.
///
/// The recurrence only follows ratios, so whatever a step fails to deliver
/// is carried into the next request; otherwise each loss would lower the
/// level of `d(n)/a(n)` for good.
pub fn build_sequences(
    target: &Growth,
    l: usize,
    horizon: usize,
    cfg: &GrowthConfig,
) -> Result<ConstructionPlan> {
    if l < 3 {
        return Err(FlexError::SmallL(l));
    }
    if check_bjp(target, horizon, cfg)?.is_none() {
        return Err(FlexError::NoBjp);
    }
    let a = target.rational_values(horizon)?;

    let mut e = vec![BigUint::one()];
    let mut factors = vec![vec![1u64; l]];
    let mut d = vec![BigUint::one()];
    let mut sum = BigUint::one();
    // Part of earlier requests lost to rounding, clamping or the split.
    let mut carry = BigRational::zero();

    for n in 1..horizon {
        let next = n + 1;
        let growth = &a[next - 1] / &a[n - 1];
        let linear = BigRational::new(BigInt::from(next), BigInt::from(n));
        let d_n = BigRational::from_integer(BigInt::from(d[n - 1].clone()));
        let rec = (growth - linear) * d_n / BigRational::from_integer(BigInt::from(next)) + &carry;
        let cap = BigUint::from(next).pow(l as u32);
        let rounded = rec.round().to_integer();
        let requested = if rounded < BigInt::one() {
            BigUint::one()
        } else {
            let r = rounded.to_biguint().expect("positive");
            if r > cap {
                cap
            } else {
                r
            }
        };
        let split = factor_split(&requested, next as u64, l)?;
        let achieved: BigUint = split.iter().map(|&x| BigUint::from(x)).product();
        carry = rec - BigRational::from_integer(BigInt::from(achieved.clone()));
        sum += &achieved;
        d.push(&sum * BigUint::from(next));
        e.push(achieved);
        factors.push(split);
    }

    let ratios: Vec<BigRational> = d
        .iter()
        .zip(&a)
        .map(|(dn, an)| BigRational::from_integer(BigInt::from(dn.clone())) / an)
        .collect();
    let slack_log: Vec<f64> = ratios
        .iter()
        .map(|r| growth::ln_rational(r).exp())
        .collect();
    let from = BURN_IN.min(horizon);
    let verified = &ratios[from - 1..];
    let b1 = verified.iter().min().unwrap().clone();
    let b2 = verified.iter().max().unwrap().clone();
    if &b2 / &b1 > cfg.slack {
        return Err(FlexError::PlanRejected {
            b1: b1.to_f64().unwrap_or(f64::NAN),
            b2: b2.to_f64().unwrap_or(f64::NAN),
            slack: cfg.slack.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(ConstructionPlan {
        l,
        target: target.clone(),
        horizon,
        e,
        factors,
        d,
        slack_log,
        b1,
        b2,
    })
}

/// Node `I_{k_1,...,k_i}`: the half-open interval `(lo, hi]` of heights whose
/// first `i` crossing times are `prefix`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalNode {
    pub prefix: Vec<u64>,
    pub lo: BigRational,
    pub hi: BigRational,
    pub children: Vec<IntervalNode>,
}

impl IntervalNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn contains(&self, y: &BigRational) -> bool {
        &self.lo < y && y <= &self.hi
    }

    fn leaves<'a>(&'a self, out: &mut Vec<&'a IntervalNode>) {
        if self.is_leaf() {
            out.push(self);
        } else {
            for c in &self.children {
                c.leaves(out);
            }
        }
    }
}

/// Nested intervals `I_{k_1} ⊃ I_{k_1,k_2} ⊃ ...` for `k_1 <= k1_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalTree {
    pub l: usize,
    pub roots: Vec<IntervalNode>,
}

/// Where a height falls in the tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Location<'a> {
    Leaf(&'a IntervalNode),
    /// On an endpoint of some node: the crossing times are ambiguous.
    Boundary,
    /// Outside `(0, 1]` or beyond `k1_max`.
    Outside,
}

impl IntervalTree {
    pub fn k1_max(&self) -> u64 {
        self.roots.len() as u64
    }

    pub fn root(&self, k1: u64) -> &IntervalNode {
        &self.roots[k1 as usize - 1]
    }

    pub fn leaves(&self) -> Vec<&IntervalNode> {
        let mut out = Vec::new();
        for r in &self.roots {
            r.leaves(&mut out);
        }
        out
    }

    pub fn leaves_under(&self, k1: u64) -> Vec<&IntervalNode> {
        let mut out = Vec::new();
        self.root(k1).leaves(&mut out);
        out
    }

    pub fn locate(&self, y: &BigRational) -> Location<'_> {
        if y <= &BigRational::zero() || y > &BigRational::one() {
            return Location::Outside;
        }
        let k1 = y.recip().floor().to_integer();
        let Some(k1) = k1.to_u64().filter(|&k| k >= 1 && k <= self.k1_max()) else {
            return Location::Outside;
        };
        let mut node = self.root(k1);
        loop {
            if y == &node.hi || y == &node.lo {
                return Location::Boundary;
            }
            if node.is_leaf() {
                return Location::Leaf(node);
            }
            match node.children.iter().find(|c| c.contains(y)) {
                Some(c) => node = c,
                None => return Location::Boundary,
            }
        }
    }
}

/// Children of `I_{k_1,...,k_i}` are `a_{i+1}(k_1)` equal slices; the slice
/// for step `j` carries `k_{i+1} = 2i k_1 - S_i + j` and sits `j-1` slices
/// below the top, so larger crossing times live at lower heights.
pub fn build_interval_tree(plan: &ConstructionPlan, k1_max: u64) -> Result<IntervalTree> {
    if k1_max as usize > plan.horizon {
        return Err(FlexError::OutOfRange {
            k1: k1_max,
            horizon: plan.horizon,
        });
    }
    let roots = (1..=k1_max)
        .map(|k1| {
            let lo = BigRational::new(1.into(), BigInt::from(k1 + 1));
            let hi = BigRational::new(1.into(), BigInt::from(k1));
            let mut node = IntervalNode {
                prefix: vec![k1],
                lo,
                hi,
                children: vec![],
            };
            grow(plan, &mut node, k1, k1);
            node
        })
        .collect();
    Ok(IntervalTree { l: plan.l, roots })
}

fn grow(plan: &ConstructionPlan, node: &mut IntervalNode, k1: u64, partial: u64) {
    let i = node.prefix.len();
    if i == plan.l + 1 {
        return;
    }
    let count = plan.factor(i + 1, k1 as usize);
    let width = (&node.hi - &node.lo) / BigRational::from_integer(BigInt::from(count));
    for j in 1..=count {
        let k_next = 2 * i as u64 * k1 + j - partial;
        let hi = &node.hi - &width * BigRational::from_integer(BigInt::from(j - 1));
        let lo = &hi - &width;
        let mut prefix = node.prefix.clone();
        prefix.push(k_next);
        let mut child = IntervalNode {
            prefix,
            lo,
            hi,
            children: vec![],
        };
        grow(plan, &mut child, k1, partial + k_next);
        node.children.push(child);
    }
}

/// Every crossing-time tuple `(k_1, ..., k_{L+1})` admissible for `k_1`.
pub fn admissible_tuples(plan: &ConstructionPlan, k1: u64) -> Result<Vec<JumpTuple>> {
    if k1 == 0 || k1 as usize > plan.horizon {
        return Err(FlexError::OutOfRange {
            k1,
            horizon: plan.horizon,
        });
    }
    let counts: Vec<u64> = (2..=plan.l + 1)
        .map(|i| plan.factor(i, k1 as usize))
        .collect();
    let mut out = Vec::new();
    let mut ks = vec![k1];
    extend(&counts, k1, k1, &mut ks, &mut out);
    Ok(out)
}

fn extend(counts: &[u64], k1: u64, partial: u64, ks: &mut Vec<u64>, out: &mut Vec<JumpTuple>) {
    let i = ks.len();
    if i > counts.len() {
        out.push(JumpTuple::new_unchecked(ks.clone()));
        return;
    }
    for j in 1..=counts[i - 1] {
        let k = 2 * i as u64 * k1 + j - partial;
        ks.push(k);
        extend(counts, k1, partial + k, ks, out);
        ks.pop();
    }
}

/// All admissible tuples with `k_1 <= k1_max`, generated per `k_1` in
/// parallel and merged in `k_1` order.
pub fn all_tuples(plan: &ConstructionPlan, k1_max: u64) -> Result<Vec<JumpTuple>> {
    let per_k1: Vec<Vec<JumpTuple>> = (1..=k1_max)
        .into_par_iter()
        .map(|k1| admissible_tuples(plan, k1))
        .collect::<Result<_>>()?;
    Ok(per_k1.into_iter().flatten().collect())
}

/// Finitely many stages of the staged construction, one plan per element of
/// an ordered chain of targets.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositePlan {
    pub stages: Vec<ConstructionPlan>,
}

impl CompositePlan {
    pub fn k(&self) -> usize {
        self.stages.len()
    }
}

pub fn build_composite(
    chain: &ChainSup,
    k: usize,
    horizon: usize,
    cfg: &GrowthConfig,
) -> Result<CompositePlan> {
    if k == 0 {
        return Err(FlexError::EmptyComposite);
    }
    if k > chain.len() {
        return Err(FlexError::ChainTooShort {
            k,
            len: chain.len(),
        });
    }
    let stages = chain.chain[..k]
        .iter()
        .enumerate()
        .map(|(idx, target)| {
            build_stage(target, horizon, cfg).map_err(|e| FlexError::Stage {
                stage: idx + 1,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CompositePlan { stages })
}

/// One stage: `choose_l` followed by `build_sequences`.
pub fn build_stage(
    target: &Growth,
    horizon: usize,
    cfg: &GrowthConfig,
) -> Result<ConstructionPlan> {
    let l = choose_l(target, horizon, cfg)?;
    build_sequences(target, l, horizon, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::growth::{ordered_chain, Relation, TabulatedGrowth};
    use num_rational::Rational64;

    fn cfg() -> GrowthConfig {
        GrowthConfig::default()
    }

    fn poly(t: i64) -> Growth {
        GrowthExpr::poly(t).into()
    }

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    #[test]
    fn choose_l_examples() {
        let n2logn: Growth = GrowthExpr::polylog(2, 1).into();
        assert_eq!(choose_l(&n2logn, 64, &cfg()).unwrap(), 3);
        let n35: Growth = GrowthExpr::new(Rational64::new(7, 2), 0.into(), 0.into(), 0.into())
            .unwrap()
            .into();
        assert_eq!(choose_l(&n35, 64, &cfg()).unwrap(), 4);
        assert_eq!(choose_l(&poly(2), 64, &cfg()).unwrap(), 3);
        assert_eq!(choose_l(&poly(5), 64, &cfg()).unwrap(), 5);
        let n3logn: Growth = GrowthExpr::polylog(3, 1).into();
        assert_eq!(choose_l(&n3logn, 64, &cfg()).unwrap(), 4);
        let n15: Growth = GrowthExpr::new(Rational64::new(3, 2), 0.into(), 0.into(), 0.into())
            .unwrap()
            .into();
        assert_eq!(choose_l(&n15, 64, &cfg()), Err(FlexError::BelowQuadratic));
        let e: Growth = GrowthExpr::exponential(1.into()).into();
        assert_eq!(choose_l(&e, 64, &cfg()), Err(FlexError::NotPolynomial));
    }

    #[test]
    fn choose_l_tabulated() {
        let t: Growth = TabulatedGrowth::from_integers((1..=128u64).map(|n| n * n * n * n))
            .unwrap()
            .into();
        assert_eq!(choose_l(&t, 128, &cfg()).unwrap(), 4);
        let lin: Growth = TabulatedGrowth::from_integers(1..=128u64).unwrap().into();
        assert_eq!(choose_l(&lin, 128, &cfg()), Err(FlexError::BelowQuadratic));
    }

    #[test]
    fn factor_split_examples() {
        assert_eq!(factor_split(&big(1), 5, 3).unwrap(), vec![1, 1, 1]);
        assert_eq!(factor_split(&big(30), 5, 3).unwrap(), vec![5, 3, 2]);
        assert_eq!(factor_split(&big(4), 5, 3).unwrap(), vec![4, 1, 1]);
        assert_eq!(factor_split(&big(125), 5, 3).unwrap(), vec![5, 5, 5]);
        assert!(matches!(
            factor_split(&big(126), 5, 3),
            Err(FlexError::FactorOverflow { .. })
        ));
    }

    /// Brute-force oracle: every triple in [1,5]^3 whose product lies in
    /// [e/8, e]; the greedy answer must be one of them.
    #[test]
    fn factor_split_lands_in_feasible_set() {
        for e in 1..=125u64 {
            let feasible: Vec<[u64; 3]> = (1..=5)
                .flat_map(|a| (1..=5).flat_map(move |b| (1..=5).map(move |c| [a, b, c])))
                .filter(|t| {
                    let p = t[0] * t[1] * t[2];
                    p <= e && 8 * p >= e
                })
                .collect();
            let got = factor_split(&big(e), 5, 3).unwrap();
            assert!(
                feasible.contains(&[got[0], got[1], got[2]]),
                "e={e} got {got:?}"
            );
        }
        let got = factor_split(&big(30), 5, 3).unwrap();
        let p: u64 = got.iter().product();
        assert!(p <= 30 && 8 * p >= 30);
    }

    #[test]
    fn quadratic_target_gives_unit_factors() {
        // Exact-rational oracle for a = n^2: e(n+1) = d(n)/n^2 with d(1) = 1
        // gives d(n) = n^2 and e ≡ 1.
        let plan = build_sequences(&poly(2), 3, 64, &cfg()).unwrap();
        assert!(plan.e.iter().all(|e| e == &big(1)));
        for n in 1..=64u64 {
            assert_eq!(plan.d_at(n as usize), &big(n * n));
        }
        assert_eq!(plan.b1, BigRational::one());
        assert_eq!(plan.b2, BigRational::one());
    }

    #[test]
    fn cubic_target_tracks_two_n() {
        // Oracle: for a = n^3 the recurrence gives e(n+1) = (n+1)^2 - n^2 = 2n+1
        // exactly; achieved products lose at most a factor 2^L to the split.
        let mut d = BigRational::one();
        let mut sum = BigRational::one();
        for n in 1..64i64 {
            let a = |m: i64| BigRational::from_integer(BigInt::from(m * m * m));
            let e = (a(n + 1) / a(n) - BigRational::new((n + 1).into(), n.into())) * &d
                / BigRational::from_integer((n + 1).into());
            assert_eq!(e, BigRational::from_integer((2 * n + 1).into()));
            sum += e;
            d = &sum * BigRational::from_integer((n + 1).into());
            assert_eq!(d, a(n + 1));
        }
        let plan = build_sequences(&poly(3), 3, 64, &cfg()).unwrap();
        for n in 2..=64usize {
            let e = plan.e_at(n).to_u64().unwrap();
            assert!(e <= 2 * n as u64 - 1 + 1, "n={n} e={e}");
        }
        // d(n) recomputed from scratch.
        for n in 1..=64usize {
            assert_eq!(plan.d_at(n), &(plan.e_prefix_sum(n) * BigUint::from(n)));
        }
        let b = plan.b2.to_f64().unwrap() / plan.b1.to_f64().unwrap();
        assert!(b <= 1.1, "{b}");
    }

    #[test]
    fn clamp_keeps_e_positive() {
        // A target that stalls: the recurrence goes negative and clamps to 1.
        let vals: Vec<u64> = (1..=64u64)
            .map(|n| if (10..14).contains(&n) { 100 } else { n * n })
            .collect();
        let mut monotone = vals.clone();
        for i in 1..monotone.len() {
            monotone[i] = monotone[i].max(monotone[i - 1]);
        }
        let t: Growth = TabulatedGrowth::from_integers(monotone).unwrap().into();
        let plan = build_sequences(&t, 3, 64, &cfg()).unwrap();
        assert_eq!(plan.e_at(11), &big(1));
        assert!(plan.e.iter().all(|e| e >= &big(1)));
    }

    #[test]
    fn factors_bounded_by_index() {
        let n2logn: Growth = GrowthExpr::polylog(2, 1).into();
        for target in [poly(2), poly(3), n2logn, poly(4)] {
            let l = choose_l(&target, 96, &cfg()).unwrap();
            let plan = build_sequences(&target, l, 96, &cfg()).unwrap();
            for n in 1..=96usize {
                let mut prod = BigUint::one();
                for i in 2..=l + 1 {
                    let a = plan.factor(i, n);
                    assert!(a >= 1 && a <= n as u64);
                    prod *= a;
                }
                assert_eq!(&prod, plan.e_at(n));
            }
            assert!(plan.d.windows(2).all(|w| w[0] < w[1]));
            let d: Growth = TabulatedGrowth::from_biguints(&plan.d).unwrap().into();
            let v = compare(&d, &target, 96, &cfg()).unwrap();
            assert_eq!(v.relation, Relation::Equiv);
        }
    }

    #[test]
    fn exponential_target_rejected() {
        let e: Growth = TabulatedGrowth::from_fn(40, |n| (1..=n).map(|k| k as f64).product())
            .unwrap()
            .into();
        assert_eq!(build_sequences(&e, 3, 40, &cfg()), Err(FlexError::NoBjp));
        assert_eq!(
            build_sequences(&poly(2), 2, 40, &cfg()),
            Err(FlexError::SmallL(2))
        );
    }

    fn unit_plan(horizon: usize) -> ConstructionPlan {
        build_sequences(&poly(2), 3, horizon, &cfg()).unwrap()
    }

    fn with_factor(mut plan: ConstructionPlan, i: usize, n: usize, v: u64) -> ConstructionPlan {
        plan.factors[n - 1][i - 2] = v;
        plan.e[n - 1] = plan.factors[n - 1]
            .iter()
            .map(|&x| BigUint::from(x))
            .product();
        plan
    }

    #[test]
    fn tuple_examples() {
        let plan = unit_plan(16);
        let t = admissible_tuples(&plan, 1).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].total(), 2 * 3 + 1);

        let plan = with_factor(unit_plan(16), 2, 3, 2);
        let t = admissible_tuples(&plan, 3).unwrap();
        assert_eq!(t.len(), 2);
        let k2: Vec<u64> = t.iter().map(|t| t.k()[1]).collect();
        assert_eq!(k2, vec![4, 5]);
        assert!(t.iter().all(|t| t.k()[0] == 3));
    }

    #[test]
    fn tuple_counts_and_sandwich() {
        let n3: Growth = poly(3);
        let plan = build_sequences(&n3, 3, 40, &cfg()).unwrap();
        for k1 in 1..=40u64 {
            let tuples = admissible_tuples(&plan, k1).unwrap();
            assert_eq!(BigUint::from(tuples.len()), *plan.e_at(k1 as usize));
            for t in &tuples {
                let mut s = 0;
                for (idx, k) in t.k().iter().enumerate() {
                    s += k;
                    let i = idx as u64;
                    if idx >= 1 {
                        assert!(2 * i * k1 <= s && s <= (2 * i + 1) * k1, "{t:?}");
                    }
                }
                assert!(2 * 3 * k1 <= s && s <= 7 * k1);
            }
        }
    }

    #[test]
    fn interval_tree_examples() {
        let plan = unit_plan(16);
        let tree = build_interval_tree(&plan, 1).unwrap();
        let leaves = tree.leaves();
        assert_eq!(leaves.len(), 1);
        assert_eq!(leaves[0].lo, BigRational::new(1.into(), 2.into()));
        assert_eq!(leaves[0].hi, BigRational::one());

        let plan = with_factor(unit_plan(16), 2, 2, 2);
        let tree = build_interval_tree(&plan, 2).unwrap();
        let root = tree.root(2);
        assert_eq!(root.children.len(), 2);
        let mid = BigRational::new(5.into(), 12.into());
        assert_eq!(root.children[0].lo, mid);
        assert_eq!(root.children[1].hi, mid);
        assert_eq!(root.children[1].lo, BigRational::new(1.into(), 3.into()));
    }

    #[test]
    fn interval_tree_partitions_and_counts() {
        let plan = build_sequences(&poly(3), 3, 24, &cfg()).unwrap();
        let tree = build_interval_tree(&plan, 24).unwrap();
        for k1 in 1..=24u64 {
            let mut leaves = tree.leaves_under(k1);
            assert_eq!(BigUint::from(leaves.len()), *plan.e_at(k1 as usize));
            leaves.sort_by(|a, b| a.lo.cmp(&b.lo));
            let root = tree.root(k1);
            assert_eq!(leaves[0].lo, root.lo);
            assert_eq!(leaves.last().unwrap().hi, root.hi);
            for w in leaves.windows(2) {
                assert_eq!(w[0].hi, w[1].lo);
            }
            let mut from_tree: Vec<Vec<u64>> = leaves.iter().map(|l| l.prefix.clone()).collect();
            let mut from_gen: Vec<Vec<u64>> = admissible_tuples(&plan, k1)
                .unwrap()
                .into_iter()
                .map(|t| t.k().to_vec())
                .collect();
            from_tree.sort();
            from_gen.sort();
            assert_eq!(from_tree, from_gen);
        }
        assert!(tree.root(24).hi < tree.root(1).lo);
    }

    #[test]
    fn locate_heights() {
        let plan = build_sequences(&poly(3), 3, 16, &cfg()).unwrap();
        let tree = build_interval_tree(&plan, 12).unwrap();
        for leaf in tree.leaves() {
            let y = (&leaf.lo + &leaf.hi) / BigRational::from_integer(2.into());
            assert_eq!(tree.locate(&y), Location::Leaf(leaf));
            assert_eq!(tree.locate(&leaf.hi), Location::Boundary);
        }
        assert_eq!(
            tree.locate(&BigRational::from_integer(2.into())),
            Location::Outside
        );
        assert_eq!(
            tree.locate(&BigRational::new(1.into(), 100.into())),
            Location::Outside
        );
    }

    #[test]
    fn composite_examples() {
        let chain = ordered_chain(&[poly(2)]).unwrap();
        let c = build_composite(&chain, 1, 32, &cfg()).unwrap();
        assert_eq!(c.k(), 1);
        assert_eq!(c.stages[0], build_stage(&poly(2), 32, &cfg()).unwrap());
        assert_eq!(
            build_composite(&chain, 0, 32, &cfg()),
            Err(FlexError::EmptyComposite)
        );
        assert!(matches!(
            build_composite(&chain, 2, 32, &cfg()),
            Err(FlexError::ChainTooShort { .. })
        ));
        let chain = ordered_chain(&[poly(2), poly(3)]).unwrap();
        let c = build_composite(&chain, 2, 32, &cfg()).unwrap();
        assert_eq!(c.stages[1].target, poly(3));
    }

    #[test]
    fn stage_independence() {
        let a = ordered_chain(&[poly(2), poly(3)]).unwrap();
        let b = ordered_chain(&[poly(2), poly(4)]).unwrap();
        let ca = build_composite(&a, 2, 32, &cfg()).unwrap();
        let cb = build_composite(&b, 2, 32, &cfg()).unwrap();
        assert_eq!(
            ca.stages[0].to_json().to_string(),
            cb.stages[0].to_json().to_string()
        );
    }

    #[test]
    fn plan_exports() {
        let plan = unit_plan(16);
        let csv = plan.to_csv();
        assert!(csv.starts_with("n,e,a_2,a_3,a_4,d\n1,1,1,1,1,1\n2,1,1,1,1,4\n"));
        let json = plan.to_json();
        assert_eq!(json["L"], 3);
        assert_eq!(json["d"][15], "256");
    }
}
