//! Derived step functions `d^•`, `d_•`, `d_F`, `d_Φ` on `[0, ∞]` and
//! uniform subequivalence.
//!
//! A [`StepFn`] stores its value at `0`, a list of finite positive
//! breakpoints `b_1 < … < b_k`, one piece per interval `(b_i, b_{i+1}]`
//! (the last one is `(b_k, ∞)`), and its value at `∞`.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::exec::Exec;
use crate::extreal::ExtReal;
use crate::space::FiniteSpace;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Piece {
    Const(ExtReal),
    Identity,
}

impl fmt::Display for Piece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Piece::Const(v) => write!(f, "{v}"),
            Piece::Identity => f.write_str("identity"),
        }
    }
}

impl Serialize for Piece {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StepFn {
    at_zero: ExtReal,
    breakpoints: Vec<ExtReal>,
    values: Vec<Piece>,
    at_infinity: ExtReal,
}

impl StepFn {
    /// Panics unless the breakpoints are finite, positive and strictly
    /// increasing with one more piece than breakpoints.
    pub fn new(at_zero: ExtReal, breakpoints: Vec<ExtReal>, values: Vec<Piece>, at_infinity: ExtReal) -> Self {
        assert_eq!(values.len(), breakpoints.len() + 1, "one piece per interval");
        assert!(breakpoints.iter().all(|b| b.is_positive() && b.is_finite()));
        assert!(breakpoints.windows(2).all(|w| w[0] < w[1]));
        StepFn { at_zero, breakpoints, values, at_infinity }.simplified()
    }

    pub fn identity() -> Self {
        StepFn::new(ExtReal::ZERO, vec![], vec![Piece::Identity], ExtReal::INFINITY)
    }

    pub fn constant(v: ExtReal) -> Self {
        StepFn::new(v, vec![], vec![Piece::Const(v)], v)
    }

    pub fn at_zero(&self) -> ExtReal {
        self.at_zero
    }

    pub fn at_infinity(&self) -> ExtReal {
        self.at_infinity
    }

    pub fn breakpoints(&self) -> &[ExtReal] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.values
    }

    fn simplified(mut self) -> Self {
        let mut bps = Vec::new();
        let mut vals = vec![self.values[0]];
        for (b, v) in self.breakpoints.iter().zip(&self.values[1..]) {
            if *v != *vals.last().unwrap() {
                bps.push(*b);
                vals.push(*v);
            }
        }
        self.breakpoints = bps;
        self.values = vals;
        self
    }

    /// `(lower, upper, piece)` triples; `upper` is `∞` for the last (open) one.
    pub fn intervals(&self) -> impl Iterator<Item = (ExtReal, ExtReal, Piece)> + '_ {
        let lows = std::iter::once(ExtReal::ZERO).chain(self.breakpoints.iter().copied());
        let highs = self.breakpoints.iter().copied().chain(std::iter::once(ExtReal::INFINITY));
        lows.zip(highs).zip(self.values.iter().copied()).map(|((a, b), p)| (a, b, p))
    }

    pub fn eval(&self, r: ExtReal) -> ExtReal {
        if r.is_zero() {
            return self.at_zero;
        }
        if r.is_infinite() {
            return self.at_infinity;
        }
        let i = self.breakpoints.partition_point(|b| *b < r);
        match self.values[i] {
            Piece::Const(v) => v,
            Piece::Identity => r,
        }
    }

    /// `lim_{r→0⁺} f(r)`.
    pub fn limit_at_zero(&self) -> ExtReal {
        match self.values[0] {
            Piece::Const(v) => v,
            Piece::Identity => ExtReal::ZERO,
        }
    }

    fn merged_breakpoints(&self, other: &StepFn) -> Vec<ExtReal> {
        let mut all: Vec<ExtReal> = self.breakpoints.iter().chain(&other.breakpoints).copied().collect();
        all.sort();
        all.dedup();
        all
    }

    /// Piece of `self` covering the interval `(a, b]` of a refinement.
    fn piece_over(&self, b: ExtReal) -> Piece {
        self.values[self.breakpoints.partition_point(|x| *x < b)]
    }

    /// Exact pointwise `self ≤ other` on all of `[0, ∞]`.
    pub fn le(&self, other: &StepFn) -> bool {
        if self.at_zero > other.at_zero || self.at_infinity > other.at_infinity {
            return false;
        }
        let bps = self.merged_breakpoints(other);
        let lows = std::iter::once(ExtReal::ZERO).chain(bps.iter().copied());
        let highs = bps.iter().copied().chain(std::iter::once(ExtReal::INFINITY));
        lows.zip(highs).all(|(a, b)| match (self.piece_over(b), other.piece_over(b)) {
            (Piece::Const(c), Piece::Const(e)) => c <= e,
            (Piece::Identity, Piece::Const(e)) => b <= e,
            (Piece::Const(c), Piece::Identity) => c <= a,
            (Piece::Identity, Piece::Identity) => true,
        })
    }

    /// Pointwise equality of the functions (the representations are canonical).
    pub fn same(&self, other: &StepFn) -> bool {
        self.le(other) && other.le(self)
    }

    pub fn le_identity(&self) -> bool {
        self.le(&StepFn::identity())
    }

    pub fn is_monotone(&self) -> bool {
        let mut prev = self.at_zero;
        for (a, b, p) in self.intervals() {
            let (lo, hi) = match p {
                Piece::Const(v) => (v, v),
                Piece::Identity => (a, b),
            };
            if lo < prev {
                return false;
            }
            prev = hi;
        }
        prev <= self.at_infinity
    }

    /// `0` lies in the closure of `{r > 0 : f[0, r) ⊆ [0, r)}`.
    pub fn weak_condition(&self) -> bool {
        self.at_zero.is_zero() && self.limit_at_zero().is_zero()
    }

    /// Whether `f[0, r) ⊆ [0, r)` at a single finite `r > 0`.
    pub fn maps_below(&self, r: ExtReal) -> bool {
        if self.at_zero >= r {
            return false;
        }
        self.intervals().filter(|(a, _, _)| *a < r).all(|(_, _, p)| match p {
            Piece::Const(v) => v < r,
            Piece::Identity => true,
        })
    }
}

/// `f ≾ g`: `sup {f(x) : g(x) ≤ r} → 0` as `r → 0⁺`.
///
/// For small `r` the set `{g ≤ r}` consists of `0` (if `g(0) = 0`), the
/// intervals where `g` is the constant `0`, `∞` (if `g(∞) = 0`), and `(0, r]`
/// when `g` starts with an identity piece.
pub fn subequiv(f: &StepFn, g: &StepFn) -> bool {
    let mut sup = ExtReal::ZERO;
    if g.at_zero.is_zero() {
        sup = sup.max(f.at_zero);
    }
    if g.at_infinity.is_zero() {
        sup = sup.max(f.at_infinity);
    }
    if g.values[0] == Piece::Identity {
        sup = sup.max(f.limit_at_zero());
    }
    let bps = f.merged_breakpoints(g);
    let lows = std::iter::once(ExtReal::ZERO).chain(bps.iter().copied());
    let highs = bps.iter().copied().chain(std::iter::once(ExtReal::INFINITY));
    for (_, b) in lows.zip(highs) {
        if g.piece_over(b) == Piece::Const(ExtReal::ZERO) {
            sup = sup.max(match f.piece_over(b) {
                Piece::Const(v) => v,
                Piece::Identity => b,
            });
        }
    }
    sup.is_zero()
}

/// `f ≾ g` for functions on a finite set, given as matrices over `X × X`.
pub fn subequiv_pairs(f: &FiniteSpace, g: &FiniteSpace) -> bool {
    f.points().all(|x| f.points().all(|y| !g.leq(x, y) || f.leq(x, y)))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DerivedFunctions {
    pub d_up: StepFn,
    pub d_low: StepFn,
    pub d_f: StepFn,
    pub d_phi: StepFn,
}

/// Radii at which the open balls change: `0`, every finite positive value,
/// then `∞` for the last piece.
fn sample_radii(space: &FiniteSpace) -> (Vec<ExtReal>, Vec<ExtReal>) {
    let bps: Vec<ExtReal> = space.distinct_values().into_iter().filter(|v| v.is_positive() && v.is_finite()).collect();
    let mut radii = vec![ExtReal::ZERO];
    radii.extend(bps.iter().copied());
    radii.push(ExtReal::INFINITY);
    (bps, radii)
}

fn assemble(bps: Vec<ExtReal>, samples: &[ExtReal]) -> StepFn {
    // samples: value at 0, at each breakpoint, then at ∞
    let k = bps.len();
    let mut values: Vec<Piece> = samples[1..=k].iter().map(|&v| Piece::Const(v)).collect();
    values.push(Piece::Const(samples[k + 1]));
    StepFn::new(samples[0], bps, values, samples[k + 1])
}

fn inf_over(candidates: impl Iterator<Item = usize>, value: impl Fn(usize) -> ExtReal) -> ExtReal {
    candidates.map(value).min().unwrap_or(ExtReal::INFINITY)
}

/// `sup_x inf_{y ≤ x•_r} d(x, y)` over the upper ball `x•_r = {z : d(x, z) < r}`.
pub fn d_up_at(space: &FiniteSpace, x: usize, r: ExtReal) -> ExtReal {
    let ball: Vec<usize> = space.points().filter(|&z| space.d(x, z) < r).collect();
    inf_over(space.points().filter(|&y| ball.iter().all(|&z| space.leq(y, z))), |y| space.d(x, y))
}

/// `inf_{F ≤ y} d(y, x)` for `F` inside the lower ball of `x`.
pub fn upper_bound_gap(space: &FiniteSpace, x: usize, f: &[usize]) -> ExtReal {
    inf_over(space.points().filter(|&y| f.iter().all(|&z| space.leq(z, y))), |y| space.d(y, x))
}

pub fn lower_ball(space: &FiniteSpace, x: usize, r: ExtReal) -> Vec<usize> {
    space.points().filter(|&z| space.d(z, x) < r).collect()
}

fn d_phi_at(space: &FiniteSpace, generators: &[ExtReal], x: usize, r: ExtReal) -> ExtReal {
    let ball = lower_ball(space, x, r);
    generators
        .iter()
        .map(|&eps| {
            inf_over(space.points().filter(|&y| ball.iter().all(|&z| space.d(z, y) < eps)), |y| space.d(y, x))
        })
        .max()
        .unwrap_or(ExtReal::INFINITY)
}

/// Evaluates the four derived functions exactly. `d_F` takes `F` to be the
/// whole lower ball, where the supremum over finite `F` is attained.
pub fn derived_functions(space: &FiniteSpace, exec: Exec) -> DerivedFunctions {
    let (bps, radii) = sample_radii(space);
    let generators = space.threshold_generators();
    let per_point = exec.map_range(space.len() as u64, |x| {
        let x = x as usize;
        radii
            .iter()
            .map(|&r| {
                let low = upper_bound_gap(space, x, &lower_ball(space, x, r));
                (d_up_at(space, x, r), low, d_phi_at(space, &generators, x, r))
            })
            .collect::<Vec<_>>()
    });
    let column = |pick: fn(&(ExtReal, ExtReal, ExtReal)) -> ExtReal| -> Vec<ExtReal> {
        (0..radii.len()).map(|i| per_point.iter().map(|row| pick(&row[i])).max().unwrap_or(ExtReal::ZERO)).collect()
    };
    let up = column(|t| t.0);
    let low = column(|t| t.1);
    let phi = column(|t| t.2);
    let d_low = assemble(bps.clone(), &low);
    DerivedFunctions {
        d_up: assemble(bps.clone(), &up),
        d_f: d_low.clone(),
        d_low,
        d_phi: assemble(bps, &phi),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn discrete2() -> FiniteSpace {
        FiniteSpace::from_fn(crate::space::default_labels(2), |i, j| if i == j { ExtReal::ZERO } else { ExtReal::ONE })
    }

    #[test]
    fn discrete_metric_up_function() {
        let f = derived_functions(&discrete2(), Exec::default());
        assert_eq!(f.d_up.eval(ExtReal::ratio(1, 2)), ExtReal::ZERO);
        assert_eq!(f.d_up.eval(ExtReal::ONE), ExtReal::ZERO);
        assert_eq!(f.d_up.eval(ExtReal::int(2)), ExtReal::INFINITY);
        assert_eq!(f.d_up.at_infinity(), ExtReal::INFINITY);
        assert!(subequiv(&f.d_up, &StepFn::identity()));
        assert!(!f.d_up.le_identity());
    }

    #[test]
    fn subequiv_basics() {
        let i = StepFn::identity();
        assert!(subequiv(&i, &i));
        assert!(!subequiv(&StepFn::constant(ExtReal::INFINITY), &i));
        assert!(subequiv(&StepFn::constant(ExtReal::ZERO), &StepFn::constant(ExtReal::ZERO)));
    }

    #[test]
    fn pointwise_comparison_with_identity() {
        let f = StepFn::new(
            ExtReal::ZERO,
            vec![ExtReal::ONE],
            vec![Piece::Const(ExtReal::ZERO), Piece::Const(ExtReal::ONE)],
            ExtReal::ONE,
        );
        assert!(f.le_identity());
        let g = StepFn::new(
            ExtReal::ZERO,
            vec![ExtReal::ONE],
            vec![Piece::Const(ExtReal::ZERO), Piece::Const(ExtReal::int(2))],
            ExtReal::int(2),
        );
        assert!(!g.le_identity());
        assert!(f.le(&g) && !g.le(&f));
        assert!(f.is_monotone() && g.is_monotone());
        assert!(f.weak_condition());
    }

    #[test]
    fn hemimetric_vanishes_near_zero() {
        let z = ExtReal::ZERO;
        let s = FiniteSpace::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![vec![z, ExtReal::ONE, z], vec![ExtReal::int(2), z, ExtReal::int(2)], vec![z, ExtReal::ONE, z]],
        )
        .unwrap();
        let f = derived_functions(&s, Exec::default());
        for g in [&f.d_up, &f.d_low, &f.d_phi] {
            assert!(g.limit_at_zero().is_zero() && g.at_zero().is_zero());
            assert!(g.is_monotone());
        }
        assert!(f.d_phi.le(&f.d_f) && f.d_f.same(&f.d_low));
    }
}
