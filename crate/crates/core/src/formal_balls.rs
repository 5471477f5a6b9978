//! Formal balls: the extension `X × ℝ₋` with `d((x,r),(y,s)) = (d(x,y)+r−s)₊`.
//!
//! The extension is never materialized. Pointwise operations take any
//! rational radii; subset questions run on a finite radius grid.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Exec;
use crate::extreal::{format_rational, parse_rational, ExtReal, ExtRealError, Rational};
use crate::nets::EpSeq;
use crate::order::{self, Sense, SubsetSearch};
use crate::space::{FiniteSpace, SpaceError};
use crate::topology::{self, Topology};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormalBallError {
    #[error("radius {0} is positive")]
    PositiveRadius(Rational),
    #[error("point {0} is not in the space")]
    BadPoint(usize),
    #[error("formal-ball sequence is not Cauchy")]
    NotCauchy,
    #[error("radius sequence is only known through finitely many terms")]
    Undecidable,
    #[error("radius sequence {0:?} is malformed")]
    BadRadii(String),
    #[error(transparent)]
    Value(#[from] ExtRealError),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormalBallLiteral {
    pub point: String,
    pub radius: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct FormalBall {
    pub point: usize,
    #[serde(with = "crate::extreal::rational_string")]
    pub radius: Rational,
}

impl FormalBall {
    pub fn new(point: usize, radius: Rational) -> Result<Self, FormalBallError> {
        if radius > Rational::from_integer(0) {
            return Err(FormalBallError::PositiveRadius(radius));
        }
        Ok(FormalBall { point, radius })
    }

    pub fn from_literal(space: &FiniteSpace, lit: &FormalBallLiteral) -> Result<Self, FormalBallError> {
        FormalBall::new(space.index_of(&lit.point)?, parse_rational(&lit.radius)?)
    }

    pub fn to_literal(&self, space: &FiniteSpace) -> FormalBallLiteral {
        FormalBallLiteral { point: space.label(self.point).to_string(), radius: format_rational(self.radius) }
    }
}

/// `(d(x,y) + r − s)₊` on raw pairs of `X × ℝ`.
pub fn pair_distance(space: &FiniteSpace, x: usize, r: Rational, y: usize, s: Rational) -> ExtReal {
    space.d(x, y).shift(r - s)
}

pub fn fb_distance(space: &FiniteSpace, a: FormalBall, b: FormalBall) -> ExtReal {
    pair_distance(space, a.point, a.radius, b.point, b.radius)
}

pub fn fb_leq(space: &FiniteSpace, a: FormalBall, b: FormalBall) -> bool {
    fb_distance(space, a, b).is_zero()
}

/// A sample `(x, r, t, y, s)` for the closed-ball identities; `t ≥ 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BallTuple {
    pub x: usize,
    #[serde(with = "crate::extreal::rational_string")]
    pub r: Rational,
    #[serde(with = "crate::extreal::rational_string")]
    pub t: Rational,
    pub y: usize,
    #[serde(with = "crate::extreal::rational_string")]
    pub s: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BallIdentityReport {
    pub tuples: usize,
    pub violations: Vec<BallTuple>,
    /// Tuples where the minimum `(x, r−t)` and maximum `(y, t+s)` were checked.
    pub bound_checks: usize,
    /// Tuples skipped for the bound checks because `d(x,x) > 0` or `d(y,y) > 0`.
    pub bound_skipped: usize,
    pub up_le_identity: bool,
    pub low_le_identity: bool,
}

/// Checks `d((x,r),(y,s)) ≤ t ⇔ (x,r−t) ≤ (y,s) ⇔ (x,r) ≤ (y,t+s)` and that
/// `(x,r−t)` and `(y,t+s)` bound the closed balls within distance `t`.
pub fn ball_identities(space: &FiniteSpace, tuples: &[BallTuple]) -> BallIdentityReport {
    let mut violations = Vec::new();
    let (mut bound_checks, mut bound_skipped) = (0, 0);
    let (mut up_ok, mut low_ok) = (true, true);
    for &b in tuples {
        let t = ExtReal::new(b.t).expect("t is nonnegative");
        let within = pair_distance(space, b.x, b.r, b.y, b.s) <= t;
        let shifted_min = pair_distance(space, b.x, b.r - b.t, b.y, b.s).is_zero();
        let shifted_max = pair_distance(space, b.x, b.r, b.y, b.t + b.s).is_zero();
        if within != shifted_min || within != shifted_max {
            violations.push(b);
        }
        if space.leq(b.x, b.x) && space.leq(b.y, b.y) {
            bound_checks += 1;
            // closed upper ball of (x,r) has minimum (x,r−t) at distance t
            up_ok &= pair_distance(space, b.x, b.r, b.x, b.r - b.t) <= t
                && (!within || pair_distance(space, b.x, b.r - b.t, b.y, b.s).is_zero());
            // closed lower ball of (y,s) has maximum (y,t+s) at distance t
            low_ok &= pair_distance(space, b.y, b.t + b.s, b.y, b.s) <= t
                && (!within || pair_distance(space, b.x, b.r, b.y, b.t + b.s).is_zero());
        } else {
            bound_skipped += 1;
        }
    }
    BallIdentityReport {
        tuples: tuples.len(),
        violations,
        bound_checks,
        bound_skipped,
        up_le_identity: up_ok,
        low_le_identity: low_ok,
    }
}

/// Radii used for samples: `0, −1/4, −1/2, −1, −2`.
pub fn default_radius_grid() -> Vec<Rational> {
    [(0, 1), (-1, 4), (-1, 2), (-1, 1), (-2, 1)].iter().map(|&(n, d)| Rational::new(n, d)).collect()
}

pub fn random_tuples<R: Rng>(space: &FiniteSpace, rng: &mut R, count: usize) -> Vec<BallTuple> {
    let grid = default_radius_grid();
    let ts: Vec<Rational> = [(0, 1), (1, 4), (1, 2), (1, 1), (2, 1), (3, 1)].iter().map(|&(n, d)| Rational::new(n, d)).collect();
    (0..count)
        .map(|_| BallTuple {
            x: rng.gen_range(0..space.len()),
            r: *grid.choose(rng).unwrap(),
            t: *ts.choose(rng).unwrap(),
            y: rng.gen_range(0..space.len()),
            s: *grid.choose(rng).unwrap(),
        })
        .collect()
}

/// Radii `r_1, r_2, …` of a formal-ball sequence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadiusSeq {
    /// Listed terms, then `value` forever.
    EventuallyConstant {
        #[serde(with = "rational_vec")]
        pre: Vec<Rational>,
        #[serde(with = "crate::extreal::rational_string")]
        value: Rational,
    },
    /// `r_n = limit + coeff / (n + shift)` for `n ≥ 1`.
    Reciprocal {
        #[serde(with = "crate::extreal::rational_string")]
        limit: Rational,
        #[serde(with = "crate::extreal::rational_string")]
        coeff: Rational,
        shift: i64,
    },
    /// Finitely many observed terms and no convergence certificate.
    Listed {
        #[serde(with = "rational_vec")]
        terms: Vec<Rational>,
    },
}

mod rational_vec {
    use serde::{Serialize, Serializer};

    use crate::extreal::{format_rational, Rational};

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|q| format_rational(*q)).collect::<Vec<_>>().serialize(s)
    }
}

impl RadiusSeq {
    /// Term `n ≥ 1`, when known.
    pub fn term(&self, n: usize) -> Option<Rational> {
        match self {
            RadiusSeq::EventuallyConstant { pre, value } => Some(pre.get(n - 1).copied().unwrap_or(*value)),
            RadiusSeq::Reciprocal { limit, coeff, shift } => Some(*limit + *coeff / Rational::from_integer(n as i64 + shift)),
            RadiusSeq::Listed { terms } => terms.get(n - 1).copied(),
        }
    }

    pub fn limit(&self) -> Result<Rational, FormalBallError> {
        match self {
            RadiusSeq::EventuallyConstant { value, .. } => Ok(*value),
            RadiusSeq::Reciprocal { limit, .. } => Ok(*limit),
            RadiusSeq::Listed { .. } => Err(FormalBallError::Undecidable),
        }
    }

    /// Every term lies in `ℝ₋`.
    pub fn check(&self) -> Result<(), FormalBallError> {
        let zero = Rational::from_integer(0);
        let ok = match self {
            RadiusSeq::EventuallyConstant { pre, value } => pre.iter().all(|q| *q <= zero) && *value <= zero,
            RadiusSeq::Reciprocal { limit, coeff, shift } => *limit <= zero && *coeff <= zero && *shift >= 0,
            RadiusSeq::Listed { terms } => terms.iter().all(|q| *q <= zero),
        };
        if ok {
            Ok(())
        } else {
            Err(FormalBallError::BadRadii(format!("{self:?}")))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FormalBallSeq {
    pub points: EpSeq,
    pub radii: RadiusSeq,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KwLimit {
    pub limit: FormalBall,
    pub verified: bool,
    pub centers_checked: usize,
}

/// `liminf (d(x_n, c) + r_n − σ)₊` and `liminf (d(c, x_n) + σ − r_n)₊`, given `r_n → ρ`.
fn tail_infs(space: &FiniteSpace, seq: &EpSeq, rho: Rational, c: usize, sigma: Rational) -> (ExtReal, ExtReal) {
    let to = seq.cycle().iter().map(|&x| pair_distance(space, x, rho, c, sigma)).min().unwrap();
    let from = seq.cycle().iter().map(|&x| pair_distance(space, c, sigma, x, rho)).min().unwrap();
    (to, from)
}

/// The double-hole limit of a Cauchy formal-ball sequence: a double-hole
/// limit of the points paired with the limit radius, checked against every
/// point at every grid radius.
pub fn kw_limit(space: &FiniteSpace, seq: &FormalBallSeq, grid: &[Rational]) -> Result<KwLimit, FormalBallError> {
    seq.points.check_in(space).map_err(|_| {
        FormalBallError::BadPoint(*seq.points.pre().iter().chain(seq.points.cycle()).find(|&&p| p >= space.len()).unwrap())
    })?;
    seq.radii.check()?;
    let rho = seq.radii.limit()?;
    if !seq.points.classify(space).cauchy {
        return Err(FormalBallError::NotCauchy);
    }
    let x = *topology::limit_set(space, &seq.points, Topology::DoubleHole)
        .first()
        .expect("finite spaces are complete");
    let limit = FormalBall::new(x, rho)?;
    let mut sigmas: Vec<Rational> = grid.to_vec();
    sigmas.push(rho);
    sigmas.sort();
    sigmas.dedup();
    let mut verified = true;
    for c in space.points() {
        for &sigma in &sigmas {
            let (to, from) = tail_infs(space, &seq.points, rho, c, sigma);
            verified &= to >= pair_distance(space, x, rho, c, sigma) && from >= pair_distance(space, c, sigma, x, rho);
        }
    }
    Ok(KwLimit { limit, verified, centers_checked: space.len() * sigmas.len() })
}

/// Random Cauchy formal-ball sequence: cycle drawn from a zero clique,
/// radii eventually constant or reciprocal.
pub fn random_cauchy_seq<R: Rng>(space: &FiniteSpace, cliques: &[Vec<usize>], rng: &mut R) -> FormalBallSeq {
    let clique = cliques.choose(rng).expect("at least one zero clique");
    let cycle: Vec<usize> = (0..rng.gen_range(1..=3)).map(|_| *clique.choose(rng).unwrap()).collect();
    let pre: Vec<usize> = (0..rng.gen_range(0..=2)).map(|_| rng.gen_range(0..space.len())).collect();
    let grid = default_radius_grid();
    let radii = if rng.gen_bool(0.5) {
        let pre = (0..rng.gen_range(0..=3)).map(|_| *grid.choose(rng).unwrap()).collect();
        RadiusSeq::EventuallyConstant { pre, value: *grid.choose(rng).unwrap() }
    } else {
        RadiusSeq::Reciprocal {
            limit: *grid.choose(rng).unwrap(),
            coeff: *[Rational::new(-1, 2), Rational::from_integer(-1), Rational::from_integer(-2)].choose(rng).unwrap(),
            shift: rng.gen_range(0..=2),
        }
    };
    FormalBallSeq { points: EpSeq::new(pre, cycle).unwrap(), radii }
}

/// The grid part `X × grid` of the extension as a finite space; point
/// `i * grid.len() + k` is `(i, grid[k])`.
pub fn grid_space(space: &FiniteSpace, grid: &[Rational]) -> FiniteSpace {
    let m = grid.len();
    let labels = (0..space.len() * m)
        .map(|p| format!("({},{})", space.label(p / m), format_rational(grid[p % m])))
        .collect();
    FiniteSpace::from_fn(labels, |a, b| pair_distance(space, a / m, grid[a % m], b / m, grid[b % m]))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KwAudit {
    /// `X` is complete.
    pub complete: bool,
    /// Every sampled Cauchy formal-ball sequence has a verified limit.
    pub sequences_sampled: usize,
    pub sequences_verified: usize,
    pub formal_complete: bool,
    /// Every sampled `≤`-directed grid subset has a `≤`-supremum, found by
    /// brute force and equal to its top element.
    pub directed_subsets: u64,
    pub order_complete: bool,
    /// Those supremums are also d-supremums.
    pub sups_are_d_sups: bool,
    pub mode: order::EnumerationMode,
    pub equivalent: bool,
}

pub fn kw_audit<R: Rng>(space: &FiniteSpace, sequences: usize, search: SubsetSearch, rng: &mut R, exec: Exec) -> KwAudit {
    let complete = topology::is_complete(space, exec).complete;
    let cliques = topology::zero_cliques(space);
    let seqs: Vec<FormalBallSeq> = if cliques.is_empty() {
        Vec::new()
    } else {
        (0..sequences).map(|_| random_cauchy_seq(space, &cliques, rng)).collect()
    };
    let grid = default_radius_grid();
    let verdicts = exec.map(&seqs, |s| kw_limit(space, s, &grid).map(|l| l.verified).unwrap_or(false));
    let sequences_verified = verdicts.iter().filter(|&&v| v).count();

    let coarse: Vec<Rational> = grid.iter().copied().filter(|q| *q >= Rational::new(-1, 1)).collect();
    let fb = grid_space(space, &coarse);
    let (mode, subsets) = order::subsets(fb.len(), search);
    let checks = exec.map(&subsets, |ys| {
        if !order::is_directed(&fb, ys, Sense::Leq) {
            return None;
        }
        let sups = order::suprema(&fb, ys).unwrap();
        let tops = order::tops(&fb, ys);
        let found = !sups.leq_sups.is_empty() && tops.iter().all(|t| sups.leq_sups.contains(t)) && !tops.is_empty();
        Some((found, sups.leq_sups.iter().all(|s| sups.d_sups.contains(s))))
    });
    let directed: Vec<(bool, bool)> = checks.into_iter().flatten().collect();
    let order_complete = directed.iter().all(|c| c.0);
    let formal_complete = sequences_verified == seqs.len();
    KwAudit {
        complete,
        sequences_sampled: seqs.len(),
        sequences_verified,
        formal_complete,
        directed_subsets: directed.len() as u64,
        order_complete,
        sups_are_d_sups: directed.iter().all(|c| c.1),
        mode,
        equivalent: complete == formal_complete && formal_complete == order_complete,
    }
}
