//! Ball and hole convergence of eventually periodic sequences, limit sets
//! and the completeness decision.

use serde::Serialize;
use thiserror::Error;

use crate::exec::Exec;
use crate::extreal::ExtReal;
use crate::nets::EpSeq;
use crate::space::FiniteSpace;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TopologyError {
    #[error("sequence is not reflexive")]
    NotReflexive,
    #[error("sequence is not pre-Cauchy")]
    NotPreCauchy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    UpperBall,
    LowerBall,
    UpperHole,
    LowerHole,
    DoubleHole,
    DLimit,
}

impl Topology {
    pub const ALL: [Topology; 6] = [
        Topology::UpperBall,
        Topology::LowerBall,
        Topology::UpperHole,
        Topology::LowerHole,
        Topology::DoubleHole,
        Topology::DLimit,
    ];
}

/// A center at which a convergence inequality fails: `tail` is the limsup or
/// liminf along the sequence and `distance` the value at the candidate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub center: usize,
    pub tail: ExtReal,
    pub distance: ExtReal,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConvergenceReport {
    pub point: usize,
    pub upper_ball: Option<Witness>,
    pub lower_ball: Option<Witness>,
    pub upper_hole: Option<Witness>,
    pub lower_hole: Option<Witness>,
    pub d_limit: Option<Witness>,
}

impl ConvergenceReport {
    pub fn holds(&self, t: Topology) -> bool {
        match t {
            Topology::UpperBall => self.upper_ball.is_none(),
            Topology::LowerBall => self.lower_ball.is_none(),
            Topology::UpperHole => self.upper_hole.is_none(),
            Topology::LowerHole => self.lower_hole.is_none(),
            Topology::DoubleHole => self.upper_hole.is_none() && self.lower_hole.is_none(),
            Topology::DLimit => self.d_limit.is_none(),
        }
    }

    /// Witness for a false double-hole flag: the larger violation of the two sides.
    pub fn double_hole_witness(&self) -> Option<Witness> {
        let gap = |w: &Witness| w.distance.tsub(w.tail).max(w.tail.tsub(w.distance));
        match (self.upper_hole, self.lower_hole) {
            (Some(a), Some(b)) => Some(if gap(&b) > gap(&a) { b } else { a }),
            (a, b) => a.or(b),
        }
    }
}

/// Center with the largest violation, lowest index on ties.
fn worst(space: &FiniteSpace, violated: impl Fn(usize) -> Option<(ExtReal, ExtReal, ExtReal)>) -> Option<Witness> {
    let mut best: Option<(ExtReal, Witness)> = None;
    for c in space.points() {
        if let Some((gap, tail, distance)) = violated(c) {
            if best.as_ref().is_none_or(|(g, _)| gap > *g) {
                best = Some((gap, Witness { center: c, tail, distance }));
            }
        }
    }
    best.map(|(_, w)| w)
}

/// Exact convergence flags of `seq` towards `x`, via cycle min and max.
pub fn convergence(space: &FiniteSpace, seq: &EpSeq, x: usize) -> ConvergenceReport {
    let at_most = |tail: ExtReal, distance: ExtReal| (tail > distance).then(|| (tail.tsub(distance), tail, distance));
    let at_least = |tail: ExtReal, distance: ExtReal| (tail < distance).then(|| (distance.tsub(tail), tail, distance));
    ConvergenceReport {
        point: x,
        upper_ball: worst(space, |c| at_most(seq.limsup_from(space, c), space.d(c, x))),
        lower_ball: worst(space, |c| at_most(seq.limsup_to(space, c), space.d(x, c))),
        upper_hole: worst(space, |c| at_least(seq.liminf_to(space, c), space.d(x, c))),
        lower_hole: worst(space, |c| at_least(seq.liminf_from(space, c), space.d(c, x))),
        d_limit: worst(space, |y| {
            let (tail, distance) = (seq.limsup_to(space, y), space.d(x, y));
            (tail != distance).then(|| (tail.tsub(distance).max(distance.tsub(tail)), tail, distance))
        }),
    }
}

pub fn limit_set(space: &FiniteSpace, seq: &EpSeq, topology: Topology) -> Vec<usize> {
    space.points().filter(|&x| convergence(space, seq, x).holds(topology)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HoleEquation {
    /// lower hole ⇔ `d(x_n, x) → 0`
    LowerHole,
    /// double hole ⇔ upper hole, lower ball and `x ≤ x`
    DoubleHole,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HoleCheck {
    pub points_checked: usize,
    pub violations: Vec<(usize, HoleEquation)>,
}

/// Both hole characterizations at every point, for a reflexive sequence.
pub fn check_hole_characterizations(space: &FiniteSpace, seq: &EpSeq) -> Result<HoleCheck, TopologyError> {
    if !seq.classify(space).reflexive {
        return Err(TopologyError::NotReflexive);
    }
    let mut violations = Vec::new();
    for x in space.points() {
        let r = convergence(space, seq, x);
        if r.holds(Topology::LowerHole) != seq.limsup_to(space, x).is_zero() {
            violations.push((x, HoleEquation::LowerHole));
        }
        let rhs = r.holds(Topology::UpperHole) && r.holds(Topology::LowerBall) && space.leq(x, x);
        if r.holds(Topology::DoubleHole) != rhs {
            violations.push((x, HoleEquation::DoubleHole));
        }
    }
    Ok(HoleCheck { points_checked: space.len(), violations })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Completeness {
    pub complete: bool,
    pub zero_cliques: u64,
    /// A Cauchy sequence without a double-hole limit.
    pub witness: Option<EpSeq>,
}

/// All zero cliques whose least member is `first`, in lexicographic order.
fn cliques_from(space: &FiniteSpace, first: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if !space.leq(first, first) {
        return out;
    }
    let mut stack = vec![vec![first]];
    while let Some(c) = stack.pop() {
        let last = *c.last().unwrap();
        for v in (last + 1..space.len()).rev() {
            if space.leq(v, v) && c.iter().all(|&u| space.leq(u, v) && space.leq(v, u)) {
                let mut next = c.clone();
                next.push(v);
                stack.push(next);
            }
        }
        out.push(c);
    }
    out
}

/// Every zero clique, as sorted point lists.
pub fn zero_cliques(space: &FiniteSpace) -> Vec<Vec<usize>> {
    space.points().flat_map(|first| cliques_from(space, first)).collect()
}

/// Decides completeness through zero cliques: the cycle of an eventually
/// periodic Cauchy sequence is one, and its limits only depend on the clique.
pub fn is_complete(space: &FiniteSpace, exec: Exec) -> Completeness {
    let per_start = exec.map_range(space.len() as u64, |first| {
        let cliques = cliques_from(space, first as usize);
        let count = cliques.len() as u64;
        let bad = cliques.into_iter().find(|c| {
            let c0 = c[0];
            !space.points().any(|x| space.points().all(|z| space.d(x, z) <= space.d(c0, z) && space.d(z, x) <= space.d(z, c0)))
        });
        (count, bad)
    });
    let zero_cliques = per_start.iter().map(|(n, _)| n).sum();
    let witness = per_start.into_iter().find_map(|(_, bad)| bad).map(|c| EpSeq::new(vec![], c).unwrap());
    Completeness { complete: witness.is_none(), zero_cliques, witness }
}

/// Single-topology flags of a pre-Cauchy sequence and of its Cauchy
/// subsequence agree at every point.
pub fn pre_cauchy_subnet_equiv(space: &FiniteSpace, seq: &EpSeq) -> Result<bool, TopologyError> {
    let sub = seq.cauchy_subsequence(space).map_err(|_| TopologyError::NotPreCauchy)?;
    let single = [Topology::UpperBall, Topology::LowerBall, Topology::UpperHole, Topology::LowerHole];
    Ok(space.points().all(|x| {
        let (a, b) = (convergence(space, seq, x), convergence(space, &sub, x));
        single.iter().all(|&t| a.holds(t) == b.holds(t))
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extreal::Rational;

    fn projection(values: &[(i64, i64)]) -> FiniteSpace {
        let v: Vec<Rational> = values.iter().map(|&(n, d)| Rational::new(n, d)).collect();
        let labels = v.iter().map(|q| crate::extreal::format_rational(*q)).collect();
        FiniteSpace::from_fn(labels, |_, j| ExtReal::new(v[j]).unwrap())
    }

    fn two_point() -> FiniteSpace {
        let z = ExtReal::ZERO;
        FiniteSpace::new(vec!["a".into(), "b".into()], vec![vec![z, z], vec![ExtReal::ONE, z]]).unwrap()
    }

    #[test]
    fn constant_sequence_converges_to_itself() {
        let s = two_point();
        let r = convergence(&s, &EpSeq::constant(0), 0);
        assert!(Topology::ALL.iter().all(|&t| r.holds(t)));
    }

    #[test]
    fn projection_lower_hole_fails_with_witness_zero() {
        let s = projection(&[(0, 1), (1, 2)]);
        let r = convergence(&s, &EpSeq::constant(0), 1);
        let w = r.lower_hole.unwrap();
        assert_eq!(w.center, 0);
        assert_eq!((w.tail, w.distance), (ExtReal::ZERO, ExtReal::ratio(1, 2)));
        // the other side holds: x_n ⇀ 1/2 in the upper hole and lower ball topologies
        assert!(r.holds(Topology::UpperHole) && r.holds(Topology::LowerBall));
        assert!(!s.leq(1, 1));
    }

    #[test]
    fn cauchy_cycle_points_are_double_hole_limits() {
        let z = ExtReal::ZERO;
        let s = FiniteSpace::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![vec![z, z, ExtReal::ONE], vec![z, z, ExtReal::ONE], vec![ExtReal::ONE, ExtReal::ONE, z]],
        )
        .unwrap();
        let seq = EpSeq::new(vec![2], vec![0, 1]).unwrap();
        let lim = limit_set(&s, &seq, Topology::DoubleHole);
        assert!(lim.contains(&0) && lim.contains(&1));
    }

    #[test]
    fn non_reflexive_limit_set_by_direct_evaluation() {
        let s = projection(&[(0, 1), (1, 2), (1, 1)]);
        let seq = EpSeq::constant(1);
        let lim = limit_set(&s, &seq, Topology::DoubleHole);
        let direct: Vec<usize> =
            s.points().filter(|&x| s.points().all(|c| s.d(c, x) <= s.d(c, 1) && s.d(x, c) <= s.d(1, c))).collect();
        assert_eq!(lim, direct);
        assert_eq!(lim, vec![0, 1]);
    }

    #[test]
    fn metric_constant_limit() {
        let s = FiniteSpace::new(
            vec!["a".into(), "b".into()],
            vec![vec![ExtReal::ZERO, ExtReal::ONE], vec![ExtReal::ONE, ExtReal::ZERO]],
        )
        .unwrap();
        assert_eq!(limit_set(&s, &EpSeq::constant(0), Topology::DoubleHole), vec![0]);
    }

    #[test]
    fn hole_characterizations_on_two_point_cycle() {
        let s = two_point();
        let seq = EpSeq::new(vec![], vec![0, 1]).unwrap();
        assert!(check_hole_characterizations(&s, &seq).unwrap().violations.is_empty());
        let p = projection(&[(0, 1), (1, 2)]);
        assert_eq!(check_hole_characterizations(&p, &EpSeq::constant(1)), Err(TopologyError::NotReflexive));
    }

    #[test]
    fn finite_spaces_are_complete() {
        let s = two_point();
        for e in Exec::available() {
            let c = is_complete(&s, e);
            assert!(c.complete);
            assert_eq!(c.zero_cliques, 2);
        }
    }
}
