//! Eventually periodic sequences over a finite space.
//!
//! Every tail quantity of an eventually periodic sequence is a finite
//! min or max over its cycle, so the three net classes, the lifted net
//! distance and the limits against a fixed point are all exact.

use serde::Serialize;
use thiserror::Error;

use crate::extreal::ExtReal;
use crate::space::{FiniteSpace, SequenceLiteral, SpaceError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetError {
    #[error("sequence cycle is empty")]
    EmptyCycle,
    #[error("point id {0} is not in the space")]
    BadPoint(usize),
    #[error("sequence is not pre-Cauchy")]
    NotPreCauchy,
    #[error("d(x_n, {point}) does not converge: cycle values differ")]
    DoesNotConverge { point: usize },
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// `pre ++ cycle ++ cycle ++ ...`, kept in canonical form: the cycle is
/// primitive and no shorter preperiod describes the same sequence.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct EpSeq {
    pre: Vec<usize>,
    cycle: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct NetClass {
    pub reflexive: bool,
    pub pre_cauchy: bool,
    pub cauchy: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SeqLimits {
    /// `lim d(x_n, y)`, written `(x_n)d(y)`.
    pub forward: ExtReal,
    /// `lim d(y, x_n)`, written `d(x_n)(y)`.
    pub backward: ExtReal,
}

impl EpSeq {
    pub fn new(pre: Vec<usize>, cycle: Vec<usize>) -> Result<Self, NetError> {
        if cycle.is_empty() {
            return Err(NetError::EmptyCycle);
        }
        let mut s = EpSeq { pre, cycle };
        s.canonicalize();
        Ok(s)
    }

    /// Like [`EpSeq::new`], additionally checking every id against `space`.
    pub fn in_space(space: &FiniteSpace, pre: Vec<usize>, cycle: Vec<usize>) -> Result<Self, NetError> {
        if let Some(&bad) = pre.iter().chain(&cycle).find(|&&p| p >= space.len()) {
            return Err(NetError::BadPoint(bad));
        }
        Self::new(pre, cycle)
    }

    pub fn constant(point: usize) -> Self {
        EpSeq { pre: Vec::new(), cycle: vec![point] }
    }

    pub fn from_literal(space: &FiniteSpace, lit: &SequenceLiteral) -> Result<Self, NetError> {
        let ids = |v: &[String]| v.iter().map(|l| space.index_of(l)).collect::<Result<Vec<_>, _>>();
        Self::in_space(space, ids(&lit.pre)?, ids(&lit.cycle)?)
    }

    pub fn to_literal(&self, space: &FiniteSpace) -> SequenceLiteral {
        SequenceLiteral {
            pre: self.pre.iter().map(|&p| space.label(p).to_string()).collect(),
            cycle: self.cycle.iter().map(|&p| space.label(p).to_string()).collect(),
        }
    }

    fn canonicalize(&mut self) {
        let p = self.cycle.len();
        if let Some(period) = (1..p).find(|&k| p.is_multiple_of(k) && (0..p).all(|i| self.cycle[i] == self.cycle[i % k])) {
            self.cycle.truncate(period);
        }
        while let Some(&last) = self.pre.last() {
            if last == *self.cycle.last().unwrap() {
                self.pre.pop();
                self.cycle.rotate_right(1);
            } else {
                break;
            }
        }
    }

    pub fn pre(&self) -> &[usize] {
        &self.pre
    }

    pub fn cycle(&self) -> &[usize] {
        &self.cycle
    }

    /// The `n`-th term, 0-based.
    pub fn term(&self, n: usize) -> usize {
        if n < self.pre.len() {
            self.pre[n]
        } else {
            self.cycle[(n - self.pre.len()) % self.cycle.len()]
        }
    }

    pub fn is_constant(&self) -> bool {
        self.cycle.len() == 1
    }

    pub fn check_in(&self, space: &FiniteSpace) -> Result<(), NetError> {
        match self.pre.iter().chain(&self.cycle).find(|&&p| p >= space.len()) {
            Some(&bad) => Err(NetError::BadPoint(bad)),
            None => Ok(()),
        }
    }

    /// Exact tail classification.
    pub fn classify(&self, space: &FiniteSpace) -> NetClass {
        let c = &self.cycle;
        let row_min = |i: usize| c.iter().map(|&j| space.d(i, j)).min().unwrap();
        let row_max = |i: usize| c.iter().map(|&j| space.d(i, j)).max().unwrap();
        let reflexive = c.iter().all(|&i| row_min(i).is_zero());
        let pre_cauchy = c.iter().all(|&i| row_max(i).is_zero());
        // Every ordered pair of cycle positions, including a position with
        // itself one period later, occurs as (x_m, x_n) with m < n in the tail.
        let cauchy = c.iter().all(|&i| c.iter().all(|&j| space.leq(i, j)));
        NetClass { reflexive, pre_cauchy, cauchy }
    }

    /// Pre-Cauchy and Cauchy coincide for eventually periodic sequences, so
    /// the sequence itself is returned.
    pub fn cauchy_subsequence(&self, space: &FiniteSpace) -> Result<EpSeq, NetError> {
        if self.classify(space).pre_cauchy {
            Ok(self.clone())
        } else {
            Err(NetError::NotPreCauchy)
        }
    }

    /// `lim d(x_n, y)` and `lim d(y, x_n)`, when the cycle makes them constant.
    pub fn limits_against(&self, space: &FiniteSpace, y: usize) -> Result<SeqLimits, NetError> {
        let constant = |vals: Vec<ExtReal>| -> Option<ExtReal> {
            let first = vals[0];
            vals.iter().all(|&v| v == first).then_some(first)
        };
        let forward = constant(self.cycle.iter().map(|&c| space.d(c, y)).collect());
        let backward = constant(self.cycle.iter().map(|&c| space.d(y, c)).collect());
        match (forward, backward) {
            (Some(forward), Some(backward)) => Ok(SeqLimits { forward, backward }),
            _ => Err(NetError::DoesNotConverge { point: y }),
        }
    }

    /// `limsup_n d(y, x_n)` and friends against every center, in cycle form.
    pub fn limsup_from(&self, space: &FiniteSpace, c: usize) -> ExtReal {
        self.cycle.iter().map(|&x| space.d(c, x)).max().unwrap()
    }

    pub fn liminf_from(&self, space: &FiniteSpace, c: usize) -> ExtReal {
        self.cycle.iter().map(|&x| space.d(c, x)).min().unwrap()
    }

    pub fn limsup_to(&self, space: &FiniteSpace, c: usize) -> ExtReal {
        self.cycle.iter().map(|&x| space.d(x, c)).max().unwrap()
    }

    pub fn liminf_to(&self, space: &FiniteSpace, c: usize) -> ExtReal {
        self.cycle.iter().map(|&x| space.d(x, c)).min().unwrap()
    }

    /// All canonical sequences with preperiod length `<= max_pre` and cycle
    /// length in `1..=max_cycle` over `n` points. Non-canonical spellings of
    /// the same sequence are skipped.
    pub fn enumerate(n: usize, max_pre: usize, max_cycle: usize) -> Vec<EpSeq> {
        let mut out = Vec::new();
        for pl in 0..=max_pre {
            for cl in 1..=max_cycle {
                let total = pl + cl;
                let count = n.checked_pow(total as u32).unwrap_or(0);
                for code in 0..count {
                    let mut digits = Vec::with_capacity(total);
                    let mut c = code;
                    for _ in 0..total {
                        digits.push(c % n);
                        c /= n;
                    }
                    let cycle = digits.split_off(pl);
                    let s = EpSeq::new(digits.clone(), cycle.clone()).unwrap();
                    if s.pre == digits && s.cycle == cycle {
                        out.push(s);
                    }
                }
            }
        }
        out
    }
}

/// `limsup_λ liminf_γ d(s_λ, t_γ)`: max over `s`'s cycle of the min over `t`'s cycle.
pub fn net_distance(space: &FiniteSpace, s: &EpSeq, t: &EpSeq) -> ExtReal {
    s.cycle()
        .iter()
        .map(|&a| t.cycle().iter().map(|&b| space.d(a, b)).min().unwrap())
        .max()
        .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extreal::Rational;

    fn q(n: i64, d: i64) -> ExtReal {
        ExtReal::ratio(n, d)
    }

    fn projection() -> FiniteSpace {
        let v = [Rational::from_integer(0), Rational::new(1, 2), Rational::from_integer(1)];
        FiniteSpace::from_fn(vec!["0".into(), "1/2".into(), "1".into()], |_, j| ExtReal::new(v[j]).unwrap())
    }

    /// d(a,a)=d(b,b)=d(a,b)=0, d(b,a)=1.
    fn two_point() -> FiniteSpace {
        FiniteSpace::new(vec!["a".into(), "b".into()], vec![vec![q(0, 1), q(0, 1)], vec![q(1, 1), q(0, 1)]]).unwrap()
    }

    #[test]
    fn canonical_form() {
        let s = EpSeq::new(vec![0, 1, 2], vec![1, 2]).unwrap();
        assert_eq!(s.pre(), &[0]);
        assert_eq!(s.cycle(), &[1, 2]);
        let s = EpSeq::new(vec![], vec![3, 4, 3, 4]).unwrap();
        assert_eq!(s.cycle(), &[3, 4]);
        let s = EpSeq::new(vec![5, 5], vec![5]).unwrap();
        assert_eq!(s, EpSeq::constant(5));
        assert_eq!(EpSeq::new(vec![], vec![]).unwrap_err(), NetError::EmptyCycle);
        for n in 0..12 {
            let raw = EpSeq { pre: vec![0, 1, 2], cycle: vec![1, 2] };
            assert_eq!(raw.term(n), s_term(n));
        }
        fn s_term(n: usize) -> usize {
            EpSeq::new(vec![0, 1, 2], vec![1, 2]).unwrap().term(n)
        }
    }

    #[test]
    fn classify_examples() {
        let m = FiniteSpace::new(vec!["a".into()], vec![vec![q(0, 1)]]).unwrap();
        let c = EpSeq::constant(0).classify(&m);
        assert!(c.reflexive && c.pre_cauchy && c.cauchy);

        let c = EpSeq::constant(1).classify(&projection());
        assert!(!c.reflexive);

        let c = EpSeq::new(vec![], vec![0, 1]).unwrap().classify(&two_point());
        assert!(c.reflexive && !c.pre_cauchy && !c.cauchy);
    }

    #[test]
    fn net_distance_examples() {
        let s = two_point();
        let ab = EpSeq::new(vec![], vec![0, 1]).unwrap();
        assert_eq!(net_distance(&s, &ab, &EpSeq::constant(0)), q(1, 1));
        assert_eq!(net_distance(&s, &EpSeq::constant(1), &EpSeq::constant(0)), s.d(1, 0));
        // reflexive <=> zero self-distance
        assert!(ab.classify(&s).reflexive);
        assert_eq!(net_distance(&s, &ab, &ab), ExtReal::ZERO);
        let p = projection();
        assert_eq!(net_distance(&p, &EpSeq::constant(1), &EpSeq::constant(1)), q(1, 2));
    }

    #[test]
    fn limits_against_constants_and_cycles() {
        let s = two_point();
        let l = EpSeq::constant(1).limits_against(&s, 0).unwrap();
        assert_eq!((l.forward, l.backward), (q(1, 1), q(0, 1)));
        let err = EpSeq::new(vec![], vec![0, 1]).unwrap().limits_against(&s, 0).unwrap_err();
        assert_eq!(err, NetError::DoesNotConverge { point: 0 });
    }

    #[test]
    fn subsequence_requires_pre_cauchy() {
        let s = two_point();
        let c = EpSeq::constant(0);
        assert_eq!(c.cauchy_subsequence(&s).unwrap(), c);
        let ab = EpSeq::new(vec![], vec![0, 1]).unwrap();
        assert_eq!(ab.cauchy_subsequence(&s).unwrap_err(), NetError::NotPreCauchy);
    }

    #[test]
    fn enumeration_is_canonical_and_distinct() {
        let all = EpSeq::enumerate(3, 2, 3);
        let set: std::collections::HashSet<_> = all.iter().cloned().collect();
        assert_eq!(set.len(), all.len());
        assert!(all.iter().all(|s| EpSeq::new(s.pre.clone(), s.cycle.clone()).unwrap() == *s));
        // primitive cycles over 3 letters: 3 + 6 + 24 = 33, times preperiods
        // whose last letter differs from the cycle's last.
        assert_eq!(all.iter().filter(|s| s.pre.is_empty()).count(), 33);
    }
}
