//! Supremums, directedness and e-d-completeness over finite spaces.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::exec::Exec;
use crate::extreal::ExtReal;
use crate::nets::EpSeq;
use crate::space::{FiniteSpace, SpaceError};
use crate::topology::{convergence, Topology};

/// Spaces up to this size have every subset enumerated.
pub const DEFAULT_SUBSET_CAP: usize = 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OrderError {
    #[error("subset is empty")]
    EmptySubset,
    #[error("subset is not directed")]
    NotDirected,
    #[error("point {0} is not in the space")]
    BadPoint(usize),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    /// `inf_y max(d(a, y), d(b, y)) = 0` for every pair.
    D,
    /// every pair has an upper bound in the subset.
    Leq,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SupremumResult {
    pub d_sups: Vec<usize>,
    pub leq_sups: Vec<usize>,
    /// Classes of `leq_sups` under `x ≤ y ≤ x`.
    pub classes: Vec<Vec<usize>>,
}

fn check_points(space: &FiniteSpace, ys: &[usize]) -> Result<(), OrderError> {
    if ys.is_empty() {
        return Err(OrderError::EmptySubset);
    }
    match ys.iter().find(|&&y| y >= space.len()) {
        Some(&bad) => Err(OrderError::BadPoint(bad)),
        None => Ok(()),
    }
}

/// `Yd(z) = max_{y ∈ Y} d(y, z)` for every `z`.
pub fn sup_row(space: &FiniteSpace, ys: &[usize]) -> Vec<ExtReal> {
    space.points().map(|z| ys.iter().map(|&y| space.d(y, z)).max().unwrap_or(ExtReal::ZERO)).collect()
}

/// `dY(z) = min_{y ∈ Y} d(z, y)`.
pub fn inf_col(space: &FiniteSpace, ys: &[usize]) -> Vec<ExtReal> {
    space.points().map(|z| ys.iter().map(|&y| space.d(z, y)).min().unwrap_or(ExtReal::INFINITY)).collect()
}

pub fn upper_bounds(space: &FiniteSpace, ys: &[usize]) -> Vec<usize> {
    space.points().filter(|&x| ys.iter().all(|&y| space.leq(y, x))).collect()
}

pub fn suprema(space: &FiniteSpace, ys: &[usize]) -> Result<SupremumResult, OrderError> {
    check_points(space, ys)?;
    let row = sup_row(space, ys);
    let ubs = upper_bounds(space, ys);
    let d_sups = ubs.iter().copied().filter(|&x| space.points().all(|z| space.d(x, z) == row[z])).collect();
    let leq_sups: Vec<usize> = ubs.iter().copied().filter(|&x| ubs.iter().all(|&u| space.leq(x, u))).collect();
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for &x in &leq_sups {
        match classes.iter_mut().find(|c| space.leq(x, c[0]) && space.leq(c[0], x)) {
            Some(c) => c.push(x),
            None => classes.push(vec![x]),
        }
    }
    Ok(SupremumResult { d_sups, leq_sups, classes })
}

/// Pairwise directedness test; the empty set is not directed.
pub fn is_directed(space: &FiniteSpace, ys: &[usize], sense: Sense) -> bool {
    if ys.is_empty() {
        return false;
    }
    let bounded = |a: usize, b: usize| match sense {
        Sense::D => ys.iter().map(|&y| space.d(a, y).max(space.d(b, y))).min().unwrap().is_zero(),
        Sense::Leq => ys.iter().any(|&y| space.leq(a, y) && space.leq(b, y)),
    };
    ys.iter().all(|&a| ys.iter().all(|&b| bounded(a, b)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum EnumerationMode {
    Exhaustive,
    Sampled { samples: usize, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EdCompleteness {
    pub complete: bool,
    pub mode: EnumerationMode,
    pub subsets_checked: u64,
    pub directed_subsets: u64,
    pub failing_subset: Option<Vec<usize>>,
}

#[derive(Clone, Copy, Debug)]
pub struct SubsetSearch {
    pub cap: usize,
    pub samples: usize,
    pub seed: u64,
}

impl Default for SubsetSearch {
    fn default() -> Self {
        SubsetSearch { cap: DEFAULT_SUBSET_CAP, samples: 4096, seed: 0 }
    }
}

fn mask_members(mask: u64, n: usize) -> Vec<usize> {
    (0..n).filter(|&i| mask >> i & 1 == 1).collect()
}

/// Nonempty subsets to examine: all of them up to the cap, a seeded random
/// sample above it.
pub fn subsets(n: usize, search: SubsetSearch) -> (EnumerationMode, Vec<Vec<usize>>) {
    if n <= search.cap {
        (EnumerationMode::Exhaustive, (1..1u64 << n).map(|m| mask_members(m, n)).collect())
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(search.seed);
        let out = (0..search.samples)
            .map(|_| {
                let k = rng.gen_range(1..=n.min(6));
                let mut v = sample(&mut rng, n, k).into_vec();
                v.sort_unstable();
                v
            })
            .collect();
        (EnumerationMode::Sampled { samples: search.samples, seed: search.seed }, out)
    }
}

/// Every `e`-directed subset has a `d`-supremum.
pub fn check_ed_complete(
    e: &FiniteSpace,
    d: &FiniteSpace,
    search: SubsetSearch,
    exec: Exec,
) -> Result<EdCompleteness, OrderError> {
    if e.labels() != d.labels() {
        return Err(SpaceError::PointSetMismatch.into());
    }
    let (mode, all) = subsets(d.len(), search);
    let verdicts = exec.map(&all, |ys| {
        if !is_directed(e, ys, Sense::D) {
            return (false, true);
        }
        (true, !suprema(d, ys).unwrap().d_sups.is_empty())
    });
    let directed_subsets = verdicts.iter().filter(|v| v.0).count() as u64;
    let failing_subset = verdicts.iter().position(|v| !v.1).map(|i| all[i].clone());
    Ok(EdCompleteness {
        complete: failing_subset.is_none(),
        mode,
        subsets_checked: all.len() as u64,
        directed_subsets,
        failing_subset,
    })
}

/// Members `t` of `Y` with `Y ≤ t`.
pub fn tops(space: &FiniteSpace, ys: &[usize]) -> Vec<usize> {
    ys.iter().copied().filter(|&t| ys.iter().all(|&y| space.leq(y, t))).collect()
}

/// A sequence with `Y ≤ (x_n) ⊆ Y`: preperiod `Y \ T`, cycle `T`, where `T`
/// are the members of `Y` above all of `Y`.
pub fn enumerating_sequence(space: &FiniteSpace, ys: &[usize]) -> Result<EpSeq, OrderError> {
    check_points(space, ys)?;
    if !is_directed(space, ys, Sense::D) {
        return Err(OrderError::NotDirected);
    }
    let t = tops(space, ys);
    if t.is_empty() {
        return Err(OrderError::NotDirected);
    }
    let pre = ys.iter().copied().filter(|y| !t.contains(y)).collect();
    Ok(EpSeq::new(pre, t).expect("nonempty cycle"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkEquation {
    /// lower hole ⇔ `Y ≤ x`
    LowerHoleUpperBound,
    /// upper hole ⇔ `xd ≤ Yd`
    UpperHoleRow,
    /// double hole ⇔ `x` is a d-supremum
    DoubleHoleSupremum,
    /// `Y ≤ (x_n) ⇔ d(x_n) ≤ dY`
    DirectedColumn,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LinkReport {
    pub y_leq_seq: bool,
    pub seq_within_y: bool,
    /// Whether the three hole equivalences applied (`Y ≤ (x_n) ⊆ Y`).
    pub hole_checks_applied: bool,
    /// Whether the column equivalence applied (`Y` directed, `(x_n)` pre-Cauchy).
    pub column_check_applied: bool,
    pub violations: Vec<(usize, LinkEquation)>,
}

/// Checks the hole-limit descriptions of d-supremums for a sequence
/// enumerating `Y`, and the column criterion for `Y ≤ (x_n)`.
pub fn link_directed_sequence(space: &FiniteSpace, ys: &[usize], seq: &EpSeq) -> Result<LinkReport, OrderError> {
    check_points(space, ys)?;
    if let Some(&bad) = seq.pre().iter().chain(seq.cycle()).find(|&&p| p >= space.len()) {
        return Err(OrderError::BadPoint(bad));
    }
    let y_leq_seq = ys.iter().all(|&y| seq.limsup_from(space, y).is_zero());
    let seq_within_y = seq.pre().iter().chain(seq.cycle()).all(|p| ys.contains(p));
    let mut violations = Vec::new();

    let hole_checks_applied = y_leq_seq && seq_within_y;
    if hole_checks_applied {
        let row = sup_row(space, ys);
        let sups = suprema(space, ys)?;
        for x in space.points() {
            let r = convergence(space, seq, x);
            if r.holds(Topology::LowerHole) != ys.iter().all(|&y| space.leq(y, x)) {
                violations.push((x, LinkEquation::LowerHoleUpperBound));
            }
            if r.holds(Topology::UpperHole) != space.points().all(|z| space.d(x, z) <= row[z]) {
                violations.push((x, LinkEquation::UpperHoleRow));
            }
            if r.holds(Topology::DoubleHole) != sups.d_sups.contains(&x) {
                violations.push((x, LinkEquation::DoubleHoleSupremum));
            }
        }
    }

    let column_check_applied = is_directed(space, ys, Sense::D) && seq.classify(space).pre_cauchy;
    if column_check_applied {
        let col = inf_col(space, ys);
        let seq_col: Vec<ExtReal> = space.points().map(|z| seq.limits_against(space, z).unwrap().backward).collect();
        if y_leq_seq != space.points().all(|z| seq_col[z] <= col[z]) {
            violations.push((ys[0], LinkEquation::DirectedColumn));
        }
    }
    Ok(LinkReport { y_leq_seq, seq_within_y, hole_checks_applied, column_check_applied, violations })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(n: usize) -> FiniteSpace {
        // order distance of 0 < 1 < ... < n-1
        FiniteSpace::from_fn(crate::space::default_labels(n), |i, j| if i <= j { ExtReal::ZERO } else { ExtReal::INFINITY })
    }

    fn discrete(n: usize) -> FiniteSpace {
        FiniteSpace::from_fn(crate::space::default_labels(n), |i, j| if i == j { ExtReal::ZERO } else { ExtReal::ONE })
    }

    #[test]
    fn singleton_is_its_own_supremum() {
        let s = discrete(3);
        let r = suprema(&s, &[1]).unwrap();
        assert_eq!(r.d_sups, vec![1]);
        assert_eq!(r.leq_sups, vec![1]);
        assert!(is_directed(&s, &[1], Sense::D) && is_directed(&s, &[1], Sense::Leq));
        assert_eq!(suprema(&s, &[]), Err(OrderError::EmptySubset));
    }

    #[test]
    fn metric_pairs_are_not_directed() {
        let s = discrete(3);
        assert!(!is_directed(&s, &[0, 1], Sense::D));
        assert!(!is_directed(&s, &[], Sense::D));
        let c = check_ed_complete(&s, &s, SubsetSearch::default(), Exec::default()).unwrap();
        assert!(c.complete);
        assert_eq!(c.directed_subsets, 3);
    }

    #[test]
    fn chain_supremum_is_top() {
        let s = chain(4);
        let r = suprema(&s, &[0, 2]).unwrap();
        assert_eq!(r.d_sups, vec![2]);
        assert_eq!(r.leq_sups, vec![2]);
        let seq = enumerating_sequence(&s, &[0, 1, 2]).unwrap();
        assert_eq!(seq.cycle(), &[2]);
        let link = link_directed_sequence(&s, &[0, 1, 2], &seq).unwrap();
        assert!(link.hole_checks_applied && link.column_check_applied);
        assert!(link.violations.is_empty());
    }

    #[test]
    fn sampled_mode_above_cap() {
        let s = discrete(14);
        let c = check_ed_complete(&s, &s, SubsetSearch { samples: 200, ..Default::default() }, Exec::default()).unwrap();
        assert!(matches!(c.mode, EnumerationMode::Sampled { samples: 200, .. }));
        assert!(c.complete);
    }
}
