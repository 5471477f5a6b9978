//! Finite distance spaces and the constructions built from them.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extreal::{ExtReal, ExtRealError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpaceError {
    #[error("matrix has {rows} rows but {labels} labels")]
    RowCount { rows: usize, labels: usize },
    #[error("row {row} has {len} entries, expected {expected}")]
    RowLength { row: usize, len: usize, expected: usize },
    #[error("duplicate point label {0:?}")]
    DuplicateLabel(String),
    #[error("unknown point {0:?}")]
    UnknownPoint(String),
    #[error("point index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("spaces have different point sets")]
    PointSetMismatch,
    #[error("threshold must lie in (0, inf], got {0}")]
    BadThreshold(ExtReal),
    #[error("bad matrix entry at ({row}, {col}): {source}")]
    Entry { row: usize, col: usize, source: ExtRealError },
}

/// `n` labelled points with an `n × n` matrix of [`ExtReal`] distances.
///
/// No axioms are assumed on construction; [`FiniteSpace::validate`] reports
/// which ones hold.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteSpace {
    labels: Vec<String>,
    n: usize,
    d: Vec<ExtReal>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Triangle { i: usize, j: usize, k: usize },
    SelfDistance { i: usize },
    Asymmetry { i: usize, j: usize },
    Inseparable { i: usize, j: usize },
}

/// At most this many violations are listed; `violation_count` has the total.
pub const MAX_LISTED_VIOLATIONS: usize = 32;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Validation {
    pub is_distance: bool,
    pub is_hemimetric: bool,
    pub is_symmetric: bool,
    /// Symmetric hemimetric that separates points (`d(x,y) = 0 ⇒ x = y`).
    pub is_metric: bool,
    pub violation_count: usize,
    pub violations: Vec<Violation>,
}

#[derive(Clone, Copy, Debug)]
pub enum Derivation<'a> {
    Opposite,
    Join,
    LeqOrder,
    Compose(&'a FiniteSpace),
}

/// A derived space together with its axiom check, since composition in
/// particular does not preserve the triangle law.
#[derive(Clone, Debug)]
pub struct Derived {
    pub space: FiniteSpace,
    pub validation: Validation,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BallsAndHoles {
    pub upper_ball: Vec<usize>,
    pub lower_ball: Vec<usize>,
    pub upper_hole: Vec<usize>,
    pub lower_hole: Vec<usize>,
}

impl FiniteSpace {
    pub fn new(labels: Vec<String>, matrix: Vec<Vec<ExtReal>>) -> Result<Self, SpaceError> {
        let n = labels.len();
        if matrix.len() != n {
            return Err(SpaceError::RowCount { rows: matrix.len(), labels: n });
        }
        let mut seen = BTreeSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(SpaceError::DuplicateLabel(l.clone()));
            }
        }
        let mut d = Vec::with_capacity(n * n);
        for (row, r) in matrix.into_iter().enumerate() {
            if r.len() != n {
                return Err(SpaceError::RowLength { row, len: r.len(), expected: n });
            }
            d.extend(r);
        }
        Ok(FiniteSpace { labels, n, d })
    }

    /// Builds a space from a distance rule over `labels`.
    pub fn from_fn(labels: Vec<String>, f: impl Fn(usize, usize) -> ExtReal) -> Self {
        let n = labels.len();
        let d = (0..n * n).map(|k| f(k / n, k % n)).collect();
        FiniteSpace { labels, n, d }
    }

    /// Square matrix with generated labels `x0, x1, ...`.
    pub fn from_matrix(matrix: Vec<Vec<ExtReal>>) -> Result<Self, SpaceError> {
        Self::new(default_labels(matrix.len()), matrix)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Result<usize, SpaceError> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| SpaceError::UnknownPoint(label.to_string()))
    }

    pub fn points(&self) -> std::ops::Range<usize> {
        0..self.n
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> ExtReal {
        self.d[i * self.n + j]
    }

    /// `x ≤ᵈ y`, i.e. `d(x, y) = 0`.
    #[inline]
    pub fn leq(&self, i: usize, j: usize) -> bool {
        self.d(i, j).is_zero()
    }

    pub fn rows(&self) -> Vec<Vec<ExtReal>> {
        self.d.chunks(self.n.max(1)).take(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn validate(&self) -> Validation {
        let n = self.n;
        let mut violations = Vec::new();
        let mut count = 0usize;
        let mut push = |v: Violation, violations: &mut Vec<Violation>| {
            count += 1;
            if violations.len() < MAX_LISTED_VIOLATIONS {
                violations.push(v);
            }
        };
        let mut is_distance = true;
        for i in 0..n {
            for j in 0..n {
                let dij = self.d(i, j);
                for k in 0..n {
                    if dij > self.d(i, k).add(self.d(k, j)) {
                        is_distance = false;
                        push(Violation::Triangle { i, j, k }, &mut violations);
                    }
                }
            }
        }
        let mut reflexive = true;
        for i in 0..n {
            if !self.leq(i, i) {
                reflexive = false;
                push(Violation::SelfDistance { i }, &mut violations);
            }
        }
        let mut is_symmetric = true;
        let mut separating = true;
        for i in 0..n {
            for j in (i + 1)..n {
                if self.d(i, j) != self.d(j, i) {
                    is_symmetric = false;
                    push(Violation::Asymmetry { i, j }, &mut violations);
                }
                if self.leq(i, j) || self.leq(j, i) {
                    separating = false;
                    push(Violation::Inseparable { i, j }, &mut violations);
                }
            }
        }
        let is_hemimetric = is_distance && reflexive;
        Validation {
            is_distance,
            is_hemimetric,
            is_symmetric,
            is_metric: is_hemimetric && is_symmetric && separating,
            violation_count: count,
            violations,
        }
    }

    pub fn is_distance(&self) -> bool {
        let n = self.n;
        (0..n).all(|i| (0..n).all(|j| (0..n).all(|k| self.d(i, j) <= self.d(i, k).add(self.d(k, j)))))
    }

    pub fn is_hemimetric(&self) -> bool {
        (0..self.n).all(|i| self.leq(i, i)) && self.is_distance()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.d(i, j) == self.d(j, i)))
    }

    pub fn opposite(&self) -> FiniteSpace {
        FiniteSpace::from_fn(self.labels.clone(), |i, j| self.d(j, i))
    }

    /// `d ∨ dᵒᵖ`.
    pub fn join(&self) -> FiniteSpace {
        FiniteSpace::from_fn(self.labels.clone(), |i, j| self.d(i, j).max(self.d(j, i)))
    }

    /// The characteristic distance of `≤ᵈ`: `∞·d`.
    pub fn leq_order(&self) -> FiniteSpace {
        FiniteSpace::from_fn(self.labels.clone(), |i, j| self.d(i, j).scale_inf())
    }

    /// `(self ∘ other)(x, y) = min_z self(x, z) + other(z, y)`.
    pub fn compose(&self, other: &FiniteSpace) -> Result<FiniteSpace, SpaceError> {
        if self.labels != other.labels {
            return Err(SpaceError::PointSetMismatch);
        }
        let n = self.n;
        Ok(FiniteSpace::from_fn(self.labels.clone(), |i, j| {
            (0..n)
                .map(|z| self.d(i, z).add(other.d(z, j)))
                .min()
                .unwrap_or(ExtReal::INFINITY)
        }))
    }

    pub fn derive(&self, which: Derivation<'_>) -> Result<Derived, SpaceError> {
        let space = match which {
            Derivation::Opposite => self.opposite(),
            Derivation::Join => self.join(),
            Derivation::LeqOrder => self.leq_order(),
            Derivation::Compose(other) => self.compose(other)?,
        };
        let validation = space.validate();
        Ok(Derived { space, validation })
    }

    pub fn balls_and_holes(&self, center: usize, epsilon: ExtReal) -> Result<BallsAndHoles, SpaceError> {
        if center >= self.n {
            return Err(SpaceError::IndexOutOfRange(center));
        }
        if epsilon.is_zero() {
            return Err(SpaceError::BadThreshold(epsilon));
        }
        let pick = |pred: &dyn Fn(usize) -> bool| self.points().filter(|&x| pred(x)).collect::<Vec<_>>();
        Ok(BallsAndHoles {
            upper_ball: pick(&|x| self.d(center, x) < epsilon),
            lower_ball: pick(&|x| self.d(x, center) < epsilon),
            upper_hole: pick(&|x| self.d(x, center) > epsilon),
            lower_hole: pick(&|x| self.d(center, x) > epsilon),
        })
    }

    /// Distinct matrix values in ascending order.
    pub fn distinct_values(&self) -> Vec<ExtReal> {
        let set: BTreeSet<ExtReal> = self.d.iter().copied().collect();
        set.into_iter().collect()
    }

    /// Smallest positive finite distance, if any.
    pub fn smallest_positive(&self) -> Option<ExtReal> {
        self.d.iter().copied().filter(|v| v.is_positive() && v.is_finite()).min()
    }

    /// Thresholds generating the filter of entourages: every distinct positive
    /// matrix value, every midpoint between consecutive values (and between 0
    /// and the smallest positive value), and `∞`.
    pub fn threshold_generators(&self) -> Vec<ExtReal> {
        let mut vals: Vec<ExtReal> = self.distinct_values();
        if vals.first() != Some(&ExtReal::ZERO) {
            vals.insert(0, ExtReal::ZERO);
        }
        let mut out = BTreeSet::new();
        for w in vals.windows(2) {
            out.insert(ExtReal::midpoint(w[0], w[1]));
            out.insert(w[1]);
        }
        if let Some(&last) = vals.last() {
            if last.is_finite() {
                out.insert(ExtReal::midpoint(last, ExtReal::INFINITY));
            }
        }
        out.insert(ExtReal::INFINITY);
        out.remove(&ExtReal::ZERO);
        out.into_iter().collect()
    }

    pub fn threshold(&self, epsilon: ExtReal) -> Result<ThresholdRel<'_>, SpaceError> {
        ThresholdRel::new(self, epsilon)
    }

    /// Min-plus closure of this space's matrix.
    pub fn closure(&self) -> FiniteSpace {
        let mut d = self.d.clone();
        minplus_close_in_place(self.n, &mut d);
        FiniteSpace { labels: self.labels.clone(), n: self.n, d }
    }

    /// The sub-space on the given points, in the given order.
    pub fn restrict(&self, points: &[usize]) -> FiniteSpace {
        FiniteSpace::from_fn(points.iter().map(|&p| self.labels[p].clone()).collect(), |i, j| {
            self.d(points[i], points[j])
        })
    }
}

pub fn default_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("x{i}")).collect()
}

fn minplus_close_in_place(n: usize, d: &mut [ExtReal]) {
    loop {
        let mut changed = false;
        for k in 0..n {
            for i in 0..n {
                let dik = d[i * n + k];
                if dik.is_infinite() {
                    continue;
                }
                for j in 0..n {
                    let via = dik.add(d[k * n + j]);
                    if via < d[i * n + j] {
                        d[i * n + j] = via;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
}

/// Replaces every entry by the cheapest walk of length at least one, which
/// makes the triangle law hold. The result is pointwise below the input and
/// closing twice changes nothing.
pub fn minplus_closure(matrix: &[Vec<ExtReal>]) -> Result<FiniteSpace, SpaceError> {
    Ok(FiniteSpace::from_matrix(matrix.to_vec())?.closure())
}

/// The relation `x <ᵈ_ε y ⇔ d(x, y) < ε`.
#[derive(Clone, Copy, Debug)]
pub struct ThresholdRel<'a> {
    space: &'a FiniteSpace,
    epsilon: ExtReal,
}

impl<'a> ThresholdRel<'a> {
    pub fn new(space: &'a FiniteSpace, epsilon: ExtReal) -> Result<Self, SpaceError> {
        if epsilon.is_zero() {
            return Err(SpaceError::BadThreshold(epsilon));
        }
        Ok(ThresholdRel { space, epsilon })
    }

    pub fn epsilon(&self) -> ExtReal {
        self.epsilon
    }

    pub fn space(&self) -> &'a FiniteSpace {
        self.space
    }

    #[inline]
    pub fn relates(&self, x: usize, y: usize) -> bool {
        self.space.d(x, y) < self.epsilon
    }

    pub fn is_contained_in(&self, other: &ThresholdRel<'_>) -> bool {
        let s = self.space;
        s.points().all(|x| s.points().all(|y| !self.relates(x, y) || other.relates(x, y)))
    }
}

/// On-disk space description: labels plus a matrix of `"p/q"` / `"inf"` strings.
///
/// The optional fields list objects to analyse alongside the space.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SpaceFile {
    pub points: Vec<String>,
    pub matrix: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sequences: Vec<SequenceLiteral>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub subsets: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub formal_balls: Vec<crate::formal_balls::FormalBallLiteral>,
}

/// `{"pre": ["a"], "cycle": ["b", "c"]}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct SequenceLiteral {
    #[serde(default)]
    pub pre: Vec<String>,
    pub cycle: Vec<String>,
}

impl SpaceFile {
    pub fn to_space(&self) -> Result<FiniteSpace, SpaceError> {
        let matrix = self
            .matrix
            .iter()
            .enumerate()
            .map(|(row, r)| {
                r.iter()
                    .enumerate()
                    .map(|(col, s)| s.parse::<ExtReal>().map_err(|source| SpaceError::Entry { row, col, source }))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        FiniteSpace::new(self.points.clone(), matrix)
    }

    pub fn from_space(space: &FiniteSpace) -> Self {
        SpaceFile {
            points: space.labels().to_vec(),
            matrix: space.rows().iter().map(|r| r.iter().map(|v| v.to_string()).collect()).collect(),
            sequences: Vec::new(),
            subsets: Vec::new(),
            formal_balls: Vec::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> ExtReal {
        ExtReal::ratio(n, d)
    }
    const INF: ExtReal = ExtReal::INFINITY;

    fn grid3() -> Vec<String> {
        vec!["0".into(), "1/2".into(), "1".into()]
    }
    fn grid3_values() -> [crate::extreal::Rational; 3] {
        use crate::extreal::Rational;
        [Rational::from_integer(0), Rational::new(1, 2), Rational::from_integer(1)]
    }

    fn projection3() -> FiniteSpace {
        let v = grid3_values();
        FiniteSpace::from_fn(grid3(), |_, j| ExtReal::new(v[j]).unwrap())
    }

    #[test]
    fn discrete_two_point_is_metric() {
        let s = FiniteSpace::from_matrix(vec![vec![q(0, 1), q(1, 1)], vec![q(1, 1), q(0, 1)]]).unwrap();
        let v = s.validate();
        assert!(v.is_distance && v.is_hemimetric && v.is_symmetric && v.is_metric);
        assert!(v.violations.is_empty());
    }

    #[test]
    fn projection_is_distance_not_hemimetric() {
        let v = projection3().validate();
        assert!(v.is_distance);
        assert!(!v.is_hemimetric);
        assert!(v.violations.contains(&Violation::SelfDistance { i: 1 }));
    }

    #[test]
    fn x_one_minus_y_is_distance_not_hemimetric() {
        let v = grid3_values();
        let one = crate::extreal::Rational::from_integer(1);
        let s = FiniteSpace::from_fn(grid3(), |i, j| ExtReal::new(v[i] * (one - v[j])).unwrap());
        let val = s.validate();
        assert!(val.is_distance);
        assert!(!val.is_hemimetric);
        assert_eq!(s.d(1, 1), q(1, 4));
    }

    #[test]
    fn malformed_matrix_is_structural_error() {
        let err = FiniteSpace::new(vec!["a".into(), "b".into()], vec![vec![q(0, 1)]]).unwrap_err();
        assert!(matches!(err, SpaceError::RowCount { .. }));
        let err = FiniteSpace::new(vec!["a".into()], vec![vec![q(0, 1), q(0, 1)]]).unwrap_err();
        assert!(matches!(err, SpaceError::RowLength { .. }));
    }

    #[test]
    fn opposite_and_join() {
        let s = FiniteSpace::from_matrix(vec![vec![q(0, 1), q(1, 1)], vec![INF, q(0, 1)]]).unwrap();
        assert_eq!(s.opposite().rows(), vec![vec![q(0, 1), INF], vec![q(1, 1), q(0, 1)]]);
        assert_eq!(s.join().rows(), vec![vec![q(0, 1), INF], vec![INF, q(0, 1)]]);
        assert_eq!(s.opposite().opposite(), s);
        assert_eq!(s.join(), s.join().opposite());
    }

    #[test]
    fn projection_composed_with_itself_is_itself() {
        let p = projection3();
        let c = p.derive(Derivation::Compose(&p)).unwrap();
        assert_eq!(c.space, p);
        assert!(c.validation.is_distance);
    }

    #[test]
    fn compose_rejects_mismatched_points() {
        let a = FiniteSpace::from_matrix(vec![vec![q(0, 1)]]).unwrap();
        let b = FiniteSpace::new(vec!["z".into()], vec![vec![q(0, 1)]]).unwrap();
        assert_eq!(a.compose(&b).unwrap_err(), SpaceError::PointSetMismatch);
    }

    #[test]
    fn leq_order_is_characteristic() {
        let p = projection3();
        let o = p.leq_order();
        assert_eq!(o.d(2, 0), ExtReal::ZERO);
        assert_eq!(o.d(0, 1), INF);
    }

    #[test]
    fn balls_in_projection_space() {
        let p = projection3();
        let b = p.balls_and_holes(0, q(3, 4)).unwrap();
        assert_eq!(b.upper_ball, vec![0, 1]);
        let b = p.balls_and_holes(0, INF).unwrap();
        assert!(b.upper_hole.is_empty());
        assert!(p.balls_and_holes(7, q(1, 1)).is_err());
        assert!(p.balls_and_holes(0, ExtReal::ZERO).is_err());
    }

    #[test]
    fn balls_in_discrete_metric() {
        let s = FiniteSpace::new(vec!["a".into(), "b".into()], vec![vec![q(0, 1), q(1, 1)], vec![q(1, 1), q(0, 1)]])
            .unwrap();
        assert_eq!(s.balls_and_holes(0, q(1, 2)).unwrap().upper_ball, vec![0]);
    }

    #[test]
    fn closure_shortens_through_a_third_point() {
        let m = vec![
            vec![q(0, 1), q(5, 1), q(1, 1)],
            vec![q(1, 1), q(0, 1), INF],
            vec![INF, q(1, 1), q(0, 1)],
        ];
        let s = minplus_closure(&m).unwrap();
        assert_eq!(s.d(0, 1), q(2, 1));
        assert!(s.validate().is_distance);
    }

    #[test]
    fn closure_fixpoints() {
        let tri = vec![vec![q(0, 1), q(1, 1)], vec![q(1, 1), q(0, 1)]];
        assert_eq!(minplus_closure(&tri).unwrap().rows(), tri);
        let inf = vec![vec![q(0, 1), INF], vec![INF, q(0, 1)]];
        assert_eq!(minplus_closure(&inf).unwrap().rows(), inf);
    }

    #[test]
    fn thresholds_are_monotone() {
        let p = projection3();
        let gens = p.threshold_generators();
        assert_eq!(gens.first(), Some(&q(1, 4)));
        assert_eq!(gens.last(), Some(&INF));
        for w in gens.windows(2) {
            let a = p.threshold(w[0]).unwrap();
            let b = p.threshold(w[1]).unwrap();
            assert!(a.is_contained_in(&b));
        }
    }

    #[test]
    fn space_file_round_trip() {
        let json = r#"{"points": ["a","b"], "matrix": [["0","1"],["1","0"]]}"#;
        let f: SpaceFile = serde_json::from_str(json).unwrap();
        let s = f.to_space().unwrap();
        assert_eq!(s.d(0, 1), q(1, 1));
        assert_eq!(SpaceFile::from_space(&s).to_space().unwrap(), s);
        let bad: SpaceFile = serde_json::from_str(r#"{"points": ["a"], "matrix": [["-1"]]}"#).unwrap();
        assert!(matches!(bad.to_space(), Err(SpaceError::Entry { .. })));
    }
}
