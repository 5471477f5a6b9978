//! Countable spaces given by a closed-form rule, analysed at a cutoff.
//!
//! A [`FamilySpace`] materializes its in-range points into a
//! [`FiniteSpace`]. Claims about infinite tails go through certificates:
//! a closed form from a small catalog ([`TailForm`], [`PairClaim`]) fitted
//! to the data and then checked at every in-range index. A claim that no
//! certificate backs is reported as undecidable, never guessed.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extreal::{format_rational, parse_rational, ExtReal, ExtRealError, Rational};
use crate::space::FiniteSpace;

/// Fewest verified positions a tail certificate may rest on.
pub const MIN_TAIL: usize = 8;

#[derive(Debug, Error)]
pub enum FamilyError {
    #[error("unknown family rule {0:?}")]
    UnknownRule(String),
    #[error("unknown carrier {0:?}")]
    UnknownCarrier(String),
    #[error("cutoff {0} is too small (need at least 4)")]
    CutoffTooSmall(usize),
    #[error("rule {0} does not accept extra points")]
    ExtrasNotAllowed(&'static str),
    #[error("duplicate point label {0:?}")]
    DuplicateLabel(String),
    #[error("unknown point {0:?}")]
    UnknownPoint(String),
    #[error("sequence has fewer than {MIN_TAIL} in-range positions")]
    ShortSequence,
    #[error("sequence is not certified pre-Cauchy")]
    NotPreCauchy,
    #[error("no certified tail for {0}")]
    Undecidable(String),
    #[error(transparent)]
    Value(#[from] ExtRealError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScalarCarrier {
    /// `n` for `n` in `1..=cutoff`.
    Naturals,
    /// `1 - 1/(n+1)` for `n` in `0..=cutoff`.
    ReciprocalChain,
    /// `n / cutoff` for `n` in `0..=cutoff`.
    Grid,
}

impl ScalarCarrier {
    fn indices(self, cutoff: usize) -> std::ops::RangeInclusive<usize> {
        match self {
            ScalarCarrier::Naturals => 1..=cutoff,
            ScalarCarrier::ReciprocalChain | ScalarCarrier::Grid => 0..=cutoff,
        }
    }

    fn coordinate(self, n: usize, cutoff: usize) -> Rational {
        let n = n as i64;
        match self {
            ScalarCarrier::Naturals => Rational::from_integer(n),
            ScalarCarrier::ReciprocalChain => Rational::new(n, n + 1),
            ScalarCarrier::Grid => Rational::new(n, cutoff as i64),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum FamilyRule {
    /// `d(y, z) = z`.
    CoordinateProjection { carrier: ScalarCarrier },
    /// `d(r, s) = (r - s)₊`.
    TruncatedDifference { carrier: ScalarCarrier },
    /// `0` if `r <= s`, else `∞`.
    OrderCharacteristic { carrier: ScalarCarrier },
    /// Points `f_m`, `m = 1..=coordinates`, with `f_m(n)` equal to `∞` for
    /// `n < m`, `0` at `n = m` and `1/n` after; `d(f, g) = sup_n (f(n) - g(n))₊`
    /// over `n <= coordinates`.
    SupTruncatedDifference { coordinates: usize },
}

impl FamilyRule {
    pub fn name(&self) -> &'static str {
        match self {
            FamilyRule::CoordinateProjection { .. } => "coordinate-projection",
            FamilyRule::TruncatedDifference { .. } => "truncated-difference",
            FamilyRule::OrderCharacteristic { .. } => "order-characteristic",
            FamilyRule::SupTruncatedDifference { .. } => "sup-truncated-difference",
        }
    }

    fn carrier(&self) -> Option<ScalarCarrier> {
        match *self {
            FamilyRule::CoordinateProjection { carrier }
            | FamilyRule::TruncatedDifference { carrier }
            | FamilyRule::OrderCharacteristic { carrier } => Some(carrier),
            FamilyRule::SupTruncatedDifference { .. } => None,
        }
    }
}

/// Coordinate count used for the `f_m` family at a given cutoff.
pub fn default_coordinates(cutoff: usize) -> usize {
    (cutoff + 1).next_power_of_two()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyPoint {
    Indexed(usize),
    Extra(usize),
}

/// On-disk form: `{"rule": "...", "cutoff": N, "params": {...}}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FamilyFile {
    pub rule: String,
    pub cutoff: usize,
    #[serde(default)]
    pub params: FamilyParams,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct FamilyParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub carrier: Option<ScalarCarrier>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coordinates: Option<usize>,
    /// Extra scalar points by label, values as `"p/q"`.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extras: BTreeMap<String, String>,
}

#[derive(Clone, Debug)]
pub struct FamilySpace {
    rule: FamilyRule,
    cutoff: usize,
    extras: Vec<(String, Rational)>,
    points: Vec<FamilyPoint>,
    finite: FiniteSpace,
}

impl FamilySpace {
    pub fn new(rule: FamilyRule, cutoff: usize, extras: Vec<(String, Rational)>) -> Result<Self, FamilyError> {
        if cutoff < 4 {
            return Err(FamilyError::CutoffTooSmall(cutoff));
        }
        let mut points = Vec::new();
        let mut labels = Vec::new();
        match rule {
            FamilyRule::SupTruncatedDifference { coordinates } => {
                if !extras.is_empty() {
                    return Err(FamilyError::ExtrasNotAllowed(rule.name()));
                }
                for m in 1..=coordinates {
                    points.push(FamilyPoint::Indexed(m));
                    labels.push(format!("f_{m}"));
                }
            }
            _ => {
                let carrier = rule.carrier().unwrap();
                for n in carrier.indices(cutoff) {
                    points.push(FamilyPoint::Indexed(n));
                    labels.push(format_rational(carrier.coordinate(n, cutoff)));
                }
                for (i, (label, _)) in extras.iter().enumerate() {
                    points.push(FamilyPoint::Extra(i));
                    labels.push(label.clone());
                }
            }
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = labels.iter().find(|l| !seen.insert(l.as_str())) {
            return Err(FamilyError::DuplicateLabel(dup.clone()));
        }
        let mut space = FamilySpace { rule, cutoff, extras, points, finite: FiniteSpace::from_fn(vec![], |_, _| ExtReal::ZERO) };
        let pts = space.points.clone();
        space.finite = FiniteSpace::from_fn(labels, |i, j| space.eval(pts[i], pts[j]));
        Ok(space)
    }

    pub fn from_file(file: &FamilyFile) -> Result<Self, FamilyError> {
        let carrier = || file.params.carrier.ok_or_else(|| FamilyError::UnknownCarrier("<missing>".into()));
        let rule = match file.rule.as_str() {
            "coordinate-projection" => FamilyRule::CoordinateProjection { carrier: carrier()? },
            "truncated-difference" => FamilyRule::TruncatedDifference { carrier: carrier()? },
            "order-characteristic" => FamilyRule::OrderCharacteristic { carrier: carrier()? },
            "sup-truncated-difference" => FamilyRule::SupTruncatedDifference {
                coordinates: file.params.coordinates.unwrap_or_else(|| default_coordinates(file.cutoff)),
            },
            other => return Err(FamilyError::UnknownRule(other.to_string())),
        };
        let extras = file
            .params
            .extras
            .iter()
            .map(|(k, v)| Ok((k.clone(), parse_rational(v)?)))
            .collect::<Result<Vec<_>, FamilyError>>()?;
        Self::new(rule, file.cutoff, extras)
    }

    pub fn from_json(text: &str) -> Result<Self, FamilyError> {
        Self::from_file(&serde_json::from_str(text)?)
    }

    pub fn to_file(&self) -> FamilyFile {
        let params = FamilyParams {
            carrier: self.rule.carrier(),
            coordinates: match self.rule {
                FamilyRule::SupTruncatedDifference { coordinates } => Some(coordinates),
                _ => None,
            },
            extras: self.extras.iter().map(|(k, v)| (k.clone(), format_rational(*v))).collect(),
        };
        FamilyFile { rule: self.rule.name().to_string(), cutoff: self.cutoff, params }
    }

    pub fn rule(&self) -> FamilyRule {
        self.rule
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// The in-range truncation.
    pub fn space(&self) -> &FiniteSpace {
        &self.finite
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> FamilyPoint {
        self.points[i]
    }

    pub fn label(&self, i: usize) -> &str {
        self.finite.label(i)
    }

    pub fn d(&self, i: usize, j: usize) -> ExtReal {
        self.finite.d(i, j)
    }

    /// Point id of carrier index `n`, if in range.
    pub fn indexed(&self, n: usize) -> Option<usize> {
        self.points.iter().position(|&p| p == FamilyPoint::Indexed(n))
    }

    pub fn by_label(&self, label: &str) -> Result<usize, FamilyError> {
        self.finite.index_of(label).map_err(|_| FamilyError::UnknownPoint(label.to_string()))
    }

    fn scalar(&self, p: FamilyPoint) -> Rational {
        match p {
            FamilyPoint::Indexed(n) => self.rule.carrier().unwrap().coordinate(n, self.cutoff),
            FamilyPoint::Extra(i) => self.extras[i].1,
        }
    }

    /// The same rule at twice the cutoff, and never less than
    /// `cutoff + 2 * MIN_TAIL`. Certificates are verified out to this
    /// horizon. A grid carrier is its own horizon since its coordinates
    /// depend on the cutoff.
    pub fn horizon(&self) -> FamilySpace {
        let rule = match self.rule {
            FamilyRule::SupTruncatedDifference { coordinates } => {
                FamilyRule::SupTruncatedDifference { coordinates: 2 * coordinates }
            }
            FamilyRule::CoordinateProjection { carrier: ScalarCarrier::Grid }
            | FamilyRule::TruncatedDifference { carrier: ScalarCarrier::Grid }
            | FamilyRule::OrderCharacteristic { carrier: ScalarCarrier::Grid } => return self.clone(),
            other => other,
        };
        let far = (2 * self.cutoff).max(self.cutoff + 2 * MIN_TAIL);
        FamilySpace::new(rule, far, self.extras.clone()).expect("horizon of a valid family")
    }

    /// Direct evaluation of the rule.
    pub fn eval(&self, p: FamilyPoint, q: FamilyPoint) -> ExtReal {
        match self.rule {
            FamilyRule::CoordinateProjection { .. } => ExtReal::truncate(self.scalar(q)),
            FamilyRule::TruncatedDifference { .. } => ExtReal::truncate(self.scalar(p) - self.scalar(q)),
            FamilyRule::OrderCharacteristic { .. } => {
                if self.scalar(p) <= self.scalar(q) {
                    ExtReal::ZERO
                } else {
                    ExtReal::INFINITY
                }
            }
            FamilyRule::SupTruncatedDifference { coordinates } => {
                let (FamilyPoint::Indexed(m), FamilyPoint::Indexed(k)) = (p, q) else {
                    unreachable!("f_m family has no extra points")
                };
                (1..=coordinates).map(|n| fm_coordinate(m, n).tsub(fm_coordinate(k, n))).max().unwrap_or(ExtReal::ZERO)
            }
        }
    }
}

/// `f_m(n)`.
pub fn fm_coordinate(m: usize, n: usize) -> ExtReal {
    use std::cmp::Ordering::*;
    match n.cmp(&m) {
        Less => ExtReal::INFINITY,
        Equal => ExtReal::ZERO,
        Greater => ExtReal::ratio(1, n as i64),
    }
}

/// Catalog map from positions `1, 2, ...` to carrier indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum IndexFn {
    Identity,
    Constant { index: usize },
    /// `2, 1, 4, 3, ...`
    SwapPairs,
    /// `start, start + step, ...`
    Stride { start: usize, step: usize },
}

impl IndexFn {
    pub fn apply(self, n: usize) -> usize {
        match self {
            IndexFn::Identity => n,
            IndexFn::Constant { index } => index,
            IndexFn::SwapPairs => {
                if n % 2 == 1 {
                    n + 1
                } else {
                    n - 1
                }
            }
            IndexFn::Stride { start, step } => start + (n - 1) * step,
        }
    }
}

/// A sequence in a family space: position `n` is carrier index `index.apply(n)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FamilySeq {
    pub index: IndexFn,
}

impl FamilySeq {
    pub fn new(index: IndexFn) -> Self {
        FamilySeq { index }
    }

    /// Point ids for positions `1..=L`, `L` the longest in-range prefix and
    /// at most the number of points.
    pub fn terms(&self, space: &FamilySpace) -> Vec<usize> {
        (1..=space.len()).map_while(|n| space.indexed(self.index.apply(n))).collect()
    }
}

/// Closed forms for a tail `n ↦ v_n` (`n` the position).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum TailForm {
    Constant {
        value: ExtReal,
    },
    /// `limit + coeff / (n + shift)`.
    Hyperbolic {
        #[serde(with = "crate::extreal::rational_string")]
        limit: Rational,
        #[serde(with = "crate::extreal::rational_string")]
        coeff: Rational,
        shift: i64,
    },
}

impl TailForm {
    pub fn eval(&self, n: usize) -> Option<ExtReal> {
        match *self {
            TailForm::Constant { value } => Some(value),
            TailForm::Hyperbolic { limit, coeff, shift } => {
                let den = n as i64 + shift;
                if den <= 0 {
                    return None;
                }
                ExtReal::new(limit + coeff / Rational::from_integer(den)).ok()
            }
        }
    }

    pub fn limit(&self) -> ExtReal {
        match *self {
            TailForm::Constant { value } => value,
            TailForm::Hyperbolic { limit, .. } => ExtReal::truncate(limit),
        }
    }

    /// `sup_{n >= from}`; the forms are monotone so this is exact.
    pub fn sup_from(&self, from: usize) -> ExtReal {
        match *self {
            TailForm::Hyperbolic { coeff, .. } if coeff > Rational::from_integer(0) => {
                self.eval(from).unwrap_or(ExtReal::INFINITY)
            }
            _ => self.limit(),
        }
    }

    pub fn inf_from(&self, from: usize) -> ExtReal {
        match *self {
            TailForm::Hyperbolic { coeff, .. } if coeff < Rational::from_integer(0) => {
                self.eval(from).unwrap_or(ExtReal::ZERO)
            }
            _ => self.limit(),
        }
    }

    fn fits(&self, values: &[(usize, ExtReal)]) -> bool {
        values.iter().all(|&(n, v)| self.eval(n) == Some(v))
    }

    /// Catalog candidates matching the last three samples.
    fn candidates(values: &[(usize, ExtReal)]) -> Vec<TailForm> {
        let k = values.len();
        if k < 3 {
            return Vec::new();
        }
        let last = &values[k - 3..];
        let mut out = vec![TailForm::Constant { value: last[2].1 }];
        let (n1, v1) = last[1];
        let (n2, v2) = last[2];
        if let (Some(a), Some(b)) = (v1.as_finite(), v2.as_finite()) {
            for shift in [0i64, 1, 2, -1] {
                let (d1, d2) = (n1 as i64 + shift, n2 as i64 + shift);
                if d1 <= 0 || d2 <= 0 {
                    continue;
                }
                let gap = Rational::new(1, d1) - Rational::new(1, d2);
                let coeff = (a - b) / gap;
                if coeff == Rational::from_integer(0) {
                    continue;
                }
                let limit = b - coeff / Rational::from_integer(d2);
                out.push(TailForm::Hyperbolic { limit, coeff, shift });
            }
        }
        out.retain(|f| f.fits(last));
        out
    }
}

/// A certified tail: `v_n = form(n)` for every in-range `n >= start`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Tail {
    pub form: TailForm,
    pub start: usize,
    pub verified: usize,
}

/// Fits a tail to `(n, v_n)` samples, `n` ascending. The tail must cover at
/// least [`MIN_TAIL`] positions.
pub fn fit_tail(values: &[(usize, ExtReal)]) -> Option<Tail> {
    TailForm::candidates(values)
        .into_iter()
        .map(|form| {
            let covered = values.iter().rev().take_while(|&&(n, v)| form.eval(n) == Some(v)).count();
            (form, covered)
        })
        .filter(|&(_, covered)| covered >= MIN_TAIL)
        .max_by_key(|&(_, covered)| covered)
        .map(|(form, covered)| Tail { form, start: values[values.len() - covered].0, verified: covered })
}

/// `d(c, x_n)` and `d(x_n, c)` tails for one center.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CenterTails {
    pub from_center: Option<Tail>,
    pub to_center: Option<Tail>,
}

/// A sequence evaluated out to the horizon, with certified tails against
/// every in-range point.
#[derive(Clone, Debug)]
pub struct SeqAnalysis {
    pub horizon: FamilySpace,
    /// In-range point id to horizon point id.
    pub embed: Vec<usize>,
    /// Horizon point ids of positions `1..=L`.
    pub terms: Vec<usize>,
    pub tails: Vec<CenterTails>,
}

impl SeqAnalysis {
    pub fn new(space: &FamilySpace, seq: &FamilySeq) -> Self {
        let horizon = space.horizon();
        let embed: Vec<usize> =
            (0..space.len()).map(|i| horizon.by_label(space.label(i)).expect("horizon contains the range")).collect();
        let terms = seq.terms(&horizon);
        let tails = embed
            .iter()
            .map(|&c| {
                let from: Vec<_> = terms.iter().enumerate().map(|(i, &x)| (i + 1, horizon.d(c, x))).collect();
                let to: Vec<_> = terms.iter().enumerate().map(|(i, &x)| (i + 1, horizon.d(x, c))).collect();
                CenterTails { from_center: fit_tail(&from), to_center: fit_tail(&to) }
            })
            .collect();
        SeqAnalysis { horizon, embed, terms, tails }
    }

    /// First position past the verified horizon.
    pub fn beyond(&self) -> usize {
        self.terms.len() + 1
    }
}

/// Certified tails of a sequence against every in-range point.
pub fn tails(space: &FamilySpace, seq: &FamilySeq) -> Vec<CenterTails> {
    SeqAnalysis::new(space, seq).tails
}

/// Closed forms for `D(m, n) = d(x_m, x_n)`, `m < n` positions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "claim", rename_all = "snake_case")]
pub enum PairClaim {
    /// `D(m, n) = form(n)` for all `m < n`.
    ForwardTail { form: TailForm },
    /// `D(m, n) = 0` whenever `n >= m + lag`.
    ZeroBeyondLag { lag: usize },
    /// `D(m, m + 1) = value` for every `m ≡ offset (mod period)`.
    Recurring { period: usize, offset: usize, value: ExtReal },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub id: String,
    pub claim: PairClaim,
    pub checked_pairs: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Holds { certificate: String },
    Fails { certificate: String },
    UndecidableAtCutoff,
}

impl Verdict {
    pub fn holds(&self) -> Option<bool> {
        match self {
            Verdict::Holds { .. } => Some(true),
            Verdict::Fails { .. } => Some(false),
            Verdict::UndecidableAtCutoff => None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilyClass {
    pub reflexive: Verdict,
    pub pre_cauchy: Verdict,
    pub cauchy: Verdict,
    pub certificates: Vec<Certificate>,
}

/// Fits and checks every catalog pair claim on all in-range pairs.
pub fn certify_pairs(space: &FamilySpace, seq: &FamilySeq) -> Vec<Certificate> {
    let space = &space.horizon();
    let terms = seq.terms(space);
    let len = terms.len();
    let pair = |m: usize, n: usize| space.d(terms[m - 1], terms[n - 1]);
    let mut out = Vec::new();
    if len < MIN_TAIL {
        return out;
    }

    let first_row: Vec<_> = (2..=len).map(|n| (n, pair(1, n))).collect();
    if let Some(tail) = fit_tail(&first_row) {
        if tail.start == 2 && (1..len).all(|m| (m + 1..=len).all(|n| tail.form.eval(n) == Some(pair(m, n)))) {
            out.push(Certificate {
                id: "forward-tail".into(),
                claim: PairClaim::ForwardTail { form: tail.form },
                checked_pairs: len * (len - 1) / 2,
            });
        }
    }

    if let Some(lag) = (1..=3).find(|&lag| (1..len).all(|m| (m + lag..=len).all(|n| pair(m, n).is_zero()))) {
        out.push(Certificate {
            id: format!("zero-beyond-lag-{lag}"),
            claim: PairClaim::ZeroBeyondLag { lag },
            checked_pairs: (1..len).map(|m| len.saturating_sub(m + lag - 1)).sum(),
        });
    }

    'search: for period in 1..=2 {
        for offset in 0..period {
            let ms: Vec<usize> = (1..len).filter(|m| m % period == offset).collect();
            if ms.len() < MIN_TAIL / period {
                continue;
            }
            let value = pair(ms[0], ms[0] + 1);
            if value.is_positive() && ms.iter().all(|&m| pair(m, m + 1) == value) {
                out.push(Certificate {
                    id: format!("recurring-{period}-{offset}"),
                    claim: PairClaim::Recurring { period, offset, value },
                    checked_pairs: ms.len(),
                });
                break 'search;
            }
        }
    }
    out
}

/// Tri-state classification backed by certificates.
pub fn classify_family(space: &FamilySpace, seq: &FamilySeq) -> FamilyClass {
    let certificates = certify_pairs(space, seq);
    let find = |pred: &dyn Fn(&PairClaim) -> bool| certificates.iter().find(|c| pred(&c.claim)).map(|c| c.id.clone());

    let forward = certificates.iter().find_map(|c| match c.claim {
        PairClaim::ForwardTail { form } => Some((c.id.clone(), form.limit().is_zero())),
        _ => None,
    });
    let lag = find(&|c| matches!(c, PairClaim::ZeroBeyondLag { .. }));
    let recurring = find(&|c| matches!(c, PairClaim::Recurring { .. }));

    let cauchy = match (&forward, &recurring) {
        (Some((id, true)), _) => Verdict::Holds { certificate: id.clone() },
        (Some((id, false)), _) => Verdict::Fails { certificate: id.clone() },
        (None, Some(id)) => Verdict::Fails { certificate: id.clone() },
        (None, None) => Verdict::UndecidableAtCutoff,
    };
    // Under a forward tail every inner liminf and limsup equals the tail limit.
    let weaker = |forward: &Option<(String, bool)>| match (forward, &lag) {
        (Some((id, zero)), _) => {
            if *zero {
                Verdict::Holds { certificate: id.clone() }
            } else {
                Verdict::Fails { certificate: id.clone() }
            }
        }
        (None, Some(id)) => Verdict::Holds { certificate: id.clone() },
        (None, None) => Verdict::UndecidableAtCutoff,
    };
    FamilyClass { reflexive: weaker(&forward), pre_cauchy: weaker(&forward), cauchy, certificates }
}

/// Greedy increasing selection of positions, each within `2^-k` of every
/// earlier selection, recognized as a stride over carrier indices.
pub fn cauchy_subsequence(space: &FamilySpace, seq: &FamilySeq) -> Result<FamilySeq, FamilyError> {
    let class = classify_family(space, seq);
    if class.cauchy.holds() == Some(true) {
        return Ok(*seq);
    }
    if class.pre_cauchy.holds() != Some(true) {
        return Err(FamilyError::NotPreCauchy);
    }
    let horizon = space.horizon();
    let space = &horizon;
    let terms = seq.terms(space);
    let mut chosen = vec![0usize];
    let mut next = 1;
    while next < terms.len() {
        let k = chosen.len() as i64;
        let bound = ExtReal::ratio(1, 1i64 << k.min(40));
        if chosen.iter().all(|&p| space.d(terms[p], terms[next]) <= bound) {
            chosen.push(next);
        }
        next += 1;
    }
    let indices: Vec<usize> = chosen.iter().map(|&p| seq.index.apply(p + 1)).collect();
    if indices.len() < 2 {
        return Err(FamilyError::ShortSequence);
    }
    let start = indices[0];
    let step = indices[1].checked_sub(start).filter(|&s| s > 0).ok_or(FamilyError::ShortSequence)?;
    let sub = FamilySeq::new(IndexFn::Stride { start, step });
    if indices.iter().enumerate().all(|(i, &n)| n == sub.index.apply(i + 1)) {
        Ok(sub)
    } else {
        Err(FamilyError::Undecidable("subsequence is not a stride".into()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HoleSide {
    UpperHole,
    LowerHole,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FamilyWitness {
    pub center: String,
    pub side: HoleSide,
    pub liminf: ExtReal,
    pub distance: ExtReal,
}

/// Convergence of a family sequence to one candidate, over the centers
/// whose tails are certified.
#[derive(Clone, Debug, Serialize)]
pub struct FamilyConvergence {
    pub candidate: String,
    pub upper_ball: bool,
    pub lower_ball: bool,
    pub upper_hole: bool,
    pub lower_hole: bool,
    pub double_hole: bool,
    pub double_hole_witness: Option<FamilyWitness>,
    pub certified_centers: usize,
    pub uncertified_centers: usize,
}

pub fn family_convergence(space: &FamilySpace, tails: &[CenterTails], x: usize) -> FamilyConvergence {
    let mut report = FamilyConvergence {
        candidate: space.label(x).to_string(),
        upper_ball: true,
        lower_ball: true,
        upper_hole: true,
        lower_hole: true,
        double_hole: true,
        double_hole_witness: None,
        certified_centers: 0,
        uncertified_centers: 0,
    };
    let mut best: Option<(ExtReal, FamilyWitness)> = None;
    for (c, t) in tails.iter().enumerate() {
        let (Some(from), Some(to)) = (t.from_center, t.to_center) else {
            report.uncertified_centers += 1;
            continue;
        };
        report.certified_centers += 1;
        let (lim_from, lim_to) = (from.form.limit(), to.form.limit());
        report.upper_ball &= lim_from <= space.d(c, x);
        report.lower_ball &= lim_to <= space.d(x, c);
        let sides = [(HoleSide::UpperHole, lim_to, space.d(x, c)), (HoleSide::LowerHole, lim_from, space.d(c, x))];
        for (side, liminf, distance) in sides {
            if liminf < distance {
                match side {
                    HoleSide::UpperHole => report.upper_hole = false,
                    HoleSide::LowerHole => report.lower_hole = false,
                }
                let gap = distance.tsub(liminf);
                if best.as_ref().is_none_or(|(g, _)| gap > *g) {
                    best = Some((gap, FamilyWitness { center: space.label(c).to_string(), side, liminf, distance }));
                }
            }
        }
    }
    report.double_hole = report.upper_hole && report.lower_hole;
    report.double_hole_witness = best.map(|(_, w)| w);
    report
}

#[derive(Clone, Debug, Serialize)]
pub struct Rejection {
    pub candidate: String,
    pub witness: FamilyWitness,
}

/// A certified Cauchy sequence together with a rejection for each candidate.
#[derive(Clone, Debug, Serialize)]
pub struct Incompleteness {
    pub cauchy: Verdict,
    pub rejections: Vec<Rejection>,
    pub unrejected: Vec<String>,
}

impl Incompleteness {
    pub fn complete_refutation(&self) -> bool {
        self.cauchy.holds() == Some(true) && self.unrejected.is_empty()
    }
}

pub fn incompleteness(space: &FamilySpace, seq: &FamilySeq, candidates: &[usize]) -> Incompleteness {
    let t = tails(space, seq);
    let mut rejections = Vec::new();
    let mut unrejected = Vec::new();
    for &x in candidates {
        let conv = family_convergence(space, &t, x);
        match conv.double_hole_witness {
            Some(witness) => rejections.push(Rejection { candidate: conv.candidate, witness }),
            None => unrejected.push(conv.candidate),
        }
    }
    Incompleteness { cauchy: classify_family(space, seq).cauchy, rejections, unrejected }
}

/// `Yd` and the two supremum sets for the range of a family sequence,
/// with the tail beyond the cutoff accounted for.
#[derive(Clone, Debug, Serialize)]
pub struct FamilySupremum {
    pub sup_row: Vec<ExtReal>,
    pub upper_bounds: Vec<String>,
    pub leq_sups: Vec<String>,
    pub d_sups: Vec<String>,
}

pub fn family_suprema(space: &FamilySpace, seq: &FamilySeq) -> Result<FamilySupremum, FamilyError> {
    let a = SeqAnalysis::new(space, seq);
    let beyond = a.beyond();
    let sup_row = (0..space.len())
        .map(|z| {
            let tail = a.tails[z].to_center.ok_or_else(|| FamilyError::Undecidable(space.label(z).to_string()))?;
            let inside = a.terms.iter().map(|&y| a.horizon.d(y, a.embed[z])).max().unwrap_or(ExtReal::ZERO);
            Ok(inside.max(tail.form.sup_from(beyond)))
        })
        .collect::<Result<Vec<_>, FamilyError>>()?;
    let ubs: Vec<usize> = (0..space.len()).filter(|&z| sup_row[z].is_zero()).collect();
    let leq: Vec<usize> = ubs.iter().copied().filter(|&z| ubs.iter().all(|&u| space.d(z, u).is_zero())).collect();
    let dsup: Vec<usize> = ubs.iter().copied().filter(|&z| (0..space.len()).all(|w| space.d(z, w) == sup_row[w])).collect();
    let names = |v: &[usize]| v.iter().map(|&i| space.label(i).to_string()).collect();
    Ok(FamilySupremum { upper_bounds: names(&ubs), leq_sups: names(&leq), d_sups: names(&dsup), sup_row })
}

/// Evaluation of `inf {d(y, x) : ball ≤ y}` for the open lower ball
/// `{z : d(z, x) < r}`, where the ball is taken in the whole family: its
/// members beyond the cutoff are the tail of `seq` when that tail enters
/// the ball.
#[derive(Clone, Debug, Serialize)]
pub struct LowerBallBound {
    pub center: String,
    pub radius: ExtReal,
    pub ball_in_range: usize,
    pub tail_in_ball: bool,
    pub upper_bounds: Vec<String>,
    pub bound: ExtReal,
}

impl LowerBallBound {
    /// A witness against `d_• <= I`.
    pub fn exceeds_radius(&self) -> bool {
        self.bound > self.radius
    }
}

pub fn lower_ball_bound(space: &FamilySpace, seq: &FamilySeq, x: usize, r: ExtReal) -> Result<LowerBallBound, FamilyError> {
    let a = SeqAnalysis::new(space, seq);
    let (h, e) = (&a.horizon, &a.embed);
    let beyond = a.beyond();
    let tail_x = a.tails[x].to_center.ok_or_else(|| FamilyError::Undecidable(space.label(x).to_string()))?;
    let tail_in_ball = tail_x.form.sup_from(beyond) < r;
    let ball: Vec<usize> = (0..space.len()).filter(|&z| space.d(z, x) < r).collect();
    let seq_ball: Vec<usize> = a.terms.iter().copied().filter(|&t| h.d(t, e[x]) < r).collect();
    let mut ubs = Vec::new();
    for (y, &ey) in e.iter().enumerate() {
        if !ball.iter().all(|&z| space.d(z, y).is_zero()) || !seq_ball.iter().all(|&t| h.d(t, ey).is_zero()) {
            continue;
        }
        if tail_in_ball {
            let tail_y = a.tails[y].to_center.ok_or_else(|| FamilyError::Undecidable(space.label(y).to_string()))?;
            if !tail_y.form.sup_from(beyond).is_zero() {
                continue;
            }
        }
        ubs.push(y);
    }
    let bound = ubs.iter().map(|&y| space.d(y, x)).min().unwrap_or(ExtReal::INFINITY);
    Ok(LowerBallBound {
        center: space.label(x).to_string(),
        radius: r,
        ball_in_range: ball.len(),
        tail_in_ball,
        upper_bounds: ubs.iter().map(|&y| space.label(y).to_string()).collect(),
        bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fm(cutoff: usize) -> FamilySpace {
        FamilySpace::new(FamilyRule::SupTruncatedDifference { coordinates: default_coordinates(cutoff) }, cutoff, vec![]).unwrap()
    }

    fn halfopen(cutoff: usize) -> FamilySpace {
        FamilySpace::new(
            FamilyRule::TruncatedDifference { carrier: ScalarCarrier::ReciprocalChain },
            cutoff,
            vec![("2".into(), Rational::from_integer(2))],
        )
        .unwrap()
    }

    fn naturals_order(cutoff: usize) -> FamilySpace {
        FamilySpace::new(FamilyRule::OrderCharacteristic { carrier: ScalarCarrier::Naturals }, cutoff, vec![]).unwrap()
    }

    #[test]
    fn fm_closed_form() {
        let s = fm(12);
        for m in 1..=s.len() {
            for k in 1..=s.len() {
                let expected = match m.cmp(&k) {
                    std::cmp::Ordering::Less => ExtReal::ratio(1, k as i64),
                    std::cmp::Ordering::Equal => ExtReal::ZERO,
                    std::cmp::Ordering::Greater => ExtReal::INFINITY,
                };
                assert_eq!(s.d(m - 1, k - 1), expected, "m={m} k={k}");
            }
        }
        assert_eq!(s.d(2, 6), ExtReal::ratio(1, 7));
    }

    #[test]
    fn tail_fitting() {
        let v: Vec<_> = (1..=20).map(|n| (n, ExtReal::ratio(1, n as i64))).collect();
        let t = fit_tail(&v).unwrap();
        assert_eq!(t.start, 1);
        assert_eq!(t.form.limit(), ExtReal::ZERO);
        assert_eq!(t.form.sup_from(5), ExtReal::ratio(1, 5));
        let w: Vec<_> = (1..=20).map(|n| (n, ExtReal::ratio(n as i64, n as i64 + 1))).collect();
        let t = fit_tail(&w).unwrap();
        assert_eq!(t.form.limit(), ExtReal::ONE);
        assert_eq!(t.form.sup_from(21), ExtReal::ONE);
        assert!(fit_tail(&w[..5]).is_none());
    }

    #[test]
    fn fm_sequence_is_cauchy() {
        let s = fm(20);
        let c = classify_family(&s, &FamilySeq::new(IndexFn::Identity));
        assert_eq!(c.cauchy.holds(), Some(true));
        assert_eq!(c.pre_cauchy.holds(), Some(true));
    }

    #[test]
    fn swap_sequence_is_pre_cauchy_not_cauchy() {
        let s = naturals_order(40);
        let swap = FamilySeq::new(IndexFn::SwapPairs);
        let c = classify_family(&s, &swap);
        assert_eq!(c.pre_cauchy.holds(), Some(true));
        assert_eq!(c.cauchy.holds(), Some(false));
        let sub = cauchy_subsequence(&s, &swap).unwrap();
        assert_eq!(sub.index, IndexFn::Stride { start: 2, step: 2 });
        assert_eq!(classify_family(&s, &sub).cauchy.holds(), Some(true));
    }

    #[test]
    fn constant_family_sequence() {
        let s = naturals_order(20);
        let c = classify_family(&s, &FamilySeq::new(IndexFn::Constant { index: 3 }));
        assert_eq!(c.cauchy.holds(), Some(true));
        assert_eq!(c.reflexive.holds(), Some(true));
    }

    #[test]
    fn fm_candidates_rejected_by_next_point() {
        let s = fm(20);
        let candidates: Vec<usize> = (0..20).collect();
        let inc = incompleteness(&s, &FamilySeq::new(IndexFn::Identity), &candidates);
        assert!(inc.complete_refutation());
        for (j, r) in inc.rejections.iter().enumerate() {
            assert_eq!(r.witness.center, format!("f_{}", j + 2));
            assert_eq!(r.witness.liminf, ExtReal::ZERO);
            assert_eq!(r.witness.distance, ExtReal::INFINITY);
        }
    }

    #[test]
    fn halfopen_suprema() {
        let s = halfopen(30);
        let chain = FamilySeq::new(IndexFn::Identity);
        let sup = family_suprema(&s, &chain).unwrap();
        assert_eq!(sup.leq_sups, vec!["2".to_string()]);
        assert!(sup.d_sups.is_empty());
        assert_eq!(sup.sup_row[0], ExtReal::ONE);
        let b = lower_ball_bound(&s, &chain, 0, ExtReal::ratio(3, 2)).unwrap();
        assert!(b.tail_in_ball);
        assert_eq!(b.upper_bounds, vec!["2".to_string()]);
        assert_eq!(b.bound, ExtReal::int(2));
        assert!(b.exceeds_radius());
    }

    #[test]
    fn family_file_round_trip() {
        let s = halfopen(10);
        let text = serde_json::to_string(&s.to_file()).unwrap();
        let back = FamilySpace::from_json(&text).unwrap();
        assert_eq!(back.space(), s.space());
        assert!(matches!(FamilySpace::from_json(r#"{"rule":"nope","cutoff":5}"#), Err(FamilyError::UnknownRule(_))));
        assert!(matches!(
            FamilySpace::new(FamilyRule::SupTruncatedDifference { coordinates: 8 }, 2, vec![]),
            Err(FamilyError::CutoffTooSmall(2))
        ));
    }
}
