//! Named examples and counterexamples with exact expected facts.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::extreal::{ExtReal, Rational};
use crate::family::{
    self, default_coordinates, FamilyError, FamilyRule, FamilySeq, FamilySpace, IndexFn, ScalarCarrier,
};
use crate::nets::EpSeq;
use crate::order::{self, Sense};
use crate::space::{default_labels, FiniteSpace};
use crate::topology::{convergence, Topology};

#[derive(Debug, Error)]
pub enum GalleryError {
    #[error("unknown fixture {0:?}; expected projection, x_one_minus_y, halfopen or fm")]
    UnknownName(String),
    #[error("cutoff {0} is below {MIN_CUTOFF}")]
    CutoffTooSmall(usize),
    #[error(transparent)]
    Family(#[from] FamilyError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FixtureName {
    Projection,
    XOneMinusY,
    Halfopen,
    FmCounterexample,
}

impl FixtureName {
    pub const ALL: [FixtureName; 4] =
        [FixtureName::Projection, FixtureName::XOneMinusY, FixtureName::Halfopen, FixtureName::FmCounterexample];

    pub fn id(self) -> &'static str {
        match self {
            FixtureName::Projection => "projection",
            FixtureName::XOneMinusY => "x_one_minus_y",
            FixtureName::Halfopen => "halfopen",
            FixtureName::FmCounterexample => "fm",
        }
    }
}

impl fmt::Display for FixtureName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for FixtureName {
    type Err = GalleryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "projection" => Ok(FixtureName::Projection),
            "x_one_minus_y" | "x-one-minus-y" => Ok(FixtureName::XOneMinusY),
            "halfopen" => Ok(FixtureName::Halfopen),
            "fm" | "fm_counterexample" | "fm-counterexample" => Ok(FixtureName::FmCounterexample),
            _ => Err(GalleryError::UnknownName(s.to_string())),
        }
    }
}

pub enum FixtureSpace {
    Finite(FiniteSpace),
    Family(FamilySpace),
}

impl FixtureSpace {
    pub fn finite(&self) -> &FiniteSpace {
        match self {
            FixtureSpace::Finite(s) => s,
            FixtureSpace::Family(f) => f.space(),
        }
    }
}

/// An exact assertion about a fixture.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "fact", rename_all = "snake_case")]
pub enum Fact {
    IsDistance { hemimetric: bool },
    SelfDistance { point: String, value: ExtReal },
    /// The designated sequence is reflexive and converges to `point` in the
    /// upper-hole and lower-ball topologies, but not in the lower-hole one,
    /// with the witness center given.
    HoleBallConvergence { point: String, lower_hole_witness: String },
    ChainDirected,
    Suprema { leq_sups: Vec<String>, d_sups: Vec<String> },
    /// `inf {d(y, x) : ball ≤ y}` over the open lower ball exceeds its radius.
    LowerBallBoundExceeds { center: String, radius: ExtReal, bound: ExtReal },
    HoleLimits { lower_hole: Vec<String>, double_hole: Vec<String> },
    FmClosedForm,
    Distance { from: String, to: String, value: ExtReal },
    CertifiedCauchy,
    /// Every candidate `f_j` is rejected by center `f_{j+1}` with liminf `0`
    /// against distance `∞`.
    NextPointRejections { candidates: usize },
    DiscreteOrderAndJoin,
}

#[derive(Clone, Debug, Serialize)]
pub struct FactOutcome {
    #[serde(flatten)]
    pub fact: Fact,
    pub holds: bool,
    pub observed: String,
}

pub struct Fixture {
    pub name: FixtureName,
    pub cutoff: usize,
    pub space: FixtureSpace,
    /// Designated point sequence for finite fixtures.
    pub sequence: Option<EpSeq>,
    /// Designated sequence for family fixtures.
    pub family_sequence: Option<FamilySeq>,
    pub facts: Vec<Fact>,
}

/// `d(x, y) = x (1 − y)` on `{k / cutoff}`.
pub fn x_one_minus_y(cutoff: usize) -> FiniteSpace {
    let c = cutoff as i64;
    let v: Vec<Rational> = (0..=c).map(|k| Rational::new(k, c)).collect();
    let labels = v.iter().map(|q| crate::extreal::format_rational(*q)).collect();
    FiniteSpace::from_fn(labels, |i, j| ExtReal::new(v[i] * (Rational::from_integer(1) - v[j])).unwrap())
}

fn halfopen_space(cutoff: usize) -> Result<FamilySpace, FamilyError> {
    FamilySpace::new(
        FamilyRule::TruncatedDifference { carrier: ScalarCarrier::ReciprocalChain },
        cutoff,
        vec![("2".into(), Rational::from_integer(2))],
    )
}

fn fm_space(cutoff: usize) -> Result<FamilySpace, FamilyError> {
    FamilySpace::new(FamilyRule::SupTruncatedDifference { coordinates: default_coordinates(cutoff) }, cutoff, vec![])
}

fn half_label(cutoff: usize) -> String {
    crate::extreal::format_rational(Rational::new((cutoff / 2) as i64, cutoff as i64))
}

/// Below this the horizon is too short to certify every tail.
pub const MIN_CUTOFF: usize = 4;

pub fn build(name: FixtureName, cutoff: usize) -> Result<Fixture, GalleryError> {
    if cutoff < MIN_CUTOFF {
        return Err(GalleryError::CutoffTooSmall(cutoff));
    }
    let s = |x: &str| x.to_string();
    Ok(match name {
        FixtureName::Projection => {
            let fam = FamilySpace::new(FamilyRule::CoordinateProjection { carrier: ScalarCarrier::Grid }, cutoff, vec![])?;
            let half = half_label(cutoff);
            Fixture {
                name,
                cutoff,
                facts: vec![
                    Fact::IsDistance { hemimetric: false },
                    Fact::SelfDistance { point: half.clone(), value: fam.d(cutoff / 2, cutoff / 2) },
                    Fact::HoleBallConvergence { point: half, lower_hole_witness: s("0") },
                ],
                space: FixtureSpace::Family(fam),
                sequence: Some(EpSeq::constant(0)),
                family_sequence: None,
            }
        }
        FixtureName::XOneMinusY => {
            let space = x_one_minus_y(cutoff);
            let half = cutoff / 2;
            let value = space.d(half, half);
            Fixture {
                name,
                cutoff,
                facts: vec![
                    Fact::IsDistance { hemimetric: false },
                    Fact::SelfDistance { point: space.label(half).to_string(), value },
                ],
                space: FixtureSpace::Finite(space),
                sequence: None,
                family_sequence: None,
            }
        }
        FixtureName::Halfopen => Fixture {
            name,
            cutoff,
            space: FixtureSpace::Family(halfopen_space(cutoff)?),
            sequence: None,
            family_sequence: Some(FamilySeq::new(IndexFn::Stride { start: 0, step: 1 })),
            facts: vec![
                Fact::IsDistance { hemimetric: true },
                Fact::ChainDirected,
                Fact::Suprema { leq_sups: vec![s("2")], d_sups: vec![] },
                Fact::LowerBallBoundExceeds { center: s("0"), radius: ExtReal::ratio(3, 2), bound: ExtReal::int(2) },
                Fact::HoleLimits { lower_hole: vec![s("2")], double_hole: vec![] },
            ],
        },
        FixtureName::FmCounterexample => Fixture {
            name,
            cutoff,
            space: FixtureSpace::Family(fm_space(cutoff)?),
            sequence: None,
            family_sequence: Some(FamilySeq::new(IndexFn::Identity)),
            facts: vec![
                Fact::IsDistance { hemimetric: true },
                Fact::FmClosedForm,
                Fact::Distance { from: s("f_3"), to: s("f_7"), value: ExtReal::ratio(1, 7) },
                Fact::Distance { from: s("f_7"), to: s("f_3"), value: ExtReal::INFINITY },
                Fact::CertifiedCauchy,
                Fact::NextPointRejections { candidates: cutoff },
                Fact::DiscreteOrderAndJoin,
            ],
        },
    })
}

fn names(space: &FiniteSpace, ids: &[usize]) -> Vec<String> {
    ids.iter().map(|&i| space.label(i).to_string()).collect()
}

fn family(fx: &Fixture) -> (&FamilySpace, FamilySeq) {
    match (&fx.space, fx.family_sequence) {
        (FixtureSpace::Family(f), Some(seq)) => (f, seq),
        _ => panic!("fact needs a family fixture with a sequence"),
    }
}

fn check(fx: &Fixture, fact: &Fact) -> Result<(bool, String), FamilyError> {
    let space = fx.space.finite();
    Ok(match fact {
        Fact::IsDistance { hemimetric } => {
            let v = space.validate();
            (v.is_distance && v.is_hemimetric == *hemimetric, format!("distance {}, hemimetric {}", v.is_distance, v.is_hemimetric))
        }
        Fact::SelfDistance { point, value } => {
            let p = space.index_of(point).map_err(|_| FamilyError::UnknownPoint(point.clone()))?;
            let got = space.d(p, p);
            (got == *value && got.is_positive(), format!("d({point},{point}) = {got}"))
        }
        Fact::HoleBallConvergence { point, lower_hole_witness } => {
            let seq = fx.sequence.as_ref().expect("designated sequence");
            let p = space.index_of(point).map_err(|_| FamilyError::UnknownPoint(point.clone()))?;
            let r = convergence(space, seq, p);
            let w = r.lower_hole.map(|w| space.label(w.center).to_string());
            let ok = seq.classify(space).reflexive
                && r.holds(Topology::UpperHole)
                && r.holds(Topology::LowerBall)
                && !space.leq(p, p)
                && w.as_deref() == Some(lower_hole_witness.as_str());
            (ok, format!("upper hole {}, lower ball {}, lower-hole witness {:?}", r.holds(Topology::UpperHole), r.holds(Topology::LowerBall), w))
        }
        Fact::ChainDirected => {
            let (fam, seq) = family(fx);
            let chain = seq.terms(fam);
            let d = order::is_directed(space, &chain, Sense::D);
            let l = order::is_directed(space, &chain, Sense::Leq);
            (d && l, format!("{} chain points, d-directed {d}, ≤-directed {l}", chain.len()))
        }
        Fact::Suprema { leq_sups, d_sups } => {
            let (fam, seq) = family(fx);
            let s = family::family_suprema(fam, &seq)?;
            let observed = format!("≤-sups {:?}, d-sups {:?}", s.leq_sups, s.d_sups);
            (&s.leq_sups == leq_sups && &s.d_sups == d_sups, observed)
        }
        Fact::LowerBallBoundExceeds { center, radius, bound } => {
            let (fam, seq) = family(fx);
            let x = fam.by_label(center)?;
            let b = family::lower_ball_bound(fam, &seq, x, *radius)?;
            (b.exceeds_radius() && b.bound == *bound, format!("bound {} at radius {}", b.bound, b.radius))
        }
        Fact::HoleLimits { lower_hole, double_hole } => {
            let (fam, seq) = family(fx);
            let t = family::tails(fam, &seq);
            let conv: Vec<_> = (0..fam.len()).map(|x| family::family_convergence(fam, &t, x)).collect();
            let lh: Vec<String> = conv.iter().filter(|c| c.lower_hole).map(|c| c.candidate.clone()).collect();
            let dh: Vec<String> = conv.iter().filter(|c| c.double_hole).map(|c| c.candidate.clone()).collect();
            let uncertified: usize = conv.iter().map(|c| c.uncertified_centers).max().unwrap_or(0);
            (&lh == lower_hole && &dh == double_hole && uncertified == 0, format!("lower hole {lh:?}, double hole {dh:?}"))
        }
        Fact::FmClosedForm => {
            let n = space.len();
            let bad = (0..n).flat_map(|m| (0..n).map(move |k| (m, k))).find(|&(m, k)| {
                let expected = match m.cmp(&k) {
                    std::cmp::Ordering::Less => ExtReal::ratio(1, k as i64 + 1),
                    std::cmp::Ordering::Equal => ExtReal::ZERO,
                    std::cmp::Ordering::Greater => ExtReal::INFINITY,
                };
                space.d(m, k) != expected
            });
            match bad {
                None => (true, format!("{n} points, d(f_m,f_k) = 1/k for m < k and ∞ for m > k")),
                Some((m, k)) => (false, format!("d(f_{},f_{}) = {}", m + 1, k + 1, space.d(m, k))),
            }
        }
        Fact::Distance { from, to, value } => {
            let (a, b) = (
                space.index_of(from).map_err(|_| FamilyError::UnknownPoint(from.clone()))?,
                space.index_of(to).map_err(|_| FamilyError::UnknownPoint(to.clone()))?,
            );
            let got = space.d(a, b);
            (got == *value, format!("d({from},{to}) = {got}"))
        }
        Fact::CertifiedCauchy => {
            let (fam, seq) = family(fx);
            let c = family::classify_family(fam, &seq);
            (c.cauchy.holds() == Some(true), format!("cauchy {:?}", c.cauchy.holds()))
        }
        Fact::NextPointRejections { candidates } => {
            let (fam, seq) = family(fx);
            let ids: Vec<usize> = (0..*candidates).collect();
            let inc = family::incompleteness(fam, &seq, &ids);
            let next_ok = inc.rejections.iter().enumerate().all(|(j, r)| {
                r.witness.center == format!("f_{}", j + 2)
                    && r.witness.liminf.is_zero()
                    && r.witness.distance.is_infinite()
            });
            let ok = inc.complete_refutation() && inc.rejections.len() == *candidates && next_ok;
            (ok, format!("{} rejected, {} unrejected", inc.rejections.len(), inc.unrejected.len()))
        }
        Fact::DiscreteOrderAndJoin => {
            let j = space.join();
            let ok = space.points().all(|x| space.points().all(|y| space.leq(x, y) == (x == y) && (x == y || j.d(x, y).is_infinite())));
            (ok, format!("≤ is equality and d^∨ is ∞ off the diagonal: {ok}"))
        }
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct GalleryReport {
    pub name: FixtureName,
    pub cutoff: usize,
    pub points: usize,
    pub facts: Vec<FactOutcome>,
    pub summary: BTreeMap<&'static str, String>,
    pub all_hold: bool,
}

impl GalleryReport {
    pub fn failing(&self) -> Vec<&FactOutcome> {
        self.facts.iter().filter(|f| !f.holds).collect()
    }
}

fn summary(fx: &Fixture) -> Result<BTreeMap<&'static str, String>, FamilyError> {
    let mut out = BTreeMap::new();
    let list = |v: &[String]| if v.is_empty() { "none".to_string() } else { v.join(", ") };
    match fx.name {
        FixtureName::Halfopen => {
            let (fam, seq) = family(fx);
            let s = family::family_suprema(fam, &seq)?;
            out.insert("leq_sup", list(&s.leq_sups));
            out.insert("d_sup", list(&s.d_sups));
        }
        FixtureName::FmCounterexample => {
            let (fam, seq) = family(fx);
            let inc = family::incompleteness(fam, &seq, &(0..fx.cutoff).collect::<Vec<_>>());
            let q1 = inc.complete_refutation();
            out.insert("q1", if q1 { "counterexample replicated".into() } else { "not replicated".into() });
        }
        FixtureName::Projection | FixtureName::XOneMinusY => {
            let sp = fx.space.finite();
            let v = sp.validate();
            out.insert("is_distance", v.is_distance.to_string());
            out.insert("is_hemimetric", v.is_hemimetric.to_string());
            let bad: Vec<String> = names(sp, &sp.points().filter(|&x| !sp.leq(x, x)).collect::<Vec<_>>());
            out.insert("not_reflexive_at", list(&bad));
        }
    }
    Ok(out)
}

pub fn verify(fx: &Fixture) -> Result<GalleryReport, GalleryError> {
    let facts = fx
        .facts
        .iter()
        .map(|f| {
            let (holds, observed) = check(fx, f)?;
            Ok(FactOutcome { fact: f.clone(), holds, observed })
        })
        .collect::<Result<Vec<_>, FamilyError>>()?;
    Ok(GalleryReport {
        name: fx.name,
        cutoff: fx.cutoff,
        points: fx.space.finite().len(),
        all_hold: facts.iter().all(|f| f.holds),
        summary: summary(fx)?,
        facts,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilyAuditEntry {
    pub statement: &'static str,
    pub hypotheses_met: bool,
    pub conclusion_holds: bool,
    pub verdict: String,
}

/// Audits of the family fixtures: the `d_• ≤ I` supremum proposition on the
/// half-open interval, and the equivalence that the `f_m` family refutes.
pub fn audit_family(fx: &Fixture) -> Result<Vec<FamilyAuditEntry>, GalleryError> {
    let verdict = |met: bool, holds: bool| match (met, holds) {
        (true, true) => "verified",
        (true, false) => "refuted",
        (false, true) => "vacuous",
        (false, false) => "vacuous; conclusion independently false",
    };
    Ok(match fx.name {
        FixtureName::Halfopen => {
            let (fam, seq) = family(fx);
            let b = family::lower_ball_bound(fam, &seq, fam.by_label("0")?, ExtReal::ratio(3, 2))?;
            let s = family::family_suprema(fam, &seq)?;
            let met = !b.exceeds_radius();
            let holds = s.leq_sups.iter().all(|x| s.d_sups.contains(x));
            vec![FamilyAuditEntry {
                statement: "prop_xcompdirected",
                hypotheses_met: met,
                conclusion_holds: holds,
                verdict: verdict(met, holds).into(),
            }]
        }
        FixtureName::FmCounterexample => {
            let (fam, seq) = family(fx);
            let sp = fx.space.finite();
            // with ≤ equal to equality, directed sets are singletons {f} and
            // f is their d-supremum; d^∨-Cauchy sequences are eventually constant
            let discrete = check(fx, &Fact::DiscreteOrderAndJoin)?.0;
            let singletons_sup = sp.points().all(|x| order::suprema(sp, &[x]).unwrap().d_sups.contains(&x));
            let rhs = discrete && singletons_sup;
            let inc = family::incompleteness(fam, &seq, &(0..fx.cutoff).collect::<Vec<_>>());
            let lhs_fails = inc.complete_refutation();
            vec![FamilyAuditEntry {
                statement: "q1",
                hypotheses_met: rhs,
                conclusion_holds: !lhs_fails,
                verdict: if rhs && lhs_fails { "counterexample replicated".into() } else { "not replicated".into() },
            }]
        }
        _ => Vec::new(),
    })
}

/// Point labels of a finite fixture, for reports.
pub fn labels_of(space: &FiniteSpace) -> Vec<String> {
    if space.labels().is_empty() {
        default_labels(0)
    } else {
        space.labels().to_vec()
    }
}
