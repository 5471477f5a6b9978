//! Hypothesis-then-conclusion audits of the completeness results, and a
//! finite replay of the Cauchy-to-directed construction.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::derived::{derived_functions, subequiv, subequiv_pairs, DerivedFunctions, StepFn};
use crate::exec::Exec;
use crate::extreal::ExtReal;
use crate::nets::EpSeq;
use crate::order::{self, check_ed_complete, Sense, SubsetSearch};
use crate::space::{FiniteSpace, SpaceError};
use crate::topology::{is_complete, zero_cliques};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TheoremError {
    #[error("unknown statement {0:?}")]
    UnknownStatement(String),
    #[error("sequence is not Cauchy")]
    NotCauchy,
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("no point satisfies the bounds for index set {0:?}")]
    SearchExhausted(Vec<usize>),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Statement {
    PropXcompdirected,
    CorDcompleteDdComplete,
    PropDfdf,
    ThmCds,
    ThmDed,
    #[serde(rename = "cor_yc_1")]
    CorYc1,
    #[serde(rename = "cor_yc_2")]
    CorYc2,
    #[serde(rename = "cor_yc_3")]
    CorYc3,
    #[serde(rename = "cor_yc_4")]
    CorYc4,
}

impl Statement {
    pub const ALL: [Statement; 9] = [
        Statement::PropXcompdirected,
        Statement::CorDcompleteDdComplete,
        Statement::PropDfdf,
        Statement::ThmCds,
        Statement::ThmDed,
        Statement::CorYc1,
        Statement::CorYc2,
        Statement::CorYc3,
        Statement::CorYc4,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Statement::PropXcompdirected => "prop_xcompdirected",
            Statement::CorDcompleteDdComplete => "cor_dcomplete_dd_complete",
            Statement::PropDfdf => "prop_dfdf",
            Statement::ThmCds => "thm_cds",
            Statement::ThmDed => "thm_ded",
            Statement::CorYc1 => "cor_yc_1",
            Statement::CorYc2 => "cor_yc_2",
            Statement::CorYc3 => "cor_yc_3",
            Statement::CorYc4 => "cor_yc_4",
        }
    }

    pub fn needs_second_distance(self) -> bool {
        matches!(self, Statement::ThmDed | Statement::CorYc3 | Statement::CorYc4)
    }
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Statement {
    type Err = TheoremError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Statement::ALL.into_iter().find(|t| t.id() == s).ok_or_else(|| TheoremError::UnknownStatement(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Conclusion {
    Verified,
    Refuted,
    /// Hypotheses not met.
    Vacuous,
    /// A second distance is required and none was given.
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AuditEntry {
    pub statement: Statement,
    pub hypotheses: BTreeMap<&'static str, bool>,
    pub hypotheses_met: bool,
    pub conclusion: Conclusion,
    /// The conclusion evaluated regardless of the hypotheses, when requested.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conclusion_independent: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl AuditEntry {
    /// Hypotheses met and conclusion false.
    pub fn is_failure(&self) -> bool {
        self.conclusion == Conclusion::Refuted
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    pub entries: Vec<AuditEntry>,
    pub failures: usize,
}

#[derive(Clone, Debug)]
pub struct AuditOptions {
    pub statements: Vec<Statement>,
    pub evaluate_vacuous: bool,
    pub search: SubsetSearch,
    pub exec: Exec,
}

impl Default for AuditOptions {
    fn default() -> Self {
        AuditOptions {
            statements: Statement::ALL.to_vec(),
            evaluate_vacuous: false,
            search: SubsetSearch::default(),
            exec: Exec::Sequential,
        }
    }
}

/// `e ∘ Φ^d (x, y) = sup_ε inf_{d(z,y) < ε} e(x, z)`, over the threshold generators of `d`.
pub fn e_circ_phi(e: &FiniteSpace, d: &FiniteSpace) -> FiniteSpace {
    let gens = d.threshold_generators();
    FiniteSpace::from_fn(d.labels().to_vec(), |x, y| {
        gens.iter()
            .map(|&eps| d.points().filter(|&z| d.d(z, y) < eps).map(|z| e.d(x, z)).min().unwrap_or(ExtReal::INFINITY))
            .max()
            .unwrap_or(ExtReal::INFINITY)
    })
}

/// `e ∘ ≤^d (x, y) = inf_{z ≤ y} e(x, z)`.
pub fn e_circ_leq(e: &FiniteSpace, d: &FiniteSpace) -> FiniteSpace {
    FiniteSpace::from_fn(d.labels().to_vec(), |x, y| {
        d.points().filter(|&z| d.leq(z, y)).map(|z| e.d(x, z)).min().unwrap_or(ExtReal::INFINITY)
    })
}

/// Facts shared by several statements, computed on demand.
struct Facts<'a> {
    d: &'a FiniteSpace,
    e: Option<&'a FiniteSpace>,
    opts: &'a AuditOptions,
    derived: Option<DerivedFunctions>,
    complete: Option<bool>,
    join_complete: Option<bool>,
    leq_d_complete: Option<(bool, Option<Vec<usize>>)>,
    d_d_complete: Option<(bool, Option<Vec<usize>>)>,
}

impl<'a> Facts<'a> {
    fn derived(&mut self) -> &DerivedFunctions {
        let (d, exec) = (self.d, self.opts.exec);
        self.derived.get_or_insert_with(|| derived_functions(d, exec))
    }

    fn complete(&mut self) -> bool {
        let (d, exec) = (self.d, self.opts.exec);
        *self.complete.get_or_insert_with(|| is_complete(d, exec).complete)
    }

    fn join_complete(&mut self) -> bool {
        let (d, exec) = (self.d, self.opts.exec);
        *self.join_complete.get_or_insert_with(|| is_complete(&d.join(), exec).complete)
    }

    fn leq_d_complete(&mut self) -> bool {
        let (d, o) = (self.d, self.opts);
        self.leq_d_complete
            .get_or_insert_with(|| {
                let r = check_ed_complete(&d.leq_order(), d, o.search, o.exec).unwrap();
                (r.complete, r.failing_subset)
            })
            .0
    }

    fn d_d_complete(&mut self) -> bool {
        let (d, o) = (self.d, self.opts);
        self.d_d_complete
            .get_or_insert_with(|| {
                let r = check_ed_complete(d, d, o.search, o.exec).unwrap();
                (r.complete, r.failing_subset)
            })
            .0
    }

    /// `e`-complete, `e ∘ Φ^d ≾ d ≾ e` and `e = e^op`.
    fn ded_hypotheses(&mut self, h: &mut BTreeMap<&'static str, bool>) {
        let e = self.e.expect("second distance present");
        h.insert("e_complete", is_complete(e, self.opts.exec).complete);
        h.insert("e_phi_subequiv_d", subequiv_pairs(&e_circ_phi(e, self.d), self.d));
        h.insert("d_subequiv_e", subequiv_pairs(self.d, e));
        h.insert("e_symmetric", e.is_symmetric());
    }
}

fn labels(space: &FiniteSpace, ys: &[usize]) -> String {
    let names: Vec<&str> = ys.iter().map(|&y| space.label(y)).collect();
    format!("{{{}}}", names.join(", "))
}

/// First nonempty subset with a `≤`-supremum that is not a d-supremum.
fn leq_sup_not_d_sup(d: &FiniteSpace, search: SubsetSearch) -> Option<(Vec<usize>, usize)> {
    let (_, all) = order::subsets(d.len(), search);
    all.into_iter().find_map(|ys| {
        let s = order::suprema(d, &ys).unwrap();
        s.leq_sups.iter().find(|x| !s.d_sups.contains(x)).map(|&x| (ys, x))
    })
}

/// For every Cauchy eventually periodic sequence, a constant `d^∨`-Cauchy
/// `(y_n) = y` with `y d = (x_λ) d` and `d(x_λ, y) → 0`. A `d^∨`-Cauchy
/// sequence's cycle is a `≤`-equivalence class, so constant ones suffice.
fn cds_conclusion(d: &FiniteSpace) -> (bool, Option<String>) {
    for c in zero_cliques(d) {
        let c0 = c[0];
        let found = d.points().any(|y| {
            d.leq(y, y) && d.points().all(|z| d.d(y, z) == d.d(c0, z)) && c.iter().all(|&x| d.leq(x, y))
        });
        if !found {
            return (false, Some(format!("cycle {}", labels(d, &c))));
        }
    }
    (true, None)
}

/// `e ∘ Φ^d = e ∘ ≤^d`, and every Cauchy cycle has a d-directed `Y` with
/// `Yd = (x_λ)d` and `dY = d(x_λ)`, searched over subsets by size.
fn ded_conclusion(d: &FiniteSpace, e: &FiniteSpace, search: SubsetSearch) -> (bool, Option<String>) {
    if e_circ_phi(e, d) != e_circ_leq(e, d) {
        return (false, Some("e∘Φ^d differs from e∘≤^d".into()));
    }
    let (_, mut all) = order::subsets(d.len(), search);
    all.sort_by_key(|ys| ys.len());
    for c in zero_cliques(d) {
        let c0 = c[0];
        let found = all.iter().any(|ys| {
            order::is_directed(d, ys, Sense::D)
                && d.points().all(|z| ys.iter().map(|&y| d.d(y, z)).max().unwrap() == d.d(c0, z))
                && d.points().all(|z| ys.iter().map(|&y| d.d(z, y)).min().unwrap() == d.d(z, c0))
        });
        if !found {
            return (false, Some(format!("cycle {}", labels(d, &c))));
        }
    }
    (true, None)
}

fn entry(
    statement: Statement,
    hypotheses: BTreeMap<&'static str, bool>,
    evaluate_vacuous: bool,
    conclusion: impl FnOnce() -> (bool, Option<String>),
) -> AuditEntry {
    let met = hypotheses.values().all(|&b| b);
    let (conclusion, independent, witness) = if met {
        let (ok, w) = conclusion();
        (if ok { Conclusion::Verified } else { Conclusion::Refuted }, None, w)
    } else if evaluate_vacuous {
        let (ok, w) = conclusion();
        (Conclusion::Vacuous, Some(ok), w)
    } else {
        (Conclusion::Vacuous, None, None)
    };
    AuditEntry { statement, hypotheses, hypotheses_met: met, conclusion, conclusion_independent: independent, witness }
}

/// Audits the selected statements on `d`, with `e` as the second distance.
pub fn audit(d: &FiniteSpace, e: Option<&FiniteSpace>, opts: &AuditOptions) -> Result<AuditReport, TheoremError> {
    if let Some(e) = e {
        if e.labels() != d.labels() {
            return Err(SpaceError::PointSetMismatch.into());
        }
    }
    let mut f = Facts {
        d,
        e,
        opts,
        derived: None,
        complete: None,
        join_complete: None,
        leq_d_complete: None,
        d_d_complete: None,
    };
    let vac = opts.evaluate_vacuous;
    let identity = StepFn::identity();
    let mut entries = Vec::new();
    for &st in &opts.statements {
        if st.needs_second_distance() && e.is_none() {
            entries.push(AuditEntry {
                statement: st,
                hypotheses: BTreeMap::new(),
                hypotheses_met: false,
                conclusion: Conclusion::Skipped,
                conclusion_independent: None,
                witness: None,
            });
            continue;
        }
        let mut h = BTreeMap::new();
        let complete_conclusion = |f: &mut Facts| {
            let c = is_complete(f.d, f.opts.exec);
            f.complete.get_or_insert(c.complete);
            (c.complete, c.witness.map(|w| format!("cycle {}", labels(f.d, w.cycle()))))
        };
        let e_ = match st {
            Statement::PropXcompdirected => {
                h.insert("d_low_le_identity", f.derived().d_low.le_identity());
                entry(st, h, vac, || match leq_sup_not_d_sup(d, opts.search) {
                    Some((ys, x)) => (false, Some(format!("{} is a ≤-sup of {} but not a d-sup", d.label(x), labels(d, &ys)))),
                    None => (true, None),
                })
            }
            Statement::CorDcompleteDdComplete => {
                h.insert("complete", f.complete());
                let dd = f.d_d_complete();
                let w = f.d_d_complete.as_ref().unwrap().1.clone();
                entry(st, h, vac, || (dd, w.map(|ys| format!("directed {} has no d-sup", labels(d, &ys)))))
            }
            Statement::PropDfdf => {
                h.insert("hemimetric", d.is_hemimetric());
                h.insert("join_complete", f.join_complete());
                h.insert("d_phi_subequiv_identity", subequiv(&f.derived().d_phi, &identity));
                let df = f.derived();
                let same = df.d_f.same(&df.d_phi);
                entry(st, h, vac, || (same, (!same).then(|| "d_F differs from d_Φ".to_string())))
            }
            Statement::ThmCds => {
                h.insert("leq_d_complete", f.leq_d_complete());
                h.insert("d_f_le_identity", f.derived().d_f.le_identity());
                entry(st, h, vac, || cds_conclusion(d))
            }
            Statement::ThmDed => {
                f.ded_hypotheses(&mut h);
                let e = e.unwrap();
                entry(st, h, vac, || ded_conclusion(d, e, opts.search))
            }
            Statement::CorYc1 => {
                h.insert("leq_d_complete", f.leq_d_complete());
                h.insert("d_up_subequiv_identity", subequiv(&f.derived().d_up, &identity));
                let c = complete_conclusion(&mut f);
                entry(st, h, vac, || c)
            }
            Statement::CorYc2 => {
                h.insert("leq_d_complete", f.leq_d_complete());
                h.insert("join_complete", f.join_complete());
                h.insert("d_f_le_identity", f.derived().d_f.le_identity());
                let c = complete_conclusion(&mut f);
                entry(st, h, vac, || c)
            }
            Statement::CorYc3 => {
                h.insert("d_d_complete", f.d_d_complete());
                f.ded_hypotheses(&mut h);
                let c = complete_conclusion(&mut f);
                entry(st, h, vac, || c)
            }
            Statement::CorYc4 => {
                h.insert("leq_d_complete", f.leq_d_complete());
                // a finite space is its own countable e-dense subset
                h.insert("e_separable", true);
                f.ded_hypotheses(&mut h);
                let c = complete_conclusion(&mut f);
                entry(st, h, vac, || c)
            }
        };
        entries.push(e_);
    }
    let failures = entries.iter().filter(|e| e.is_failure()).count();
    Ok(AuditReport { entries, failures })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DirectedReplay {
    /// `r_1, r_2, …` with `d^•(2 r_{n+1}) < r_n`.
    pub radii: Vec<ExtReal>,
    /// `(F, f(F), y_F)` for every index set of the replay.
    pub steps: Vec<(Vec<usize>, usize, usize)>,
    pub y: Vec<usize>,
    pub directed: bool,
    pub y_leq_seq: bool,
    pub yd_matches: bool,
    pub dy_matches: bool,
}

impl DirectedReplay {
    pub fn holds(&self) -> bool {
        self.directed && self.yd_matches && self.dy_matches
    }
}

/// Largest index set size used by the replay.
pub const REPLAY_MAX_SET: usize = 3;

fn index_sets(window: usize, max: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (0..window).map(|i| vec![i]).collect();
    let mut frontier = out.clone();
    for _ in 1..max {
        let mut next = Vec::new();
        for f in &frontier {
            for i in f.last().unwrap() + 1..window {
                let mut g = f.clone();
                g.push(i);
                next.push(g);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Replays the construction of a `≤`-directed `Y` from a Cauchy sequence on
/// index sets of size at most [`REPLAY_MAX_SET`] drawn from one period past
/// the preperiod.
pub fn construct_directed_from_cauchy(space: &FiniteSpace, seq: &EpSeq) -> Result<DirectedReplay, TheoremError> {
    if !seq.classify(space).cauchy {
        return Err(TheoremError::NotCauchy);
    }
    let d_up = derived_functions(space, Exec::Sequential).d_up;
    if !subequiv(&d_up, &StepFn::identity()) {
        return Err(TheoremError::Precondition("d^• is not uniformly subequivalent to the identity".into()));
    }
    let b1 = d_up.breakpoints().first().copied().or_else(|| space.smallest_positive()).unwrap_or(ExtReal::ONE);
    let half = crate::extreal::Rational::new(1, 2);
    let mut radii = vec![ExtReal::INFINITY, ExtReal::new(b1.as_finite().unwrap() * half).unwrap()];
    for _ in 1..REPLAY_MAX_SET {
        let last = radii.last().unwrap().as_finite().unwrap();
        radii.push(ExtReal::new(last * half).unwrap());
    }
    for n in 1..radii.len() - 1 {
        let twice = radii[n + 1].add(radii[n + 1]);
        if d_up.eval(twice) >= radii[n] {
            return Err(TheoremError::Precondition(format!("no radius below {}", radii[n])));
        }
    }

    let p = seq.pre().len();
    let window = p + seq.cycle().len() + 1;
    let tail_sup = |i: usize| (i + 1..i + 1 + p + seq.cycle().len()).map(|j| space.d(seq.term(i), seq.term(j))).max();
    let mut steps = Vec::new();
    for f_set in index_sets(window, REPLAY_MAX_SET) {
        let k = f_set.len();
        let fi = f_set.last().unwrap().max(&p) + k - 1;
        if tail_sup(fi).unwrap_or(ExtReal::ZERO) >= radii[k] {
            return Err(TheoremError::SearchExhausted(f_set));
        }
        let x = seq.term(fi);
        let ball: Vec<usize> = space.points().filter(|&z| space.d(x, z) < radii[k].add(radii[k])).collect();
        let y = space
            .points()
            .filter(|&y| ball.iter().all(|&z| space.leq(y, z)) && space.d(x, y) < radii[k - 1])
            .min_by_key(|&y| space.d(x, y))
            .ok_or_else(|| TheoremError::SearchExhausted(f_set.clone()))?;
        steps.push((f_set, fi, y));
    }
    let mut y: Vec<usize> = steps.iter().map(|s| s.2).collect();
    y.sort_unstable();
    y.dedup();
    let lims: Vec<_> = space.points().map(|z| seq.limits_against(space, z).expect("Cauchy sequences converge")).collect();
    let yd = order::sup_row(space, &y);
    let dy = order::inf_col(space, &y);
    Ok(DirectedReplay {
        radii: radii[1..].to_vec(),
        directed: order::is_directed(space, &y, Sense::Leq),
        y_leq_seq: y.iter().all(|&v| seq.limsup_from(space, v).is_zero()),
        yd_matches: space.points().all(|z| yd[z] == lims[z].forward),
        dy_matches: space.points().all(|z| dy[z] == lims[z].backward),
        steps,
        y,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn discrete(n: usize) -> FiniteSpace {
        FiniteSpace::from_fn(crate::space::default_labels(n), |i, j| if i == j { ExtReal::ZERO } else { ExtReal::ONE })
    }

    #[test]
    fn metric_corollary_one() {
        let d = discrete(3);
        let r = audit(&d, None, &AuditOptions::default()).unwrap();
        let yc1 = r.entries.iter().find(|e| e.statement == Statement::CorYc1).unwrap();
        assert!(yc1.hypotheses_met);
        assert_eq!(yc1.conclusion, Conclusion::Verified);
        assert_eq!(r.failures, 0);
        let ded = r.entries.iter().find(|e| e.statement == Statement::ThmDed).unwrap();
        assert_eq!(ded.conclusion, Conclusion::Skipped);
    }

    #[test]
    fn second_distance_cases() {
        let z = ExtReal::ZERO;
        let d = FiniteSpace::new(
            vec!["a".into(), "b".into()],
            vec![vec![z, z], vec![ExtReal::ONE, z]],
        )
        .unwrap();
        let e = d.join();
        let r = audit(&d, Some(&e), &AuditOptions::default()).unwrap();
        for st in [Statement::ThmDed, Statement::CorYc3, Statement::CorYc4] {
            let en = r.entries.iter().find(|e| e.statement == st).unwrap();
            assert_eq!(en.conclusion, Conclusion::Verified, "{st}");
        }
    }

    #[test]
    fn vacuous_flag_keeps_verdicts() {
        let d = discrete(3);
        let plain = audit(&d, None, &AuditOptions::default()).unwrap();
        let opts = AuditOptions { evaluate_vacuous: true, ..Default::default() };
        let full = audit(&d, None, &opts).unwrap();
        for (a, b) in plain.entries.iter().zip(&full.entries) {
            assert_eq!(a.conclusion, b.conclusion);
        }
    }

    #[test]
    fn replay_on_constant_sequence() {
        let d = discrete(2);
        let r = construct_directed_from_cauchy(&d, &EpSeq::constant(0)).unwrap();
        assert_eq!(r.y, vec![0]);
        assert!(r.holds());
    }

    #[test]
    fn statement_ids_round_trip() {
        for s in Statement::ALL {
            assert_eq!(s.id().parse::<Statement>().unwrap(), s);
            assert_eq!(serde_json::to_value(s).unwrap(), s.id());
        }
        assert!("nope".parse::<Statement>().is_err());
    }
}
