use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use yoneda_core::derived::{derived_functions, subequiv, StepFn};
use yoneda_core::family::FamilySpace;
use yoneda_core::formal_balls::{fb_distance, fb_leq, FormalBall};
use yoneda_core::gallery::{self, FixtureName, GalleryError};
use yoneda_core::order::{self, Sense};
use yoneda_core::random::InstanceKind;
use yoneda_core::space::{SequenceLiteral, SpaceFile};
use yoneda_core::sweep::{run_sweep, SweepConfig};
use yoneda_core::theorems::{self, AuditOptions, Statement};
use yoneda_core::topology::{self, Topology};
use yoneda_core::{EpSeq, Exec, FiniteSpace};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("reading {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Parse(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Io { .. } | CliError::Parse(_) => 2,
            CliError::Precondition(_) => 3,
        }
    }
}

pub enum Status {
    Ok,
    Failed(String),
    GalleryFailed(String),
    NotADistance,
}

impl Status {
    pub fn code(&self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::NotADistance => 3,
            Status::Failed(_) => 4,
            Status::GalleryFailed(_) => 5,
        }
    }
}

/// Every report is wrapped with the command that produced it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Envelope {
    pub command: String,
    pub version: String,
    pub input: Value,
    pub result: Value,
}

fn envelope(command: &str, input: Value, result: impl Serialize) -> Result<Envelope, CliError> {
    Ok(Envelope {
        command: command.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        input,
        result: serde_json::to_value(result).map_err(|e| CliError::Parse(e.to_string()))?,
    })
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Parse(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

/// A space file, or a family file (`"rule"` key) whose in-range truncation is used.
struct Loaded {
    space: FiniteSpace,
    file: Option<SpaceFile>,
}

fn load_space(path: &Path) -> Result<Loaded, CliError> {
    let text = read(path)?;
    let value: Value =
        serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    let bad = |e: &dyn std::fmt::Display| CliError::Parse(format!("{}: {e}", path.display()));
    if value.get("rule").is_some() {
        let fam = FamilySpace::from_json(&text).map_err(|e| bad(&e))?;
        return Ok(Loaded { space: fam.space().clone(), file: None });
    }
    let file: SpaceFile = serde_json::from_value(value).map_err(|e| bad(&e))?;
    let space = file.to_space().map_err(|e| bad(&e))?;
    Ok(Loaded { space, file: Some(file) })
}

fn topology_name(t: Topology) -> &'static str {
    match t {
        Topology::UpperBall => "upper_ball",
        Topology::LowerBall => "lower_ball",
        Topology::UpperHole => "upper_hole",
        Topology::LowerHole => "lower_hole",
        Topology::DoubleHole => "double_hole",
        Topology::DLimit => "d_limit",
    }
}

fn names(space: &FiniteSpace, ids: &[usize]) -> Vec<String> {
    ids.iter().map(|&i| space.label(i).to_string()).collect()
}

fn index_all(space: &FiniteSpace, labels: &[String]) -> Result<Vec<usize>, CliError> {
    labels.iter().map(|l| space.index_of(l).map_err(|e| CliError::Parse(e.to_string()))).collect()
}

#[derive(Serialize)]
struct SequenceReport {
    sequence: SequenceLiteral,
    reflexive: bool,
    pre_cauchy: bool,
    cauchy: bool,
    limits: BTreeMap<&'static str, Vec<String>>,
}

#[derive(Serialize)]
struct SubsetReport {
    subset: Vec<String>,
    d_directed: bool,
    leq_directed: bool,
    upper_bounds: Vec<String>,
    leq_sups: Vec<String>,
    d_sups: Vec<String>,
}

#[derive(Serialize)]
struct BallReport {
    balls: Vec<String>,
    /// `distances[i][j]` between listed balls.
    distances: Vec<Vec<String>>,
    leq: Vec<Vec<bool>>,
}

#[derive(Serialize)]
struct Hypotheses {
    d_up_le_identity: bool,
    d_low_le_identity: bool,
    d_f_le_identity: bool,
    d_up_subequiv_identity: bool,
    d_phi_subequiv_identity: bool,
    d_f_weak_condition: bool,
}

#[derive(Serialize)]
struct CompletenessReport {
    complete: bool,
    zero_cliques: u64,
    witness: Option<SequenceLiteral>,
}

#[derive(Serialize)]
struct CheckReport {
    points: Vec<String>,
    validation: yoneda_core::space::Validation,
    #[serde(skip_serializing_if = "Option::is_none")]
    derived: Option<yoneda_core::derived::DerivedFunctions>,
    #[serde(skip_serializing_if = "Option::is_none")]
    conditions: Option<Hypotheses>,
    #[serde(skip_serializing_if = "Option::is_none")]
    completeness: Option<CompletenessReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    sequences: Vec<SequenceReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    subsets: Vec<SubsetReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    formal_balls: Option<BallReport>,
}

fn sequence_report(space: &FiniteSpace, lit: &SequenceLiteral) -> Result<SequenceReport, CliError> {
    let seq = EpSeq::from_literal(space, lit).map_err(|e| CliError::Parse(e.to_string()))?;
    let class = seq.classify(space);
    let limits = Topology::ALL
        .iter()
        .map(|&t| (topology_name(t), names(space, &topology::limit_set(space, &seq, t))))
        .collect();
    Ok(SequenceReport {
        sequence: seq.to_literal(space),
        reflexive: class.reflexive,
        pre_cauchy: class.pre_cauchy,
        cauchy: class.cauchy,
        limits,
    })
}

fn subset_report(space: &FiniteSpace, labels: &[String]) -> Result<SubsetReport, CliError> {
    let ys = index_all(space, labels)?;
    let sups = order::suprema(space, &ys).map_err(|e| CliError::Precondition(e.to_string()))?;
    Ok(SubsetReport {
        subset: labels.to_vec(),
        d_directed: order::is_directed(space, &ys, Sense::D),
        leq_directed: order::is_directed(space, &ys, Sense::Leq),
        upper_bounds: names(space, &order::upper_bounds(space, &ys)),
        leq_sups: names(space, &sups.leq_sups),
        d_sups: names(space, &sups.d_sups),
    })
}

fn ball_report(space: &FiniteSpace, file: &SpaceFile) -> Result<Option<BallReport>, CliError> {
    if file.formal_balls.is_empty() {
        return Ok(None);
    }
    let balls = file
        .formal_balls
        .iter()
        .map(|lit| FormalBall::from_literal(space, lit).map_err(|e| CliError::Parse(e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    let shown = balls.iter().map(|b| {
        let lit = b.to_literal(space);
        format!("({},{})", lit.point, lit.radius)
    });
    Ok(Some(BallReport {
        balls: shown.collect(),
        distances: balls.iter().map(|&a| balls.iter().map(|&b| fb_distance(space, a, b).to_string()).collect()).collect(),
        leq: balls.iter().map(|&a| balls.iter().map(|&b| fb_leq(space, a, b)).collect()).collect(),
    }))
}

pub fn check(path: &Path) -> Result<(Envelope, Status), CliError> {
    let loaded = load_space(path)?;
    let space = &loaded.space;
    let validation = space.validate();
    let input = serde_json::json!({ "file": path.display().to_string() });
    if !validation.is_distance {
        let report = CheckReport {
            points: space.labels().to_vec(),
            validation,
            derived: None,
            conditions: None,
            completeness: None,
            sequences: vec![],
            subsets: vec![],
            formal_balls: None,
        };
        return Ok((envelope("check", input, report)?, Status::NotADistance));
    }
    let exec = Exec::default();
    let derived = derived_functions(space, exec);
    let identity = StepFn::identity();
    let conditions = Hypotheses {
        d_up_le_identity: derived.d_up.le_identity(),
        d_low_le_identity: derived.d_low.le_identity(),
        d_f_le_identity: derived.d_f.le_identity(),
        d_up_subequiv_identity: subequiv(&derived.d_up, &identity),
        d_phi_subequiv_identity: subequiv(&derived.d_phi, &identity),
        d_f_weak_condition: derived.d_f.weak_condition(),
    };
    let c = topology::is_complete(space, exec);
    let completeness = CompletenessReport {
        complete: c.complete,
        zero_cliques: c.zero_cliques,
        witness: c.witness.map(|w| w.to_literal(space)),
    };
    let (sequences, subsets, formal_balls) = match &loaded.file {
        Some(file) => (
            file.sequences.iter().map(|s| sequence_report(space, s)).collect::<Result<Vec<_>, _>>()?,
            file.subsets.iter().map(|s| subset_report(space, s)).collect::<Result<Vec<_>, _>>()?,
            ball_report(space, file)?,
        ),
        None => (vec![], vec![], None),
    };
    let report = CheckReport {
        points: space.labels().to_vec(),
        validation,
        derived: Some(derived),
        conditions: Some(conditions),
        completeness: Some(completeness),
        sequences,
        subsets,
        formal_balls,
    };
    Ok((envelope("check", input, report)?, Status::Ok))
}

fn parse_statements(ids: &[String]) -> Result<Vec<Statement>, CliError> {
    if ids.is_empty() {
        return Ok(Statement::ALL.to_vec());
    }
    ids.iter().map(|s| s.trim().parse::<Statement>().map_err(|e| CliError::Parse(e.to_string()))).collect()
}

pub fn audit(
    path: &Path,
    theorem_ids: &[String],
    second: Option<&Path>,
    evaluate_vacuous: bool,
) -> Result<(Envelope, Status), CliError> {
    let statements = parse_statements(theorem_ids)?;
    let d = load_space(path)?.space;
    if !d.validate().is_distance {
        return Err(CliError::Precondition(format!("{} is not a distance", path.display())));
    }
    let (e, source) = match second {
        Some(p) => (load_space(p)?.space, p.display().to_string()),
        None => (d.join(), "join".to_string()),
    };
    if !e.validate().is_distance {
        return Err(CliError::Precondition(format!("second distance {source} is not a distance")));
    }
    let opts = AuditOptions { statements, evaluate_vacuous, exec: Exec::default(), ..AuditOptions::default() };
    let report = theorems::audit(&d, Some(&e), &opts).map_err(|e| CliError::Precondition(e.to_string()))?;
    let failed: Vec<&str> = report.entries.iter().filter(|e| e.is_failure()).map(|e| e.statement.id()).collect();
    let status = if failed.is_empty() {
        Status::Ok
    } else {
        Status::Failed(format!("audit failure: {}", failed.join(", ")))
    };
    let input = serde_json::json!({
        "file": path.display().to_string(),
        "second_distance": source,
        "evaluate_vacuous": evaluate_vacuous,
    });
    Ok((envelope("audit", input, report)?, status))
}

#[derive(Serialize)]
struct GalleryOut {
    #[serde(flatten)]
    report: gallery::GalleryReport,
    audits: Vec<gallery::FamilyAuditEntry>,
}

pub fn gallery(name: &str, cutoff: usize) -> Result<(Envelope, Status), CliError> {
    let fixture_name: FixtureName = name.parse().map_err(|e: GalleryError| CliError::Parse(e.to_string()))?;
    let fx = gallery::build(fixture_name, cutoff).map_err(|e| CliError::Precondition(e.to_string()))?;
    let report = gallery::verify(&fx).map_err(|e| CliError::Precondition(e.to_string()))?;
    let audits = gallery::audit_family(&fx).map_err(|e| CliError::Precondition(e.to_string()))?;
    let status = match report.failing().first() {
        None => Status::Ok,
        Some(f) => Status::GalleryFailed(format!("fact failed: {}", f.observed)),
    };
    let input = serde_json::json!({ "name": fixture_name.id(), "cutoff": cutoff });
    Ok((envelope("gallery", input, GalleryOut { report, audits })?, status))
}

pub fn random(
    n: usize,
    count: u64,
    seed: u64,
    kind: Option<InstanceKind>,
    theorem_ids: &[String],
    evaluate_vacuous: bool,
) -> Result<(Envelope, Status), CliError> {
    if n == 0 {
        return Err(CliError::Precondition("--n must be at least 1".into()));
    }
    let cfg = SweepConfig { n, count, seed, kind, statements: parse_statements(theorem_ids)?, evaluate_vacuous };
    let report = run_sweep(&cfg, Exec::default());
    let status = if report.failure_count() == 0 {
        Status::Ok
    } else {
        Status::Failed(format!("{} audit failures", report.failure_count()))
    };
    let input = serde_json::to_value(&cfg).map_err(|e| CliError::Parse(e.to_string()))?;
    Ok((envelope("random", input, report)?, status))
}

pub fn load_reports(paths: &[PathBuf]) -> Result<Vec<Envelope>, CliError> {
    paths
        .iter()
        .map(|p| {
            serde_json::from_str(&read(p)?).map_err(|e| CliError::Parse(format!("{}: not a report: {e}", p.display())))
        })
        .collect()
}
