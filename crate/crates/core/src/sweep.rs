//! Randomized audit sweeps with a deterministic, hashed JSON report.

use std::collections::BTreeMap;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::derived::derived_functions;
use crate::exec::Exec;
use crate::random::{instance, InstanceKind};
use crate::theorems::{audit, AuditOptions, Conclusion, Statement};

#[derive(Clone, Debug, Serialize)]
pub struct SweepConfig {
    pub n: usize,
    pub count: u64,
    pub seed: u64,
    pub kind: Option<InstanceKind>,
    pub statements: Vec<Statement>,
    pub evaluate_vacuous: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            n: 6,
            count: 1000,
            seed: 0,
            kind: None,
            statements: Statement::ALL.to_vec(),
            evaluate_vacuous: false,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Tally {
    pub verified: u64,
    pub refuted: u64,
    pub vacuous: u64,
    pub skipped: u64,
    /// Vacuous entries whose conclusion still held, when evaluated.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vacuous_conclusion_true: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SweepFailure {
    pub instance: u64,
    pub statement: Statement,
    pub witness: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DerivedChain {
    /// Instances violating `d_Φ ≤ d_F ≤ d_•`.
    pub chain_violations: u64,
    /// Instances with `d_F ≠ d_•`.
    pub df_low_differences: u64,
    /// Instances with `d_Φ ≠ d_F`.
    pub phi_f_differences: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SweepBody {
    pub n: usize,
    pub count: u64,
    pub seed: u64,
    pub kinds: BTreeMap<String, u64>,
    pub statements: BTreeMap<&'static str, Tally>,
    pub failures: Vec<SweepFailure>,
    pub derived: DerivedChain,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SweepReport {
    #[serde(flatten)]
    pub body: SweepBody,
    /// SHA-256 of the compact JSON of every other field.
    pub report_hash: String,
}

impl SweepReport {
    pub fn failure_count(&self) -> usize {
        self.body.failures.len()
    }
}

pub fn hash_json<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("report serializes");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

struct InstanceResult {
    kind: InstanceKind,
    entries: Vec<(Statement, Conclusion, Option<bool>, Option<String>)>,
    chain_ok: bool,
    df_low_same: bool,
    phi_f_same: bool,
}

/// Audits `count` instances; the aggregation order is the instance index
/// order whatever the execution mode.
pub fn run_sweep(cfg: &SweepConfig, exec: Exec) -> SweepReport {
    let opts = AuditOptions {
        statements: cfg.statements.clone(),
        evaluate_vacuous: cfg.evaluate_vacuous,
        ..AuditOptions::default()
    };
    let results = exec.map_range(cfg.count, |i| {
        let inst = instance(cfg.seed, i, cfg.n, cfg.kind);
        let rep = audit(&inst.space, Some(&inst.second), &opts).expect("same point set");
        let f = derived_functions(&inst.space, Exec::Sequential);
        InstanceResult {
            kind: inst.kind,
            entries: rep
                .entries
                .into_iter()
                .map(|e| (e.statement, e.conclusion, e.conclusion_independent, e.witness))
                .collect(),
            chain_ok: f.d_phi.le(&f.d_f) && f.d_f.le(&f.d_low),
            df_low_same: f.d_f.same(&f.d_low),
            phi_f_same: f.d_phi.same(&f.d_f),
        }
    });

    let mut kinds = BTreeMap::new();
    let mut statements: BTreeMap<&'static str, Tally> = BTreeMap::new();
    let mut failures = Vec::new();
    let mut derived = DerivedChain::default();
    for (i, r) in results.into_iter().enumerate() {
        *kinds.entry(format!("{:?}", r.kind).to_lowercase()).or_insert(0) += 1;
        derived.chain_violations += u64::from(!r.chain_ok);
        derived.df_low_differences += u64::from(!r.df_low_same);
        derived.phi_f_differences += u64::from(!r.phi_f_same);
        for (st, c, independent, witness) in r.entries {
            let t = statements.entry(st.id()).or_default();
            match c {
                Conclusion::Verified => t.verified += 1,
                Conclusion::Refuted => {
                    t.refuted += 1;
                    failures.push(SweepFailure { instance: i as u64, statement: st, witness });
                }
                Conclusion::Vacuous => t.vacuous += 1,
                Conclusion::Skipped => t.skipped += 1,
            }
            if cfg.evaluate_vacuous {
                let v = t.vacuous_conclusion_true.get_or_insert(0);
                *v += u64::from(independent == Some(true));
            }
        }
    }
    let body = SweepBody { n: cfg.n, count: cfg.count, seed: cfg.seed, kinds, statements, failures, derived };
    let report_hash = hash_json(&body);
    SweepReport { body, report_hash }
}
