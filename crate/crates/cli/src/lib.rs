//! Batch driver: parse scenario configs, run task pipelines over one window,
//! and emit reproducible reports.
//!
//! A scenario is a single JSON document (rationals as `num/den` strings)
//! naming a space recipe, a seed, and an ordered task list. Runs are
//! deterministic: the report body serializes to identical bytes for identical
//! `(scenario, seed)`; wall times and the timestamp live in a separate `meta`
//! section excluded from determinism comparisons. `verify` re-checks every
//! embedded certificate and defect bound from the raw data in the report.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use roelab::diagnostics::{
    alg_amen_ratio, corner_gap_bound, reverse_defect_check, ucp_defect, DefectReport, SubspaceBasis,
};
use roelab::folner::{
    profile, search_folner, search_proper_folner, FolnerQuery, IsoperimetricProfile,
    ProperConstraint, SearchOutcome, SearchStrategy,
};
use roelab::num::{format_rat, parse_rat, serde_rat, sha256_hex, Rat};
use roelab::operator::{
    commutator_ratio, edge_identity_check, folner_bound, FinitePropOperator, Projection,
    SparseOperatorData,
};
use roelab::pointset::PointSet;
use roelab::sampling::{random_operator, random_subset};
use roelab::space::{
    build_window_with_cap, BoundaryMode, SpaceDescriptor, SpaceWindow, DEFAULT_POINT_CAP,
};
use roelab::symbolic::{
    binary_model, compose_words, embed_l1n_words, leavitt_relation_check, nary_model, nat_window,
    LeavittReport,
};
use roelab::translations::{windowed_tarski, DoublingOutcome, TarskiPolicy, TarskiReport};
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;
use thiserror::Error;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const SCHEMA_VERSION: u32 = 1;
pub const POINT_CAP_ENV: &str = "ROELAB_POINT_CAP";

/// Exit-code contract: 0 all-pass, 1 config error, 2 task failure,
/// 3 verification failure.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("task '{task}' failed: {reason}")]
    Task { task: String, reason: String },
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 1,
            CliError::Task { .. } => 2,
            CliError::Verification(_) => 3,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Scenario {
    pub version: u32,
    pub space: SpaceDescriptor,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point_cap: Option<usize>,
    pub tasks: Vec<TaskSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "snake_case")]
pub enum TaskSpec {
    Folner {
        r: u32,
        #[serde(with = "serde_rat")]
        eps: Rat,
        mode: BoundaryMode,
        strategy: SearchStrategy,
        #[serde(default = "default_budget")]
        budget: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        constraint: Option<ProperConstraint>,
        /// Absence of a certificate is a recorded outcome instead of a failure.
        #[serde(default)]
        allow_absent: bool,
    },
    Tarski {
        r: u32,
        #[serde(with = "serde_rat")]
        eps: Rat,
        mode: BoundaryMode,
        strategy: SearchStrategy,
        #[serde(default = "default_budget")]
        budget: u64,
        #[serde(default)]
        policy: TarskiPolicy,
        /// Carrier for the doubling arm: ball of this radius around point 0;
        /// whole window when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        carrier_radius: Option<u32>,
    },
    OperatorBench {
        count: usize,
        max_prop: u32,
        terms: usize,
    },
    UcpBench {
        count: usize,
        max_prop: u32,
    },
    Leavitt {
        #[serde(flatten)]
        model: LeavittModelSpec,
        #[serde(default = "default_true")]
        strict: bool,
    },
    AlgAmen {
        instances: usize,
        max_prop: u32,
        /// Corner support: ball of this radius around point 0 intersected with
        /// the window; small by construction.
        corner_radius: u32,
    },
}

fn default_budget() -> u64 {
    100_000
}

fn default_true() -> bool {
    true
}

impl TaskSpec {
    pub fn name(&self) -> &'static str {
        match self {
            TaskSpec::Folner { .. } => "folner",
            TaskSpec::Tarski { .. } => "tarski",
            TaskSpec::OperatorBench { .. } => "operator_bench",
            TaskSpec::UcpBench { .. } => "ucp_bench",
            TaskSpec::Leavitt { .. } => "leavitt",
            TaskSpec::AlgAmen { .. } => "alg_amen",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum LeavittModelSpec {
    /// Binary model on the naturals, window `{0, ..., 2^exponent - 1}`.
    Binary { exponent: u32 },
    /// n-ary affine model, explicit window size.
    Nary { n: u64, window: u64 },
    /// L(1,n) embedded in the binary model, window `2^exponent`.
    EmbedL1n { n: usize, exponent: u32 },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunReport {
    /// Nondeterministic provenance; excluded from determinism comparisons.
    pub meta: ReportMeta,
    pub body: ReportBody,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReportMeta {
    pub timestamp_unix: u64,
    pub tool_version: String,
    pub wall_ms: Vec<u64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReportBody {
    pub schema_version: u32,
    pub scenario_hash: String,
    pub space: SpaceDescriptor,
    pub seed: u64,
    pub results: Vec<TaskResult>,
    pub all_ok: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TaskResult {
    pub name: String,
    pub spec: TaskSpec,
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    pub output: TaskOutput,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TaskOutput {
    Folner {
        outcome: SearchOutcome,
    },
    Tarski {
        report: TarskiReport,
    },
    OperatorBench {
        items: Vec<OperatorBenchItem>,
    },
    UcpBench {
        items: Vec<UcpBenchItem>,
    },
    Leavitt {
        report: LeavittReport,
    },
    AlgAmen {
        corner: PointSet,
        items: Vec<AlgAmenItem>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OperatorBenchItem {
    pub op: SparseOperatorData,
    pub f: PointSet,
    pub r: u32,
    pub edge_identity_ok: bool,
    pub commutator_ratio: f64,
    pub bound: f64,
    pub within_bound: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UcpBenchItem {
    pub a: SparseOperatorData,
    pub b: SparseOperatorData,
    pub support: PointSet,
    pub forward: DefectReport,
    pub reverse: DefectReport,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AlgAmenItem {
    pub a: SparseOperatorData,
    /// `dim(aW + W) / dim(W)` as `num/den`.
    pub ratio: String,
    /// `1 + |outer boundary| / |F|` as `num/den`.
    pub bound: String,
    pub within_bound: bool,
}

pub fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let scenario: Scenario =
        serde_json::from_str(&text).map_err(|e| CliError::Config(e.to_string()))?;
    if scenario.version != SCHEMA_VERSION {
        return Err(CliError::Config(format!(
            "unsupported scenario version {} (expected {SCHEMA_VERSION})",
            scenario.version
        )));
    }
    Ok(scenario)
}

pub fn scenario_hash(scenario: &Scenario) -> String {
    sha256_hex(
        serde_json::to_string(scenario)
            .expect("scenario serializes")
            .as_bytes(),
    )
}

fn effective_cap(scenario: &Scenario) -> usize {
    std::env::var(POINT_CAP_ENV)
        .ok()
        .and_then(|s| s.parse().ok())
        .or(scenario.point_cap)
        .unwrap_or(DEFAULT_POINT_CAP)
}

pub fn build_scenario_window(scenario: &Scenario) -> Result<Arc<SpaceWindow>, CliError> {
    build_window_with_cap(&scenario.space, effective_cap(scenario))
        .map(Arc::new)
        .map_err(|e| CliError::Config(e.to_string()))
}

/// Executes every task in order. Task failures are recorded in the report;
/// the returned error (if any) is the first failure, after the full run.
pub fn run_scenario(scenario: &Scenario) -> Result<(RunReport, Option<CliError>), CliError> {
    let window = build_scenario_window(scenario)?;
    let mut results = Vec::new();
    let mut wall_ms = Vec::new();
    let mut first_failure: Option<CliError> = None;
    for (index, spec) in scenario.tasks.iter().enumerate() {
        let started = Instant::now();
        let seed = scenario.seed.wrapping_add(index as u64);
        let outcome = run_task(&window, spec, seed);
        wall_ms.push(started.elapsed().as_millis() as u64);
        let (ok, failure, output) = match outcome {
            Ok((ok, failure, output)) => (ok, failure, output),
            Err(e) => {
                let failure = e.to_string();
                (false, Some(failure), empty_output(spec))
            }
        };
        if !ok && first_failure.is_none() {
            first_failure = Some(CliError::Task {
                task: format!("{}#{index}", spec.name()),
                reason: failure.clone().unwrap_or_else(|| "failed".into()),
            });
        }
        results.push(TaskResult {
            name: format!("{}#{index}", spec.name()),
            spec: spec.clone(),
            ok,
            failure,
            output,
        });
    }
    let all_ok = results.iter().all(|r| r.ok);
    let report = RunReport {
        meta: ReportMeta {
            timestamp_unix: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            tool_version: TOOL_VERSION.to_string(),
            wall_ms,
        },
        body: ReportBody {
            schema_version: SCHEMA_VERSION,
            scenario_hash: scenario_hash(scenario),
            space: scenario.space.clone(),
            seed: scenario.seed,
            results,
            all_ok,
        },
    };
    Ok((report, first_failure))
}

fn empty_output(spec: &TaskSpec) -> TaskOutput {
    match spec {
        TaskSpec::Folner { .. } => TaskOutput::Folner {
            outcome: SearchOutcome {
                certificate: None,
                best: None,
                examined: 0,
                budget: 0,
                non_existence: None,
            },
        },
        TaskSpec::Tarski { .. } => TaskOutput::Tarski {
            report: TarskiReport {
                folner: None,
                doubling: None,
            },
        },
        TaskSpec::OperatorBench { .. } => TaskOutput::OperatorBench { items: vec![] },
        TaskSpec::UcpBench { .. } => TaskOutput::UcpBench { items: vec![] },
        TaskSpec::Leavitt { .. } => TaskOutput::Leavitt {
            report: LeavittReport {
                generators: vec![],
                window_size: 0,
                saturated: false,
                unsaturated_points: vec![],
                composition: vec![],
                range_partition_ok: false,
                passed: false,
            },
        },
        TaskSpec::AlgAmen { .. } => TaskOutput::AlgAmen {
            corner: PointSet::empty(),
            items: vec![],
        },
    }
}

type TaskRun = (bool, Option<String>, TaskOutput);

fn run_task(w: &Arc<SpaceWindow>, spec: &TaskSpec, seed: u64) -> Result<TaskRun, CliError> {
    let fail = |reason: String| -> Result<TaskRun, CliError> {
        Err(CliError::Task {
            task: spec.name().into(),
            reason,
        })
    };
    match spec {
        TaskSpec::Folner {
            r,
            eps,
            mode,
            strategy,
            budget,
            constraint,
            allow_absent,
        } => {
            let mut q = FolnerQuery::new(*r, eps.clone(), *mode, *strategy);
            q.budget = *budget;
            q.seed = seed;
            let outcome = match constraint {
                Some(c) => search_proper_folner(w, &q, c),
                None => search_folner(w, &q),
            }
            .map_err(|e| CliError::Task {
                task: spec.name().into(),
                reason: e.to_string(),
            })?;
            if let Some(cert) = &outcome.certificate {
                if let Err(e) = cert.verify(w) {
                    return fail(format!("certificate failed re-verification: {e}"));
                }
            }
            let ok = outcome.certificate.is_some() || *allow_absent;
            let failure =
                (!ok).then(|| "no certificate within budget (allow_absent unset)".to_string());
            Ok((ok, failure, TaskOutput::Folner { outcome }))
        }
        TaskSpec::Tarski {
            r,
            eps,
            mode,
            strategy,
            budget,
            policy,
            carrier_radius,
        } => {
            let mut q = FolnerQuery::new(*r, eps.clone(), *mode, *strategy);
            q.budget = *budget;
            q.seed = seed;
            let carrier = match carrier_radius {
                Some(radius) => w.ball(0, *radius).map_err(|e| CliError::Task {
                    task: spec.name().into(),
                    reason: e.to_string(),
                })?,
                None => w.all_points(),
            };
            let report = windowed_tarski(w, &carrier, &q, *policy).map_err(|e| CliError::Task {
                task: spec.name().into(),
                reason: e.to_string(),
            })?;
            let folner_hit = report
                .folner
                .as_ref()
                .is_some_and(|o| o.certificate.is_some());
            let doubling_hit = matches!(report.doubling, Some(DoublingOutcome::Present(_)));
            let ok = folner_hit
                || doubling_hit
                || matches!(report.doubling, Some(DoublingOutcome::Absent(_)));
            let failure = (!ok).then(|| "neither arm produced a verifiable object".to_string());
            Ok((ok, failure, TaskOutput::Tarski { report }))
        }
        TaskSpec::OperatorBench {
            count,
            max_prop,
            terms,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut items = Vec::with_capacity(*count);
            let mut all = true;
            for _ in 0..*count {
                let op = random_operator(w, *max_prop, *terms, &mut rng);
                let f = random_subset(w, 0.4, &mut rng);
                let r = op.propagation();
                let edge_ok = edge_identity_check(&op, &f, r, BoundaryMode::WindowRelative)
                    .map_err(|e| CliError::Task {
                        task: spec.name().into(),
                        reason: e.to_string(),
                    })?;
                let ratio = commutator_ratio(&op, &f).unwrap_or(0.0);
                let bound = folner_bound(&op, &f, r, BoundaryMode::WindowRelative).unwrap_or(0.0);
                let within = ratio <= bound + 1e-9;
                all &= edge_ok && within;
                items.push(OperatorBenchItem {
                    op: op.to_data(),
                    f,
                    r,
                    edge_identity_ok: edge_ok,
                    commutator_ratio: ratio,
                    bound,
                    within_bound: within,
                });
            }
            let failure = (!all).then(|| "an identity or bound failed".to_string());
            Ok((all, failure, TaskOutput::OperatorBench { items }))
        }
        TaskSpec::UcpBench { count, max_prop } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut items = Vec::with_capacity(*count);
            let mut all = true;
            for _ in 0..*count {
                let a = random_operator(w, *max_prop, 2, &mut rng);
                let b = random_operator(w, *max_prop, 2, &mut rng);
                let f = random_subset(w, 0.45, &mut rng);
                let p = Projection::new(w.clone(), f.clone()).map_err(|e| CliError::Task {
                    task: spec.name().into(),
                    reason: e.to_string(),
                })?;
                let forward = ucp_defect(&p, &a, &b).map_err(|e| CliError::Task {
                    task: spec.name().into(),
                    reason: e.to_string(),
                })?;
                let reverse = reverse_defect_check(&p, &a).map_err(|e| CliError::Task {
                    task: spec.name().into(),
                    reason: e.to_string(),
                })?;
                all &= forward.holds() && reverse.holds();
                items.push(UcpBenchItem {
                    a: a.to_data(),
                    b: b.to_data(),
                    support: f,
                    forward,
                    reverse,
                });
            }
            let failure = (!all).then(|| "a defect bound failed".to_string());
            Ok((all, failure, TaskOutput::UcpBench { items }))
        }
        TaskSpec::Leavitt { model, strict } => {
            let (gens, window) = match model {
                LeavittModelSpec::Binary { exponent } => {
                    (binary_model(), nat_window(1u64 << exponent))
                }
                LeavittModelSpec::Nary { n, window } => (nary_model(*n), nat_window(*window)),
                LeavittModelSpec::EmbedL1n { n, exponent } => {
                    let words = embed_l1n_words(*n).map_err(|e| CliError::Task {
                        task: spec.name().into(),
                        reason: e.to_string(),
                    })?;
                    (
                        compose_words(&binary_model(), &words),
                        nat_window(1u64 << exponent),
                    )
                }
            };
            let report =
                leavitt_relation_check(&gens, &window, *strict).map_err(|e| CliError::Task {
                    task: spec.name().into(),
                    reason: e.to_string(),
                })?;
            let ok = report.passed;
            let failure = (!ok).then(|| "relations failed".to_string());
            Ok((ok, failure, TaskOutput::Leavitt { report }))
        }
        TaskSpec::AlgAmen {
            instances,
            max_prop,
            corner_radius,
        } => {
            let corner = w.ball(0, *corner_radius).map_err(|e| CliError::Task {
                task: spec.name().into(),
                reason: e.to_string(),
            })?;
            let basis = SubspaceBasis::corner(w, &corner).map_err(|e| CliError::Task {
                task: spec.name().into(),
                reason: e.to_string(),
            })?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut items = Vec::with_capacity(*instances);
            let mut all = true;
            for _ in 0..*instances {
                let a = random_operator(w, *max_prop, 2, &mut rng);
                let ratio = alg_amen_ratio(&a, &basis).map_err(|e| CliError::Task {
                    task: spec.name().into(),
                    reason: e.to_string(),
                })?;
                let bound =
                    corner_gap_bound(w, &corner, a.propagation()).map_err(|e| CliError::Task {
                        task: spec.name().into(),
                        reason: e.to_string(),
                    })?;
                let within = ratio <= bound;
                all &= within;
                items.push(AlgAmenItem {
                    a: a.to_data(),
                    ratio: format_rat(&ratio),
                    bound: format_rat(&bound),
                    within_bound: within,
                });
            }
            let failure = (!all).then(|| "a dimension ratio exceeded its bound".to_string());
            Ok((all, failure, TaskOutput::AlgAmen { corner, items }))
        }
    }
}

/// Re-verifies every certificate, witness, and defect report in a report from
/// its raw embedded data. Returns the first discrepancy as an error.
pub fn verify_report(report: &RunReport) -> Result<(), CliError> {
    if report.body.schema_version != SCHEMA_VERSION {
        return Err(CliError::Verification(format!(
            "unsupported schema version {}",
            report.body.schema_version
        )));
    }
    let window = Arc::new(
        build_window_with_cap(&report.body.space, DEFAULT_POINT_CAP)
            .map_err(|e| CliError::Verification(e.to_string()))?,
    );
    for result in &report.body.results {
        verify_task(&window, result)
            .map_err(|reason| CliError::Verification(format!("{}: {reason}", result.name)))?;
    }
    Ok(())
}

fn verify_task(w: &Arc<SpaceWindow>, result: &TaskResult) -> Result<(), String> {
    match &result.output {
        TaskOutput::Folner { outcome } => {
            for cert in outcome.certificate.iter().chain(outcome.best.iter()) {
                cert.verify(w).map_err(|e| e.to_string())?;
            }
            if let (
                Some(cert),
                TaskSpec::Folner {
                    constraint: Some(constraint),
                    ..
                },
            ) = (&outcome.certificate, &result.spec)
            {
                let satisfied = match constraint {
                    ProperConstraint::MinSize { n } => cert.f.len() >= *n,
                    ProperConstraint::Superset { a } => a.is_subset_of(&cert.f),
                };
                if !satisfied {
                    return Err("certificate violates the stated constraint".into());
                }
            }
            if let Some(non) = &outcome.non_existence {
                if non.window_hash != w.window_hash() {
                    return Err("non-existence certificate window mismatch".into());
                }
            }
            Ok(())
        }
        TaskOutput::Tarski { report } => {
            if let Some(outcome) = &report.folner {
                for cert in outcome.certificate.iter().chain(outcome.best.iter()) {
                    cert.verify(w).map_err(|e| e.to_string())?;
                }
            }
            match &report.doubling {
                Some(DoublingOutcome::Present(cert)) => {
                    cert.verify(w).map_err(|e| e.to_string())?
                }
                Some(DoublingOutcome::Absent(wit)) => wit.verify(w).map_err(|e| e.to_string())?,
                None => {}
            }
            Ok(())
        }
        TaskOutput::OperatorBench { items } => {
            for (i, item) in items.iter().enumerate() {
                let op = FinitePropOperator::from_data(w.clone(), &item.op)
                    .map_err(|e| format!("item {i}: {e}"))?;
                let edge = edge_identity_check(&op, &item.f, item.r, BoundaryMode::WindowRelative)
                    .map_err(|e| format!("item {i}: {e}"))?;
                if edge != item.edge_identity_ok {
                    return Err(format!("item {i}: edge identity flag mismatch"));
                }
                let ratio = commutator_ratio(&op, &item.f).map_err(|e| format!("item {i}: {e}"))?;
                let bound = folner_bound(&op, &item.f, item.r, BoundaryMode::WindowRelative)
                    .map_err(|e| format!("item {i}: {e}"))?;
                if ratio != item.commutator_ratio || bound != item.bound {
                    return Err(format!("item {i}: recomputed norms differ"));
                }
                if item.within_bound != (ratio <= bound + 1e-9) {
                    return Err(format!("item {i}: bound flag mismatch"));
                }
            }
            Ok(())
        }
        TaskOutput::UcpBench { items } => {
            for (i, item) in items.iter().enumerate() {
                let a = FinitePropOperator::from_data(w.clone(), &item.a)
                    .map_err(|e| format!("item {i}: {e}"))?;
                let b = FinitePropOperator::from_data(w.clone(), &item.b)
                    .map_err(|e| format!("item {i}: {e}"))?;
                let p = Projection::new(w.clone(), item.support.clone())
                    .map_err(|e| format!("item {i}: {e}"))?;
                let forward = ucp_defect(&p, &a, &b).map_err(|e| format!("item {i}: {e}"))?;
                let reverse = reverse_defect_check(&p, &a).map_err(|e| format!("item {i}: {e}"))?;
                if forward.value != item.forward.value
                    || forward.bound != item.forward.bound
                    || reverse.value != item.reverse.value
                    || reverse.bound != item.reverse.bound
                {
                    return Err(format!("item {i}: recomputed defects differ"));
                }
                if !forward.holds() || !reverse.holds() {
                    return Err(format!("item {i}: defect bound violated"));
                }
            }
            Ok(())
        }
        TaskOutput::Leavitt { report } => {
            let TaskSpec::Leavitt { model, strict } = &result.spec else {
                return Err("spec/output mismatch".into());
            };
            let (gens, window) = match model {
                LeavittModelSpec::Binary { exponent } => {
                    (binary_model(), nat_window(1u64 << exponent))
                }
                LeavittModelSpec::Nary { n, window } => (nary_model(*n), nat_window(*window)),
                LeavittModelSpec::EmbedL1n { n, exponent } => {
                    let words = embed_l1n_words(*n).map_err(|e| e.to_string())?;
                    (
                        compose_words(&binary_model(), &words),
                        nat_window(1u64 << exponent),
                    )
                }
            };
            let fresh =
                leavitt_relation_check(&gens, &window, *strict).map_err(|e| e.to_string())?;
            if fresh.passed != report.passed || fresh.saturated != report.saturated {
                return Err("leavitt report mismatch".into());
            }
            Ok(())
        }
        TaskOutput::AlgAmen { corner, items } => {
            let basis = SubspaceBasis::corner(w, corner).map_err(|e| e.to_string())?;
            for (i, item) in items.iter().enumerate() {
                let a = FinitePropOperator::from_data(w.clone(), &item.a)
                    .map_err(|e| format!("item {i}: {e}"))?;
                let ratio = alg_amen_ratio(&a, &basis).map_err(|e| format!("item {i}: {e}"))?;
                if format_rat(&ratio) != item.ratio {
                    return Err(format!("item {i}: ratio mismatch"));
                }
                let bound = parse_rat(&item.bound).map_err(|e| format!("item {i}: {e}"))?;
                if item.within_bound != (ratio <= bound) {
                    return Err(format!("item {i}: bound flag mismatch"));
                }
            }
            Ok(())
        }
    }
}

/// Canonical JSON of the deterministic part of a report.
pub fn report_body_json(report: &RunReport) -> String {
    serde_json::to_string_pretty(&report.body).expect("report serializes")
}

pub fn report_json(report: &RunReport) -> String {
    serde_json::to_string_pretty(report).expect("report serializes")
}

pub fn load_report(path: &Path) -> Result<RunReport, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::Verification(e.to_string()))
}

/// Runs the isoperimetric profile for the first folner task of a scenario.
pub fn run_profile(scenario: &Scenario, sizes: &[usize]) -> Result<IsoperimetricProfile, CliError> {
    let window = build_scenario_window(scenario)?;
    let folner = scenario.tasks.iter().find_map(|t| match t {
        TaskSpec::Folner {
            r, mode, budget, ..
        } => Some((*r, *mode, *budget)),
        _ => None,
    });
    let (r, mode, budget) =
        folner.ok_or_else(|| CliError::Config("scenario has no folner task to profile".into()))?;
    profile(&window, r, mode, sizes, budget, scenario.seed).map_err(|e| CliError::Task {
        task: "profile".into(),
        reason: e.to_string(),
    })
}

/// Certificate summary lines for the human-readable run log.
pub fn summarize(report: &RunReport) -> String {
    let mut out = String::new();
    for (i, result) in report.body.results.iter().enumerate() {
        let status = if result.ok { "ok" } else { "FAILED" };
        let detail = match &result.output {
            TaskOutput::Folner { outcome } => match &outcome.certificate {
                Some(c) => format!(
                    "certificate |F|={} ratio={} ({} candidates)",
                    c.size,
                    format_rat(&c.ratio),
                    outcome.examined
                ),
                None => format!(
                    "no certificate; best ratio {} ({} candidates)",
                    outcome
                        .best
                        .as_ref()
                        .map(|b| format_rat(&b.ratio))
                        .unwrap_or_else(|| "-".into()),
                    outcome.examined
                ),
            },
            TaskOutput::Tarski { report } => {
                let arm = match (&report.folner, &report.doubling) {
                    (Some(f), _) if f.certificate.is_some() => "folner arm fired",
                    (_, Some(DoublingOutcome::Present(_))) => "doubling arm fired",
                    (_, Some(DoublingOutcome::Absent(_))) => "doubling absent with witness",
                    _ => "no arm produced output",
                };
                arm.to_string()
            }
            TaskOutput::OperatorBench { items } => format!("{} instances", items.len()),
            TaskOutput::UcpBench { items } => format!("{} instances", items.len()),
            TaskOutput::Leavitt { report } => format!(
                "window {} saturated={} passed={}",
                report.window_size, report.saturated, report.passed
            ),
            TaskOutput::AlgAmen { items, .. } => format!("{} instances", items.len()),
        };
        out.push_str(&format!("task {i} [{}] {status}: {detail}\n", result.name));
    }
    out
}
