//! Task dispatch, status and exit-code assignment, and report persistence.

use std::fs;
use std::path::Path;

use relbound_core::aklt::blocks::Completion;
use relbound_core::aklt::split::{aklt_blocked_split, SplitReport};
use relbound_core::aklt::vbs::GapPoint;
use relbound_core::aklt::verify::{aklt_verify, beta_sweep, gamma_sequence, AkltReport, BetaPoint, VerifyOptions};
use relbound_core::cluster::series::{log_partition_series, ExpansionReport};
use relbound_core::cluster::spectral::{spectral_report, DecayFit, SpectralReport};
use relbound_core::forms::{
    assemble, minimal_alpha, validate_classical, wcond_audit, BoundMode, ClassicalDiagnostics, ModelSpec,
};
use relbound_core::linalg::{hermitian_norm, CMat};
use relbound_core::model_io::ModelFile;
use relbound_core::report::{to_json, Table};
use relbound_core::Error;
use serde::Serialize;

use crate::correlate::{correlate, CorrelationReport};
use crate::error::{exit, CliError, Result};
use crate::plot::{available_kinds, emit_plot_data, PlotKind};
use crate::task::{TaskKind, TaskSpec};

/// Largest space dimension for which model-check also reports the spectrum.
pub const SPECTRUM_MAX_DIM: usize = 4096;
/// Block lengths of the `‖φ^(b)‖` sweep in aklt-split.
pub const BETA_SWEEP_LS: [usize; 3] = [2, 4, 6];
/// Free chains `2..=GAP_N_MAX` enter `γ̂`.
pub const GAP_N_MAX: usize = 10;
pub const IMAG_TOL: f64 = 1e-10;

#[derive(Clone, Debug, Serialize)]
pub struct ModelCheckReport {
    pub n_sites: usize,
    pub site_dim: usize,
    pub space_dim: usize,
    pub t0: f64,
    pub alpha: f64,
    pub beta: f64,
    pub bound_mode: BoundMode,
    pub classical: ClassicalDiagnostics,
    pub alpha_star: Option<f64>,
    pub alpha_feasible: Option<bool>,
    pub collective_min_eig: Option<f64>,
    pub phi_b_norm: Option<f64>,
    pub spectrum: Option<SpectralReport>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SplitTaskReport {
    pub gamma_hat: f64,
    pub gaps_free: Vec<GapPoint>,
    pub split: SplitReport,
    pub beta_sweep: Vec<BetaPoint>,
    pub beta_fit: Option<DecayFit>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(untagged)]
pub enum TaskReport {
    ModelCheck(ModelCheckReport),
    Expand(ExpansionReport),
    AkltVerify(Box<AkltReport>),
    AkltSplit(Box<SplitTaskReport>),
    Correlate(CorrelationReport),
}

impl TaskReport {
    pub fn task(&self) -> TaskKind {
        match self {
            TaskReport::ModelCheck(_) => TaskKind::ModelCheck,
            TaskReport::Expand(_) => TaskKind::Expand,
            TaskReport::AkltVerify(_) => TaskKind::AkltVerify,
            TaskReport::AkltSplit(_) => TaskKind::AkltSplit,
            TaskReport::Correlate(_) => TaskKind::Correlate,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    AuditFailure,
    NonConvergent,
    CapExceeded,
    Infeasible,
    InputError,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::AuditFailure => "audit-failure",
            Status::NonConvergent => "non-convergent",
            Status::CapExceeded => "cap-exceeded",
            Status::Infeasible => "infeasible",
            Status::InputError => "input-error",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => exit::OK,
            Status::AuditFailure => exit::AUDIT_FAILURE,
            Status::NonConvergent | Status::CapExceeded | Status::Infeasible => exit::INFEASIBLE,
            Status::InputError => exit::INPUT_ERROR,
        }
    }

    fn of_error(e: &CliError) -> Self {
        match e {
            CliError::Core { source, .. } => match source {
                Error::NonConvergent(_) => Status::NonConvergent,
                Error::CapExceeded { .. } | Error::DimensionOverflow { .. } => Status::CapExceeded,
                _ if e.exit_code() == exit::INFEASIBLE => Status::Infeasible,
                _ => Status::InputError,
            },
            _ => Status::InputError,
        }
    }
}

#[derive(Serialize)]
struct Summary<'a> {
    task: TaskKind,
    status: Status,
    exit_code: i32,
    flags: &'a [String],
    failures: &'a [String],
    spec: &'a TaskSpec,
    report: Option<&'a TaskReport>,
}

/// Everything a run produces, before it is written to disk.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub status: Status,
    pub flags: Vec<String>,
    pub failures: Vec<String>,
    pub report: Option<TaskReport>,
    pub summary_json: String,
    pub tables: Vec<(PlotKind, Table)>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }
}

struct Verdict {
    status: Status,
    flags: Vec<String>,
    failures: Vec<String>,
}

impl Verdict {
    fn from_failures(failures: Vec<String>) -> Self {
        let status = if failures.is_empty() { Status::Ok } else { Status::AuditFailure };
        Self {
            status,
            flags: vec![],
            failures,
        }
    }
}

fn core_ctx(task: TaskKind) -> impl Fn(Error) -> CliError {
    move |source| CliError::Core {
        task: task.name().into(),
        source,
    }
}

fn model_file(spec: &TaskSpec) -> Result<&ModelFile> {
    spec.model.as_ref().ok_or_else(|| CliError::MissingKeys {
        task: spec.task.name().into(),
        keys: vec!["model".into()],
    })
}

fn checked_model(spec: &TaskSpec) -> Result<ModelSpec> {
    model_file(spec)?.to_model().map_err(core_ctx(spec.task))
}

fn model_check(spec: &TaskSpec) -> Result<(TaskReport, Verdict)> {
    let ctx = core_ctx(spec.task);
    let file = model_file(spec)?;
    let model = file.to_model_unchecked().map_err(&ctx)?;
    let volume = model.volume();
    let classical = validate_classical(&model.h);
    let mut report = ModelCheckReport {
        n_sites: volume.n_sites(),
        site_dim: volume.site_dim(),
        space_dim: volume.space_dim(),
        t0: model.t0,
        alpha: model.alpha,
        beta: model.beta,
        bound_mode: model.bound_mode,
        classical: classical.clone(),
        alpha_star: None,
        alpha_feasible: None,
        collective_min_eig: None,
        phi_b_norm: model.phi_b.as_ref().map(hermitian_norm),
        spectrum: None,
    };
    let mut infeasible = false;
    if classical.pass {
        if let Some(r) = &model.phi_r {
            let cert = minimal_alpha(r, &model.h, 0.0).map_err(&ctx)?;
            report.alpha_star = Some(cert.alpha_star);
            report.alpha_feasible = Some(cert.feasible);
            infeasible = !cert.feasible && model.bound_mode == BoundMode::Local;
            if model.bound_mode == BoundMode::Collective {
                let a = assemble(&model).map_err(&ctx)?;
                let terms: Vec<CMat> = (0..volume.n_sites())
                    .map(|x| model.embedded_phi_r(x).expect("phi_r present").to_dense())
                    .collect();
                report.collective_min_eig = Some(wcond_audit(&terms, &a.h0.to_dense(), model.alpha).worst_min_eig);
            }
        }
    }
    let mut failures = vec![];
    if let Err(e) = model.validate() {
        failures.push(e.to_string());
    }
    if failures.is_empty() && volume.space_dim() <= SPECTRUM_MAX_DIM {
        let h = assemble(&model).map_err(&ctx)?.h;
        report.spectrum = Some(spectral_report(&h).map_err(&ctx)?);
    }
    let mut verdict = Verdict::from_failures(failures);
    if infeasible {
        verdict.status = Status::Infeasible;
        verdict.flags.push("infeasible".into());
    }
    Ok((TaskReport::ModelCheck(report), verdict))
}

fn expand(spec: &TaskSpec) -> Result<(TaskReport, Verdict)> {
    let model = checked_model(spec)?;
    let n = spec.n.expect("validated");
    let report = log_partition_series(&model, n, spec.max_support).map_err(core_ctx(spec.task))?;
    let mut failures = vec![];
    for row in &report.rows {
        if row.ok == Some(false) {
            failures.push(format!(
                "|a1 + a2 N - ln Z| = {:.3e} exceeds the truncation bound {:.3e} at N = {}",
                (row.linear - row.exact.unwrap_or(f64::NAN)).abs(),
                row.bound,
                row.n
            ));
        }
    }
    for s in report.sizes.iter().filter(|s| !s.ok) {
        failures.push(format!(
            "polymer weight {:.3e} exceeds eps^n = {:.3e} at size {}",
            s.max_weight, s.bound, s.size
        ));
    }
    if report.imag_residual > IMAG_TOL {
        failures.push(format!("imaginary part {:.3e} in a1, a2", report.imag_residual));
    }
    let mut verdict = Verdict::from_failures(failures);
    if !report.convergent {
        verdict.status = Status::NonConvergent;
        verdict.flags.push("non-convergent".into());
        verdict.failures.push(format!(
            "no convergence certificate (empirical epsilon {:.6}, counting constant {:.6})",
            report.epsilon, report.counting_constant
        ));
    }
    Ok((TaskReport::Expand(report), verdict))
}

fn aklt_verify_task(spec: &TaskSpec) -> Result<(TaskReport, Verdict)> {
    let mut opts = VerifyOptions::new(spec.l.expect("validated"), spec.n_blocks.expect("validated"));
    opts.seed = spec.seed;
    opts.gap_n_max = GAP_N_MAX;
    let report = aklt_verify(&opts).map_err(core_ctx(spec.task))?;
    let verdict = Verdict::from_failures(report.failures.clone());
    Ok((TaskReport::AkltVerify(Box::new(report)), verdict))
}

fn aklt_split_task(spec: &TaskSpec) -> Result<(TaskReport, Verdict)> {
    let ctx = core_ctx(spec.task);
    let (l, nb) = (spec.l.expect("validated"), spec.n_blocks.expect("validated"));
    let (gamma_hat, gaps_free) = gamma_sequence(GAP_N_MAX).map_err(&ctx)?;
    let split = aklt_blocked_split(l, nb, gamma_hat, Completion::Canonical, spec.seed).map_err(&ctx)?;
    let (beta_sweep, beta_fit) = beta_sweep(&BETA_SWEEP_LS).map_err(&ctx)?;
    let mut failures = split.failures();
    for w in beta_sweep.windows(2) {
        if w[1].beta >= w[0].beta {
            failures.push(format!("beta_est not decreasing from l = {} to l = {}", w[0].l, w[1].l));
        }
    }
    let report = SplitTaskReport {
        gamma_hat,
        gaps_free,
        split,
        beta_sweep,
        beta_fit,
    };
    Ok((TaskReport::AkltSplit(Box::new(report)), Verdict::from_failures(failures)))
}

fn correlate_task(spec: &TaskSpec) -> Result<(TaskReport, Verdict)> {
    let model = checked_model(spec)?;
    let report = correlate(
        &model,
        spec.a1.as_deref().expect("validated"),
        spec.a2.as_deref().expect("validated"),
    )?;
    Ok((TaskReport::Correlate(report), Verdict::from_failures(vec![])))
}

fn dispatch(spec: &TaskSpec) -> Result<(TaskReport, Verdict)> {
    match spec.task {
        TaskKind::ModelCheck => model_check(spec),
        TaskKind::Expand => expand(spec),
        TaskKind::AkltVerify => aklt_verify_task(spec),
        TaskKind::AkltSplit => aklt_split_task(spec),
        TaskKind::Correlate => correlate_task(spec),
    }
}

/// Runs the task without touching the filesystem.
pub fn evaluate(spec: &TaskSpec) -> RunOutcome {
    let (report, verdict) = match dispatch(spec) {
        Ok((r, v)) => (Some(r), v),
        Err(e) => {
            let status = Status::of_error(&e);
            let flags = match status {
                Status::NonConvergent => vec!["non-convergent".into()],
                Status::CapExceeded => vec!["cap-exceeded".into()],
                _ => vec![],
            };
            (
                None,
                Verdict {
                    status,
                    flags,
                    failures: vec![e.to_string()],
                },
            )
        }
    };
    let mut tables = vec![];
    if let Some(r) = &report {
        for kind in available_kinds(r) {
            if let Ok(t) = emit_plot_data(r, kind) {
                tables.push((kind, t));
            }
        }
    }
    let summary = Summary {
        task: spec.task,
        status: verdict.status,
        exit_code: verdict.status.exit_code(),
        flags: &verdict.flags,
        failures: &verdict.failures,
        spec,
        report: report.as_ref(),
    };
    let summary_json = to_json(&summary).unwrap_or_else(|e| {
        format!(
            "{{\"task\":\"{}\",\"status\":\"input-error\",\"exit_code\":4,\"failures\":[\"{}\"]}}\n",
            spec.task,
            e.to_string().replace('\\', "\\\\").replace('"', "\\\"")
        )
    });
    RunOutcome {
        status: verdict.status,
        flags: verdict.flags,
        failures: verdict.failures,
        report,
        summary_json,
        tables,
    }
}

pub const SUMMARY_FILE: &str = "summary.json";

/// Writes `summary.json` and one CSV per available plot kind into `dir`.
pub fn write_outcome(outcome: &RunOutcome, dir: &Path) -> Result<()> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CliError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let summary = dir.join(SUMMARY_FILE);
    fs::write(&summary, &outcome.summary_json).map_err(io(&summary))?;
    for (kind, table) in &outcome.tables {
        let path = dir.join(format!("{}.csv", kind.name()));
        fs::write(&path, table.to_csv()).map_err(io(&path))?;
    }
    Ok(())
}

/// Runs the task and persists its artifacts into `spec.out`.
pub fn run_task(spec: &TaskSpec) -> Result<RunOutcome> {
    let outcome = evaluate(spec);
    write_outcome(&outcome, &spec.out)?;
    Ok(outcome)
}
