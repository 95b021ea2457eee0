use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use framelab::constructors::{self, Seed};
use framelab::io;
use framelab::measures;
use framelab::optimize::{self, Manifold, ObjectiveKind, OptimizerConfig, Status};
use framelab::verify::{self, Instance, SuiteConfig, VerifyReport};
use framelab::{Frame, ScalarField, SubsetSelector};

use crate::args::*;
use crate::manifest::{sidecar_path, RunManifest};
use crate::{CliError, CliResult};

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn read_frame(path: &Path) -> CliResult<Frame> {
    Ok(io::frame_from_json(&read_text(path)?)?)
}

/// Writes to `out` (plus its manifest) or to stdout.
fn emit(out: Option<&Path>, text: &str, mut manifest: RunManifest) -> CliResult<()> {
    match out {
        Some(p) => {
            write_text(p, text)?;
            manifest.output(p);
            write_text(&sidecar_path(p), &io::to_json(&manifest)?)
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn resolve_seed(seed: Option<u64>, deterministic: bool) -> CliResult<u64> {
    match seed {
        Some(s) => Ok(s),
        None if deterministic => Err(CliError::Usage("--seed is required with --deterministic".into())),
        None => Ok(SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_nanos() as u64)
            .unwrap_or(0)),
    }
}

fn need(v: Option<usize>, flag: &str, kind: &str) -> CliResult<usize> {
    v.ok_or_else(|| CliError::Usage(format!("{kind} needs --{flag}")))
}

pub fn analyze(a: &AnalyzeArgs, det: bool) -> CliResult<()> {
    let frame = read_frame(&a.input)?;
    let k_list: Vec<usize> = if a.k.is_empty() {
        [1, 2].into_iter().filter(|&k| k <= frame.n_vecs()).collect()
    } else {
        a.k.clone()
    };
    let report = measures::analyze(&frame, &k_list)?;
    let mut manifest = RunManifest::new("analyze", a, None, det);
    manifest.input(&a.input);
    if let Some(csv) = &a.csv {
        write_text(csv, &io::analysis_csv(&report)?)?;
        manifest.output(csv);
    }
    emit(a.out.as_deref(), &io::to_json(&report)?, manifest)
}

pub fn construct(a: &ConstructArgs, det: bool) -> CliResult<()> {
    let field = ScalarField::from(a.field);
    let kind = format!("{:?}", a.kind);
    let mut seed = None;
    let frame = match a.kind {
        ConstructKind::OnbPadded => constructors::onb_padded(need(a.m, "m", &kind)?, need(a.n, "n", &kind)?, field)?,
        ConstructKind::Simplex => constructors::simplex_etf(need(a.n, "n", &kind)?)?,
        ConstructKind::Harmonic => {
            let m = need(a.m, "m", &kind)?;
            if a.rows.is_empty() {
                return Err(CliError::Usage("harmonic needs --rows".into()));
            }
            let mut rows = a.rows.clone();
            rows.sort_unstable();
            rows.dedup();
            constructors::harmonic_frame(m, &SubsetSelector::new(m, rows)?)?
        }
        ConstructKind::Offset42 => constructors::offset_bases_4_2(),
        ConstructKind::MercedesBenz => constructors::mercedes_benz(),
        ConstructKind::RandomParseval | ConstructKind::RandomEqualNorm => {
            let s = resolve_seed(a.seed, det)?;
            seed = Some(s);
            let (m, n) = (need(a.m, "m", &kind)?, need(a.n, "n", &kind)?);
            if a.kind == ConstructKind::RandomParseval {
                constructors::random_parseval(m, n, field, Seed(s))?
            } else {
                constructors::random_equal_norm(m, n, field, Seed(s))?
            }
        }
    };
    emit(
        a.out.as_deref(),
        &io::frame_to_json(&frame),
        RunManifest::new("construct", a, seed, det),
    )
}

pub fn complement(a: &ComplementArgs, det: bool) -> CliResult<()> {
    let frame = read_frame(&a.input)?;
    let psi = constructors::naimark_complement(&frame)?;
    let mut manifest = RunManifest::new("complement", a, None, det);
    manifest.input(&a.input);
    emit(a.out.as_deref(), &io::frame_to_json(&psi), manifest)
}

#[derive(Serialize)]
struct RunSummary {
    seed: u64,
    status: Status,
    stage_status: Vec<Status>,
    iterations: usize,
    final_true: f64,
    best_true: f64,
    trace: String,
}

#[derive(Serialize)]
struct OptimizeSummary {
    schema: u32,
    objective: ObjectiveKind,
    m: usize,
    n: usize,
    field: ScalarField,
    manifold: Manifold,
    config: OptimizerConfig,
    best_seed: u64,
    best_true: f64,
    bound: Option<f64>,
    gap_to_bound: Option<f64>,
    best_frame: String,
    best_frame_diagnostics: measures::Diagnostics,
    runs: Vec<RunSummary>,
}

pub fn optimize(a: &OptimizeArgs, det: bool) -> CliResult<()> {
    let kind = a.objective.with_k(a.k).map_err(CliError::Usage)?;
    kind.validate(a.n, a.m)?;
    if a.seeds == 0 {
        return Err(CliError::Usage("--seeds must be at least 1".into()));
    }
    let base = resolve_seed(a.seed, det)?;
    let field = ScalarField::from(a.field);
    let manifold = Manifold::from(a.manifold);
    let mut config = OptimizerConfig {
        manifold,
        max_iters: a.max_iters,
        grad_tol: a.grad_tol,
        deterministic: det,
        ..OptimizerConfig::default()
    };
    if !a.eps_schedule.is_empty() {
        config.eps_schedule = a.eps_schedule.clone();
    }
    config.seed = Seed(base);
    config.validate().map_err(|e| CliError::Usage(e.to_string()))?;

    let seeds: Vec<Seed> = (0..a.seeds).map(|i| Seed(base.wrapping_add(i))).collect();
    let runs = optimize::maximize_multistart(a.m, a.n, field, kind, &config, &seeds)?;
    let best = optimize::best_run(&runs).expect("at least one run");

    fs::create_dir_all(&a.out_dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", a.out_dir.display())))?;
    let mut manifest = RunManifest::new("optimize", a, Some(base), det);
    let mut run_summaries = Vec::new();
    for r in &runs {
        let name = format!("trace_seed_{}.csv", r.seed.0);
        let path = a.out_dir.join(&name);
        write_text(&path, &io::trace_csv(&r.trace.records)?)?;
        manifest.output(&path);
        run_summaries.push(RunSummary {
            seed: r.seed.0,
            status: r.trace.status,
            stage_status: r.trace.stage_status.clone(),
            iterations: r.trace.records.len(),
            final_true: r.trace.final_true,
            best_true: r.trace.best_true,
            trace: name,
        });
    }
    let best_trace = &runs[best].trace;
    let best_path = a.out_dir.join("best_frame.json");
    write_text(&best_path, &io::frame_to_json(&best_trace.best_frame))?;
    manifest.output(&best_path);

    let bound = optimize::objective_upper_bound(kind, manifold, a.m, a.n);
    let summary = OptimizeSummary {
        schema: measures::REPORT_SCHEMA,
        objective: kind,
        m: a.m,
        n: a.n,
        field,
        manifold,
        config,
        best_seed: runs[best].seed.0,
        best_true: best_trace.best_true,
        bound,
        gap_to_bound: bound.map(|b| b - best_trace.best_true),
        best_frame: "best_frame.json".into(),
        best_frame_diagnostics: measures::diagnostics(&best_trace.best_frame),
        runs: run_summaries,
    };
    let summary_path = a.out_dir.join("summary.json");
    write_text(&summary_path, &io::to_json(&summary)?)?;
    manifest.output(&summary_path);
    write_text(&a.out_dir.join("manifest.json"), &io::to_json(&manifest)?)?;
    eprintln!(
        "best {} = {:.12} (seed {})",
        kind.name(),
        best_trace.best_true,
        runs[best].seed.0
    );
    Ok(())
}

pub fn verify(a: &VerifyArgs, det: bool) -> CliResult<()> {
    if a.list {
        print!("{}", verify::registry_markdown());
        return Ok(());
    }
    let mut manifest;
    let report: VerifyReport = match &a.frame {
        Some(path) => {
            let frame = read_frame(path)?;
            let config = SuiteConfig {
                m_list: vec![frame.n_vecs()],
                n_list: vec![frame.n_dim()],
                k_list: a.k_list.clone(),
                trials: 0,
                seed: 0,
                checks: a.checks.clone(),
            };
            let inst = Instance {
                label: path.display().to_string(),
                frame,
            };
            manifest = RunManifest::new("verify", a, None, det);
            manifest.input(path);
            VerifyReport::from_results(&config, verify::run_on_instances(&[inst], &config)?)
        }
        None => {
            let seed = resolve_seed(a.seed, det)?;
            let config = SuiteConfig {
                m_list: a.m_list.clone(),
                n_list: a.n_list.clone(),
                k_list: a.k_list.clone(),
                trials: a.trials,
                seed,
                checks: a.checks.clone(),
            };
            manifest = RunManifest::new("verify", a, Some(seed), det);
            verify::run_suite(&config)?
        }
    };
    if let Some(j) = &a.junit {
        write_text(j, &io::junit_xml(&report))?;
        manifest.output(j);
    }
    let s = report.summary;
    eprintln!(
        "{} checks: {} passed, {} failed, {} skipped",
        s.total, s.passed, s.failed, s.skipped
    );
    emit(a.out.as_deref(), &io::to_json(&report)?, manifest)?;
    if s.failed > 0 {
        return Err(CliError::ChecksFailed(s.failed));
    }
    Ok(())
}

#[derive(Serialize)]
struct GradcheckOutput {
    objective: ObjectiveKind,
    eps: f64,
    h: f64,
    seed: Option<u64>,
    frame: Option<PathBuf>,
    rel_error: f64,
}

pub fn gradcheck(a: &GradcheckArgs, det: bool) -> CliResult<()> {
    let kind = a.objective.with_k(a.k).map_err(CliError::Usage)?;
    let (frame, seed) = match &a.frame {
        Some(p) => (read_frame(p)?, None),
        None => {
            let s = resolve_seed(a.seed, det)?;
            (
                optimize::random_start(a.m, a.n, a.field.into(), a.manifold.into(), Seed(s))?,
                Some(s),
            )
        }
    };
    let obj = optimize::Objective::new(kind, a.eps).map_err(|e| CliError::Usage(e.to_string()))?;
    let rel_error = optimize::gradcheck(&frame, &obj, a.h)?;
    let out = GradcheckOutput {
        objective: kind,
        eps: a.eps,
        h: a.h,
        seed,
        frame: a.frame.clone(),
        rel_error,
    };
    print!("{}", io::to_json(&out)?);
    Ok(())
}
