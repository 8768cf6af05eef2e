use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use copfrac::bounds::{prhr_envelope, split_kernel_envelope};
use copfrac::orderings::run_suite;
use copfrac::{ccfi_frechet_bounds, FractionalOrder, IntegralResult, IntegrationConfig, Job, Record};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::output::{self, fmt_f64, Row};
use crate::schema::{build_job, FieldError, Format, JobFile};
use crate::sweep::{self, Axis, Trend};

#[derive(Debug)]
pub enum CliError {
    /// Malformed input; exit 2.
    Validation(Vec<String>),
    /// Integration or divergence failure; exit 3.
    Numerical(String),
    /// Verification ran and an asserted proposition failed; exit 1.
    Failed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    fn validation(msg: impl fmt::Display) -> Self {
        CliError::Validation(vec![msg.to_string()])
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(msgs) => {
                for (i, m) in msgs.iter().enumerate() {
                    if i > 0 {
                        writeln!(f)?;
                    }
                    write!(f, "error: {m}")?;
                }
                Ok(())
            }
            CliError::Numerical(m) => write!(f, "error: {m}"),
            CliError::Failed(n) => write!(f, "{n} asserted comparison(s) failed"),
        }
    }
}

impl From<FieldError> for CliError {
    fn from(e: FieldError) -> Self {
        if e.numerical {
            CliError::Numerical(e.to_string())
        } else {
            CliError::validation(e)
        }
    }
}

/// Output overrides from the command line.
#[derive(Debug, Clone, Default)]
pub struct OutputArgs {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
    pub no_timing: bool,
}

fn load(path: &Path) -> Result<JobFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::validation(format!("cannot read {}: {e}", path.display())))?;
    Ok(JobFile::parse(&text)?)
}

/// Collects every validation failure before reporting; numerical failures
/// found during validation (provable divergence) take exit code 3 only when
/// nothing else is wrong.
fn collect<T>(items: Vec<Result<T, FieldError>>) -> Result<Vec<T>, CliError> {
    let (ok, errs): (Vec<_>, Vec<_>) = items.into_iter().partition(Result::is_ok);
    if errs.is_empty() {
        return Ok(ok.into_iter().map(Result::unwrap).collect());
    }
    let errs: Vec<FieldError> = errs.into_iter().map(|e| e.err().unwrap()).collect();
    if errs.iter().all(|e| e.numerical) {
        return Err(CliError::Numerical(errs[0].to_string()));
    }
    Err(CliError::Validation(errs.iter().filter(|e| !e.numerical).map(|e| e.to_string()).collect()))
}

struct Task {
    label: String,
    job: Job,
}

fn evaluate(tasks: &[Task], no_timing: bool) -> Result<Vec<(IntegralResult, f64)>, CliError> {
    let results: Vec<_> = tasks
        .par_iter()
        .map(|t| {
            let start = Instant::now();
            let r = t.job.evaluate();
            let ms = if no_timing { 0.0 } else { start.elapsed().as_secs_f64() * 1e3 };
            r.map(|r| (r, ms))
        })
        .collect();
    results
        .into_iter()
        .zip(tasks)
        .map(|(r, t)| {
            r.map_err(|e| {
                let msg = format!("{}: {e}", t.label);
                if e.is_numerical() {
                    CliError::Numerical(msg)
                } else {
                    CliError::validation(msg)
                }
            })
        })
        .collect()
}

fn emit(file: &JobFile, args: &OutputArgs, rows: &[Row]) -> Result<(), CliError> {
    let spec = file.output.as_ref();
    let format = args.format.or(spec.and_then(|o| o.format)).unwrap_or(Format::Csv);
    let path = args.path.clone().or_else(|| spec.and_then(|o| o.path.clone()).map(PathBuf::from));
    let io_err = |e: std::io::Error| CliError::validation(format!("cannot write output: {e}"));
    let out = output::open(path.as_deref()).map_err(io_err)?;
    output::write_rows(out, format, rows).map_err(io_err)
}

pub fn measure(path: &Path, args: &OutputArgs) -> Result<(), CliError> {
    let file = load(path)?;
    if file.sweep.is_some() {
        return Err(CliError::validation("sweep: this file declares a sweep; run `copfrac sweep`"));
    }
    let jobs = collect(
        file.jobs
            .iter()
            .enumerate()
            .map(|(i, v)| build_job(v, &format!("jobs[{i}]")))
            .collect(),
    )?;
    let tasks: Vec<Task> = jobs
        .into_iter()
        .enumerate()
        .map(|(i, job)| Task {
            label: format!("job {i}"),
            job,
        })
        .collect();
    let results = evaluate(&tasks, args.no_timing)?;
    let rows: Vec<Row> = tasks
        .iter()
        .zip(results)
        .enumerate()
        .map(|(i, (t, (result, ms)))| Row {
            job: Some(i),
            kind: Some(t.job.kind().name()),
            swept: Vec::new(),
            result,
            wall_time_ms: ms,
        })
        .collect();
    emit(&file, args, &rows)
}

fn cell_label(axes: &[Axis], cell: &[usize]) -> String {
    axes.iter()
        .zip(cell)
        .map(|(a, &j)| format!("{}={}", a.path, a.values[j]))
        .collect::<Vec<_>>()
        .join(", ")
}

pub fn sweep(path: &Path, args: &OutputArgs) -> Result<(), CliError> {
    let file = load(path)?;
    let spec = file
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::validation("sweep: missing sweep block; use `copfrac measure` for plain jobs"))?;
    let axes = sweep::axes(spec)?;
    let cells = sweep::grid(&axes);

    let mut built = Vec::new();
    for (i, raw) in file.jobs.iter().enumerate() {
        for cell in &cells {
            let label = cell_label(&axes, cell);
            let mut v = raw.clone();
            let applied = axes.iter().zip(cell).enumerate().try_for_each(|(k, (a, &j))| {
                a.apply(&mut v, &a.values[j])
                    .map_err(|m| FieldError::new(format!("sweep[{k}].path"), format!("jobs[{i}]: {m}")))
            });
            built.push(applied.and_then(|_| build_job(&v, &format!("jobs[{i}]"))).map_err(|e| FieldError {
                message: format!("{} (sweep cell {label})", e.message),
                ..e
            }));
        }
    }
    let jobs = collect(built)?;
    let multi = file.jobs.len() > 1;
    let tasks: Vec<Task> = jobs
        .into_iter()
        .enumerate()
        .map(|(n, job)| Task {
            label: format!("job {}, sweep cell {}", n / cells.len(), cell_label(&axes, &cells[n % cells.len()])),
            job,
        })
        .collect();
    let results = evaluate(&tasks, args.no_timing)?;

    let rows: Vec<Row> = results
        .iter()
        .enumerate()
        .map(|(n, &(result, ms))| Row {
            job: multi.then_some(n / cells.len()),
            kind: None,
            swept: axes
                .iter()
                .zip(&cells[n % cells.len()])
                .map(|(a, &j)| (a.path.clone(), a.values[j].clone()))
                .collect(),
            result,
            wall_time_ms: ms,
        })
        .collect();
    emit(&file, args, &rows)?;

    for (i, chunk) in results.chunks(cells.len()).enumerate() {
        let values: Vec<f64> = chunk.iter().map(|(r, _)| r.value).collect();
        for (a, lines) in axes.iter().zip(sweep::trends(&axes, &values)) {
            if a.values.len() < 2 {
                continue;
            }
            eprintln!("trend: job {i} ({}), value along {}: {}", tasks[i * cells.len()].job.kind(), a.path, summarize(&lines));
        }
    }
    Ok(())
}

fn summarize(lines: &[Trend]) -> String {
    let total = lines.len();
    let parts: Vec<String> = [Trend::Nondecreasing, Trend::Nonincreasing, Trend::Constant, Trend::Mixed]
        .into_iter()
        .filter_map(|t| {
            let n = lines.iter().filter(|&&l| l == t).count();
            (n > 0).then(|| format!("{} on {n} of {total} lines", t.name()))
        })
        .collect();
    parts.join(", ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ReportFormat {
    Text,
    Json,
}

pub fn bounds(eta: f64, gamma: f64, delta: f64, format: ReportFormat) -> Result<(), CliError> {
    let order = FractionalOrder::new(eta).map_err(|e| CliError::validation(format!("--eta: {e}")))?;
    let closed = ccfi_frechet_bounds(order, gamma, delta).map_err(CliError::validation)?;
    if gamma == 1.0 && delta == 1.0 {
        eprintln!("warning: gamma = delta = 1 makes the PRHR reference margins equal to the truth margins");
    }
    let cfg = IntegrationConfig::default();
    let numerical = |e: copfrac::Error| CliError::Numerical(e.to_string());
    let split = split_kernel_envelope(order, gamma, delta, &cfg).map_err(numerical)?;
    let full = prhr_envelope(order, gamma, delta, &cfg).map_err(numerical)?;
    let rows = [
        ("w_side", closed.w_side, split.w.value, full.w.value),
        ("m_side", closed.m_side, split.m.value, full.m.value),
    ];
    match format {
        ReportFormat::Text => {
            println!("{:<8} {:<22} {:<22} {:<10} {:<22} {:<10}", "bound", "closed_form", "split_kernel_quad", "diff", "true_kernel_quad", "diff");
            for (name, c, s, t) in rows {
                println!(
                    "{name:<8} {:<22} {:<22} {:<10.3e} {:<22} {:<10.3e}",
                    fmt_f64(c),
                    fmt_f64(s),
                    (c - s).abs(),
                    fmt_f64(t),
                    (c - t).abs()
                );
            }
        }
        ReportFormat::Json => {
            let mut m = serde_json::Map::new();
            m.insert("eta".into(), eta.into());
            m.insert("gamma".into(), gamma.into());
            m.insert("delta".into(), delta.into());
            for (name, c, s, t) in rows {
                m.insert(
                    name.into(),
                    json!({"closed_form": c, "split_kernel_quadrature": s, "split_kernel_diff": (c - s).abs(),
                           "true_kernel_quadrature": t, "true_kernel_diff": (c - t).abs()}),
                );
            }
            println!("{}", Value::Object(m));
        }
    }
    eprintln!("note: the closed forms split the kernel additively; the split is exact only as eta -> 1");
    Ok(())
}

fn status(r: &Record) -> &'static str {
    match r.pass {
        Some(true) => "PASS",
        Some(false) => "FAIL",
        None if !r.hypotheses_ok => "UNMET",
        None => "PROBE",
    }
}

pub fn verify(filter: Option<&str>, tol: f64, format: ReportFormat, no_timing: bool) -> Result<(), CliError> {
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(CliError::validation(format!("--tolerance must be a non-negative number, got {tol}")));
    }
    let start = Instant::now();
    let records = run_suite(filter, tol).map_err(|e| {
        if matches!(e, copfrac::Error::Parameter(_)) {
            CliError::validation(e)
        } else {
            CliError::Numerical(e.to_string())
        }
    })?;
    let elapsed = start.elapsed();
    for r in &records {
        match format {
            ReportFormat::Text => {
                let note = if r.note.is_empty() { String::new() } else { format!("  # {}", r.note) };
                println!(
                    "{:<5} {:<14} {} [lhs {} rhs {} gap {:.3e}] ({}){note}",
                    status(r),
                    r.id,
                    r.statement,
                    fmt_f64(r.lhs),
                    fmt_f64(r.rhs),
                    r.gap,
                    r.scenario
                );
            }
            ReportFormat::Json => {
                let v = json!({
                    "id": r.id, "status": status(r), "scenario": r.scenario, "statement": r.statement,
                    "relation": r.relation.symbol(), "hypotheses_ok": r.hypotheses_ok, "lhs": r.lhs,
                    "rhs": r.rhs, "gap": r.gap, "holds": r.holds, "pass": r.pass, "note": r.note,
                });
                println!("{v}");
            }
        }
    }
    let count = |s: &str| records.iter().filter(|r| status(r) == s).count();
    let failed = count("FAIL");
    let timing = if no_timing { String::new() } else { format!(" in {:.2} s", elapsed.as_secs_f64()) };
    eprintln!(
        "{} records: {} pass, {failed} fail, {} probe, {} unmet{timing}",
        records.len(),
        count("PASS"),
        count("PROBE"),
        count("UNMET")
    );
    if failed > 0 {
        Err(CliError::Failed(failed))
    } else {
        Ok(())
    }
}
