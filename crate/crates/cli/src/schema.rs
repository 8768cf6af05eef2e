//! Job-file schema and its conversion into core jobs.
//!
//! Jobs are kept as raw JSON until sweep substitution has happened, then
//! deserialized and validated. Every diagnostic names the offending field
//! path, e.g. `jobs[0].truth.copula.theta: gumbel requires theta >= 1`.

use std::fmt;

use copfrac::integrate::NodeMapping;
use copfrac::{
    CopulaSpec, Family, FractionalOrder, IntegrationConfig, Job, JointModel, Margin, MeasureJob,
    MeasureKind, Method, UnivariateJob,
};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::Value;

pub const SCHEMA_VERSION: u64 = 1;

/// A validation failure located at a field path.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldError {
    pub path: String,
    pub message: String,
    /// Raised by a numerical check (e.g. a provably divergent integral)
    /// rather than by a malformed value.
    pub numerical: bool,
}

impl FieldError {
    pub fn new(path: impl Into<String>, message: impl fmt::Display) -> Self {
        Self {
            path: path.into(),
            message: message.to_string(),
            numerical: false,
        }
    }

    fn core(path: impl Into<String>, e: copfrac::Error) -> Self {
        Self {
            numerical: e.is_numerical(),
            ..Self::new(path, e)
        }
    }
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            f.write_str(&self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

type Checked<T> = Result<T, FieldError>;

fn join(base: &str, field: &str) -> String {
    if base.is_empty() {
        field.to_string()
    } else if field.starts_with('[') {
        format!("{base}{field}")
    } else {
        format!("{base}.{field}")
    }
}

/// Deserializes `value`, reporting the failing field relative to `base`.
pub fn from_value<T: DeserializeOwned>(value: &Value, base: &str) -> Checked<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let inner = e.path().to_string();
        let path = if inner == "." { base.to_string() } else { join(base, &inner) };
        FieldError::new(path, e.into_inner())
    })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobFile {
    pub schema_version: u64,
    pub jobs: Vec<Value>,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub output: Option<OutputSpec>,
}

impl JobFile {
    pub fn parse(text: &str) -> Checked<Self> {
        let raw: Value = serde_json::from_str(text).map_err(|e| FieldError::new("", format!("invalid JSON: {e}")))?;
        let file: JobFile = from_value(&raw, "")?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(FieldError::new(
                "schema_version",
                format!("unsupported schema version {}, expected {SCHEMA_VERSION}", file.schema_version),
            ));
        }
        if file.jobs.is_empty() {
            return Err(FieldError::new("jobs", "at least one job is required"));
        }
        Ok(file)
    }
}

/// One sweep axis, or several forming a Cartesian grid.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum SweepSpec {
    Axes(Vec<AxisSpec>),
    Axis(AxisSpec),
}

impl SweepSpec {
    pub fn axes(&self) -> Vec<&AxisSpec> {
        match self {
            SweepSpec::Axes(a) => a.iter().collect(),
            SweepSpec::Axis(a) => vec![a],
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    /// Field path inside each job, e.g. `truth.copula.theta` or
    /// `reference.margins[0].rate`.
    pub path: String,
    #[serde(default)]
    pub values: Option<Vec<Value>>,
    #[serde(default)]
    pub from: Option<f64>,
    #[serde(default)]
    pub to: Option<f64>,
    #[serde(default)]
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub format: Option<Format>,
    #[serde(default)]
    pub path: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct JobDto {
    kind: String,
    eta: f64,
    truth: ModelDto,
    #[serde(default)]
    reference: Option<ModelDto>,
    #[serde(default)]
    integration: Option<IntegrationDto>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDto {
    #[serde(default)]
    copula: Option<CopulaDto>,
    #[serde(default)]
    survival_copula: Option<CopulaDto>,
    #[serde(default)]
    margins: Option<Vec<Value>>,
    /// Univariate jobs only.
    #[serde(default)]
    margin: Option<Value>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CopulaDto {
    family: String,
    #[serde(default)]
    theta: Option<f64>,
    #[serde(default)]
    dim: Option<usize>,
}

// Margins are decoded in two steps (tag, then body) rather than as an
// internally tagged enum, which would lose field paths inside the body.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExponentialDto {
    rate: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct UniformDto {
    low: f64,
    high: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TransformDto {
    base: Value,
    gamma: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct IntegrationDto {
    #[serde(default)]
    method: Option<String>,
    #[serde(default)]
    nodes: Option<usize>,
    #[serde(default)]
    samples: Option<u64>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    mapping: Option<String>,
    #[serde(default)]
    clamp_epsilon: Option<f64>,
    #[serde(default)]
    rel_tolerance: Option<f64>,
}

/// Validates one job given as raw JSON at field path `base`.
pub fn build_job(value: &Value, base: &str) -> Checked<Job> {
    let dto: JobDto = from_value(value, base)?;
    let kind: MeasureKind = dto.kind.parse().map_err(|e| FieldError::new(join(base, "kind"), e))?;
    let eta = FractionalOrder::new(dto.eta).map_err(|e| FieldError::new(join(base, "eta"), e))?;

    if kind.is_univariate() {
        let truth = univariate_margin(&dto.truth, &join(base, "truth"))?;
        let reference_dto = dto
            .reference
            .as_ref()
            .ok_or_else(|| FieldError::new(join(base, "reference"), format!("{kind} requires a reference")))?;
        let reference = univariate_margin(reference_dto, &join(base, "reference"))?;
        let cfg = integration(dto.integration.as_ref(), 1, &join(base, "integration"))?;
        return UnivariateJob::new(kind, truth, reference, eta, cfg)
            .map(Job::from)
            .map_err(|e| FieldError::core(base, e));
    }

    let truth = joint_model(&dto.truth, &join(base, "truth"))?;
    let cfg = integration(dto.integration.as_ref(), truth.dim(), &join(base, "integration"))?;
    let job = match (&dto.reference, kind.is_entropy()) {
        (None, true) => MeasureJob::entropy(kind, truth, eta, cfg),
        (Some(r), _) => {
            let reference = joint_model(r, &join(base, "reference"))?;
            MeasureJob::new(kind, truth, reference, eta, cfg)
        }
        (None, false) => {
            return Err(FieldError::new(join(base, "reference"), format!("{kind} requires a reference model")));
        }
    };
    job.map(Job::from).map_err(|e| FieldError::core(base, e))
}

fn univariate_margin(dto: &ModelDto, base: &str) -> Checked<Margin> {
    for (field, present) in [
        ("copula", dto.copula.is_some()),
        ("survival_copula", dto.survival_copula.is_some()),
        ("margins", dto.margins.is_some()),
    ] {
        if present {
            return Err(FieldError::new(join(base, field), "univariate jobs take a single `margin`"));
        }
    }
    let m = dto
        .margin
        .as_ref()
        .ok_or_else(|| FieldError::new(join(base, "margin"), "missing field `margin`"))?;
    margin(m, &join(base, "margin"))
}

fn joint_model(dto: &ModelDto, base: &str) -> Checked<JointModel> {
    if dto.margin.is_some() {
        return Err(FieldError::new(join(base, "margin"), "joint jobs take a `margins` list"));
    }
    let margins_dto = dto
        .margins
        .as_ref()
        .ok_or_else(|| FieldError::new(join(base, "margins"), "missing field `margins`"))?;
    let margins = margins_dto
        .iter()
        .enumerate()
        .map(|(i, m)| margin(m, &join(base, &format!("margins[{i}]"))))
        .collect::<Checked<Vec<_>>>()?;
    let copula_dto = dto
        .copula
        .as_ref()
        .ok_or_else(|| FieldError::new(join(base, "copula"), "missing field `copula`"))?;
    let copula = copula(copula_dto, margins.len(), &join(base, "copula"))?;
    let model = JointModel::new(copula, margins).map_err(|e| FieldError::new(join(base, "margins"), e))?;
    match &dto.survival_copula {
        None => Ok(model),
        Some(s) => {
            let path = join(base, "survival_copula");
            let s = self::copula(s, model.dim(), &path)?;
            model.with_survival_copula(s).map_err(|e| FieldError::new(path, e))
        }
    }
}

fn copula(dto: &CopulaDto, default_dim: usize, base: &str) -> Checked<CopulaSpec> {
    let family: Family = dto.family.parse().map_err(|e| FieldError::new(join(base, "family"), e))?;
    let theta = match (family.has_theta(), dto.theta) {
        (true, Some(t)) => t,
        (true, None) => return Err(FieldError::new(join(base, "theta"), format!("{family} requires theta"))),
        (false, t) => t.unwrap_or(0.0),
    };
    let dim = dto.dim.unwrap_or(default_dim);
    CopulaSpec::new(family, theta, dim).map_err(|e| {
        let field = if matches!(e, copfrac::Error::Parameter(ref m) if m.contains("theta")) {
            "theta"
        } else {
            "dim"
        };
        FieldError::new(join(base, field), e)
    })
}

fn margin(value: &Value, base: &str) -> Checked<Margin> {
    let mut body = value
        .as_object()
        .cloned()
        .ok_or_else(|| FieldError::new(base, "expected a margin object"))?;
    let family = match body.remove("family") {
        Some(Value::String(f)) => f,
        Some(_) => return Err(FieldError::new(join(base, "family"), "expected a string")),
        None => return Err(FieldError::new(base, "missing field `family`")),
    };
    let body = Value::Object(body);
    let (result, field) = match family.as_str() {
        "exponential" => {
            let d: ExponentialDto = from_value(&body, base)?;
            (Margin::exponential(d.rate), "rate")
        }
        "uniform" => {
            let d: UniformDto = from_value(&body, base)?;
            (Margin::uniform(d.low, d.high), "high")
        }
        "prhr" | "phr" => {
            let d: TransformDto = from_value(&body, base)?;
            let inner = margin(&d.base, &join(base, "base"))?;
            let m = if family == "prhr" {
                Margin::prhr(inner, d.gamma)
            } else {
                Margin::phr(inner, d.gamma)
            };
            (m, "gamma")
        }
        other => {
            return Err(FieldError::new(
                join(base, "family"),
                format!("unknown margin family {other:?} (expected exponential, uniform, prhr or phr)"),
            ))
        }
    };
    result.map_err(|e| FieldError::new(join(base, field), e))
}

fn integration(dto: Option<&IntegrationDto>, dim: usize, base: &str) -> Checked<IntegrationConfig> {
    let mut cfg = IntegrationConfig::for_dim(dim);
    let Some(dto) = dto else {
        return Ok(cfg);
    };
    if let Some(m) = &dto.method {
        cfg.method = match m.as_str() {
            "gauss_legendre" => Method::GaussLegendreTensor,
            "adaptive" => Method::AdaptiveDoubling,
            "monte_carlo" => Method::MonteCarlo,
            other => {
                return Err(FieldError::new(
                    join(base, "method"),
                    format!("unknown method {other:?}, expected gauss_legendre, adaptive or monte_carlo"),
                ))
            }
        };
    }
    if let Some(m) = &dto.mapping {
        cfg.mapping = match m.as_str() {
            "graded" => NodeMapping::Graded,
            "affine" => NodeMapping::Affine,
            other => {
                return Err(FieldError::new(
                    join(base, "mapping"),
                    format!("unknown node mapping {other:?}, expected graded or affine"),
                ))
            }
        };
    }
    if let Some(n) = dto.nodes {
        cfg.nodes_per_axis = n;
    }
    if let Some(n) = dto.samples {
        cfg.mc_samples = n;
    }
    if let Some(s) = dto.seed {
        cfg.seed = s;
    }
    if let Some(e) = dto.clamp_epsilon {
        cfg.clamp_epsilon = e;
    }
    if let Some(t) = dto.rel_tolerance {
        cfg.rel_tolerance = t;
    }
    cfg.validate().map_err(|e| FieldError::new(base, e))?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn ccfi_job() -> Value {
        json!({
            "kind": "ccfi",
            "eta": 0.5,
            "truth": {
                "copula": {"family": "gumbel", "theta": 2.0},
                "margins": [{"family": "exponential", "rate": 1.0}, {"family": "exponential", "rate": 1.0}]
            },
            "reference": {
                "copula": {"family": "fgm", "theta": 0.5},
                "margins": [{"family": "exponential", "rate": 2.0}, {"family": "exponential", "rate": 3.0}]
            }
        })
    }

    #[test]
    fn builds_joint_job() {
        let job = build_job(&ccfi_job(), "jobs[0]").unwrap();
        assert_eq!(job.kind(), MeasureKind::Ccfi);
    }

    #[test]
    fn theta_error_names_field() {
        let mut v = ccfi_job();
        v["truth"]["copula"]["theta"] = json!(0.5);
        let e = build_job(&v, "jobs[3]").unwrap_err();
        assert_eq!(e.path, "jobs[3].truth.copula.theta");
        assert_eq!(e.message, "gumbel requires theta >= 1");
    }

    #[test]
    fn serde_errors_name_field() {
        let mut v = ccfi_job();
        v["reference"]["margins"][1]["rate"] = json!("fast");
        let e = build_job(&v, "jobs[0]").unwrap_err();
        assert_eq!(e.path, "jobs[0].reference.margins[1].rate");

        let mut v = ccfi_job();
        v["truth"]["copula"]["colour"] = json!(1);
        let e = build_job(&v, "jobs[0]").unwrap_err();
        assert!(e.path.starts_with("jobs[0].truth.copula"), "{e}");
    }

    #[test]
    fn margin_errors_name_field() {
        let mut v = ccfi_job();
        v["reference"]["margins"][0] = json!({"family": "prhr", "gamma": 2.0, "base": {"family": "exponential", "rate": -1.0}});
        let e = build_job(&v, "jobs[0]").unwrap_err();
        assert_eq!(e.path, "jobs[0].reference.margins[0].base.rate");
    }

    #[test]
    fn entropy_reference_optional() {
        let mut v = ccfi_job();
        v["kind"] = json!("ccfe");
        v.as_object_mut().unwrap().remove("reference");
        assert!(build_job(&v, "jobs[0]").is_ok());
        v["kind"] = json!("ccfi");
        assert_eq!(build_job(&v, "jobs[0]").unwrap_err().path, "jobs[0].reference");
    }

    #[test]
    fn univariate_jobs() {
        let v = json!({
            "kind": "fcri",
            "eta": 0.5,
            "truth": {"margin": {"family": "exponential", "rate": 1.0}},
            "reference": {"margin": {"family": "uniform", "low": 0.0, "high": 1.0}}
        });
        // reference support ends before the truth's: divergent
        let e = build_job(&v, "jobs[0]").unwrap_err();
        assert_eq!(e.path, "jobs[0]");
        assert!(e.numerical);
        let mut ok = v.clone();
        ok["reference"]["margin"] = json!({"family": "exponential", "rate": 2.0});
        assert!(build_job(&ok, "jobs[0]").is_ok());
    }

    #[test]
    fn integration_overrides() {
        let mut v = ccfi_job();
        v["integration"] = json!({"method": "monte_carlo", "samples": 1000, "seed": 7});
        assert!(build_job(&v, "jobs[0]").is_ok());
        v["integration"] = json!({"method": "simpson"});
        assert_eq!(build_job(&v, "jobs[0]").unwrap_err().path, "jobs[0].integration.method");
    }

    #[test]
    fn job_file_header() {
        assert!(JobFile::parse(r#"{"schema_version": 2, "jobs": [{}]}"#).is_err());
        assert_eq!(JobFile::parse(r#"{"schema_version": 1, "jobs": []}"#).unwrap_err().path, "jobs");
        let f = JobFile::parse(r#"{"schema_version": 1, "jobs": [{}], "sweep": {"path": "eta", "values": [0.3]}}"#).unwrap();
        assert_eq!(f.sweep.unwrap().axes().len(), 1);
    }
}
