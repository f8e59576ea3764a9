//! Batch verification over models and sampled points.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curvature::build_bundle;
use crate::error::{Error, Result};
use crate::identities::{check_all, Expectation, IdentityId, IdentityReport, Tolerances, Verdict, REGISTRY};
use crate::models::{MetricModel, ModelClass, ParamValue, Parameters};

pub const DEFAULT_POINTS: usize = 50;
pub const DEFAULT_SEED: u64 = 42;
/// A model whose skipped fraction reaches this value fails the run.
pub const MAX_SKIPPED_FRACTION: f64 = 0.05;

/// Every identity behaved as expected and no model skipped too many points.
pub const EXIT_OK: i32 = 0;
/// Some identity disagreed with its expectation, or too many points were skipped.
pub const EXIT_UNEXPECTED: i32 = 1;
/// Bad configuration, unknown model or unknown identity.
pub const EXIT_USAGE: i32 = 2;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Text,
    Structured,
}

impl OutputFormat {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(OutputFormat::Text),
            "structured" | "json" => Ok(OutputFormat::Structured),
            other => Err(Error::Config(format!("unknown output format '{other}' (text, structured)"))),
        }
    }
}

/// One model instance to verify.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub name: String,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub parameters: Parameters,
    /// Diagonal metric components; makes this a custom model.
    #[serde(default)]
    pub components: Option<Vec<String>>,
    /// Required for custom models.
    #[serde(default)]
    pub expected_class: Option<ModelClass>,
}

impl ModelSpec {
    pub fn builtin(name: &str, n: usize) -> Self {
        ModelSpec {
            name: name.to_string(),
            n: Some(n),
            parameters: Parameters::new(),
            components: None,
            expected_class: None,
        }
    }

    pub fn with_param(mut self, key: &str, value: ParamValue) -> Self {
        self.parameters.insert(key.to_string(), value);
        self
    }

    pub fn instantiate(&self) -> Result<MetricModel> {
        match &self.components {
            Some(components) => {
                let class = self.expected_class.ok_or_else(|| {
                    Error::Config(format!("custom model '{}' needs expected_class", self.name))
                })?;
                if !self.parameters.is_empty() {
                    return Err(Error::Config(format!(
                        "custom model '{}' takes no parameters",
                        self.name
                    )));
                }
                let model = MetricModel::diagonal(&self.name, components, class)?;
                if let Some(n) = self.n {
                    if n != model.n() {
                        return Err(Error::DimensionMismatch { expected: n, found: model.n() });
                    }
                }
                Ok(model)
            }
            None => {
                let model = MetricModel::builtin(&self.name, self.n, &self.parameters)?;
                if let Some(class) = self.expected_class {
                    if class != model.expected_class() {
                        return Err(Error::Config(format!(
                            "{} is a {} model, not {class}",
                            self.name,
                            model.expected_class()
                        )));
                    }
                }
                Ok(model)
            }
        }
    }
}

/// The instances verified when no models are configured.
pub fn default_models() -> Vec<ModelSpec> {
    let text = |s: &str| ParamValue::Text(s.to_string());
    vec![
        ModelSpec::builtin("minkowski", 4),
        ModelSpec::builtin("minkowski", 5),
        ModelSpec::builtin("rw_flat", 4).with_param("profile", text("exp")),
        ModelSpec::builtin("rw_flat", 5).with_param("profile", text("power")),
        ModelSpec::builtin("rw_flat", 6).with_param("profile", text("quadratic")),
        ModelSpec::builtin("grw_product_spheres", 5),
        ModelSpec::builtin("twisted_generic", 4),
        ModelSpec::builtin("twisted_generic", 5),
        ModelSpec::builtin("twisted_generic", 6),
        ModelSpec::builtin("twisted_n4", 4),
        ModelSpec::builtin("non_twisted_perturbed", 4),
        ModelSpec::builtin("non_twisted_perturbed", 5),
    ]
}

fn default_points() -> usize {
    DEFAULT_POINTS
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

/// Run configuration, usually read from TOML.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub output_format: OutputFormat,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
    /// Identity id to tolerance.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    /// Empty means [`default_models`].
    #[serde(default)]
    pub models: Vec<ModelSpec>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            points: DEFAULT_POINTS,
            seed: DEFAULT_SEED,
            output_format: OutputFormat::Text,
            output_path: None,
            tolerances: BTreeMap::new(),
            models: Vec::new(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        RunConfig::from_toml(&text)
    }

    /// Parses and validates the tolerance overrides.
    pub fn tolerance_overrides(&self) -> Result<Tolerances> {
        let mut out = Tolerances::new();
        for (key, &value) in &self.tolerances {
            let id: IdentityId = key.parse()?;
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::Config(format!("tolerance for {key} must be positive, got {value}")));
            }
            out.insert(id, value);
        }
        Ok(out)
    }

    pub fn model_specs(&self) -> Vec<ModelSpec> {
        if self.models.is_empty() {
            default_models()
        } else {
            self.models.clone()
        }
    }
}

/// Per-model bookkeeping.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub model: String,
    pub label: String,
    pub n: usize,
    pub expected_class: ModelClass,
    pub points_requested: usize,
    pub points_evaluated: usize,
    pub points_skipped: usize,
    /// Distinct reasons for skipped points.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub skip_reasons: Vec<String>,
}

impl ModelSummary {
    pub fn skipped_fraction(&self) -> f64 {
        if self.points_requested == 0 {
            0.0
        } else {
            self.points_skipped as f64 / self.points_requested as f64
        }
    }
}

/// The complete result of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub seed: u64,
    pub points: usize,
    pub models: Vec<ModelSummary>,
    /// Sorted by model, dimension and identity id.
    pub reports: Vec<IdentityReport>,
}

impl RunReport {
    pub fn unexpected(&self) -> Vec<&IdentityReport> {
        self.reports.iter().filter(|r| !r.as_expected()).collect()
    }

    pub fn excessive_skips(&self) -> Vec<&ModelSummary> {
        self.models
            .iter()
            .filter(|m| m.skipped_fraction() >= MAX_SKIPPED_FRACTION)
            .collect()
    }

    pub fn exit_code(&self) -> i32 {
        if self.unexpected().is_empty() && self.excessive_skips().is_empty() {
            EXIT_OK
        } else {
            EXIT_UNEXPECTED
        }
    }

    pub fn find(&self, model: &str, n: usize, id: IdentityId) -> Option<&IdentityReport> {
        self.reports
            .iter()
            .find(|r| r.model == model && r.n == n && r.identity_id == id)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid report: {e}")))
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Structured => {
                let mut s = self.to_json();
                s.push('\n');
                s
            }
            OutputFormat::Text => self.to_text(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "seed {}, {} points per model", self.seed, self.points);
        for m in &self.models {
            let _ = writeln!(
                out,
                "\n== {} [{}]: {} evaluated, {} skipped",
                m.label, m.expected_class, m.points_evaluated, m.points_skipped
            );
            for reason in &m.skip_reasons {
                let _ = writeln!(out, "   skipped: {reason}");
            }
            let mine: Vec<&IdentityReport> = self
                .reports
                .iter()
                .filter(|r| r.model == m.model && r.n == m.n)
                .collect();
            let mut groups: Vec<_> = REGISTRY.iter().map(|e| e.group).collect();
            groups.dedup();
            for group in groups {
                let rows: Vec<&&IdentityReport> = mine
                    .iter()
                    .filter(|r| r.identity_id.info().group == group)
                    .filter(|r| r.verdict != Verdict::NotApplicable || r.points_inapplicable > 0)
                    .collect();
                if rows.is_empty() {
                    continue;
                }
                let _ = writeln!(out, "  {}", group.title());
                for r in rows {
                    let verdict = match r.verdict {
                        Verdict::Pass => "pass",
                        Verdict::Fail => "FAIL",
                        Verdict::NotApplicable => "n/a",
                    };
                    let flag = if r.as_expected() {
                        ""
                    } else {
                        "  <-- unexpected"
                    };
                    let exp = if r.expected == Expectation::Fail {
                        " (expected fail)"
                    } else {
                        ""
                    };
                    let _ = write!(
                        out,
                        "    {:<30} {:<5} residual {:>9.2e}  scale {:>9.2e}  tol {:.0e}  {}/{} points ok",
                        r.identity_id.as_str(),
                        verdict,
                        r.max_residual,
                        r.scale,
                        r.tolerance,
                        r.points_tested - r.points_failing,
                        r.points_tested,
                    );
                    if r.points_inapplicable > 0 {
                        let _ = write!(out, ", hypothesis unmet at {}", r.points_inapplicable);
                    }
                    let _ = writeln!(out, "{exp}{flag}");
                }
            }
        }
        let unexpected = self.unexpected().len();
        let skips = self.excessive_skips().len();
        let _ = writeln!(
            out,
            "\n{} reports, {} unexpected, {} models over the skip limit",
            self.reports.len(),
            unexpected,
            skips
        );
        out
    }
}

fn merge_all(reports: Vec<Vec<IdentityReport>>) -> Option<Vec<IdentityReport>> {
    reports.into_iter().reduce(|acc, next| {
        acc.into_iter().zip(next).map(|(a, b)| a.merge(b)).collect()
    })
}

/// Verifies one model. Points where the metric is degenerate, not
/// Lorentzian or produces non-finite curvature are skipped.
pub fn run_model(
    model: &MetricModel,
    points: usize,
    seed: u64,
    overrides: &Tolerances,
) -> Result<(ModelSummary, Vec<IdentityReport>)> {
    let sample = model.sample_points(points, seed)?;
    let per_point: Vec<std::result::Result<Vec<IdentityReport>, String>> = sample
        .par_iter()
        .map(|p| {
            let check = model.check_point(p).map_err(|e| e.to_string())?;
            if !check.lorentzian {
                return Err("metric is not Lorentzian".to_string());
            }
            let bundle = build_bundle(model, p).map_err(|e| e.to_string())?;
            check_all(model, &bundle, overrides).map_err(|e| e.to_string())
        })
        .collect();

    let mut evaluated = Vec::new();
    let mut reasons: Vec<String> = Vec::new();
    for r in per_point {
        match r {
            Ok(reports) => evaluated.push(reports),
            Err(reason) => {
                if !reasons.contains(&reason) {
                    reasons.push(reason);
                }
            }
        }
    }
    let summary = ModelSummary {
        model: model.name().to_string(),
        label: model.label(),
        n: model.n(),
        expected_class: model.expected_class(),
        points_requested: points,
        points_evaluated: evaluated.len(),
        points_skipped: points - evaluated.len(),
        skip_reasons: reasons,
    };
    let reports = match merge_all(evaluated) {
        Some(r) => r,
        // Nothing evaluated: report every identity as not applicable.
        None => IdentityId::all()
            .map(|id| {
                let tol = overrides.get(&id).copied().unwrap_or(id.info().tolerance);
                IdentityReport::not_applicable(id, model, tol, "no point could be evaluated")
            })
            .collect(),
    };
    Ok((summary, reports))
}

/// Runs the configured verification. Configuration and model errors are
/// returned before any point is evaluated.
pub fn run(config: &RunConfig) -> Result<RunReport> {
    if config.points == 0 {
        return Err(Error::EmptySample);
    }
    let overrides = config.tolerance_overrides()?;
    let models = config
        .model_specs()
        .iter()
        .map(ModelSpec::instantiate)
        .collect::<Result<Vec<_>>>()?;

    let mut summaries = Vec::with_capacity(models.len());
    let mut reports = Vec::new();
    for model in &models {
        let (summary, r) = run_model(model, config.points, config.seed, &overrides)?;
        summaries.push(summary);
        reports.extend(r);
    }
    reports.sort_by(|a, b| {
        (a.model.as_str(), a.n, a.identity_id.as_str()).cmp(&(b.model.as_str(), b.n, b.identity_id.as_str()))
    });
    Ok(RunReport {
        seed: config.seed,
        points: config.points,
        models: summaries,
        reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_config_parses_with_defaults() {
        let c = RunConfig::from_toml(
            r#"
            points = 3
            [tolerances]
            adati = 1e-7
            [[models]]
            name = "twisted_generic"
            n = 6
            parameters = { alpha = 0.3 }
            "#,
        )
        .unwrap();
        assert_eq!(c.points, 3);
        assert_eq!(c.seed, DEFAULT_SEED);
        assert_eq!(c.output_format, OutputFormat::Text);
        let m = c.models[0].instantiate().unwrap();
        assert_eq!(m.n(), 6);
        assert_eq!(c.tolerance_overrides().unwrap()[&IdentityId::Adati], 1e-7);
    }

    #[test]
    fn unknown_keys_and_identities_are_rejected() {
        assert!(matches!(RunConfig::from_toml("pionts = 3"), Err(Error::Config(_))));
        let c = RunConfig::from_toml("[tolerances]\nnot_an_identity = 1e-3").unwrap();
        assert!(matches!(c.tolerance_overrides(), Err(Error::UnknownIdentity(_))));
    }

    #[test]
    fn custom_model_needs_class() {
        let c = RunConfig::from_toml(
            r#"
            [[models]]
            name = "mine"
            components = ["-1", "exp(2*t)", "exp(2*t)", "exp(2*t)"]
            "#,
        )
        .unwrap();
        assert!(c.models[0].instantiate().is_err());
    }

    #[test]
    fn small_run_is_sorted_and_as_expected() {
        let config = RunConfig {
            points: 2,
            models: vec![ModelSpec::builtin("twisted_n4", 4), ModelSpec::builtin("minkowski", 4)],
            ..RunConfig::default()
        };
        let report = run(&config).unwrap();
        assert_eq!(report.exit_code(), EXIT_OK, "{}", report.to_text());
        assert_eq!(report.reports[0].model, "minkowski");
        let back = RunReport::from_json(&report.to_json()).unwrap();
        assert_eq!(back, report);
    }
}
