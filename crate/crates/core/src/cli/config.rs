//! Experiment configuration: one JSON document, optionally patched by flags.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::drift::{validate_assumption, AssumptionReport, DriftSpec, Interval};
use crate::error::{Error, Result};
use crate::kernels::{GridSpec, InitialLaw, KernelKind};
use crate::lamperti::{Admission, LampertiMap};
use crate::sampler::Scheme;

pub const OUT_DIR_ENV: &str = "SHORTTIME_OUT_DIR";

fn default_n_scan() -> usize {
    6001
}

fn default_n_points() -> usize {
    2001
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub drift: DriftSpec,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_law: Option<InitialLaw>,
    pub epsilon: f64,
    pub scan_range: Interval,
    #[serde(default = "default_n_scan")]
    pub n_scan: usize,
    /// Proceed with a drift that fails the scan (e.g. `f(x) = x`).
    #[serde(default)]
    pub override_assumption: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quad_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_point: Option<f64>,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flow: Option<FlowSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<DensitySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub girsanov: Option<GirsanovSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compose: Option<ComposeSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fp: Option<FpSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample: Option<SampleSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSection {
    pub points: Vec<f64>,
    pub times: Vec<f64>,
}

/// Either an explicit grid or a point count for the automatically padded one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridChoice {
    Explicit(GridSpec),
    Auto { n_points: usize },
}

impl Default for GridChoice {
    fn default() -> Self {
        GridChoice::Auto { n_points: default_n_points() }
    }
}

/// `"all"` or a list of kernel names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KindSelection {
    Named(String),
    List(Vec<KernelKind>),
}

impl KindSelection {
    pub fn resolve(&self) -> Result<Vec<KernelKind>> {
        match self {
            KindSelection::Named(s) if s == "all" => Ok(KernelKind::ALL.to_vec()),
            KindSelection::Named(s) => Ok(vec![s.parse()?]),
            KindSelection::List(v) if v.is_empty() => Err(Error::Config("empty kernel list".into())),
            KindSelection::List(v) => Ok(v.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensitySection {
    pub horizon: f64,
    #[serde(default)]
    pub x_prime: f64,
    pub kinds: KindSelection,
    #[serde(default)]
    pub grid: GridChoice,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GirsanovSection {
    pub horizons: Vec<f64>,
    pub p: Vec<f64>,
    pub n_paths: usize,
    /// Defaults to a horizon-dependent count.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_steps: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComposeSection {
    pub total_time: f64,
    pub n_slices: Vec<usize>,
    #[serde(default)]
    pub x_prime: f64,
    pub kind: KernelKind,
    #[serde(default)]
    pub grid: GridChoice,
    /// Crank-Nicolson steps for the reference solution; no oracle if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_steps: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FpSection {
    pub horizon: f64,
    #[serde(default)]
    pub x_prime: f64,
    pub n_time_steps: usize,
    #[serde(default)]
    pub grid: GridChoice,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSection {
    pub horizon: f64,
    #[serde(default)]
    pub x_prime: f64,
    pub n: usize,
    pub scheme: Scheme,
    /// Euler-Maruyama steps per path (path scheme only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_steps: Option<usize>,
    /// Kernel whose tabulated CDF the samples are tested against.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ks_against: Option<KernelKind>,
    #[serde(default)]
    pub grid: GridChoice,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be positive and finite, got {v}")))
    }
}

fn at_least(name: &str, v: usize, min: usize) -> Result<()> {
    if v >= min {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be ≥ {min}, got {v}")))
    }
}

fn section<'a, T>(s: &'a Option<T>, name: &str) -> Result<&'a T> {
    s.as_ref().ok_or_else(|| Error::Config(format!("config has no `{name}` section")))
}

impl GridChoice {
    fn validate(&self) -> Result<()> {
        match self {
            GridChoice::Explicit(g) => g.validate().map_err(|e| Error::Config(e.to_string())),
            GridChoice::Auto { n_points } => at_least("grid.n_points", *n_points, 3),
        }
    }

    /// Concrete grid for a run started at `x′` over `horizon`, padded by the
    /// drift extremes from the scan.
    pub fn resolve(&self, x_prime: f64, horizon: f64, report: &AssumptionReport) -> Result<GridSpec> {
        match *self {
            GridChoice::Explicit(g) => Ok(g),
            GridChoice::Auto { n_points } => Ok(GridSpec::padded(x_prime, horizon, report.f_min, report.f_max, n_points)?),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("malformed config: {e}")))
    }

    /// Apply `path=value` overrides, where `path` is dot-separated and `value`
    /// is JSON (bare words are taken as strings).
    pub fn with_overrides(&self, sets: &[String]) -> Result<Self> {
        let mut doc = serde_json::to_value(self).map_err(|e| Error::Config(e.to_string()))?;
        for s in sets {
            let (path, raw) = s
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override `{s}` is not of the form path=value")))?;
            let value: Value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_owned()));
            let mut node = &mut doc;
            let keys: Vec<&str> = path.split('.').collect();
            for (i, key) in keys.iter().enumerate() {
                let obj = node
                    .as_object_mut()
                    .ok_or_else(|| Error::Config(format!("override path `{path}` passes through a non-object")))?;
                if i + 1 == keys.len() {
                    obj.insert((*key).to_owned(), value.clone());
                    break;
                }
                node = obj.entry(*key).or_insert_with(|| Value::Object(Default::default()));
            }
        }
        serde_json::from_value(doc).map_err(|e| Error::Config(format!("override produced an invalid config: {e}")))
    }

    /// Preconditions of the modules `command` touches, checked before any
    /// computation.
    pub fn validate_for(&self, command: super::Command) -> Result<()> {
        use super::Command::*;
        positive("epsilon", self.epsilon)?;
        if !(self.scan_range.lo < self.scan_range.hi) || !self.scan_range.lo.is_finite() || !self.scan_range.hi.is_finite() {
            return Err(Error::Config(format!("scan_range [{}, {}] is degenerate", self.scan_range.lo, self.scan_range.hi)));
        }
        at_least("n_scan", self.n_scan, 2)?;
        if !self.alpha.is_finite() {
            return Err(Error::Config(format!("alpha must be finite, got {}", self.alpha)));
        }
        for (name, v) in [("quad_tol", self.quad_tol), ("root_tol", self.root_tol)] {
            if let Some(v) = v {
                positive(name, v)?;
            }
        }
        self.drift.build().map_err(|e| Error::Config(format!("drift: {e}")))?;
        match command {
            Validate => {}
            Flow => {
                let s = section(&self.flow, "flow")?;
                if s.points.is_empty() || s.times.is_empty() {
                    return Err(Error::Config("flow.points and flow.times must be non-empty".into()));
                }
                if s.points.iter().chain(&s.times).any(|v| !v.is_finite()) {
                    return Err(Error::Config("flow.points and flow.times must be finite".into()));
                }
            }
            Density => {
                let s = section(&self.density, "density")?;
                positive("density.horizon", s.horizon)?;
                s.kinds.resolve()?;
                s.grid.validate()?;
            }
            GirsanovError | Rate => {
                let s = section(&self.girsanov, "girsanov")?;
                let min_horizons = if command == Rate { 3 } else { 1 };
                at_least("girsanov.horizons (count)", s.horizons.len(), min_horizons)?;
                for &t in &s.horizons {
                    positive("girsanov.horizons", t)?;
                }
                at_least("girsanov.p (count)", s.p.len(), 1)?;
                if let Some(&p) = s.p.iter().find(|p| !(**p >= 1.0) || !p.is_finite()) {
                    return Err(Error::Config(format!("girsanov.p must be ≥ 1, got {p}")));
                }
                at_least("girsanov.n_paths", s.n_paths, 2)?;
                if let Some(n) = s.n_steps {
                    at_least("girsanov.n_steps", n, 1)?;
                }
            }
            Compose => {
                let s = section(&self.compose, "compose")?;
                positive("compose.total_time", s.total_time)?;
                at_least("compose.n_slices (count)", s.n_slices.len(), 1)?;
                for &n in &s.n_slices {
                    at_least("compose.n_slices", n, 1)?;
                }
                if let Some(n) = s.oracle_steps {
                    at_least("compose.oracle_steps", n, 1)?;
                }
                s.grid.validate()?;
            }
            FpSolve => {
                let s = section(&self.fp, "fp")?;
                positive("fp.horizon", s.horizon)?;
                at_least("fp.n_time_steps", s.n_time_steps, 1)?;
                s.grid.validate()?;
            }
            Sample => {
                let s = section(&self.sample, "sample")?;
                positive("sample.horizon", s.horizon)?;
                at_least("sample.n", s.n, 1)?;
                if s.scheme == Scheme::EulerMaruyamaPath {
                    at_least("sample.n_steps", s.n_steps.unwrap_or(0), 1)?;
                }
                s.grid.validate()?;
            }
        }
        Ok(())
    }

    pub fn scan(&self) -> Result<AssumptionReport> {
        let drift = self.drift.build()?;
        Ok(validate_assumption(&drift, self.scan_range, self.epsilon, self.n_scan)?)
    }

    /// The Lamperti map for this configuration; fails on a drift that does
    /// not pass the scan unless the override is set.
    pub fn lamperti(&self, report: &AssumptionReport) -> Result<LampertiMap> {
        let drift = self.drift.build()?;
        let admission = if self.override_assumption { Admission::Override } else { Admission::from_report(report)? };
        let mut m = LampertiMap::new(drift, admission).with_alpha(self.alpha);
        if self.quad_tol.is_some() || self.root_tol.is_some() {
            m = m.with_tolerances(
                self.quad_tol.unwrap_or(crate::lamperti::DEFAULT_QUAD_TOL),
                self.root_tol.unwrap_or(crate::lamperti::DEFAULT_ROOT_TOL),
            )?;
        }
        if let Some(r) = self.reference_point {
            m = m.with_reference_point(r);
        }
        Ok(m)
    }

    /// Output directory: config, then environment, then `./out`.
    pub fn resolved_out_dir(&self) -> String {
        self.out_dir
            .clone()
            .or_else(|| std::env::var(OUT_DIR_ENV).ok())
            .unwrap_or_else(|| "out".to_owned())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::Command;

    const BASE: &str = r#"{"drift": {"expr": "2 + cos(x)"}, "epsilon": 0.5,
        "scan_range": {"lo": -10, "hi": 10}, "seed": 1}"#;

    #[test]
    fn minimal_config_validates() {
        let c = ExperimentConfig::from_json(BASE).unwrap();
        c.validate_for(Command::Validate).unwrap();
        assert_eq!(c.n_scan, 6001);
    }

    #[test]
    fn missing_section_is_config_error() {
        let c = ExperimentConfig::from_json(BASE).unwrap();
        assert_eq!(c.validate_for(Command::Flow).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn unknown_field_is_rejected() {
        let text = BASE.replace("\"seed\"", "\"sede\": 3, \"seed\"");
        assert!(matches!(ExperimentConfig::from_json(&text), Err(Error::Config(_))));
    }

    #[test]
    fn overrides_patch_nested_values() {
        let c = ExperimentConfig::from_json(BASE).unwrap();
        let c = c.with_overrides(&["seed=7".into(), "density.horizon=0.1".into(), "density.kinds=all".into()]).unwrap();
        assert_eq!(c.seed, 7);
        let d = c.density.unwrap();
        assert_eq!(d.horizon, 0.1);
        assert_eq!(d.kinds.resolve().unwrap().len(), 4);
    }

    #[test]
    fn bad_drift_is_config_error() {
        let c = ExperimentConfig::from_json(&BASE.replace("2 + cos(x)", "2 + log(x)")).unwrap();
        assert_eq!(c.validate_for(Command::Validate).unwrap_err().exit_code(), 2);
    }
}
