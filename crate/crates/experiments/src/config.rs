//! JSON experiment description. Every key is checked before any computation;
//! unknown keys are rejected.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use gsfem::mesh::EdgeScale;
use gsfem::{Diffusion, MethodConfig64, MethodKind, ParameterTriple, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{ExperimentError, Result};
use crate::presets::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Laplace1d,
    Laplace2d,
    VariableKappa,
}

impl ProblemKind {
    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Laplace1d => "laplace1d",
            ProblemKind::Laplace2d => "laplace2d",
            ProblemKind::VariableKappa => "variable_kappa",
        }
    }
}

/// A parameter given either as a JSON number or as a string such as `"1/12"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Number(f64),
    Text(String),
}

impl ParamValue {
    pub fn resolve(&self) -> Result<f64> {
        match self {
            ParamValue::Number(v) if v.is_finite() => Ok(*v),
            ParamValue::Number(v) => Err(ExperimentError::Config(format!("parameter {v} is not finite"))),
            ParamValue::Text(s) => parse_number(s),
        }
    }
}

impl From<f64> for ParamValue {
    fn from(v: f64) -> Self {
        ParamValue::Number(v)
    }
}

/// Parses `"a/b"`, an integer, or a decimal literal.
pub fn parse_number(s: &str) -> Result<f64> {
    let t = s.trim();
    if let Ok(r) = Rational::from_str(t) {
        return Ok(*r.numer() as f64 / *r.denom() as f64);
    }
    match t.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(ExperimentError::Config(format!("cannot read '{s}' as a number or fraction"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodSpec {
    pub method: MethodKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_k: Option<ParamValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_m: Option<ParamValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<ParamValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl MethodSpec {
    pub fn new(method: MethodKind) -> Self {
        Self {
            method,
            eta_k: None,
            eta_m: None,
            alpha: None,
            label: None,
        }
    }

    /// Missing entries fall back to the Galerkin values `(0, 0, 1)`.
    pub fn params(&self) -> Result<ParameterTriple<f64>> {
        let get = |v: &Option<ParamValue>, default: f64| v.as_ref().map_or(Ok(default), ParamValue::resolve);
        Ok(ParameterTriple::new(
            get(&self.eta_k, 0.0)?,
            get(&self.eta_m, 0.0)?,
            get(&self.alpha, 1.0)?,
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default = "default_out_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<OutputFormat>,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_formats() -> Vec<OutputFormat> {
    vec![OutputFormat::Csv]
}

impl Default for Outputs {
    fn default() -> Self {
        Self {
            dir: default_out_dir(),
            formats: default_formats(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceOptions {
    /// file or directory; defaults to the output directory
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default = "yes")]
    pub generate: bool,
}

fn yes() -> bool {
    true
}

impl Default for ReferenceOptions {
    fn default() -> Self {
        Self { path: None, generate: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemKind,
    /// expression id for `variable_kappa`
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<String>,
    #[serde(default = "default_n")]
    pub n: usize,
    /// elements along `y` for `laplace2d`; defaults to `n`
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_y: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<usize>>,
    #[serde(default = "default_p")]
    pub p: usize,
    #[serde(default)]
    pub methods: Vec<MethodSpec>,
    #[serde(default)]
    pub outputs: Outputs,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub reference: ReferenceOptions,
    #[serde(default)]
    pub edge_scale: EdgeScale,
    /// L² and H¹ eigenfunction errors for `laplace1d`
    #[serde(default = "yes")]
    pub eigenfunctions: bool,
}

fn default_n() -> usize {
    100
}

fn default_p() -> usize {
    1
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            problem: ProblemKind::Laplace1d,
            kappa: None,
            n: default_n(),
            n_y: None,
            n_list: None,
            p: default_p(),
            methods: Vec::new(),
            outputs: Outputs::default(),
            tolerances: Tolerances::default(),
            reference: ReferenceOptions::default(),
            edge_scale: EdgeScale::Side,
            eigenfunctions: true,
        }
    }
}

/// A method ready to assemble, with the label used for file names and
/// columns.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedMethod {
    pub label: String,
    pub config: MethodConfig64,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(ExperimentError::io(path))?;
        Self::from_json(&text).map_err(|e| match e {
            ExperimentError::Config(msg) => ExperimentError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn diffusion(&self) -> Result<Diffusion> {
        match (self.problem, self.kappa.as_deref()) {
            (ProblemKind::VariableKappa, Some(id)) => Diffusion::from_id(id)
                .ok_or_else(|| ExperimentError::Config(format!("unknown kappa expression '{id}'"))),
            (ProblemKind::VariableKappa, None) => {
                Err(ExperimentError::Config("variable_kappa needs a kappa expression id".into()))
            }
            (_, Some(id)) => Err(ExperimentError::Config(format!(
                "kappa '{id}' given for constant-coefficient problem {}",
                self.problem.name()
            ))),
            (_, None) => Ok(Diffusion::default()),
        }
    }

    pub fn n_y(&self) -> usize {
        self.n_y.unwrap_or(self.n)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(ExperimentError::Config(msg));
        if !(1..=4).contains(&self.p) {
            return bad(format!("p must be in 1..=4, got {}", self.p));
        }
        if self.n < 2 {
            return bad(format!("n must be at least 2, got {}", self.n));
        }
        match (self.problem, self.n_y) {
            (ProblemKind::Laplace2d, Some(ny)) if ny < 2 => return bad(format!("n_y must be at least 2, got {ny}")),
            (ProblemKind::Laplace2d, _) | (_, None) => {}
            (other, Some(_)) => return bad(format!("n_y only applies to laplace2d, not {}", other.name())),
        }
        if let Some(list) = &self.n_list {
            if let Some(n) = list.iter().find(|&&n| n < 2) {
                return bad(format!("n_list entries must be at least 2, got {n}"));
            }
        }
        if self.outputs.formats.is_empty() {
            return bad("outputs.formats must name at least one format".into());
        }
        self.tolerances.validate()?;
        self.diffusion()?;
        self.methods()?;
        Ok(())
    }

    /// Method configurations with the problem's diffusion and edge scale and
    /// unique labels.
    pub fn methods(&self) -> Result<Vec<ResolvedMethod>> {
        let diffusion = self.diffusion()?;
        let mut out: Vec<ResolvedMethod> = Vec::with_capacity(self.methods.len());
        for spec in &self.methods {
            let config = MethodConfig64::new(spec.method, self.p, spec.params()?)
                .map_err(|e| ExperimentError::Config(e.to_string()))?
                .with_diffusion(diffusion)
                .with_edge_scale(self.edge_scale);
            let label = spec.label.clone().unwrap_or_else(|| config.label());
            if out.iter().any(|m| m.label == label) {
                return Err(ExperimentError::Config(format!("duplicate method label '{label}'")));
            }
            out.push(ResolvedMethod { label, config });
        }
        Ok(out)
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub p: Option<usize>,
    pub n: Option<usize>,
    pub method: Option<MethodKind>,
    pub eta_k: Option<ParamValue>,
    pub eta_m: Option<ParamValue>,
    pub alpha: Option<ParamValue>,
    pub format: Option<OutputFormat>,
    pub kappa: Option<String>,
}

impl Overrides {
    /// `--method` replaces the method list with a single entry; the parameter
    /// flags then apply to it, or to every listed method otherwise.
    pub fn apply(&self, cfg: &mut ExperimentConfig) -> Result<()> {
        if let Some(dir) = &self.out {
            cfg.outputs.dir = dir.clone();
        }
        if let Some(p) = self.p {
            cfg.p = p;
        }
        if let Some(n) = self.n {
            cfg.n = n;
        }
        if let Some(format) = self.format {
            cfg.outputs.formats = vec![format];
        }
        if let Some(kappa) = &self.kappa {
            cfg.problem = ProblemKind::VariableKappa;
            cfg.kappa = Some(kappa.clone());
        }
        if let Some(method) = self.method {
            cfg.methods = vec![MethodSpec::new(method)];
        }
        for spec in &mut cfg.methods {
            if self.eta_k.is_some() {
                spec.eta_k = self.eta_k.clone();
            }
            if self.eta_m.is_some() {
                spec.eta_m = self.eta_m.clone();
            }
            if self.alpha.is_some() {
                spec.alpha = self.alpha.clone();
            }
        }
        cfg.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fractions_and_decimals() {
        assert_eq!(parse_number("1/12").unwrap(), 1.0 / 12.0);
        assert_eq!(parse_number(" -1/90 ").unwrap(), -1.0 / 90.0);
        assert_eq!(parse_number("0.95").unwrap(), 0.95);
        assert_eq!(parse_number("3").unwrap(), 3.0);
        assert!(parse_number("1/0").is_err());
        assert!(parse_number("abc").is_err());
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = ExperimentConfig::from_json(r#"{"problem": "laplace1d"}"#).unwrap();
        assert_eq!(cfg.n, 100);
        assert_eq!(cfg.p, 1);
        assert!(cfg.methods.is_empty());
        assert_eq!(cfg.outputs.formats, vec![OutputFormat::Csv]);
        assert_eq!(cfg.diffusion().unwrap(), Diffusion::Constant(1.0));
    }

    #[test]
    fn methods_accept_fraction_strings() {
        let cfg = ExperimentConfig::from_json(
            r#"{"problem": "laplace1d", "methods": [
                {"method": "GSFEM", "eta_k": "1/12", "eta_m": "1/360"},
                {"method": "GSFEMBQ", "eta_k": 0.05, "eta_m": 0, "alpha": "4/5", "label": "bq"}
            ]}"#,
        )
        .unwrap();
        let methods = cfg.methods().unwrap();
        assert_eq!(methods[0].config.params, ParameterTriple::new(1.0 / 12.0, 1.0 / 360.0, 1.0));
        assert_eq!(methods[1].label, "bq");
        assert_eq!(methods[1].config.params.alpha, 0.8);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        for text in [
            r#"{"problem": "laplace1d", "bogus": 1}"#,
            r#"{"problem": "laplace3d"}"#,
            r#"{"problem": "laplace1d", "p": 5}"#,
            r#"{"problem": "laplace1d", "n": 1}"#,
            r#"{"problem": "variable_kappa"}"#,
            r#"{"problem": "variable_kappa", "kappa": "sin"}"#,
            r#"{"problem": "laplace1d", "kappa": "exp_x_plus_x2"}"#,
            r#"{"problem": "laplace1d", "n_y": 4}"#,
            r#"{"problem": "laplace1d", "methods": [{"method": "FEM", "eta_k": 0.1}]}"#,
            r#"{"problem": "laplace1d", "methods": [{"method": "GSFEM", "etak": 0.1}]}"#,
            r#"{"problem": "laplace1d", "methods": [{"method": "FEM"}, {"method": "FEM"}]}"#,
            r#"{"problem": "laplace1d", "tolerances": {"sigma_rel": -1}}"#,
            r#"{"problem": "laplace1d", "tolerances": {"unknown": 1}}"#,
            r#"{"problem": "laplace1d", "outputs": {"formats": []}}"#,
        ] {
            assert!(
                matches!(ExperimentConfig::from_json(text), Err(ExperimentError::Config(_))),
                "{text}"
            );
        }
    }

    #[test]
    fn overrides_take_precedence() {
        let mut cfg = ExperimentConfig::from_json(
            r#"{"problem": "laplace1d", "methods": [{"method": "SoftFEM", "eta_k": 0.05}, {"method": "GSFEM"}]}"#,
        )
        .unwrap();
        let ov = Overrides {
            p: Some(2),
            eta_k: Some(ParamValue::Text("1/24".into())),
            format: Some(OutputFormat::Json),
            ..Default::default()
        };
        ov.apply(&mut cfg).unwrap();
        assert_eq!(cfg.p, 2);
        assert_eq!(cfg.outputs.formats, vec![OutputFormat::Json]);
        assert!(cfg.methods().unwrap().iter().all(|m| m.config.params.eta_k == 1.0 / 24.0));

        let ov = Overrides {
            method: Some(MethodKind::Fem),
            ..Default::default()
        };
        ov.apply(&mut cfg).unwrap();
        assert_eq!(cfg.methods.len(), 1);

        let ov = Overrides {
            method: Some(MethodKind::Fem),
            eta_k: Some(ParamValue::Number(0.1)),
            ..Default::default()
        };
        assert!(ov.apply(&mut cfg).is_err());
    }
}
