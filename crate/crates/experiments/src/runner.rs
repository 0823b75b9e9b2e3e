//! Batch drivers behind the `spectrum`, `converge` and `reference`
//! subcommands.

use std::path::{Path, PathBuf};

use gsfem::assembly::{build_system, build_system_2d};
use gsfem::eigensolve::{lowest_eigenpair, solve_gevp, solve_gevp_values};
use gsfem::metrics::{condition_number, eigenfunction_errors, fit_order, reduction_ratios, FunctionError, StiffnessReport};
use gsfem::oracle::{exact_spectrum_1d, exact_spectrum_2d};
use gsfem::{Diffusion, Mesh1D64, MethodConfig64, MethodKind, ParameterTriple64, Spectrum64, SymmetricSystem64, TensorMesh2D64};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, OutputFormat, ProblemKind, ResolvedMethod};
use crate::error::{ExperimentError, Result};
use crate::output::{fmt17, fmt_opt, slug, write_csv, write_json};
use crate::presets::{REFERENCE_DEGREE, REFERENCE_ELEMENTS};

/// Relative settling threshold for inverse iteration on the lowest mode.
pub const LOWEST_TOL: f64 = 1e-14;
pub const LOWEST_MAX_ITER: usize = 5000;

pub const SPECTRUM_HEADER: [&str; 6] = ["j", "lambda_h", "lambda_ref", "rel_err", "l2_err", "h1_err"];

pub fn system_1d(n: usize, config: &MethodConfig64) -> Result<SymmetricSystem64> {
    Ok(build_system(&Mesh1D64::unit(n)?, config)?)
}

pub fn system_2d(nx: usize, ny: usize, config: &MethodConfig64) -> Result<SymmetricSystem64> {
    Ok(build_system_2d(&TensorMesh2D64::unit_square(nx, ny)?, config)?)
}

/// `λ_min`, `λ_max` and `σ` of a 1D system on `n` uniform elements.
pub fn stiffness_1d(n: usize, config: &MethodConfig64) -> Result<StiffnessReport<f64>> {
    let spectrum = solve_gevp_values(&system_1d(n, config)?)?;
    Ok(condition_number(&spectrum.eigenvalues)?)
}

/// Lowest eigenvalue by inverse iteration.
pub fn lowest_eigenvalue(system: &SymmetricSystem64) -> Result<f64> {
    Ok(lowest_eigenpair(system, LOWEST_TOL, LOWEST_MAX_ITER)?.eigenvalues[0])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub method: MethodKind,
    pub degree: usize,
    pub n_elements: usize,
    pub stiffness_points: usize,
    pub solver: String,
    pub trace_defect: f64,
    pub iterations: usize,
}

/// High-order Galerkin eigenvalues standing in for an unknown exact spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSpectrum {
    pub problem: String,
    pub kappa: Diffusion,
    pub eigenvalues: Vec<f64>,
    pub provenance: Provenance,
}

pub fn reference_file_name(kappa: &Diffusion, degree: usize, n_elements: usize) -> String {
    format!("reference_{}_p{degree}_n{n_elements}.json", kappa.id())
}

/// Galerkin spectrum of degree `degree` on `n_elements` uniform elements.
pub fn generate_reference(kappa: Diffusion, degree: usize, n_elements: usize) -> Result<ReferenceSpectrum> {
    let config = MethodConfig64::fem(degree)
        .map_err(|e| ExperimentError::Config(e.to_string()))?
        .with_diffusion(kappa);
    let system = system_1d(n_elements, &config)?;
    log::info!("reference solve: {} unknowns", system.order());
    let spectrum = solve_gevp_values(&system)?;
    Ok(ReferenceSpectrum {
        problem: ProblemKind::VariableKappa.name().into(),
        kappa,
        eigenvalues: spectrum.eigenvalues,
        provenance: Provenance {
            method: MethodKind::Fem,
            degree,
            n_elements,
            stiffness_points: degree + 1,
            solver: "banded Cholesky, Householder tridiagonalization, implicit QL".into(),
            trace_defect: spectrum.diagnostics.trace_defect,
            iterations: spectrum.diagnostics.iterations,
        },
    })
}

pub fn write_reference(path: &Path, reference: &ReferenceSpectrum) -> Result<()> {
    write_json(path, reference)
}

pub fn load_reference(path: &Path) -> Result<ReferenceSpectrum> {
    let text = std::fs::read_to_string(path).map_err(ExperimentError::io(path))?;
    serde_json::from_str(&text).map_err(|e| ExperimentError::Config(format!("{}: {e}", path.display())))
}

/// `location` names a file, or a directory holding the standard file name.
pub fn reference_path(location: &Path, kappa: &Diffusion) -> PathBuf {
    if location.extension().is_some_and(|e| e == "json") {
        location.to_path_buf()
    } else {
        location.join(reference_file_name(kappa, REFERENCE_DEGREE, REFERENCE_ELEMENTS))
    }
}

/// Loads the standard reference for `kappa`, generating and saving it first if
/// it is missing and `generate` allows it.
pub fn obtain_reference(location: &Path, kappa: Diffusion, generate: bool) -> Result<ReferenceSpectrum> {
    let path = reference_path(location, &kappa);
    if path.exists() {
        let reference = load_reference(&path)?;
        let prov = &reference.provenance;
        if reference.kappa != kappa || prov.degree != REFERENCE_DEGREE || prov.n_elements != REFERENCE_ELEMENTS {
            return Err(ExperimentError::Config(format!(
                "{} holds kappa={} p={} N={}, expected kappa={} p={REFERENCE_DEGREE} N={REFERENCE_ELEMENTS}",
                path.display(),
                reference.kappa.id(),
                prov.degree,
                prov.n_elements,
                kappa.id()
            )));
        }
        return Ok(reference);
    }
    if !generate {
        return Err(ExperimentError::MissingReference(path));
    }
    let reference = generate_reference(kappa, REFERENCE_DEGREE, REFERENCE_ELEMENTS)?;
    write_reference(&path, &reference)?;
    Ok(reference)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodSummary {
    pub label: String,
    pub method: MethodKind,
    pub params: ParameterTriple64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub sigma: f64,
    /// `σ_FEM / σ`
    pub rho: f64,
    /// `100 (1 − 1/ρ)`
    pub rho_percent: f64,
    pub max_residual: Option<f64>,
    pub trace_defect: f64,
    pub iterations: usize,
    pub files: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumSummary {
    pub problem: ProblemKind,
    pub kappa: Diffusion,
    pub p: usize,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_y: Option<usize>,
    pub n_dof: usize,
    pub baseline: StiffnessReport<f64>,
    pub methods: Vec<MethodSummary>,
}

enum Exact {
    Modes(Vec<gsfem::oracle::ExactMode1d<f64>>),
    Values(Vec<f64>),
}

impl Exact {
    fn value(&self, j: usize) -> Option<f64> {
        match self {
            Exact::Modes(m) => m.get(j).map(|m| m.lambda),
            Exact::Values(v) => v.get(j).copied(),
        }
    }
}

fn build(cfg: &ExperimentConfig, config: &MethodConfig64) -> Result<SymmetricSystem64> {
    match cfg.problem {
        ProblemKind::Laplace2d => system_2d(cfg.n, cfg.n_y(), config),
        _ => system_1d(cfg.n, config),
    }
}

/// Full spectra of every configured method plus a Galerkin baseline, written as
/// one table per method and a `summary.json`. Returns `None` (after a warning)
/// when the method list is empty.
pub fn run_spectrum(cfg: &ExperimentConfig) -> Result<Option<SpectrumSummary>> {
    cfg.validate()?;
    let methods = cfg.methods()?;
    if methods.is_empty() {
        log::warn!("no methods configured; nothing to do");
        return Ok(None);
    }
    let kappa = cfg.diffusion()?;
    let with_functions = cfg.problem == ProblemKind::Laplace1d && cfg.eigenfunctions;
    let baseline = ResolvedMethod {
        label: "baseline".into(),
        config: MethodConfig64::fem(cfg.p)
            .map_err(|e| ExperimentError::Config(e.to_string()))?
            .with_diffusion(kappa)
            .with_edge_scale(cfg.edge_scale),
    };

    let mut jobs: Vec<&ResolvedMethod> = vec![&baseline];
    jobs.extend(methods.iter());
    let solved: Vec<(SymmetricSystem64, Spectrum64)> = jobs
        .par_iter()
        .enumerate()
        .map(|(k, m)| {
            let system = build(cfg, &m.config)?;
            let spectrum = if with_functions && k > 0 {
                solve_gevp(&system)?
            } else {
                solve_gevp_values(&system)?
            };
            Ok((system, spectrum))
        })
        .collect::<Result<_>>()?;
    let n_dof = solved[0].0.order();

    let exact = match cfg.problem {
        ProblemKind::Laplace1d => Exact::Modes(exact_spectrum_1d(n_dof)),
        ProblemKind::Laplace2d => Exact::Values(exact_spectrum_2d(n_dof).into_iter().map(|m| m.lambda).collect()),
        ProblemKind::VariableKappa => {
            let location = cfg.reference.path.clone().unwrap_or_else(|| cfg.outputs.dir.clone());
            Exact::Values(obtain_reference(&location, kappa, cfg.reference.generate)?.eigenvalues)
        }
    };

    let base_report = condition_number(&solved[0].1.eigenvalues)?;
    let mesh = Mesh1D64::unit(cfg.n)?;
    let mut summaries = Vec::with_capacity(methods.len());
    for (method, (_, spectrum)) in methods.iter().zip(&solved[1..]) {
        let functions = match (&exact, with_functions) {
            (Exact::Modes(modes), true) => Some(eigenfunction_errors(spectrum, modes, &mesh, cfg.p)?),
            _ => None,
        };
        let rows: Vec<Vec<String>> = spectrum
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(j, &lh)| {
                let reference = exact.value(j);
                let (l2, h1) = match functions.as_ref().and_then(|f| f.get(j)) {
                    Some(FunctionError::Value { l2, h1 }) => (fmt17(*l2), fmt17(*h1)),
                    Some(FunctionError::Multiplicity) => ("multiplicity".into(), "multiplicity".into()),
                    None => (String::new(), String::new()),
                };
                vec![
                    (j + 1).to_string(),
                    fmt17(lh),
                    fmt_opt(reference),
                    fmt_opt(reference.map(|l| (lh - l) / l)),
                    l2,
                    h1,
                ]
            })
            .collect();

        let stem = slug(&method.label);
        let mut files = Vec::new();
        for format in &cfg.outputs.formats {
            let name = match format {
                OutputFormat::Csv => {
                    let name = format!("{stem}.csv");
                    write_csv(&cfg.outputs.dir.join(&name), &SPECTRUM_HEADER, &rows)?;
                    name
                }
                OutputFormat::Json => {
                    let name = format!("{stem}.json");
                    let records: Vec<serde_json::Map<String, serde_json::Value>> = rows
                        .iter()
                        .map(|row| {
                            SPECTRUM_HEADER
                                .iter()
                                .zip(row)
                                .map(|(k, v)| (k.to_string(), serde_json::Value::String(v.clone())))
                                .collect()
                        })
                        .collect();
                    write_json(&cfg.outputs.dir.join(&name), &records)?;
                    name
                }
            };
            files.push(name);
        }

        let report = condition_number(&spectrum.eigenvalues)?;
        let ratio = reduction_ratios(&base_report, &report);
        summaries.push(MethodSummary {
            label: method.label.clone(),
            method: method.config.method,
            params: method.config.params,
            lambda_min: report.lambda_min,
            lambda_max: report.lambda_max,
            sigma: report.sigma,
            rho: ratio.rho,
            rho_percent: ratio.percent,
            max_residual: spectrum.diagnostics.max_residual,
            trace_defect: spectrum.diagnostics.trace_defect,
            iterations: spectrum.diagnostics.iterations,
            files,
        });
    }

    let summary = SpectrumSummary {
        problem: cfg.problem,
        kappa,
        p: cfg.p,
        n: cfg.n,
        n_y: (cfg.problem == ProblemKind::Laplace2d).then(|| cfg.n_y()),
        n_dof,
        baseline: base_report,
        methods: summaries,
    };
    write_json(&cfg.outputs.dir.join("summary.json"), &summary)?;
    Ok(Some(summary))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceColumn {
    pub label: String,
    /// signed `(λ^h_1 − λ_1)/λ_1` per entry of `n_list`
    pub errors: Vec<f64>,
    /// least-squares slope of `log|error|` against `log h`; `None` when some
    /// error is exactly zero
    pub order: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub problem: ProblemKind,
    pub p: usize,
    pub n_list: Vec<usize>,
    pub columns: Vec<ConvergenceColumn>,
}

/// First-eigenvalue errors on a sequence of uniform meshes (`N × N` in 2D).
pub fn convergence_table(
    problem: ProblemKind,
    n_list: &[usize],
    methods: &[ResolvedMethod],
) -> Result<Vec<ConvergenceColumn>> {
    let exact = match problem {
        ProblemKind::Laplace1d => std::f64::consts::PI.powi(2),
        ProblemKind::Laplace2d => 2.0 * std::f64::consts::PI.powi(2),
        ProblemKind::VariableKappa => {
            return Err(ExperimentError::Config(
                "convergence runs need a problem with a known first eigenvalue".into(),
            ))
        }
    };
    let jobs: Vec<(usize, usize)> = (0..methods.len())
        .flat_map(|m| (0..n_list.len()).map(move |k| (m, k)))
        .collect();
    let errors: Vec<f64> = jobs
        .par_iter()
        .map(|&(m, k)| {
            let n = n_list[k];
            let system = match problem {
                ProblemKind::Laplace2d => system_2d(n, n, &methods[m].config)?,
                _ => system_1d(n, &methods[m].config)?,
            };
            Ok((lowest_eigenvalue(&system)? - exact) / exact)
        })
        .collect::<Result<_>>()?;
    let h: Vec<f64> = n_list.iter().map(|&n| 1.0 / n as f64).collect();
    Ok(methods
        .iter()
        .enumerate()
        .map(|(m, method)| {
            let errors = errors[m * n_list.len()..(m + 1) * n_list.len()].to_vec();
            let magnitudes: Vec<f64> = errors.iter().map(|e| e.abs()).collect();
            ConvergenceColumn {
                label: method.label.clone(),
                order: fit_order(&h, &magnitudes).ok(),
                errors,
            }
        })
        .collect())
}

/// Writes `convergence.csv` (and/or `.json`): one column per method, one row
/// per mesh, and a final `order` row.
pub fn run_convergence(cfg: &ExperimentConfig) -> Result<Option<ConvergenceTable>> {
    cfg.validate()?;
    let n_list = cfg
        .n_list
        .clone()
        .ok_or_else(|| ExperimentError::Config("convergence runs need n_list".into()))?;
    if n_list.len() < 3 {
        return Err(ExperimentError::Config(format!(
            "n_list needs at least 3 meshes, got {}",
            n_list.len()
        )));
    }
    let methods = cfg.methods()?;
    if methods.is_empty() {
        log::warn!("no methods configured; nothing to do");
        return Ok(None);
    }
    let columns = convergence_table(cfg.problem, &n_list, &methods)?;
    for c in columns.iter().filter(|c| c.order.is_none()) {
        log::warn!("{}: order not fitted (an error is exactly zero)", c.label);
    }
    let table = ConvergenceTable {
        problem: cfg.problem,
        p: cfg.p,
        n_list: n_list.clone(),
        columns,
    };
    for format in &cfg.outputs.formats {
        match format {
            OutputFormat::Csv => {
                let mut header = vec!["N"];
                header.extend(table.columns.iter().map(|c| c.label.as_str()));
                let mut rows: Vec<Vec<String>> = n_list
                    .iter()
                    .enumerate()
                    .map(|(k, n)| {
                        let mut row = vec![n.to_string()];
                        row.extend(table.columns.iter().map(|c| fmt17(c.errors[k])));
                        row
                    })
                    .collect();
                let mut order = vec!["order".to_string()];
                order.extend(table.columns.iter().map(|c| fmt_opt(c.order)));
                rows.push(order);
                write_csv(&cfg.outputs.dir.join("convergence.csv"), &header, &rows)?;
            }
            OutputFormat::Json => write_json(&cfg.outputs.dir.join("convergence.json"), &table)?,
        }
    }
    Ok(Some(table))
}
