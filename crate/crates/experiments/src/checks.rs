//! Property checks that are not tables: error bounds, agreement with closed
//! forms, tensor-product structure and solver hygiene. Each returns a
//! [`TableReport`] so it can be judged cell by cell like a table.

use gsfem::assembly::{build_system_2d, build_system_2d_kronecker};
use gsfem::eigensolve::{b_orthonormality_defect, solve_gevp, solve_gevp_values};
use gsfem::elements::ReferenceElement;
use gsfem::matrix::SymmetricMatrix;
use gsfem::metrics::{eigenvector_energies, energies_monotone, fit_order};
use gsfem::oracle::{
    analytic_spectrum, asymptotic_ratio, eigenvalue_ratio, optimal_params, stiffness_ratio_formula,
    taylor_series_coefficients, RatioFamily,
};
use gsfem::quadrature::{QuadratureFamily, QuadratureRule, MAX_POINTS};
use gsfem::{
    Diffusion, Mesh1D64, MethodConfig64, MethodKind, ParameterTriple, ParameterTriple64, Rational, RationalTriple,
    SymmetricSystem64, TensorMesh2D64,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rayon::prelude::*;

use crate::error::Result;
use crate::presets::{table2_softness, table4_params, to_f64, BLENDING_ALPHA};
use crate::runner::{lowest_eigenvalue, stiffness_1d, system_1d, system_2d};
use crate::tables::{Cell, TableReport, Tolerance};

/// Below this `t` the relative error is summed from its exact Taylor series,
/// avoiding the cancellation in `λ_h/λ − 1`.
pub const SERIES_CUTOFF: f64 = 1.0;
const SERIES_ORDERS: usize = 24;

/// `(λ_h − λ)/λ` for linear elements as a function of `t = jπh`, accurate to
/// a few units in the last place of the error itself.
#[derive(Debug, Clone)]
pub struct LinearError {
    params: ParameterTriple64,
    /// `c₂, c₄, …` in increasing order
    series: Vec<f64>,
}

impl LinearError {
    pub fn new(params: RationalTriple) -> Self {
        let big = params.map(|r| BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom())));
        let series = taylor_series_coefficients(&big, SERIES_ORDERS)
            .iter()
            .map(|c| c.to_f64().unwrap_or(f64::NAN))
            .collect();
        Self {
            params: params.to_f64(),
            series,
        }
    }

    pub fn at(&self, t: f64) -> f64 {
        if t <= SERIES_CUTOFF {
            let s = t * t;
            self.series.iter().rev().fold(0.0, |acc, &c| acc * s + c) * s
        } else {
            eigenvalue_ratio(t, &self.params) - 1.0
        }
    }
}

/// `|λ_h,j − λ_j|/λ_j < C (jπh)^k` for every `j < N`, `N ∈ 4..=n_max`, with
/// the three optimal parameter sets.
pub fn superconvergence_bounds(n_max: usize) -> Result<TableReport> {
    let mut report = TableReport::new("bounds", "pointwise superconvergence bounds, linear elements");
    let cases: [(&str, RationalTriple, f64, i32); 3] = [
        ("GSFEM", ParameterTriple::gsfem_optimal(), 1.0 / 3024.0, 6),
        ("SoftFEMBQ", ParameterTriple::softfem_bq_optimal(), 1.0 / 1440.0, 6),
        ("GSFEMBQ", ParameterTriple::gsfem_bq_optimal(), 1.0 / 30240.0, 8),
    ];
    for (name, params, c, k) in cases {
        let err = LinearError::new(params);
        let mut worst = 0.0f64;
        let mut violations = 0usize;
        for n in 4..=n_max {
            for j in 1..n {
                let t = std::f64::consts::PI * j as f64 / n as f64;
                let ratio = err.at(t).abs() / (c * t.powi(k));
                if ratio >= 1.0 || ratio.is_nan() {
                    violations += 1;
                }
                worst = worst.max(ratio);
            }
        }
        let row = format!("N=4..{n_max}");
        report.push(Cell::new(&row, format!("{name} worst error/bound"), worst, 1.0, Tolerance::Below(1.0)));
        report.push(Cell::new(&row, format!("{name} violations"), violations as f64, 0.0, Tolerance::Exact));
    }
    Ok(report)
}

/// Largest relative gap between two ascending spectra of equal length.
pub fn max_relative_gap(computed: &[f64], expected: &[f64]) -> f64 {
    if computed.len() != expected.len() {
        return f64::INFINITY;
    }
    computed
        .iter()
        .zip(expected)
        .map(|(a, b)| ((a - b) / b).abs())
        .fold(0.0, f64::max)
}

/// Direct linear-element eigenvalues against the closed form.
pub fn oracle_equivalence(n_list: &[usize]) -> Result<TableReport> {
    let mut report = TableReport::new("oracle", "direct solve against closed-form linear-element spectra");
    let r = Rational::new;
    let cases: Vec<(&str, MethodKind, RationalTriple)> = vec![
        ("FEM", MethodKind::Fem, ParameterTriple::galerkin()),
        ("SoftFEM(1/12)", MethodKind::SoftFem, ParameterTriple::new(r(1, 12), r(0, 1), r(1, 1))),
        ("GSFEM optimal", MethodKind::Gsfem, ParameterTriple::gsfem_optimal()),
        ("GSFEM(1/8, 1/96)", MethodKind::Gsfem, ParameterTriple::new(r(1, 8), r(1, 96), r(1, 1))),
        ("SoftFEMBQ optimal", MethodKind::SoftFemBq, ParameterTriple::softfem_bq_optimal()),
        ("SoftFEMBQ(1/12, 1/2)", MethodKind::SoftFemBq, ParameterTriple::new(r(1, 12), r(0, 1), r(1, 2))),
        ("GSFEMBQ optimal", MethodKind::GsfemBq, ParameterTriple::gsfem_bq_optimal()),
        ("GSFEMBQ(1/8, 1/96, 1/2)", MethodKind::GsfemBq, table4_params(1)?),
        ("GSFEMBQ(alpha=0)", MethodKind::GsfemBq, optimal_params(r(0, 1))),
    ];
    let jobs: Vec<(usize, usize)> = (0..cases.len())
        .flat_map(|c| n_list.iter().map(move |&n| (c, n)))
        .collect();
    let gaps: Vec<f64> = jobs
        .par_iter()
        .map(|&(c, n)| {
            let (_, method, params) = &cases[c];
            let params = params.to_f64();
            let config = MethodConfig64::new(*method, 1, params)?;
            let direct = solve_gevp_values(&system_1d(n, &config)?)?.eigenvalues;
            let mut closed = analytic_spectrum(n, &params)?;
            closed.sort_by(f64::total_cmp);
            Ok(max_relative_gap(&direct, &closed))
        })
        .collect::<Result<_>>()?;
    for ((c, n), gap) in jobs.iter().zip(gaps) {
        report.push(Cell::new(format!("N={n}"), cases[*c].0, gap, 0.0, Tolerance::AtMost(1e-9)));
    }
    Ok(report)
}

/// `ρ(h)` from direct solves against the closed forms at `h = 1/n`, and the
/// exact `h → 0` limits.
pub fn asymptotic_ratios(n: usize) -> Result<TableReport> {
    let mut report = TableReport::new("asymptotic", "stiffness reduction ratios of linear elements");
    let h = 1.0 / n as f64;
    let fem = stiffness_1d(n, &MethodConfig64::fem(1)?)?;
    let r = Rational::new;
    let cases: [(&str, MethodKind, RationalTriple, RatioFamily<f64>, Rational); 4] = [
        ("rho_gs", MethodKind::Gsfem, ParameterTriple::gsfem_optimal(), RatioFamily::Gsfem, r(17, 10)),
        ("rho_sq", MethodKind::SoftFemBq, ParameterTriple::softfem_bq_optimal(), RatioFamily::SoftFemBq, r(7, 4)),
        ("rho_gsq", MethodKind::GsfemBq, ParameterTriple::gsfem_bq_optimal(), RatioFamily::GsfemBq, r(257, 160)),
        ("rho_gsq(alpha=0)", MethodKind::GsfemBq, optimal_params(r(0, 1)), RatioFamily::Family(0.0), r(37, 20)),
    ];
    let computed: Vec<f64> = cases
        .par_iter()
        .map(|(_, method, params, _, _)| {
            let report = stiffness_1d(n, &MethodConfig64::new(*method, 1, params.to_f64())?)?;
            Ok(fem.sigma / report.sigma)
        })
        .collect::<Result<_>>()?;
    for ((name, _, params, family, limit), rho) in cases.iter().zip(computed) {
        let (closed, _) = stiffness_ratio_formula(*family, h);
        report.push(Cell::new(format!("h=1/{n}"), *name, rho, closed, Tolerance::Relative(1e-9)));
        report.push(Cell::exact("limit", *name, asymptotic_ratio(params), *limit));
    }
    Ok(report)
}

/// Table-4 softness pair and blending weight for degree `p`, as `f64`.
fn second_set(p: usize) -> Result<ParameterTriple64> {
    Ok(table4_params(p)?.to_f64())
}

fn method_configs(p: usize, params: ParameterTriple64) -> Result<Vec<MethodConfig64>> {
    let ParameterTriple { eta_k, eta_m, alpha } = params;
    Ok(vec![
        MethodConfig64::fem(p)?,
        MethodConfig64::soft_fem(p, eta_k)?,
        MethodConfig64::gsfem(p, eta_k, eta_m)?,
        MethodConfig64::soft_fem_bq(p, eta_k, alpha)?,
        MethodConfig64::gsfem_bq(p, params)?,
    ])
}

fn relative_entry_gap(a: &SymmetricMatrix<f64>, b: &SymmetricMatrix<f64>) -> f64 {
    a.max_abs_diff(b) / a.max_abs().max(f64::MIN_POSITIVE)
}

/// Direct 2D assembly against Kronecker forms, 2D spectra against sums of 1D
/// spectra, and first-eigenvalue convergence orders on square meshes.
pub fn two_d_properties(meshes: &[usize]) -> Result<TableReport> {
    let mut report = TableReport::new("two_d", "tensor-product structure and convergence in 2D");

    for p in [1, 2] {
        for (nx, ny) in [(8, 8), (5, 7)] {
            let mesh = TensorMesh2D64::unit_square(nx, ny)?;
            for cfg in method_configs(p, second_set(p)?)? {
                let direct = build_system_2d(&mesh, &cfg)?;
                let kron = build_system_2d_kronecker(&mesh, &cfg)?;
                let gap = relative_entry_gap(&direct.a, &kron.a).max(relative_entry_gap(&direct.b, &kron.b));
                report.push(Cell::new(
                    format!("kron p={p} {nx}x{ny}"),
                    cfg.method.name(),
                    gap,
                    0.0,
                    Tolerance::AtMost(1e-12),
                ));
            }
        }
    }

    let sum_jobs: Vec<(usize, MethodConfig64, usize, usize)> = [1, 2]
        .into_iter()
        .flat_map(|p| {
            let eta_k = second_set(p).map(|s| s.eta_k).unwrap_or(0.0);
            [(8, 8), (5, 7)].into_iter().flat_map(move |(nx, ny)| {
                [MethodConfig64::fem(p), MethodConfig64::soft_fem(p, eta_k)]
                    .into_iter()
                    .filter_map(|c| c.ok())
                    .map(move |c| (p, c, nx, ny))
            })
        })
        .collect();
    let sum_gaps: Vec<f64> = sum_jobs
        .par_iter()
        .map(|(_, cfg, nx, ny)| {
            let two_d = solve_gevp_values(&system_2d(*nx, *ny, cfg)?)?.eigenvalues;
            let lx = solve_gevp_values(&system_1d(*nx, cfg)?)?.eigenvalues;
            let ly = solve_gevp_values(&system_1d(*ny, cfg)?)?.eigenvalues;
            let mut sums: Vec<f64> = lx.iter().flat_map(|a| ly.iter().map(move |b| a + b)).collect();
            sums.sort_by(f64::total_cmp);
            Ok(max_relative_gap(&two_d, &sums))
        })
        .collect::<Result<_>>()?;
    for ((p, cfg, nx, ny), gap) in sum_jobs.iter().zip(sum_gaps) {
        report.push(Cell::new(
            format!("sums p={p} {nx}x{ny}"),
            cfg.method.name(),
            gap,
            0.0,
            Tolerance::AtMost(1e-9),
        ));
    }

    let exact = 2.0 * std::f64::consts::PI.powi(2);
    let order_jobs: Vec<(usize, MethodConfig64)> = [1, 2]
        .into_iter()
        .flat_map(|p| {
            let s = second_set(p).unwrap_or(ParameterTriple::new(0.0, 0.0, 1.0));
            [
                MethodConfig64::fem(p),
                MethodConfig64::soft_fem(p, s.eta_k),
                MethodConfig64::gsfem(p, s.eta_k, s.eta_m),
            ]
            .into_iter()
            .filter_map(|c| c.ok())
            .map(move |c| (p, c))
        })
        .collect();
    let errors: Vec<Vec<f64>> = order_jobs
        .par_iter()
        .map(|(_, cfg)| {
            meshes
                .iter()
                .map(|&n| Ok(((lowest_eigenvalue(&system_2d(n, n, cfg)?)? - exact) / exact).abs()))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let h: Vec<f64> = meshes.iter().map(|&n| 1.0 / n as f64).collect();
    for ((p, cfg), err) in order_jobs.iter().zip(errors) {
        let order = fit_order(&h, &err)?;
        report.push(Cell::new(
            format!("order p={p}"),
            cfg.label(),
            order,
            2.0 * *p as f64,
            Tolerance::Absolute(0.15),
        ));
    }
    Ok(report)
}

fn hygiene_systems() -> Result<Vec<SymmetricSystem64>> {
    let mut systems = Vec::new();
    for p in 1..=3 {
        let (k, m) = table2_softness(p)?;
        let params = ParameterTriple::new(to_f64(k), to_f64(m), BLENDING_ALPHA);
        for cfg in method_configs(p, params)? {
            systems.push(system_1d(24, &cfg)?);
        }
        for cfg in method_configs(p, second_set(p)?)? {
            systems.push(system_1d(17, &cfg.with_diffusion(Diffusion::ExpXPlusXSquared))?);
        }
    }
    systems.push(system_1d(16, &MethodConfig64::fem(4)?)?);
    systems.push(system_1d(12, &MethodConfig64::fem(4)?.with_diffusion(Diffusion::ExpXMinusXSquared))?);
    for cfg in method_configs(2, second_set(2)?)? {
        systems.push(system_2d(4, 5, &cfg)?);
    }
    Ok(systems)
}

/// Residuals, `B`-orthonormality and trace consistency of full solves, plus
/// quadrature exactness and nodal basis identities.
pub fn solver_hygiene() -> Result<TableReport> {
    let mut report = TableReport::new("hygiene", "solver diagnostics, quadrature and basis identities");
    let systems = hygiene_systems()?;
    let rows: Vec<(f64, f64, f64)> = systems
        .par_iter()
        .map(|s| {
            let spectrum = solve_gevp(s)?;
            let orth = b_orthonormality_defect(s, &spectrum).unwrap_or(f64::NAN);
            Ok((
                spectrum.diagnostics.max_residual.unwrap_or(f64::NAN),
                orth,
                spectrum.diagnostics.trace_defect,
            ))
        })
        .collect::<Result<_>>()?;
    for (s, (res, orth, trace)) in systems.iter().zip(rows) {
        let row = format!("{} on {}", s.config.label(), s.description);
        report.push(Cell::new(&row, "residual", res, 0.0, Tolerance::AtMost(1e-8)));
        report.push(Cell::new(&row, "b_orthonormality", orth, 0.0, Tolerance::AtMost(1e-8)));
        report.push(Cell::new(&row, "trace", trace, 0.0, Tolerance::AtMost(1e-8)));
    }

    for (family, start) in [(QuadratureFamily::GaussLegendre, 1), (QuadratureFamily::GaussLobatto, 2)] {
        let mut worst = 0.0f64;
        for n in start..=MAX_POINTS {
            let rule = QuadratureRule::<f64>::new(family, n)?;
            for k in 0..=rule.exactness_degree() {
                let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                worst = worst.max((rule.integrate(|x| x.powi(k as i32)) - exact).abs());
            }
        }
        report.push(Cell::new(
            format!("{family:?} n<={MAX_POINTS}"),
            "monomial exactness",
            worst,
            0.0,
            Tolerance::AtMost(1e-13),
        ));
    }

    let samples: Vec<f64> = (0..=64).map(|i| -1.0 + i as f64 / 32.0).collect();
    for p in 1..=4 {
        let elem = ReferenceElement::<f64>::new(p)?;
        let mut delta = 0.0f64;
        for (i, &x) in elem.nodes().iter().enumerate() {
            for (j, v) in elem.values_at(x).iter().enumerate() {
                delta = delta.max((v - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
        let (mut unity, mut slope) = (0.0f64, 0.0f64);
        for &x in &samples {
            unity = unity.max((elem.values_at(x).iter().sum::<f64>() - 1.0).abs());
            slope = slope.max(elem.derivatives_at(x).iter().sum::<f64>().abs());
        }
        let row = format!("basis p={p}");
        report.push(Cell::new(&row, "nodal delta", delta, 0.0, Tolerance::AtMost(1e-14)));
        report.push(Cell::new(&row, "partition of unity", unity, 0.0, Tolerance::AtMost(1e-13)));
        report.push(Cell::new(&row, "derivative sum", slope, 0.0, Tolerance::AtMost(1e-12)));
    }
    Ok(report)
}

/// Largest `η_M` in `[0, hi]` (to `tol`) for which GSFEM eigenvector energies
/// stay ordered with the eigenvalues, by bisection.
pub fn eta_m_max(p: usize, n: usize, eta_k: f64, hi: f64, tol: f64) -> Result<f64> {
    let mesh = Mesh1D64::unit(n)?;
    let kappa = Diffusion::default();
    let k = gsfem::assembly::assemble_stiffness(&mesh, p, &kappa, None)?;
    let m = gsfem::assembly::assemble_mass(&mesh, p, QuadratureFamily::GaussLegendre)?;
    let monotone = |eta_m: f64| -> Result<bool> {
        let cfg = MethodConfig64::gsfem(p, eta_k, eta_m)?;
        let s = solve_gevp(&gsfem::assembly::build_system(&mesh, &cfg)?)?;
        Ok(energies_monotone(&eigenvector_energies(&k, &m, &s)?, 1e-12))
    };
    let (mut lo, mut hi) = (0.0, hi);
    if monotone(hi)? {
        return Ok(hi);
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if monotone(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_agrees_with_closed_form_near_cutoff() {
        for params in [
            ParameterTriple::gsfem_optimal(),
            ParameterTriple::softfem_bq_optimal(),
            ParameterTriple::gsfem_bq_optimal(),
            ParameterTriple::galerkin(),
        ] {
            let err = LinearError::new(params);
            for t in [0.7, 0.9, 1.0] {
                let closed = eigenvalue_ratio(t, &params.to_f64()) - 1.0;
                let s = t * t;
                let series = err.series.iter().rev().fold(0.0, |acc, &c| acc * s + c) * s;
                assert!((closed - series).abs() < 1e-15, "t={t} {closed} {series}");
            }
        }
    }

    #[test]
    fn series_leading_terms_vanish_for_optima() {
        let err = LinearError::new(ParameterTriple::gsfem_bq_optimal());
        assert_eq!(&err.series[..3], &[0.0, 0.0, 0.0]);
        assert!(err.series[3] != 0.0);
    }

    #[test]
    fn gap_of_mismatched_lengths_is_infinite() {
        assert_eq!(max_relative_gap(&[1.0], &[1.0, 2.0]), f64::INFINITY);
        assert_eq!(max_relative_gap(&[1.0, 2.0], &[1.0, 2.0]), 0.0);
    }

    #[test]
    fn small_bounds_and_oracle_runs_pass() {
        assert!(superconvergence_bounds(12).unwrap().passed());
        assert!(oracle_equivalence(&[4, 9]).unwrap().passed());
    }

    #[test]
    fn eta_m_threshold_brackets_published_value() {
        // the published p = 1 threshold is 5/144 ≈ 0.0347
        let v = eta_m_max(1, 40, 1.0 / 12.0, 0.1, 1e-4).unwrap();
        assert!(v > 0.03 && v < 0.05, "{v}");
    }
}
