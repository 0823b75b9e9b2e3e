//! Eigenvalue and eigenfunction errors, condition numbers, stiffness
//! reduction ratios and empirical convergence orders.

use serde::{Deserialize, Serialize};

use crate::assembly::assemble_mass;
use crate::elements::ReferenceElement;
use crate::matrix::SymmetricMatrix;
use crate::mesh::DofMap;
use crate::oracle::ExactMode1d;
use crate::quadrature::{gauss_legendre, QuadratureFamily};
use crate::{Error, Mesh1D, Result, Scalar, Spectrum};

/// Relative gap below which neighbouring eigenvalues count as one multiple
/// eigenvalue.
pub const MULTIPLICITY_GAP: f64 = 1e-8;

/// Signed relative errors `(λ^h_j − λ_j)/λ_j` over the common prefix.
pub fn eigenvalue_errors<T: Scalar>(computed: &[T], exact: &[T]) -> Result<Vec<T>> {
    computed
        .iter()
        .zip(exact)
        .enumerate()
        .map(|(j, (&lh, &l))| {
            if l == T::zero() {
                Err(Error::DivisionByZero(format!("exact eigenvalue {} is zero", j + 1)))
            } else {
                Ok((lh - l) / l)
            }
        })
        .collect()
}

/// Per-index eigenfunction error, or a marker when the discrete eigenvalue is
/// not isolated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionError<T> {
    Value {
        /// `‖u − u^h‖_{L²}`
        l2: T,
        /// `|u − u^h|_{H¹} / λ`
        h1: T,
    },
    Multiplicity,
}

impl<T: Copy> FunctionError<T> {
    pub fn l2(&self) -> Option<T> {
        match *self {
            FunctionError::Value { l2, .. } => Some(l2),
            FunctionError::Multiplicity => None,
        }
    }

    pub fn h1(&self) -> Option<T> {
        match *self {
            FunctionError::Value { h1, .. } => Some(h1),
            FunctionError::Multiplicity => None,
        }
    }
}

/// L² and normalized H¹ errors of the discrete eigenfunctions on a 1D mesh.
///
/// Each discrete eigenvector is expanded in the nodal basis, scaled to unit
/// L² norm with the consistent mass, sign-aligned with the exact mode, and
/// compared element-wise with a `(p+3)`-point Gauss-Legendre rule.
pub fn eigenfunction_errors<T: Scalar>(
    spectrum: &Spectrum<T>,
    exact: &[ExactMode1d<T>],
    mesh: &Mesh1D<T>,
    p: usize,
) -> Result<Vec<FunctionError<T>>> {
    let vecs = spectrum
        .eigenvectors
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("spectrum carries no eigenvectors".into()))?;
    let dofs = DofMap::new_1d(mesh, p);
    if vecs.cols() != dofs.n_dof() {
        return Err(Error::InvalidArgument(format!(
            "eigenvector length {} does not match {} dofs",
            vecs.cols(),
            dofs.n_dof()
        )));
    }
    let m_g = assemble_mass(mesh, p, QuadratureFamily::GaussLegendre)?;
    let elem = ReferenceElement::<T>::new(p)?;
    let rule = gauss_legendre::<T>(p + 3)?;
    let val = elem.eval_basis(rule.points());
    let der = elem.eval_basis_deriv(rule.points());
    let two = T::lit(2.0);
    let ev = &spectrum.eigenvalues;
    let gap = T::lit(MULTIPLICITY_GAP);
    let isolated = |j: usize| {
        let near = |k: usize| (ev[j] - ev[k]).abs() <= gap * ev[j].abs().max(ev[k].abs());
        !(j > 0 && near(j - 1)) && !(j + 1 < ev.len() && near(j + 1))
    };

    let count = exact.len().min(ev.len());
    let mut out = Vec::with_capacity(count);
    for (j, mode) in exact.iter().enumerate().take(count) {
        if !isolated(j) {
            out.push(FunctionError::Multiplicity);
            continue;
        }
        let x = vecs.row(j);
        let norm = m_g.bilinear(x, x).sqrt();
        // per-element samples of u^h, (u^h)' and the exact pair
        let mut cross = T::zero();
        let mut samples = Vec::with_capacity(mesh.n_elements() * rule.len());
        for e in 0..mesh.n_elements() {
            let (xl, xr) = mesh.element(e);
            let h = xr - xl;
            let loc = dofs.element(e);
            for (k, (xi, w)) in rule.iter().enumerate() {
                let (mut uh, mut duh) = (T::zero(), T::zero());
                for (a, g) in loc.iter().enumerate() {
                    if let Some(g) = *g {
                        uh += x[g] * val.get(a, k);
                        duh += x[g] * der.get(a, k);
                    }
                }
                uh /= norm;
                duh = duh / norm * two / h;
                let pt = (xl + xr) / two + h / two * xi;
                let wj = w * h / two;
                let u = mode.value(pt);
                cross += wj * u * uh;
                samples.push((wj, u, mode.slope(pt), uh, duh));
            }
        }
        let s = if cross < T::zero() { -T::one() } else { T::one() };
        let (mut l2, mut h1) = (T::zero(), T::zero());
        for (w, u, du, uh, duh) in samples {
            l2 += w * (u - s * uh) * (u - s * uh);
            h1 += w * (du - s * duh) * (du - s * duh);
        }
        out.push(FunctionError::Value {
            l2: l2.sqrt(),
            h1: h1.sqrt() / mode.lambda,
        });
    }
    Ok(out)
}

/// `λ_min`, `λ_max` and `σ = λ_max/λ_min` of one discrete spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StiffnessReport<T> {
    pub lambda_min: T,
    pub lambda_max: T,
    pub sigma: T,
}

pub fn condition_number<T: Scalar>(eigenvalues: &[T]) -> Result<StiffnessReport<T>> {
    let (Some(&first), Some(_)) = (eigenvalues.first(), eigenvalues.last()) else {
        return Err(Error::InvalidArgument("empty spectrum".into()));
    };
    let lambda_min = eigenvalues.iter().copied().fold(first, T::min);
    let lambda_max = eigenvalues.iter().copied().fold(first, T::max);
    if !(lambda_min > T::zero()) {
        return Err(Error::IndefiniteSystem(lambda_min.to_f64_lossy()));
    }
    Ok(StiffnessReport {
        lambda_min,
        lambda_max,
        sigma: lambda_max / lambda_min,
    })
}

/// `ρ = σ_base/σ_other` and `ϱ = 100 (1 − 1/ρ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReductionRatio<T> {
    pub rho: T,
    pub percent: T,
}

pub fn reduction_ratios<T: Scalar>(base: &StiffnessReport<T>, other: &StiffnessReport<T>) -> ReductionRatio<T> {
    let rho = base.sigma / other.sigma;
    ReductionRatio {
        rho,
        percent: T::lit(100.0) * (T::one() - rho.recip()),
    }
}

/// Least-squares slope of `log(error)` against `log(h)`.
pub fn fit_order<T: Scalar>(h: &[T], error: &[T]) -> Result<T> {
    if h.len() != error.len() {
        return Err(Error::InvalidArgument(format!(
            "{} mesh sizes but {} errors",
            h.len(),
            error.len()
        )));
    }
    if h.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "order fit needs at least 3 points, got {}",
            h.len()
        )));
    }
    if let Some(bad) = error.iter().chain(h).find(|v| !(**v > T::zero()) || !v.is_finite()) {
        return Err(Error::InvalidData(format!(
            "order fit needs positive finite data, got {bad}"
        )));
    }
    let n = T::from_usize_lossy(h.len());
    let xs: Vec<T> = h.iter().map(|v| v.ln()).collect();
    let ys: Vec<T> = error.iter().map(|v| v.ln()).collect();
    let mx = xs.iter().copied().sum::<T>() / n;
    let my = ys.iter().copied().sum::<T>() / n;
    let sxy: T = xs.iter().zip(&ys).map(|(&x, &y)| (x - mx) * (y - my)).sum();
    let sxx: T = xs.iter().map(|&x| (x - mx) * (x - mx)).sum();
    if sxx == T::zero() {
        return Err(Error::InvalidData("all mesh sizes are equal".into()));
    }
    Ok(sxy / sxx)
}

/// Energies `xᵀ K x / xᵀ M x` of the discrete eigenvectors in spectrum order.
pub fn eigenvector_energies<T: Scalar>(
    k: &SymmetricMatrix<T>,
    m: &SymmetricMatrix<T>,
    spectrum: &Spectrum<T>,
) -> Result<Vec<T>> {
    let vecs = spectrum
        .eigenvectors
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("spectrum carries no eigenvectors".into()))?;
    Ok((0..vecs.rows())
        .map(|j| {
            let x = vecs.row(j);
            k.bilinear(x, x) / m.bilinear(x, x)
        })
        .collect())
}

/// Whether sorted eigenpairs come with non-decreasing energies, allowing a
/// relative slack `tol`.
pub fn energies_monotone<T: Scalar>(energies: &[T], tol: T) -> bool {
    energies.windows(2).all(|w| w[1] >= w[0] * (T::one() - tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{assemble_stiffness, build_system};
    use crate::eigensolve::solve_gevp;
    use crate::oracle::{analytic_relative_error, exact_spectrum_1d};
    use crate::{Diffusion, MethodConfig, ParameterTriple};
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    #[test]
    fn relative_errors() {
        assert_eq!(eigenvalue_errors(&[2.0, 3.0], &[2.0, 3.0, 4.0]).unwrap(), vec![0.0, 0.0]);
        assert!(matches!(eigenvalue_errors(&[1.0], &[0.0]), Err(Error::DivisionByZero(_))));

        let mesh = Mesh1D::<f64>::unit(4).unwrap();
        let s = solve_gevp(&build_system(&mesh, &MethodConfig::fem(1).unwrap()).unwrap()).unwrap();
        let exact: Vec<f64> = exact_spectrum_1d(3).iter().map(|m| m.lambda).collect();
        let err = eigenvalue_errors(&s.eigenvalues, &exact).unwrap();
        let oracle = analytic_relative_error(1, 4, &ParameterTriple::galerkin()).unwrap();
        assert!(err[0] > 0.0);
        assert_relative_eq!(err[0], oracle, max_relative = 1e-9);
    }

    #[test]
    fn condition_numbers() {
        let r = condition_number(&[1.0]).unwrap();
        assert_eq!(r.sigma, 1.0);
        assert!(matches!(condition_number(&[-1.0, 2.0]), Err(Error::IndefiniteSystem(_))));
        assert!(condition_number::<f64>(&[]).is_err());
        let rr = reduction_ratios(&r, &r);
        assert_eq!((rr.rho, rr.percent), (1.0, 0.0));
    }

    #[test]
    fn order_fit() {
        let h = [0.5, 0.25, 0.125, 0.0625];
        let e: Vec<f64> = h.iter().map(|x| 3.0 * x * x).collect();
        assert_abs_diff_eq!(fit_order(&h, &e).unwrap(), 2.0, epsilon = 1e-12);
        assert!(fit_order(&h[..2], &e[..2]).is_err());
        assert!(fit_order(&h, &[1.0, 0.0, 1.0, 1.0]).is_err());
    }

    fn spectrum_and_errors(method: MethodConfig<f64>, n: usize) -> (Spectrum<f64>, Vec<FunctionError<f64>>) {
        let mesh = Mesh1D::unit(n).unwrap();
        let p = method.degree;
        let s = solve_gevp(&build_system(&mesh, &method).unwrap()).unwrap();
        let exact = exact_spectrum_1d(8);
        let e = eigenfunction_errors(&s, &exact, &mesh, p).unwrap();
        (s, e)
    }

    #[test]
    fn gsfem_and_fem_share_linear_eigenfunctions() {
        let (_, fem) = spectrum_and_errors(MethodConfig::fem(1).unwrap(), 40);
        let (_, gs) = spectrum_and_errors(MethodConfig::gsfem(1, 1.0 / 12.0, 1.0 / 360.0).unwrap(), 40);
        for (a, b) in fem.iter().zip(&gs) {
            assert_abs_diff_eq!(a.l2().unwrap(), b.l2().unwrap(), epsilon = 1e-10);
            assert_abs_diff_eq!(a.h1().unwrap(), b.h1().unwrap(), epsilon = 1e-10);
        }
    }

    #[test]
    fn sign_flip_does_not_change_errors() {
        let (mut s, e) = spectrum_and_errors(MethodConfig::fem(2).unwrap(), 10);
        let v = s.eigenvectors.as_mut().unwrap();
        for x in v.row_mut(1) {
            *x = -*x;
        }
        let mesh = Mesh1D::unit(10).unwrap();
        let e2 = eigenfunction_errors(&s, &exact_spectrum_1d(8), &mesh, 2).unwrap();
        assert_eq!(e, e2);
    }

    #[test]
    fn l2_error_converges_quadratically_for_linears() {
        let ns = [16usize, 32, 64];
        let errs: Vec<f64> = ns
            .iter()
            .map(|&n| spectrum_and_errors(MethodConfig::fem(1).unwrap(), n).1[0].l2().unwrap())
            .collect();
        let hs: Vec<f64> = ns.iter().map(|&n| 1.0 / n as f64).collect();
        let order = fit_order(&hs, &errs).unwrap();
        assert!((order - 2.0).abs() < 0.1, "{order}");
        assert!(errs[2] <= 5.0 * hs[2] * hs[2]);
    }

    #[test]
    fn repeated_eigenvalues_are_marked() {
        let mut s = spectrum_and_errors(MethodConfig::fem(1).unwrap(), 8).0;
        s.eigenvalues[1] = s.eigenvalues[0];
        let mesh = Mesh1D::unit(8).unwrap();
        let e = eigenfunction_errors(&s, &exact_spectrum_1d(3), &mesh, 1).unwrap();
        assert_eq!(e[0], FunctionError::Multiplicity);
        assert_eq!(e[1], FunctionError::Multiplicity);
        assert!(e[2].l2().is_some());
    }

    #[test]
    fn energies_of_linear_gsfem_follow_index_below_threshold() {
        let mesh = Mesh1D::<f64>::unit(40).unwrap();
        let k = assemble_stiffness(&mesh, 1, &Diffusion::default(), None).unwrap();
        let m = assemble_mass(&mesh, 1, QuadratureFamily::GaussLegendre).unwrap();
        for (eta_m, monotone) in [(0.03, true), (0.05, false)] {
            let cfg = MethodConfig::gsfem(1, 1.0 / 12.0, eta_m).unwrap();
            let s = solve_gevp(&build_system(&mesh, &cfg).unwrap()).unwrap();
            let en = eigenvector_energies(&k, &m, &s).unwrap();
            assert_eq!(energies_monotone(&en, 1e-12), monotone, "eta_m = {eta_m}");
        }
    }

    #[test]
    fn energies_need_vectors() {
        let s = Spectrum {
            eigenvalues: vec![1.0],
            eigenvectors: None,
            diagnostics: crate::eigensolve::Diagnostics {
                max_residual: None,
                trace_defect: 0.0,
                iterations: 0,
                cholesky_ok: true,
            },
        };
        let i = SymmetricMatrix::<f64>::identity(1);
        assert!(eigenvector_energies(&i, &i, &s).is_err());
    }

    proptest! {
        #[test]
        fn percent_identity(a in 1.0f64..1e6, b in 1.0f64..1e6) {
            let base = StiffnessReport { lambda_min: 1.0, lambda_max: a, sigma: a };
            let other = StiffnessReport { lambda_min: 1.0, lambda_max: b, sigma: b };
            let r = reduction_ratios(&base, &other);
            prop_assert!((r.percent - 100.0 * (1.0 - 1.0 / r.rho)).abs() < 1e-9);
            prop_assert!(r.rho > 0.0);
        }

        #[test]
        fn fitted_slope_recovers_power(k in 0.5f64..9.0, c in 0.01f64..100.0) {
            let h = [0.2, 0.1, 0.05, 0.025];
            let e: Vec<f64> = h.iter().map(|x: &f64| c * x.powf(k)).collect();
            prop_assert!((fit_order(&h, &e).unwrap() - k).abs() < 1e-9);
        }
    }
}
