//! Closed-form reference quantities: exact continuum spectra, the discrete
//! eigenpairs of linear elements on uniform 1D meshes, stiffness-ratio
//! formulas, Taylor coefficients of the relative eigenvalue error, and the
//! optimal-parameter family.
//!
//! For linear elements on `N` uniform elements (`h = 1/N`, `t_j = jπh`) the
//! softened generalized problem with blended mass has eigenvalues
//!
//! ```text
//! λ_j = (12/h²) (1 − 2η_K + 2η_K cos t_j) sin²(t_j/2)
//!       / (3 + 18η_M − α + (α − 24η_M) cos t_j + 6η_M cos 2t_j)
//! ```
//!
//! and eigenvectors `sin(k t_j)`, `k = 1..N−1`, for every method in the crate.

use std::ops::Neg;

use num_traits::Num;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, Scalar};

/// Softness and blending parameters `(η_K, η_M, α)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ParameterTriple<T> {
    pub eta_k: T,
    pub eta_m: T,
    pub alpha: T,
}

/// Builds the integer `k` in any numeric type.
fn int<T: Num + Clone + Neg<Output = T>>(k: i64) -> T {
    let mut acc = T::zero();
    let mut unit = T::one();
    let mut m = k.unsigned_abs();
    while m > 0 {
        if m & 1 == 1 {
            acc = acc + unit.clone();
        }
        unit = unit.clone() + unit;
        m >>= 1;
    }
    if k < 0 {
        -acc
    } else {
        acc
    }
}

fn frac<T: Num + Clone + Neg<Output = T>>(num: i64, den: i64) -> T {
    int::<T>(num) / int::<T>(den)
}

impl<T> ParameterTriple<T> {
    pub fn new(eta_k: T, eta_m: T, alpha: T) -> Self {
        Self { eta_k, eta_m, alpha }
    }
}

impl<T: Num + Clone + Neg<Output = T>> ParameterTriple<T> {
    /// Plain Galerkin: `(0, 0, 1)`.
    pub fn galerkin() -> Self {
        Self::new(T::zero(), T::zero(), T::one())
    }

    /// `(1/12, 1/360, 1)`: sixth-order eigenvalue errors with consistent mass.
    pub fn gsfem_optimal() -> Self {
        Self::new(frac(1, 12), frac(1, 360), T::one())
    }

    /// `(1/20, 0, 4/5)`: sixth-order eigenvalue errors without mass penalty.
    pub fn softfem_bq_optimal() -> Self {
        Self::new(frac(1, 20), T::zero(), frac(4, 5))
    }

    /// `(31/252, 23/3780, 26/21)`: eighth-order eigenvalue errors.
    pub fn gsfem_bq_optimal() -> Self {
        Self::new(frac(31, 252), frac(23, 3780), frac(26, 21))
    }

    pub fn map<U>(&self, f: impl Fn(T) -> U) -> ParameterTriple<U> {
        ParameterTriple::new(
            f(self.eta_k.clone()),
            f(self.eta_m.clone()),
            f(self.alpha.clone()),
        )
    }
}

impl ParameterTriple<num_rational::Ratio<i64>> {
    pub fn to_f64(&self) -> ParameterTriple<f64> {
        self.map(|r| *r.numer() as f64 / *r.denom() as f64)
    }
}

/// Family of parameters cancelling the `t²` and `t⁴` error terms for a given
/// blending weight: `η_K = (2α − 1)/12`, `η_M = (5α − 4)/360`.
pub fn optimal_params<T: Num + Clone + Neg<Output = T>>(alpha: T) -> ParameterTriple<T> {
    let two = int::<T>(2);
    let five = int::<T>(5);
    let eta_k = (two * alpha.clone() - T::one()) / int(12);
    let eta_m = (five * alpha.clone() - int(4)) / int(360);
    ParameterTriple::new(eta_k, eta_m, alpha)
}

/// `λ_*,∞` ratio `lim_{h→0} λ_max(FEM) / λ_max(*)` for linear elements:
/// `(3 − 2α + 48η_M) / (1 − 4η_K)`. Exact for rational inputs.
pub fn asymptotic_ratio<T: Num + Clone + Neg<Output = T>>(params: &ParameterTriple<T>) -> T {
    let num = int::<T>(3) - int::<T>(2) * params.alpha.clone() + int::<T>(48) * params.eta_m.clone();
    let den = T::one() - int::<T>(4) * params.eta_k.clone();
    num / den
}

/// `λ_h(t) h² / t²`, the ratio of the discrete to the exact eigenvalue as a
/// function of `t = jπh`.
pub fn eigenvalue_ratio<T: Scalar>(t: T, params: &ParameterTriple<T>) -> T {
    let ParameterTriple { eta_k, eta_m, alpha } = *params;
    let two = T::lit(2.0);
    let c = t.cos();
    let half = (t / two).sin();
    let num = T::lit(12.0) * (T::one() - two * eta_k + two * eta_k * c) * half * half;
    let den = T::lit(3.0) + T::lit(18.0) * eta_m - alpha
        + (alpha - T::lit(24.0) * eta_m) * c
        + T::lit(6.0) * eta_m * (two * t).cos();
    num / (den * t * t)
}

/// Relative error `(λ_h − λ)/λ` of the `j`-th linear-element eigenvalue.
pub fn analytic_relative_error<T: Scalar>(j: usize, n: usize, params: &ParameterTriple<T>) -> Result<T> {
    check_index(j, n)?;
    let t = T::PI() * T::from_usize_lossy(j) / T::from_usize_lossy(n);
    Ok(eigenvalue_ratio(t, params) - T::one())
}

fn check_index(j: usize, n: usize) -> Result<()> {
    if n < 2 || j == 0 || j >= n {
        return Err(Error::InvalidIndex {
            index: j,
            max: n.saturating_sub(1),
        });
    }
    Ok(())
}

/// `j`-th discrete eigenvalue of linear elements on `n` uniform elements of
/// the unit interval, `1 <= j <= n − 1`.
pub fn analytic_eigenvalue_gsfembq<T: Scalar>(j: usize, n: usize, params: &ParameterTriple<T>) -> Result<T> {
    check_index(j, n)?;
    let nf = T::from_usize_lossy(n);
    let t = T::PI() * T::from_usize_lossy(j) / nf;
    let two = T::lit(2.0);
    let ParameterTriple { eta_k, eta_m, alpha } = *params;
    let half = (t / two).sin();
    let num = T::lit(12.0) * nf * nf * (T::one() - two * eta_k + two * eta_k * t.cos()) * half * half;
    let den = T::lit(3.0) + T::lit(18.0) * eta_m - alpha
        + (alpha - T::lit(24.0) * eta_m) * t.cos()
        + T::lit(6.0) * eta_m * (two * t).cos();
    Ok(num / den)
}

/// All `n − 1` closed-form eigenvalues in index order (not sorted).
pub fn analytic_spectrum<T: Scalar>(n: usize, params: &ParameterTriple<T>) -> Result<Vec<T>> {
    (1..n).map(|j| analytic_eigenvalue_gsfembq(j, n, params)).collect()
}

/// Unit-norm eigenvector with components `sin(k t_j)`, `k = 1..n−1`.
pub fn analytic_eigenvector<T: Scalar>(j: usize, n: usize) -> Result<Vec<T>> {
    check_index(j, n)?;
    let t = T::PI() * T::from_usize_lossy(j) / T::from_usize_lossy(n);
    let v: Vec<T> = (1..n).map(|k| (T::from_usize_lossy(k) * t).sin()).collect();
    let norm = v.iter().map(|&x| x * x).sum::<T>().sqrt();
    Ok(v.into_iter().map(|x| x / norm).collect())
}

/// Methods with a closed-form stiffness reduction ratio for linear elements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RatioFamily<T> {
    /// GSFEM at `(1/12, 1/360, 1)`
    Gsfem,
    /// SoftFEMBQ at `(1/20, 0, 4/5)`
    SoftFemBq,
    /// GSFEMBQ at `(31/252, 23/3780, 26/21)`
    GsfemBq,
    /// GSFEMBQ along [`optimal_params`] with the given `α`
    Family(T),
}

/// `ρ(h) = σ_FEM / σ_*` in closed form, with its `h → 0` limit.
pub fn stiffness_ratio_formula<T: Scalar>(family: RatioFamily<T>, h: T) -> (T, T) {
    let c = (T::PI() * h).cos();
    let c2 = (T::lit(2.0) * T::PI() * h).cos();
    let l = T::lit;
    let pair = |a: T, b: T| (a + b * c) / (a - b * c);
    let fem = pair(l(2.0), l(1.0));
    match family {
        RatioFamily::Gsfem => (
            pair(l(5.0), l(1.0)) * fem * (l(123.0) - l(56.0) * c + c2) / (l(123.0) + l(56.0) * c + c2),
            l(17.0) / l(10.0),
        ),
        RatioFamily::SoftFemBq => (
            pair(l(9.0), l(1.0)) * fem / pair(l(11.0), l(4.0)),
            l(7.0) / l(4.0),
        ),
        RatioFamily::GsfemBq => (
            fem * pair(l(95.0), l(31.0)) * (l(1179.0) - l(688.0) * c + l(23.0) * c2)
                / (l(1179.0) + l(688.0) * c + l(23.0) * c2),
            l(257.0) / l(160.0),
        ),
        RatioFamily::Family(alpha) => {
            let params = optimal_params(alpha);
            (
                extreme_ratio(&ParameterTriple::galerkin(), h) / extreme_ratio(&params, h),
                (l(37.0) - l(20.0) * alpha) / (l(20.0) - l(10.0) * alpha),
            )
        }
    }
}

/// `λ(t_{N−1}) / λ(t_1)` from the closed form with `t_1 = πh`.
fn extreme_ratio<T: Scalar>(params: &ParameterTriple<T>, h: T) -> T {
    let t1 = T::PI() * h;
    let tn = T::PI() - t1;
    (eigenvalue_ratio(tn, params) * tn * tn) / (eigenvalue_ratio(t1, params) * t1 * t1)
}

/// `ρ = σ_FEM/σ_*` for arbitrary parameters, from the closed-form extremes
/// over all indices.
pub fn stiffness_ratio_closed_form<T: Scalar>(params: &ParameterTriple<T>, n: usize) -> Result<T> {
    let sigma = |p: &ParameterTriple<T>| -> Result<T> {
        let s = analytic_spectrum(n, p)?;
        let max = s.iter().copied().fold(T::neg_infinity(), T::max);
        let min = s.iter().copied().fold(T::infinity(), T::min);
        Ok(max / min)
    };
    Ok(sigma(&ParameterTriple::galerkin())? / sigma(params)?)
}

fn factorial<T: Num + Clone + Neg<Output = T>>(k: i64) -> T {
    (1..=k).fold(T::one(), |acc, i| acc * int::<T>(i))
}

/// Power series of `cos(m t)` in `s = t²`, truncated after `terms` terms.
fn cos_series<T: Num + Clone + Neg<Output = T>>(m: i64, terms: usize) -> Vec<T> {
    (0..terms as i64)
        .map(|k| {
            let v = int::<T>(m * m).clone();
            let pow = (0..k).fold(T::one(), |acc, _| acc * v.clone());
            let c = pow / factorial::<T>(2 * k);
            if k % 2 == 0 {
                c
            } else {
                -c
            }
        })
        .collect()
}

fn series_mul<T: Num + Clone>(a: &[T], b: &[T]) -> Vec<T> {
    let n = a.len().min(b.len());
    (0..n)
        .map(|k| (0..=k).fold(T::zero(), |acc, i| acc + a[i].clone() * b[k - i].clone()))
        .collect()
}

fn series_div<T: Num + Clone>(a: &[T], b: &[T]) -> Vec<T> {
    let n = a.len().min(b.len());
    let mut q: Vec<T> = Vec::with_capacity(n);
    for k in 0..n {
        let mut r = a[k].clone();
        for i in 0..k {
            r = r - q[i].clone() * b[k - i].clone();
        }
        q.push(r / b[0].clone());
    }
    q
}

/// Taylor coefficients `[c₂, c₄, …, c_{2K}]` of `λ_h/λ − 1` in `t = jπh`,
/// computed by truncated power-series arithmetic. Exact for rational inputs.
pub fn taylor_series_coefficients<T: Num + Clone + Neg<Output = T>>(
    params: &ParameterTriple<T>,
    orders: usize,
) -> Vec<T> {
    let terms = orders + 1;
    let ParameterTriple { eta_k, eta_m, alpha } = params.clone();
    let cos1 = cos_series::<T>(1, terms);
    let cos2 = cos_series::<T>(2, terms);
    let two = int::<T>(2);

    // 1 − 2η_K + 2η_K cos t
    let mut numer: Vec<T> = cos1.iter().map(|c| two.clone() * eta_k.clone() * c.clone()).collect();
    numer[0] = numer[0].clone() + T::one() - two.clone() * eta_k.clone();

    // sin²(t/2)/t² = Σ_m (−1)^m s^m / (2 (2m+2)!)
    let sinc: Vec<T> = (0..terms as i64)
        .map(|m| {
            let c = T::one() / (two.clone() * factorial::<T>(2 * m + 2));
            if m % 2 == 0 {
                c
            } else {
                -c
            }
        })
        .collect();

    let a1 = alpha.clone() - int::<T>(24) * eta_m.clone();
    let a2 = int::<T>(6) * eta_m.clone();
    let mut denom: Vec<T> = cos1
        .iter()
        .zip(&cos2)
        .map(|(c1, c2)| a1.clone() * c1.clone() + a2.clone() * c2.clone())
        .collect();
    denom[0] = denom[0].clone() + int::<T>(3) + int::<T>(18) * eta_m - alpha;

    let top: Vec<T> = series_mul(&numer, &sinc)
        .into_iter()
        .map(|x| int::<T>(12) * x)
        .collect();
    let ratio = series_div(&top, &denom);
    ratio.into_iter().skip(1).take(orders).collect()
}

/// Least-squares estimate of the same coefficients from samples of the closed
/// form.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorFit {
    /// `[c₂, c₄, c₆, c₈]`
    pub coefficients: [f64; 4],
    /// RMS residual relative to the largest sampled value
    pub relative_residual: f64,
    /// set when the residual exceeds `1e-6` of the leading term
    pub ill_conditioned: bool,
}

/// Sample grid `t = π 2^{−k}`, `k = 1..=7`.
pub const TAYLOR_FIT_LEVELS: std::ops::RangeInclusive<i32> = 1..=7;
/// Degree of the fitted polynomial in `t²` (no constant term).
pub const TAYLOR_FIT_DEGREE: usize = 6;

pub fn taylor_leading_coefficients(params: &ParameterTriple<f64>) -> TaylorFit {
    let ts: Vec<f64> = TAYLOR_FIT_LEVELS
        .map(|k| std::f64::consts::PI * 2f64.powi(-k))
        .collect();
    let ys: Vec<f64> = ts.iter().map(|&t| eigenvalue_ratio(t, params) - 1.0).collect();
    let m = ts.len();
    let d = TAYLOR_FIT_DEGREE;
    let mut cols: Vec<Vec<f64>> = (1..=d)
        .map(|k| ts.iter().map(|&t| (t * t).powi(k as i32)).collect())
        .collect();
    let scales: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().fold(0.0f64, |a, &v| a.max(v.abs())))
        .collect();
    for (c, s) in cols.iter_mut().zip(&scales) {
        c.iter_mut().for_each(|v| *v /= s);
    }
    let coef = least_squares(&cols, &ys);
    let coef: Vec<f64> = coef.iter().zip(&scales).map(|(c, s)| c / s).collect();

    let mut ss = 0.0;
    for i in 0..m {
        let s = ts[i] * ts[i];
        let fit: f64 = (1..=d).map(|k| coef[k - 1] * s.powi(k as i32)).sum();
        ss += (fit - ys[i]).powi(2);
    }
    let rms = (ss / m as f64).sqrt();
    let leading = ys.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let relative_residual = if leading > 0.0 { rms / leading } else { 0.0 };
    TaylorFit {
        coefficients: [coef[0], coef[1], coef[2], coef[3]],
        relative_residual,
        ill_conditioned: relative_residual > 1e-6,
    }
}

/// Householder QR least squares for a tall system given by columns.
fn least_squares(cols: &[Vec<f64>], rhs: &[f64]) -> Vec<f64> {
    let n = cols.len();
    let m = rhs.len();
    let mut a: Vec<Vec<f64>> = cols.to_vec();
    let mut b = rhs.to_vec();
    for k in 0..n {
        let norm = (k..m).map(|i| a[k][i] * a[k][i]).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if a[k][k] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = vec![0.0; m];
        v[k] = a[k][k] - alpha;
        v[k + 1..m].copy_from_slice(&a[k][k + 1..m]);
        let vv: f64 = v.iter().map(|x| x * x).sum();
        if vv == 0.0 {
            continue;
        }
        for col in a.iter_mut().skip(k) {
            let dot: f64 = (k..m).map(|i| v[i] * col[i]).sum();
            let f = 2.0 * dot / vv;
            for i in k..m {
                col[i] -= f * v[i];
            }
        }
        let dot: f64 = (k..m).map(|i| v[i] * b[i]).sum();
        let f = 2.0 * dot / vv;
        for i in k..m {
            b[i] -= f * v[i];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[j][k] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    x
}

/// Continuum Dirichlet mode `√2 sin(jπx)` on the unit interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactMode1d<T> {
    pub index: usize,
    pub lambda: T,
}

impl<T: Scalar> ExactMode1d<T> {
    pub fn value(&self, x: T) -> T {
        let k = T::from_usize_lossy(self.index) * T::PI();
        T::SQRT_2() * (k * x).sin()
    }

    pub fn slope(&self, x: T) -> T {
        let k = T::from_usize_lossy(self.index) * T::PI();
        T::SQRT_2() * k * (k * x).cos()
    }
}

/// Continuum mode `2 sin(iπx) sin(jπy)` on the unit square.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactMode2d<T> {
    pub i: usize,
    pub j: usize,
    pub lambda: T,
}

impl<T: Scalar> ExactMode2d<T> {
    pub fn value(&self, x: T, y: T) -> T {
        let pi = T::PI();
        T::lit(2.0)
            * (T::from_usize_lossy(self.i) * pi * x).sin()
            * (T::from_usize_lossy(self.j) * pi * y).sin()
    }
}

/// First `count` modes `λ_j = j²π²`.
pub fn exact_spectrum_1d<T: Scalar>(count: usize) -> Vec<ExactMode1d<T>> {
    (1..=count)
        .map(|j| {
            let jf = T::from_usize_lossy(j);
            ExactMode1d {
                index: j,
                lambda: jf * jf * T::PI() * T::PI(),
            }
        })
        .collect()
}

/// First `count` modes `λ_ij = (i² + j²)π²` in ascending order, repeated by
/// multiplicity; ties are ordered by `i`.
pub fn exact_spectrum_2d<T: Scalar>(count: usize) -> Vec<ExactMode2d<T>> {
    if count == 0 {
        return Vec::new();
    }
    // Grow the index box until every pair outside it, all of which have
    // i² + j² >= (m+1)² + 1, lies above the count-th value found inside it.
    let mut m = (count as f64).sqrt().ceil() as usize + 2;
    loop {
        let mut pairs: Vec<(usize, usize, usize)> = (1..=m)
            .flat_map(|i| (1..=m).map(move |j| (i * i + j * j, i, j)))
            .collect();
        pairs.sort_unstable();
        if pairs.len() >= count && pairs[count - 1].0 <= (m + 1) * (m + 1) + 1 {
            let pi2 = T::PI() * T::PI();
            return pairs
                .into_iter()
                .take(count)
                .map(|(s, i, j)| ExactMode2d {
                    i,
                    j,
                    lambda: T::from_usize_lossy(s) * pi2,
                })
                .collect();
        }
        m *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn optimal_family_endpoints() {
        assert_eq!(optimal_params(Rational::from_integer(1)), ParameterTriple::gsfem_optimal());
        assert_eq!(optimal_params(r(4, 5)), ParameterTriple::softfem_bq_optimal());
        assert_eq!(
            optimal_params(Rational::from_integer(0)),
            ParameterTriple::new(r(-1, 12), r(-1, 90), r(0, 1))
        );
    }

    #[test]
    fn asymptotic_ratios_are_exact() {
        assert_eq!(asymptotic_ratio(&ParameterTriple::<Rational>::gsfem_optimal()), r(17, 10));
        assert_eq!(asymptotic_ratio(&ParameterTriple::<Rational>::softfem_bq_optimal()), r(7, 4));
        assert_eq!(asymptotic_ratio(&ParameterTriple::<Rational>::gsfem_bq_optimal()), r(257, 160));
        assert_eq!(asymptotic_ratio(&optimal_params(r(0, 1))), r(37, 20));
        for k in 0..=10 {
            let a = r(k, 10);
            assert_eq!(
                asymptotic_ratio(&optimal_params(a)),
                (r(37, 1) - r(20, 1) * a) / (r(20, 1) - r(10, 1) * a)
            );
        }
    }

    #[test]
    fn closed_form_ratio_limits() {
        for fam in [RatioFamily::Gsfem, RatioFamily::SoftFemBq, RatioFamily::GsfemBq, RatioFamily::Family(0.0)] {
            let (rho, lim) = stiffness_ratio_formula::<f64>(fam, 1e-5);
            assert_relative_eq!(rho, lim, max_relative = 1e-8);
        }
        assert_eq!(stiffness_ratio_formula::<f64>(RatioFamily::Gsfem, 0.1).1, 1.7);
    }

    #[test]
    fn named_formulas_match_general_route() {
        let sets = [
            (RatioFamily::Gsfem, ParameterTriple::<f64>::gsfem_optimal()),
            (RatioFamily::SoftFemBq, ParameterTriple::softfem_bq_optimal()),
            (RatioFamily::GsfemBq, ParameterTriple::gsfem_bq_optimal()),
            (RatioFamily::Family(0.3), optimal_params(0.3)),
        ];
        for n in [10, 50, 200] {
            for (fam, params) in sets {
                let (rho, _) = stiffness_ratio_formula(fam, 1.0 / n as f64);
                let general = stiffness_ratio_closed_form(&params, n).unwrap();
                assert_relative_eq!(rho, general, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn table_first_eigenvalue_errors() {
        let gs = analytic_relative_error(1, 4, &ParameterTriple::<f64>::gsfem_optimal()).unwrap();
        assert_relative_eq!(gs.abs(), 4.22e-5, max_relative = 0.01);
        let sq = analytic_relative_error(1, 8, &ParameterTriple::<f64>::softfem_bq_optimal()).unwrap();
        assert_relative_eq!(sq.abs(), 1.13e-6, max_relative = 0.01);
        let gsq = analytic_relative_error(1, 16, &ParameterTriple::<f64>::gsfem_bq_optimal()).unwrap();
        assert_relative_eq!(gsq.abs(), 3.68e-11, max_relative = 0.01);
    }

    #[test]
    fn index_errors() {
        let p = ParameterTriple::<f64>::galerkin();
        assert!(matches!(analytic_eigenvalue_gsfembq(0, 4, &p), Err(Error::InvalidIndex { .. })));
        assert!(matches!(analytic_eigenvalue_gsfembq(4, 4, &p), Err(Error::InvalidIndex { .. })));
        assert!(analytic_eigenvector::<f64>(2, 2).is_err());
    }

    #[test]
    fn galerkin_specialization() {
        // (6/h²)(1 − cos t)/(2 + cos t)
        let n = 4;
        let h = 0.25f64;
        for j in 1..n {
            let t = std::f64::consts::PI * j as f64 * h;
            let e = 6.0 / (h * h) * (1.0 - t.cos()) / (2.0 + t.cos());
            let l = analytic_eigenvalue_gsfembq(j, n, &ParameterTriple::<f64>::galerkin()).unwrap();
            assert_relative_eq!(l, e, max_relative = 1e-14);
        }
    }

    #[test]
    fn eigenvectors_orthonormal() {
        let v = analytic_eigenvector::<f64>(1, 2).unwrap();
        assert_eq!(v.len(), 1);
        assert_abs_diff_eq!(v[0], 1.0, epsilon = 1e-15);
        let v = analytic_eigenvector::<f64>(1, 4).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let raw = [s, 1.0, s];
        let norm = 2f64.sqrt();
        for (a, b) in v.iter().zip(raw) {
            assert_abs_diff_eq!(*a, b / norm, epsilon = 1e-15);
        }
        let n = 12;
        for a in 1..n {
            for b in 1..n {
                let va = analytic_eigenvector::<f64>(a, n).unwrap();
                let vb = analytic_eigenvector::<f64>(b, n).unwrap();
                let dot: f64 = va.iter().zip(&vb).map(|(x, y)| x * y).sum();
                assert_abs_diff_eq!(dot, if a == b { 1.0 } else { 0.0 }, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn exact_spectra() {
        let s = exact_spectrum_1d::<f64>(3);
        let pi2 = std::f64::consts::PI.powi(2);
        assert_relative_eq!(s[0].lambda, pi2);
        assert_relative_eq!(s[2].lambda, 9.0 * pi2);
        let rule = crate::quadrature::gauss_legendre::<f64>(12).unwrap();
        // ∫₀¹ u₂² dx over 8 panels
        let mut norm = 0.0;
        for k in 0..8 {
            let (a, b) = (k as f64 / 8.0, (k + 1) as f64 / 8.0);
            norm += rule.integrate(|xi| {
                let x = 0.5 * (a + b) + 0.5 * (b - a) * xi;
                s[1].value(x).powi(2)
            }) * 0.5
                * (b - a);
        }
        assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-10);

        let s2 = exact_spectrum_2d::<f64>(6);
        assert_relative_eq!(s2[0].lambda, 2.0 * pi2);
        assert_relative_eq!(s2[1].lambda, 5.0 * pi2);
        assert_relative_eq!(s2[2].lambda, 5.0 * pi2);
        assert_relative_eq!(s2[5].lambda, 10.0 * pi2);
    }

    #[test]
    fn exact_spectrum_2d_matches_brute_force() {
        for count in [1, 7, 30, 100, 500] {
            let mut all: Vec<usize> = (1..=80)
                .flat_map(|i| (1..=80).map(move |j| i * i + j * j))
                .collect();
            all.sort_unstable();
            let got = exact_spectrum_2d::<f64>(count);
            let pi2 = std::f64::consts::PI.powi(2);
            for (g, e) in got.iter().zip(&all) {
                assert_relative_eq!(g.lambda, *e as f64 * pi2);
            }
        }
    }

    #[test]
    fn power_series_of_gsfem_optimum() {
        let c = taylor_series_coefficients(&ParameterTriple::<Rational>::gsfem_optimal(), 3);
        assert_eq!(c, vec![r(0, 1), r(0, 1), r(-1, 6048)]);
    }

    #[test]
    fn power_series_generic_coefficients() {
        // closed-form t², t⁴ coefficients for consistent mass
        for (ek, em) in [(r(1, 7), r(1, 50)), (r(0, 1), r(0, 1)), (r(-1, 3), r(2, 9))] {
            let c = taylor_series_coefficients(&ParameterTriple::new(ek, em, r(1, 1)), 2);
            assert_eq!(c[0], (r(1, 1) - r(12, 1) * ek) / r(12, 1));
            assert_eq!(c[1], (r(1, 1) - r(360, 1) * em) / r(360, 1));
        }
    }

    #[test]
    fn fitted_coefficients_agree_with_series() {
        let sets = [
            ParameterTriple::<f64>::gsfem_optimal(),
            ParameterTriple::softfem_bq_optimal(),
            ParameterTriple::gsfem_bq_optimal(),
        ];
        for p in sets {
            let fit = taylor_leading_coefficients(&p);
            let exact = taylor_series_coefficients(&p, 3);
            assert!(!fit.ill_conditioned, "{fit:?}");
            assert!(fit.coefficients[0].abs() <= 1e-9);
            assert!(fit.coefficients[1].abs() <= 1e-9);
            assert_abs_diff_eq!(fit.coefficients[2], exact[2], epsilon = 1e-7);
        }
        let fit = taylor_leading_coefficients(&ParameterTriple::<f64>::gsfem_optimal());
        assert_relative_eq!(fit.coefficients[2], -1.0 / 6048.0, max_relative = 1e-4);
    }
}
