//! Gauss-Legendre and Gauss-Lobatto rules on the reference interval `[-1, 1]`.
//!
//! Nodes come from Newton iteration on Legendre polynomials started at
//! Chebyshev-type guesses. Only the non-positive half is iterated; the other
//! half is its mirror image, so rules are exactly symmetric.

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Scalar};

const MAX_NEWTON_ITERS: usize = 100;
/// Largest point count the crate validates.
pub const MAX_POINTS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QuadratureFamily {
    GaussLegendre,
    GaussLobatto,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule<T> {
    family: QuadratureFamily,
    points: Vec<T>,
    weights: Vec<T>,
}

impl<T: Scalar> QuadratureRule<T> {
    pub fn new(family: QuadratureFamily, n: usize) -> Result<Self> {
        match family {
            QuadratureFamily::GaussLegendre => gauss_legendre(n),
            QuadratureFamily::GaussLobatto => gauss_lobatto(n),
        }
    }

    pub fn family(&self) -> QuadratureFamily {
        self.family
    }

    pub fn points(&self) -> &[T] {
        &self.points
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Highest polynomial degree integrated exactly.
    pub fn exactness_degree(&self) -> usize {
        let n = self.len();
        match self.family {
            QuadratureFamily::GaussLegendre => 2 * n - 1,
            QuadratureFamily::GaussLobatto => 2 * n - 3,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }

    /// Approximates `∫_{-1}^{1} f`.
    pub fn integrate<F: FnMut(T) -> T>(&self, mut f: F) -> T {
        self.iter().map(|(x, w)| w * f(x)).sum()
    }
}

/// Legendre `P_n(x)` together with `P_{n-1}(x)`.
fn legendre_pair<T: Scalar>(n: usize, x: T) -> (T, T) {
    let mut prev = T::one();
    if n == 0 {
        return (prev, T::zero());
    }
    let mut cur = x;
    for k in 1..n {
        let kf = T::from_usize_lossy(k);
        let next = ((kf + kf + T::one()) * x * cur - kf * prev) / (kf + T::one());
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

fn newton_tolerance<T: Scalar>() -> T {
    T::lit(1e-15).max(T::epsilon() * T::lit(4.0))
}

/// Builds a symmetric rule from the nodes in `[-1, 0]` (ascending) and their
/// weights.
fn mirrored<T: Scalar>(
    family: QuadratureFamily,
    n: usize,
    half: Vec<(T, T)>,
) -> QuadratureRule<T> {
    let mut points = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for &(x, w) in &half {
        points.push(x);
        weights.push(w);
    }
    let mirror_from = if n % 2 == 1 { half.len() - 1 } else { half.len() };
    for &(x, w) in half[..mirror_from].iter().rev() {
        points.push(-x);
        weights.push(w);
    }
    debug_assert_eq!(points.len(), n);
    QuadratureRule {
        family,
        points,
        weights,
    }
}

/// `n`-point Gauss-Legendre rule, exact for degree `2n - 1`.
pub fn gauss_legendre<T: Scalar>(n: usize) -> Result<QuadratureRule<T>> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "Gauss-Legendre rule needs n >= 1".into(),
        ));
    }
    let nf = T::from_usize_lossy(n);
    let tol = newton_tolerance::<T>();
    let mut half = Vec::with_capacity(n.div_ceil(2));
    for i in 0..n.div_ceil(2) {
        // i-th root counted from -1
        let guess = -(T::PI() * (T::from_usize_lossy(i) + T::lit(0.75)) / (nf + T::lit(0.5))).cos();
        let mut x = if n % 2 == 1 && i == n / 2 { T::zero() } else { guess };
        for _ in 0..MAX_NEWTON_ITERS {
            let (p, pm1) = legendre_pair(n, x);
            let dp = nf * (x * p - pm1) / (x * x - T::one());
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= tol {
                break;
            }
        }
        let (p, pm1) = legendre_pair(n, x);
        if p.abs() > T::lit(1e-6).max(T::epsilon().sqrt()) {
            return Err(Error::NumericalFailure(format!(
                "Gauss-Legendre node {i} of {n} did not converge"
            )));
        }
        let dp = if x == T::zero() && n % 2 == 1 {
            // P_n'(0) = n P_{n-1}(0) for odd n
            nf * pm1
        } else {
            nf * (x * p - pm1) / (x * x - T::one())
        };
        let w = T::lit(2.0) / ((T::one() - x * x) * dp * dp);
        half.push((x, w));
    }
    Ok(mirrored(QuadratureFamily::GaussLegendre, n, half))
}

/// `n`-point Gauss-Lobatto rule (endpoints included), exact for degree `2n - 3`.
pub fn gauss_lobatto<T: Scalar>(n: usize) -> Result<QuadratureRule<T>> {
    if n < 2 {
        return Err(Error::InvalidArgument(
            "Gauss-Lobatto rule needs n >= 2".into(),
        ));
    }
    // interior nodes are the roots of P_deg'
    let deg = n - 1;
    let degf = T::from_usize_lossy(deg);
    let lambda = degf * (degf + T::one());
    let tol = newton_tolerance::<T>();
    let end_weight = T::lit(2.0) / lambda;

    let mut half = vec![(-T::one(), end_weight)];
    for i in 1..n.div_ceil(2) {
        let mut x = if n % 2 == 1 && i == n / 2 {
            T::zero()
        } else {
            -(T::PI() * T::from_usize_lossy(i) / degf).cos()
        };
        for _ in 0..MAX_NEWTON_ITERS {
            let (p, pm1) = legendre_pair(deg, x);
            let one_m_x2 = T::one() - x * x;
            let dp = degf * (pm1 - x * p) / one_m_x2;
            let d2p = (T::lit(2.0) * x * dp - lambda * p) / one_m_x2;
            let dx = dp / d2p;
            x -= dx;
            if dx.abs() <= tol {
                break;
            }
        }
        let (p, pm1) = legendre_pair(deg, x);
        let dp = degf * (pm1 - x * p) / (T::one() - x * x);
        if dp.abs() > T::lit(1e-6).max(T::epsilon().sqrt()) {
            return Err(Error::NumericalFailure(format!(
                "Gauss-Lobatto node {i} of {n} did not converge"
            )));
        }
        half.push((x, end_weight / (p * p)));
    }
    Ok(mirrored(QuadratureFamily::GaussLobatto, n, half))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn monomial_integral(k: usize) -> f64 {
        if k % 2 == 1 {
            0.0
        } else {
            2.0 / (k as f64 + 1.0)
        }
    }

    #[test]
    fn legendre_small_rules() {
        let r = gauss_legendre::<f64>(1).unwrap();
        assert_eq!(r.points(), &[0.0]);
        assert_eq!(r.weights(), &[2.0]);

        let r = gauss_legendre::<f64>(2).unwrap();
        let s = 1.0 / 3f64.sqrt();
        assert_abs_diff_eq!(r.points()[0], -s, epsilon = 1e-15);
        assert_abs_diff_eq!(r.points()[1], s, epsilon = 1e-15);
        assert_abs_diff_eq!(r.weights()[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.weights()[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn legendre_five_points_x8() {
        let r = gauss_legendre::<f64>(5).unwrap();
        assert_abs_diff_eq!(r.integrate(|x| x.powi(8)), 2.0 / 9.0, epsilon = 1e-14);
    }

    #[test]
    fn lobatto_small_rules() {
        let r = gauss_lobatto::<f64>(2).unwrap();
        assert_eq!(r.points(), &[-1.0, 1.0]);
        assert_eq!(r.weights(), &[1.0, 1.0]);

        let r = gauss_lobatto::<f64>(3).unwrap();
        assert_eq!(r.points(), &[-1.0, 0.0, 1.0]);
        for (w, e) in r.weights().iter().zip([1.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0]) {
            assert_abs_diff_eq!(*w, e, epsilon = 1e-15);
        }

        let r = gauss_lobatto::<f64>(4).unwrap();
        let s = 1.0 / 5f64.sqrt();
        for (x, e) in r.points().iter().zip([-1.0, -s, s, 1.0]) {
            assert_abs_diff_eq!(*x, e, epsilon = 1e-15);
        }
        for (w, e) in r.weights().iter().zip([1.0 / 6.0, 5.0 / 6.0, 5.0 / 6.0, 1.0 / 6.0]) {
            assert_abs_diff_eq!(*w, e, epsilon = 1e-15);
        }
    }

    #[test]
    fn invalid_counts() {
        assert!(matches!(gauss_legendre::<f64>(0), Err(Error::InvalidArgument(_))));
        assert!(matches!(gauss_lobatto::<f64>(1), Err(Error::InvalidArgument(_))));
        assert!(matches!(gauss_lobatto::<f64>(0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn exactness_weights_symmetry_up_to_16() {
        for family in [QuadratureFamily::GaussLegendre, QuadratureFamily::GaussLobatto] {
            let start = if family == QuadratureFamily::GaussLegendre { 1 } else { 2 };
            for n in start..=MAX_POINTS {
                let r = QuadratureRule::<f64>::new(family, n).unwrap();
                assert_eq!(r.len(), n);
                let total: f64 = r.weights().iter().sum();
                assert_abs_diff_eq!(total, 2.0, epsilon = 1e-14);
                assert!(r.weights().iter().all(|&w| w > 0.0));
                assert!(r.points().windows(2).all(|w| w[0] < w[1]), "{family:?} {n}");
                assert!(r.points().iter().all(|x| x.abs() <= 1.0));
                if family == QuadratureFamily::GaussLobatto {
                    assert_eq!(r.points()[0], -1.0);
                    assert_eq!(r.points()[n - 1], 1.0);
                }
                for i in 0..n {
                    assert_eq!(r.points()[i], -r.points()[n - 1 - i]);
                    assert_eq!(r.weights()[i], r.weights()[n - 1 - i]);
                }
                for k in 0..=r.exactness_degree() {
                    let q = r.integrate(|x| x.powi(k as i32));
                    assert_abs_diff_eq!(q, monomial_integral(k), epsilon = 1e-13);
                }
            }
        }
    }

    #[test]
    fn single_precision_rules() {
        let r = gauss_legendre::<f32>(4).unwrap();
        assert!((r.integrate(|x| x.powi(6)) - 2.0 / 7.0).abs() < 1e-6);
        let r = gauss_lobatto::<f32>(5).unwrap();
        assert!((r.integrate(|x| x.powi(4)) - 0.4).abs() < 1e-6);
    }
}
