//! Dense solver for the symmetric-definite problem `A x = λ B x`.
//!
//! `B = L Lᵀ` by banded Cholesky, `C = L⁻¹ A L⁻ᵀ` by two row-oriented banded
//! solves, Householder reduction of `C` to tridiagonal form, implicit QL with
//! Wilkinson-type shifts, and `x = L⁻ᵀ z`. Eigenvectors are kept as rows so
//! every rotation and back-substitution streams through contiguous memory.

use crate::matrix::{BandedCholesky, DenseMatrix, SymmetricMatrix};
use crate::{Error, Result, Scalar, SymmetricSystem};

/// QL sweeps allowed per unknown before giving up.
pub const MAX_SWEEPS_PER_UNKNOWN: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    /// largest normalized residual, see [`rayleigh_residuals`]; `None` when
    /// eigenvectors were not computed
    pub max_residual: Option<f64>,
    /// `|Σ λ − tr C| / max(|tr C|, Σ |λ|)`
    pub trace_defect: f64,
    /// total QL iterations
    pub iterations: usize,
    pub cholesky_ok: bool,
}

/// Ascending eigenvalues with `B`-orthonormal eigenvectors stored as rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T> {
    pub eigenvalues: Vec<T>,
    pub eigenvectors: Option<DenseMatrix<T>>,
    pub diagnostics: Diagnostics,
}

impl<T: Scalar> Spectrum<T> {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn lambda_min(&self) -> Option<T> {
        self.eigenvalues.first().copied()
    }

    pub fn lambda_max(&self) -> Option<T> {
        self.eigenvalues.last().copied()
    }

    /// Eigenvector `j` (0-based) if vectors were computed.
    pub fn eigenvector(&self, j: usize) -> Option<&[T]> {
        self.eigenvectors.as_ref().map(|v| v.row(j))
    }
}

/// All eigenpairs.
pub fn solve_gevp<T: Scalar>(system: &SymmetricSystem<T>) -> Result<Spectrum<T>> {
    solve(system, true)
}

/// Eigenvalues only; skips the `O(n³)` vector accumulation.
pub fn solve_gevp_values<T: Scalar>(system: &SymmetricSystem<T>) -> Result<Spectrum<T>> {
    solve(system, false)
}

fn solve<T: Scalar>(system: &SymmetricSystem<T>, vectors: bool) -> Result<Spectrum<T>> {
    let (a, b) = (&system.a, &system.b);
    if a.order() != b.order() {
        return Err(Error::InvalidArgument(format!(
            "order mismatch: A is {}, B is {}",
            a.order(),
            b.order()
        )));
    }
    let chol = b.cholesky().map_err(|e| match e {
        Error::NotPositiveDefinite { row, pivot, .. } => Error::NotPositiveDefinite {
            context: format!("{} on {}", system.config.label(), system.description),
            row,
            pivot,
        },
        other => other,
    })?;
    let mut c = reduce_to_standard(a, &chol);
    let trace_c = c.trace();
    let (values, z, iterations) = symmetric_eigen_dense(&mut c, vectors)?;
    drop(c);

    let sum: T = values.iter().copied().sum();
    let abs_sum: T = values.iter().map(|v| v.abs()).sum();
    let denom = trace_c.abs().max(abs_sum).max(T::min_positive_value());
    let trace_defect = ((sum - trace_c).abs() / denom).to_f64_lossy();

    let eigenvectors = z.map(|mut z| {
        for j in 0..z.rows() {
            let row = z.row_mut(j);
            chol.solve_upper(row);
            canonicalize_sign(row);
        }
        z
    });
    let mut spectrum = Spectrum {
        eigenvalues: values,
        eigenvectors,
        diagnostics: Diagnostics {
            max_residual: None,
            trace_defect,
            iterations,
            cholesky_ok: true,
        },
    };
    if spectrum.eigenvectors.is_some() {
        spectrum.diagnostics.max_residual = Some(rayleigh_residuals(system, &spectrum).to_f64_lossy());
    }
    Ok(spectrum)
}

/// `C = L⁻¹ A L⁻ᵀ` as a dense symmetric matrix. Two sweeps of row-wise forward
/// substitution with a transpose in between.
fn reduce_to_standard<T: Scalar>(a: &SymmetricMatrix<T>, chol: &BandedCholesky<T>) -> DenseMatrix<T> {
    let mut x = a.to_dense();
    chol.solve_lower_rows(&mut x);
    transpose_in_place(&mut x);
    chol.solve_lower_rows(&mut x);
    // symmetrize against rounding in the two passes
    let n = x.rows();
    for i in 0..n {
        for j in 0..i {
            let v = (x.get(i, j) + x.get(j, i)) / T::lit(2.0);
            x.set(i, j, v);
            x.set(j, i, v);
        }
    }
    x
}

fn transpose_in_place<T: Scalar>(m: &mut DenseMatrix<T>) {
    let n = m.rows();
    let data = m.as_mut_slice();
    for i in 0..n {
        for j in 0..i {
            data.swap(i * n + j, j * n + i);
        }
    }
}

fn canonicalize_sign<T: Scalar>(v: &mut [T]) {
    let mut best = 0;
    for (k, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = k;
        }
    }
    if v.get(best).is_some_and(|&x| x < T::zero()) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Eigen-decomposition of a dense symmetric matrix (only its lower triangle is
/// read; it is overwritten). Returns ascending eigenvalues, the orthonormal
/// eigenvectors as rows when requested, and the QL iteration count.
pub fn symmetric_eigen_dense<T: Scalar>(
    a: &mut DenseMatrix<T>,
    vectors: bool,
) -> Result<(Vec<T>, Option<DenseMatrix<T>>, usize)> {
    if a.rows() != a.cols() {
        return Err(Error::InvalidArgument("matrix must be square".into()));
    }
    let n = a.rows();
    if n == 0 {
        return Ok((Vec::new(), vectors.then(|| DenseMatrix::zeros(0, 0)), 0));
    }
    let (mut d, mut e, hh) = tridiagonalize(a);
    let mut z = if vectors { Some(accumulate(a, &hh)) } else { None };
    let iterations = ql_implicit(&mut d, &mut e, z.as_mut())?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap_or(std::cmp::Ordering::Equal).then(i.cmp(&j)));
    let values: Vec<T> = order.iter().map(|&i| d[i]).collect();
    let z = z.map(|z| {
        let mut out = DenseMatrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            out.row_mut(dst).copy_from_slice(z.row(src));
        }
        out
    });
    Ok((values, z, iterations))
}

/// Householder reduction working on the lower triangle by rows. Returns the
/// diagonal, the subdiagonal (`e[i]` couples `i−1` and `i`), and the
/// reflector scalings `h[i]`; reflector `i` is left in `a[i][0..i]`.
fn tridiagonalize<T: Scalar>(a: &mut DenseMatrix<T>) -> (Vec<T>, Vec<T>, Vec<T>) {
    let n = a.rows();
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    let mut hh = vec![T::zero(); n];
    let mut p = vec![T::zero(); n];
    let data = a.as_mut_slice();
    for i in (1..n).rev() {
        let l = i - 1;
        let (upper, rest) = data.split_at_mut(i * n);
        let u = &mut rest[..i];
        if l == 0 {
            e[i] = u[0];
            continue;
        }
        let scale: T = u.iter().map(|x| x.abs()).sum();
        if scale == T::zero() {
            e[i] = u[l];
            continue;
        }
        let mut sigma = T::zero();
        for x in u.iter_mut() {
            *x /= scale;
            sigma += *x * *x;
        }
        let f = u[l];
        let g = if f >= T::zero() { -sigma.sqrt() } else { sigma.sqrt() };
        e[i] = scale * g;
        let h = sigma - f * g;
        u[l] = f - g;
        hh[i] = h;

        // p = A u / h over the leading i×i block, lower triangle by rows
        let p = &mut p[..i];
        p.iter_mut().for_each(|x| *x = T::zero());
        for j in 0..i {
            let row = &upper[j * n..j * n + j + 1];
            let uj = u[j];
            let mut acc = row[j] * uj;
            for k in 0..j {
                acc += row[k] * u[k];
                p[k] += row[k] * uj;
            }
            p[j] += acc;
        }
        let inv_h = T::one() / h;
        let mut up = T::zero();
        for k in 0..i {
            p[k] *= inv_h;
            up += u[k] * p[k];
        }
        let kk = up / (h + h);
        for k in 0..i {
            p[k] -= kk * u[k];
        }
        // A ← A − u qᵀ − q uᵀ on the lower triangle
        for j in 0..i {
            let (uj, qj) = (u[j], p[j]);
            let row = &mut upper[j * n..j * n + j + 1];
            for k in 0..=j {
                row[k] -= uj * p[k] + qj * u[k];
            }
        }
    }
    for i in 0..n {
        d[i] = data[i * n + i];
    }
    (d, e, hh)
}

/// Builds `Qᵀ` (rows are the columns of `Q = H_{n−1} ⋯ H_2`) from the stored
/// reflectors, applying the innermost reflector first so each step only
/// touches the leading block.
fn accumulate<T: Scalar>(a: &DenseMatrix<T>, hh: &[T]) -> DenseMatrix<T> {
    let n = a.rows();
    let mut q = DenseMatrix::identity(n);
    let mut g = vec![T::zero(); n];
    for i in 2..n {
        let h = hh[i];
        if h == T::zero() {
            continue;
        }
        let u = &a.row(i)[..i];
        let g = &mut g[..i];
        g.iter_mut().for_each(|x| *x = T::zero());
        for r in 0..i {
            let ur = u[r];
            if ur == T::zero() {
                continue;
            }
            for (gc, &m) in g.iter_mut().zip(&q.row(r)[..i]) {
                *gc += ur * m;
            }
        }
        let inv_h = T::one() / h;
        for r in 0..i {
            let f = u[r] * inv_h;
            if f == T::zero() {
                continue;
            }
            for (m, &gc) in q.row_mut(r)[..i].iter_mut().zip(g.iter()) {
                *m -= f * gc;
            }
        }
    }
    transpose_in_place(&mut q);
    q
}

/// Implicit QL on the tridiagonal `(d, e)`. Rotations are applied to rows of
/// `z`, which on return hold the eigenvectors in the order of `d`.
fn ql_implicit<T: Scalar>(d: &mut [T], e: &mut [T], mut z: Option<&mut DenseMatrix<T>>) -> Result<usize> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = T::zero();
    let eps = T::epsilon();
    let cap = MAX_SWEEPS_PER_UNKNOWN * n;
    let mut total = 0usize;
    for l in 0..n {
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= eps * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            total += 1;
            if total > cap {
                return Err(Error::NumericalFailure(format!(
                    "QL iteration did not converge within {cap} sweeps (n = {n})"
                )));
            }
            let mut g = (d[l + 1] - d[l]) / (T::lit(2.0) * e[l]);
            let mut r = g.hypot(T::one());
            g = d[m] - d[l] + e[l] / (g + if g >= T::zero() { r.abs() } else { -r.abs() });
            let (mut s, mut c, mut p) = (T::one(), T::one(), T::zero());
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == T::zero() {
                    d[i + 1] -= p;
                    e[m] = T::zero();
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + T::lit(2.0) * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    rotate_rows(z, i, s, c);
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = T::zero();
        }
    }
    Ok(total)
}

/// `(row_i, row_{i+1}) ← (c row_i − s row_{i+1}, s row_i + c row_{i+1})`.
fn rotate_rows<T: Scalar>(z: &mut DenseMatrix<T>, i: usize, s: T, c: T) {
    let n = z.cols();
    let data = z.as_mut_slice();
    let (head, tail) = data.split_at_mut((i + 1) * n);
    let ri = &mut head[i * n..];
    let rj = &mut tail[..n];
    for (x, y) in ri.iter_mut().zip(rj.iter_mut()) {
        let (a, b) = (*x, *y);
        *y = s * a + c * b;
        *x = c * a - s * b;
    }
}

/// Smallest eigenpair by inverse iteration on `A`, which must be positive
/// definite. Stops once the Rayleigh quotient settles to `tol` relative or
/// after `max_iter` steps. The returned diagnostics carry the residual;
/// `trace_defect` is zero since only one pair is known.
pub fn lowest_eigenpair<T: Scalar>(system: &SymmetricSystem<T>, tol: T, max_iter: usize) -> Result<Spectrum<T>> {
    let (a, b) = (&system.a, &system.b);
    let n = a.order();
    if n == 0 || b.order() != n {
        return Err(Error::InvalidArgument(format!(
            "order mismatch or empty system: A is {n}, B is {}",
            b.order()
        )));
    }
    let chol = a.cholesky().map_err(|e| match e {
        Error::NotPositiveDefinite { row, pivot, .. } => Error::NotPositiveDefinite {
            context: format!("stiffness of {} on {}", system.config.label(), system.description),
            row,
            pivot,
        },
        other => other,
    })?;
    let rayleigh = |x: &[T]| a.bilinear(x, x) / b.bilinear(x, x);
    let mut x = vec![T::one(); n];
    let mut lambda = rayleigh(&x);
    let mut iterations = 0;
    let mut settled = 0;
    while iterations < max_iter {
        iterations += 1;
        let mut y = b.matvec(&x);
        chol.solve_lower(&mut y);
        chol.solve_upper(&mut y);
        let norm = b.bilinear(&y, &y).sqrt();
        if !(norm > T::zero()) || !norm.is_finite() {
            return Err(Error::NumericalFailure("inverse iteration broke down".into()));
        }
        x = y.into_iter().map(|v| v / norm).collect();
        let next = rayleigh(&x);
        let change = (next - lambda).abs();
        lambda = next;
        // a couple of extra sweeps tighten the vector once the value is flat
        if change <= tol * lambda.abs() {
            settled += 1;
            if settled == 3 {
                break;
            }
        } else {
            settled = 0;
        }
    }
    if settled < 3 {
        return Err(Error::NumericalFailure(format!(
            "inverse iteration did not settle in {max_iter} steps"
        )));
    }
    canonicalize_sign(&mut x);
    let mut spectrum = Spectrum {
        eigenvalues: vec![lambda],
        eigenvectors: Some(DenseMatrix::from_rows(vec![x])?),
        diagnostics: Diagnostics {
            max_residual: None,
            trace_defect: 0.0,
            iterations,
            cholesky_ok: true,
        },
    };
    spectrum.diagnostics.max_residual = Some(rayleigh_residuals(system, &spectrum).to_f64_lossy());
    Ok(spectrum)
}

/// `max_j ‖A x_j − λ_j B x_j‖₂ / ((‖A‖_F + |λ_j| ‖B‖_F) ‖x_j‖₂)`. Zero when the
/// spectrum carries no eigenvectors.
pub fn rayleigh_residuals<T: Scalar>(system: &SymmetricSystem<T>, spectrum: &Spectrum<T>) -> T {
    let Some(vecs) = spectrum.eigenvectors.as_ref() else {
        return T::zero();
    };
    let na = system.a.frobenius_norm();
    let nb = system.b.frobenius_norm();
    let mut worst = T::zero();
    for (j, &lam) in spectrum.eigenvalues.iter().enumerate() {
        let x = vecs.row(j);
        let ax = system.a.matvec(x);
        let bx = system.b.matvec(x);
        let r = ax
            .iter()
            .zip(&bx)
            .map(|(&u, &v)| (u - lam * v) * (u - lam * v))
            .sum::<T>()
            .sqrt();
        let xn = x.iter().map(|&v| v * v).sum::<T>().sqrt();
        let scale = (na + lam.abs() * nb) * xn;
        if scale > T::zero() {
            worst = worst.max(r / scale);
        }
    }
    worst
}

/// `max_{i,j} |x_iᵀ B x_j − δ_ij|`. Costs `O(n³)`.
pub fn b_orthonormality_defect<T: Scalar>(system: &SymmetricSystem<T>, spectrum: &Spectrum<T>) -> Option<T> {
    let vecs = spectrum.eigenvectors.as_ref()?;
    let n = vecs.rows();
    let bx: Vec<Vec<T>> = (0..n).map(|j| system.b.matvec(vecs.row(j))).collect();
    let mut worst = T::zero();
    for i in 0..n {
        let xi = vecs.row(i);
        for (j, bxj) in bx.iter().enumerate().take(i + 1) {
            let g: T = xi.iter().zip(bxj).map(|(&a, &b)| a * b).sum();
            let target = if i == j { T::one() } else { T::zero() };
            worst = worst.max((g - target).abs());
        }
    }
    Some(worst)
}
