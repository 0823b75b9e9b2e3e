//! Degree-`p` Lagrange reference elements on `[-1, 1]` with Gauss-Lobatto
//! nodes. With these nodes the Lobatto-integrated mass matrix is diagonal.

use crate::quadrature::gauss_lobatto;
use crate::{Error, Result, Scalar};

pub const MIN_DEGREE: usize = 1;
pub const MAX_DEGREE: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceElement<T> {
    degree: usize,
    nodes: Vec<T>,
    /// barycentric weights `1 / ∏_{j≠i} (x_i - x_j)`
    bary: Vec<T>,
    /// `deriv_at_nodes[k * (p+1) + i] = L_i'(x_k)`
    deriv_at_nodes: Vec<T>,
}

/// Values of every basis function at a list of points, row-major by basis
/// index: entry `(i, k)` is basis `i` at point `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisTable<T> {
    n_basis: usize,
    n_points: usize,
    data: Vec<T>,
}

impl<T: Scalar> BasisTable<T> {
    pub fn n_basis(&self) -> usize {
        self.n_basis
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn get(&self, basis: usize, point: usize) -> T {
        self.data[basis * self.n_points + point]
    }

    pub fn row(&self, basis: usize) -> &[T] {
        &self.data[basis * self.n_points..(basis + 1) * self.n_points]
    }

    /// Column of all basis values at one point.
    pub fn column(&self, point: usize) -> Vec<T> {
        (0..self.n_basis).map(|i| self.get(i, point)).collect()
    }
}

/// Builds the degree-`p` element, `1 <= p <= 4`.
pub fn reference_element<T: Scalar>(p: usize) -> Result<ReferenceElement<T>> {
    ReferenceElement::new(p)
}

impl<T: Scalar> ReferenceElement<T> {
    pub fn new(p: usize) -> Result<Self> {
        if !(MIN_DEGREE..=MAX_DEGREE).contains(&p) {
            return Err(Error::UnsupportedDegree(p));
        }
        let nodes = gauss_lobatto::<T>(p + 1)?.points().to_vec();
        let n = nodes.len();
        let bary: Vec<T> = (0..n)
            .map(|i| {
                let prod = (0..n)
                    .filter(|&j| j != i)
                    .fold(T::one(), |acc, j| acc * (nodes[i] - nodes[j]));
                T::one() / prod
            })
            .collect();
        let mut deriv_at_nodes = vec![T::zero(); n * n];
        for k in 0..n {
            let mut diag = T::zero();
            for i in 0..n {
                if i != k {
                    let d = (bary[i] / bary[k]) / (nodes[k] - nodes[i]);
                    deriv_at_nodes[k * n + i] = d;
                    diag -= d;
                }
            }
            deriv_at_nodes[k * n + k] = diag;
        }
        Ok(Self {
            degree: p,
            nodes,
            bary,
            deriv_at_nodes,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_basis(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    /// All basis values at a single point.
    pub fn values_at(&self, xi: T) -> Vec<T> {
        let n = self.nodes.len();
        if let Some(hit) = self.nodes.iter().position(|&x| x == xi) {
            let mut out = vec![T::zero(); n];
            out[hit] = T::one();
            return out;
        }
        let terms: Vec<T> = (0..n).map(|i| self.bary[i] / (xi - self.nodes[i])).collect();
        let denom: T = terms.iter().copied().sum();
        terms.into_iter().map(|t| t / denom).collect()
    }

    /// All basis derivatives `dL_i/dξ` at a single point.
    pub fn derivatives_at(&self, xi: T) -> Vec<T> {
        // L_i' has degree p-1, so it is reproduced by interpolation at the nodes
        let n = self.nodes.len();
        let vals = self.values_at(xi);
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|k| self.deriv_at_nodes[k * n + i] * vals[k])
                    .sum()
            })
            .collect()
    }

    pub fn eval_basis(&self, points: &[T]) -> BasisTable<T> {
        self.tabulate(points, |xi| self.values_at(xi))
    }

    pub fn eval_basis_deriv(&self, points: &[T]) -> BasisTable<T> {
        self.tabulate(points, |xi| self.derivatives_at(xi))
    }

    fn tabulate(&self, points: &[T], f: impl Fn(T) -> Vec<T>) -> BasisTable<T> {
        let n_basis = self.n_basis();
        let n_points = points.len();
        let mut data = vec![T::zero(); n_basis * n_points];
        for (k, &xi) in points.iter().enumerate() {
            for (i, v) in f(xi).into_iter().enumerate() {
                data[i * n_points + k] = v;
            }
        }
        BasisTable {
            n_basis,
            n_points,
            data,
        }
    }
}
