//! One-dimensional partitions, tensor-product meshes, interface records and
//! degree-of-freedom numbering with homogeneous Dirichlet elimination.

use serde::{Deserialize, Serialize};

use crate::quadrature::gauss_legendre;
use crate::{Error, Result, Scalar};

/// Diffusion coefficient `κ`. A closed set of expressions selected by id.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum Diffusion {
    Constant(f64),
    /// `κ(x) = exp(x + x²)`
    ExpXPlusXSquared,
    /// `κ(x) = exp(x − x²)`
    ExpXMinusXSquared,
}

impl Default for Diffusion {
    fn default() -> Self {
        Diffusion::Constant(1.0)
    }
}

impl Diffusion {
    pub fn at<T: Scalar>(&self, x: T) -> T {
        match *self {
            Diffusion::Constant(c) => T::lit(c),
            Diffusion::ExpXPlusXSquared => (x + x * x).exp(),
            Diffusion::ExpXMinusXSquared => (x - x * x).exp(),
        }
    }

    /// Two-dimensional value, taken as the separable product `κ(x) κ(y)`.
    pub fn at_2d<T: Scalar>(&self, x: T, y: T) -> T {
        match *self {
            Diffusion::Constant(c) => T::lit(c),
            _ => self.at(x) * self.at(y),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Diffusion::Constant(_))
    }

    pub fn id(&self) -> &'static str {
        match self {
            Diffusion::Constant(_) => "constant",
            Diffusion::ExpXPlusXSquared => "exp_x_plus_x2",
            Diffusion::ExpXMinusXSquared => "exp_x_minus_x2",
        }
    }

    pub fn from_id(id: &str) -> Option<Self> {
        match id {
            "constant" | "one" => Some(Diffusion::Constant(1.0)),
            "exp_x_plus_x2" => Some(Diffusion::ExpXPlusXSquared),
            "exp_x_minus_x2" => Some(Diffusion::ExpXMinusXSquared),
            _ => None,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Diffusion::Constant(c) if !(c > 0.0 && c.is_finite()) => Err(Error::InvalidArgument(
                format!("diffusion coefficient must be positive, got {c}"),
            )),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1D<T> {
    boundaries: Vec<T>,
}

impl<T: Scalar> Mesh1D<T> {
    pub fn uniform(a: T, b: T, n_elements: usize) -> Result<Self> {
        if !(a < b) {
            return Err(Error::InvalidArgument(format!(
                "domain endpoints must satisfy a < b, got ({a}, {b})"
            )));
        }
        if n_elements < 2 {
            return Err(Error::TooFewElements(n_elements));
        }
        let nf = T::from_usize_lossy(n_elements);
        let mut boundaries: Vec<T> = (0..=n_elements)
            .map(|i| a + (b - a) * T::from_usize_lossy(i) / nf)
            .collect();
        boundaries[n_elements] = b;
        Ok(Self { boundaries })
    }

    /// Unit interval split into `n_elements` equal elements.
    pub fn unit(n_elements: usize) -> Result<Self> {
        Self::uniform(T::zero(), T::one(), n_elements)
    }

    pub fn from_boundaries(boundaries: Vec<T>) -> Result<Self> {
        if boundaries.len() < 3 {
            return Err(Error::TooFewElements(boundaries.len().saturating_sub(1)));
        }
        if !boundaries.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidArgument(
                "element boundaries must be strictly increasing".into(),
            ));
        }
        Ok(Self { boundaries })
    }

    pub fn boundaries(&self) -> &[T] {
        &self.boundaries
    }

    pub fn n_elements(&self) -> usize {
        self.boundaries.len() - 1
    }

    pub fn start(&self) -> T {
        self.boundaries[0]
    }

    pub fn end(&self) -> T {
        self.boundaries[self.boundaries.len() - 1]
    }

    pub fn element(&self, e: usize) -> (T, T) {
        (self.boundaries[e], self.boundaries[e + 1])
    }

    pub fn size(&self, e: usize) -> T {
        self.boundaries[e + 1] - self.boundaries[e]
    }

    pub fn sizes(&self) -> Vec<T> {
        self.boundaries.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn max_size(&self) -> T {
        self.sizes().into_iter().fold(T::zero(), T::max)
    }

    /// Number of interior degrees of freedom for degree `p`.
    pub fn n_dof(&self, p: usize) -> usize {
        self.n_elements() * p - 1
    }

    /// Per-element lower bound of `κ`, sampled at both endpoints and at the
    /// `(p+1)` Gauss-Legendre points of each element.
    pub fn element_kappa_min(&self, kappa: &Diffusion, p: usize) -> Vec<T> {
        let rule = gauss_legendre::<T>(p + 1).expect("p + 1 >= 1");
        (0..self.n_elements())
            .map(|e| {
                let (xl, xr) = self.element(e);
                let half = (xr - xl) / T::lit(2.0);
                let mid = (xr + xl) / T::lit(2.0);
                rule.points()
                    .iter()
                    .map(|&xi| kappa.at(mid + half * xi))
                    .chain([kappa.at(xl), kappa.at(xr)])
                    .fold(T::infinity(), T::min)
            })
            .collect()
    }
}

/// Interior vertex shared by elements `left` and `left + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interface<T> {
    pub location: T,
    pub left: usize,
    pub h_f: T,
    pub kappa_f: T,
}

/// One record per interior vertex. `h_F` is the smaller adjacent element size
/// and `κ_F` the smaller adjacent element minimum of `κ`; `p` selects the
/// sample points used for the element minima.
pub fn interfaces<T: Scalar>(mesh: &Mesh1D<T>, kappa: &Diffusion, p: usize) -> Result<Vec<Interface<T>>> {
    kappa.validate()?;
    let kmin = mesh.element_kappa_min(kappa, p);
    let sizes = mesh.sizes();
    Ok((0..mesh.n_elements() - 1)
        .map(|e| Interface {
            location: mesh.boundaries[e + 1],
            left: e,
            h_f: sizes[e].min(sizes[e + 1]),
            kappa_f: kmin[e].min(kmin[e + 1]),
        })
        .collect())
}

/// Length scale convention for `h_F` on 2D edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeScale {
    /// element extent normal to the edge
    #[default]
    Side,
    /// element diagonal
    Diameter,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TensorMesh2D<T> {
    pub x: Mesh1D<T>,
    pub y: Mesh1D<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeOrientation {
    /// edge at fixed `x`, between elements `(ex-1, ey)` and `(ex, ey)`
    Vertical,
    /// edge at fixed `y`, between elements `(ex, ey-1)` and `(ex, ey)`
    Horizontal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge<T> {
    pub orientation: EdgeOrientation,
    /// the element on the low side, as `(ex, ey)`
    pub low: (usize, usize),
    /// the element on the high side
    pub high: (usize, usize),
    pub h_f: T,
    pub kappa_f: T,
}

impl<T: Scalar> TensorMesh2D<T> {
    pub fn new(x: Mesh1D<T>, y: Mesh1D<T>) -> Self {
        Self { x, y }
    }

    pub fn unit_square(nx: usize, ny: usize) -> Result<Self> {
        Ok(Self::new(Mesh1D::unit(nx)?, Mesh1D::unit(ny)?))
    }

    pub fn n_elements(&self) -> usize {
        self.x.n_elements() * self.y.n_elements()
    }

    pub fn n_dof(&self, p: usize) -> usize {
        self.x.n_dof(p) * self.y.n_dof(p)
    }

    fn element_diameter(&self, ex: usize, ey: usize) -> T {
        self.x.size(ex).hypot(self.y.size(ey))
    }

    /// Per-element `κ` lower bound, indexed `ex + ey * nx`.
    pub fn element_kappa_min(&self, kappa: &Diffusion, p: usize) -> Vec<T> {
        let rule = gauss_legendre::<T>(p + 1).expect("p + 1 >= 1");
        let mut pts_ref: Vec<T> = rule.points().to_vec();
        pts_ref.push(-T::one());
        pts_ref.push(T::one());
        let nx = self.x.n_elements();
        let ny = self.y.n_elements();
        let mut out = Vec::with_capacity(nx * ny);
        for ey in 0..ny {
            let (yl, yr) = self.y.element(ey);
            for ex in 0..nx {
                let (xl, xr) = self.x.element(ex);
                let mut m = T::infinity();
                for &xi in &pts_ref {
                    let x = (xl + xr) / T::lit(2.0) + (xr - xl) / T::lit(2.0) * xi;
                    for &eta in &pts_ref {
                        let y = (yl + yr) / T::lit(2.0) + (yr - yl) / T::lit(2.0) * eta;
                        m = m.min(kappa.at_2d(x, y));
                    }
                }
                out.push(m);
            }
        }
        out
    }

    /// Interior edges: vertical ones first (row by row), then horizontal.
    pub fn edges(&self, kappa: &Diffusion, p: usize, scale: EdgeScale) -> Result<Vec<Edge<T>>> {
        kappa.validate()?;
        let nx = self.x.n_elements();
        let ny = self.y.n_elements();
        let kmin = self.element_kappa_min(kappa, p);
        let mut out = Vec::with_capacity((nx - 1) * ny + nx * (ny - 1));
        let h_of = |a: (usize, usize), b: (usize, usize), o: EdgeOrientation| match scale {
            EdgeScale::Side => match o {
                EdgeOrientation::Vertical => self.x.size(a.0).min(self.x.size(b.0)),
                EdgeOrientation::Horizontal => self.y.size(a.1).min(self.y.size(b.1)),
            },
            EdgeScale::Diameter => self
                .element_diameter(a.0, a.1)
                .min(self.element_diameter(b.0, b.1)),
        };
        for ey in 0..ny {
            for ex in 1..nx {
                let (low, high) = ((ex - 1, ey), (ex, ey));
                out.push(Edge {
                    orientation: EdgeOrientation::Vertical,
                    low,
                    high,
                    h_f: h_of(low, high, EdgeOrientation::Vertical),
                    kappa_f: kmin[low.0 + low.1 * nx].min(kmin[high.0 + high.1 * nx]),
                });
            }
        }
        for ey in 1..ny {
            for ex in 0..nx {
                let (low, high) = ((ex, ey - 1), (ex, ey));
                out.push(Edge {
                    orientation: EdgeOrientation::Horizontal,
                    low,
                    high,
                    h_f: h_of(low, high, EdgeOrientation::Horizontal),
                    kappa_f: kmin[low.0 + low.1 * nx].min(kmin[high.0 + high.1 * nx]),
                });
            }
        }
        Ok(out)
    }
}

/// Global numbering of interior nodes. Boundary nodes map to `None`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DofMap {
    degree: usize,
    n_dof: usize,
    elements: Vec<Vec<Option<usize>>>,
}

impl DofMap {
    /// Left-to-right numbering on a 1D mesh.
    pub fn new_1d<T: Scalar>(mesh: &Mesh1D<T>, p: usize) -> Self {
        let n_el = mesh.n_elements();
        let last = n_el * p;
        let elements = (0..n_el)
            .map(|e| {
                (0..=p)
                    .map(|a| {
                        let g = e * p + a;
                        (g != 0 && g != last).then(|| g - 1)
                    })
                    .collect()
            })
            .collect();
        Self {
            degree: p,
            n_dof: last - 1,
            elements,
        }
    }

    /// x-fastest lexicographic numbering on a tensor mesh. Element `(ex, ey)`
    /// sits at index `ex + ey * nx`; its local node `(a, b)` at `a + b * (p+1)`.
    pub fn new_2d<T: Scalar>(mesh: &TensorMesh2D<T>, p: usize) -> Self {
        let nx = mesh.x.n_elements();
        let ny = mesh.y.n_elements();
        let (lx, ly) = (nx * p, ny * p);
        let row = lx - 1;
        let mut elements = Vec::with_capacity(nx * ny);
        for ey in 0..ny {
            for ex in 0..nx {
                let mut local = Vec::with_capacity((p + 1) * (p + 1));
                for b in 0..=p {
                    for a in 0..=p {
                        let gx = ex * p + a;
                        let gy = ey * p + b;
                        let interior = gx != 0 && gx != lx && gy != 0 && gy != ly;
                        local.push(interior.then(|| (gx - 1) + (gy - 1) * row));
                    }
                }
                elements.push(local);
            }
        }
        Self {
            degree: p,
            n_dof: (lx - 1) * (ly - 1),
            elements,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_dof(&self) -> usize {
        self.n_dof
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn element(&self, e: usize) -> &[Option<usize>] {
        &self.elements[e]
    }

    /// Largest `|i - j|` between dofs of one element or of two elements.
    pub fn bandwidth_of(&self, elems: &[usize]) -> usize {
        let mut lo = usize::MAX;
        let mut hi = 0;
        for &e in elems {
            for g in self.elements[e].iter().flatten() {
                lo = lo.min(*g);
                hi = hi.max(*g);
            }
        }
        hi.saturating_sub(lo)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn uniform_mesh_and_interfaces() {
        let m = Mesh1D::<f64>::uniform(0.0, 1.0, 4).unwrap();
        assert_eq!(m.boundaries(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        let f = interfaces(&m, &Diffusion::Constant(1.0), 1).unwrap();
        assert_eq!(f.len(), 3);
        for (i, rec) in f.iter().enumerate() {
            assert_eq!(rec.location, 0.25 * (i + 1) as f64);
            assert_eq!(rec.h_f, 0.25);
            assert_eq!(rec.kappa_f, 1.0);
        }
        let total: f64 = m.sizes().iter().sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn uniform_sizes_are_equal() {
        let m = Mesh1D::<f64>::unit(200).unwrap();
        let h = m.sizes();
        for s in &h {
            assert!(((s - h[0]) / h[0]).abs() <= 1e-13);
        }
        assert_eq!(m.n_dof(1), 199);
        assert_eq!(m.n_dof(2), 399);
    }

    #[test]
    fn rejects_bad_meshes() {
        assert_eq!(Mesh1D::<f64>::unit(1).unwrap_err(), Error::TooFewElements(1));
        assert!(matches!(
            Mesh1D::<f64>::uniform(1.0, 0.0, 4),
            Err(Error::InvalidArgument(_))
        ));
        assert!(Mesh1D::<f64>::from_boundaries(vec![0.0, 0.5, 0.5, 1.0]).is_err());
    }

    #[test]
    fn variable_kappa_interface_uses_left_minimum() {
        let m = Mesh1D::<f64>::unit(4).unwrap();
        let f = interfaces(&m, &Diffusion::ExpXPlusXSquared, 1).unwrap();
        assert_abs_diff_eq!(f[0].kappa_f, 1.0, epsilon = 1e-15);
        // dense sampling oracle for the element minima
        for rec in &f {
            let (a, b) = m.element(rec.left);
            let dense = (0..=1000)
                .map(|k| a + (b - a) * k as f64 / 1000.0)
                .map(|x: f64| (x + x * x).exp())
                .fold(f64::INFINITY, f64::min);
            assert_abs_diff_eq!(rec.kappa_f, dense, epsilon = 1e-12);
        }
    }

    #[test]
    fn nonuniform_interface_size() {
        let m = Mesh1D::from_boundaries(vec![0.0, 0.2, 0.5, 1.0]).unwrap();
        let f = interfaces(&m, &Diffusion::Constant(1.0), 1).unwrap();
        assert_abs_diff_eq!(f[1].location, 0.5);
        assert_abs_diff_eq!(f[1].h_f, 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(f[0].h_f, 0.2, epsilon = 1e-15);
    }

    #[test]
    fn dof_map_1d() {
        let m = Mesh1D::<f64>::unit(3).unwrap();
        let d = DofMap::new_1d(&m, 1);
        assert_eq!(d.element(0), &[None, Some(0)]);
        assert_eq!(d.element(1), &[Some(0), Some(1)]);
        assert_eq!(d.element(2), &[Some(1), None]);
        let d2 = DofMap::new_1d(&Mesh1D::<f64>::unit(2).unwrap(), 2);
        assert_eq!(d2.n_dof(), 3);
        assert_eq!(d2.element(1), &[Some(1), Some(2), None]);
    }

    #[test]
    fn dof_map_2d_counts_and_bijection() {
        let m = TensorMesh2D::<f64>::unit_square(40, 40).unwrap();
        assert_eq!(m.n_dof(2), 6241);
        assert_eq!(DofMap::new_2d(&m, 2).n_dof(), 6241);

        let m = TensorMesh2D::<f64>::unit_square(3, 4).unwrap();
        for p in 1..=3 {
            let d = DofMap::new_2d(&m, p);
            assert_eq!(d.n_dof(), (3 * p - 1) * (4 * p - 1));
            let mut seen = vec![false; d.n_dof()];
            for e in 0..d.n_elements() {
                for g in d.element(e).iter().flatten() {
                    seen[*g] = true;
                }
            }
            assert!(seen.iter().all(|&s| s));
        }
    }

    #[test]
    fn edge_counts_and_scales() {
        let m = TensorMesh2D::<f64>::unit_square(4, 3).unwrap();
        let e = m.edges(&Diffusion::Constant(1.0), 1, EdgeScale::Side).unwrap();
        assert_eq!(e.len(), 4 * 2 + 3 * 3);
        let v = e.iter().find(|e| e.orientation == EdgeOrientation::Vertical).unwrap();
        assert_abs_diff_eq!(v.h_f, 0.25);
        let h = e.iter().find(|e| e.orientation == EdgeOrientation::Horizontal).unwrap();
        assert_abs_diff_eq!(h.h_f, 1.0 / 3.0);
        let d = m.edges(&Diffusion::Constant(1.0), 1, EdgeScale::Diameter).unwrap();
        assert_abs_diff_eq!(d[0].h_f, (0.25f64.powi(2) + (1.0f64 / 3.0).powi(2)).sqrt());
    }
}
