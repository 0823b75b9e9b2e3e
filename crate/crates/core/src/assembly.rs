//! Global matrices and the per-method generalized eigenproblem.
//!
//! | method    | `A`         | `B`                              |
//! |-----------|-------------|----------------------------------|
//! | FEM       | `K`         | `M_G`                            |
//! | SoftFEM   | `K − η_K S` | `M_G`                            |
//! | GSFEM     | `K − η_K S` | `M_G + η_M S_g`                  |
//! | SoftFEMBQ | `K − η_K S` | `α M_G + (1−α) M_L`              |
//! | GSFEMBQ   | `K − η_K S` | `α M_G + (1−α) M_L + η_M S_g`    |
//!
//! `S` weights each interior interface by `κ_F h_F`, `S_g` by `κ_F h_F³`.
//! Boundary vertices and edges carry no penalty. Dirichlet nodes are
//! eliminated.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::elements::{BasisTable, ReferenceElement};
use crate::matrix::SymmetricMatrix;
use crate::mesh::{interfaces, DofMap, EdgeOrientation, EdgeScale};
use crate::quadrature::{gauss_legendre, QuadratureFamily, QuadratureRule};
use crate::{Diffusion, Error, Mesh1D, ParameterTriple, Result, Scalar, TensorMesh2D};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MethodKind {
    #[serde(rename = "FEM")]
    Fem,
    #[serde(rename = "SoftFEM")]
    SoftFem,
    #[serde(rename = "GSFEM")]
    Gsfem,
    #[serde(rename = "SoftFEMBQ")]
    SoftFemBq,
    #[serde(rename = "GSFEMBQ")]
    GsfemBq,
}

impl MethodKind {
    pub const ALL: [MethodKind; 5] = [
        MethodKind::Fem,
        MethodKind::SoftFem,
        MethodKind::Gsfem,
        MethodKind::SoftFemBq,
        MethodKind::GsfemBq,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MethodKind::Fem => "FEM",
            MethodKind::SoftFem => "SoftFEM",
            MethodKind::Gsfem => "GSFEM",
            MethodKind::SoftFemBq => "SoftFEMBQ",
            MethodKind::GsfemBq => "GSFEMBQ",
        }
    }
}

impl fmt::Display for MethodKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MethodKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MethodKind::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown method '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodConfig<T> {
    pub method: MethodKind,
    /// polynomial degree `p`
    pub degree: usize,
    pub params: ParameterTriple<T>,
    #[serde(default)]
    pub diffusion: Diffusion,
    /// Gauss-Legendre points per element for the stiffness; `p + 1` if unset
    #[serde(default)]
    pub stiffness_points: Option<usize>,
    #[serde(default)]
    pub edge_scale: EdgeScale,
}

impl<T: Scalar> MethodConfig<T> {
    /// Validated configuration with `κ = 1`.
    pub fn new(method: MethodKind, degree: usize, params: ParameterTriple<T>) -> Result<Self> {
        let cfg = Self {
            method,
            degree,
            params,
            diffusion: Diffusion::default(),
            stiffness_points: None,
            edge_scale: EdgeScale::Side,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn fem(degree: usize) -> Result<Self> {
        Self::new(MethodKind::Fem, degree, ParameterTriple::galerkin())
    }

    pub fn soft_fem(degree: usize, eta_k: T) -> Result<Self> {
        Self::new(MethodKind::SoftFem, degree, ParameterTriple::new(eta_k, T::zero(), T::one()))
    }

    pub fn gsfem(degree: usize, eta_k: T, eta_m: T) -> Result<Self> {
        Self::new(MethodKind::Gsfem, degree, ParameterTriple::new(eta_k, eta_m, T::one()))
    }

    pub fn soft_fem_bq(degree: usize, eta_k: T, alpha: T) -> Result<Self> {
        Self::new(MethodKind::SoftFemBq, degree, ParameterTriple::new(eta_k, T::zero(), alpha))
    }

    pub fn gsfem_bq(degree: usize, params: ParameterTriple<T>) -> Result<Self> {
        Self::new(MethodKind::GsfemBq, degree, params)
    }

    pub fn with_diffusion(mut self, diffusion: Diffusion) -> Self {
        self.diffusion = diffusion;
        self
    }

    pub fn with_stiffness_points(mut self, points: usize) -> Self {
        self.stiffness_points = Some(points);
        self
    }

    pub fn with_edge_scale(mut self, scale: EdgeScale) -> Self {
        self.edge_scale = scale;
        self
    }

    /// Checks the parameter pattern each method admits.
    pub fn validate(&self) -> Result<()> {
        if !(1..=4).contains(&self.degree) {
            return Err(Error::UnsupportedDegree(self.degree));
        }
        let ParameterTriple { eta_k, eta_m, alpha } = self.params;
        if !(eta_k.is_finite() && eta_m.is_finite() && alpha.is_finite()) {
            return Err(Error::InvalidConfig("parameters must be finite".into()));
        }
        let (zero, one) = (T::zero(), T::one());
        let bad = |what: &str| {
            Err(Error::InvalidConfig(format!(
                "{} requires {what}, got (eta_k, eta_m, alpha) = ({eta_k}, {eta_m}, {alpha})",
                self.method
            )))
        };
        match self.method {
            MethodKind::Fem if eta_k != zero || eta_m != zero || alpha != one => {
                bad("eta_k = eta_m = 0 and alpha = 1")
            }
            MethodKind::SoftFem if eta_m != zero || alpha != one => bad("eta_m = 0 and alpha = 1"),
            MethodKind::Gsfem if alpha != one => bad("alpha = 1"),
            MethodKind::SoftFemBq if eta_m != zero => bad("eta_m = 0"),
            _ => {
                if let Some(q) = self.stiffness_points {
                    if q == 0 || q > crate::quadrature::MAX_POINTS {
                        return Err(Error::InvalidConfig(format!(
                            "stiffness_points must be in 1..=16, got {q}"
                        )));
                    }
                }
                Ok(())
            }
        }
    }

    /// Short label such as `GSFEMBQ(eta_k=0.125, eta_m=0.0104, alpha=0.5)`.
    pub fn label(&self) -> String {
        let ParameterTriple { eta_k, eta_m, alpha } = self.params;
        match self.method {
            MethodKind::Fem => "FEM".into(),
            MethodKind::SoftFem => format!("SoftFEM(eta_k={eta_k})"),
            MethodKind::Gsfem => format!("GSFEM(eta_k={eta_k}, eta_m={eta_m})"),
            MethodKind::SoftFemBq => format!("SoftFEMBQ(eta_k={eta_k}, alpha={alpha})"),
            MethodKind::GsfemBq => format!("GSFEMBQ(eta_k={eta_k}, eta_m={eta_m}, alpha={alpha})"),
        }
    }
}

/// `A x = λ B x` with the configuration that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricSystem<T> {
    pub a: SymmetricMatrix<T>,
    pub b: SymmetricMatrix<T>,
    pub config: MethodConfig<T>,
    pub description: String,
}

impl<T: Scalar> SymmetricSystem<T> {
    pub fn order(&self) -> usize {
        self.a.order()
    }

    /// Builds a system from explicit matrices.
    pub fn from_matrices(a: SymmetricMatrix<T>, b: SymmetricMatrix<T>) -> Result<Self> {
        if a.order() != b.order() {
            return Err(Error::InvalidArgument(format!(
                "order mismatch: A is {}, B is {}",
                a.order(),
                b.order()
            )));
        }
        Ok(Self {
            description: format!("explicit n={}", a.order()),
            a,
            b,
            config: MethodConfig::fem(1)?,
        })
    }
}

/// Reference-element tables at the points of one rule.
struct Tables<T> {
    rule: QuadratureRule<T>,
    val: BasisTable<T>,
    der: BasisTable<T>,
}

impl<T: Scalar> Tables<T> {
    fn new(elem: &ReferenceElement<T>, rule: QuadratureRule<T>) -> Self {
        let val = elem.eval_basis(rule.points());
        let der = elem.eval_basis_deriv(rule.points());
        Self { rule, val, der }
    }
}

fn stiffness_rule<T: Scalar>(p: usize, points: Option<usize>) -> Result<QuadratureRule<T>> {
    gauss_legendre(points.unwrap_or(p + 1))
}

fn mass_rule<T: Scalar>(p: usize, family: QuadratureFamily) -> Result<QuadratureRule<T>> {
    QuadratureRule::new(family, p + 1)
}

fn affine<T: Scalar>(xl: T, xr: T, xi: T) -> T {
    (xl + xr) / T::lit(2.0) + (xr - xl) / T::lit(2.0) * xi
}

fn penalty_power<T: Scalar>(h: T, power: u32) -> T {
    h.powi(power as i32)
}

fn check_power(power: u32) -> Result<()> {
    if power == 1 || power == 3 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("penalty weight power must be 1 or 3, got {power}")))
    }
}

/// Sums duplicate indices of a sparse vector.
fn merge_t<T: Scalar>(entries: impl IntoIterator<Item = (usize, T)>) -> Vec<(usize, T)> {
    let mut v: Vec<(usize, T)> = Vec::new();
    for (i, x) in entries {
        match v.iter_mut().find(|(j, _)| *j == i) {
            Some(slot) => slot.1 += x,
            None => v.push((i, x)),
        }
    }
    v
}

fn band_1d(n: usize, p: usize) -> usize {
    (2 * p).min(n.saturating_sub(1))
}

fn scatter<T: Scalar>(out: &mut SymmetricMatrix<T>, dofs: &[Option<usize>], local: &[T]) {
    let nb = dofs.len();
    for (a, ga) in dofs.iter().enumerate() {
        let Some(ga) = *ga else { continue };
        for (b, gb) in dofs.iter().enumerate() {
            let Some(gb) = *gb else { continue };
            let v = local[a * nb + b];
            if ga >= gb && v != T::zero() {
                out.add(ga, gb, v);
            }
        }
    }
}

/// Stiffness `K_ij = Σ_τ ∫_τ κ φ_j' φ_i'` with `p + 1` Gauss-Legendre points
/// per element (or `points` if given).
pub fn assemble_stiffness<T: Scalar>(
    mesh: &Mesh1D<T>,
    p: usize,
    kappa: &Diffusion,
    points: Option<usize>,
) -> Result<SymmetricMatrix<T>> {
    let elem = ReferenceElement::<T>::new(p)?;
    let tab = Tables::new(&elem, stiffness_rule(p, points)?);
    let dofs = DofMap::new_1d(mesh, p);
    let n = dofs.n_dof();
    let nb = p + 1;
    let mut out = SymmetricMatrix::zeros(n, band_1d(n, p));
    let mut local = vec![T::zero(); nb * nb];
    for e in 0..mesh.n_elements() {
        let (xl, xr) = mesh.element(e);
        let h = xr - xl;
        local.iter_mut().for_each(|v| *v = T::zero());
        for (k, (xi, w)) in tab.rule.iter().enumerate() {
            // (2/h)² from the derivatives, h/2 from the measure
            let c = w * kappa.at(affine(xl, xr, xi)) * T::lit(2.0) / h;
            for a in 0..nb {
                let da = tab.der.get(a, k);
                for b in 0..nb {
                    local[a * nb + b] += c * da * tab.der.get(b, k);
                }
            }
        }
        scatter(&mut out, dofs.element(e), &local);
    }
    Ok(out)
}

/// Consistent (`GaussLegendre`) or lumped (`GaussLobatto`) mass matrix, both
/// with `p + 1` points per element.
pub fn assemble_mass<T: Scalar>(
    mesh: &Mesh1D<T>,
    p: usize,
    family: QuadratureFamily,
) -> Result<SymmetricMatrix<T>> {
    let elem = ReferenceElement::<T>::new(p)?;
    let tab = Tables::new(&elem, mass_rule(p, family)?);
    let dofs = DofMap::new_1d(mesh, p);
    let n = dofs.n_dof();
    let nb = p + 1;
    let kd = match family {
        QuadratureFamily::GaussLobatto => 0,
        QuadratureFamily::GaussLegendre => p.min(n.saturating_sub(1)),
    };
    let mut out = SymmetricMatrix::zeros(n, kd);
    let mut local = vec![T::zero(); nb * nb];
    for e in 0..mesh.n_elements() {
        let h = mesh.size(e);
        local.iter_mut().for_each(|v| *v = T::zero());
        for (k, (_, w)) in tab.rule.iter().enumerate() {
            let c = w * h / T::lit(2.0);
            for a in 0..nb {
                for b in 0..nb {
                    local[a * nb + b] += c * tab.val.get(a, k) * tab.val.get(b, k);
                }
            }
        }
        if family == QuadratureFamily::GaussLobatto {
            // Lagrange property at the Lobatto points makes this exactly diagonal
            for a in 0..nb {
                for b in 0..nb {
                    if a != b {
                        local[a * nb + b] = T::zero();
                    }
                }
            }
        }
        scatter(&mut out, dofs.element(e), &local);
    }
    Ok(out)
}

/// Jump of `φ'` at every interior vertex as a sparse vector over global dofs.
pub fn jump_vectors<T: Scalar>(mesh: &Mesh1D<T>, p: usize) -> Result<Vec<Vec<(usize, T)>>> {
    let elem = ReferenceElement::<T>::new(p)?;
    let d_right = elem.derivatives_at(T::one());
    let d_left = elem.derivatives_at(-T::one());
    let dofs = DofMap::new_1d(mesh, p);
    let two = T::lit(2.0);
    Ok((0..mesh.n_elements() - 1)
        .map(|e| {
            let (hl, hr) = (mesh.size(e), mesh.size(e + 1));
            let left = dofs
                .element(e)
                .iter()
                .zip(&d_right)
                .filter_map(|(g, &d)| g.map(|g| (g, -two / hl * d)));
            let right = dofs
                .element(e + 1)
                .iter()
                .zip(&d_left)
                .filter_map(|(g, &d)| g.map(|g| (g, two / hr * d)));
            merge_t(left.chain(right))
        })
        .collect())
}

/// `S_ij = Σ_F κ_F h_F^power ⟦φ_j'⟧ ⟦φ_i'⟧` over interior vertices,
/// `power ∈ {1, 3}`.
pub fn assemble_penalty<T: Scalar>(
    mesh: &Mesh1D<T>,
    p: usize,
    kappa: &Diffusion,
    power: u32,
) -> Result<SymmetricMatrix<T>> {
    check_power(power)?;
    let faces = interfaces(mesh, kappa, p)?;
    let jumps = jump_vectors(mesh, p)?;
    let n = mesh.n_dof(p);
    let mut out = SymmetricMatrix::zeros(n, band_1d(n, p));
    for (f, j) in faces.iter().zip(&jumps) {
        out.add_outer(j, f.kappa_f * penalty_power(f.h_f, power));
    }
    Ok(out)
}

/// Combines the ingredient matrices per the method table.
fn compose<T: Scalar>(
    config: &MethodConfig<T>,
    k: SymmetricMatrix<T>,
    m_g: SymmetricMatrix<T>,
    lumped: impl FnOnce() -> Result<SymmetricMatrix<T>>,
    penalty: impl Fn(u32) -> Result<SymmetricMatrix<T>>,
) -> Result<(SymmetricMatrix<T>, SymmetricMatrix<T>)> {
    let ParameterTriple { eta_k, eta_m, alpha } = config.params;
    let a = if eta_k != T::zero() {
        k.add_scaled(-eta_k, &penalty(1)?)?
    } else {
        k
    };
    let mut b = if alpha != T::one() {
        m_g.scaled(alpha).add_scaled(T::one() - alpha, &lumped()?)?
    } else {
        m_g
    };
    if eta_m != T::zero() {
        b = b.add_scaled(eta_m, &penalty(3)?)?;
    }
    Ok((a, b))
}

/// The method's generalized eigenproblem on a 1D mesh.
pub fn build_system<T: Scalar>(mesh: &Mesh1D<T>, config: &MethodConfig<T>) -> Result<SymmetricSystem<T>> {
    config.validate()?;
    let p = config.degree;
    let kappa = &config.diffusion;
    let k = assemble_stiffness(mesh, p, kappa, config.stiffness_points)?;
    let m_g = assemble_mass(mesh, p, QuadratureFamily::GaussLegendre)?;
    let (a, b) = compose(
        config,
        k,
        m_g,
        || assemble_mass(mesh, p, QuadratureFamily::GaussLobatto),
        |power| assemble_penalty(mesh, p, kappa, power),
    )?;
    Ok(SymmetricSystem {
        a,
        b,
        config: config.clone(),
        description: format!(
            "1d [{}, {}] N={} p={} kappa={}",
            mesh.start(),
            mesh.end(),
            mesh.n_elements(),
            p,
            kappa.id()
        ),
    })
}

fn band_2d<T: Scalar>(mesh: &TensorMesh2D<T>, p: usize) -> usize {
    let row = mesh.x.n_dof(p);
    let n = mesh.n_dof(p);
    (2 * p * row + 2 * p).min(n.saturating_sub(1))
}

/// Tensor-product element matrices on `(ex, ey)` for a rule family.
fn element_matrix_2d<T: Scalar>(
    tab: &Tables<T>,
    nb: usize,
    (xl, xr): (T, T),
    (yl, yr): (T, T),
    kappa: Option<&Diffusion>,
    local: &mut [T],
) {
    let (hx, hy) = (xr - xl, yr - yl);
    let n2 = nb * nb;
    local.iter_mut().for_each(|v| *v = T::zero());
    let q = tab.rule.len();
    let jac = hx * hy / T::lit(4.0);
    let (gx, gy) = (T::lit(2.0) / hx, T::lit(2.0) / hy);
    for kx in 0..q {
        let (xi, wx) = (tab.rule.points()[kx], tab.rule.weights()[kx]);
        for ky in 0..q {
            let (eta, wy) = (tab.rule.points()[ky], tab.rule.weights()[ky]);
            let w = wx * wy * jac;
            match kappa {
                Some(kappa) => {
                    let c = w * kappa.at_2d(affine(xl, xr, xi), affine(yl, yr, eta));
                    for bj in 0..nb {
                        for aj in 0..nb {
                            let i = aj + bj * nb;
                            let dxi = gx * tab.der.get(aj, kx) * tab.val.get(bj, ky);
                            let dyi = gy * tab.val.get(aj, kx) * tab.der.get(bj, ky);
                            for bk in 0..nb {
                                for ak in 0..nb {
                                    let j = ak + bk * nb;
                                    let dxj = gx * tab.der.get(ak, kx) * tab.val.get(bk, ky);
                                    let dyj = gy * tab.val.get(ak, kx) * tab.der.get(bk, ky);
                                    local[i * n2 + j] += c * (dxi * dxj + dyi * dyj);
                                }
                            }
                        }
                    }
                }
                None => {
                    for bj in 0..nb {
                        for aj in 0..nb {
                            let i = aj + bj * nb;
                            let vi = tab.val.get(aj, kx) * tab.val.get(bj, ky);
                            for bk in 0..nb {
                                for ak in 0..nb {
                                    let j = ak + bk * nb;
                                    local[i * n2 + j] += w * vi * tab.val.get(ak, kx) * tab.val.get(bk, ky);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
}

fn assemble_volume_2d<T: Scalar>(
    mesh: &TensorMesh2D<T>,
    p: usize,
    tab: &Tables<T>,
    kappa: Option<&Diffusion>,
    kd: usize,
) -> SymmetricMatrix<T> {
    let dofs = DofMap::new_2d(mesh, p);
    let nb = p + 1;
    let n2 = nb * nb;
    let nx = mesh.x.n_elements();
    let mut out = SymmetricMatrix::zeros(dofs.n_dof(), kd);
    let mut local = vec![T::zero(); n2 * n2];
    for ey in 0..mesh.y.n_elements() {
        for ex in 0..nx {
            element_matrix_2d(tab, nb, mesh.x.element(ex), mesh.y.element(ey), kappa, &mut local);
            if kappa.is_none() && tab.rule.family() == QuadratureFamily::GaussLobatto {
                for i in 0..n2 {
                    for j in 0..n2 {
                        if i != j {
                            local[i * n2 + j] = T::zero();
                        }
                    }
                }
            }
            scatter(&mut out, dofs.element(ex + ey * nx), &local);
        }
    }
    out
}

/// Stiffness on a tensor mesh with `q × q` Gauss-Legendre points.
pub fn assemble_stiffness_2d<T: Scalar>(
    mesh: &TensorMesh2D<T>,
    p: usize,
    kappa: &Diffusion,
    points: Option<usize>,
) -> Result<SymmetricMatrix<T>> {
    let elem = ReferenceElement::<T>::new(p)?;
    let tab = Tables::new(&elem, stiffness_rule(p, points)?);
    Ok(assemble_volume_2d(mesh, p, &tab, Some(kappa), band_2d(mesh, p)))
}

/// Tensor-product mass with `(p+1)²` points of the given family.
pub fn assemble_mass_2d<T: Scalar>(
    mesh: &TensorMesh2D<T>,
    p: usize,
    family: QuadratureFamily,
) -> Result<SymmetricMatrix<T>> {
    let elem = ReferenceElement::<T>::new(p)?;
    let tab = Tables::new(&elem, mass_rule(p, family)?);
    Ok(assemble_volume_2d(mesh, p, &tab, None, band_2d(mesh, p)))
}

/// Edge penalty `Σ_F κ_F h_F^power ∫_F ⟦∂_n φ_j⟧ ⟦∂_n φ_i⟧` over interior
/// edges, integrated with `p + 1` Gauss-Legendre points along each edge.
pub fn assemble_penalty_2d<T: Scalar>(
    mesh: &TensorMesh2D<T>,
    p: usize,
    kappa: &Diffusion,
    power: u32,
    scale: EdgeScale,
) -> Result<SymmetricMatrix<T>> {
    check_power(power)?;
    let elem = ReferenceElement::<T>::new(p)?;
    let rule = gauss_legendre::<T>(p + 1)?;
    let val = elem.eval_basis(rule.points());
    let d_hi = elem.derivatives_at(T::one());
    let d_lo = elem.derivatives_at(-T::one());
    let dofs = DofMap::new_2d(mesh, p);
    let nx = mesh.x.n_elements();
    let nb = p + 1;
    let two = T::lit(2.0);
    let mut out = SymmetricMatrix::zeros(dofs.n_dof(), band_2d(mesh, p));
    for edge in mesh.edges(kappa, p, scale)? {
        let (lo, hi) = (edge.low, edge.high);
        let lo_dofs = dofs.element(lo.0 + lo.1 * nx);
        let hi_dofs = dofs.element(hi.0 + hi.1 * nx);
        // normal extent of each side, and the edge length
        let (n_lo, n_hi, len) = match edge.orientation {
            EdgeOrientation::Vertical => (mesh.x.size(lo.0), mesh.x.size(hi.0), mesh.y.size(lo.1)),
            EdgeOrientation::Horizontal => (mesh.y.size(lo.1), mesh.y.size(hi.1), mesh.x.size(lo.0)),
        };
        let weight = edge.kappa_f * penalty_power(edge.h_f, power);
        for (k, (_, w)) in rule.iter().enumerate() {
            let mut entries = Vec::with_capacity(2 * nb * nb);
            for b in 0..nb {
                for a in 0..nb {
                    let local = a + b * nb;
                    // (normal index, tangential index) of local node (a, b)
                    let (nrm, tan) = match edge.orientation {
                        EdgeOrientation::Vertical => (a, b),
                        EdgeOrientation::Horizontal => (b, a),
                    };
                    let t = val.get(tan, k);
                    if let Some(g) = lo_dofs[local] {
                        entries.push((g, -two / n_lo * d_hi[nrm] * t));
                    }
                    if let Some(g) = hi_dofs[local] {
                        entries.push((g, two / n_hi * d_lo[nrm] * t));
                    }
                }
            }
            let jump = merge_t(entries);
            out.add_outer(&jump, weight * w * len / two);
        }
    }
    Ok(out)
}

/// The method's eigenproblem on a tensor mesh by direct element and edge
/// assembly. Variable `κ` is taken as the separable product `κ(x) κ(y)`.
pub fn build_system_2d<T: Scalar>(
    mesh: &TensorMesh2D<T>,
    config: &MethodConfig<T>,
) -> Result<SymmetricSystem<T>> {
    config.validate()?;
    let p = config.degree;
    let kappa = &config.diffusion;
    let k = assemble_stiffness_2d(mesh, p, kappa, config.stiffness_points)?;
    let m_g = assemble_mass_2d(mesh, p, QuadratureFamily::GaussLegendre)?;
    let (a, b) = compose(
        config,
        k,
        m_g,
        || assemble_mass_2d(mesh, p, QuadratureFamily::GaussLobatto),
        |power| assemble_penalty_2d(mesh, p, kappa, power, config.edge_scale),
    )?;
    Ok(SymmetricSystem {
        a,
        b,
        config: config.clone(),
        description: description_2d(mesh, p, kappa),
    })
}

fn description_2d<T: Scalar>(mesh: &TensorMesh2D<T>, p: usize, kappa: &Diffusion) -> String {
    format!(
        "2d {}x{} p={} kappa={}",
        mesh.x.n_elements(),
        mesh.y.n_elements(),
        p,
        kappa.id()
    )
}

/// Kronecker assembly for constant `κ` and side-length `h_F`:
/// `K₂ = M_y⊗K_x + K_y⊗M_x`, `S₂ = M_y⊗S_x + S_y⊗M_x`, `M₂ = M_y⊗M_x`, with the
/// lumped part as `M_L,y⊗M_L,x`.
pub fn build_system_2d_kronecker<T: Scalar>(
    mesh: &TensorMesh2D<T>,
    config: &MethodConfig<T>,
) -> Result<SymmetricSystem<T>> {
    config.validate()?;
    if !config.diffusion.is_constant() {
        return Err(Error::InvalidConfig(
            "Kronecker assembly needs a constant diffusion coefficient".into(),
        ));
    }
    if config.edge_scale != EdgeScale::Side {
        return Err(Error::InvalidConfig(
            "Kronecker assembly needs side-length edge scaling".into(),
        ));
    }
    let p = config.degree;
    let kappa = &config.diffusion;
    let (mx, my) = (&mesh.x, &mesh.y);
    let gl = QuadratureFamily::GaussLegendre;
    let lo = QuadratureFamily::GaussLobatto;
    let mgx = assemble_mass(mx, p, gl)?;
    let mgy = assemble_mass(my, p, gl)?;
    let pair = |ax: &SymmetricMatrix<T>, ay: &SymmetricMatrix<T>| -> Result<SymmetricMatrix<T>> {
        SymmetricMatrix::kron(&mgy, ax).add_scaled(T::one(), &SymmetricMatrix::kron(ay, &mgx))
    };
    let k = pair(
        &assemble_stiffness(mx, p, kappa, config.stiffness_points)?,
        &assemble_stiffness(my, p, kappa, config.stiffness_points)?,
    )?;
    let m_g = SymmetricMatrix::kron(&mgy, &mgx);
    let (a, b) = compose(
        config,
        k,
        m_g,
        || Ok(SymmetricMatrix::kron(&assemble_mass(my, p, lo)?, &assemble_mass(mx, p, lo)?)),
        |power| pair(&assemble_penalty(mx, p, kappa, power)?, &assemble_penalty(my, p, kappa, power)?),
    )?;
    Ok(SymmetricSystem {
        a,
        b,
        config: config.clone(),
        description: description_2d(mesh, p, kappa) + " kronecker",
    })
}

/// Dense symmetric eigenvalues of small matrices by cyclic Jacobi, used by the
/// semi-definiteness checks in tests.
#[cfg(test)]
pub(crate) fn jacobi_eigenvalues(m: &SymmetricMatrix<f64>) -> Vec<f64> {
    let n = m.order();
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| m.get(i, j)).collect()).collect();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}
