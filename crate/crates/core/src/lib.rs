//! Finite-element spectral approximation of second-order elliptic eigenvalue
//! problems with gradient-jump softening.
//!
//! The crate covers Galerkin FEM, SoftFEM (a gradient-jump penalty subtracted
//! from the stiffness form), GSFEM (the same penalty with `h_F^3` weight added
//! to the mass form), and the blended-quadrature variants SoftFEMBQ and
//! GSFEMBQ whose mass matrix mixes Gauss-Legendre and Gauss-Lobatto
//! integration. Everything numeric is generic over [`Scalar`] (`f32`/`f64`);
//! the closed-form parameter algebra in [`oracle`] also runs over exact
//! rationals.
//!
//! Pipeline: [`mesh`] + [`elements`] + [`quadrature`] feed [`assembly`], which
//! produces a [`assembly::SymmetricSystem`]; [`eigensolve`] returns the full
//! spectrum; [`metrics`] and [`oracle`] judge it.

pub mod assembly;
pub mod eigensolve;
pub mod elements;
mod error;
pub mod matrix;
pub mod mesh;
pub mod metrics;
pub mod oracle;
pub mod quadrature;
mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use assembly::{MethodConfig, MethodKind, SymmetricSystem};
pub use eigensolve::Spectrum;
pub use mesh::{Diffusion, Mesh1D, TensorMesh2D};
pub use oracle::ParameterTriple;

/// Exact rational used by the closed-form parameter algebra.
pub type Rational = num_rational::Ratio<i64>;

pub type QuadratureRule64 = quadrature::QuadratureRule<f64>;
pub type ReferenceElement64 = elements::ReferenceElement<f64>;
pub type Mesh1D64 = Mesh1D<f64>;
pub type TensorMesh2D64 = TensorMesh2D<f64>;
pub type SymmetricMatrix64 = matrix::SymmetricMatrix<f64>;
pub type SymmetricSystem64 = SymmetricSystem<f64>;
pub type MethodConfig64 = MethodConfig<f64>;
pub type Spectrum64 = Spectrum<f64>;
pub type ParameterTriple64 = ParameterTriple<f64>;
pub type RationalTriple = ParameterTriple<Rational>;

pub type Spectrum32 = Spectrum<f32>;
pub type SymmetricSystem32 = SymmetricSystem<f32>;
