//! Staggered discontinuous Galerkin (SDG) discretization of the quasilinear
//! elliptic problem `-div(rho(grad u) grad u) = f` with homogeneous Dirichlet
//! data on triangulated polygonal domains.
//!
//! The crate is organised bottom-up:
//!
//! * [`mesh`]: initial triangulations and their staggered subdivision into
//!   first-type (`S(nu)`) and second-type (`R(e)`) macro elements.
//! * [`quadrature`], [`basis`], [`space`]: reference-element machinery and
//!   the constrained degree-of-freedom maps realising `U^h` and `W^h`.
//! * [`assembly`]: mass matrix, the coupling matrix `B` (and its adjoint
//!   assembly `B*`), the load vector and the nonlinear flux with its
//!   derivative.
//! * [`solver`]: Newton's method on the reduced `(G, u)` system.
//! * [`postprocess`]: element-local superconvergent reconstruction.
//! * [`problems`]: manufactured solutions, coefficients, forcing and norms.
//!
//! All numerical code is generic over the scalar type through [`Real`];
//! the aliases at the crate root fix it to `f64`, which is what the
//! convergence studies use.

pub mod assembly;
pub mod basis;
pub mod error;
pub mod linalg;
pub mod mesh;
pub mod postprocess;
pub mod problems;
pub mod quadrature;
pub mod solver;
pub mod space;

use std::fmt::{Debug, Display};
use std::iter::Sum;

pub use error::{Result, SdgError};

/// Floating point scalar usable throughout the crate (`f32` or `f64`).
///
/// Combines the `num-traits` float interface used by the element code with
/// faer's field trait needed by the dense and sparse factorizations.
pub trait Real:
    num_traits::Float
    + num_traits::FloatConst
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + faer::traits::RealField
    + Default
    + Debug
    + Display
    + std::fmt::LowerExp
    + Sum
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Every `f64` is representable (possibly
    /// rounded) in the supported types, so this never fails.
    #[inline]
    fn lit(v: f64) -> Self {
        <Self as num_traits::FromPrimitive>::from_f64(v).expect("f64 literal")
    }

    #[inline]
    fn from_count(v: usize) -> Self {
        <Self as num_traits::FromPrimitive>::from_usize(v).expect("usize conversion")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        <Self as num_traits::ToPrimitive>::to_f64(&self).unwrap_or(f64::NAN)
    }

    /// Relative threshold for numerical rank decisions.
    #[inline]
    fn rank_tolerance() -> Self {
        <Self as num_traits::Float>::epsilon().sqrt()
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// A point or vector in the plane.
pub type Point<T> = [T; 2];

pub type InitialMesh = mesh::InitialMesh<f64>;
pub type StaggeredMesh = mesh::StaggeredMesh<f64>;
pub type SdgSpaces = space::SdgSpaces<f64>;
pub type DofMap = space::DofMap<f64>;
pub type SdgSystem<'a> = assembly::SdgSystem<'a, f64>;
pub type SdgSolution = solver::SdgSolution<f64>;
pub type NewtonConfig = solver::NewtonConfig<f64>;
pub type PostprocessedSolution = postprocess::PostprocessedSolution<f64>;
pub type ProblemInstance = problems::ProblemInstance<f64>;

pub use problems::{Coefficient, ExactSolution, ManufacturedSolution, StandardCoefficient};
pub use solver::{NewtonReport, StopNorm};
