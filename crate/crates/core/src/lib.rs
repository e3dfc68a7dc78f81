//! Dyadic and Haar analysis on spaces of homogeneous type, nonlocal energies
//! of fractional-Laplacian type, and Green functions computed by Galerkin
//! solves on subspaces where the energy is coercive.
//!
//! The numerical core is generic over the scalar type ([`Scalar`], i.e. `f32`
//! or `f64`); Sierpinski coordinates are exact rationals. The aliases at the
//! crate root fix the usual `f64` instantiation.

pub mod dyadic;
pub mod energy;
pub mod error;
pub mod export;
pub mod geometry;
pub mod haar;
mod linalg;
pub mod scalar;
pub mod solver;
pub mod verify;

pub use dyadic::{CellFunction, ChristReport, Cube, DyadicTree};
pub use energy::{EnergyReport, KernelParams, PairKernel};
pub use error::{Error, Result};
pub use geometry::{ifs_map, Address, HalfLineModel, ModelKind, SierpinskiModel, SpaceModel};
pub use haar::{HaarDecomposition, HaarFunction, HaarSystem};
pub use scalar::Scalar;
pub use solver::{GalerkinProblem, SolverKind, WeakSolution};

pub type Sierpinski = SierpinskiModel<f64>;
pub type HalfLine = HalfLineModel<f64>;
pub type SierpinskiTree = DyadicTree<f64, SierpinskiModel<f64>>;
pub type HalfLineTree = DyadicTree<f64, HalfLineModel<f64>>;
pub type Function = CellFunction<f64>;
pub type Haar = HaarSystem<f64>;
pub type Decomposition = HaarDecomposition<f64>;
pub type Kernel = KernelParams<f64>;
pub type Galerkin = GalerkinProblem<f64>;
pub type Solution = WeakSolution<f64>;
