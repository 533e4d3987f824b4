//! Landau-de Gennes Q-tensor modelling of confined nematics: energies, saddle dynamics
//! and solution landscapes on a square cuboid with surface anchoring.

pub mod energy;
pub mod error;
pub mod grid;
pub mod io;
pub mod landscape;
pub mod linsolve;
pub mod precond;
pub mod saddle;
pub mod tensor;

pub use error::{Error, Result};
pub use grid::{build_grid, Face, Field, GridGeometry};
pub use tensor::{BulkParams, QTensor};
