//! Center-outward Lorenz curves, Kakwani functions, Lorenz potentials, and
//! concentration indices for multivariate samples, computed via exact optimal
//! matching to a regular spherical grid.

pub mod cli;
pub mod curves;
pub mod error;
pub mod grid;
mod lap;
pub mod indices;
pub mod potentials;
pub mod simulate;
pub mod transport;
pub mod univariate;

pub use curves::{conditionalize, kakwani_curve, lorenz_curve, lorenz_yx_curve, relativize, StepCurve};
pub use error::{Error, Result};
pub use grid::{build_grid, factorize, FactorizePolicy, GridShape, ReferenceGrid};
pub use indices::{g_index, km_gini, pietra_g_index, potential_gini, potential_pietra, IndexReport, KmGini};
pub use potentials::{lorenz_potential_curve, lorenz_potential_yx_curve, PotentialCurve};
pub use simulate::{Generator, GeneratorKind};
pub use transport::{solve_assignment, ExtensionMode, SampleMatrix, TransportPlan};
pub use univariate::{classical_gini, classical_lorenz, GiniMethod, SortedSample};
