//! Fractional Schrödinger operators on periodic grids and magnetic lattices.

pub mod bs;
pub mod checks;
pub mod eigen;
pub mod fft;
pub mod grid;
pub mod magnetic;
pub mod operator;
pub mod potential;
pub mod spectrum;

pub use bs::{birman_schwinger_count, direct_count, BsResult, BsSolver};
pub use eigen::{SolverKind, SolverSettings};
pub use grid::GridSpec;
pub use operator::{build_operator, Confinement, DiscreteOperator};
pub use potential::{gaussian_ensemble, EnsembleSpec, Potential};
pub use spectrum::{negative_spectrum, SpectrumResult};
