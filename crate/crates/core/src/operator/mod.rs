//! Finite-difference Schrödinger operators on boxes and their spectra.

mod eigen;
mod grid;
mod hamiltonian;
mod potential;
pub mod io;
mod region;
mod rho;
mod skyline;

pub use eigen::{
    count_in_interval, count_in_interval_dense, count_in_interval_with, eigs_lowest, relative_residual,
    symmetric_eigen, symmetric_eigenvalues, EigMethod, EigOptions, EigenPair,
};
pub use grid::{Grid, GridFunction, DEFAULT_POINT_CAP};
pub use hamiltonian::{build_hamiltonian, CsrMatrix, DiscreteHamiltonian};
pub use potential::PotentialSpec;
pub use region::{gradient_mass, mass, nodes_in_box, Region};
pub use rho::{rho_switch, RhoSwitch};
pub use skyline::{count_below, SkylineLdl};
