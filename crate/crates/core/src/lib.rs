//! Measurement-driven analog of adiabatic state preparation.
//!
//! A system prepared in the ground space of an initial Hamiltonian is carried to the
//! ground space of a final Hamiltonian by measuring a slowly varying sequence of
//! Hamiltonians along an interpolation path. For frustration-free Hamiltonians each
//! ground-space measurement can be replaced by repeated measurement of randomly chosen
//! individual terms, which only ever touches the qubits of a single term.
//!
//! The crate is organised bottom-up:
//!
//! - [`spectral`] and [`state`]: dense Hermitian linear algebra and quantum states.
//! - [`hamiltonian`] and [`path`]: weighted local-term Hamiltonians and interpolation paths.
//! - [`measurement`]: the accept/reject POVM per term and the random-term operation, as an
//!   exact success-conditioned channel and as sampled pure-state trajectories.
//! - [`schedule`]: the discretization condition relating step size to the spectral gap.
//! - [`protocol`]: end-to-end runs of the ideal and the term-measured protocols.
//! - [`instances`]: fixture families with known structure.
//! - [`cli`]: the batch experiment driver behind the `zeno-aqc` binary.
//!
//! Qubit ordering convention: qubit 0 is the most significant tensor factor, so basis
//! state `|b_0 b_1 ... b_{n-1}>` has index `sum_j b_j 2^(n-1-j)`.

pub mod cli;
pub mod error;
pub mod hamiltonian;
pub mod instances;
pub mod measurement;
pub mod path;
pub mod protocol;
pub mod schedule;
pub mod spectral;
pub mod state;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub use error::{Error, Result};
pub use hamiltonian::{FrustrationFreeHamiltonian, LocalTerm};
pub use path::{DiscretizedPath, InterpolationPath};
pub use spectral::{HermitianOperator, Projector};
pub use state::QuantumState;

/// Dense complex matrix.
pub type CMatrix = DMatrix<Complex64>;
/// Dense complex column vector.
pub type CVector = DVector<Complex64>;

/// Default width of the band above the minimum eigenvalue treated as the ground space.
pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-10;
