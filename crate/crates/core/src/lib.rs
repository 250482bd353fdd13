//! Exact statevector toolkit for learning unitaries with layered variational
//! circuits.
//!
//! The crate is organised around the quantities that decide whether such a
//! model can be trained and whether it generalizes:
//!
//! * [`sim`] — complex statevectors, local gates and the PSD-rank kernel.
//! * [`ansatz`] — the circuit families, their application and analytic
//!   parameter derivatives.
//! * [`ensembles`] — samplers for training-state distributions and training
//!   sets with targets `V|ψ⟩`, `V = U(θ_g)`.
//! * [`metric`] — the data projector `Π_L` and the data quantum Fisher
//!   information metric (DQFIM) `Q`, whose rank is the effective dimension
//!   `D_L`.
//! * [`rank`] — saturation protocols producing the plateau ranks `R_L`,
//!   `R_∞`, the critical parameter count `M_c` and data size `L_c`.
//! * [`dla`] — Pauli-string Lie closures bounding `R_L` by `dim 𝔤`.
//! * [`train`] — fidelity cost, analytic gradients and the optimisation
//!   loop with test-error evaluation.

pub mod ansatz;
pub mod dla;
pub mod ensembles;
pub mod error;
pub mod metric;
pub mod rank;
pub mod rng;
pub mod sim;
pub mod train;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
