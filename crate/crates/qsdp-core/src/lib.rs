//! Solver core for convexly regularized semidefinite programs of the form
//!
//! ```text
//! minimize   Tr[H pi] + eps * Tr[phi(pi)]
//! over       pi >= 0  (Hermitian, positive semidefinite)
//! subject to Tr[Q_i pi] = q_i,   i = 0..M
//! ```
//!
//! solved through the unconstrained concave dual
//!
//! ```text
//! D(alpha) = sum_i alpha_i q_i - eps * Tr[psi((sum_i alpha_i Q_i - H) / eps)]
//! ```
//!
//! where `psi` is the Legendre conjugate of `phi`. The dual is maximized by
//! limited-memory quasi-Newton iteration; the primal optimizer is recovered as
//! `psi'((sum_i alpha_i Q_i - H) / eps)`.
//!
//! The crate is `no_std` (with `alloc`): all types are plain data, all
//! operations pure functions. IO, file formats and the command-line front end
//! live in the companion `qsdp-cli` crate.
//!
//! ```
//! use qsdp_core::{solve, HermOp, ProblemInstance, Regularizer, SolverConfig};
//!
//! // minimize eps * Tr[pi ln pi] subject to Tr[pi] = 1: the maximizer of the
//! // dual is alpha = 1 - ln d and the recovered state is I/d.
//! let d = 2;
//! let inst = ProblemInstance::new(
//!     HermOp::zeros(d),
//!     vec![HermOp::identity(d)],
//!     vec![1.0],
//!     1.0,
//! )
//! .unwrap();
//! let report = solve(&inst, Regularizer::VonNeumann, &SolverConfig::default()).unwrap();
//! assert!((report.alpha_star[0] - (1.0 - (d as f64).ln())).abs() < 1e-6);
//! assert!((report.pi_star.entry(0, 0).re - 0.5).abs() < 1e-6);
//! ```

#![no_std]
#![forbid(unsafe_code)]
// explicit indices mirror the matrix notation throughout
#![allow(clippy::needless_range_loop)]
// !(x > 0.0) deliberately rejects NaN alongside nonpositive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod error;
pub mod herm;
pub mod instances;
pub mod problem;
pub mod reg;
pub mod solver;
pub mod states;
pub mod transport;

pub use error::Error;
pub use herm::{HermOp, SpectralDecomp, Subsystem, C64};
pub use problem::{
    gamma_probe, FeasibilityCertificate, FeasibilityVerdict, ProblemInstance, SlaterDiagnostic,
    ValidationIssue, ZeroTempFeasibility,
};
pub use reg::Regularizer;
pub use solver::{
    eps_sweep, lbfgs_maximize, solve, solve_with_clock, EpsRung, OptimReport, RungOutcome,
    SolveReport, SolveStatus, SolverConfig, TraceRow,
};
pub use states::{
    cat_state, coherent_state, fock_quadratures, gaussian_fock_density, pauli_string, zeta_state,
    GaussianState, Pauli, StateVector,
};
pub use transport::classical_ot_oracle;
