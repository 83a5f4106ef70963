//! Quadratic-utility and linear mean–variance equilibria on finite
//! discrete-time markets.
//!
//! The crate is organised bottom-up:
//!
//! - [`tree`], [`process`] and [`scenario`]: the finite market model.
//! - [`stoch`]: martingale calculus on the tree (conditional expectations,
//!   predictable brackets, Galtchouk–Kunita–Watanabe decomposition,
//!   stochastic integrals, restarted stochastic exponentials).
//! - [`linalg`] and [`mvh`]: mean–variance hedging by weighted least squares,
//!   uniqueness diagnostics and the dynamic opportunity process.
//! - [`quadratic`]: construction and first-principles verification of
//!   quadratic equilibria, including the degenerate discrete-time case.
//! - [`linear_mv`]: the closed-form linear mean–variance equilibrium,
//!   efficient frontiers and fixed-point diagnostics.
//! - [`reference`]: small hand-checkable markets.
//! - [`io`], [`random`], [`suite`] and [`cli`]: scenario files, reports,
//!   seeded scenario generation, property suites and the `mveq` front end.

pub mod cli;
pub mod error;
pub mod io;
pub mod linalg;
pub mod linear_mv;
pub mod mvh;
pub mod process;
pub mod quadratic;
pub mod random;
pub mod reference;
pub mod scenario;
pub mod stoch;
pub mod suite;
pub mod tree;

pub use error::{Error, Result};
pub use process::{AdaptedProcess, PredictableProcess};
pub use scenario::{AgentSpec, Preference, Scenario};
pub use tree::FiltrationTree;

use serde::{Deserialize, Serialize};

/// Numerical tolerances shared by every check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Absolute tolerance for equality and zero tests.
    pub tol: f64,
    /// Eigenvalue cut-off of least-squares Gram matrices, relative to the largest diagonal entry.
    pub rank: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            rank: 1e-10,
        }
    }
}

impl Tolerances {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }

    pub fn is_zero(&self, x: f64) -> bool {
        x.abs() <= self.tol
    }
}
