//! Exact simulation and closed-form analysis of single-photon-assisted
//! entanglement concentration for `N`-photon W-class states.
//!
//! - [`qstate`]: dense pure-state engine over polarization qubits.
//! - [`pcd`]: cross-Kerr parity-check detector as a parity projection.
//! - [`ecp`]: the concentration round, parameter recycling and run trees,
//!   all computed on the state vector.
//! - [`analytics`]: closed-form probabilities, series and sweeps.
//! - [`mc`]: seeded Monte Carlo trajectories.

pub mod analytics;
pub mod ecp;
pub mod error;
pub mod mc;
pub mod pcd;
pub mod qstate;

pub use analytics::{ClosedForms, Coefficient, SweepRow, SweepTable};
pub use ecp::{RoundOutcome, RunTree, WClassParams};
pub use error::{Error, Result};
pub use pcd::{Parity, PcdModel};
pub use qstate::{Polarization, PureState, QubitIndex};
