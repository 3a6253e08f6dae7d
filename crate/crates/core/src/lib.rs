//! Gaussian simulation of feedforward cloning machines for coherent states.
//!
//! - [`gaussian`]: multimode Gaussian states, linear optics, homodyne
//!   conditioning and coherent-state fidelity.
//! - [`cloner`]: the tap / detect / displace / split machine, as an analytic
//!   input-output map and as an executable circuit.
//! - [`benchmarks`]: alphabets, average fidelities, classical limits and the
//!   known-phase optimality bound.
//! - [`optimizer`]: numerical optimization of the machine and of the
//!   classical strategies, certified against the closed forms.
//! - [`montecarlo`]: trajectory-level simulation with sampled outcomes.

pub mod benchmarks;
pub mod cloner;
pub mod error;
pub mod gaussian;
pub mod montecarlo;
pub mod optimizer;
pub mod search;

pub use benchmarks::{Alphabet, FidelityReport, Regime};
pub use cloner::{Ancilla, CloneStatistics, ClonerConfig};
pub use error::{Error, Result};
pub use gaussian::{GaussianState, MeasurementRecord, Quadrature, QuadratureKind};
pub use montecarlo::{Estimate, TrajectoryBatch};
pub use optimizer::OptimizationResult;
