//! Dynamic quantum state tomography for phase-damping channels.
//!
//! A phase-damping channel acts entrywise, `ρ(t) = D(t) ∘ ρ(0)`. Measuring a
//! small fixed set of observables at several instants, together with a
//! constant-basis decomposition of `D(t)`, can determine `ρ(0)` even when a
//! single-time measurement of the same observables could not.
//!
//! - [`operator`]: dense complex-matrix substrate.
//! - [`channel`]: channel representation, validation and decomposition.
//! - [`decoherence`]: channels synthesized from pure-decoherence models.
//! - [`tomography`]: measurement simulation, solvability, completeness and
//!   state reconstruction.
//! - [`io`]: CSV/JSON formats.

pub mod channel;
pub mod decoherence;
pub mod error;
pub mod io;
pub mod operator;
pub mod tomography;

pub use channel::{BasisDecomposition, DampingModel, ExpTerm, ScalarSignal, ValidationReport};
pub use decoherence::{CoefficientMatrix, PureDecoherenceModel};
pub use error::{Result, TomographyError};
pub use operator::{ComplexMatrix, DensityMatrix, HermitianBasis, Observable};
pub use tomography::{MeasurementRecord, ReconstructionOptions, ReconstructionReport, TimeGrid};

pub use num_complex::Complex64;
