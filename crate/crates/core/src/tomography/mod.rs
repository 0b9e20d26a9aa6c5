//! Dynamic state tomography for phase-damping channels.
//!
//! Each observable `Q_i` measured at `p` instants yields the linear system
//! `m_i(t_j) = Σ_k λ_k(t_j) Tr{(Q_i ∘ A_kᵀ) ρ(0)}`. Solving it gives the
//! projections of `ρ(0)` onto the frame operators `Q_i ∘ A_kᵀ`; when those
//! span the operator space, `ρ(0)` follows by least squares.

mod dephasing;
mod frame;
mod pipeline;
mod solve;

pub use dephasing::{dephasing_closed_form, DephasingEstimate};
pub use frame::{
    check_completeness, frame_operators, minimal_observables, reconstruct_state, Completeness, FrameOperators,
    MinimalObservables, ReconstructionReport, DESIGN_CONDITION_LIMIT,
};
pub use pipeline::{reconstruct_from_record, ReconstructionOptions};
pub use solve::{
    check_solvability, lambda_matrix, select_time_grid, solve_projections, Solvability, DEFAULT_GRID_CANDIDATES,
    LAMBDA_CONDITION_WARNING,
};

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::channel::{evaluate, DampingModel};
use crate::error::{Result, TomographyError};
use crate::operator::{hadamard, trace_product, DensityMatrix, Observable};

/// Strictly increasing, nonnegative measurement instants.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    instants: Vec<f64>,
}

impl TimeGrid {
    pub fn new(instants: Vec<f64>) -> Result<Self> {
        if instants.is_empty() {
            return Err(TomographyError::InvalidInput("time grid is empty".into()));
        }
        if instants.iter().any(|t| !t.is_finite()) {
            return Err(TomographyError::NonFinite);
        }
        if let Some(&t) = instants.iter().find(|&&t| t < 0.0) {
            return Err(TomographyError::NegativeTime(t));
        }
        if instants.windows(2).any(|w| w[1] <= w[0]) {
            return Err(TomographyError::InvalidInput("time grid must be strictly increasing".into()));
        }
        Ok(TimeGrid { instants })
    }

    pub fn instants(&self) -> &[f64] {
        &self.instants
    }

    pub fn len(&self) -> usize {
        self.instants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instants.is_empty()
    }
}

/// Expectation values `m_i(t_j)`, observables by row and instants by column.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    observables: Vec<Observable>,
    grid: TimeGrid,
    values: DMatrix<f64>,
}

impl MeasurementRecord {
    pub fn new(observables: Vec<Observable>, grid: TimeGrid, values: DMatrix<f64>) -> Result<Self> {
        if values.shape() != (observables.len(), grid.len()) {
            return Err(TomographyError::shape("measurement record", (observables.len(), grid.len()), values.shape()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(TomographyError::NonFinite);
        }
        if let Some(first) = observables.first() {
            if observables.iter().any(|q| q.dim() != first.dim()) {
                return Err(TomographyError::InvalidInput("observables have different dimensions".into()));
            }
        }
        Ok(MeasurementRecord { observables, grid, values })
    }

    pub fn observables(&self) -> &[Observable] {
        &self.observables
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    /// Same record with replaced values (shape must match).
    pub fn with_values(&self, values: DMatrix<f64>) -> Result<Self> {
        MeasurementRecord::new(self.observables.clone(), self.grid.clone(), values)
    }
}

/// `m_i(t_j) = Tr{Q_i (D(t_j) ∘ ρ₀)}`, plus i.i.d. Gaussian noise of standard
/// deviation `noise_sigma` drawn from a ChaCha8 stream seeded with `seed`
/// (observable-major order).
pub fn simulate_measurements(
    model: &DampingModel,
    rho0: &DensityMatrix,
    observables: &[Observable],
    grid: &TimeGrid,
    noise_sigma: f64,
    seed: u64,
) -> Result<MeasurementRecord> {
    let n = model.dim();
    if rho0.dim() != n {
        return Err(TomographyError::shape("simulate_measurements", (n, n), (rho0.dim(), rho0.dim())));
    }
    if let Some(q) = observables.iter().find(|q| q.dim() != n) {
        return Err(TomographyError::shape("observable", (n, n), (q.dim(), q.dim())));
    }
    if !noise_sigma.is_finite() || noise_sigma < 0.0 {
        return Err(TomographyError::InvalidInput(format!("noise sigma must be >= 0, got {noise_sigma}")));
    }
    let mut values = DMatrix::zeros(observables.len(), grid.len());
    for (j, &t) in grid.instants().iter().enumerate() {
        let evolved = hadamard(&evaluate(model, t)?, rho0.matrix())?;
        for (i, q) in observables.iter().enumerate() {
            values[(i, j)] = trace_product(q.matrix(), &evolved)?.re;
        }
    }
    if noise_sigma > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, noise_sigma).map_err(|e| TomographyError::InvalidInput(e.to_string()))?;
        for i in 0..observables.len() {
            for j in 0..grid.len() {
                values[(i, j)] += normal.sample(&mut rng);
            }
        }
    }
    MeasurementRecord::new(observables.to_vec(), grid.clone(), values)
}
