use crate::error::{Result, TomographyError};
use crate::operator::{identity, pauli_x, pauli_y, pauli_z, ComplexMatrix, DensityMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct DephasingEstimate {
    pub state: ComplexMatrix,
    /// `false` when the data put the Bloch vector outside the unit ball.
    pub physical: bool,
    pub sigma1: f64,
    pub sigma2: f64,
    pub sigma3: f64,
}

/// Closed-form qubit reconstruction under dephasing `D(t) = I + e^{-γt} σ₁`
/// from `m₁(0) = Tr σ₁ρ`, and `m₂` at `0` and `t` for `Q₂ = σ₂ + σ₃`.
pub fn dephasing_closed_form(m1_0: f64, m2_0: f64, m2_t: f64, gamma: f64, t: f64) -> Result<DephasingEstimate> {
    if gamma.is_nan() || gamma <= 0.0 || t.is_nan() || t <= 0.0 {
        return Err(TomographyError::DivisionDegenerate(format!(
            "need gamma > 0 and t > 0, got gamma = {gamma}, t = {t}"
        )));
    }
    let decay = (-gamma * t).exp();
    // e^{-γt} - 1
    let denom = (-gamma * t).exp_m1();
    if denom == 0.0 || !denom.is_finite() {
        return Err(TomographyError::DivisionDegenerate(format!("e^(-gamma t) - 1 = {denom}")));
    }
    let sigma2 = (m2_t - m2_0) / denom;
    let sigma3 = (m2_0 * decay - m2_t) / denom;
    let state = (identity(2) + pauli_x().scale(m1_0) + pauli_y().scale(sigma2) + pauli_z().scale(sigma3)).scale(0.5);
    let physical = DensityMatrix::new(state.clone()).is_ok();
    Ok(DephasingEstimate { state, physical, sigma1: m1_0, sigma2, sigma3 })
}
