use nalgebra::DMatrix;

use super::{
    check_solvability, frame_operators, lambda_matrix, reconstruct_state, solve_projections, MeasurementRecord,
    ReconstructionReport, LAMBDA_CONDITION_WARNING,
};
use crate::channel::BasisDecomposition;
use crate::error::Result;
use crate::operator::trace_product;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReconstructionOptions {
    pub trace_augmentation: bool,
    pub project_to_density: bool,
}

impl Default for ReconstructionOptions {
    fn default() -> Self {
        ReconstructionOptions { trace_augmentation: true, project_to_density: false }
    }
}

/// Record → λ-matrix → projections → frame → state.
pub fn reconstruct_from_record(
    record: &MeasurementRecord,
    decomp: &BasisDecomposition,
    options: ReconstructionOptions,
) -> Result<ReconstructionReport> {
    let lm = lambda_matrix(decomp, record.grid())?;
    let solvability = check_solvability(&lm);
    let projections = solve_projections(record, &lm)?;
    let frame = frame_operators(record.observables(), decomp)?;
    let mut report = reconstruct_state(&projections, &frame, options.trace_augmentation, options.project_to_density)?;

    report.lambda_condition = Some(solvability.condition);
    if solvability.condition > LAMBDA_CONDITION_WARNING {
        report.warnings.push(format!("ill-conditioned lambda matrix (condition {:e})", solvability.condition));
    }

    let mut predicted = DMatrix::zeros(record.observables().len(), record.grid().len());
    for i in 0..frame.observable_count() {
        let frame_values = frame
            .row(i)
            .iter()
            .map(|m| trace_product(m, &report.raw_estimate))
            .collect::<Result<Vec<_>>>()?;
        for j in 0..record.grid().len() {
            let m: num_complex::Complex64 = (0..frame.mu()).map(|k| lm[(j, k)] * frame_values[k]).sum();
            predicted[(i, j)] = m.re;
        }
    }
    report.record_residual = Some((predicted - record.values()).norm());
    Ok(report)
}
