use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::channel::BasisDecomposition;
use crate::error::{Result, TomographyError};
use crate::operator::{
    hadamard, hermitian_basis, identity, min_eigenvalue, nearest_density, numerical_rank, trace_product,
    ComplexMatrix, DensityMatrix, Observable, RANK_TOL,
};

/// Design-matrix condition number above which a report carries a warning.
pub const DESIGN_CONDITION_LIMIT: f64 = 1e12;

/// `Q_i ∘ A_kᵀ` for every observable `i` and basis element `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameOperators {
    dim: usize,
    operators: Vec<Vec<ComplexMatrix>>,
}

impl FrameOperators {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn observable_count(&self) -> usize {
        self.operators.len()
    }

    pub fn mu(&self) -> usize {
        self.operators.first().map_or(0, Vec::len)
    }

    pub fn get(&self, observable: usize, k: usize) -> &ComplexMatrix {
        &self.operators[observable][k]
    }

    pub fn row(&self, observable: usize) -> &[ComplexMatrix] {
        &self.operators[observable]
    }

    pub fn iter(&self) -> impl Iterator<Item = &ComplexMatrix> {
        self.operators.iter().flatten()
    }

    /// Frame restricted to a subset of observables, in the given order.
    pub fn select(&self, observables: &[usize]) -> FrameOperators {
        FrameOperators { dim: self.dim, operators: observables.iter().map(|&i| self.operators[i].clone()).collect() }
    }
}

pub fn frame_operators(observables: &[Observable], decomp: &BasisDecomposition) -> Result<FrameOperators> {
    let n = decomp.dim();
    let mut operators = Vec::with_capacity(observables.len());
    for q in observables {
        if q.dim() != n {
            return Err(TomographyError::shape("frame_operators", (n, n), (q.dim(), q.dim())));
        }
        let row = decomp
            .basis()
            .iter()
            .map(|a| hadamard(q.matrix(), &a.transpose()))
            .collect::<Result<Vec<_>>>()?;
        operators.push(row);
    }
    Ok(FrameOperators { dim: n, operators })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Completeness {
    /// Complex span equals the full operator space.
    pub complete: bool,
    /// Dimension of the complex span of the frame.
    pub span_dimension: usize,
    /// `n² - span_dimension`.
    pub deficit: usize,
    /// Rank of the real functionals `ρ ↦ Re/Im Tr(Mρ)` on Hermitian `ρ`.
    pub hermitian_span_dimension: usize,
}

fn frame_with_trace(frame: &FrameOperators, include_trace_constraint: bool) -> Vec<ComplexMatrix> {
    let mut ops: Vec<ComplexMatrix> = frame.iter().cloned().collect();
    if include_trace_constraint {
        ops.push(identity(frame.dim));
    }
    ops
}

fn span_dimension(ops: &[ComplexMatrix]) -> usize {
    if ops.is_empty() {
        return 0;
    }
    numerical_rank(ops, RANK_TOL).unwrap_or(0)
}

/// Real design matrix over Gell-Mann coordinates: two rows (real and
/// imaginary part) per operator.
fn hermitian_design(ops: &[ComplexMatrix], n: usize) -> Result<DMatrix<f64>> {
    let basis = hermitian_basis(n)?;
    let mut design = DMatrix::zeros(2 * ops.len(), basis.len());
    for (r, m) in ops.iter().enumerate() {
        for (a, g) in basis.operators().iter().enumerate() {
            let v = trace_product(m, g)?;
            design[(2 * r, a)] = v.re;
            design[(2 * r + 1, a)] = v.im;
        }
    }
    Ok(design)
}

fn real_rank(m: &DMatrix<f64>) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0_f64, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_TOL * max).count()
}

pub fn check_completeness(frame: &FrameOperators, include_trace_constraint: bool) -> Completeness {
    let n = frame.dim;
    let ops = frame_with_trace(frame, include_trace_constraint);
    let span = span_dimension(&ops);
    let hermitian = if n >= 2 { hermitian_design(&ops, n).map(|d| real_rank(&d)).unwrap_or(0) } else { span };
    Completeness {
        complete: span == n * n,
        span_dimension: span,
        deficit: n * n - span.min(n * n),
        hermitian_span_dimension: hermitian,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionReport {
    /// Reported state: the raw estimate, or its projection when requested.
    pub state: ComplexMatrix,
    /// Least-squares solution before any projection.
    pub raw_estimate: ComplexMatrix,
    /// Whether `state` satisfies every density-matrix invariant.
    pub physical: bool,
    pub min_eigenvalue: f64,
    pub complete: bool,
    pub span_dimension: usize,
    pub deficit: usize,
    pub hermitian_span_dimension: usize,
    /// Condition number of `[λ_k(t_j)]`, when reconstruction started from a record.
    pub lambda_condition: Option<f64>,
    pub design_condition: f64,
    /// Misfit of the projection equations.
    pub residual: f64,
    /// Misfit between the measured record and the one predicted by `raw_estimate`.
    pub record_residual: Option<f64>,
    pub projected_to_density: bool,
    pub warnings: Vec<String>,
}

impl ReconstructionReport {
    pub fn density(&self) -> Result<DensityMatrix> {
        DensityMatrix::new(self.state.clone())
    }
}

/// Recovers `ρ(0)` from its frame projections.
///
/// `ρ` is parametrized by real coordinates over the Gell-Mann basis; each
/// projection `Tr(Mρ) = v` contributes its real and imaginary parts as two
/// equations, and the trace constraint adds `Tr ρ = 1`. The stacked system is
/// solved by least squares. Positivity is only imposed when
/// `project_to_density` is set.
pub fn reconstruct_state(
    projections: &DMatrix<Complex64>,
    frame: &FrameOperators,
    include_trace_constraint: bool,
    project_to_density: bool,
) -> Result<ReconstructionReport> {
    let n = frame.dim;
    if projections.shape() != (frame.observable_count(), frame.mu()) {
        return Err(TomographyError::shape(
            "projections",
            (frame.observable_count(), frame.mu()),
            projections.shape(),
        ));
    }
    let completeness = check_completeness(frame, include_trace_constraint);
    if !completeness.complete {
        return Err(TomographyError::Incomplete {
            span_dimension: completeness.span_dimension,
            deficit: completeness.deficit,
        });
    }

    let ops = frame_with_trace(frame, include_trace_constraint);
    let design = hermitian_design(&ops, n)?;
    let mut rhs = DVector::zeros(design.nrows());
    for i in 0..frame.observable_count() {
        for k in 0..frame.mu() {
            let r = i * frame.mu() + k;
            rhs[2 * r] = projections[(i, k)].re;
            rhs[2 * r + 1] = projections[(i, k)].im;
        }
    }
    if include_trace_constraint {
        rhs[design.nrows() - 2] = 1.0;
    }

    let svd = design.clone().svd(true, true);
    let max = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    let min = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
    let design_condition = if min > 0.0 { max / min } else { f64::INFINITY };
    let coords = svd.solve(&rhs, RANK_TOL * max).map_err(|e| TomographyError::EigenFailure(e.to_string()))?;
    let residual = (&design * &coords - &rhs).norm();

    let basis = hermitian_basis(n)?;
    let raw_estimate = basis.resum(coords.as_slice())?;

    let mut warnings = Vec::new();
    if design_condition > DESIGN_CONDITION_LIMIT {
        warnings.push(format!("ill-conditioned reconstruction system (condition {design_condition:e})"));
    }

    let (state, projected) = if project_to_density {
        (nearest_density(&raw_estimate)?.into_matrix(), true)
    } else {
        (raw_estimate.clone(), false)
    };
    let min_eig = min_eigenvalue(&state)?;
    let physical = DensityMatrix::new(state.clone()).is_ok();
    if !physical {
        warnings.push(format!("estimate is not a valid density matrix (min eigenvalue {min_eig:e})"));
    }

    Ok(ReconstructionReport {
        state,
        raw_estimate,
        physical,
        min_eigenvalue: min_eig,
        complete: true,
        span_dimension: completeness.span_dimension,
        deficit: completeness.deficit,
        hermitian_span_dimension: completeness.hermitian_span_dimension,
        lambda_condition: None,
        design_condition,
        residual,
        record_residual: None,
        projected_to_density: projected,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimalObservables {
    /// Positions in the dictionary, in selection order.
    pub indices: Vec<usize>,
    pub subset: Vec<Observable>,
    pub size: usize,
}

/// Greedy forward selection of observables until the trace-augmented frame
/// is complete. Each step takes the observable with the largest span gain,
/// lowest dictionary index on ties.
pub fn minimal_observables(dictionary: &[Observable], decomp: &BasisDecomposition) -> Result<MinimalObservables> {
    let frame = frame_operators(dictionary, decomp)?;
    let n = frame.dim;
    let full = check_completeness(&frame, true);
    if !full.complete {
        return Err(TomographyError::Incomplete { span_dimension: full.span_dimension, deficit: full.deficit });
    }
    // `current` is kept linearly independent, so its length is the span dimension
    let mut current = vec![identity(n)];
    let mut indices = Vec::new();
    while current.len() < n * n {
        let span = current.len();
        let mut best: Option<(usize, usize)> = None;
        for i in (0..dictionary.len()).filter(|i| !indices.contains(i)) {
            let mut trial = current.clone();
            trial.extend(frame.row(i).iter().cloned());
            let s = span_dimension(&trial);
            if best.is_none_or(|(_, bs)| s > bs) {
                best = Some((i, s));
            }
        }
        let Some((i, _)) = best.filter(|&(_, s)| s > span) else {
            return Err(TomographyError::Incomplete { span_dimension: span, deficit: n * n - span });
        };
        indices.push(i);
        for m in frame.row(i) {
            current.push(m.clone());
            if span_dimension(&current) < current.len() {
                current.pop();
            }
        }
    }
    let subset = indices.iter().map(|&i| dictionary[i].clone()).collect();
    Ok(MinimalObservables { size: indices.len(), indices, subset })
}
