use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{MeasurementRecord, TimeGrid};
use crate::channel::BasisDecomposition;
use crate::error::{Result, TomographyError};
use crate::operator::{singular_values, ComplexMatrix, RANK_TOL};

pub const DEFAULT_GRID_CANDIDATES: usize = 256;
/// λ-matrix condition numbers above this are flagged in reports.
pub const LAMBDA_CONDITION_WARNING: f64 = 1e8;

/// `[λ_k(t_j)]`, one row per instant.
pub fn lambda_matrix(decomp: &BasisDecomposition, grid: &TimeGrid) -> Result<ComplexMatrix> {
    let mut out = ComplexMatrix::zeros(grid.len(), decomp.mu());
    for (j, &t) in grid.instants().iter().enumerate() {
        for (k, signal) in decomp.signals().iter().enumerate() {
            out[(j, k)] = signal.eval(t)?;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Solvability {
    /// `p = μ`.
    pub square: bool,
    /// Square with smallest singular value above `1e-9 ×` the largest.
    pub invertible: bool,
    /// Smallest singular value above the threshold (least-squares mode).
    pub full_column_rank: bool,
    /// Largest over smallest singular value (`inf` when singular).
    pub condition: f64,
}

pub fn check_solvability(lm: &ComplexMatrix) -> Solvability {
    let square = lm.nrows() == lm.ncols();
    let sv = singular_values(lm);
    let max = sv.iter().cloned().fold(0.0_f64, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let enough_rows = lm.nrows() >= lm.ncols() && lm.ncols() > 0;
    let nondegenerate = enough_rows && max > 0.0 && min > RANK_TOL * max;
    let condition = if max > 0.0 && min > 0.0 { max / min } else { f64::INFINITY };
    Solvability { square, invertible: square && nondegenerate, full_column_rank: nondegenerate, condition }
}

fn abs_det(m: &ComplexMatrix) -> f64 {
    m.clone().lu().determinant().norm()
}

/// Randomized search for well-conditioned measurement instants in
/// `[0, horizon]`: `candidates` sorted random grids of `p` points, keeping the
/// one with the largest `|det|` (`p = μ`) or smallest singular value (`p > μ`).
pub fn select_time_grid(
    decomp: &BasisDecomposition,
    horizon: f64,
    p: usize,
    candidates: usize,
    seed: u64,
) -> Result<TimeGrid> {
    let mu = decomp.mu();
    if p < mu {
        return Err(TomographyError::InvalidInput(format!("need at least mu = {mu} instants, got {p}")));
    }
    if !horizon.is_finite() || horizon <= 0.0 {
        return Err(TomographyError::InvalidInput(format!("horizon must be positive, got {horizon}")));
    }
    if candidates == 0 {
        return Err(TomographyError::InvalidInput("candidate count must be positive".into()));
    }
    let mut lo = 0.0;
    if let Some((start, end)) = decomp.domain() {
        if horizon > end || start > horizon {
            return Err(TomographyError::TimeOutOfRange { t: horizon, start, end });
        }
        lo = start.max(0.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(f64, TimeGrid)> = None;
    for _ in 0..candidates {
        let mut times: Vec<f64> = (0..p).map(|_| rng.random_range(lo..=horizon)).collect();
        times.sort_by(f64::total_cmp);
        let Ok(grid) = TimeGrid::new(times) else { continue };
        let lm = lambda_matrix(decomp, &grid)?;
        let score = if p == mu {
            abs_det(&lm)
        } else {
            singular_values(&lm).iter().cloned().fold(f64::INFINITY, f64::min)
        };
        if score.is_finite() && best.as_ref().is_none_or(|(s, _)| score > *s) {
            best = Some((score, grid));
        }
    }
    let Some((_, grid)) = best else {
        return Err(TomographyError::DegenerateSignals("no admissible candidate grid".into()));
    };
    let check = check_solvability(&lambda_matrix(decomp, &grid)?);
    let ok = if p == mu { check.invertible } else { check.full_column_rank };
    if !ok {
        return Err(TomographyError::DegenerateSignals(format!(
            "best of {candidates} grids is still singular (condition {:e})",
            check.condition
        )));
    }
    Ok(grid)
}

/// Solves the per-observable λ-matrix systems for the projections
/// `Tr{(Q_i ∘ A_kᵀ) ρ(0)}`; rows index observables, columns basis elements.
///
/// Square invertible systems are solved exactly; taller systems with full
/// column rank by least squares.
pub fn solve_projections(record: &MeasurementRecord, lm: &ComplexMatrix) -> Result<DMatrix<Complex64>> {
    let p = record.grid().len();
    if lm.nrows() != p {
        return Err(TomographyError::shape("lambda matrix", (p, lm.ncols()), lm.shape()));
    }
    let check = check_solvability(lm);
    let rhs: ComplexMatrix = record.values().transpose().map(|v| Complex64::new(v, 0.0));
    let solution = if check.invertible {
        lm.clone()
            .lu()
            .solve(&rhs)
            .ok_or_else(|| TomographyError::Solvability("LU factorization is singular".into()))?
    } else if !check.square && check.full_column_rank {
        let svd = lm.clone().svd(true, true);
        let max = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
        svd.solve(&rhs, RANK_TOL * max).map_err(|e| TomographyError::Solvability(e.to_string()))?
    } else {
        let reason = if check.square {
            format!("determinant vanishes (condition {:e})", check.condition)
        } else if lm.nrows() < lm.ncols() {
            format!("p = {} < mu = {}", lm.nrows(), lm.ncols())
        } else {
            format!("rank deficient columns (condition {:e})", check.condition)
        };
        return Err(TomographyError::Solvability(reason));
    };
    Ok(solution.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{DampingModel, ScalarSignal};
    use crate::operator::{c64, ones, pauli_x, pauli_y, pauli_z, Observable};
    use crate::tomography::simulate_measurements;
    use std::f64::consts::LN_2;

    fn dephasing_decomp() -> BasisDecomposition {
        DampingModel::dephasing(1.0).decomposition().unwrap().clone()
    }

    fn real(rows: usize, cols: usize, data: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_row_slice(rows, cols, &data.iter().map(|&x| c64(x, 0.0)).collect::<Vec<_>>())
    }

    #[test]
    fn lambda_matrix_dephasing() {
        let lm = lambda_matrix(&dephasing_decomp(), &TimeGrid::new(vec![0.0, LN_2]).unwrap()).unwrap();
        assert!((lm - real(2, 2, &[1.0, 1.0, 1.0, 0.5])).norm() < 1e-15);
    }

    #[test]
    fn lambda_matrix_constant_signal() {
        let d = BasisDecomposition::new(vec![ones(2)], vec![ScalarSignal::constant(c64(1.0, 0.0))]).unwrap();
        let lm = lambda_matrix(&d, &TimeGrid::new(vec![0.0, 1.0, 2.0]).unwrap()).unwrap();
        assert_eq!(lm, ComplexMatrix::from_element(3, 1, c64(1.0, 0.0)));
    }

    #[test]
    fn solvability_examples() {
        let s = check_solvability(&real(2, 2, &[1.0, 1.0, 1.0, 0.5]));
        assert!(s.square && s.invertible);
        // oracle: singular values are square roots of the eigenvalues of AᵀA
        let ata: [[f64; 2]; 2] = [[2.0, 1.5], [1.5, 1.25]];
        let tr = ata[0][0] + ata[1][1];
        let det = ata[0][0] * ata[1][1] - ata[0][1] * ata[1][0];
        let disc = (tr * tr / 4.0 - det).sqrt();
        let oracle = ((tr / 2.0 + disc) / (tr / 2.0 - disc)).sqrt();
        assert!((s.condition - oracle).abs() < 1e-12);
        // symmetric matrix: eigenvalues (1.5 ± √4.25)/2, ratio ≈ 6.3423
        assert!((s.condition - 6.3423).abs() < 1e-4);

        let s = check_solvability(&real(2, 2, &[1.0, 1.0, 1.0, 1.0]));
        assert!(s.square && !s.invertible);

        let s = check_solvability(&real(3, 2, &[1.0, 1.0, 1.0, 0.5, 1.0, 0.25]));
        assert!(!s.square && !s.invertible && s.full_column_rank);
    }

    #[test]
    fn grid_selection() {
        let grid = select_time_grid(&dephasing_decomp(), 2.0, 2, DEFAULT_GRID_CANDIDATES, 1).unwrap();
        assert_eq!(grid.len(), 2);
        assert!(grid.instants()[0] != grid.instants()[1]);
        assert!(check_solvability(&lambda_matrix(&dephasing_decomp(), &grid).unwrap()).invertible);

        let single = BasisDecomposition::new(vec![ones(2)], vec![ScalarSignal::constant(c64(1.0, 0.0))]).unwrap();
        assert_eq!(select_time_grid(&single, 1.0, 1, 8, 0).unwrap().len(), 1);

        let twins = BasisDecomposition::new(
            vec![ones(2), pauli_z()],
            vec![ScalarSignal::decay(0.5), ScalarSignal::decay(0.5)],
        )
        .unwrap();
        assert!(matches!(
            select_time_grid(&twins, 3.0, 2, DEFAULT_GRID_CANDIDATES, 0),
            Err(TomographyError::DegenerateSignals(_))
        ));
        assert!(select_time_grid(&dephasing_decomp(), 2.0, 1, 8, 0).is_err());
    }

    #[test]
    fn grid_selection_is_seeded() {
        let a = select_time_grid(&dephasing_decomp(), 2.0, 3, 64, 9).unwrap();
        let b = select_time_grid(&dephasing_decomp(), 2.0, 3, 64, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn projections_for_dephasing() {
        let obs = vec![Observable::new("Q2", pauli_y() + pauli_z()).unwrap()];
        let grid = TimeGrid::new(vec![0.0, LN_2]).unwrap();
        let record = MeasurementRecord::new(obs, grid.clone(), DMatrix::from_row_slice(1, 2, &[0.6, 0.4])).unwrap();
        let lm = lambda_matrix(&dephasing_decomp(), &grid).unwrap();
        let proj = solve_projections(&record, &lm).unwrap();
        assert!((proj[(0, 0)] - c64(0.2, 0.0)).norm() < 1e-12);
        assert!((proj[(0, 1)] - c64(0.4, 0.0)).norm() < 1e-12);

        let zero = record.with_values(DMatrix::zeros(1, 2)).unwrap();
        assert_eq!(solve_projections(&zero, &lm).unwrap(), ComplexMatrix::zeros(1, 2));
    }

    #[test]
    fn projections_reject_singular_systems() {
        let obs = vec![Observable::new("Q1", pauli_x()).unwrap()];
        let grid = TimeGrid::new(vec![0.0, 1.0]).unwrap();
        let record = MeasurementRecord::new(obs, grid, DMatrix::from_row_slice(1, 2, &[0.2, 0.1])).unwrap();
        let err = solve_projections(&record, &real(2, 2, &[1.0, 1.0, 1.0, 1.0])).unwrap_err();
        assert!(matches!(err, TomographyError::Solvability(_)));
        assert!(solve_projections(&record, &real(3, 2, &[1.0; 6])).is_err());
    }

    #[test]
    fn overdetermined_least_squares() {
        let model = DampingModel::dephasing(1.0);
        let rho = crate::operator::DensityMatrix::new(ComplexMatrix::from_row_slice(
            2,
            2,
            &[c64(0.6, 0.0), c64(0.1, -0.2), c64(0.1, 0.2), c64(0.4, 0.0)],
        ))
        .unwrap();
        let obs = vec![Observable::new("Q2", pauli_y() + pauli_z()).unwrap()];
        let grid = TimeGrid::new(vec![0.0, 0.4, 1.1, 2.0]).unwrap();
        let record = simulate_measurements(&model, &rho, &obs, &grid, 0.0, 0).unwrap();
        let lm = lambda_matrix(&dephasing_decomp(), &grid).unwrap();
        let proj = solve_projections(&record, &lm).unwrap();
        assert!((proj[(0, 0)] - c64(0.2, 0.0)).norm() < 1e-12);
        assert!((proj[(0, 1)] - c64(0.4, 0.0)).norm() < 1e-12);
    }
}
